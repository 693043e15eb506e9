use rand::Rng;
use serde::{Deserialize, Serialize};

use super::format::{map_bits_to_ask, ModFormat};
use crate::signal::{generate_prbs, SimRng, PRBS_DEFAULT_SEED};
use crate::{Error, Result};

/// Training-header placement within a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeaderConfig {
    pub payload_symbols: usize,
    /// Preamble at the frame start.
    pub preamble_len: usize,
    /// Training block inserted after every `block_interval` payload symbols.
    pub block_len: usize,
    pub block_interval: usize,
    pub prbs_order: u32,
    pub prbs_seed: u32,
    /// Explicit `(offset, length)` blocks; replaces the periodic layout when set.
    pub custom_map: Option<Vec<(usize, usize)>>,
}

impl Default for HeaderConfig {
    fn default() -> Self {
        Self {
            payload_symbols: 34676,
            preamble_len: 64,
            block_len: 32,
            block_interval: 2048,
            prbs_order: 5,
            prbs_seed: PRBS_DEFAULT_SEED,
            custom_map: None,
        }
    }
}

impl HeaderConfig {
    /// `(offset, length)` of every training block and the total frame length.
    pub fn layout(&self) -> Result<(Vec<(usize, usize)>, usize)> {
        if let Some(map) = &self.custom_map {
            let training: usize = map.iter().map(|b| b.1).sum();
            let total = self.payload_symbols + training;
            validate_layout(map, total)?;
            return Ok((map.clone(), total));
        }
        if self.block_len > 0 && self.block_interval == 0 {
            return Err(Error::HeaderLayout("block interval must be nonzero".into()));
        }
        let mut map = Vec::new();
        let mut pos = 0;
        if self.preamble_len > 0 {
            map.push((0, self.preamble_len));
            pos = self.preamble_len;
        }
        let mut remaining = self.payload_symbols;
        while remaining > 0 {
            let chunk = if self.block_len > 0 { remaining.min(self.block_interval) } else { remaining };
            pos += chunk;
            remaining -= chunk;
            if remaining > 0 && self.block_len > 0 {
                map.push((pos, self.block_len));
                pos += self.block_len;
            }
        }
        validate_layout(&map, pos)?;
        Ok((map, pos))
    }
}

fn validate_layout(map: &[(usize, usize)], total: usize) -> Result<()> {
    let mut sorted = map.to_vec();
    sorted.sort();
    let mut end = 0;
    for (i, &(off, len)) in sorted.iter().enumerate() {
        if len == 0 {
            return Err(Error::HeaderLayout(format!("block at {off} is empty")));
        }
        if i > 0 && off < end {
            return Err(Error::HeaderLayout(format!("block at {off} overlaps the previous block ending at {end}")));
        }
        end = off + len;
        if end > total {
            return Err(Error::HeaderLayout(format!("block at {off} runs past the frame end {total}")));
        }
    }
    Ok(())
}

/// One polarization's symbol frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFrame {
    pub format: ModFormat,
    /// Complete frame, training blocks in place.
    pub symbols: Vec<f64>,
    pub payload_symbols: Vec<f64>,
    pub payload_bits: Vec<u8>,
    pub header_map: Vec<(usize, usize)>,
    /// Training symbols in frame order.
    pub training_symbols: Vec<f64>,
    pub training_mask: Vec<bool>,
}

impl SymbolFrame {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Frame indices that carry payload, in order.
    pub fn payload_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.training_mask[i]).collect()
    }

    /// Frame indices that carry training, in order.
    pub fn training_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.training_mask[i]).collect()
    }
}

/// Frame layout exported for the receiver harness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDescriptor {
    pub format: usize,
    pub header_map: Vec<(usize, usize)>,
    pub prbs_order: u32,
    pub prbs_seed: u32,
    pub payload_seed: u64,
    pub frame_len: usize,
    /// Payload bits as a string of '0'/'1'.
    pub payload_bits: String,
}

impl FrameDescriptor {
    pub fn new(frame: &SymbolFrame, header: &HeaderConfig, payload_seed: u64) -> Self {
        Self {
            format: frame.format.m(),
            header_map: frame.header_map.clone(),
            prbs_order: header.prbs_order,
            prbs_seed: header.prbs_seed,
            payload_seed,
            frame_len: frame.len(),
            payload_bits: frame.payload_bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Rebuilds the exact frame the descriptor came from.
    pub fn rebuild(&self, header: &HeaderConfig) -> Result<SymbolFrame> {
        let bits: Vec<u8> = self.payload_bits.bytes().map(|b| (b == b'1') as u8).collect();
        build_frame(&bits, &ModFormat::new(self.format)?, header)
    }
}

pub fn random_bits(n: usize, rng: &mut SimRng) -> Vec<u8> {
    (0..n).map(|_| rng.gen::<bool>() as u8).collect()
}

/// Interleaves payload symbols with PRBS training blocks.
///
/// Training bits are one continuous PRBS stream; consecutive blocks take
/// consecutive chunks of it. Bit 0 maps to the negative outer level.
pub fn build_frame(payload_bits: &[u8], fmt: &ModFormat, header: &HeaderConfig) -> Result<SymbolFrame> {
    let expected = header.payload_symbols * fmt.bits_per_symbol();
    if payload_bits.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: payload_bits.len(),
        });
    }
    let (header_map, total) = header.layout()?;
    let training_len: usize = header_map.iter().map(|b| b.1).sum();
    let outer = fmt.outer_level();
    let training_symbols: Vec<f64> = if training_len > 0 {
        generate_prbs(header.prbs_order, header.prbs_seed, training_len)?
            .into_iter()
            .map(|b| if b == 1 { outer } else { -outer })
            .collect()
    } else {
        Vec::new()
    };
    let payload_symbols = map_bits_to_ask(payload_bits, fmt)?;

    let mut training_mask = vec![false; total];
    for &(off, len) in &header_map {
        training_mask[off..off + len].iter_mut().for_each(|m| *m = true);
    }
    let mut symbols = Vec::with_capacity(total);
    let (mut ti, mut pi) = (0, 0);
    for &is_training in &training_mask {
        if is_training {
            symbols.push(training_symbols[ti]);
            ti += 1;
        } else {
            symbols.push(payload_symbols[pi]);
            pi += 1;
        }
    }
    Ok(SymbolFrame {
        format: fmt.clone(),
        symbols,
        payload_symbols,
        payload_bits: payload_bits.to_vec(),
        header_map,
        training_symbols,
        training_mask,
    })
}
