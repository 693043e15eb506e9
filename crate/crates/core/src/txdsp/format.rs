use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bipolar m-ASK alphabet with binary-reflected Gray labelling.
///
/// Level index `i` (ascending amplitude) carries the bit pattern `i ^ (i >> 1)`,
/// most significant bit first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ModFormat {
    m: usize,
    levels: Vec<f64>,
    /// bit pattern -> level index
    gray_table: Vec<usize>,
}

impl TryFrom<usize> for ModFormat {
    type Error = Error;

    fn try_from(m: usize) -> Result<Self> {
        ModFormat::new(m)
    }
}

impl From<ModFormat> for usize {
    fn from(f: ModFormat) -> usize {
        f.m
    }
}

impl ModFormat {
    pub fn new(m: usize) -> Result<Self> {
        if !matches!(m, 2 | 4 | 8) {
            return Err(Error::invalid(format!("unsupported ASK cardinality {m}; expected 2, 4 or 8")));
        }
        let raw: Vec<f64> = (0..m).map(|i| 2.0 * i as f64 - (m as f64 - 1.0)).collect();
        let norm = (raw.iter().map(|v| v * v).sum::<f64>() / m as f64).sqrt();
        let levels = raw.iter().map(|v| v / norm).collect();
        let mut gray_table = vec![0; m];
        for idx in 0..m {
            gray_table[idx ^ (idx >> 1)] = idx;
        }
        Ok(Self { m, levels, gray_table })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.m.trailing_zeros() as usize
    }

    /// Ascending amplitudes with unit mean square.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn outer_level(&self) -> f64 {
        self.levels[self.m - 1]
    }

    /// Level index for a bit pattern (MSB first).
    pub fn level_index(&self, pattern: usize) -> usize {
        self.gray_table[pattern]
    }

    /// Bit pattern (MSB first) carried by a level index.
    pub fn pattern(&self, level_index: usize) -> usize {
        level_index ^ (level_index >> 1)
    }

    /// Nearest level index on the real axis; midpoints go to the lower level.
    pub fn slice(&self, x: f64) -> usize {
        self.levels.windows(2).take_while(|w| x > 0.5 * (w[0] + w[1])).count()
    }

    pub fn name(&self) -> String {
        format!("{}ask", self.m)
    }
}

/// Maps bits (MSB first per symbol) to unit-power bipolar ASK amplitudes.
pub fn map_bits_to_ask(bits: &[u8], fmt: &ModFormat) -> Result<Vec<f64>> {
    let k = fmt.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::IndivisibleBits {
            bits: bits.len(),
            per_symbol: k,
        });
    }
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let pattern = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
            fmt.levels[fmt.level_index(pattern)]
        })
        .collect())
}
