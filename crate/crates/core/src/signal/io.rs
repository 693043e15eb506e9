use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Waveform;
use crate::{Error, Result};

/// JSON sidecar written next to a binary waveform dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveformSidecar {
    pub sample_rate: f64,
    pub center_freq: f64,
    pub pols: usize,
}

/// Writes `pols` as little-endian f64 `(re, im)` pairs, one polarization after
/// another, to `bin_path`, plus `bin_path` with a `.json` extension.
pub fn write_waveforms(bin_path: &Path, pols: &[&Waveform]) -> Result<()> {
    let first = pols.first().ok_or_else(|| Error::invalid("nothing to write"))?;
    if pols.iter().any(|w| w.len() != first.len() || w.sample_rate != first.sample_rate) {
        return Err(Error::invalid("polarizations differ in length or rate"));
    }
    let mut bytes = Vec::with_capacity(pols.len() * first.len() * 16);
    for w in pols {
        for s in &w.samples {
            bytes.extend_from_slice(&s.re.to_le_bytes());
            bytes.extend_from_slice(&s.im.to_le_bytes());
        }
    }
    fs::write(bin_path, bytes).map_err(|e| Error::io(bin_path, e))?;
    let sidecar = WaveformSidecar {
        sample_rate: first.sample_rate,
        center_freq: first.center_freq,
        pols: pols.len(),
    };
    let json_path = bin_path.with_extension("json");
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    Ok(())
}

pub fn read_waveforms(bin_path: &Path) -> Result<Vec<Waveform>> {
    let json_path = bin_path.with_extension("json");
    let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let meta: WaveformSidecar = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", json_path.display())))?;
    let bytes = fs::read(bin_path).map_err(|e| Error::io(bin_path, e))?;
    if meta.pols == 0 || bytes.len() % (16 * meta.pols) != 0 {
        return Err(Error::Parse(format!(
            "{}: {} bytes do not divide into {} polarizations",
            bin_path.display(),
            bytes.len(),
            meta.pols
        )));
    }
    let per_pol = bytes.len() / 16 / meta.pols;
    let samples: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    samples
        .chunks(per_pol)
        .map(|chunk| Waveform::with_center(chunk.to_vec(), meta.sample_rate, meta.center_freq))
        .collect()
}
