use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::penalty::{compute_penalty, margins, rate_accounting, Margins, Rates, HD_FEC_OVERHEAD_PCT, SD_FEC_OVERHEAD_PCT, SD_FEC_Q2_DB};
use super::sweep::{MetricsTable, SweepKind};
use super::theory::theory_osnr_for_q2;
use crate::rxdsp::{write_constellation_csv, RxOutput};
use crate::signal::Spectrum;
use crate::txdsp::{ModFormat, SymbolFrame};
use crate::{Error, Result};

/// Launch-power optimum and peak Q² of the measured 120-km link, kept for comparison only.
pub const REFERENCE_OPTIMUM_DBM: f64 = 7.4;
pub const REFERENCE_PEAK_Q2_DB: f64 = 8.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub sweep_value: f64,
    pub q2_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: SweepKind,
    pub format: String,
    pub theory_osnr_at_sd_fec_db: f64,
    /// OSNR penalty at the SD-FEC threshold (b2b only, when bracketed).
    pub penalty_db: Option<f64>,
    pub peak: Option<Peak>,
    pub peak_margins: Option<Margins>,
    pub rates_sd_fec: Rates,
    pub rates_hd_fec: Rates,
    pub reference_optimum_dbm: Option<f64>,
    pub reference_peak_q2_db: Option<f64>,
}

pub fn summarize(table: &MetricsTable, fmt: &ModFormat, symbol_rate: f64) -> Result<Summary> {
    let pooled = table.pooled();
    let peak = pooled
        .iter()
        .filter_map(|r| r.q2_db.or(r.q2_gauss_db).map(|q| (r.sweep_value, q)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(sweep_value, q2_db)| Peak { sweep_value, q2_db });
    let link = table.metadata.kind == SweepKind::Link;
    Ok(Summary {
        kind: table.metadata.kind,
        format: fmt.name(),
        theory_osnr_at_sd_fec_db: theory_osnr_for_q2(SD_FEC_Q2_DB, fmt, symbol_rate)?,
        penalty_db: if link { None } else { compute_penalty(table, fmt, symbol_rate, SD_FEC_Q2_DB).ok() },
        peak_margins: peak.as_ref().map(|p| margins(p.q2_db)),
        peak,
        rates_sd_fec: rate_accounting(fmt, symbol_rate, SD_FEC_OVERHEAD_PCT)?,
        rates_hd_fec: rate_accounting(fmt, symbol_rate, HD_FEC_OVERHEAD_PCT)?,
        reference_optimum_dbm: link.then_some(REFERENCE_OPTIMUM_DBM),
        reference_peak_q2_db: link.then_some(REFERENCE_PEAK_Q2_DB),
    })
}

fn write(path: PathBuf, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn spectrum_csv(s: &Spectrum) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["freq_hz", "psd"]).map_err(err)?;
    for (f, p) in s.freq_bins.iter().zip(&s.psd) {
        w.write_record([format!("{f:.6e}"), format!("{p:.6e}")]).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

/// Writes the metrics CSV, its metadata, the JSON summary, constellations and spectra.
///
/// File names: `metrics_<kind>_<fmt>.csv`, `metrics_<kind>_<fmt>.json`,
/// `summary_<kind>_<fmt>.json`, `constellation_<label>.csv`, `psd_<label>.csv`.
pub fn emit_reports(
    out_dir: &Path,
    table: &MetricsTable,
    summary: &Summary,
    constellations: &[(String, &RxOutput, &SymbolFrame)],
    spectra: &[(String, &Spectrum)],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let kind = match table.metadata.kind {
        SweepKind::B2b => "b2b",
        SweepKind::Link => "link",
    };
    let stem = format!("{kind}_{}", table.metadata.format.to_lowercase());
    let mut written = Vec::new();
    write(out_dir.join(format!("metrics_{stem}.csv")), table.to_csv_string().as_bytes(), &mut written)?;
    write(out_dir.join(format!("metrics_{stem}.json")), table.metadata_json().as_bytes(), &mut written)?;
    let summary_json = serde_json::to_string_pretty(summary).expect("summary serializes");
    write(out_dir.join(format!("summary_{stem}.json")), summary_json.as_bytes(), &mut written)?;
    for (label, rx, frame) in constellations {
        let mut buf = Vec::new();
        write_constellation_csv(rx, frame, &mut buf)?;
        write(out_dir.join(format!("constellation_{label}.csv")), &buf, &mut written)?;
    }
    for (label, s) in spectra {
        write(out_dir.join(format!("psd_{label}.csv")), &spectrum_csv(s)?, &mut written)?;
    }
    Ok(written)
}
