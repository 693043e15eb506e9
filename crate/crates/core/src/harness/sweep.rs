use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::chain::{run_b2b_frame, run_link_frame, FrameResult};
use super::config::LinkConfig;
use crate::rxdsp::{ber_to_q2, q2_to_ber, BerCount};
use crate::{Error, Result};

/// Version of the metrics CSV layout.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Column order of the metrics CSV.
pub const CSV_COLUMNS: [&str; 11] = [
    "sweep_value",
    "osnr_db",
    "launch_dbm",
    "ber",
    "q2_db",
    "q2_gauss_db",
    "bits_counted",
    "errors",
    "frames",
    "below_resolution",
    "seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    B2b,
    Link,
}

/// One (sweep point, seed) measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub sweep_value: f64,
    pub osnr_db: f64,
    pub launch_dbm: Option<f64>,
    pub ber: f64,
    /// Present iff `0 < ber < 0.5`.
    pub q2_db: Option<f64>,
    /// Q² of the mean Gaussian-fit BER over the frames.
    pub q2_gauss_db: Option<f64>,
    pub bits_counted: u64,
    pub errors: u64,
    pub frames: usize,
    /// The bit cap was reached before enough errors were seen.
    pub below_resolution: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub kind: SweepKind,
    pub format: String,
    pub config_sha256: String,
    pub tool_version: String,
    pub schema_version: u32,
    pub ideal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub metadata: TableMetadata,
    pub rows: Vec<MetricsRow>,
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

impl MetricsTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Parse(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                fmt_f64(r.sweep_value),
                fmt_f64(r.osnr_db),
                r.launch_dbm.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.ber),
                r.q2_db.map(fmt_f64).unwrap_or_default(),
                r.q2_gauss_db.map(fmt_f64).unwrap_or_default(),
                r.bits_counted.to_string(),
                r.errors.to_string(),
                r.frames.to_string(),
                r.below_resolution.to_string(),
                r.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Reads rows back; metadata comes from the caller.
    pub fn read_csv<R: Read>(reader: R, metadata: TableMetadata) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(reader);
        let header = rd.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_COLUMNS {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            rows.push(MetricsRow {
                sweep_value: parse_f64(&rec[0])?,
                osnr_db: parse_f64(&rec[1])?,
                launch_dbm: parse_opt(&rec[2])?,
                ber: parse_f64(&rec[3])?,
                q2_db: parse_opt(&rec[4])?,
                q2_gauss_db: parse_opt(&rec[5])?,
                bits_counted: parse_int(&rec[6])?,
                errors: parse_int(&rec[7])?,
                frames: parse_int(&rec[8])?,
                below_resolution: parse_int(&rec[9])?,
                seed: parse_int(&rec[10])?,
            });
        }
        Ok(Self { metadata, rows })
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.metadata).expect("metadata serializes")
    }

    /// Rows averaged over seeds per sweep value (counts pooled).
    pub fn pooled(&self) -> Vec<MetricsRow> {
        let mut out: Vec<MetricsRow> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|o| o.sweep_value == r.sweep_value) {
                Some(o) => {
                    o.bits_counted += r.bits_counted;
                    o.errors += r.errors;
                    o.frames += r.frames;
                    o.below_resolution |= r.below_resolution;
                    let g = |q: Option<f64>| q.map(q2_to_ber).unwrap_or(0.0);
                    let n = (o.frames - r.frames) as f64;
                    let mix = (g(o.q2_gauss_db) * n + g(r.q2_gauss_db) * r.frames as f64) / o.frames as f64;
                    o.q2_gauss_db = ber_to_q2(mix).ok();
                }
                None => out.push(r.clone()),
            }
        }
        for o in &mut out {
            o.ber = if o.bits_counted == 0 { 0.0 } else { o.errors as f64 / o.bits_counted as f64 };
            o.q2_db = ber_to_q2(o.ber).ok();
        }
        out
    }
}

/// SHA-256 of the serialized configuration.
pub fn config_hash(cfg: &LinkConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

fn metadata(cfg: &LinkConfig, kind: SweepKind) -> TableMetadata {
    TableMetadata {
        kind,
        format: cfg.format.name(),
        config_sha256: config_hash(cfg),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: CSV_SCHEMA_VERSION,
        ideal: cfg.ideal,
    }
}

/// Frames of one (point, seed) until the stopping rule holds.
fn measure_point(
    cfg: &LinkConfig,
    point: usize,
    seed: u64,
    mut run: impl FnMut(u64) -> Result<FrameResult>,
) -> Result<(BerCount, f64, f64, usize)> {
    let mc = &cfg.monte_carlo;
    let mut counts = BerCount { errors: 0, bits: 0 };
    let mut fit_ber_sum = 0.0;
    let mut osnr_db = f64::NAN;
    let mut frames = 0;
    loop {
        for _ in 0..mc.batch_frames {
            let res = run(LinkConfig::frame_seed(seed, point, frames))?;
            counts.merge(&res.rx.counts);
            fit_ber_sum += res.rx.report.q2_gauss_db.map(q2_to_ber).unwrap_or(0.0);
            osnr_db = res.osnr_db;
            frames += 1;
        }
        let enough = counts.bits >= mc.min_bits && counts.errors >= mc.min_errors;
        if enough || counts.bits >= mc.max_bits {
            break;
        }
    }
    Ok((counts, fit_ber_sum / frames as f64, osnr_db, frames))
}

fn row(value: f64, launch: Option<f64>, seed: u64, m: (BerCount, f64, f64, usize), min_errors: u64) -> MetricsRow {
    let (counts, fit, osnr_db, frames) = m;
    let ber = counts.ber();
    MetricsRow {
        sweep_value: value,
        osnr_db,
        launch_dbm: launch,
        ber,
        q2_db: ber_to_q2(ber).ok(),
        q2_gauss_db: ber_to_q2(fit).ok(),
        bits_counted: counts.bits,
        errors: counts.errors,
        frames,
        below_resolution: counts.errors < min_errors,
        seed,
    }
}

fn annotate(label: String) -> impl Fn(Error) -> Error {
    move |e| Error::SweepPoint {
        point: label.clone(),
        source: Box::new(e),
    }
}

fn tasks(n_points: usize, seeds: &[u64]) -> Vec<(usize, u64)> {
    (0..n_points).flat_map(|p| seeds.iter().map(move |&s| (p, s))).collect()
}

/// Back-to-back Q² versus OSNR over `cfg.sweep.osnr_db`.
pub fn run_b2b_sweep(cfg: &LinkConfig) -> Result<MetricsTable> {
    cfg.validate()?;
    if cfg.sweep.osnr_db.is_empty() {
        return Err(Error::Config("b2b sweep needs a non-empty osnr_db list".into()));
    }
    let eff = cfg.effective();
    let points = &cfg.sweep.osnr_db;
    let rows = tasks(points.len(), &cfg.monte_carlo.seeds)
        .into_par_iter()
        .map(|(p, seed)| {
            let osnr = points[p];
            let m = measure_point(&eff, p, seed, |fs| run_b2b_frame(&eff, osnr, fs))
                .map_err(annotate(format!("OSNR {osnr} dB, seed {seed}")))?;
            log::info!("b2b OSNR {osnr} dB seed {seed}: {} errors in {} bits", m.0.errors, m.0.bits);
            Ok(row(osnr, None, seed, m, cfg.monte_carlo.min_errors))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsTable {
        metadata: metadata(cfg, SweepKind::B2b),
        rows,
    })
}

/// Single-span Q² versus launch power over `cfg.sweep.launch_dbm`.
pub fn run_link_sweep(cfg: &LinkConfig) -> Result<MetricsTable> {
    cfg.validate()?;
    if cfg.sweep.launch_dbm.is_empty() {
        return Err(Error::Config("link sweep needs a non-empty launch_dbm list".into()));
    }
    let eff = cfg.effective();
    let points = &cfg.sweep.launch_dbm;
    let rows = tasks(points.len(), &cfg.monte_carlo.seeds)
        .into_par_iter()
        .map(|(p, seed)| {
            let launch = points[p];
            let m = measure_point(&eff, p, seed, |fs| run_link_frame(&eff, launch, fs))
                .map_err(annotate(format!("launch {launch} dBm, seed {seed}")))?;
            log::info!("link {launch} dBm seed {seed}: {} errors in {} bits", m.0.errors, m.0.bits);
            Ok(row(launch, Some(launch), seed, m, cfg.monte_carlo.min_errors))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsTable {
        metadata: metadata(cfg, SweepKind::Link),
        rows,
    })
}
