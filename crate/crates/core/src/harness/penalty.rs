use serde::{Deserialize, Serialize};

use super::sweep::MetricsTable;
use super::theory::theory_osnr_for_q2;
use crate::txdsp::ModFormat;
use crate::{Error, Result};

pub const SD_FEC_Q2_DB: f64 = 6.25;
pub const HD_FEC_Q2_DB: f64 = 8.53;
pub const SD_FEC_OVERHEAD_PCT: f64 = 28.0;
pub const HD_FEC_OVERHEAD_PCT: f64 = 12.0;

/// Interpolated abscissa where a curve of `(osnr_db, q2_db)` first rises through `threshold`.
///
/// Missing Q² counts as below threshold when BER ≥ 0.5 and above it when no
/// errors were seen. Linear interpolation between the bracketing points.
pub fn crossing(points: &[(f64, Option<f64>, f64)], threshold_db: f64) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, q, ber)| {
            let q = q.unwrap_or(if ber >= 0.5 { f64::NEG_INFINITY } else { f64::INFINITY });
            (x, q)
        })
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in pts.windows(2) {
        let ((x0, q0), (x1, q1)) = (w[0], w[1]);
        if q0 < threshold_db && q1 >= threshold_db {
            if !q0.is_finite() || !q1.is_finite() {
                return Err(Error::NotBracketed { threshold_db });
            }
            return Ok(x0 + (threshold_db - q0) / (q1 - q0) * (x1 - x0));
        }
    }
    Err(Error::NotBracketed { threshold_db })
}

/// Measured minus theoretical OSNR at `threshold_q2_db`.
pub fn compute_penalty(measured: &MetricsTable, fmt: &ModFormat, symbol_rate: f64, threshold_q2_db: f64) -> Result<f64> {
    let pts: Vec<_> = measured
        .pooled()
        .iter()
        .map(|r| (if r.osnr_db.is_finite() { r.osnr_db } else { r.sweep_value }, r.q2_db, r.ber))
        .collect();
    let x = crossing(&pts, threshold_q2_db)?;
    Ok(x - theory_osnr_for_q2(threshold_q2_db, fmt, symbol_rate)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub gross_bps: f64,
    pub net_bps: f64,
}

/// Dual-polarization line rate and net rate after `overhead_pct` overhead.
pub fn rate_accounting(fmt: &ModFormat, symbol_rate: f64, overhead_pct: f64) -> Result<Rates> {
    if !(overhead_pct >= 0.0) {
        return Err(Error::invalid(format!("overhead must be nonnegative, got {overhead_pct}")));
    }
    let gross = symbol_rate * fmt.bits_per_symbol() as f64 * 2.0;
    Ok(Rates {
        gross_bps: gross,
        net_bps: gross / (1.0 + overhead_pct / 100.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub sd_fec_db: f64,
    pub hd_fec_db: f64,
}

pub fn margins(q2_db: f64) -> Margins {
    Margins {
        sd_fec_db: q2_db - SD_FEC_Q2_DB,
        hd_fec_db: q2_db - HD_FEC_Q2_DB,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::{MetricsRow, SweepKind, TableMetadata};
    use crate::harness::theory::theory_ber;
    use crate::rxdsp::ber_to_q2;

    fn theory_table(fmt: &ModFormat) -> MetricsTable {
        let rows = (0..30)
            .map(|i| {
                let osnr = 5.0 + i as f64;
                let ber = theory_ber(osnr, fmt, 64e9);
                MetricsRow {
                    sweep_value: osnr,
                    osnr_db: osnr,
                    launch_dbm: None,
                    ber,
                    q2_db: ber_to_q2(ber).ok(),
                    q2_gauss_db: None,
                    bits_counted: 1_000_000,
                    errors: (ber * 1e6) as u64,
                    frames: 1,
                    below_resolution: false,
                    seed: 1,
                }
            })
            .collect();
        MetricsTable {
            metadata: TableMetadata {
                kind: SweepKind::B2b,
                format: fmt.name(),
                config_sha256: String::new(),
                tool_version: String::new(),
                schema_version: 1,
                ideal: true,
            },
            rows,
        }
    }

    #[test]
    fn theory_against_itself_has_no_penalty() {
        for m in [2, 4, 8] {
            let fmt = ModFormat::new(m).unwrap();
            let mut t = theory_table(&fmt);
            // exact counts so pooling reproduces the BER
            for r in &mut t.rows {
                r.bits_counted = 1 << 40;
                r.errors = (r.ber * (1u64 << 40) as f64).round() as u64;
            }
            let p = compute_penalty(&t, &fmt, 64e9, SD_FEC_Q2_DB).unwrap();
            assert!(p.abs() < 0.05, "m={m}: {p}");
        }
    }

    #[test]
    fn unbracketed_threshold_errors() {
        let fmt = ModFormat::new(2).unwrap();
        let mut t = theory_table(&fmt);
        t.rows.retain(|r| r.osnr_db > 15.0);
        assert!(matches!(compute_penalty(&t, &fmt, 64e9, 6.25), Err(Error::NotBracketed { .. })));
    }

    #[test]
    fn rates() {
        let r = rate_accounting(&ModFormat::new(8).unwrap(), 64e9, 28.0).unwrap();
        assert_eq!(r.gross_bps, 384e9);
        assert!((r.net_bps - 300e9).abs() < 1e-3);
        let r = rate_accounting(&ModFormat::new(8).unwrap(), 64e9, 12.0).unwrap();
        assert_eq!((r.net_bps / 1e9).floor(), 342.0);
        let r = rate_accounting(&ModFormat::new(2).unwrap(), 64e9, 0.0).unwrap();
        assert_eq!(r.gross_bps, 128e9);
        assert_eq!(r.net_bps, 128e9);
        assert!(rate_accounting(&ModFormat::new(2).unwrap(), 64e9, -1.0).is_err());
    }

    #[test]
    fn margin_values() {
        let m = margins(8.9);
        assert!((m.sd_fec_db - 2.65).abs() < 1e-12);
        assert!((m.hd_fec_db - 0.37).abs() < 1e-12);
    }
}
