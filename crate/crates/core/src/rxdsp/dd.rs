use serde::{Deserialize, Serialize};

use super::{EqMode, EqualizerState, Taps};
use crate::txdsp::ModFormat;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdConfig {
    pub enabled: bool,
    /// T-spaced taps per filter (odd).
    pub taps: usize,
    pub mu: f64,
    pub passes: usize,
}

impl Default for DdConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            taps: 15,
            mu: 1e-4,
            passes: 2,
        }
    }
}

/// Four real symbol-rate rails: XI, XQ, YI, YQ.
pub type Rails = [Vec<f64>; 4];

struct Bank {
    /// w[out][in][tap]
    w: Vec<Vec<Vec<f64>>>,
    half: isize,
}

impl Bank {
    fn identity(taps: usize) -> Self {
        let mut w = vec![vec![vec![0.0; taps]; 4]; 4];
        for (r, row) in w.iter_mut().enumerate() {
            row[r][taps / 2] = 1.0;
        }
        Self {
            w,
            half: (taps / 2) as isize,
        }
    }

    fn window(&self, input: &Rails, k: usize) -> [Vec<f64>; 4] {
        let n = input[0].len() as isize;
        let taps = self.w[0][0].len();
        std::array::from_fn(|c| {
            (0..taps)
                .map(|t| input[c][(k as isize + t as isize - self.half).rem_euclid(n) as usize])
                .collect()
        })
    }

    fn output(&self, win: &[Vec<f64>; 4], r: usize) -> f64 {
        self.w[r].iter().zip(win).map(|(w, x)| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).sum()
    }
}

fn targets(out: &[f64; 4], fmt: &ModFormat, known: [Option<f64>; 2]) -> [f64; 4] {
    let lv = fmt.levels();
    let ix = known[0].unwrap_or_else(|| lv[fmt.slice(out[0])]);
    let iy = known[1].unwrap_or_else(|| lv[fmt.slice(out[2])]);
    [ix, 0.0, iy, 0.0]
}

/// T-spaced 4×4 real decision-directed equalizer.
///
/// Targets are `[Î_x, 0, Î_y, 0]` with `Î` the nearest level, or the known
/// training value where `known(k)` provides one per tributary. Returns the
/// rails filtered with the final taps.
pub fn dd_equalize_4x4(
    input: &Rails,
    fmt: &ModFormat,
    known: impl Fn(usize) -> [Option<f64>; 2],
    cfg: &DdConfig,
) -> Result<(Rails, EqualizerState)> {
    if cfg.taps % 2 == 0 || cfg.taps == 0 {
        return Err(Error::invalid("4x4 tap count must be odd"));
    }
    let n = input[0].len();
    if input.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("4x4 rails differ in length"));
    }
    let mut bank = Bank::identity(cfg.taps);
    let mse_of = |bank: &Bank| -> (f64, Rails) {
        let mut out: Rails = std::array::from_fn(|_| Vec::with_capacity(n));
        let mut acc = 0.0;
        for k in 0..n {
            let win = bank.window(input, k);
            let o: [f64; 4] = std::array::from_fn(|r| bank.output(&win, r));
            let t = targets(&o, fmt, known(k));
            acc += (0..4).map(|r| (t[r] - o[r]).powi(2)).sum::<f64>();
            for r in 0..4 {
                out[r].push(o[r]);
            }
        }
        (acc / n.max(1) as f64, out)
    };
    let (start_mse, identity_out) = mse_of(&bank);
    if !cfg.enabled || cfg.passes == 0 {
        return Ok((
            identity_out,
            EqualizerState {
                mode: EqMode::Real4x4,
                taps: Taps::Real4x4(bank.w),
                step_size: cfg.mu,
                converged: true,
                final_mse: start_mse,
                initial_mse: start_mse,
            },
        ));
    }
    for _ in 0..cfg.passes {
        for k in 0..n {
            let win = bank.window(input, k);
            let o: [f64; 4] = std::array::from_fn(|r| bank.output(&win, r));
            let t = targets(&o, fmt, known(k));
            for r in 0..4 {
                let e = cfg.mu * (t[r] - o[r]);
                for (w, x) in bank.w[r].iter_mut().zip(&win) {
                    for (wt, xt) in w.iter_mut().zip(x) {
                        *wt += e * xt;
                    }
                }
            }
        }
    }
    let (end_mse, out) = mse_of(&bank);
    if !end_mse.is_finite() || end_mse > 10.0 * start_mse {
        return Err(Error::Divergence {
            start: start_mse,
            end: end_mse,
        });
    }
    Ok((
        out,
        EqualizerState {
            mode: EqMode::Real4x4,
            taps: Taps::Real4x4(bank.w),
            step_size: cfg.mu,
            converged: end_mse <= start_mse,
            final_mse: end_mse,
            initial_mse: start_mse,
        },
    ))
}
