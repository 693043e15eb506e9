use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Alignment, EqMode, EqualizerState, Taps};
use crate::txdsp::{ModFormat, SymbolFrame};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MimoConfig {
    /// T/2-spaced taps per filter (odd).
    pub taps: usize,
    pub mu_train: f64,
    pub mu_track: f64,
    pub train_epochs: usize,
    /// Decision-directed passes over the whole frame after training (0 freezes).
    pub track_passes: usize,
    /// Training-symbol MSE (signal power is 1) required after training.
    pub mse_threshold: f64,
}

impl Default for MimoConfig {
    fn default() -> Self {
        Self {
            taps: 31,
            mu_train: 1e-3,
            mu_track: 1e-4,
            train_epochs: 40,
            track_passes: 2,
            mse_threshold: 0.1,
        }
    }
}

/// Symbol-rate outputs in time order (index `k` of [`Alignment`]).
#[derive(Clone, Debug)]
pub struct MimoOutput {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub state: EqualizerState,
}

struct Butterfly<'a> {
    inputs: [&'a [Complex64]; 2],
    /// w[row][pol][tap]
    w: [[Vec<Complex64>; 2]; 2],
    half: isize,
}

impl Butterfly<'_> {
    fn at(&self, pol: usize, centre: usize, t: usize) -> Complex64 {
        let l = self.inputs[pol].len() as isize;
        let idx = (centre as isize + t as isize - self.half).rem_euclid(l) as usize;
        self.inputs[pol][idx]
    }

    fn output(&self, row: usize, centre: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for pol in 0..2 {
            for (t, w) in self.w[row][pol].iter().enumerate() {
                acc += w * self.at(pol, centre, t);
            }
        }
        acc
    }

    fn update(&mut self, row: usize, centre: usize, err: Complex64, mu: f64) {
        for pol in 0..2 {
            for t in 0..self.w[row][pol].len() {
                let r = self.at(pol, centre, t);
                self.w[row][pol][t] += err * r.conj() * mu;
            }
        }
    }
}

/// Contiguous training runs of one tributary, in time order: `(start_k, len)`.
pub(crate) fn training_runs(al: &Alignment, frame: &SymbolFrame, trib: usize) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut k = 0;
    while k < al.n {
        if frame.training_mask[al.frame_index(trib, k)] {
            let start = k;
            while k < al.n && frame.training_mask[al.frame_index(trib, k)] {
                k += 1;
            }
            runs.push((start, k - start));
        } else {
            k += 1;
        }
    }
    runs
}

fn invert2(h: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let scale: f64 = h.iter().flatten().map(|v| v.norm_sqr()).sum();
    if det.norm() > 0.05 * scale {
        [[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]]
    } else {
        // nearly singular: fall back to the matched (Hermitian) inverse
        let s = 2.0 / scale.max(1e-30);
        [[h[0][0].conj() * s, h[1][0].conj() * s], [h[0][1].conj() * s, h[1][1].conj() * s]]
    }
}

/// Data-aided 2×2 butterfly equalizer, T/2 input, symbol-rate output.
///
/// Centre taps start at the inverse of the preamble channel estimate.
/// Training runs `train_epochs` LMS epochs over the training blocks with a
/// per-block data-aided phase reference. Tracking passes then adapt
/// decision-directed over the whole frame at `mu_track` with a
/// phase-locked reference that is re-anchored on every training block.
/// Outputs are computed with the final taps.
pub fn mimo_equalize_da(
    x: &[Complex64],
    y: &[Complex64],
    al: &Alignment,
    frame: &SymbolFrame,
    channel: &[[Complex64; 2]; 2],
    cfg: &MimoConfig,
) -> Result<MimoOutput> {
    if cfg.taps % 2 == 0 || cfg.taps == 0 {
        return Err(Error::invalid("MIMO tap count must be odd"));
    }
    let fmt: &ModFormat = &frame.format;
    let zero = vec![Complex64::new(0.0, 0.0); cfg.taps];
    let half = cfg.taps / 2;
    let inv = invert2(channel);
    let mut w = [[zero.clone(), zero.clone()], [zero.clone(), zero]];
    for row in 0..2 {
        for pol in 0..2 {
            w[row][pol][half] = inv[row][pol];
        }
    }
    let mut bf = Butterfly {
        inputs: [x, y],
        w,
        half: half as isize,
    };
    let runs = [training_runs(al, frame, 0), training_runs(al, frame, 1)];
    let target = |trib: usize, k: usize| frame.symbols[al.frame_index(trib, k)];

    let mut final_mse = f64::INFINITY;
    let mut first_mse = None;
    for _ in 0..cfg.train_epochs {
        let mut acc = 0.0;
        let mut count = 0usize;
        for row in 0..2 {
            for &(start, len) in &runs[row] {
                let ks: Vec<usize> = (start..start + len).collect();
                let ref_phasor: Complex64 = ks.iter().map(|&k| bf.output(row, al.sample(k)) * target(row, k)).sum();
                let rot = if ref_phasor.norm() > 0.0 { ref_phasor / ref_phasor.norm() } else { Complex64::new(1.0, 0.0) };
                for &k in &ks {
                    let c = al.sample(k);
                    let e = rot * target(row, k) - bf.output(row, c);
                    acc += e.norm_sqr();
                    count += 1;
                    bf.update(row, c, e, cfg.mu_train);
                }
            }
        }
        let mse = acc / count.max(1) as f64;
        first_mse.get_or_insert(mse);
        final_mse = mse;
    }
    if !final_mse.is_finite() || final_mse > cfg.mse_threshold {
        return Err(Error::ConvergenceFailure {
            mse: final_mse,
            threshold: cfg.mse_threshold,
        });
    }

    let levels = fmt.levels();
    let forget = 1.0 - 1.0 / 32.0;
    for _ in 0..cfg.track_passes {
        for row in 0..2 {
            let mut phasor = match runs[row].first() {
                Some(&(start, len)) => (start..start + len).map(|j| bf.output(row, al.sample(j)) * target(row, j)).sum(),
                None => Complex64::new(1.0, 0.0),
            };
            let mut run_idx = 0;
            let mut k = 0;
            while k < al.n {
                if run_idx < runs[row].len() && runs[row][run_idx].0 == k {
                    let (start, len) = runs[row][run_idx];
                    phasor = (start..start + len).map(|j| bf.output(row, al.sample(j)) * target(row, j)).sum();
                    run_idx += 1;
                }
                let c = al.sample(k);
                let out = bf.output(row, c);
                let rot = if phasor.norm() > 0.0 { phasor / phasor.norm() } else { Complex64::new(1.0, 0.0) };
                let known = frame.training_mask[al.frame_index(row, k)];
                let d = if known { target(row, k) } else { levels[fmt.slice((out * rot.conj()).re)] };
                let e = rot * d - out;
                bf.update(row, c, e, cfg.mu_track);
                phasor = phasor * forget + out * d;
                k += 1;
            }
        }
    }

    let xo: Vec<Complex64> = (0..al.n).map(|k| bf.output(0, al.sample(k))).collect();
    let yo: Vec<Complex64> = (0..al.n).map(|k| bf.output(1, al.sample(k))).collect();
    let taps = Taps::Complex2x2(bf.w.iter().map(|r| r.iter().map(|v| v.clone()).collect()).collect());
    Ok(MimoOutput {
        x: xo,
        y: yo,
        state: EqualizerState {
            mode: EqMode::Complex2x2,
            taps,
            step_size: cfg.mu_train,
            converged: true,
            final_mse,
            initial_mse: first_mse.unwrap_or(f64::NAN),
        },
    })
}
