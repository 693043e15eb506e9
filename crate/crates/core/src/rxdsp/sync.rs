use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::signal::{fft, fft_freqs, ifft};
use crate::txdsp::SymbolFrame;
use crate::{Error, Result};

/// Blind carrier-frequency offset estimate for bipolar ASK.
///
/// Squaring a real constellation leaves a spectral line at twice the offset.
/// Summing `|FFT(r_a·r_b)|²` over the polarization pairs makes the line
/// strength independent of the Jones matrix. The coarse bin is refined by a
/// golden-section search on the DTFT.
pub fn estimate_freq_offset(x: &[Complex64], y: &[Complex64], sample_rate: f64, max_offset_hz: f64) -> f64 {
    let n = x.len();
    let products: [Vec<Complex64>; 3] = [
        x.iter().map(|a| a * a).collect(),
        y.iter().map(|a| a * a).collect(),
        x.iter().zip(y).map(|(a, b)| a * b).collect(),
    ];
    let weights = [1.0, 1.0, 2.0];
    let mut spectrum = vec![0.0; n];
    for (p, w) in products.iter().zip(weights) {
        let mut s = p.clone();
        fft(&mut s);
        for (acc, v) in spectrum.iter_mut().zip(&s) {
            *acc += w * v.norm_sqr();
        }
    }
    let freqs = fft_freqs(n, sample_rate);
    let limit = 2.0 * max_offset_hz;
    let (best, _) = freqs
        .iter()
        .zip(&spectrum)
        .enumerate()
        .filter(|(_, (f, _))| f.abs() <= limit)
        .max_by(|a, b| a.1 .1.partial_cmp(b.1 .1).unwrap())
        .map(|(k, (_, p))| (k, *p))
        .unwrap_or((0, 0.0));

    let power_at = |f: f64| -> f64 {
        let step = Complex64::from_polar(1.0, -2.0 * PI * f / sample_rate);
        products
            .iter()
            .zip(weights)
            .map(|(p, w)| {
                let mut rot = Complex64::new(1.0, 0.0);
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, v) in p.iter().enumerate() {
                    acc += v * rot;
                    rot *= step;
                    if i % 1024 == 1023 {
                        rot /= rot.norm();
                    }
                }
                w * acc.norm_sqr()
            })
            .sum()
    };
    let df = sample_rate / n as f64;
    let (mut a, mut b) = (freqs[best] - df, freqs[best] + df);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (power_at(c), power_at(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = power_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = power_at(d);
        }
    }
    0.25 * (a + b)
}

/// Multiplies by `exp(−j2π·f·t)`.
pub fn remove_freq_offset(x: &mut [Complex64], offset_hz: f64, sample_rate: f64) {
    if offset_hz == 0.0 {
        return;
    }
    for (i, v) in x.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, -2.0 * PI * offset_hz * i as f64 / sample_rate);
    }
}

/// Frame position and preamble-based channel estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncResult {
    /// Sample index (at 2 sps) of frame symbol 0 of the X tributary.
    pub offset_samples: usize,
    pub pslr: f64,
    /// `channel[a][k]`: received pol `a` response to tributary `k` at the preamble.
    pub channel: [[Complex64; 2]; 2],
    /// Phase of the dominant channel entry folded into (−π/2, π/2].
    pub coarse_phase: f64,
    /// The dominant entry needed a π rotation to fold.
    pub polarity_inverted: bool,
}

fn block_template(frame: &SymbolFrame, block: (usize, usize), len: usize) -> Vec<Complex64> {
    let mut t = vec![Complex64::new(0.0, 0.0); len];
    for i in block.0..block.0 + block.1 {
        t[2 * i] = frame.symbols[i].into();
    }
    t
}

/// Locates the frame in a 2-sps stream pair.
///
/// Each training block is correlated against both received polarizations;
/// squared magnitudes are added for the X tributary at `τ` and the Y
/// tributary (delayed by `polmux_delay` symbols) at `τ + 2·delay`. The
/// metric is the squared preamble term times the sum over the periodic
/// blocks. Blocks cut from one PRBS-5 stream are near-copies of each other
/// shifted by a symbol, so the block sum peaks almost fully one block
/// spacing away, where the preamble still reaches a quarter of its peak;
/// squaring the preamble term pushes that lobe to about 1/18. Only peaks
/// whose side lobes stay `pslr_min` below pass.
pub fn frame_sync(
    x: &[Complex64],
    y: &[Complex64],
    frame: &SymbolFrame,
    polmux_delay: usize,
    pslr_min: f64,
) -> Result<SyncResult> {
    let l = 2 * frame.len();
    if x.len() != l || y.len() != l {
        return Err(Error::LengthMismatch { expected: l, got: x.len() });
    }
    if frame.header_map.is_empty() {
        return Err(Error::invalid("frame has no training blocks to synchronize on"));
    }
    let spectra: Vec<Vec<Complex64>> = [x, y]
        .iter()
        .map(|r| {
            let mut s = r.to_vec();
            fft(&mut s);
            s
        })
        .collect();
    let dy = (2 * polmux_delay) % l;
    let mut preamble = vec![0.0; l];
    let mut blocks = vec![0.0; l];
    let mut preamble_corr: Vec<Vec<Complex64>> = Vec::new();
    for (bi, &block) in frame.header_map.iter().enumerate() {
        let mut t = block_template(frame, block, l);
        fft(&mut t);
        let acc = if bi == 0 { &mut preamble } else { &mut blocks };
        for spec in &spectra {
            let mut c: Vec<Complex64> = spec.iter().zip(&t).map(|(r, tt)| r * tt.conj()).collect();
            ifft(&mut c);
            for tau in 0..l {
                acc[tau] += c[tau].norm_sqr() + c[(tau + dy) % l].norm_sqr();
            }
            if bi == 0 {
                preamble_corr.push(c);
            }
        }
    }
    let metric: Vec<f64> = if frame.header_map.len() > 1 {
        preamble.iter().zip(&blocks).map(|(p, b)| p * p * b).collect()
    } else {
        preamble
    };
    let (tau, peak) = metric
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .unwrap();
    let near = |a: usize, b: usize| {
        let d = (a + l - b) % l;
        d.min(l - d) <= 3
    };
    let side = metric
        .iter()
        .enumerate()
        .filter(|&(i, _)| !near(i, tau) && !near(i, (tau + dy) % l) && !near(i, (tau + l - dy) % l))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let pslr = if side > 0.0 { peak / side } else { f64::INFINITY };
    if !(pslr >= pslr_min) {
        return Err(Error::SyncFailure { pslr, threshold: pslr_min });
    }

    let energy: f64 = {
        let (o, n) = frame.header_map[0];
        frame.symbols[o..o + n].iter().map(|s| s * s).sum()
    };
    let mut channel = [[Complex64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        channel[a][0] = preamble_corr[a][tau] / energy;
        channel[a][1] = preamble_corr[a][(tau + dy) % l] / energy;
    }
    let dominant = channel.iter().flatten().max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap()).unwrap();
    let mut coarse_phase = dominant.arg();
    let mut polarity_inverted = false;
    if coarse_phase > PI / 2.0 {
        coarse_phase -= PI;
        polarity_inverted = true;
    } else if coarse_phase <= -PI / 2.0 {
        coarse_phase += PI;
        polarity_inverted = true;
    }
    Ok(SyncResult {
        offset_samples: tau,
        pslr,
        channel,
        coarse_phase,
        polarity_inverted,
    })
}
