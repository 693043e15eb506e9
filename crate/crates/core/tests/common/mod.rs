#![allow(dead_code)]

use askline::harness::{FrameResult, LinkConfig};
use askline::txdsp::ModFormat;
use num_complex::Complex64;

pub fn ideal(m: usize) -> LinkConfig {
    LinkConfig {
        format: ModFormat::new(m).unwrap(),
        ideal: true,
        ..LinkConfig::default()
    }
    .effective()
}

/// Least-squares gains of one output tributary on the wanted and the
/// other transmitted tributary: `(wanted, leaked)`.
pub fn tributary_gains(res: &FrameResult, trib: usize, delay: usize) -> (Complex64, Complex64) {
    let s = &res.frame.symbols;
    let n = s.len();
    let out = &res.rx.symbols[trib];
    // in frame order, the other tributary carries the frame shifted by the PolMux delay
    let other = |i: usize| if trib == 0 { s[(i + n - delay) % n] } else { s[(i + delay) % n] };
    let own: Complex64 = (0..n).map(|i| out[i] * s[i]).sum();
    let cross: Complex64 = (0..n).map(|i| out[i] * other(i)).sum();
    let e: f64 = s.iter().map(|v| v * v).sum();
    (own / e, cross / e)
}

pub fn crosstalk_db(res: &FrameResult, delay: usize) -> f64 {
    (0..2)
        .map(|t| {
            let (a, b) = tributary_gains(res, t, delay);
            20.0 * (b.norm() / a.norm()).log10()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
