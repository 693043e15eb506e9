use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT (unnormalized).
pub fn fft(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// In-place inverse DFT, normalized by 1/N.
pub fn ifft(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let inv = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= inv;
    }
}

/// DFT bin frequencies in FFT order (same layout as numpy's `fftfreq`).
pub fn fft_freqs(n: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / n as f64;
    let half = n.div_ceil(2);
    (0..n)
        .map(|k| {
            if k < half {
                k as f64 * df
            } else {
                (k as f64 - n as f64) * df
            }
        })
        .collect()
}

/// Filters `samples` circularly with an arbitrary transfer function `h(f)`.
pub fn apply_response(samples: &[Complex64], sample_rate: f64, h: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    let mut buf = samples.to_vec();
    fft(&mut buf);
    for (v, f) in buf.iter_mut().zip(fft_freqs(samples.len(), sample_rate)) {
        *v *= h(f);
    }
    ifft(&mut buf);
    buf
}

/// Filters with the response of a real system given on `f >= 0`.
///
/// Negative frequencies use `conj(h(|f|))`; an even-length Nyquist bin uses `Re h`.
pub fn apply_real_response(samples: &[Complex64], sample_rate: f64, h: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    fft(&mut buf);
    let freqs = fft_freqs(n, sample_rate);
    for (k, (v, f)) in buf.iter_mut().zip(freqs).enumerate() {
        let g = if n % 2 == 0 && k == n / 2 {
            Complex64::new(h(f.abs()).re, 0.0)
        } else if f < 0.0 {
            h(-f).conj()
        } else {
            h(f)
        };
        *v *= g;
    }
    ifft(&mut buf);
    buf
}

/// `out[i] = x[(i - shift) mod n]`: a positive shift delays the sequence.
pub fn circular_shift<T: Clone>(x: &[T], shift: isize) -> Vec<T> {
    let n = x.len() as isize;
    if n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|i| x[(i - shift).rem_euclid(n) as usize].clone())
        .collect()
}
