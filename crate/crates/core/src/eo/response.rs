use std::io::Read;
use std::path::Path;

use num_complex::Complex64;

use crate::signal::{apply_real_response, fft, ifft, Waveform};
use crate::{Error, Result};

const MIN_DB: f64 = -300.0;

/// Complex transfer function of a real system sampled on `f >= 0`.
///
/// Between grid points magnitude (dB) and unwrapped phase are interpolated
/// linearly; above the grid the magnitude continues the last log-log slope
/// and the phase holds.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqResponse {
    pub freq_grid: Vec<f64>,
    pub complex_gain: Vec<Complex64>,
    pub min_phase: bool,
    mag_db: Vec<f64>,
    phase: Vec<f64>,
}

impl FreqResponse {
    pub fn new(freq_grid: Vec<f64>, complex_gain: Vec<Complex64>) -> Result<Self> {
        if freq_grid.is_empty() || freq_grid.len() != complex_gain.len() {
            return Err(Error::invalid("frequency response needs matching, non-empty grids"));
        }
        if freq_grid[0] < 0.0 || freq_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("frequency grid must be nonnegative, ascending and unique"));
        }
        let mag_db = complex_gain
            .iter()
            .map(|g| if g.norm() > 0.0 { (20.0 * g.norm().log10()).max(MIN_DB) } else { MIN_DB })
            .collect();
        let mut phase: Vec<f64> = complex_gain.iter().map(|g| g.arg()).collect();
        unwrap_in_place(&mut phase);
        Ok(Self {
            freq_grid,
            complex_gain,
            min_phase: false,
            mag_db,
            phase,
        })
    }

    pub fn unity() -> Self {
        Self::new(vec![0.0], vec![Complex64::new(1.0, 0.0)]).expect("unity response")
    }

    /// Builds the minimum-phase response whose magnitude is `mag(f)` (linear).
    ///
    /// The phase comes from the folded real cepstrum of `ln|H|` on a uniform
    /// grid of `n_half + 1` points over `[0, f_max]`.
    pub fn min_phase_from_magnitude(mag: impl Fn(f64) -> f64, f_max: f64, n_half: usize) -> Result<Self> {
        let n = 2 * n_half;
        let df = f_max / n_half as f64;
        let mut log_mag = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..=n_half {
            let m = mag(k as f64 * df).max(1e-15);
            log_mag[k] = Complex64::new(m.ln(), 0.0);
            if k > 0 && k < n_half {
                log_mag[n - k] = log_mag[k];
            }
        }
        ifft(&mut log_mag);
        let cep = &mut log_mag;
        for (k, c) in cep.iter_mut().enumerate() {
            let w = if k == 0 || k == n_half {
                1.0
            } else if k < n_half {
                2.0
            } else {
                0.0
            };
            *c = Complex64::new(c.re * w, 0.0);
        }
        fft(cep);
        let freqs: Vec<f64> = (0..=n_half).map(|k| k as f64 * df).collect();
        let gains = cep[..=n_half].iter().map(|c| c.exp()).collect();
        let mut r = Self::new(freqs, gains)?;
        r.min_phase = true;
        Ok(r)
    }

    /// Complex gain at `|f|`; negative frequencies are not conjugated here.
    pub fn eval(&self, f: f64) -> Complex64 {
        let f = f.abs();
        let g = &self.freq_grid;
        let n = g.len();
        if n == 1 {
            return self.complex_gain[0];
        }
        let (db, ph) = if f >= g[n - 1] {
            let (f0, f1) = (g[n - 2], g[n - 1]);
            let slope = if f0 > 0.0 {
                (self.mag_db[n - 1] - self.mag_db[n - 2]) / (f1 / f0).log10()
            } else {
                0.0
            };
            let extra = if f > f1 && f1 > 0.0 { slope * (f / f1).log10() } else { 0.0 };
            (self.mag_db[n - 1] + extra, self.phase[n - 1])
        } else {
            let i = g.partition_point(|&x| x <= f).saturating_sub(1);
            let t = (f - g[i]) / (g[i + 1] - g[i]);
            (
                self.mag_db[i] + t * (self.mag_db[i + 1] - self.mag_db[i]),
                self.phase[i] + t * (self.phase[i + 1] - self.phase[i]),
            )
        };
        if db <= MIN_DB {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(10f64.powf(db / 20.0), ph)
    }

    pub fn magnitude_db(&self, f: f64) -> f64 {
        let g = self.eval(f).norm();
        20.0 * g.log10()
    }

    /// Per-bin product on the merged grid.
    pub fn cascade(&self, other: &FreqResponse) -> FreqResponse {
        let mut grid: Vec<f64> = self.freq_grid.iter().chain(&other.freq_grid).cloned().collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let gains = grid.iter().map(|&f| self.eval(f) * other.eval(f)).collect();
        let mut r = FreqResponse::new(grid, gains).expect("merged grid is valid");
        r.min_phase = self.min_phase && other.min_phase;
        r
    }

    /// Filters a waveform with this response (real-system symmetry).
    pub fn apply(&self, w: &Waveform) -> Waveform {
        w.with_samples(apply_real_response(&w.samples, w.sample_rate, |f| self.eval(f)))
    }

    /// Measured S21 data: header `freq_hz,mag_db,phase_deg`, ascending rows.
    ///
    /// Without a phase column (or with empty phase cells) the phase is
    /// reconstructed as minimum phase. Magnitudes are normalized to 0 dB at DC.
    pub fn from_s21_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let fi = col("freq_hz").ok_or_else(|| Error::Parse("S21 CSV lacks a freq_hz column".into()))?;
        let mi = col("mag_db").ok_or_else(|| Error::Parse("S21 CSV lacks a mag_db column".into()))?;
        let pi = col("phase_deg");
        let mut freqs = Vec::new();
        let mut mags = Vec::new();
        let mut phases = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("row {}: missing column", line + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))
            };
            freqs.push(num(fi)?);
            mags.push(num(mi)?);
            if let Some(p) = pi {
                match rec.get(p) {
                    Some(s) if !s.is_empty() => phases.push(Some(num(p)?)),
                    _ => phases.push(None),
                }
            }
        }
        if freqs.is_empty() {
            return Err(Error::Parse("S21 CSV has no rows".into()));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) || freqs[0] < 0.0 {
            return Err(Error::Parse("S21 frequencies must be ascending and nonnegative".into()));
        }
        let dc = mags[0];
        let have_phase = !phases.is_empty() && phases.iter().all(|p| p.is_some());
        if have_phase {
            let mut grid = freqs.clone();
            let mut gains: Vec<Complex64> = mags
                .iter()
                .zip(&phases)
                .map(|(m, p)| Complex64::from_polar(10f64.powf((m - dc) / 20.0), p.unwrap().to_radians()))
                .collect();
            if grid[0] > 0.0 {
                grid.insert(0, 0.0);
                gains.insert(0, Complex64::new(1.0, 0.0));
            }
            return FreqResponse::new(grid, gains);
        }
        let mut grid = freqs;
        let mut gains: Vec<Complex64> = mags.iter().map(|m| Complex64::new(10f64.powf((m - dc) / 20.0), 0.0)).collect();
        if grid[0] > 0.0 {
            grid.insert(0, 0.0);
            gains.insert(0, Complex64::new(1.0, 0.0));
        }
        let magnitude_only = FreqResponse::new(grid.clone(), gains)?;
        let f_max = (4.0 * grid[grid.len() - 1]).max(256e9);
        FreqResponse::min_phase_from_magnitude(|f| magnitude_only.eval(f).norm(), f_max, 4096)
    }

    pub fn from_s21_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_s21_csv(file)
    }
}

fn unwrap_in_place(phase: &mut [f64]) {
    use std::f64::consts::PI;
    for i in 1..phase.len() {
        let mut d = phase[i] - phase[i - 1];
        while d > PI {
            phase[i] -= 2.0 * PI;
            d -= 2.0 * PI;
        }
        while d < -PI {
            phase[i] += 2.0 * PI;
            d += 2.0 * PI;
        }
    }
}

/// Monotone cubic (Fritsch–Carlson / PCHIP) interpolant.
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = Self::edge(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = Self::edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self { x, y, d }
    }

    fn edge(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    }

    fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= xq).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

/// Frequency warp used for the anchor interpolation: logarithmic above
/// ~1 GHz, finite at DC.
fn warp(f: f64) -> f64 {
    (1.0 + f / 1e9).log10()
}

/// Smooth minimum-phase chip response through `(freq_hz, mag_db)` anchors.
///
/// Anchors start at DC with 0 dB and are non-increasing. Magnitude is a
/// monotone cubic in warped log-frequency up to the last anchor and then
/// follows the last anchor pair's log-log slope.
pub fn chip_response_model(anchors: &[(f64, f64)]) -> Result<FreqResponse> {
    let first = anchors.first().ok_or_else(|| Error::invalid("no anchors"))?;
    if first.0 != 0.0 || first.1.abs() > 1e-9 {
        return Err(Error::invalid("first anchor must be (0 Hz, 0 dB)"));
    }
    if anchors.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid("anchor frequencies must be ascending"));
    }
    if anchors.windows(2).any(|w| w[1].1 > w[0].1) {
        return Err(Error::invalid("anchor magnitudes must be non-increasing"));
    }
    if anchors.len() == 1 {
        return Ok(FreqResponse::unity());
    }
    let n = anchors.len();
    let interp = Pchip::new(anchors.iter().map(|a| warp(a.0)).collect(), anchors.iter().map(|a| a.1).collect());
    let (fa, ma) = anchors[n - 2];
    let (fb, mb) = anchors[n - 1];
    let tail_db = move |f: f64| -> f64 {
        if fa > 0.0 {
            mb + (mb - ma) / (fb / fa).log10() * (f / fb).log10()
        } else {
            mb + (mb - ma) / (warp(fb) - warp(fa)) * (warp(f) - warp(fb))
        }
    };
    let mag_db = move |f: f64| if f <= fb { interp.eval(warp(f)) } else { tail_db(f) };
    let f_max = (8.0 * fb).max(256e9);
    FreqResponse::min_phase_from_magnitude(|f| 10f64.powf(mag_db(f) / 20.0), f_max, 8192)
}

/// Fourth-order Bessel low-pass with its −3 dB corner at `corner_hz`.
pub fn bessel4_lowpass(f: f64, corner_hz: f64) -> Complex64 {
    // 105 / (s^4 + 10 s^3 + 45 s^2 + 105 s + 105), unit-delay normalization;
    // the −3 dB point of that prototype sits at ω = 2.113917674904
    let s = Complex64::new(0.0, 2.113_917_674_904_2 * f / corner_hz);
    let s2 = s * s;
    let den = s2 * s2 + s2 * s * 10.0 + s2 * 45.0 + s * 105.0 + 105.0;
    Complex64::new(105.0, 0.0) / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eo::CHIP_ANCHORS;

    #[test]
    fn chip_model_hits_anchors() {
        let h = chip_response_model(&CHIP_ANCHORS).unwrap();
        assert!(h.magnitude_db(0.0).abs() < 0.05);
        assert!((h.magnitude_db(11e9) + 3.0).abs() < 0.05, "{}", h.magnitude_db(11e9));
        assert!((h.magnitude_db(35e9) + 6.0).abs() < 0.05, "{}", h.magnitude_db(35e9));
        // monotone and continuing to fall past the last anchor
        let mut prev = 1.0;
        for i in 0..200 {
            let f = i as f64 * 0.5e9;
            let m = h.eval(f).norm();
            assert!(m <= prev + 1e-9);
            prev = m;
        }
        let slope = (h.magnitude_db(70e9) - h.magnitude_db(35e9)) / 2f64.log10();
        let expected = -3.0 / (35.0f64 / 11.0).log10();
        assert!((slope - expected).abs() < 0.1, "{slope} vs {expected}");
    }

    #[test]
    fn single_anchor_is_unity() {
        let h = chip_response_model(&[(0.0, 0.0)]).unwrap();
        for f in [0.0, 1e9, 50e9] {
            assert!((h.eval(f) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn non_monotone_anchors_rejected() {
        assert!(chip_response_model(&[(0.0, 0.0), (10e9, -3.0), (20e9, -1.0)]).is_err());
        assert!(chip_response_model(&[(1e9, 0.0)]).is_err());
    }

    #[test]
    fn minimum_phase_is_causal() {
        let h = chip_response_model(&CHIP_ANCHORS).unwrap();
        let n_half = h.freq_grid.len() - 1;
        let n = 2 * n_half;
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..=n_half {
            spec[k] = h.complex_gain[k];
            if k > 0 && k < n_half {
                spec[n - k] = h.complex_gain[k].conj();
            }
        }
        ifft(&mut spec);
        let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        let anti: f64 = spec[n_half..].iter().map(|v| v.norm_sqr()).sum();
        assert!(anti / total < 1e-4, "{}", anti / total);
    }

    #[test]
    fn cascade_multiplies() {
        let a = chip_response_model(&CHIP_ANCHORS).unwrap();
        let b = FreqResponse::new(vec![0.0, 100e9], vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)]).unwrap();
        let c = a.cascade(&b);
        for f in [0.0, 5e9, 11e9, 35e9] {
            assert!((c.eval(f) - a.eval(f) * 0.5).norm() < 1e-6);
        }
    }

    #[test]
    fn bessel_corner() {
        let g = bessel4_lowpass(33e9, 33e9).norm();
        assert!((20.0 * g.log10() + 3.0103).abs() < 0.3);
        assert!((bessel4_lowpass(0.0, 33e9).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn s21_csv_with_and_without_phase() {
        let with = "freq_hz,mag_db,phase_deg\n0,0,0\n10e9,-2,-30\n20e9,-4,-60\n";
        let h = FreqResponse::from_s21_csv(with.as_bytes()).unwrap();
        assert!(!h.min_phase);
        assert!((h.magnitude_db(10e9) + 2.0).abs() < 1e-9);
        assert!((h.eval(10e9).arg().to_degrees() + 30.0).abs() < 1e-9);

        let without = "freq_hz,mag_db\n0,1\n10e9,-1\n20e9,-3\n";
        let h = FreqResponse::from_s21_csv(without.as_bytes()).unwrap();
        assert!(h.min_phase);
        assert!((h.magnitude_db(10e9) + 2.0).abs() < 0.01);
        assert!(h.eval(10e9).arg() < 0.0);

        assert!(FreqResponse::from_s21_csv("f,mag_db\n0,0\n".as_bytes()).is_err());
    }
}
