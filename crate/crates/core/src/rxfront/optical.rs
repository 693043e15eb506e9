use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::osnr_ref_bandwidth_from_nm;
use crate::signal::{apply_response, DualPolWaveform, SimRng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FilterShape {
    Ideal,
    /// Field transfer `exp(−ln√2·(2f/B)^(2·order))`, −3 dB at ±B/2.
    SuperGaussian { order: u32 },
}

impl Default for FilterShape {
    fn default() -> Self {
        FilterShape::SuperGaussian { order: 3 }
    }
}

/// Band-pass centred on the carrier with a full width of `bw_nm`.
pub fn optical_bandpass(sig: &DualPolWaveform, bw_nm: f64, shape: FilterShape) -> Result<DualPolWaveform> {
    if !(bw_nm > 0.0) {
        return Err(Error::invalid("optical filter bandwidth must be positive"));
    }
    let bw = osnr_ref_bandwidth_from_nm(bw_nm, sig.pol_x.center_freq);
    let h = move |f: f64| -> Complex64 {
        let x = 2.0 * f.abs() / bw;
        match shape {
            FilterShape::Ideal => (if x <= 1.0 { 1.0 } else { 0.0 }).into(),
            FilterShape::SuperGaussian { order } => (-(2f64.sqrt().ln()) * x.powi(2 * order as i32)).exp().into(),
        }
    };
    sig.map_pols(|w| w.with_samples(apply_response(&w.samples, w.sample_rate, h)))
}

/// 2×2 Jones matrix acting on `[Ex, Ey]ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JonesMatrix(pub [[Complex64; 2]; 2]);

impl JonesMatrix {
    pub fn identity() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        JonesMatrix([[o, z], [z, o]])
    }

    /// Real rotation by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        JonesMatrix([[c.into(), (-s).into()], [s.into(), c.into()]])
    }

    /// General SU(2) element from rotation angle, retardance and ellipticity phase.
    pub fn from_angles(theta: f64, phi: f64, psi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let a = Complex64::from_polar(c, phi);
        let b = Complex64::from_polar(s, psi);
        JonesMatrix([[a, -b.conj()], [b, a.conj()]])
    }

    /// Uniformly distributed (Haar) unitary with a random common phase.
    pub fn random(rng: &mut SimRng) -> Self {
        let mut g = [0.0f64; 4];
        for v in &mut g {
            *v = StandardNormal.sample(rng);
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = Complex64::new(g[0], g[1]) / norm;
        let b = Complex64::new(g[2], g[3]) / norm;
        let common: f64 = rand::Rng::gen_range(rng, -PI..PI);
        let e = Complex64::from_polar(1.0, common);
        JonesMatrix([[a * e, -b.conj() * e], [b * e, a.conj() * e]])
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let m = &self.0;
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| m[i][k] * m[j][k].conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y)
    }
}

/// Applies `J` per sample, then delays Y by `extra_delay_ps` (all-pass).
pub fn rotate_polarization(sig: &DualPolWaveform, j: &JonesMatrix, extra_delay_ps: f64) -> Result<DualPolWaveform> {
    if !j.is_unitary(1e-9) {
        return Err(Error::invalid("Jones matrix is not unitary"));
    }
    let (x, mut y): (Vec<_>, Vec<_>) = sig
        .pol_x
        .samples
        .iter()
        .zip(&sig.pol_y.samples)
        .map(|(&a, &b)| j.apply(a, b))
        .unzip();
    if extra_delay_ps != 0.0 {
        let tau = extra_delay_ps * 1e-12;
        y = apply_response(&y, sig.sample_rate(), |f| Complex64::from_polar(1.0, -2.0 * PI * f * tau));
    }
    DualPolWaveform::new(sig.pol_x.with_samples(x), sig.pol_y.with_samples(y))
}
