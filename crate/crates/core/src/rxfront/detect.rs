use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eo::LaserModel;
use crate::signal::{DualPolWaveform, SimRng, Waveform};
use crate::Result;

/// Balanced detection constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    /// A/W.
    pub responsivity: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self { responsivity: 1.0 }
    }
}

/// Four real photocurrent streams (XI, XQ, YI, YQ) on a common time base.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectedStreams {
    pub xi: Vec<f64>,
    pub xq: Vec<f64>,
    pub yi: Vec<f64>,
    pub yq: Vec<f64>,
    pub sample_rate: f64,
}

impl DetectedStreams {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn streams(&self) -> [&Vec<f64>; 4] {
        [&self.xi, &self.xq, &self.yi, &self.yq]
    }

    pub fn streams_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.xi, &mut self.xq, &mut self.yi, &mut self.yq]
    }

    /// Recombines into complex baseband, one waveform per polarization.
    pub fn to_dual_pol(&self) -> Result<DualPolWaveform> {
        let join = |i: &[f64], q: &[f64]| -> Vec<Complex64> { i.iter().zip(q).map(|(&a, &b)| Complex64::new(a, b)).collect() };
        DualPolWaveform::new(
            Waveform::new(join(&self.xi, &self.xq), self.sample_rate)?,
            Waveform::new(join(&self.yi, &self.yq), self.sample_rate)?,
        )
    }

    pub fn from_dual_pol(sig: &DualPolWaveform) -> Self {
        Self {
            xi: sig.pol_x.samples.iter().map(|s| s.re).collect(),
            xq: sig.pol_x.samples.iter().map(|s| s.im).collect(),
            yi: sig.pol_y.samples.iter().map(|s| s.re).collect(),
            yq: sig.pol_y.samples.iter().map(|s| s.im).collect(),
            sample_rate: sig.sample_rate(),
        }
    }
}

/// Ideal homodyne detection in a polarization-diversity 90° hybrid.
///
/// `XI + jXQ = 2R·Ex·conj(E_LO)` with fields converted to √W; the LO's phase
/// walk and frequency offset rotate both polarizations alike.
pub fn coherent_detect(
    sig: &DualPolWaveform,
    lo: &LaserModel,
    det: &DetectorParams,
    rng: &mut SimRng,
) -> Result<DetectedStreams> {
    lo.validate()?;
    let lo_field = lo.field(sig.len(), sig.sample_rate(), rng);
    let k = 2.0 * det.responsivity * 1e-3;
    let mix = |w: &Waveform| -> Waveform { w.with_samples(w.samples.iter().zip(&lo_field).map(|(e, l)| e * l.conj() * k).collect()) };
    let mixed = DualPolWaveform::new(mix(&sig.pol_x), mix(&sig.pol_y))?;
    Ok(DetectedStreams::from_dual_pol(&mixed))
}

/// Scales all four streams by one factor so that `E|X|² + E|Y|² = 2`.
pub fn normalize_rms(s: &mut DetectedStreams) {
    let n = s.len().max(1) as f64;
    let p: f64 = s.streams().iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / n;
    if p > 0.0 {
        let g = (2.0 / p).sqrt();
        for v in s.streams_mut() {
            v.iter_mut().for_each(|x| *x *= g);
        }
    }
}
