use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::laser::LaserModel;
use super::response::FreqResponse;
use crate::signal::{SimRng, Waveform};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bias {
    Null,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MzmParams {
    pub v_pi: f64,
    pub bias: Bias,
    /// Static insertion loss, couplers included.
    pub insertion_loss_db: f64,
    pub coupler_loss_db: f64,
    pub chirp_alpha: f64,
    /// Maximum driver gain available.
    pub drive_gain_db: f64,
    /// Peak differential drive; `None` means `v_pi / 2`.
    pub swing_peak_v: Option<f64>,
}

impl Default for MzmParams {
    fn default() -> Self {
        Self {
            v_pi: 4.5,
            bias: Bias::Null,
            insertion_loss_db: 18.0,
            coupler_loss_db: 8.0,
            chirp_alpha: 0.0,
            drive_gain_db: 14.5,
            swing_peak_v: None,
        }
    }
}

impl MzmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi > 0.0) {
            return Err(Error::invalid("V_pi must be positive"));
        }
        if !(self.insertion_loss_db >= 0.0) {
            return Err(Error::invalid("insertion loss must be nonnegative"));
        }
        if self.drive_gain_db > 14.5 {
            return Err(Error::invalid(format!("driver gain {} dB exceeds the 14.5 dB maximum", self.drive_gain_db)));
        }
        Ok(())
    }

    pub fn swing(&self) -> f64 {
        self.swing_peak_v.unwrap_or(self.v_pi / 2.0)
    }
}

/// Driver stage: chip response plus gain so that the peak drive equals the swing.
///
/// The input is expected at unit RMS; the gain relative to that nominal level
/// may not exceed `p.drive_gain_db`.
pub fn apply_driver(w: &Waveform, p: &MzmParams, chip: &FreqResponse) -> Result<Waveform> {
    p.validate()?;
    let filtered = chip.apply(w);
    let peak = filtered.samples.iter().map(|s| s.re.abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::invalid("drive waveform is all zero"));
    }
    let scale = p.swing() / peak;
    let required_db = 20.0 * scale.log10();
    if required_db > p.drive_gain_db {
        return Err(Error::DriverGain {
            required_db,
            max_db: p.drive_gain_db,
        });
    }
    Ok(filtered.scaled(scale))
}

/// Field transfer of the MZM push-pull at the chosen bias.
///
/// Null bias: `E = E_laser · sin(π v / 2V_π) · 10^(−IL/20)`, sign preserving.
pub fn mzm_modulate(drive: &Waveform, laser: &LaserModel, p: &MzmParams, rng: &mut SimRng) -> Result<Waveform> {
    p.validate()?;
    laser.validate()?;
    if p.bias == Bias::Quadrature {
        log::warn!("MZM biased at quadrature: bipolar drive produces a unipolar field");
    }
    let il = 10f64.powf(-p.insertion_loss_db / 20.0);
    let carrier = laser.field(drive.len(), drive.sample_rate, rng);
    let offset = match p.bias {
        Bias::Null => 0.0,
        Bias::Quadrature => PI / 4.0,
    };
    let samples = drive
        .samples
        .iter()
        .zip(carrier)
        .map(|(v, e)| {
            let theta = PI * v.re / (2.0 * p.v_pi);
            let mut out = e * (theta + offset).sin() * il;
            if p.chirp_alpha != 0.0 {
                out *= Complex64::from_polar(1.0, p.chirp_alpha * theta);
            }
            out
        })
        .collect();
    Ok(Waveform {
        samples,
        sample_rate: drive.sample_rate,
        center_freq: laser.center_freq,
    })
}
