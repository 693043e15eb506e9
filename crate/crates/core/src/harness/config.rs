use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::FiberParams;
use crate::eo::{chip_response_model, FreqResponse, LaserModel, MzmParams, CHIP_ANCHORS};
use crate::rxdsp::DspConfig;
use crate::rxfront::{AdcParams, DetectorParams, FilterShape, JonesMatrix};
use crate::signal::{derive_seed, rng_from_seed};
use crate::txdsp::{DacParams, HeaderConfig, ModFormat};
use crate::{Error, Result};

/// Where the driver/MZM frequency response comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChipSource {
    /// Parametric model through `(freq_hz, mag_db)` anchors.
    Model { anchors: Vec<(f64, f64)> },
    /// Measured S21 CSV (`freq_hz,mag_db[,phase_deg]`).
    File { path: PathBuf },
}

impl Default for ChipSource {
    fn default() -> Self {
        ChipSource::Model {
            anchors: CHIP_ANCHORS.to_vec(),
        }
    }
}

impl ChipSource {
    pub fn response(&self) -> Result<FreqResponse> {
        match self {
            ChipSource::Model { anchors } => chip_response_model(anchors),
            ChipSource::File { path } => FreqResponse::from_s21_file(path),
        }
    }
}

/// Fiber polarization state seen by the receiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum JonesSpec {
    Identity,
    /// Haar-random per frame, drawn from the frame's RNG stream.
    Random,
    Angles { theta: f64, phi: f64, psi: f64 },
}

impl Default for JonesSpec {
    fn default() -> Self {
        JonesSpec::Random
    }
}

impl JonesSpec {
    pub fn matrix(&self, seed: u64) -> JonesMatrix {
        match self {
            JonesSpec::Identity => JonesMatrix::identity(),
            JonesSpec::Random => JonesMatrix::random(&mut rng_from_seed(seed)),
            JonesSpec::Angles { theta, phi, psi } => JonesMatrix::from_angles(*theta, *phi, *psi),
        }
    }
}

/// Transmitter OSNR ceiling per format, dB re 12.5 GHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TxOsnr {
    pub ask2: f64,
    pub ask4: f64,
    pub ask8: f64,
}

impl Default for TxOsnr {
    fn default() -> Self {
        Self {
            ask2: 34.0,
            ask4: 32.5,
            ask8: 32.9,
        }
    }
}

impl TxOsnr {
    pub fn for_format(&self, fmt: &ModFormat) -> f64 {
        match fmt.m() {
            2 => self.ask2,
            4 => self.ask4,
            _ => self.ask8,
        }
    }
}

/// Sweep axes. An OSNR of `inf` means "no noise loading" (maximum OSNR).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub osnr_db: Vec<f64>,
    pub launch_dbm: Vec<f64>,
}

/// Monte-Carlo stopping rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarlo {
    pub seeds: Vec<u64>,
    pub min_bits: u64,
    pub min_errors: u64,
    pub max_bits: u64,
    /// Frames simulated between stopping-rule checks.
    pub batch_frames: usize,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            seeds: vec![1],
            min_bits: 100_000,
            min_errors: 100,
            max_bits: 10_000_000,
            batch_frames: 2,
        }
    }
}

/// Every parameter of a simulated measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkConfig {
    pub format: ModFormat,
    pub symbol_rate: f64,
    pub header: HeaderConfig,
    pub rrc_rolloff: f64,
    pub rrc_span: usize,
    pub dac: DacParams,
    pub predistortion: bool,
    pub predistortion_max_boost_db: Option<f64>,
    pub chip: ChipSource,
    pub mzm: MzmParams,
    pub laser: LaserModel,
    pub lo: LaserModel,
    pub polmux_delay_symbols: usize,
    pub polmux_split_loss_db: f64,
    pub tx_max_osnr_db: TxOsnr,
    pub fiber: FiberParams,
    /// Extra attenuation between the span and the receive amplifier.
    pub rx_input_loss_db: f64,
    pub preamp_noise_figure_db: f64,
    pub rx_filter_nm: f64,
    pub rx_filter_shape: FilterShape,
    pub jones: JonesSpec,
    pub detector: DetectorParams,
    pub adc: AdcParams,
    pub dsp: DspConfig,
    pub sweep: SweepSpec,
    pub monte_carlo: MonteCarlo,
    /// Disable every hardware impairment (see [`LinkConfig::effective`]).
    pub ideal: bool,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            format: ModFormat::new(8).expect("8ASK"),
            symbol_rate: crate::SYMBOL_RATE,
            header: HeaderConfig::default(),
            rrc_rolloff: 0.1,
            rrc_span: 64,
            dac: DacParams::default(),
            predistortion: true,
            predistortion_max_boost_db: Some(20.0),
            chip: ChipSource::default(),
            mzm: MzmParams::default(),
            laser: LaserModel::default(),
            lo: LaserModel {
                linewidth_hz: 0.0,
                ..LaserModel::default()
            },
            polmux_delay_symbols: 1094,
            polmux_split_loss_db: 3.0,
            tx_max_osnr_db: TxOsnr::default(),
            fiber: FiberParams::default(),
            rx_input_loss_db: 10.0,
            preamp_noise_figure_db: 5.0,
            rx_filter_nm: 1.4,
            rx_filter_shape: FilterShape::default(),
            jones: JonesSpec::default(),
            detector: DetectorParams::default(),
            adc: AdcParams::default(),
            dsp: DspConfig {
                mimo: crate::rxdsp::MimoConfig {
                    mse_threshold: 0.9,
                    ..Default::default()
                },
                ..DspConfig::default()
            },
            sweep: SweepSpec::default(),
            monte_carlo: MonteCarlo::default(),
            ideal: false,
        }
    }
}

impl LinkConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: LinkConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.symbol_rate > 0.0) {
            return bad("symbol rate must be positive".into());
        }
        self.header.layout().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(e) = self.dac.enob {
            if !(e > 1.0) {
                return bad("DAC ENOB must exceed 1".into());
            }
        }
        let guard = self.symbol_rate * (1.0 + self.rrc_rolloff);
        if self.dac.sample_rate < guard {
            return bad(format!("DAC rate {} is below the signal bandwidth {guard}", self.dac.sample_rate));
        }
        self.mzm.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.laser.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.lo.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.fiber.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.adc.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.rx_input_loss_db >= 0.0) {
            return bad("receiver input loss must be nonnegative".into());
        }
        for (name, list) in [("osnr_db", &self.sweep.osnr_db), ("launch_dbm", &self.sweep.launch_dbm)] {
            if list.windows(2).any(|w| !(w[1] > w[0])) {
                return bad(format!("sweep list {name} must be strictly ascending"));
            }
        }
        if self.monte_carlo.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.monte_carlo.batch_frames == 0 {
            return bad("batch_frames must be nonzero".into());
        }
        Ok(())
    }

    /// The configuration actually simulated.
    ///
    /// With `ideal` set: no DAC/ADC quantization, no ADC bandwidth limit, flat
    /// chip response, no hold response, no pre-distortion, lasers without
    /// phase noise or offset, no transmitter noise ceiling, and a
    /// small-signal drive of 0.1·V_π.
    pub fn effective(&self) -> LinkConfig {
        if !self.ideal {
            return self.clone();
        }
        let mut c = self.clone();
        c.dac = DacParams::transparent(c.dac.sample_rate);
        c.adc.enob = None;
        c.adc.analog_bw_hz = None;
        c.chip = ChipSource::Model {
            anchors: vec![(0.0, 0.0)],
        };
        c.predistortion = false;
        c.laser.linewidth_hz = 0.0;
        c.laser.freq_offset_hz = 0.0;
        c.lo.linewidth_hz = 0.0;
        c.lo.freq_offset_hz = 0.0;
        c.tx_max_osnr_db = TxOsnr {
            ask2: f64::INFINITY,
            ask4: f64::INFINITY,
            ask8: f64::INFINITY,
        };
        c.mzm.swing_peak_v = Some(0.1 * c.mzm.v_pi);
        c
    }

    /// Seed of frame `frame` at sweep point `point` for run seed `seed`.
    pub fn frame_seed(seed: u64, point: usize, frame: usize) -> u64 {
        derive_seed(derive_seed(seed, point as u64), frame as u64)
    }
}
