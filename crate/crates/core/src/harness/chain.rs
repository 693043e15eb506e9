use num_complex::Complex64;

use super::config::LinkConfig;
use crate::channel::{amplify_with_ase, load_noise_to_osnr, propagate_ssmf, set_power, AmpParams, NoiseRecord};
use crate::eo::{apply_driver, mzm_modulate, polmux, FreqResponse};
use crate::rxdsp::{receive, DspConfig, RxOutput};
use crate::rxfront::{adc_capture, coherent_detect, normalize_rms, optical_bandpass, rotate_polarization, DetectedStreams};
use crate::signal::{derive_seed, design_rrc, resample, rng_from_seed, DualPolWaveform, Waveform};
use crate::txdsp::{build_frame, dac_convert, predistort, random_bits, shape_pulse, zoh_magnitude, SymbolFrame};
use crate::Result;

/// Simulation samples per symbol in the optical domain.
pub const SIM_SPS: usize = 2;

// independent RNG streams inside one frame
const STREAM_BITS: u64 = 1;
const STREAM_DAC: u64 = 2;
const STREAM_LASER: u64 = 3;
const STREAM_TX_NOISE: u64 = 4;
const STREAM_LOADING: u64 = 5;
const STREAM_AMP: u64 = 6;
const STREAM_JONES: u64 = 7;
const STREAM_LO: u64 = 8;
const STREAM_ADC: u64 = 9;

/// Transmitter output for one frame.
#[derive(Clone, Debug)]
pub struct TxOutput {
    pub frame: SymbolFrame,
    pub signal: DualPolWaveform,
    pub record: NoiseRecord,
}

/// One simulated frame end to end.
#[derive(Clone, Debug)]
pub struct FrameResult {
    pub osnr_db: f64,
    pub launch_dbm: Option<f64>,
    pub rx: RxOutput,
    pub frame: SymbolFrame,
}

/// Hold response of the DAC as a tabulated response up to the simulation Nyquist.
fn zoh_response(dac_rate: f64, f_max: f64) -> FreqResponse {
    let n = 512;
    let grid: Vec<f64> = (0..=n).map(|i| f_max * i as f64 / n as f64).collect();
    let gains = grid.iter().map(|&f| Complex64::new(zoh_magnitude(f, dac_rate), 0.0)).collect();
    FreqResponse::new(grid, gains).expect("uniform grid")
}

/// Bits → frame → RRC → pre-distortion → DAC → driver → MZM → PolMux → TX noise floor.
///
/// `cfg` is used as given; call [`LinkConfig::effective`] first for ideal mode.
pub fn transmit(cfg: &LinkConfig, frame_seed: u64) -> Result<TxOutput> {
    let fmt = &cfg.format;
    let mut rng = rng_from_seed(derive_seed(frame_seed, STREAM_BITS));
    let bits = random_bits(cfg.header.payload_symbols * fmt.bits_per_symbol(), &mut rng);
    let frame = build_frame(&bits, fmt, &cfg.header)?;

    let rrc = design_rrc(cfg.rrc_rolloff, cfg.rrc_span, SIM_SPS)?;
    let shaped = shape_pulse(&frame, SIM_SPS, &rrc, cfg.symbol_rate)?;
    let sim_rate = shaped.sample_rate;

    let chip = cfg.chip.response()?;
    let shaped = if cfg.predistortion {
        let mut target = chip.clone();
        if cfg.dac.include_zoh {
            target = target.cascade(&zoh_response(cfg.dac.sample_rate, sim_rate / 2.0));
        }
        predistort(&shaped, &target, cfg.predistortion_max_boost_db)?
    } else {
        shaped
    };

    let analog = dac_convert(&shaped, &cfg.dac, &mut rng_from_seed(derive_seed(frame_seed, STREAM_DAC)))?;
    let mut analog = resample(&analog, sim_rate)?;
    let rms = analog.rms();
    analog.scale(1.0 / rms);

    let drive = apply_driver(&analog, &cfg.mzm, &chip)?;
    let field = mzm_modulate(&drive, &cfg.laser, &cfg.mzm, &mut rng_from_seed(derive_seed(frame_seed, STREAM_LASER)))?;
    let signal = polmux(&field, cfg.polmux_delay_symbols, cfg.symbol_rate, cfg.polmux_split_loss_db)?;
    let record = NoiseRecord::clean(signal.power());
    let (signal, record) = load_noise_to_osnr(
        &signal,
        &record,
        cfg.tx_max_osnr_db.for_format(fmt),
        &mut rng_from_seed(derive_seed(frame_seed, STREAM_TX_NOISE)),
    )?;
    Ok(TxOutput { frame, signal, record })
}

/// Optical filter, polarization rotation, coherent detection and ADC capture.
pub fn detect(cfg: &LinkConfig, sig: &DualPolWaveform, frame_seed: u64) -> Result<DetectedStreams> {
    let filtered = optical_bandpass(sig, cfg.rx_filter_nm, cfg.rx_filter_shape)?;
    let jones = cfg.jones.matrix(derive_seed(frame_seed, STREAM_JONES));
    let rotated = rotate_polarization(&filtered, &jones, 0.0)?;
    let detected = coherent_detect(
        &rotated,
        &cfg.lo,
        &cfg.detector,
        &mut rng_from_seed(derive_seed(frame_seed, STREAM_LO)),
    )?;
    let mut captured = adc_capture(&detected, &cfg.adc, &mut rng_from_seed(derive_seed(frame_seed, STREAM_ADC)))?;
    normalize_rms(&mut captured);
    Ok(captured)
}

fn dsp_config(cfg: &LinkConfig, cd_length_km: f64) -> DspConfig {
    DspConfig {
        symbol_rate: cfg.symbol_rate,
        rrc_rolloff: cfg.rrc_rolloff,
        rrc_span: cfg.rrc_span,
        polmux_delay_symbols: cfg.polmux_delay_symbols,
        cd_dispersion: cfg.fiber.dispersion_d,
        cd_length_km,
        ..cfg.dsp.clone()
    }
}

/// Back-to-back frame with noise loaded to `osnr_db` (`inf` keeps the TX floor).
pub fn run_b2b_frame(cfg: &LinkConfig, osnr_db: f64, frame_seed: u64) -> Result<FrameResult> {
    let tx = transmit(cfg, frame_seed)?;
    let (sig, record) = load_noise_to_osnr(
        &tx.signal,
        &tx.record,
        osnr_db,
        &mut rng_from_seed(derive_seed(frame_seed, STREAM_LOADING)),
    )?;
    let streams = detect(cfg, &sig, frame_seed)?;
    let rx = receive(&streams, &tx.frame, &dsp_config(cfg, 0.0))?;
    Ok(FrameResult {
        osnr_db: record.osnr_db(),
        launch_dbm: None,
        rx,
        frame: tx.frame,
    })
}

/// Amplified single-span frame at `launch_dbm`.
///
/// The preamplifier gain equals span loss plus receiver input loss, so the
/// detected power does not depend on the launch power.
pub fn run_link_frame(cfg: &LinkConfig, launch_dbm: f64, frame_seed: u64) -> Result<FrameResult> {
    let tx = transmit(cfg, frame_seed)?;
    let launched = set_power(&tx.signal, launch_dbm)?;
    let record = tx.record.scaled(launched.power() / tx.signal.power());
    let received = propagate_ssmf(&launched, &cfg.fiber)?;
    let loss_db = cfg.fiber.loss_db() + cfg.rx_input_loss_db;
    let attenuation = 10f64.powf(-loss_db / 10.0);
    // the span already applied its own loss
    let received = received.scaled(10f64.powf(-cfg.rx_input_loss_db / 20.0));
    let record = record.scaled(attenuation);
    let amp = AmpParams {
        gain_db: loss_db,
        noise_figure_db: cfg.preamp_noise_figure_db,
    };
    let (sig, record) = amplify_with_ase(&received, &record, &amp, &mut rng_from_seed(derive_seed(frame_seed, STREAM_AMP)))?;
    let streams = detect(cfg, &sig, frame_seed)?;
    let rx = receive(&streams, &tx.frame, &dsp_config(cfg, cfg.fiber.length_km))?;
    Ok(FrameResult {
        osnr_db: record.osnr_db(),
        launch_dbm: Some(launch_dbm),
        rx,
        frame: tx.frame,
    })
}

/// Transmitted waveform of one frame for spectrum reports.
pub fn tx_waveform(cfg: &LinkConfig, frame_seed: u64) -> Result<Waveform> {
    Ok(transmit(cfg, frame_seed)?.signal.pol_x)
}
