mod bps;
mod dd;
mod metrics;
mod mimo;
mod sync;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use crate::channel::compensate_cd;
pub use bps::{bps_cpe, resolve_polarity, BpsConfig};
pub use dd::{dd_equalize_4x4, DdConfig, Rails};
pub use metrics::{
    ber_to_q2, count_ber, decide_inphase, gaussian_fit_ber, histogram_edges, ks_normality, level_statistics, normal_cdf,
    q2_to_ber, BerCount, LevelStats,
};
pub use mimo::{mimo_equalize_da, MimoConfig, MimoOutput};
pub use sync::{estimate_freq_offset, frame_sync, remove_freq_offset, SyncResult};

use crate::rxfront::DetectedStreams;
use crate::signal::{design_rrc, filter_circular, resample};
use crate::txdsp::SymbolFrame;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqMode {
    Complex2x2,
    Real4x4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Taps {
    /// `[row][input pol][tap]`
    Complex2x2(Vec<Vec<Vec<Complex64>>>),
    /// `[output rail][input rail][tap]`
    Real4x4(Vec<Vec<Vec<f64>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualizerState {
    pub mode: EqMode,
    pub taps: Taps,
    pub step_size: f64,
    pub converged: bool,
    pub initial_mse: f64,
    pub final_mse: f64,
}

/// Maps time-ordered symbol slots `k` to sample positions and frame indices.
///
/// Slot `k` sits at sample `offset % 2 + 2k`; the X tributary's frame symbol
/// 0 sits at sample `offset`, and the Y tributary carries the frame delayed
/// by `delay` symbols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alignment {
    pub n: usize,
    pub offset: usize,
    pub delay: usize,
}

impl Alignment {
    pub fn sample(&self, k: usize) -> usize {
        self.offset % 2 + 2 * k
    }

    pub fn frame_index(&self, trib: usize, k: usize) -> usize {
        let fx = (k + self.n - (self.offset / 2) % self.n) % self.n;
        if trib == 0 {
            fx
        } else {
            (fx + self.n - self.delay % self.n) % self.n
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DspConfig {
    pub symbol_rate: f64,
    /// Dispersion removed digitally, ps/(nm·km) over `cd_length_km`.
    pub cd_dispersion: f64,
    pub cd_length_km: f64,
    pub rrc_rolloff: f64,
    pub rrc_span: usize,
    pub polmux_delay_symbols: usize,
    pub estimate_freq_offset: bool,
    pub max_freq_offset_hz: f64,
    pub pslr_min: f64,
    pub mimo: MimoConfig,
    pub bps: BpsConfig,
    pub dd: DdConfig,
    pub histogram_bins: usize,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            symbol_rate: crate::SYMBOL_RATE,
            cd_dispersion: 17.0,
            cd_length_km: 0.0,
            rrc_rolloff: 0.1,
            rrc_span: 64,
            polmux_delay_symbols: 1094,
            estimate_freq_offset: true,
            max_freq_offset_hz: 2e9,
            pslr_min: 2.0,
            mimo: MimoConfig::default(),
            bps: BpsConfig::default(),
            dd: DdConfig::default(),
            histogram_bins: 64,
        }
    }
}

/// Per-frame receiver result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DspReport {
    pub ber: f64,
    /// Present iff `0 < ber < 0.5`.
    pub q2_db: Option<f64>,
    /// From Gaussian fits of the slicer input; defined even when no error was counted.
    pub q2_gauss_db: Option<f64>,
    pub bits_counted: u64,
    pub errors: u64,
    pub histogram_edges: Vec<f64>,
    pub per_level_histograms: Vec<LevelStats>,
    /// BPS phase per block, per tributary.
    pub phase_track: [Vec<f64>; 2],
    pub freq_offset_hz: f64,
    pub sync: SyncResult,
    pub mimo_mse: f64,
    pub dd_mse_before: f64,
    pub dd_mse_after: f64,
}

impl DspReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything the receiver produces for one frame.
#[derive(Clone, Debug)]
pub struct RxOutput {
    pub report: DspReport,
    pub counts: BerCount,
    /// Slicer input per tributary in frame order.
    pub symbols: [Vec<Complex64>; 2],
    pub mimo_state: EqualizerState,
    pub dd_state: EqualizerState,
}

/// Full offline DSP for one captured frame.
///
/// Resample to 2 sps, dispersion compensation, blind frequency-offset
/// removal, matched filter, frame sync, 2×2 MIMO, BPS with training
/// polarity, 4×4 DD equalizer, in-phase decision and BER on payload bits.
pub fn receive(streams: &DetectedStreams, frame: &SymbolFrame, cfg: &DspConfig) -> Result<RxOutput> {
    let n = frame.len();
    let rate = 2.0 * cfg.symbol_rate;
    let dual = streams.to_dual_pol()?;
    let dual = dual.try_map_pols(|w| resample(w, rate))?;
    if dual.len() != 2 * n {
        return Err(Error::LengthMismatch {
            expected: 2 * n,
            got: dual.len(),
        });
    }
    let dual = if cfg.cd_length_km != 0.0 {
        compensate_cd(&dual, cfg.cd_dispersion, cfg.cd_length_km)?
    } else {
        dual
    };
    let mut x = dual.pol_x.samples;
    let mut y = dual.pol_y.samples;
    let freq_offset_hz = if cfg.estimate_freq_offset {
        estimate_freq_offset(&x, &y, rate, cfg.max_freq_offset_hz)
    } else {
        0.0
    };
    remove_freq_offset(&mut x, freq_offset_hz, rate);
    remove_freq_offset(&mut y, freq_offset_hz, rate);

    let rrc = design_rrc(cfg.rrc_rolloff, cfg.rrc_span, 2)?;
    let mut x = filter_circular(&x, &rrc);
    let mut y = filter_circular(&y, &rrc);
    let p = (x.iter().chain(&y).map(|v| v.norm_sqr()).sum::<f64>() / (2 * n) as f64).sqrt();
    if p == 0.0 {
        return Err(Error::invalid("received signal is all zero"));
    }
    x.iter_mut().chain(y.iter_mut()).for_each(|v| *v /= p);

    let sync = frame_sync(&x, &y, frame, cfg.polmux_delay_symbols, cfg.pslr_min)?;
    let al = Alignment {
        n,
        offset: sync.offset_samples,
        delay: cfg.polmux_delay_symbols,
    };
    let mimo = mimo_equalize_da(&x, &y, &al, frame, &sync.channel, &cfg.mimo)?;

    let fmt = &frame.format;
    let mut tribs = [mimo.x, mimo.y];
    let mut phase_track: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for t in 0..2 {
        let (mut rot, track) = bps_cpe(&tribs[t], fmt, &cfg.bps)?;
        let runs = mimo::training_runs(&al, frame, t);
        resolve_polarity(&mut rot, &runs, |k| frame.symbols[al.frame_index(t, k)]);
        tribs[t] = rot;
        phase_track[t] = track;
    }

    let rails: Rails = [
        tribs[0].iter().map(|v| v.re).collect(),
        tribs[0].iter().map(|v| v.im).collect(),
        tribs[1].iter().map(|v| v.re).collect(),
        tribs[1].iter().map(|v| v.im).collect(),
    ];
    let known = |k: usize| -> [Option<f64>; 2] {
        std::array::from_fn(|t| {
            let fi = al.frame_index(t, k);
            frame.training_mask[fi].then(|| frame.symbols[fi])
        })
    };
    let mut rails = rails;
    remove_gain_bias(&mut rails, &known);
    let (mut eq, dd_state) = dd_equalize_4x4(&rails, fmt, known, &cfg.dd)?;
    normalize_signal_power(&mut eq, &known);

    // back to frame order
    let mut symbols = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    for k in 0..n {
        symbols[0][al.frame_index(0, k)] = Complex64::new(eq[0][k], eq[1][k]);
        symbols[1][al.frame_index(1, k)] = Complex64::new(eq[2][k], eq[3][k]);
    }
    let payload = frame.payload_positions();
    let mut counts = BerCount { errors: 0, bits: 0 };
    let mut received_re = Vec::with_capacity(2 * payload.len());
    let mut sent = Vec::with_capacity(2 * payload.len());
    for trib in &symbols {
        let re: Vec<f64> = payload.iter().map(|&i| trib[i].re).collect();
        let bits = decide_inphase(&re, fmt);
        counts.merge(&count_ber(&bits, &frame.payload_bits)?);
        received_re.extend_from_slice(&re);
        sent.extend(payload.iter().map(|&i| frame.symbols[i]));
    }
    let stats = level_statistics(&received_re, &sent, fmt, cfg.histogram_bins);
    let ber = counts.ber();
    let fit = gaussian_fit_ber(&stats, fmt);
    let report = DspReport {
        ber,
        q2_db: ber_to_q2(ber).ok(),
        q2_gauss_db: ber_to_q2(fit).ok(),
        bits_counted: counts.bits,
        errors: counts.errors,
        histogram_edges: histogram_edges(fmt, cfg.histogram_bins),
        per_level_histograms: stats,
        phase_track,
        freq_offset_hz,
        sync,
        mimo_mse: mimo.state.final_mse,
        dd_mse_before: dd_state.initial_mse,
        dd_mse_after: dd_state.final_mse,
    };
    Ok(RxOutput {
        report,
        counts,
        symbols,
        mimo_state: mimo.state,
        dd_state,
    })
}

/// Rescales each tributary so the in-phase rail has unit gain on the training symbols.
///
/// An MMSE-trained equalizer shrinks its output by `SNR/(1+SNR)`, which moves
/// the inner decision thresholds of multilevel formats.
pub fn remove_gain_bias(rails: &mut Rails, known: impl Fn(usize) -> [Option<f64>; 2]) {
    let n = rails[0].len();
    let mut num = [0.0; 2];
    let mut den = [0.0; 2];
    for k in 0..n {
        for (t, d) in known(k).iter().enumerate() {
            if let Some(d) = d {
                num[t] += rails[2 * t][k] * d;
                den[t] += d * d;
            }
        }
    }
    for t in 0..2 {
        if den[t] > 0.0 && num[t] > 0.0 {
            let g = den[t] / num[t];
            rails[2 * t].iter_mut().for_each(|v| *v *= g);
            rails[2 * t + 1].iter_mut().for_each(|v| *v *= g);
        }
    }
}

/// Rescales each tributary to unit signal power on the in-phase rail.
///
/// The quadrature rail of a one-dimensional constellation carries only noise,
/// so `E[I²] − E[Q²]` estimates the signal power without decisions. Falls back
/// to [`remove_gain_bias`] when that difference is not positive.
pub fn normalize_signal_power(rails: &mut Rails, known: impl Fn(usize) -> [Option<f64>; 2]) {
    let n = rails[0].len();
    let mut expected = [0.0; 2];
    for k in 0..n {
        for (t, d) in known(k).iter().enumerate() {
            expected[t] += d.map_or(1.0, |d| d * d);
        }
    }
    let mut fallback = false;
    for t in 0..2 {
        let pi: f64 = rails[2 * t].iter().map(|v| v * v).sum();
        let pq: f64 = rails[2 * t + 1].iter().map(|v| v * v).sum();
        if pi > pq && expected[t] > 0.0 {
            let g = (expected[t] / (pi - pq)).sqrt();
            rails[2 * t].iter_mut().for_each(|v| *v *= g);
            rails[2 * t + 1].iter_mut().for_each(|v| *v *= g);
        } else {
            fallback = true;
        }
    }
    if fallback {
        remove_gain_bias(rails, known);
    }
}

/// Constellation rows `pol,symbol_index,I,Q,decided_level` for payload symbols.
pub fn write_constellation_csv<W: std::io::Write>(out: &RxOutput, frame: &SymbolFrame, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["pol", "symbol_index", "I", "Q", "decided_level"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    let fmt = &frame.format;
    for (pol, name) in ["x", "y"].iter().enumerate() {
        for i in frame.payload_positions() {
            let s = out.symbols[pol][i];
            let lvl = fmt.levels()[fmt.slice(s.re)];
            w.write_record([name.to_string(), i.to_string(), format!("{:.6}", s.re), format!("{:.6}", s.im), format!("{lvl:.6}")])
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}
