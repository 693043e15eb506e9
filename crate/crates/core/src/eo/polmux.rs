use crate::signal::{circular_shift, DualPolWaveform, Waveform};
use crate::{Error, Result};

/// Polarization-multiplexing emulation: Y is X delayed by `delay_symbols`
/// (circularly within the frame); both lose `split_loss_db`.
pub fn polmux(field: &Waveform, delay_symbols: usize, symbol_rate: f64, split_loss_db: f64) -> Result<DualPolWaveform> {
    let sps = field.sample_rate / symbol_rate;
    let delay = delay_symbols as f64 * sps;
    if (delay - delay.round()).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "PolMux delay of {delay_symbols} symbols is {delay} samples; resample to an integer rate first"
        )));
    }
    let loss = 10f64.powf(-split_loss_db / 20.0);
    let x = field.scaled(loss);
    let y = x.with_samples(circular_shift(&x.samples, delay.round() as isize));
    DualPolWaveform::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{filter_circular, design_rrc, rng_from_seed};
    use crate::txdsp::{build_frame, random_bits, shape_pulse, HeaderConfig, ModFormat};

    #[test]
    fn zero_delay_duplicates() {
        let w = Waveform::from_real(&[1.0, 2.0, 3.0, 4.0], 128e9).unwrap();
        let d = polmux(&w, 0, 64e9, 0.0).unwrap();
        assert_eq!(d.pol_x, d.pol_y);
    }

    #[test]
    fn delay_1094_symbols() {
        let fmt = ModFormat::new(2).unwrap();
        let h = HeaderConfig::default();
        let frame = build_frame(&random_bits(h.payload_symbols, &mut rng_from_seed(1)), &fmt, &h).unwrap();
        let rrc = design_rrc(0.1, 64, 2).unwrap();
        let w = shape_pulse(&frame, 2, &rrc, 64e9).unwrap();
        let d = polmux(&w, 1094, 64e9, 3.0).unwrap();
        assert_eq!(d.pol_y.samples[2188], d.pol_x.samples[0]);
        assert!((d.power() - w.power() * 2.0 * 10f64.powf(-0.3)).abs() < 1e-12);

        // symbol-rate cross-correlation peaks at 1094
        let sx: Vec<f64> = filter_circular(&d.pol_x.samples, &rrc).iter().step_by(2).map(|s| s.re).collect();
        let sy: Vec<f64> = filter_circular(&d.pol_y.samples, &rrc).iter().step_by(2).map(|s| s.re).collect();
        let n = sx.len();
        let best = (0..n)
            .max_by(|&a, &b| {
                let ca: f64 = (0..n).map(|i| sx[i] * sy[(i + a) % n]).sum();
                let cb: f64 = (0..n).map(|i| sx[i] * sy[(i + b) % n]).sum();
                ca.partial_cmp(&cb).unwrap()
            })
            .unwrap();
        assert_eq!(best, 1094);
    }

    #[test]
    fn fractional_delay_rejected() {
        let w = Waveform::from_real(&[0.0; 30], 84e9).unwrap();
        assert!(polmux(&w, 1, 64e9, 3.0).is_err());
    }
}
