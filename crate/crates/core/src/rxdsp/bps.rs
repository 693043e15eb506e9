use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::txdsp::ModFormat;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpsConfig {
    pub test_phases: usize,
    pub block_len: usize,
}

impl Default for BpsConfig {
    fn default() -> Self {
        Self {
            test_phases: 32,
            block_len: 64,
        }
    }
}

/// Blind phase search for bipolar ASK.
///
/// Test phases cover [−π/2, π/2) because the constellation is symmetric
/// under a π rotation. Each block takes the phase minimizing the squared
/// distance to the nearest real-axis level; the per-block phases are then
/// unwrapped modulo π. Returns the rotated symbols and the phase per block.
pub fn bps_cpe(symbols: &[Complex64], fmt: &ModFormat, cfg: &BpsConfig) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if cfg.test_phases == 0 || cfg.block_len == 0 {
        return Err(Error::invalid("BPS needs at least one test phase and a nonzero block length"));
    }
    let b = cfg.test_phases;
    let levels = fmt.levels();
    let rotors: Vec<Complex64> = (0..b)
        .map(|i| Complex64::from_polar(1.0, -(-PI / 2.0 + PI * i as f64 / b as f64)))
        .collect();
    let mut track = Vec::with_capacity(symbols.len().div_ceil(cfg.block_len));
    let mut prev: Option<f64> = None;
    for block in symbols.chunks(cfg.block_len) {
        let mut best = (f64::INFINITY, 0usize);
        for (i, r) in rotors.iter().enumerate() {
            let cost: f64 = block
                .iter()
                .map(|s| {
                    let z = s * r;
                    let d = levels[fmt.slice(z.re)];
                    (z.re - d).powi(2) + z.im * z.im
                })
                .sum();
            if cost < best.0 {
                best = (cost, i);
            }
        }
        let raw = -PI / 2.0 + PI * best.1 as f64 / b as f64;
        let phase = match prev {
            Some(p) => raw + PI * ((p - raw) / PI).round(),
            None => raw,
        };
        prev = Some(phase);
        track.push(phase);
    }
    let out = symbols
        .iter()
        .enumerate()
        .map(|(i, s)| s * Complex64::from_polar(1.0, -track[i / cfg.block_len]))
        .collect();
    Ok((out, track))
}

/// Fixes the π ambiguity segment by segment from the known training runs.
///
/// `runs` are `(start, len)` in time order with `known[k]` the training
/// value. Each run sets the sign from its own start up to the next run;
/// symbols ahead of the first run follow the first run.
pub fn resolve_polarity(symbols: &mut [Complex64], runs: &[(usize, usize)], known: impl Fn(usize) -> f64) -> Vec<bool> {
    let mut flips = Vec::with_capacity(runs.len());
    for (i, &(start, len)) in runs.iter().enumerate() {
        let corr: f64 = (start..start + len).map(|k| symbols[k].re * known(k)).sum();
        let flip = corr < 0.0;
        flips.push(flip);
        let from = if i == 0 { 0 } else { start };
        let to = runs.get(i + 1).map(|r| r.0).unwrap_or(symbols.len());
        if flip {
            symbols[from..to].iter_mut().for_each(|s| *s = -*s);
        }
    }
    flips
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{complex_gaussian, rng_from_seed};
    use crate::txdsp::{map_bits_to_ask, random_bits};
    use proptest::prelude::*;

    fn symbols(m: usize, n: usize, seed: u64) -> (ModFormat, Vec<f64>) {
        let fmt = ModFormat::new(m).unwrap();
        let bits = random_bits(n * fmt.bits_per_symbol(), &mut rng_from_seed(seed));
        let s = map_bits_to_ask(&bits, &fmt).unwrap();
        (fmt, s)
    }

    fn wrap_pi(x: f64) -> f64 {
        x - PI * (x / PI).round()
    }

    #[test]
    fn static_rotation_recovered() {
        let (fmt, s) = symbols(8, 4096, 1);
        let rx: Vec<Complex64> = s.iter().map(|&v| Complex64::from_polar(v, 0.3)).collect();
        let (out, track) = bps_cpe(&rx, &fmt, &BpsConfig::default()).unwrap();
        for p in &track {
            assert!(wrap_pi(p - 0.3).abs() < PI / 64.0 + 1e-12);
        }
        assert!(out.iter().zip(&s).all(|(o, v)| (o.re.abs() - v.abs()).abs() < 0.01));
    }

    #[test]
    fn zero_phase_constant_index() {
        let (fmt, s) = symbols(4, 4096, 2);
        let mut rng = rng_from_seed(3);
        let rx: Vec<Complex64> = s.iter().map(|&v| Complex64::from(v) + complex_gaussian(&mut rng, 0.01)).collect();
        let (_, track) = bps_cpe(&rx, &fmt, &BpsConfig::default()).unwrap();
        assert!(track.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn polarity_resolved_per_segment() {
        let mut s: Vec<Complex64> = (0..300).map(|i| Complex64::new(if i % 3 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let truth = s.clone();
        for v in &mut s[100..] {
            *v = -*v;
        }
        let runs = [(10, 20), (100, 20), (200, 20)];
        let flips = resolve_polarity(&mut s, &runs, |k| truth[k].re);
        assert_eq!(flips, vec![false, true, true]);
        assert_eq!(s, truth);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn recovers_any_static_rotation(phi in -PI / 2.0 + 0.01..PI / 2.0 - 0.01, m in prop::sample::select(vec![2usize, 4, 8])) {
            let (fmt, s) = symbols(m, 1024, 4);
            let rx: Vec<Complex64> = s.iter().map(|&v| Complex64::from_polar(v, phi)).collect();
            let (_, track) = bps_cpe(&rx, &fmt, &BpsConfig::default()).unwrap();
            for p in &track {
                prop_assert!(wrap_pi(p - phi).abs() <= PI / 64.0 + 1e-9);
            }
        }

        #[test]
        fn pi_rotation_keeps_decisions(phi in -1.2f64..1.2, seed in 0u64..1000) {
            let (fmt, s) = symbols(4, 512, seed);
            let mut rng = rng_from_seed(seed);
            let rx: Vec<Complex64> = s.iter().map(|&v| Complex64::from_polar(v, phi) + complex_gaussian(&mut rng, 0.002)).collect();
            let flipped: Vec<Complex64> = rx.iter().map(|v| -v).collect();
            let (mut a, _) = bps_cpe(&rx, &fmt, &BpsConfig::default()).unwrap();
            let (mut b, _) = bps_cpe(&flipped, &fmt, &BpsConfig::default()).unwrap();
            // the π ambiguity itself is settled by the training polarity
            resolve_polarity(&mut a, &[(0, 32)], |k| s[k]);
            resolve_polarity(&mut b, &[(0, 32)], |k| s[k]);
            let da: Vec<usize> = a.iter().map(|v| fmt.slice(v.re)).collect();
            let db: Vec<usize> = b.iter().map(|v| fmt.slice(v.re)).collect();
            prop_assert_eq!(da, db);
        }
    }
}
