use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::txdsp::ModFormat;
use crate::{Error, Result};

/// In-phase-only decision: nearest level on the real axis, Gray-demapped.
pub fn decide_inphase(symbols_re: &[f64], fmt: &ModFormat) -> Vec<u8> {
    let k = fmt.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols_re.len() * k);
    for &x in symbols_re {
        let pattern = fmt.pattern(fmt.slice(x));
        for b in (0..k).rev() {
            bits.push(((pattern >> b) & 1) as u8);
        }
    }
    bits
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerCount {
    pub errors: u64,
    pub bits: u64,
}

impl BerCount {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    pub fn merge(&mut self, other: &BerCount) {
        self.errors += other.errors;
        self.bits += other.bits;
    }
}

/// Bit errors between aligned payload bit streams.
pub fn count_ber(decided: &[u8], reference: &[u8]) -> Result<BerCount> {
    if decided.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            got: decided.len(),
        });
    }
    let errors = decided.iter().zip(reference).filter(|(a, b)| (*a & 1) != (*b & 1)).count() as u64;
    Ok(BerCount {
        errors,
        bits: reference.len() as u64,
    })
}

/// `Q² = 20·log10(√2·erfc⁻¹(2·BER))`.
pub fn ber_to_q2(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(Error::Domain { func: "ber_to_q2", value: ber });
    }
    Ok(20.0 * (SQRT_2 * erfc_inv(2.0 * ber)).log10())
}

/// Inverse of [`ber_to_q2`].
pub fn q2_to_ber(q2_db: f64) -> f64 {
    let q = 10f64.powf(q2_db / 20.0);
    0.5 * erfc(q / SQRT_2)
}

/// Standard normal cumulative distribution.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Kolmogorov–Smirnov test of `samples` against a normal law with the
/// sample mean and deviation. Returns `(D, p)`; `p` uses the asymptotic
/// Kolmogorov distribution with the Stephens small-sample correction.
pub fn ks_normality(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n < 8 {
        return (0.0, 1.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if std == 0.0 {
        return (1.0, 0.0);
    }
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mean) / std).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = normal_cdf(v);
            (c - i as f64 / nf).max((i + 1) as f64 / nf - c)
        })
        .fold(0.0, f64::max);
    let sn = nf.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Slicer-input statistics for one transmitted level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: f64,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub ks_d: f64,
    pub ks_p: f64,
    pub histogram: Vec<u64>,
}

/// Histogram bin edges shared by every level: `bins` bins over ±1.6·outer.
pub fn histogram_edges(fmt: &ModFormat, bins: usize) -> Vec<f64> {
    let span = 1.6 * fmt.outer_level();
    (0..=bins).map(|i| -span + 2.0 * span * i as f64 / bins as f64).collect()
}

/// Groups received in-phase values by the transmitted level.
pub fn level_statistics(received_re: &[f64], sent: &[f64], fmt: &ModFormat, bins: usize) -> Vec<LevelStats> {
    let edges = histogram_edges(fmt, bins);
    let (lo, hi) = (edges[0], edges[bins]);
    fmt.levels()
        .iter()
        .enumerate()
        .map(|(idx, &level)| {
            let xs: Vec<f64> = received_re
                .iter()
                .zip(sent)
                .filter(|(_, &s)| fmt.slice(s) == idx)
                .map(|(&r, _)| r)
                .collect();
            let n = xs.len();
            let mean = if n > 0 { xs.iter().sum::<f64>() / n as f64 } else { 0.0 };
            let std = if n > 1 {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            let mut histogram = vec![0u64; bins];
            for &x in &xs {
                if x >= lo && x < hi {
                    let b = (((x - lo) / (hi - lo)) * bins as f64) as usize;
                    histogram[b.min(bins - 1)] += 1;
                }
            }
            let (ks_d, ks_p) = ks_normality(&xs);
            LevelStats {
                level,
                count: n,
                mean,
                std,
                ks_d,
                ks_p,
                histogram,
            }
        })
        .collect()
}

/// BER predicted by Gaussian fits of each level against the fixed slicer.
///
/// Useful where the counted BER is zero; errors into non-adjacent levels are
/// weighted by their Gray distance.
pub fn gaussian_fit_ber(stats: &[LevelStats], fmt: &ModFormat) -> f64 {
    let levels = fmt.levels();
    let m = levels.len();
    let thresholds: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let k = fmt.bits_per_symbol() as f64;
    let mut total = 0.0;
    let mut weight = 0.0;
    for (j, s) in stats.iter().enumerate() {
        if s.count == 0 || s.std == 0.0 {
            continue;
        }
        let cdf = |x: f64| normal_cdf((x - s.mean) / s.std);
        let mut bit_errs = 0.0;
        for l in 0..m {
            if l == j {
                continue;
            }
            let lo = if l == 0 { 0.0 } else { cdf(thresholds[l - 1]) };
            let hi = if l == m - 1 { 1.0 } else { cdf(thresholds[l]) };
            let dist = (fmt.pattern(j) ^ fmt.pattern(l)).count_ones() as f64;
            bit_errs += (hi - lo).max(0.0) * dist;
        }
        total += bit_errs;
        weight += 1.0;
    }
    if weight == 0.0 {
        0.0
    } else {
        total / weight / k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::rng_from_seed;
    use crate::txdsp::{map_bits_to_ask, random_bits};
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal, StandardNormal};

    /// Bisection on the direct definition, independent of erfc_inv.
    fn q2_oracle(ber: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 0.5 * erfc(mid / SQRT_2) > ber {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        20.0 * lo.log10()
    }

    #[test]
    fn fec_anchors() {
        assert!((ber_to_q2(2.002e-2).unwrap() - 6.25).abs() < 0.01);
        assert!((ber_to_q2(3.77e-3).unwrap() - 8.53).abs() < 0.01);
        assert!((ber_to_q2(1e-3).unwrap() - 9.80).abs() < 0.01);
        for ber in [2.002e-2, 3.77e-3, 1e-3, 1e-6] {
            assert!((ber_to_q2(ber).unwrap() - q2_oracle(ber)).abs() < 1e-6);
        }
    }

    #[test]
    fn domain_errors() {
        for ber in [0.0, 0.5, 0.7, -0.1] {
            assert!(matches!(ber_to_q2(ber), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn exact_round_trip_all_formats() {
        for m in [2, 4, 8] {
            let fmt = ModFormat::new(m).unwrap();
            let bits = random_bits(3000 * fmt.bits_per_symbol(), &mut rng_from_seed(m as u64));
            let sym = map_bits_to_ask(&bits, &fmt).unwrap();
            assert_eq!(decide_inphase(&sym, &fmt), bits);
        }
    }

    #[test]
    fn inphase_only_and_midpoint() {
        let fmt = ModFormat::new(8).unwrap();
        let top = 7.0 / 21f64.sqrt();
        assert_eq!(fmt.slice(top), 7);
        // a Q excursion of 0.5 is ignored because only the real part enters
        assert_eq!(decide_inphase(&[top], &fmt), decide_inphase(&[num_complex::Complex64::new(top, 0.5).re], &fmt));
        let lv = fmt.levels();
        let mid = 0.5 * (lv[3] + lv[4]);
        assert_eq!(fmt.slice(mid), 3);
    }

    #[test]
    fn ber_counting() {
        let a = vec![0u8; 1_000_000];
        let mut b = a.clone();
        assert_eq!(count_ber(&a, &b).unwrap().ber(), 0.0);
        b[12345] = 1;
        assert_eq!(count_ber(&b, &a).unwrap().ber(), 1e-6);
        let c: Vec<u8> = a.iter().map(|x| 1 - x).collect();
        assert_eq!(count_ber(&c, &a).unwrap().ber(), 1.0);
        assert!(count_ber(&a[..10], &a).is_err());
    }

    #[test]
    fn ks_accepts_gaussian_rejects_uniform() {
        let mut rng = rng_from_seed(1);
        let g: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(ks_normality(&g).1 > 0.01);
        let u: Vec<f64> = (0..5000).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        assert!(ks_normality(&u).1 < 1e-3);
    }

    #[test]
    fn gaussian_fit_matches_count() {
        let fmt = ModFormat::new(4).unwrap();
        let mut rng = rng_from_seed(2);
        let bits = random_bits(400_000, &mut rng);
        let sent = map_bits_to_ask(&bits, &fmt).unwrap();
        let noise = Normal::new(0.0, 0.22).unwrap();
        let rx: Vec<f64> = sent.iter().map(|s| s + noise.sample(&mut rng)).collect();
        let counted = count_ber(&decide_inphase(&rx, &fmt), &bits).unwrap().ber();
        let stats = level_statistics(&rx, &sent, &fmt, 64);
        let fit = gaussian_fit_ber(&stats, &fmt);
        assert!((ber_to_q2(fit).unwrap() - ber_to_q2(counted).unwrap()).abs() < 0.1, "{fit} {counted}");
        assert_eq!(stats.iter().map(|s| s.count).sum::<usize>(), sent.len());
        assert!(stats.iter().all(|s| s.ks_p > 0.01));
    }

    proptest! {
        #[test]
        fn q2_strictly_decreasing(a in 1e-12f64..0.4999, b in 1e-12f64..0.4999) {
            prop_assume!((a - b).abs() > 1e-12 * a.max(b));
            let (qa, qb) = (ber_to_q2(a).unwrap(), ber_to_q2(b).unwrap());
            prop_assert_eq!(a < b, qa > qb);
        }

        #[test]
        fn q2_inverse(q in -5.0f64..16.0) {
            prop_assert!((ber_to_q2(q2_to_ber(q)).unwrap() - q).abs() < 1e-6);
        }
    }
}
