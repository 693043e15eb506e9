use statrs::function::erf::{erfc, erfc_inv};

use crate::rxdsp::{ber_to_q2, decide_inphase, q2_to_ber};
use crate::signal::{complex_gaussian, db_to_lin, lin_to_db, SimRng};
use crate::txdsp::{map_bits_to_ask, random_bits, ModFormat};
use crate::{Error, Result};

/// Noise reference bandwidth of the OSNR definition.
pub const B_REF_HZ: f64 = 12.5e9;

/// Per-symbol SNR of a dual-polarization signal: `OSNR·B_ref/R_s`.
pub fn osnr_to_snr(osnr_db: f64, symbol_rate: f64) -> f64 {
    db_to_lin(osnr_db) * B_REF_HZ / symbol_rate
}

pub fn snr_to_osnr_db(snr: f64, symbol_rate: f64) -> f64 {
    lin_to_db(snr * symbol_rate / B_REF_HZ)
}

fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn ber_scale(fmt: &ModFormat) -> f64 {
    let m = fmt.m() as f64;
    2.0 * (m - 1.0) / (m * m.log2())
}

/// Gray-coded bipolar m-ASK BER with an in-phase decision in complex AWGN.
pub fn theory_ber(osnr_db: f64, fmt: &ModFormat, symbol_rate: f64) -> f64 {
    let m = fmt.m() as f64;
    let snr = osnr_to_snr(osnr_db, symbol_rate);
    ber_scale(fmt) * gaussian_tail((6.0 * snr / (m * m - 1.0)).sqrt())
}

/// AWGN-theory Q² in dB.
pub fn theory_q2(osnr_db: f64, fmt: &ModFormat, symbol_rate: f64) -> Result<f64> {
    ber_to_q2(theory_ber(osnr_db, fmt, symbol_rate))
}

/// OSNR at which the theory curve reaches `q2_db`.
pub fn theory_osnr_for_q2(q2_db: f64, fmt: &ModFormat, symbol_rate: f64) -> Result<f64> {
    let p = q2_to_ber(q2_db) / ber_scale(fmt);
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Domain {
            func: "theory_osnr_for_q2",
            value: q2_db,
        });
    }
    let x = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let m = fmt.m() as f64;
    Ok(snr_to_osnr_db(x * x * (m * m - 1.0) / 6.0, symbol_rate))
}

/// Monte-Carlo BER: random symbols, complex AWGN at the same SNR, in-phase decision.
pub fn monte_carlo_ber(osnr_db: f64, fmt: &ModFormat, symbol_rate: f64, n_symbols: usize, rng: &mut SimRng) -> Result<f64> {
    let bits = random_bits(n_symbols * fmt.bits_per_symbol(), rng);
    let symbols = map_bits_to_ask(&bits, fmt)?;
    let var = 1.0 / osnr_to_snr(osnr_db, symbol_rate);
    let received: Vec<f64> = symbols.iter().map(|&s| s + complex_gaussian(rng, var).re).collect();
    let decided = decide_inphase(&received, fmt);
    let errors = decided.iter().zip(&bits).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / bits.len() as f64)
}
