use crate::{Error, Result};

/// All-ones register state.
pub const PRBS_DEFAULT_SEED: u32 = u32::MAX;

/// Feedback tap `k` of the primitive trinomial `x^order + x^k + 1`.
fn feedback_tap(order: u32) -> Option<u32> {
    let k = match order {
        2 => 1,
        3 => 2,
        4 => 3,
        5 => 3,
        6 => 5,
        7 => 6,
        9 => 5,
        10 => 7,
        11 => 9,
        15 => 14,
        17 => 14,
        20 => 17,
        23 => 18,
        31 => 28,
        _ => return None,
    };
    Some(k)
}

/// Fibonacci LFSR pseudo-random binary sequence.
///
/// PRBS-5 uses `x^5 + x^3 + 1`. The seed is masked to `order` bits; the
/// sequence repeats with period `2^order - 1`.
pub fn generate_prbs(order: u32, seed_state: u32, length: usize) -> Result<Vec<u8>> {
    let tap = feedback_tap(order).ok_or_else(|| Error::invalid(format!("no primitive polynomial tabulated for PRBS order {order}")))?;
    let mask = if order == 32 { u32::MAX } else { (1u32 << order) - 1 };
    let mut state = seed_state & mask;
    if state == 0 {
        return Err(Error::ZeroSeed);
    }
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let msb = (state >> (order - 1)) & 1;
        let fb = msb ^ ((state >> (tap - 1)) & 1);
        out.push(msb as u8);
        state = ((state << 1) | fb) & mask;
    }
    Ok(out)
}
