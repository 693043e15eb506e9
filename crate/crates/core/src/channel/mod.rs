mod fiber;
mod noise;

pub use fiber::{beta2_s2_per_km, compensate_cd, compensate_cd_pol, propagate_scalar, propagate_ssmf, FiberParams};
pub use noise::{
    amplify_with_ase, ase_psd_mw_per_hz, estimate_osnr, load_noise_to_osnr, measure_osnr, osnr_ref_bandwidth_from_nm,
    set_power, AmpParams, NoiseRecord, OSNR_REF_BW_HZ,
};
