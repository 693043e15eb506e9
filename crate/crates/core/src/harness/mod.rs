//! Sweeps, theory curves, penalties and report files.

mod chain;
mod config;
mod penalty;
mod report;
mod sweep;
mod theory;

pub use chain::{detect, run_b2b_frame, run_link_frame, transmit, tx_waveform, FrameResult, TxOutput, SIM_SPS};
pub use config::{ChipSource, JonesSpec, LinkConfig, MonteCarlo, SweepSpec, TxOsnr};
pub use penalty::{
    compute_penalty, crossing, margins, rate_accounting, Margins, Rates, HD_FEC_OVERHEAD_PCT, HD_FEC_Q2_DB,
    SD_FEC_OVERHEAD_PCT, SD_FEC_Q2_DB,
};
pub use report::{emit_reports, summarize, Peak, Summary, REFERENCE_OPTIMUM_DBM, REFERENCE_PEAK_Q2_DB};
pub use sweep::{
    config_hash, run_b2b_sweep, run_link_sweep, MetricsRow, MetricsTable, SweepKind, TableMetadata, CSV_COLUMNS,
    CSV_SCHEMA_VERSION,
};
pub use theory::{monte_carlo_ber, osnr_to_snr, snr_to_osnr_db, theory_ber, theory_osnr_for_q2, theory_q2, B_REF_HZ};
