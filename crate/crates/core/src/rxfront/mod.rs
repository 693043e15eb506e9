mod adc;
mod detect;
mod optical;

pub use adc::{adc_capture, AdcParams};
pub use detect::{coherent_detect, normalize_rms, DetectedStreams, DetectorParams};
pub use optical::{optical_bandpass, rotate_polarization, FilterShape, JonesMatrix};
