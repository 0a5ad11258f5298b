//! Objective evaluation: DTW-aligned mel-cepstral distortion, real-time
//! factor, voiced-duration speaking rate and conversion factors.

mod dtw;
mod mcd;
mod report;
mod rtf;
mod vad;

pub use dtw::{dtw_align, DtwPath};
pub use mcd::{conversion_factor, mcd, MCD_SCALE};
pub use report::{validate_report_line, EvalReport, REPORT_KEYS};
pub use rtf::{measure_rtf, median, RtfReport, TaskOutput};
pub use vad::{speaking_rate, voiced_duration, voiced_frames, SpeakingRate, VadConfig};
