//! Frame voicing gate shared by the decomposition and pitch estimators:
//! a frame counts as voiced when its RMS sits within 20 dB of the loudest
//! frame and its normalized autocorrelation has a clear periodicity peak.

use crate::lpc::autocorrelate;
use crate::signal::{rms, Frame};

/// Minimum normalized autocorrelation peak for a voiced decision.
pub(crate) const VOICING_RATIO_THRESHOLD: f64 = 0.3;

/// Frames quieter than the utterance peak RMS by this factor are skipped.
pub(crate) const RMS_GATE_DB: f64 = -20.0;

pub(crate) struct PeriodicityPeak {
    pub lag: usize,
    pub ratio: f64,
}

/// Strongest autocorrelation peak of the raw (unwindowed) frame within the
/// lag range that corresponds to `[f_min, f_max]`.
pub(crate) fn periodicity_peak(raw: &[f64], sample_rate: u32, f_min: f64, f_max: f64) -> Option<PeriodicityPeak> {
    let fs = sample_rate as f64;
    let lag_lo = (fs / f_max).floor().max(2.0) as usize;
    let lag_hi = ((fs / f_min).ceil() as usize).min(raw.len().saturating_sub(2));
    if lag_lo >= lag_hi {
        return None;
    }
    let r = autocorrelate(raw, lag_hi).ok()?;
    if r[0] <= 0.0 {
        return None;
    }
    let mut best = lag_lo;
    for lag in lag_lo..=lag_hi {
        if r[lag] > r[best] {
            best = lag;
        }
    }
    Some(PeriodicityPeak {
        lag: best,
        ratio: r[best] / r[0],
    })
}

/// Peak frame RMS over an utterance, used as the loudness reference.
pub(crate) fn peak_frame_rms(frames: &[Frame]) -> f64 {
    frames
        .iter()
        .map(|f| rms(f.raw()))
        .fold(0.0f64, f64::max)
}

pub(crate) fn is_voiced(
    frame: &Frame,
    peak_rms: f64,
    sample_rate: u32,
    f_min: f64,
    f_max: f64,
) -> bool {
    let gate = peak_rms * 10f64.powf(RMS_GATE_DB / 20.0);
    if rms(frame.raw()) < gate || peak_rms == 0.0 {
        return false;
    }
    match periodicity_peak(frame.raw(), sample_rate, f_min, f_max) {
        Some(peak) => peak.ratio > VOICING_RATIO_THRESHOLD,
        None => false,
    }
}
