//! The three glottal inverse-filtering pipelines.
//!
//! Each one alternates LPC estimation with inverse filtering to split a
//! speech frame into glottis, vocal tract, and lip radiation:
//!
//! - [`iaif_decompose`] - first-order joint glottis/lip pre-emphasis, then
//!   gross VT, fine glottis, fine VT.
//! - [`gfm_iaif_decompose`] - lip contribution integrated away first, then
//!   a third-order gross glottis built from three successive first-order
//!   LPC iterations so the final glottis keeps the conjugate-pair-plus-
//!   real-pole structure.
//! - [`iop_iaif_decompose`] - unconstrained iterative pre-emphasis: keeps
//!   stacking first-order stages until the residual is spectrally flat.
//!
//! LPC runs on Hann-windowed data; inverse filtering runs on the raw frame
//! with zero state, so the decomposition is exactly invertible. The frame
//! mean is removed before analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpc::{lpc_analyze, LpcModel};
use crate::signal::{
    apply_fir, frame_signal, integrate, rms, AudioBuffer, FilterRole, Frame, PolynomialFilter,
    Window,
};
use crate::voicing;

/// Inverse-filtering method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "iaif")]
    Iaif,
    #[serde(rename = "gfm-iaif")]
    GfmIaif,
    #[serde(rename = "iop-iaif")]
    IopIaif,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Iaif, Method::GfmIaif, Method::IopIaif];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Iaif => "iaif",
            Method::GfmIaif => "gfm-iaif",
            Method::IopIaif => "iop-iaif",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iaif" => Ok(Method::Iaif),
            "gfm-iaif" | "gfm_iaif" | "gfmiaif" => Ok(Method::GfmIaif),
            "iop-iaif" | "iop_iaif" | "iopiaif" => Ok(Method::IopIaif),
            other => Err(Error::InvalidParam(format!("unknown method '{other}'"))),
        }
    }
}

/// Tunable parameters shared by all pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Lip radiation coefficient d in `1 - d z^-1`.
    pub lip_d: f64,
    /// Vocal-tract LPC order; `None` derives `sample_rate/1000 + 4`.
    pub vt_order: Option<usize>,
    /// Fine glottis LPC order for IAIF (GFM and IOP always use 3).
    pub glottis_fine_order: usize,
    pub frame_len_ms: f64,
    pub hop_fraction: f64,
    /// Iterative pre-emphasis stops once the first-order LPC coefficient
    /// magnitude drops below this.
    pub iop_gain_threshold: f64,
    /// Hard cap on the accumulated pre-emphasis order.
    pub max_iop_order: usize,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            lip_d: 0.99,
            vt_order: None,
            glottis_fine_order: 3,
            frame_len_ms: 32.0,
            hop_fraction: 0.5,
            iop_gain_threshold: 0.1,
            max_iop_order: 30,
            f0_min_hz: 70.0,
            f0_max_hz: 400.0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.lip_d && self.lip_d < 1.0) {
            return Err(Error::InvalidParam(format!(
                "lip_d must be in (0, 1), got {}",
                self.lip_d
            )));
        }
        if let Some(nv) = self.vt_order {
            if nv < 4 {
                return Err(Error::InvalidParam(format!("vt_order must be >= 4, got {nv}")));
            }
        }
        if self.glottis_fine_order == 0 {
            return Err(Error::InvalidParam("glottis_fine_order must be >= 1".into()));
        }
        if !(self.frame_len_ms > 0.0) {
            return Err(Error::InvalidParam("frame_len_ms must be positive".into()));
        }
        if !(0.0 < self.hop_fraction && self.hop_fraction <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "hop_fraction must be in (0, 1], got {}",
                self.hop_fraction
            )));
        }
        if !(self.iop_gain_threshold > 0.0) {
            return Err(Error::InvalidParam("iop_gain_threshold must be positive".into()));
        }
        if self.max_iop_order == 0 {
            return Err(Error::InvalidParam("max_iop_order must be >= 1".into()));
        }
        if !(self.f0_min_hz < self.f0_max_hz) {
            return Err(Error::InvalidParam("need f0_min < f0_max".into()));
        }
        Ok(())
    }

    /// Vocal-tract order for the given sample rate.
    pub fn vt_order_for(&self, sample_rate: u32) -> usize {
        self.vt_order
            .unwrap_or(sample_rate as usize / 1000 + 4)
    }

    pub fn frame_len_samples(&self, sample_rate: u32) -> usize {
        ((self.frame_len_ms / 1000.0) * sample_rate as f64).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        ((self.frame_len_samples(sample_rate) as f64) * self.hop_fraction).round() as usize
    }
}

/// One frame's source-filter split: the two all-pole models, the lip
/// coefficient they were estimated under, and the derived glottal flow
/// signals.
#[derive(Debug, Clone)]
pub struct SourceFilterDecomposition {
    glottis: LpcModel,
    vocal_tract: LpcModel,
    lip_d: f64,
    glottal_flow: Vec<f64>,
    glottal_flow_derivative: Vec<f64>,
    method: Method,
}

impl SourceFilterDecomposition {
    pub fn glottis(&self) -> &LpcModel {
        &self.glottis
    }

    pub fn vocal_tract(&self) -> &LpcModel {
        &self.vocal_tract
    }

    pub fn lip_d(&self) -> f64 {
        self.lip_d
    }

    /// Glottal flow derivative: the frame inverse-filtered by the fine
    /// vocal tract.
    pub fn glottal_flow_derivative(&self) -> &[f64] {
        &self.glottal_flow_derivative
    }

    /// Glottal flow: the derivative passed through the lip integrator.
    pub fn glottal_flow(&self) -> &[f64] {
        &self.glottal_flow
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// The excitation residual: the derivative with glottis and lip
    /// contributions inverse-filtered away.
    pub fn excitation(&self) -> Result<Vec<f64>> {
        integrate(
            &apply_fir(&self.glottal_flow_derivative, self.glottis.polynomial()),
            self.lip_d,
        )
    }

    /// Runs an excitation back through glottis, vocal tract, and lip
    /// derivative; with [`Self::excitation`] this reproduces the analyzed
    /// frame.
    pub fn reconstruct(&self, excitation: &[f64]) -> Result<Vec<f64>> {
        let through_glottis =
            crate::signal::apply_allpole(excitation, self.glottis.polynomial(), 1.0)?;
        let through_tract =
            crate::signal::apply_allpole(&through_glottis, self.vocal_tract.polynomial(), 1.0)?;
        let lip = PolynomialFilter::inverse_fir(vec![1.0, -self.lip_d])?;
        Ok(apply_fir(&through_tract, &lip))
    }
}

fn centered(frame: &Frame) -> Vec<f64> {
    let raw = frame.raw();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.iter().map(|v| v - mean).collect()
}

fn check_frame(frame: &Frame, nv: usize) -> Result<()> {
    if frame.len() < 4 * nv {
        return Err(Error::FrameTooShort {
            len: frame.len(),
            min: 4 * nv,
        });
    }
    let energy = rms(frame.raw());
    if energy == 0.0 || !energy.is_finite() {
        return Err(Error::DegenerateFrame);
    }
    Ok(())
}

/// Shared tail of all three pipelines, starting from a pre-emphasized
/// residual: gross VT, fine glottis, fine VT, then the flow signals.
fn finish_decomposition(
    x: &[f64],
    window: &[f64],
    pre_residual: &[f64],
    glottis_order: usize,
    nv: usize,
    lip_d: f64,
    method: Method,
) -> Result<SourceFilterDecomposition> {
    let vt_gross = lpc_analyze(pre_residual, window, nv)?;

    let fine_glottis_input = integrate(&apply_fir(x, vt_gross.polynomial()), lip_d)?;
    let glottis = lpc_analyze(&fine_glottis_input, window, glottis_order)?;

    let fine_vt_input = integrate(&apply_fir(x, glottis.polynomial()), lip_d)?;
    let vocal_tract = lpc_analyze(&fine_vt_input, window, nv)?;

    let glottal_flow_derivative = apply_fir(x, vocal_tract.polynomial());
    let glottal_flow = integrate(&glottal_flow_derivative, lip_d)?;

    Ok(SourceFilterDecomposition {
        glottis,
        vocal_tract,
        lip_d,
        glottal_flow,
        glottal_flow_derivative,
        method,
    })
}

/// Classic four-step IAIF.
///
/// A first-order LPC models glottis and lip radiation jointly; its inverse
/// pre-emphasizes the frame for the gross vocal-tract estimate, after which
/// glottis and vocal tract are re-estimated at their fine orders.
pub fn iaif_decompose(frame: &Frame, cfg: &AnalysisConfig) -> Result<SourceFilterDecomposition> {
    cfg.validate()?;
    let nv = cfg.vt_order_for(frame.sample_rate());
    check_frame(frame, nv)?;
    let x = centered(frame);
    let window = frame.window().values(frame.len());

    let pre = lpc_analyze(&x, &window, 1)?;
    let pre_residual = apply_fir(&x, pre.polynomial());
    finish_decomposition(
        &x,
        &window,
        &pre_residual,
        cfg.glottis_fine_order,
        nv,
        cfg.lip_d,
        Method::Iaif,
    )
}

/// GFM-IAIF: gross glottis as three cascaded first-order LPC stages on the
/// lip-compensated signal, fine glottis fixed at order 3.
pub fn gfm_iaif_decompose(
    frame: &Frame,
    cfg: &AnalysisConfig,
) -> Result<SourceFilterDecomposition> {
    cfg.validate()?;
    let nv = cfg.vt_order_for(frame.sample_rate());
    check_frame(frame, nv)?;
    let x = centered(frame);
    let window = frame.window().values(frame.len());

    let gross = gfm_gross_glottis(&x, &window, cfg.lip_d)?;
    let pre_residual = integrate(&apply_fir(&x, gross.polynomial()), cfg.lip_d)?;
    finish_decomposition(&x, &window, &pre_residual, 3, nv, cfg.lip_d, Method::GfmIaif)
}

/// The GFM gross glottis estimate: integrate away the lip radiation, then
/// run three successive first-order LPC iterations, each on the residual of
/// the previous inverse filtering. Their product is a degree-3 filter with
/// three real poles.
pub fn gfm_gross_glottis(x: &[f64], window: &[f64], lip_d: f64) -> Result<LpcModel> {
    let mut residual = integrate(x, lip_d)?;
    let mut accumulated = PolynomialFilter::identity(FilterRole::AllPole);
    let mut gain = 1.0;
    for _ in 0..3 {
        let stage = lpc_analyze(&residual, window, 1)?;
        accumulated = accumulated.multiply(stage.polynomial());
        residual = apply_fir(&residual, stage.polynomial());
        gain = stage.gain();
    }
    LpcModel::new(accumulated, gain)
}

/// IOP-IAIF: iterative first-order pre-emphasis of unconstrained order.
///
/// First-order LPC stages accumulate until the next stage's coefficient
/// magnitude falls below `iop_gain_threshold` or the accumulated order hits
/// `max_iop_order`; fine glottis estimation stays at order 3.
pub fn iop_iaif_decompose(
    frame: &Frame,
    cfg: &AnalysisConfig,
) -> Result<SourceFilterDecomposition> {
    cfg.validate()?;
    let nv = cfg.vt_order_for(frame.sample_rate());
    check_frame(frame, nv)?;
    let x = centered(frame);
    let window = frame.window().values(frame.len());

    let pre = iop_preemphasis(&x, &window, cfg)?;
    let pre_residual = apply_fir(&x, pre.polynomial());
    finish_decomposition(&x, &window, &pre_residual, 3, nv, cfg.lip_d, Method::IopIaif)
}

/// The accumulated IOP pre-emphasis filter; exposed so its order can be
/// inspected.
pub fn iop_preemphasis(x: &[f64], window: &[f64], cfg: &AnalysisConfig) -> Result<LpcModel> {
    let mut residual = x.to_vec();
    let mut accumulated = PolynomialFilter::identity(FilterRole::AllPole);
    let mut gain = 1.0;
    while accumulated.order() < cfg.max_iop_order {
        let stage = lpc_analyze(&residual, window, 1)?;
        if stage.coefficients()[1].abs() < cfg.iop_gain_threshold {
            gain = stage.gain();
            break;
        }
        accumulated = accumulated.multiply(stage.polynomial());
        residual = apply_fir(&residual, stage.polynomial());
        gain = stage.gain();
    }
    LpcModel::new(accumulated, gain)
}

pub fn decompose_frame(
    frame: &Frame,
    method: Method,
    cfg: &AnalysisConfig,
) -> Result<SourceFilterDecomposition> {
    match method {
        Method::Iaif => iaif_decompose(frame, cfg),
        Method::GfmIaif => gfm_iaif_decompose(frame, cfg),
        Method::IopIaif => iop_iaif_decompose(frame, cfg),
    }
}

/// One voiced frame's decomposition inside an utterance.
#[derive(Debug, Clone)]
pub struct FrameDecomposition {
    pub start_index: usize,
    pub decomposition: SourceFilterDecomposition,
}

/// Frame-wise decomposition of a whole utterance.
#[derive(Debug, Clone)]
pub struct UtteranceDecomposition {
    pub frames: Vec<FrameDecomposition>,
    /// Glottal flow derivative assembled from hop-length segments of the
    /// voiced frames (segment taken from the frame interior, past the FIR
    /// startup transient).
    pub derivative: Vec<f64>,
    pub sample_rate: u32,
    pub method: Method,
    /// Total frames the utterance was cut into, voiced or not.
    pub n_frames: usize,
}

impl UtteranceDecomposition {
    pub fn n_voiced(&self) -> usize {
        self.frames.len()
    }
}

/// Runs one method over every voiced frame of a buffer.
///
/// Frames pass a voicing gate (RMS within 20 dB of the loudest frame plus
/// a normalized autocorrelation peak above 0.3). The whole-utterance
/// derivative is assembled by inverse-filtering each raw frame with its
/// fine vocal tract and concatenating one hop-length segment per frame.
pub fn decompose_utterance(
    buf: &AudioBuffer,
    method: Method,
    cfg: &AnalysisConfig,
) -> Result<UtteranceDecomposition> {
    cfg.validate()?;
    let fs = buf.sample_rate();
    let frame_len = cfg.frame_len_samples(fs);
    let hop = cfg.hop_samples(fs).max(1);
    let frames = frame_signal(buf, frame_len, hop, Window::Hann)?;
    let peak_rms = voicing::peak_frame_rms(&frames);
    // Segment offset inside each frame: centered for the default 50% hop,
    // clear of the inverse filter's startup transient.
    let lead = (frame_len - hop) / 2;

    let mut out_frames = Vec::new();
    let mut derivative = Vec::new();
    for frame in &frames {
        if !voicing::is_voiced(frame, peak_rms, fs, cfg.f0_min_hz, cfg.f0_max_hz) {
            continue;
        }
        let decomp = decompose_frame(frame, method, cfg)?;
        let seg = &decomp.glottal_flow_derivative()[lead..(lead + hop).min(frame_len)];
        derivative.extend_from_slice(seg);
        out_frames.push(FrameDecomposition {
            start_index: frame.start_index(),
            decomposition: decomp,
        });
    }
    if out_frames.is_empty() {
        return Err(Error::NoVoicedFrames);
    }
    Ok(UtteranceDecomposition {
        frames: out_frames,
        derivative,
        sample_rate: fs,
        method,
        n_frames: frames.len(),
    })
}
