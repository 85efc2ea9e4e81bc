//! Audio containers, framing, and the elementary filtering primitives that
//! every pipeline stage is built from: FIR inverse filters, all-pole
//! synthesis filters, and the leaky integrator that undoes lip radiation.
//!
//! All filters run with zero initial state and return a signal of the same
//! length as the input, so a FIR filter and the all-pole filter built from
//! the same polynomial are exact mutual inverses.

mod wav;

pub use wav::{load_wav, write_wav};

use crate::error::{Error, Result};

/// Mono sampled signal plus its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    /// Wraps samples and a rate, rejecting empty or non-finite input.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParam("sample_rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        if let Some(idx) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSample(idx));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Analysis window shape applied when a frame is cut from a buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hann,
    Hamming,
}

impl Window {
    /// Window values for a frame of `len` samples (symmetric definition).
    pub fn values(&self, len: usize) -> Vec<f64> {
        if len == 0 {
            return Vec::new();
        }
        if len == 1 {
            return vec![1.0];
        }
        let denom = (len - 1) as f64;
        (0..len)
            .map(|i| {
                let phase = 2.0 * std::f64::consts::PI * i as f64 / denom;
                match self {
                    Window::Rectangular => 1.0,
                    Window::Hann => 0.5 - 0.5 * phase.cos(),
                    Window::Hamming => 0.54 - 0.46 * phase.cos(),
                }
            })
            .collect()
    }
}

/// Windowed excerpt of a buffer.
///
/// `samples` carries the windowed data used for spectral estimation, while
/// `raw` keeps the untouched excerpt: LPC runs on the windowed view, inverse
/// filtering on the raw one. The parent buffer's sample rate rides along.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    samples: Vec<f64>,
    raw: Vec<f64>,
    start_index: usize,
    window: Window,
    sample_rate: u32,
}

impl Frame {
    /// Cuts one frame out of a sample slice, applying `window`.
    pub fn from_slice(raw: &[f64], start_index: usize, window: Window, sample_rate: u32) -> Self {
        let w = window.values(raw.len());
        let samples = raw.iter().zip(&w).map(|(x, w)| x * w).collect();
        Self {
            samples,
            raw: raw.to_vec(),
            start_index,
            window,
            sample_rate,
        }
    }

    /// Windowed samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Unwindowed samples.
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Which side of the source-filter model a polynomial acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterRole {
    /// FIR numerator: deconvolves the matching all-pole filter.
    InverseFir,
    /// Denominator of a resonant all-pole synthesis filter.
    AllPole,
}

/// Monic polynomial `1 + c1 z^-1 + ... + cN z^-N` shared by inverse (FIR)
/// and synthesis (all-pole) filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFilter {
    coefficients: Vec<f64>,
    role: FilterRole,
}

impl PolynomialFilter {
    pub fn new(coefficients: Vec<f64>, role: FilterRole) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParam("empty polynomial".into()));
        }
        if (coefficients[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "leading coefficient must be 1, got {}",
                coefficients[0]
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParam("non-finite coefficient".into()));
        }
        Ok(Self { coefficients, role })
    }

    pub fn inverse_fir(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(coefficients, FilterRole::InverseFir)
    }

    pub fn all_pole(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(coefficients, FilterRole::AllPole)
    }

    /// The identity polynomial `[1]`.
    pub fn identity(role: FilterRole) -> Self {
        Self {
            coefficients: vec![1.0],
            role,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn role(&self) -> FilterRole {
        self.role
    }

    /// Polynomial order (degree).
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficient-sequence convolution: the polynomial product, keeping
    /// the role of `self`. Used to accumulate cascaded pre-emphasis stages.
    pub fn multiply(&self, other: &PolynomialFilter) -> PolynomialFilter {
        let mut out = vec![0.0; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out[0] = 1.0;
        PolynomialFilter {
            coefficients: out,
            role: self.role,
        }
    }

    /// Schur-Cohn stability test: steps the polynomial down through its
    /// reflection coefficients; all poles are strictly inside the unit
    /// circle iff every reflection coefficient has magnitude below 1.
    pub fn is_stable(&self) -> bool {
        let mut a = self.coefficients.clone();
        let mut order = a.len() - 1;
        while order > 0 {
            let k = a[order];
            if !k.is_finite() || k.abs() >= 1.0 {
                return false;
            }
            let denom = 1.0 - k * k;
            if denom <= f64::MIN_POSITIVE {
                return false;
            }
            let prev = a.clone();
            for i in 1..order {
                a[i] = (prev[i] - k * prev[order - i]) / denom;
            }
            order -= 1;
        }
        true
    }
}

/// Cuts a buffer into windowed frames of `frame_len` samples every `hop`
/// samples. The last partial frame is dropped.
pub fn frame_signal(
    buf: &AudioBuffer,
    frame_len: usize,
    hop: usize,
    window: Window,
) -> Result<Vec<Frame>> {
    if frame_len == 0 || hop == 0 {
        return Err(Error::InvalidParam(
            "frame_len and hop must be positive".into(),
        ));
    }
    if hop > frame_len {
        return Err(Error::InvalidParam(format!(
            "hop {hop} exceeds frame length {frame_len}"
        )));
    }
    if frame_len > buf.len() {
        return Err(Error::FrameTooLong {
            frame_len,
            signal_len: buf.len(),
        });
    }
    let samples = buf.samples();
    let mut frames = Vec::new();
    let mut start = 0;
    while start + frame_len <= samples.len() {
        frames.push(Frame::from_slice(
            &samples[start..start + frame_len],
            start,
            window,
            buf.sample_rate(),
        ));
        start += hop;
    }
    Ok(frames)
}

/// FIR filtering with zero initial state:
/// `y[n] = sum_k c[k] * x[n-k]`, output length equals input length.
pub fn apply_fir(x: &[f64], filter: &PolynomialFilter) -> Vec<f64> {
    let c = filter.coefficients();
    let mut y = vec![0.0; x.len()];
    for n in 0..x.len() {
        let mut acc = 0.0;
        for (k, ck) in c.iter().enumerate().take(n + 1) {
            acc += ck * x[n - k];
        }
        y[n] = acc;
    }
    y
}

/// All-pole filtering with zero initial state:
/// `y[n] = gain * x[n] - sum_{k>=1} c[k] * y[n-k]`.
///
/// With `gain = 1` this is the exact inverse of [`apply_fir`] using the
/// same polynomial. Unstable polynomials are rejected.
pub fn apply_allpole(x: &[f64], filter: &PolynomialFilter, gain: f64) -> Result<Vec<f64>> {
    if !filter.is_stable() {
        return Err(Error::UnstableFilter(format!(
            "order-{} polynomial has poles on or outside the unit circle",
            filter.order()
        )));
    }
    let c = filter.coefficients();
    let mut y = vec![0.0; x.len()];
    for n in 0..x.len() {
        let mut acc = gain * x[n];
        for k in 1..c.len().min(n + 1) {
            acc -= c[k] * y[n - k];
        }
        y[n] = acc;
    }
    Ok(y)
}

/// Leaky integrator `y[n] = x[n] + d * y[n-1]`: inverts the lip-radiation
/// derivative filter `1 - d z^-1`.
pub fn integrate(x: &[f64], d: f64) -> Result<Vec<f64>> {
    if !(0.0 < d && d < 1.0) {
        return Err(Error::InvalidParam(format!(
            "integrator coefficient must be in (0, 1), got {d}"
        )));
    }
    let mut y = vec![0.0; x.len()];
    let mut prev = 0.0;
    for (out, &xi) in y.iter_mut().zip(x) {
        prev = xi + d * prev;
        *out = prev;
    }
    Ok(y)
}

/// Root-mean-square amplitude.
pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}
