//! Source-filter decomposition of speech signals.
//!
//! The crate separates voiced speech into a glottal source, a vocal-tract
//! filter, and a lip-radiation term, using three variants of iterative
//! adaptive inverse filtering:
//!
//! - **IAIF** — the classic alternation of gross/fine LPC estimates with a
//!   first-order glottal pre-emphasis.
//! - **GFM-IAIF** — pre-emphasis built from three successive first-order
//!   LPC iterations on the lip-compensated signal, so the glottis is a
//!   constrained third-order filter (conjugate pole pair plus a real pole).
//! - **IOP-IAIF** — unconstrained iterative pre-emphasis that keeps adding
//!   first-order stages until the signal is spectrally flat.
//!
//! On top of the decompositions sit glottal parameter extraction
//! (`Fg`/`Bg`/`Fst` from the third-order glottis poles), voice-quality
//! spectral features (H1-H2, HRF, spectral tilt), a synthetic-vowel
//! generator with exactly known ground truth, and a corpus harness that
//! scores class separation with Wilcoxon rank-sum statistics.
//!
//! Modules map onto the processing chain:
//!
//! - [`signal`] — audio containers, WAV I/O, framing, elementary filters.
//! - [`lpc`] — autocorrelation LPC, stabilization, cubic roots, spectra.
//! - [`gif`] — the three inverse-filtering pipelines.
//! - [`features`] — glottal parameters and harmonic spectral features.
//! - [`synth`] — synthetic vowels and effort corpora with ground truth.
//! - [`eval`] — manifest-driven batch runs and rank-sum reports.

pub mod error;
pub mod eval;
pub mod features;
pub mod gif;
pub mod lpc;
pub mod signal;
pub mod synth;

mod voicing;

pub use error::{Error, Result};
pub use eval::{CorpusManifest, RankSumResult, StimulusRecord};
pub use features::{GlottalParams, HarmonicSeries, SpectralFeatures};
pub use gif::{AnalysisConfig, Method, SourceFilterDecomposition};
pub use lpc::{LpcModel, PoleSet};
pub use signal::{AudioBuffer, Frame, PolynomialFilter, Window};
pub use synth::SynthSpec;
