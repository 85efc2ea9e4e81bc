//! Synthetic vowels with exactly known decompositions.
//!
//! The generator runs the forward source-filter chain — impulse train,
//! third-order glottis, all-pole vocal tract, lip-radiation derivative —
//! so every synthetic stimulus comes with its true filters and source
//! signals. [`make_effort_corpus`] turns that into labeled soft/medium/
//! loud corpora for the evaluation harness.

use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::eval::{CorpusManifest, Effort, StimulusRecord};
use crate::features::GlottalParams;
use crate::gif::Method;
use crate::lpc::LpcModel;
use crate::signal::{apply_allpole, apply_fir, rms, write_wav, AudioBuffer, PolynomialFilter};

/// Recipe for one synthetic vowel.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub f0_hz: f64,
    /// Ground-truth glottal parameters.
    pub params: GlottalParams,
    /// Vocal-tract resonances as (frequency, bandwidth) pairs, Hz.
    pub vt_formants: Vec<(f64, f64)>,
    pub lip_d: f64,
    pub duration_s: f64,
    pub sample_rate: u32,
    /// Additive white-noise level in dB relative to signal RMS;
    /// `None` disables the noise floor entirely.
    pub noise_floor_db: Option<f64>,
    /// Seed for pulse-onset randomization and the noise floor.
    pub seed: u64,
}

impl SynthSpec {
    /// A sustained /a/-like vowel at the given pitch and glottal settings.
    pub fn vowel_a(f0_hz: f64, params: GlottalParams, sample_rate: u32) -> Self {
        Self {
            f0_hz,
            params,
            vt_formants: vec![(700.0, 80.0), (1220.0, 90.0), (2600.0, 120.0), (3300.0, 150.0)],
            lip_d: 0.99,
            duration_s: 0.5,
            sample_rate,
            noise_floor_db: Some(-60.0),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        if !(self.f0_hz > 0.0 && self.f0_hz < nyquist) {
            return Err(Error::InvalidParam(format!("f0 {} Hz out of range", self.f0_hz)));
        }
        self.params.validate(self.sample_rate)?;
        if self.vt_formants.is_empty() {
            return Err(Error::InvalidParam("need at least one vocal-tract formant".into()));
        }
        for &(f, b) in &self.vt_formants {
            if !(f > 0.0 && f < nyquist) || !(b > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "formant ({f} Hz, {b} Hz) out of range"
                )));
            }
        }
        if !(0.0 < self.lip_d && self.lip_d < 1.0) {
            return Err(Error::InvalidParam("lip_d must be in (0, 1)".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidParam("duration must be positive".into()));
        }
        Ok(())
    }
}

/// The inverse of the pole-to-parameter mapping: builds the third-order
/// glottis filter with conjugate pair `exp(-pi Bg/fs) exp(+-j 2pi Fg/fs)`
/// and real pole `exp(-2pi Fst/fs)`.
pub fn glottis_from_params(params: &GlottalParams, sample_rate: u32) -> Result<LpcModel> {
    params.validate(sample_rate)?;
    let fs = sample_rate as f64;
    let radius = (-std::f64::consts::PI * params.bg_hz / fs).exp();
    let theta = 2.0 * std::f64::consts::PI * params.fg_hz / fs;
    let b = (-2.0 * std::f64::consts::PI * params.fst_hz / fs).exp();

    let two_re = 2.0 * radius * theta.cos();
    let coeffs = vec![
        1.0,
        -(two_re + b),
        radius * radius + two_re * b,
        -radius * radius * b,
    ];
    LpcModel::new(PolynomialFilter::all_pole(coeffs)?, 1.0)
}

/// All-pole vocal tract from resonance (frequency, bandwidth) pairs via
/// the same matched-z mapping, one conjugate pole pair per formant.
pub fn vocal_tract_from_formants(
    formants: &[(f64, f64)],
    sample_rate: u32,
) -> Result<LpcModel> {
    if formants.is_empty() {
        return Err(Error::InvalidParam("empty formant list".into()));
    }
    let fs = sample_rate as f64;
    let mut poly = PolynomialFilter::identity(crate::signal::FilterRole::AllPole);
    for &(f, bw) in formants {
        let radius = (-std::f64::consts::PI * bw / fs).exp();
        let theta = 2.0 * std::f64::consts::PI * f / fs;
        let quad = PolynomialFilter::all_pole(vec![
            1.0,
            -2.0 * radius * theta.cos(),
            radius * radius,
        ])?;
        poly = poly.multiply(&quad);
    }
    LpcModel::new(poly, 1.0)
}

/// Exact description of a synthesized stimulus: the true filters and the
/// intermediate source signals, trimmed and scaled exactly like the audio.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub glottis: LpcModel,
    pub vocal_tract: LpcModel,
    pub lip_d: f64,
    pub params: GlottalParams,
    /// Realized fundamental after rounding the period to whole samples.
    pub f0_hz: f64,
    pub excitation: Vec<f64>,
    pub glottal_flow: Vec<f64>,
    pub glottal_flow_derivative: Vec<f64>,
}

/// A synthetic vowel plus its ground truth.
#[derive(Debug, Clone)]
pub struct SynthesisOutput {
    pub audio: AudioBuffer,
    pub truth: GroundTruth,
}

/// Untrimmed, noiseless forward chain, all signals aligned at zero state.
/// Inverse filtering `speech` with the true filters reproduces
/// `excitation` to machine precision.
#[derive(Debug, Clone)]
pub struct CleanChain {
    pub excitation: Vec<f64>,
    pub glottal_flow: Vec<f64>,
    pub glottal_flow_derivative: Vec<f64>,
    pub speech: Vec<f64>,
    pub glottis: LpcModel,
    pub vocal_tract: LpcModel,
    pub period_samples: usize,
}

/// Runs the forward chain for `n_samples` samples with the pulse train
/// starting at `onset`.
pub fn render_chain(spec: &SynthSpec, n_samples: usize, onset: usize) -> Result<CleanChain> {
    spec.validate()?;
    let fs = spec.sample_rate as f64;
    let period = (fs / spec.f0_hz).round().max(2.0) as usize;

    let mut excitation = vec![0.0; n_samples];
    let mut i = onset % period;
    while i < n_samples {
        excitation[i] = 1.0;
        i += period;
    }

    let glottis = glottis_from_params(&spec.params, spec.sample_rate)?;
    let vocal_tract = vocal_tract_from_formants(&spec.vt_formants, spec.sample_rate)?;
    let lip = PolynomialFilter::inverse_fir(vec![1.0, -spec.lip_d])?;

    let glottal_flow = apply_allpole(&excitation, glottis.polynomial(), 1.0)?;
    let glottal_flow_derivative = apply_fir(&glottal_flow, &lip);
    let through_tract = apply_allpole(&glottal_flow, vocal_tract.polynomial(), 1.0)?;
    let speech = apply_fir(&through_tract, &lip);

    Ok(CleanChain {
        excitation,
        glottal_flow,
        glottal_flow_derivative,
        speech,
        glottis,
        vocal_tract,
        period_samples: period,
    })
}

/// Samples trimmed from the start of every stimulus to drop the filter
/// onset transient.
const TRIM_S: f64 = 0.05;

/// Synthesizes one vowel: impulse train through glottis, vocal tract, and
/// lip derivative, plus an optional white-noise floor. The first 50 ms are
/// trimmed and the output is peak-normalized to 0.9; the returned ground
/// truth carries the identically trimmed and scaled source signals.
pub fn synthesize(spec: &SynthSpec) -> Result<SynthesisOutput> {
    spec.validate()?;
    let fs = spec.sample_rate as f64;
    let trim = (TRIM_S * fs).round() as usize;
    let n_samples = trim + (spec.duration_s * fs).ceil() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let period = (fs / spec.f0_hz).round().max(2.0) as usize;
    let onset = rng.gen_range(0..period);

    let chain = render_chain(spec, n_samples, onset)?;

    let mut speech = chain.speech.clone();
    if let Some(db) = spec.noise_floor_db {
        let sigma = rms(&speech) * 10f64.powf(db / 20.0);
        for s in speech.iter_mut() {
            *s += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }

    let peak = speech.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let scale = if peak > 0.0 { 0.9 / peak } else { 1.0 };

    let trim_scale = |x: &[f64]| -> Vec<f64> { x[trim..].iter().map(|v| v * scale).collect() };
    let audio = AudioBuffer::new(trim_scale(&speech), spec.sample_rate)?;
    let truth = GroundTruth {
        glottis: chain.glottis,
        vocal_tract: chain.vocal_tract,
        lip_d: spec.lip_d,
        params: spec.params,
        f0_hz: fs / chain.period_samples as f64,
        excitation: trim_scale(&chain.excitation),
        glottal_flow: trim_scale(&chain.glottal_flow),
        glottal_flow_derivative: trim_scale(&chain.glottal_flow_derivative),
    };
    Ok(SynthesisOutput { audio, truth })
}

/// Ground-truth glottal settings for one effort class.
#[derive(Debug, Clone, PartialEq)]
pub struct EffortClassSpec {
    pub effort: Effort,
    pub params: GlottalParams,
}

/// Soft/medium/loud settings that realize the expected trend: louder
/// voices get a higher, wider glottal formant and a higher tilt cutoff.
pub fn default_effort_classes() -> Vec<EffortClassSpec> {
    vec![
        EffortClassSpec {
            effort: Effort::Soft,
            params: GlottalParams::new(120.0, 60.0, 500.0),
        },
        EffortClassSpec {
            effort: Effort::Medium,
            params: GlottalParams::new(160.0, 110.0, 1200.0),
        },
        EffortClassSpec {
            effort: Effort::Loud,
            params: GlottalParams::new(200.0, 160.0, 2500.0),
        },
    ]
}

/// Options for corpus generation.
#[derive(Debug, Clone)]
pub struct CorpusOptions {
    /// Template stimulus; per-class parameters and per-stimulus seeds
    /// replace its `params`/`seed` fields.
    pub base: SynthSpec,
    /// Exactly three classes, ordered soft, medium, loud.
    pub classes: Vec<EffortClassSpec>,
    pub n_per_class: usize,
    /// Relative standard deviation of the Gaussian parameter jitter.
    pub jitter_rel_std: f64,
    pub seed: u64,
    pub vowel: String,
    pub speaker: String,
}

impl CorpusOptions {
    pub fn new(base: SynthSpec, n_per_class: usize, seed: u64) -> Self {
        Self {
            base,
            classes: default_effort_classes(),
            n_per_class,
            jitter_rel_std: 0.05,
            seed,
            vowel: "a".into(),
            speaker: "synth".into(),
        }
    }
}

fn fnv1a64(parts: &[u64]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for byte in part.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x1000_0000_01b3);
        }
    }
    hash
}

/// Generates `n_per_class` stimuli per effort class, writes the WAV files
/// and a `manifest.csv` with ground-truth columns into `out_dir`, and
/// returns the manifest. Per-stimulus parameters are jittered with a
/// seeded Gaussian; identical options produce byte-identical corpora.
pub fn make_effort_corpus(
    opts: &CorpusOptions,
    out_dir: impl AsRef<Path>,
    manifest_comments: &[String],
) -> Result<CorpusManifest> {
    let out_dir = out_dir.as_ref();
    if opts.classes.len() != 3
        || opts.classes[0].effort != Effort::Soft
        || opts.classes[1].effort != Effort::Medium
        || opts.classes[2].effort != Effort::Loud
    {
        return Err(Error::InvalidParam(
            "corpus needs exactly three classes ordered soft, medium, loud".into(),
        ));
    }
    if opts.n_per_class == 0 {
        return Err(Error::InvalidParam("n_per_class must be positive".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;

    let nyquist = opts.base.sample_rate as f64 / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut records = Vec::with_capacity(3 * opts.n_per_class);

    for (class_idx, class) in opts.classes.iter().enumerate() {
        for idx in 0..opts.n_per_class {
            let mut jitter = |v: f64, lo: f64, hi: f64| -> f64 {
                let noise: f64 = rng.sample(StandardNormal);
                (v * (1.0 + opts.jitter_rel_std * noise)).clamp(lo, hi)
            };
            let params = GlottalParams::new(
                jitter(class.params.fg_hz, 20.0, nyquist * 0.45),
                jitter(class.params.bg_hz, 5.0, 2000.0),
                jitter(class.params.fst_hz, 50.0, nyquist * 0.98),
            );
            let f0 = jitter(opts.base.f0_hz, 50.0, 1000.0);

            // Stimulus seed from the jittered parameters: with zero jitter
            // every stimulus in a class is byte-identical.
            let stimulus_seed = fnv1a64(&[
                opts.seed,
                class_idx as u64,
                params.fg_hz.to_bits(),
                params.bg_hz.to_bits(),
                params.fst_hz.to_bits(),
                f0.to_bits(),
            ]);

            let spec = SynthSpec {
                f0_hz: f0,
                params,
                seed: stimulus_seed,
                ..opts.base.clone()
            };
            let out = synthesize(&spec)?;

            let file_name = format!("{}_{:03}.wav", class.effort, idx);
            let comment = format!(
                "glottkit synth seed={} fg={:.2} bg={:.2} fst={:.2} f0={:.2}",
                stimulus_seed, params.fg_hz, params.bg_hz, params.fst_hz, f0
            );
            write_wav(
                out_dir.join(&file_name),
                out.audio.samples(),
                spec.sample_rate,
                Some(&comment),
            )?;

            records.push(StimulusRecord {
                path: file_name.into(),
                vowel: opts.vowel.clone(),
                effort: class.effort,
                speaker: opts.speaker.clone(),
                ground_truth: Some(params),
            });
        }
    }

    let manifest = CorpusManifest::from_records(records, out_dir)?;
    let mut comments = vec![
        format!("glottkit {} synthetic effort corpus", env!("CARGO_PKG_VERSION")),
        format!(
            "seed={} n_per_class={} jitter_rel_std={}",
            opts.seed, opts.n_per_class, opts.jitter_rel_std
        ),
    ];
    comments.extend_from_slice(manifest_comments);
    manifest.save(out_dir.join("manifest.csv"), &comments)?;
    Ok(manifest)
}

/// Placeholder use of the method enum so synthetic ground truth can be
/// compared per method downstream.
pub fn supported_methods() -> &'static [Method; 3] {
    &Method::ALL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::glottal_params_from_poles;
    use approx::assert_relative_eq;

    fn base_spec() -> SynthSpec {
        SynthSpec::vowel_a(150.0, GlottalParams::new(160.0, 110.0, 1200.0), 22050)
    }

    #[test]
    fn params_pole_round_trip_is_identity() {
        let params = GlottalParams::new(137.0, 83.5, 911.0);
        let model = glottis_from_params(&params, 22050).unwrap();
        let back = glottal_params_from_poles(&model, 22050).unwrap();
        assert_relative_eq!(back.fg_hz, params.fg_hz, max_relative = 1e-9);
        assert_relative_eq!(back.bg_hz, params.bg_hz, max_relative = 1e-9);
        assert_relative_eq!(back.fst_hz, params.fst_hz, max_relative = 1e-9);
    }

    #[test]
    fn tilt_pole_at_nyquist_frozen_value() {
        // Fst at Nyquist gives b = exp(-pi) = 0.043214.
        let fs = 22050u32;
        let params = GlottalParams::new(200.0, 100.0, fs as f64 / 2.0);
        let model = glottis_from_params(&params, fs).unwrap();
        let poles = crate::lpc::cubic_roots(model.polynomial()).unwrap();
        let real = poles
            .poles()
            .iter()
            .find(|p| p.im.abs() < 1e-9)
            .expect("real pole");
        assert_relative_eq!(real.re, 0.043214, epsilon = 1e-5);
    }

    #[test]
    fn zero_bandwidth_limit_pushes_radius_to_one() {
        let fs = 22050.0;
        for bg in [100.0, 10.0, 1.0, 0.01] {
            let r = (-std::f64::consts::PI * bg / fs).exp();
            assert!(r < 1.0);
            if bg <= 0.01 {
                assert!(r > 0.999_99);
            }
        }
    }

    #[test]
    fn impulse_period_rounding() {
        let spec = SynthSpec {
            f0_hz: 220.5,
            ..base_spec()
        };
        let chain = render_chain(&spec, 1000, 0).unwrap();
        assert_eq!(chain.period_samples, 100);
        assert_eq!(chain.excitation[0], 1.0);
        assert_eq!(chain.excitation[100], 1.0);
        assert!(chain.excitation[1..100].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn clean_chain_is_exactly_invertible() {
        let spec = base_spec();
        let chain = render_chain(&spec, 11025, 37).unwrap();
        let lip_removed = crate::signal::integrate(&chain.speech, spec.lip_d).unwrap();
        let vt_removed = apply_fir(&lip_removed, chain.vocal_tract.polynomial());
        let recovered = apply_fir(&vt_removed, chain.glottis.polynomial());
        let err: Vec<f64> = recovered
            .iter()
            .zip(&chain.excitation)
            .skip(chain.period_samples)
            .map(|(a, b)| a - b)
            .collect();
        assert!(rms(&err) < 1e-6, "excitation recovery rms {}", rms(&err));
    }

    #[test]
    fn disabled_noise_floor_keeps_integrate_identity() {
        // With the noise floor off, integrating the lip derivative away
        // recovers the non-derivative chain output exactly.
        let spec = SynthSpec {
            noise_floor_db: None,
            ..base_spec()
        };
        let chain = render_chain(&spec, 8000, 21).unwrap();
        let integrated = crate::signal::integrate(&chain.speech, spec.lip_d).unwrap();
        let non_derivative =
            apply_allpole(&chain.glottal_flow, chain.vocal_tract.polynomial(), 1.0).unwrap();
        for (a, b) in integrated.iter().zip(&non_derivative) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let spec = SynthSpec {
            seed: 99,
            ..base_spec()
        };
        let a = synthesize(&spec).unwrap();
        let b = synthesize(&spec).unwrap();
        assert_eq!(a.audio.samples(), b.audio.samples());
    }

    #[test]
    fn corpus_counts_and_jitter_zero_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let opts = CorpusOptions {
            jitter_rel_std: 0.0,
            n_per_class: 3,
            ..CorpusOptions::new(base_spec(), 3, 5)
        };
        let manifest = make_effort_corpus(&opts, dir.path(), &[]).unwrap();
        assert_eq!(manifest.len(), 9);

        // With zero jitter, all stimuli in a class share parameters and are
        // byte-identical files.
        let soft: Vec<&StimulusRecord> = manifest
            .records()
            .iter()
            .filter(|r| r.effort == Effort::Soft)
            .collect();
        let t0 = soft[0].ground_truth.unwrap();
        for r in &soft {
            let t = r.ground_truth.unwrap();
            assert_eq!(t.fg_hz, t0.fg_hz);
            assert_eq!(t.fst_hz, t0.fst_hz);
        }
        let bytes0 = std::fs::read(dir.path().join("soft_000.wav")).unwrap();
        let bytes1 = std::fs::read(dir.path().join("soft_001.wav")).unwrap();
        assert_eq!(bytes0, bytes1);
    }

    #[test]
    fn corpus_ground_truth_trend_by_construction() {
        let dir = tempfile::tempdir().unwrap();
        let opts = CorpusOptions::new(base_spec(), 6, 11);
        let manifest = make_effort_corpus(&opts, dir.path(), &[]).unwrap();
        let median_fst = |effort: Effort| -> f64 {
            let mut v: Vec<f64> = manifest
                .records()
                .iter()
                .filter(|r| r.effort == effort)
                .map(|r| r.ground_truth.unwrap().fst_hz)
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            crate::features::median_of_sorted(&v)
        };
        assert!(median_fst(Effort::Soft) < median_fst(Effort::Medium));
        assert!(median_fst(Effort::Medium) < median_fst(Effort::Loud));
    }

    #[test]
    fn identical_seed_reproduces_corpus_bytes() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let opts = CorpusOptions::new(base_spec(), 2, 42);
        make_effort_corpus(&opts, dir_a.path(), &[]).unwrap();
        make_effort_corpus(&opts, dir_b.path(), &[]).unwrap();
        for name in ["soft_000.wav", "medium_001.wav", "loud_000.wav", "manifest.csv"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }
}
