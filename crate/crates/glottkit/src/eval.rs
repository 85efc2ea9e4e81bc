//! Corpus-scale evaluation: manifest-driven batch decomposition, feature
//! distributions per vocal-effort class, Wilcoxon rank-sum significance,
//! and normalized rank-sum discrimination scores.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::features::{
    self, estimate_f0, glottal_params_from_poles, median_of_sorted, GlottalParams,
    SpectralFeatures,
};
use crate::gif::{decompose_utterance, AnalysisConfig, Method, UtteranceDecomposition};
use crate::signal::{load_wav, AudioBuffer};

/// Significance level used throughout the reports.
pub const P_SIGNIFICANT: f64 = 1e-3;

/// Vocal effort class labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Effort {
    #[serde(rename = "soft")]
    Soft,
    #[serde(rename = "medium")]
    Medium,
    #[serde(rename = "loud")]
    Loud,
}

impl Effort {
    pub const ALL: [Effort; 3] = [Effort::Soft, Effort::Medium, Effort::Loud];

    pub fn name(&self) -> &'static str {
        match self {
            Effort::Soft => "soft",
            Effort::Medium => "medium",
            Effort::Loud => "loud",
        }
    }
}

impl std::fmt::Display for Effort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Effort {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "soft" => Ok(Effort::Soft),
            "medium" => Ok(Effort::Medium),
            "loud" => Ok(Effort::Loud),
            other => Err(Error::Manifest(format!("unknown effort class '{other}'"))),
        }
    }
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusRecord {
    pub path: PathBuf,
    pub vowel: String,
    pub effort: Effort,
    pub speaker: String,
    pub ground_truth: Option<GlottalParams>,
}

/// A labeled stimulus list, parsed from or written to CSV
/// (`path,vowel,effort,speaker[,fg_true,bg_true,fst_true]`, `#` comments).
#[derive(Debug, Clone)]
pub struct CorpusManifest {
    records: Vec<StimulusRecord>,
    base_dir: PathBuf,
}

impl CorpusManifest {
    pub fn from_records(records: Vec<StimulusRecord>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let manifest = Self {
            records,
            base_dir: base_dir.into(),
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn records(&self) -> &[StimulusRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Resolves a record path against the manifest location.
    pub fn resolve(&self, record: &StimulusRecord) -> PathBuf {
        if record.path.is_absolute() {
            record.path.clone()
        } else {
            self.base_dir.join(&record.path)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::Manifest("manifest has no rows".into()));
        }
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(&r.path) {
                return Err(Error::Manifest(format!(
                    "duplicate path {}",
                    r.path.display()
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(file);
        let headers = reader
            .headers()
            .map_err(|e| Error::Manifest(format!("bad header: {e}")))?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (path_col, vowel_col, effort_col, speaker_col) = match (
            col("path"),
            col("vowel"),
            col("effort"),
            col("speaker"),
        ) {
            (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
            _ => {
                return Err(Error::Manifest(
                    "manifest needs columns path,vowel,effort,speaker".into(),
                ))
            }
        };
        let truth_cols = match (col("fg_true"), col("bg_true"), col("fst_true")) {
            (Some(a), Some(b), Some(c)) => Some((a, b, c)),
            _ => None,
        };

        let mut records = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::Manifest(format!("row {}: {e}", i + 2)))?;
            let field = |idx: usize| row.get(idx).unwrap_or("").to_string();
            let ground_truth = match truth_cols {
                Some((a, b, c)) => {
                    let parse = |idx: usize| field(idx).parse::<f64>().ok();
                    match (parse(a), parse(b), parse(c)) {
                        (Some(fg), Some(bg), Some(fst)) => Some(GlottalParams::new(fg, bg, fst)),
                        _ => None,
                    }
                }
                None => None,
            };
            records.push(StimulusRecord {
                path: PathBuf::from(field(path_col)),
                vowel: field(vowel_col),
                effort: field(effort_col).parse()?,
                speaker: field(speaker_col),
                ground_truth,
            });
        }
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_records(records, base_dir)
    }

    /// Writes the manifest as CSV, preceded by `#`-prefixed comment lines.
    pub fn save(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for line in comments {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        let with_truth = self.records.iter().any(|r| r.ground_truth.is_some());
        out.push_str("path,vowel,effort,speaker");
        if with_truth {
            out.push_str(",fg_true,bg_true,fst_true");
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}",
                r.path.display(),
                r.vowel,
                r.effort,
                r.speaker
            ));
            if with_truth {
                match &r.ground_truth {
                    Some(t) => {
                        out.push_str(&format!(",{:.6},{:.6},{:.6}", t.fg_hz, t.bg_hz, t.fst_hz))
                    }
                    None => out.push_str(",,,"),
                }
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// Per-stimulus absolute errors against manifest ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamErrors {
    pub fg_abs_hz: f64,
    pub bg_abs_hz: f64,
    pub fst_abs_hz: f64,
    pub fg_rel: f64,
    pub bg_rel: f64,
    pub fst_rel: f64,
}

/// Everything measured on one stimulus with one method.
#[derive(Debug, Clone)]
pub struct StimulusMeasures {
    /// Median glottal parameters over voiced frames.
    pub params: GlottalParams,
    pub features: SpectralFeatures,
    pub n_voiced: usize,
    pub n_frames: usize,
    pub truth_errors: Option<ParamErrors>,
}

/// Full per-utterance analysis: the decomposition plus frame-wise and
/// median parameters and the spectral features. Shared by the batch
/// harness and the CLI.
pub struct UtteranceMeasures {
    pub decomposition: UtteranceDecomposition,
    pub frame_params: Vec<GlottalParams>,
    pub measures: StimulusMeasures,
}

/// Decomposes one buffer with one method and derives every measurable.
pub fn measure_utterance(
    buf: &AudioBuffer,
    method: Method,
    cfg: &AnalysisConfig,
    ground_truth: Option<&GlottalParams>,
) -> Result<UtteranceMeasures> {
    let decomposition = decompose_utterance(buf, method, cfg)?;
    let fs = buf.sample_rate();

    let mut frame_params = Vec::with_capacity(decomposition.frames.len());
    for frame in &decomposition.frames {
        frame_params.push(glottal_params_from_poles(frame.decomposition.glottis(), fs)?);
    }

    let median = |get: fn(&GlottalParams) -> f64| -> f64 {
        let mut v: Vec<f64> = frame_params.iter().map(get).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        median_of_sorted(&v)
    };
    let frac_flagged = |get: fn(&GlottalParams) -> bool| {
        frame_params.iter().filter(|p| get(p)).count() * 2 > frame_params.len()
    };
    let params = GlottalParams {
        fg_hz: median(|p| p.fg_hz),
        bg_hz: median(|p| p.bg_hz),
        fst_hz: median(|p| p.fst_hz),
        formant_degenerate: frac_flagged(|p| p.formant_degenerate),
        tilt_degenerate: frac_flagged(|p| p.tilt_degenerate),
    };

    let f0 = estimate_f0(buf, cfg.f0_min_hz, cfg.f0_max_hz)?
        .median_f0()
        .ok_or(Error::NoVoicedFrames)?;
    let features = features::spectral_features(&decomposition.derivative, f0, fs)?;

    let truth_errors = ground_truth.map(|t| ParamErrors {
        fg_abs_hz: (params.fg_hz - t.fg_hz).abs(),
        bg_abs_hz: (params.bg_hz - t.bg_hz).abs(),
        fst_abs_hz: (params.fst_hz - t.fst_hz).abs(),
        fg_rel: (params.fg_hz - t.fg_hz).abs() / t.fg_hz,
        bg_rel: (params.bg_hz - t.bg_hz).abs() / t.bg_hz,
        fst_rel: (params.fst_hz - t.fst_hz).abs() / t.fst_hz,
    });

    let measures = StimulusMeasures {
        params,
        features,
        n_voiced: decomposition.n_voiced(),
        n_frames: decomposition.n_frames,
        truth_errors,
    };
    Ok(UtteranceMeasures {
        decomposition,
        frame_params,
        measures,
    })
}

/// One row of the result table: a stimulus/method pairing that either
/// produced measures or an error message.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub record: StimulusRecord,
    pub method: Method,
    pub outcome: std::result::Result<StimulusMeasures, String>,
}

/// Batch results for a manifest run.
#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn ok_rows(&self) -> impl Iterator<Item = (&ResultRow, &StimulusMeasures)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|m| (r, m)))
    }

    pub fn failed_count(&self, method: Method) -> usize {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.outcome.is_err())
            .count()
    }
}

/// Runs every manifest stimulus through every requested method.
///
/// Stimuli are processed in parallel; failures are recorded per row
/// without aborting the batch.
pub fn run_corpus(
    manifest: &CorpusManifest,
    methods: &[Method],
    cfg: &AnalysisConfig,
) -> Result<ResultTable> {
    if manifest.is_empty() {
        return Err(Error::Manifest("manifest has no rows".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidParam("no methods requested".into()));
    }
    cfg.validate()?;

    let rows: Vec<ResultRow> = manifest
        .records()
        .par_iter()
        .flat_map_iter(|record| {
            let loaded = load_wav(manifest.resolve(record));
            let rows: Vec<ResultRow> = methods
                .iter()
                .map(|&method| {
                    let outcome = match &loaded {
                        Ok(buf) => {
                            measure_utterance(buf, method, cfg, record.ground_truth.as_ref())
                                .map(|m| m.measures)
                                .map_err(|e| e.to_string())
                        }
                        Err(e) => Err(e.to_string()),
                    };
                    ResultRow {
                        record: record.clone(),
                        method,
                        outcome,
                    }
                })
                .collect();
            rows.into_iter()
        })
        .collect();

    if rows.iter().all(|r| r.outcome.is_err()) {
        return Err(Error::AllRowsFailed(rows.len()));
    }
    Ok(ResultTable { rows })
}

// ---------------------------------------------------------------------------
// Rank statistics
// ---------------------------------------------------------------------------

/// Outcome of a two-sided Wilcoxon rank-sum / Mann-Whitney test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankSumTest {
    /// Mann-Whitney U statistic of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    /// True when the p-value came from exact enumeration rather than the
    /// normal approximation.
    pub exact: bool,
}

fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].partial_cmp(&pooled[b]).unwrap());
    let mut ranks = vec![0.0; pooled.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

fn check_samples(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::UndersizedSample {
            n1: x.len(),
            n2: y.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("non-finite sample value".into()));
    }
    Ok(())
}

fn u_statistic(x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let r1: f64 = ranks[..x.len()].iter().sum();
    let u = r1 - (x.len() * (x.len() + 1)) as f64 / 2.0;
    (u, ranks)
}

/// Two-sided Wilcoxon rank-sum test with midrank tie handling: exact
/// null enumeration when both samples have at most 8 values, otherwise the
/// tie-corrected normal approximation with continuity correction.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<RankSumTest> {
    check_samples(x, y)?;
    let (n1, n2) = (x.len(), y.len());
    let (u, ranks) = u_statistic(x, y);
    let mu = (n1 * n2) as f64 / 2.0;

    if n1 <= 8 && n2 <= 8 {
        let p = exact_two_sided_p(&ranks, n1, u);
        return Ok(RankSumTest {
            statistic: u,
            p_value: p,
            exact: true,
        });
    }

    // Tie-corrected variance.
    let n = (n1 + n2) as f64;
    let mut tie_term = 0.0;
    {
        let mut sorted: Vec<f64> = ranks.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i + 1;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            let t = (j - i) as f64;
            tie_term += t * t * t - t;
            i = j;
        }
    }
    let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(RankSumTest {
            statistic: u,
            p_value: 1.0,
            exact: false,
        });
    }
    let diff = u - mu;
    let cc = 0.5 * diff.signum();
    let z = (diff - cc) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = (2.0 * normal.cdf(-z.abs())).clamp(1e-300, 1.0);
    Ok(RankSumTest {
        statistic: u,
        p_value: p,
        exact: false,
    })
}

/// Exact two-sided p-value by dynamic programming over the conditional
/// null distribution of the rank sum (all equally likely assignments of
/// the pooled midranks to the first sample).
fn exact_two_sided_p(ranks: &[f64], n1: usize, u_observed: f64) -> f64 {
    let n = ranks.len();
    let n2 = n - n1;
    // Midranks are half-integers: doubling them gives exact integers.
    let scaled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = scaled.iter().sum();

    // counts[j][s]: number of j-subsets of the pooled ranks with doubled
    // rank sum s.
    let mut counts = vec![vec![0f64; total + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for &w in &scaled {
        for j in (1..=n1).rev() {
            for s in (w..=total).rev() {
                let add = counts[j - 1][s - w];
                if add > 0.0 {
                    counts[j][s] += add;
                }
            }
        }
    }

    let mu = (n1 * n2) as f64 / 2.0;
    let threshold = (u_observed - mu).abs() - 1e-9;
    let mut extreme = 0.0;
    let mut all = 0.0;
    for (s, &count) in counts[n1].iter().enumerate() {
        if count == 0.0 {
            continue;
        }
        all += count;
        let u = s as f64 / 2.0 - (n1 * (n1 + 1)) as f64 / 2.0;
        if (u - mu).abs() >= threshold {
            extreme += count;
        }
    }
    (extreme / all).clamp(0.0, 1.0)
}

/// Distribution-overlap score in [0, 1]:
/// `2 * min(U, n1*n2 - U) / (n1*n2)`; 0 for disjoint samples, 1 for fully
/// interleaved ones.
pub fn normalized_rank_sum(x: &[f64], y: &[f64]) -> Result<f64> {
    check_samples(x, y)?;
    let (u, _) = u_statistic(x, y);
    let prod = (x.len() * y.len()) as f64;
    Ok(2.0 * u.min(prod - u) / prod)
}

// ---------------------------------------------------------------------------
// Discrimination report
// ---------------------------------------------------------------------------

/// Feature under test in the discrimination table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FeatureKind {
    #[serde(rename = "h1h2")]
    H1H2,
    #[serde(rename = "hrf")]
    Hrf,
    #[serde(rename = "st")]
    St,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::H1H2, FeatureKind::Hrf, FeatureKind::St];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::H1H2 => "h1h2",
            FeatureKind::Hrf => "hrf",
            FeatureKind::St => "st",
        }
    }

    fn extract(&self, m: &StimulusMeasures) -> f64 {
        match self {
            FeatureKind::H1H2 => m.features.h1h2_db,
            FeatureKind::Hrf => m.features.hrf_db,
            FeatureKind::St => m.features.st_db_per_decade,
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantities summarized per class in the distribution table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Fg,
    Bg,
    Fst,
    H1H2,
    Hrf,
    St,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Fg,
        Quantity::Bg,
        Quantity::Fst,
        Quantity::H1H2,
        Quantity::Hrf,
        Quantity::St,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Fg => "fg_hz",
            Quantity::Bg => "bg_hz",
            Quantity::Fst => "fst_hz",
            Quantity::H1H2 => "h1h2_db",
            Quantity::Hrf => "hrf_db",
            Quantity::St => "st_db_per_decade",
        }
    }

    fn extract(&self, m: &StimulusMeasures) -> f64 {
        match self {
            Quantity::Fg => m.params.fg_hz,
            Quantity::Bg => m.params.bg_hz,
            Quantity::Fst => m.params.fst_hz,
            Quantity::H1H2 => m.features.h1h2_db,
            Quantity::Hrf => m.features.hrf_db,
            Quantity::St => m.features.st_db_per_decade,
        }
    }
}

/// One discrimination-table entry: a method/feature/class-pair triple.
#[derive(Debug, Clone, Serialize)]
pub struct RankSumResult {
    pub method: Method,
    pub feature: FeatureKind,
    pub pair: (Effort, Effort),
    pub statistic: f64,
    pub p_value: f64,
    /// Normalized overlap in [0, 1]; lower means better class separation.
    pub normalized: f64,
    pub significant: bool,
    pub exact: bool,
}

/// Quartile summary of one quantity in one class under one method.
#[derive(Debug, Clone, Serialize)]
pub struct ClassSummary {
    pub method: Method,
    pub quantity: Quantity,
    pub effort: Effort,
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Recovery accuracy against manifest ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorStats {
    pub method: Method,
    pub parameter: String,
    pub n: usize,
    pub median_abs_hz: f64,
    pub median_rel: f64,
}

/// The full evaluation report.
#[derive(Debug, Clone, Serialize)]
pub struct DiscriminationReport {
    pub significance_threshold: f64,
    pub rank_sums: Vec<RankSumResult>,
    pub summaries: Vec<ClassSummary>,
    /// Failed row count per method.
    pub exclusions: Vec<(Method, usize)>,
    pub error_stats: Option<Vec<ErrorStats>>,
}

fn quantile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Builds the pairwise rank-sum table plus per-class distribution
/// summaries from a batch run.
pub fn discrimination_report(
    table: &ResultTable,
    features: &[FeatureKind],
    pairs: &[(Effort, Effort)],
) -> Result<DiscriminationReport> {
    let methods: Vec<Method> = {
        let mut seen = Vec::new();
        for row in &table.rows {
            if !seen.contains(&row.method) {
                seen.push(row.method);
            }
        }
        seen
    };

    let samples = |method: Method, feature: FeatureKind, effort: Effort| -> Vec<f64> {
        table
            .ok_rows()
            .filter(|(r, _)| r.method == method && r.record.effort == effort)
            .map(|(_, m)| feature.extract(m))
            .filter(|v| v.is_finite())
            .collect()
    };

    let mut rank_sums = Vec::new();
    for &method in &methods {
        for &feature in features {
            for &(a, b) in pairs {
                let xa = samples(method, feature, a);
                let xb = samples(method, feature, b);
                if xa.len() < 2 {
                    return Err(Error::MissingClass(a.to_string()));
                }
                if xb.len() < 2 {
                    return Err(Error::MissingClass(b.to_string()));
                }
                let test = wilcoxon_rank_sum(&xa, &xb)?;
                let normalized = normalized_rank_sum(&xa, &xb)?;
                rank_sums.push(RankSumResult {
                    method,
                    feature,
                    pair: (a, b),
                    statistic: test.statistic,
                    p_value: test.p_value,
                    normalized,
                    significant: test.p_value < P_SIGNIFICANT,
                    exact: test.exact,
                });
            }
        }
    }

    let mut summaries = Vec::new();
    for &method in &methods {
        for quantity in Quantity::ALL {
            for effort in Effort::ALL {
                let mut values: Vec<f64> = table
                    .ok_rows()
                    .filter(|(r, _)| r.method == method && r.record.effort == effort)
                    .map(|(_, m)| quantity.extract(m))
                    .filter(|v| v.is_finite())
                    .collect();
                if values.is_empty() {
                    continue;
                }
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                summaries.push(ClassSummary {
                    method,
                    quantity,
                    effort,
                    n: values.len(),
                    q1: quantile_of_sorted(&values, 0.25),
                    median: quantile_of_sorted(&values, 0.5),
                    q3: quantile_of_sorted(&values, 0.75),
                });
            }
        }
    }

    let exclusions = methods
        .iter()
        .map(|&m| (m, table.failed_count(m)))
        .collect();

    let has_truth = table.ok_rows().any(|(_, m)| m.truth_errors.is_some());
    let error_stats = has_truth.then(|| {
        let mut stats = Vec::new();
        for &method in &methods {
            let errs: Vec<&ParamErrors> = table
                .ok_rows()
                .filter(|(r, _)| r.method == method)
                .filter_map(|(_, m)| m.truth_errors.as_ref())
                .collect();
            if errs.is_empty() {
                continue;
            }
            let med = |get: fn(&ParamErrors) -> f64| {
                let mut v: Vec<f64> = errs.iter().map(|e| get(e)).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                median_of_sorted(&v)
            };
            for (name, abs, rel) in [
                ("fg", med(|e| e.fg_abs_hz), med(|e| e.fg_rel)),
                ("bg", med(|e| e.bg_abs_hz), med(|e| e.bg_rel)),
                ("fst", med(|e| e.fst_abs_hz), med(|e| e.fst_rel)),
            ] {
                stats.push(ErrorStats {
                    method,
                    parameter: name.to_string(),
                    n: errs.len(),
                    median_abs_hz: abs,
                    median_rel: rel,
                });
            }
        }
        stats
    });

    Ok(DiscriminationReport {
        significance_threshold: P_SIGNIFICANT,
        rank_sums,
        summaries,
        exclusions,
        error_stats,
    })
}

// ---------------------------------------------------------------------------
// Tabular output
// ---------------------------------------------------------------------------

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Writes the per-stimulus result table as CSV with `#` comment metadata.
pub fn write_results_csv<W: Write>(
    mut w: W,
    table: &ResultTable,
    comments: &[String],
) -> std::io::Result<()> {
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    writeln!(
        w,
        "path,vowel,effort,speaker,method,status,error,fg_hz,bg_hz,fst_hz,\
         formant_degenerate,tilt_degenerate,h1h2_db,hrf_db,st_db_per_decade,f0_hz,\
         n_voiced_frames,n_frames,fg_abs_err_hz,bg_abs_err_hz,fst_abs_err_hz"
    )?;
    for row in &table.rows {
        let r = &row.record;
        match &row.outcome {
            Ok(m) => writeln!(
                w,
                "{},{},{},{},{},ok,,{:.6},{:.6},{:.6},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{}",
                r.path.display(),
                r.vowel,
                r.effort,
                r.speaker,
                row.method,
                m.params.fg_hz,
                m.params.bg_hz,
                m.params.fst_hz,
                m.params.formant_degenerate,
                m.params.tilt_degenerate,
                m.features.h1h2_db,
                m.features.hrf_db,
                m.features.st_db_per_decade,
                m.features.f0_hz,
                m.n_voiced,
                m.n_frames,
                fmt_opt(m.truth_errors.map(|e| e.fg_abs_hz)),
                fmt_opt(m.truth_errors.map(|e| e.bg_abs_hz)),
                fmt_opt(m.truth_errors.map(|e| e.fst_abs_hz)),
            )?,
            Err(msg) => writeln!(
                w,
                "{},{},{},{},{},error,\"{}\",,,,,,,,,,,,,,",
                r.path.display(),
                r.vowel,
                r.effort,
                r.speaker,
                row.method,
                msg.replace('"', "'"),
            )?,
        }
    }
    Ok(())
}

/// Writes the per-class quartile summaries as CSV.
pub fn write_summary_csv<W: Write>(
    mut w: W,
    report: &DiscriminationReport,
    comments: &[String],
) -> std::io::Result<()> {
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "method,quantity,effort,n,q1,median,q3")?;
    for s in &report.summaries {
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            s.method,
            s.quantity.name(),
            s.effort,
            s.n,
            s.q1,
            s.median,
            s.q3
        )?;
    }
    Ok(())
}
