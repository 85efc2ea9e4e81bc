//! Autocorrelation-method linear prediction and the polynomial machinery
//! around it: Levinson-Durbin recursion, pole stabilization by root
//! reflection, closed-form cubic root extraction for the third-order
//! glottis filter, and magnitude-response evaluation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::PolynomialFilter;

/// All-pole model produced by linear prediction: monic denominator
/// polynomial plus a gain equal to the RMS prediction error.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcModel {
    polynomial: PolynomialFilter,
    gain: f64,
}

impl LpcModel {
    pub fn new(polynomial: PolynomialFilter, gain: f64) -> Result<Self> {
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::InvalidParam(format!("gain must be positive, got {gain}")));
        }
        Ok(Self { polynomial, gain })
    }

    pub fn polynomial(&self) -> &PolynomialFilter {
        &self.polynomial
    }

    pub fn coefficients(&self) -> &[f64] {
        self.polynomial.coefficients()
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn order(&self) -> usize {
        self.polynomial.order()
    }
}

/// Z-plane pole locations, closed under conjugation for real polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<Complex64>,
}

impl PoleSet {
    pub fn new(poles: Vec<Complex64>) -> Self {
        Self { poles }
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }
}

/// Magnitude response sampled on a uniform grid from DC to Nyquist.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub frequencies_hz: Vec<f64>,
    pub magnitude_db: Vec<f64>,
}

/// Raw autocorrelation `r[k] = sum_n x[n] * x[n+k]` for `k = 0..=max_lag`.
pub fn autocorrelate(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= x.len() {
        return Err(Error::InvalidParam(format!(
            "max_lag {max_lag} must be below frame length {}",
            x.len()
        )));
    }
    let mut r = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        r.push(x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum());
    }
    Ok(r)
}

/// Levinson-Durbin recursion: solves the Toeplitz normal equations for the
/// forward predictor of the given order. Gain is the square root of the
/// final prediction-error power.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<LpcModel> {
    if order == 0 {
        return Err(Error::InvalidParam("order must be at least 1".into()));
    }
    if r.len() < order + 1 {
        return Err(Error::InvalidParam(format!(
            "need {} autocorrelation lags for order {order}, got {}",
            order + 1,
            r.len()
        )));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("non-finite autocorrelation".into()));
    }
    if r[0] <= 0.0 {
        return Err(Error::DegenerateFrame);
    }

    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for m in 1..=order {
        let mut acc = r[m];
        for i in 1..m {
            acc += a[i] * r[m - i];
        }
        let k = -acc / err;
        let prev = a.clone();
        a[m] = k;
        for i in 1..m {
            a[i] = prev[i] + k * prev[m - i];
        }
        err *= 1.0 - k * k;
        if err <= 0.0 {
            // Reflection coefficient pinned to +/-1; keep a tiny positive
            // error so the gain stays usable.
            err = r[0] * 1e-12;
        }
    }

    let polynomial = PolynomialFilter::all_pole(a)?;
    LpcModel::new(polynomial, err.sqrt())
}

/// One-stop LPC analysis for the inverse-filtering pipelines: window, raw
/// autocorrelation with a white-noise floor on `r[0]`, Levinson recursion,
/// then stabilization.
pub fn lpc_analyze(signal: &[f64], window: &[f64], order: usize) -> Result<LpcModel> {
    debug_assert_eq!(signal.len(), window.len());
    let windowed: Vec<f64> = signal.iter().zip(window).map(|(x, w)| x * w).collect();
    let mut r = autocorrelate(&windowed, order)?;
    r[0] *= 1.0 + 1e-9;
    let model = levinson_durbin(&r, order)?;
    Ok(stabilize(&model))
}

const STABILIZE_RADIUS: f64 = 0.995;

/// Projects any pole on or outside the unit circle back inside: reflects it
/// to `1/conj(z)` and clamps the radius at 0.995. Stable models are
/// returned unchanged, so the function is a fixed point on them.
pub fn stabilize(model: &LpcModel) -> LpcModel {
    if model.polynomial().is_stable() {
        return model.clone();
    }
    let coeffs = model.coefficients();
    let roots = polynomial_roots(coeffs);
    let fixed: Vec<Complex64> = roots
        .into_iter()
        .map(|z| {
            let r = z.norm();
            let z = if r >= 1.0 { z / (r * r) } else { z };
            let r = z.norm();
            if r >= STABILIZE_RADIUS {
                z * (STABILIZE_RADIUS / r)
            } else {
                z
            }
        })
        .collect();
    let poly = polynomial_from_roots(&fixed);
    LpcModel {
        polynomial: PolynomialFilter::new(poly, model.polynomial().role())
            .expect("monic by construction"),
        gain: model.gain,
    }
}

/// Roots of the degree-3 monic polynomial `1 + c1 z^-1 + c2 z^-2 + c3 z^-3`
/// (equivalently of `z^3 + c1 z^2 + c2 z + c3`): a bracketed real root,
/// synthetic deflation to a quadratic, and a Newton polish on every root.
pub fn cubic_roots(polynomial: &PolynomialFilter) -> Result<PoleSet> {
    let c = polynomial.coefficients();
    if c.len() != 4 {
        return Err(Error::InvalidParam(format!(
            "cubic_roots needs degree 3, got degree {}",
            c.len() - 1
        )));
    }
    let (a, b, d) = (c[1], c[2], c[3]);

    let real_root = bracketed_cubic_root(a, b, d);

    // Deflate: z^3 + a z^2 + b z + d = (z - r)(z^2 + q1 z + q2).
    let q1 = a + real_root;
    let q2 = b + real_root * q1;
    let disc = q1 * q1 - 4.0 * q2;

    let mut roots = vec![Complex64::new(real_root, 0.0)];
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = -(q1 + q1.signum() * s) / 2.0;
        if big.abs() > f64::MIN_POSITIVE {
            roots.push(Complex64::new(big, 0.0));
            roots.push(Complex64::new(q2 / big, 0.0));
        } else {
            roots.push(Complex64::new(-q1 / 2.0 + s / 2.0, 0.0));
            roots.push(Complex64::new(-q1 / 2.0 - s / 2.0, 0.0));
        }
    } else {
        let re = -q1 / 2.0;
        let im = (-disc).sqrt() / 2.0;
        roots.push(Complex64::new(re, im));
        roots.push(Complex64::new(re, -im));
    }

    // Polish on the original cubic; keep the conjugate pair exactly closed
    // by polishing the upper root and mirroring it.
    let eval = |z: Complex64| ((z + a) * z + b) * z + d;
    let deriv = |z: Complex64| (z * 3.0 + 2.0 * a) * z + b;
    let polish = |mut z: Complex64| {
        for _ in 0..4 {
            let f = eval(z);
            let df = deriv(z);
            if df.norm() < 1e-300 {
                break;
            }
            let step = f / df;
            let candidate = z - step;
            if eval(candidate).norm() < f.norm() {
                z = candidate;
            } else {
                break;
            }
        }
        z
    };

    let polished: Vec<Complex64> = if roots[1].im != 0.0 {
        let upper = polish(roots[1]);
        vec![polish(roots[0]), upper, upper.conj()]
    } else {
        roots.into_iter().map(polish).collect()
    };

    Ok(PoleSet::new(polished))
}

/// `20 log10 |gain / A(e^{jw})|` on `n_points` uniformly spaced frequencies
/// covering [0, sample_rate/2] inclusive.
pub fn frequency_response(
    model: &LpcModel,
    n_points: usize,
    sample_rate: u32,
) -> Result<FrequencyResponse> {
    if n_points < 2 {
        return Err(Error::InvalidParam("need at least 2 frequency points".into()));
    }
    let denom = polynomial_response(model.coefficients(), n_points, sample_rate);
    let magnitude_db = denom
        .magnitude_db
        .iter()
        .map(|db| 20.0 * model.gain().log10() - db)
        .collect();
    Ok(FrequencyResponse {
        frequencies_hz: denom.frequencies_hz,
        magnitude_db,
    })
}

/// Magnitude response `20 log10 |A(e^{jw})|` of a polynomial used as an FIR
/// numerator (lip radiation, inverse filters).
pub fn polynomial_response(coeffs: &[f64], n_points: usize, sample_rate: u32) -> FrequencyResponse {
    let nyquist = sample_rate as f64 / 2.0;
    let mut frequencies_hz = Vec::with_capacity(n_points);
    let mut magnitude_db = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let f = nyquist * i as f64 / (n_points - 1) as f64;
        let omega = 2.0 * std::f64::consts::PI * f / sample_rate as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in coeffs.iter().enumerate() {
            acc += Complex64::from_polar(c, -omega * k as f64);
        }
        frequencies_hz.push(f);
        magnitude_db.push(20.0 * acc.norm().max(1e-300).log10());
    }
    FrequencyResponse {
        frequencies_hz,
        magnitude_db,
    }
}

/// Real root of `z^3 + a z^2 + b z + d` by bisection inside the Cauchy
/// bound, followed by a few Newton steps.
fn bracketed_cubic_root(a: f64, b: f64, d: f64) -> f64 {
    let eval = |z: f64| ((z + a) * z + b) * z + d;
    let bound = 1.0 + a.abs().max(b.abs()).max(d.abs());
    let (mut lo, mut hi) = (-bound, bound);
    // Monic cubic: negative at -bound, positive at +bound.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if eval(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..3 {
        let f = eval(z);
        let df = (3.0 * z + 2.0 * a) * z + b;
        if df.abs() < 1e-300 {
            break;
        }
        let candidate = z - f / df;
        if candidate.is_finite() && eval(candidate).abs() <= f.abs() {
            z = candidate;
        } else {
            break;
        }
    }
    z
}

/// Roots of a monic real polynomial of any degree. Degree up to 3 goes
/// through the closed-form path; higher degrees use the Durand-Kerner
/// simultaneous iteration (only ever reached when stabilizing a hand-built
/// unstable filter: autocorrelation LPC output is already stable).
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    match coeffs.len() {
        0 | 1 => Vec::new(),
        2 => vec![Complex64::new(-coeffs[1], 0.0)],
        3 => {
            let (p, q) = (coeffs[1], coeffs[2]);
            let disc = p * p - 4.0 * q;
            if disc >= 0.0 {
                let s = disc.sqrt();
                vec![
                    Complex64::new((-p + s) / 2.0, 0.0),
                    Complex64::new((-p - s) / 2.0, 0.0),
                ]
            } else {
                let im = (-disc).sqrt() / 2.0;
                vec![Complex64::new(-p / 2.0, im), Complex64::new(-p / 2.0, -im)]
            }
        }
        4 => {
            let poly = PolynomialFilter::inverse_fir(coeffs.to_vec()).expect("monic");
            cubic_roots(&poly).expect("degree checked").poles().to_vec()
        }
        _ => durand_kerner(coeffs),
    }
}

fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(coeffs[0], 0.0);
        for &c in &coeffs[1..] {
            acc = acc * z + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-30 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 {
            break;
        }
    }
    roots
}

/// Expands a conjugate-closed root set back into a monic real polynomial.
fn polynomial_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut coeffs = vec![1.0f64];
    let mut upper: Vec<Complex64> = Vec::new();
    for z in roots {
        if z.im.abs() <= 1e-9 {
            // Linear factor (1 - r z^-1).
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * z.re;
            }
            coeffs = next;
        } else if z.im > 0.0 {
            upper.push(*z);
        }
    }
    for z in upper {
        // Quadratic factor (1 - 2 Re(z) z^-1 + |z|^2 z^-2).
        let (b1, b2) = (-2.0 * z.re, z.norm_sqr());
        let mut next = vec![0.0; coeffs.len() + 2];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * b1;
            next[i + 2] += c * b2;
        }
        coeffs = next;
    }
    coeffs[0] = 1.0;
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::apply_allpole;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn all_pole(coeffs: &[f64]) -> PolynomialFilter {
        PolynomialFilter::all_pole(coeffs.to_vec()).unwrap()
    }

    #[test]
    fn autocorrelation_hand_cases() {
        assert_eq!(autocorrelate(&[1.0, 0.0, 0.0, 0.0], 2).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(autocorrelate(&[1.0, 1.0], 1).unwrap(), vec![2.0, 1.0]);
        assert!(autocorrelate(&[1.0, 1.0], 2).is_err());
    }

    #[test]
    fn autocorrelation_zero_lag_dominates() {
        let x: Vec<f64> = (0..256).map(|i| ((i * 7919) % 104729) as f64 / 104729.0 - 0.5).collect();
        let r = autocorrelate(&x, 16).unwrap();
        assert!(r[1..].iter().all(|&v| v <= r[0]));
    }

    #[test]
    fn ar1_autocorrelation_ratio_approaches_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>() - 0.5).collect();
        let x = apply_allpole(&noise, &all_pole(&[1.0, -0.9]), 1.0).unwrap();
        let r = autocorrelate(&x, 1).unwrap();
        assert!((r[1] / r[0] - 0.9).abs() < 0.01);
    }

    #[test]
    fn levinson_order_one_matches_normal_equation() {
        // 1x1 normal equation: a1 = -r1/r0.
        let model = levinson_durbin(&[1.0, 0.9], 1).unwrap();
        assert_relative_eq!(model.coefficients()[1], -0.9, epsilon = 1e-15);
        assert_eq!(model.coefficients()[0], 1.0);
    }

    #[test]
    fn levinson_white_signal_predicts_nothing() {
        let model = levinson_durbin(&[1.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(model.coefficients(), &[1.0, 0.0, 0.0]);
        assert_relative_eq!(model.gain(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn levinson_rejects_degenerate_input() {
        assert!(matches!(levinson_durbin(&[0.0, 0.0], 1), Err(Error::DegenerateFrame)));
        assert!(levinson_durbin(&[f64::NAN, 0.0], 1).is_err());
    }

    #[test]
    fn levinson_recovers_ar3_poles_from_long_signal() {
        // Conjugate pair at radius 0.92, angle for 900 Hz at 22.05 kHz, plus
        // a real pole at 0.7.
        let fs = 22050.0;
        let theta = 2.0 * std::f64::consts::PI * 900.0 / fs;
        let truth = [
            Complex64::from_polar(0.92, theta),
            Complex64::from_polar(0.92, -theta),
            Complex64::new(0.7, 0.0),
        ];
        let coeffs = polynomial_from_roots(&truth);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..200_000).map(|_| rng.gen::<f64>() - 0.5).collect();
        let x = apply_allpole(&noise, &all_pole(&coeffs), 1.0).unwrap();

        let r = autocorrelate(&x, 3).unwrap();
        let model = levinson_durbin(&r, 3).unwrap();
        for (est, tru) in model.coefficients()[1..].iter().zip(&coeffs[1..]) {
            assert!((est - tru).abs() < 1e-2, "coefficient {est} vs {tru}");
        }
        let roots = cubic_roots(model.polynomial()).unwrap();
        for t in &truth {
            let closest = roots
                .poles()
                .iter()
                .map(|p| (p - t).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(closest < 0.05 * t.norm(), "pole off by {closest}");
        }
    }

    #[test]
    fn prediction_error_non_increasing_with_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise: Vec<f64> = (0..4096).map(|_| rng.gen::<f64>() - 0.5).collect();
        let x = apply_allpole(&noise, &all_pole(&[1.0, -1.4, 0.6]), 1.0).unwrap();
        let r = autocorrelate(&x, 12).unwrap();
        let mut last = f64::INFINITY;
        for order in 1..=12 {
            let g = levinson_durbin(&r, order).unwrap().gain();
            assert!(g <= last + 1e-12);
            assert!(g >= 0.0);
            last = g;
        }
    }

    #[test]
    fn stabilize_is_identity_on_stable_models() {
        let model = LpcModel::new(all_pole(&[1.0, -1.2, 0.9025]), 1.0).unwrap();
        let out = stabilize(&model);
        assert_eq!(out.coefficients(), model.coefficients());
    }

    #[test]
    fn stabilize_reflects_real_root() {
        // Single pole at 1.25 reflects to 0.8.
        let model = LpcModel::new(all_pole(&[1.0, -1.25]), 1.0).unwrap();
        let out = stabilize(&model);
        assert_relative_eq!(out.coefficients()[1], -0.8, epsilon = 1e-12);
    }

    #[test]
    fn stabilize_clamps_unit_circle_root() {
        let model = LpcModel::new(all_pole(&[1.0, -1.0]), 1.0).unwrap();
        let out = stabilize(&model);
        assert_relative_eq!(out.coefficients()[1], -STABILIZE_RADIUS, epsilon = 1e-12);
    }

    #[test]
    fn stabilize_random_cubics_end_inside_clamp_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let radius = |rng: &mut ChaCha8Rng| {
                let r: f64 = rng.gen_range(0.1..1.5);
                if (0.99..1.0).contains(&r) {
                    1.05
                } else {
                    r
                }
            };
            let theta: f64 = rng.gen_range(0.05..std::f64::consts::PI - 0.05);
            let pair = Complex64::from_polar(radius(&mut rng), theta);
            let real = Complex64::new(radius(&mut rng) * if rng.gen() { 1.0 } else { -1.0 }, 0.0);
            let coeffs = polynomial_from_roots(&[pair, pair.conj(), real]);
            let model = LpcModel::new(all_pole(&coeffs), 1.0).unwrap();
            let out = stabilize(&model);
            let roots = cubic_roots(out.polynomial()).unwrap();
            for p in roots.poles() {
                assert!(p.norm() <= STABILIZE_RADIUS + 1e-9, "|{p}| > clamp");
            }
        }
    }

    #[test]
    fn stabilize_preserves_response_shape() {
        // Roots pushed outside the circle: the stabilized magnitude response
        // must correlate with the original shape.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let r: f64 = rng.gen_range(1.001..1.5);
            let theta: f64 = rng.gen_range(0.2..2.9);
            let pair = Complex64::from_polar(r, theta);
            let real = Complex64::new(rng.gen_range(1.001..1.5), 0.0);
            let coeffs = polynomial_from_roots(&[pair, pair.conj(), real]);
            let model = LpcModel::new(all_pole(&coeffs), 1.0).unwrap();
            let out = stabilize(&model);

            let a = polynomial_response(model.coefficients(), 256, 16000);
            let b = polynomial_response(out.coefficients(), 256, 16000);
            let mean_a = a.magnitude_db.iter().sum::<f64>() / 256.0;
            let mean_b = b.magnitude_db.iter().sum::<f64>() / 256.0;
            let mut num = 0.0;
            let mut da = 0.0;
            let mut db = 0.0;
            for (x, y) in a.magnitude_db.iter().zip(&b.magnitude_db) {
                num += (x - mean_a) * (y - mean_b);
                da += (x - mean_a).powi(2);
                db += (y - mean_b).powi(2);
            }
            let corr = num / (da * db).sqrt();
            assert!(corr > 0.99, "shape correlation {corr}");
        }
    }

    #[test]
    fn cubic_triple_root() {
        let roots = [Complex64::new(0.5, 0.0); 3];
        let poly = PolynomialFilter::inverse_fir(polynomial_from_roots(&roots)).unwrap();
        let out = cubic_roots(&poly).unwrap();
        for p in out.poles() {
            assert!((p - Complex64::new(0.5, 0.0)).norm() < 1e-5);
        }
    }

    #[test]
    fn cubic_constructed_factorization() {
        let theta = std::f64::consts::PI / 8.0;
        let truth = [
            Complex64::new(0.9, 0.0),
            Complex64::from_polar(0.8, theta),
            Complex64::from_polar(0.8, -theta),
        ];
        let poly = PolynomialFilter::inverse_fir(polynomial_from_roots(&truth)).unwrap();
        let out = cubic_roots(&poly).unwrap();
        for t in &truth {
            let closest = out
                .poles()
                .iter()
                .map(|p| (p - t).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(closest < 1e-8, "root {t} off by {closest}");
        }
    }

    #[test]
    fn cubic_random_residuals_below_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let pair = Complex64::from_polar(
                rng.gen_range(0.05..0.995),
                rng.gen_range(0.05..std::f64::consts::PI - 0.05),
            );
            let real = Complex64::new(
                rng.gen_range(0.05..0.995) * if rng.gen() { 1.0 } else { -1.0 },
                0.0,
            );
            let coeffs = polynomial_from_roots(&[pair, pair.conj(), real]);
            let poly = PolynomialFilter::inverse_fir(coeffs.clone()).unwrap();
            let out = cubic_roots(&poly).unwrap();
            assert_eq!(out.len(), 3);
            for p in out.poles() {
                let residual = (((p + coeffs[1]) * p + coeffs[2]) * p + coeffs[3]).norm();
                worst = worst.max(residual);
            }
            // Conjugate closure.
            let sum_im: f64 = out.poles().iter().map(|p| p.im).sum();
            assert!(sum_im.abs() < 1e-12);
        }
        assert!(worst < 1e-8, "worst residual {worst}");
    }

    #[test]
    fn cubic_root_identity_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..300 {
            let pair = Complex64::from_polar(rng.gen_range(0.1..0.99), rng.gen_range(0.1..3.0));
            let real = Complex64::new(rng.gen_range(-0.99..0.99), 0.0);
            let roots = [pair, pair.conj(), real];
            // Skip nearly coincident roots; the identity is only claimed for
            // separated root sets.
            if (pair - real).norm() < 1e-3 || pair.im.abs() < 1e-3 {
                continue;
            }
            let poly = PolynomialFilter::inverse_fir(polynomial_from_roots(&roots)).unwrap();
            let out = cubic_roots(&poly).unwrap();
            for t in &roots {
                let closest = out
                    .poles()
                    .iter()
                    .map(|p| (p - t).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(closest < 1e-8);
            }
        }
    }

    #[test]
    fn durand_kerner_recovers_high_degree_roots() {
        let truth = [
            Complex64::from_polar(0.9, 0.4),
            Complex64::from_polar(0.9, -0.4),
            Complex64::from_polar(1.2, 1.1),
            Complex64::from_polar(1.2, -1.1),
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.8, 0.0),
            Complex64::from_polar(0.7, 2.4),
            Complex64::from_polar(0.7, -2.4),
        ];
        let coeffs = polynomial_from_roots(&truth);
        let found = durand_kerner(&coeffs);
        for t in &truth {
            let closest = found.iter().map(|p| (p - t).norm()).fold(f64::INFINITY, f64::min);
            assert!(closest < 1e-8, "root {t} off by {closest}");
        }
    }

    #[test]
    fn stabilize_handles_high_degree_unstable_polynomial() {
        let roots = [
            Complex64::from_polar(1.3, 0.8),
            Complex64::from_polar(1.3, -0.8),
            Complex64::new(1.1, 0.0),
            Complex64::from_polar(0.9, 2.0),
            Complex64::from_polar(0.9, -2.0),
            Complex64::new(0.4, 0.0),
        ];
        let coeffs = polynomial_from_roots(&roots);
        let model = LpcModel::new(all_pole(&coeffs), 1.0).unwrap();
        assert!(!model.polynomial().is_stable());
        let out = stabilize(&model);
        assert!(out.polynomial().is_stable());
        assert_eq!(out.order(), 6);
    }

    #[test]
    fn flat_model_response_is_zero_db() {
        let model = LpcModel::new(all_pole(&[1.0]), 1.0).unwrap();
        let resp = frequency_response(&model, 64, 16000).unwrap();
        assert!(resp.magnitude_db.iter().all(|&v| v.abs() < 1e-12));
        assert_eq!(resp.frequencies_hz[0], 0.0);
        assert_eq!(*resp.frequencies_hz.last().unwrap(), 8000.0);
    }

    #[test]
    fn single_pole_response_is_monotone_low_pass() {
        let model = LpcModel::new(all_pole(&[1.0, -0.9]), 1.0).unwrap();
        let resp = frequency_response(&model, 128, 16000).unwrap();
        for pair in resp.magnitude_db.windows(2) {
            assert!(pair[1] < pair[0] + 1e-12);
        }
    }
}
