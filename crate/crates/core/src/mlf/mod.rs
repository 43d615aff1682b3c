//! Two-parameter Mittag-Leffler function E_{α,β}(z).
//!
//! Two independent routes: the power series Σ z^k/Γ(αk+β), and for
//! 1<α<2, 1≤β≤2 on the negative real axis the split
//! E_{α,β}(-x) = ω_{α,β}(x) + l_{α,β}(x) into a residue part and a
//! Laplace-type integral.
//!
//! Sign of the integral part: the integral as usually printed,
//! (1/π)∫₀^∞ e^{-t} t^{α-β}(x sin((α-β)π) - t^α sin(βπ)) / (t^{2α} + 2t^α x cos(απ) + x²) dt,
//! has to be *subtracted* from ω to reproduce the series. We fold that sign
//! into `l` (see [`Convention`]), so E(-x) = ω + l holds with our `l`, and
//! H_{α,1}(s) = sin(απ)/(απ) / (s²+2s cos(απ)+1). Its total mass is then
//! 1 - 2/α, which is negative on (1,2).

pub mod precise;
pub mod table;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::quad::{self, QuadError};

pub use precise::{ml_series_extended, PreciseMl};
pub use table::{shared_table, MlTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlError {
    #[error("series not converged: terms still growing after {terms} terms (last term {est_error:e})")]
    NonConvergent { value: Complex64, est_error: f64, terms: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    pub alpha: f64,
    pub beta_ml: f64,
}

impl MLParams {
    pub fn new(alpha: f64, beta_ml: f64) -> Result<Self, MlError> {
        if !(alpha > 0.0 && alpha <= 2.0) || !(beta_ml > 0.0) || !alpha.is_finite() || !beta_ml.is_finite() {
            return Err(MlError::Domain(format!("need 0<α≤2, β>0; got α={alpha}, β={beta_ml}")));
        }
        Ok(MLParams { alpha, beta_ml })
    }

    /// 1 < α < 2 and 1 ≤ β ≤ 2.
    pub fn in_decomposition_domain(&self) -> bool {
        self.alpha > 1.0 && self.alpha < 2.0 && self.beta_ml >= 1.0 && self.beta_ml <= 2.0
    }

    fn check_decomposition(&self) -> Result<(), MlError> {
        if self.in_decomposition_domain() {
            Ok(())
        } else {
            Err(MlError::Domain(format!(
                "decomposition needs 1<α<2, 1≤β≤2; got α={}, β={}",
                self.alpha, self.beta_ml
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Decomposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLValue {
    pub value: Complex64,
    pub method: Method,
    pub est_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLDecomposition {
    pub omega: Complex64,
    pub l_part: Complex64,
    pub a_alpha: Complex64,
    pub b_alpha: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadScheme {
    AdaptiveSplit,
    FixedPanel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: QuadScheme,
    pub split_point: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { scheme: QuadScheme::AdaptiveSplit, split_point: 1.0, rel_tol: 1e-10, max_panels: 2000 }
    }
}

/// Sign convention for the integral part and the kernel H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// The formulas exactly as usually printed; E(-x) = ω - l with these.
    AsPrinted,
    /// Negated so that E(-x) = ω + l; fixed by agreement with the series.
    SeriesConsistent,
}

impl Convention {
    fn sign(self) -> f64 {
        match self {
            Convention::AsPrinted => 1.0,
            Convention::SeriesConsistent => -1.0,
        }
    }
}

/// Which integral representation evaluates l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LRoute {
    /// Integral in t with weight e^{-t}.
    Laplace,
    /// Substituted form ∫ H(s) e^{-(xs)^{1/α}} x^{(1-β)/α} ds.
    Kernel,
}

const FACT: [f64; 23] = {
    let mut f = [1.0; 23];
    let mut i = 1;
    while i < 23 {
        f[i] = f[i - 1] * i as f64;
        i += 1;
    }
    f
};

/// 1/Γ(x) in double precision; exact at small positive integers, 0 at poles.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x == x.floor() && (1.0..=23.0).contains(&x) {
        return 1.0 / FACT[x as usize - 1];
    }
    if x > 171.0 {
        return (-statrs::function::gamma::ln_gamma(x)).exp();
    }
    1.0 / statrs::function::gamma::gamma(x)
}

fn neumaier(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

/// Power series Σ_k z^k/Γ(αk+β).
///
/// Terms are formed as z^k·(1/Γ) while Γ is representable and as
/// exp(k ln|z| - lnΓ) with tracked phase beyond, summed with compensation.
/// When the bound on cancellation error (≈ ε Σ|t_k|) exceeds `rel_tol`·|sum|
/// the sum is redone in extended precision, so the result is accurate to
/// about `rel_tol` whenever the f64 sum cannot be trusted.
pub fn ml_series(params: MLParams, z: Complex64, rel_tol: f64, max_terms: usize) -> Result<MLValue, MlError> {
    if max_terms < 1 || !(rel_tol > 0.0) {
        return Err(MlError::Domain("need max_terms ≥ 1 and rel_tol > 0".into()));
    }
    let (a, b) = (params.alpha, params.beta_ml);
    let az = z.norm();
    if az == 0.0 {
        return Ok(MLValue { value: Complex64::new(recip_gamma(b), 0.0), method: Method::Series, est_error: 0.0 });
    }
    let (ln_az, arg) = (az.ln(), z.arg());
    let (mut sr, mut cr, mut si, mut ci) = (0.0, 0.0, 0.0, 0.0);
    let mut cancel = 0.0;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut direct = true;
    let mut last = f64::INFINITY;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut k = 0usize;
    while k < max_terms {
        let x = a * k as f64 + b;
        let term = if direct && x < 170.0 && pow.norm() < 1e300 {
            pow * recip_gamma(x)
        } else {
            direct = false;
            let lm = k as f64 * ln_az - statrs::function::gamma::ln_gamma(x);
            let ph = k as f64 * arg;
            let m = lm.exp();
            Complex64::new(m * ph.cos(), m * ph.sin())
        };
        if !term.re.is_finite() || !term.im.is_finite() {
            return Err(MlError::NonConvergent { value: Complex64::new(sr + cr, si + ci), est_error: f64::INFINITY, terms: k });
        }
        neumaier(&mut sr, &mut cr, term.re);
        neumaier(&mut si, &mut ci, term.im);
        let tn = term.norm();
        cancel += tn * ((k + 2) as f64).sqrt();
        let s = Complex64::new(sr + cr, si + ci).norm();
        prev = last;
        last = tn;
        if direct {
            pow *= z;
        }
        k += 1;
        if k > 1 && tn <= prev && (tn <= rel_tol * s || tn < 1e-300) {
            converged = true;
            break;
        }
    }
    let value = Complex64::new(sr + cr, si + ci);
    if !converged {
        if last > prev {
            return Err(MlError::NonConvergent { value, est_error: last, terms: k });
        }
        return Ok(MLValue { value, method: Method::Series, est_error: last });
    }
    let cancel_err = 2.0 * f64::EPSILON * cancel;
    if cancel_err > rel_tol * value.norm() {
        let bits = (-(rel_tol.log2())).ceil().max(53.0) as u64 + 8;
        let v = ml_series_extended(a, b, z, bits);
        return Ok(MLValue { value: v, method: Method::Series, est_error: v.norm() * rel_tol.min(1e-15) + last });
    }
    Ok(MLValue { value, method: Method::Series, est_error: cancel_err + last })
}

/// Residue part ω_{α,β}(x) for x > 0.
pub fn ml_omega(params: MLParams, x: f64) -> Result<Complex64, MlError> {
    params.check_decomposition()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(MlError::Domain(format!("ω needs x > 0, got {x}")));
    }
    let (a, b) = (params.alpha, params.beta_ml);
    let r = x.powf(1.0 / a);
    let theta = (1.0 - b) * PI / a;
    let pole = Complex64::from_polar(r, PI / a);
    let w = (pole + Complex64::new(0.0, theta)).exp();
    let pre = x.powf((1.0 - b) / a) / a;
    // the two exponentials are conjugate, so the sum is real
    Ok((w + w.conj()) * pre)
}

/// Poles a_α(x), b_α(x) = x^{1/α} e^{±iπ/α}.
pub fn ml_poles(params: MLParams, x: f64) -> (Complex64, Complex64) {
    let r = x.powf(1.0 / params.alpha);
    (Complex64::from_polar(r, PI / params.alpha), Complex64::from_polar(r, -PI / params.alpha))
}

/// Kernel H_{α,β}(s) in the series-consistent convention.
pub fn ml_kernel_h(params: MLParams, s: f64) -> Result<f64, MlError> {
    ml_kernel_h_with(params, s, Convention::SeriesConsistent)
}

pub fn ml_kernel_h_with(params: MLParams, s: f64, conv: Convention) -> Result<f64, MlError> {
    if !(s > 0.0) {
        return Err(MlError::Domain(format!("H needs s > 0, got {s}")));
    }
    Ok(conv.sign() * kernel_h_raw(params.alpha, params.beta_ml, s))
}

// As printed: (1/(απ))(sin((α-β)π) - s sin(βπ))/(s²+2s cos απ+1)·s^{(1-β)/α}
fn kernel_h_raw(a: f64, b: f64, s: f64) -> f64 {
    let den = denom_unit(a, s);
    ((a - b) * PI).sin() / (a * PI) * s.powf((1.0 - b) / a) / den
        - (b * PI).sin() / (a * PI) * s.powf((1.0 - b) / a + 1.0) / den
}

// s² + 2s cos(απ) + 1 written as a sum of squares
fn denom_unit(a: f64, s: f64) -> f64 {
    let (sn, cs) = (a * PI).sin_cos();
    (s + cs) * (s + cs) + sn * sn
}

fn check_quad(q: &QuadratureSpec) -> Result<(), MlError> {
    if !(q.rel_tol > 0.0) || !(q.split_point > 0.0) || q.max_panels == 0 {
        return Err(MlError::Domain("quadrature spec needs rel_tol > 0, split_point > 0, max_panels ≥ 1".into()));
    }
    Ok(())
}

fn integrate01<F: FnMut(f64) -> f64>(f: F, q: &QuadratureSpec) -> Result<quad::QuadResult, QuadError> {
    match q.scheme {
        QuadScheme::AdaptiveSplit => quad::adaptive(f, 0.0, 1.0, q.rel_tol, 1e-300, q.max_panels),
        QuadScheme::FixedPanel => quad::fixed_panels(f, 0.0, 1.0, q.max_panels),
    }
}

/// Integral over (0, ∞) of s^{κ-1} g(s), κ > 0, split at `s0`: the head uses
/// s = s0 v^{1/κ} (absorbing the singular power), the tail s = s0/u.
fn half_line<G: Fn(f64) -> f64>(kappa: f64, g: G, q: &QuadratureSpec) -> Result<(f64, f64), QuadError> {
    let s0 = q.split_point;
    let head = integrate01(
        |v| {
            if v == 0.0 {
                return 0.0;
            }
            g(s0 * v.powf(1.0 / kappa))
        },
        q,
    )?;
    let tail = integrate01(
        |u| {
            if u == 0.0 {
                return 0.0;
            }
            let s = s0 / u;
            let v = s.powf(kappa - 1.0) * g(s) * s0 / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        q,
    )?;
    let scale = s0.powf(kappa) / kappa;
    Ok((scale * head.value + tail.value, scale * head.error + tail.error))
}

/// Integral part l_{α,β}(x), x > 0, series-consistent sign, Laplace route.
pub fn ml_l(params: MLParams, x: f64, quad: QuadratureSpec) -> Result<Complex64, MlError> {
    ml_l_with(params, x, quad, LRoute::Laplace, Convention::SeriesConsistent).map(|(v, _)| Complex64::new(v, 0.0))
}

/// l by either route and convention; returns (value, error estimate).
pub fn ml_l_with(params: MLParams, x: f64, q: QuadratureSpec, route: LRoute, conv: Convention) -> Result<(f64, f64), MlError> {
    params.check_decomposition()?;
    check_quad(&q)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(MlError::Domain(format!("l needs x > 0, got {x}")));
    }
    let (a, b) = (params.alpha, params.beta_ml);
    let (sab, sb) = (((a - b) * PI).sin(), (b * PI).sin());
    let (sa, ca) = (a * PI).sin_cos();
    let (v, e) = match route {
        LRoute::Laplace => {
            // t^{α-β} is the singular power: κ = α-β+1
            let g = |t: f64| {
                if t > 745.0 {
                    return 0.0;
                }
                let ta = t.powf(a);
                let den = (ta + x * ca).powi(2) + (x * sa).powi(2);
                (-t).exp() * (x * sab - ta * sb) / den
            };
            half_line(a - b + 1.0, g, &q)?
        }
        LRoute::Kernel => {
            let zf = x.powf((1.0 - b) / a);
            let g = |s: f64| {
                let damp = (-(x * s).powf(1.0 / a)).exp();
                if damp == 0.0 {
                    return 0.0;
                }
                (sab - s * sb) / denom_unit(a, s) * damp * zf
            };
            half_line((1.0 - b) / a + 1.0, g, &q)?
        }
    };
    let c = match route {
        LRoute::Laplace => 1.0 / PI,
        LRoute::Kernel => 1.0 / (a * PI),
    };
    Ok((conv.sign() * c * v, c * e))
}

/// Both parts of E_{α,β}(-x) = ω + l.
pub fn ml_decompose(params: MLParams, x: f64, quad: QuadratureSpec) -> Result<(MLDecomposition, f64), MlError> {
    let omega = ml_omega(params, x)?;
    let (l, err) = ml_l_with(params, x, quad, LRoute::Laplace, Convention::SeriesConsistent)?;
    let (a_alpha, b_alpha) = ml_poles(params, x);
    Ok((MLDecomposition { omega, l_part: Complex64::new(l, 0.0), a_alpha, b_alpha }, err))
}

/// Crossover |z| between the series and the decomposition.
pub const Z_SWITCH: f64 = 10.0;
/// Relative tolerance used by [`ml_eval`] on its series branch.
pub const EVAL_SERIES_TOL: f64 = 1e-13;

/// Dispatching evaluator: decomposition on the negative real axis beyond
/// [`Z_SWITCH`] inside its parameter domain, series otherwise.
pub fn ml_eval(params: MLParams, z: Complex64) -> Result<MLValue, MlError> {
    let x = -z.re;
    if z.im == 0.0 && x > Z_SWITCH && params.in_decomposition_domain() {
        let q = QuadratureSpec { rel_tol: 1e-13, ..QuadratureSpec::default() };
        let omega = ml_omega(params, x)?;
        let (l, err) = ml_l_with(params, x, q, LRoute::Laplace, Convention::SeriesConsistent)?;
        let v = omega.re + l;
        return Ok(MLValue {
            value: Complex64::new(v, 0.0),
            method: Method::Decomposition,
            est_error: err + 1e-15 * omega.norm(),
        });
    }
    ml_series(params, z, EVAL_SERIES_TOL, 5000)
}

/// E_{α,β}(-x) for real x ≥ 0 through [`ml_eval`].
pub fn ml_eval_neg(params: MLParams, x: f64) -> Result<f64, MlError> {
    Ok(ml_eval(params, Complex64::new(-x, 0.0))?.value.re)
}

/// ∫₀^∞ H_{α,1}(s) ds in the series-consistent convention (equals 1 - 2/α).
pub fn ml_relaxation_mass(alpha: f64) -> Result<f64, MlError> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(MlError::Domain(format!("mass needs 1<α<2, got {alpha}")));
    }
    let p = MLParams { alpha, beta_ml: 1.0 };
    let h = |s: f64| kernel_h_raw(alpha, 1.0, s) * Convention::SeriesConsistent.sign();
    let head = quad::adaptive(h, 0.0, 1.0, 1e-13, 1e-300, 2000)?;
    // s = 1/u turns the 1/s² tail into a smooth integrand
    let tail = quad::adaptive(
        |u| {
            let s = if u == 0.0 { f64::INFINITY } else { 1.0 / u };
            if s.is_infinite() {
                Convention::SeriesConsistent.sign() * (alpha * PI).sin() / (alpha * PI)
            } else {
                ml_kernel_h(p, s).unwrap_or(0.0) / (u * u)
            }
        },
        0.0,
        1.0,
        1e-13,
        1e-300,
        2000,
    )?;
    Ok(head.value + tail.value)
}

/// |central difference of E_{α,1}(-λt^α) + λ t^{α-1} E_{α,α}(-λt^α)|.
pub fn ml_derivative_residual(alpha: f64, lambda: f64, t: f64, h: f64) -> Result<f64, MlError> {
    let p1 = MLParams::new(alpha, 1.0)?;
    let pa = MLParams::new(alpha, alpha)?;
    let f = |s: f64| ml_eval_neg(p1, lambda * s.powf(alpha));
    let d = (f(t + h)? - f(t - h)?) / (2.0 * h);
    let rhs = lambda * t.powf(alpha - 1.0) * ml_eval_neg(pa, lambda * t.powf(alpha))?;
    Ok((d + rhs).abs())
}

/// |t E_{α,2}(-λt^α) - ∫₀^t E_{α,1}(-λs^α) ds|.
pub fn ml_integral_residual(alpha: f64, lambda: f64, t: f64, quad: QuadratureSpec) -> Result<f64, MlError> {
    check_quad(&quad)?;
    let p1 = MLParams::new(alpha, 1.0)?;
    let p2 = MLParams::new(alpha, 2.0)?;
    let mut failure = None;
    let r = quad::adaptive(
        |s| match ml_eval_neg(p1, lambda * s.powf(alpha)) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        t,
        quad.rel_tol,
        1e-300,
        quad.max_panels,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let lhs = t * ml_eval_neg(p2, lambda * t.powf(alpha))?;
    Ok((lhs - r.value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> MLParams {
        MLParams::new(a, b).unwrap()
    }

    #[test]
    fn zero_argument_is_first_coefficient() {
        let v = ml_series(p(1.5, 1.0), Complex64::new(0.0, 0.0), 1e-15, 10).unwrap();
        assert_eq!(v.value.re, 1.0);
        assert_eq!(ml_eval(p(1.7, 2.0), Complex64::new(0.0, 0.0)).unwrap().value.re, 1.0);
    }

    #[test]
    fn exponential_and_wave_cases() {
        let v = ml_series(p(1.0, 1.0), Complex64::new(-1.0, 0.0), 1e-15, 200).unwrap();
        assert!((v.value.re - (-1f64).exp()).abs() < 1e-15);
        let s = ml_series(p(2.0, 2.0), Complex64::new(-PI * PI, 0.0), 1e-15, 200).unwrap();
        assert!(s.value.re.abs() < 1e-14);
        let c = ml_eval(p(2.0, 1.0), Complex64::new(-(PI / 2.0).powi(2), 0.0)).unwrap();
        assert!(c.value.re.abs() < 1e-14);
    }

    #[test]
    fn omega_cosine_form() {
        let w = ml_omega(p(1.5, 1.0), 1.0).unwrap();
        let th = 2.0 * PI / 3.0;
        let expect = (2.0 / 1.5) * th.cos().exp() * th.sin().cos();
        assert!((w.re - expect).abs() < 1e-15);
        assert_eq!(w.im, 0.0);
        for &x in &[0.3, 7.0, 55.0] {
            assert_eq!(ml_omega(p(1.3, 1.0), x).unwrap().im, 0.0);
        }
    }

    #[test]
    fn kernel_sign_matches_special_form() {
        let a = 1.5;
        for &s in &[0.2, 1.0, 3.0] {
            let h = ml_kernel_h(p(a, 1.0), s).unwrap();
            let special = (a * PI).sin() / (a * PI) / (s * s + 2.0 * s * (a * PI).cos() + 1.0);
            assert!((h - special).abs() < 1e-15);
        }
        assert!(ml_kernel_h(p(a, 1.0), 0.0).is_err());
    }

    #[test]
    fn decomposition_domain_enforced() {
        assert!(ml_omega(p(2.0, 1.0), 1.0).is_err());
        assert!(ml_omega(p(1.5, 0.5), 1.0).is_err());
        assert!(ml_omega(p(1.5, 1.0), -1.0).is_err());
    }

    #[test]
    fn derivative_residual_zero_lambda() {
        assert_eq!(ml_derivative_residual(1.5, 0.0, 1.0, 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn growing_terms_flagged() {
        let e = ml_series(p(1.5, 1.0), Complex64::new(50.0, 0.0), 1e-15, 5).unwrap_err();
        assert!(matches!(e, MlError::NonConvergent { .. }));
    }
}
