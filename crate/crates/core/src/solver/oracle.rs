//! Reference solutions for the scalar mode ∂^α u = -λu + f(t).
//!
//! Two independent routes to the same Duhamel integral:
//!
//! (a) nested: u = E_{α,1}(-λt^α)u₀ + tE_{α,2}(-λt^α)u₁
//!            + ∫₀^t E_{α,1}(-λ(t-s)^α) ∫₀^s r_α(s-τ) f(τ) dτ ds,
//!     r_α(τ) = τ^{α-2}/Γ(α-1), by product-trapezoid inner and trapezoid outer
//!     rules on a uniform grid;
//! (b) single kernel: the same linear part + ∫₀^t (t-s)^{α-1}E_{α,α}(-λ(t-s)^α) f(s) ds
//!     by adaptive Gauss-Kronrod.
//!
//! Agreement of (a) and (b) under refinement is what fixes the Γ(α-1)
//! normalization of r_α.

use serde::{Deserialize, Serialize};

use super::SolveError;
use crate::mlf::recip_gamma;
use crate::quad;
use crate::spectral::{MlNeg, MultIndex, Symbols};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarOracle {
    pub times: Vec<f64>,
    pub nested: Vec<f64>,
    pub single: Vec<f64>,
    pub max_deviation: f64,
}

/// Both reference forms at `times` (each a multiple of the nested-rule step `h`).
pub fn scalar_oracle<F: Fn(f64) -> f64>(
    alpha: f64,
    lambda: f64,
    u0: f64,
    u1: f64,
    f: F,
    times: &[f64],
    h: f64,
) -> Result<ScalarOracle, SolveError> {
    if !(alpha > 1.0 && alpha < 2.0 && lambda >= 0.0 && h > 0.0) {
        return Err(SolveError::Domain(format!("oracle needs 1<α<2, λ≥0, h>0; got α={alpha} λ={lambda} h={h}")));
    }
    let sym = Symbols::new(alpha)?;
    let lin = |t: f64| -> Result<f64, SolveError> {
        Ok(sym.eval(MultIndex::One, t, lambda)? * u0 + sym.eval(MultIndex::Two, t, lambda)? * u1)
    };
    let mut steps = Vec::with_capacity(times.len());
    for &t in times {
        let n = (t / h).round();
        if !(t >= 0.0) || (n * h - t).abs() > 1e-9 * t.max(1.0) {
            return Err(SolveError::Domain(format!("oracle time {t} is not a multiple of h = {h}")));
        }
        steps.push(n as usize);
    }
    let nested = nested_form(alpha, lambda, &f, &steps, h)?;
    let mut out = ScalarOracle { times: times.to_vec(), nested: Vec::new(), single: Vec::new(), max_deviation: 0.0 };
    for (i, &t) in times.iter().enumerate() {
        let l = lin(t)?;
        let a = l + nested[i];
        let b = l + single_form(&sym, lambda, &f, t)?;
        out.max_deviation = out.max_deviation.max((a - b).abs());
        out.nested.push(a);
        out.single.push(b);
    }
    Ok(out)
}

/// ∫₀^t τ^{α-1}E_{α,α}(-λτ^α) f(t-τ) dτ.
pub fn single_form<F: Fn(f64) -> f64>(sym: &Symbols, lambda: f64, f: &F, t: f64) -> Result<f64, SolveError> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut err = None;
    let r = quad::adaptive(
        |tau| match sym.kernel(lambda, tau) {
            Ok(k) => k * f(t - tau),
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        0.0,
        t,
        1e-12,
        1e-15,
        4000,
    )
    .map_err(|e| SolveError::Quadrature(e.to_string()))?;
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(r.value)
}

/// Nested double integral at grid steps `steps` (times n·h).
fn nested_form<F: Fn(f64) -> f64>(alpha: f64, lambda: f64, f: &F, steps: &[usize], h: f64) -> Result<Vec<f64>, SolveError> {
    let nmax = steps.iter().copied().max().unwrap_or(0);
    let fv: Vec<f64> = (0..=nmax).map(|i| f(i as f64 * h)).collect();
    let b = alpha - 1.0;
    // product-trapezoid weights for ∫₀^{s_n}(s_n-τ)^{b-1} f(τ)dτ, f piecewise linear
    let p = |k: usize| (k as f64).powf(b + 1.0);
    let scale = h.powf(b) / (b * (b + 1.0)) * recip_gamma(b);
    let mid: Vec<f64> = (0..=nmax).map(|d| if d == 0 { 0.0 } else { p(d + 1) - 2.0 * p(d) + p(d - 1) }).collect();
    let mut g = vec![0.0; nmax + 1];
    for n in 1..=nmax {
        let nf = n as f64;
        let mut s = ((nf - 1.0).powf(b + 1.0) - (nf - b - 1.0) * nf.powf(b)) * fv[0] + fv[n];
        for k in 1..n {
            s += mid[n - k] * fv[k];
        }
        g[n] = scale * s;
    }
    let e1 = MlNeg::new(alpha, 1.0)?;
    let e: Vec<f64> = (0..=nmax).map(|k| e1.eval(lambda * (k as f64 * h).powf(alpha))).collect::<Result<_, _>>()?;
    Ok(steps
        .iter()
        .map(|&n| {
            if n == 0 {
                return 0.0;
            }
            let mut s = 0.5 * (e[n] * g[0] + e[0] * g[n]);
            for i in 1..n {
                s += e[n - i] * g[i];
            }
            h * s
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaCheck {
    pub numeric: f64,
    pub closed_form: f64,
    pub residual: f64,
}

/// I(t) = ∫₀^t (t-s)^{-k₁} ∫₀^s (s-τ)^{-k₂} τ^{-k₃} dτ ds against
/// B(1-k₂, 1-k₃) B(1-k₁, 2-k₂-k₃) t^{2-k₁-k₂-k₃}; relative residual.
///
/// The inner integral is taken in the unit variable v = τ/s, which factors
/// out s^{1-k₂-k₃} exactly and keeps near-zero s from overflowing; both
/// remaining one-dimensional integrals are done by tanh-sinh.
pub fn beta_identity_check(k1: f64, k2: f64, k3: f64, t: f64) -> Result<BetaCheck, SolveError> {
    if !(k1 < 1.0 && k2 < 1.0 && k3 < 1.0 && t > 0.0) {
        return Err(SolveError::Domain(format!("need k_i < 1 and t > 0, got ({k1}, {k2}, {k3}), t={t}")));
    }
    let qerr = |e: quad::QuadError| SolveError::Quadrature(e.to_string());
    let inner = quad::tanh_sinh(
        |_, d, left| {
            let (v, w) = if left { (d, 1.0 - d) } else { (1.0 - d, d) };
            w.powf(-k2) * v.powf(-k3)
        },
        0.0,
        1.0,
        1e-14,
        12,
    )
    .map_err(qerr)?
    .value;
    let e = 1.0 - k2 - k3;
    let outer = quad::tanh_sinh(
        |_, d, left| {
            let (s, ts) = if left { (d, t - d) } else { (t - d, d) };
            ts.powf(-k1) * s.powf(e)
        },
        0.0,
        t,
        1e-13,
        12,
    )
    .map_err(qerr)?
    .value;
    let numeric = inner * outer;
    use statrs::function::beta::beta;
    let closed_form = beta(1.0 - k2, 1.0 - k3) * beta(1.0 - k1, 2.0 - k2 - k3) * t.powf(2.0 - k1 - k2 - k3);
    Ok(BetaCheck { numeric, closed_form, residual: (numeric - closed_form).abs() / closed_form.abs() })
}
