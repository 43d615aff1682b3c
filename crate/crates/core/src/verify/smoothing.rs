//! Boundedness scans for the Morrey smoothing estimates of G_{α,j}(t).

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Curve, Report, VerifyError};
use crate::norms::{morrey_norm, BallFamily, NormSpec};
use crate::solver::data::homogeneous_radial;
use crate::spectral::{apply_g, riesz, Field, Grid, MultIndex, MultiplierSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSpec {
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub p1: f64,
    pub p2: f64,
    pub mu: f64,
    /// One: item i, Two: item ii, AlphaAlpha: item iii.
    pub j: MultIndex,
    pub dim: usize,
}

impl SmoothingSpec {
    /// λ = (γ₂ - γ₁) + (N-μ)/p₁ - (N-μ)/p₂.
    pub fn lambda(&self) -> f64 {
        let nm = self.dim as f64 - self.mu;
        (self.gamma2 - self.gamma1) + nm / self.p1 - nm / self.p2
    }

    /// Admissibility of the chosen estimate, with its statement.
    pub fn admissible(&self) -> (bool, String) {
        let l = self.lambda();
        let a = self.alpha;
        let ordered = self.gamma1 <= self.gamma2 && 1.0 <= self.p1 && self.p1 <= self.p2;
        let (ok, what) = match self.j {
            MultIndex::One => (l < 2.0, "λ < 2".to_string()),
            MultIndex::Two => (l + 2.0 / a < 2.0, "λ + 2/α < 2".to_string()),
            MultIndex::AlphaAlpha => (2.0 - 2.0 / a < l && l < 2.0, "2 - 2/α < λ < 2".to_string()),
        };
        (ordered && ok && l >= 0.0, format!("{what} with λ = {l}"))
    }

    /// Exponent e with Q(t) = ‖G(t)f‖ · t^e / ‖f‖.
    pub fn time_power(&self) -> f64 {
        let e = 0.5 * self.alpha * self.lambda();
        match self.j {
            MultIndex::AlphaAlpha => e + 1.0 - self.alpha,
            _ => e,
        }
    }

    /// Smoothness index of the input norm (γ₁, or γ₁ - 2/α for item ii).
    pub fn input_order(&self) -> f64 {
        match self.j {
            MultIndex::Two => self.gamma1 - 2.0 / self.alpha,
            _ => self.gamma1,
        }
    }
}

/// Scale-critical input: |x|_m^{-d} with d = (N-μ)/p₁ - γ₁, passed through
/// (-Δ)^{1/α} for item ii so that its input norm is the one of the profile.
/// On such data Q(t) is constant in the continuum, which makes the
/// boundedness test sharp.
pub fn smoothing_data(spec: &SmoothingSpec, grid: Grid) -> Result<Field, VerifyError> {
    let d = (spec.dim as f64 - spec.mu) / spec.p1 - spec.gamma1;
    let g = homogeneous_radial(grid, d, 1.0, grid.h());
    Ok(match spec.j {
        MultIndex::Two => riesz(2.0 / spec.alpha, &g)?,
        _ => g,
    })
}

/// Q(t) over `t_grid`; pass iff max Q / min Q ≤ tol.
pub fn check_smoothing(spec: &SmoothingSpec, f: &Field, t_grid: &[f64], balls: &BallFamily, tol: f64) -> Result<Report, VerifyError> {
    let mut r = Report::new("check_smoothing", json!({ "spec": spec, "lambda": spec.lambda(), "t_grid": t_grid, "balls": balls }), tol);
    let (ok, why) = spec.admissible();
    r.note(why.clone());
    if !ok {
        return Err(VerifyError::Precondition(format!("inadmissible estimate: {why}")));
    }
    let input = morrey_norm(&riesz(spec.input_order(), f)?, NormSpec::new(spec.p1, spec.mu, 0.0), balls)?.norm;
    let e = spec.time_power();
    let mut rows = Vec::new();
    for &t in t_grid {
        let gf = apply_g(MultiplierSpec { alpha: spec.alpha, j: spec.j, t }, f)?;
        let out = morrey_norm(&riesz(spec.gamma2, &gf)?, NormSpec::new(spec.p2, spec.mu, 0.0), balls)?.norm;
        rows.push(vec![t, out * t.powf(e) / input]);
    }
    let qmax = rows.iter().map(|w| w[1]).fold(0.0, f64::max);
    let qmin = rows.iter().map(|w| w[1]).fold(f64::MAX, f64::min);
    r.metric("lambda", spec.lambda());
    r.metric("q_max", qmax);
    r.metric("q_min", qmin);
    r.metric("q_ratio", qmax / qmin);
    r.curves.push(Curve { name: "q".into(), columns: vec!["t".into(), "q".into()], rows });
    Ok(r.decide(qmax / qmin <= tol))
}
