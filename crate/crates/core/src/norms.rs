//! Discrete Morrey and Sobolev-Morrey norms, X_β trajectory norms, and the
//! exponent bookkeeping of the well-posedness theory.
//!
//! Balls are ℓ∞ cubes. A cube of half-width r = k·h centered at node c holds
//! the 2k cells with offsets -k..k-1 per axis, so the largest cube (k = M/2)
//! is exactly the periodic box. Window sums come from a summed-area table of
//! |f|^p built over the box tiled twice per axis, so wrapped cubes cost O(1)
//! like any other.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{eval_on_product_grid, riesz, Field, Grid, SpectralError, Transformer};

#[derive(Debug, Error)]
pub enum NormError {
    #[error("ball family is empty")]
    EmptyBallFamily,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Hölder exponents inconsistent: {0}")]
    ParameterMismatch(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub p: f64,
    pub mu: f64,
    #[serde(default)]
    pub s: f64,
}

impl NormSpec {
    pub fn new(p: f64, mu: f64, s: f64) -> Self {
        NormSpec { p, mu, s }
    }

    fn check(&self, dim: usize) -> Result<(), NormError> {
        if !(self.p >= 1.0) || !(self.mu >= 0.0 && self.mu < dim as f64) {
            return Err(NormError::Domain(format!("need p ≥ 1 and 0 ≤ μ < {dim}, got p={} μ={}", self.p, self.mu)));
        }
        Ok(())
    }
}

/// Cube centers on a sub-lattice of nodes and half-widths in cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallFamily {
    pub stride: usize,
    pub radii_cells: Vec<usize>,
}

impl BallFamily {
    /// Radii h·2^k up to L/2.
    pub fn dyadic(grid: &Grid, stride: usize) -> Self {
        Self::octaves(grid, stride, 1)
    }

    /// `per_octave` radii per factor 2, rounded to whole cells.
    pub fn octaves(grid: &Grid, stride: usize, per_octave: usize) -> Self {
        let half = grid.points_per_axis / 2;
        let per = per_octave.max(1);
        let mut radii: Vec<usize> = Vec::new();
        let mut i = 0;
        loop {
            let r = 2f64.powf(i as f64 / per as f64).round() as usize;
            if r > half {
                break;
            }
            if radii.last() != Some(&r) {
                radii.push(r);
            }
            i += 1;
        }
        BallFamily { stride: stride.max(1), radii_cells: radii }
    }

    /// Every node a center, every dyadic radius.
    pub fn full(grid: &Grid) -> Self {
        Self::dyadic(grid, 1)
    }

    pub fn radii(&self, grid: &Grid) -> Vec<f64> {
        self.radii_cells.iter().map(|&k| k as f64 * grid.h()).collect()
    }

    fn check(&self, grid: &Grid) -> Result<(), NormError> {
        if self.radii_cells.is_empty() || self.stride == 0 || self.stride > grid.points_per_axis {
            return Err(NormError::EmptyBallFamily);
        }
        if self.radii_cells.iter().any(|&k| k == 0 || 2 * k > grid.points_per_axis) {
            return Err(NormError::Domain("radii must lie in [h, L/2]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorreyValue {
    pub norm: f64,
    pub argmax_center: [f64; 2],
    pub argmax_radius: f64,
}

/// Summed-area table with one leading zero row/column; `w` entries per axis.
struct Sat {
    dim: usize,
    w: usize,
    s: Vec<f64>,
}

impl Sat {
    /// Table over an n^dim block of `vals` (row-major), tiled `reps` times per axis.
    fn build(vals: &[f64], n: usize, dim: usize, reps: usize) -> Sat {
        let m = n * reps;
        let w = m + 1;
        if dim == 1 {
            let mut s = vec![0.0; w];
            for i in 0..m {
                s[i + 1] = s[i] + vals[i % n];
            }
            return Sat { dim, w, s };
        }
        let mut s = vec![0.0; w * w];
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..m {
                row += vals[(i % n) * n + j % n];
                s[(i + 1) * w + j + 1] = s[i * w + j + 1] + row;
            }
        }
        Sat { dim, w, s }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        if self.dim == 1 {
            self.s[i]
        } else {
            self.s[i * self.w + j]
        }
    }

    /// Sum over cells [a, b) per axis.
    fn rect(&self, a: [usize; 2], b: [usize; 2]) -> f64 {
        if self.dim == 1 {
            return self.s[b[0]] - self.s[a[0]];
        }
        self.at(b[0], b[1]) - self.at(a[0], b[1]) - self.at(b[0], a[1]) + self.at(a[0], a[1])
    }

    /// Cumulative sum at fractional cell coordinates (density constant per cell).
    fn cum(&self, u: [f64; 2]) -> f64 {
        let split = |x: f64| {
            let x = x.clamp(0.0, (self.w - 1) as f64);
            let i = (x.floor() as usize).min(self.w - 2);
            (i, x - i as f64)
        };
        let (i, fi) = split(u[0]);
        if self.dim == 1 {
            return self.s[i] * (1.0 - fi) + self.s[i + 1] * fi;
        }
        let (j, fj) = split(u[1]);
        let a = self.at(i, j) * (1.0 - fj) + self.at(i, j + 1) * fj;
        let b = self.at(i + 1, j) * (1.0 - fj) + self.at(i + 1, j + 1) * fj;
        a * (1.0 - fi) + b * fi
    }

    /// Integral over the box lo..hi in fractional cell coordinates.
    fn frac_rect(&self, lo: [f64; 2], hi: [f64; 2]) -> f64 {
        if self.dim == 1 {
            return self.cum(hi) - self.cum(lo);
        }
        self.cum(hi) - self.cum([lo[0], hi[1]]) - self.cum([hi[0], lo[1]]) + self.cum(lo)
    }
}

fn centers(grid: &Grid, stride: usize) -> Vec<[usize; 2]> {
    let n = grid.points_per_axis;
    let axis: Vec<usize> = (0..n).step_by(stride).collect();
    if grid.dim == 1 {
        axis.iter().map(|&i| [i, 0]).collect()
    } else {
        axis.iter().flat_map(|&i| axis.iter().map(move |&j| [i, j])).collect()
    }
}

/// Morrey norm of an array of cell weights `w = |f|^p` (shared by the Hölder check).
fn morrey_of_powers(grid: &Grid, w: &[f64], p: f64, mu: f64, balls: &BallFamily) -> MorreyValue {
    let n = grid.points_per_axis;
    let sat = Sat::build(w, n, grid.dim, 2);
    let vol = grid.cell_volume();
    let h = grid.h();
    let mut best = MorreyValue { norm: 0.0, argmax_center: grid.node(0), argmax_radius: h * balls.radii_cells[0] as f64 };
    for c in centers(grid, balls.stride) {
        for &k in &balls.radii_cells {
            // shifted by half a period: k ≤ n/2 keeps the window inside 0..2n
            let a = [c[0] + n / 2 - k, c[1] + n / 2 - k];
            let b = [a[0] + 2 * k, a[1] + 2 * k];
            let sum = sat.rect(a, b).max(0.0);
            let r = k as f64 * h;
            let v = r.powf(-mu / p) * (sum * vol).powf(1.0 / p);
            if v > best.norm {
                best = MorreyValue { norm: v, argmax_center: grid.node(grid.flat(c)), argmax_radius: r };
            }
        }
    }
    best
}

/// sup over the family of r^{-μ/p}‖f‖_{L^p(Q_r(x₀))}.
pub fn morrey_norm(f: &Field, spec: NormSpec, balls: &BallFamily) -> Result<MorreyValue, NormError> {
    spec.check(f.grid.dim)?;
    balls.check(&f.grid)?;
    if spec.s != 0.0 {
        return Err(NormError::Domain("morrey_norm needs s = 0; use sobolev_morrey_norm".into()));
    }
    let w: Vec<f64> = f.values.iter().map(|v| v.abs().powf(spec.p)).collect();
    Ok(morrey_of_powers(&f.grid, &w, spec.p, spec.mu, balls))
}

/// Morrey norm of (2π|ξ|)^s f̂. For s < 0 the zero mode is dropped.
pub fn sobolev_morrey_norm(f: &Field, spec: NormSpec, balls: &BallFamily) -> Result<MorreyValue, NormError> {
    let g = riesz(spec.s, f)?;
    morrey_norm(&g, NormSpec { s: 0.0, ..spec }, balls)
}

/// Derived exponents and the individual hypotheses of the well-posedness theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub alpha: f64,
    pub rho: f64,
    pub q: f64,
    pub p: f64,
    pub r: f64,
    pub mu: f64,
    pub n: usize,
    pub beta_decay: f64,
    pub feasibility: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl ExponentSet {
    pub fn all_satisfied(&self) -> bool {
        self.feasibility.iter().all(|c| c.satisfied)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.feasibility.iter().find(|c| c.name == name)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.feasibility
            .iter()
            .filter(|c| !c.satisfied)
            .map(|c| format!("hypothesis `{}` violated: {} vs {}", c.name, c.lhs, c.rhs))
            .collect()
    }
}

pub const COND_PR: &str = "p/r < 1/alpha - 1/2";
pub const COND_Q: &str = "alpha/(2-alpha) < q < 2/alpha";
pub const COND_RHO: &str = "1 - p/r < ((rho-1)/alpha)(1/q - alpha/2)";

fn lt(name: &str, lhs: f64, rhs: f64) -> Condition {
    Condition { name: name.into(), lhs, rhs, satisfied: lhs < rhs }
}

/// q = 2ρ/(ρ+1), μ = N - 2p/(ρ-1), β = (α/2)((N-μ)/p - (N-μ)/r), with every
/// hypothesis recorded separately. Violations are reported, never fatal.
pub fn exponent_report(alpha: f64, rho: f64, p: f64, r: f64, n: usize) -> Result<ExponentSet, NormError> {
    if !(rho > 1.0 && p >= 1.0 && r > p && alpha > 1.0 && alpha < 2.0 && n >= 1) {
        return Err(NormError::Domain(format!("need ρ>1, p≥1, r>p, 1<α<2; got α={alpha} ρ={rho} p={p} r={r}")));
    }
    let nf = n as f64;
    let q = 2.0 * rho / (rho + 1.0);
    let mu = nf - 2.0 * p / (rho - 1.0);
    if mu < -1e-12 {
        return Err(NormError::Domain(format!("μ = {mu} < 0 (p > N(ρ-1)/2)")));
    }
    let mu = mu.max(0.0);
    let beta_decay = 0.5 * alpha * ((nf - mu) / p - (nf - mu) / r);
    let pr = p / r;
    let feasibility = vec![
        lt(COND_PR, pr, 1.0 / alpha - 0.5),
        Condition {
            name: COND_Q.into(),
            lhs: q,
            rhs: 2.0 / alpha,
            satisfied: alpha / (2.0 - alpha) < q && q < 2.0 / alpha,
        },
        lt(COND_RHO, 1.0 - pr, (rho - 1.0) / alpha * (1.0 / q - alpha / 2.0)),
        lt("(N-mu)/p - (N-mu)/r < 2", (nf - mu) / p - (nf - mu) / r, 2.0),
        lt("1 + alpha < rho", 1.0 + alpha, rho),
        lt("rho < r", rho, r),
        lt("1 < p", 1.0, p),
        Condition { name: "N >= 2".into(), lhs: nf, rhs: 2.0, satisfied: n >= 2 },
    ];
    Ok(ExponentSet { alpha, rho, q, p, r, mu, n, beta_decay, feasibility })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityScan {
    pub points: usize,
    pub cond_pr: usize,
    pub cond_rho: usize,
    pub both: usize,
    /// max over the scan of min(margin₁, margin₃); negative means never jointly satisfied.
    pub best_joint_margin: f64,
}

/// Brute-force scan of p/r ∈ (0,1), ρ ∈ [1.1, 50], α ∈ (1,2) for points meeting
/// the first and third hypotheses together (with q = 2ρ/(ρ+1)).
pub fn feasibility_scan(n_pr: usize, n_rho: usize, n_alpha: usize) -> FeasibilityScan {
    let mut out = FeasibilityScan { points: 0, cond_pr: 0, cond_rho: 0, both: 0, best_joint_margin: f64::NEG_INFINITY };
    for i in 0..n_pr {
        let pr = (i as f64 + 0.5) / n_pr as f64;
        for j in 0..n_rho {
            let rho = 1.1 + (50.0 - 1.1) * j as f64 / (n_rho - 1).max(1) as f64;
            let q = 2.0 * rho / (rho + 1.0);
            for k in 0..n_alpha {
                let alpha = 1.0 + (k as f64 + 0.5) / n_alpha as f64;
                let m1 = (1.0 / alpha - 0.5) - pr;
                let m3 = (rho - 1.0) / alpha * (1.0 / q - alpha / 2.0) - (1.0 - pr);
                out.points += 1;
                out.cond_pr += (m1 > 0.0) as usize;
                out.cond_rho += (m3 > 0.0) as usize;
                out.both += (m1 > 0.0 && m3 > 0.0) as usize;
                out.best_joint_margin = out.best_joint_margin.max(m1.min(m3));
            }
        }
    }
    out
}

/// max_t t^{α/2+β}‖u(t)‖_{M¹_{r,μ}} + max_t t^β‖u(t)‖_{M_{r,μ}}.
pub fn xbeta_norm(times: &[f64], fields: &[Field], exps: &ExponentSet, balls: &BallFamily) -> Result<f64, NormError> {
    if times.is_empty() || times.len() != fields.len() {
        return Err(NormError::EmptyTrajectory);
    }
    let spec = NormSpec::new(exps.r, exps.mu, 0.0);
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for (&t, u) in times.iter().zip(fields) {
        if !(t > 0.0) {
            return Err(NormError::Domain(format!("X_β norm needs t > 0, got {t}")));
        }
        let grad = sobolev_morrey_norm(u, NormSpec { s: 1.0, ..spec }, balls)?.norm;
        let plain = morrey_norm(u, spec, balls)?.norm;
        a = a.max(t.powf(0.5 * exps.alpha + exps.beta_decay) * grad);
        b = b.max(t.powf(exps.beta_decay) * plain);
    }
    Ok(a + b)
}

/// Morrey norms of g = f(γ·) and of f over the dilated family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParts {
    pub rescaled: f64,
    pub reference: f64,
    pub residual: f64,
    pub cubes: usize,
}

/// |‖f(γ·)‖ - γ^{-(N-μ)/p}‖f‖| / ‖f‖ over matching cube families.
///
/// g = f(γ·) is sampled by trigonometric interpolation on the nodes whose
/// image stays inside the box; its norm uses lattice cubes inside that
/// sub-box. The reference norm of f runs over the images γQ of those cubes,
/// integrated exactly against the piecewise-constant cell density.
pub fn scaling_residual(f: &Field, gamma: f64, spec: NormSpec) -> Result<f64, NormError> {
    Ok(scaling_parts(f, gamma, spec, &BallFamily::dyadic(&f.grid, 4))?.residual)
}

pub fn scaling_parts(f: &Field, gamma: f64, spec: NormSpec, balls: &BallFamily) -> Result<ScalingParts, NormError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(NormError::Domain(format!("γ must be positive, got {gamma}")));
    }
    spec.check(f.grid.dim)?;
    balls.check(&f.grid)?;
    let grid = f.grid;
    let (n, h, l, dim) = (grid.points_per_axis, grid.h(), grid.length, grid.dim);
    let p = spec.p;
    let g_side = if spec.s != 0.0 { riesz(spec.s, f)? } else { f.clone() };
    // cell i covers [b_i, b_i + h), b_i = x_i - h/2; f lives on [b_0, b_0 + L)
    let b0 = -0.5 * l - 0.5 * h;
    let inside = |x: f64| x >= b0 + 1e-9 * h && x <= b0 + l - 1e-9 * h;
    // nodes whose cell image lies in f's domain
    let ok: Vec<usize> = (0..n)
        .filter(|&i| {
            let x = grid.coord(i);
            inside(gamma * (x - 0.5 * h)) && inside(gamma * (x + 0.5 * h))
        })
        .collect();
    let (lo, hi) = (ok[0], ok[ok.len() - 1] + 1);
    let sub = hi - lo;
    let xs: Vec<f64> = (lo..hi).map(|i| gamma * grid.coord(i)).collect();
    let sf = Transformer::new(grid).forward(&g_side)?;
    let g = eval_on_product_grid(&sf, &xs, if dim == 2 { &xs } else { &[] });
    let gp: Vec<f64> = g.iter().map(|v| v.abs().powf(p)).collect();
    let sat_g = Sat::build(&gp, sub, dim, 1);
    let fp: Vec<f64> = g_side.values.iter().map(|v| v.abs().powf(p)).collect();
    let sat_f = Sat::build(&fp, n, dim, 1);
    let vol = grid.cell_volume();
    let (mut ng, mut nf, mut cubes) = (0.0f64, 0.0f64, 0usize);
    let axis: Vec<usize> = (0..n).step_by(balls.stride).filter(|&c| c >= lo && c < hi).collect();
    let cs: Vec<[usize; 2]> = if dim == 1 {
        axis.iter().map(|&c| [c, 0]).collect()
    } else {
        axis.iter().flat_map(|&i| axis.iter().map(move |&j| [i, j])).collect()
    };
    for c in cs {
        for &k in &balls.radii_cells {
            let fits = |ci: usize| ci >= lo + k && ci + k <= hi;
            if !fits(c[0]) || (dim == 2 && !fits(c[1])) {
                continue;
            }
            let a = [c[0] - k - lo, if dim == 2 { c[1] - k - lo } else { 0 }];
            let b = [a[0] + 2 * k, a[1] + 2 * k];
            let sg = sat_g.rect(a, b).max(0.0);
            let r = k as f64 * h;
            ng = ng.max(r.powf(-spec.mu / p) * (sg * vol).powf(1.0 / p));
            // image cube in fractional cell units of f
            let to_u = |x: f64| (x - b0) / h;
            let lo_x = |ci: usize| gamma * (grid.coord(ci) - 0.5 * h - r);
            let ulo = [to_u(lo_x(c[0])), if dim == 2 { to_u(lo_x(c[1])) } else { 0.0 }];
            let uhi = [ulo[0] + 2.0 * gamma * k as f64, ulo[1] + 2.0 * gamma * k as f64];
            let sfv = sat_f.frac_rect(ulo, uhi).max(0.0);
            nf = nf.max((gamma * r).powf(-spec.mu / p) * (sfv * vol).powf(1.0 / p));
            cubes += 1;
        }
    }
    if cubes == 0 {
        return Err(NormError::EmptyBallFamily);
    }
    let nd = dim as f64;
    let reference = gamma.powf(-(nd - spec.mu) / p) * nf;
    let residual = if nf == 0.0 { 0.0 } else { (ng - reference).abs() / nf };
    Ok(ScalingParts { rescaled: ng, reference, residual, cubes })
}

/// Relative rounding allowance in the Hölder comparison: both sides are
/// computed from different power/root chains, so equality cases can differ
/// in the last bits.
pub const HOLDER_ROUNDING: f64 = 1e-12;

/// max(0, ‖fg‖_{p₃,μ₃} - ‖f‖_{p₁,μ₁}‖g‖_{p₂,μ₂}) with 1/p₃ = 1/p₁ + 1/p₂,
/// μ₃/p₃ = μ₁/p₁ + μ₂/p₂ (beyond a relative rounding allowance of
/// [`HOLDER_ROUNDING`]).
pub fn holder_residual(f: &Field, g: &Field, p1: f64, p2: f64, mu1: f64, mu2: f64, balls: &BallFamily) -> Result<f64, NormError> {
    let parts = holder_parts(f, g, p1, p2, mu1, mu2, balls)?;
    Ok((parts.0 - parts.1 * (1.0 + HOLDER_ROUNDING)).max(0.0))
}

/// (‖fg‖_{p₃,μ₃}, ‖f‖_{p₁,μ₁}·‖g‖_{p₂,μ₂}).
pub fn holder_parts(f: &Field, g: &Field, p1: f64, p2: f64, mu1: f64, mu2: f64, balls: &BallFamily) -> Result<(f64, f64), NormError> {
    if f.grid != g.grid {
        return Err(SpectralError::ShapeMismatch("Hölder factors on different grids".into()).into());
    }
    if !(p1 >= 1.0 && p2 >= 1.0) {
        return Err(NormError::ParameterMismatch(format!("p1={p1}, p2={p2} must be ≥ 1")));
    }
    let p3 = 1.0 / (1.0 / p1 + 1.0 / p2);
    let mu3 = p3 * (mu1 / p1 + mu2 / p2);
    let d = f.grid.dim as f64;
    for (mu, name) in [(mu1, "μ1"), (mu2, "μ2")] {
        if !(mu >= 0.0 && mu < d) {
            return Err(NormError::ParameterMismatch(format!("{name}={mu} outside [0, N)")));
        }
    }
    balls.check(&f.grid)?;
    let prod: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| (a * b).abs().powf(p3)).collect();
    let lhs = morrey_of_powers(&f.grid, &prod, p3, mu3, balls).norm;
    let nf = morrey_norm(f, NormSpec::new(p1, mu1, 0.0), balls)?.norm;
    let ng = morrey_norm(g, NormSpec::new(p2, mu2, 0.0), balls)?.norm;
    Ok((lhs, nf * ng))
}
