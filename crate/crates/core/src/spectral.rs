//! Periodic grids, discrete Fourier transforms and radial multipliers.
//!
//! The box is [-L/2, L/2)^d with nodes x_j = -L/2 + j h. Coefficients follow
//! f̂(ξ) = ∫ e^{-2πi x·ξ} f(x) dx, discretized as
//!
//! c_m = M^{-d} Σ_j f(x_j) e^{-2πi m·x_j/L},   f(x) = Σ_m c_m e^{2πi m·x/L},
//!
//! so ξ = m/L and the Laplacian symbol is -4π²|ξ|². With this scaling
//! Parseval reads h^d Σ_j |f_j|² = L^d Σ_m |c_m|². Because the first node sits
//! at -L/2, c_m differs from the plain FFT output by the factor (-1)^{m₀+m₁}.
//!
//! Storage is row-major with the last axis fastest; coefficient arrays use
//! FFT order (index k ↔ m = k for k < M/2, m = k - M otherwise).

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

use crate::mlf::{ml_eval_neg, shared_table, MLParams, MlError, MlTable};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed FHF1 data: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub dim: usize,
    pub points_per_axis: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(dim: usize, points_per_axis: usize, length: f64) -> Result<Self, SpectralError> {
        let g = Grid { dim, points_per_axis, length };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(SpectralError::Domain(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if self.points_per_axis < 16 || !self.points_per_axis.is_power_of_two() {
            return Err(SpectralError::Domain(format!(
                "points_per_axis must be a power of two ≥ 16, got {}",
                self.points_per_axis
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(SpectralError::Domain(format!("box length must be positive, got {}", self.length)));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.length / self.points_per_axis as f64
    }

    /// Number of cells, M^d.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.h()
    }

    /// Signed frequency index of FFT slot k.
    pub fn mode(&self, k: usize) -> i64 {
        let n = self.points_per_axis;
        if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// Per-axis indices of a flat index (second entry 0 in 1D).
    pub fn split(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.points_per_axis, flat % self.points_per_axis]
        }
    }

    pub fn flat(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.points_per_axis + idx[1]
        }
    }

    /// Physical coordinates of node `flat`.
    pub fn node(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.split(flat);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    pub fn mode_vec(&self, flat: usize) -> [i64; 2] {
        let [i, j] = self.split(flat);
        if self.dim == 1 {
            [self.mode(i), 0]
        } else {
            [self.mode(i), self.mode(j)]
        }
    }

    pub fn mode_sq(&self, flat: usize) -> u64 {
        let [a, b] = self.mode_vec(flat);
        (a * a + b * b) as u64
    }

    /// Flat index of the mirrored mode -m.
    pub fn mirror(&self, flat: usize) -> usize {
        let n = self.points_per_axis;
        let [i, j] = self.split(flat);
        self.flat([(n - i) % n, (n - j) % n])
    }

    /// Distinct |m|² values and the shell of every mode.
    pub fn shells(&self) -> Shells {
        let n = self.len();
        let half = (self.points_per_axis / 2) as u64;
        let max_sq = half * half * self.dim as u64;
        let mut slot = vec![u32::MAX; max_sq as usize + 1];
        let mut sq = Vec::new();
        let mut of = vec![0u32; n];
        for (k, o) in of.iter_mut().enumerate() {
            let s = self.mode_sq(k) as usize;
            if slot[s] == u32::MAX {
                slot[s] = sq.len() as u32;
                sq.push(s as u64);
            }
            *o = slot[s];
        }
        Shells { mode_sq: sq, of }
    }
}

/// Grouping of modes by |m|², the only thing radial symbols depend on.
#[derive(Debug, Clone)]
pub struct Shells {
    pub mode_sq: Vec<u64>,
    pub of: Vec<u32>,
}

impl Shells {
    /// |ξ|² = |m|²/L² for every shell.
    pub fn xi_sq(&self, grid: &Grid) -> Vec<f64> {
        let l2 = grid.length * grid.length;
        self.mode_sq.iter().map(|&s| s as f64 / l2).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::ShapeMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn<F: FnMut([f64; 2]) -> f64>(grid: Grid, mut f: F) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node(k))).collect();
        Field { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete L² norm (h^d Σ|f|²)^{1/2}.
    pub fn l2(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// self + s·other.
    pub fn axpy(&self, s: f64, other: &Field) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Field { grid: self.grid, values }
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> Field {
        Field { grid: self.grid, values: self.values.iter().copied().map(f).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Coefficient of the integer frequency vector m (second entry ignored in 1D).
    pub fn get(&self, m: [i64; 2]) -> Complex64 {
        let n = self.grid.points_per_axis as i64;
        let k = |v: i64| v.rem_euclid(n) as usize;
        self.coeffs[self.grid.flat([k(m[0]), k(m[1])])]
    }

    /// L^d Σ|c|², equal to the discrete L² norm squared of the field.
    pub fn energy(&self) -> f64 {
        self.grid.length.powi(self.grid.dim as i32) * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// FFT plans for one grid; reusable across many transforms.
pub struct Transformer {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Transformer {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis;
        Transformer { grid, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let n = self.grid.points_per_axis;
        // last axis: contiguous rows, processed chunk by chunk
        plan.process(data);
        if self.grid.dim == 2 {
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = data[i * n + j];
                }
                plan.process(&mut col);
                for i in 0..n {
                    data[i * n + j] = col[i];
                }
            }
        }
    }

    fn parity(&self, flat: usize) -> bool {
        let [i, j] = self.grid.split(flat);
        (i + j) % 2 == 1
    }

    pub fn forward(&self, f: &Field) -> Result<SpectralField, SpectralError> {
        self.check(&f.grid)?;
        let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_complex(&mut data);
        Ok(SpectralField { grid: self.grid, coeffs: data })
    }

    /// In-place forward transform of complex samples into coefficients.
    pub fn forward_complex(&self, data: &mut [Complex64]) {
        self.run(&self.fwd, data);
        let scale = 1.0 / self.grid.len() as f64;
        for (k, c) in data.iter_mut().enumerate() {
            *c *= if self.parity(k) { -scale } else { scale };
        }
    }

    /// In-place inverse transform of coefficients into complex samples.
    pub fn inverse_complex(&self, data: &mut [Complex64]) {
        for (k, c) in data.iter_mut().enumerate() {
            if self.parity(k) {
                *c = -*c;
            }
        }
        self.run(&self.inv, data);
    }

    /// Real part of the inverse transform.
    pub fn inverse(&self, f: &SpectralField) -> Result<Field, SpectralError> {
        self.check(&f.grid)?;
        let mut data = f.coeffs.clone();
        self.inverse_complex(&mut data);
        Ok(Field { grid: self.grid, values: data.iter().map(|c| c.re).collect() })
    }

    fn check(&self, g: &Grid) -> Result<(), SpectralError> {
        if *g != self.grid {
            return Err(SpectralError::ShapeMismatch(format!("field grid {g:?} vs transformer grid {:?}", self.grid)));
        }
        Ok(())
    }
}

pub fn transform_forward(f: &Field) -> Result<SpectralField, SpectralError> {
    f.grid.validate()?;
    if f.values.len() != f.grid.len() {
        return Err(SpectralError::ShapeMismatch(format!("{} values for {} cells", f.values.len(), f.grid.len())));
    }
    Transformer::new(f.grid).forward(f)
}

pub fn transform_inverse(f: &SpectralField) -> Result<Field, SpectralError> {
    f.grid.validate()?;
    if f.coeffs.len() != f.grid.len() {
        return Err(SpectralError::ShapeMismatch(format!("{} coefficients for {} cells", f.coeffs.len(), f.grid.len())));
    }
    Transformer::new(f.grid).inverse(f)
}

/// Multiplier index j of G_{α,j}; `AlphaAlpha` is t^{α-1}E_{α,α}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultIndex {
    One,
    Two,
    AlphaAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub alpha: f64,
    pub j: MultIndex,
    pub t: f64,
}

/// x ↦ E_{α,β}(-x) for x ≥ 0, through closed forms at α ∈ {1, 2}, the shared
/// Chebyshev table where available and direct evaluation otherwise.
#[derive(Debug, Clone)]
pub struct MlNeg {
    params: MLParams,
    kind: MlKind,
}

#[derive(Debug, Clone)]
enum MlKind {
    Exp,
    ExpInt,
    Cos,
    Sinc,
    Table(Arc<MlTable>),
    Direct,
}

impl MlNeg {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, MlError> {
        let params = MLParams::new(alpha, beta)?;
        let kind = match (alpha, beta) {
            (a, b) if a == 1.0 && b == 1.0 => MlKind::Exp,
            (a, b) if a == 1.0 && b == 2.0 => MlKind::ExpInt,
            (a, b) if a == 2.0 && b == 1.0 => MlKind::Cos,
            (a, b) if a == 2.0 && b == 2.0 => MlKind::Sinc,
            _ if params.in_decomposition_domain() && alpha <= 1.99 => MlKind::Table(shared_table(params)?),
            _ => MlKind::Direct,
        };
        Ok(MlNeg { params, kind })
    }

    pub fn params(&self) -> MLParams {
        self.params
    }

    pub fn eval(&self, x: f64) -> Result<f64, MlError> {
        Ok(match &self.kind {
            MlKind::Exp => (-x).exp(),
            MlKind::ExpInt => {
                if x < 1e-8 {
                    1.0 - 0.5 * x
                } else {
                    -(-x).exp_m1() / x
                }
            }
            MlKind::Cos => x.sqrt().cos(),
            MlKind::Sinc => {
                let w = x.sqrt();
                if w < 1e-8 {
                    1.0
                } else {
                    w.sin() / w
                }
            }
            MlKind::Table(t) => t.eval(x),
            MlKind::Direct => ml_eval_neg(self.params, x)?,
        })
    }
}

/// The three multiplier families for one α.
#[derive(Debug, Clone)]
pub struct Symbols {
    alpha: f64,
    one: MlNeg,
    two: MlNeg,
    aa: MlNeg,
}

impl Symbols {
    pub fn new(alpha: f64) -> Result<Self, MlError> {
        Ok(Symbols { alpha, one: MlNeg::new(alpha, 1.0)?, two: MlNeg::new(alpha, 2.0)?, aa: MlNeg::new(alpha, alpha)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// t^{j-1}E_{α,j}(-c t^α) with c = 4π²|ξ|².
    pub fn eval(&self, j: MultIndex, t: f64, c: f64) -> Result<f64, MlError> {
        let x = c * t.powf(self.alpha);
        Ok(match j {
            MultIndex::One => self.one.eval(x)?,
            MultIndex::Two => {
                if t == 0.0 {
                    0.0
                } else {
                    t * self.two.eval(x)?
                }
            }
            MultIndex::AlphaAlpha => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(self.alpha - 1.0) * self.aa.eval(x)?
                }
            }
        })
    }

    /// Memory kernel K_c(τ) = τ^{α-1}E_{α,α}(-c τ^α).
    pub fn kernel(&self, c: f64, tau: f64) -> Result<f64, MlError> {
        self.eval(MultIndex::AlphaAlpha, tau, c)
    }

    /// E_{α,α}(-x).
    pub fn e_alpha_alpha(&self, x: f64) -> Result<f64, MlError> {
        self.aa.eval(x)
    }
}

/// Multiply by a radial symbol given as a function of |ξ|², once per shell.
pub fn apply_radial<F: FnMut(f64) -> Result<f64, MlError>>(f: &Field, mut sym: F) -> Result<Field, SpectralError> {
    let tr = Transformer::new(f.grid);
    let mut sf = tr.forward(f)?;
    let shells = f.grid.shells();
    let vals = shells.xi_sq(&f.grid).into_iter().map(&mut sym).collect::<Result<Vec<_>, _>>()?;
    for (c, &s) in sf.coeffs.iter_mut().zip(&shells.of) {
        *c *= vals[s as usize];
    }
    tr.inverse(&sf)
}

/// G_{α,j}(t) f: each coefficient times t^{j-1}E_{α,j}(-4π²t^α|ξ|²).
pub fn apply_g(spec: MultiplierSpec, f: &Field) -> Result<Field, SpectralError> {
    if !(spec.t >= 0.0) {
        return Err(SpectralError::Domain(format!("multiplier time must be ≥ 0, got {}", spec.t)));
    }
    if !(spec.alpha > 0.0 && spec.alpha <= 2.0) {
        return Err(SpectralError::Domain(format!("α must lie in (0, 2], got {}", spec.alpha)));
    }
    let beta = match spec.j {
        MultIndex::One => 1.0,
        MultIndex::Two => 2.0,
        MultIndex::AlphaAlpha => spec.alpha,
    };
    let e = MlNeg::new(spec.alpha, beta)?;
    let (a, t) = (spec.alpha, spec.t);
    let pre = match spec.j {
        MultIndex::One => 1.0,
        MultIndex::Two => t,
        MultIndex::AlphaAlpha => t.powf(a - 1.0),
    };
    if pre == 0.0 {
        return Ok(Field::zeros(f.grid));
    }
    let ta = t.powf(a);
    apply_radial(f, |xi2| Ok(pre * e.eval(4.0 * PI * PI * xi2 * ta)?))
}

/// Riesz power (−Δ)^{s/2}: symbol (2π|ξ|)^s, zero mode mapped to 0.
pub fn riesz(s: f64, f: &Field) -> Result<Field, SpectralError> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    apply_radial(f, |xi2| Ok(if xi2 == 0.0 { 0.0 } else { (4.0 * PI * PI * xi2).powf(0.5 * s) }))
}

/// Spectral gradient components of a coefficient array; the Nyquist mode of
/// each differentiated axis is dropped so real input gives real output.
pub fn gradient_spectral(f: &SpectralField) -> Vec<SpectralField> {
    let g = f.grid;
    let n = g.points_per_axis as i64;
    (0..g.dim)
        .map(|axis| {
            let coeffs = f
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let m = g.mode_vec(k)[axis];
                    if m == -n / 2 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * Complex64::new(0.0, 2.0 * PI * m as f64 / g.length)
                    }
                })
                .collect();
            SpectralField { grid: g, coeffs }
        })
        .collect()
}

pub fn gradient(f: &Field) -> Result<Vec<Field>, SpectralError> {
    let tr = Transformer::new(f.grid);
    let sf = tr.forward(f)?;
    gradient_spectral(&sf).iter().map(|c| tr.inverse(c)).collect()
}

/// Direct trigonometric sum at arbitrary points; real part returned.
///
/// Separable: per point the axis phases are tabulated once, so the cost is
/// O(M^d) complex multiply-adds per point.
pub fn eval_at_points(f: &SpectralField, pts: &[[f64; 2]]) -> Vec<f64> {
    let g = f.grid;
    let n = g.points_per_axis;
    let phases = |x: f64| -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * g.mode(k) as f64 * x / g.length)).collect()
    };
    pts.iter()
        .map(|p| {
            let e0 = phases(p[0]);
            if g.dim == 1 {
                return f.coeffs.iter().zip(&e0).map(|(c, e)| (c * e).re).sum();
            }
            let e1 = phases(p[1]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, row) in f.coeffs.chunks(n).enumerate() {
                let inner: Complex64 = row.iter().zip(&e1).map(|(c, e)| c * e).sum();
                acc += inner * e0[i];
            }
            acc.re
        })
        .collect()
}

/// Trigonometric interpolant on the tensor grid xs × ys (row-major, xs
/// slow; `ys` ignored in 1D). Two separable passes, O(M²·|ys| + M·|xs|·|ys|).
pub fn eval_on_product_grid(f: &SpectralField, xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let g = f.grid;
    let n = g.points_per_axis;
    let table = |pts: &[f64]| -> Vec<Complex64> {
        let mut out = Vec::with_capacity(pts.len() * n);
        for &x in pts {
            out.extend((0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * g.mode(k) as f64 * x / g.length)));
        }
        out
    };
    let e0 = table(xs);
    if g.dim == 1 {
        return e0.chunks(n).map(|e| f.coeffs.iter().zip(e).map(|(c, e)| (c * e).re).sum()).collect();
    }
    let e1 = table(ys);
    // a[i][j] = Σ_{m1} c[i][m1] e^{2πi m1 y_j/L}
    let mut a = vec![Complex64::new(0.0, 0.0); n * ys.len()];
    for (i, row) in f.coeffs.chunks(n).enumerate() {
        for (j, e) in e1.chunks(n).enumerate() {
            a[i * ys.len() + j] = row.iter().zip(e).map(|(c, e)| c * e).sum();
        }
    }
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for e in e0.chunks(n) {
        for j in 0..ys.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, ei) in e.iter().enumerate() {
                acc += ei * a[i * ys.len() + j];
            }
            out.push(acc.re);
        }
    }
    out
}

/// Keep mode m iff every |m_i| ≤ M/3.
pub fn dealias_mask(grid: &Grid) -> Vec<bool> {
    let n = grid.points_per_axis as i64;
    (0..grid.len())
        .map(|k| {
            let m = grid.mode_vec(k);
            3 * m[0].abs() <= n && 3 * m[1].abs() <= n
        })
        .collect()
}

/// 2/3 rule: zero all coefficients with some |m_i| > M/3.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mask = dealias_mask(&f.grid);
    let coeffs = f.coeffs.iter().zip(&mask).map(|(&c, &keep)| if keep { c } else { Complex64::new(0.0, 0.0) }).collect();
    SpectralField { grid: f.grid, coeffs }
}

const MAGIC: &[u8; 4] = b"FHF1";

pub fn fhf1_bytes(f: &Field) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * f.values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(f.grid.dim as u32).to_le_bytes());
    out.extend_from_slice(&(f.grid.points_per_axis as u32).to_le_bytes());
    out.extend_from_slice(&f.grid.length.to_le_bytes());
    for v in &f.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn fhf1_parse(bytes: &[u8]) -> Result<Field, SpectralError> {
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(SpectralError::Format("missing FHF1 header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let grid = Grid::new(u32_at(4), u32_at(8), f64::from_le_bytes(bytes[12..20].try_into().unwrap()))
        .map_err(|e| SpectralError::Format(e.to_string()))?;
    let body = &bytes[20..];
    if body.len() != 8 * grid.len() {
        return Err(SpectralError::Format(format!("expected {} values, found {} bytes", grid.len(), body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Field::new(grid, values)
}

pub fn write_fhf1(path: &Path, f: &Field) -> Result<(), SpectralError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&fhf1_bytes(f))?;
    file.flush()?;
    Ok(())
}

pub fn read_fhf1(path: &Path) -> Result<Field, SpectralError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    fhf1_parse(&bytes)
}
