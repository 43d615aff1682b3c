//! Mild solutions u = G_{α,1}(t)φ + G_{α,2}(t)ψ + N_α(u) on the periodic box.
//!
//! The memory term is marched mode by mode with the single kernel
//! K_c(τ) = τ^{α-1}E_{α,α}(-cτ^α), c = 4π²|ξ|²:
//!
//! û(t_n) = lin(t_n) + Σ_{j<n} w_{n,j}(c) F̂_j,
//!
//! with product-integration weights (kernel integrated exactly over each
//! panel) and F̂_j the nonlinearity sampled on panel j (at the panel midpoint
//! by default). The unknown last panel is resolved by
//! Picard sweeps at each step. Only dealiased modes carry memory, and only
//! one of each ±m pair is stored.

pub mod data;
pub mod oracle;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::mlf::MlError;
use crate::norms::NormError;
use crate::spectral::{
    dealias_mask, gradient_spectral, Field, Grid, MultIndex, SpectralError, SpectralField, Symbols, Transformer,
};

pub use data::{DataSpec, FieldGen, Generator, InitialData};
pub use oracle::{beta_identity_check, scalar_oracle, ScalarOracle};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("Picard sweeps stopped contracting at step {step} (t = {t}); ratio ≥ 1 for 3 consecutive sweeps")]
    NonContraction { step: usize, t: f64, partial: Box<Trajectory> },
    #[error("field magnitude {max_abs:e} exceeded the overflow threshold at step {step} (t = {t}); likely blow-up")]
    Overflow { step: usize, t: f64, max_abs: f64, partial: Box<Trajectory> },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub rho: f64,
    /// Defaults to 2ρ/(ρ+1).
    #[serde(default)]
    pub q: Option<f64>,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl ProblemSpec {
    pub fn new(alpha: f64, rho: f64, kappa1: f64, kappa2: f64) -> Self {
        ProblemSpec { alpha, rho, q: None, kappa1, kappa2 }
    }

    pub fn q(&self) -> f64 {
        self.q.unwrap_or(2.0 * self.rho / (self.rho + 1.0))
    }

    /// True when q = 2ρ/(ρ+1), the relation self-similarity needs.
    pub fn q_is_critical(&self) -> bool {
        (self.q() - 2.0 * self.rho / (self.rho + 1.0)).abs() < 1e-12
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(SolveError::Domain(format!("α must lie in (1,2), got {}", self.alpha)));
        }
        if !(self.rho > 1.0) {
            return Err(SolveError::Domain(format!("ρ must exceed 1, got {}", self.rho)));
        }
        let q = self.q();
        if !(q > 1.0 && q < 2.0) {
            return Err(SolveError::Domain(format!("q must lie in (1,2), got {q}")));
        }
        if !(self.kappa1.is_finite() && self.kappa2.is_finite()) {
            return Err(SolveError::Domain("κ₁, κ₂ must be finite".into()));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.kappa1 == 0.0 && self.kappa2 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
    /// t_n = t_start + (t_end - t_start)(n/n_steps)^grading; 1 is uniform.
    #[serde(default = "one")]
    pub grading: f64,
}

fn one() -> f64 {
    1.0
}

impl TimeGrid {
    pub fn uniform(t_end: f64, n_steps: usize) -> Self {
        TimeGrid { t_start: 0.0, t_end, n_steps, grading: 1.0 }
    }

    pub fn graded(t_end: f64, n_steps: usize, grading: f64) -> Self {
        TimeGrid { t_start: 0.0, t_end, n_steps, grading }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.t_start >= 0.0 && self.t_end > self.t_start && self.n_steps >= 1 && self.grading >= 1.0) {
            return Err(SolveError::Domain(format!(
                "time grid needs 0 ≤ t_start < t_end, n_steps ≥ 1, grading ≥ 1; got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        (0..=self.n_steps)
            .map(|n| {
                if n == self.n_steps {
                    self.t_end
                } else {
                    self.t_start + span * (n as f64 / self.n_steps as f64).powf(self.grading)
                }
            })
            .collect()
    }

    pub fn is_uniform(&self) -> bool {
        self.grading == 1.0
    }
}

/// Where the nonlinearity of a panel is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PanelRule {
    /// F(½(u_j + u_{j+1})) at (t_j + t_{j+1})/2.
    #[default]
    Midpoint,
    /// F(u_{j+1}) at t_{j+1}.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    pub max_sweeps: usize,
    pub sweep_tol: f64,
    /// Data size for the smallness monitor 2^ρ ε^{ρ-1} + 2^q ε^{q-1}.
    pub epsilon_data: Option<f64>,
    pub panel_rule: PanelRule,
    /// Keep every k-th node (the last node is always kept).
    pub save_every: usize,
    pub overflow: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            max_sweeps: 25,
            sweep_tol: 1e-10,
            epsilon_data: None,
            panel_rule: PanelRule::Midpoint,
            save_every: 1,
            overflow: 1e12,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.max_sweeps == 0 || !(self.sweep_tol > 0.0) || self.save_every == 0 || !(self.overflow > 0.0) {
            return Err(SolveError::Domain(format!("invalid Picard configuration {self:?}")));
        }
        Ok(())
    }

    /// 2^ρ ε^{ρ-1} + 2^q ε^{q-1} for the configured ε.
    pub fn smallness(&self, spec: &ProblemSpec) -> Option<f64> {
        let e = self.epsilon_data?;
        let q = spec.q();
        Some(2f64.powf(spec.rho) * e.powf(spec.rho - 1.0) + 2f64.powf(q) * e.powf(q - 1.0))
    }
}

/// The blocks of one solver run, as read from a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub grid: Grid,
    pub problem: ProblemSpec,
    pub data: DataSpec,
    pub timegrid: TimeGrid,
    #[serde(default)]
    pub picard: PicardConfig,
}

impl FlowConfig {
    pub fn build_data(&self) -> Result<InitialData, SolveError> {
        self.grid.validate()?;
        self.data.build(self.grid)
    }
}

/// Kernel form of the memory term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// τ^{α-1}E_{α,α}(-cτ^α), used by the solver.
    SingleEalpha,
    /// E_{α,1} convolved with r_α(τ) = τ^{α-2}/Γ(α-1), oracle only.
    NestedRalpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraKernel {
    pub alpha: f64,
    pub form: KernelForm,
}

impl VolterraKernel {
    /// r_α(τ) = τ^{α-2}/Γ(α-1).
    pub fn r_alpha(&self, tau: f64) -> f64 {
        tau.powf(self.alpha - 2.0) * crate::mlf::recip_gamma(self.alpha - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiag {
    pub n: usize,
    pub t: f64,
    pub sweeps: usize,
    /// Largest ‖Λu - Λv‖/‖u - v‖ seen among this step's sweeps.
    pub contraction: Option<f64>,
    /// Relative size of the final Picard update.
    pub final_update: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    NonContraction,
    Overflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub timegrid: TimeGrid,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    pub diagnostics: Vec<StepDiag>,
    pub status: RunStatus,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn max_contraction(&self) -> Option<f64> {
        self.diagnostics.iter().filter_map(|d| d.contraction).reduce(f64::max)
    }

    pub fn max_sweeps(&self) -> usize {
        self.diagnostics.iter().map(|d| d.sweeps).max().unwrap_or(0)
    }

    /// Saved snapshots with t > 0, as needed by the X_β norm.
    pub fn positive_times(&self) -> (Vec<f64>, Vec<Field>) {
        self.times.iter().zip(&self.fields).filter(|(t, _)| **t > 0.0).map(|(t, f)| (*t, f.clone())).unzip()
    }
}

/// κ₂|u|^{ρ-1}u + κ₁|∇u|^q pointwise with spectral gradient, then dealiased.
pub fn nonlinearity(u: &Field, spec: &ProblemSpec) -> Result<Field, SolveError> {
    let tr = Transformer::new(u.grid);
    let uh = tr.forward(u)?;
    let mut ws = Workspace::new(u.grid);
    let fh = ws.forcing(&tr, &uh.coeffs, spec);
    let mask = dealias_mask(&u.grid);
    let mut sf = SpectralField { grid: u.grid, coeffs: fh };
    for (c, keep) in sf.coeffs.iter_mut().zip(mask) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    Ok(tr.inverse(&sf)?)
}

/// Same pointwise law without the dealiasing step.
pub fn nonlinearity_pointwise(u: f64, grad_sq: f64, spec: &ProblemSpec) -> f64 {
    let q = spec.q();
    let mut f = 0.0;
    if spec.kappa2 != 0.0 {
        f += spec.kappa2 * u.abs().powf(spec.rho - 1.0) * u;
    }
    if spec.kappa1 != 0.0 {
        f += spec.kappa1 * grad_sq.powf(0.5 * q);
    }
    f
}

struct Workspace {
    buf: Vec<Complex64>,
    grads: Vec<Vec<Complex64>>,
}

impl Workspace {
    fn new(grid: Grid) -> Self {
        Workspace { buf: vec![Complex64::new(0.0, 0.0); grid.len()], grads: vec![Vec::new(); grid.dim] }
    }

    /// F̂ (all modes, not yet dealiased) of the state with coefficients `uh`.
    fn forcing(&mut self, tr: &Transformer, uh: &[Complex64], spec: &ProblemSpec) -> Vec<Complex64> {
        let grid = tr.grid();
        self.buf.copy_from_slice(uh);
        tr.inverse_complex(&mut self.buf);
        let need_grad = spec.kappa1 != 0.0;
        if need_grad {
            let sf = SpectralField { grid, coeffs: uh.to_vec() };
            for (slot, g) in self.grads.iter_mut().zip(gradient_spectral(&sf)) {
                let mut c = g.coeffs;
                tr.inverse_complex(&mut c);
                *slot = c;
            }
        }
        let mut out: Vec<Complex64> = (0..grid.len())
            .map(|k| {
                let g2 = if need_grad { self.grads.iter().map(|g| g[k].re * g[k].re).sum() } else { 0.0 };
                Complex64::new(nonlinearity_pointwise(self.buf[k].re, g2, spec), 0.0)
            })
            .collect();
        tr.forward_complex(&mut out);
        out
    }
}

/// G_{α,1}(t)φ + G_{α,2}(t)ψ.
pub fn linear_part(data: &InitialData, alpha: f64, t: f64) -> Result<Field, SolveError> {
    let tr = Transformer::new(data.grid());
    let sym = Symbols::new(alpha)?;
    let lin = LinearPart::new(&tr, data, &sym)?;
    Ok(tr.inverse(&SpectralField { grid: data.grid(), coeffs: lin.at(t)? })?)
}

struct LinearPart<'a> {
    phi: Vec<Complex64>,
    psi: Vec<Complex64>,
    psi_zero: bool,
    shell_of: Vec<u32>,
    shell_c: Vec<f64>,
    sym: &'a Symbols,
}

impl<'a> LinearPart<'a> {
    fn new(tr: &Transformer, data: &InitialData, sym: &'a Symbols) -> Result<Self, SolveError> {
        let grid = tr.grid();
        let shells = grid.shells();
        let shell_c = shells.xi_sq(&grid).iter().map(|x| 4.0 * PI * PI * x).collect();
        Ok(LinearPart {
            phi: tr.forward(&data.phi)?.coeffs,
            psi: tr.forward(&data.psi)?.coeffs,
            psi_zero: data.psi.values.iter().all(|&v| v == 0.0),
            shell_of: shells.of,
            shell_c,
            sym,
        })
    }

    fn at(&self, t: f64) -> Result<Vec<Complex64>, SolveError> {
        let e1: Vec<f64> = self.shell_c.iter().map(|&c| self.sym.eval(MultIndex::One, t, c)).collect::<Result<_, _>>()?;
        let e2: Vec<f64> = if self.psi_zero {
            vec![0.0; self.shell_c.len()]
        } else {
            self.shell_c.iter().map(|&c| self.sym.eval(MultIndex::Two, t, c)).collect::<Result<_, _>>()?
        };
        Ok((0..self.phi.len())
            .map(|k| {
                let s = self.shell_of[k] as usize;
                self.phi[k] * e1[s] + self.psi[k] * e2[s]
            })
            .collect())
    }
}

/// Product-integration weights w_{n,j} = ∫_{t_j}^{t_{j+1}} K_c(t_n - s) ds, j = 0..n-1,
/// for one mode; the forcing is frozen per panel, the kernel integrated exactly.
///
/// With P(τ) = τ^α E_{α,α+1}(-cτ^α) = (1 - E_{α,1}(-cτ^α))/c one has
/// w_{n,j} = P(t_n - t_j) - P(t_n - t_{j+1}). Stiff modes (cΔ^α ≫ 1) keep
/// their quasi-static response 1/c, which kernel sampling would lose.
pub fn memory_weights(alpha: f64, c_mode: f64, timegrid: &TimeGrid, n: usize) -> Result<Vec<f64>, SolveError> {
    timegrid.validate()?;
    if n < 1 || n > timegrid.n_steps {
        return Err(SolveError::Domain(format!("step index {n} outside 1..={}", timegrid.n_steps)));
    }
    let sym = Symbols::new(alpha)?;
    let t = timegrid.nodes();
    let mut w = Vec::with_capacity(n);
    for j in 0..n {
        w.push(panel_weight(&sym, c_mode, t[n], t[j], t[j + 1])?);
    }
    Ok(w)
}

fn panel_weight(sym: &Symbols, c: f64, tn: f64, a: f64, b: f64) -> Result<f64, MlError> {
    Ok(kernel_primitive(sym, c, tn - a)? - kernel_primitive(sym, c, tn - b)?)
}

/// P(τ) = ∫₀^τ K_c; the series branch avoids the cancellation in 1 - E_{α,1}.
fn kernel_primitive(sym: &Symbols, c: f64, tau: f64) -> Result<f64, MlError> {
    if tau <= 0.0 {
        return Ok(0.0);
    }
    let al = sym.alpha();
    let ta = tau.powf(al);
    let x = c * ta;
    if x < 0.5 {
        let mut sum = 0.0;
        let mut pw = 1.0;
        for k in 0..60 {
            let term = pw * crate::mlf::recip_gamma(al * k as f64 + al + 1.0);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            pw *= -x;
        }
        return Ok(ta * sum);
    }
    Ok((1.0 - sym.eval(MultIndex::One, tau, c)?) / c)
}

/// Weights per memory shell; cached by lag on uniform grids.
struct Weights<'a> {
    sym: &'a Symbols,
    times: Vec<f64>,
    shell_c: Vec<f64>,
    uniform: bool,
    by_lag: Vec<Vec<f64>>,
}

impl<'a> Weights<'a> {
    fn new(sym: &'a Symbols, times: Vec<f64>, shell_c: Vec<f64>, uniform: bool) -> Self {
        Weights { sym, times, shell_c, uniform, by_lag: vec![Vec::new()] }
    }

    /// Weights of panels j = 0..n-1 at step n, one vector per panel.
    fn step(&mut self, n: usize) -> Result<Vec<Vec<f64>>, MlError> {
        if self.uniform {
            while self.by_lag.len() <= n {
                let lag = self.by_lag.len();
                let dt = self.times[1] - self.times[0];
                let tn = lag as f64 * dt;
                let w = self
                    .shell_c
                    .iter()
                    .map(|&c| panel_weight(self.sym, c, tn, 0.0, dt))
                    .collect::<Result<Vec<_>, _>>()?;
                self.by_lag.push(w);
            }
            return Ok((0..n).map(|j| self.by_lag[n - j].clone()).collect());
        }
        let t = &self.times;
        (0..n)
            .map(|j| self.shell_c.iter().map(|&c| panel_weight(self.sym, c, t[n], t[j], t[j + 1])).collect())
            .collect()
    }
}

/// What the marching engine needs to know about a system.
trait System {
    /// For each memory slot: state index, mirrored state index (if distinct), shell id.
    fn slots(&self) -> &[(usize, Option<usize>, u32)];
    fn shell_c(&self) -> &[f64];
    fn has_memory(&self) -> bool;
    fn linear(&mut self, t: f64) -> Result<Vec<Complex64>, SolveError>;
    /// Nonlinearity of a state at time t, restricted to the memory slots.
    fn forcing(&mut self, t: f64, state: &[Complex64]) -> Vec<Complex64>;
}

fn sq_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

struct StepInfo {
    sweeps: usize,
    contraction: Option<f64>,
    final_update: f64,
}

enum Stop {
    NonContraction { step: usize, t: f64 },
    Overflow { step: usize, t: f64, max_abs: f64 },
    Failed(SolveError),
}

impl<E: Into<SolveError>> From<E> for Stop {
    fn from(e: E) -> Self {
        Stop::Failed(e.into())
    }
}

/// Time-march a system; `on_step` sees every accepted state (n = 0 included).
fn march<S: System, F>(sys: &mut S, sym: &Symbols, times: &[f64], uniform: bool, cfg: &PicardConfig, mut on_step: F) -> Result<(), Stop>
where
    F: FnMut(usize, f64, &[Complex64], StepInfo) -> Result<(), Stop>,
{
    let slots = sys.slots().to_vec();
    let nm = slots.len();
    let mut weights = Weights::new(sym, times.to_vec(), sys.shell_c().to_vec(), uniform);
    let mut prev = sys.linear(times[0])?;
    on_step(0, times[0], &prev, StepInfo { sweeps: 0, contraction: None, final_update: 0.0 })?;
    let memory = sys.has_memory();
    let mut hist: Vec<Vec<Complex64>> = Vec::new();
    for n in 1..times.len() {
        let t = times[n];
        let lin = sys.linear(t)?;
        if !memory {
            on_step(n, t, &lin, StepInfo { sweeps: 0, contraction: None, final_update: 0.0 })?;
            prev = lin;
            continue;
        }
        let w = weights.step(n)?;
        // settled panels j < n-1
        let mut acc = vec![Complex64::new(0.0, 0.0); nm];
        acc.par_chunks_mut(2048).enumerate().for_each(|(ci, chunk)| {
            let base = ci * 2048;
            for (j, hj) in hist.iter().enumerate() {
                let wj = &w[j];
                for (i, a) in chunk.iter_mut().enumerate() {
                    let s = base + i;
                    *a += hj[s] * wj[slots[s].2 as usize];
                }
            }
        });
        let w_last = &w[n - 1];
        let t_mid = 0.5 * (times[n - 1] + t);
        let mut guess = prev.clone();
        let mut last_delta: Option<f64> = None;
        let mut bad = 0;
        let mut worst: Option<f64> = None;
        let mut kept = Vec::new();
        let mut info = StepInfo { sweeps: 0, contraction: None, final_update: f64::INFINITY };
        for k in 1..=cfg.max_sweeps {
            let f_last = match cfg.panel_rule {
                PanelRule::Midpoint => {
                    let mid: Vec<Complex64> = prev.iter().zip(&guess).map(|(a, b)| 0.5 * (a + b)).collect();
                    sys.forcing(t_mid, &mid)
                }
                PanelRule::Right => sys.forcing(t, &guess),
            };
            let mut new = lin.clone();
            for (i, &(idx, mirror, shell)) in slots.iter().enumerate() {
                let m = acc[i] + f_last[i] * w_last[shell as usize];
                new[idx] += m;
                if let Some(mi) = mirror {
                    new[mi] += m.conj();
                }
            }
            let delta = sq_dist(&new, &guess).sqrt();
            let norm = new.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if let Some(d0) = last_delta {
                if d0 > 0.0 {
                    let ratio = delta / d0;
                    worst = Some(worst.map_or(ratio, |w: f64| w.max(ratio)));
                    if ratio >= 1.0 && delta > 1e-14 * norm {
                        bad += 1;
                    } else {
                        bad = 0;
                    }
                }
            }
            last_delta = Some(delta);
            guess = new;
            kept = f_last;
            info = StepInfo { sweeps: k, contraction: worst, final_update: if norm > 0.0 { delta / norm } else { delta } };
            if bad >= 3 {
                on_step(n, t, &guess, info)?;
                return Err(Stop::NonContraction { step: n, t });
            }
            if delta <= cfg.sweep_tol * norm || norm == 0.0 {
                break;
            }
        }
        on_step(n, t, &guess, info)?;
        hist.push(kept);
        prev = guess;
    }
    Ok(())
}

struct PdeSystem<'a> {
    tr: &'a Transformer,
    spec: ProblemSpec,
    lin: LinearPart<'a>,
    slots: Vec<(usize, Option<usize>, u32)>,
    mem_c: Vec<f64>,
    ws: Workspace,
}

impl<'a> PdeSystem<'a> {
    fn new(tr: &'a Transformer, data: &InitialData, spec: ProblemSpec, sym: &'a Symbols) -> Result<Self, SolveError> {
        let grid = tr.grid();
        let lin = LinearPart::new(tr, data, sym)?;
        let mask = dealias_mask(&grid);
        // memory shells: compact ids over the dealiased modes only
        let mut remap = vec![u32::MAX; lin.shell_c.len()];
        let mut mem_c = Vec::new();
        let mut slots = Vec::new();
        for k in 0..grid.len() {
            let mk = grid.mirror(k);
            if !mask[k] || mk < k {
                continue;
            }
            let s = lin.shell_of[k] as usize;
            if remap[s] == u32::MAX {
                remap[s] = mem_c.len() as u32;
                mem_c.push(lin.shell_c[s]);
            }
            slots.push((k, (mk != k).then_some(mk), remap[s]));
        }
        Ok(PdeSystem { tr, spec, lin, slots, mem_c, ws: Workspace::new(grid) })
    }
}

impl System for PdeSystem<'_> {
    fn slots(&self) -> &[(usize, Option<usize>, u32)] {
        &self.slots
    }
    fn shell_c(&self) -> &[f64] {
        &self.mem_c
    }
    fn has_memory(&self) -> bool {
        !self.spec.is_linear()
    }
    fn linear(&mut self, t: f64) -> Result<Vec<Complex64>, SolveError> {
        self.lin.at(t)
    }
    fn forcing(&mut self, _t: f64, state: &[Complex64]) -> Vec<Complex64> {
        let f = self.ws.forcing(self.tr, state, &self.spec);
        self.slots.iter().map(|&(k, _, _)| f[k]).collect()
    }
}

/// Solve the mild formulation; see [`solve_observed`].
pub fn solve(data: &InitialData, spec: &ProblemSpec, timegrid: &TimeGrid, cfg: &PicardConfig) -> Result<Trajectory, SolveError> {
    solve_observed(data, spec, timegrid, cfg, |_, _, _| {})
}

/// Solve and call `observer(n, t_n, û_n)` on every accepted step.
///
/// NonContraction and Overflow come back as errors carrying the partial
/// trajectory with its diagnostics.
pub fn solve_observed<O>(
    data: &InitialData,
    spec: &ProblemSpec,
    timegrid: &TimeGrid,
    cfg: &PicardConfig,
    mut observer: O,
) -> Result<Trajectory, SolveError>
where
    O: FnMut(usize, f64, &SpectralField),
{
    spec.validate()?;
    timegrid.validate()?;
    cfg.validate()?;
    if timegrid.t_start != 0.0 {
        return Err(SolveError::Domain("the memory integral starts at t = 0; set t_start = 0".into()));
    }
    let grid = data.grid();
    let tr = Transformer::new(grid);
    let sym = Symbols::new(spec.alpha)?;
    let mut sys = PdeSystem::new(&tr, data, *spec, &sym)?;
    let times = timegrid.nodes();
    let mut traj = Trajectory {
        timegrid: *timegrid,
        times: Vec::new(),
        fields: Vec::new(),
        diagnostics: Vec::new(),
        status: RunStatus::Completed,
        warnings: Vec::new(),
    };
    if let Some(s) = cfg.smallness(spec) {
        if s >= 1.0 {
            traj.warnings.push(format!("smallness monitor 2^ρε^(ρ-1)+2^qε^(q-1) = {s:.3} ≥ 1"));
        }
    }
    let last = timegrid.n_steps;
    let vol = grid.length.powi(grid.dim as i32);
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    let res = march(&mut sys, &sym, &times, timegrid.is_uniform(), cfg, |n, t, state, info| {
        buf.copy_from_slice(state);
        tr.inverse_complex(&mut buf);
        let field = Field { grid, values: buf.iter().map(|c| c.re).collect() };
        let linf = field.max_abs();
        let l2 = (vol * state.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        traj.diagnostics.push(StepDiag {
            n,
            t,
            sweeps: info.sweeps,
            contraction: info.contraction,
            final_update: info.final_update,
            l2,
            linf,
        });
        observer(n, t, &SpectralField { grid, coeffs: state.to_vec() });
        let blown = !(linf <= cfg.overflow);
        if n % cfg.save_every == 0 || n == last || blown {
            traj.times.push(t);
            traj.fields.push(field);
        }
        if blown {
            return Err(Stop::Overflow { step: n, t, max_abs: linf });
        }
        Ok(())
    });
    match res {
        Ok(()) => Ok(traj),
        Err(Stop::NonContraction { step, t }) => {
            traj.status = RunStatus::NonContraction;
            Err(SolveError::NonContraction { step, t, partial: Box::new(traj) })
        }
        Err(Stop::Overflow { step, t, max_abs }) => {
            traj.status = RunStatus::Overflow;
            Err(SolveError::Overflow { step, t, max_abs, partial: Box::new(traj) })
        }
        Err(Stop::Failed(e)) => Err(e),
    }
}

/// Scalar mode ∂^α u = -λu + f(t, u) with the production marching scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRun {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub diagnostics: Vec<StepDiag>,
}

struct ScalarSystem<'a, F> {
    lambda: f64,
    u0: f64,
    u1: f64,
    f: F,
    sym: &'a Symbols,
    slots: [(usize, Option<usize>, u32); 1],
    c: [f64; 1],
}

impl<F: FnMut(f64, f64) -> f64> System for ScalarSystem<'_, F> {
    fn slots(&self) -> &[(usize, Option<usize>, u32)] {
        &self.slots
    }
    fn shell_c(&self) -> &[f64] {
        &self.c
    }
    fn has_memory(&self) -> bool {
        true
    }
    fn linear(&mut self, t: f64) -> Result<Vec<Complex64>, SolveError> {
        let v = self.sym.eval(MultIndex::One, t, self.lambda)? * self.u0 + self.sym.eval(MultIndex::Two, t, self.lambda)? * self.u1;
        Ok(vec![Complex64::new(v, 0.0)])
    }
    fn forcing(&mut self, t: f64, state: &[Complex64]) -> Vec<Complex64> {
        vec![Complex64::new((self.f)(t, state[0].re), 0.0)]
    }
}

pub fn solve_scalar<F: FnMut(f64, f64) -> f64>(
    alpha: f64,
    lambda: f64,
    u0: f64,
    u1: f64,
    forcing: F,
    timegrid: &TimeGrid,
    cfg: &PicardConfig,
) -> Result<ScalarRun, SolveError> {
    timegrid.validate()?;
    cfg.validate()?;
    if !(lambda >= 0.0) {
        return Err(SolveError::Domain(format!("λ must be ≥ 0, got {lambda}")));
    }
    let sym = Symbols::new(alpha)?;
    let mut sys = ScalarSystem { lambda, u0, u1, f: forcing, sym: &sym, slots: [(0, None, 0)], c: [lambda] };
    let times = timegrid.nodes();
    let mut run = ScalarRun { times: Vec::new(), values: Vec::new(), diagnostics: Vec::new() };
    let res = march(&mut sys, &sym, &times, timegrid.is_uniform(), cfg, |n, t, s, info| {
        run.times.push(t);
        run.values.push(s[0].re);
        run.diagnostics.push(StepDiag {
            n,
            t,
            sweeps: info.sweeps,
            contraction: info.contraction,
            final_update: info.final_update,
            l2: s[0].norm(),
            linf: s[0].norm(),
        });
        Ok(())
    });
    match res {
        Ok(()) => Ok(run),
        Err(Stop::NonContraction { step, t }) => Err(SolveError::NonContraction {
            step,
            t,
            partial: Box::new(Trajectory {
                timegrid: *timegrid,
                times: Vec::new(),
                fields: Vec::new(),
                diagnostics: run.diagnostics,
                status: RunStatus::NonContraction,
                warnings: Vec::new(),
            }),
        }),
        Err(Stop::Overflow { .. }) => unreachable!("scalar runs have no overflow check"),
        Err(Stop::Failed(e)) => Err(e),
    }
}
