//! Experiments on full PDE runs: self-similarity, decay, symmetry, stability
//! and profile collapse.

use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;

use super::{ls_slope, Curve, Report, VerifyError};
use crate::norms::{exponent_report, morrey_norm, xbeta_norm, BallFamily, ExponentSet, NormSpec};
use crate::solver::data::gaussian;
use crate::solver::{solve, solve_observed, FieldGen, FlowConfig, InitialData, PicardConfig, RunStatus, StepDiag};
use crate::spectral::{apply_g, eval_on_product_grid, gradient_spectral, Field, Grid, MultIndex, MultiplierSpec, SpectralField, Transformer};

/// A run that keeps the spectral state at chosen nodes only.
#[derive(Debug, Clone)]
pub struct FlowRun {
    pub times: Vec<f64>,
    pub captured: BTreeMap<usize, SpectralField>,
    pub diagnostics: Vec<StepDiag>,
    pub status: RunStatus,
    pub warnings: Vec<String>,
}

impl FlowRun {
    pub fn field(&self, n: usize) -> Option<Field> {
        let s = self.captured.get(&n)?;
        Transformer::new(s.grid).inverse(s).ok()
    }
}

/// Solve `cfg` and keep the states at `nodes`.
pub fn run_flow(cfg: &FlowConfig, nodes: &[usize]) -> Result<FlowRun, VerifyError> {
    let data = cfg.build_data()?;
    let mut captured = BTreeMap::new();
    let keep: std::collections::BTreeSet<usize> = nodes.iter().copied().collect();
    let picard = PicardConfig { save_every: cfg.timegrid.n_steps.max(1), ..cfg.picard };
    let traj = solve_observed(&data, &cfg.problem, &cfg.timegrid, &picard, |n, _, s| {
        if keep.contains(&n) {
            captured.insert(n, s.clone());
        }
    })?;
    Ok(FlowRun { times: cfg.timegrid.nodes(), captured, diagnostics: traj.diagnostics, status: traj.status, warnings: traj.warnings })
}

/// Probe region of the self-similarity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSpec {
    /// Inner radius in cells.
    pub inner_cells: usize,
    /// Outer radius as a fraction of L.
    pub outer_fraction: f64,
    /// Probe times as fractions of the horizon.
    pub window: (f64, f64),
    pub n_times: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec { inner_cells: 8, outer_fraction: 0.2, window: (1.0 / 3.0, 2.0 / 3.0), n_times: 4 }
    }
}

fn degree_of(g: &FieldGen) -> Option<f64> {
    match g {
        FieldGen::HomogeneousRadial { degree, .. } | FieldGen::HarmonicHomogeneous { degree, .. } => Some(*degree),
        _ => None,
    }
}

/// Data must be homogeneous of the self-similar degrees and q critical.
fn self_similar_gate(cfg: &FlowConfig) -> Result<(), String> {
    let p = &cfg.problem;
    let d = 2.0 / (p.rho - 1.0);
    match degree_of(&cfg.data.phi) {
        Some(x) if (x - d).abs() < 1e-9 => {}
        _ => return Err(format!("φ must be homogeneous of degree {d}")),
    }
    match (&cfg.data.psi, degree_of(&cfg.data.psi)) {
        (FieldGen::Zero, _) => {}
        (_, Some(x)) if (x - d - 2.0 / p.alpha).abs() < 1e-9 => {}
        _ => return Err(format!("ψ must be zero or homogeneous of degree {}", d + 2.0 / p.alpha)),
    }
    if !p.q_is_critical() {
        return Err(format!("q = {} is not 2ρ/(ρ+1)", p.q()));
    }
    Ok(())
}

/// Cubic Lagrange weights on four nodes.
fn lagrange4(ts: &[f64], t: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                w[i] *= (t - ts[j]) / (ts[i] - ts[j]);
            }
        }
    }
    w
}

/// Layout of a self-similarity probe: nodes, stencils and spatial sample set.
#[derive(Debug, Clone)]
struct ProbePlan {
    probe_nodes: Vec<usize>,
    /// (probe index, γ index) → first node of the 4-node stencil and target time
    stencils: Vec<Vec<(usize, f64)>>,
    /// node indices (one axis) inside the outer radius
    axis: Vec<usize>,
}

fn plan_probes(cfg: &FlowConfig, gammas: &[f64], probe: &ProbeSpec) -> Result<ProbePlan, VerifyError> {
    let tg = &cfg.timegrid;
    if !tg.is_uniform() || tg.n_steps < 8 {
        return Err(VerifyError::Precondition("self-similarity probes need a uniform grid of ≥ 8 steps".into()));
    }
    let g = cfg.grid;
    let (n, l) = (g.points_per_axis, g.length);
    let r_out = probe.outer_fraction * l;
    let gmax = gammas.iter().copied().fold(1.0, f64::max);
    if gammas.iter().any(|&x| !(x >= 1.0)) {
        return Err(VerifyError::Precondition("γ must be ≥ 1".into()));
    }
    if gmax * r_out > 0.4 * l {
        return Err(VerifyError::InsufficientOverlap(format!("γ·r_out = {} exceeds 0.4·L", gmax * r_out)));
    }
    let t_end = tg.t_end;
    let dt = t_end / tg.n_steps as f64;
    // middle-third window, clipped so every scaled time stays inside the run
    let hi = (probe.window.1 * t_end).min(t_end / gmax.powf(2.0 / cfg.problem.alpha));
    let lo = probe.window.0 * t_end;
    let cand: Vec<usize> = (0..=tg.n_steps).filter(|&k| k as f64 * dt >= lo - 1e-12 && k as f64 * dt <= hi + 1e-12).collect();
    if cand.is_empty() || probe.n_times == 0 {
        return Err(VerifyError::InsufficientOverlap(format!("no node in the probe window [{lo}, {hi}]")));
    }
    let m = probe.n_times.min(cand.len());
    let probe_nodes: Vec<usize> = (0..m)
        .map(|i| cand[if m == 1 { cand.len() / 2 } else { i * (cand.len() - 1) / (m - 1) }])
        .collect();
    let mut stencils = Vec::new();
    for &k in &probe_nodes {
        let t = k as f64 * dt;
        let row = gammas
            .iter()
            .map(|&gm| {
                let tau = gm.powf(2.0 / cfg.problem.alpha) * t;
                let i0 = ((tau / dt).floor() as isize - 1).clamp(0, tg.n_steps as isize - 3) as usize;
                (i0, tau)
            })
            .collect();
        stencils.push(row);
    }
    let axis: Vec<usize> = (0..n).filter(|&i| g.coord(i).abs() <= r_out + 1e-12).collect();
    Ok(ProbePlan { probe_nodes, stencils, axis })
}

fn plan_nodes(plan: &ProbePlan) -> Vec<usize> {
    let mut v: Vec<usize> = plan.probe_nodes.clone();
    for row in &plan.stencils {
        for &(i0, _) in row {
            v.extend(i0..i0 + 4);
        }
    }
    v.sort_unstable();
    v.dedup();
    v
}

/// R(γ) per γ on a finished run.
fn selfsim_residuals(cfg: &FlowConfig, run: &FlowRun, gammas: &[f64], probe: &ProbeSpec, plan: &ProbePlan) -> Result<Vec<f64>, VerifyError> {
    let g = cfg.grid;
    let h = g.h();
    let (r_in, r_out) = (probe.inner_cells as f64 * h, probe.outer_fraction * g.length);
    let xs: Vec<f64> = plan.axis.iter().map(|&i| g.coord(i)).collect();
    let m = xs.len();
    let mask: Vec<bool> = (0..m * m)
        .map(|k| {
            let r = xs[k / m].hypot(xs[k % m]);
            r >= r_in - 1e-12 && r <= r_out + 1e-12
        })
        .collect();
    let tr = Transformer::new(g);
    let at_nodes = |n: usize| -> Result<Vec<f64>, VerifyError> {
        let f = tr.inverse(&run.captured[&n])?;
        Ok(plan.axis.iter().flat_map(|&i| plan.axis.iter().map(move |&j| (i, j))).map(|(i, j)| f.values[g.flat([i, j])]).collect())
    };
    let expo = 2.0 / (cfg.problem.rho - 1.0);
    let mut out = vec![0.0f64; gammas.len()];
    for (pi, &k) in plan.probe_nodes.iter().enumerate() {
        let u = at_nodes(k)?;
        let scale = u.iter().zip(&mask).filter(|(_, &b)| b).map(|(v, _)| v.abs()).fold(0.0, f64::max);
        for (gi, &gm) in gammas.iter().enumerate() {
            let us = if gm == 1.0 {
                u.clone()
            } else {
                let (i0, tau) = plan.stencils[pi][gi];
                let ts: Vec<f64> = (i0..i0 + 4).map(|i| run.times[i]).collect();
                let w = lagrange4(&ts, tau);
                let sx: Vec<f64> = xs.iter().map(|x| gm * x).collect();
                let mut acc = vec![0.0; m * m];
                for (q, wq) in w.iter().enumerate() {
                    let v = eval_on_product_grid(&run.captured[&(i0 + q)], &sx, &sx);
                    for (a, b) in acc.iter_mut().zip(v) {
                        *a += wq * b;
                    }
                }
                acc
            };
            let f = gm.powf(expo);
            let r = u.iter().zip(&us).zip(&mask).filter(|(_, &b)| b).map(|((a, b), _)| (a - f * b).abs()).fold(0.0, f64::max);
            out[gi] = out[gi].max(if scale == 0.0 { 0.0 } else { r / scale });
        }
    }
    Ok(out)
}

/// Spectral states needed by self-similarity and profile extraction on one run.
pub struct SelfSimilarRun {
    pub run: FlowRun,
    plan: ProbePlan,
    pub gammas: Vec<f64>,
    pub probe: ProbeSpec,
}

/// Solve once, capturing what [`check_selfsimilarity`] needs.
pub fn run_selfsimilar(cfg: &FlowConfig, gammas: &[f64], probe: &ProbeSpec, extra_nodes: &[usize]) -> Result<SelfSimilarRun, VerifyError> {
    self_similar_gate(cfg).map_err(VerifyError::Precondition)?;
    let plan = plan_probes(cfg, gammas, probe)?;
    let mut nodes = plan_nodes(&plan);
    nodes.extend_from_slice(extra_nodes);
    let run = run_flow(cfg, &nodes)?;
    Ok(SelfSimilarRun { run, plan, gammas: gammas.to_vec(), probe: *probe })
}

impl SelfSimilarRun {
    pub fn probe_nodes(&self) -> &[usize] {
        &self.plan.probe_nodes
    }

    pub fn report(&self, cfg: &FlowConfig, tol: f64) -> Result<Report, VerifyError> {
        let mut r = Report::new(
            "check_selfsimilarity",
            json!({ "config": cfg, "gammas": self.gammas, "probe": self.probe, "probe_times": self.plan.probe_nodes.iter().map(|&k| self.run.times[k]).collect::<Vec<_>>() }),
            tol,
        );
        let res = selfsim_residuals(cfg, &self.run, &self.gammas, &self.probe, &self.plan)?;
        for (g, v) in self.gammas.iter().zip(&res) {
            r.metric(&format!("R_gamma_{g:.6}"), *v);
        }
        let worst = res.iter().copied().fold(0.0, f64::max);
        r.metric("R_max", worst);
        r.metric("max_sweeps", self.run.diagnostics.iter().map(|d| d.sweeps).max().unwrap_or(0) as f64);
        r.notes.extend(self.run.warnings.iter().cloned());
        r.note("validates the scaling structure; the exponent hypotheses of the existence theorem are not met (see check_feasibility)");
        Ok(r.decide(worst <= tol))
    }
}

/// R(γ) = max over the probe annulus and mid-horizon times of
/// |u(t,x) - γ^{2/(ρ-1)}u(γ^{2/α}t, γx)| / max|u(t,·)|.
pub fn check_selfsimilarity(cfg: &FlowConfig, gammas: &[f64], probe: &ProbeSpec, tol: f64) -> Result<Report, VerifyError> {
    run_selfsimilar(cfg, gammas, probe, &[])?.report(cfg, tol)
}

/// Decay-fit settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySpec {
    pub p: f64,
    pub r: f64,
    /// Fit window as fractions of the horizon.
    pub window: (f64, f64),
    /// Use every k-th node inside the window.
    pub every: usize,
    pub stride: usize,
    pub per_octave: usize,
}

impl Default for DecaySpec {
    fn default() -> Self {
        DecaySpec { p: 1.5, r: 3.0, window: (1.0 / 3.0, 1.0), every: 4, stride: 2, per_octave: 4 }
    }
}

impl DecaySpec {
    pub fn nodes(&self, n_steps: usize) -> Vec<usize> {
        let lo = (self.window.0 * n_steps as f64).ceil() as usize;
        let hi = (self.window.1 * n_steps as f64).floor() as usize;
        (lo.max(1)..=hi.min(n_steps)).filter(|k| (k - lo.max(1)).is_multiple_of(self.every.max(1))).collect()
    }
}

/// ‖u‖ and ‖∇u‖ in M_{r,μ} on every captured node of `nodes`.
pub fn decay_series(run: &FlowRun, nodes: &[usize], exps: &ExponentSet, spec: &DecaySpec) -> Result<Vec<[f64; 3]>, VerifyError> {
    let mut rows = Vec::new();
    for &k in nodes {
        let s = &run.captured[&k];
        let g = s.grid;
        let tr = Transformer::new(g);
        let balls = BallFamily::octaves(&g, spec.stride, spec.per_octave);
        let u = tr.inverse(s)?;
        let mut grad_sq = vec![0.0; g.len()];
        for c in gradient_spectral(s) {
            for (a, v) in grad_sq.iter_mut().zip(tr.inverse(&c)?.values) {
                *a += v * v;
            }
        }
        let grad = Field { grid: g, values: grad_sq.into_iter().map(f64::sqrt).collect() };
        let ns = NormSpec::new(exps.r, exps.mu, 0.0);
        rows.push([run.times[k], morrey_norm(&u, ns, &balls)?.norm, morrey_norm(&grad, ns, &balls)?.norm]);
    }
    Ok(rows)
}

/// Fit the slopes on an existing run; the run must have captured `spec.nodes`.
pub fn decay_report(cfg: &FlowConfig, run: &FlowRun, spec: &DecaySpec, tol: f64) -> Result<Report, VerifyError> {
    let p = &cfg.problem;
    let exps = exponent_report(p.alpha, p.rho, spec.p, spec.r, cfg.grid.dim)?;
    let mut r = Report::new("check_decay", json!({ "config": cfg, "decay": spec }), tol);
    let target_u = -exps.beta_decay;
    let target_g = -(exps.beta_decay + 0.5 * p.alpha);
    r.metric("target_slope_u", target_u);
    r.metric("target_slope_grad", target_g);
    let nodes = spec.nodes(cfg.timegrid.n_steps);
    if nodes.len() < 3 {
        return Err(VerifyError::WindowTooShort(nodes.len()));
    }
    let rows = decay_series(run, &nodes, &exps, spec)?;
    let lt: Vec<f64> = rows.iter().map(|w| w[0].ln()).collect();
    let su = ls_slope(&lt, &rows.iter().map(|w| w[1].ln()).collect::<Vec<_>>());
    let sg = ls_slope(&lt, &rows.iter().map(|w| w[2].ln()).collect::<Vec<_>>());
    r.metric("slope_u", su);
    r.metric("slope_grad", sg);
    r.metric("rel_dev_u", (su / target_u - 1.0).abs());
    r.metric("rel_dev_grad", (sg / target_g - 1.0).abs());
    r.curves.push(Curve { name: "decay".into(), columns: vec!["t".into(), "norm_u".into(), "norm_grad".into()], rows: rows.iter().map(|w| w.to_vec()).collect() });
    let ok = (su / target_u - 1.0).abs() <= tol && (sg / target_g - 1.0).abs() <= tol;
    Ok(r.decide(ok))
}

/// Least-squares decay slopes of ‖u(t)‖_{M_{r,μ}} and ‖∇u(t)‖_{M_{r,μ}}
/// against -β and -(β + α/2). Non-homogeneous data skips the fit.
pub fn check_decay(cfg: &FlowConfig, spec: &DecaySpec, tol: f64) -> Result<Report, VerifyError> {
    if let Err(why) = self_similar_gate(cfg) {
        let mut r = Report::new("check_decay", json!({ "config": cfg, "decay": spec }), tol);
        r.note(format!("slope test not applicable: {why}"));
        r.metric("skipped", 1.0);
        return Ok(r.decide(true));
    }
    let nodes = spec.nodes(cfg.timegrid.n_steps);
    if nodes.len() < 3 {
        return Err(VerifyError::WindowTooShort(nodes.len()));
    }
    let run = run_flow(cfg, &nodes)?;
    decay_report(cfg, &run, spec, tol)
}

/// Lattice symmetries of the square grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMap {
    Rot90,
    Rot180,
    Rot270,
    /// x₀ → -x₀
    ReflectX,
    /// x₁ → -x₁
    ReflectY,
    /// x₀ ↔ x₁
    ReflectDiag,
    /// (x₀, x₁) → (-x₁, -x₀)
    ReflectAnti,
}

impl GridMap {
    pub const DIHEDRAL: [GridMap; 7] = [
        GridMap::Rot90,
        GridMap::Rot180,
        GridMap::Rot270,
        GridMap::ReflectX,
        GridMap::ReflectY,
        GridMap::ReflectDiag,
        GridMap::ReflectAnti,
    ];

    /// (u∘T) on the node lattice.
    pub fn apply(&self, f: &Field) -> Field {
        let g = f.grid;
        let n = g.points_per_axis;
        let neg = |i: usize| (n - i) % n;
        let mut out = f.clone();
        for i in 0..n {
            for j in 0..n {
                let src = match self {
                    GridMap::Rot90 => [neg(j), i],
                    GridMap::Rot180 => [neg(i), neg(j)],
                    GridMap::Rot270 => [j, neg(i)],
                    GridMap::ReflectX => [neg(i), j],
                    GridMap::ReflectY => [i, neg(j)],
                    GridMap::ReflectDiag => [j, i],
                    GridMap::ReflectAnti => [neg(j), neg(i)],
                };
                out.values[g.flat([i, j])] = f.values[g.flat(src)];
            }
        }
        out
    }
}

/// max over saved times and maps of ‖u(t, T·) - s·u(t, ·)‖_∞ / ‖u(t)‖_∞ with
/// s = +1 (invariance) or -1 (antisymmetry). Pass iff ≤ tol.
pub fn check_symmetry(cfg: &FlowConfig, group: &[GridMap], parity: f64, tol: f64) -> Result<Report, VerifyError> {
    if cfg.grid.dim != 2 {
        return Err(VerifyError::Precondition("symmetry maps act on 2D grids".into()));
    }
    let mut r = Report::new("check_symmetry", json!({ "config": cfg, "group": group, "parity": parity }), tol);
    let data = cfg.build_data()?;
    let traj = solve(&data, &cfg.problem, &cfg.timegrid, &cfg.picard)?;
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        let scale = u.max_abs();
        let mut at_t = 0.0f64;
        for m in group {
            let d = m.apply(u).axpy(-parity, u).max_abs();
            at_t = at_t.max(if scale == 0.0 { 0.0 } else { d / scale });
        }
        rows.push(vec![*t, at_t]);
        worst = worst.max(at_t);
    }
    r.metric("residual", worst);
    r.curves.push(Curve { name: "residual".into(), columns: vec!["t".into(), "residual".into()], rows });
    Ok(r.decide(worst <= tol))
}

/// Which datum the stability check perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturb {
    /// δφ = s·φ
    Phi,
    /// δψ = s·exp(-|x|²/(L/16)²)
    Psi,
}

/// Discrete X_β norm over a trajectory's positive saved times.
fn xbeta_of(times: &[f64], fields: &[Field], exps: &ExponentSet, balls: &BallFamily) -> Result<f64, VerifyError> {
    let (t, f): (Vec<f64>, Vec<Field>) = times.iter().zip(fields).filter(|(t, _)| **t > 0.0).map(|(t, f)| (*t, f.clone())).unzip();
    Ok(xbeta_norm(&t, &f, exps, balls)?)
}

/// ‖u - ũ‖_{X_β} / ‖linear evolution of the perturbation‖_{X_β} for each scale.
/// Pass iff every ratio ≤ tol and the ratios lie within a factor 2 of each other.
pub fn check_stability(cfg: &FlowConfig, scales: &[f64], target: Perturb, p: f64, r_exp: f64, tol: f64) -> Result<Report, VerifyError> {
    let pr = &cfg.problem;
    let exps = exponent_report(pr.alpha, pr.rho, p, r_exp, cfg.grid.dim)?;
    let mut rep = Report::new("check_stability", json!({ "config": cfg, "scales": scales, "target": target, "p": p, "r": r_exp }), tol);
    let g = cfg.grid;
    let balls = BallFamily::dyadic(&g, 2);
    let data = cfg.build_data()?;
    let base = solve(&data, pr, &cfg.timegrid, &cfg.picard)?;
    let dir = match target {
        Perturb::Phi => data.phi.clone(),
        Perturb::Psi => gaussian(g, g.length / 16.0, 1.0),
    };
    let j = match target {
        Perturb::Phi => MultIndex::One,
        Perturb::Psi => MultIndex::Two,
    };
    let mut ratios = Vec::new();
    for &s in scales {
        let d = dir.scaled(s);
        let pert = match target {
            Perturb::Phi => InitialData { phi: data.phi.axpy(1.0, &d), ..data.clone() },
            Perturb::Psi => InitialData { psi: data.psi.axpy(1.0, &d), ..data.clone() },
        };
        let tr = solve(&pert, pr, &cfg.timegrid, &cfg.picard)?;
        let diff: Vec<Field> = tr.fields.iter().zip(&base.fields).map(|(a, b)| a.axpy(-1.0, b)).collect();
        let num = xbeta_of(&base.times, &diff, &exps, &balls)?;
        let lin: Vec<Field> = base
            .times
            .iter()
            .map(|&t| apply_g(MultiplierSpec { alpha: pr.alpha, j, t }, &d))
            .collect::<Result<_, _>>()?;
        let den = xbeta_of(&base.times, &lin, &exps, &balls)?;
        let ratio = if num == 0.0 && den == 0.0 {
            rep.note(format!("scale {s}: zero perturbation, exact match"));
            0.0
        } else {
            num / den
        };
        rep.metric(&format!("ratio_scale_{s:e}"), ratio);
        ratios.push(ratio);
    }
    let nz: Vec<f64> = ratios.iter().copied().filter(|&x| x > 0.0).collect();
    let spread = if nz.is_empty() { 1.0 } else { nz.iter().copied().fold(0.0, f64::max) / nz.iter().copied().fold(f64::MAX, f64::min) };
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    rep.metric("max_ratio", worst);
    rep.metric("ratio_spread", spread);
    Ok(rep.decide(worst <= tol && spread <= 2.0))
}

/// Rescaled radial profiles t^{α/(ρ-1)}u(t, x) against η = |x|/t^{α/2}
/// along the positive x₀ ray; collapse residual is the largest pairwise sup
/// difference on the common η window, relative to the largest profile value.
pub fn extract_profile(times: &[f64], fields: &[Field], alpha: f64, rho: f64, inner_cells: usize, outer_fraction: f64, tol: f64) -> Result<Report, VerifyError> {
    let mut r = Report::new(
        "extract_profile",
        json!({ "times": times, "alpha": alpha, "rho": rho, "inner_cells": inner_cells, "outer_fraction": outer_fraction }),
        tol,
    );
    if times.is_empty() || times.len() != fields.len() || times.iter().any(|&t| !(t > 0.0)) {
        return Err(VerifyError::Precondition("need matching positive times and fields".into()));
    }
    let g: Grid = fields[0].grid;
    let n = g.points_per_axis;
    let (r_in, r_out) = (inner_cells as f64 * g.h(), outer_fraction * g.length);
    let ray: Vec<usize> = (n / 2..n).filter(|&i| g.coord(i) >= r_in && g.coord(i) <= r_out).collect();
    let mid = if g.dim == 2 { n / 2 } else { 0 };
    let curves: Vec<(Vec<f64>, Vec<f64>)> = times
        .iter()
        .zip(fields)
        .map(|(&t, f)| {
            let s = t.powf(0.5 * alpha);
            let a = t.powf(alpha / (rho - 1.0));
            let idx = |i: usize| if g.dim == 2 { g.flat([i, mid]) } else { i };
            (ray.iter().map(|&i| g.coord(i) / s).collect(), ray.iter().map(|&i| a * f.values[idx(i)]).collect())
        })
        .collect();
    let lo = curves.iter().map(|c| c.0[0]).fold(f64::MIN, f64::max);
    let hi = curves.iter().map(|c| *c.0.last().unwrap()).fold(f64::MAX, f64::min);
    if !(hi > lo) {
        return Err(VerifyError::InsufficientOverlap(format!("rescaled rays share no η window ({lo}, {hi})")));
    }
    let etas: Vec<f64> = (0..64).map(|i| lo + (hi - lo) * i as f64 / 63.0).collect();
    let interp = |c: &(Vec<f64>, Vec<f64>), e: f64| {
        let k = c.0.partition_point(|&x| x <= e).clamp(1, c.0.len() - 1);
        let w = (e - c.0[k - 1]) / (c.0[k] - c.0[k - 1]);
        c.1[k - 1] * (1.0 - w) + c.1[k] * w
    };
    let table: Vec<Vec<f64>> = curves.iter().map(|c| etas.iter().map(|&e| interp(c, e)).collect()).collect();
    let scale = table.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for a in 0..table.len() {
        for b in a + 1..table.len() {
            let d = table[a].iter().zip(&table[b]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
    }
    let res = if scale == 0.0 { 0.0 } else { worst / scale };
    r.metric("collapse_residual", res);
    r.metric("eta_lo", lo);
    r.metric("eta_hi", hi);
    let mut columns = vec!["eta".to_string()];
    columns.extend(times.iter().map(|t| format!("t={t}")));
    let rows = etas.iter().enumerate().map(|(i, &e)| std::iter::once(e).chain(table.iter().map(|c| c[i])).collect()).collect();
    r.curves.push(Curve { name: "profile".into(), columns, rows });
    Ok(r.decide(res <= tol))
}
