//! Piecewise Chebyshev interpolant of x ↦ E_{α,β}(-x) on [0, ∞).
//!
//! Built once per (α, β) from [`ml_eval`](super::ml_eval) and used where the
//! solver needs millions of symbol values. Beyond `x_max` the residue part is
//! below 1e-17 and the algebraic asymptotic series takes over.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{ml_eval_neg, recip_gamma, MLParams, MlError};

/// Relative tail tolerance of tables handed out by [`shared_table`].
pub const SHARED_TOL: f64 = 1e-13;

const DEG: usize = 24;

#[derive(Debug, Clone)]
struct Seg {
    a: f64,
    b: f64,
    c: [f64; DEG + 1],
}

#[derive(Debug, Clone)]
pub struct MlTable {
    params: MLParams,
    x_max: f64,
    ends: Vec<f64>,
    segs: Vec<Seg>,
    asym: Vec<f64>,
}

fn cheb_fit<F: FnMut(f64) -> Result<f64, MlError>>(f: &mut F, a: f64, b: f64) -> Result<([f64; DEG + 1], f64), MlError> {
    let n1 = (DEG + 1) as f64;
    let mut vals = [0.0; DEG + 1];
    let mut vmax: f64 = 0.0;
    for (j, v) in vals.iter_mut().enumerate() {
        let u = (std::f64::consts::PI * (j as f64 + 0.5) / n1).cos();
        *v = f(0.5 * (a + b) + 0.5 * (b - a) * u)?;
        vmax = vmax.max(v.abs());
    }
    let mut c = [0.0; DEG + 1];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in vals.iter().enumerate() {
            s += v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n1).cos();
        }
        *ck = 2.0 * s / n1;
    }
    c[0] *= 0.5;
    Ok((c, vmax))
}

fn clenshaw(c: &[f64; DEG + 1], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + c[0]
}

impl MlTable {
    /// `tol` is the relative size of the discarded Chebyshev tail per piece.
    /// Values below about 1e-13 chase the noise floor of `ml_eval` and are
    /// stopped by the depth cap.
    pub fn build(params: MLParams, tol: f64) -> Result<Self, MlError> {
        let (a, b) = (params.alpha, params.beta_ml);
        if !(params.in_decomposition_domain() && a <= 1.99) {
            return Err(MlError::Domain(format!("table needs 1<α≤1.99, 1≤β≤2; got α={a}, β={b}")));
        }
        // residue part exp(x^{1/α}cos(π/α)) negligible beyond x_max
        let damp = (std::f64::consts::PI / a).cos().abs();
        let mut x_max: f64 = 200.0;
        while x_max.powf(1.0 / a) * damp < 40.0 + 3.0 * x_max.ln() {
            x_max *= 1.25;
        }
        let mut f = |x: f64| ml_eval_neg(params, x);
        let mut stack: Vec<(f64, f64, u32)> = Vec::new();
        let mut lo = 1.0;
        let mut octaves = Vec::new();
        while lo < x_max {
            let hi = (2.0 * lo).min(x_max);
            octaves.push((lo, hi, 0));
            lo = hi;
        }
        octaves.push((0.0, 1.0, 0));
        stack.extend(octaves);
        let mut segs = Vec::new();
        while let Some((sa, sb, depth)) = stack.pop() {
            let (c, vmax) = cheb_fit(&mut f, sa, sb)?;
            let tail = c[DEG - 2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if tail <= tol * vmax || tail < 1e-18 || depth >= 16 {
                segs.push(Seg { a: sa, b: sb, c });
            } else {
                let mid = 0.5 * (sa + sb);
                stack.push((sa, mid, depth + 1));
                stack.push((mid, sb, depth + 1));
            }
        }
        segs.sort_by(|p, q| p.a.total_cmp(&q.a));
        let ends = segs.iter().map(|s| s.b).collect();
        // E(-x) ~ Σ_{k≥1} (-1)^{k+1} x^{-k} / Γ(β - αk)
        let mut asym = Vec::new();
        // truncate on the envelope |1/Γ(-y)| ≤ Γ(y+1)/π, since single terms
        // vanish near poles of Γ
        let mut prev = f64::INFINITY;
        for k in 1..80 {
            let y = a * k as f64 - b;
            let env = if y > -1.0 {
                (statrs::function::gamma::ln_gamma(y + 1.0) - k as f64 * x_max.ln()).exp() / std::f64::consts::PI
            } else {
                x_max.powi(-k)
            };
            if env > prev {
                break;
            }
            prev = env;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            asym.push(sign * recip_gamma(b - a * k as f64));
            if env < 1e-22 {
                break;
            }
        }
        Ok(MlTable { params, x_max, ends, segs, asym })
    }

    pub fn params(&self) -> MLParams {
        self.params
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn pieces(&self) -> usize {
        self.segs.len()
    }

    /// E_{α,β}(-x) for x ≥ 0.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        if x >= self.x_max {
            let inv = 1.0 / x;
            let mut acc = 0.0;
            for &c in self.asym.iter().rev() {
                acc = (acc + c) * inv;
            }
            return acc;
        }
        let i = self.ends.partition_point(|&e| e <= x).min(self.segs.len() - 1);
        let s = &self.segs[i];
        let u = (2.0 * x - s.a - s.b) / (s.b - s.a);
        clenshaw(&s.c, u)
    }
}

/// Process-wide table for (α, β), built on first use.
pub fn shared_table(params: MLParams) -> Result<Arc<MlTable>, MlError> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Arc<MlTable>>>> = OnceLock::new();
    let key = (params.alpha.to_bits(), params.beta_ml.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    // build outside the lock; a racing duplicate build is harmless
    let t = Arc::new(MlTable::build(params, SHARED_TOL)?);
    Ok(cache.lock().unwrap().entry(key).or_insert(t).clone())
}
