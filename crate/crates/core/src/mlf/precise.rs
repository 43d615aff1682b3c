//! Extended-precision binary floating point, just enough for the
//! Mittag-Leffler power series: add/mul/div, ln, exp, reciprocal Gamma.
//!
//! Values are `m·2^e` with a big-integer mantissa; every operation rounds
//! the mantissa to the working precision of a [`Ctx`]. This is the slow
//! reference path; nothing here is tuned.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct BigFloat {
    m: BigInt,
    e: i64,
}

fn ldexp(x: f64, mut e: i64) -> f64 {
    let mut v = x;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { m: BigInt::zero(), e: 0 }
    }

    pub fn from_i64(v: i64) -> Self {
        BigFloat { m: BigInt::from(v), e: 0 }
    }

    /// Exact conversion.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "BigFloat::from_f64 on {x}");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let ex = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if ex == 0 { (frac, -1074) } else { (frac | (1u64 << 52), ex - 1075) };
        let m = BigInt::from(mant);
        BigFloat { m: if neg { -m } else { m }, e }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    /// Position of the leading bit: |x| ∈ [2^(top-1), 2^top).
    pub fn top(&self) -> i64 {
        if self.m.is_zero() {
            i64::MIN / 4
        } else {
            self.e + self.m.bits() as i64
        }
    }

    pub fn round(mut self, prec: u64) -> Self {
        let b = self.m.bits();
        if b > prec {
            let sh = b - prec;
            let neg = self.m.is_negative();
            let mut mag = self.m.abs();
            mag += BigInt::one() << (sh - 1);
            mag >>= sh;
            self.m = if neg { -mag } else { mag };
            self.e += sh as i64;
        }
        self
    }

    pub fn to_f64(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        let r = if self.m.bits() > 64 { self.clone().round(64) } else { self.clone() };
        let mf = r.m.to_i128().expect("64-bit mantissa") as f64;
        ldexp(mf, r.e)
    }

    pub fn neg(&self) -> Self {
        BigFloat { m: -self.m.clone(), e: self.e }
    }

    pub fn ldexp(&self, k: i64) -> Self {
        BigFloat { m: self.m.clone(), e: self.e + k }
    }

    pub fn add(&self, o: &Self, prec: u64) -> Self {
        if self.m.is_zero() {
            return o.clone().round(prec);
        }
        if o.m.is_zero() {
            return self.clone().round(prec);
        }
        let top = self.top().max(o.top());
        let cut = top - prec as i64 - 8;
        if self.top() < cut {
            return o.clone().round(prec);
        }
        if o.top() < cut {
            return self.clone().round(prec);
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let sh = (hi.e - lo.e) as u64;
        let m = (&hi.m << sh) + &lo.m;
        BigFloat { m, e: lo.e }.round(prec)
    }

    pub fn sub(&self, o: &Self, prec: u64) -> Self {
        self.add(&o.neg(), prec)
    }

    pub fn mul(&self, o: &Self, prec: u64) -> Self {
        BigFloat { m: &self.m * &o.m, e: self.e + o.e }.round(prec)
    }

    pub fn mul_i64(&self, k: i64, prec: u64) -> Self {
        BigFloat { m: &self.m * k, e: self.e }.round(prec)
    }

    pub fn div(&self, o: &Self, prec: u64) -> Self {
        assert!(!o.m.is_zero(), "BigFloat division by zero");
        let s = (prec as i64 + 2 + o.m.bits() as i64 - self.m.bits() as i64).max(0) as u64;
        let q = (&self.m << s) / &o.m;
        BigFloat { m: q, e: self.e - o.e - s as i64 }.round(prec)
    }

    pub fn div_i64(&self, k: i64, prec: u64) -> Self {
        self.div(&BigFloat::from_i64(k), prec)
    }
}

// fixed-point atanh(1/n)·2^bits and atan(1/n)·2^bits
fn arc_inv_fixed(n: u64, bits: u64, alternate: bool) -> BigInt {
    let mut pow = (BigInt::one() << bits) / n;
    let n2 = BigInt::from(n) * n;
    let mut sum = pow.clone();
    let mut k: u64 = 1;
    loop {
        pow /= &n2;
        if pow.is_zero() {
            break;
        }
        let term = &pow / (2 * k + 1);
        if alternate && k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

fn bernoulli_even(count: usize) -> Vec<BigRational> {
    // B_0..B_{2count} via Σ_{k<m+1} C(m+1,k) B_k = 0
    let n = 2 * count;
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (k, bk) in b.iter().enumerate() {
            if !bk.is_zero() {
                acc += BigRational::from_integer(binom.clone()) * bk;
            }
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    (1..=count).map(|j| b[2 * j].clone()).collect()
}

fn rational_to_big(r: &BigRational, prec: u64) -> BigFloat {
    let num = BigFloat { m: r.numer().clone(), e: 0 };
    let den = BigFloat { m: r.denom().clone(), e: 0 };
    num.div(&den, prec)
}

/// Working context: precision plus the constants every evaluation needs.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub prec: u64,
    wp: u64,
    ln2: BigFloat,
    half_ln_2pi: BigFloat,
    stirling: Vec<BigFloat>,
    x_min: f64,
}

impl Ctx {
    pub fn new(prec: u64) -> Self {
        let prec = prec.max(64);
        let wp = prec + 40;
        let fb = wp + 24;
        let ln2 = BigFloat { m: arc_inv_fixed(3, fb, false) * 2, e: -(fb as i64) }.round(wp);
        let pi = BigFloat {
            m: arc_inv_fixed(5, fb, true) * 16 - arc_inv_fixed(239, fb, true) * 4,
            e: -(fb as i64),
        }
        .round(wp);
        // Stirling coefficients B_2j / (2j(2j-1))
        let count = (wp / 8 + 10) as usize;
        let stirling = bernoulli_even(count)
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let j = (i + 1) as i64;
                rational_to_big(b, wp).div_i64(2 * j * (2 * j - 1), wp)
            })
            .collect();
        let mut ctx = Ctx {
            prec,
            wp,
            ln2,
            half_ln_2pi: BigFloat::zero(),
            stirling,
            x_min: 0.3 * wp as f64 + 16.0,
        };
        let two_pi = pi.ldexp(1);
        ctx.half_ln_2pi = ctx.ln(&two_pi).ldexp(-1);
        ctx
    }

    pub fn ln(&self, x: &BigFloat) -> BigFloat {
        assert!(!x.is_zero() && !x.is_negative(), "ln of non-positive value");
        let wp = self.wp;
        let b = x.m.bits() as i64;
        let mut k = x.e + b;
        let mut y = BigFloat { m: x.m.clone(), e: -b }; // [0.5, 1)
        if y.to_f64() < std::f64::consts::FRAC_1_SQRT_2 {
            y = y.ldexp(1);
            k -= 1;
        }
        let one = BigFloat::from_i64(1);
        let s = y.sub(&one, wp).div(&y.add(&one, wp), wp);
        let s2 = s.mul(&s, wp);
        let mut sum = s.clone();
        let mut p = s;
        let mut j: i64 = 1;
        loop {
            p = p.mul(&s2, wp);
            if p.is_zero() {
                break;
            }
            let term = p.div_i64(2 * j + 1, wp);
            if term.top() < sum.top() - wp as i64 - 4 {
                break;
            }
            sum = sum.add(&term, wp);
            j += 1;
        }
        sum.ldexp(1).add(&self.ln2.mul_i64(k, wp), wp)
    }

    pub fn exp(&self, x: &BigFloat) -> BigFloat {
        let xf = x.to_f64();
        assert!(xf.abs() < 1e7, "exp argument out of range: {xf}");
        let n = (xf / std::f64::consts::LN_2).round() as i64;
        let s: i64 = 12;
        let wp = self.wp + s as u64 + 16;
        let r = x.sub(&self.ln2.mul_i64(n, wp + 32), wp).ldexp(-s);
        let mut sum = BigFloat::from_i64(1);
        let mut term = BigFloat::from_i64(1);
        let mut k: i64 = 1;
        loop {
            term = term.mul(&r, wp).div_i64(k, wp);
            if term.is_zero() || term.top() < -(wp as i64) - 4 {
                break;
            }
            sum = sum.add(&term, wp);
            k += 1;
        }
        for _ in 0..s {
            sum = sum.mul(&sum, wp);
        }
        sum.ldexp(n).round(self.wp)
    }

    fn ln_gamma_large(&self, x: &BigFloat) -> BigFloat {
        let wp = self.wp;
        let half = BigFloat::from_f64(0.5);
        let lnx = self.ln(x);
        let mut acc = x.sub(&half, wp).mul(&lnx, wp).sub(x, wp).add(&self.half_ln_2pi, wp);
        let x2 = x.mul(x, wp);
        let mut xp = x.clone(); // x^(2j-1)
        let mut prev_top = i64::MAX;
        for c in &self.stirling {
            let term = c.div(&xp, wp);
            let t = term.top();
            if t < -(wp as i64) - 8 {
                return acc;
            }
            assert!(t < prev_top, "Stirling series diverging; x too small");
            prev_top = t;
            acc = acc.add(&term, wp);
            xp = xp.mul(&x2, wp);
        }
        panic!("Stirling series not converged with {} terms", self.stirling.len());
    }

    /// 1/Γ(x) for x > 0.
    pub fn recip_gamma(&self, x: &BigFloat) -> BigFloat {
        let wp = self.wp;
        let xf = x.to_f64();
        assert!(xf > 0.0, "recip_gamma needs x > 0");
        let shift = if xf < self.x_min { (self.x_min - xf).ceil() as i64 } else { 0 };
        let mut prod = BigFloat::from_i64(1);
        for i in 0..shift {
            prod = prod.mul(&x.add(&BigFloat::from_i64(i), wp), wp);
        }
        let xs = x.add(&BigFloat::from_i64(shift), wp);
        prod.mul(&self.exp(&self.ln_gamma_large(&xs).neg()), wp)
    }
}

/// Power series for E_{α,β}(z) in extended precision, with the reciprocal
/// Gamma coefficients cached for repeated evaluation at one (α, β).
#[derive(Clone, Debug)]
pub struct PreciseMl {
    alpha: f64,
    beta: f64,
    ctx: Ctx,
    coeffs: Vec<BigFloat>,
}

fn log_term(alpha: f64, beta: f64, k: usize, ln_abs_z: f64) -> f64 {
    k as f64 * ln_abs_z - statrs::function::gamma::ln_gamma(alpha * k as f64 + beta)
}

/// log2 of the largest series term magnitude at |z|.
pub fn log2_max_term(alpha: f64, beta: f64, abs_z: f64) -> f64 {
    if abs_z == 0.0 {
        return 0.0;
    }
    let lz = abs_z.ln();
    let mut best = f64::NEG_INFINITY;
    let mut k = 0;
    loop {
        let t = log_term(alpha, beta, k, lz);
        if t > best {
            best = t;
        } else if k > 2 && t < best - 50.0 {
            break;
        }
        k += 1;
    }
    (best / std::f64::consts::LN_2).max(0.0)
}

impl PreciseMl {
    pub fn new(alpha: f64, beta: f64, prec: u64) -> Self {
        assert!(alpha > 0.0 && beta > 0.0);
        PreciseMl { alpha, beta, ctx: Ctx::new(prec), coeffs: Vec::new() }
    }

    /// Precision sized so that |z| ≤ abs_z_max keeps `bits` significant bits
    /// of any result not smaller than 2^-floor_bits.
    pub fn for_range(alpha: f64, beta: f64, abs_z_max: f64, bits: u64, floor_bits: u64) -> Self {
        let p = log2_max_term(alpha, beta, abs_z_max).ceil() as u64 + bits + floor_bits;
        Self::new(alpha, beta, p)
    }

    pub fn prec(&self) -> u64 {
        self.ctx.prec
    }

    fn coeff(&mut self, k: usize) -> &BigFloat {
        while self.coeffs.len() <= k {
            let j = self.coeffs.len() as f64;
            let arg = BigFloat::from_f64(self.alpha)
                .mul(&BigFloat::from_f64(j), self.ctx.wp)
                .add(&BigFloat::from_f64(self.beta), self.ctx.wp);
            let c = self.ctx.recip_gamma(&arg);
            self.coeffs.push(c);
        }
        &self.coeffs[k]
    }

    /// Series value rounded to f64 plus the log2 of the largest term, which
    /// bounds the cancellation the sum went through.
    pub fn eval_detail(&mut self, z: Complex64) -> (Complex64, f64) {
        let wp = self.ctx.wp;
        let az = z.norm();
        if az == 0.0 {
            return (Complex64::new(self.coeff(0).to_f64(), 0.0), 0.0);
        }
        let lz = az.ln();
        let (alpha, beta) = (self.alpha, self.beta);
        let zr = BigFloat::from_f64(z.re);
        let zi = BigFloat::from_f64(z.im);
        let real = z.im == 0.0;
        let (mut pr, mut pi) = (BigFloat::from_i64(1), BigFloat::zero());
        let (mut sr, mut si) = (BigFloat::zero(), BigFloat::zero());
        let mut best = f64::NEG_INFINITY;
        let stop = (self.ctx.prec as f64 + 8.0) * std::f64::consts::LN_2;
        let mut k = 0usize;
        loop {
            let lt = log_term(alpha, beta, k, lz);
            best = best.max(lt);
            if k > 0 && lt < best - stop && lt < log_term(alpha, beta, k - 1, lz) {
                break;
            }
            let c = self.coeff(k).clone();
            sr = sr.add(&pr.mul(&c, wp), wp);
            if !real {
                si = si.add(&pi.mul(&c, wp), wp);
                let nr = pr.mul(&zr, wp).sub(&pi.mul(&zi, wp), wp);
                let ni = pr.mul(&zi, wp).add(&pi.mul(&zr, wp), wp);
                pr = nr;
                pi = ni;
            } else {
                pr = pr.mul(&zr, wp);
            }
            k += 1;
        }
        (Complex64::new(sr.to_f64(), si.to_f64()), best / std::f64::consts::LN_2)
    }

    pub fn eval(&mut self, z: Complex64) -> Complex64 {
        self.eval_detail(z).0
    }

    pub fn eval_real(&mut self, x: f64) -> f64 {
        self.eval(Complex64::new(x, 0.0)).re
    }
}

thread_local! {
    static CACHE: RefCell<HashMap<(u64, u64, u64), PreciseMl>> = RefCell::new(HashMap::new());
}

/// Runs `f` on the per-thread evaluator for (α, β, prec), so the Gamma
/// coefficients are computed once per parameter set.
fn with_cached<R>(alpha: f64, beta: f64, prec: u64, f: impl FnOnce(&mut PreciseMl) -> R) -> R {
    CACHE.with(|c| {
        let mut map = c.borrow_mut();
        if map.len() > 64 {
            map.clear();
        }
        let ev = map.entry((alpha.to_bits(), beta.to_bits(), prec)).or_insert_with(|| PreciseMl::new(alpha, beta, prec));
        f(ev)
    })
}

/// Extended-precision series at one point, raising precision until the
/// result keeps at least `bits` significant bits after cancellation.
pub fn ml_series_extended(alpha: f64, beta: f64, z: Complex64, bits: u64) -> Complex64 {
    let lmax = log2_max_term(alpha, beta, z.norm()).ceil() as u64;
    let mut prec = lmax + bits + 32;
    loop {
        prec = prec.div_ceil(64) * 64;
        let (v, _) = with_cached(alpha, beta, prec, |ev| ev.eval_detail(z));
        let mag = v.norm();
        // significant bits left = prec - (lmax - log2|v|)
        let lost = if mag > 0.0 { lmax as f64 - mag.log2() } else { f64::INFINITY };
        if (prec as f64 - lost) >= bits as f64 || prec > 20_000 {
            return v;
        }
        prec = (lost.min(19_000.0) as u64) + bits + 32;
    }
}
