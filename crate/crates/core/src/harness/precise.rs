//! Multiple-precision measurement of model-kernel remainders.
//!
//! Errors far below f64 resolution relative to the integral (a remainder of
//! 1e-13 on an integral of 1e24) need both the rule and the integrand in
//! extended precision, so everything here runs on 192-bit MPFR floats.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::kernels::{Geometry, Singularity};
use crate::quadrature::{gauss_legendre_rule, RuleKind};
use crate::remainder::KernelKind;

/// Working precision in bits.
pub const PRECISION: u32 = 192;

fn hp(v: f64) -> Float {
    Float::with_val(PRECISION, v)
}

/// Complex number with MPFR parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HpComplex {
    pub re: Float,
    pub im: Float,
}

impl HpComplex {
    pub fn new(re: Float, im: Float) -> Self {
        HpComplex { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        HpComplex { re: hp(re), im: hp(im) }
    }

    pub fn zero() -> Self {
        Self::from_f64(0.0, 0.0)
    }

    pub fn add(&self, o: &HpComplex) -> HpComplex {
        HpComplex::new(Float::with_val(PRECISION, &self.re + &o.re), Float::with_val(PRECISION, &self.im + &o.im))
    }

    pub fn sub(&self, o: &HpComplex) -> HpComplex {
        HpComplex::new(Float::with_val(PRECISION, &self.re - &o.re), Float::with_val(PRECISION, &self.im - &o.im))
    }

    pub fn mul(&self, o: &HpComplex) -> HpComplex {
        let re = Float::with_val(PRECISION, &self.re * &o.re) - Float::with_val(PRECISION, &self.im * &o.im);
        let im = Float::with_val(PRECISION, &self.re * &o.im) + Float::with_val(PRECISION, &self.im * &o.re);
        HpComplex::new(re, im)
    }

    pub fn scale(&self, s: &Float) -> HpComplex {
        HpComplex::new(Float::with_val(PRECISION, &self.re * s), Float::with_val(PRECISION, &self.im * s))
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(PRECISION, self.re.square_ref()) + Float::with_val(PRECISION, self.im.square_ref())
    }

    pub fn recip(&self) -> HpComplex {
        let d = self.norm_sqr();
        HpComplex::new(Float::with_val(PRECISION, &self.re / &d), -Float::with_val(PRECISION, &self.im / &d))
    }

    /// self^k for integer k (negative allowed).
    pub fn powi(&self, k: i32) -> HpComplex {
        let base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = HpComplex::from_f64(1.0, 0.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// Principal logarithm.
    pub fn ln(&self) -> HpComplex {
        let modulus = self.norm_sqr().sqrt();
        let arg = Float::with_val(PRECISION, self.im.atan2_ref(&self.re));
        HpComplex::new(modulus.ln(), arg)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Gauss-Legendre rule in extended precision.
#[derive(Debug)]
pub struct HpRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// P_n(x) and P_{n-1}(x) by the three-term recurrence.
fn legendre_pair(n: usize, x: &Float) -> (Float, Float) {
    let mut p0 = hp(1.0);
    let mut p1 = x.clone();
    let mut t = hp(0.0);
    for k in 2..=n {
        // p2 = ((2k - 1) x p1 - (k - 1) p0) / k
        t.assign_mul(x, &p1);
        t *= (2 * k - 1) as u32;
        p0 *= (k - 1) as u32;
        t -= &p0;
        t /= k as u32;
        std::mem::swap(&mut p0, &mut p1);
        std::mem::swap(&mut p1, &mut t);
    }
    (p1, p0)
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

/// Unevaluated sum hi + lo carrying about 106 bits.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn from(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        DoubleDouble { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Self) -> Self {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (o.hi - bb);
        Self::renorm(s, err + self.lo + o.lo)
    }

    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        Self::renorm(p, err + self.hi * o.lo + self.lo * o.hi)
    }

    fn mul_f(self, f: f64) -> Self {
        let p = self.hi * f;
        let err = self.hi.mul_add(f, -p);
        Self::renorm(p, err + self.lo * f)
    }

    fn div_f(self, f: f64) -> Self {
        let q = self.hi / f;
        let r = self.add(DoubleDouble::from(q).mul_f(f).neg());
        Self::renorm(q, r.hi / f)
    }
}

/// One Newton step on P_n in double-double, from an f64 root approximation.
fn newton_double_double(n: usize, x: f64) -> DoubleDouble {
    let xd = DoubleDouble::from(x);
    let mut p0 = DoubleDouble::from(1.0);
    let mut p1 = xd;
    for k in 2..=n {
        let kf = k as f64;
        let t = xd.mul(p1).mul_f(2.0 * kf - 1.0).add(p0.mul_f(kf - 1.0).neg()).div_f(kf);
        p0 = p1;
        p1 = t;
    }
    let dp = n as f64 * (x * p1.hi - p0.hi) / (x * x - 1.0);
    xd.add(p1.div_f(dp).neg())
}

fn build_gl(n: usize) -> Result<HpRule> {
    let seed = gauss_legendre_rule(n)?;
    let mut nodes = vec![hp(0.0); n];
    let mut weights = vec![hp(0.0); n];
    if n == 1 {
        weights[0] = hp(2.0);
        return Ok(HpRule { nodes, weights });
    }
    let nf = n as u32;
    for i in 0..n.div_ceil(2) {
        let j = n - 1 - i;
        if i == j {
            // Middle node of an odd rule: x = 0 exactly, P_n'(0) = n P_{n-1}(0).
            let (_, pm) = legendre_pair(n, &hp(0.0));
            let dp = pm * nf;
            weights[i] = Float::with_val(PRECISION, 2u32) / dp.square();
            continue;
        }
        let dd = newton_double_double(n, seed.nodes()[i]);
        let mut x = hp(dd.hi) + hp(dd.lo);
        let (pn, pm) = legendre_pair(n, &x);
        // (x^2 - 1) P_n' = n (x P_n - P_{n-1})
        let x2m1 = Float::with_val(PRECISION, x.square_ref()) - 1u32;
        let dp = (Float::with_val(PRECISION, &x * &pn) - &pm) * nf / &x2m1;
        let dx = Float::with_val(PRECISION, &pn / &dp);
        // P_n'(x - dx) = P_n'(x) - dx P_n''(x), with (1 - x^2) P_n'' = 2 x P_n' - n (n + 1) P_n.
        let d2 = (Float::with_val(PRECISION, &x * &dp) * 2u32 - pn * (nf * (nf + 1))) / (-x2m1);
        let dp_new = dp - Float::with_val(PRECISION, &dx * &d2);
        x -= &dx;
        let one_m = -Float::with_val(PRECISION, x.square_ref()) + 1u32;
        let w = Float::with_val(PRECISION, 2u32) / (one_m * dp_new.square());
        nodes[j] = Float::with_val(PRECISION, -&x);
        nodes[i] = x;
        weights[j] = w.clone();
        weights[i] = w;
    }
    Ok(HpRule { nodes, weights })
}

fn gl_cache() -> &'static Mutex<HashMap<usize, Arc<HpRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HpRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached n-point Gauss-Legendre rule on [-1, 1] in extended precision.
pub fn hp_gauss_legendre(n: usize) -> Result<Arc<HpRule>> {
    if let Some(r) = gl_cache().lock().expect("cache poisoned").get(&n) {
        return Ok(Arc::clone(r));
    }
    let rule = Arc::new(build_gl(n)?);
    gl_cache().lock().expect("cache poisoned").insert(n, Arc::clone(&rule));
    Ok(rule)
}

fn pi() -> Float {
    Float::with_val(PRECISION, Constant::Pi)
}

/// ((x - a)^2 + b^2)^{-p}, p integer or half-integer.
fn cartesian_value(d2: &Float, p: f64) -> Float {
    let twice = (2.0 * p) as i32;
    if twice % 2 == 0 {
        Float::with_val(PRECISION, d2.pow(-(twice / 2)))
    } else {
        let s = Float::with_val(PRECISION, d2.sqrt_ref());
        Float::with_val(PRECISION, s.pow(-twice))
    }
}

fn pole(s: &Singularity) -> HpComplex {
    match s.geometry {
        Geometry::Interval => HpComplex::from_f64(s.a, s.b),
        Geometry::Circle => {
            let r = Float::with_val(PRECISION, 1u32) + hp(s.b);
            let a = hp(s.a);
            HpComplex::new(Float::with_val(PRECISION, a.cos_ref()) * &r, Float::with_val(PRECISION, a.sin_ref()) * &r)
        }
    }
}

fn require_integer(s: &Singularity) -> Result<i32> {
    s.integer_order()
        .map(|p| p as i32)
        .ok_or_else(|| Error::UnsupportedCombination(format!("complex kernel needs integer p, got {}", s.p)))
}

/// Exact integral of the model kernel over its canonical domain.
pub fn hp_exact_integral(kernel: KernelKind, s: &Singularity) -> Result<HpComplex> {
    match (kernel, s.geometry) {
        (KernelKind::Complex, Geometry::Interval) => {
            let p = require_integer(s)?;
            let z0 = pole(s);
            let hi = HpComplex::from_f64(1.0, 0.0).sub(&z0);
            let lo = HpComplex::from_f64(-1.0, 0.0).sub(&z0);
            if p == 1 {
                Ok(hi.ln().sub(&lo.ln()))
            } else {
                let d = hi.powi(1 - p).sub(&lo.powi(1 - p));
                Ok(d.scale(&hp(1.0 / (1 - p) as f64)))
            }
        }
        (KernelKind::Complex, Geometry::Circle) => {
            let p = require_integer(s)?;
            let mz = pole(s).scale(&hp(-1.0));
            Ok(mz.powi(-p).scale(&(pi() * 2u32)))
        }
        (KernelKind::Cartesian, Geometry::Interval) => {
            let hi = interval_antiderivative(s.p, &(hp(1.0) - hp(s.a)), &hp(s.b));
            let lo = interval_antiderivative(s.p, &(hp(-1.0) - hp(s.a)), &hp(s.b));
            Ok(HpComplex::new(hi - lo, hp(0.0)))
        }
        (KernelKind::Cartesian, Geometry::Circle) => {
            if let Some(p) = s.integer_order() {
                // 2 pi / (x0^2 - 1)^p P_{p-1}((1 + x0^2) / (x0^2 - 1))
                let x0 = Float::with_val(PRECISION, 1u32) + hp(s.b);
                let x2 = Float::with_val(PRECISION, x0.square_ref());
                let den = Float::with_val(PRECISION, &x2 - 1u32);
                let arg = Float::with_val(PRECISION, &x2 + 1u32) / &den;
                let (pl, _) = if p == 1 { (hp(1.0), hp(0.0)) } else { legendre_pair(p - 1, &arg) };
                let v = pi() * 2u32 * pl / den.pow(p as u32);
                Ok(HpComplex::new(v, hp(0.0)))
            } else {
                // Geometric convergence: (1 + b)^{-N} N^p below 2^-PRECISION relative.
                let lnq = (1.0 + s.b).ln();
                let mut big = 64.0f64;
                for _ in 0..4 {
                    big = (PRECISION as f64 * 2f64.ln() + s.p * big.ln() + 10.0) / lnq;
                }
                hp_trapezoid(KernelKind::Cartesian, s, big.ceil() as usize)
            }
        }
    }
}

/// F_p(u) with dF_p/du = (u^2 + b^2)^{-p}.
fn interval_antiderivative(p: f64, u: &Float, b: &Float) -> Float {
    let b2 = Float::with_val(PRECISION, b.square_ref());
    let d2 = Float::with_val(PRECISION, u.square_ref()) + &b2;
    let (mut f, mut q) = if (2.0 * p) as i64 % 2 == 1 {
        (Float::with_val(PRECISION, u / b).asinh(), 0.5)
    } else {
        (Float::with_val(PRECISION, u / b).atan() / b, 1.0)
    };
    while q < p {
        q += 1.0;
        // F_q = u / (2 b^2 (q-1) d2^{q-1}) + (2q - 3) / (2 b^2 (q - 1)) F_{q-1}
        let c = Float::with_val(PRECISION, &b2 * (2.0 * (q - 1.0)));
        let head = Float::with_val(PRECISION, u / &c) * cartesian_value(&d2, q - 1.0);
        f = head + f * (2.0 * q - 3.0) / c;
    }
    f
}

/// n-point Gauss-Legendre sum of the interval model kernel.
pub fn hp_gauss_sum(kernel: KernelKind, s: &Singularity, n: usize) -> Result<HpComplex> {
    if s.geometry != Geometry::Interval {
        return Err(Error::UnsupportedCombination("Gauss-Legendre measurement needs the interval geometry".into()));
    }
    let rule = hp_gauss_legendre(n)?;
    let a = hp(s.a);
    let b2 = Float::with_val(PRECISION, hp(s.b).square_ref());
    match kernel {
        KernelKind::Cartesian => {
            let mut acc = hp(0.0);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let u = Float::with_val(PRECISION, x - &a);
                let d2 = Float::with_val(PRECISION, u.square_ref()) + &b2;
                acc += Float::with_val(PRECISION, w * cartesian_value(&d2, s.p));
            }
            Ok(HpComplex::new(acc, hp(0.0)))
        }
        KernelKind::Complex => {
            let p = require_integer(s)?;
            let z0 = pole(s);
            let mut acc = HpComplex::zero();
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let d = HpComplex::new(Float::with_val(PRECISION, x - &z0.re), Float::with_val(PRECISION, -&z0.im));
                acc = acc.add(&d.powi(-p).scale(w));
            }
            Ok(acc)
        }
    }
}

/// n-point trapezoidal sum (2 pi / n) sum_k f(t_k), t_k = 2 pi k / n, of the circle model kernel.
pub fn hp_trapezoid(kernel: KernelKind, s: &Singularity, n: usize) -> Result<HpComplex> {
    if s.geometry != Geometry::Circle {
        return Err(Error::UnsupportedCombination("trapezoidal measurement needs the circle geometry".into()));
    }
    if n == 0 {
        return Err(Error::invalid("rule size must be at least 1"));
    }
    let step = Float::with_val(PRECISION, pi() * 2u32 / n as u32);
    let rot = HpComplex::new(Float::with_val(PRECISION, step.cos_ref()), Float::with_val(PRECISION, step.sin_ref()));
    let z0 = pole(s);
    let mut e = HpComplex::from_f64(1.0, 0.0);
    let mut acc = HpComplex::zero();
    let p_int = s.integer_order().map(|p| p as i32);
    // (1 + x0^2) and 2 x0 for the Cartesian form |e^{it} - z0|^2 = 1 + x0^2 - 2 Re(e^{it} conj z0).
    let x0sq = z0.norm_sqr();
    for _ in 0..n {
        match kernel {
            KernelKind::Complex => {
                let p = p_int.ok_or_else(|| Error::UnsupportedCombination("complex kernel needs integer p".into()))?;
                acc = acc.add(&e.sub(&z0).powi(-p));
            }
            KernelKind::Cartesian => {
                let dot = Float::with_val(PRECISION, &e.re * &z0.re) + Float::with_val(PRECISION, &e.im * &z0.im);
                let d2 = Float::with_val(PRECISION, &x0sq + 1u32) - dot * 2u32;
                acc.re += cartesian_value(&d2, s.p);
            }
        }
        e = e.mul(&rot);
    }
    Ok(acc.scale(&step))
}

/// Signed remainder R_n = I - Q_n of the model kernel, computed in extended precision.
///
/// Gauss-Legendre runs on the interval geometry, the trapezoidal rule on the circle.
pub fn hp_remainder(rule: RuleKind, kernel: KernelKind, s: &Singularity, n: usize) -> Result<Complex64> {
    let q = match rule {
        RuleKind::GaussLegendre => hp_gauss_sum(kernel, s, n)?,
        RuleKind::TrapezoidalPeriodic => hp_trapezoid(kernel, s, n)?,
    };
    let exact = hp_exact_integral(kernel, s)?;
    Ok(exact.sub(&q).to_c64())
}

/// Like [`hp_remainder`], reusing a precomputed exact integral.
pub fn hp_remainder_with(rule: RuleKind, kernel: KernelKind, s: &Singularity, n: usize, exact: &HpComplex) -> Result<Complex64> {
    let q = match rule {
        RuleKind::GaussLegendre => hp_gauss_sum(kernel, s, n)?,
        RuleKind::TrapezoidalPeriodic => hp_trapezoid(kernel, s, n)?,
    };
    Ok(exact.sub(&q).to_c64())
}
