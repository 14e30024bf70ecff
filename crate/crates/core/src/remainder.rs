//! Remainder functions k_n of the Gauss-Legendre and trapezoidal rules and the
//! residue predictions of the quadrature error built from them.
//!
//! Sign conventions: [`kn_gl`] and [`kn_trapz_circle`] satisfy
//! I - Q = -sum of residues of k_n f, while [`kn_trapz_periodic`] carries the
//! opposite sign, I - Q = +sum of residues. Every signed prediction returned
//! here is for R = I - Q. The contribution of the contour at infinity is
//! taken as zero.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{Geometry, Singularity};
use crate::quadrature::RuleKind;
use crate::specfun::{ln_factorial, ln_gamma};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The root w of w^2 = z^2 - 1 with |z + w| >= 1; ties go to Re w >= 0.
pub fn sqrt_exterior(z: Complex64) -> Complex64 {
    let w = (z * z - 1.0).sqrt();
    let (plus, minus) = ((z + w).norm(), (z - w).norm());
    if plus > minus {
        w
    } else if minus > plus {
        -w
    } else if w.re > 0.0 || (w.re == 0.0 && w.im >= 0.0) {
        w
    } else {
        -w
    }
}

/// ln c_n with c_n = 2 pi Gamma(n+1)^2 / (Gamma(n+1/2) Gamma(n+3/2)).
pub fn ln_cn(n: usize) -> f64 {
    let nf = n as f64;
    let lg = |x: f64| ln_gamma(x).expect("positive argument");
    TWO_PI.ln() + 2.0 * lg(nf + 1.0) - lg(nf + 0.5) - lg(nf + 1.5)
}

fn check_off_cut(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re.abs() <= 1.0 {
        return Err(Error::BranchCut(z.to_string()));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid(format!("non-finite point {z}")));
    }
    Ok(())
}

/// Large-n Gauss-Legendre remainder function and its q-th derivative,
/// (-(2n+1)/w)^q c_n / (z + w)^{2n+1} with w = sqrt(z^2 - 1) on the exterior branch.
pub fn kn_gl(n: usize, q: usize, z: Complex64) -> Result<Complex64> {
    check_off_cut(z)?;
    let w = sqrt_exterior(z);
    let m = (2 * n + 1) as f64;
    let e = ln_cn(n) - m * (z + w).ln() + q as f64 * (-m / w).ln();
    Ok(e.exp())
}

/// ln |k_n^{(q)}(z)| for the Gauss-Legendre form, with real q allowed.
pub fn ln_abs_kn_gl(n: usize, q: f64, z: Complex64) -> Result<f64> {
    check_off_cut(z)?;
    let w = sqrt_exterior(z);
    let m = (2 * n + 1) as f64;
    Ok(ln_cn(n) - m * (z + w).norm().ln() + q * (m / w.norm()).ln())
}

/// Exact value or leading large-n term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Asymptotic,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Derivatives 0..=q of w = F/(1 - F) with F = e^{s z}, from w (1 - F) = F.
fn geometric_derivatives(f: Complex64, s: Complex64, q: usize) -> Vec<Complex64> {
    let one_minus = 1.0 - f;
    let mut w = Vec::with_capacity(q + 1);
    let mut sp = vec![c(1.0, 0.0)];
    for j in 1..=q {
        sp.push(sp[j - 1] * s);
    }
    for k in 0..=q {
        let mut acc = sp[k] * f;
        for j in 1..=k {
            acc += binomial(k, j) * w[k - j] * sp[j] * f;
        }
        w.push(acc / one_minus);
    }
    w
}

/// Periodic trapezoidal remainder function, two-sided:
/// -2 pi i / (e^{-inz} - 1) above the real axis and 2 pi i / (e^{inz} - 1) below.
pub fn kn_trapz_periodic(n: usize, q: usize, z: Complex64, variant: Exactness) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::OnCut(z.to_string()));
    }
    let nf = n as f64;
    let (sign, s) = if z.im > 0.0 { (-1.0, c(0.0, nf)) } else { (1.0, c(0.0, -nf)) };
    let f = (s * z).exp();
    let pref = c(0.0, sign * TWO_PI);
    Ok(match variant {
        Exactness::Exact => pref * geometric_derivatives(f, s, q)[q],
        Exactness::Asymptotic => pref * s.powu(q as u32) * f,
    })
}

/// (a)(a-1)...(a-m+1).
fn falling(a: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (a - i as f64))
}

fn cpow(z: Complex64, e: f64) -> Complex64 {
    (z.ln() * e).exp()
}

/// Trapezoidal remainder function on the unit circle, -2 pi / (z (z^n - 1)), for |z| > 1.
pub fn kn_trapz_circle(n: usize, q: usize, z: Complex64, variant: Exactness) -> Result<Complex64> {
    if !(z.norm() > 1.0) {
        return Err(Error::invalid(format!("circle remainder is for |z| > 1, got |z| = {}", z.norm())));
    }
    let nf = n as f64;
    match variant {
        Exactness::Asymptotic => {
            let v = -TWO_PI * falling(-(nf + 1.0), q) * cpow(z, -(nf + 1.0 + q as f64));
            Ok(v)
        }
        Exactness::Exact => {
            // k = -2 pi z^{-(n+1)} / (1 - z^{-n}); every factor stays bounded for |z| > 1.
            let d0 = 1.0 - cpow(z, -nf);
            if d0.norm() == 0.0 {
                return Err(Error::PoleOfRemainder(z.to_string()));
            }
            let dd: Vec<Complex64> =
                (0..=q).map(|i| if i == 0 { d0 } else { -falling(-nf, i) * cpow(z, -nf - i as f64) }).collect();
            let mut v: Vec<Complex64> = Vec::with_capacity(q + 1);
            for j in 0..=q {
                let mut acc = if j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
                for i in 1..=j {
                    acc -= binomial(j, i) * dd[i] * v[j - i];
                }
                v.push(acc / d0);
            }
            let mut u = c(0.0, 0.0);
            for j in 0..=q {
                let m = q - j;
                let zp = falling(-(nf + 1.0), m) * cpow(z, -(nf + 1.0) - m as f64);
                u += binomial(q, j) * zp * v[j];
            }
            Ok(-TWO_PI * u)
        }
    }
}

/// Which remainder function produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemainderVariant {
    GlAsymptotic,
    TrapzPeriodicExact,
    TrapzPeriodicAsymptotic,
    TrapzCircleExact,
    TrapzCircleAsymptotic,
}

impl RemainderVariant {
    pub fn rule(self) -> RuleKind {
        match self {
            RemainderVariant::GlAsymptotic => RuleKind::GaussLegendre,
            _ => RuleKind::TrapezoidalPeriodic,
        }
    }

    /// True for large-n approximations.
    pub fn is_asymptotic(self) -> bool {
        matches!(
            self,
            RemainderVariant::GlAsymptotic
                | RemainderVariant::TrapzPeriodicAsymptotic
                | RemainderVariant::TrapzCircleAsymptotic
        )
    }
}

/// k_n^{(q)} at a point, tagged with its origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderEvaluation {
    pub rule: RuleKind,
    pub variant: RemainderVariant,
    pub n: usize,
    pub q: usize,
    pub z0: Complex64,
    pub value: Complex64,
}

/// Evaluates k_n^{(q)}(z) for the chosen variant.
pub fn evaluate_remainder(variant: RemainderVariant, n: usize, q: usize, z: Complex64) -> Result<RemainderEvaluation> {
    let value = match variant {
        RemainderVariant::GlAsymptotic => kn_gl(n, q, z)?,
        RemainderVariant::TrapzPeriodicExact => kn_trapz_periodic(n, q, z, Exactness::Exact)?,
        RemainderVariant::TrapzPeriodicAsymptotic => kn_trapz_periodic(n, q, z, Exactness::Asymptotic)?,
        RemainderVariant::TrapzCircleExact => kn_trapz_circle(n, q, z, Exactness::Exact)?,
        RemainderVariant::TrapzCircleAsymptotic => kn_trapz_circle(n, q, z, Exactness::Asymptotic)?,
    };
    Ok(RemainderEvaluation { rule: variant.rule(), variant, n, q, z0: z, value })
}

/// Truncated Taylor series sum_k c_k h^k around a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    pub coef: Vec<Complex64>,
}

impl Taylor {
    /// Series of the identity map around `z0`, through h^order.
    pub fn variable(z0: Complex64, order: usize) -> Self {
        let mut coef = vec![c(0.0, 0.0); order + 1];
        coef[0] = z0;
        if order >= 1 {
            coef[1] = c(1.0, 0.0);
        }
        Taylor { coef }
    }

    pub fn constant(v: Complex64, order: usize) -> Self {
        let mut coef = vec![c(0.0, 0.0); order + 1];
        coef[0] = v;
        Taylor { coef }
    }

    pub fn order(&self) -> usize {
        self.coef.len() - 1
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> Complex64 {
        self.coef[k] * ln_factorial(k).exp()
    }

    pub fn add(&self, o: &Taylor) -> Taylor {
        Taylor { coef: self.coef.iter().zip(&o.coef).map(|(a, b)| a + b).collect() }
    }

    pub fn add_const(&self, v: Complex64) -> Taylor {
        let mut t = self.clone();
        t.coef[0] += v;
        t
    }

    pub fn scale(&self, s: Complex64) -> Taylor {
        Taylor { coef: self.coef.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, o: &Taylor) -> Taylor {
        let k = self.order();
        let coef = (0..=k).map(|i| (0..=i).map(|j| self.coef[j] * o.coef[i - j]).sum()).collect();
        Taylor { coef }
    }

    pub fn recip(&self) -> Taylor {
        let a = &self.coef;
        let mut b = vec![c(0.0, 0.0); a.len()];
        b[0] = 1.0 / a[0];
        for k in 1..a.len() {
            let s: Complex64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s * b[0];
        }
        Taylor { coef: b }
    }

    /// Square root whose value at the expansion point is `root`.
    pub fn sqrt_with(&self, root: Complex64) -> Taylor {
        let a = &self.coef;
        let mut b = vec![c(0.0, 0.0); a.len()];
        b[0] = root;
        for k in 1..a.len() {
            let s: Complex64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (a[k] - s) / (2.0 * root);
        }
        Taylor { coef: b }
    }

    /// Logarithm with the principal value at the expansion point.
    pub fn ln(&self) -> Taylor {
        let a = &self.coef;
        let mut b = vec![c(0.0, 0.0); a.len()];
        b[0] = a[0].ln();
        for k in 1..a.len() {
            let s: Complex64 = (1..k).map(|j| j as f64 * b[j] * a[k - j]).sum();
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Taylor { coef: b }
    }

    pub fn exp(&self) -> Taylor {
        let a = &self.coef;
        let mut b = vec![c(0.0, 0.0); a.len()];
        b[0] = a[0].exp();
        for k in 1..a.len() {
            let s: Complex64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Taylor { coef: b }
    }

    /// Raises to a real power through exp(e ln).
    pub fn powf(&self, e: f64) -> Taylor {
        self.ln().scale(c(e, 0.0)).exp()
    }
}

/// Taylor coefficients of the large-n Gauss-Legendre k_n around `z0`,
/// differentiating the closed form exactly.
pub fn kn_gl_taylor(n: usize, z0: Complex64, order: usize) -> Result<Taylor> {
    check_off_cut(z0)?;
    let z = Taylor::variable(z0, order);
    let w = z.mul(&z).add_const(c(-1.0, 0.0)).sqrt_with(sqrt_exterior(z0));
    let m = (2 * n + 1) as f64;
    Ok(z.add(&w).ln().scale(c(-m, 0.0)).add_const(c(ln_cn(n), 0.0)).exp())
}

fn taylor_from_derivs(d: impl Fn(usize) -> Result<Complex64>, order: usize) -> Result<Taylor> {
    let coef = (0..=order).map(|k| d(k).map(|v| v / ln_factorial(k).exp())).collect::<Result<Vec<_>>>()?;
    Ok(Taylor { coef })
}

/// Kernel family whose remainder is predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// f_p = (z - z0)^{-p}.
    Complex,
    /// g_p = |x - z0|^{-2p}.
    Cartesian,
}

/// Residue evaluation depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueVariant {
    /// Every term of the residue (explicit formulas for Cartesian kernels, p <= 3).
    Full,
    /// Only the term with the highest derivative of k_n.
    Asymptotic,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Complex => write!(f, "complex"),
            KernelKind::Cartesian => write!(f, "cartesian"),
        }
    }
}

fn unsupported(rule: RuleKind, s: &Singularity, kernel: KernelKind, what: &str) -> Error {
    Error::UnsupportedCombination(format!("{rule} / {kernel} kernel / {:?} geometry / p = {}: {what}", s.geometry, s.p))
}

/// Pole of the periodic form of g_p on the unit circle: a + i ln(1 + b).
pub fn periodic_pole(s: &Singularity) -> Complex64 {
    c(s.a, (1.0 + s.b).ln())
}

/// Signed prediction of R = I - Q for a model kernel.
///
/// Supported: Gauss-Legendre on the interval (complex and Cartesian kernels)
/// and the trapezoidal rule on the circle (complex kernel through the circle
/// remainder, Cartesian kernel through the periodic remainder).
pub fn residue_remainder(
    rule: RuleKind,
    s: &Singularity,
    n: usize,
    kernel: KernelKind,
    variant: ResidueVariant,
) -> Result<Complex64> {
    let p = s.integer_order().ok_or_else(|| unsupported(rule, s, kernel, "integer order required"))?;
    let fact = ln_factorial(p - 1).exp();
    match (rule, s.geometry, kernel) {
        (RuleKind::GaussLegendre, Geometry::Interval, KernelKind::Complex) => {
            let z0 = s.z0();
            let kq = match variant {
                ResidueVariant::Full => kn_gl_taylor(n, z0, p - 1)?.coef[p - 1],
                ResidueVariant::Asymptotic => kn_gl(n, p - 1, z0)? / fact,
            };
            Ok(-kq)
        }
        (RuleKind::GaussLegendre, Geometry::Interval, KernelKind::Cartesian) => {
            let z0 = s.z0();
            let b = s.b;
            match variant {
                ResidueVariant::Full => {
                    if p > 3 {
                        return Err(unsupported(rule, s, kernel, "explicit residues exist for p <= 3"));
                    }
                    let t = kn_gl_taylor(n, z0, 2)?;
                    let (k, k1, k2) = (t.derivative(0), t.derivative(1), t.derivative(2));
                    let v = match p {
                        1 => -k.im / b,
                        2 => k1.re / (2.0 * b * b) - k.im / (2.0 * b.powi(3)),
                        _ => k2.im / (8.0 * b.powi(3)) + 3.0 * k1.re / (8.0 * b.powi(4)) - 3.0 * k.im / (8.0 * b.powi(5)),
                    };
                    Ok(c(v, 0.0))
                }
                ResidueVariant::Asymptotic => {
                    let d = c(0.0, 2.0 * b);
                    let upper = kn_gl(n, p - 1, z0)? / (fact * d.powu(p as u32));
                    let lower = kn_gl(n, p - 1, z0.conj())? / (fact * (-d).powu(p as u32));
                    Ok(-(upper + lower))
                }
            }
        }
        (RuleKind::TrapezoidalPeriodic, Geometry::Circle, KernelKind::Complex) => {
            let ex = match variant {
                ResidueVariant::Full => Exactness::Exact,
                ResidueVariant::Asymptotic => Exactness::Asymptotic,
            };
            Ok(-kn_trapz_circle(n, p - 1, s.z0(), ex)? / fact)
        }
        (RuleKind::TrapezoidalPeriodic, Geometry::Circle, KernelKind::Cartesian) => {
            let z0 = periodic_pole(s);
            let bb = s.b * (s.b + 2.0);
            match variant {
                ResidueVariant::Full => {
                    if p > 3 {
                        return Err(unsupported(rule, s, kernel, "explicit residues exist for p <= 3"));
                    }
                    let k = kn_trapz_periodic(n, 0, z0, Exactness::Exact)?;
                    let k1 = kn_trapz_periodic(n, 1, z0, Exactness::Exact)?;
                    let k2 = kn_trapz_periodic(n, 2, z0, Exactness::Exact)?;
                    let i = Complex64::i();
                    let upper = match p {
                        1 => -i * k / bb,
                        2 => -k1 / (bb * bb) - i * (bb + 2.0) * k / bb.powi(3),
                        _ => {
                            i * k2 / (2.0 * bb.powi(3)) - 3.0 * (bb + 2.0) * k1 / (2.0 * bb.powi(4))
                                - i * (bb * bb + 6.0 * bb + 6.0) * k / bb.powi(5)
                        }
                    };
                    Ok(c(2.0 * upper.re, 0.0))
                }
                ResidueVariant::Asymptotic => {
                    let d = c(0.0, bb);
                    let upper = kn_trapz_periodic(n, p - 1, z0, Exactness::Asymptotic)? / (fact * d.powu(p as u32));
                    let lower =
                        kn_trapz_periodic(n, p - 1, z0.conj(), Exactness::Asymptotic)? / (fact * (-d).powu(p as u32));
                    Ok(upper + lower)
                }
            }
        }
        _ => Err(unsupported(rule, s, kernel, "no remainder function for this pairing")),
    }
}

/// Residues of k_n g_p at the pole pair {z0, conj z0}, every term kept.
///
/// Works for any integer p by Taylor arithmetic. Returns the residues in the
/// variable of the rule's remainder function (x on the interval, t on the circle).
pub fn cartesian_residues(rule: RuleKind, s: &Singularity, n: usize) -> Result<[Complex64; 2]> {
    let p = s
        .integer_order()
        .ok_or_else(|| unsupported(rule, s, KernelKind::Cartesian, "integer order required"))?;
    let order = p - 1;
    let residue = |k: &Taylor, phi: &Taylor| -> Complex64 { (0..=order).map(|j| k.coef[j] * phi.coef[order - j]).sum() };
    match (rule, s.geometry) {
        (RuleKind::GaussLegendre, Geometry::Interval) => {
            let z0 = s.z0();
            let mut out = [c(0.0, 0.0); 2];
            for (slot, (w, other)) in out.iter_mut().zip([(z0, z0.conj()), (z0.conj(), z0)]) {
                let k = kn_gl_taylor(n, w, order)?;
                let phi = Taylor::variable(w, order).add_const(-other).powf(-(p as f64));
                *slot = residue(&k, &phi);
            }
            Ok(out)
        }
        (RuleKind::TrapezoidalPeriodic, Geometry::Circle) => {
            let x0 = 1.0 + s.b;
            let z0 = periodic_pole(s);
            let mut out = [c(0.0, 0.0); 2];
            for (slot, w) in out.iter_mut().zip([z0, z0.conj()]) {
                let k = taylor_from_derivs(|q| kn_trapz_periodic(n, q, w, Exactness::Exact), order)?;
                // (1 + x0^2 - 2 x0 cos(w - a + h)) / h as a series in h.
                let arg = w - s.a;
                let dcoef: Vec<Complex64> = (1..=order + 1)
                    .map(|m| {
                        let shifted = arg + std::f64::consts::FRAC_PI_2 * m as f64;
                        -2.0 * x0 * shifted.cos() / ln_factorial(m).exp()
                    })
                    .collect();
                let phi = Taylor { coef: dcoef }.powf(-(p as f64));
                *slot = residue(&k, &phi);
            }
            Ok(out)
        }
        _ => Err(unsupported(rule, s, KernelKind::Cartesian, "no remainder function for this pairing")),
    }
}

/// (1 / 2 pi i) times the contour integral of `f` over the circle |z - z0| = radius,
/// by the m-point trapezoidal rule.
pub fn residue_by_contour<F>(f: F, z0: Complex64, radius: f64, m: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    (0..m)
        .map(|k| {
            let e = Complex64::from_polar(radius, TWO_PI * k as f64 / m as f64);
            f(z0 + e) * e
        })
        .sum::<Complex64>()
        / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_branch_examples() {
        let z = c(2.0, 0.0);
        assert!((sqrt_exterior(z) - c(3f64.sqrt(), 0.0)).norm() < 1e-15);
        let z = c(0.0, 0.2);
        assert!((z + sqrt_exterior(z)).norm() >= 1.0);
    }

    #[test]
    fn kn_gl_rejects_cut() {
        assert!(matches!(kn_gl(5, 0, c(0.5, 0.0)), Err(Error::BranchCut(_))));
        assert!(kn_gl(5, 0, c(1.5, 0.0)).is_ok());
    }

    #[test]
    fn circle_example() {
        let v = kn_trapz_circle(4, 0, c(2.0, 0.0), Exactness::Exact).unwrap();
        assert!((v - c(-std::f64::consts::PI / 15.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn periodic_rejects_real_axis() {
        assert!(matches!(kn_trapz_periodic(4, 0, c(0.3, 0.0), Exactness::Exact), Err(Error::OnCut(_))));
    }

    #[test]
    fn taylor_of_exp_and_ln() {
        let z = Taylor::variable(c(0.3, 0.1), 5);
        let e = z.exp();
        for k in 0..=5 {
            assert!((e.derivative(k) - c(0.3, 0.1).exp()).norm() < 1e-14);
        }
        let back = e.ln();
        assert!((back.coef[0] - c(0.3, 0.1)).norm() < 1e-15);
        assert!((back.coef[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(back.coef[2..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn unsupported_pairings() {
        let s = Singularity::interval(0.0, 0.2, 5.0).unwrap();
        let r = residue_remainder(RuleKind::GaussLegendre, &s, 10, KernelKind::Cartesian, ResidueVariant::Full);
        assert!(matches!(r, Err(Error::UnsupportedCombination(_))));
        let r = residue_remainder(RuleKind::TrapezoidalPeriodic, &s, 10, KernelKind::Complex, ResidueVariant::Full);
        assert!(matches!(r, Err(Error::UnsupportedCombination(_))));
    }
}
