//! Local expansions for quadrature by expansion (QBX).
//!
//! Coefficients are integrals over the boundary computed with whatever
//! discretization is passed in; comparing a coarse discretization against an
//! upsampled one isolates the quadrature error of the coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{cached_rule, CurveNode, PanelizedCurve, RuleKind};
use crate::specfun::{bessel_j_all, hankel1_all, legendre_all, spherical_harmonics_all, ylm_index, SphericalAngles};

/// Slack on the convergence radius, relative to it.
const BALL_SLACK: f64 = 1e-12;

fn check_ball(distance: f64, radius: f64) -> Result<()> {
    if distance > radius * (1.0 + BALL_SLACK) {
        Err(Error::OutsideConvergenceBall { distance, radius })
    } else {
        Ok(())
    }
}

/// Truncated expansion Re sum_j a_j (z - z_c)^j of the 2D Laplace single layer
/// potential int log|z - w| sigma ds.
#[derive(Debug, Clone, PartialEq)]
pub struct QbxExpansion2D {
    pub center: Complex64,
    pub radius: f64,
    pub coefficients: Vec<Complex64>,
}

/// Coefficients a_0 = int sigma log(z_c - w) ds and a_j = -int sigma / (j (w - z_c)^j) ds.
///
/// The logarithm is the principal branch; only Re a_0 enters the potential.
pub fn qbx2d_coefficients<F>(pc: &PanelizedCurve, sigma: F, center: Complex64, p: usize, radius: f64) -> Result<QbxExpansion2D>
where
    F: Fn(&CurveNode) -> f64,
{
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("expansion radius must be positive, got {radius}")));
    }
    let mut a = vec![Complex64::new(0.0, 0.0); p + 1];
    for node in pc.nodes() {
        let d = node.z - center;
        if d.norm() == 0.0 {
            return Err(Error::SingularEvaluation(format!("node {} of panel {} at the center", node.index, node.panel)));
        }
        let sw = sigma(node) * node.arc_weight();
        if sw == 0.0 {
            continue;
        }
        a[0] += sw * (-d).ln();
        let inv = d.inv();
        let mut pw = Complex64::new(1.0, 0.0);
        for (j, aj) in a.iter_mut().enumerate().skip(1) {
            pw *= inv;
            *aj -= sw * pw / j as f64;
        }
    }
    Ok(QbxExpansion2D { center, radius, coefficients: a })
}

impl QbxExpansion2D {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Re sum_j a_j (z - z_c)^j, by Horner.
    pub fn evaluate(&self, z: Complex64) -> Result<f64> {
        let d = z - self.center;
        check_ball(d.norm(), self.radius)?;
        let v = self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * d + a);
        Ok(v.re)
    }

    /// Values truncated at every order 0..=p.
    pub fn partial_sums(&self, z: Complex64) -> Result<Vec<f64>> {
        let d = z - self.center;
        check_ball(d.norm(), self.radius)?;
        let mut pw = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        Ok(self
            .coefficients
            .iter()
            .map(|&a| {
                acc += (a * pw).re;
                pw *= d;
                acc
            })
            .collect())
    }
}

/// One node of a surface rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceNode {
    pub y: [f64; 3],
    /// Area weight, Jacobian included.
    pub weight: f64,
}

/// Tensor-product quadrature on a surface.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub nodes: Vec<SurfaceNode>,
}

fn composite_gl(a: f64, b: f64, panels: usize, n: usize) -> Result<Vec<(f64, f64)>> {
    if panels == 0 {
        return Err(Error::invalid("panel count must be at least 1"));
    }
    let rule = cached_rule(RuleKind::GaussLegendre, n)?;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for i in 0..panels {
        let lo = a + h * i as f64;
        for (x, w) in rule.iter() {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    Ok(out)
}

impl SurfaceGrid {
    /// Square [-half, half]^2 in the plane z = 0, with `sub` x `sub` panels of n x n GL points.
    pub fn flat_patch(half: f64, n: usize, sub: usize) -> Result<Self> {
        let line = composite_gl(-half, half, sub, n)?;
        let mut nodes = Vec::with_capacity(line.len() * line.len());
        for &(x, wx) in &line {
            for &(y, wy) in &line {
                nodes.push(SurfaceNode { y: [x, y, 0.0], weight: wx * wy });
            }
        }
        Ok(SurfaceGrid { nodes })
    }

    /// Spheroid x = a cos s sin t, y = a sin s sin t, z = c cos t with `n_s`
    /// trapezoidal points in s and the given (t, weight) rule on [0, pi].
    pub fn spheroid(a: f64, c: f64, n_s: usize, t_rule: &[(f64, f64)]) -> Result<Self> {
        if !(a > 0.0 && c > 0.0) || n_s == 0 {
            return Err(Error::invalid("spheroid needs positive semi-axes and n_s >= 1"));
        }
        let ws = 2.0 * PI / n_s as f64;
        let mut nodes = Vec::with_capacity(n_s * t_rule.len());
        for k in 0..n_s {
            let (ss, cs) = (ws * k as f64).sin_cos();
            for &(t, wt) in t_rule {
                let (st, ct) = t.sin_cos();
                let jac = a * st * (a * a * ct * ct + c * c * st * st).sqrt();
                nodes.push(SurfaceNode { y: [a * cs * st, a * ss * st, c * ct], weight: ws * wt * jac });
            }
        }
        Ok(SurfaceGrid { nodes })
    }

    /// Spheroid with `panels` x `n` composite GL points from pole to pole.
    pub fn spheroid_gl(a: f64, c: f64, n_s: usize, panels: usize, n: usize) -> Result<Self> {
        Self::spheroid(a, c, n_s, &composite_gl(0.0, PI, panels, n)?)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Truncated expansion sum_l |x - x_0|^l sum_m alpha_l^m Y_l^{-m}(x - x_0) of the
/// 3D single layer potential int sigma / |x - y| dS.
#[derive(Debug, Clone, PartialEq)]
pub struct QbxExpansion3D {
    pub center: [f64; 3],
    pub radius: f64,
    pub order: usize,
    /// alpha_l^m laid out by [`ylm_index`].
    pub coefficients: Vec<Complex64>,
}

fn diff3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// alpha_l^m = 4 pi / (2l + 1) int |y - x_0|^{-l-1} Y_l^m(y - x_0) sigma dS.
pub fn qbx3d_coefficients<F>(grid: &SurfaceGrid, sigma: F, center: [f64; 3], p: usize, radius: f64) -> Result<QbxExpansion3D>
where
    F: Fn([f64; 3]) -> f64,
{
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("expansion radius must be positive, got {radius}")));
    }
    let mut alpha = vec![Complex64::new(0.0, 0.0); (p + 1) * (p + 1)];
    for node in &grid.nodes {
        let v = diff3(node.y, center);
        let rho = norm3(v);
        if rho == 0.0 {
            return Err(Error::SingularEvaluation(format!("surface node {:?} at the center", node.y)));
        }
        let sw = sigma(node.y) * node.weight;
        if sw == 0.0 {
            continue;
        }
        let ylm = spherical_harmonics_all(p, SphericalAngles::from_vector(v)?);
        let mut scale = sw / rho;
        for l in 0..=p {
            let f = 4.0 * PI / (2 * l + 1) as f64 * scale;
            for m in -(l as i64)..=(l as i64) {
                let i = ylm_index(l, m);
                alpha[i] += ylm[i] * f;
            }
            scale /= rho;
        }
    }
    Ok(QbxExpansion3D { center, radius, order: p, coefficients: alpha })
}

impl QbxExpansion3D {
    /// Complex value of the truncated series; the imaginary part vanishes for real densities.
    pub fn evaluate_complex(&self, x: [f64; 3]) -> Result<Complex64> {
        Ok(*self.partial_sums_complex(x)?.last().expect("order >= 0"))
    }

    pub fn evaluate(&self, x: [f64; 3]) -> Result<f64> {
        self.evaluate_complex(x).map(|v| v.re)
    }

    /// Values truncated at every order 0..=p.
    pub fn partial_sums_complex(&self, x: [f64; 3]) -> Result<Vec<Complex64>> {
        let v = diff3(x, self.center);
        let rho = norm3(v);
        check_ball(rho, self.radius)?;
        let p = self.order;
        if rho == 0.0 {
            let c0 = self.coefficients[0] * (0.25 / PI).sqrt();
            return Ok(vec![c0; p + 1]);
        }
        let ylm = spherical_harmonics_all(p, SphericalAngles::from_vector(v)?);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pw = 1.0;
        let mut out = Vec::with_capacity(p + 1);
        for l in 0..=p {
            let mut s = Complex64::new(0.0, 0.0);
            for m in -(l as i64)..=(l as i64) {
                // Y_l^{-m} = conj(Y_l^m) in this normalization.
                s += self.coefficients[ylm_index(l, m)] * ylm[ylm_index(l, m)].conj();
            }
            acc += s * pw;
            pw *= rho;
            out.push(acc);
        }
        Ok(out)
    }
}

/// Per-degree coefficients of the expansion for one target direction:
/// c_l = int P_l(cos theta) / |y - x_0|^{l+1} sigma dS, with theta the angle at
/// x_0 between `target` and y. The expansion at the target is sum_l |target - x_0|^l c_l.
pub fn legendre_coefficients<F>(grid: &SurfaceGrid, sigma: F, center: [f64; 3], target: [f64; 3], p: usize) -> Result<Vec<f64>>
where
    F: Fn([f64; 3]) -> f64,
{
    let u = diff3(target, center);
    let nu = norm3(u);
    if nu == 0.0 {
        return Err(Error::invalid("target coincides with the expansion center"));
    }
    let mut c = vec![0.0; p + 1];
    for node in &grid.nodes {
        let v = diff3(node.y, center);
        let rho = norm3(v);
        if rho == 0.0 {
            return Err(Error::SingularEvaluation(format!("surface node {:?} at the center", node.y)));
        }
        let sw = sigma(node.y) * node.weight;
        if sw == 0.0 {
            continue;
        }
        let cos = ((u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * rho)).clamp(-1.0, 1.0);
        let pl = legendre_all(p, cos);
        let mut scale = sw / rho;
        for (cl, pv) in c.iter_mut().zip(pl) {
            *cl += pv * scale;
            scale /= rho;
        }
    }
    Ok(c)
}

/// Truncated expansion sum_l alpha_l J_l(omega rho) e^{-i l theta} of the 2D
/// Helmholtz single layer potential int (i/4) H_0(omega |x - y|) sigma ds.
#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzExpansion2D {
    pub center: Complex64,
    pub radius: f64,
    pub omega: f64,
    /// alpha_{-p}, ..., alpha_p.
    pub coefficients: Vec<Complex64>,
}

/// alpha_l = (i/4) int H_l(omega |y - z_c|) e^{i l theta_y} sigma ds, theta_y = arg(y - z_c).
pub fn helmholtz_coefficients<F>(
    pc: &PanelizedCurve,
    sigma: F,
    center: Complex64,
    p: usize,
    omega: f64,
    radius: f64,
) -> Result<HelmholtzExpansion2D>
where
    F: Fn(&CurveNode) -> f64,
{
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid(format!("wavenumber must be positive, got {omega}")));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("expansion radius must be positive, got {radius}")));
    }
    let mut alpha = vec![Complex64::new(0.0, 0.0); 2 * p + 1];
    let quarter_i = Complex64::new(0.0, 0.25);
    for node in pc.nodes() {
        let d = node.z - center;
        let rho = d.norm();
        if rho == 0.0 {
            return Err(Error::SingularEvaluation(format!("node {} of panel {} at the center", node.index, node.panel)));
        }
        let sw = sigma(node) * node.arc_weight();
        if sw == 0.0 {
            continue;
        }
        let h = hankel1_all(p, omega * rho)?;
        let e = d / rho;
        let mut pos = Complex64::new(1.0, 0.0);
        for (l, hl) in h.iter().enumerate() {
            alpha[p + l] += quarter_i * hl * pos * sw;
            if l > 0 {
                // H_{-l} e^{-il theta} = (-1)^l H_l conj(e^{il theta}).
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                alpha[p - l] += quarter_i * hl * pos.conj() * (sign * sw);
            }
            pos *= e;
        }
    }
    Ok(HelmholtzExpansion2D { center, radius, omega, coefficients: alpha })
}

impl HelmholtzExpansion2D {
    pub fn order(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    /// alpha_l for -p <= l <= p.
    pub fn coefficient(&self, l: i64) -> Option<Complex64> {
        let i = l + self.order() as i64;
        usize::try_from(i).ok().and_then(|i| self.coefficients.get(i).copied())
    }

    pub fn evaluate(&self, x: Complex64) -> Result<Complex64> {
        let d = x - self.center;
        let rho = d.norm();
        check_ball(rho, self.radius)?;
        let p = self.order();
        if rho == 0.0 {
            return Ok(self.coefficients[p]);
        }
        let j = bessel_j_all(p, self.omega * rho)?;
        let e = (d / rho).conj();
        let mut acc = self.coefficients[p] * j[0];
        let mut pw = Complex64::new(1.0, 0.0);
        for (l, jl) in j.iter().enumerate().skip(1) {
            pw *= e;
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.coefficients[p + l] * pw * *jl;
            acc += self.coefficients[p - l] * pw.conj() * (sign * jl);
        }
        Ok(acc)
    }
}
