//! Model kernels with a pole near the integration domain, and the kernels of
//! the QBX coefficient integrals.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{hankel1_signed, legendre_p};

/// Where a singularity sits relative to the canonical domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Interval [-1, 1]; the pole is at a + ib.
    Interval,
    /// Unit circle; the pole is at (1 + b) e^{ia}.
    Circle,
}

/// A pole of order `p` at distance `b` from the canonical domain.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Singularity {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub geometry: Geometry,
}

impl Singularity {
    /// Pole at a + ib next to [-1, 1]. `p` must be a positive integer or half-integer.
    pub fn interval(a: f64, b: f64, p: f64) -> Result<Self> {
        Self::checked(a, b, p, Geometry::Interval)
    }

    /// Pole at radius 1 + b on the positive real axis, outside the unit circle.
    pub fn circle(b: f64, p: f64) -> Result<Self> {
        Self::checked(0.0, b, p, Geometry::Circle)
    }

    /// Pole at (1 + b) e^{i angle}.
    pub fn circle_at(angle: f64, b: f64, p: f64) -> Result<Self> {
        Self::checked(angle, b, p, Geometry::Circle)
    }

    fn checked(a: f64, b: f64, p: f64, geometry: Geometry) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() || !a.is_finite() {
            return Err(Error::invalid(format!("need finite a and b > 0, got a = {a}, b = {b}")));
        }
        if !(p > 0.0) || (2.0 * p).fract() != 0.0 {
            return Err(Error::invalid(format!("order p = {p} must be a positive integer or half-integer")));
        }
        Ok(Singularity { a, b, p, geometry })
    }

    /// Complex pole location.
    pub fn z0(&self) -> Complex64 {
        match self.geometry {
            Geometry::Interval => Complex64::new(self.a, self.b),
            Geometry::Circle => Complex64::from_polar(1.0 + self.b, self.a),
        }
    }

    /// `Some(p)` when the order is an integer.
    pub fn integer_order(&self) -> Option<usize> {
        (self.p.fract() == 0.0).then_some(self.p as usize)
    }

    pub fn with_order(&self, p: f64) -> Result<Self> {
        Self::checked(self.a, self.b, p, self.geometry)
    }
}

/// f_p(z) = (z - z0)^{-p} for integer p.
pub fn complex_kernel(s: &Singularity, z: Complex64) -> Result<Complex64> {
    let p = s
        .integer_order()
        .ok_or_else(|| Error::UnsupportedCombination(format!("complex kernel needs integer p, got {}", s.p)))?;
    let d = z - s.z0();
    if d.norm() == 0.0 {
        return Err(Error::SingularEvaluation(format!("z = {z}")));
    }
    Ok(d.powi(-(p as i32)))
}

/// g_p = |x - z0|^{-2p}: at a real point x for the interval, at angle t for the circle.
pub fn cartesian_kernel(s: &Singularity, x: f64) -> f64 {
    let d2 = match s.geometry {
        Geometry::Interval => (x - s.a).powi(2) + s.b * s.b,
        Geometry::Circle => (Complex64::from_polar(1.0, x) - s.z0()).norm_sqr(),
    };
    (-s.p * d2.ln()).exp()
}

/// Patch kernel ((x - x0)^2 + (y - y0)^2 + r^2)^{-p}.
pub fn patch_kernel(p: f64, x: f64, y: f64, x0: f64, y0: f64, r: f64) -> f64 {
    let d2 = (x - x0).powi(2) + (y - y0).powi(2) + r * r;
    (-p * d2.ln()).exp()
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Cosine of the angle at `center` between `target` and `y`.
pub fn cos_angle(target: [f64; 3], center: [f64; 3], y: [f64; 3]) -> Result<f64> {
    let u = sub3(target, center);
    let v = sub3(y, center);
    let nu = dot3(u, u).sqrt();
    let nv = dot3(v, v).sqrt();
    if nv == 0.0 {
        return Err(Error::SingularEvaluation("source point at the expansion center".into()));
    }
    if nu == 0.0 {
        return Err(Error::invalid("target coincides with the expansion center"));
    }
    Ok((dot3(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Legendre kernel P_l(cos theta) / |y - center|^{l+1}.
pub fn legendre_kernel(l: usize, target: [f64; 3], center: [f64; 3], y: [f64; 3]) -> Result<f64> {
    let c = cos_angle(target, center, y)?;
    let v = sub3(y, center);
    let rho = dot3(v, v).sqrt();
    Ok(legendre_p(l, c).0 / rho.powi(l as i32 + 1))
}

/// Leading coefficient of P_l: (2l)! / (2^l (l!)^2).
pub fn legendre_leading_coefficient(l: usize) -> f64 {
    (1..=l).map(|k| (2 * k - 1) as f64 / k as f64).product()
}

/// Large-l form of the leading coefficient: 1 for l = 0, else 2^l / sqrt(pi l).
pub fn legendre_leading_coefficient_simplified(l: usize) -> f64 {
    if l == 0 {
        1.0
    } else {
        2f64.powi(l as i32) / (PI * l as f64).sqrt()
    }
}

/// Dominant part of the Legendre kernel near its pole:
/// B_l d^l (s2 + d^2)^{-(l + 1/2)}, with `offset` d the signed distance along
/// the target direction and `lateral_sq` s2 the squared distance across it.
pub fn psi_kernel(l: usize, offset: f64, lateral_sq: f64) -> f64 {
    let g = (-(l as f64 + 0.5) * (lateral_sq + offset * offset).ln()).exp();
    legendre_leading_coefficient(l) * offset.powi(l as i32) * g
}

/// Wavenumber and coefficient index of a Helmholtz expansion term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzParams {
    pub omega: f64,
    pub ell: i64,
}

impl HelmholtzParams {
    pub fn new(omega: f64, ell: i64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::invalid(format!("wavenumber must be positive, got {omega}")));
        }
        Ok(HelmholtzParams { omega, ell })
    }
}

/// H_l^(1)(omega |x - z0|) e^{i l theta} with e^{i theta} = (x - conj z0) / |x - z0|.
pub fn helmholtz_kernel(hp: &HelmholtzParams, x: f64, s: &Singularity) -> Result<Complex64> {
    let z0 = s.z0();
    let xc = Complex64::new(x, 0.0);
    let d = (xc - z0).norm();
    if d == 0.0 {
        return Err(Error::SingularEvaluation(format!("x = {x}")));
    }
    let phase = ((xc - z0.conj()) / d).powi(hp.ell as i32);
    Ok(hankel1_signed(hp.ell, hp.omega * d)? * phase)
}
