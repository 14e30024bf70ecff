//! Three-dimensional measurement studies: the flat Gauss-Legendre patch and
//! the spheroid, with one quadrature direction resolved at a time.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::{estimate_spheroid, find_tstar, QbxConfig, QbxGeometry, SpheroidPart};
use crate::qbx::{legendre_coefficients, SurfaceGrid};
use crate::quadrature::{cached_rule, RuleKind};
use crate::specfun::legendre_all;

/// Random bivariate polynomial of bounded total degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialDensity {
    pub degree: usize,
    pub seed: u64,
    /// coefficients[i][j] multiplies x^i y^j; zero for i + j > degree.
    pub coefficients: Vec<Vec<f64>>,
}

impl PolynomialDensity {
    /// Coefficients uniform in [-1, 1], drawn row by row from a ChaCha8 stream.
    pub fn random(degree: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..=degree)
            .map(|i| (0..=degree).map(|j| if i + j <= degree { rng.gen_range(-1.0..=1.0) } else { 0.0 }).collect())
            .collect();
        PolynomialDensity { degree, seed, coefficients }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * x + row.iter().rev().fold(0.0, |a, &c| a * y + c))
    }
}

/// Patch errors per truncation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchStudy {
    pub u_exact: f64,
    pub sigma_at_target: f64,
    pub e_t: Vec<f64>,
    pub e_q: Vec<f64>,
}

/// int sigma / |y| over [-half, half]^2 with the singular point at the origin,
/// in polar coordinates on eight triangular sectors.
pub fn patch_potential_at_origin(sigma: impl Fn(f64, f64) -> f64, half: f64) -> Result<f64> {
    let rule = cached_rule(RuleKind::GaussLegendre, 60)?;
    let mut total = 0.0;
    for k in 0..8 {
        let (a0, a1) = (k as f64 * PI / 4.0, (k + 1) as f64 * PI / 4.0);
        for (xp, wp) in rule.iter() {
            let phi = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * xp;
            let wphi = 0.5 * (a1 - a0) * wp;
            let (s, c) = phi.sin_cos();
            let edge = half / c.abs().max(s.abs());
            let radial: f64 = rule.iter().map(|(xr, wr)| {
                let rho = 0.5 * edge * (xr + 1.0);
                0.5 * edge * wr * sigma(rho * c, rho * s)
            }).sum();
            total += wphi * radial;
        }
    }
    Ok(total)
}

/// Flat patch [-1, 1]^2 with an n x n rule, target at the origin, center at
/// height r; reference coefficients from 16 x 16 panels of 32 x 32 points.
pub fn patch_study(n: usize, r: f64, p: usize, density: &PolynomialDensity) -> Result<PatchStudy> {
    if !(r > 0.0) {
        return Err(Error::invalid("center height must be positive"));
    }
    let sigma = |y: [f64; 3]| density.value(y[0], y[1]);
    let center = [0.0, 0.0, r];
    let target = [0.0, 0.0, 0.0];
    let coarse = legendre_coefficients(&SurfaceGrid::flat_patch(1.0, n, 1)?, sigma, center, target, p)?;
    let fine = legendre_coefficients(&SurfaceGrid::flat_patch(1.0, 32, 16)?, sigma, center, target, p)?;
    let u_exact = patch_potential_at_origin(|x, y| density.value(x, y), 1.0)?;
    let (mut dq, mut sref) = (0.0, 0.0);
    let mut e_t = Vec::with_capacity(p + 1);
    let mut e_q = Vec::with_capacity(p + 1);
    let mut pw = 1.0;
    for l in 0..=p {
        dq += pw * (fine[l] - coarse[l]);
        sref += pw * fine[l];
        e_q.push(dq.abs());
        e_t.push((u_exact - sref).abs());
        pw *= r;
    }
    Ok(PatchStudy { u_exact, sigma_at_target: density.value(0.0, 0.0), e_t, e_q })
}

/// Which spheroid direction carries the rule under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpheroidDirection {
    /// Trapezoidal rule around the axis; center beside the equator.
    Trapezoidal,
    /// Gauss-Legendre rule from pole to pole; center at the slowest section.
    GaussLegendre,
}

/// Errors of the Legendre kernels integrated over a spheroid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpheroidScan {
    pub direction: SpheroidDirection,
    pub a: f64,
    pub c: f64,
    pub r: f64,
    pub t_c: f64,
    pub n: Vec<usize>,
    /// measured[i][l] = |Q_n - I| for n = n[i].
    pub measured: Vec<Vec<f64>>,
    pub estimate: Vec<Vec<f64>>,
}

/// Kernel values P_l(cos theta) / d^{l+1} for l <= lmax, accumulated with weight w.
fn add_kernels(acc: &mut [f64], y: [f64; 3], x0: [f64; 3], nhat: [f64; 3], w: f64) {
    let d = [y[0] - x0[0], y[1] - x0[1], y[2] - x0[2]];
    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let cos = (-(d[0] * nhat[0] + d[1] * nhat[1] + d[2] * nhat[2]) / dist).clamp(-1.0, 1.0);
    let pl = legendre_all(acc.len() - 1, cos);
    let mut scale = w / dist;
    for (a, v) in acc.iter_mut().zip(pl) {
        *a += v * scale;
        scale /= dist;
    }
}

fn spheroid_point(a: f64, c: f64, s: f64, t: f64) -> ([f64; 3], f64) {
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    ([a * cs * st, a * ss * st, c * ct], a * st * (a * a * ct * ct + c * c * st * st).sqrt())
}

fn gl_on(a: f64, b: f64, panels: usize, n: usize) -> Result<Vec<(f64, f64)>> {
    let rule = cached_rule(RuleKind::GaussLegendre, n)?;
    let h = (b - a) / panels as f64;
    Ok((0..panels)
        .flat_map(|i| rule.iter().map(move |(x, w)| (a + h * (i as f64 + 0.5 * (x + 1.0)), 0.5 * h * w)))
        .collect())
}

/// Normalized measured error below which a scan counts as converged.
const SPHEROID_STOP: f64 = 1e-13;
/// Consecutive converged samples that end a scan.
const SPHEROID_STOP_RUN: usize = 12;

fn scan_until<F>(lmax: usize, r: f64, n_min: usize, n_max: usize, mut quad: F, exact: &[f64]) -> Result<(Vec<usize>, Vec<Vec<f64>>)>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let mut ns = Vec::new();
    let mut meas = Vec::new();
    let mut run = 0;
    for n in n_min..=n_max {
        let q = quad(n)?;
        let m: Vec<f64> = q.iter().zip(exact).map(|(a, b)| (a - b).abs()).collect();
        let worst = m.iter().enumerate().map(|(l, v)| v * r.powi(l as i32 + 1)).fold(0.0, f64::max);
        ns.push(n);
        meas.push(m);
        run = if worst < SPHEROID_STOP { run + 1 } else { 0 };
        if run == SPHEROID_STOP_RUN {
            break;
        }
        let _ = lmax;
    }
    Ok((ns, meas))
}

fn spheroid_config(a: f64, c: f64, r: f64, n: usize, n_s: usize, p: usize) -> Result<QbxConfig> {
    QbxConfig::new(p, r, n, 1.0, QbxGeometry::Spheroid { a, c, n_s })
}

/// Trapezoidal direction: center (a + r, 0, 0), the polar direction resolved by
/// 50 x 20 Gauss-Legendre points; n-point trapezoidal sums against 2048 points.
pub fn spheroid_trapz_scan(a: f64, c: f64, r: f64, lmax: usize, n_range: (usize, usize)) -> Result<SpheroidScan> {
    let x0 = [a + r, 0.0, 0.0];
    let nhat = [1.0, 0.0, 0.0];
    let trule = gl_on(0.0, PI, 50, 20)?;
    let f = |s: f64| {
        let mut acc = vec![0.0; lmax + 1];
        for &(t, w) in &trule {
            let (y, jac) = spheroid_point(a, c, s, t);
            add_kernels(&mut acc, y, x0, nhat, w * jac);
        }
        acc
    };
    // F(s) = F(-s): fold the sum onto 0 <= s <= pi.
    let trapz = |n: usize| -> Result<Vec<f64>> {
        let mut acc = f(0.0);
        for k in 1..n.div_ceil(2) {
            for (a, v) in acc.iter_mut().zip(f(2.0 * PI * k as f64 / n as f64)) {
                *a += 2.0 * v;
            }
        }
        if n.is_multiple_of(2) {
            for (a, v) in acc.iter_mut().zip(f(PI)) {
                *a += v;
            }
        }
        Ok(acc.iter().map(|v| v * 2.0 * PI / n as f64).collect())
    };
    let exact = trapz(2048)?;
    let (ns, measured) = scan_until(lmax, r, n_range.0, n_range.1, trapz, &exact)?;
    let estimate = ns
        .iter()
        .map(|&n| {
            let cfg = spheroid_config(a, c, r, n, n, lmax)?;
            (0..=lmax).map(|l| estimate_spheroid(&cfg, SpheroidPart::TrapzCrossSection(l)).map(|e| e.magnitude)).collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SpheroidScan { direction: SpheroidDirection::Trapezoidal, a, c, r, t_c: PI / 2.0, n: ns, measured, estimate })
}

/// Gauss-Legendre direction: center beside the slowest half-ellipse section,
/// the azimuth resolved by a 512-point trapezoidal rule; n-point Gauss-Legendre
/// on [0, pi] against 100 x 30 composite points.
pub fn spheroid_gl_scan(a: f64, c: f64, r: f64, lmax: usize, n_range: (usize, usize)) -> Result<SpheroidScan> {
    const AZIMUTH: usize = 512;
    let cs = find_tstar(a, c, r)?;
    let ([x, z], [nx, nz]) = cs.center_and_normal();
    let x0 = [x, 0.0, z];
    let nhat = [nx, 0.0, nz];
    let g = |t: f64| {
        let mut acc = vec![0.0; lmax + 1];
        let ws = 2.0 * PI / AZIMUTH as f64;
        for k in 0..=AZIMUTH / 2 {
            let s = ws * k as f64;
            let mult = if k == 0 || k == AZIMUTH / 2 { 1.0 } else { 2.0 };
            let (y, jac) = spheroid_point(a, c, s, t);
            add_kernels(&mut acc, y, x0, nhat, mult * ws * jac);
        }
        acc
    };
    let integrate = |rule: &[(f64, f64)]| {
        let mut acc = vec![0.0; lmax + 1];
        for &(t, w) in rule {
            for (a, v) in acc.iter_mut().zip(g(t)) {
                *a += w * v;
            }
        }
        acc
    };
    let exact = integrate(&gl_on(0.0, PI, 100, 30)?);
    let quad = |n: usize| -> Result<Vec<f64>> { Ok(integrate(&gl_on(0.0, PI, 1, n)?)) };
    let (ns, measured) = scan_until(lmax, r, n_range.0, n_range.1, quad, &exact)?;
    let estimate = ns
        .iter()
        .map(|&n| {
            let cfg = spheroid_config(a, c, r, n, 1, lmax)?;
            (0..=lmax).map(|l| estimate_spheroid(&cfg, SpheroidPart::GlCrossSection(l)).map(|e| e.magnitude)).collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SpheroidScan { direction: SpheroidDirection::GaussLegendre, a, c, r, t_c: cs.t_c, n: ns, measured, estimate })
}

/// Estimate against the local envelope of the measured error for one degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub l: usize,
    pub points: usize,
    pub n_first: usize,
    pub n_last: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Compares estimate(n) with max{measured(n') : |n' - n| <= half_width} over the
/// samples whose envelope, scaled by r^{l+1}, lies in [lo, hi].
///
/// The envelope removes the interference nulls of a pole that sits off the
/// middle of the interval; the estimate describes the amplitude, not the phase.
pub fn envelope_check(scan: &SpheroidScan, l: usize, lo: f64, hi: f64, half_width: usize) -> Option<EnvelopeCheck> {
    let scale = scan.r.powi(l as i32 + 1);
    let mut ratios = Vec::new();
    let mut ns = Vec::new();
    for (i, &n) in scan.n.iter().enumerate() {
        let env = scan
            .n
            .iter()
            .zip(&scan.measured)
            .filter(|(&m, _)| m.abs_diff(n) <= half_width)
            .map(|(_, v)| v[l])
            .fold(0.0, f64::max);
        let norm = env * scale;
        if norm >= lo && norm <= hi {
            ratios.push(scan.estimate[i][l] / env);
            ns.push(n);
        }
    }
    if ratios.len() < 2 {
        return None;
    }
    Some(EnvelopeCheck {
        l,
        points: ratios.len(),
        n_first: ns[0],
        n_last: *ns.last().expect("nonempty"),
        ratio_min: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratio_max: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Full spheroid QBX quadrature error at the point (a, 0, 0) with the center
/// at distance r outside, per truncation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpheroidFullStudy {
    pub e_q: Vec<f64>,
    pub estimate: Vec<f64>,
}

/// `n_s` trapezoidal x `n_t` Gauss-Legendre points with unit density, against a
/// grid with twice the azimuthal points and four times the polar panels.
pub fn spheroid_full_study(a: f64, c: f64, r: f64, n_s: usize, n_t: usize, p: usize) -> Result<SpheroidFullStudy> {
    let x0 = [a + r, 0.0, 0.0];
    let target = [a, 0.0, 0.0];
    let coarse = SurfaceGrid::spheroid_gl(a, c, n_s, 1, n_t)?;
    let fine = SurfaceGrid::spheroid_gl(a, c, 2 * n_s, 4, n_t)?;
    let cc = legendre_coefficients(&coarse, |_| 1.0, x0, target, p)?;
    let cf = legendre_coefficients(&fine, |_| 1.0, x0, target, p)?;
    let mut acc = 0.0;
    let mut pw = 1.0;
    let mut e_q = Vec::with_capacity(p + 1);
    let mut estimate = Vec::with_capacity(p + 1);
    for l in 0..=p {
        acc += pw * (cf[l] - cc[l]);
        pw *= r;
        e_q.push(acc.abs());
        let cfg = spheroid_config(a, c, r, n_t, n_s, l)?;
        estimate.push(estimate_spheroid(&cfg, SpheroidPart::Combined)?.magnitude);
    }
    Ok(SpheroidFullStudy { e_q, estimate })
}
