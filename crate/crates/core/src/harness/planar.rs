//! Two-dimensional measurement studies: Laplace QBX on the unit circle, the
//! Helmholtz panel desk test and the starfish double layer.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::{estimate_helmholtz, estimate_panel_dbl_layer, HelmholtzForm, PoleHeight, QbxConfig, QbxGeometry};
use crate::qbx::{helmholtz_coefficients, qbx2d_coefficients};
use crate::quadrature::{panelize, Circle, Curve, PanelizedCurve, Segment, Starfish};

/// Density on the unit circle as a function of the angle, with its Fourier
/// coefficients for the exact single layer potential.
pub struct CircleDensity {
    pub name: String,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// c_k = (1/2pi) int sigma e^{-ikt} dt for 0 <= k < modes.
    fourier: Vec<Complex64>,
}

impl std::fmt::Debug for CircleDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleDensity").field("name", &self.name).finish()
    }
}

/// Samples used for the Fourier coefficients; exact for trigonometric
/// polynomials of degree below half of this.
const FOURIER_SAMPLES: usize = 128;

impl CircleDensity {
    /// Density given as a trigonometric polynomial of degree below 64.
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let m = FOURIER_SAMPLES;
        let samples: Vec<f64> = (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).collect();
        let fourier = (0..m / 2)
            .map(|k| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, &s)| Complex64::from_polar(s, -2.0 * PI * (k * j) as f64 / m as f64))
                    .sum::<Complex64>()
                    / m as f64
            })
            .collect();
        CircleDensity { name: name.into(), f: Box::new(f), fourier }
    }

    /// sigma = sin(theta)^10.
    pub fn sin_pow10() -> Self {
        Self::new("sin^10", |t: f64| t.sin().powi(10))
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn sup_norm(&self) -> f64 {
        (0..4096).map(|j| self.value(2.0 * PI * j as f64 / 4096.0).abs()).fold(0.0, f64::max)
    }

    /// int log|z - w| sigma ds over the unit circle, for |z| <= 1.
    pub fn single_layer(&self, z: Complex64) -> f64 {
        let (rho, th) = (z.norm(), z.arg());
        let mut acc = 0.0;
        let mut pw = 1.0;
        for (k, c) in self.fourier.iter().enumerate().skip(1) {
            pw *= rho;
            acc -= 2.0 * PI / k as f64 * pw * (c * Complex64::from_polar(1.0, k as f64 * th)).re;
        }
        acc
    }
}

/// Signed error parts at one target and one truncation order: total = e_T + e_Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitPoint {
    /// u - (expansion with reference coefficients).
    pub e_t: f64,
    /// (expansion with reference coefficients) - (expansion with computed coefficients).
    pub e_q: f64,
    /// u - (expansion with computed coefficients).
    pub total: f64,
}

/// Coefficients are compared against this many times as many panels.
pub const UPSAMPLING: usize = 16;

/// Panel count of the unit circle for a panel length h.
pub fn circle_panels(h: f64) -> Result<usize> {
    let n = (2.0 * PI / h).round();
    if !(n >= 1.0) || ((2.0 * PI / n) - h).abs() > 1e-9 * h {
        return Err(Error::invalid(format!("panel length {h} does not divide the unit circle")));
    }
    Ok(n as usize)
}

/// Error split of 2D QBX for the unit-circle single layer, at targets e^{i theta}
/// with centers (1 - r) e^{i theta}, for every order 0..=p.
pub fn qbx_error_split(cfg: &QbxConfig, density: &CircleDensity, target_angles: &[f64]) -> Result<Vec<Vec<SplitPoint>>> {
    if cfg.geometry != QbxGeometry::Circle2d {
        return Err(Error::UnsupportedCombination("error split runs on the unit circle".into()));
    }
    let panels = circle_panels(cfg.h)?;
    let curve: Arc<dyn Curve> = Arc::new(Circle::unit());
    let coarse = panelize(Arc::clone(&curve), panels, cfg.n)?;
    let fine = coarse.refined(UPSAMPLING)?;
    let sigma = |node: &crate::quadrature::CurveNode| density.value(node.t);
    target_angles
        .iter()
        .map(|&th| {
            let z = Complex64::from_polar(1.0, th);
            let zc = z * (1.0 - cfg.r);
            let approx = qbx2d_coefficients(&coarse, sigma, zc, cfg.p, cfg.r)?.partial_sums(z)?;
            let refd = qbx2d_coefficients(&fine, sigma, zc, cfg.p, cfg.r)?.partial_sums(z)?;
            let u = density.single_layer(z);
            Ok(approx
                .iter()
                .zip(&refd)
                .map(|(&a, &rf)| SplitPoint { e_t: u - rf, e_q: rf - a, total: u - a })
                .collect())
        })
        .collect()
}

/// Maximum over targets of |e_T| and |e_Q| per order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitMaxima {
    pub e_t: Vec<f64>,
    pub e_q: Vec<f64>,
}

/// Runs [`qbx_error_split`] at every `stride`-th quadrature node and takes maxima.
pub fn qbx2d_circle_study(cfg: &QbxConfig, density: &CircleDensity, stride: usize) -> Result<SplitMaxima> {
    let panels = circle_panels(cfg.h)?;
    let pc = panelize(Arc::new(Circle::unit()), panels, cfg.n)?;
    let angles: Vec<f64> = pc.nodes().iter().step_by(stride.max(1)).map(|n| n.t).collect();
    let split = qbx_error_split(cfg, density, &angles)?;
    let mut e_t = vec![0.0f64; cfg.p + 1];
    let mut e_q = vec![0.0f64; cfg.p + 1];
    for target in &split {
        for (j, s) in target.iter().enumerate() {
            e_t[j] = e_t[j].max(s.e_t.abs());
            e_q[j] = e_q[j].max(s.e_q.abs());
        }
    }
    Ok(SplitMaxima { e_t, e_q })
}

/// Measured and estimated error of one Helmholtz coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientError {
    pub ell: i64,
    pub measured: f64,
    pub estimate: f64,
}

/// Flat panel [-h/2, h/2] with unit density and an n-point rule, center i r:
/// |alpha_l - alpha_l^ref| against the per-coefficient estimate for 0 <= l <= lmax.
pub fn helmholtz_panel_study(h: f64, n: usize, r: f64, omega: f64, lmax: usize) -> Result<Vec<CoefficientError>> {
    let seg: Arc<dyn Curve> =
        Arc::new(Segment { start: Complex64::new(-0.5 * h, 0.0), end: Complex64::new(0.5 * h, 0.0) });
    let coarse = panelize(Arc::clone(&seg), 1, n)?;
    let fine = panelize(seg, 32, 40)?;
    let zc = Complex64::new(0.0, r);
    let a = helmholtz_coefficients(&coarse, |_| 1.0, zc, lmax, omega, r)?;
    let ar = helmholtz_coefficients(&fine, |_| 1.0, zc, lmax, omega, r)?;
    let cfg = QbxConfig::new(lmax, r, n, h, QbxGeometry::Panel2d)?;
    (0..=lmax as i64)
        .map(|ell| {
            let measured = (a.coefficient(ell).expect("in range") - ar.coefficient(ell).expect("in range")).norm();
            let estimate = estimate_helmholtz(&cfg, omega, HelmholtzForm::PerCoefficient(ell))?.magnitude;
            Ok(CoefficientError { ell, measured, estimate })
        })
        .collect()
}

/// Density on the starfish used by the contour study.
pub fn starfish_density(t: f64) -> f64 {
    1.0 + 0.3 * (2.0 * t).cos() + 0.2 * (5.0 * t).sin()
}

/// Double layer sum_k sigma_k Im(dw_k / (w_k - z)) with dw = w'(t) times the weight.
pub fn double_layer(pc: &PanelizedCurve, sigma: impl Fn(f64) -> f64, z: Complex64) -> f64 {
    pc.nodes().iter().map(|nd| sigma(nd.t) * (nd.dz * nd.weight / (nd.z - z)).im).sum()
}

/// One ray of the starfish study, from a panel midpoint inward.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayProfile {
    pub panel: usize,
    pub distances: Vec<f64>,
    /// |u - u_ref| / max |u_ref|.
    pub measured: Vec<f64>,
    /// Panel estimate on the same relative scale.
    pub estimate: Vec<f64>,
}

impl RayProfile {
    /// Largest distance at which `values` is still at or above `level`,
    /// log-interpolated to the next sample; `None` if never reached or never left.
    pub fn crossing(&self, values: &[f64], level: f64) -> Option<f64> {
        let j = values.iter().rposition(|&v| v >= level)?;
        if j + 1 >= values.len() {
            return None;
        }
        let f = (values[j].ln() - level.ln()) / (values[j].ln() - values[j + 1].ln());
        let (d0, d1) = (self.distances[j].ln(), self.distances[j + 1].ln());
        Some((d0 + f * (d1 - d0)).exp())
    }
}

/// Starfish with `panels` panels of `n` points: error profiles along rays through
/// `rays` evenly spread panel midpoints, at `samples` log-spaced depths in [d_min, d_max].
pub fn starfish_study(
    panels: usize,
    n: usize,
    rays: usize,
    (d_min, d_max, samples): (f64, f64, usize),
    height: PoleHeight,
) -> Result<Vec<RayProfile>> {
    if samples < 2 || !(d_min > 0.0 && d_max > d_min) {
        return Err(Error::invalid("need at least two depths with 0 < d_min < d_max"));
    }
    let curve: Arc<dyn Curve> = Arc::new(Starfish::default());
    let pc = panelize(Arc::clone(&curve), panels, n)?;
    let fine = pc.refined(8)?;
    let sup: Vec<f64> = pc
        .intervals()
        .iter()
        .map(|&(a, b)| (0..200).map(|k| starfish_density(a + (b - a) * k as f64 / 199.0).abs()).fold(0.0, f64::max))
        .collect();
    let distances: Vec<f64> = (0..samples)
        .map(|k| (d_min.ln() + (d_max / d_min).ln() * k as f64 / (samples - 1) as f64).exp())
        .collect();
    let mut profiles = Vec::with_capacity(rays);
    let mut refs = Vec::with_capacity(rays);
    for k in 0..rays {
        let panel = ((k * panels) as f64 / rays as f64).round() as usize % panels;
        let (a, b) = pc.intervals()[panel];
        let tm = 0.5 * (a + b);
        let zm = curve.point(tm);
        let dz = curve.derivative(tm);
        let outward = -Complex64::i() * dz / dz.norm();
        let zs: Vec<Complex64> = distances.iter().map(|&d| zm - outward * d).collect();
        let uref: Vec<f64> = zs.iter().map(|&z| double_layer(&fine, starfish_density, z)).collect();
        let coarse: Vec<f64> = zs.iter().map(|&z| double_layer(&pc, starfish_density, z)).collect();
        let estimate = zs
            .iter()
            .map(|&z| estimate_panel_dbl_layer(&pc, &sup, z, height).map(|e| e.magnitude))
            .collect::<Result<Vec<f64>>>()?;
        refs.push((uref, coarse));
        profiles.push(RayProfile { panel, distances: distances.clone(), measured: Vec::new(), estimate });
    }
    let unorm = refs.iter().flat_map(|(u, _)| u.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    for (prof, (uref, coarse)) in profiles.iter_mut().zip(refs) {
        prof.measured = uref.iter().zip(&coarse).map(|(r, c)| (r - c).abs() / unorm).collect();
        prof.estimate.iter_mut().for_each(|e| *e /= unorm);
    }
    Ok(profiles)
}
