//! Closed-form quadrature error estimates.
//!
//! Every magnitude is assembled as a logarithm and exponentiated once, so
//! factors like (2n)^{p-1} / Gamma(p) and (1 + b)^{-n} never overflow.

use std::f64::consts::{E, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{legendre_leading_coefficient, Geometry, Singularity};
use crate::quadrature::{Curve, PanelizedCurve, RuleKind};
use crate::remainder::{residue_remainder, sqrt_exterior, KernelKind, ResidueVariant};
use crate::specfun::{ln_exp_partial_sum, ln_factorial, ln_gamma, ln_upper_incomplete_gamma};

/// Registered estimate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    ClassicGl,
    GlComplexTheorem,
    GlComplexSimplified,
    GlCartesianTheorem,
    GlCartesianWorstCaseA0,
    GlCartesianFull,
    TrapzComplexTheorem,
    TrapzCartesianTheorem,
    PanelDoubleLayer,
    Qbx2dPerCoefficient,
    Qbx2dSum,
    Qbx2dSimplified,
    Qbx2dUpperBound,
    Qbx2dIncompleteGamma,
    PatchKernelLevel,
    PatchSum,
    PatchSimplified,
    HelmholtzPerCoefficient,
    HelmholtzTotal,
    SpheroidTrapzCrossSection,
    SpheroidGlCrossSection,
    SpheroidGlCompact,
    SpheroidCombined,
    SpheroidCombinedSimplified,
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Which approximations an estimate leans on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub asymptotic_in_n: bool,
    pub small_b: bool,
    pub worst_case_a0: bool,
}

/// Parameters an estimate was computed from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateInputs {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub b: Option<f64>,
    pub r: Option<f64>,
    pub h: Option<f64>,
    pub geometry: Option<String>,
}

/// A predicted error magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub formula: FormulaId,
    /// Natural logarithm of the magnitude (`-inf` for an exact zero).
    pub ln_magnitude: f64,
    pub magnitude: f64,
    pub inputs: EstimateInputs,
    pub flags: RegimeFlags,
}

impl ErrorEstimate {
    fn from_ln(formula: FormulaId, ln_magnitude: f64, inputs: EstimateInputs, flags: RegimeFlags) -> Self {
        ErrorEstimate { formula, ln_magnitude, magnitude: ln_magnitude.exp(), inputs, flags }
    }

    pub fn log10(&self) -> f64 {
        self.ln_magnitude / std::f64::consts::LN_10
    }
}

fn lgamma(x: f64) -> f64 {
    ln_gamma(x).expect("positive argument")
}

/// ln sum_i exp(v_i).
fn ln_sum(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

fn sing_inputs(s: &Singularity, n: usize) -> EstimateInputs {
    let geometry = match s.geometry {
        Geometry::Interval => "interval",
        Geometry::Circle => "circle",
    };
    EstimateInputs { n: Some(n), p: Some(s.p), b: Some(s.b), geometry: Some(geometry.into()), ..Default::default() }
}

const ASYMPTOTIC: RegimeFlags = RegimeFlags { asymptotic_in_n: true, small_b: false, worst_case_a0: false };

/// Classic bound L^{2n+1} (n!)^4 / ((2n+1) ((2n)!)^3) sup |f^{(2n)}|.
pub fn classic_gl_bound(n: usize, length: f64, d2n_norm: f64) -> Result<ErrorEstimate> {
    if n == 0 {
        return Err(Error::invalid("classic bound needs n >= 1"));
    }
    if !(length > 0.0) || !(d2n_norm >= 0.0) {
        return Err(Error::invalid("need a positive length and a nonnegative derivative norm"));
    }
    let nf = n as f64;
    let ln = (2.0 * nf + 1.0) * length.ln() + 4.0 * ln_factorial(n) - (2.0 * nf + 1.0).ln()
        - 3.0 * ln_factorial(2 * n)
        + d2n_norm.ln();
    let inputs = EstimateInputs { n: Some(n), geometry: Some("interval".into()), ..Default::default() };
    Ok(ErrorEstimate::from_ln(FormulaId::ClassicGl, ln, inputs, RegimeFlags::default()))
}

/// ln sup over [-1, 1] of |d^m/dx^m 1/(x^2 + b^2)|, attained at x = 0: m! / b^{m+2}.
pub fn ln_sup_derivative_g1(m: usize, b: f64) -> f64 {
    ln_factorial(m) - (m as f64 + 2.0) * b.ln()
}

/// Form of the Gauss-Legendre complex-kernel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlComplexForm {
    Theorem,
    Simplified,
}

/// ln |(2n+1)/w|^q 2 pi / |z + w|^{2n+1}, the large-n k_n^{(q)} with c_n = 2 pi.
fn ln_kq_theorem(n: usize, q: f64, z0: Complex64) -> f64 {
    let w = sqrt_exterior(z0);
    let m = (2 * n + 1) as f64;
    (2.0 * PI).ln() + q * (m / w.norm()).ln() - m * (z0 + w).norm().ln()
}

/// Error of n-point Gauss-Legendre on f_p = (z - z0)^{-p}.
pub fn estimate_gl_complex(s: &Singularity, n: usize, form: GlComplexForm) -> Result<ErrorEstimate> {
    let p = s.p;
    let inputs = sing_inputs(s, n);
    Ok(match form {
        GlComplexForm::Theorem => {
            let ln = ln_kq_theorem(n, p - 1.0, s.z0()) - lgamma(p);
            ErrorEstimate::from_ln(FormulaId::GlComplexTheorem, ln, inputs, ASYMPTOTIC)
        }
        GlComplexForm::Simplified => {
            let ln = (2.0 * PI).ln() - lgamma(p) + (p - 1.0) * (2.0 * n as f64).ln() - 2.0 * s.b * n as f64;
            let flags = RegimeFlags { asymptotic_in_n: true, small_b: true, worst_case_a0: true };
            ErrorEstimate::from_ln(FormulaId::GlComplexSimplified, ln, inputs, flags)
        }
    })
}

/// Form of the Gauss-Legendre Cartesian-kernel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlCartesianForm {
    Theorem,
    WorstCaseA0,
    FullPLe3,
}

/// Error of n-point Gauss-Legendre on g_p = ((x - a)^2 + b^2)^{-p}.
///
/// The theorem form takes |Im| of k_n^{(p-1)} for odd p and |Re| for even p;
/// for half-integer p it uses the modulus.
pub fn estimate_gl_cartesian(s: &Singularity, n: usize, form: GlCartesianForm) -> Result<ErrorEstimate> {
    let p = s.p;
    let b = s.b;
    let inputs = sing_inputs(s, n);
    match form {
        GlCartesianForm::Theorem => {
            let base = 2f64.ln() - lgamma(p) - p * (2.0 * b).ln();
            let ln_k = match s.integer_order() {
                Some(pi) => {
                    let z0 = s.z0();
                    let w = sqrt_exterior(z0);
                    let m = (2 * n + 1) as f64;
                    // Phase of k^{(p-1)} with the modulus factored out.
                    let phase = (-m * (z0 + w).arg() + (pi as f64 - 1.0) * (-m / w).arg()).sin_cos();
                    let part = if pi % 2 == 1 { phase.0.abs() } else { phase.1.abs() };
                    ln_kq_theorem(n, p - 1.0, z0) + part.ln()
                }
                None => ln_kq_theorem(n, p - 1.0, s.z0()),
            };
            Ok(ErrorEstimate::from_ln(FormulaId::GlCartesianTheorem, base + ln_k, inputs, ASYMPTOTIC))
        }
        GlCartesianForm::WorstCaseA0 => {
            let nf = n as f64;
            let ln = (2.0 * PI).ln() - lgamma(p) - p * b.ln() + (p - 1.0) * nf.ln() - 2.0 * b * nf;
            let flags = RegimeFlags { asymptotic_in_n: true, small_b: true, worst_case_a0: true };
            Ok(ErrorEstimate::from_ln(FormulaId::GlCartesianWorstCaseA0, ln, inputs, flags))
        }
        GlCartesianForm::FullPLe3 => {
            let r = residue_remainder(RuleKind::GaussLegendre, s, n, KernelKind::Cartesian, ResidueVariant::Full)?;
            Ok(ErrorEstimate::from_ln(FormulaId::GlCartesianFull, r.norm().ln(), inputs, RegimeFlags::default()))
        }
    }
}

/// Error of the n-point trapezoidal rule on f_p(e^{it}) with |z0| = 1 + b.
pub fn estimate_trapz_complex(s: &Singularity, n: usize) -> Result<ErrorEstimate> {
    let p = s.p;
    let ln = (2.0 * PI).ln() + (p - 1.0) * (n as f64 + p).ln() - lgamma(p) - (n as f64 + p) * (1.0 + s.b).ln();
    Ok(ErrorEstimate::from_ln(FormulaId::TrapzComplexTheorem, ln, sing_inputs(s, n), ASYMPTOTIC))
}

/// Error of the n-point trapezoidal rule on g_p(cos t, sin t) with x0 = 1 + b.
pub fn estimate_trapz_cartesian(s: &Singularity, n: usize) -> Result<ErrorEstimate> {
    let p = s.p;
    let b = s.b;
    let ln = (4.0 * PI).ln() - lgamma(p) - p * (b * b + 2.0 * b).ln() + (p - 1.0) * (n as f64).ln()
        - n as f64 * (1.0 + b).ln();
    Ok(ErrorEstimate::from_ln(FormulaId::TrapzCartesianTheorem, ln, sing_inputs(s, n), ASYMPTOTIC))
}

/// Scales an estimate by |sigma| at the point closest to the pole.
pub fn density_weighted(est: &ErrorEstimate, sigma_at_closest: Complex64) -> ErrorEstimate {
    let mut out = est.clone();
    out.ln_magnitude += sigma_at_closest.norm().ln();
    out.magnitude = out.ln_magnitude.exp();
    out
}

/// How the imaginary part of the mapped pole is taken from the distance d to
/// a panel of length L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleHeight {
    /// Im z0 = d / L.
    #[default]
    DOverL,
    /// Im z0 = 2 d / L, the height under the affine map onto [-1, 1].
    TwoDOverL,
}

/// Shortest distance from `z` to the curve piece over parameters [t0, t1].
pub fn distance_to_panel(curve: &dyn Curve, t0: f64, t1: f64, z: Complex64) -> (f64, f64) {
    const SAMPLES: usize = 256;
    let dist = |t: f64| (curve.point(t) - z).norm();
    let dt = (t1 - t0) / SAMPLES as f64;
    let (mut best_t, mut best) = (t0, dist(t0));
    for i in 1..=SAMPLES {
        let t = t0 + dt * i as f64;
        let d = dist(t);
        if d < best {
            best = d;
            best_t = t;
        }
    }
    let (mut lo, mut hi) = ((best_t - dt).max(t0), (best_t + dt).min(t1));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let d = dist(t);
    if d < best {
        (d, t)
    } else {
        (best, best_t)
    }
}

/// Pole location of a target `z` relative to panel `panel` mapped to [-1, 1].
pub fn panel_pole_map(pc: &PanelizedCurve, panel: usize, z: Complex64, height: PoleHeight) -> Result<Singularity> {
    let (t0, t1) = *pc
        .intervals()
        .get(panel)
        .ok_or_else(|| Error::invalid(format!("panel {panel} out of range")))?;
    let curve = pc.curve().as_ref();
    let (d, _) = distance_to_panel(curve, t0, t1, z);
    if d <= 1e-14 {
        return Err(Error::SingularTarget(panel));
    }
    let (e1, e2) = (curve.point(t0), curve.point(t1));
    let mapped = (2.0 * z - (e1 + e2)) / (e2 - e1);
    let len = pc.arc_lengths()[panel];
    let im = match height {
        PoleHeight::DOverL => d / len,
        PoleHeight::TwoDOverL => 2.0 * d / len,
    };
    Singularity::interval(mapped.re, im, 1.0)
}

/// Panel error estimate for the double layer potential at `z`, summed over the
/// two nearest panels: 2 pi ||sigma||_i / |z0 + sqrt(z0^2 - 1)|^{2n+1}.
///
/// `sigma_sup[i]` is the sup norm of the density on panel i.
pub fn estimate_panel_dbl_layer(
    pc: &PanelizedCurve,
    sigma_sup: &[f64],
    z: Complex64,
    height: PoleHeight,
) -> Result<ErrorEstimate> {
    if sigma_sup.len() != pc.n_panels() {
        return Err(Error::invalid("one density norm per panel required"));
    }
    let curve = pc.curve().as_ref();
    let mut dists: Vec<(f64, usize)> = pc
        .intervals()
        .iter()
        .enumerate()
        .map(|(i, &(t0, t1))| (distance_to_panel(curve, t0, t1, z).0, i))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pc.rule_size();
    let m = (2 * n + 1) as f64;
    let mut terms = Vec::with_capacity(2);
    for &(_, i) in dists.iter().take(2) {
        let s = panel_pole_map(pc, i, z, height)?;
        let z0 = s.z0();
        terms.push((2.0 * PI * sigma_sup[i]).ln() - m * (z0 + sqrt_exterior(z0)).norm().ln());
    }
    let inputs = EstimateInputs {
        n: Some(n),
        b: Some(dists[0].0),
        geometry: Some("panel2d".into()),
        ..Default::default()
    };
    Ok(ErrorEstimate::from_ln(FormulaId::PanelDoubleLayer, ln_sum(terms), inputs, ASYMPTOTIC))
}

/// Geometry a QBX configuration refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum QbxGeometry {
    Panel2d,
    Circle2d,
    Patch3d,
    /// Spheroid with semi-axes a (equatorial) and c (polar); `n_s` trapezoidal
    /// points around, the configuration's n Gauss-Legendre points from pole to pole.
    Spheroid { a: f64, c: f64, n_s: usize },
}

/// Parameters of a QBX error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QbxConfig {
    /// Expansion order.
    pub p: usize,
    /// Distance from the expansion center to the surface.
    pub r: f64,
    /// Rule size per panel, or per patch direction.
    pub n: usize,
    /// Panel length or patch side.
    pub h: f64,
    pub geometry: QbxGeometry,
    /// Density magnitude entering the estimate (sup norm or value at the target).
    pub sigma_norm: f64,
    /// Panel constant C; 2 pi for a flat panel.
    pub panel_constant: f64,
}

impl QbxConfig {
    pub fn new(p: usize, r: f64, n: usize, h: f64, geometry: QbxGeometry) -> Result<Self> {
        if !(r > 0.0) || !(h > 0.0) || n == 0 {
            return Err(Error::invalid(format!("need r > 0, h > 0, n >= 1 (r = {r}, h = {h}, n = {n})")));
        }
        Ok(QbxConfig { p, r, n, h, geometry, sigma_norm: 1.0, panel_constant: 2.0 * PI })
    }

    pub fn with_sigma(mut self, sigma_norm: f64) -> Self {
        self.sigma_norm = sigma_norm;
        self
    }

    pub fn with_order(mut self, p: usize) -> Self {
        self.p = p;
        self
    }

    /// 4 n r / h, the exponent of the panel decay.
    pub fn decay(&self) -> f64 {
        4.0 * self.n as f64 * self.r / self.h
    }

    fn inputs(&self) -> EstimateInputs {
        let g = match self.geometry {
            QbxGeometry::Panel2d => "panel2d",
            QbxGeometry::Circle2d => "circle2d",
            QbxGeometry::Patch3d => "patch3d",
            QbxGeometry::Spheroid { .. } => "spheroid",
        };
        EstimateInputs {
            n: Some(self.n),
            p: Some(self.p as f64),
            r: Some(self.r),
            h: Some(self.h),
            geometry: Some(g.into()),
            ..Default::default()
        }
    }
}

/// Forms of the 2D QBX quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qbx2dForm {
    /// Error of coefficient j.
    PerCoefficient(usize),
    Sum,
    Simplified,
    UpperBound,
    IncompleteGamma,
}

const SMALL_B: RegimeFlags = RegimeFlags { asymptotic_in_n: true, small_b: true, worst_case_a0: true };

/// ln sum_{j=1}^p j^{-1/2} (x e / j)^j.
fn ln_stirling_sum(p: usize, x: f64) -> f64 {
    ln_sum((1..=p).map(|j| {
        let jf = j as f64;
        -0.5 * jf.ln() + jf * (x * E / jf).ln()
    }))
}

/// 2D QBX quadrature error on Gauss-Legendre panels.
pub fn estimate_qbx2d(cfg: &QbxConfig, form: Qbx2dForm) -> Result<ErrorEstimate> {
    let x = cfg.decay();
    let c = cfg.panel_constant.ln() + cfg.sigma_norm.ln();
    let h4n = (cfg.h / (4.0 * cfg.n as f64)).ln();
    let (id, ln) = match form {
        Qbx2dForm::PerCoefficient(j) => {
            let jf = j as f64;
            let ln = c - ln_factorial(j) + (jf - 1.0) * (4.0 * cfg.n as f64 / cfg.h).ln() - x;
            (FormulaId::Qbx2dPerCoefficient, ln)
        }
        Qbx2dForm::Sum => (FormulaId::Qbx2dSum, c + h4n + ln_exp_partial_sum(cfg.p, x) - x),
        Qbx2dForm::Simplified => {
            let cprime = cfg.panel_constant / (4.0 * (2.0 * PI).sqrt());
            let ln = cprime.ln() + cfg.sigma_norm.ln() + (cfg.h / cfg.n as f64).ln() + ln_stirling_sum(cfg.p, x) - x;
            (FormulaId::Qbx2dSimplified, ln)
        }
        Qbx2dForm::UpperBound => (FormulaId::Qbx2dUpperBound, c + h4n),
        Qbx2dForm::IncompleteGamma => {
            let ln = c + h4n + ln_upper_incomplete_gamma(cfg.p + 1, x)? - ln_factorial(cfg.p);
            (FormulaId::Qbx2dIncompleteGamma, ln)
        }
    };
    Ok(ErrorEstimate::from_ln(id, ln, cfg.inputs(), SMALL_B))
}

/// Forms of the flat-patch estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchForm {
    /// Error of the degree-l Legendre kernel integral over the patch.
    KernelLevel(usize),
    Sum,
    Simplified,
}

/// 3D QBX quadrature error on a flat square n x n Gauss-Legendre patch of side h.
pub fn estimate_qbx3d_patch(cfg: &QbxConfig, form: PatchForm) -> Result<ErrorEstimate> {
    let x = cfg.decay();
    let nf = cfg.n as f64;
    let (id, ln) = match form {
        PatchForm::KernelLevel(l) => {
            let lf = l as f64;
            let ln = (4.0 * PI.powf(1.5) * legendre_leading_coefficient(l)).ln() - lgamma(lf + 0.5)
                + (lf - 1.0) * (2.0 * nf / cfg.h).ln()
                - x;
            (FormulaId::PatchKernelLevel, ln)
        }
        PatchForm::Sum => {
            let terms = (0..=cfg.p).map(|l| {
                let lf = l as f64;
                (2.0 * PI.powf(1.5)).ln() + ln_factorial(2 * l) - lgamma(lf + 0.5) - 2.0 * ln_factorial(l)
                    + lf * (nf * cfg.r / cfg.h).ln()
            });
            let ln = cfg.sigma_norm.ln() + (cfg.h / nf).ln() + ln_sum(terms) - x;
            (FormulaId::PatchSum, ln)
        }
        PatchForm::Simplified => {
            let ln = (2.0 * PI).sqrt().ln() + cfg.sigma_norm.ln() + (cfg.h / nf).ln() + ln_stirling_sum(cfg.p, x) - x;
            (FormulaId::PatchSimplified, ln)
        }
    };
    Ok(ErrorEstimate::from_ln(id, ln, cfg.inputs(), SMALL_B))
}

/// Forms of the Helmholtz estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HelmholtzForm {
    /// Error of coefficient ell.
    PerCoefficient(i64),
    Total,
}

/// 2D Helmholtz QBX quadrature error on a flat Gauss-Legendre panel.
pub fn estimate_helmholtz(cfg: &QbxConfig, omega: f64, form: HelmholtzForm) -> Result<ErrorEstimate> {
    if !(omega > 0.0) {
        return Err(Error::invalid(format!("wavenumber must be positive, got {omega}")));
    }
    let x = cfg.decay();
    let nf = cfg.n as f64;
    let (id, ln) = match form {
        HelmholtzForm::PerCoefficient(ell) => {
            let lf = ell.unsigned_abs() as f64;
            let ln = (cfg.h / (8.0 * nf)).ln() + lf * (8.0 * nf / (cfg.h * omega)).ln() - x + cfg.sigma_norm.ln();
            (FormulaId::HelmholtzPerCoefficient, ln)
        }
        HelmholtzForm::Total => {
            let ln = -(4.0 * (2.0 * PI).sqrt()).ln() + (cfg.h / nf).ln() + ln_stirling_sum(cfg.p, x) - x
                + cfg.sigma_norm.ln();
            (FormulaId::HelmholtzTotal, ln)
        }
    };
    Ok(ErrorEstimate::from_ln(id, ln, cfg.inputs(), SMALL_B))
}

/// Geometry of the half-ellipse cross section of a spheroid seen from an
/// expansion center at distance r from the point with parameter t_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpheroidCrossSection {
    pub a: f64,
    pub c: f64,
    pub r: f64,
    pub t_c: f64,
    /// |n(t_c)| = sqrt(a^2 cos^2 t_c + c^2 sin^2 t_c).
    pub normal_norm: f64,
    /// sqrt((a c r + |n|^3) / |n|).
    pub k: f64,
    /// Pole in the [-1, 1] variable: u_r + i u_i.
    pub u0: Complex64,
    /// Convergence base 1 / |u0 + sqrt(u0^2 - 1)|.
    pub beta: f64,
}

impl SpheroidCrossSection {
    pub fn new(a: f64, c: f64, r: f64, t_c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0 && r > 0.0) || !(0.0..=PI).contains(&t_c) {
            return Err(Error::invalid(format!("bad spheroid section a = {a}, c = {c}, r = {r}, t_c = {t_c}")));
        }
        let nn = (a * a * t_c.cos().powi(2) + c * c * t_c.sin().powi(2)).sqrt();
        let k = ((a * c * r + nn.powi(3)) / nn).sqrt();
        let u0 = Complex64::new((2.0 * t_c - PI) / PI, 2.0 * r / (PI * k));
        let beta = 1.0 / (u0 + sqrt_exterior(u0)).norm();
        Ok(SpheroidCrossSection { a, c, r, t_c, normal_norm: nn, k, u0, beta })
    }

    /// Expansion center and unit outward normal in the (x, z) half plane.
    pub fn center_and_normal(&self) -> ([f64; 2], [f64; 2]) {
        let (s, co) = self.t_c.sin_cos();
        let nn = self.normal_norm;
        let x0 = [(self.a + self.r * self.c / nn) * s, (self.c + self.r * self.a / nn) * co];
        (x0, [self.c * s / nn, self.a * co / nn])
    }
}

/// Parameter of the slowest-converging half-ellipse section.
///
/// For a <= c this is pi/2; otherwise a golden-section search on [0, pi/2]
/// (the base is symmetric about pi/2).
pub fn find_tstar(a: f64, c: f64, r: f64) -> Result<SpheroidCrossSection> {
    if a <= c {
        return SpheroidCrossSection::new(a, c, r, PI / 2.0);
    }
    let beta = |t: f64| SpheroidCrossSection::new(a, c, r, t).map(|s| s.beta).unwrap_or(0.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, PI / 2.0);
    let mut m1 = hi - g * (hi - lo);
    let mut m2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (beta(m1), beta(m2));
    while hi - lo > 1e-10 {
        if f1 > f2 {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - g * (hi - lo);
            f1 = beta(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + g * (hi - lo);
            f2 = beta(m2);
        }
    }
    SpheroidCrossSection::new(a, c, r, 0.5 * (lo + hi))
}

/// Pieces of the spheroid estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpheroidPart {
    /// Trapezoidal error of the degree-l kernel, integrated over the surface.
    TrapzCrossSection(usize),
    /// Gauss-Legendre error of the degree-l kernel at the slowest section, integrated over the surface.
    GlCrossSection(usize),
    /// Compact Gauss-Legendre form, a <= c only.
    GlCompact(usize),
    /// sum over l of r^l (trapezoidal + Gauss-Legendre) times the density.
    Combined,
    /// Stirling-simplified combined form, a <= c only.
    CombinedSimplified,
}

fn ln_bl_over_gamma(l: usize) -> f64 {
    legendre_leading_coefficient(l).ln() - lgamma(l as f64 + 0.5)
}

/// ln of the trapezoidal part for degree l with n_s points.
fn ln_spheroid_trapz(a: f64, r: f64, l: usize, n_s: usize) -> f64 {
    let (lf, nf) = (l as f64, n_s as f64);
    ln_bl_over_gamma(l) + (4.0 * PI.powf(1.5) * a / nf).ln() + lf * (nf / (2.0 * a)).ln()
        - (lf + nf) * (1.0 + r / a).ln()
}

/// ln of the half-ellipse Gauss-Legendre error for degree l with n points, before the strip width.
fn ln_half_ellipse(cs: &SpheroidCrossSection, l: usize, n: usize) -> f64 {
    let lf = l as f64;
    let w = sqrt_exterior(cs.u0);
    let m = (2 * n + 1) as f64;
    ln_bl_over_gamma(l) + (2.0 * PI.powf(1.5) * cs.normal_norm).ln()
        - lf * (PI * cs.k).ln()
        - 0.5 * (cs.r * cs.k).ln()
        + (lf - 0.5) * (m / w.norm()).ln()
        - m * (cs.u0 + w).norm().ln()
}

fn ln_strip_gl(a: f64, c: f64, r: f64, n: usize) -> f64 {
    (PI * (r / (2.0 * n as f64) * a.max(c)).sqrt()).ln()
}

/// Spheroid estimates; the trapezoidal size comes from the geometry, the
/// Gauss-Legendre size from `cfg.n`.
pub fn estimate_spheroid(cfg: &QbxConfig, part: SpheroidPart) -> Result<ErrorEstimate> {
    let QbxGeometry::Spheroid { a, c, n_s } = cfg.geometry else {
        return Err(Error::invalid("spheroid estimate needs a spheroid geometry"));
    };
    let r = cfg.r;
    let n = cfg.n;
    let flags = RegimeFlags { asymptotic_in_n: true, small_b: true, worst_case_a0: false };
    let compact_only = |what: &str| -> Result<()> {
        if a > c {
            Err(Error::UnsupportedCombination(format!("{what} requires a <= c (a = {a}, c = {c})")))
        } else {
            Ok(())
        }
    };
    let (id, ln) = match part {
        SpheroidPart::TrapzCrossSection(l) => (FormulaId::SpheroidTrapzCrossSection, ln_spheroid_trapz(a, r, l, n_s)),
        SpheroidPart::GlCrossSection(l) => {
            let cs = find_tstar(a, c, r)?;
            (FormulaId::SpheroidGlCrossSection, ln_half_ellipse(&cs, l, n) + ln_strip_gl(a, c, r, n))
        }
        SpheroidPart::GlCompact(l) => {
            compact_only("compact half-ellipse form")?;
            let (lf, nf) = (l as f64, n as f64);
            let ln = ln_bl_over_gamma(l) + (PI.powf(2.5) * c / nf).ln() + lf * (2.0 * nf / (c * PI)).ln()
                - 4.0 * nf * r / (c * PI);
            (FormulaId::SpheroidGlCompact, ln)
        }
        SpheroidPart::Combined => {
            let cs = find_tstar(a, c, r)?;
            let strip = ln_strip_gl(a, c, r, n);
            let terms = (0..=cfg.p).map(|l| {
                let t = ln_spheroid_trapz(a, r, l, n_s);
                let g = ln_half_ellipse(&cs, l, n) + strip;
                l as f64 * r.ln() + ln_sum([t, g])
            });
            (FormulaId::SpheroidCombined, cfg.sigma_norm.ln() + ln_sum(terms))
        }
        SpheroidPart::CombinedSimplified => {
            compact_only("simplified combined form")?;
            let (ns, nf) = (n_s as f64, n as f64);
            let terms = (1..=cfg.p).map(|l| {
                let lf = l as f64;
                let t = (2.0 * (2.0 * PI).sqrt() * a / (ns * lf.sqrt())).ln() + lf * (ns * r * E / (a * lf)).ln()
                    - ns * r / a;
                let g = (PI.powf(1.5) / 2f64.sqrt() * c / (nf * lf.sqrt())).ln()
                    + lf * (4.0 * nf * r * E / (PI * c * lf)).ln()
                    - 4.0 * nf * r / (c * PI);
                ln_sum([t, g])
            });
            (FormulaId::SpheroidCombinedSimplified, cfg.sigma_norm.ln() + ln_sum(terms))
        }
    };
    let mut inputs = cfg.inputs();
    inputs.b = Some(r);
    Ok(ErrorEstimate::from_ln(id, ln, inputs, flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classic_bound_zero_norm() {
        assert_eq!(classic_gl_bound(5, 2.0, 0.0).unwrap().magnitude, 0.0);
        assert!(classic_gl_bound(0, 2.0, 1.0).is_err());
    }

    #[test]
    fn trapz_complex_p1() {
        let s = Singularity::circle(0.2, 1.0).unwrap();
        let e = estimate_trapz_complex(&s, 100).unwrap();
        assert_relative_eq!(e.magnitude, 2.0 * PI * 1.2f64.powi(-101), max_relative = 1e-12);
    }

    #[test]
    fn prolate_tstar_closed_form() {
        let cs = find_tstar(1.0, 2.0, 0.2).unwrap();
        assert_eq!(cs.t_c, PI / 2.0);
        assert_relative_eq!(cs.normal_norm, 2.0, epsilon = 1e-15);
        assert_relative_eq!(cs.k, (4.0f64 + 0.2).sqrt(), epsilon = 1e-15);
        assert!(cs.u0.re.abs() < 1e-15);
    }

    #[test]
    fn compact_forms_reject_oblate() {
        let cfg = QbxConfig::new(5, 0.2, 40, 1.0, QbxGeometry::Spheroid { a: 2.0, c: 1.0, n_s: 40 }).unwrap();
        assert!(matches!(estimate_spheroid(&cfg, SpheroidPart::GlCompact(2)), Err(Error::UnsupportedCombination(_))));
    }

    #[test]
    fn formula_names() {
        assert_eq!(FormulaId::Qbx2dSum.to_string(), "qbx2d_sum");
    }
}
