//! Gauss-Legendre and periodic trapezoidal rules, a process-wide rule cache,
//! and composite (panel) quadrature on parametrized curves.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::legendre_p;

/// Largest Gauss-Legendre rule we construct.
pub const MAX_GL_POINTS: usize = 10_000;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;
/// Points per panel used for arc lengths.
const ARC_LENGTH_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Nodes on [-1, 1].
    GaussLegendre,
    /// Equispaced nodes on [0, 2pi).
    TrapezoidalPeriodic,
}

impl RuleKind {
    /// Canonical parameter interval of the rule.
    pub fn canonical_domain(self) -> (f64, f64) {
        match self {
            RuleKind::GaussLegendre => (-1.0, 1.0),
            RuleKind::TrapezoidalPeriodic => (0.0, 2.0 * PI),
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::GaussLegendre => write!(f, "gauss_legendre"),
            RuleKind::TrapezoidalPeriodic => write!(f, "trapezoidal_periodic"),
        }
    }
}

/// An n-point rule on its canonical domain. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: RuleKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Affine map from the canonical domain of a rule onto `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub start: f64,
    pub end: f64,
}

impl AffineMap {
    pub fn new(start: f64, end: f64) -> Self {
        AffineMap { start, end }
    }

    /// Maps a canonical parameter and returns `(mapped, jacobian)`.
    pub fn map(&self, kind: RuleKind, s: f64) -> (f64, f64) {
        let (c0, c1) = kind.canonical_domain();
        let jac = (self.end - self.start) / (c1 - c0);
        (self.start + (s - c0) * jac, jac)
    }
}

impl QuadratureRule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterates over `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Weighted sum of `f` over the rule, optionally mapped onto another interval.
    pub fn apply<F>(&self, mut f: F, scaling: Option<AffineMap>) -> Result<Complex64>
    where
        F: FnMut(f64) -> Complex64,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (x, w)) in self.iter().enumerate() {
            let (t, jac) = match scaling {
                Some(m) => m.map(self.kind, x),
                None => (x, 1.0),
            };
            let v = f(t);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Evaluation { node: i, param: t, value: v.to_string() });
            }
            acc += v * (w * jac);
        }
        Ok(acc)
    }

    /// Real-valued convenience wrapper around [`QuadratureRule::apply`].
    pub fn apply_real<F>(&self, mut f: F, scaling: Option<AffineMap>) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        self.apply(|x| Complex64::new(f(x), 0.0), scaling).map(|v| v.re)
    }
}

/// Free-function form of [`QuadratureRule::apply`].
pub fn apply_rule<F>(rule: &QuadratureRule, f: F, scaling: Option<AffineMap>) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    rule.apply(f, scaling)
}

/// Gauss-Legendre rule by Newton iteration on P_n from Chebyshev-angle guesses.
pub fn gauss_legendre_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_GL_POINTS {
        return Err(Error::invalid(format!("Gauss-Legendre size {n} outside 1..={MAX_GL_POINTS}")));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th root counted from the right end.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_p(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        if n % 2 == 1 && i == half - 1 {
            x = 0.0;
        }
        let (_, dp) = legendre_p(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(QuadratureRule { kind: RuleKind::GaussLegendre, nodes, weights })
}

/// Periodic trapezoidal rule with nodes 2 pi k / n, k = 1..n.
pub fn trapezoidal_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::invalid("trapezoidal rule needs n >= 1"));
    }
    let h = 2.0 * PI / n as f64;
    let nodes = (1..=n).map(|k| h * k as f64).collect();
    Ok(QuadratureRule { kind: RuleKind::TrapezoidalPeriodic, nodes, weights: vec![h; n] })
}

type RuleCache = Mutex<HashMap<(RuleKind, usize), Arc<QuadratureRule>>>;

fn cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared, immutable rule keyed by `(kind, n)`.
pub fn cached_rule(kind: RuleKind, n: usize) -> Result<Arc<QuadratureRule>> {
    if let Some(r) = cache().lock().expect("rule cache poisoned").get(&(kind, n)) {
        return Ok(Arc::clone(r));
    }
    let rule = Arc::new(match kind {
        RuleKind::GaussLegendre => gauss_legendre_rule(n)?,
        RuleKind::TrapezoidalPeriodic => trapezoidal_rule(n)?,
    });
    let mut guard = cache().lock().expect("rule cache poisoned");
    Ok(Arc::clone(guard.entry((kind, n)).or_insert(rule)))
}

/// A smooth parametrized curve in the complex plane.
pub trait Curve: Send + Sync + fmt::Debug {
    fn point(&self, t: f64) -> Complex64;
    fn derivative(&self, t: f64) -> Complex64;
    /// Parameter interval.
    fn domain(&self) -> (f64, f64);
    fn is_closed(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn unit() -> Self {
        Circle { center: Complex64::new(0.0, 0.0), radius: 1.0 }
    }
}

impl Curve for Circle {
    fn point(&self, t: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, t)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        Complex64::i() * Complex64::from_polar(self.radius, t)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn is_closed(&self) -> bool {
        true
    }
}

/// Star-shaped curve z(t) = (1 + amplitude cos(arms t)) e^{it} on [-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Starfish {
    pub arms: u32,
    pub amplitude: f64,
}

impl Default for Starfish {
    fn default() -> Self {
        Starfish { arms: 5, amplitude: 0.3 }
    }
}

impl Curve for Starfish {
    fn point(&self, t: f64) -> Complex64 {
        let k = self.arms as f64;
        Complex64::from_polar(1.0 + self.amplitude * (k * t).cos(), t)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        let k = self.arms as f64;
        let rho = 1.0 + self.amplitude * (k * t).cos();
        let drho = -self.amplitude * k * (k * t).sin();
        Complex64::new(drho, rho) * Complex64::from_polar(1.0, t)
    }
    fn domain(&self) -> (f64, f64) {
        (-PI, PI)
    }
    fn is_closed(&self) -> bool {
        true
    }
}

/// Straight segment from `start` to `end`, parametrized over [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Complex64,
    pub end: Complex64,
}

impl Curve for Segment {
    fn point(&self, t: f64) -> Complex64 {
        (self.start + self.end) * 0.5 + (self.end - self.start) * (0.5 * t)
    }
    fn derivative(&self, _t: f64) -> Complex64 {
        (self.end - self.start) * 0.5
    }
    fn domain(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
    fn is_closed(&self) -> bool {
        false
    }
}

/// One quadrature node on a panelized curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveNode {
    pub panel: usize,
    /// Index within its panel.
    pub index: usize,
    pub t: f64,
    pub z: Complex64,
    /// dz/dt.
    pub dz: Complex64,
    /// Parameter weight including the panel Jacobian.
    pub weight: f64,
}

impl CurveNode {
    /// |dz/dt| times the parameter weight.
    pub fn arc_weight(&self) -> f64 {
        self.dz.norm() * self.weight
    }

    pub fn unit_tangent(&self) -> Complex64 {
        self.dz / self.dz.norm()
    }

    /// Unit normal pointing to the right of the direction of travel
    /// (outward for counter-clockwise closed curves).
    pub fn unit_normal(&self) -> Complex64 {
        -Complex64::i() * self.unit_tangent()
    }
}

/// A curve split into equal-parameter-length panels, each carrying a GL rule.
#[derive(Debug, Clone)]
pub struct PanelizedCurve {
    curve: Arc<dyn Curve>,
    intervals: Vec<(f64, f64)>,
    arc_lengths: Vec<f64>,
    rule: Arc<QuadratureRule>,
    nodes: Vec<CurveNode>,
}

/// Splits `curve` into `n_panels` panels with an `n`-point GL rule on each.
pub fn panelize(curve: Arc<dyn Curve>, n_panels: usize, n: usize) -> Result<PanelizedCurve> {
    if n_panels == 0 {
        return Err(Error::invalid("panel count must be at least 1"));
    }
    let rule = cached_rule(RuleKind::GaussLegendre, n)?;
    let arc_rule = cached_rule(RuleKind::GaussLegendre, ARC_LENGTH_POINTS)?;
    let (t0, t1) = curve.domain();
    let dt = (t1 - t0) / n_panels as f64;
    let mut intervals = Vec::with_capacity(n_panels);
    let mut arc_lengths = Vec::with_capacity(n_panels);
    let mut nodes = Vec::with_capacity(n_panels * n);
    for i in 0..n_panels {
        let a = t0 + dt * i as f64;
        let b = if i + 1 == n_panels { t1 } else { a + dt };
        let map = AffineMap::new(a, b);
        let len = arc_rule.apply_real(|t| curve.derivative(t).norm(), Some(map))?;
        intervals.push((a, b));
        arc_lengths.push(len);
        for (j, (x, w)) in rule.iter().enumerate() {
            let (t, jac) = map.map(RuleKind::GaussLegendre, x);
            let dz = curve.derivative(t);
            if !(dz.norm() > 0.0) {
                return Err(Error::Geometry(format!("zero derivative at t = {t} on panel {i}")));
            }
            nodes.push(CurveNode { panel: i, index: j, t, z: curve.point(t), dz, weight: w * jac });
        }
    }
    Ok(PanelizedCurve { curve, intervals, arc_lengths, rule, nodes })
}

impl PanelizedCurve {
    pub fn curve(&self) -> &Arc<dyn Curve> {
        &self.curve
    }

    pub fn n_panels(&self) -> usize {
        self.intervals.len()
    }

    /// Rule size per panel.
    pub fn rule_size(&self) -> usize {
        self.rule.n()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc_lengths
    }

    pub fn total_length(&self) -> f64 {
        self.arc_lengths.iter().sum()
    }

    pub fn nodes(&self) -> &[CurveNode] {
        &self.nodes
    }

    /// Same curve with `factor` times as many panels and the same rule size.
    pub fn refined(&self, factor: usize) -> Result<PanelizedCurve> {
        panelize(Arc::clone(&self.curve), self.n_panels() * factor, self.rule_size())
    }
}

/// Sum over all panels of `f(node) |dz/dt| w`, i.e. the integral of `f` against arc length.
pub fn composite_integrate<F>(pc: &PanelizedCurve, mut f: F) -> Result<Complex64>
where
    F: FnMut(&CurveNode) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for node in pc.nodes() {
        let v = f(node);
        if !(v.re.is_finite() && v.im.is_finite()) {
            let err = Error::Evaluation { node: node.index, param: node.t, value: v.to_string() };
            return Err(err.in_panel(node.panel));
        }
        acc += v * node.arc_weight();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_gauss_rules() {
        let r = gauss_legendre_rule(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert_abs_diff_eq!(r.weights()[0], 2.0, epsilon = 1e-15);
        let r = gauss_legendre_rule(2).unwrap();
        assert_abs_diff_eq!(r.nodes()[1], 0.5773502691896258, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn size_limits() {
        assert!(gauss_legendre_rule(0).is_err());
        assert!(gauss_legendre_rule(MAX_GL_POINTS + 1).is_err());
        assert!(trapezoidal_rule(0).is_err());
    }

    #[test]
    fn trapezoid_nodes() {
        let r = trapezoidal_rule(4).unwrap();
        assert_abs_diff_eq!(r.nodes()[0], PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes()[3], 2.0 * PI, epsilon = 1e-15);
        assert!(r.weights().iter().all(|&w| (w - PI / 2.0).abs() < 1e-15));
    }

    #[test]
    fn cache_returns_same_rule() {
        let a = cached_rule(RuleKind::GaussLegendre, 17).unwrap();
        let b = cached_rule(RuleKind::GaussLegendre, 17).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn non_finite_value_names_node() {
        let r = gauss_legendre_rule(3).unwrap();
        let err = r.apply(|x| Complex64::new(1.0 / x, 0.0), None).unwrap_err();
        assert!(matches!(err, Error::Evaluation { node: 1, .. }));
    }
}
