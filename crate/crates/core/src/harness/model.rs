//! Remainder sweeps for the model kernels f_p and g_p.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::estimates::{
    estimate_gl_cartesian, estimate_gl_complex, estimate_trapz_cartesian, estimate_trapz_complex, ErrorEstimate,
    GlCartesianForm, GlComplexForm,
};
use crate::harness::precise::{hp_exact_integral, hp_remainder_with};
use crate::kernels::Singularity;
use crate::quadrature::RuleKind;
use crate::remainder::KernelKind;

/// The four rule/kernel pairings with a closed-form estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelCase {
    /// Gauss-Legendre on f_p over [-1, 1].
    GlComplex,
    /// Gauss-Legendre on g_p over [-1, 1].
    GlCartesian,
    /// Trapezoidal rule on f_p(e^{it}).
    TrapzComplex,
    /// Trapezoidal rule on g_p(cos t, sin t).
    TrapzCartesian,
}

impl fmt::Display for ModelCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelCase::GlComplex => "gl_complex",
            ModelCase::GlCartesian => "gl_cartesian",
            ModelCase::TrapzComplex => "trapz_complex",
            ModelCase::TrapzCartesian => "trapz_cartesian",
        })
    }
}

impl ModelCase {
    pub const ALL: [ModelCase; 4] =
        [ModelCase::GlComplex, ModelCase::GlCartesian, ModelCase::TrapzComplex, ModelCase::TrapzCartesian];

    pub fn rule(self) -> RuleKind {
        match self {
            ModelCase::GlComplex | ModelCase::GlCartesian => RuleKind::GaussLegendre,
            _ => RuleKind::TrapezoidalPeriodic,
        }
    }

    pub fn kernel(self) -> KernelKind {
        match self {
            ModelCase::GlComplex | ModelCase::TrapzComplex => KernelKind::Complex,
            _ => KernelKind::Cartesian,
        }
    }

    /// Pole at distance b with a = 0.
    pub fn singularity(self, p: f64, b: f64) -> Result<Singularity> {
        match self.rule() {
            RuleKind::GaussLegendre => Singularity::interval(0.0, b, p),
            RuleKind::TrapezoidalPeriodic => Singularity::circle(b, p),
        }
    }

    /// The theorem-level estimate for this case.
    pub fn estimate(self, s: &Singularity, n: usize) -> Result<ErrorEstimate> {
        match self {
            ModelCase::GlComplex => estimate_gl_complex(s, n, GlComplexForm::Theorem),
            ModelCase::GlCartesian => estimate_gl_cartesian(s, n, GlCartesianForm::Theorem),
            ModelCase::TrapzComplex => estimate_trapz_complex(s, n),
            ModelCase::TrapzCartesian => estimate_trapz_cartesian(s, n),
        }
    }
}

/// One measured sample of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub n: usize,
    pub measured: f64,
    pub estimate: f64,
}

/// A scan stops once the measured error has fallen below this on two consecutive samples.
pub const SCAN_STOP: f64 = 1e-13;

/// Measures |I - Q_n| in extended precision for n = step, 2 step, ... until the
/// error drops below [`SCAN_STOP`] twice in a row, or n exceeds `n_max`.
pub fn model_scan(case: ModelCase, p: f64, b: f64, step: usize, n_max: usize) -> Result<Vec<ScanPoint>> {
    let s = case.singularity(p, b)?;
    let exact = hp_exact_integral(case.kernel(), &s)?;
    let step = step.max(1);
    let mut out = Vec::new();
    let mut below = 0;
    let mut n = step;
    while n <= n_max {
        let measured = hp_remainder_with(case.rule(), case.kernel(), &s, n, &exact)?.norm();
        let estimate = case.estimate(&s, n)?.magnitude;
        out.push(ScanPoint { n, measured, estimate });
        below = if measured < SCAN_STOP { below + 1 } else { 0 };
        if below == 2 {
            break;
        }
        n += step;
    }
    Ok(out)
}

/// Default sampling step for a pole distance: coarser for slowly converging cases.
pub fn default_step(b: f64) -> usize {
    if b <= 0.05 {
        10
    } else if b <= 0.1 {
        5
    } else if b <= 0.2 {
        2
    } else {
        1
    }
}

/// Agreement of an estimate with measurement over the exponential window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCheck {
    pub n_first: usize,
    pub n_last: usize,
    pub points: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Least-squares slopes of ln(error) against n.
    pub slope_measured: f64,
    pub slope_estimate: f64,
    /// |slope_measured - slope_estimate| / |slope_estimate|.
    pub slope_mismatch: f64,
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Ratio band and slope agreement over samples with measured error in [lo, hi],
/// restricted to n past the peaks of both the measured and the estimated curve
/// (the pre-asymptotic hump is not what the estimates describe).
///
/// `None` when fewer than two samples fall in the window.
pub fn band_check(points: &[ScanPoint], lo: f64, hi: f64) -> Option<BandCheck> {
    let argmax = |f: fn(&ScanPoint) -> f64| {
        points.iter().enumerate().max_by(|a, b| f(a.1).total_cmp(&f(b.1))).map(|(i, _)| i).unwrap_or(0)
    };
    let start = argmax(|p| p.measured).max(argmax(|p| p.estimate));
    let sel: Vec<&ScanPoint> = points[start..].iter().filter(|p| p.measured >= lo && p.measured <= hi).collect();
    if sel.len() < 2 {
        return None;
    }
    let ratios: Vec<f64> = sel.iter().map(|p| p.estimate / p.measured).collect();
    let x: Vec<f64> = sel.iter().map(|p| p.n as f64).collect();
    let lm: Vec<f64> = sel.iter().map(|p| p.measured.ln()).collect();
    let le: Vec<f64> = sel.iter().map(|p| p.estimate.ln()).collect();
    let slope_measured = ls_slope(&x, &lm);
    let slope_estimate = ls_slope(&x, &le);
    Some(BandCheck {
        n_first: sel[0].n,
        n_last: sel[sel.len() - 1].n,
        points: sel.len(),
        ratio_min: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratio_max: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        slope_measured,
        slope_estimate,
        slope_mismatch: (slope_measured - slope_estimate).abs() / slope_estimate.abs(),
    })
}
