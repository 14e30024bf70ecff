//! Brute-force reference integrals in double precision.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{cached_rule, AffineMap, RuleKind};

/// Where a reference integral is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// [lo, hi] with composite Gauss-Legendre panels.
    Interval { lo: f64, hi: f64 },
    /// One period [0, 2 pi) with the trapezoidal rule.
    Periodic,
}

/// Points per panel of the composite Gauss-Legendre oracle.
const ORACLE_POINTS: usize = 20;
const MAX_DOUBLINGS: usize = 20;

fn composite(f: &mut dyn FnMut(f64) -> Complex64, lo: f64, hi: f64, panels: usize) -> Result<Complex64> {
    let rule = cached_rule(RuleKind::GaussLegendre, ORACLE_POINTS)?;
    let h = (hi - lo) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..panels {
        let a = lo + h * i as f64;
        acc += rule.apply(&mut *f, Some(AffineMap::new(a, a + h)))?;
    }
    Ok(acc)
}

fn trapezoid(f: &mut dyn FnMut(f64) -> Complex64, n: usize) -> Result<Complex64> {
    let rule = cached_rule(RuleKind::TrapezoidalPeriodic, n)?;
    rule.apply(f, None)
}

/// Integral of a smooth integrand by doubling the panel count (interval) or the
/// point count (periodic) until two successive values agree to `tol`, relative.
///
/// The point count starts at 20 (per panel, or in total on the circle).
pub fn reference_integral<F>(mut f: F, domain: Domain, tol: f64) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut eval = |k: usize| -> Result<Complex64> {
        match domain {
            Domain::Interval { lo, hi } => composite(&mut f, lo, hi, 1 << k),
            Domain::Periodic => trapezoid(&mut f, ORACLE_POINTS << k),
        }
    };
    let mut prev = eval(0)?;
    for k in 1..=MAX_DOUBLINGS {
        let cur = eval(k)?;
        if (cur - prev).norm() <= tol * cur.norm().max(f64::MIN_POSITIVE) || (cur - prev).norm() == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    let last = eval(MAX_DOUBLINGS)?;
    Err(Error::OracleFailure { last: last.to_string(), previous: prev.to_string() })
}

/// |I - Q_n| for the n-point rule on the given domain; Gauss-Legendre is mapped
/// onto an interval, the trapezoidal rule runs over one period.
pub fn measure_remainder<F>(rule: RuleKind, n: usize, mut f: F, domain: Domain) -> Result<f64>
where
    F: FnMut(f64) -> Complex64,
{
    let exact = reference_integral(&mut f, domain, 1e-14)?;
    let r = cached_rule(rule, n)?;
    let q = match (rule, domain) {
        (RuleKind::GaussLegendre, Domain::Interval { lo, hi }) => r.apply(&mut f, Some(AffineMap::new(lo, hi)))?,
        (RuleKind::TrapezoidalPeriodic, Domain::Periodic) => r.apply(&mut f, None)?,
        _ => {
            return Err(Error::UnsupportedCombination(format!(
                "{rule} does not run on {}",
                match domain {
                    Domain::Interval { .. } => "an interval",
                    Domain::Periodic => "a periodic domain",
                }
            )))
        }
    };
    Ok((exact - q).norm())
}

/// Length of the periodic domain.
pub const PERIOD: f64 = 2.0 * PI;
