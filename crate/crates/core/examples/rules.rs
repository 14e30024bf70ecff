//! Gauss-Legendre and periodic trapezoidal rules, on their own and panelized along a curve.

use std::sync::Arc;

use num_complex::Complex64;
use qbx_core::quadrature::{cached_rule, composite_integrate, panelize, AffineMap, Circle, RuleKind, Starfish};

fn main() -> qbx_core::Result<()> {
    let gl = cached_rule(RuleKind::GaussLegendre, 8)?;
    println!("8-point Gauss-Legendre:");
    for (x, w) in gl.iter() {
        println!("  {x:+.16}  {w:.16}");
    }

    // exp on [0, 1] mapped from the canonical interval.
    let q = gl.apply(|x| Complex64::new(x.exp(), 0.0), Some(AffineMap::new(0.0, 1.0)))?;
    println!("int_0^1 e^x = {:.16} (error {:.1e})", q.re, (q.re - (1f64.exp() - 1.0)).abs());

    let trap = cached_rule(RuleKind::TrapezoidalPeriodic, 32)?;
    let q = trap.apply(|t| Complex64::new(t.cos().exp(), 0.0), None)?;
    println!("int_0^2pi e^cos t = {:.16}", q.re);

    // Arc length by composite integration of |z'(t)| over panels.
    for (name, pc) in [
        ("unit circle", panelize(Arc::new(Circle::unit()), 10, 16)?),
        ("starfish", panelize(Arc::new(Starfish::default()), 35, 16)?),
    ] {
        let len = composite_integrate(&pc, |node| Complex64::new(node.dz.norm(), 0.0))?;
        println!("{name}: {} panels x {} points, length {:.15}", pc.n_panels(), pc.rule_size(), len.re);
    }
    Ok(())
}
