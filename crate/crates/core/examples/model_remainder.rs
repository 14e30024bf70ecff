//! Quadrature remainder of a nearly singular model integrand: measured in
//! extended precision, predicted from the residue at the pole.

use qbx_core::harness::precise::hp_remainder;
use qbx_core::kernels::Singularity;
use qbx_core::quadrature::RuleKind;
use qbx_core::remainder::{residue_remainder, KernelKind, ResidueVariant};

fn main() -> qbx_core::Result<()> {
    // f_2(x) = (x - z0)^-2 with z0 = 0.2 i on [-1, 1], and 1 / ((x^2 + b^2)) for the real pair.
    println!("{:>4} {:>14} {:>14} {:>14} {:>14}", "n", "|R| f_2", "predicted", "|R| g_1", "predicted");
    let f2 = Singularity::interval(0.0, 0.2, 2.0)?;
    let g1 = Singularity::interval(0.0, 0.2, 1.0)?;
    for n in (10..=80).step_by(10) {
        let mf = hp_remainder(RuleKind::GaussLegendre, KernelKind::Complex, &f2, n)?;
        let pf = residue_remainder(RuleKind::GaussLegendre, &f2, n, KernelKind::Complex, ResidueVariant::Asymptotic)?;
        let mg = hp_remainder(RuleKind::GaussLegendre, KernelKind::Cartesian, &g1, n)?;
        let pg = residue_remainder(RuleKind::GaussLegendre, &g1, n, KernelKind::Cartesian, ResidueVariant::Full)?;
        println!("{n:>4} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}", mf.norm(), pf.norm(), mg.norm(), pg.norm());
    }

    // For the trapezoidal rule on the circle the residue prediction is exact.
    let s = Singularity::circle(0.3, 3.0)?;
    for n in [20, 40, 60] {
        let m = hp_remainder(RuleKind::TrapezoidalPeriodic, KernelKind::Complex, &s, n)?;
        let p = residue_remainder(RuleKind::TrapezoidalPeriodic, &s, n, KernelKind::Complex, ResidueVariant::Full)?;
        println!("trapezoid n={n}: measured {:.6e}, relative deviation {:.1e}", m.norm(), (m - p).norm() / m.norm());
    }
    Ok(())
}
