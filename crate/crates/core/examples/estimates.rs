//! Closed-form error estimates for the four model cases against measurement,
//! and how far the classic derivative bound overshoots.

use qbx_core::estimates::{classic_gl_bound, estimate_gl_complex, ln_sup_derivative_g1, GlComplexForm};
use qbx_core::harness::model::{band_check, default_step, model_scan, ModelCase};
use qbx_core::kernels::Singularity;

fn main() -> qbx_core::Result<()> {
    let (p, b) = (2.0, 0.1);
    for case in ModelCase::ALL {
        let scan = model_scan(case, p, b, default_step(b), 2000)?;
        let band = band_check(&scan, 1e-12, 1e-3).expect("window is populated");
        println!(
            "{case:<16} p={p} b={b}: n {}..{}, estimate/measured in [{:.3}, {:.3}], slope mismatch {:.3}",
            band.n_first, band.n_last, band.ratio_min, band.ratio_max, band.slope_mismatch
        );
    }

    let s = Singularity::interval(0.3, 0.2, 1.0)?;
    for form in [GlComplexForm::Theorem, GlComplexForm::Simplified] {
        let e = estimate_gl_complex(&s, 40, form)?;
        println!("{:?} at n=40: {:.4e}", e.formula, e.magnitude);
    }

    let (n, b) = (20, 0.4);
    let bound = classic_gl_bound(n, 2.0, ln_sup_derivative_g1(2 * n, b).exp())?;
    println!("classic bound for 1/(x^2 + {b}^2) at n={n}: {:.3e}", bound.magnitude);
    Ok(())
}
