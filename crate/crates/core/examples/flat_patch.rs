//! 3D QBX for a flat square patch with a random polynomial density.

use qbx_core::estimates::{estimate_qbx3d_patch, PatchForm, QbxConfig, QbxGeometry};
use qbx_core::harness::experiments::DEFAULT_SEED;
use qbx_core::harness::surface::{patch_study, PolynomialDensity};

fn main() -> qbx_core::Result<()> {
    let (n, r, pmax) = (48, 0.2, 12);
    let density = PolynomialDensity::random(15, DEFAULT_SEED);
    let study = patch_study(n, r, pmax, &density)?;
    println!("u at the target {:.15}, sigma there {:.6}", study.u_exact, study.sigma_at_target);
    for p in 0..=pmax {
        let cfg = QbxConfig::new(p, r, n, 2.0, QbxGeometry::Patch3d)?.with_sigma(study.sigma_at_target.abs());
        let est = estimate_qbx3d_patch(&cfg, PatchForm::Sum)?.magnitude;
        println!("p={p:>2}  e_T {:.3e}  e_Q {:.3e}  estimate {est:.3e}", study.e_t[p], study.e_q[p]);
    }
    Ok(())
}
