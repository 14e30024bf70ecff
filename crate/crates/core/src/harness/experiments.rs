//! Named parameter sweeps behind the figures and desk studies.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::estimates::{
    estimate_gl_cartesian, estimate_gl_complex, estimate_helmholtz, estimate_qbx2d, estimate_qbx3d_patch,
    estimate_spheroid, FormulaId, GlCartesianForm, GlComplexForm, HelmholtzForm, PatchForm, PoleHeight, Qbx2dForm,
    QbxConfig, QbxGeometry, SpheroidPart,
};
use crate::harness::model::{default_step, model_scan, ModelCase};
use crate::harness::planar::{helmholtz_panel_study, qbx2d_circle_study, starfish_study, CircleDensity};
use crate::harness::report::{SweepReport, SweepRow};
use crate::harness::surface::{
    patch_study, spheroid_full_study, spheroid_gl_scan, spheroid_trapz_scan, PolynomialDensity, SpheroidScan,
};

/// Seed of the random patch density unless overridden.
pub const DEFAULT_SEED: u64 = 20240601;

/// Registered experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    FigGl2d,
    FigGl3d,
    FigTrapz2d,
    FigTrapz3d,
    FigQbx2d,
    FigPatch,
    FigSpheroidConv,
    FigSpheroidFull,
    FigStarfish,
    HelmholtzDesk,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::FigGl2d,
        ExperimentId::FigGl3d,
        ExperimentId::FigTrapz2d,
        ExperimentId::FigTrapz3d,
        ExperimentId::FigQbx2d,
        ExperimentId::FigPatch,
        ExperimentId::FigSpheroidConv,
        ExperimentId::FigSpheroidFull,
        ExperimentId::FigStarfish,
        ExperimentId::HelmholtzDesk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::FigGl2d => "fig_gl_2d",
            ExperimentId::FigGl3d => "fig_gl_3d",
            ExperimentId::FigTrapz2d => "fig_trapz_2d",
            ExperimentId::FigTrapz3d => "fig_trapz_3d",
            ExperimentId::FigQbx2d => "fig_qbx2d",
            ExperimentId::FigPatch => "fig_patch",
            ExperimentId::FigSpheroidConv => "fig_spheroid_conv",
            ExperimentId::FigSpheroidFull => "fig_spheroid_full",
            ExperimentId::FigStarfish => "fig_starfish",
            ExperimentId::HelmholtzDesk => "helmholtz_desk",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| {
            let known: Vec<&str> = ExperimentId::ALL.iter().map(|id| id.name()).collect();
            Error::invalid(format!("unknown experiment {s:?}; known: {}", known.join(", ")))
        })
    }
}

/// Optional replacements of an experiment's default parameters.
///
/// Each experiment documents which fields it reads; the rest are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub b: Option<f64>,
    pub r: Option<f64>,
    pub h: Option<f64>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub omega: Option<f64>,
    pub seed: Option<u64>,
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::invalid(format!("--{name} must be positive, got {x}"))),
        _ => Ok(v),
    }
}

impl Overrides {
    fn validated(&self) -> Result<Self> {
        for (name, v) in [("p", self.p), ("b", self.b), ("r", self.r), ("h", self.h), ("a", self.a), ("c", self.c)] {
            positive(name, v)?;
        }
        positive("omega", self.omega)?;
        if self.n == Some(0) {
            return Err(Error::invalid("--n must be at least 1"));
        }
        Ok(*self)
    }
}

/// Runs one experiment.
///
/// Model-kernel sweeps (`fig_gl_*`, `fig_trapz_*`) read `p`, `b` and `n` (largest n);
/// `fig_qbx2d` reads `n`, `h`, `r`, `p` (largest order); `fig_patch` reads `n`, `r`,
/// `p`, `seed`; the spheroid sweeps read `a`, `c`, `r`, `n`, `p`; `fig_starfish`
/// reads `n`; `helmholtz_desk` reads `n`, `h`, `r`, `omega`, `p`.
pub fn sweep(id: ExperimentId, overrides: &Overrides) -> Result<SweepReport> {
    let o = overrides.validated()?;
    let mut report = match id {
        ExperimentId::FigGl2d => model_sweep(id, ModelCase::GlComplex, &o)?,
        ExperimentId::FigGl3d => model_sweep(id, ModelCase::GlCartesian, &o)?,
        ExperimentId::FigTrapz2d => model_sweep(id, ModelCase::TrapzComplex, &o)?,
        ExperimentId::FigTrapz3d => model_sweep(id, ModelCase::TrapzCartesian, &o)?,
        ExperimentId::FigQbx2d => qbx2d_sweep(&o)?,
        ExperimentId::FigPatch => patch_sweep(&o)?,
        ExperimentId::FigSpheroidConv => spheroid_conv_sweep(&o)?,
        ExperimentId::FigSpheroidFull => spheroid_full_sweep(&o)?,
        ExperimentId::FigStarfish => starfish_sweep(&o)?,
        ExperimentId::HelmholtzDesk => helmholtz_sweep(&o)?,
    };
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    report = report.meta("created_unix", stamp).meta("library_version", env!("CARGO_PKG_VERSION"));
    report.sort_rows();
    Ok(report)
}

fn model_sweep(id: ExperimentId, case: ModelCase, o: &Overrides) -> Result<SweepReport> {
    let cartesian = matches!(case, ModelCase::GlCartesian | ModelCase::TrapzCartesian);
    let ps: Vec<f64> = match o.p {
        Some(p) => vec![p],
        None if cartesian => vec![1.0, 1.5, 2.0, 3.0, 5.0, 5.5, 10.0],
        None => vec![1.0, 2.0, 3.0, 5.0, 10.0],
    };
    let bs: Vec<f64> = o.b.map(|b| vec![b]).unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.5]);
    let n_max = o.n.unwrap_or(1300);
    let mut report = SweepReport::new(id.name(), "n")
        .meta("case", case.to_string())
        .meta("a", 0.0)
        .meta("p", &ps)
        .meta("b", &bs)
        .meta("n_max", n_max)
        .meta("measurement", "192-bit MPFR quadrature against closed-form integral");
    for &p in &ps {
        for &b in &bs {
            let s = case.singularity(p, b)?;
            let series = format!("p={p} b={b}");
            let scan = model_scan(case, p, b, default_step(b), n_max)?;
            let mut rows = Vec::with_capacity(scan.len());
            for pt in scan {
                let mut row = SweepRow::new(series.clone(), pt.n as f64, pt.measured);
                match case {
                    ModelCase::GlComplex => {
                        row = row.with(FormulaId::GlComplexTheorem, pt.estimate).with(
                            FormulaId::GlComplexSimplified,
                            estimate_gl_complex(&s, pt.n, GlComplexForm::Simplified)?.magnitude,
                        );
                    }
                    ModelCase::GlCartesian => {
                        row = row.with(FormulaId::GlCartesianTheorem, pt.estimate).with(
                            FormulaId::GlCartesianWorstCaseA0,
                            estimate_gl_cartesian(&s, pt.n, GlCartesianForm::WorstCaseA0)?.magnitude,
                        );
                        let full = match s.integer_order() {
                            Some(q) if q <= 3 => estimate_gl_cartesian(&s, pt.n, GlCartesianForm::FullPLe3)?.magnitude,
                            _ => f64::NAN,
                        };
                        row = row.with(FormulaId::GlCartesianFull, full);
                    }
                    ModelCase::TrapzComplex => row = row.with(FormulaId::TrapzComplexTheorem, pt.estimate),
                    ModelCase::TrapzCartesian => row = row.with(FormulaId::TrapzCartesianTheorem, pt.estimate),
                }
                rows.push(row);
            }
            report.extend(rows);
        }
    }
    Ok(report)
}

fn qbx2d_sweep(o: &Overrides) -> Result<SweepReport> {
    let h = o.h.unwrap_or(2.0 * PI / 20.0);
    let n = o.n.unwrap_or(100);
    let r = o.r.unwrap_or(0.1 * h);
    let pmax = o.p.map(|p| p.round() as usize).unwrap_or(40).max(1);
    let density = CircleDensity::sin_pow10();
    let cfg = QbxConfig::new(pmax, r, n, h, QbxGeometry::Circle2d)?.with_sigma(density.sup_norm());
    let stride = 7;
    let split = qbx2d_circle_study(&cfg, &density, stride)?;
    let mut report = SweepReport::new(ExperimentId::FigQbx2d.name(), "p")
        .meta("geometry", "unit circle")
        .meta("density", density.name.clone())
        .meta("h", h)
        .meta("n", n)
        .meta("r", r)
        .meta("target_stride", stride)
        .meta("sigma_norm", cfg.sigma_norm);
    for p in 1..=pmax {
        let c = cfg.with_order(p);
        let row = SweepRow::new("e_Q", p as f64, split.e_q[p])
            .with(FormulaId::Qbx2dSum, estimate_qbx2d(&c, Qbx2dForm::Sum)?.magnitude)
            .with(FormulaId::Qbx2dUpperBound, estimate_qbx2d(&c, Qbx2dForm::UpperBound)?.magnitude)
            .with(FormulaId::Qbx2dIncompleteGamma, estimate_qbx2d(&c, Qbx2dForm::IncompleteGamma)?.magnitude)
            .with(FormulaId::Qbx2dSimplified, estimate_qbx2d(&c, Qbx2dForm::Simplified)?.magnitude);
        report.extend([row, SweepRow::new("e_T", p as f64, split.e_t[p])]);
    }
    Ok(report)
}

fn patch_sweep(o: &Overrides) -> Result<SweepReport> {
    let n = o.n.unwrap_or(96);
    let r = o.r.unwrap_or(0.2);
    let pmax = o.p.map(|p| p.round() as usize).unwrap_or(15);
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    let density = PolynomialDensity::random(15, seed);
    let study = patch_study(n, r, pmax, &density)?;
    let mut report = SweepReport::new(ExperimentId::FigPatch.name(), "p")
        .meta("patch", "[-1, 1]^2")
        .meta("n", n)
        .meta("r", r)
        .meta("seed", seed)
        .meta("density_degree", density.degree)
        .meta("u_exact", study.u_exact)
        .meta("sigma_at_target", study.sigma_at_target);
    for p in 0..=pmax {
        let cfg = QbxConfig::new(p, r, n, 2.0, QbxGeometry::Patch3d)?.with_sigma(study.sigma_at_target.abs());
        let row = SweepRow::new("e_Q", p as f64, study.e_q[p])
            .with(FormulaId::PatchSum, estimate_qbx3d_patch(&cfg, PatchForm::Sum)?.magnitude)
            .with(FormulaId::PatchSimplified, estimate_qbx3d_patch(&cfg, PatchForm::Simplified)?.magnitude);
        report.extend([row, SweepRow::new("e_T", p as f64, study.e_t[p])]);
    }
    Ok(report)
}

fn scan_rows(scan: &SpheroidScan, formula: FormulaId) -> Vec<SweepRow> {
    let dir = match formula {
        FormulaId::SpheroidTrapzCrossSection => "trapz",
        _ => "gl",
    };
    let mut rows = Vec::new();
    for (i, &n) in scan.n.iter().enumerate() {
        for (l, (&m, &e)) in scan.measured[i].iter().zip(&scan.estimate[i]).enumerate() {
            let series = format!("{dir} a={} c={} l={l}", scan.a, scan.c);
            rows.push(SweepRow::new(series, n as f64, m).with(formula, e));
        }
    }
    rows
}

fn spheroid_conv_sweep(o: &Overrides) -> Result<SweepReport> {
    let shapes: Vec<(f64, f64)> = match (o.a, o.c) {
        (None, None) => vec![(2.0, 1.0), (1.0, 2.0)],
        (a, c) => vec![(a.unwrap_or(1.0), c.unwrap_or(1.0))],
    };
    let r = o.r.unwrap_or(0.2);
    let lmax = o.p.map(|p| p.round() as usize).unwrap_or(10);
    let n_max = o.n.unwrap_or(1200);
    let mut report = SweepReport::new(ExperimentId::FigSpheroidConv.name(), "n")
        .meta("shapes", &shapes)
        .meta("r", r)
        .meta("lmax", lmax)
        .meta("n_max", n_max);
    for &(a, c) in &shapes {
        let t = spheroid_trapz_scan(a, c, r, lmax, (4, n_max))?;
        let g = spheroid_gl_scan(a, c, r, lmax, (4, n_max))?;
        report = report.meta(&format!("t_c a={a} c={c}"), g.t_c);
        report.extend(scan_rows(&t, FormulaId::SpheroidTrapzCrossSection));
        report.extend(scan_rows(&g, FormulaId::SpheroidGlCrossSection));
    }
    Ok(report)
}

fn spheroid_full_sweep(o: &Overrides) -> Result<SweepReport> {
    let a = o.a.unwrap_or(1.0);
    let c = o.c.unwrap_or(2.0);
    let r = o.r.unwrap_or(0.2);
    let n_t = o.n.unwrap_or(200);
    let n_s = 2 * n_t;
    let pmax = o.p.map(|p| p.round() as usize).unwrap_or(10);
    let study = spheroid_full_study(a, c, r, n_s, n_t, pmax)?;
    let mut report = SweepReport::new(ExperimentId::FigSpheroidFull.name(), "p")
        .meta("a", a)
        .meta("c", c)
        .meta("r", r)
        .meta("n_s", n_s)
        .meta("n_t", n_t)
        .meta("density", "1");
    for p in 0..=pmax {
        let mut row = SweepRow::new("e_Q", p as f64, study.e_q[p]).with(FormulaId::SpheroidCombined, study.estimate[p]);
        if a <= c {
            let cfg = QbxConfig::new(p, r, n_t, 1.0, QbxGeometry::Spheroid { a, c, n_s })?;
            let v = if p == 0 { f64::NAN } else { estimate_spheroid(&cfg, SpheroidPart::CombinedSimplified)?.magnitude };
            row = row.with(FormulaId::SpheroidCombinedSimplified, v);
        }
        report.extend([row]);
    }
    Ok(report)
}

fn starfish_sweep(o: &Overrides) -> Result<SweepReport> {
    let n = o.n.unwrap_or(16);
    let depths = (1e-3, 0.4, 300);
    let mut report = SweepReport::new(ExperimentId::FigStarfish.name(), "distance")
        .meta("curve", "(1 + 0.3 cos 5t) e^{it}")
        .meta("density", "1 + 0.3 cos 2t + 0.2 sin 5t")
        .meta("n", n)
        .meta("pole_height", PoleHeight::TwoDOverL)
        .meta("normalization", "max |u_ref| over all ray points");
    for panels in [35usize, 70] {
        for ray in starfish_study(panels, n, 20, depths, PoleHeight::TwoDOverL)? {
            let series = format!("N={panels} panel={}", ray.panel);
            report.extend(
                ray.distances
                    .iter()
                    .zip(ray.measured.iter().zip(&ray.estimate))
                    .map(|(&d, (&m, &e))| SweepRow::new(series.clone(), d, m).with(FormulaId::PanelDoubleLayer, e)),
            );
        }
    }
    Ok(report)
}

fn helmholtz_sweep(o: &Overrides) -> Result<SweepReport> {
    let h = o.h.unwrap_or(1.0);
    let n = o.n.unwrap_or(16);
    let r = o.r.unwrap_or(0.1);
    let lmax = o.p.map(|p| p.round() as usize).unwrap_or(10);
    let omegas: Vec<f64> = o.omega.map(|w| vec![w]).unwrap_or_else(|| vec![1.0, 5.0]);
    let cfg = QbxConfig::new(lmax, r, n, h, QbxGeometry::Panel2d)?;
    let total = estimate_helmholtz(&cfg, omegas[0], HelmholtzForm::Total)?.magnitude;
    let mut report = SweepReport::new(ExperimentId::HelmholtzDesk.name(), "ell")
        .meta("panel", format!("[-{}, {}]", h / 2.0, h / 2.0))
        .meta("n", n)
        .meta("r", r)
        .meta("omega", &omegas)
        .meta("total_estimate", total);
    for &omega in &omegas {
        let series = format!("omega={omega}");
        report.extend(
            helmholtz_panel_study(h, n, r, omega, lmax)?
                .into_iter()
                .map(|c| SweepRow::new(series.clone(), c.ell as f64, c.measured).with(FormulaId::HelmholtzPerCoefficient, c.estimate)),
        );
    }
    Ok(report)
}
