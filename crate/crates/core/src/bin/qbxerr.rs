use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qbx_core::harness::experiments::{sweep, ExperimentId, Overrides};
use qbx_core::harness::model::ModelCase;
use qbx_core::harness::precise::{hp_exact_integral, hp_remainder_with};
use qbx_core::harness::report::{fmt17, Format, SweepReport, SweepRow};
use qbx_core::kernels::Singularity;
use qbx_core::quadrature::{cached_rule, RuleKind};
use qbx_core::{Error, Result};

/// Quadrature error estimates for nearly singular integrals and QBX.
#[derive(Parser, Debug)]
#[command(name = "qbxerr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Rule size (points per panel).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Kernel power or expansion order.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Distance of the pole from the integration domain.
    #[arg(long, global = true)]
    b: Option<f64>,
    /// Expansion radius.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Panel length.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Pole position along the domain, or spheroid semi-axis in the equatorial plane.
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Spheroid semi-axis along the symmetry axis.
    #[arg(long, global = true)]
    c: Option<f64>,
    /// Helmholtz wavenumber.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Seed of the random patch density.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nodes and weights of a rule on its canonical domain.
    Rule {
        #[arg(long, value_enum, default_value_t = RuleArg::Gl)]
        kind: RuleArg,
    },
    /// Extended-precision remainder of a model kernel for one n.
    Measure {
        #[arg(long, value_enum, default_value_t = CaseArg::GlComplex)]
        case: CaseArg,
    },
    /// Estimated remainder of a model kernel for one n.
    Estimate {
        #[arg(long, value_enum, default_value_t = CaseArg::GlComplex)]
        case: CaseArg,
    },
    /// Run a named experiment.
    Sweep { experiment: String },
    /// QBX error split on the unit circle.
    Qbx2d,
    /// QBX error split on a flat patch.
    Qbx3dPatch,
    /// QBX quadrature error on a spheroid.
    Qbx3dSpheroid,
    /// Helmholtz coefficient errors on a flat panel.
    Helmholtz,
    /// Double layer errors along rays into the starfish.
    Starfish,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RuleArg {
    Gl,
    Trapz,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CaseArg {
    GlComplex,
    GlCartesian,
    TrapzComplex,
    TrapzCartesian,
}

impl From<CaseArg> for ModelCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::GlComplex => ModelCase::GlComplex,
            CaseArg::GlCartesian => ModelCase::GlCartesian,
            CaseArg::TrapzComplex => ModelCase::TrapzComplex,
            CaseArg::TrapzCartesian => ModelCase::TrapzCartesian,
        }
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            p: self.p,
            b: self.b,
            r: self.r,
            h: self.h,
            a: self.a,
            c: self.c,
            omega: self.omega,
            seed: self.seed,
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        match &self.out {
            Some(path) => {
                let f = File::create(path).map_err(|e| Error::invalid(format!("cannot create {}: {e}", path.display())))?;
                Ok(Box::new(BufWriter::new(f)))
            }
            None => Ok(Box::new(io::stdout().lock())),
        }
    }
}

fn model_point(case: ModelCase, c: &Common, measure: bool) -> Result<SweepReport> {
    let n = c.n.ok_or_else(|| Error::invalid("--n is required"))?;
    let p = c.p.unwrap_or(1.0);
    let b = c.b.ok_or_else(|| Error::invalid("--b is required"))?;
    let a = c.a.unwrap_or(0.0);
    let s = match case.rule() {
        RuleKind::GaussLegendre => Singularity::interval(a, b, p)?,
        RuleKind::TrapezoidalPeriodic => Singularity::circle_at(a, b, p)?,
    };
    let measured = if measure {
        let exact = hp_exact_integral(case.kernel(), &s)?;
        hp_remainder_with(case.rule(), case.kernel(), &s, n, &exact)?.norm()
    } else {
        f64::NAN
    };
    let est = case.estimate(&s, n)?;
    let mut report = SweepReport::new(if measure { "measure" } else { "estimate" }, "n")
        .meta("case", case.to_string())
        .meta("a", a)
        .meta("b", b)
        .meta("p", p);
    report.extend([SweepRow::new(format!("p={p} b={b}"), n as f64, measured).with(est.formula, est.magnitude)]);
    Ok(report)
}

fn num17(v: f64) -> serde_json::Value {
    serde_json::from_str(&fmt17(v)).unwrap_or(serde_json::Value::Null)
}

fn write_rule(kind: RuleArg, c: &Common, format: Format, out: &mut dyn Write) -> Result<()> {
    let n = c.n.ok_or_else(|| Error::invalid("--n is required"))?;
    let kind = match kind {
        RuleArg::Gl => RuleKind::GaussLegendre,
        RuleArg::Trapz => RuleKind::TrapezoidalPeriodic,
    };
    let rule = cached_rule(kind, n)?;
    let io = |e: io::Error| Error::invalid(format!("output failed: {e}"));
    match format {
        Format::Csv => {
            writeln!(out, "index,node,weight").map_err(io)?;
            for (i, (x, w)) in rule.iter().enumerate() {
                writeln!(out, "{i},{},{}", fmt17(x), fmt17(w)).map_err(io)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = rule
                .iter()
                .enumerate()
                .map(|(i, (x, w))| json!({"index": i, "node": num17(x), "weight": num17(w)}))
                .collect();
            let doc = json!({"meta": {"rule": kind.to_string(), "n": n}, "rows": rows});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(|e| Error::invalid(e.to_string()))?)
                .map_err(io)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let format: Format = c.format.parse()?;
    let report = match cli.command {
        Command::Rule { kind } => {
            let mut out = c.sink()?;
            write_rule(kind, c, format, &mut out)?;
            return out.flush().map_err(|e| Error::invalid(format!("output failed: {e}")));
        }
        Command::Measure { case } => model_point(case.into(), c, true)?,
        Command::Estimate { case } => model_point(case.into(), c, false)?,
        Command::Sweep { experiment } => sweep(experiment.parse()?, &c.overrides())?,
        Command::Qbx2d => sweep(ExperimentId::FigQbx2d, &c.overrides())?,
        Command::Qbx3dPatch => sweep(ExperimentId::FigPatch, &c.overrides())?,
        Command::Qbx3dSpheroid => sweep(ExperimentId::FigSpheroidFull, &c.overrides())?,
        Command::Helmholtz => sweep(ExperimentId::HelmholtzDesk, &c.overrides())?,
        Command::Starfish => sweep(ExperimentId::FigStarfish, &c.overrides())?,
    };
    let mut out = c.sink()?;
    report.write(format, &mut out)?;
    out.flush().map_err(|e| Error::invalid(format!("output failed: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qbxerr: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument(_) => 2,
                Error::OracleFailure { .. } => 3,
                _ => 1,
            })
        }
    }
}
