//! Command-line front end: curve specs in, JSON reports and CSV tables out.
//!
//! Exit codes: 0 pass, 1 I/O failure, 2 invalid spec, 3 unmet precondition,
//! 4 verification failure.

pub mod spec;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::geometry::{tension, SampledCurve, Scheme};
use crate::parametric::{Hemisphere, ParametricCurve};
use crate::product::{classify, product_tau_k};
use crate::random::random_tangent_field;
use crate::residuals::{
    ambient_residual, constant_kappa_law, frenet_residual, geodesic_curvature, intrinsic_curve_residual, pass_threshold,
    tension_residual, Formulation, ResidualReport,
};
use crate::scalar::Real;
use crate::variational::{
    energy_k, hessian_spectrum, run_flow, Descent, Expansion, FlowConfig, SpectrumOptions, DEFAULT_HESSIAN_CAP,
};
use spec::{BuildContext, Built, CurveSpec};

pub const EXIT_IO: i32 = 1;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_FAIL: i32 = 4;

/// Exit code for a command that stopped with `err`.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::InvalidSpec { .. }
        | Error::InvalidFamily(_)
        | Error::IncommensurateFrequencies { .. }
        | Error::ConstraintViolation { .. }
        | Error::DimensionMismatch { .. }
        | Error::DomainMismatch(_)
        | Error::GridTooSmall { .. }
        | Error::InvalidScheme(_)
        | Error::UnsupportedOrder(_) => EXIT_SPEC,
        Error::Diverged { .. } => EXIT_FAIL,
        _ => EXIT_PRECONDITION,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Dd,
    F64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormulationArg {
    Tension,
    Intrinsic,
    Ambient,
    Frenet,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Tension => Formulation::Tension,
            FormulationArg::Intrinsic => Formulation::Intrinsic,
            FormulationArg::Ambient => Formulation::Ambient,
            FormulationArg::Frenet => Formulation::Frenet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DescentArg {
    Tension,
    EulerLagrange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpansionArg {
    SingleCommutator,
    TensionLinearization,
}

#[derive(Debug, Parser)]
#[command(name = "kharmonic", version, about = "k-harmonic curves into space forms: residuals, energies, flows, spectra")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Grid size; overrides the spec's `grid` (default 256).
    #[arg(long, global = true, env = "KHARMONIC_GRID")]
    pub grid: Option<usize>,
    /// Finite-difference order (2, 4, 6 or 8).
    #[arg(long, global = true, default_value_t = 8)]
    pub order: usize,
    /// Fixed pass threshold instead of the grid-dependent default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Arithmetic: double-double (default except for `flow`) or f64.
    #[arg(long, global = true, value_enum)]
    pub precision: Option<Precision>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Include per-node values in reports.
    #[arg(long, global = true)]
    pub per_node: bool,
    /// Report destination (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Default for Common {
    /// The command-line defaults.
    fn default() -> Self {
        Self { grid: None, order: 8, tol: None, precision: None, seed: 0, per_node: false, out: None }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate k-tension residuals in several formulations.
    Verify {
        spec: PathBuf,
        #[arg(long, short)]
        k: usize,
        /// Formulations to run; all applicable ones when omitted.
        #[arg(long, value_enum, value_delimiter = ',')]
        formulations: Vec<FormulationArg>,
    },
    /// Print E_k of a closed curve.
    Energy {
        spec: PathBuf,
        #[arg(long, short)]
        k: usize,
    },
    /// Projected gradient flow; writes the final curve as a `samples` spec to `--out`.
    Flow {
        spec: PathBuf,
        #[arg(long, short)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        /// Step size; stiffness-scaled default when absent.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        grad_tol: f64,
        #[arg(long, value_enum, default_value = "tension")]
        descent: DescentArg,
        #[arg(long)]
        no_renormalize: bool,
        /// Add a seeded random tangent perturbation of this amplitude first.
        #[arg(long)]
        perturb: Option<f64>,
        /// CSV trace `step,energy,grad_sup`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trace_every: usize,
    },
    /// Eigenvalues of the second variation at a critical curve.
    Spectrum {
        spec: PathBuf,
        #[arg(long, short)]
        k: usize,
        /// Negative-mode tolerance relative to |H|.
        #[arg(long, default_value_t = 1e-6)]
        eps_rel: f64,
        #[arg(long, default_value_t = DEFAULT_HESSIAN_CAP)]
        cap: usize,
        #[arg(long)]
        allow_noncritical: bool,
        #[arg(long, value_enum, default_value = "single-commutator")]
        expansion: ExpansionArg,
    },
    /// Tabulate tau_k of constant-curvature circles on S^2 against the closed-form law.
    SweepKappa {
        #[arg(long, short)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 3.0)]
        to: f64,
        #[arg(long, default_value_t = 301)]
        samples: usize,
    },
}

/// What a finished command reports back to `main`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
}

impl Common {
    fn scheme(&self) -> Result<Scheme> {
        Scheme::new(self.order)
    }

    fn ctx(&self) -> BuildContext {
        BuildContext { grid: self.grid, seed: self.seed }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => write_file(p, text),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn to_json<S: Serialize>(v: &S) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let default = match cli.command {
        Command::Flow { .. } => Precision::F64,
        _ => Precision::Dd,
    };
    match cli.common.precision.unwrap_or(default) {
        Precision::Dd => run_with::<Dd>(cli),
        Precision::F64 => run_with::<f64>(cli),
    }
}

fn run_with<T: Real>(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    match &cli.command {
        Command::Verify { spec, k, formulations } => {
            let built = CurveSpec::load(spec)?.build::<T>(&c.ctx())?;
            let requested: Vec<Formulation> = formulations.iter().map(|&f| f.into()).collect();
            let report = verify(&built, *k, &requested, c)?;
            c.emit(&to_json(&report))?;
            Ok(Outcome { code: if report.pass { 0 } else { EXIT_FAIL } })
        }
        Command::Energy { spec, k } => {
            let curve = CurveSpec::load(spec)?.build::<T>(&c.ctx())?.curve()?;
            let e = energy_k(&curve, *k, c.scheme()?)?;
            c.emit(&to_json(&EnergyReport { k: *k, nodes: curve.nodes(), precision: T::NAME, energy: e.to_f64() }))?;
            Ok(Outcome { code: 0 })
        }
        Command::Flow { spec, k, steps, step, grad_tol, descent, no_renormalize, perturb, trace, trace_every } => {
            let mut curve = CurveSpec::load(spec)?.build::<T>(&c.ctx())?.curve()?;
            if let Some(amp) = perturb {
                let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
                let v = random_tangent_field(&curve, 3, *amp, &mut rng);
                curve = curve.exp(&v, T::one())?;
            }
            let cfg = FlowConfig {
                k: *k,
                step: *step,
                max_steps: *steps,
                grad_tol: *grad_tol,
                renormalize: !no_renormalize,
                descent: match descent {
                    DescentArg::Tension => Descent::Tension,
                    DescentArg::EulerLagrange => Descent::EulerLagrange,
                },
                scheme: c.scheme()?,
                trace_every: *trace_every,
            };
            let result = run_flow(&curve, &cfg)?;
            if let Some(path) = trace {
                let mut csv = String::from("step,energy,grad_sup\n");
                for r in &result.trace {
                    csv.push_str(&format!("{},{:e},{:e}\n", r.step, r.energy, r.grad_sup));
                }
                write_file(path, &csv)?;
            }
            let last = result.trace.last().copied().expect("trace has the initial row");
            let summary = FlowSummary {
                k: *k,
                outcome: format!("{:?}", result.outcome).to_lowercase(),
                steps: result.steps,
                final_step_size: result.final_step_size,
                energy: last.energy,
                grad_sup: last.grad_sup,
                tension_sup: tension(&result.curve, cfg.scheme)?.sup_norm(),
            };
            match &c.out {
                Some(p) => {
                    write_file(p, &to_json(&CurveSpec::from_curve(&result.curve)))?;
                    print!("{}", to_json(&summary));
                }
                None => print!("{}", to_json(&summary)),
            }
            Ok(Outcome { code: 0 })
        }
        Command::Spectrum { spec, k, eps_rel, cap, allow_noncritical, expansion } => {
            let curve = CurveSpec::load(spec)?.build::<T>(&c.ctx())?.curve()?;
            let opts = SpectrumOptions {
                eps_rel: *eps_rel,
                cap: *cap,
                allow_noncritical: *allow_noncritical,
                expansion: match expansion {
                    ExpansionArg::SingleCommutator => Expansion::SingleCommutator,
                    ExpansionArg::TensionLinearization => Expansion::TensionLinearization,
                },
            };
            let report = hessian_spectrum(&curve, *k, c.scheme()?, &opts)?;
            c.emit(&to_json(&report))?;
            Ok(Outcome { code: 0 })
        }
        Command::SweepKappa { k, from, to, samples } => {
            let sweep = sweep_kappa::<T>(*k, *from, *to, *samples, c.grid.unwrap_or(spec::DEFAULT_GRID), c.scheme()?)?;
            let mut csv = String::from("kappa,law,tau_normal,tau_sup,rel_err\n");
            for r in &sweep.rows {
                let rel = r.rel_err.map(|x| format!("{x:e}")).unwrap_or_default();
                csv.push_str(&format!("{},{:e},{:e},{:e},{}\n", r.kappa, r.law, r.tau_normal, r.tau_sup, rel));
            }
            let summary = to_json(&SweepSummary { k: *k, samples: sweep.rows.len(), roots: sweep.roots.clone() });
            match &c.out {
                Some(p) => {
                    write_file(p, &csv)?;
                    print!("{summary}");
                }
                None => {
                    print!("{csv}");
                    eprint!("{summary}");
                }
            }
            Ok(Outcome { code: 0 })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub k: usize,
    pub nodes: usize,
    pub precision: &'static str,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub k: usize,
    pub outcome: String,
    pub steps: usize,
    pub final_step_size: f64,
    pub energy: f64,
    pub grad_sup: f64,
    /// Flows do not preserve unit speed; this is the plain tension of the final curve.
    pub tension_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormulationRecord {
    pub formulation: Formulation,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub pass: bool,
    pub valid: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_node: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Skipped {
    pub formulation: Formulation,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductRecord {
    pub factor_a_sup: f64,
    pub factor_b_sup: f64,
    /// `sup |blockwise - direct|`.
    pub agreement: f64,
    pub k_harmonic: bool,
    pub proper: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub k: usize,
    pub nodes: usize,
    pub order: usize,
    pub precision: &'static str,
    pub threshold: f64,
    pub formulations: Vec<FormulationRecord>,
    pub skipped: Vec<Skipped>,
    /// Largest node-wise difference between any two formulations' `tau_k` estimates.
    pub max_discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductRecord>,
    pub pass: bool,
}

fn residual<T: Real>(curve: &SampledCurve<T>, f: Formulation, k: usize, scheme: Scheme) -> Result<ResidualReport<T>> {
    match f {
        Formulation::Tension => tension_residual(curve, k, scheme),
        Formulation::Intrinsic => intrinsic_curve_residual(curve, k, scheme),
        Formulation::Ambient => ambient_residual(curve, k, scheme),
        Formulation::Frenet => frenet_residual(&geodesic_curvature(curve, scheme)?, k),
    }
}

/// Runs the requested formulations (all applicable ones when `requested` is empty).
pub fn verify<T: Real>(built: &Built<T>, k: usize, requested: &[Formulation], c: &Common) -> Result<VerifyReport> {
    let scheme = c.scheme()?;
    let curve = built.curve()?;
    let threshold = match c.tol {
        Some(t) => t,
        None => pass_threshold(&curve, k, scheme)?,
    };
    let explicit = !requested.is_empty();
    let list: Vec<Formulation> = if explicit { requested.to_vec() } else { Formulation::ALL.to_vec() };
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for f in list {
        match residual(&curve, f, k, scheme) {
            Ok(r) => reports.push(r),
            Err(e) if !explicit && exit_code(&e) == EXIT_PRECONDITION => {
                skipped.push(Skipped { formulation: f, reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    let mut max_discrepancy: Option<f64> = None;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let d = reports[i].discrepancy(&reports[j]);
            max_discrepancy = Some(max_discrepancy.map_or(d, |m| m.max(d)));
        }
    }
    let formulations: Vec<FormulationRecord> = reports
        .iter()
        .map(|r| FormulationRecord {
            formulation: r.formulation,
            sup_norm: r.sup_norm,
            l2_norm: r.l2_norm,
            pass: r.sup_norm <= threshold,
            valid: [r.valid.start, r.valid.end],
            per_node: c.per_node.then(|| {
                r.valid.clone().map(|i| r.normalized.node(i).iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt()).collect()
            }),
        })
        .collect();
    let product = match built {
        Built::Product(p) => {
            let t = product_tau_k(p, k, scheme)?;
            let class = classify(p, k, scheme)?;
            Some(ProductRecord {
                factor_a_sup: t.factor_a.sup_norm(),
                factor_b_sup: t.factor_b.sup_norm(),
                agreement: t.agreement(),
                k_harmonic: class.k_harmonic,
                proper: class.proper,
            })
        }
        Built::Curve(_) => None,
    };
    let pass = !formulations.is_empty() && formulations.iter().all(|f| f.pass);
    Ok(VerifyReport {
        k,
        nodes: curve.nodes(),
        order: scheme.order(),
        precision: T::NAME,
        threshold,
        formulations,
        skipped,
        max_discrepancy,
        product,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub kappa: f64,
    /// `constant_kappa_law(kappa, k)`, the predicted `(-1)^k <tau_k, N>`.
    pub law: f64,
    /// Numeric `<tau_k, N>` at the first node.
    pub tau_normal: f64,
    pub tau_sup: f64,
    /// `| tau_sup - |law| | / |law|`; absent where the law vanishes.
    pub rel_err: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub k: usize,
    pub samples: usize,
    pub roots: Vec<Bracket>,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Sign changes and exact zeros of the numeric normal component.
    pub roots: Vec<Bracket>,
}

/// Circles with `|tau_k| <= SWEEP_ZERO_TOL` count as sampled roots.
pub const SWEEP_ZERO_TOL: f64 = 1e-12;

/// `tau_k` of latitude circles with `kappa` evenly spaced over `[from, to]`.
pub fn sweep_kappa<T: Real>(k: usize, from: f64, to: f64, samples: usize, nodes: usize, scheme: Scheme) -> Result<Sweep> {
    if k < 2 {
        return Err(Error::UnsupportedK(k));
    }
    let mut rows = Vec::new();
    if to > from && samples > 0 {
        for i in 0..samples {
            let kappa = if samples == 1 { from } else { from + (to - from) * i as f64 / (samples - 1) as f64 };
            let curve = ParametricCurve::constant_kappa_circle(T::from_f64(kappa), Hemisphere::North)?.sample(nodes, 1)?;
            let fd = geodesic_curvature(&curve, scheme)?;
            let tau = crate::residuals::tau_k(&curve, k, scheme)?;
            let i0 = tau.valid().start;
            let tau_normal = crate::scalar::dot(tau.node(i0), fd.normal.node(i0)).to_f64();
            let law = constant_kappa_law(kappa, k);
            let tau_sup = tau.sup_norm();
            let rel_err = (law != 0.0).then(|| (tau_sup - law.abs()).abs() / law.abs());
            rows.push(SweepRow { kappa, law, tau_normal, tau_sup, rel_err });
        }
    }
    let zero = |r: &SweepRow| r.tau_sup <= SWEEP_ZERO_TOL;
    let mut roots = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if zero(r) {
            roots.push(Bracket { lo: r.kappa, hi: r.kappa });
        } else if let Some(next) = rows.get(i + 1) {
            if !zero(next) && (r.tau_normal < 0.0) != (next.tau_normal < 0.0) {
                roots.push(Bracket { lo: r.kappa, hi: next.kappa });
            }
        }
    }
    Ok(Sweep { rows, roots })
}
