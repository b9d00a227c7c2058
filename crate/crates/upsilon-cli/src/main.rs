//! Command-line surface of the upsilon toolkit: JSON in, JSON/CSV out.
//!
//! Exit codes: 0 success, 1 internal/numerical failure, 2 domain violation
//! (invalid input, log-moment violations, mixing-measure rejections, refusals).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use upsilon::classes::{is_member, is_member_e_alpha, ClassTag, DEFAULT_CM_TOL};
use upsilon::mappings::{make_kernel, transform_cumulant, transform_triplet, Kernel, KernelName};
use upsilon::qrep::{
    dom_classify, h_from_q, q_from_h, tail_identity_check, validate_q, DomLevel, IntegratorKind, QMode,
};
use upsilon::schema;
use upsilon::simulate::{
    ecf_compare, improper_integral_sample, integral_sample, replicate_rng, sample_path_with,
    simulate_mapped_law, PathLaw, Schedule,
};
use upsilon::verify;
use upsilon::Error as UpsilonError;

#[derive(Parser)]
#[command(name = "upsilon", version, about = "Toolkit for infinitely divisible distributions: stochastic-integral mappings, class tests, Q/h constructions, simulation, verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Numeric tolerance for verdict-style checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Master seed for anything stochastic
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply a stochastic-integral mapping to a generating triplet
    Transform(TransformArgs),
    /// Class membership checks on a Levy measure
    Check(CheckArgs),
    /// Build the integrand h_Q from a mixing measure (with identity check)
    Hq(HqArgs),
    /// Recover the mixing measure from a step integrand
    Qfromh(QfromhArgs),
    /// Classify an integrand against an integrator (Dom levels)
    Dom(DomArgs),
    /// Sample stochastic integrals or mapped laws
    Simulate(SimulateArgs),
    /// Run a named verification suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TransformArgs {
    /// Triplet: a JSON file path or inline JSON
    input: String,
    /// Which mapping to apply
    #[arg(long, value_enum)]
    map: MapName,
    /// Exponent for e_alpha / n_alpha
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapName {
    EAlpha,
    Phi,
    Psi,
    M,
    NAlpha,
}

#[derive(Args)]
struct CheckArgs {
    /// Levy measure: a JSON file path or inline JSON
    input: String,
    /// Class to test
    #[arg(long, value_enum)]
    class: ClassName,
    /// Exponent for --class e
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassName {
    B,
    L,
    M,
    T,
    E,
}

#[derive(Args)]
struct HqArgs {
    /// Mixing measure: a JSON file path or inline JSON
    input: String,
    #[arg(long)]
    alpha: f64,
    /// Validate against the bounded-variation conditions instead
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeName {
    Bv,
}

#[derive(Args)]
struct QfromhArgs {
    /// Integrand: a JSON file path or inline JSON
    input: String,
    #[arg(long)]
    alpha: f64,
}

#[derive(Args)]
struct DomArgs {
    /// Integrand: a JSON file path or inline JSON
    input: String,
    #[arg(long, value_enum, default_value_t = IntegratorName::ZAlpha)]
    integrator: IntegratorName,
    #[arg(long)]
    alpha: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorName {
    YAlpha,
    ZAlpha,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(subcommand)]
    what: SimulateCmd,
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Replicates of the improper integral int h dY over (0, inf)
    Integral {
        /// Integrand: a JSON file path or inline JSON
        input: String,
        #[arg(long, value_enum, default_value_t = IntegratorName::YAlpha)]
        integrator: IntegratorName,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Replicates of a mapped law kernel(mu) for Gaussian / compound Poisson mu
    Mapped {
        /// Triplet: a JSON file path or inline JSON
        input: String,
        #[arg(long, value_enum)]
        map: MapName,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Also compare the ECF against the transformed cumulant on a z grid
        #[arg(long)]
        ecf: bool,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: SuiteName,
    /// Sample count for the Monte Carlo suites
    #[arg(long, default_value_t = 200_000)]
    n: usize,
    /// Restrict the compose suite to one exponent
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    GaussianFactor,
    KernelIdentity,
    Compose,
    Symmetry,
    RangeInclusion,
    TailIdentity,
    JumpLaw,
    McLaw,
    NegativeControls,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let domain = err
                .downcast_ref::<UpsilonError>()
                .map(|e| e.is_domain_violation())
                .unwrap_or(false);
            if domain {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn read_input(spec: &str) -> anyhow::Result<String> {
    let trimmed = spec.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(spec.to_string())
    } else {
        std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))
    }
}

fn metadata(cli: &Cli) -> serde_json::Value {
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "tool": "upsilon",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
        "tol": cli.tol,
        "unix_time": unix_time,
    })
}

fn emit(cli: &Cli, payload: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(payload)?;
    write_out(cli, &text)
}

fn write_out(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn kernel_for(map: MapName, alpha: Option<f64>) -> anyhow::Result<Kernel> {
    let name = match map {
        MapName::EAlpha => KernelName::EAlpha,
        MapName::Phi => KernelName::Phi,
        MapName::Psi => KernelName::Psi,
        MapName::M => KernelName::M,
        MapName::NAlpha => KernelName::NAlpha,
    };
    Ok(make_kernel(name, alpha)?)
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.cmd {
        Cmd::Transform(args) => {
            let text = read_input(&args.input)?;
            let j: schema::TripletJson = serde_json::from_str(&text).context("parsing triplet JSON")?;
            let mu = schema::triplet_from_json(&j)?;
            let kernel = kernel_for(args.map, args.alpha)?;
            let out = transform_triplet(&kernel, &mu)?;
            let payload = json!({
                "metadata": metadata(cli),
                "map": format!("{:?}", kernel.kind()),
                "triplet": schema::triplet_to_json(&out),
            });
            emit(cli, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check(args) => {
            let text = read_input(&args.input)?;
            let j: schema::LevyJson = serde_json::from_str(&text).context("parsing Levy JSON")?;
            let nu = schema::levy_from_json(&j)?;
            let verdict = match args.class {
                ClassName::B => is_member(ClassTag::B, &nu, cli.tol.min(DEFAULT_CM_TOL))?,
                ClassName::L => is_member(ClassTag::L, &nu, cli.tol.min(DEFAULT_CM_TOL))?,
                ClassName::M => is_member(ClassTag::M, &nu, cli.tol.min(DEFAULT_CM_TOL))?,
                ClassName::T => is_member(ClassTag::T, &nu, cli.tol.min(DEFAULT_CM_TOL))?,
                ClassName::E => {
                    let alpha = args.alpha.ok_or_else(|| anyhow!("--class e needs --alpha"))?;
                    is_member_e_alpha(&nu, alpha, cli.tol.min(DEFAULT_CM_TOL))?
                }
            };
            let passed = verdict.passed();
            let payload = json!({
                "metadata": metadata(cli),
                "verdict": schema::class_verdict_to_json(&verdict),
            });
            emit(cli, &payload)?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Cmd::Hq(args) => {
            let text = read_input(&args.input)?;
            let j: schema::MixingJson = serde_json::from_str(&text).context("parsing mixing measure JSON")?;
            let q = schema::mixing_measure_from_json(&j)?;
            if matches!(args.mode, Some(ModeName::Bv)) {
                let v = validate_q(&q, args.alpha, QMode::BoundedVariation)?;
                if !v.ok {
                    return Err(UpsilonError::DomainViolation(format!(
                        "mixing measure fails the bounded-variation conditions: {:?}",
                        schema::q_verdict_to_json(&v)
                    ))
                    .into());
                }
            }
            let h = h_from_q(&q, args.alpha)?;
            let r_grid = [0.25, 0.5, 1.0, 2.0, 4.0];
            let identity_error = tail_identity_check(&q, &h, args.alpha, &r_grid)?;
            let payload = json!({
                "metadata": metadata(cli),
                "alpha": args.alpha,
                "integrand": schema::integrand_to_json(&h)?,
                "tail_identity": { "r_grid": r_grid, "max_relative_error": identity_error },
            });
            emit(cli, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Qfromh(args) => {
            let text = read_input(&args.input)?;
            let j: schema::IntegrandJson = serde_json::from_str(&text).context("parsing integrand JSON")?;
            let h = schema::integrand_from_json(&j)?;
            let q = q_from_h(&h, args.alpha)?;
            let identity_error = tail_identity_check(&q, &h, args.alpha, &[0.25, 0.5, 1.0, 2.0, 4.0])?;
            let payload = json!({
                "metadata": metadata(cli),
                "alpha": args.alpha,
                "mixing": schema::mixing_measure_to_json(&q),
                "tail_identity": { "max_relative_error": identity_error },
            });
            emit(cli, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Dom(args) => {
            let text = read_input(&args.input)?;
            let j: schema::IntegrandJson = serde_json::from_str(&text).context("parsing integrand JSON")?;
            let h = schema::integrand_from_json(&j)?;
            let integrator = match args.integrator {
                IntegratorName::YAlpha => IntegratorKind::YAlpha,
                IntegratorName::ZAlpha => IntegratorKind::ZAlpha,
            };
            let verdict = dom_classify(&h, integrator, args.alpha)?;
            let payload = json!({
                "metadata": metadata(cli),
                "integrator": format!("{integrator:?}"),
                "alpha": args.alpha,
                "level": match verdict.level {
                    DomLevel::NotIntegrable => "not_integrable",
                    DomLevel::DomEs => "dom_es",
                    DomLevel::Dom => "dom",
                    DomLevel::DomBv => "dom_bv",
                },
                "checks": {
                    "square_vs_one": { "value": verdict.checks.square_vs_one.value, "finite": verdict.checks.square_vs_one.finite },
                    "local_centering": verdict.checks.local_centering,
                    "centering_limit": verdict.checks.centering_limit,
                    "abs_vs_one": { "value": verdict.checks.abs_vs_one.value, "finite": verdict.checks.abs_vs_one.finite },
                },
            });
            emit(cli, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Simulate(args) => run_simulate(cli, args),
        Cmd::Verify(args) => {
            let report = match args.suite {
                SuiteName::GaussianFactor => verify::gaussian_factor()?,
                SuiteName::KernelIdentity => verify::kernel_identity()?,
                SuiteName::Compose => verify::compose_at(args.alpha)?,
                SuiteName::Symmetry => verify::symmetry()?,
                SuiteName::RangeInclusion => verify::range_inclusion()?,
                SuiteName::TailIdentity => verify::tail_identity()?,
                SuiteName::JumpLaw => verify::jump_law(cli.seed)?,
                SuiteName::McLaw => verify::mc_law(args.n, cli.seed)?,
                SuiteName::NegativeControls => verify::negative_controls()?,
            };
            let passed = report.passed();
            let payload = json!({
                "metadata": metadata(cli),
                "report": report,
            });
            emit(cli, &payload)?;
            for c in &report.criteria {
                eprintln!(
                    "{}: {} (observed {:.3e}, threshold {:.3e})",
                    if c.passed { "pass" } else { "FAIL" },
                    c.name,
                    c.observed,
                    c.threshold
                );
            }
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn run_simulate(cli: &Cli, args: &SimulateArgs) -> anyhow::Result<ExitCode> {
    match &args.what {
        SimulateCmd::Integral {
            input,
            integrator,
            alpha,
            n,
        } => {
            let text = read_input(input)?;
            let j: schema::IntegrandJson = serde_json::from_str(&text).context("parsing integrand JSON")?;
            let h = schema::integrand_from_json(&j)?;
            let kind = match integrator {
                IntegratorName::YAlpha => IntegratorKind::YAlpha,
                IntegratorName::ZAlpha => IntegratorKind::ZAlpha,
            };
            // one classification up front; replicates reuse the exact jump sum
            let first = improper_integral_sample(&h, kind, *alpha, cli.seed, &Schedule::default(), None)?;
            let horizon = first.trace.last().map(|t| t.1).unwrap_or(1.0);
            let law = PathLaw::for_integrator(kind, *alpha)?;
            let samples: Vec<f64> = (0..*n)
                .map(|i| {
                    let mut rng = replicate_rng(cli.seed, i as u64);
                    let path = sample_path_with(&law, horizon, cli.seed, &mut rng);
                    integral_sample(&h, &path, 0.0, horizon)
                })
                .collect();
            let meta = json!({
                "metadata": metadata(cli),
                "integrator": format!("{kind:?}"),
                "alpha": alpha,
                "n": n,
                "horizon": horizon,
                "dom_level": format!("{:?}", first.verdict.level),
            });
            emit_samples(cli, &meta, &samples)
        }
        SimulateCmd::Mapped {
            input,
            map,
            alpha,
            n,
            ecf,
        } => {
            let text = read_input(input)?;
            let j: schema::TripletJson = serde_json::from_str(&text).context("parsing triplet JSON")?;
            let mu = schema::triplet_from_json(&j)?;
            let kernel = kernel_for(*map, *alpha)?;
            let samples = simulate_mapped_law(&kernel, &mu, *n, cli.seed)?;
            let meta = json!({
                "metadata": metadata(cli),
                "kernel": format!("{:?}", kernel.kind()),
                "n": n,
            });
            if *ecf {
                let z: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64).collect();
                let model = z
                    .iter()
                    .map(|&zi| transform_cumulant(&kernel, &mu, &[zi]).map(|c| c.exp()))
                    .collect::<Result<Vec<_>, _>>()?;
                let report = ecf_compare(&samples, &model, &z)?;
                match cli.format {
                    Format::Json => {
                        let payload = json!({
                            "metadata": meta,
                            "z_grid": report.z_grid,
                            "ecf": report.ecf.iter().map(|c| vec![c.re, c.im]).collect::<Vec<_>>(),
                            "model_cf": report.model_cf.iter().map(|c| vec![c.re, c.im]).collect::<Vec<_>>(),
                            "max_abs_gap": report.max_abs_gap,
                            "n_samples": report.n_samples,
                            "mc_stderr_bound": report.mc_stderr_bound,
                        });
                        emit(cli, &payload)?;
                    }
                    Format::Csv => {
                        let mut text = format!("# {}\n", serde_json::to_string(&meta)?);
                        text.push_str("z,ecf_re,ecf_im,model_re,model_im,abs_gap\n");
                        for (i, &z) in report.z_grid.iter().enumerate() {
                            let (e, m) = (report.ecf[i], report.model_cf[i]);
                            text.push_str(&format!(
                                "{z},{},{},{},{},{}\n",
                                e.re,
                                e.im,
                                m.re,
                                m.im,
                                (e - m).norm()
                            ));
                        }
                        write_out(cli, &text)?;
                    }
                }
                return Ok(ExitCode::SUCCESS);
            }
            emit_samples(cli, &meta, &samples)
        }
    }
}

fn emit_samples(cli: &Cli, meta: &serde_json::Value, samples: &[f64]) -> anyhow::Result<ExitCode> {
    match cli.format {
        Format::Json => {
            let payload = json!({ "metadata": meta, "samples": samples });
            emit(cli, &payload)?;
        }
        Format::Csv => {
            let mut text = format!("# {}\n", serde_json::to_string(meta)?);
            text.push_str("replicate,value\n");
            for (i, v) in samples.iter().enumerate() {
                text.push_str(&format!("{i},{v}\n"));
            }
            write_out(cli, &text)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
