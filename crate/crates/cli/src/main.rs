//! `fblsec`: leakage evaluation, sweeps and blocklength design from the shell.
//!
//! SNRs are given in dB on the command line and converted to linear scale
//! before reaching the library. Exit codes: 0 ok, 1 output I/O failure,
//! 2 usage or config error, 3 numerical nonconvergence, 4 infeasible design.

mod config;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fblsec_core::experiments::{
    evaluate_point, pareto_table, run_sweep, DesignMode, OutputMethod, ParamOverrides, ParamSet,
    PointRequest, SweepSpec,
};
use fblsec_core::leakage::{saddle_point, DEFAULT_ABS_TOL};
use fblsec_core::montecarlo::ail_mc;
use fblsec_core::optimizer::{
    lambda_grid, solve_constrained_closed_form, solve_constrained_oracle, solve_weighted,
    weighted_objective, AilModel, DesignOutcome,
};
use fblsec_core::sop::{corollary_redundancy_rate, sop, SopParams};
use fblsec_core::{McConfig, McMode, WeightedObjective};

use config::{parse_word, CommandKind, OracleModel, RunConfig};
use report::{Format, Report};

#[derive(Debug, Parser)]
#[command(
    name = "fblsec",
    version,
    about = "Average information leakage of finite-blocklength wiretap links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluates the AIL at one operating point.
    Ail(AilArgs),
    /// Runs a JSON sweep specification and writes CSV.
    Sweep(SweepArgs),
    /// Designs the blocklength.
    Optimize(OptimizeArgs),
    /// Lists every blocklength with EST, AIL and Pareto dominance as CSV.
    Pareto(ParetoArgs),
    /// Monte Carlo AIL estimate.
    Mc(McArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Information bits per packet.
    #[arg(long)]
    m: Option<u32>,
    /// Blocklength in channel uses.
    #[arg(long)]
    n: Option<u32>,
    /// Decoding error probability at the legitimate receiver.
    #[arg(long)]
    eps: Option<f64>,
    /// Transmit SNR in dB.
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Legitimate channel gain ‖h_b‖².
    #[arg(long)]
    hb_gain: Option<f64>,
    /// Mean legitimate channel gain.
    #[arg(long)]
    mu_b: Option<f64>,
    /// Mean eavesdropper channel gain.
    #[arg(long)]
    mu_e: Option<f64>,
    /// Largest admissible blocklength.
    #[arg(long)]
    n_max: Option<u32>,
    /// AIL constraint for constrained design.
    #[arg(long)]
    phi: Option<f64>,
    /// AIL weight for weighted design.
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixes the legitimate SNR (linear) instead of deriving it from --snr-db.
    #[arg(long)]
    gamma_b: Option<f64>,
    /// Secrecy rate; sets m = round(rs * n).
    #[arg(long)]
    rs: Option<f64>,
}

impl ParamArgs {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            m: self.m,
            n: self.n,
            eps: self.eps,
            snr_db: self.snr_db,
            hb_gain: self.hb_gain,
            mu_b: self.mu_b,
            mu_e: self.mu_e,
            n_max: self.n_max,
            phi: self.phi,
            lambda: self.lambda,
            gamma_b: self.gamma_b,
            rs: self.rs,
        }
    }
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Prints the fully resolved config and exits.
    #[arg(long)]
    dump_config: bool,
}

impl ConfigArgs {
    fn merge(&self, cli: RunConfig, kind: CommandKind) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(cli.or(file).resolve(kind))
    }
}

#[derive(Debug, Args)]
struct AilArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Comma-separated subset of exact, approx, mc, floor.
    #[arg(long, value_delimiter = ',', value_parser = parse_word::<OutputMethod>)]
    method: Vec<OutputMethod>,
    /// Absolute tolerance of the exact quadrature.
    #[arg(long)]
    exact_abs_tol: Option<f64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<u64>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Writes the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep specification (JSON).
    spec: PathBuf,
    /// Overrides the spec's mc_samples.
    #[arg(long)]
    samples: Option<u64>,
    /// Overrides the spec's mc_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Prints the effective specification and exits.
    #[arg(long)]
    dump_config: bool,
    /// Writes the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// constrained (needs --phi) or weighted (needs --lambda).
    #[arg(long, value_parser = parse_word::<DesignMode>)]
    mode: Option<DesignMode>,
    /// Cross-checks the solution against an exhaustive scan.
    #[arg(long)]
    oracle: bool,
    /// AIL evaluator used by the constrained oracle: approx or exact.
    #[arg(long, value_parser = parse_word::<OracleModel>)]
    oracle_model: Option<OracleModel>,
    /// Absolute tolerance of the exact quadrature.
    #[arg(long)]
    exact_abs_tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Number of uniformly spaced weights in the λ scan.
    #[arg(long)]
    lambda_points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// conditional (gamma_b fixed) or ergodic (both links faded).
    #[arg(long, value_parser = parse_word::<McMode>)]
    mode: Option<McMode>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl From<fblsec_core::Error> for CliError {
    fn from(e: fblsec_core::Error) -> Self {
        match e {
            fblsec_core::Error::QuadratureNonconvergence { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Rendered output and the exit code to finish with.
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Ail(a) => (cmd_ail(a), a.out.as_deref()),
        Command::Sweep(a) => (cmd_sweep(a), a.out.as_deref()),
        Command::Optimize(a) => (cmd_optimize(a), a.out.as_deref()),
        Command::Pareto(a) => (cmd_pareto(a), a.out.as_deref()),
        Command::Mc(a) => (cmd_mc(a), a.out.as_deref()),
    };
    let finished = result.and_then(|o| emit(&o.text, out).map(|()| o.code));
    match finished {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn param_set(cfg: &RunConfig) -> ParamSet {
    cfg.params.apply(ParamSet::default())
}

/// Design commands scan `1..=n_max`; the configured `n` only enters through `rs`.
fn design_param_set(cfg: &RunConfig) -> Result<ParamSet, CliError> {
    let mut p = param_set(cfg);
    p.m = p.effective_m()?;
    p.rs = None;
    p.n = p.n_max;
    Ok(p)
}

fn cmd_ail(a: &AilArgs) -> Result<Output, CliError> {
    let cli = RunConfig {
        params: a.params.overrides(),
        methods: (!a.method.is_empty()).then(|| a.method.clone()),
        exact_abs_tol: a.exact_abs_tol,
        samples: a.samples,
        seed: a.seed,
        format: a.format,
        ..RunConfig::default()
    };
    let cfg = a.cfg.merge(cli, CommandKind::Ail)?;
    if a.cfg.dump_config {
        return Ok(Output::ok(cfg.to_json_pretty()));
    }

    let p = param_set(&cfg);
    let stats = p.stats()?;
    let fbl = p.fbl()?;
    let gamma_b = p.gamma_b();
    let saddle = saddle_point(&fbl, gamma_b)?;
    let req = PointRequest {
        methods: cfg.methods.clone().unwrap_or_default(),
        design: None,
        mc_samples: cfg.samples.unwrap_or_default(),
        mc_seed: cfg.seed.unwrap_or_default(),
        exact_abs_tol: cfg.exact_abs_tol.unwrap_or(DEFAULT_ABS_TOL),
    };
    let r = evaluate_point(&p, &req)?;
    let re = corollary_redundancy_rate(&fbl, gamma_b)?;
    let outage = sop(&SopParams::new(re, stats.gbar_e())?);

    let mut rep = Report::default();
    rep.float("gamma_b", gamma_b)
        .float("gbar_e", stats.gbar_e())
        .float("r0", saddle.r0)
        .float("x0", saddle.x0)
        .bool("negative_saddle", saddle.negative_saddle())
        .opt_float("ail_exact", r.ail_exact)
        .opt_float("exact_abs_err", r.exact_abs_err)
        .opt_float("ail_approx", r.ail_approx)
        .opt_float("ail_mc", r.ail_mc)
        .opt_float("mc_stderr", r.mc_stderr)
        .opt_float("ail_floor", r.ail_floor)
        .float("redundancy_rate", re)
        .float("sop", outage)
        .float("est", r.est.unwrap_or(f64::NAN));
    Ok(Output::ok(rep.render(cfg.format.unwrap_or(Format::Kv))))
}

fn cmd_sweep(a: &SweepArgs) -> Result<Output, CliError> {
    let text = std::fs::read_to_string(&a.spec)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.spec.display())))?;
    let mut spec = SweepSpec::from_json(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.spec.display())))?;
    spec.mc_samples = a.samples.or(spec.mc_samples);
    spec.mc_seed = a.seed.or(spec.mc_seed);
    spec.validate()
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.spec.display())))?;
    if a.dump_config {
        let mut s = spec.effective().to_json_pretty();
        s.push('\n');
        return Ok(Output::ok(s));
    }
    Ok(Output::ok(run_sweep(&spec)?.to_csv()))
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<Output, CliError> {
    let cli = RunConfig {
        params: a.params.overrides(),
        mode: a.mode,
        oracle: a.oracle.then_some(true),
        oracle_model: a.oracle_model,
        exact_abs_tol: a.exact_abs_tol,
        format: a.format,
        ..RunConfig::default()
    };
    let file = match &a.cfg.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let merged = cli.or(file);
    if merged.mode == Some(DesignMode::Weighted) && merged.params.lambda.is_none() {
        return Err(CliError::Usage("weighted mode requires --lambda".into()));
    }
    let cfg = merged.resolve(CommandKind::Optimize);
    if a.cfg.dump_config {
        return Ok(Output::ok(cfg.to_json_pretty()));
    }

    let p = design_param_set(&cfg)?;
    let stats = p.stats()?;
    let fbl = p.fbl()?;
    let gamma_b = p.gamma_b();
    let mode = cfg.mode.unwrap_or(DesignMode::Constrained);

    let outcome = match mode {
        DesignMode::Constrained => solve_constrained_closed_form(p.phi, gamma_b, &stats, &fbl)?,
        DesignMode::Weighted => {
            solve_weighted(&WeightedObjective::new(p.lambda)?, gamma_b, &stats, &fbl)?
        }
    };

    let mut rep = Report::default();
    rep.text(
        "mode",
        match mode {
            DesignMode::Constrained => "constrained",
            DesignMode::Weighted => "weighted",
        },
    );
    match mode {
        DesignMode::Constrained => rep.float("phi", p.phi),
        DesignMode::Weighted => rep.float("lambda", p.lambda),
    };
    push_outcome(&mut rep, &outcome);

    if cfg.oracle == Some(true) {
        let oracle = match mode {
            DesignMode::Constrained => {
                let model = match cfg.oracle_model.unwrap_or(OracleModel::Approx) {
                    OracleModel::Approx => AilModel::Approx,
                    OracleModel::Exact => AilModel::Exact {
                        abs_tol: cfg.exact_abs_tol.unwrap_or(DEFAULT_ABS_TOL),
                    },
                };
                solve_constrained_oracle(p.phi, gamma_b, &stats, &fbl, model)?
            }
            DesignMode::Weighted => brute_force_weighted(p.lambda, gamma_b, &stats, &fbl)?,
        };
        let agree = oracle.n_star == outcome.n_star;
        rep.int("oracle_n_star", u64::from(oracle.n_star))
            .float("oracle_ail", oracle.ail)
            .bool("oracle_feasible", oracle.feasible)
            .bool("oracle_match", agree);
        if !agree {
            eprintln!(
                "warning: oracle picked n = {} but the solver picked n = {}",
                oracle.n_star, outcome.n_star
            );
        }
    }

    let code = if outcome.feasible { 0 } else { 4 };
    Ok(Output {
        text: rep.render(cfg.format.unwrap_or(Format::Kv)),
        code,
    })
}

fn push_outcome(rep: &mut Report, o: &DesignOutcome) {
    rep.int("n_star", u64::from(o.n_star))
        .float("est", o.est)
        .float("ail", o.ail)
        .bool("feasible", o.feasible)
        .text("method", o.method.as_str());
}

/// Independent weighted scan: evaluates the objective point by point.
fn brute_force_weighted(
    lambda: f64,
    gamma_b: f64,
    stats: &fblsec_core::ChannelStats,
    fbl: &fblsec_core::FblParams,
) -> Result<DesignOutcome, CliError> {
    let obj = WeightedObjective::new(lambda)?;
    let mut best = (1u32, f64::INFINITY);
    for n in 1..=fbl.n_max() {
        let v = weighted_objective(n, &obj, gamma_b, stats, fbl)?;
        if v < best.1 {
            best = (n, v);
        }
    }
    let at = fbl.with_n(best.0)?;
    let ail = fblsec_core::leakage::ail_approx(&at, gamma_b, stats)?.value();
    Ok(DesignOutcome {
        n_star: best.0,
        est: fblsec_core::optimizer::est(&at),
        ail,
        feasible: true,
        method: fblsec_core::DesignMethod::Exhaustive,
    })
}

fn cmd_pareto(a: &ParetoArgs) -> Result<Output, CliError> {
    let cli = RunConfig {
        params: a.params.overrides(),
        lambda_points: a.lambda_points,
        ..RunConfig::default()
    };
    let cfg = a.cfg.merge(cli, CommandKind::Pareto)?;
    if a.cfg.dump_config {
        return Ok(Output::ok(cfg.to_json_pretty()));
    }
    let p = design_param_set(&cfg)?;
    let lambdas = lambda_grid(cfg.lambda_points.unwrap_or(config::DEFAULT_LAMBDA_POINTS));
    Ok(Output::ok(pareto_table(&p, &lambdas)?.to_csv()))
}

fn cmd_mc(a: &McArgs) -> Result<Output, CliError> {
    let cli = RunConfig {
        params: a.params.overrides(),
        samples: a.samples,
        seed: a.seed,
        mc_mode: a.mode,
        workers: a.workers,
        format: a.format,
        ..RunConfig::default()
    };
    let cfg = a.cfg.merge(cli, CommandKind::Mc)?;
    if a.cfg.dump_config {
        return Ok(Output::ok(cfg.to_json_pretty()));
    }
    let p = param_set(&cfg);
    let stats = p.stats()?;
    let fbl = p.fbl()?;
    let mode = cfg.mc_mode.unwrap_or(McMode::Conditional);
    let mut mc = McConfig::new(
        cfg.samples.unwrap_or_default(),
        cfg.seed.unwrap_or_default(),
        mode,
    )?;
    if let Some(k) = cfg.workers {
        mc = mc.with_workers(k);
    }
    let gamma_b = match mode {
        McMode::Conditional => Some(p.gamma_b()),
        McMode::Ergodic => None,
    };
    let e = ail_mc(&fbl, gamma_b, &stats, &mc)?;

    let mut rep = Report::default();
    rep.text(
        "mode",
        match mode {
            McMode::Conditional => "conditional",
            McMode::Ergodic => "ergodic",
        },
    )
    .int("samples", mc.samples())
    .int("seed", mc.seed())
    .float("ail_mc", e.value())
    .opt_float("mc_stderr", e.std_error());
    Ok(Output::ok(rep.render(cfg.format.unwrap_or(Format::Kv))))
}
