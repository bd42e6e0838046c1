mod params;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use matdot_core::nmatrix::verify_coefficient_isolation;
use matdot_core::polydot::{tradeoff, verify_exponent_map};
use matdot_core::sim::{random_inputs, simulate_round, sweep};
use matdot_core::{CodingError, FieldMatrix, IsolationReport, StragglerModel, SubstitutionRule};
use thiserror::Error;

use params::{hetero, CodecArgs, Params, Rule};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("threshold_failure needed={needed} got={got}")]
    Threshold { needed: usize, got: usize },
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl From<CodingError> for CliError {
    fn from(e: CodingError) -> Self {
        match e {
            CodingError::RecoveryThresholdNotMet { needed, got } => CliError::Threshold { needed, got },
            CodingError::CorrectnessViolation(msg) => CliError::Invariant(msg),
            CodingError::InvalidParameter(_)
            | CodingError::InsufficientWorkers { .. }
            | CodingError::NotPrime(_)
            | CodingError::Parse(_)
            | CodingError::Io(_)
            | CodingError::Shape(_)
            | CodingError::DuplicatePoint(_)
            | CodingError::EmptyInput => CliError::Usage(e.to_string()),
            CodingError::DivisionByZero(_) => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Threshold { .. } => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

/// Coded matrix multiplication: thresholds, simulated rounds and trade-off tables.
#[derive(Parser, Debug)]
#[command(name = "matdot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print recovery thresholds and symbol counts as CSV.
    Threshold(ThresholdArgs),
    /// Encode, compute, and decode one simulated round.
    Run(RunArgs),
    /// Monte-Carlo success rates over seeded rounds, as CSV.
    Simulate(SimulateArgs),
    /// Threshold versus worker-to-fusion communication for every s*t = m.
    Tradeoff(TradeoffArgs),
    /// Exhaustively check the exponent maps of a code.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[command(flatten)]
    codec: CodecArgs,
    /// Matrix dimension used for symbol counts (default: m).
    #[arg(long = "N")]
    dim: Option<usize>,
    /// Worker count (default: the recovery threshold).
    #[arg(long = "P")]
    workers: Option<usize>,
    /// Per-factor s_i for a heterogeneous nmat chain.
    #[arg(long, value_delimiter = ',')]
    s_list: Vec<usize>,
    /// Per-factor t_i for a heterogeneous nmat chain.
    #[arg(long, value_delimiter = ',')]
    t_list: Vec<usize>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Minimum service time.
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    /// Rate of the exponential service-time tail.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Probability that a worker never returns.
    #[arg(long, default_value_t = 0.0)]
    fail_prob: f64,
    /// Worker ids (1-based) that never return.
    #[arg(long, value_delimiter = ',')]
    kill: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn model(&self) -> StragglerModel {
        StragglerModel {
            shift: self.shift,
            rate: self.rate,
            fail_prob: self.fail_prob,
            seed: self.seed,
            forced_stragglers: self.kill.clone(),
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    codec: CodecArgs,
    #[arg(long = "P")]
    workers: Option<usize>,
    /// Input matrix files, one per factor, in chain order.
    #[arg(long = "input", conflicts_with = "random")]
    inputs: Vec<PathBuf>,
    /// Use random N x N inputs drawn from --input-seed.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
    #[arg(long, default_value_t = 1)]
    input_seed: u64,
    /// Where to write the decoded product.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    codec: CodecArgs,
    /// Worker counts to sweep (default: the recovery threshold).
    #[arg(long = "P", value_delimiter = ',')]
    workers: Vec<usize>,
    #[arg(long = "N", default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    input_seed: u64,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct TradeoffArgs {
    #[arg(long)]
    m: usize,
    /// Matrix dimension (default: m).
    #[arg(long = "N")]
    dim: Option<usize>,
    #[arg(long, value_enum, default_value = "paper")]
    rule: Rule,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    codec: CodecArgs,
    #[arg(long, value_delimiter = ',')]
    s_list: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    t_list: Vec<usize>,
}

fn csv_out() -> csv::Writer<io::Stdout> {
    csv::Writer::from_writer(io::stdout())
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn cmd_threshold(args: &ThresholdArgs) -> Result<(), CliError> {
    let field = args.codec.field()?;
    let is_hetero = !args.s_list.is_empty() || !args.t_list.is_empty();
    let hetero_spec = if is_hetero {
        Some(hetero(args.codec.n, &args.s_list, &args.t_list)?)
    } else {
        None
    };
    let all = if is_hetero {
        Vec::new()
    } else {
        args.codec.resolve_all()?
    };
    let mut w = csv_out();
    w.write_record([
        "family",
        "variant",
        "n",
        "m",
        "s",
        "t",
        "P",
        "N",
        "recovery_threshold",
        "closed_form_threshold",
        "per_worker_in_symbols",
        "per_worker_out_symbols",
        "master_total_symbols",
        "fusion_total_symbols",
    ])?;
    if let Some(spec) = hetero_spec {
        let code = spec.code();
        let k = code.recovery_threshold();
        let p = args.workers.unwrap_or(k);
        let dim = args.dim.unwrap_or(1);
        let c = code.costs(&vec![(dim, dim); spec.n], p)?;
        w.write_record([
            "nmat".into(),
            "hetero".into(),
            spec.n.to_string(),
            "-".into(),
            join(&spec.s),
            join(&spec.t),
            p.to_string(),
            dim.to_string(),
            k.to_string(),
            spec.closed_form_threshold().to_string(),
            c.per_worker_in_symbols.to_string(),
            c.per_worker_out_symbols.to_string(),
            c.master_out_symbols.to_string(),
            c.fusion_in_symbols.to_string(),
        ])?;
        w.flush()?;
        return Ok(());
    }
    for params in all {
        let (n, m, s, t) = params.dims();
        let k = params.recovery_threshold()?;
        let p = args.workers.unwrap_or(k);
        let dim = args.dim.unwrap_or(m);
        let c = params.costs(field, Some(p), dim)?;
        w.write_record([
            params.family_name().to_string(),
            params.variant_name(),
            n.to_string(),
            m.to_string(),
            s.to_string(),
            t.to_string(),
            p.to_string(),
            dim.to_string(),
            k.to_string(),
            params.closed_form_threshold().to_string(),
            c.per_worker_in_symbols.to_string(),
            c.per_worker_out_symbols.to_string(),
            c.master_out_symbols.to_string(),
            c.fusion_in_symbols.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_matrix(path: &PathBuf) -> Result<FieldMatrix, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    FieldMatrix::read_text(BufReader::new(file)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let params = args.codec.resolve_one()?;
    let inputs = if !args.inputs.is_empty() {
        let mats = args.inputs.iter().map(read_matrix).collect::<Result<Vec<_>, _>>()?;
        if mats.iter().any(|m| m.field() != mats[0].field()) {
            return Err(CliError::Usage("input files use different primes".into()));
        }
        mats
    } else if let Some(n) = args.random {
        random_inputs(args.codec.field()?, params.factors(), n, args.input_seed)
    } else {
        return Err(CliError::Usage("give --input files or --random N".into()));
    };
    if inputs.len() != params.factors() {
        return Err(CliError::Usage(format!(
            "{} needs {} input matrices, got {}",
            params.family_name(),
            params.factors(),
            inputs.len()
        )));
    }
    let spec = params.spec(inputs[0].field(), args.workers)?;
    let outcome = simulate_round(&spec, &inputs, &args.model.model())?;

    let mut out = io::stdout().lock();
    let ids = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let order: Vec<usize> = outcome.completion_order.iter().map(|&(w, _)| w).collect();
    writeln!(out, "code={}", spec.label())?;
    writeln!(out, "workers={}", spec.workers())?;
    writeln!(out, "recovery_threshold={}", spec.recovery_threshold())?;
    writeln!(out, "completion_order={}", ids(&order))?;
    writeln!(out, "failed={}", ids(&outcome.failed))?;
    writeln!(out, "used_workers={}", ids(&outcome.used_workers))?;
    writeln!(out, "fusion_in_symbols={}", outcome.costs.fusion_in_symbols)?;
    writeln!(out, "worker_mult_count={}", outcome.costs.worker_mult_count)?;
    writeln!(out, "status={}", outcome.decode_status)?;
    match (&outcome.decoded, outcome.wall_time) {
        (Some(c), Some(t)) => {
            writeln!(out, "interpolations={}", outcome.interpolations)?;
            writeln!(out, "wall_time={t:.6}")?;
            if let Some(path) = &args.out {
                c.write_text(File::create(path)?)?;
            }
            Ok(())
        }
        _ => match outcome.decode_status {
            matdot_core::DecodeStatus::ThresholdFailure { needed, got } => {
                writeln!(out, "reason=threshold_failure needed={needed} got={got}")?;
                Err(CliError::Threshold { needed, got })
            }
            matdot_core::DecodeStatus::Success => Err(CliError::Invariant("success without a product".into())),
        },
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let field = args.codec.field()?;
    let model = args.model.model();
    model.validate()?;
    if args.trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    let workers: Vec<Option<usize>> = if args.workers.is_empty() {
        vec![None]
    } else {
        args.workers.iter().copied().map(Some).collect()
    };
    // Build every spec before any output so parameter errors leave stdout empty.
    let grid = args
        .codec
        .resolve_all()?
        .into_iter()
        .map(|params| {
            let specs = workers
                .iter()
                .map(|&p| params.spec(field, p))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((params, specs))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut w = csv_out();
    w.write_record([
        "family",
        "variant",
        "n",
        "m",
        "s",
        "t",
        "P",
        "recovery_threshold",
        "trials",
        "successes",
        "success_rate",
    ])?;
    for (params, specs) in grid {
        let (n, m, s, t) = params.dims();
        for stats in sweep(&specs, args.dim, &model, args.trials, args.input_seed)? {
            w.write_record([
                params.family_name().to_string(),
                params.variant_name(),
                n.to_string(),
                m.to_string(),
                s.to_string(),
                t.to_string(),
                stats.workers.to_string(),
                stats.recovery_threshold.to_string(),
                stats.trials.to_string(),
                stats.successes.to_string(),
                format!("{:.6}", stats.success_rate()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_tradeoff(args: &TradeoffArgs) -> Result<(), CliError> {
    if args.m == 0 {
        return Err(CliError::Usage("m must be positive".into()));
    }
    let rows = tradeoff(args.m, args.dim.unwrap_or(args.m), args.rule.into())?;
    let mut w = csv_out();
    w.write_record([
        "s",
        "t",
        "recovery_threshold",
        "per_worker_out_symbols",
        "fusion_total_symbols",
    ])?;
    for r in rows {
        w.write_record([
            r.s.to_string(),
            r.t.to_string(),
            r.recovery_threshold.to_string(),
            r.per_worker_out_symbols.to_string(),
            r.fusion_total_symbols.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn report_isolation(out: &mut impl Write, header: &str, closed_form: usize, r: &IsolationReport) -> io::Result<bool> {
    let ok = r.is_clean() && r.recovery_threshold == closed_form;
    writeln!(
        out,
        "{header} k={} closed_form={closed_form} wanted={} tuples={} violations={} {}",
        r.recovery_threshold,
        r.wanted.len(),
        r.tuples_checked,
        r.violations.len(),
        if ok { "ok" } else { "FAIL" }
    )?;
    for v in &r.violations {
        writeln!(out, "  {v}")?;
    }
    Ok(ok)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    let mut all_ok = true;
    if !args.s_list.is_empty() || !args.t_list.is_empty() {
        let spec = hetero(args.codec.n, &args.s_list, &args.t_list)?;
        let header = format!("nmat hetero n={} s={} t={}", spec.n, join(&spec.s), join(&spec.t));
        all_ok &= report_isolation(&mut out, &header, spec.closed_form_threshold(), &spec.code().verify())?;
    } else {
        for params in args.codec.resolve_all()? {
            match params {
                Params::MatDot { m, .. } => {
                    let r = verify_exponent_map(m, 1, SubstitutionRule::Standard)?;
                    let header = format!("{} m={m}", params.family_name());
                    all_ok &= report_isolation(&mut out, &header, 2 * m - 1, &r.isolation)?;
                }
                Params::PolyDot { s, t, rule } => {
                    let r = verify_exponent_map(s, t, rule)?;
                    let header = format!("polydot s={s} t={t} rule={rule}");
                    all_ok &= report_isolation(&mut out, &header, rule.closed_form_threshold(s, t), &r.isolation)?;
                    if rule == SubstitutionRule::Standard {
                        writeln!(out, "  bijection_violations={}", r.bijection_violations.len())?;
                        for v in &r.bijection_violations {
                            writeln!(out, "  {v}")?;
                        }
                        all_ok &= r.bijection_violations.is_empty();
                    } else {
                        writeln!(out, "  table_listed_threshold={}", rule.table_listed_threshold(s, t))?;
                    }
                }
                Params::NMat { n, variant } => {
                    let r = verify_coefficient_isolation(n, variant)?;
                    let header = format!("nmat n={n} {variant}");
                    all_ok &= report_isolation(&mut out, &header, variant.closed_form_threshold(n), &r)?;
                }
            }
        }
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Invariant("exponent map check failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Threshold(a) => cmd_threshold(a),
        Command::Run(a) => cmd_run(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Tradeoff(a) => cmd_tradeoff(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("matdot: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
