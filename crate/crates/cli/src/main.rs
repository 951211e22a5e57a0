//! `defectcodes`: construct partitioned BCH codes, evaluate failure bounds,
//! allocate redundancy and run seeded simulations.

mod output;
mod reproduce;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use defectcodes::analysis::{
    allocate_discrete, bdec_recovery_ub, bdec_recovery_ub_binomial, bdsc_recovery_estimate, bdsc_recovery_ub,
    enc_fail_bound, enc_fail_bound_binomial, enc_fail_given_u, BoundSelector, BoundValue,
};
use defectcodes::channel::{ChannelKind, ChannelParams, Preset};
use defectcodes::harness::{self, ExperimentConfig, Mode, StopRule, TrialTally};
use defectcodes::pbch::candidate_shapes;
use defectcodes::weights::{
    weight_distribution_binomial, weight_distribution_exact, Which, WeightDistribution, DEFAULT_ENUMERATION_CAP,
};
use defectcodes::{build_pbch, CodeShape, Error, PartitionedCode};

use output::{emit, emit_rows, empirical_cell, Format};

#[derive(Parser)]
#[command(name = "defectcodes", version, about = "Partitioned BCH codes for memories with stuck-at defects")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Trials per configuration (a cap when `--target-failures` is set).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Field degree; the code length is 2^m - 1.
    #[arg(long, default_value_t = 10)]
    m: u32,
    /// Message length.
    #[arg(long, default_value_t = 923)]
    k: usize,
}

#[derive(Args, Clone)]
struct ChannelArgs {
    /// A preset such as `bdec:ch3` or `bdsc:ch6`, or a bare kind `bdc|bdec|bdsc`.
    #[arg(long)]
    channel: Option<String>,
    /// Erasure probability.
    #[arg(long)]
    alpha: Option<f64>,
    /// Defect probability.
    #[arg(long)]
    beta: Option<f64>,
    /// Crossover probability.
    #[arg(long)]
    p: Option<f64>,
    /// Whether erasures and flips also hit defect cells.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    noise_on_defects: bool,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Fixed number of defects per block instead of i.i.d. defects.
    #[arg(long)]
    u: Option<usize>,
    /// Stop early once this many failures have been counted.
    #[arg(long)]
    target_failures: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build codes and print their parameters (one `--l`, or every split of `n - k`).
    Construct {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        l: Option<usize>,
        /// Also write the full code (matrices included) as JSON here.
        #[arg(long)]
        code_json: Option<PathBuf>,
    },
    /// Channel capacities for the given parameters.
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Evaluate one named bound on one code.
    Bound {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        l: usize,
        #[arg(long, value_enum)]
        name: BoundName,
        /// Number of defects, for `enc-fail-given-u`.
        #[arg(long)]
        u: Option<usize>,
        #[arg(long, value_enum, default_value_t = WeightsArg::Binomial)]
        weights: WeightsArg,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Choose the split of `n - k` minimizing a bound.
    Allocate {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum)]
        selector: Option<SelectorArg>,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Simulate one code on one channel.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        l: usize,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Simulate every split of `n - k` (or those in `--ls`) next to its analytic value.
    Sweep {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_delimiter = ',')]
        ls: Option<Vec<usize>>,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Canned experiments.
    Reproduce {
        #[arg(value_enum)]
        what: reproduce::Target,
        /// Masking redundancies to include (fig3 and fig4).
        #[arg(long, value_delimiter = ',')]
        ls: Option<Vec<usize>>,
        /// Defect counts to include (fig3).
        #[arg(long, value_delimiter = ',')]
        us: Option<Vec<usize>>,
        /// Defect probability (fig4).
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundName {
    /// `P(E = 0 | U = u)`.
    EncFailGivenU,
    /// `P(E = 0)` union bound over the defect count.
    EncFail,
    /// Closed-form binomial `P(E = 0)` bound.
    EncFailBinomial,
    /// Defect-erasure recovery bound.
    BdecUb,
    /// Closed-form binomial defect-erasure recovery bound.
    BdecBinomial,
    /// Defect-symmetric recovery bound.
    BdscUb,
    /// Defect-symmetric recovery estimate.
    BdscEstimate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WeightsArg {
    Exact,
    Binomial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SelectorArg {
    BdecBinomial,
    BdecUnion,
    BdscBound,
    BdscEstimate,
}

impl From<SelectorArg> for BoundSelector {
    fn from(s: SelectorArg) -> Self {
        match s {
            SelectorArg::BdecBinomial => BoundSelector::BdecBinomial,
            SelectorArg::BdecUnion => BoundSelector::BdecUnion,
            SelectorArg::BdscBound => BoundSelector::BdscBound,
            SelectorArg::BdscEstimate => BoundSelector::BdscEstimate,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => CliError::Io(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_kind(s: &str) -> Option<ChannelKind> {
    match s {
        "bdc" => Some(ChannelKind::Bdc),
        "bdec" => Some(ChannelKind::Bdec),
        "bdsc" => Some(ChannelKind::Bdsc),
        _ => None,
    }
}

impl ChannelArgs {
    /// Kind and parameters: a preset or bare kind first, then explicit overrides.
    /// Without `--channel` the kind follows from which noise parameter is set.
    fn resolve(&self, fallback: ChannelKind) -> CliResult<(ChannelKind, ChannelParams)> {
        let (kind, mut params) = match self.channel.as_deref() {
            Some(name) => match parse_kind(name) {
                Some(kind) => (kind, ChannelParams::default()),
                None => {
                    let pr = Preset::by_name(name)?;
                    (pr.kind, pr.params)
                }
            },
            None => {
                let kind = if self.p.is_some_and(|p| p > 0.0) {
                    ChannelKind::Bdsc
                } else if self.alpha.is_some_and(|a| a > 0.0) {
                    ChannelKind::Bdec
                } else {
                    fallback
                };
                (kind, ChannelParams::default())
            }
        };
        if let Some(a) = self.alpha {
            params.alpha = a;
        }
        if let Some(b) = self.beta {
            params.beta = b;
        }
        if let Some(p) = self.p {
            params.p = p;
        }
        params.validate()?;
        Ok((kind, params))
    }
}

#[derive(Serialize)]
struct ShapeRow {
    m: u32,
    n: usize,
    k: usize,
    l: usize,
    r: usize,
    d0: usize,
    d1: usize,
    t0: usize,
    t1: usize,
}

impl From<&CodeShape> for ShapeRow {
    fn from(s: &CodeShape) -> Self {
        Self {
            m: s.m,
            n: s.n,
            k: s.k,
            l: s.l,
            r: s.r,
            d0: s.d0,
            d1: s.d1,
            t0: s.t0(),
            t1: s.t1(),
        }
    }
}

/// Builds a code and checks its structural invariants.
fn build_checked(m: u32, k: usize, l: usize) -> CliResult<PartitionedCode> {
    let code = build_pbch(m, k, l)?;
    code.verify_invariants()?;
    Ok(code)
}

fn cmd_construct(g: &Global, code: &CodeArgs, l: Option<usize>, code_json: Option<&PathBuf>) -> CliResult<()> {
    let ls: Vec<usize> = match l {
        Some(l) => vec![l],
        None => candidate_shapes(code.m, code.k)?.into_iter().map(|s| s.l).collect(),
    };
    let codes = ls
        .iter()
        .map(|&l| build_checked(code.m, code.k, l))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(path) = code_json {
        if codes.len() != 1 {
            return Err(CliError::Usage("--code-json needs a single --l".into()));
        }
        std::fs::write(path, codes[0].to_json()?)?;
    }
    let rows: Vec<ShapeRow> = codes.iter().map(|c| ShapeRow::from(&c.shape)).collect();
    if codes.len() == 1 && g.format == Format::Json {
        emit(g.format, g.out.as_deref(), &rows, &codes[0].to_document())?;
    } else {
        emit_rows(g.format, g.out.as_deref(), &rows)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CapacityRow {
    alpha: f64,
    beta: f64,
    p: f64,
    bdc: f64,
    bec: f64,
    bsc: f64,
    bdec_max: f64,
    bdec_enc: f64,
    bdsc_max: f64,
    p_tilde: f64,
    bdsc_min: f64,
    bdsc_lower: f64,
    bdsc_upper: f64,
}

fn cmd_capacity(g: &Global, ch: &ChannelArgs) -> CliResult<()> {
    let (_, params) = ch.resolve(ChannelKind::Bdc)?;
    let c = params.capacities();
    let row = CapacityRow {
        alpha: params.alpha,
        beta: params.beta,
        p: params.p,
        bdc: c.bdc,
        bec: c.bec,
        bsc: c.bsc,
        bdec_max: c.bdec_max,
        bdec_enc: c.bdec_enc,
        bdsc_max: c.bdsc_max,
        p_tilde: c.p_tilde,
        bdsc_min: c.bdsc_min,
        bdsc_lower: c.bdsc_lower,
        bdsc_upper: c.bdsc_upper,
    };
    emit(g.format, g.out.as_deref(), &[&row], &row)?;
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    bound: String,
    l: usize,
    r: usize,
    d0: usize,
    d1: usize,
    value: f64,
    log2_value: f64,
    tag: String,
}

fn weights_for(code: &PartitionedCode, which: Which, mode: WeightsArg) -> CliResult<WeightDistribution> {
    let s = &code.shape;
    Ok(match mode {
        WeightsArg::Exact => weight_distribution_exact(code, which, DEFAULT_ENUMERATION_CAP)?,
        WeightsArg::Binomial => {
            let dim = match which {
                Which::DualOfMasking => s.l,
                Which::FullCode => s.r,
            };
            weight_distribution_binomial(s.n, dim)
        }
    })
}

fn cmd_bound(
    g: &Global,
    code: &CodeArgs,
    l: usize,
    name: BoundName,
    u: Option<usize>,
    weights: WeightsArg,
    ch: &ChannelArgs,
) -> CliResult<()> {
    let (_, params) = ch.resolve(ChannelKind::Bdc)?;
    let c = build_checked(code.m, code.k, l)?;
    let s = &c.shape;
    let (alpha, beta, p) = (params.alpha, params.beta, params.p);
    let b0 = || weights_for(&c, Which::DualOfMasking, weights);
    let v: BoundValue = match name {
        BoundName::EncFailGivenU => {
            let u = u.ok_or_else(|| CliError::Usage("enc-fail-given-u needs --u".into()))?;
            enc_fail_given_u(s, u, &b0()?)?
        }
        BoundName::EncFail => enc_fail_bound(s, beta, &b0()?)?,
        BoundName::EncFailBinomial => enc_fail_bound_binomial(s.n, s.l, beta)?,
        BoundName::BdecUb => {
            let a = weights_for(&c, Which::FullCode, weights)?;
            bdec_recovery_ub(s, alpha, beta, &a, &b0()?)?
        }
        BoundName::BdecBinomial => bdec_recovery_ub_binomial(s.n, s.l, s.r, alpha, beta)?,
        BoundName::BdscUb => bdsc_recovery_ub(s, p, beta, &b0()?)?,
        BoundName::BdscEstimate => bdsc_recovery_estimate(s, p, beta, &b0()?)?,
    };
    let row = BoundRow {
        bound: name.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
        l: s.l,
        r: s.r,
        d0: s.d0,
        d1: s.d1,
        value: v.value,
        log2_value: v.log2_value,
        tag: format!("{:?}", v.tag).to_lowercase(),
    };
    emit(g.format, g.out.as_deref(), &[&row], &row)?;
    Ok(())
}

#[derive(Serialize)]
struct AllocationRow {
    l: usize,
    r: usize,
    d0: usize,
    d1: usize,
    bound: f64,
    log2_bound: f64,
    chosen: bool,
}

fn cmd_allocate(g: &Global, code: &CodeArgs, selector: Option<SelectorArg>, ch: &ChannelArgs) -> CliResult<()> {
    let (kind, params) = ch.resolve(ChannelKind::Bdec)?;
    let selector = selector.map_or_else(|| BoundSelector::default_for(kind), BoundSelector::from);
    let report = allocate_discrete(code.m, code.k, &params, selector)?;
    let rows: Vec<AllocationRow> = report
        .candidates
        .iter()
        .map(|c| AllocationRow {
            l: c.l,
            r: c.r,
            d0: c.d0,
            d1: c.d1,
            bound: c.bound.value,
            log2_bound: c.bound.log2_value,
            chosen: c.chosen,
        })
        .collect();
    emit(g.format, g.out.as_deref(), &rows, &report)?;
    let (l, r) = report.chosen;
    match report.kkt {
        Some(k) => eprintln!("chosen (l, r) = ({l}, {r}); continuous optimum ({:.1}, {:.1})", k.l, k.r),
        None => eprintln!("chosen (l, r) = ({l}, {r})"),
    }
    Ok(())
}

fn experiment(
    g: &Global,
    code: &CodeArgs,
    l: usize,
    ch: &ChannelArgs,
    run: &RunArgs,
    fallback: ChannelKind,
) -> CliResult<ExperimentConfig> {
    let (kind, params) = ch.resolve(fallback)?;
    let mut cfg = ExperimentConfig::new(code.m, code.k, l, kind, params);
    cfg.trials = g.trials.unwrap_or(10_000);
    cfg.seed = g.seed;
    cfg.noise_on_defects = ch.noise_on_defects;
    if let Some(u) = run.u {
        cfg.mode = Mode::FixedU(u);
    }
    if let Some(t) = run.target_failures {
        cfg.stop = StopRule::TargetFailures(t);
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct SimulationDoc<'a> {
    config: &'a ExperimentConfig,
    tally: TrialTally,
    enc_fail_rate: harness::RateEstimate,
    rec_fail_rate: harness::RateEstimate,
}

fn cmd_simulate(g: &Global, code: &CodeArgs, l: usize, ch: &ChannelArgs, run: &RunArgs) -> CliResult<()> {
    let cfg = experiment(g, code, l, ch, run, ChannelKind::Bdc)?;
    let c = build_checked(cfg.m, cfg.k, cfg.l)?;
    let tally = harness::run_with_code(&c, &cfg)?;
    let doc = SimulationDoc {
        config: &cfg,
        tally,
        enc_fail_rate: tally.enc_fail_rate(),
        rec_fail_rate: tally.rec_fail_rate(),
    };
    emit(g.format, g.out.as_deref(), &[tally], &doc)?;
    Ok(())
}

#[derive(Serialize)]
struct SweepCsvRow {
    l: usize,
    r: usize,
    d0: usize,
    d1: usize,
    analytic: f64,
    empirical: String,
    ci_lo: f64,
    ci_hi: f64,
    trials: u64,
    failures: u64,
}

impl From<&harness::SweepRow> for SweepCsvRow {
    fn from(r: &harness::SweepRow) -> Self {
        Self {
            l: r.l,
            r: r.r,
            d0: r.d0,
            d1: r.d1,
            analytic: r.analytic,
            empirical: empirical_cell(r.empirical),
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            trials: r.trials,
            failures: r.failures,
        }
    }
}

fn cmd_sweep(g: &Global, code: &CodeArgs, ls: Option<&[usize]>, ch: &ChannelArgs, run: &RunArgs) -> CliResult<()> {
    let cfg = experiment(g, code, 0, ch, run, ChannelKind::Bdc)?;
    let ls: Vec<usize> = match ls {
        Some(ls) => ls.to_vec(),
        None => candidate_shapes(code.m, code.k)?.into_iter().map(|s| s.l).collect(),
    };
    let rows = harness::sweep(&cfg, &ls)?;
    let csv: Vec<SweepCsvRow> = rows.iter().map(SweepCsvRow::from).collect();
    emit(g.format, g.out.as_deref(), &csv, &rows)?;
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Construct { code, l, code_json } => cmd_construct(g, &code, l, code_json.as_ref()),
        Command::Capacity { channel } => cmd_capacity(g, &channel),
        Command::Bound {
            code,
            l,
            name,
            u,
            weights,
            channel,
        } => cmd_bound(g, &code, l, name, u, weights, &channel),
        Command::Allocate { code, selector, channel } => cmd_allocate(g, &code, selector, &channel),
        Command::Simulate { code, l, channel, run } => cmd_simulate(g, &code, l, &channel, &run),
        Command::Sweep { code, ls, channel, run } => cmd_sweep(g, &code, ls.as_deref(), &channel, &run),
        Command::Reproduce { what, ls, us, beta } => {
            reproduce::run(g, what, ls.as_deref(), us.as_deref(), beta)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
