//! Canned experiments on the n = 1023 and n = 31 code families.

use clap::ValueEnum;
use serde::Serialize;

use defectcodes::analysis::{allocate_discrete, enc_fail_given_u, BoundSelector};
use defectcodes::channel::{ChannelKind, ChannelParams, Preset};
use defectcodes::harness::{self, ExperimentConfig, Mode};
use defectcodes::pbch::candidate_shapes;
use defectcodes::weights::{weight_distribution_exact, Which, DEFAULT_ENUMERATION_CAP};
use defectcodes::PartitionedCode;

use crate::output::{emit, emit_rows, empirical_cell};
use crate::{build_checked, CliResult, Global, ShapeRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// The eleven splits of the [1023, 923] family.
    Table1,
    /// Defect-erasure allocations from the binomial bound and the KKT point.
    Table3,
    /// Defect-symmetric allocations from the half-unmasked estimate.
    Table5,
    /// `P(E = 0 | U = u)` on n = 31 codes without an error-correcting layer.
    Fig3,
    /// `P(E = 0)` on every n = 31 code with a masking layer.
    Fig4,
}

const BIG_M: u32 = 10;
const BIG_K: usize = 923;
const SMALL_M: u32 = 5;

pub fn run(g: &Global, what: Target, ls: Option<&[usize]>, us: Option<&[usize]>, beta: f64) -> CliResult<()> {
    match what {
        Target::Table1 => table1(g),
        Target::Table3 => table3(g),
        Target::Table5 => table5(g),
        Target::Fig3 => fig3(g, ls, us),
        Target::Fig4 => fig4(g, ls, beta),
    }
}

fn table1(g: &Global) -> CliResult<()> {
    let rows = candidate_shapes(BIG_M, BIG_K)?
        .iter()
        .map(|s| build_checked(BIG_M, BIG_K, s.l).map(|c| ShapeRow::from(&c.shape)))
        .collect::<CliResult<Vec<_>>>()?;
    emit_rows(g.format, g.out.as_deref(), &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct Table3Row {
    channel: usize,
    alpha: f64,
    beta: f64,
    l_hat: usize,
    r_hat: usize,
    l_tilde: f64,
    r_tilde: f64,
}

fn table3(g: &Global) -> CliResult<()> {
    let mut rows = Vec::new();
    for pr in Preset::all(ChannelKind::Bdec) {
        let rep = allocate_discrete(BIG_M, BIG_K, &pr.params, BoundSelector::BdecBinomial)?;
        let kkt = rep.kkt.expect("defect-erasure objectives carry a KKT point");
        rows.push(Table3Row {
            channel: pr.index,
            alpha: pr.params.alpha,
            beta: pr.params.beta,
            l_hat: rep.chosen.0,
            r_hat: rep.chosen.1,
            l_tilde: kkt.l,
            r_tilde: kkt.r,
        });
    }
    emit_rows(g.format, g.out.as_deref(), &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct Table5Row {
    channel: usize,
    p: f64,
    beta: f64,
    l_hat: usize,
    r_hat: usize,
    estimate: f64,
}

fn table5(g: &Global) -> CliResult<()> {
    let mut rows = Vec::new();
    for pr in Preset::all(ChannelKind::Bdsc) {
        let rep = allocate_discrete(BIG_M, BIG_K, &pr.params, BoundSelector::BdscEstimate)?;
        let best = rep.candidates.iter().find(|c| c.chosen).expect("one candidate is chosen");
        rows.push(Table5Row {
            channel: pr.index,
            p: pr.params.p,
            beta: pr.params.beta,
            l_hat: rep.chosen.0,
            r_hat: rep.chosen.1,
            estimate: best.bound.value,
        });
    }
    emit_rows(g.format, g.out.as_deref(), &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct Fig3Row {
    l: usize,
    r: usize,
    d0: usize,
    d1: usize,
    u: usize,
    analytic: f64,
    /// `exact` in the regime where the analytic value is exact, `upper` above it.
    kind: String,
    empirical: f64,
    ci_lo: f64,
    ci_hi: f64,
    trials: u64,
    failures: u64,
}

fn fig3(g: &Global, ls: Option<&[usize]>, us: Option<&[usize]>) -> CliResult<()> {
    let n = (1usize << SMALL_M) - 1;
    let ls: Vec<usize> = ls.map_or_else(|| (5..n).step_by(5).collect(), <[usize]>::to_vec);
    let us: Vec<usize> = us.map_or_else(|| (0..=n).collect(), <[usize]>::to_vec);
    let trials = g.trials.unwrap_or(10_000);
    let mut rows = Vec::new();
    for l in ls {
        let code = build_checked(SMALL_M, n - l, l)?;
        let b0 = weight_distribution_exact(&code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP)?;
        for &u in &us {
            let seed = harness::derive_seed(g.seed, (l * (n + 1) + u) as u64);
            let t = harness::run_enc_fail_given_u(&code, u, trials, seed)?;
            let a = enc_fail_given_u(&code.shape, u, &b0)?;
            let est = t.enc_fail_rate();
            rows.push(Fig3Row {
                l,
                r: code.r(),
                d0: code.d0(),
                d1: code.d1(),
                u,
                analytic: a.value,
                kind: format!("{:?}", a.tag).to_lowercase(),
                empirical: est.rate,
                ci_lo: est.lo,
                ci_hi: est.hi,
                trials: t.trials,
                failures: t.enc_fail,
            });
        }
    }
    emit_rows(g.format, g.out.as_deref(), &rows)?;
    Ok(())
}

/// Every realizable n = 31 code with `l > 0`, ordered by `(k, l)`.
pub fn small_codes_with_masking() -> CliResult<Vec<PartitionedCode>> {
    let n = (1usize << SMALL_M) - 1;
    let mut out = Vec::new();
    for k in 1..n {
        let Ok(shapes) = candidate_shapes(SMALL_M, k) else { continue };
        for s in shapes.into_iter().filter(|s| s.l > 0) {
            if let Ok(c) = build_checked(SMALL_M, k, s.l) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Fig4Row {
    k: usize,
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

#[derive(Serialize)]
struct Fig4Doc {
    k: usize,
    #[serde(flatten)]
    row: harness::SweepRow,
}

fn fig4(g: &Global, ls: Option<&[usize]>, beta: f64) -> CliResult<()> {
    let params = ChannelParams::new(0.0, beta, 0.0)?;
    let mut rows = Vec::new();
    let mut docs = Vec::new();
    for code in small_codes_with_masking()? {
        if ls.is_some_and(|ls| !ls.contains(&code.l())) {
            continue;
        }
        let mut cfg = ExperimentConfig::new(SMALL_M, code.k(), code.l(), ChannelKind::Bdc, params);
        cfg.mode = Mode::RandomState;
        cfg.trials = g.trials.unwrap_or(100_000);
        cfg.seed = harness::derive_seed(g.seed, code.k() as u64);
        let row = harness::sweep_row(&code, &cfg)?;
        rows.push(Fig4Row {
            k: code.k(),
            l: row.l,
            r: row.r,
            d0: row.d0,
            d1: row.d1,
            analytic: row.analytic,
            empirical: empirical_cell(row.empirical),
            ci_lo: row.ci_lo,
            ci_hi: row.ci_hi,
            trials: row.trials,
            failures: row.failures,
        });
        docs.push(Fig4Doc { k: code.k(), row });
    }
    emit(g.format, g.out.as_deref(), &rows, &docs)?;
    Ok(())
}
