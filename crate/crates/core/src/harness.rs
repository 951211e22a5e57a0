//! Seeded, parallel Monte-Carlo experiments.
//!
//! Every trial draws its randomness from ChaCha8 generators seeded by
//! `(seed, trial index)`, with one stream per purpose, so results do not
//! depend on the number of worker threads and any trial can be replayed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    bdec_recovery_ub_binomial, bdsc_recovery_estimate, enc_fail_bound_binomial, enc_fail_given_u, BoundValue,
};
use crate::channel::{
    apply_bsc, apply_defects, apply_erasures, sample_state, sample_state_fixed_u, ChannelKind, ChannelParams,
    ChannelState,
};
use crate::codec::{decode_bdec_ml, decode_bdsc_bdd, encode_onestep, encode_twostep};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::pbch::{build_pbch, PartitionedCode};
use crate::weights::{weight_distribution_binomial, weight_distribution_exact, Which, DEFAULT_ENUMERATION_CAP};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DEFECTCODES_THREADS";

/// Failure count at which [`StopRule::TargetFailures`] stops by default.
pub const DEFAULT_TARGET_FAILURES: u64 = 1000;

const WAVE: u64 = 1 << 16;
const BLOCK: u64 = 1 << 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Exactly `u` defects per block at uniformly random positions.
    FixedU(usize),
    /// I.i.d. defects with probability `beta`.
    RandomState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    FixedTrials,
    /// Stop once this many failures have been seen (or at the trial cap).
    TargetFailures(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: u32,
    pub k: usize,
    pub l: usize,
    pub kind: ChannelKind,
    pub params: ChannelParams,
    pub mode: Mode,
    /// Trial count, or trial cap under [`StopRule::TargetFailures`].
    pub trials: u64,
    pub seed: u64,
    /// Whether erasures and flips also hit defect cells.
    pub noise_on_defects: bool,
    pub stop: StopRule,
}

impl ExperimentConfig {
    pub fn new(m: u32, k: usize, l: usize, kind: ChannelKind, params: ChannelParams) -> Self {
        Self {
            m,
            k,
            l,
            kind,
            params,
            mode: Mode::RandomState,
            trials: 10_000,
            seed: 0,
            noise_on_defects: true,
            stop: StopRule::FixedTrials,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.params.validate()?;
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if let Mode::FixedU(u) = self.mode {
            if u > n {
                return Err(Error::Parameter(format!("u = {u} exceeds n = {n}")));
            }
        }
        Ok(())
    }
}

/// Counts from a batch of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTally {
    pub trials: u64,
    /// Encoding failures (`E = 0`).
    pub enc_fail: u64,
    /// Recovery failures (`m_hat != m`).
    pub rec_fail: u64,
    /// Recovery failures with `E = 0`.
    pub rec_fail_e0: u64,
    /// Recovery failures with `E = 1`.
    pub rec_fail_e1: u64,
}

/// Proportion with a Wilson 95% score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

const Z95: f64 = 1.959963984540054;

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> RateEstimate {
    if trials == 0 {
        return RateEstimate { rate: 0.0, lo: 0.0, hi: 1.0 };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    RateEstimate {
        rate: p,
        lo: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        hi: if successes == trials { 1.0 } else { (center + half).min(1.0) },
    }
}

impl TrialTally {
    fn record(&mut self, t: TrialOutcome) {
        self.trials += 1;
        if t.enc_fail {
            self.enc_fail += 1;
        }
        if t.rec_fail {
            self.rec_fail += 1;
            if t.enc_fail {
                self.rec_fail_e0 += 1;
            } else {
                self.rec_fail_e1 += 1;
            }
        }
    }

    pub fn merge(&mut self, o: &TrialTally) {
        self.trials += o.trials;
        self.enc_fail += o.enc_fail;
        self.rec_fail += o.rec_fail;
        self.rec_fail_e0 += o.rec_fail_e0;
        self.rec_fail_e1 += o.rec_fail_e1;
    }

    pub fn enc_fail_rate(&self) -> RateEstimate {
        wilson_interval(self.enc_fail, self.trials)
    }

    pub fn rec_fail_rate(&self) -> RateEstimate {
        wilson_interval(self.rec_fail, self.trials)
    }

    /// Standard error of the encoding-failure rate, from the observed rate.
    pub fn enc_fail_sigma(&self) -> f64 {
        let p = self.enc_fail as f64 / self.trials as f64;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Failures of the event the experiment targets: encoding failures on the
    /// defect-only channel, recovery failures otherwise.
    pub fn failures(&self, kind: ChannelKind) -> u64 {
        match kind {
            ChannelKind::Bdc => self.enc_fail,
            _ => self.rec_fail,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct TrialOutcome {
    enc_fail: bool,
    rec_fail: bool,
}

/// Everything about one trial, for replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub message: BitVec,
    pub state: ChannelState,
    pub codeword: BitVec,
    pub encode_success: bool,
    pub unmasked_count: usize,
    pub step2_locations: Option<Vec<usize>>,
    pub received: BitVec,
    pub erased: Option<BitVec>,
    pub m_hat: Option<BitVec>,
    pub recovery_failure: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for item `index` under a master seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

#[derive(Clone, Copy)]
enum Stream {
    State = 1,
    Message = 2,
    Step2 = 3,
    Erasure = 4,
    Bsc = 5,
}

fn stream_rng(trial_seed: u64, s: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(trial_seed);
    r.set_stream(s as u64);
    r
}

/// Runs trial `index` of `cfg` on `code` and returns its full record.
pub fn replay_trial(code: &PartitionedCode, cfg: &ExperimentConfig, index: u64) -> TrialRecord {
    let ts = derive_seed(cfg.seed, index);
    let n = code.n();
    let mut srng = stream_rng(ts, Stream::State);
    let state = match cfg.mode {
        Mode::FixedU(u) => sample_state_fixed_u(n, u, &mut srng).expect("u validated against n"),
        Mode::RandomState => sample_state(n, cfg.params.beta, &mut srng),
    };
    let mut mrng = stream_rng(ts, Stream::Message);
    let message = BitVec::random(code.k(), &mut mrng);
    let enc = match cfg.kind {
        ChannelKind::Bdsc => encode_twostep(code, &message, &state, &mut stream_rng(ts, Stream::Step2)),
        _ => encode_onestep(code, &message, &state),
    };
    let stored = apply_defects(&enc.codeword, &state);
    let spared = (!cfg.noise_on_defects).then(|| state.mask());
    let mut record = TrialRecord {
        message: message.clone(),
        state: state.clone(),
        codeword: enc.codeword.clone(),
        encode_success: enc.success,
        unmasked_count: enc.unmasked_count,
        step2_locations: enc.step2_locations.clone(),
        received: stored.clone(),
        erased: None,
        m_hat: None,
        recovery_failure: true,
    };
    match cfg.kind {
        ChannelKind::Bdc => {
            if enc.success {
                record.m_hat = Some(code.extract_message(&stored));
            }
        }
        ChannelKind::Bdec => {
            if enc.success {
                let y = apply_erasures(&stored, cfg.params.alpha, &mut stream_rng(ts, Stream::Erasure), spared);
                record.m_hat = decode_bdec_ml(code, &y).m_hat;
                record.received = y.bits;
                record.erased = Some(y.erased);
            }
        }
        ChannelKind::Bdsc => {
            let y = apply_bsc(&stored, cfg.params.p, &mut stream_rng(ts, Stream::Bsc), spared);
            record.m_hat = decode_bdsc_bdd(code, &y.bits).m_hat;
            record.received = y.bits;
        }
    }
    record.recovery_failure = record.m_hat.as_ref() != Some(&message);
    record
}

fn run_trial(code: &PartitionedCode, cfg: &ExperimentConfig, index: u64) -> TrialOutcome {
    let r = replay_trial(code, cfg, index);
    TrialOutcome {
        enc_fail: !r.encode_success,
        rec_fail: r.recovery_failure,
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match configured_threads() {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Runs `cfg` on an already built code.
pub fn run_with_code(code: &PartitionedCode, cfg: &ExperimentConfig) -> Result<TrialTally> {
    cfg.validate(code.n())?;
    with_pool(|| run_inner(code, cfg))
}

fn run_inner(code: &PartitionedCode, cfg: &ExperimentConfig) -> TrialTally {
    let mut tally = TrialTally::default();
    let mut start = 0u64;
    while start < cfg.trials {
        let end = (start + WAVE).min(cfg.trials);
        let blocks: Vec<u64> = (start..end).step_by(BLOCK as usize).collect();
        let outcomes: Vec<Vec<TrialOutcome>> = blocks
            .par_iter()
            .map(|&b| {
                (b..(b + BLOCK).min(end))
                    .map(|i| run_trial(code, cfg, i))
                    .collect()
            })
            .collect();
        for o in outcomes.into_iter().flatten() {
            tally.record(o);
            if let StopRule::TargetFailures(target) = cfg.stop {
                if tally.failures(cfg.kind) >= target {
                    return tally;
                }
            }
        }
        start = end;
    }
    tally
}

/// Builds the code of `cfg` and runs it.
pub fn run(cfg: &ExperimentConfig) -> Result<TrialTally> {
    let code = build_pbch(cfg.m, cfg.k, cfg.l)?;
    run_with_code(&code, cfg)
}

/// Empirical `P(E = 0 | U = u)`.
pub fn run_enc_fail_given_u(code: &PartitionedCode, u: usize, trials: u64, seed: u64) -> Result<TrialTally> {
    let mut cfg = ExperimentConfig::new(code.shape.m, code.k(), code.l(), ChannelKind::Bdc, ChannelParams::default());
    cfg.mode = Mode::FixedU(u);
    cfg.trials = trials;
    cfg.seed = seed;
    run_with_code(code, &cfg)
}

/// Defect-erasure channel with one-step encoding and ML erasure decoding.
pub fn run_bdec(code: &PartitionedCode, cfg: &ExperimentConfig) -> Result<TrialTally> {
    let cfg = ExperimentConfig {
        kind: ChannelKind::Bdec,
        ..cfg.clone()
    };
    run_with_code(code, &cfg)
}

/// Defect-symmetric channel with two-step encoding and bounded-distance decoding.
pub fn run_bdsc(code: &PartitionedCode, cfg: &ExperimentConfig) -> Result<TrialTally> {
    let cfg = ExperimentConfig {
        kind: ChannelKind::Bdsc,
        ..cfg.clone()
    };
    run_with_code(code, &cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub l: usize,
    pub r: usize,
    pub d0: usize,
    pub d1: usize,
    pub analytic: f64,
    /// `None` when no failure was observed ("unreached").
    pub empirical: Option<f64>,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
    pub failures: u64,
}

/// Analytic companion of an experiment: the encoding-failure value for fixed
/// `u`, the binomial bound for the defect-only and defect-erasure channels,
/// and the half-unmasked estimate for the defect-symmetric channel.
pub fn analytic_value(code: &PartitionedCode, cfg: &ExperimentConfig) -> Result<BoundValue> {
    let s = &code.shape;
    let (alpha, beta, p) = (cfg.params.alpha, cfg.params.beta, cfg.params.p);
    match (cfg.mode, cfg.kind) {
        (Mode::FixedU(u), _) => {
            let b0 = match weight_distribution_exact(code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP) {
                Ok(d) => d,
                Err(Error::EnumerationCap { .. }) => weight_distribution_binomial(s.n, s.l),
                Err(e) => return Err(e),
            };
            enc_fail_given_u(s, u, &b0)
        }
        (Mode::RandomState, ChannelKind::Bdc) => enc_fail_bound_binomial(s.n, s.l, beta),
        (Mode::RandomState, ChannelKind::Bdec) => {
            let a = cfg.params.averaged_over_cells(alpha, cfg.noise_on_defects);
            bdec_recovery_ub_binomial(s.n, s.l, s.r, a, beta)
        }
        (Mode::RandomState, ChannelKind::Bdsc) => {
            bdsc_recovery_estimate(s, p, beta, &weight_distribution_binomial(s.n, s.l))
        }
    }
}

/// Runs `cfg` once per masking redundancy in `ls`, each with its own seed
/// derived from the master seed and `l`.
pub fn sweep(cfg: &ExperimentConfig, ls: &[usize]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(ls.len());
    for &l in ls {
        let code = build_pbch(cfg.m, cfg.k, l)?;
        rows.push(sweep_row(&code, cfg)?);
    }
    Ok(rows)
}

/// One sweep row for an already built code.
pub fn sweep_row(code: &PartitionedCode, cfg: &ExperimentConfig) -> Result<SweepRow> {
    let c = ExperimentConfig {
        m: code.shape.m,
        k: code.k(),
        l: code.l(),
        seed: derive_seed(cfg.seed, code.l() as u64),
        ..cfg.clone()
    };
    let tally = run_with_code(code, &c)?;
    let failures = tally.failures(c.kind);
    let est = wilson_interval(failures, tally.trials);
    Ok(SweepRow {
        l: code.l(),
        r: code.r(),
        d0: code.d0(),
        d1: code.d1(),
        analytic: analytic_value(code, &c)?.value,
        empirical: (failures > 0).then_some(est.rate),
        ci_lo: est.lo,
        ci_hi: est.hi,
        trials: tally.trials,
        failures,
    })
}

/// Uniform random message, for callers outside the harness.
pub fn random_message<R: Rng + ?Sized>(k: usize, rng: &mut R) -> BitVec {
    BitVec::random(k, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_basics() {
        let e = wilson_interval(0, 100);
        assert_eq!(e.rate, 0.0);
        assert!(e.lo == 0.0 && e.hi > 0.0 && e.hi < 0.05);
        let e = wilson_interval(50, 100);
        assert!((e.lo - 0.4038).abs() < 1e-3 && (e.hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn zero_noise_never_fails() {
        let code = build_pbch(4, 7, 4).unwrap();
        for kind in [ChannelKind::Bdc, ChannelKind::Bdec, ChannelKind::Bdsc] {
            let mut cfg = ExperimentConfig::new(4, 7, 4, kind, ChannelParams::default());
            cfg.trials = 2000;
            let t = run_with_code(&code, &cfg).unwrap();
            assert_eq!((t.trials, t.enc_fail, t.rec_fail), (2000, 0, 0));
        }
        let t = run_enc_fail_given_u(&code, 0, 1000, 1).unwrap();
        assert_eq!(t.enc_fail, 0);
        let t = run_enc_fail_given_u(&code, 2, 1000, 1).unwrap();
        assert_eq!(t.enc_fail, 0);
    }

    #[test]
    fn decomposition_and_determinism() {
        let code = build_pbch(5, 11, 10).unwrap();
        let mut cfg = ExperimentConfig::new(5, 11, 10, ChannelKind::Bdec, ChannelParams::bdec(0.2, 0.2).unwrap());
        cfg.trials = 5000;
        cfg.seed = 99;
        let a = run_with_code(&code, &cfg).unwrap();
        let b = run_with_code(&code, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rec_fail, a.rec_fail_e0 + a.rec_fail_e1);
        assert_eq!(a.rec_fail_e0, a.enc_fail);
        assert!(a.enc_fail > 0 && a.rec_fail_e1 > 0);
    }

    #[test]
    fn early_stop_is_a_prefix() {
        let code = build_pbch(5, 21, 10).unwrap();
        let mut cfg = ExperimentConfig::new(5, 21, 10, ChannelKind::Bdc, ChannelParams::default());
        cfg.mode = Mode::FixedU(12);
        cfg.trials = 100_000;
        cfg.stop = StopRule::TargetFailures(50);
        let t = run_with_code(&code, &cfg).unwrap();
        assert_eq!(t.enc_fail, 50);
        let mut fixed = cfg.clone();
        fixed.stop = StopRule::FixedTrials;
        fixed.trials = t.trials;
        assert_eq!(run_with_code(&code, &fixed).unwrap(), t);
    }

    #[test]
    fn replay_matches_tally() {
        let code = build_pbch(5, 16, 5).unwrap();
        let mut cfg = ExperimentConfig::new(5, 16, 5, ChannelKind::Bdsc, ChannelParams::bdsc(0.03, 0.1).unwrap());
        cfg.trials = 300;
        cfg.seed = 5;
        let t = run_with_code(&code, &cfg).unwrap();
        let fails = (0..300).filter(|&i| replay_trial(&code, &cfg, i).recovery_failure).count() as u64;
        assert_eq!(fails, t.rec_fail);
    }
}
