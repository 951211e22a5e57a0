//! Failure-probability bounds and estimates, and redundancy allocation.
//!
//! All sums are accumulated in the natural-log domain. Reported `log2_value`s
//! are the logarithm of the raw (unclamped) expression; `value` is clamped to
//! `[0, 1]`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, ChannelParams};
use crate::error::{Error, Result};
use crate::numeric::{ln_bernoulli_weight, LnFactorial, LogSum};
use crate::pbch::{candidate_shapes, CodeShape};
use crate::weights::{weight_distribution_binomial, WeightDistribution, WeightMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundTag {
    /// The probability is exactly this value.
    Exact,
    /// An upper bound.
    Upper,
    /// The probability is zero.
    Zero,
    /// An approximation that is neither a bound nor exact.
    Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    /// `min(raw, 1)`.
    pub value: f64,
    /// `log2(raw)`; `-inf` when the raw value is zero.
    pub log2_value: f64,
    /// `log2` of the defect-masking contribution, when the bound has one.
    pub masking_log2: Option<f64>,
    /// `log2` of the erasure / transient-error contribution, when the bound has one.
    pub error_log2: Option<f64>,
    pub tag: BoundTag,
}

fn to_log2(ln: f64) -> f64 {
    ln / LN_2
}

impl BoundValue {
    fn from_ln(ln_raw: f64, tag: BoundTag) -> Self {
        Self {
            value: ln_raw.exp().min(1.0),
            log2_value: to_log2(ln_raw),
            masking_log2: None,
            error_log2: None,
            tag,
        }
    }

    fn zero() -> Self {
        Self::from_ln(f64::NEG_INFINITY, BoundTag::Zero)
    }

    fn with_parts(mut self, masking_ln: f64, error_ln: f64) -> Self {
        self.masking_log2 = Some(to_log2(masking_ln));
        self.error_log2 = Some(to_log2(error_ln));
        self
    }

    /// Raw (unclamped) value.
    pub fn raw(&self) -> f64 {
        self.log2_value.exp2()
    }
}

fn check_length(shape: &CodeShape, dist: &WeightDistribution) -> Result<()> {
    if dist.n != shape.n {
        return Err(Error::InvalidArgument(format!(
            "weight distribution has length {} but the code has n = {}",
            dist.n, shape.n
        )));
    }
    Ok(())
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {x} outside [0, 1]")))
    }
}

/// `ln sum_{w=w0}^{u} W_w C(n - w, u - w)` for every `u` in `0..=n`.
fn ln_overlap_sums(lf: &LnFactorial, dist: &WeightDistribution, w0: usize) -> Vec<f64> {
    let n = dist.n;
    (0..=n)
        .map(|u| {
            let mut acc = LogSum::new();
            for w in w0..=u {
                acc.add(dist.ln_count(w) + lf.ln_choose(n - w, u - w));
            }
            acc.value()
        })
        .collect()
}

/// `ln P(Bin(n, p) >= t)` for `t` in `0..=n + 1`.
fn ln_tails(lf: &LnFactorial, n: usize, p: f64) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; n + 2];
    let mut acc = LogSum::new();
    for t in (0..=n).rev() {
        acc.add(lf.ln_choose(n, t) + ln_bernoulli_weight(p, t, n));
        out[t] = acc.value();
    }
    out[0] = 0.0;
    out
}

fn tail_at(tails: &[f64], start: i64) -> f64 {
    if start <= 0 {
        0.0
    } else {
        tails.get(start as usize).copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// `P(E = 0 | U = u)`: zero below `d0`, exact up to `d0 + t0`, and the clamped
/// union bound above.
pub fn enc_fail_given_u(shape: &CodeShape, u: usize, b0: &WeightDistribution) -> Result<BoundValue> {
    check_length(shape, b0)?;
    let n = shape.n;
    if u > n {
        return Err(Error::Parameter(format!("u = {u} exceeds n = {n}")));
    }
    let d0 = shape.d0e();
    if u < d0 {
        return Ok(BoundValue::zero());
    }
    let lf = LnFactorial::new(n);
    let mut acc = LogSum::new();
    for w in d0..=u {
        acc.add(b0.ln_count(w) + lf.ln_choose(n - w, u - w));
    }
    let ratio = acc.value() - lf.ln_choose(n, u);
    Ok(if u <= d0 + shape.t0() {
        BoundValue::from_ln(ratio - LN_2, BoundTag::Exact)
    } else {
        BoundValue::from_ln(ratio, BoundTag::Upper)
    })
}

/// `ln sum_u beta^u (1-beta)^(n-u) sum_w W_w C(n-w, u-w)` over `u, w >= start`.
fn ln_union_term(lf: &LnFactorial, dist: &WeightDistribution, q: f64, start: usize) -> f64 {
    let n = dist.n;
    let sums = ln_overlap_sums(lf, dist, start);
    let mut acc = LogSum::new();
    for (u, &s) in sums.iter().enumerate().skip(start) {
        acc.add(ln_bernoulli_weight(q, u, n) + s);
    }
    acc.value()
}

/// Lower summation limit for the union-bound chains. The binomial
/// approximation sums from zero, which makes the closed forms exact.
fn union_start(dist: &WeightDistribution, d: usize) -> usize {
    match dist.mode {
        WeightMode::Exact => d,
        WeightMode::Binomial => 0,
    }
}

fn ln_masking_term(lf: &LnFactorial, shape: &CodeShape, beta: f64, b0: &WeightDistribution) -> f64 {
    if beta == 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_union_term(lf, b0, beta, union_start(b0, shape.d0e()))
}

/// Upper bound on `P(E = 0)` from the weight distribution of the masking dual.
pub fn enc_fail_bound(shape: &CodeShape, beta: f64, b0: &WeightDistribution) -> Result<BoundValue> {
    check_length(shape, b0)?;
    check_prob("beta", beta)?;
    if beta == 0.0 {
        return Ok(BoundValue::zero());
    }
    let lf = LnFactorial::new(shape.n);
    Ok(BoundValue::from_ln(ln_masking_term(&lf, shape, beta, b0), BoundTag::Upper))
}

/// Closed form `2^(-l) (1 + beta)^n` of the binomial-approximated bound.
pub fn enc_fail_bound_binomial(n: usize, l: usize, beta: f64) -> Result<BoundValue> {
    check_prob("beta", beta)?;
    let ln = -(l as f64) * LN_2 + n as f64 * beta.ln_1p();
    Ok(BoundValue::from_ln(ln, BoundTag::Upper))
}

/// Upper bound on `P(m_hat != m)` over the defect-erasure channel: a masking
/// term from `B_{0,w}` plus an erasure term from the code's `A_w`. A term whose
/// probability parameter is zero vanishes.
pub fn bdec_recovery_ub(
    shape: &CodeShape,
    alpha: f64,
    beta: f64,
    a: &WeightDistribution,
    b0: &WeightDistribution,
) -> Result<BoundValue> {
    check_length(shape, a)?;
    check_length(shape, b0)?;
    check_prob("alpha", alpha)?;
    check_prob("beta", beta)?;
    let lf = LnFactorial::new(shape.n);
    let mask = ln_masking_term(&lf, shape, beta, b0);
    let err = if alpha == 0.0 {
        f64::NEG_INFINITY
    } else {
        ln_union_term(&lf, a, alpha, union_start(a, shape.d1e()))
    };
    let total = crate::numeric::log_sum_exp(&[mask, err]);
    let tag = if total == f64::NEG_INFINITY {
        BoundTag::Zero
    } else {
        BoundTag::Upper
    };
    Ok(BoundValue::from_ln(total, tag).with_parts(mask, err))
}

/// Binomial form `2^(-l) (1 + beta)^n + 2^(-r) (1 + alpha)^n`, each term
/// dropped when its probability parameter is zero.
pub fn bdec_recovery_ub_binomial(n: usize, l: usize, r: usize, alpha: f64, beta: f64) -> Result<BoundValue> {
    check_prob("alpha", alpha)?;
    check_prob("beta", beta)?;
    let term = |red: usize, q: f64| {
        if q == 0.0 {
            f64::NEG_INFINITY
        } else {
            -(red as f64) * LN_2 + n as f64 * q.ln_1p()
        }
    };
    let (mask, err) = (term(l, beta), term(r, alpha));
    let total = crate::numeric::log_sum_exp(&[mask, err]);
    let tag = if total == f64::NEG_INFINITY {
        BoundTag::Zero
    } else {
        BoundTag::Upper
    };
    Ok(BoundValue::from_ln(total, tag).with_parts(mask, err))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KktCase {
    Interior,
    AllL,
    AllR,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktPoint {
    pub l: f64,
    pub r: f64,
    pub case: KktCase,
}

/// Real-valued minimizer of the binomial bound subject to `l + r = n - k`.
///
/// A channel without defects puts all redundancy into `r` and a channel
/// without erasures puts it into `l`, since the corresponding term of the
/// objective vanishes.
pub fn kkt_allocation(n: usize, k: usize, alpha: f64, beta: f64) -> Result<KktPoint> {
    check_prob("alpha", alpha)?;
    check_prob("beta", beta)?;
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!("rate k/n = {k}/{n} outside (0, 1)")));
    }
    let red = (n - k) as f64;
    let all_l = KktPoint { l: red, r: 0.0, case: KktCase::AllL };
    let all_r = KktPoint { l: 0.0, r: red, case: KktCase::AllR };
    let (nf, kf) = (n as f64, k as f64);
    let interior = |ratio_log2: f64| KktPoint {
        l: 0.5 * (nf * (1.0 - ratio_log2) - kf),
        r: 0.5 * (nf * (1.0 + ratio_log2) - kf),
        case: KktCase::Interior,
    };
    if alpha == 0.0 && beta == 0.0 {
        return Ok(interior(0.0));
    }
    if beta == 0.0 {
        return Ok(all_r);
    }
    if alpha == 0.0 {
        return Ok(all_l);
    }
    let ratio_log2 = ((1.0 + alpha) / (1.0 + beta)).log2();
    let edge = 1.0 - kf / nf;
    Ok(if ratio_log2 > edge {
        all_r
    } else if ratio_log2 < -edge {
        all_l
    } else {
        interior(ratio_log2)
    })
}

/// `R0 > beta` and `R0 + R1 < 1 - alpha` with `R0 = l / n`, `R1 = k / n`.
pub fn in_capacity_region(n: usize, k: usize, l: usize, alpha: f64, beta: f64) -> bool {
    let r0 = l as f64 / n as f64;
    let r1 = k as f64 / n as f64;
    r0 > beta && r0 + r1 < 1.0 - alpha
}

fn ln_defect_probs(lf: &LnFactorial, n: usize, beta: f64) -> Vec<f64> {
    (0..=n)
        .map(|u| lf.ln_choose(n, u) + ln_bernoulli_weight(beta, u, n))
        .collect()
}

fn bdsc_sum(
    shape: &CodeShape,
    p: f64,
    beta: f64,
    b0: &WeightDistribution,
    tail_start: impl Fn(usize) -> i64,
    tag: BoundTag,
) -> Result<BoundValue> {
    check_length(shape, b0)?;
    check_prob("beta", beta)?;
    check_prob("p", p)?;
    let n = shape.n;
    let d0 = shape.d0e();
    let t1 = shape.t1();
    let lf = LnFactorial::new(n);
    let tails = ln_tails(&lf, n, p);
    let bsc = tails[t1 + 1];
    let mut mask = LogSum::new();
    if beta > 0.0 {
        let sums = ln_overlap_sums(&lf, b0, d0);
        let pu = ln_defect_probs(&lf, n, beta);
        for u in d0..=n {
            let ratio = (sums[u] - lf.ln_choose(n, u)).min(0.0);
            mask.add(pu[u] + ratio + tail_at(&tails, tail_start(u)));
        }
    }
    let mask = mask.value();
    let total = crate::numeric::log_sum_exp(&[mask, bsc]);
    let tag = if total == f64::NEG_INFINITY { BoundTag::Zero } else { tag };
    Ok(BoundValue::from_ln(total, tag).with_parts(mask, bsc))
}

/// Upper bound on `P(m_hat != m)` over the defect-symmetric channel with
/// two-step encoding and bounded-distance decoding, counting every unmasked
/// defect as an error.
pub fn bdsc_recovery_ub(shape: &CodeShape, p: f64, beta: f64, b0: &WeightDistribution) -> Result<BoundValue> {
    let (t1, d0) = (shape.t1() as i64, shape.d0e() as i64);
    bdsc_sum(shape, p, beta, b0, |u| t1 + d0 - u as i64, BoundTag::Upper)
}

/// Estimate of `P(m_hat != m)` for the same setting, counting half of the
/// unmasked defects (rounded up) as errors.
pub fn bdsc_recovery_estimate(shape: &CodeShape, p: f64, beta: f64, b0: &WeightDistribution) -> Result<BoundValue> {
    let (t1, d0) = (shape.t1() as i64, shape.d0e() as i64);
    bdsc_sum(
        shape,
        p,
        beta,
        b0,
        |u| t1 - (u as i64 - d0 + 1 + 1).div_euclid(2) + 1,
        BoundTag::Estimate,
    )
}

/// The objective minimized by [`allocate_discrete`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSelector {
    /// Closed-form binomial bound for the defect-erasure channel.
    BdecBinomial,
    /// Defect-erasure bound evaluated with binomial weight distributions.
    BdecUnion,
    /// Two-step / bounded-distance upper bound for the defect-symmetric channel.
    BdscBound,
    /// Half-unmasked-defects estimate for the defect-symmetric channel.
    BdscEstimate,
}

impl BoundSelector {
    pub fn kind(self) -> ChannelKind {
        match self {
            BoundSelector::BdecBinomial | BoundSelector::BdecUnion => ChannelKind::Bdec,
            BoundSelector::BdscBound | BoundSelector::BdscEstimate => ChannelKind::Bdsc,
        }
    }

    pub fn default_for(kind: ChannelKind) -> Self {
        match kind {
            ChannelKind::Bdsc => BoundSelector::BdscEstimate,
            _ => BoundSelector::BdecBinomial,
        }
    }
}

/// Evaluates a selected bound on one shape with binomial weight distributions.
pub fn evaluate_selector(shape: &CodeShape, selector: BoundSelector, params: &ChannelParams) -> Result<BoundValue> {
    let n = shape.n;
    let (alpha, beta, p) = (params.alpha, params.beta, params.p);
    match selector {
        BoundSelector::BdecBinomial => bdec_recovery_ub_binomial(n, shape.l, shape.r, alpha, beta),
        BoundSelector::BdecUnion => bdec_recovery_ub(
            shape,
            alpha,
            beta,
            &weight_distribution_binomial(n, shape.r),
            &weight_distribution_binomial(n, shape.l),
        ),
        BoundSelector::BdscBound => bdsc_recovery_ub(shape, p, beta, &weight_distribution_binomial(n, shape.l)),
        BoundSelector::BdscEstimate => {
            bdsc_recovery_estimate(shape, p, beta, &weight_distribution_binomial(n, shape.l))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub l: usize,
    pub r: usize,
    pub d0: usize,
    pub d1: usize,
    pub bound: BoundValue,
    pub chosen: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub n: usize,
    pub k: usize,
    pub selector: BoundSelector,
    pub params: ChannelParams,
    pub candidates: Vec<CandidateRow>,
    /// Discrete minimizer `(l, r)`.
    pub chosen: (usize, usize),
    /// Continuous KKT point, for the defect-erasure objectives.
    pub kkt: Option<KktPoint>,
}

/// Evaluates `selector` on every realizable split of `n - k` and returns the
/// minimizer of the raw bound. Ties go to the smaller `l`.
pub fn allocate_discrete(
    m: u32,
    k: usize,
    params: &ChannelParams,
    selector: BoundSelector,
) -> Result<AllocationReport> {
    params.validate()?;
    let shapes = candidate_shapes(m, k)?;
    let mut candidates = Vec::with_capacity(shapes.len());
    for s in &shapes {
        let bound = evaluate_selector(s, selector, params)?;
        candidates.push(CandidateRow {
            l: s.l,
            r: s.r,
            d0: s.d0,
            d1: s.d1,
            bound,
            chosen: false,
        });
    }
    let best = candidates
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, c)| match acc {
            Some((_, v)) if c.bound.log2_value >= v => acc,
            _ => Some((i, c.bound.log2_value)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Parameter("no allocation candidates".into()))?;
    candidates[best].chosen = true;
    let n = shapes[0].n;
    let kkt = match selector.kind() {
        ChannelKind::Bdec => Some(kkt_allocation(n, k, params.alpha, params.beta)?),
        _ => None,
    };
    Ok(AllocationReport {
        n,
        k,
        selector,
        params: *params,
        chosen: (candidates[best].l, candidates[best].r),
        candidates,
        kkt,
    })
}
