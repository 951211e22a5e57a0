//! Stuck-at defect channels with optional erasures or bit flips, and their
//! capacity formulas.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::numeric::binary_entropy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Defects only.
    Bdc,
    /// Defects followed by erasures.
    Bdec,
    /// Defects followed by bit flips.
    Bdsc,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Bdc => "bdc",
            ChannelKind::Bdec => "bdec",
            ChannelKind::Bdsc => "bdsc",
        }
    }
}

/// `(α, β, p)`: erasure, defect and crossover probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
}

impl ChannelParams {
    pub fn new(alpha: f64, beta: f64, p: f64) -> Result<Self> {
        let c = Self { alpha, beta, p };
        c.validate()?;
        Ok(c)
    }

    pub fn bdec(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 0.0)
    }

    pub fn bdsc(p: f64, beta: f64) -> Result<Self> {
        Self::new(0.0, beta, p)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, hi: f64| {
            if v.is_finite() && (0.0..=hi).contains(&v) {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} = {v} outside [0, {hi}]")))
            }
        };
        check("alpha", self.alpha, 1.0)?;
        check("beta", self.beta, 1.0)?;
        check("p", self.p, 0.5)
    }

    /// Per-cell noise probability seen by all cells when noise spares defect
    /// cells: `(1 - β) x`.
    pub fn averaged_over_cells(&self, x: f64, noise_on_defects: bool) -> f64 {
        if noise_on_defects {
            x
        } else {
            (1.0 - self.beta) * x
        }
    }

    pub fn capacities(&self) -> Capacities {
        capacities(self)
    }
}

/// State of one memory cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Normal,
    Stuck0,
    Stuck1,
}

/// Defect state of a block of cells: `mask` marks stuck cells and `stuck`
/// holds their values (zero elsewhere).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChannelState {
    mask: BitVec,
    stuck: BitVec,
}

impl ChannelState {
    pub fn normal(n: usize) -> Self {
        Self {
            mask: BitVec::zeros(n),
            stuck: BitVec::zeros(n),
        }
    }

    pub fn from_cells(cells: &[Cell]) -> Self {
        let mut s = Self::normal(cells.len());
        for (i, c) in cells.iter().enumerate() {
            match c {
                Cell::Normal => {}
                Cell::Stuck0 => s.mask.set(i, true),
                Cell::Stuck1 => {
                    s.mask.set(i, true);
                    s.stuck.set(i, true);
                }
            }
        }
        s
    }

    /// Defects at `positions` with the given stuck values.
    pub fn from_defects(n: usize, positions: &[usize], values: &[bool]) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::InvalidArgument(
                "defect positions and values differ in length".into(),
            ));
        }
        let mut s = Self::normal(n);
        for (&i, &v) in positions.iter().zip(values) {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "defect position {i} outside 0..{n}"
                )));
            }
            s.mask.set(i, true);
            s.stuck.set(i, v);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn cell(&self, i: usize) -> Cell {
        match (self.mask.get(i), self.stuck.get(i)) {
            (false, _) => Cell::Normal,
            (true, false) => Cell::Stuck0,
            (true, true) => Cell::Stuck1,
        }
    }

    pub fn mask(&self) -> &BitVec {
        &self.mask
    }

    pub fn stuck_values(&self) -> &BitVec {
        &self.stuck
    }

    /// Sorted defect positions.
    pub fn defects(&self) -> Vec<usize> {
        self.mask.iter_ones().collect()
    }

    pub fn u(&self) -> usize {
        self.mask.count_ones()
    }

    /// Number of defect cells whose stuck value differs from `c`.
    pub fn unmasked_count(&self, c: &BitVec) -> usize {
        c.xor(&self.stuck).and(&self.mask).count_ones()
    }
}

/// Positions of i.i.d. Bernoulli(`p`) successes among `n` trials, in
/// increasing order, sampled by geometric skipping.
pub fn bernoulli_positions<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<usize> {
    if p <= 0.0 || n == 0 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..n).collect();
    }
    let denom = (-p).ln_1p();
    let mut out = Vec::new();
    let mut pos = 0usize;
    loop {
        // 1 - U lies in (0, 1], so the logarithm is finite
        let u: f64 = 1.0 - rng.gen::<f64>();
        let skip = (u.ln() / denom).floor();
        if skip >= (n - pos) as f64 {
            break;
        }
        pos += skip as usize;
        out.push(pos);
        pos += 1;
        if pos >= n {
            break;
        }
    }
    out
}

/// I.i.d. cells: normal with probability `1 - β`, stuck at 0 or 1 with
/// probability `β / 2` each.
pub fn sample_state<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> ChannelState {
    let mut s = ChannelState::normal(n);
    for i in bernoulli_positions(n, beta, rng) {
        s.mask.set(i, true);
        if rng.gen::<bool>() {
            s.stuck.set(i, true);
        }
    }
    s
}

/// Exactly `u` defects at a uniformly random subset, with uniform stuck values.
pub fn sample_state_fixed_u<R: Rng + ?Sized>(n: usize, u: usize, rng: &mut R) -> Result<ChannelState> {
    if u > n {
        return Err(Error::Parameter(format!("u = {u} exceeds n = {n}")));
    }
    let mut s = ChannelState::normal(n);
    for i in sample(rng, n, u) {
        s.mask.set(i, true);
        if rng.gen::<bool>() {
            s.stuck.set(i, true);
        }
    }
    Ok(s)
}

/// `c ∘ s`: stuck cells read their stuck value, normal cells read `c`.
pub fn apply_defects(c: &BitVec, s: &ChannelState) -> BitVec {
    assert_eq!(c.len(), s.n(), "codeword and state lengths differ");
    let words = c
        .words()
        .iter()
        .zip(s.mask.words())
        .zip(s.stuck.words())
        .map(|((&c, &m), &v)| (c & !m) | v)
        .collect();
    BitVec::from_words(c.len(), words)
}

/// Channel output over `{0, 1, erased}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceivedWord {
    /// Received bits; erased positions hold zero.
    pub bits: BitVec,
    pub erased: BitVec,
}

impl ReceivedWord {
    pub fn clean(bits: BitVec) -> Self {
        let n = bits.len();
        Self {
            bits,
            erased: BitVec::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn erasure_count(&self) -> usize {
        self.erased.count_ones()
    }

    /// Indices of unerased symbols.
    pub fn unerased(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.erased.get(i)).collect()
    }
}

/// Erases each symbol independently with probability `alpha`. Cells flagged in
/// `spared` are never erased.
pub fn apply_erasures<R: Rng + ?Sized>(
    word: &BitVec,
    alpha: f64,
    rng: &mut R,
    spared: Option<&BitVec>,
) -> ReceivedWord {
    let mut out = ReceivedWord::clean(word.clone());
    for i in bernoulli_positions(word.len(), alpha, rng) {
        if spared.is_some_and(|s| s.get(i)) {
            continue;
        }
        out.erased.set(i, true);
        out.bits.set(i, false);
    }
    out
}

/// Flips each symbol independently with probability `p`. Cells flagged in
/// `spared` are never flipped.
pub fn apply_bsc<R: Rng + ?Sized>(
    word: &BitVec,
    p: f64,
    rng: &mut R,
    spared: Option<&BitVec>,
) -> ReceivedWord {
    let mut out = ReceivedWord::clean(word.clone());
    for i in bernoulli_positions(word.len(), p, rng) {
        if spared.is_some_and(|s| s.get(i)) {
            continue;
        }
        out.bits.flip(i);
    }
    out
}

/// Capacity formulas for one parameter set, in bits per cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capacities {
    /// Defect channel with defect information at the encoder: `1 - β`.
    pub bdc: f64,
    /// Erasure channel alone: `1 - α`.
    pub bec: f64,
    /// Symmetric channel alone: `1 - h(p)`.
    pub bsc: f64,
    /// Defect-erasure channel, defects known to both sides: `(1 - β)(1 - α)`.
    pub bdec_max: f64,
    /// Defect-erasure channel, defects known to the encoder: `1 - α - β`.
    pub bdec_enc: f64,
    /// Defect-symmetric channel, defects known to both sides: `(1 - β)(1 - h(p))`.
    pub bdsc_max: f64,
    /// Effective crossover when defects are unknown: `(1 - β) p + β / 2`.
    pub p_tilde: f64,
    /// Defect-symmetric channel, defects unknown: `1 - h(p_tilde)`.
    pub bdsc_min: f64,
    /// Lower bound with encoder-side defect information: `1 - β - h(p)`.
    pub bdsc_lower: f64,
    /// Upper bound with encoder-side defect information: `(1 - β)(1 - h(p))`.
    pub bdsc_upper: f64,
}

pub fn capacities(c: &ChannelParams) -> Capacities {
    let (a, b, p) = (c.alpha, c.beta, c.p);
    let hp = binary_entropy(p);
    let p_tilde = (1.0 - b) * p + b / 2.0;
    Capacities {
        bdc: 1.0 - b,
        bec: 1.0 - a,
        bsc: 1.0 - hp,
        bdec_max: (1.0 - b) * (1.0 - a),
        bdec_enc: 1.0 - a - b,
        bdsc_max: (1.0 - b) * (1.0 - hp),
        p_tilde,
        bdsc_min: 1.0 - binary_entropy(p_tilde),
        bdsc_lower: 1.0 - b - hp,
        bdsc_upper: (1.0 - b) * (1.0 - hp),
    }
}

/// A named reference channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub kind: ChannelKind,
    pub index: usize,
    pub params: ChannelParams,
}

const BDEC_PRESETS: [(f64, f64); 7] = [
    (0.040, 0.0),
    (0.035, 0.005),
    (0.025, 0.015),
    (0.020, 0.020),
    (0.015, 0.025),
    (0.005, 0.035),
    (0.0, 0.040),
];

const BDSC_PRESETS: [(f64, f64); 7] = [
    (4.0e-3, 0.0),
    (3.0e-3, 2.0e-3),
    (2.5e-3, 3.0e-3),
    (2.0e-3, 4.0e-3),
    (1.0e-3, 6.0e-3),
    (5.0e-4, 7.0e-3),
    (0.0, 8.0e-3),
];

impl Preset {
    /// All presets of a kind in table order.
    pub fn all(kind: ChannelKind) -> Vec<Preset> {
        let count = match kind {
            ChannelKind::Bdec | ChannelKind::Bdsc => 7,
            ChannelKind::Bdc => 0,
        };
        (1..=count).map(|i| Self::get(kind, i).unwrap()).collect()
    }

    pub fn get(kind: ChannelKind, index: usize) -> Result<Preset> {
        let unknown = || Error::Parameter(format!("no preset {}:ch{index}", kind.name()));
        if !(1..=7).contains(&index) {
            return Err(unknown());
        }
        let params = match kind {
            ChannelKind::Bdec => {
                let (alpha, beta) = BDEC_PRESETS[index - 1];
                ChannelParams { alpha, beta, p: 0.0 }
            }
            ChannelKind::Bdsc => {
                let (p, beta) = BDSC_PRESETS[index - 1];
                ChannelParams { alpha: 0.0, beta, p }
            }
            ChannelKind::Bdc => return Err(unknown()),
        };
        Ok(Preset { kind, index, params })
    }

    /// Parses names such as `bdec:ch4` or `bdsc:ch6`.
    pub fn by_name(name: &str) -> Result<Preset> {
        let bad = || Error::Parameter(format!("unknown channel preset {name:?}"));
        let (kind, ch) = name.split_once(':').ok_or_else(bad)?;
        let kind = match kind.to_ascii_lowercase().as_str() {
            "bdec" => ChannelKind::Bdec,
            "bdsc" => ChannelKind::Bdsc,
            _ => return Err(bad()),
        };
        let index = ch
            .strip_prefix("ch")
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(bad)?;
        Self::get(kind, index)
    }

    pub fn name(&self) -> String {
        format!("{}:ch{}", self.kind.name(), self.index)
    }
}
