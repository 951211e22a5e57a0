//! Weight distributions of the masking dual and of the full code.
//!
//! Exact distributions enumerate the smaller side (a code of dimension `l` or
//! `r`) by Gray code and then apply the MacWilliams identity. The binomial
//! approximation replaces counts by `2^(-dim) C(n, w)` and is stored in the log
//! domain.

use std::f64::consts::LN_2;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::numeric::LnFactorial;
use crate::pbch::PartitionedCode;

/// Default ceiling on the number of enumerated codewords.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Exact,
    Binomial,
}

/// Which distribution of a partitioned code to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    /// `B_{0,w}`: the code `{c : G0^T c = 0}`, dual of `colspace(G0)`.
    DualOfMasking,
    /// `A_w`: the full code `{c : H^T c = 0}`, dual of `colspace(H)`.
    FullCode,
}

#[derive(Clone, Debug)]
pub struct WeightDistribution {
    pub n: usize,
    pub mode: WeightMode,
    /// `ln(count_w)`, `-inf` for zero counts.
    pub ln_counts: Vec<f64>,
    /// Integer counts in exact mode.
    pub exact: Option<Vec<BigUint>>,
}

fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().map_or(f64::NAN, f64::ln)
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * LN_2
    }
}

impl WeightDistribution {
    pub fn from_exact(counts: Vec<BigUint>) -> Self {
        Self {
            n: counts.len() - 1,
            mode: WeightMode::Exact,
            ln_counts: counts.iter().map(ln_biguint).collect(),
            exact: Some(counts),
        }
    }

    #[inline]
    pub fn ln_count(&self, w: usize) -> f64 {
        self.ln_counts[w]
    }

    pub fn count(&self, w: usize) -> f64 {
        self.ln_counts[w].exp()
    }

    /// Smallest positive weight with a nonzero count.
    pub fn min_distance(&self) -> Option<usize> {
        (1..=self.n).find(|&w| self.ln_counts[w] > f64::NEG_INFINITY)
    }

    /// `ln(sum of counts)`.
    pub fn ln_total(&self) -> f64 {
        crate::numeric::log_sum_exp(&self.ln_counts)
    }
}

/// Weight distribution of the row space of `gen` (`dim x n`) by Gray-code
/// enumeration of all `2^dim` combinations. Rows need not be independent.
pub fn enumerate_span(gen: &BitMatrix, cap: u64) -> Result<Vec<BigUint>> {
    let dim = gen.rows();
    let n = gen.cols();
    if dim >= 64 || (1u64 << dim) > cap {
        return Err(Error::EnumerationCap { dimension: dim, cap });
    }
    let mut counts = vec![0u64; n + 1];
    let mut cur = vec![0u64; n.div_ceil(64)];
    counts[0] += 1;
    for i in 1u64..(1u64 << dim) {
        let row = gen.row_words(i.trailing_zeros() as usize);
        let mut w = 0u32;
        for (c, &x) in cur.iter_mut().zip(row) {
            *c ^= x;
            w += c.count_ones();
        }
        counts[w as usize] += 1;
    }
    Ok(counts.into_iter().map(BigUint::from).collect())
}

/// MacWilliams transform: from the distribution `a` of a binary code of
/// dimension `dim` to the distribution of its dual,
/// `B_w = 2^(-dim) sum_i A_i K_w(i)` with Krawtchouk polynomials `K_w`.
pub fn macwilliams_transform(a: &[BigUint], dim: usize) -> Result<Vec<BigUint>> {
    let n = a.len() - 1;
    let binom = binomial_table(n);
    let scale = BigInt::from(1u8) << dim;
    (0..=n)
        .map(|w| {
            let mut acc = BigInt::zero();
            for (i, ai) in a.iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                let k = krawtchouk(&binom, n, w, i);
                acc += k * BigInt::from(ai.clone());
            }
            let (q, r) = (&acc / &scale, &acc % &scale);
            if !r.is_zero() || q.sign() == Sign::Minus {
                return Err(Error::InvalidArgument(format!(
                    "input is not the weight distribution of a dimension-{dim} linear code"
                )));
            }
            Ok(q.to_biguint().unwrap_or_default())
        })
        .collect()
}

fn binomial_table(n: usize) -> Vec<Vec<BigInt>> {
    let mut t: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![BigInt::from(1u8); i + 1];
        for j in 1..i {
            row[j] = &t[i - 1][j - 1] + &t[i - 1][j];
        }
        t.push(row);
    }
    t
}

/// `K_w(i) = sum_j (-1)^j C(i, j) C(n - i, w - j)`.
fn krawtchouk(binom: &[Vec<BigInt>], n: usize, w: usize, i: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for j in 0..=w.min(i) {
        if w - j > n - i {
            continue;
        }
        let term = &binom[i][j] * &binom[n - i][w - j];
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Exact `B_{0,w}` or `A_w` of a partitioned code.
pub fn weight_distribution_exact(
    code: &PartitionedCode,
    which: Which,
    cap: u64,
) -> Result<WeightDistribution> {
    let gen = match which {
        Which::DualOfMasking => code.g0_t(),
        Which::FullCode => code.h_tilde_t(),
    };
    let dim = gen.rows();
    if 2 * dim > gen.cols() {
        // the code itself is the smaller side
        return Ok(WeightDistribution::from_exact(enumerate_span(&gen.nullspace_rows(), cap)?));
    }
    let small = enumerate_span(gen, cap)?;
    let dual = macwilliams_transform(&small, dim)?;
    Ok(WeightDistribution::from_exact(dual))
}

/// Binomial approximation `2^(-dim) C(n, w)`.
pub fn weight_distribution_binomial(n: usize, dim: usize) -> WeightDistribution {
    let lf = LnFactorial::new(n);
    WeightDistribution {
        n,
        mode: WeightMode::Binomial,
        ln_counts: (0..=n)
            .map(|w| lf.ln_choose(n, w) - dim as f64 * LN_2)
            .collect(),
        exact: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitVec;
    use crate::pbch::build_pbch;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn hamming_7_4_generator() -> BitMatrix {
        let rows: Vec<BitVec> = ["1000110", "0100101", "0010011", "0001111"]
            .iter()
            .map(|s| BitVec::parse(s).unwrap())
            .collect();
        BitMatrix::from_rows(7, &rows)
    }

    #[test]
    fn hamming_7_4() {
        let a = enumerate_span(&hamming_7_4_generator(), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(a, big(&[1, 0, 0, 7, 7, 0, 0, 1]));
        // dual is the [7,3] simplex code
        let b = macwilliams_transform(&a, 4).unwrap();
        assert_eq!(b, big(&[1, 0, 0, 0, 7, 0, 0, 0]));
        assert_eq!(macwilliams_transform(&b, 3).unwrap(), a);
    }

    #[test]
    fn empty_masking_layer_gives_full_space() {
        let code = build_pbch(4, 11, 0).unwrap();
        let b0 = weight_distribution_exact(&code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP).unwrap();
        let lf = LnFactorial::new(15);
        for w in 0..=15 {
            assert!((b0.ln_count(w) - lf.ln_choose(15, w)).abs() < 1e-9);
        }
        let bin = weight_distribution_binomial(15, 0);
        for w in 0..=15 {
            assert!((b0.ln_count(w) - bin.ln_count(w)).abs() < 1e-9);
        }
    }

    #[test]
    fn n31_masking_dual() {
        let code = build_pbch(5, 21, 10).unwrap();
        let b0 = weight_distribution_exact(&code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP).unwrap();
        let ex = b0.exact.as_ref().unwrap();
        assert_eq!(ex[0], BigUint::from(1u8));
        for w in 1..code.d0() {
            assert!(ex[w].is_zero());
        }
        let total: BigUint = ex.iter().sum();
        assert_eq!(total, BigUint::from(1u64) << 21);
        assert_eq!(b0.min_distance(), Some(5));
    }

    #[test]
    fn large_masking_layer_enumerates_the_dual() {
        let code = build_pbch(5, 11, 20).unwrap();
        let direct = weight_distribution_exact(&code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP).unwrap();
        let span = enumerate_span(code.g0_t(), DEFAULT_ENUMERATION_CAP).unwrap();
        let via_transform = macwilliams_transform(&span, 20).unwrap();
        assert_eq!(direct.exact.unwrap(), via_transform);
        let code = build_pbch(5, 1, 30).unwrap();
        let b0 = weight_distribution_exact(&code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(b0.min_distance(), Some(31));
    }

    #[test]
    fn full_code_distribution() {
        let code = build_pbch(4, 7, 4).unwrap();
        let a = weight_distribution_exact(&code, Which::FullCode, DEFAULT_ENUMERATION_CAP).unwrap();
        let ex = a.exact.as_ref().unwrap();
        let total: BigUint = ex.iter().sum();
        assert_eq!(total, BigUint::from(1u64) << 11);
        assert_eq!(a.min_distance(), Some(3));
        // brute-force the nullspace of H^T
        let mut brute = vec![0u64; 16];
        for x in 0u64..1 << 15 {
            let v = BitVec::from_words(15, vec![x]);
            if code.syndrome(&v).is_zero() {
                brute[x.count_ones() as usize] += 1;
            }
        }
        assert_eq!(ex, &big(&brute));
    }

    #[test]
    fn binomial_values() {
        let d = weight_distribution_binomial(1023, 50);
        assert!((d.ln_count(0) + 50.0 * LN_2).abs() < 1e-12);
        let d = weight_distribution_binomial(31, 10);
        assert!((d.count(31) - 9.765625e-4).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let code = build_pbch(5, 16, 5).unwrap();
        let err = weight_distribution_exact(&code, Which::FullCode, 512).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { dimension: 10, cap: 512 }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn macwilliams_round_trip(rows in 1usize..8, cols in 1usize..16, seed: u64) {
            let g = BitMatrix::random(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed));
            let dim = g.rank();
            let basis = BitMatrix::from_rows(cols, &(0..dim).map(|i| g.rref().reduced.row(i)).collect::<Vec<_>>());
            let a = enumerate_span(&basis, DEFAULT_ENUMERATION_CAP).unwrap();
            let b = macwilliams_transform(&a, dim).unwrap();
            let total: BigUint = b.iter().sum();
            prop_assert_eq!(total, BigUint::from(1u64) << (cols - dim));
            prop_assert_eq!(macwilliams_transform(&b, cols - dim).unwrap(), a);
        }
    }
}
