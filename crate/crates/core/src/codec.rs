//! Defect-masking encoders and the erasure / bit-flip decoders.

use rand::seq::index::sample;
use rand::Rng;

use crate::channel::{ChannelState, ReceivedWord};
use crate::error::{Error, Result};
use crate::field::BinaryField;
use crate::gf2::{BitMatrix, BitVec};
use crate::pbch::PartitionedCode;

/// Largest masking redundancy accepted by [`mde_exhaustive`].
pub const MDE_MAX_L: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodeOutcome {
    pub codeword: BitVec,
    pub d: BitVec,
    /// Masking success: every stuck cell agrees with the codeword.
    pub success: bool,
    /// Number of stuck cells that disagree with the codeword.
    pub unmasked_count: usize,
    /// Defect positions masked by the second step of two-step encoding, if it ran.
    pub step2_locations: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeDetail {
    Ok,
    /// No codeword agrees with the received symbols.
    Inconsistent,
    /// Several codewords agree with the received symbols and carry different messages.
    Ambiguous,
    /// The error pattern has more than `t1` flips or the locator is invalid.
    WeightOverflow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub m_hat: Option<BitVec>,
    pub codeword: Option<BitVec>,
    pub detail: DecodeDetail,
}

impl DecodeOutcome {
    fn ok(code: &PartitionedCode, c: BitVec) -> Self {
        Self {
            m_hat: Some(code.extract_message(&c)),
            codeword: Some(c),
            detail: DecodeDetail::Ok,
        }
    }

    fn failed(detail: DecodeDetail) -> Self {
        Self {
            m_hat: None,
            codeword: None,
            detail,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.detail == DecodeDetail::Ok
    }
}

fn check_message(code: &PartitionedCode, m: &BitVec) {
    assert_eq!(m.len(), code.k(), "message length differs from k");
}

fn finish(code: &PartitionedCode, x: &BitVec, d: BitVec, s: &ChannelState) -> EncodeOutcome {
    let mut c = code.masking_codeword(&d);
    c.xor_assign(x);
    let unmasked = s.unmasked_count(&c);
    EncodeOutcome {
        codeword: c,
        d,
        success: unmasked == 0,
        unmasked_count: unmasked,
        step2_locations: None,
    }
}

/// Solves `G0^V d = (G1 m + s)^V` on the rows `v`.
fn mask_rows(code: &PartitionedCode, x: &BitVec, s: &ChannelState, v: &[usize]) -> Option<BitVec> {
    let a = code.g0().gather_rows(v);
    let target = x.xor(s.stuck_values()).select(v);
    a.solve_consistent(&target)
}

/// Masking is possible iff `rank(G0^U) = rank([G0^U | b^U])`.
pub fn masking_solvable(code: &PartitionedCode, m: &BitVec, s: &ChannelState) -> bool {
    let u = s.defects();
    let a = code.g0().gather_rows(&u);
    let b = code.message_codeword(m).xor(s.stuck_values()).select(&u);
    let mut bm = BitMatrix::zeros(u.len(), 1);
    for i in b.iter_ones() {
        bm.set(i, 0, true);
    }
    a.rank() == a.hstack(&bm).rank()
}

/// Linear-equation encoder: masks all defects when the system on the defect
/// rows is solvable, otherwise falls back to `d = 0`.
pub fn encode_onestep(code: &PartitionedCode, m: &BitVec, s: &ChannelState) -> EncodeOutcome {
    check_message(code, m);
    let x = code.message_codeword(m);
    let u = s.defects();
    let d = mask_rows(code, &x, s, &u).unwrap_or_else(|| BitVec::zeros(code.l()));
    finish(code, &x, d, s)
}

/// Two-step encoder. When masking all defects fails, `d0 - 1` defects chosen
/// uniformly at random are masked instead. The result with fewer unmasked
/// defects (the masked subset or the `d = 0` fallback) is returned.
pub fn encode_twostep<R: Rng + ?Sized>(
    code: &PartitionedCode,
    m: &BitVec,
    s: &ChannelState,
    rng: &mut R,
) -> EncodeOutcome {
    let first = encode_onestep(code, m, s);
    if first.success {
        return first;
    }
    let x = code.message_codeword(m);
    let u = s.defects();
    let count = (code.shape.d0e() - 1).min(u.len());
    let mut chosen: Vec<usize> = sample(rng, u.len(), count).into_iter().map(|i| u[i]).collect();
    chosen.sort_unstable();
    let d = mask_rows(code, &x, s, &chosen)
        .expect("fewer than d0 rows of G0 are always independent");
    let mut second = finish(code, &x, d, s);
    second.step2_locations = Some(chosen.clone());
    if second.unmasked_count <= first.unmasked_count {
        second
    } else {
        EncodeOutcome {
            step2_locations: Some(chosen),
            ..first
        }
    }
}

/// Minimum-distance encoding by exhaustive search over all `2^l` vectors `d`.
/// Ties keep the first minimizer in Gray-code order.
pub fn mde_exhaustive(code: &PartitionedCode, m: &BitVec, s: &ChannelState) -> Result<EncodeOutcome> {
    check_message(code, m);
    let l = code.l();
    if l > MDE_MAX_L {
        return Err(Error::Parameter(format!(
            "exhaustive encoding needs l <= {MDE_MAX_L}, got {l}"
        )));
    }
    let x = code.message_codeword(m);
    let g0t = code.g0_t();
    let mut c = x.clone();
    let mut d = BitVec::zeros(l);
    let mut best = (s.unmasked_count(&c), d.clone());
    for i in 1u64..(1u64 << l) {
        let j = i.trailing_zeros() as usize;
        d.flip(j);
        c.xor_assign(&g0t.row(j));
        let cnt = s.unmasked_count(&c);
        if cnt < best.0 {
            best = (cnt, d.clone());
            if cnt == 0 {
                break;
            }
        }
    }
    Ok(finish(code, &x, best.1, s))
}

/// Maximum-likelihood erasure decoding through the parity checks: the erased
/// symbols `c_E` must satisfy `H_E^T c_E = H^T y'`, where `y'` is the received
/// word with erasures set to zero. Decoding succeeds when the system is
/// consistent and every solution yields the same message.
pub fn decode_bdec_ml(code: &PartitionedCode, y: &ReceivedWord) -> DecodeOutcome {
    let erased: Vec<usize> = y.erased.iter_ones().collect();
    let mut y0 = y.bits.clone();
    for &i in &erased {
        y0.set(i, false);
    }
    let syn = code.syndrome(&y0);
    let h_e_t = code.h_tilde().gather_rows(&erased).transpose();
    let Some(c_e) = h_e_t.solve_consistent(&syn) else {
        return DecodeOutcome::failed(DecodeDetail::Inconsistent);
    };
    let null = h_e_t.nullspace_rows();
    if null.rows() > 0 {
        let g1t_e = code.g1_tilde().gather_rows(&erased);
        if (0..null.rows()).any(|i| !g1t_e.combine_rows(&null.row(i)).is_zero()) {
            return DecodeOutcome::failed(DecodeDetail::Ambiguous);
        }
    }
    let mut c = y0;
    for (j, &pos) in erased.iter().enumerate() {
        if c_e.get(j) {
            c.set(pos, true);
        }
    }
    DecodeOutcome::ok(code, c)
}

/// Maximum-likelihood erasure decoding by solving `[G1 | G0]^V [m; d] = y^V`
/// directly over the unerased rows `V`.
pub fn decode_bdec_ml_direct(code: &PartitionedCode, y: &ReceivedWord) -> DecodeOutcome {
    let k = code.k();
    let v = y.unerased();
    let g = code.g1().hstack(code.g0());
    let a = g.gather_rows(&v);
    let Some(x) = a.solve_consistent(&y.bits.select(&v)) else {
        return DecodeOutcome::failed(DecodeDetail::Inconsistent);
    };
    let null = a.nullspace_rows();
    let head: Vec<usize> = (0..k).collect();
    if (0..null.rows()).any(|i| !null.row(i).select(&head).is_zero()) {
        return DecodeOutcome::failed(DecodeDetail::Ambiguous);
    }
    let c = g.mul_vec(&x);
    DecodeOutcome {
        m_hat: Some(x.select(&head)),
        codeword: Some(c),
        detail: DecodeDetail::Ok,
    }
}

/// Berlekamp-Massey over GF(2^m). `syn[j]` is `S_{j+1}`. Returns the error
/// locator `Λ(x)` (lowest degree first) and its linear complexity.
pub fn berlekamp_massey(field: &BinaryField, syn: &[u32]) -> (Vec<u32>, usize) {
    let mut c = vec![1u32];
    let mut b = vec![1u32];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last = 1u32;
    for n in 0..syn.len() {
        let mut delta = syn[n];
        for i in 1..=l.min(n) {
            if i < c.len() {
                delta ^= field.mul(c[i], syn[n - i]);
            }
        }
        if delta == 0 {
            shift += 1;
            continue;
        }
        let coef = field.div(delta, last);
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] ^= field.mul(coef, bi);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last = delta;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    while c.len() > 1 && c.last() == Some(&0) {
        c.pop();
    }
    (c, l)
}

fn eval_poly(field: &BinaryField, coeffs: &[u32], x: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| field.mul(acc, x) ^ c)
}

/// Bounded-distance decoding of up to `t1` bit flips with Berlekamp-Massey and
/// Chien search on the error-correcting BCH layer.
pub fn decode_bdsc_bdd(code: &PartitionedCode, y: &BitVec) -> DecodeOutcome {
    let t1 = code.t1();
    if code.r() == 0 || t1 == 0 {
        return if code.syndrome(y).is_zero() {
            DecodeOutcome::ok(code, y.clone())
        } else {
            DecodeOutcome::failed(DecodeDetail::WeightOverflow)
        };
    }
    let field = code.field();
    let v = code.syndrome(y);
    if v.is_zero() {
        return DecodeOutcome::ok(code, y.clone());
    }
    // v(x) = y(x) mod g(x) agrees with y at every root of g
    let v_ones: Vec<usize> = v.iter_ones().collect();
    let syn: Vec<u32> = (1..=2 * t1)
        .map(|j| {
            v_ones
                .iter()
                .fold(0u32, |acc, &i| acc ^ field.alpha_pow((i * j) as i64))
        })
        .collect();
    let (lambda, l) = berlekamp_massey(field, &syn);
    if l > t1 || lambda.len() != l + 1 {
        return DecodeOutcome::failed(DecodeDetail::WeightOverflow);
    }
    let n = code.n();
    let mut c = y.clone();
    let mut roots = 0;
    for i in 0..n {
        if eval_poly(field, &lambda, field.alpha_pow(-(i as i64))) == 0 {
            c.flip(i);
            roots += 1;
        }
    }
    if roots != l || !code.syndrome(&c).is_zero() {
        return DecodeOutcome::failed(DecodeDetail::WeightOverflow);
    }
    DecodeOutcome::ok(code, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_bsc, apply_defects, apply_erasures, sample_state_fixed_u};
    use crate::pbch::build_pbch;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clean_round_trip() {
        let code = build_pbch(4, 7, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = BitVec::random(7, &mut rng);
            let enc = encode_onestep(&code, &m, &ChannelState::normal(15));
            assert!(enc.success);
            assert!(enc.d.is_zero());
            assert_eq!(enc.codeword, code.message_codeword(&m));
            let y = ReceivedWord::clean(enc.codeword.clone());
            assert_eq!(decode_bdec_ml(&code, &y).m_hat, Some(m.clone()));
            assert_eq!(decode_bdsc_bdd(&code, &enc.codeword).m_hat, Some(m));
        }
    }

    #[test]
    fn bm_recovers_known_pattern() {
        let code = build_pbch(5, 16, 5).unwrap();
        assert_eq!(code.t1(), 2);
        let m = BitVec::zeros(16);
        let mut y = code.message_codeword(&m);
        y.flip(3);
        y.flip(30);
        let out = decode_bdsc_bdd(&code, &y);
        assert_eq!(out.m_hat, Some(m));
        assert!(out.codeword.unwrap().is_zero());
    }

    #[test]
    fn all_erased_is_ambiguous() {
        let code = build_pbch(4, 7, 4).unwrap();
        let c = code.message_codeword(&BitVec::random(7, &mut ChaCha8Rng::seed_from_u64(5)));
        let y = apply_erasures(&c, 1.0, &mut ChaCha8Rng::seed_from_u64(6), None);
        assert_eq!(decode_bdec_ml(&code, &y).detail, DecodeDetail::Ambiguous);
        assert_eq!(decode_bdec_ml_direct(&code, &y).detail, DecodeDetail::Ambiguous);
    }

    #[test]
    fn witness_of_masking_failure() {
        // search for a defect pattern with u = d0 that cannot be masked
        let code = build_pbch(4, 7, 4).unwrap();
        let m = BitVec::zeros(7);
        let mut found = false;
        'outer: for a in 0..15 {
            for b in a + 1..15 {
                for c in b + 1..15 {
                    for vals in 0..8u32 {
                        let bits = [vals & 1 == 1, vals & 2 == 2, vals & 4 == 4];
                        let s = ChannelState::from_defects(15, &[a, b, c], &bits).unwrap();
                        let one = encode_onestep(&code, &m, &s);
                        if one.success {
                            continue;
                        }
                        // no choice of d works
                        for d in 0..16u64 {
                            let cw = code.masking_codeword(&BitVec::from_words(4, vec![d]));
                            assert!(s.unmasked_count(&cw) >= 1);
                        }
                        let two = encode_twostep(&code, &m, &s, &mut ChaCha8Rng::seed_from_u64(0));
                        assert!(!two.success);
                        assert!(two.unmasked_count <= 1);
                        let mde = mde_exhaustive(&code, &m, &s).unwrap();
                        assert!(mde.unmasked_count <= two.unmasked_count);
                        found = true;
                        break 'outer;
                    }
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn empty_masking_layer_leaves_defects() {
        let code = build_pbch(4, 11, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let m = BitVec::random(11, &mut rng);
            let s = sample_state_fixed_u(15, 4, &mut rng).unwrap();
            let two = encode_twostep(&code, &m, &s, &mut rng);
            let c = code.message_codeword(&m);
            assert_eq!(two.codeword, c);
            assert_eq!(two.unmasked_count, s.unmasked_count(&c));
        }
    }

    #[test]
    fn no_error_correction_layer() {
        let code = build_pbch(4, 11, 4).unwrap();
        let m = BitVec::random(11, &mut ChaCha8Rng::seed_from_u64(3));
        let c = code.message_codeword(&m);
        assert_eq!(decode_bdsc_bdd(&code, &c).m_hat, Some(m.clone()));
        let mut y = c.clone();
        y.flip(0);
        let out = decode_bdsc_bdd(&code, &y);
        assert!(out.m_hat != Some(m));
    }

    #[test]
    fn mde_size_guard() {
        let code = build_pbch(5, 6, 25).unwrap();
        let m = BitVec::zeros(code.k());
        assert!(mde_exhaustive(&code, &m, &ChannelState::normal(31)).is_err());
    }

    #[test]
    fn decoders_under_noise() {
        let code = build_pbch(5, 11, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = BitVec::random(code.k(), &mut rng);
            let s = sample_state_fixed_u(31, 4, &mut rng).unwrap();
            let enc = encode_onestep(&code, &m, &s);
            assert!(enc.success);
            let x = apply_defects(&enc.codeword, &s);
            let y = apply_bsc(&x, 0.05, &mut rng, None);
            let flips = y.bits.distance(&x);
            let out = decode_bdsc_bdd(&code, &y.bits);
            if flips <= code.t1() {
                assert_eq!(out.m_hat, Some(m.clone()));
            }
            let ye = apply_erasures(&x, 0.1, &mut rng, None);
            let a = decode_bdec_ml(&code, &ye);
            let b = decode_bdec_ml_direct(&code, &ye);
            assert_eq!((&a.m_hat, a.detail), (&b.m_hat, b.detail));
            if ye.erasure_count() < code.d1() {
                assert_eq!(a.m_hat, Some(m.clone()));
            }
        }
    }
}
