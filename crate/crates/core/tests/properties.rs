use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use defectcodes::analysis::{enc_fail_bound, enc_fail_bound_binomial, enc_fail_given_u};
use defectcodes::channel::{apply_defects, apply_erasures, sample_state_fixed_u, ChannelKind, ChannelParams};
use defectcodes::codec::{decode_bdec_ml, decode_bdec_ml_direct, decode_bdsc_bdd, encode_onestep, encode_twostep};
use defectcodes::harness::{self, ExperimentConfig, Mode};
use defectcodes::weights::{weight_distribution_binomial, weight_distribution_exact, Which, DEFAULT_ENUMERATION_CAP};
use defectcodes::{build_pbch, BitVec, PartitionedCode};

/// Codes with both layers, for m = 4 and m = 5.
fn codes() -> Vec<PartitionedCode> {
    [(4, 7, 4), (5, 16, 5), (5, 11, 10), (5, 6, 10)]
        .into_iter()
        .map(|(m, k, l)| build_pbch(m, k, l).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn masked_words_decode_under_both_decoders(idx in 0usize..4, seed: u64) {
        let code = &codes()[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = BitVec::random(code.k(), &mut rng);
        let s = sample_state_fixed_u(code.n(), code.d0() - 1, &mut rng).unwrap();
        let enc = encode_onestep(code, &m, &s);
        prop_assert!(enc.success);
        let stored = apply_defects(&enc.codeword, &s);
        prop_assert_eq!(decode_bdsc_bdd(code, &stored).m_hat, Some(m.clone()));
        let y = apply_erasures(&stored, 0.1, &mut rng, None);
        let a = decode_bdec_ml(code, &y);
        let b = decode_bdec_ml_direct(code, &y);
        prop_assert_eq!(&a.m_hat, &b.m_hat);
        prop_assert_eq!(a.detail, b.detail);
        if y.erasure_count() < code.d1() {
            prop_assert_eq!(a.m_hat, Some(m));
        }
    }

    #[test]
    fn two_step_is_never_worse(idx in 0usize..4, extra in 0usize..8, seed: u64) {
        let code = &codes()[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = BitVec::random(code.k(), &mut rng);
        let s = sample_state_fixed_u(code.n(), code.d0() + extra, &mut rng).unwrap();
        let one = encode_onestep(code, &m, &s);
        let two = encode_twostep(code, &m, &s, &mut rng);
        prop_assert!(two.unmasked_count <= one.unmasked_count);
        prop_assert_eq!(code.extract_message(&two.codeword), m);
    }

    #[test]
    fn fixed_u_value_is_monotone_in_u(l in prop::sample::select(vec![5usize, 10, 15, 20])) {
        let code = build_pbch(5, 31 - l, l).unwrap();
        let b0 = weight_distribution_exact(&code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP).unwrap();
        let vals: Vec<f64> = (0..=31).map(|u| enc_fail_given_u(&code.shape, u, &b0).unwrap().value).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }
}

#[test]
fn exact_weights_tighten_the_binomial_bound() {
    for l in [5usize, 10, 15, 20] {
        let code = build_pbch(5, 31 - l, l).unwrap();
        let b0 = weight_distribution_exact(&code, Which::DualOfMasking, DEFAULT_ENUMERATION_CAP).unwrap();
        let exact = enc_fail_bound(&code.shape, 0.1, &b0).unwrap();
        let binomial = enc_fail_bound_binomial(31, l, 0.1).unwrap();
        assert!(exact.value <= binomial.value, "l={l}");
        let approx = enc_fail_bound(&code.shape, 0.1, &weight_distribution_binomial(31, l)).unwrap();
        assert!(approx.value <= binomial.value * (1.0 + 1e-12), "l={l}");
    }
}

#[test]
fn single_candidate_sweep_matches_direct_run() {
    let code = build_pbch(5, 21, 10).unwrap();
    let mut cfg = ExperimentConfig::new(5, 21, 10, ChannelKind::Bdc, ChannelParams::new(0.0, 0.1, 0.0).unwrap());
    cfg.trials = 20_000;
    cfg.seed = 3;
    let rows = harness::sweep(&cfg, &[10]).unwrap();
    let direct = harness::sweep_row(&code, &cfg).unwrap();
    assert_eq!(rows, vec![direct.clone()]);
    let mut plain = cfg.clone();
    plain.seed = harness::derive_seed(cfg.seed, 10);
    let tally = harness::run_with_code(&code, &plain).unwrap();
    assert_eq!(tally.enc_fail, direct.failures);
    assert_eq!(tally.trials, direct.trials);
}

#[test]
fn below_d0_never_fails_in_simulation() {
    for (m, k, l) in [(4, 7, 4), (5, 21, 10), (5, 11, 20)] {
        let code = build_pbch(m, k, l).unwrap();
        for u in 0..code.d0() {
            let t = harness::run_enc_fail_given_u(&code, u, 2_000, u as u64).unwrap();
            assert_eq!(t.enc_fail, 0, "({m},{k},{l}) u={u}");
        }
    }
}

#[test]
fn fixed_u_mode_respects_n() {
    let code = build_pbch(4, 7, 4).unwrap();
    let mut cfg = ExperimentConfig::new(4, 7, 4, ChannelKind::Bdc, ChannelParams::default());
    cfg.mode = Mode::FixedU(16);
    assert!(harness::run_with_code(&code, &cfg).is_err());
    cfg.mode = Mode::FixedU(15);
    let t = harness::run_with_code(&code, &cfg).unwrap();
    assert!(t.enc_fail as f64 > 0.99 * t.trials as f64);
}
