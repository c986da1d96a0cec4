use std::collections::BTreeMap;

use mnac_core::channel::{generate_codebooks, sample_activity, transmit, ActivityRealization, Codebook, SimConfig};
use mnac_core::detect::{
    decode_messages, decision_statistic, identify_greedy, identify_ml, residual, two_stage_detect, DetectorOptions,
    IdentifyBudget, IdentifyMode,
};
use mnac_core::numeric::dot;
use proptest::prelude::*;

fn config(ell: usize, m: usize, n: usize, n0: usize, seed: u64) -> SimConfig {
    SimConfig { n, n0, ell, m, alpha: 0.25, p: 10.0, eps: 0.5, seed, strict_power: false }
}

/// Brute-force minimizer over bitmasks, scored by explicit residual vectors.
fn enumerate_subsets(y: &[f64], sigs: &[&[f64]], max_weight: usize) -> Vec<usize> {
    let ell = sigs.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << ell) {
        if mask.count_ones() as usize > max_weight {
            continue;
        }
        let set: Vec<usize> = (0..ell).filter(|i| mask >> i & 1 == 1).collect();
        let r: Vec<f64> = (0..y.len()).map(|t| y[t] - set.iter().map(|&i| sigs[i][t]).sum::<f64>()).collect();
        let score = r.iter().map(|x| x * x).sum::<f64>();
        let better = match &best {
            None => true,
            Some((s, b)) => score < *s || (score == *s && (set.len(), &set) < (b.len(), b)),
        };
        if better {
            best = Some((score, set));
        }
    }
    best.unwrap().1
}

/// Brute-force joint ML over all message tuples, scored by explicit residuals.
fn enumerate_tuples(y: &[f64], books: &[Codebook], active: &[usize]) -> BTreeMap<usize, usize> {
    let m = books[active[0]].m();
    let total = m.pow(active.len() as u32);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for code in 0..total {
        let mut rest = code;
        let mut tuple = vec![0; active.len()];
        for slot in (0..active.len()).rev() {
            tuple[slot] = rest % m + 1;
            rest /= m;
        }
        let mut r = y.to_vec();
        for (&k, &w) in active.iter().zip(&tuple) {
            for (ri, si) in r.iter_mut().zip(books[k].body(w)) {
                *ri -= si;
            }
        }
        let score = dot(&r, &r);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, tuple));
        }
    }
    active.iter().copied().zip(best.unwrap().1).collect()
}

#[test]
fn exhaustive_identify_matches_enumerator_on_fixed_instance() {
    let cfg = config(12, 1, 16, 16, 2024);
    let books = generate_codebooks(&cfg).unwrap();
    let truth = ActivityRealization::from_messages(vec![0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0]);
    let y = transmit(&books, &truth, 77).unwrap();
    let sigs: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
    let budget = IdentifyBudget::from_mean_active(3.0, IdentifyMode::Exhaustive);
    assert_eq!(identify_ml(y.y_a(), &sigs, &budget).unwrap(), enumerate_subsets(y.y_a(), &sigs, budget.max_weight));
}

#[test]
fn greedy_stays_close_to_exhaustive() {
    // Pinned regression: 100 instances at 10 dB with a signature about four
    // times the identification cost of this population.
    let mut close = 0;
    for instance in 0..100u64 {
        let cfg = config(12, 1, 16, 16, 500 + instance);
        let books = generate_codebooks(&cfg).unwrap();
        let truth = sample_activity(&cfg, instance);
        let y = transmit(&books, &truth, instance).unwrap();
        let sigs: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
        let budget = IdentifyBudget::from_mean_active(cfg.mean_active(), IdentifyMode::Exhaustive);
        let exact = identify_ml(y.y_a(), &sigs, &budget).unwrap();
        let greedy = identify_greedy(y.y_a(), &sigs, &budget);
        let distance = (0..12).filter(|k| exact.contains(k) != greedy.contains(k)).count();
        if distance <= 2 {
            close += 1;
        }
    }
    assert!(close >= 90, "only {close} of 100 instances within Hamming distance 2");
}

#[test]
fn detection_error_shrinks_with_signature_length() {
    // Counts (all errors, errors of trials whose true set fits the weight cap)
    // with common activity, codebook and noise seeds across configurations.
    let run = |n: usize, n0: usize| {
        let base = SimConfig { n, n0, ell: 24, m: 2, alpha: 0.25, p: 10.0, eps: 0.1, seed: 0, strict_power: false };
        let (mut errors, mut within_cap) = (0, 0);
        for trial in 0..400u64 {
            let cfg = SimConfig { seed: trial, ..base.clone() };
            let books = generate_codebooks(&cfg).unwrap();
            let truth = sample_activity(&cfg, trial);
            let y = transmit(&books, &truth, trial).unwrap();
            if two_stage_detect(&y, &books, &cfg, &truth, &DetectorOptions::default()).unwrap().is_error() {
                errors += 1;
                if truth.active_set().len() <= 9 {
                    within_cap += 1;
                }
            }
        }
        (errors, within_cap)
    };
    let (short, short_fit) = run(74, 10);
    let (mid, mid_fit) = run(80, 16);
    let (long, long_fit) = run(96, 32);
    assert!(long as f64 / 400.0 <= 0.1);
    assert!(long < short && short_fit > 0, "n0=10: {short}, n0=32: {long}");
    // From n0 = 16 on, the only errors left are true sets heavier than the cap.
    assert_eq!((mid_fit, long_fit), (0, 0));
    assert_eq!(mid, long);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn exhaustive_identify_is_global_minimizer(seed in any::<u64>(), ell in 4usize..=12, n0 in 4usize..=16) {
        let cfg = config(ell, 1, n0, n0, seed);
        let books = generate_codebooks(&cfg).unwrap();
        let truth = sample_activity(&cfg, seed ^ 1);
        let y = transmit(&books, &truth, seed ^ 2).unwrap();
        let sigs: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
        let budget = IdentifyBudget::from_mean_active(cfg.mean_active(), IdentifyMode::Exhaustive);
        let found = identify_ml(y.y_a(), &sigs, &budget).unwrap();
        prop_assert_eq!(&found, &enumerate_subsets(y.y_a(), &sigs, budget.max_weight));
        let truth_set = truth.active_set();
        if truth_set.len() <= budget.max_weight {
            let t = decision_statistic(y.y_a(), &sigs, &found, &truth_set);
            prop_assert!(t <= 1e-9 * residual(y.y_a(), &sigs, &truth_set).max(1.0));
        }
    }

    #[test]
    fn exhaustive_decode_matches_tuple_enumeration(seed in any::<u64>(), users in 1usize..=4, m in 2usize..=4, body in 4usize..=24) {
        prop_assume!(m.pow(users as u32) <= 256);
        let cfg = SimConfig { alpha: 1.0, ..config(users, m, 4 + body, 4, seed) };
        let books = generate_codebooks(&cfg).unwrap();
        let truth = sample_activity(&cfg, seed ^ 3);
        let y = transmit(&books, &truth, seed ^ 4).unwrap();
        let active: Vec<usize> = (0..users).collect();
        let out = decode_messages(y.y_b(), &books, &active, 256);
        prop_assert!(out.exact);
        prop_assert_eq!(out.messages, enumerate_tuples(y.y_b(), &books, &active));
    }

    #[test]
    fn detected_set_is_scale_invariant(seed in any::<u64>(), scale in 0.1f64..20.0) {
        let cfg = config(10, 1, 12, 12, seed);
        let books = generate_codebooks(&cfg).unwrap();
        let truth = sample_activity(&cfg, seed);
        let y = transmit(&books, &truth, seed).unwrap();
        let sigs: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
        let scaled_books: Vec<Vec<f64>> = sigs.iter().map(|s| s.iter().map(|x| x * scale).collect()).collect();
        let scaled_sigs: Vec<&[f64]> = scaled_books.iter().map(|s| s.as_slice()).collect();
        let scaled_y: Vec<f64> = y.y_a().iter().map(|x| x * scale).collect();
        let budget = IdentifyBudget::from_mean_active(cfg.mean_active(), IdentifyMode::Exhaustive);
        prop_assert_eq!(
            identify_ml(y.y_a(), &sigs, &budget).unwrap(),
            identify_ml(&scaled_y, &scaled_sigs, &budget).unwrap()
        );
    }

    #[test]
    fn joint_decode_is_permutation_equivariant(seed in any::<u64>(), shift in 1usize..3) {
        let cfg = SimConfig { alpha: 1.0, ..config(3, 3, 24, 4, seed) };
        let books = generate_codebooks(&cfg).unwrap();
        let truth = sample_activity(&cfg, seed);
        let y = transmit(&books, &truth, seed).unwrap();
        let perm: Vec<usize> = (0..3).map(|i| (i + shift) % 3).collect();
        let relabeled: Vec<Codebook> = perm.iter().map(|&i| books[i].clone()).collect();
        let direct = decode_messages(y.y_b(), &books, &[0, 1, 2], 1000).messages;
        let permuted = decode_messages(y.y_b(), &relabeled, &[0, 1, 2], 1000).messages;
        for (slot, &orig) in perm.iter().enumerate() {
            prop_assert_eq!(permuted[&slot], direct[&orig]);
        }
    }

    #[test]
    fn error_counters_are_consistent(seed in any::<u64>(), alpha in 0.0f64..=1.0, n0 in 2usize..=12) {
        let cfg = SimConfig { alpha, ..config(10, 2, n0 + 6, n0, seed) };
        let books = generate_codebooks(&cfg).unwrap();
        let truth = sample_activity(&cfg, seed);
        let y = transmit(&books, &truth, seed).unwrap();
        let r = two_stage_detect(&y, &books, &cfg, &truth, &DetectorOptions::default()).unwrap();
        let truth_set = truth.active_set();
        let hits = r.detected.iter().filter(|k| truth.active[**k]).count();
        prop_assert_eq!(r.misses + hits, truth_set.len());
        prop_assert_eq!(r.misses as i64 - r.false_alarms as i64, truth_set.len() as i64 - r.detected.len() as i64);
        prop_assert_eq!(r.decoded.keys().copied().collect::<Vec<_>>(), r.detected.clone());
        prop_assert!(r.message_errors >= r.misses);
        prop_assert!(r.message_errors >= r.false_alarms);
    }
}
