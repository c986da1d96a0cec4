//! Two-stage receiver: activity identification from the signature part of the
//! block, then joint ML decoding of the detected users' messages from the body.
//!
//! Exhaustive identification minimizes `‖y_a − Σ_{i∈A} s_i‖²` over all sets
//! `A` with `|A| ≤ max_weight`, the empty set included. It walks subsets in
//! lexicographic depth-first order and updates the objective through the
//! signature Gram matrix, so each visited subset costs O(1) plus O(ℓ) per
//! internal node.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
// Unused whenever another crate in the build links std, which brings the
// inherent f64 methods into scope.
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{ActivityRealization, Codebook, ReceivedSignal, SimConfig};
use crate::error::{Error, Result};
use crate::numeric::{dot, solve_dense};

/// Default enumeration budget for exhaustive identification.
pub const DEFAULT_SUBSET_LIMIT: f64 = 1e7;
/// Default budget of message tuples for exact joint decoding.
pub const DEFAULT_TUPLE_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentifyMode {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentifyBudget {
    pub max_weight: usize,
    pub mode: IdentifyMode,
}

impl IdentifyBudget {
    /// Weight cap `⌊(1 + δ) k⌋` with `δ = k^{-1/3}`.
    pub fn from_mean_active(k: f64, mode: IdentifyMode) -> Self {
        let max_weight = if k > 0.0 {
            ((1.0 + k.powf(-1.0 / 3.0)) * k).floor() as usize
        } else {
            0
        };
        Self { max_weight, mode }
    }
}

/// `Σ_{w ≤ max_weight} C(ℓ, w)` as a float (it overflows integers quickly).
pub fn subset_count(ell: usize, max_weight: usize) -> f64 {
    let mut total = 0.0;
    let mut term = 1.0;
    for w in 0..=max_weight.min(ell) {
        total += term;
        term = term * (ell - w) as f64 / (w + 1) as f64;
    }
    total
}

/// `‖y − Σ_{i∈set} s_i‖²`, computed directly.
pub fn residual(y: &[f64], signatures: &[&[f64]], set: &[usize]) -> f64 {
    let mut r = y.to_vec();
    for &i in set {
        for (ri, si) in r.iter_mut().zip(signatures[i]) {
            *ri -= si;
        }
    }
    dot(&r, &r)
}

/// `T_A = ‖y − Σ_A s_i‖² − ‖y − Σ_{A*} s_i‖²`; a detection error needs `T_A ≤ 0`.
pub fn decision_statistic(y: &[f64], signatures: &[&[f64]], a: &[usize], a_star: &[usize]) -> f64 {
    residual(y, signatures, a) - residual(y, signatures, a_star)
}

struct SubsetSearch<'a> {
    gram: &'a [f64],
    lin: &'a [f64],
    ell: usize,
    cap: usize,
    cross: Vec<Vec<f64>>,
    stack: Vec<usize>,
    best_score: f64,
    best: Vec<usize>,
}

impl SubsetSearch<'_> {
    fn visit(&mut self, start: usize, score: f64) {
        let depth = self.stack.len();
        for j in start..self.ell {
            let s = score + self.lin[j] + 2.0 * self.cross[depth][j];
            self.stack.push(j);
            if s < self.best_score || (s == self.best_score && self.stack.len() < self.best.len()) {
                self.best_score = s;
                self.best.clear();
                self.best.extend_from_slice(&self.stack);
            }
            if depth + 1 < self.cap && j + 1 < self.ell {
                let (lo, hi) = self.cross.split_at_mut(depth + 1);
                let (parent, child) = (&lo[depth], &mut hi[0]);
                let row = &self.gram[j * self.ell..(j + 1) * self.ell];
                for t in j + 1..self.ell {
                    child[t] = parent[t] + row[t];
                }
                self.visit(j + 1, s);
            }
            self.stack.pop();
        }
    }
}

/// Exhaustive constrained least-squares activity detection.
///
/// Ties (possible only in degenerate inputs) go to the smaller set, then to
/// the lexicographically smaller one.
pub fn identify_ml(y_a: &[f64], signatures: &[&[f64]], budget: &IdentifyBudget) -> Result<Vec<usize>> {
    identify_ml_with_limit(y_a, signatures, budget, DEFAULT_SUBSET_LIMIT)
}

pub fn identify_ml_with_limit(
    y_a: &[f64],
    signatures: &[&[f64]],
    budget: &IdentifyBudget,
    subset_limit: f64,
) -> Result<Vec<usize>> {
    let ell = signatures.len();
    let cap = budget.max_weight.min(ell);
    let required = subset_count(ell, cap);
    if required > subset_limit {
        return Err(Error::Infeasible {
            what: "activity identification subsets",
            required,
            limit: subset_limit,
        });
    }
    let mut gram = vec![0.0; ell * ell];
    for i in 0..ell {
        for j in i..ell {
            let g = dot(signatures[i], signatures[j]);
            gram[i * ell + j] = g;
            gram[j * ell + i] = g;
        }
    }
    let lin: Vec<f64> = (0..ell)
        .map(|j| gram[j * ell + j] - 2.0 * dot(y_a, signatures[j]))
        .collect();
    let mut search = SubsetSearch {
        gram: &gram,
        lin: &lin,
        ell,
        cap,
        cross: vec![vec![0.0; ell]; cap.max(1)],
        stack: Vec::with_capacity(cap),
        best_score: 0.0,
        best: Vec::new(),
    };
    if cap > 0 {
        search.visit(0, 0.0);
    }
    Ok(search.best)
}

/// Relative residual improvement below which the greedy search stops.
const GREEDY_MIN_GAIN: f64 = 1e-6;

/// Matching-pursuit style identification for populations too large to enumerate.
///
/// Each step adds the signature best aligned with the current residual, refits
/// real coefficients on the support by least squares, keeps the users whose
/// coefficient rounds to 1, and accepts the step only if the binary residual
/// shrinks.
pub fn identify_greedy(y_a: &[f64], signatures: &[&[f64]], budget: &IdentifyBudget) -> Vec<usize> {
    let ell = signatures.len();
    let norms: Vec<f64> = signatures.iter().map(|s| dot(s, s).sqrt()).collect();
    let mut support: Vec<usize> = Vec::new();
    let mut current = residual(y_a, signatures, &support);
    while support.len() < budget.max_weight.min(ell) && current > 0.0 {
        let r = residual_vector(y_a, signatures, &support);
        let mut pick: Option<(usize, f64)> = None;
        for j in (0..ell).filter(|j| !support.contains(j) && norms[*j] > 0.0) {
            let score = dot(&r, signatures[j]) / norms[j];
            if score > 0.0 && pick.is_none_or(|(_, s)| score > s) {
                pick = Some((j, score));
            }
        }
        let Some((j, _)) = pick else { break };
        let mut trial = support.clone();
        trial.push(j);
        trial.sort_unstable();
        let kept = threshold_refit(y_a, signatures, &trial);
        let value = residual(y_a, signatures, &kept);
        if value < current * (1.0 - GREEDY_MIN_GAIN) {
            support = kept;
            current = value;
        } else {
            break;
        }
    }
    support
}

fn residual_vector(y: &[f64], signatures: &[&[f64]], set: &[usize]) -> Vec<f64> {
    let mut r = y.to_vec();
    for &i in set {
        for (ri, si) in r.iter_mut().zip(signatures[i]) {
            *ri -= si;
        }
    }
    r
}

fn threshold_refit(y: &[f64], signatures: &[&[f64]], support: &[usize]) -> Vec<usize> {
    let d = support.len();
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    for (r, &i) in support.iter().enumerate() {
        b[r] = dot(y, signatures[i]);
        for (c, &j) in support.iter().enumerate() {
            a[r * d + c] = dot(signatures[i], signatures[j]);
        }
    }
    match solve_dense(&a, &b, d) {
        Some(coef) => support
            .iter()
            .zip(coef)
            .filter(|(_, c)| *c >= 0.5)
            .map(|(&i, _)| i)
            .collect(),
        None => support.to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// Detected user → message index in `1..=M`.
    pub messages: BTreeMap<usize, usize>,
    /// Whether the joint search was exhaustive.
    pub exact: bool,
}

/// ML decoding of the messages of the users in `active` from the body part.
///
/// Exact over all `M^{|active|}` tuples when that is at most `tuple_cap`,
/// otherwise block coordinate descent. Ties go to the smallest message index.
pub fn decode_messages(y_b: &[f64], books: &[Codebook], active: &[usize], tuple_cap: usize) -> Decoded {
    if active.is_empty() {
        return Decoded { messages: BTreeMap::new(), exact: true };
    }
    let m = books[active[0]].m();
    let tuples = (m as f64).powi(active.len() as i32);
    if tuples <= tuple_cap as f64 {
        let picks = joint_ml(y_b, books, active, m);
        Decoded { messages: active.iter().copied().zip(picks).collect(), exact: true }
    } else {
        let picks = coordinate_descent(y_b, books, active, m);
        Decoded { messages: active.iter().copied().zip(picks).collect(), exact: false }
    }
}

struct TupleSearch<'a> {
    lin: &'a [f64],
    gram: &'a [f64],
    users: usize,
    m: usize,
    stack: Vec<usize>,
    best_score: f64,
    best: Vec<usize>,
}

impl TupleSearch<'_> {
    fn visit(&mut self, score: f64) {
        let depth = self.stack.len();
        if depth == self.users {
            if score < self.best_score {
                self.best_score = score;
                self.best.clone_from(&self.stack);
            }
            return;
        }
        let dim = self.users * self.m;
        for w in 0..self.m {
            let col = depth * self.m + w;
            let mut s = score + self.lin[col];
            for (b, &wb) in self.stack.iter().enumerate() {
                s += 2.0 * self.gram[(b * self.m + wb) * dim + col];
            }
            self.stack.push(w);
            self.visit(s);
            self.stack.pop();
        }
    }
}

fn joint_ml(y_b: &[f64], books: &[Codebook], active: &[usize], m: usize) -> Vec<usize> {
    let users = active.len();
    let dim = users * m;
    let bodies: Vec<&[f64]> = active
        .iter()
        .flat_map(|&k| (1..=m).map(move |w| books[k].body(w)))
        .collect();
    let lin: Vec<f64> = bodies.iter().map(|s| dot(s, s) - 2.0 * dot(y_b, s)).collect();
    let mut gram = vec![0.0; if users > 1 { dim * dim } else { 0 }];
    if users > 1 {
        for i in 0..dim {
            for j in i + 1..dim {
                if i / m != j / m {
                    let g = dot(bodies[i], bodies[j]);
                    gram[i * dim + j] = g;
                    gram[j * dim + i] = g;
                }
            }
        }
    }
    let mut search = TupleSearch {
        lin: &lin,
        gram: &gram,
        users,
        m,
        stack: Vec::with_capacity(users),
        best_score: f64::INFINITY,
        best: vec![0; users],
    };
    search.visit(0.0);
    search.best.iter().map(|w| w + 1).collect()
}

fn best_single(r: &[f64], book: &Codebook) -> usize {
    let mut best = (1, f64::INFINITY);
    for w in 1..=book.m() {
        let s = book.body(w);
        let score = dot(s, s) - 2.0 * dot(r, s);
        if score < best.1 {
            best = (w, score);
        }
    }
    best.0
}

const MAX_SWEEPS: usize = 1000;

fn coordinate_descent(y_b: &[f64], books: &[Codebook], active: &[usize], m: usize) -> Vec<usize> {
    let _ = m;
    // Successive initialization: each user against what the earlier ones leave.
    let mut r = y_b.to_vec();
    let mut picks = Vec::with_capacity(active.len());
    for &k in active {
        let w = best_single(&r, &books[k]);
        for (ri, si) in r.iter_mut().zip(books[k].body(w)) {
            *ri -= si;
        }
        picks.push(w);
    }
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for (slot, &k) in active.iter().enumerate() {
            let old = picks[slot];
            for (ri, si) in r.iter_mut().zip(books[k].body(old)) {
                *ri += si;
            }
            let w = best_single(&r, &books[k]);
            for (ri, si) in r.iter_mut().zip(books[k].body(w)) {
                *ri -= si;
            }
            if w != old {
                picks[slot] = w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    picks
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionResult {
    /// Detected active users, sorted.
    pub detected: Vec<usize>,
    pub decoded: BTreeMap<usize, usize>,
    /// `|A* \ A|`.
    pub misses: usize,
    /// `|A \ A*|`.
    pub false_alarms: usize,
    /// Users whose decoded message (0 when not detected) differs from the truth.
    pub message_errors: usize,
    /// Both stages searched exhaustively.
    pub exact: bool,
}

impl DetectionResult {
    /// Any miss, false alarm or wrong message.
    pub fn is_error(&self) -> bool {
        self.misses + self.false_alarms + self.message_errors > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorOptions {
    /// `None` picks exhaustive search when it fits in `subset_limit`, else greedy.
    pub mode: Option<IdentifyMode>,
    pub subset_limit: f64,
    pub tuple_cap: usize,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        Self { mode: None, subset_limit: DEFAULT_SUBSET_LIMIT, tuple_cap: DEFAULT_TUPLE_CAP }
    }
}

/// Runs identification on `y_a` and message decoding on `y_b`, and scores the
/// outcome against `truth`.
pub fn two_stage_detect(
    y: &ReceivedSignal,
    books: &[Codebook],
    cfg: &SimConfig,
    truth: &ActivityRealization,
    opts: &DetectorOptions,
) -> Result<DetectionResult> {
    if books.len() != cfg.ell || truth.ell() != cfg.ell {
        return Err(Error::Config("codebooks, truth and config disagree on ell".into()));
    }
    let signatures: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
    let auto = IdentifyBudget::from_mean_active(cfg.mean_active(), IdentifyMode::Exhaustive);
    let mode = opts.mode.unwrap_or(if subset_count(cfg.ell, auto.max_weight) <= opts.subset_limit {
        IdentifyMode::Exhaustive
    } else {
        IdentifyMode::Greedy
    });
    let budget = IdentifyBudget { mode, ..auto };
    let detected = match mode {
        IdentifyMode::Exhaustive => identify_ml_with_limit(y.y_a(), &signatures, &budget, opts.subset_limit)?,
        IdentifyMode::Greedy => identify_greedy(y.y_a(), &signatures, &budget),
    };
    let decoded = decode_messages(y.y_b(), books, &detected, opts.tuple_cap);

    let truth_set = truth.active_set();
    let misses = truth_set.iter().filter(|k| detected.binary_search(k).is_err()).count();
    let false_alarms = detected.iter().filter(|k| !truth.active[**k]).count();
    let message_errors = (0..cfg.ell)
        .filter(|k| decoded.messages.get(k).copied().unwrap_or(0) != truth.messages[*k])
        .count();
    Ok(DetectionResult {
        exact: mode == IdentifyMode::Exhaustive && decoded.exact,
        detected,
        decoded: decoded.messages,
        misses,
        false_alarms,
        message_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_codebooks, transmit_scaled};

    fn sim(ell: usize, m: usize, n: usize, n0: usize, alpha: f64) -> SimConfig {
        SimConfig { n, n0, ell, m, alpha, p: 10.0, eps: 0.5, seed: 3, strict_power: false }
    }

    #[test]
    fn budget_and_counts() {
        assert_eq!(IdentifyBudget::from_mean_active(0.0, IdentifyMode::Exhaustive).max_weight, 0);
        assert_eq!(IdentifyBudget::from_mean_active(6.0, IdentifyMode::Exhaustive).max_weight, 9);
        assert_eq!(IdentifyBudget::from_mean_active(8.0, IdentifyMode::Greedy).max_weight, 12);
        assert_eq!(subset_count(4, 4), 16.0);
        assert_eq!(subset_count(10, 2), 56.0);
        assert_eq!(subset_count(3, 9), 8.0);
    }

    #[test]
    fn over_budget_is_infeasible() {
        let sig = [1.0, 0.0];
        let sigs: Vec<&[f64]> = vec![&sig; 30];
        let budget = IdentifyBudget { max_weight: 15, mode: IdentifyMode::Exhaustive };
        assert!(matches!(identify_ml(&[0.0, 0.0], &sigs, &budget), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn zero_observation_gives_empty_set() {
        let books = generate_codebooks(&sim(8, 1, 12, 12, 0.5)).unwrap();
        let sigs: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
        let budget = IdentifyBudget { max_weight: 5, mode: IdentifyMode::Exhaustive };
        assert!(identify_ml(&[0.0; 12], &sigs, &budget).unwrap().is_empty());
        assert!(identify_greedy(&[0.0; 12], &sigs, &budget).is_empty());
    }

    #[test]
    fn noiseless_identification_is_exact() {
        let cfg = sim(12, 1, 16, 16, 0.25);
        let books = generate_codebooks(&cfg).unwrap();
        let sigs: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
        let truth = ActivityRealization::from_messages(vec![0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0]);
        let y = transmit_scaled(&books, &truth, 0, 0.0).unwrap();
        let budget = IdentifyBudget { max_weight: 4, mode: IdentifyMode::Exhaustive };
        assert_eq!(identify_ml(y.y_a(), &sigs, &budget).unwrap(), vec![1, 4, 9]);
    }

    #[test]
    fn greedy_is_exact_for_orthogonal_signatures() {
        let basis: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..6).map(|j| if i == j { 3.0 } else { 0.0 }).collect())
            .collect();
        let sigs: Vec<&[f64]> = basis.iter().map(|v| v.as_slice()).collect();
        let y: Vec<f64> = (0..6).map(|j| if j == 1 || j == 4 { 3.0 } else { 0.0 }).collect();
        let budget = IdentifyBudget { max_weight: 3, mode: IdentifyMode::Greedy };
        assert_eq!(identify_greedy(&y, &sigs, &budget), vec![1, 4]);
    }

    #[test]
    fn ties_prefer_smaller_sets() {
        let s0 = [1.0, 0.0];
        let s1 = [0.0, 0.0];
        let sigs: Vec<&[f64]> = vec![&s0, &s1];
        let budget = IdentifyBudget { max_weight: 2, mode: IdentifyMode::Exhaustive };
        assert_eq!(identify_ml(&[1.0, 0.0], &sigs, &budget).unwrap(), vec![0]);
        assert!(identify_ml(&[0.0, 0.0], &sigs, &budget).unwrap().is_empty());
    }

    #[test]
    fn statistic_is_residual_difference() {
        let books = generate_codebooks(&sim(6, 1, 8, 8, 0.5)).unwrap();
        let sigs: Vec<&[f64]> = books.iter().map(|b| b.signature()).collect();
        let y = [0.3; 8];
        let t = decision_statistic(&y, &sigs, &[0, 2], &[1]);
        assert_eq!(t, residual(&y, &sigs, &[0, 2]) - residual(&y, &sigs, &[1]));
        assert_eq!(residual(&y, &sigs, &[]), dot(&y, &y));
    }

    #[test]
    fn single_user_noiseless_decoding() {
        let cfg = sim(3, 8, 40, 8, 0.5);
        let books = generate_codebooks(&cfg).unwrap();
        let truth = ActivityRealization::from_messages(vec![0, 6, 0]);
        let y = transmit_scaled(&books, &truth, 0, 0.0).unwrap();
        let out = decode_messages(y.y_b(), &books, &[1], DEFAULT_TUPLE_CAP);
        assert!(out.exact);
        assert_eq!(out.messages.get(&1), Some(&6));
        assert!(decode_messages(y.y_b(), &books, &[], 10).messages.is_empty());
    }

    #[test]
    fn orthogonal_bodies_decode_separately() {
        let make = |id: usize, offset: usize| {
            let mut bodies = vec![0.0; 2 * 4];
            bodies[offset] = 2.0;
            bodies[4 + offset + 1] = 2.0;
            Codebook::from_parts(id, vec![], bodies, 2).unwrap()
        };
        let books = vec![make(0, 0), make(1, 2)];
        let y = [0.1, 1.9, 2.2, -0.1];
        let joint = decode_messages(&y, &books, &[0, 1], DEFAULT_TUPLE_CAP);
        let single0 = decode_messages(&y, &books, &[0], DEFAULT_TUPLE_CAP);
        let single1 = decode_messages(&y, &books, &[1], DEFAULT_TUPLE_CAP);
        assert_eq!(joint.messages[&0], single0.messages[&0]);
        assert_eq!(joint.messages[&1], single1.messages[&1]);
        assert_eq!((joint.messages[&0], joint.messages[&1]), (2, 1));
    }

    #[test]
    fn coordinate_descent_matches_joint_ml() {
        let cfg = sim(3, 4, 64, 16, 1.0);
        let books = generate_codebooks(&cfg).unwrap();
        let truth = ActivityRealization::from_messages(vec![3, 1, 4]);
        let y = transmit_scaled(&books, &truth, 21, 1.0).unwrap();
        let exact = decode_messages(y.y_b(), &books, &[0, 1, 2], 64);
        let cd = decode_messages(y.y_b(), &books, &[0, 1, 2], 63);
        assert!(exact.exact && !cd.exact);
        assert_eq!(exact.messages, cd.messages);
    }

    #[test]
    fn silent_and_noiseless_two_stage() {
        let mut cfg = sim(10, 2, 40, 20, 0.0);
        let books = generate_codebooks(&cfg).unwrap();
        let silent = ActivityRealization::silent(10);
        let y = transmit_scaled(&books, &silent, 1, 0.0).unwrap();
        let r = two_stage_detect(&y, &books, &cfg, &silent, &DetectorOptions::default()).unwrap();
        assert!(r.detected.is_empty() && !r.is_error() && r.exact);

        cfg.alpha = 0.3;
        let truth = ActivityRealization::from_messages(vec![0, 2, 0, 1, 0, 0, 0, 2, 0, 0]);
        let y = transmit_scaled(&books, &truth, 1, 0.0).unwrap();
        let r = two_stage_detect(&y, &books, &cfg, &truth, &DetectorOptions::default()).unwrap();
        assert_eq!((r.misses, r.false_alarms, r.message_errors), (0, 0, 0));
        assert_eq!(r.detected, vec![1, 3, 7]);
        assert_eq!(r.decoded.keys().copied().collect::<Vec<_>>(), r.detected);
    }
}
