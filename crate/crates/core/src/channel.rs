//! Random codebooks, user activity and the AWGN superposition channel.
//!
//! Each user owns a signature of length `n0` and `M` message-bearing bodies of
//! length `n − n0`; codeword `w ≥ 1` is the signature followed by body `w`,
//! and codeword 0 is silence. Entries are i.i.d. `N(0, P′)` with
//! `P′ = P − ε`, drawn from streams keyed by `(seed, role, user, index)`.

use alloc::vec;
use alloc::vec::Vec;
// Unused whenever another crate in the build links std, which brings the
// inherent f64 methods into scope.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::dot;
use crate::rng::{stream, Role};

/// Upper limit on `n · M · ℓ` stored entries.
pub const MAX_CODEBOOK_ENTRIES: usize = 1 << 24;
/// Largest `ℓ M` for which the activity covariance is materialized densely.
pub const MAX_DENSE_COVARIANCE: usize = 4096;
const MAX_RESAMPLE_ATTEMPTS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub n0: usize,
    pub ell: usize,
    pub m: usize,
    pub alpha: f64,
    pub p: f64,
    /// Power back-off, `P′ = P − eps`.
    pub eps: f64,
    pub seed: u64,
    /// Resample codewords that violate the power constraint instead of counting them.
    pub strict_power: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("blocklength n", 0.0));
        }
        if self.n0 > self.n {
            return Err(Error::domain("signature length n0 (exceeds n)", self.n0 as f64));
        }
        if self.ell == 0 {
            return Err(Error::domain("user count ell", 0.0));
        }
        if self.m == 0 {
            return Err(Error::domain("codebook size M", 0.0));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain("activity probability alpha", self.alpha));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::domain("SNR P", self.p));
        }
        if !(self.eps > 0.0 && self.eps < self.p.min(1.0)) {
            return Err(Error::domain("back-off eps (need 0 < eps < min(1, P))", self.eps));
        }
        let entries = self.n0 * self.ell + (self.n - self.n0) * self.m * self.ell;
        if self.n.saturating_mul(self.m).saturating_mul(self.ell) > MAX_CODEBOOK_ENTRIES {
            return Err(Error::Infeasible {
                what: "dense codebook storage",
                required: entries as f64,
                limit: MAX_CODEBOOK_ENTRIES as f64,
            });
        }
        Ok(())
    }

    pub fn p_prime(&self) -> f64 {
        self.p - self.eps
    }

    /// Mean number of active users, `α ℓ`.
    pub fn mean_active(&self) -> f64 {
        self.alpha * self.ell as f64
    }
}

/// One user's signature and message bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub user_id: usize,
    n: usize,
    m: usize,
    signature: Vec<f64>,
    bodies: Vec<f64>,
    powers: Vec<f64>,
}

impl Codebook {
    /// Assembles a codebook from raw parts; `bodies` holds `m` bodies back to back.
    pub fn from_parts(user_id: usize, signature: Vec<f64>, bodies: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 || !bodies.len().is_multiple_of(m) {
            return Err(Error::Config("body storage is not a multiple of M".into()));
        }
        let n = signature.len() + bodies.len() / m;
        let mut book = Self { user_id, n, m, signature, bodies, powers: Vec::new() };
        book.powers = (1..=m).map(|w| book.energy(w) / n as f64).collect();
        Ok(book)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n0(&self) -> usize {
        self.signature.len()
    }

    pub fn body_len(&self) -> usize {
        self.n - self.signature.len()
    }

    /// Number of non-silent codewords.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn signature(&self) -> &[f64] {
        &self.signature
    }

    /// Body of message `w ∈ 1..=M`.
    pub fn body(&self, w: usize) -> &[f64] {
        assert!(w >= 1 && w <= self.m, "message index {w} outside 1..={}", self.m);
        let len = self.body_len();
        &self.bodies[(w - 1) * len..w * len]
    }

    /// Full-length codeword for message `w`; `w = 0` is the all-zero word.
    pub fn codeword(&self, w: usize) -> Vec<f64> {
        if w == 0 {
            return vec![0.0; self.n];
        }
        let mut out = Vec::with_capacity(self.n);
        out.extend_from_slice(&self.signature);
        out.extend_from_slice(self.body(w));
        out
    }

    fn energy(&self, w: usize) -> f64 {
        let b = self.body(w);
        dot(&self.signature, &self.signature) + dot(b, b)
    }

    /// Empirical average power `‖s(w)‖² / n` of codeword `w ∈ 1..=M`.
    pub fn power(&self, w: usize) -> f64 {
        self.powers[w - 1]
    }

    /// Number of codewords whose average power exceeds `p`.
    pub fn violations(&self, p: f64) -> usize {
        self.powers.iter().filter(|&&q| q > p).count()
    }
}

/// `(1/n_len) Σ s² ≤ P`.
pub fn power_check(word: &[f64], n_len: usize, p: f64) -> bool {
    if n_len == 0 {
        return word.iter().all(|&s| s == 0.0);
    }
    dot(word, word) / n_len as f64 <= p
}

fn gaussian_fill(out: &mut [f64], sd: f64, seed: u64, role: Role, a: u64, b: u64) {
    let mut rng = stream(seed, role, a, b);
    for x in out.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *x = sd * z;
    }
}

/// Draws the codebooks of all `ℓ` users.
///
/// Power violations are kept and can be counted with [`Codebook::violations`],
/// unless `cfg.strict_power` is set, in which case a violating signature (over
/// its own `n0` symbols) or codeword is redrawn from the next attempt's stream.
pub fn generate_codebooks(cfg: &SimConfig) -> Result<Vec<Codebook>> {
    cfg.validate()?;
    let sd = cfg.p_prime().sqrt();
    let body_len = cfg.n - cfg.n0;
    let mut books = Vec::with_capacity(cfg.ell);
    for user in 0..cfg.ell {
        let u = user as u64;
        let mut signature = vec![0.0; cfg.n0];
        let mut attempt = 0;
        loop {
            gaussian_fill(&mut signature, sd, cfg.seed, Role::Signature, u, attempt);
            if !cfg.strict_power || power_check(&signature, cfg.n0, cfg.p) {
                break;
            }
            attempt += 1;
            if attempt >= MAX_RESAMPLE_ATTEMPTS {
                return Err(Error::Config("strict power mode could not draw a compliant signature".into()));
            }
        }
        let sig_energy = dot(&signature, &signature);
        let mut bodies = vec![0.0; cfg.m * body_len];
        for (w, body) in bodies.chunks_mut(body_len.max(1)).enumerate().take(cfg.m) {
            if body_len == 0 {
                break;
            }
            let mut attempt = 0u64;
            loop {
                let index = ((w as u64) << 32) | attempt;
                gaussian_fill(body, sd, cfg.seed, Role::Body, u, index);
                if !cfg.strict_power || (sig_energy + dot(body, body)) / cfg.n as f64 <= cfg.p {
                    break;
                }
                attempt += 1;
                if attempt >= MAX_RESAMPLE_ATTEMPTS {
                    return Err(Error::Config("strict power mode could not draw a compliant codeword".into()));
                }
            }
        }
        books.push(Codebook::from_parts(user, signature, bodies, cfg.m)?);
    }
    Ok(books)
}

/// Which users transmit and what.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityRealization {
    pub active: Vec<bool>,
    /// `messages[k] ∈ 1..=M` iff user `k` is active, else 0.
    pub messages: Vec<usize>,
}

impl ActivityRealization {
    pub fn from_messages(messages: Vec<usize>) -> Self {
        let active = messages.iter().map(|&w| w != 0).collect();
        Self { active, messages }
    }

    pub fn silent(ell: usize) -> Self {
        Self::from_messages(vec![0; ell])
    }

    pub fn ell(&self) -> usize {
        self.messages.len()
    }

    /// Sorted indices of the active users.
    pub fn active_set(&self) -> Vec<usize> {
        (0..self.ell()).filter(|&k| self.active[k]).collect()
    }

    /// The stacked one-hot indicator `X ∈ {0, e_1, …, e_M}^ℓ` (length `ℓ M`).
    pub fn indicator(&self, m: usize) -> Vec<u8> {
        let mut x = vec![0u8; self.ell() * m];
        for (k, &w) in self.messages.iter().enumerate() {
            if w != 0 {
                x[k * m + w - 1] = 1;
            }
        }
        x
    }

    /// Inverse of [`indicator`](Self::indicator); rejects blocks with more than one 1.
    pub fn from_indicator(x: &[u8], m: usize) -> Result<Self> {
        if m == 0 || !x.len().is_multiple_of(m) {
            return Err(Error::Config("indicator length is not a multiple of M".into()));
        }
        let mut messages = Vec::with_capacity(x.len() / m);
        for block in x.chunks(m) {
            let ones: Vec<usize> = block.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i).collect();
            match (ones.len(), block.iter().all(|&b| b <= 1)) {
                (0, true) => messages.push(0),
                (1, true) => messages.push(ones[0] + 1),
                _ => return Err(Error::Config("indicator block is not 0 or a unit vector".into())),
            }
        }
        Ok(Self::from_messages(messages))
    }
}

/// Independent Bernoulli(α) activity with uniform messages, keyed by `trial_seed`.
pub fn sample_activity(cfg: &SimConfig, trial_seed: u64) -> ActivityRealization {
    let messages = (0..cfg.ell)
        .map(|k| {
            let mut rng = stream(trial_seed, Role::Activity, k as u64, 0);
            let u: f64 = rng.random();
            if u < cfg.alpha {
                let mut rng = stream(trial_seed, Role::Message, k as u64, 0);
                rng.random_range(1..=cfg.m)
            } else {
                0
            }
        })
        .collect();
    ActivityRealization::from_messages(messages)
}

/// Channel output split into the signature part and the body part.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub y: Vec<f64>,
    n0: usize,
}

impl ReceivedSignal {
    pub fn new(y: Vec<f64>, n0: usize) -> Self {
        assert!(n0 <= y.len());
        Self { y, n0 }
    }

    pub fn y_a(&self) -> &[f64] {
        &self.y[..self.n0]
    }

    pub fn y_b(&self) -> &[f64] {
        &self.y[self.n0..]
    }
}

/// `y = Σ_{active k} s_k(w_k) + z` with unit-variance noise.
pub fn transmit(books: &[Codebook], act: &ActivityRealization, noise_seed: u64) -> Result<ReceivedSignal> {
    transmit_scaled(books, act, noise_seed, 1.0)
}

/// [`transmit`] with noise standard deviation `noise_sd` (0 gives a noiseless channel).
pub fn transmit_scaled(
    books: &[Codebook],
    act: &ActivityRealization,
    noise_seed: u64,
    noise_sd: f64,
) -> Result<ReceivedSignal> {
    let first = books.first().ok_or_else(|| Error::Config("no codebooks".into()))?;
    let (n, n0) = (first.n(), first.n0());
    if books.iter().any(|b| b.n() != n || b.n0() != n0) {
        return Err(Error::Config("codebooks disagree on n or n0".into()));
    }
    if act.ell() != books.len() {
        return Err(Error::Config("activity length differs from the number of codebooks".into()));
    }
    let mut y = vec![0.0; n];
    gaussian_fill(&mut y, noise_sd, noise_seed, Role::Noise, 0, 0);
    for (book, &w) in books.iter().zip(&act.messages) {
        if w == 0 {
            continue;
        }
        if w > book.m() {
            return Err(Error::domain("message index", w as f64));
        }
        for (yi, si) in y[..n0].iter_mut().zip(book.signature()) {
            *yi += si;
        }
        for (yi, si) in y[n0..].iter_mut().zip(book.body(w)) {
            *yi += si;
        }
    }
    Ok(ReceivedSignal::new(y, n0))
}

/// Covariance of the stacked activity indicator, kept in block form.
///
/// `K` is block diagonal with one `M × M` block per user; each block has
/// `diag` on its diagonal and `off_diag` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityCovariance {
    pub ell: usize,
    pub m: usize,
    pub diag: f64,
    pub off_diag: f64,
}

impl ActivityCovariance {
    /// Dense row-major `ℓM × ℓM` matrix, or `None` when `ℓM` exceeds
    /// [`MAX_DENSE_COVARIANCE`].
    pub fn dense(&self) -> Option<Vec<f64>> {
        let dim = self.ell * self.m;
        if dim > MAX_DENSE_COVARIANCE {
            return None;
        }
        let mut k = vec![0.0; dim * dim];
        for user in 0..self.ell {
            for i in 0..self.m {
                for j in 0..self.m {
                    let (r, c) = (user * self.m + i, user * self.m + j);
                    k[r * dim + c] = if i == j { self.diag } else { self.off_diag };
                }
            }
        }
        Some(k)
    }

    /// `tr(S K Sᵀ)` where column `(k, w)` of `S` is codeword `s_k(w)`.
    pub fn quadratic_trace(&self, books: &[Codebook]) -> f64 {
        books
            .iter()
            .map(|b| {
                let words: Vec<Vec<f64>> = (1..=b.m()).map(|w| b.codeword(w)).collect();
                let mut sum = vec![0.0; b.n()];
                let mut energy = 0.0;
                for word in &words {
                    energy += dot(word, word);
                    for (acc, x) in sum.iter_mut().zip(word) {
                        *acc += x;
                    }
                }
                (self.diag - self.off_diag) * energy + self.off_diag * dot(&sum, &sum)
            })
            .sum()
    }
}

/// Covariance `E[(X − EX)(X − EX)ᵀ]` of the activity indicator.
pub fn activity_covariance(ell: usize, m: usize, alpha: f64) -> Result<ActivityCovariance> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("activity probability alpha", alpha));
    }
    if m == 0 {
        return Err(Error::domain("codebook size M", 0.0));
    }
    let q = alpha / m as f64;
    Ok(ActivityCovariance { ell, m, diag: q * (1.0 - q), off_diag: -q * q })
}
