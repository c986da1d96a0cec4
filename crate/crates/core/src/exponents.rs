//! Error exponents for activity identification and for joint ML decoding, and
//! the lower bound on the error of successive decoding.
//!
//! The identification analysis bounds the probability that a wrong active set
//! with `w1` misses and `w2` false alarms beats the true one by
//! `exp(-k h_{λ,ρ}(w1, w2))`, where `h` is built from the per-symbol kernel
//! `m_{λ,ρ}(w1, w2)`. The message-decoding analysis uses the Gallager function
//! `E₀(γ, ρ)`, which is the same kernel evaluated on the diagonal.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
// Unused whenever another crate in the build links std, which brings the
// inherent f64 methods into scope.
#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::capacity::entropy_unchecked;
use crate::error::{Error, Result};
use crate::numeric::{gaussian_expectation, golden_section_max, nelder_mead_max, q_function};
use crate::rng::{stream, Role};

/// Tolerance on the `λρ ≤ 1` constraint.
const LAMBDA_RHO_TOL: f64 = 1e-12;

/// Arguments of the union-bound kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    /// Misses, `|A* \ A|`.
    pub w1: u64,
    /// False alarms, `|A \ A*|`.
    pub w2: u64,
    pub lambda: f64,
    pub rho: f64,
    /// Reduced SNR `P′ = P − ε`.
    pub p_prime: f64,
}

impl KernelParams {
    pub fn new(w1: u64, w2: u64, lambda: f64, rho: f64, p_prime: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::domain("lambda", lambda));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain("rho", rho));
        }
        if lambda * rho > 1.0 + LAMBDA_RHO_TOL {
            return Err(Error::domain("lambda * rho (must not exceed 1)", lambda * rho));
        }
        if !(p_prime > 0.0) {
            return Err(Error::domain("reduced SNR P'", p_prime));
        }
        Ok(Self { w1, w2, lambda, rho, p_prime })
    }

    /// `1 − λρ`, clamped at zero to absorb the constraint tolerance.
    fn slack(&self) -> f64 {
        (1.0 - self.lambda * self.rho).max(0.0)
    }
}

/// `ln m_{λ,ρ}(w1, w2)`.
pub fn log_kernel(p: &KernelParams) -> f64 {
    let v1 = p.w1 as f64 * p.p_prime;
    let v2 = p.w2 as f64 * p.p_prime;
    let s = p.slack();
    0.5 * (1.0 - p.rho) * (p.lambda * v2).ln_1p()
        - 0.5 * (p.lambda * s * v2 + p.lambda * p.rho * s * v1).ln_1p()
}

/// Closed form of the per-symbol kernel `m_{λ,ρ}(w1, w2)`.
pub fn kernel_closed_form(p: &KernelParams) -> f64 {
    log_kernel(p).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_err: f64,
}

/// Samples per independent stream of the oracle.
const ORACLE_BLOCK: usize = 4096;

/// Monte Carlo estimate of the kernel from its defining integral.
///
/// The kernel is `∫ E[ p(y|S_{A*})^{1−λρ} (E[p(y|S_A)^λ | S_{A*}])^ρ ] dy`
/// with `p(y|·)` the unit-variance Gaussian likelihood. Shifting `y` by the sum
/// of the correctly detected signatures removes them, leaving
/// `∫ E_{Z1}[φ(u − Z1)^{1−λρ}] · (E_{Z2}[φ(u − Z2)^λ])^ρ du` with
/// `Z1 ~ N(0, w1 P′)` and `Z2 ~ N(0, w2 P′)`. The inner `Z2` expectation sits
/// under the power `ρ`, so it is evaluated as a Gaussian convolution; `u` is
/// drawn from `N(0, 1 + 2(λ w2 P′ + w1 P′))`, which dominates the integrand's
/// tails, and `Z1` is sampled jointly with it.
pub fn kernel_mc_oracle(p: &KernelParams, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 10_000 {
        return Err(Error::domain("oracle sample count (need >= 1e4)", samples as f64));
    }
    let v1 = p.w1 as f64 * p.p_prime;
    let v2 = p.w2 as f64 * p.p_prime;
    let lam = p.lambda;
    let rho = p.rho;
    let s = p.slack();
    let proposal_var = 1.0 + 2.0 * (lam * v2 + v1);
    let proposal_sd = proposal_var.sqrt();
    let z1_sd = v1.sqrt();
    let tilt = 1.0 + lam * v2;

    // Welford accumulation, block by block.
    let mut count = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let blocks = samples.div_ceil(ORACLE_BLOCK);
    for block in 0..blocks {
        let mut rng = stream(seed, Role::KernelOracle, block as u64, 0);
        let len = ORACLE_BLOCK.min(samples - block * ORACLE_BLOCK);
        for _ in 0..len {
            let gu: f64 = StandardNormal.sample(&mut rng);
            let gz: f64 = StandardNormal.sample(&mut rng);
            let u = proposal_sd * gu;
            let z1 = z1_sd * gz;
            // The (2π) normalizations cancel between integrand and proposal.
            let log_w = -0.5 * s * (u - z1) * (u - z1) - 0.5 * rho * tilt.ln()
                - 0.5 * rho * lam * u * u / tilt
                + 0.5 * proposal_var.ln()
                + 0.5 * u * u / proposal_var;
            let w = log_w.exp();
            count += 1;
            let delta = w - mean;
            mean += delta / count as f64;
            m2 += delta * (w - mean);
        }
    }
    let var = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    Ok(McEstimate {
        estimate: mean,
        std_err: (var / count as f64).sqrt(),
    })
}

/// Fixed quantities of one identification instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentContext {
    /// Signature length.
    pub n0: f64,
    /// Mean number of active users.
    pub k: f64,
    /// Size of the true active set.
    pub a_star: u64,
    /// Population.
    pub ell: u64,
}

impl ExponentContext {
    pub fn new(n0: f64, k: f64, a_star: u64, ell: u64) -> Result<Self> {
        if !(n0 > 0.0) {
            return Err(Error::domain("signature length n0", n0));
        }
        if !(k > 0.0 && k <= ell as f64) {
            return Err(Error::domain("mean active users k", k));
        }
        let ctx = Self { n0, k, a_star, ell };
        if a_star == 0 || a_star > ell || a_star as f64 > ctx.weight_bound() + 1e-9 {
            return Err(Error::domain("true active set size", a_star as f64));
        }
        Ok(ctx)
    }

    /// `δ = k^{-1/3}`.
    pub fn delta(&self) -> f64 {
        self.k.powf(-1.0 / 3.0)
    }

    /// `(1 + δ) k`, the largest admissible detected-set weight.
    pub fn weight_bound(&self) -> f64 {
        (1.0 + self.delta()) * self.k
    }

    /// The admissible (misses, false alarms) pairs of a wrong detection.
    ///
    /// False alarms are also capped by the number of inactive users.
    pub fn error_classes(&self) -> Vec<(u64, u64)> {
        let bound = self.weight_bound();
        let w2_max = (bound.floor() as u64).min(self.ell - self.a_star);
        let mut out = Vec::new();
        for w1 in 0..=self.a_star {
            for w2 in 0..=w2_max {
                if w1 + w2 == 0 {
                    continue;
                }
                if (self.a_star + w2) as f64 <= bound + w1 as f64 + 1e-9 {
                    out.push((w1, w2));
                }
            }
        }
        out
    }
}

/// The identification exponent `h_{λ,ρ}(w1, w2)`.
pub fn h_exponent(p: &KernelParams, ctx: &ExponentContext) -> Result<f64> {
    if p.w1 > ctx.a_star {
        return Err(Error::domain("misses w1 (exceeds true set size)", p.w1 as f64));
    }
    if p.w2 > ctx.ell - ctx.a_star {
        return Err(Error::domain("false alarms w2 (exceeds inactive users)", p.w2 as f64));
    }
    let v1 = p.w1 as f64 * p.p_prime;
    let v2 = p.w2 as f64 * p.p_prime;
    let s = p.slack();
    let scale = ctx.n0 / (2.0 * ctx.k);
    let a = ctx.a_star as f64;
    let ell = ctx.ell as f64;
    Ok(-(1.0 - p.rho) * scale * (p.lambda * v2).ln_1p()
        + scale * (p.lambda * s * v2 + p.lambda * p.rho * s * v1).ln_1p()
        - a / ctx.k * entropy_unchecked(p.w1 as f64 / a)
        - p.rho * ell / ctx.k * entropy_unchecked(p.w2 as f64 / ell))
}

/// Resolution of the `(λ, ρ)` search in [`identification_error_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRhoGrid {
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub rho_steps: usize,
}

impl Default for LambdaRhoGrid {
    fn default() -> Self {
        Self { lambda_max: 4.0, lambda_steps: 32, rho_steps: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOptimum {
    pub h: f64,
    pub lambda: f64,
    pub rho: f64,
    /// `min(1, exp(−k h))`.
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationBound {
    /// Upper bound on the probability of a detection error.
    pub total: f64,
    /// Cell contributing the largest term, if any cell exists.
    pub worst_cell: Option<(u64, u64)>,
    pub per_cell: BTreeMap<(u64, u64), CellOptimum>,
    /// `exp(−k δ²/3) + (1 − k/ℓ)^ℓ`, the chance that the true set is empty or too heavy.
    pub overflow: f64,
}

/// Maximizes `h` over the `(λ, ρ)` grid for one cell, then refines locally.
pub fn optimize_cell(
    w1: u64,
    w2: u64,
    ctx: &ExponentContext,
    p_prime: f64,
    grid: &LambdaRhoGrid,
) -> Result<CellOptimum> {
    let eval = |lambda: f64, rho: f64| -> f64 {
        if !(0.0..=grid.lambda_max).contains(&lambda)
            || !(0.0..=1.0).contains(&rho)
            || lambda * rho > 1.0
        {
            return f64::NEG_INFINITY;
        }
        KernelParams::new(w1, w2, lambda, rho, p_prime)
            .and_then(|p| h_exponent(&p, ctx))
            .unwrap_or(f64::NEG_INFINITY)
    };
    // Surface domain errors (e.g. w2 too large) instead of silently returning -inf.
    h_exponent(&KernelParams::new(w1, w2, 0.0, 0.0, p_prime)?, ctx)?;

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..grid.lambda_steps {
        let lambda = grid.lambda_max * i as f64 / (grid.lambda_steps - 1) as f64;
        for j in 0..grid.rho_steps {
            let rho = j as f64 / (grid.rho_steps - 1) as f64;
            let h = eval(lambda, rho);
            if h > best.0 {
                best = (h, lambda, rho);
            }
        }
    }
    let step = [
        0.5 * grid.lambda_max / (grid.lambda_steps - 1) as f64,
        0.5 / (grid.rho_steps - 1) as f64,
    ];
    let (point, refined) = nelder_mead_max(|[l, r]| eval(l, r), [best.1, best.2], step, 200);
    if refined > best.0 {
        best = (refined, point[0], point[1]);
    }
    let (h, lambda, rho) = best;
    Ok(CellOptimum { h, lambda, rho, term: (-ctx.k * h).exp().min(1.0) })
}

/// Union bound on the activity-detection error probability.
pub fn identification_error_bound(
    ctx: &ExponentContext,
    p_prime: f64,
    grid: &LambdaRhoGrid,
) -> Result<IdentificationBound> {
    if grid.lambda_steps < 8 || grid.rho_steps < 8 {
        return Err(Error::domain(
            "grid resolution (need >= 8 steps)",
            grid.lambda_steps.min(grid.rho_steps) as f64,
        ));
    }
    if !(grid.lambda_max > 0.0) {
        return Err(Error::domain("lambda_max", grid.lambda_max));
    }
    let mut per_cell = BTreeMap::new();
    let mut total = 0.0;
    let mut worst: Option<((u64, u64), f64)> = None;
    for (w1, w2) in ctx.error_classes() {
        let cell = optimize_cell(w1, w2, ctx, p_prime, grid)?;
        total += cell.term;
        if worst.is_none_or(|(_, t)| cell.term > t) {
            worst = Some(((w1, w2), cell.term));
        }
        per_cell.insert((w1, w2), cell);
    }
    let delta = ctx.delta();
    let ell = ctx.ell as f64;
    let overflow = (-ctx.k * delta * delta / 3.0).exp() + (1.0 - ctx.k / ell).powf(ell);
    Ok(IdentificationBound {
        total: total + overflow,
        worst_cell: worst.map(|(c, _)| c),
        per_cell,
        overflow,
    })
}

/// Gallager function `E₀(γ, ρ) = (ρ/2) ln(1 + γ k P′ / (ρ + 1))`.
pub fn gallager_e0(gamma: f64, rho: f64, k: f64, p_prime: f64) -> f64 {
    0.5 * rho * (gamma * k * p_prime / (rho + 1.0)).ln_1p()
}

/// `f(γ, ρ) = E₀(γ, ρ) − γρ (k/n) v − (k/n) H₂(γ)` where `v` is the message length.
pub fn f_exponent(gamma: f64, rho: f64, n: f64, k: f64, v: f64, p_prime: f64) -> f64 {
    let load = k / n;
    gallager_e0(gamma, rho, k, p_prime) - gamma * rho * load * v - load * entropy_unchecked(gamma)
}

/// Message length `v(n) = (1 − ε) (n / 2k) ln(1 + k P′)`.
pub fn backed_off_length(n: f64, k: f64, eps: f64, p_prime: f64) -> f64 {
    (1.0 - eps) * n / (2.0 * k) * (k * p_prime).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSlice {
    pub gamma: f64,
    pub rho_star: f64,
    pub f_star: f64,
    /// `f(γ, 1)`.
    pub f_rho1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomCodingExponent {
    pub er: f64,
    pub argmin_gamma: f64,
    pub message_length: f64,
    pub slices: Vec<GammaSlice>,
}

impl RandomCodingExponent {
    /// `min_γ f(γ, 1)`, the slice used by the closed-form lower bound.
    pub fn rho_one_min(&self) -> f64 {
        self.slices.iter().map(|s| s.f_rho1).fold(f64::INFINITY, f64::min)
    }
}

/// `E_r = min_{γ ∈ {1/k, …, 1}} max_{ρ ∈ [0,1]} f(γ, ρ)` at the backed-off message length.
pub fn random_coding_exponent(
    n: u64,
    k: u64,
    eps: f64,
    p_prime: f64,
    rho_steps: usize,
) -> Result<RandomCodingExponent> {
    if n == 0 {
        return Err(Error::domain("blocklength n", 0.0));
    }
    if k == 0 {
        return Err(Error::domain("active users k", 0.0));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("back-off eps", eps));
    }
    if !(p_prime > 0.0) {
        return Err(Error::domain("reduced SNR P'", p_prime));
    }
    if rho_steps < 2 {
        return Err(Error::domain("rho grid steps", rho_steps as f64));
    }
    let (nf, kf) = (n as f64, k as f64);
    let v = backed_off_length(nf, kf, eps, p_prime);
    let mut slices = Vec::with_capacity(k as usize);
    for errors in 1..=k {
        let gamma = errors as f64 / kf;
        let f = |rho: f64| f_exponent(gamma, rho, nf, kf, v, p_prime);
        let mut best = (0usize, f(0.0));
        for j in 1..rho_steps {
            let val = f(j as f64 / (rho_steps - 1) as f64);
            if val > best.1 {
                best = (j, val);
            }
        }
        let h = 1.0 / (rho_steps - 1) as f64;
        let lo = (best.0 as f64 - 1.0).max(0.0) * h;
        let hi = ((best.0 + 1) as f64 * h).min(1.0);
        let (mut rho_star, mut f_star) = (best.0 as f64 * h, best.1);
        let (r, val) = golden_section_max(f, lo, hi, 1e-10);
        if val > f_star {
            rho_star = r;
            f_star = val;
        }
        slices.push(GammaSlice { gamma, rho_star, f_star, f_rho1: f(1.0) });
    }
    let argmin = slices
        .iter()
        .fold(&slices[0], |acc, s| if s.f_star < acc.f_star { s } else { acc });
    Ok(RandomCodingExponent {
        er: argmin.f_star,
        argmin_gamma: argmin.gamma,
        message_length: v,
        slices,
    })
}

/// Signed and absolute third moments of the successive-decoding statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdMoment {
    /// `n E[X³]` with `X = −Q(1 − Z²) − 2√Q Z`.
    pub signed: f64,
    /// `n E|X|³`.
    pub absolute: f64,
}

/// Evaluates both readings of the third moment `T`.
///
/// The signed value follows from the Gaussian moments `E Z² = 1`, `E Z⁴ = 3`,
/// `E Z⁶ = 15`; the absolute value is integrated numerically.
pub fn third_moment(q: f64, n: u64) -> Result<ThirdMoment> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::domain("SINR Q", q));
    }
    let nf = n as f64;
    let signed = nf * (24.0 * q * q + 8.0 * q * q * q);
    let sq = q.sqrt();
    let scale = 8.0 * q * sq + q * q * q;
    let abs_moment = gaussian_expectation(
        |z| {
            let x = -q * (1.0 - z * z) - 2.0 * sq * z;
            (x * x * x).abs()
        },
        1e-12 * scale,
    );
    Ok(ThirdMoment { signed, absolute: nf * abs_moment })
}

/// Parameters of the successive-decoding lower bound for the first decoded user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccDecodeParams {
    pub n: u64,
    pub k: f64,
    pub p: f64,
    pub eps: f64,
    /// Free parameter of the bound; must exceed 1.
    pub lam: f64,
    /// Berry–Esseen-type constants; their true values are unknown, so finite-`n`
    /// bounds computed with the default of 1 are qualitative only.
    pub d1: f64,
    pub d2: f64,
}

impl SuccDecodeParams {
    pub fn new(n: u64, k: f64, p: f64, eps: f64, lam: f64) -> Result<Self> {
        let out = Self { n, k, p, eps, lam, d1: 1.0, d2: 1.0 };
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lam > 1.0) {
            return Err(Error::domain("lambda (need > 1)", self.lam));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::domain("eps", self.eps));
        }
        if self.n == 0 {
            return Err(Error::domain("blocklength n", 0.0));
        }
        if !(self.k >= 1.0) {
            return Err(Error::domain("users k", self.k));
        }
        if !(self.p > 0.0) {
            return Err(Error::domain("SNR P", self.p));
        }
        if !(self.d1 > 0.0 && self.d2 > 0.0) {
            return Err(Error::domain("universal constants d1/d2", self.d1.min(self.d2)));
        }
        Ok(())
    }

    /// SINR of the first decoded user, `Q = P / (1 + (k − 1) P)`.
    pub fn sinr(&self) -> f64 {
        self.p / (1.0 + (self.k - 1.0) * self.p)
    }

    /// Per-symbol capacity at that SINR, `C = ½ ln(1 + Q)`.
    pub fn sinr_capacity(&self) -> f64 {
        0.5 * self.sinr().ln_1p()
    }

    /// `S = 2nQ(2 + Q)`.
    pub fn variance_sum(&self) -> f64 {
        let q = self.sinr();
        2.0 * self.n as f64 * q * (2.0 + q)
    }

    /// Normalized threshold `x = 2(λεn + 1 − λε) C (1 + Q) / √S`.
    pub fn threshold(&self) -> f64 {
        let q = self.sinr();
        let le = self.lam * self.eps;
        2.0 * (le * self.n as f64 + 1.0 - le) * self.sinr_capacity() * (1.0 + q)
            / self.variance_sum().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccMode {
    /// Finite-`n` bound with the signed third moment.
    Finite,
    /// Limit for `k = a n`, `n → ∞`; free of the universal constants.
    Asymptotic { a: f64 },
}

/// Lower bound on the first user's error probability under successive decoding.
pub fn succ_decode_lower_bound(p: &SuccDecodeParams, mode: SuccMode) -> Result<f64> {
    match mode {
        SuccMode::Asymptotic { a } => succ_decode_asymptotic(a, p.eps, p.lam),
        SuccMode::Finite => {
            p.validate()?;
            let t = third_moment(p.sinr(), p.n)?.signed;
            succ_decode_finite_with_moment(p, t)
        }
    }
}

/// Finite-`n` bound with an explicit third moment `t`.
pub fn succ_decode_finite_with_moment(p: &SuccDecodeParams, t: f64) -> Result<f64> {
    p.validate()?;
    let s = p.variance_sum();
    let x = p.threshold();
    let s32 = s * s.sqrt();
    let corrected = q_function(x) * (-p.d1 * t * x * x * x / s32).exp() * (1.0 - p.d2 * t * x / s32);
    let tail = (-(p.lam - 1.0) * (p.n as f64 - 1.0) * p.eps * p.sinr_capacity()).exp();
    Ok(corrected - tail)
}

/// `Q(ελ / (2√a)) − exp(−(λ − 1) ε / (2a))`.
pub fn succ_decode_asymptotic(a: f64, eps: f64, lam: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain("load a", a));
    }
    if !(lam > 1.0) {
        return Err(Error::domain("lambda (need > 1)", lam));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps", eps));
    }
    Ok(q_function(eps * lam / (2.0 * a.sqrt())) - (-(lam - 1.0) * eps / (2.0 * a)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kp(w1: u64, w2: u64, lambda: f64, rho: f64) -> KernelParams {
        KernelParams::new(w1, w2, lambda, rho, 9.0).unwrap()
    }

    #[test]
    fn kernel_trivial_points() {
        assert_eq!(kernel_closed_form(&kp(3, 4, 0.0, 0.5)), 1.0);
        assert_eq!(kernel_closed_form(&kp(0, 0, 0.7, 0.5)), 1.0);
        assert!(KernelParams::new(1, 1, 2.0, 0.75, 9.0).is_err());
    }

    #[test]
    fn kernel_reference_value() {
        let m = kernel_closed_form(&kp(0, 1, 2.0 / 3.0, 0.75));
        assert_relative_eq!(m, 0.6376865534292271, max_relative = 1e-13);
    }

    #[test]
    fn oracle_zero_weights_is_exact() {
        let est = kernel_mc_oracle(&kp(0, 0, 0.5, 0.5), 10_000, 1).unwrap();
        assert_relative_eq!(est.estimate, 1.0, epsilon = 1e-12);
        assert!(kernel_mc_oracle(&kp(0, 0, 0.5, 0.5), 100, 1).is_err());
    }

    #[test]
    fn oracle_matches_closed_form() {
        let p = kp(2, 3, 2.0 / 3.0, 0.75);
        let est = kernel_mc_oracle(&p, 100_000, 7).unwrap();
        assert!((est.estimate - kernel_closed_form(&p)).abs() <= 3.0 * est.std_err);
    }

    #[test]
    fn h_reference_value() {
        let ctx = ExponentContext::new(12.0, 6.0, 6, 24).unwrap();
        let h = h_exponent(&kp(1, 0, 2.0 / 3.0, 0.75), &ctx).unwrap();
        assert_relative_eq!(h, 0.7280937874753415, max_relative = 1e-12);
        assert_eq!(h_exponent(&kp(0, 0, 1.0, 1.0), &ctx).unwrap(), 0.0);
        assert!(h_exponent(&kp(7, 0, 1.0, 1.0), &ctx).is_err());
        assert!(h_exponent(&kp(0, 19, 1.0, 1.0), &ctx).is_err());
    }

    #[test]
    fn h_relates_to_log_kernel() {
        let ctx = ExponentContext::new(20.0, 5.0, 6, 30).unwrap();
        for (w1, w2) in [(1, 0), (0, 2), (3, 4), (6, 1)] {
            for (l, r) in [(0.5, 0.5), (1.0, 1.0), (2.0, 0.25)] {
                let p = kp(w1, w2, l, r);
                let expect = ctx.n0 / ctx.k * -log_kernel(&p)
                    - 6.0 / ctx.k * entropy_unchecked(w1 as f64 / 6.0)
                    - r * 30.0 / ctx.k * entropy_unchecked(w2 as f64 / 30.0);
                assert_relative_eq!(h_exponent(&p, &ctx).unwrap(), expect, max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn error_classes_respect_weight_bound() {
        let ctx = ExponentContext::new(24.0, 6.0, 6, 24).unwrap();
        let bound = ctx.weight_bound();
        let classes = ctx.error_classes();
        assert!(!classes.is_empty());
        for (w1, w2) in classes {
            assert!(w1 <= 6 && w2 <= 18 && w1 + w2 > 0);
            assert!((6 + w2 - w1) as f64 <= bound + 1e-9);
        }
    }

    #[test]
    fn identification_bound_shrinks_with_signature_length() {
        let grid = LambdaRhoGrid::default();
        let short = ExponentContext::new(24.0, 6.0, 6, 24).unwrap();
        let long = ExponentContext::new(48.0, 6.0, 6, 24).unwrap();
        let a = identification_error_bound(&short, 9.0, &grid).unwrap();
        let b = identification_error_bound(&long, 9.0, &grid).unwrap();
        assert!(b.total < a.total);
        assert!(a.worst_cell.is_some());
        let coarse = LambdaRhoGrid { lambda_steps: 4, ..grid };
        assert!(identification_error_bound(&short, 9.0, &coarse).is_err());
    }

    #[test]
    fn cell_optimum_is_at_least_every_grid_point() {
        let ctx = ExponentContext::new(24.0, 6.0, 6, 24).unwrap();
        let grid = LambdaRhoGrid::default();
        let cell = optimize_cell(0, 2, &ctx, 9.0, &grid).unwrap();
        for (l, r) in [(0.5, 0.5), (1.0, 1.0), (2.0, 0.5)] {
            assert!(cell.h >= h_exponent(&kp(0, 2, l, r), &ctx).unwrap() - 1e-12);
        }
        assert!(cell.lambda * cell.rho <= 1.0 + 1e-12);
    }

    #[test]
    fn gallager_values() {
        assert_eq!(gallager_e0(0.3, 0.0, 10.0, 9.0), 0.0);
        assert_relative_eq!(gallager_e0(1.0, 1.0, 10.0, 1.0), 0.8958797346140275, max_relative = 1e-14);
    }

    #[test]
    fn f_exponent_reference_value() {
        let v = backed_off_length(512.0, 64.0, 0.1, 9.0);
        let f = f_exponent(0.5, 1.0, 512.0, 64.0, v, 9.0);
        assert_relative_eq!(f, 0.9712089636759715, max_relative = 1e-12);
        assert_eq!(f_exponent(1.0, 0.0, 512.0, 64.0, v, 9.0), 0.0);
    }

    #[test]
    fn inner_max_dominates_rho_one() {
        let er = random_coding_exponent(512, 64, 0.1, 9.0, 33).unwrap();
        assert_eq!(er.slices.len(), 64);
        for s in &er.slices {
            assert!(s.f_star >= s.f_rho1 - 1e-12);
        }
        assert!(er.er > 0.0);
    }

    #[test]
    fn third_moment_values() {
        let t = third_moment(0.1, 1).unwrap();
        assert_relative_eq!(t.signed, 0.248, max_relative = 1e-12);
        let signed_quad = gaussian_expectation(
            |z| {
                let x = -0.1 * (1.0 - z * z) - 2.0 * 0.1f64.sqrt() * z;
                x * x * x
            },
            1e-12,
        );
        assert_relative_eq!(signed_quad, 0.248, epsilon = 1e-6);
        let t2 = third_moment(0.1, 2).unwrap();
        assert_relative_eq!(t2.absolute, 2.0 * t.absolute, max_relative = 1e-12);
        let small = third_moment(1e-6, 1).unwrap();
        assert_relative_eq!(small.absolute / 1e-9, 12.766152972845846, max_relative = 1e-2);
    }

    #[test]
    fn succ_decode_asymptotic_values() {
        let v = succ_decode_asymptotic(0.25, 1e-3, 1000.0).unwrap();
        assert_relative_eq!(v, 0.023049029277267374, epsilon = 1e-10);
        assert!(succ_decode_asymptotic(0.25, 1e-3, 1.0 + 1e-9).unwrap() < 0.0);
        assert!(succ_decode_asymptotic(0.25, 1e-3, 1.0).is_err());
    }

    #[test]
    fn succ_decode_finite_without_moment() {
        let p = SuccDecodeParams::new(1000, 10.0, 10.0, 0.1, 2.0).unwrap();
        let expect = q_function(p.threshold())
            - (-(p.lam - 1.0) * 999.0 * p.eps * p.sinr_capacity()).exp();
        assert_relative_eq!(succ_decode_finite_with_moment(&p, 0.0).unwrap(), expect, max_relative = 1e-14);
        assert!(succ_decode_lower_bound(&p, SuccMode::Finite).unwrap().is_finite());
    }
}
