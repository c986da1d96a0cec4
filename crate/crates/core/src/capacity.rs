//! Closed-form message-length capacity, identification overhead and
//! identification cost of the Gaussian many-access channel.
//!
//! The symmetric capacity formula is asymptotic: it is stated for unbounded
//! `ℓ_n` and `k_n` with `k_n = O(n)` and `ℓ_n e^{-δ k_n} → 0` for every
//! `δ > 0`. A finite input cannot witness those limits, so the functions here
//! evaluate the formulas unconditionally and leave the interpretation to the
//! caller.

use alloc::vec::Vec;
// Unused whenever another crate in the build links std, which brings the
// inherent f64 methods into scope.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Binary entropy `H₂(p)` in nats, with `H₂(0) = H₂(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("binary entropy argument", p));
    }
    Ok(entropy_unchecked(p))
}

pub(crate) fn entropy_unchecked(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.ln() - (1.0 - p) * (-p).ln_1p()
    }
}

/// Blocklength, population, mean number of active users and per-user SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSpec {
    pub n: u64,
    pub ell: u64,
    pub k: f64,
    pub p: f64,
}

impl ScalingSpec {
    pub fn new(n: u64, ell: u64, k: f64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("blocklength n", 0.0));
        }
        if ell == 0 {
            return Err(Error::domain("user count ell", 0.0));
        }
        if !(k > 0.0 && k <= ell as f64) {
            return Err(Error::domain("mean active users k (need 0 < k <= ell)", k));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::domain("SNR P", p));
        }
        Ok(Self { n, ell, k, p })
    }

    /// Activity probability `α = k / ℓ`.
    pub fn alpha(&self) -> f64 {
        self.k / self.ell as f64
    }
}

/// Which branch of the capacity characterization produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// `θ_n < 1`: positive message length.
    Achievable,
    /// `θ_n > 1`: a user cannot send even one bit reliably.
    ZeroCapacity,
    /// `θ_n = 1`: no positive-rate scaling is achievable; reported as zero.
    Boundary,
    /// Bounded population with a nonvanishing activity limit.
    BoundedEllActive,
    /// Bounded population with activity tending to zero.
    BoundedEllIdle,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Achievable => "achievable",
            Regime::ZeroCapacity => "zero-capacity",
            Regime::Boundary => "boundary",
            Regime::BoundedEllActive => "bounded-ell-active",
            Regime::BoundedEllIdle => "bounded-ell-idle",
        }
    }
}

/// Asymptotic information a caller may supply about how the sequence behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticHint {
    /// `ℓ_n` stays bounded; `alpha_vanishes` tells whether `α_n → 0`.
    BoundedPopulation { alpha_vanishes: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPoint {
    /// Genie-aided capacity `B₁(n)`.
    pub b1: f64,
    /// Identification overhead factor `θ_n`.
    pub theta: f64,
    /// Symmetric message-length capacity `B(n)`.
    pub b: f64,
    pub regime: Regime,
}

/// Genie-aided symmetric capacity `B₁(n) = n/(2k) · ln(1 + kP)`.
pub fn b1_capacity(spec: &ScalingSpec) -> f64 {
    spec.n as f64 / (2.0 * spec.k) * (spec.k * spec.p).ln_1p()
}

/// Overhead factor `θ_n = 2ℓ H₂(α) / (n ln(1 + kP))`.
pub fn overhead_factor(spec: &ScalingSpec) -> f64 {
    2.0 * spec.ell as f64 * entropy_unchecked(spec.alpha())
        / (spec.n as f64 * (spec.k * spec.p).ln_1p())
}

const BOUNDARY_TOL: f64 = 1e-12;

/// Symmetric message-length capacity with its regime.
///
/// Without a hint the finite-`n` formula `B₁(n) − H₂(α)/α` is used and the
/// regime follows from `θ_n`. A bounded-population hint selects the
/// conventional multiaccess values instead.
pub fn symmetric_capacity(spec: &ScalingSpec, hint: Option<AsymptoticHint>) -> CapacityPoint {
    let b1 = b1_capacity(spec);
    let theta = overhead_factor(spec);
    let n = spec.n as f64;
    if let Some(AsymptoticHint::BoundedPopulation { alpha_vanishes }) = hint {
        return if alpha_vanishes {
            CapacityPoint {
                b1,
                theta,
                b: 0.5 * n * spec.p.ln_1p(),
                regime: Regime::BoundedEllIdle,
            }
        } else {
            let ell = spec.ell as f64;
            CapacityPoint {
                b1,
                theta,
                b: n / (2.0 * ell) * (ell * spec.p).ln_1p(),
                regime: Regime::BoundedEllActive,
            }
        };
    }
    let (b, regime) = if (theta - 1.0).abs() <= BOUNDARY_TOL {
        (0.0, Regime::Boundary)
    } else if theta < 1.0 {
        let alpha = spec.alpha();
        (b1 - entropy_unchecked(alpha) / alpha, Regime::Achievable)
    } else {
        (0.0, Regime::ZeroCapacity)
    };
    CapacityPoint { b1, theta, b, regime }
}

/// `B′(n) = n/(2k) ln k − H₂(α)/α`, the form that drops the SNR inside the log.
pub fn simplified_capacity(spec: &ScalingSpec) -> Result<f64> {
    if spec.k <= 1.0 {
        return Err(Error::domain("mean active users k (need k > 1)", spec.k));
    }
    let alpha = spec.alpha();
    Ok(spec.n as f64 / (2.0 * spec.k) * spec.k.ln() - entropy_unchecked(alpha) / alpha)
}

/// Growth law of the population with the blocklength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `ℓ_n = ⌈a n⌉`.
    Linear { a: f64 },
    /// `ℓ_n = ⌈a n^d⌉` with `d > 1`.
    Polynomial { a: f64, d: f64 },
}

/// Limit of `θ_n` for `k_n = Θ(n)` with `c = lim k_n/n`.
pub fn overhead_limit(growth: Growth, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::domain("activity density c", c));
    }
    match growth {
        Growth::Linear { a } => {
            if !(a > 0.0) {
                return Err(Error::domain("growth constant a", a));
            }
            Ok(0.0)
        }
        Growth::Polynomial { a, d } => {
            if !(a > 0.0) {
                return Err(Error::domain("growth constant a", a));
            }
            if !(d > 1.0) {
                return Err(Error::domain("growth exponent d (need d > 1)", d));
            }
            Ok(2.0 * c * (d - 1.0))
        }
    }
}

/// Minimum identification cost `n(ℓ) = ℓ H₂(k/ℓ) / (½ ln(1 + kP))` in channel uses.
pub fn identification_cost(ell: u64, k: f64, p: f64) -> Result<f64> {
    if !(k > 0.0 && k <= ell as f64) {
        return Err(Error::domain("mean active users k (need 0 < k <= ell)", k));
    }
    if !(p > 0.0) {
        return Err(Error::domain("SNR P", p));
    }
    let ell_f = ell as f64;
    Ok(ell_f * entropy_unchecked(k / ell_f) / (0.5 * (k * p).ln_1p()))
}

/// One class of users sharing a population fraction, activity and SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSpec {
    pub beta: f64,
    pub alpha: f64,
    pub p: f64,
}

/// How the sum-power term of the region is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionLog {
    /// `ln Σ_j k^{(j)}`.
    #[default]
    ActiveCount,
    /// `ln(1 + Σ_j k^{(j)} P^{(j)})`.
    WithPower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeteroRegion {
    pub lhs: f64,
    pub rhs: f64,
    pub inside: bool,
    /// Per-group overhead factors `θ_n^{(j)}`.
    pub thetas: Vec<f64>,
    /// Mean active users per group, `k^{(j)} = α^{(j)} β^{(j)} ℓ`.
    pub active: Vec<f64>,
}

fn check_groups(groups: &[GroupSpec], ell: u64) -> Result<Vec<f64>> {
    if groups.is_empty() {
        return Err(Error::Config("at least one group is required".into()));
    }
    let total: f64 = groups.iter().map(|g| g.beta).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(alloc::format!(
            "population fractions must sum to 1 (got {total})"
        )));
    }
    let mut active = Vec::with_capacity(groups.len());
    for g in groups {
        if !(g.beta > 0.0 && g.beta <= 1.0) {
            return Err(Error::domain("population fraction beta", g.beta));
        }
        if !(0.0..=1.0).contains(&g.alpha) {
            return Err(Error::domain("group activity alpha", g.alpha));
        }
        if !(g.p > 0.0) {
            return Err(Error::domain("group SNR P", g.p));
        }
        let k = g.alpha * g.beta * ell as f64;
        if k < 1.0 {
            return Err(Error::domain("group mean active users (need >= 1)", k));
        }
        active.push(k);
    }
    Ok(active)
}

/// `B_G(n)` for the subset of group indices `subset`.
pub fn group_bound(
    groups: &[GroupSpec],
    ell: u64,
    n: u64,
    subset: &[usize],
    log_form: RegionLog,
) -> Result<f64> {
    let active = check_groups(groups, ell)?;
    if subset.is_empty() || subset.iter().any(|&j| j >= groups.len()) {
        return Err(Error::Config("group subset must be nonempty and in range".into()));
    }
    Ok(bound_for(groups, &active, ell, n, subset.iter().copied(), log_form))
}

fn bound_for(
    groups: &[GroupSpec],
    active: &[f64],
    ell: u64,
    n: u64,
    subset: impl Iterator<Item = usize> + Clone,
    log_form: RegionLog,
) -> f64 {
    let log_term = match log_form {
        RegionLog::ActiveCount => subset.clone().map(|j| active[j]).sum::<f64>().ln(),
        RegionLog::WithPower => subset
            .clone()
            .map(|j| active[j] * groups[j].p)
            .sum::<f64>()
            .ln_1p(),
    };
    let penalty: f64 = subset
        .map(|j| groups[j].beta * ell as f64 * entropy_unchecked(groups[j].alpha))
        .sum();
    0.5 * n as f64 * log_term - penalty
}

/// Tests a message-length tuple against the heterogeneous capacity region.
pub fn hetero_region(
    groups: &[GroupSpec],
    ell: u64,
    n: u64,
    lengths: &[f64],
    log_form: RegionLog,
) -> Result<HeteroRegion> {
    let active = check_groups(groups, ell)?;
    if lengths.len() != groups.len() {
        return Err(Error::Config(alloc::format!(
            "{} message lengths supplied for {} groups",
            lengths.len(),
            groups.len()
        )));
    }
    let lhs = active.iter().zip(lengths).map(|(k, v)| k * v).sum();
    let rhs = bound_for(groups, &active, ell, n, 0..groups.len(), log_form);
    let thetas = groups
        .iter()
        .zip(&active)
        .map(|(g, k)| {
            2.0 * g.beta * ell as f64 * entropy_unchecked(g.alpha) / (n as f64 * k.ln())
        })
        .collect();
    Ok(HeteroRegion {
        lhs,
        rhs,
        inside: lhs <= rhs,
        thetas,
        active,
    })
}
