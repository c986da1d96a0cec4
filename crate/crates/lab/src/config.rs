//! Experiment configuration files.
//!
//! A configuration is a JSON object
//! `{"kind": ..., "params": {...}, "trials": N, "seed": N, "output": {"path": ..., "format": "csv"|"json"}}`.
//! Only `kind` is required. Unknown keys are rejected, and every error names
//! the key path it refers to. [`ExperimentConfig::to_json`] writes the
//! validated record with all defaults filled in, and parsing that text gives
//! the same record back.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::output::Format;

pub const DEFAULT_TRIALS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Capacity,
    IdentCost,
    Exponent,
    Simulate,
    #[serde(alias = "succdec")]
    SuccDecode,
    Figure1,
    Figure2,
    Figure4,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Capacity => "capacity",
            Kind::IdentCost => "ident-cost",
            Kind::Exponent => "exponent",
            Kind::Simulate => "simulate",
            Kind::SuccDecode => "succ-decode",
            Kind::Figure1 => "figure1",
            Kind::Figure2 => "figure2",
            Kind::Figure4 => "figure4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Default back-off `ε = 0.1 min(1, P)`, inside the admissible range `(0, min(1, P))`.
pub fn default_eps(p: f64) -> f64 {
    0.1 * p.min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    pub n: u64,
    pub ell: u64,
    pub k: f64,
    pub p: f64,
    /// Power back-off used for the `b_backed_off` column.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Conventional multiaccess values for a bounded population.
    #[serde(default)]
    pub bounded: Option<BoundedHint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundedHint {
    /// Activity probability stays bounded away from zero.
    Active,
    /// Activity probability vanishes.
    Idle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentCostParams {
    pub ell: u64,
    pub k: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExponentParams {
    /// Kernel value, optionally with its Monte Carlo estimate.
    Kernel {
        w1: u64,
        w2: u64,
        lambda: f64,
        rho: f64,
        p_prime: f64,
        /// Oracle sample count; 0 skips the oracle.
        #[serde(default)]
        samples: usize,
    },
    /// Union bound on the activity-detection error.
    Identification {
        n0: f64,
        k: f64,
        a_star: u64,
        ell: u64,
        p_prime: f64,
        #[serde(default = "default_lambda_max")]
        lambda_max: f64,
        #[serde(default = "default_grid_steps")]
        lambda_steps: usize,
        #[serde(default = "default_grid_steps")]
        rho_steps: usize,
    },
    /// Random-coding exponent of joint message decoding.
    RandomCoding {
        n: u64,
        k: u64,
        eps: f64,
        p_prime: f64,
        #[serde(default = "default_rho_steps")]
        rho_steps: usize,
    },
}

fn default_lambda_max() -> f64 {
    4.0
}

fn default_grid_steps() -> usize {
    32
}

fn default_rho_steps() -> usize {
    65
}

/// How the signature length is chosen from the blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum N0Rule {
    /// `n0 = ⌈ε n⌉`, for populations whose identification overhead vanishes.
    Fraction,
    /// `n0 = ⌈(1 + ε) θ_n n⌉`, the identification cost with a margin.
    Overhead,
    /// `n0` taken verbatim from the configuration.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorChoice {
    /// Exhaustive search when it fits the subset budget, greedy otherwise.
    Auto,
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookPolicy {
    /// A fresh random codebook for every trial (ensemble average).
    PerTrial,
    /// One codebook drawn from the experiment seed and reused.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub n: usize,
    pub ell: usize,
    pub m: usize,
    pub alpha: f64,
    pub p: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub n0: Option<usize>,
    #[serde(default)]
    pub n0_rule: Option<N0Rule>,
    #[serde(default)]
    pub strict_power: bool,
    #[serde(default)]
    pub detector: Option<DetectorChoice>,
    #[serde(default)]
    pub subset_limit: Option<f64>,
    #[serde(default)]
    pub tuple_cap: Option<usize>,
    /// Noise standard deviation; 1 is the channel model, 0 a noiseless test channel.
    #[serde(default)]
    pub noise_sd: Option<f64>,
    #[serde(default)]
    pub codebooks: Option<CodebookPolicy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccDecodeParams {
    pub n: u64,
    pub k: f64,
    pub p: f64,
    pub eps: f64,
    pub lam: f64,
    #[serde(default = "one")]
    pub d1: f64,
    #[serde(default = "one")]
    pub d2: f64,
}

fn one() -> f64 {
    1.0
}

/// Population growth `ℓ = ⌈coef · n^power⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllRule {
    pub power: f64,
    #[serde(default = "one")]
    pub coef: f64,
}

impl EllRule {
    pub fn label(&self) -> String {
        let base = if self.power == 1.0 { "n".to_owned() } else { format!("n^{}", self.power) };
        if self.coef == 1.0 {
            base
        } else {
            format!("{}*{base}", self.coef)
        }
    }

    pub fn eval(&self, n: u64) -> f64 {
        (self.coef * (n as f64).powf(self.power)).ceil()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Params {
    #[serde(default = "ten")]
    pub p: f64,
    /// `k_n = k_ratio · n`.
    #[serde(default = "quarter")]
    pub k_ratio: f64,
    #[serde(default = "default_ell_rules")]
    pub ell_rules: Vec<EllRule>,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<u64>,
}

fn ten() -> f64 {
    10.0
}

fn quarter() -> f64 {
    0.25
}

fn default_ell_rules() -> Vec<EllRule> {
    [1.0, 2.0, 3.0].map(|power| EllRule { power, coef: 1.0 }).to_vec()
}

fn default_n_grid() -> Vec<u64> {
    vec![8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384]
}

/// Active-user growth with the population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KRule {
    /// `k = ⌈ℓ^{1/d}⌉`.
    Root { d: f64 },
    /// `k = c ℓ`.
    Fraction { c: f64 },
}

impl KRule {
    pub fn label(&self) -> String {
        match self {
            KRule::Root { d } => format!("ell^(1/{d})"),
            KRule::Fraction { c } if *c == 1.0 => "ell".to_owned(),
            KRule::Fraction { c } => format!("{c}*ell"),
        }
    }

    pub fn eval(&self, ell: u64) -> f64 {
        match self {
            KRule::Root { d } => (ell as f64).powf(1.0 / d).ceil(),
            KRule::Fraction { c } => c * ell as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure2Params {
    #[serde(default = "ten")]
    pub p: f64,
    #[serde(default = "default_k_rules")]
    pub k_rules: Vec<KRule>,
    #[serde(default = "default_ell_grid")]
    pub ell_grid: Vec<u64>,
}

fn default_k_rules() -> Vec<KRule> {
    vec![KRule::Root { d: 2.0 }, KRule::Root { d: 3.0 }, KRule::Fraction { c: 1.0 }]
}

fn default_ell_grid() -> Vec<u64> {
    (1..=12).map(|e| 10u64.pow(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure4Params {
    #[serde(default = "milli")]
    pub eps: f64,
    #[serde(default = "default_a_list")]
    pub a_list: Vec<f64>,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
}

fn milli() -> f64 {
    1e-3
}

fn default_a_list() -> Vec<f64> {
    vec![0.01, 0.1, 0.25]
}

/// 1.001, then 1.5 through 10⁵ on a 1-2-5 ladder.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut grid = vec![1.001, 1.5];
    for decade in 0..5 {
        let scale = 10f64.powi(decade);
        grid.extend([2.0 * scale, 5.0 * scale, 10.0 * scale]);
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Capacity(CapacityParams),
    IdentCost(IdentCostParams),
    Exponent(ExponentParams),
    Simulate(SimulateParams),
    SuccDecode(SuccDecodeParams),
    Figure1(Figure1Params),
    Figure2(Figure2Params),
    Figure4(Figure4Params),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub params: Params,
    pub trials: u64,
    pub seed: u64,
    pub output: OutputSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    #[serde(default)]
    params: Option<serde_json::Value>,
    #[serde(default)]
    trials: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output: Option<OutputSpec>,
}

fn decode<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_owned() } else { format!("{prefix}.{inner}") };
        LabError::config(path, e.into_inner().to_string())
    })
}

fn check(ok: bool, path: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::config(path, message))
    }
}

impl Params {
    /// Built-in parameters used when a command runs without a configuration file.
    pub fn example(kind: Kind) -> Self {
        match kind {
            Kind::Capacity => Params::Capacity(CapacityParams { n: 100, ell: 300, k: 25.0, p: 10.0, eps: None, bounded: None }),
            Kind::IdentCost => Params::IdentCost(IdentCostParams { ell: 1_000_000, k: 1000.0, p: 10.0 }),
            Kind::Exponent => Params::Exponent(ExponentParams::RandomCoding {
                n: 512,
                k: 64,
                eps: 0.1,
                p_prime: 9.0,
                rho_steps: default_rho_steps(),
            }),
            Kind::Simulate => Params::Simulate(SimulateParams {
                n: 96,
                ell: 24,
                m: 2,
                alpha: 0.25,
                p: 10.0,
                eps: Some(0.1),
                n0: None,
                n0_rule: Some(N0Rule::Fraction),
                strict_power: false,
                detector: None,
                subset_limit: None,
                tuple_cap: None,
                noise_sd: None,
                codebooks: None,
            }),
            Kind::SuccDecode => Params::SuccDecode(SuccDecodeParams { n: 10_000, k: 2500.0, p: 10.0, eps: 1e-3, lam: 1000.0, d1: 1.0, d2: 1.0 }),
            Kind::Figure1 => Params::Figure1(decode(serde_json::json!({}), "params").expect("defaults are valid")),
            Kind::Figure2 => Params::Figure2(decode(serde_json::json!({}), "params").expect("defaults are valid")),
            Kind::Figure4 => Params::Figure4(decode(serde_json::json!({}), "params").expect("defaults are valid")),
        }
    }

    fn decode(kind: Kind, value: Option<serde_json::Value>) -> Result<Self> {
        let value = match value {
            Some(v) => v,
            None if matches!(kind, Kind::Figure1 | Kind::Figure2 | Kind::Figure4) => serde_json::json!({}),
            None => return Err(LabError::config("params", format!("required for kind `{}`", kind.as_str()))),
        };
        let p = "params";
        Ok(match kind {
            Kind::Capacity => Params::Capacity(decode(value, p)?),
            Kind::IdentCost => Params::IdentCost(decode(value, p)?),
            Kind::Exponent => Params::Exponent(decode(value, p)?),
            Kind::Simulate => Params::Simulate(decode(value, p)?),
            Kind::SuccDecode => Params::SuccDecode(decode(value, p)?),
            Kind::Figure1 => Params::Figure1(decode(value, p)?),
            Kind::Figure2 => Params::Figure2(decode(value, p)?),
            Kind::Figure4 => Params::Figure4(decode(value, p)?),
        })
    }

    fn to_value(&self) -> serde_json::Value {
        let v = match self {
            Params::Capacity(x) => serde_json::to_value(x),
            Params::IdentCost(x) => serde_json::to_value(x),
            Params::Exponent(x) => serde_json::to_value(x),
            Params::Simulate(x) => serde_json::to_value(x),
            Params::SuccDecode(x) => serde_json::to_value(x),
            Params::Figure1(x) => serde_json::to_value(x),
            Params::Figure2(x) => serde_json::to_value(x),
            Params::Figure4(x) => serde_json::to_value(x),
        };
        v.expect("parameter records always serialize")
    }

    pub fn kind(&self) -> Kind {
        match self {
            Params::Capacity(_) => Kind::Capacity,
            Params::IdentCost(_) => Kind::IdentCost,
            Params::Exponent(_) => Kind::Exponent,
            Params::Simulate(_) => Kind::Simulate,
            Params::SuccDecode(_) => Kind::SuccDecode,
            Params::Figure1(_) => Kind::Figure1,
            Params::Figure2(_) => Kind::Figure2,
            Params::Figure4(_) => Kind::Figure4,
        }
    }

    /// Fills defaults and checks value ranges that serde cannot express.
    pub fn normalize(&mut self) -> Result<()> {
        match self {
            Params::Capacity(c) => {
                check(c.n > 0, "params.n", "must be positive")?;
                check(c.ell > 0, "params.ell", "must be positive")?;
                check(c.k > 0.0 && c.k <= c.ell as f64, "params.k", "must satisfy 0 < k <= ell")?;
                check(c.p > 0.0 && c.p.is_finite(), "params.p", "must be positive")?;
                let eps = *c.eps.get_or_insert(default_eps(c.p));
                check(eps > 0.0 && eps < c.p.min(1.0), "params.eps", "must lie in (0, min(1, p))")?;
            }
            Params::IdentCost(c) => {
                check(c.ell > 0, "params.ell", "must be positive")?;
                check(c.k > 0.0 && c.k <= c.ell as f64, "params.k", "must satisfy 0 < k <= ell")?;
                check(c.p > 0.0 && c.p.is_finite(), "params.p", "must be positive")?;
            }
            Params::Exponent(e) => match e {
                ExponentParams::Kernel { lambda, rho, p_prime, samples, .. } => {
                    check(*lambda >= 0.0 && lambda.is_finite(), "params.lambda", "must be nonnegative")?;
                    check((0.0..=1.0).contains(rho), "params.rho", "must lie in [0, 1]")?;
                    check(*lambda * *rho <= 1.0 + 1e-12, "params.lambda", "lambda * rho must not exceed 1")?;
                    check(*p_prime > 0.0, "params.p_prime", "must be positive")?;
                    check(*samples == 0 || *samples >= 10_000, "params.samples", "must be 0 or at least 10000")?;
                }
                ExponentParams::Identification { n0, k, a_star, ell, p_prime, lambda_max, lambda_steps, rho_steps } => {
                    check(*n0 > 0.0, "params.n0", "must be positive")?;
                    check(*k > 0.0 && *k <= *ell as f64, "params.k", "must satisfy 0 < k <= ell")?;
                    check(*a_star >= 1 && a_star <= ell, "params.a_star", "must satisfy 1 <= a_star <= ell")?;
                    check(*p_prime > 0.0, "params.p_prime", "must be positive")?;
                    check(*lambda_max > 0.0, "params.lambda_max", "must be positive")?;
                    check(*lambda_steps >= 8, "params.lambda_steps", "must be at least 8")?;
                    check(*rho_steps >= 8, "params.rho_steps", "must be at least 8")?;
                }
                ExponentParams::RandomCoding { n, k, eps, p_prime, rho_steps } => {
                    check(*n > 0, "params.n", "must be positive")?;
                    check(*k > 0, "params.k", "must be positive")?;
                    check(*eps > 0.0 && *eps < 1.0, "params.eps", "must lie in (0, 1)")?;
                    check(*p_prime > 0.0, "params.p_prime", "must be positive")?;
                    check(*rho_steps >= 2, "params.rho_steps", "must be at least 2")?;
                }
            },
            Params::Simulate(s) => normalize_simulate(s)?,
            Params::SuccDecode(s) => {
                check(s.n > 0, "params.n", "must be positive")?;
                check(s.k >= 1.0, "params.k", "must be at least 1")?;
                check(s.p > 0.0, "params.p", "must be positive")?;
                check(s.eps > 0.0 && s.eps < 1.0, "params.eps", "must lie in (0, 1)")?;
                check(s.lam > 1.0, "params.lam", "must exceed 1")?;
                check(s.d1 > 0.0 && s.d2 > 0.0, "params.d1", "universal constants must be positive")?;
            }
            Params::Figure1(f) => {
                check(f.p > 0.0, "params.p", "must be positive")?;
                check(f.k_ratio > 0.0, "params.k_ratio", "must be positive")?;
                check(!f.n_grid.is_empty() && f.n_grid.iter().all(|&n| n > 0), "params.n_grid", "must be nonempty and positive")?;
                check(!f.ell_rules.is_empty(), "params.ell_rules", "must be nonempty")?;
                for (i, r) in f.ell_rules.iter().enumerate() {
                    check(r.coef > 0.0 && r.power >= 0.0, &format!("params.ell_rules[{i}]"), "need coef > 0 and power >= 0")?;
                }
            }
            Params::Figure2(f) => {
                check(f.p > 0.0, "params.p", "must be positive")?;
                check(!f.ell_grid.is_empty() && f.ell_grid.iter().all(|&l| l > 0), "params.ell_grid", "must be nonempty and positive")?;
                check(!f.k_rules.is_empty(), "params.k_rules", "must be nonempty")?;
                for (i, r) in f.k_rules.iter().enumerate() {
                    let ok = match r {
                        KRule::Root { d } => *d >= 1.0,
                        KRule::Fraction { c } => *c > 0.0 && *c <= 1.0,
                    };
                    check(ok, &format!("params.k_rules[{i}]"), "need d >= 1 or 0 < c <= 1")?;
                }
            }
            Params::Figure4(f) => {
                check(f.eps > 0.0 && f.eps < 1.0, "params.eps", "must lie in (0, 1)")?;
                check(!f.a_list.is_empty() && f.a_list.iter().all(|&a| a > 0.0), "params.a_list", "must be nonempty and positive")?;
                check(
                    !f.lambda_grid.is_empty() && f.lambda_grid.iter().all(|&l| l > 1.0 && l.is_finite()),
                    "params.lambda_grid",
                    "every lambda must exceed 1",
                )?;
            }
        }
        Ok(())
    }
}

fn normalize_simulate(s: &mut SimulateParams) -> Result<()> {
    check(s.n > 0, "params.n", "must be positive")?;
    check(s.ell > 0, "params.ell", "must be positive")?;
    check(s.m > 0, "params.m", "must be positive")?;
    check((0.0..=1.0).contains(&s.alpha), "params.alpha", "must lie in [0, 1]")?;
    check(s.p > 0.0 && s.p.is_finite(), "params.p", "must be positive")?;
    let eps = *s.eps.get_or_insert(default_eps(s.p));
    check(eps > 0.0 && eps < s.p.min(1.0), "params.eps", "must lie in (0, min(1, p))")?;
    match (s.n0_rule, s.n0) {
        (None, Some(_)) => s.n0_rule = Some(N0Rule::Fixed),
        (None, None) => {
            return Err(LabError::config("params.n0_rule", "required: `fraction`, `overhead`, or `fixed` with `n0`"));
        }
        (Some(N0Rule::Fixed), None) => return Err(LabError::config("params.n0", "required by n0_rule `fixed`")),
        (Some(N0Rule::Fraction | N0Rule::Overhead), Some(_)) => {
            return Err(LabError::config("params.n0", "only allowed with n0_rule `fixed`"));
        }
        _ => {}
    }
    s.detector.get_or_insert(DetectorChoice::Auto);
    let limit = *s.subset_limit.get_or_insert(mnac_core::detect::DEFAULT_SUBSET_LIMIT);
    check(limit >= 1.0, "params.subset_limit", "must be at least 1")?;
    let cap = *s.tuple_cap.get_or_insert(mnac_core::detect::DEFAULT_TUPLE_CAP);
    check(cap >= 1, "params.tuple_cap", "must be at least 1")?;
    let sd = *s.noise_sd.get_or_insert(1.0);
    check(sd >= 0.0 && sd.is_finite(), "params.noise_sd", "must be nonnegative")?;
    s.codebooks.get_or_insert(CodebookPolicy::PerTrial);
    let n0 = s.resolved_n0();
    check(n0 <= s.n, "params.n0", &format!("signature length {n0} exceeds n = {}", s.n))?;
    Ok(())
}

impl SimulateParams {
    /// Signature length under the configured rule (call after normalization).
    pub fn resolved_n0(&self) -> usize {
        let eps = self.eps.unwrap_or(default_eps(self.p));
        match self.n0_rule {
            Some(N0Rule::Fixed) | None => self.n0.unwrap_or(0),
            Some(N0Rule::Fraction) => (eps * self.n as f64).ceil() as usize,
            Some(N0Rule::Overhead) => {
                let k = self.alpha * self.ell as f64;
                if k <= 0.0 {
                    return 0;
                }
                let spec = mnac_core::capacity::ScalingSpec::new(self.n as u64, self.ell as u64, k, self.p)
                    .expect("validated parameters");
                let cost = mnac_core::capacity::overhead_factor(&spec) * self.n as f64;
                ((1.0 + eps) * cost).ceil() as usize
            }
        }
    }

    pub fn sim_config(&self, seed: u64) -> mnac_core::channel::SimConfig {
        mnac_core::channel::SimConfig {
            n: self.n,
            n0: self.resolved_n0(),
            ell: self.ell,
            m: self.m,
            alpha: self.alpha,
            p: self.p,
            eps: self.eps.unwrap_or(default_eps(self.p)),
            seed,
            strict_power: self.strict_power,
        }
    }
}

impl ExperimentConfig {
    /// A validated configuration for `kind` with the built-in parameters.
    pub fn example(kind: Kind) -> Self {
        let mut cfg = Self {
            kind,
            params: Params::example(kind),
            trials: DEFAULT_TRIALS,
            seed: 0,
            output: OutputSpec::default(),
        };
        cfg.params.normalize().expect("built-in parameters are valid");
        cfg
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::config(path, e.into_inner().to_string())
        })?;
        let mut params = Params::decode(raw.kind, raw.params)?;
        params.normalize()?;
        let cfg = Self {
            kind: raw.kind,
            params,
            trials: raw.trials.unwrap_or(DEFAULT_TRIALS),
            seed: raw.seed.unwrap_or(0),
            output: raw.output.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse_str(&text)
    }

    /// Checks that do not depend on the parameter record.
    pub fn validate(&self) -> Result<()> {
        check(self.kind != Kind::Simulate || self.trials > 0, "trials", "must be positive for kind `simulate`")
    }

    /// The validated record as JSON, defaults included.
    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            kind: self.kind,
            params: Some(self.params.to_value()),
            trials: Some(self.trials),
            seed: Some(self.seed),
            output: Some(self.output.clone()),
        };
        serde_json::to_string_pretty(&raw).expect("configuration always serializes")
    }
}
