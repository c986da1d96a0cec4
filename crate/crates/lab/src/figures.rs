//! Data behind the capacity, identification-cost and successive-decoding plots.

use mnac_core::capacity::{identification_cost, symmetric_capacity, ScalingSpec};
use mnac_core::exponents::succ_decode_asymptotic;

use crate::config::{Figure1Params, Figure2Params, Figure4Params};
use crate::error::{LabError, Result};
use crate::output::{Cell, Table};

/// Largest population handled exactly as an integer.
const MAX_ELL: f64 = 9.0e15;

fn population(ell: f64, what: &str) -> Result<u64> {
    if !(1.0..=MAX_ELL).contains(&ell) {
        return Err(LabError::config(what, format!("population {ell} outside [1, {MAX_ELL}]")));
    }
    Ok(ell as u64)
}

/// Message-length capacity against blocklength, one curve per population law.
///
/// Zero-capacity points are reported as `b = 0` with their regime.
pub fn figure1_data(params: &Figure1Params) -> Result<Table> {
    let mut table = Table::new(&["n", "ell_rule", "ell", "k", "b1", "theta", "b", "b_per_n", "regime"]);
    for rule in &params.ell_rules {
        for &n in &params.n_grid {
            let ell = population(rule.eval(n), "params.ell_rules")?;
            let k = params.k_ratio * n as f64;
            let spec = ScalingSpec::new(n, ell, k, params.p)
                .map_err(|e| LabError::config("params.ell_rules", format!("n = {n}: {e}")))?;
            let point = symmetric_capacity(&spec, None);
            table.push(vec![
                n.into(),
                rule.label().into(),
                ell.into(),
                k.into(),
                point.b1.into(),
                point.theta.into(),
                point.b.into(),
                (point.b / n as f64).into(),
                point.regime.as_str().into(),
            ]);
        }
    }
    Ok(table)
}

/// Minimum identification cost against population, one curve per activity law.
pub fn figure2_data(params: &Figure2Params) -> Result<Table> {
    let mut table = Table::new(&["ell", "k_rule", "k", "n_ell", "n_ell_per_k"]);
    for rule in &params.k_rules {
        for &ell in &params.ell_grid {
            let k = rule.eval(ell).min(ell as f64);
            let cost = identification_cost(ell, k, params.p)
                .map_err(|e| LabError::config("params.k_rules", format!("ell = {ell}: {e}")))?;
            table.push(vec![ell.into(), rule.label().into(), k.into(), cost.into(), (cost / k).into()]);
        }
    }
    Ok(table)
}

/// Asymptotic lower bound on the successive-decoding error over `(a, λ)`.
pub fn figure4_data(params: &Figure4Params) -> Result<Table> {
    let mut table = Table::new(&["a", "lambda", "bound"]);
    for &a in &params.a_list {
        for &lambda in &params.lambda_grid {
            let bound = succ_decode_asymptotic(a, params.eps, lambda)?;
            table.push(vec![Cell::Real(a), Cell::Real(lambda), Cell::Real(bound)]);
        }
    }
    Ok(table)
}
