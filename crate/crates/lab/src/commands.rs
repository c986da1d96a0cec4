//! Turns a validated configuration into a result table.

use mnac_core::capacity::{
    identification_cost, simplified_capacity, symmetric_capacity, AsymptoticHint, ScalingSpec,
};
use mnac_core::exponents::{
    identification_error_bound, kernel_closed_form, kernel_mc_oracle, log_kernel, random_coding_exponent,
    succ_decode_asymptotic, succ_decode_finite_with_moment, third_moment, KernelParams, LambdaRhoGrid,
    SuccDecodeParams as CoreSuccParams,
};

use crate::config::{
    BoundedHint, CapacityParams, ExperimentConfig, ExponentParams, IdentCostParams, Params, SimulateParams,
    SuccDecodeParams,
};
use crate::error::Result;
use crate::figures::{figure1_data, figure2_data, figure4_data};
use crate::output::{Cell, Table};
use crate::trials::run_trials;

pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Table> {
    match &cfg.params {
        Params::Capacity(p) => capacity(p),
        Params::IdentCost(p) => ident_cost(p),
        Params::Exponent(p) => exponent(p, cfg.seed),
        Params::Simulate(p) => simulate(p, cfg.trials, cfg.seed, workers),
        Params::SuccDecode(p) => succ_decode(p),
        Params::Figure1(p) => figure1_data(p),
        Params::Figure2(p) => figure2_data(p),
        Params::Figure4(p) => figure4_data(p),
    }
}

fn capacity(p: &CapacityParams) -> Result<Table> {
    let spec = ScalingSpec::new(p.n, p.ell, p.k, p.p)?;
    let hint = p.bounded.map(|b| AsymptoticHint::BoundedPopulation { alpha_vanishes: b == BoundedHint::Idle });
    let point = symmetric_capacity(&spec, hint);
    let eps = p.eps.unwrap_or_else(|| crate::config::default_eps(p.p));
    let backed_off = symmetric_capacity(&ScalingSpec::new(p.n, p.ell, p.k, p.p - eps)?, hint);
    let mut t = Table::new(&[
        "n", "ell", "k", "p", "alpha", "b1", "theta", "b", "regime", "b_simplified", "eps", "b_backed_off",
    ]);
    t.push(vec![
        p.n.into(),
        p.ell.into(),
        p.k.into(),
        p.p.into(),
        spec.alpha().into(),
        point.b1.into(),
        point.theta.into(),
        point.b.into(),
        point.regime.as_str().into(),
        simplified_capacity(&spec).ok().into(),
        eps.into(),
        backed_off.b.into(),
    ]);
    Ok(t)
}

fn ident_cost(p: &IdentCostParams) -> Result<Table> {
    let cost = identification_cost(p.ell, p.k, p.p)?;
    let mut t = Table::new(&["ell", "k", "p", "n_ell", "n_ell_per_k"]);
    t.push(vec![p.ell.into(), p.k.into(), p.p.into(), cost.into(), (cost / p.k).into()]);
    Ok(t)
}

fn exponent(p: &ExponentParams, seed: u64) -> Result<Table> {
    match *p {
        ExponentParams::Kernel { w1, w2, lambda, rho, p_prime, samples } => {
            let params = KernelParams::new(w1, w2, lambda, rho, p_prime)?;
            let oracle = if samples > 0 { Some(kernel_mc_oracle(&params, samples, seed)?) } else { None };
            let mut t = Table::new(&[
                "w1", "w2", "lambda", "rho", "p_prime", "kernel", "log_kernel", "samples", "oracle", "oracle_std_err",
            ]);
            t.push(vec![
                w1.into(),
                w2.into(),
                lambda.into(),
                rho.into(),
                p_prime.into(),
                kernel_closed_form(&params).into(),
                log_kernel(&params).into(),
                samples.into(),
                oracle.map(|o| o.estimate).into(),
                oracle.map(|o| o.std_err).into(),
            ]);
            Ok(t)
        }
        ExponentParams::Identification { n0, k, a_star, ell, p_prime, lambda_max, lambda_steps, rho_steps } => {
            let ctx = mnac_core::exponents::ExponentContext::new(n0, k, a_star, ell)?;
            let grid = LambdaRhoGrid { lambda_max, lambda_steps, rho_steps };
            let bound = identification_error_bound(&ctx, p_prime, &grid)?;
            let mut t = Table::new(&["row", "w1", "w2", "lambda", "rho", "h", "term"]);
            for (&(w1, w2), cell) in &bound.per_cell {
                t.push(vec![
                    "cell".into(),
                    w1.into(),
                    w2.into(),
                    cell.lambda.into(),
                    cell.rho.into(),
                    cell.h.into(),
                    cell.term.into(),
                ]);
            }
            let blank = || [Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty];
            for (label, value) in [("overflow", bound.overflow), ("total", bound.total)] {
                let mut row = vec![Cell::from(label)];
                row.extend(blank());
                row.push(value.into());
                t.push(row);
            }
            Ok(t)
        }
        ExponentParams::RandomCoding { n, k, eps, p_prime, rho_steps } => {
            let er = random_coding_exponent(n, k, eps, p_prime, rho_steps)?;
            let quarter = 0.25 * (0.5 * p_prime).ln_1p();
            let mut t = Table::new(&[
                "n", "k", "eps", "p_prime", "message_length", "er", "argmin_gamma", "rho_one_min", "quarter_bound",
                "meets_quarter_bound",
            ]);
            t.push(vec![
                n.into(),
                k.into(),
                eps.into(),
                p_prime.into(),
                er.message_length.into(),
                er.er.into(),
                er.argmin_gamma.into(),
                er.rho_one_min().into(),
                quarter.into(),
                (er.er >= quarter).into(),
            ]);
            Ok(t)
        }
    }
}

fn simulate(p: &SimulateParams, trials: u64, seed: u64, workers: usize) -> Result<Table> {
    let stats = run_trials(p, trials, seed, workers)?;
    let cfg = p.sim_config(seed);
    let mut t = Table::new(&[
        "n", "n0", "ell", "m", "alpha", "p", "eps", "trials", "joint_errors", "error_rate", "ci_low", "ci_high",
        "miss_total", "fa_total", "msg_err_total", "power_violations", "inexact_trials",
    ]);
    t.push(vec![
        cfg.n.into(),
        cfg.n0.into(),
        cfg.ell.into(),
        cfg.m.into(),
        cfg.alpha.into(),
        cfg.p.into(),
        cfg.eps.into(),
        stats.trials.into(),
        stats.joint_errors.into(),
        stats.error_rate.into(),
        stats.ci_low.into(),
        stats.ci_high.into(),
        stats.miss_total.into(),
        stats.fa_total.into(),
        stats.msg_err_total.into(),
        stats.power_violations.into(),
        stats.inexact_trials.into(),
    ]);
    Ok(t)
}

fn succ_decode(p: &SuccDecodeParams) -> Result<Table> {
    let mut core = CoreSuccParams::new(p.n, p.k, p.p, p.eps, p.lam)?;
    core.d1 = p.d1;
    core.d2 = p.d2;
    let moment = third_moment(core.sinr(), p.n)?;
    let load = p.k / p.n as f64;
    let mut t = Table::new(&[
        "n", "k", "p", "eps", "lam", "d1", "d2", "sinr", "sinr_capacity", "variance_sum", "threshold", "t_signed",
        "t_absolute", "finite_bound", "load", "asymptotic_bound",
    ]);
    t.push(vec![
        p.n.into(),
        p.k.into(),
        p.p.into(),
        p.eps.into(),
        p.lam.into(),
        p.d1.into(),
        p.d2.into(),
        core.sinr().into(),
        core.sinr_capacity().into(),
        core.variance_sum().into(),
        core.threshold().into(),
        moment.signed.into(),
        moment.absolute.into(),
        succ_decode_finite_with_moment(&core, moment.signed)?.into(),
        load.into(),
        succ_decode_asymptotic(load, p.eps, p.lam)?.into(),
    ]);
    Ok(t)
}
