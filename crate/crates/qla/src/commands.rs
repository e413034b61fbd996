//! The subcommands. Each returns a [`Table`]; rows of a sweep are computed
//! in parallel and kept in input order.

use qla_core::asymptotics::{asymptotic_loss, gim1_loss};
use qla_core::chains::{
    gim1_arrival_distribution, gim1_loss_limit, loss_limit, loss_probability_exact, solve_finite, tv_distance,
};
use qla_core::simulator::{merge, simulate as simulate_once};
use qla_core::{AsymptoticEstimate, CountKernel, LossEstimate, QueueModel, Real, SimConfig};
use rayon::prelude::*;

use crate::output::{num, Table};
use crate::{with_precision, CliError, Model, Precision, SimArgs};

struct ExactRow {
    pi0: f64,
    loss: f64,
    tv: Option<f64>,
    /// `P_loss(N) - lim P_loss`, formed before rounding to `f64`.
    excess: f64,
}

fn mg1_rows<R: Real>(model: &QueueModel, ns: &[usize], tv: Option<usize>) -> Result<Vec<ExactRow>, CliError> {
    let top = ns.iter().copied().max().unwrap_or(1).max(1);
    let kernel: CountKernel<R> = model.kernel(top + tv.unwrap_or(0))?;
    let limit = loss_limit::<R>(model);
    ns.par_iter()
        .map(|&n| {
            let pi = solve_finite(n, &kernel)?;
            let loss = loss_probability_exact(model, &kernel, &pi);
            let tv = match tv {
                Some(tail) => Some(tv_distance(model, &kernel, n, tail)?.distance.to_f64()),
                None => None,
            };
            Ok(ExactRow {
                pi0: pi.pi0().to_f64(),
                excess: (loss.clone() - limit.clone()).to_f64(),
                loss: loss.to_f64(),
                tv,
            })
        })
        .collect()
}

fn gim1_rows<R: Real>(a: &qla_core::Distribution, mu: f64, ns: &[usize]) -> Result<Vec<ExactRow>, CliError> {
    let limit = gim1_loss_limit::<R>(a, mu);
    ns.par_iter()
        .map(|&n| {
            let d = gim1_arrival_distribution::<R>(a, mu, n)?;
            let loss = d.values[n].clone();
            Ok(ExactRow {
                pi0: d.pi0().to_f64(),
                excess: (loss.clone() - limit.clone()).to_f64(),
                loss: loss.to_f64(),
                tv: None,
            })
        })
        .collect()
}

fn exact_rows(model: &Model, ns: &[usize], tv: Option<usize>, p: Precision) -> Result<Vec<ExactRow>, CliError> {
    match model {
        Model::Mg1(m) => with_precision!(p, mg1_rows(m, ns, tv)),
        Model::Gim1 { interarrival, mu } => {
            if tv.is_some() {
                return Err(CliError::Config("--tv is only defined for M/G/1/N models".into()));
            }
            with_precision!(p, gim1_rows(interarrival, *mu, ns))
        }
    }
}

fn estimate(model: &Model) -> Result<AsymptoticEstimate, CliError> {
    Ok(match model {
        Model::Mg1(m) => asymptotic_loss(m)?,
        Model::Gim1 { interarrival, mu } => gim1_loss(interarrival, *mu)?,
    })
}

// The offset of every regime equals the limit of the loss, so this is
// `(P_loss(N) - offset) / (approximation - offset)`.
fn ratio(row: &ExactRow, est: &AsymptoticEstimate, n: usize) -> f64 {
    row.excess / est.correction(n as f64)
}

/// Columns `N, pi0N, ploss_exact` and, with `--tv`, `tv_distance`.
pub fn exact(model: &Model, ns: &[usize], tv: Option<usize>, p: Precision) -> Result<Table, CliError> {
    let rows = exact_rows(model, ns, tv, p)?;
    let mut headers = vec!["N", "pi0N", "ploss_exact"];
    if tv.is_some() {
        headers.push("tv_distance");
    }
    let mut t = Table::new(headers);
    for (n, r) in ns.iter().zip(rows) {
        let mut row = vec![n.to_string(), num(r.pi0), num(r.loss)];
        if let Some(d) = r.tv {
            row.push(num(d));
        }
        t.push(row);
    }
    Ok(t)
}

/// The regime, its parameters, the approximation and the ratio
/// `(P_loss(N) - offset) / (approximation - offset)`.
pub fn asymptotic(model: &Model, ns: &[usize], p: Precision) -> Result<Table, CliError> {
    let est = estimate(model)?;
    let rows = exact_rows(model, ns, None, p)?;
    let mut t = Table::new(vec![
        "N",
        "regime",
        "offset",
        "rate",
        "poly_order",
        "constant",
        "ploss_asym",
        "ploss_exact",
        "ratio",
    ]);
    for (&n, r) in ns.iter().zip(&rows) {
        t.push(vec![
            n.to_string(),
            est.regime.tag().to_string(),
            num(est.offset),
            num(est.rate),
            num(est.poly_order),
            num(est.constant),
            num(est.evaluate(n as f64)),
            num(r.loss),
            num(ratio(r, &est, n)),
        ]);
    }
    Ok(t)
}

fn run_simulation(model: &Model, n: usize, sim: &SimArgs) -> Result<LossEstimate, CliError> {
    let Model::Mg1(m) = model else {
        return Err(CliError::Config("simulation is only available for M/G/1/N models with vacations".into()));
    };
    if sim.replications == 0 {
        return Err(CliError::Config("need at least one replication".into()));
    }
    let base = SimConfig {
        warmup_arrivals: sim.warmup,
        measured_arrivals: sim.arrivals,
        batches: sim.batches,
        ..SimConfig::new(m.clone(), n)
    };
    base.validate()?;
    let runs: Vec<LossEstimate> = (0..sim.replications)
        .into_par_iter()
        .map(|i| simulate_once(&base.clone().with_seed(sim.seed.wrapping_add(i))))
        .collect::<Result<_, _>>()?;
    Ok(merge(&runs).expect("at least one replication"))
}

/// Columns `N, point, half_width, arrivals, blocked, seed`.
pub fn simulate(model: &Model, n: usize, sim: &SimArgs) -> Result<Table, CliError> {
    let e = run_simulation(model, n, sim)?;
    let mut t = Table::new(vec!["N", "point", "half_width", "arrivals", "blocked", "seed"]);
    t.push(vec![
        n.to_string(),
        num(e.point),
        num(e.half_width_95),
        e.arrivals_seen.to_string(),
        e.blocked.to_string(),
        e.seed.to_string(),
    ]);
    Ok(t)
}

/// Exact loss, asymptotic value, their ratio, the regime and optionally a
/// simulated estimate, per capacity.
pub fn compare(model: &Model, ns: &[usize], p: Precision, sim: Option<&SimArgs>) -> Result<Table, CliError> {
    let est = estimate(model)?;
    let rows = exact_rows(model, ns, None, p)?;
    let sims = match sim {
        Some(s) => Some(ns.iter().map(|&n| run_simulation(model, n, s)).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    let mut headers = vec!["N", "regime", "ploss_exact", "ploss_asym", "ratio"];
    if sims.is_some() {
        headers.extend(["sim_point", "sim_half_width"]);
    }
    let mut t = Table::new(headers);
    for (i, (&n, r)) in ns.iter().zip(&rows).enumerate() {
        let mut row = vec![
            n.to_string(),
            est.regime.tag().to_string(),
            num(r.loss),
            num(est.evaluate(n as f64)),
            num(ratio(r, &est, n)),
        ];
        if let Some(s) = &sims {
            row.push(num(s[i].point));
            row.push(num(s[i].half_width_95));
        }
        t.push(row);
    }
    Ok(t)
}

fn kernel_rows<R: Real>(model: &QueueModel, n_max: usize) -> Result<Table, CliError> {
    let k: CountKernel<R> = model.kernel(n_max)?;
    let mut t = Table::new(vec!["j", "a_j", "nu_j", "b_j"]);
    for j in 0..=n_max {
        let b = k.b.get(j).map(|x| num(x.to_f64())).unwrap_or_default();
        t.push(vec![j.to_string(), num(k.a[j].to_f64()), num(k.nu[j].to_f64()), b]);
    }
    Ok(t)
}

/// Columns `j, a_j, nu_j, b_j` for `j = 0..=n_max`; `b_{n_max}` is left
/// empty because the chain never uses it.
pub fn kernel_dump(model: &Model, n_max: usize, p: Precision) -> Result<Table, CliError> {
    let m = match model {
        Model::Mg1(m) => m.clone(),
        Model::Gim1 { interarrival, mu } => QueueModel::standard(*mu, interarrival.clone())?,
    };
    with_precision!(p, kernel_rows(&m, n_max))
}
