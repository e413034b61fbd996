//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::time::{Duration, Instant};

use qla_core::asymptotics::{asymptotic_loss, gim1_loss};
use qla_core::chains::{
    build_embedded_matrix, exact_loss, gim1_loss_dual, gim1_loss_exact, invariant_measure_infinite,
    invariant_vector_finite, loss_limit, loss_probability_exact, solve_finite,
};
use qla_core::simulator::simulate;
use qla_core::{Distribution, HighPrecision, QueueModel, Real, Regime, SimConfig};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn exp(rate: f64) -> Distribution {
    Distribution::exponential(rate).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn hp_loss(m: &QueueModel, n: usize) -> f64 {
    exact_loss::<HighPrecision>(m, n).unwrap().to_f64()
}

// Exact losses for all of `ns` from one kernel, in wide arithmetic.
fn hp_losses(m: &QueueModel, ns: &[usize]) -> Vec<f64> {
    let k = m.kernel::<HighPrecision>(*ns.iter().max().unwrap()).unwrap();
    ns.par_iter().map(|&n| loss_probability_exact(m, &k, &solve_finite(n, &k).unwrap()).to_f64()).collect()
}

fn c1() -> Outcome {
    let m = QueueModel::standard(0.5, exp(1.0)).unwrap();
    let rho: f64 = 0.5;
    let mut worst: f64 = 0.0;
    for n in 2..=30 {
        let want = (1.0 - rho) * rho.powi(n) / (1.0 - rho.powi(n + 1));
        worst = worst.max(rel(exact_loss::<f64>(&m, n as usize).unwrap(), want));
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max relative error {worst:.2e} over N = 2..30") }
}

fn c2() -> Outcome {
    let instances = [
        ("rho<1", QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap()),
        ("rho=1", QueueModel::new(1.0, Distribution::deterministic(1.0).unwrap(), exp(1.0)).unwrap()),
        ("rho>1", QueueModel::new(2.0, exp(1.0), exp(1.0)).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    for (_, m) in &instances {
        let k = m.kernel::<HighPrecision>(40).unwrap();
        let measure = invariant_measure_infinite(m, &k, 40).unwrap();
        let errs: Vec<f64> = (2..=40usize)
            .into_par_iter()
            .map(|n| {
                // Dense GTH on P(N) against the forward recursion.
                let gth = invariant_vector_finite(&build_embedded_matrix(n, &k).unwrap());
                let s = measure.partial_sum(n);
                (0..n)
                    .map(|i| rel((gth.values[i].clone() * s.clone()).to_f64(), measure.values[i].to_f64()))
                    .fold(0.0, f64::max)
            })
            .collect();
        worst = errs.into_iter().fold(worst, f64::max);
    }
    Outcome { pass: worst <= 1e-9, detail: format!("max relative error {worst:.2e}, three instances, N <= 40") }
}

fn c3() -> Outcome {
    let m = QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap();
    let est = asymptotic_loss(&m).unwrap();
    let scaled = hp_loss(&m, 40) * 2f64.powi(40);
    let r = scaled / (2.0 / 3.0);
    Outcome {
        pass: est.regime == Regime::SubcritGeom && (r - 1.0).abs() <= 0.01,
        detail: format!("{} constant {:.6}; P(40)*2^40 = {scaled:.6}, ratio to 2/3 = {r:.6}", est.regime, est.constant),
    }
}

fn c4() -> Outcome {
    let m = QueueModel::new(1.0, exp(2.0), Distribution::erlang(2, 0.5).unwrap()).unwrap();
    let ns: Vec<usize> = (10..=60).step_by(10).collect();
    let ratios: Vec<f64> =
        hp_losses(&m, &ns).iter().zip(&ns).map(|(p, &n)| p * 1.5f64.powi(n as i32) / n as f64 * 6.0).collect();
    let last = *ratios.last().unwrap();
    let approaching = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    Outcome {
        pass: (last - 1.0).abs() <= 0.03 && approaching,
        detail: format!("ratios N=10..60: [{}]; monotone approach: {approaching}", shown.join(", ")),
    }
}

fn c5() -> Outcome {
    let m = QueueModel::new(1.0, Distribution::deterministic(1.0).unwrap(), exp(1.0)).unwrap();
    let est = asymptotic_loss(&m).unwrap();
    let v = 200.0 * hp_loss(&m, 200);
    Outcome {
        pass: rel(v, 0.5) <= 0.02,
        detail: format!("{} constant {:.6}; 200*P(200) = {v:.6}", est.regime, est.constant),
    }
}

fn c6() -> Outcome {
    let m = QueueModel::new(2.0, exp(1.0), exp(1.0)).unwrap();
    let est = asymptotic_loss(&m).unwrap();
    let excess = exact_loss::<HighPrecision>(&m, 40).unwrap() - loss_limit::<HighPrecision>(&m);
    let v = excess.to_f64() * 2f64.powi(40);
    Outcome {
        pass: est.regime == Regime::Supercrit && rel(v, 0.5) <= 0.01,
        detail: format!("{} offset {} constant {:.6}; (P(40)-1/2)*2^40 = {v:.6}", est.regime, est.offset, est.constant),
    }
}

// "Increasing toward `target`" with a final gap below `tol` and the gap
// shrinking at every step.
fn trend(values: &[f64], target: f64, tol: f64) -> (bool, String) {
    let increasing = values.windows(2).all(|w| w[1] > w[0]) && values.iter().all(|&v| v < target);
    let gaps: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
    let final_gap = gaps.last().unwrap() / target;
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    (
        increasing && shrinking && final_gap < tol,
        format!(
            "target {target:.6}; values [{}]; increasing below target: {increasing}, gap shrinking: {shrinking}, final gap {:.1}%",
            shown.join(", "),
            100.0 * final_gap
        ),
    )
}

fn c7() -> Outcome {
    let m = QueueModel::new(0.5, Distribution::pareto(2.5, 0.6).unwrap(), exp(1.0)).unwrap();
    let est = asymptotic_loss(&m).unwrap();
    let ns: Vec<usize> = (100..=1000).step_by(100).collect();
    let values: Vec<f64> = hp_losses(&m, &ns).iter().zip(&ns).map(|(p, &n)| p * (n as f64).powf(1.5)).collect();
    let (pass, detail) = trend(&values, est.constant, 0.25);
    Outcome { pass: pass && est.regime == Regime::SubcritHeavyS, detail: format!("{}; {detail}", est.regime) }
}

fn c8() -> Outcome {
    let a = exp(0.5);
    let est = gim1_loss(&a, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=20 {
        let chain = gim1_loss_exact::<HighPrecision>(&a, 1.0, n).unwrap().to_f64();
        let dual = gim1_loss_dual::<HighPrecision>(&a, 1.0, n).unwrap().to_f64();
        worst = worst.max((chain - dual).abs());
    }
    let params = (est.rate - 0.5).abs() <= 1e-9 && (est.constant - 0.5).abs() <= 1e-9;
    Outcome {
        pass: params && worst <= 1e-9,
        detail: format!(
            "{} rate {:.12} constant {:.12}; max |P~(N) - pi^_0(N+1)| = {worst:.2e} for N <= 20",
            est.regime, est.rate, est.constant
        ),
    }
}

fn c9() -> Outcome {
    let instances = [
        ("instance 3", QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap()),
        ("instance 6", QueueModel::new(2.0, exp(1.0), exp(1.0)).unwrap()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m) in instances {
        let exact = hp_loss(&m, 10);
        let covered = (0..100u64)
            .into_par_iter()
            .filter(|&seed| simulate(&SimConfig::new(m.clone(), 10).with_seed(seed)).unwrap().contains(exact))
            .count();
        pass &= covered >= 90;
        parts.push(format!("{name}: exact {exact:.6e}, {covered}/100 intervals cover"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn c10() -> Outcome {
    let m = QueueModel::new(1.0, Distribution::pareto(2.0, 0.5).unwrap(), exp(1.0)).unwrap();
    let est = asymptotic_loss(&m).unwrap();
    let ns: Vec<usize> = (200..=2000).step_by(200).collect();
    let values: Vec<f64> = hp_losses(&m, &ns).iter().zip(&ns).map(|(p, &n)| p * n as f64 / (n as f64).ln()).collect();
    let (pass, detail) = trend(&values, 0.25, 0.40);
    Outcome {
        pass: pass && est.regime == Regime::CritLog && (est.constant - 0.25).abs() < 1e-12,
        detail: format!("{} constant {}; {detail}", est.regime, est.constant),
    }
}

#[test]
fn acceptance() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "birth-death oracle", Duration::from_secs(1), c1),
        (2, "proportionality, GTH vs recursion", Duration::from_secs(10), c2),
        (3, "geometric regime", Duration::from_secs(30), c3),
        (4, "non-geometric regime", Duration::from_secs(60), c4),
        (5, "critical regime, finite variance", Duration::from_secs(60), c5),
        (6, "supercritical regime", Duration::from_secs(30), c6),
        (7, "heavy service tail, trend", Duration::from_secs(600), c7),
        (8, "GI/M/1 duality", Duration::from_secs(5), c8),
        (9, "simulation coverage", Duration::from_secs(600), c9),
        (10, "critical log regime, trend", Duration::from_secs(900), c10),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= limit;
        println!(
            "{} criterion {id:>2} ({name}): {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
