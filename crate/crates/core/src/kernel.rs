//! Arrival-count sequences `a_j` (per service), `ν_j` (per vacation) and the
//! boundary sequence `b_j` that fill the embedded transition matrices.

use alloc::vec::Vec;

use crate::distributions::{Distribution, Family};
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::real::Real;
use crate::special;

/// Default bound on `1 - Σ x_j` for [`arrival_counts_checked`].
pub const DEFAULT_MAX_DEFICIT: f64 = 1e-12;

const PARETO_TOL: f64 = 1e-13;

/// `x_j = ∫ (λt)^j e^{-λt}/j! dF(t)` for `j = 0..=n_max`.
///
/// Closed forms for every family except Pareto, whose counts come from
/// adaptive quadrature in `f64` (relative accuracy about 1e-12) and are
/// then widened to `R`.
pub fn arrival_counts<R: Real>(dist: &Distribution, lambda: f64, n_max: usize) -> Vec<R> {
    let mut out = Vec::with_capacity(n_max + 1);
    if dist.is_zero() {
        out.push(R::one());
        out.resize(n_max + 1, R::zero());
        return out;
    }
    let lam = R::from_f64(lambda);
    match dist.family() {
        Family::Exponential { rate } => {
            negative_binomial(&mut out, R::from_f64(*rate), lam, n_max, 1);
        }
        Family::Erlang { shape, rate } => {
            negative_binomial(&mut out, R::from_f64(*rate), lam, n_max, *shape);
        }
        Family::Deterministic { value } => {
            let mean = lam * R::from_f64(*value);
            let mut term = (-mean.clone()).exp();
            out.push(term.clone());
            for j in 1..=n_max {
                term = term * mean.clone() / R::from_usize(j);
                out.push(term.clone());
            }
        }
        Family::HyperExponential { weights, rates } => {
            out.resize(n_max + 1, R::zero());
            let mut branch = Vec::with_capacity(n_max + 1);
            // Renormalized in R: f64 weights such as 0.3 + 0.7 miss 1 by an
            // ulp, which would otherwise show up in every tail complement.
            let total = weights.iter().fold(R::zero(), |acc, w| acc + R::from_f64(*w));
            for (w, p) in weights.iter().zip(rates) {
                branch.clear();
                negative_binomial(&mut branch, R::from_f64(*p), lam.clone(), n_max, 1);
                let w = R::from_f64(*w) / total.clone();
                for (o, b) in out.iter_mut().zip(branch.drain(..)) {
                    *o = o.clone() + w.clone() * b;
                }
            }
        }
        Family::Pareto { alpha, scale } => {
            for j in 0..=n_max {
                out.push(R::from_f64(pareto_count(*alpha, *scale, lambda, j)));
            }
        }
        Family::Zero => unreachable!("handled above"),
    }
    out
}

/// [`arrival_counts`] that fails when the truncated mass exceeds `max_deficit`.
pub fn arrival_counts_checked<R: Real>(
    dist: &Distribution,
    lambda: f64,
    n_max: usize,
    max_deficit: f64,
) -> Result<Vec<R>> {
    let x = arrival_counts::<R>(dist, lambda, n_max);
    let deficit = deficit(&x);
    if deficit > max_deficit {
        return Err(Error::Truncation { deficit, bound: max_deficit });
    }
    Ok(x)
}

/// `1 - Σ x_j`, computed in the working precision.
pub fn deficit<R: Real>(x: &[R]) -> f64 {
    let mut s = R::zero();
    for v in x {
        s = s + v.clone();
    }
    (R::one() - s).to_f64()
}

/// `b_j = Σ_{i=1}^{j+1} ν_i a_{j-i+1} / (1 - ν_0)` for `j = 0..n_max-1`,
/// where `n_max` is the last index shared by `a` and `nu`.
pub fn boundary_counts<R: Real>(a: &[R], nu: &[R]) -> Result<Vec<R>> {
    let n_max = a.len().min(nu.len()).saturating_sub(1);
    let scale = R::one() - nu[0].clone();
    if !(scale > R::zero()) {
        return Err(Error::DegenerateVacation);
    }
    let mut b = Vec::with_capacity(n_max);
    for j in 0..n_max {
        let mut s = R::zero();
        for i in 1..=j + 1 {
            s = s + nu[i].clone() * a[j + 1 - i].clone();
        }
        b.push(s / scale.clone());
    }
    Ok(b)
}

/// The three count sequences for a given arrival rate, service law and
/// vacation law.
#[derive(Debug, Clone)]
pub struct CountKernel<R> {
    pub lambda: f64,
    /// `a_0..=a_{n_max}`.
    pub a: Vec<R>,
    /// `ν_0..=ν_{n_max}`.
    pub nu: Vec<R>,
    /// `b_0..b_{n_max-1}`; equal to `a` when the vacation is zero.
    pub b: Vec<R>,
    pub n_max: usize,
    /// `1 - Σ a_j`.
    pub deficit_a: f64,
    /// `1 - Σ ν_j`.
    pub deficit_nu: f64,
    vacation_is_zero: bool,
    a_tails: CountTails<R>,
    // B̄(m) and the excess means of b, for m = 0..=n_max.
    b_tail: Vec<R>,
    b_excess: Vec<R>,
}

impl<R: Real> CountKernel<R> {
    pub fn new(service: &Distribution, vacation: &Distribution, lambda: f64, n_max: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("arrival rate must be positive, got {lambda}")));
        }
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        let a = arrival_counts::<R>(service, lambda, n_max);
        if !(a[0] > R::zero()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "a_0 underflows for service {} at rate {lambda}",
                service.name()
            )));
        }
        let nu = arrival_counts::<R>(vacation, lambda, n_max + 1);
        let vacation_is_zero = vacation.is_zero();
        let a_tails = CountTails::new(service, lambda, n_max + 2);
        let (b, b_tail, b_excess) = if vacation_is_zero {
            (a[..n_max].to_vec(), a_tails.tail[..=n_max].to_vec(), a_tails.excess[..=n_max].to_vec())
        } else {
            let b = boundary_counts(&a, &nu)?;
            let (t, e) = boundary_tails(&a_tails, &CountTails::new(vacation, lambda, n_max + 2), &nu, n_max);
            (b, t, e)
        };
        let nu = nu[..=n_max].to_vec();
        Ok(CountKernel {
            lambda,
            deficit_a: deficit(&a),
            deficit_nu: deficit(&nu),
            a,
            nu,
            b,
            n_max,
            vacation_is_zero,
            a_tails,
            b_tail,
            b_excess,
        })
    }

    /// Like [`CountKernel::new`], failing if either sequence leaves more
    /// than `max_deficit` of its mass beyond `n_max`.
    pub fn with_deficit_bound(
        service: &Distribution,
        vacation: &Distribution,
        lambda: f64,
        n_max: usize,
        max_deficit: f64,
    ) -> Result<Self> {
        let k = Self::new(service, vacation, lambda, n_max)?;
        for d in [k.deficit_a, k.deficit_nu] {
            if d > max_deficit {
                return Err(Error::Truncation { deficit: d, bound: max_deficit });
            }
        }
        Ok(k)
    }

    pub fn vacation_is_zero(&self) -> bool {
        self.vacation_is_zero
    }

    /// `ν_0`, or 1 for the zero vacation.
    pub fn nu0(&self) -> R {
        self.nu[0].clone()
    }

    /// `Ā(m) = Σ_{j≥m} a_j` for `m ≤ n_max + 2`.
    pub fn a_tail(&self, m: usize) -> &R {
        &self.a_tails.tail[m]
    }

    /// `Σ_{j>k} (j-k) a_j` for `k ≤ n_max + 2`.
    pub fn a_excess(&self, k: usize) -> &R {
        &self.a_tails.excess[k]
    }

    /// `B̄(m) = Σ_{j≥m} b_j` for `m ≤ n_max`.
    pub fn b_tail(&self, m: usize) -> &R {
        &self.b_tail[m]
    }

    /// `Σ_{j>k} (j-k) b_j` for `k ≤ n_max`.
    pub fn b_excess(&self, k: usize) -> &R {
        &self.b_excess[k]
    }
}

// Extra terms beyond the requested length are computed until the next one
// is below 10^-(DIGITS+3) of the last tail that is kept, or this cap.
const MAX_EXTENSION: usize = 1 << 18;

/// Tail masses `x̄(m) = Σ_{j≥m} x_j` and excess means
/// `e_k = Σ_{j>k} (j-k) x_j = Σ_{m>k} x̄(m)` of a count sequence, for
/// `m, k = 0..=len`.
///
/// For light-tailed laws both are summed from the right over explicitly
/// computed terms, extended until the rest is negligible and closed with a
/// geometric estimate, so every entry keeps its relative accuracy however
/// small it is. The complement `1 - Σ x_j` would carry an absolute error of
/// one ulp instead. Pareto counts fall back to the complement and to
/// `e_k = E[X] - Σ_{m=1}^{k} x̄(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTails<R> {
    pub tail: Vec<R>,
    pub excess: Vec<R>,
}

impl<R: Real> CountTails<R> {
    pub fn new(dist: &Distribution, lambda: f64, len: usize) -> Self {
        if dist.is_zero() {
            let mut tail = alloc::vec![R::zero(); len + 1];
            tail[0] = R::one();
            return CountTails { tail, excess: alloc::vec![R::zero(); len + 1] };
        }
        if let Family::Pareto { .. } = dist.family() {
            return Self::from_complement(dist, lambda, len);
        }
        let eps = R::from_f64(libm::pow(10.0, -(R::DIGITS as f64 + 3.0)));
        let mut cap = len + 64;
        let x = loop {
            let x = arrival_counts::<R>(dist, lambda, cap);
            let last = &x[cap];
            let settled = last.is_zero() || (*last <= x[len].clone() * eps.clone() && *last < x[cap - 1]);
            if settled || cap - len >= MAX_EXTENSION {
                break x;
            }
            cap = len + 4 * (cap - len);
        };
        let top = x.len() - 1;
        // Geometric closure past the last term.
        let (mut t, mut e) = (R::zero(), R::zero());
        if !x[top].is_zero() && !x[top - 1].is_zero() {
            let r = x[top].clone() / x[top - 1].clone();
            if r < R::one() {
                let gap = R::one() - r.clone();
                t = x[top].clone() * r.clone() / gap.clone();
                e = t.clone() / gap;
            }
        }
        let mut tail = alloc::vec![R::zero(); len + 1];
        let mut excess = alloc::vec![R::zero(); len + 1];
        // At step k: t = x̄(k+1), e = e_k.
        for k in (0..=top).rev() {
            if k <= len {
                excess[k] = e.clone();
            }
            e = e + t.clone() + x[k].clone();
            t = t + x[k].clone();
            if k <= len {
                tail[k] = t.clone();
            }
        }
        CountTails { tail, excess }
    }

    fn from_complement(dist: &Distribution, lambda: f64, len: usize) -> Self {
        let x = arrival_counts::<R>(dist, lambda, len);
        let mut total = R::zero();
        for v in &x {
            total = total + v.clone();
        }
        let rest = R::one() - total;
        let mut t = if rest > R::zero() { rest } else { R::zero() };
        let mut tail = alloc::vec![R::zero(); len + 1];
        for m in (0..=len).rev() {
            t = t + x[m].clone();
            tail[m] = t.clone();
        }
        let mut excess = Vec::with_capacity(len + 1);
        let mut e = R::from_f64(lambda) * dist.mean_in::<R>();
        excess.push(e.clone());
        for m in 1..=len {
            e = e - tail[m].clone();
            if e < R::zero() {
                e = R::zero();
            }
            excess.push(e.clone());
        }
        CountTails { tail, excess }
    }
}

// B̄(m) = (Σ_{i=1}^{m} ν_i Ā(m+1-i) + ν̄(m+1)) / (1-ν_0) and
// e^b_k = (Σ_{i=1}^{k+1} ν_i e^a_{k+1-i} + e^a_0 ν̄(k+2) + e^ν_{k+1}) / (1-ν_0),
// both sums of nonnegative terms.
fn boundary_tails<R: Real>(a: &CountTails<R>, nu_t: &CountTails<R>, nu: &[R], n_max: usize) -> (Vec<R>, Vec<R>) {
    let f = R::one() - nu[0].clone();
    let mut tail = Vec::with_capacity(n_max + 1);
    let mut excess = Vec::with_capacity(n_max + 1);
    for m in 0..=n_max {
        let mut s = nu_t.tail[m + 1].clone();
        for i in 1..=m {
            s = s + nu[i].clone() * a.tail[m + 1 - i].clone();
        }
        tail.push(s / f.clone());
        let mut s = a.excess[0].clone() * nu_t.tail[m + 2].clone() + nu_t.excess[m + 1].clone();
        for i in 1..=m + 1 {
            s = s + nu[i].clone() * a.excess[m + 1 - i].clone();
        }
        excess.push(s / f.clone());
    }
    (tail, excess)
}

// Negative-binomial probabilities C(j+m-1, j) q0^m q^j with
// q0 = rate/(λ+rate), q = λ/(λ+rate). Shape 1 is the geometric case.
fn negative_binomial<R: Real>(out: &mut Vec<R>, rate: R, lambda: R, n_max: usize, shape: u32) {
    let total = rate.clone() + lambda.clone();
    let q0 = rate / total.clone();
    let q = lambda / total;
    let mut term = q0.powi(shape);
    out.push(term.clone());
    let m = shape as usize;
    for j in 1..=n_max {
        term = term * q.clone() * R::from_usize(j + m - 1) / R::from_usize(j);
        out.push(term.clone());
    }
}

/// `∫ (λt)^j e^{-λt}/j! dF(t)` for the Pareto law, by adaptive quadrature.
///
/// The Poisson factor peaks at `t = j/λ` with width about `√j/λ`; the
/// range is split there, and everything past the peak is mapped with
/// `u = hi / x` onto `(0, 1]`.
pub fn pareto_count(alpha: f64, scale: f64, lambda: f64, j: usize) -> f64 {
    let ln_front = libm::log(alpha) + alpha * libm::log(scale);
    let ln_fact = special::ln_gamma(j as f64 + 1.0);
    let ln_lambda = libm::log(lambda);
    let jf = j as f64;
    let f = move |x: f64| {
        if x < scale {
            return 0.0;
        }
        let lx = libm::log(x);
        libm::exp(ln_front + jf * (ln_lambda + lx) - lambda * x - ln_fact - (alpha + 1.0) * lx)
    };
    let peak = (jf / lambda).max(scale);
    let width = libm::sqrt(jf.max(1.0)) / lambda;
    let hi = (peak + 12.0 * width).max(2.0 * scale);
    let mut points = Vec::with_capacity(7);
    points.push(scale);
    for p in [peak - 12.0 * width, peak - 2.0 * width, peak, peak + 2.0 * width, hi] {
        if p > *points.last().unwrap() && p <= hi {
            points.push(p);
        }
    }
    let tol = Tolerance::relative(PARETO_TOL);
    let body = quadrature::integrate_pieces(&f, &points, tol);
    let g = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            f(hi / u) * hi / (u * u)
        }
    };
    let tail = quadrature::integrate(g, 0.0, 1.0, Tolerance { abs: 1e-3 * tol.rel * body.value, ..tol });
    body.value + tail.value
}
