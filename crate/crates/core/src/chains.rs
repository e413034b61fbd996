//! Embedded chains at departure epochs: the finite chain `P(N)`, the
//! infinite-buffer recursion, and the loss probabilities derived from them.

use alloc::format;
use alloc::vec::Vec;

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::kernel::{arrival_counts, CountKernel};
use crate::real::Real;

/// Values of `ρ` within this distance of 1 are treated as critical.
pub const CRITICAL_BAND: f64 = 1e-12;

/// Default threshold below which a recursion value counts as negative.
pub const NEGATIVE_TOLERANCE: f64 = 1e-30;

/// Poisson arrivals at rate `λ` to a single exhaustive server with
/// multiple vacations.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueModel {
    pub lambda: f64,
    pub service: Distribution,
    pub vacation: Distribution,
}

impl QueueModel {
    pub fn new(lambda: f64, service: Distribution, vacation: Distribution) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("arrival rate must be positive, got {lambda}")));
        }
        if service.is_zero() {
            return Err(Error::InvalidParameter("service time must have positive mean".into()));
        }
        Ok(QueueModel { lambda, service, vacation })
    }

    /// The standard M/G/1/N queue, i.e. a zero vacation.
    pub fn standard(lambda: f64, service: Distribution) -> Result<Self> {
        Self::new(lambda, service, Distribution::zero())
    }

    pub fn rho(&self) -> f64 {
        self.lambda * self.service.mean()
    }

    pub fn is_standard(&self) -> bool {
        self.vacation.is_zero()
    }

    /// Stable (`ρ < 1`) and not within [`CRITICAL_BAND`] of 1.
    pub fn is_stable(&self) -> bool {
        self.rho() < 1.0 - CRITICAL_BAND
    }

    /// Count kernel covering indices `0..=n_max`.
    pub fn kernel<R: Real>(&self, n_max: usize) -> Result<CountKernel<R>> {
        CountKernel::new(&self.service, &self.vacation, self.lambda, n_max)
    }
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<R> {
    n: usize,
    data: Vec<R>,
}

impl<R: Real> DenseMatrix<R> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: alloc::vec![R::zero(); n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            data.extend(row);
        }
        DenseMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `x P` for a row vector `x`.
    pub fn left_multiply(&self, x: &[R]) -> Vec<R> {
        let mut out = alloc::vec![R::zero(); self.n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.row(i)) {
                if !p.is_zero() {
                    *o = o.clone() + xi.clone() * p.clone();
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    /// `π(N)`, indices `0..N`.
    Finite { capacity: usize },
    /// `π_0..=π_n` of the infinite chain.
    InfinitePrefix { last: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Sums to one (finite chains, or the infinite chain with `ρ < 1`).
    Probability,
    /// `π_0 = 1`; used when `ρ ≥ 1`.
    Pi0Anchored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSolution<R> {
    pub kind: SolutionKind,
    pub values: Vec<R>,
    pub normalization: Normalization,
}

impl<R: Real> InvariantSolution<R> {
    pub fn pi0(&self) -> &R {
        &self.values[0]
    }

    /// `S_π(n) = Σ_{j<n} π_j`.
    pub fn partial_sum(&self, n: usize) -> R {
        assert!(n <= self.values.len(), "prefix too short for S({n})");
        let mut s = R::zero();
        for v in &self.values[..n] {
            s = s + v.clone();
        }
        s
    }

    /// `S̄_π(n) = 1 - S_π(n)`; only meaningful for probability vectors.
    pub fn tail_sum(&self, n: usize) -> R {
        R::one() - self.partial_sum(n)
    }
}

/// The `N × N` departure-epoch transition matrix `P(N)`.
pub fn build_embedded_matrix<R: Real>(n: usize, kernel: &CountKernel<R>) -> Result<DenseMatrix<R>> {
    if n < 2 {
        return Err(Error::InvalidCapacity(n));
    }
    if kernel.n_max < n - 1 {
        return Err(Error::KernelTooShort { needed: n - 1, available: kernel.n_max });
    }
    let mut p = DenseMatrix::zeros(n);
    let fill = |p: &mut DenseMatrix<R>, i: usize, start: usize, src: &[R], rest: &R| {
        for (k, v) in src.iter().enumerate() {
            p.set(i, start + k, v.clone());
        }
        p.set(i, n - 1, rest.clone());
    };
    fill(&mut p, 0, 0, &kernel.b[..n - 1], kernel.b_tail(n - 1));
    for i in 1..n {
        fill(&mut p, i, i - 1, &kernel.a[..n - i], kernel.a_tail(n - i));
    }
    Ok(p)
}

/// Invariant probability vector by GTH elimination.
///
/// Zero entries below the diagonal are skipped, so upper Hessenberg
/// matrices cost `O(n²)`.
pub fn invariant_vector_finite<R: Real>(p: &DenseMatrix<R>) -> InvariantSolution<R> {
    let n = p.dim();
    let mut m = p.clone();
    for k in (1..n).rev() {
        let mut s = R::zero();
        for j in 0..k {
            s = s + m.get(k, j).clone();
        }
        for i in 0..k {
            let v = m.get(i, k).clone() / s.clone();
            m.set(i, k, v);
        }
        for j in 0..k {
            let pkj = m.get(k, j).clone();
            if pkj.is_zero() {
                continue;
            }
            for i in 0..k {
                let pik = m.get(i, k).clone();
                if pik.is_zero() {
                    continue;
                }
                let v = m.get(i, j).clone() + pik * pkj.clone();
                m.set(i, j, v);
            }
        }
    }
    let mut pi = Vec::with_capacity(n);
    pi.push(R::one());
    for k in 1..n {
        let mut s = R::zero();
        for (i, x) in pi.iter().enumerate() {
            s = s + x.clone() * m.get(i, k).clone();
        }
        pi.push(s);
    }
    normalize(&mut pi);
    InvariantSolution {
        kind: SolutionKind::Finite { capacity: n },
        values: pi,
        normalization: Normalization::Probability,
    }
}

fn normalize<R: Real>(v: &mut [R]) {
    let mut total = R::zero();
    for x in v.iter() {
        total = total + x.clone();
    }
    for x in v.iter_mut() {
        *x = x.clone() / total.clone();
    }
}

/// `π(N)` straight from the kernel, without forming `P(N)`.
///
/// This is GTH specialized to `P(N)`: every pivot is `a_0` and the reduced
/// entries are row tail sums, so
/// `a_0 π_n = π_0 B̄(n) + Σ_{1≤i<n} π_i Ā(n-i+1)` with `Ā(m) = Σ_{k≥m} a_k`
/// and `B̄(m) = Σ_{k≥m} b_k`. Every term is nonnegative. Memory is `O(N)`.
///
/// `N = 1` (no waiting room) gives the single-state chain `π(1) = (1)`.
pub fn solve_finite<R: Real>(n: usize, kernel: &CountKernel<R>) -> Result<InvariantSolution<R>> {
    if n < 1 {
        return Err(Error::InvalidCapacity(n));
    }
    if n == 1 {
        return Ok(InvariantSolution {
            kind: SolutionKind::Finite { capacity: 1 },
            values: alloc::vec![R::one()],
            normalization: Normalization::Probability,
        });
    }
    if kernel.n_max < n - 1 {
        return Err(Error::KernelTooShort { needed: n - 1, available: kernel.n_max });
    }
    let a0 = kernel.a[0].clone();
    let mut pi: Vec<R> = Vec::with_capacity(n);
    pi.push(R::one());
    for k in 1..n {
        let mut s = kernel.b_tail(k).clone();
        for i in 1..k {
            s = s + pi[i].clone() * kernel.a_tail(k - i + 1).clone();
        }
        pi.push(s / a0.clone());
    }
    normalize(&mut pi);
    Ok(InvariantSolution {
        kind: SolutionKind::Finite { capacity: n },
        values: pi,
        normalization: Normalization::Probability,
    })
}

/// `π_0..=π_n` of the infinite chain by the forward recursion
/// `π_{j+1} = (π_j - π_0 b_j - Σ_{k=1}^{j} π_k a_{j+1-k}) / a_0`.
///
/// For `ρ < 1` the prefix is a probability measure with `π_0` fixed by the
/// model; otherwise it is anchored at `π_0 = 1`. Each step subtracts
/// quantities of similar size, so long prefixes need wide arithmetic.
pub fn invariant_measure_infinite<R: Real>(
    model: &QueueModel,
    kernel: &CountKernel<R>,
    n: usize,
) -> Result<InvariantSolution<R>> {
    invariant_measure_infinite_with(model, kernel, n, NEGATIVE_TOLERANCE)
}

/// [`invariant_measure_infinite`] with an explicit negativity threshold.
pub fn invariant_measure_infinite_with<R: Real>(
    model: &QueueModel,
    kernel: &CountKernel<R>,
    n: usize,
    negative_tolerance: f64,
) -> Result<InvariantSolution<R>> {
    if n > kernel.n_max {
        return Err(Error::KernelTooShort { needed: n, available: kernel.n_max });
    }
    let (pi0, normalization) = if model.is_stable() {
        (stable_pi0(model, kernel), Normalization::Probability)
    } else {
        (R::one(), Normalization::Pi0Anchored)
    };
    let floor = R::from_f64(-negative_tolerance);
    let a0 = kernel.a[0].clone();
    let mut pi = Vec::with_capacity(n + 1);
    pi.push(pi0);
    for j in 0..n {
        let mut s = pi[j].clone() - pi[0].clone() * kernel.b[j].clone();
        for k in 1..=j {
            s = s - pi[k].clone() * kernel.a[j + 1 - k].clone();
        }
        let next = s / a0.clone();
        if next < floor {
            return Err(Error::PrecisionLoss { index: j + 1, value: next.to_f64() });
        }
        pi.push(next);
    }
    Ok(InvariantSolution { kind: SolutionKind::InfinitePrefix { last: n }, values: pi, normalization })
}

// π_0 = (1-ρ)(1-ν_0)/(λE[V]); 1-ρ for the standard queue.
fn stable_pi0<R: Real>(model: &QueueModel, kernel: &CountKernel<R>) -> R {
    let one_minus_rho = R::one() - R::from_f64(model.lambda) * model.service.mean_in::<R>();
    if kernel.vacation_is_zero() {
        one_minus_rho
    } else {
        one_minus_rho * (R::one() - kernel.nu0()) / (R::from_f64(model.lambda) * model.vacation.mean_in::<R>())
    }
}

/// Loss probability from `π(N)`.
///
/// With a vacation this is `1 - (1-ν_0)λ⁻¹ / (E[V]π_0(N) + E[S](1-ν_0))`,
/// and `1 - 1/(π̂_0(N) + ρ)` for the standard queue. Both lose all relative
/// accuracy once the loss nears the working epsilon, so the numerator is
/// evaluated through the balance identity
/// `λE[V]π_0(N) - (1-ρ)(1-ν_0) = (1-ν_0)(π_0(N) e^b_{N-1} + Σ_{1≤i<N} π_i(N) e^a_{N-i})`
/// with `e^x_k = Σ_{j>k} (j-k) x_j`, a sum of nonnegative terms
/// (`λE[V]` reads 1 for the standard queue).
pub fn loss_probability_exact<R: Real>(model: &QueueModel, kernel: &CountKernel<R>, pi_n: &InvariantSolution<R>) -> R {
    let n = pi_n.values.len();
    let mut s = pi_n.pi0().clone() * kernel.b_excess(n - 1).clone();
    for i in 1..n {
        s = s + pi_n.values[i].clone() * kernel.a_excess(n - i).clone();
    }
    s * time_scale(model, kernel, pi_n.pi0().clone())
}

// The factor that turns π_j(N) into π*_j(N).
fn time_scale<R: Real>(model: &QueueModel, kernel: &CountKernel<R>, pi0_n: R) -> R {
    let es = model.service.mean_in::<R>();
    let lambda = R::from_f64(model.lambda);
    if kernel.vacation_is_zero() {
        R::one() / (pi0_n + lambda * es)
    } else {
        let free = R::one() - kernel.nu0();
        let ev = model.vacation.mean_in::<R>();
        free.clone() / lambda / (ev * pi0_n + es * free)
    }
}

/// Loss probability at capacity `n` from the infinite measure:
/// `(E[V]π_0 + (E[S]-λ⁻¹)(1-ν_0)S_π(N)) / (E[V]π_0 + E[S](1-ν_0)S_π(N))`.
///
/// Works for either normalization since the expression is homogeneous in π.
pub fn loss_from_infinite<R: Real>(
    model: &QueueModel,
    kernel: &CountKernel<R>,
    measure: &InvariantSolution<R>,
    n: usize,
) -> R {
    let s = measure.partial_sum(n);
    let pi0 = measure.pi0().clone();
    let es = model.service.mean_in::<R>();
    let lambda = R::from_f64(model.lambda);
    if kernel.vacation_is_zero() {
        // Same identity with the standard-queue formula.
        let rho = lambda * es;
        let den = pi0.clone() + rho.clone() * s.clone();
        (pi0 + (rho - R::one()) * s) / den
    } else {
        let free = R::one() - kernel.nu0();
        let head = model.vacation.mean_in::<R>() * pi0;
        let num = head.clone() + (es.clone() - R::one() / lambda) * free.clone() * s.clone();
        num / (head + es * free * s)
    }
}

/// Time-stationary queue-length distribution `π*_0(N)..=π*_N(N)`.
pub fn time_stationary_distribution<R: Real>(
    model: &QueueModel,
    kernel: &CountKernel<R>,
    pi_n: &InvariantSolution<R>,
) -> Vec<R> {
    let scale = time_scale(model, kernel, pi_n.pi0().clone());
    let mut out: Vec<R> = pi_n.values.iter().map(|p| p.clone() * scale.clone()).collect();
    out.push(loss_probability_exact(model, kernel, pi_n));
    out
}

/// Result of [`tv_distance`].
#[derive(Debug, Clone, PartialEq)]
pub struct TvDistance<R> {
    pub distance: R,
    /// `S̄_π(N + 1 + n_tail)`: the part of the tail not covered by the
    /// computed prefix. Exact, because the prefix is normalized.
    pub remainder: R,
}

/// `Σ_{j=0}^{N} |π*_j(N) - π_j| + S̄_π(N+1)` for a stable model.
///
/// `π(N)` comes from [`solve_finite`] and `π` from the forward recursion
/// carried to `N + n_tail`.
pub fn tv_distance<R: Real>(
    model: &QueueModel,
    kernel: &CountKernel<R>,
    n: usize,
    n_tail: usize,
) -> Result<TvDistance<R>> {
    if !model.is_stable() {
        return Err(Error::InvalidParameter(format!("total variation needs ρ < 1, got {}", model.rho())));
    }
    if n < 1 {
        return Err(Error::InvalidCapacity(n));
    }
    let pi = invariant_measure_infinite(model, kernel, n + n_tail)?;
    let finite = solve_finite(n, kernel)?;
    let star = time_stationary_distribution(model, kernel, &finite);
    let mut d = R::zero();
    for (s, p) in star.iter().zip(&pi.values) {
        d = d + (s.clone() - p.clone()).abs();
    }
    d = d + pi.tail_sum(n + 1);
    Ok(TvDistance { distance: d, remainder: pi.tail_sum(n + n_tail + 1) })
}

/// `lim_{N→∞} P_loss(N)`: `max(0, 1 - 1/ρ)`, in the arithmetic of the solver.
pub fn loss_limit<R: Real>(model: &QueueModel) -> R {
    let rho = R::from_f64(model.lambda) * model.service.mean_in::<R>();
    if rho > R::one() {
        R::one() - R::one() / rho
    } else {
        R::zero()
    }
}

/// `lim_{N→∞}` of the GI/M/1/N loss: `max(0, 1 - μE[A])`.
pub fn gim1_loss_limit<R: Real>(interarrival: &Distribution, mu: f64) -> R {
    let x = R::one() - R::from_f64(mu) * interarrival.mean_in::<R>();
    if x > R::zero() {
        x
    } else {
        R::zero()
    }
}

/// Exact loss probability at capacity `n`, with a fresh kernel.
pub fn exact_loss<R: Real>(model: &QueueModel, n: usize) -> Result<R> {
    let kernel = model.kernel::<R>(n.max(1))?;
    let pi = solve_finite(n, &kernel)?;
    Ok(loss_probability_exact(model, &kernel, &pi))
}

/// Distribution seen by arrivals in GI/M/1/N, from its own embedded chain.
///
/// States are the numbers found by arrivals, `0..=N`. After an arrival the
/// content is `c = min(i+1, N)`; with `k_j` services during an interarrival
/// time the next arrival finds `c - j`, or 0 once `j ≥ c`.
pub fn gim1_arrival_distribution<R: Real>(
    interarrival: &Distribution,
    mu: f64,
    n: usize,
) -> Result<InvariantSolution<R>> {
    if n < 1 {
        return Err(Error::InvalidCapacity(n));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("service rate must be positive, got {mu}")));
    }
    let k: Vec<R> = arrival_counts(interarrival, mu, n + 1);
    let size = n + 1;
    let mut p = DenseMatrix::zeros(size);
    for i in 0..size {
        let c = (i + 1).min(n);
        let mut used = R::zero();
        for j in 0..c {
            p.set(i, c - j, k[j].clone());
            used = used + k[j].clone();
        }
        p.set(i, 0, R::one() - used);
    }
    Ok(invariant_vector_finite(&p))
}

/// Loss probability of GI/M/1/N: the chance an arrival finds `N`.
pub fn gim1_loss_exact<R: Real>(interarrival: &Distribution, mu: f64, n: usize) -> Result<R> {
    Ok(gim1_arrival_distribution::<R>(interarrival, mu, n)?.values[n].clone())
}

/// `π̂_0(N+1)` of the dual standard M/G/1/(N+1) queue: Poisson rate `μ`,
/// service law equal to the interarrival law.
pub fn gim1_loss_dual<R: Real>(interarrival: &Distribution, mu: f64, n: usize) -> Result<R> {
    let dual = QueueModel::standard(mu, interarrival.clone())?;
    let kernel = dual.kernel::<R>(n + 1)?;
    let pi = solve_finite(n + 1, &kernel)?;
    Ok(pi.values[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::HighPrecision;

    fn exp(rate: f64) -> Distribution {
        Distribution::exponential(rate).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        libm::fabs(a - b) / libm::fabs(b)
    }

    fn mm1n_loss(rho: f64, n: i32) -> f64 {
        (1.0 - rho) * libm::pow(rho, n as f64) / (1.0 - libm::pow(rho, n as f64 + 1.0))
    }

    #[test]
    fn small_matrices() {
        let m = QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap();
        let k = m.kernel::<f64>(10).unwrap();
        let p = build_embedded_matrix(2, &k).unwrap();
        assert_eq!((p.row(0)[0], p.row(1)[0]), (k.b[0], k.a[0]));
        assert!(rel(p.row(0)[1], 1.0 - k.b[0]) < 1e-15 && rel(p.row(1)[1], 1.0 / 3.0) < 1e-15);
        let p = build_embedded_matrix(3, &k).unwrap();
        let row = p.row(1);
        assert!(rel(row[0], 2.0 / 3.0) < 1e-15 && rel(row[1], 2.0 / 9.0) < 1e-15 && rel(row[2], 1.0 / 9.0) < 1e-14);
        assert_eq!(p.row(2)[0], 0.0);
        for i in 0..3 {
            let s: f64 = p.row(i).iter().sum();
            assert!(libm::fabs(s - 1.0) < 1e-14);
        }
        assert_eq!(build_embedded_matrix(1, &k), Err(Error::InvalidCapacity(1)));
        assert!(matches!(build_embedded_matrix(20, &k), Err(Error::KernelTooShort { .. })));
    }

    #[test]
    fn standard_queue_uses_a_in_row_zero() {
        let m = QueueModel::standard(0.5, exp(1.0)).unwrap();
        let k = m.kernel::<f64>(10).unwrap();
        let p = build_embedded_matrix(5, &k).unwrap();
        assert_eq!(&p.row(0)[..4], &p.row(1)[..4]);
    }

    #[test]
    fn gth_two_state_and_permutation() {
        let p = DenseMatrix::from_rows(alloc::vec![alloc::vec![0.5, 0.5], alloc::vec![0.5, 0.5]]);
        assert_eq!(invariant_vector_finite(&p).values, alloc::vec![0.5, 0.5]);

        let rows = alloc::vec![alloc::vec![0.1, 0.6, 0.3], alloc::vec![0.4, 0.4, 0.2], alloc::vec![0.0, 0.7, 0.3],];
        let perm = [2usize, 0, 1];
        let mut permuted = alloc::vec![alloc::vec![0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                permuted[perm[i]][perm[j]] = rows[i][j];
            }
        }
        let pi = invariant_vector_finite(&DenseMatrix::from_rows(rows)).values;
        let pj = invariant_vector_finite(&DenseMatrix::from_rows(permuted)).values;
        for i in 0..3 {
            assert!(libm::fabs(pi[i] - pj[perm[i]]) < 1e-15);
        }
    }

    #[test]
    fn structured_solver_matches_dense_gth() {
        let m = QueueModel::new(1.0, exp(2.0), Distribution::erlang(2, 0.5).unwrap()).unwrap();
        let k = m.kernel::<f64>(40).unwrap();
        for n in [2, 3, 7, 25] {
            let p = build_embedded_matrix(n, &k).unwrap();
            let dense = invariant_vector_finite(&p);
            let fast = solve_finite(n, &k).unwrap();
            for (x, y) in dense.values.iter().zip(&fast.values) {
                assert!(rel(*x, *y) < 1e-12, "n={n}");
            }
            let res = p.left_multiply(&dense.values);
            for (x, y) in res.iter().zip(&dense.values) {
                assert!(libm::fabs(x - y) < 1e-12);
            }
        }
    }

    #[test]
    fn mm1n_closed_form() {
        let m = QueueModel::standard(0.5, exp(1.0)).unwrap();
        for n in [2, 5, 10, 30] {
            let p: HighPrecision = exact_loss(&m, n).unwrap();
            assert!(rel(p.to_f64(), mm1n_loss(0.5, n as i32)) < 1e-12, "n={n}");
        }
        let p: f64 = exact_loss(&m, 10).unwrap();
        assert!(rel(p, 4.8852e-4) < 1e-4);

        let k = m.kernel::<f64>(10).unwrap();
        let pi = solve_finite(5, &k).unwrap();
        let star = time_stationary_distribution(&m, &k, &pi);
        for (j, s) in star.iter().enumerate() {
            let want = libm::pow(0.5, j as f64) * 0.5 / (1.0 - libm::pow(0.5, 6.0));
            assert!(rel(*s, want) < 1e-12);
        }
    }

    #[test]
    fn time_stationary_sums_to_one() {
        let m = QueueModel::new(0.8, Distribution::deterministic(1.0).unwrap(), exp(3.0)).unwrap();
        let k = m.kernel::<f64>(30).unwrap();
        let pi = solve_finite(12, &k).unwrap();
        let star = time_stationary_distribution(&m, &k, &pi);
        let s: f64 = star.iter().sum();
        assert!(libm::fabs(s - 1.0) < 1e-12);
        assert_eq!(star[12], loss_probability_exact(&m, &k, &pi));
    }

    #[test]
    fn supercritical_limit() {
        let m = QueueModel::new(2.0, exp(1.0), exp(1.0)).unwrap();
        let p: f64 = exact_loss(&m, 60).unwrap();
        assert!(libm::fabs(p - 0.5) < 1e-3);
    }

    #[test]
    fn infinite_measure_examples() {
        // M/M/1: geometric with ratio ρ.
        let m = QueueModel::standard(0.5, exp(1.0)).unwrap();
        let k = m.kernel::<HighPrecision>(40).unwrap();
        let pi = invariant_measure_infinite(&m, &k, 40).unwrap();
        assert_eq!(pi.normalization, Normalization::Probability);
        assert!(rel(pi.values[0].to_f64(), 0.5) < 1e-15);
        for j in 1..=40 {
            let r = (pi.values[j].clone() / pi.values[j - 1].clone()).to_f64();
            assert!(rel(r, 0.5) < 1e-12);
        }

        // ρ = 2: growth rate 2, anchored at π_0 = 1.
        let m = QueueModel::new(2.0, exp(1.0), exp(1.0)).unwrap();
        let k = m.kernel::<HighPrecision>(80).unwrap();
        let pi = invariant_measure_infinite(&m, &k, 80).unwrap();
        assert_eq!(pi.normalization, Normalization::Pi0Anchored);
        let r = (pi.values[80].clone() / pi.values[79].clone()).to_f64();
        assert!(rel(r, 2.0) < 1e-6);
    }

    #[test]
    fn recursion_residual_in_wide_arithmetic() {
        let m = QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap();
        let k = m.kernel::<HighPrecision>(50).unwrap();
        let pi = invariant_measure_infinite(&m, &k, 50).unwrap();
        // π_j = π_0 b_j + Σ_{k=1}^{j+1} π_k a_{j+1-k}
        let bound = libm::pow(10.0, -((HighPrecision::DIGITS - 10) as f64));
        for j in 0..50 {
            let mut rhs = pi.values[0].clone() * k.b[j].clone();
            for i in 1..=j + 1 {
                rhs = rhs + pi.values[i].clone() * k.a[j + 1 - i].clone();
            }
            let r = (rhs - pi.values[j].clone()).abs().to_f64();
            assert!(r <= bound, "j={j}: {r:e}");
        }
    }

    #[test]
    fn double_precision_recursion_reports_precision_loss() {
        let m = QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap();
        let k = m.kernel::<f64>(120).unwrap();
        let err = invariant_measure_infinite(&m, &k, 120).unwrap_err();
        assert!(matches!(err, Error::PrecisionLoss { .. }));
    }

    #[test]
    fn two_loss_formulas_agree() {
        let models = [
            QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap(),
            QueueModel::new(1.0, Distribution::deterministic(1.0).unwrap(), exp(1.0)).unwrap(),
            QueueModel::new(2.0, exp(1.0), exp(1.0)).unwrap(),
            QueueModel::standard(0.5, exp(1.0)).unwrap(),
        ];
        for m in &models {
            let k = m.kernel::<HighPrecision>(40).unwrap();
            let inf = invariant_measure_infinite(m, &k, 40).unwrap();
            for n in [2, 10, 30] {
                let fin = solve_finite(n, &k).unwrap();
                let a = loss_probability_exact(m, &k, &fin).to_f64();
                let b = loss_from_infinite(m, &k, &inf, n).to_f64();
                assert!(libm::fabs(a - b) < 1e-10, "{m:?} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn proportionality() {
        let m = QueueModel::new(1.0, exp(2.0), Distribution::erlang(2, 0.5).unwrap()).unwrap();
        let k = m.kernel::<HighPrecision>(40).unwrap();
        let inf = invariant_measure_infinite(&m, &k, 40).unwrap();
        for n in [2, 15, 40] {
            let fin = solve_finite(n, &k).unwrap();
            let s = inf.partial_sum(n);
            for i in 0..n {
                let lhs = (fin.values[i].clone() * s.clone()).to_f64();
                assert!(rel(lhs, inf.values[i].to_f64()) < 1e-9, "n={n} i={i} {lhs:e} {:e}", inf.values[i].to_f64());
            }
        }
    }

    #[test]
    fn generating_function_of_measure() {
        // Π(z)[z - S*(λ-λz)] = π_0[V*(λ-λz) - 1]S*(λ-λz)/(1-ν_0)
        let m = QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap();
        let k = m.kernel::<HighPrecision>(120).unwrap();
        let pi = invariant_measure_infinite(&m, &k, 120).unwrap();
        for z in [0.2, 0.5, 0.8] {
            let mut pgf = 0.0;
            let mut zj = 1.0;
            for p in &pi.values {
                pgf += p.to_f64() * zj;
                zj *= z;
            }
            let s = m.service.transform_at(1.0, z).unwrap();
            let v = m.vacation.transform_at(1.0, z).unwrap();
            let nu0 = k.nu0().to_f64();
            let lhs = pgf * (z - s);
            let rhs = pi.values[0].to_f64() * (v - 1.0) * s / (1.0 - nu0);
            assert!(libm::fabs(lhs - rhs) < 1e-8);
        }
    }

    #[test]
    fn loss_over_tail_tends_to_one_minus_rho() {
        let m = QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap();
        let k = m.kernel::<HighPrecision>(70).unwrap();
        let inf = invariant_measure_infinite(&m, &k, 70).unwrap();
        let mut last = f64::INFINITY;
        for n in (10..=60).step_by(10) {
            let fin = solve_finite(n, &k).unwrap();
            let ratio = (loss_probability_exact(&m, &k, &fin) / inf.tail_sum(n)).to_f64();
            let err = libm::fabs(ratio / 0.5 - 1.0);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn tv_distance_behaviour() {
        let m = QueueModel::new(1.0, exp(2.0), exp(4.0)).unwrap();
        let k = m.kernel::<HighPrecision>(140).unwrap();
        let inf = invariant_measure_infinite(&m, &k, 140).unwrap();
        let mut prev = f64::INFINITY;
        for n in [5, 10, 20, 40] {
            let tv = tv_distance(&m, &k, n, 80).unwrap();
            let d = tv.distance.to_f64();
            assert!(d >= 0.0 && d < prev);
            prev = d;
            let ratio = d / inf.tail_sum(n).to_f64();
            assert!(ratio > 0.1 && ratio < 10.0, "n={n}: {ratio}");
        }

        // N = 1 unrolled by hand.
        let tv = tv_distance(&m, &k, 1, 20).unwrap().distance.to_f64();
        let fin = InvariantSolution {
            kind: SolutionKind::Finite { capacity: 1 },
            values: alloc::vec![HighPrecision::one()],
            normalization: Normalization::Probability,
        };
        let star = time_stationary_distribution(&m, &k, &fin);
        let p0 = inf.values[0].to_f64();
        let p1 = inf.values[1].to_f64();
        let want = libm::fabs(star[0].to_f64() - p0) + libm::fabs(star[1].to_f64() - p1) + inf.tail_sum(2).to_f64();
        assert!(libm::fabs(tv - want) < 1e-14);

        let unstable = QueueModel::new(2.0, exp(1.0), exp(1.0)).unwrap();
        let k2 = unstable.kernel::<f64>(30).unwrap();
        assert!(tv_distance(&unstable, &k2, 5, 5).is_err());
    }

    #[test]
    fn gim1_chain_and_dual_agree() {
        let a = exp(0.5);
        for n in 1..=20 {
            let direct: HighPrecision = gim1_loss_exact(&a, 1.0, n).unwrap();
            let dual: HighPrecision = gim1_loss_dual(&a, 1.0, n).unwrap();
            let want = mm1n_loss(0.5, n as i32);
            assert!(rel(direct.to_f64(), want) < 1e-12);
            assert!(rel(dual.to_f64(), want) < 1e-12);
        }
        let d = Distribution::erlang(3, 2.5).unwrap();
        for n in [3, 9] {
            let x: f64 = gim1_loss_exact(&d, 1.3, n).unwrap();
            let y: f64 = gim1_loss_dual(&d, 1.3, n).unwrap();
            assert!(rel(x, y) < 1e-10);
        }
    }
}
