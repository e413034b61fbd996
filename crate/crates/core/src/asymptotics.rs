//! Asymptotic loss rates as the capacity grows: regime classification,
//! fixed points of `z = S*(λ-λz)`, and the limit constants.

use alloc::format;

use crate::chains::{QueueModel, CRITICAL_BAND};
use crate::distributions::{Distribution, SingularityDescriptor, SingularityKind};
use crate::error::{Error, Result};
use crate::roots::{bracketed_root, RootError};
use crate::special;

/// Tolerance on `|z - S*(λ-λz)|` and on the final bracket width.
pub const ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `ρ < 1`, decay set by the vacation singularity `r`.
    SubcritNongeom,
    /// `ρ < 1`, geometric decay `z_1^{-N}`.
    SubcritGeom,
    /// `ρ < 1`, service and vacation tails comparable.
    SubcritHeavyBoth,
    /// `ρ < 1`, service tail dominates.
    SubcritHeavyS,
    /// `ρ < 1`, vacation tail dominates.
    SubcritHeavyV,
    /// `ρ = 1`, `E[S²] < ∞`.
    CritFiniteVar,
    /// `ρ = 1`, density tail `c x^{-θ}` with `2 < θ < 3`.
    CritPower,
    /// `ρ = 1`, `θ = 3`.
    CritLog,
    /// `ρ > 1`.
    Supercrit,
    /// GI/M/1/N with `ρ̃ < 1`.
    Gim1Subcrit,
    /// GI/M/1/N with `ρ̃ > 1`, light-tailed interarrivals.
    Gim1SupercritGeom,
    /// GI/M/1/N with `ρ̃ > 1`, regularly varying interarrivals.
    Gim1SupercritHeavy,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::SubcritNongeom => "SUBCRIT_NONGEOM",
            Regime::SubcritGeom => "SUBCRIT_GEOM",
            Regime::SubcritHeavyBoth => "SUBCRIT_HEAVY_BOTH",
            Regime::SubcritHeavyS => "SUBCRIT_HEAVY_S",
            Regime::SubcritHeavyV => "SUBCRIT_HEAVY_V",
            Regime::CritFiniteVar => "CRIT_FINITE_VAR",
            Regime::CritPower => "CRIT_POWER",
            Regime::CritLog => "CRIT_LOG",
            Regime::Supercrit => "SUPERCRIT",
            Regime::Gim1Subcrit => "GIM1_SUBCRIT",
            Regime::Gim1SupercritGeom => "GIM1_SUPERCRIT_GEOM",
            Regime::Gim1SupercritHeavy => "GIM1_SUPERCRIT_HEAVY",
        }
    }
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.tag())
    }
}

/// `P_loss(N) ≈ offset + constant · N^poly_order · (ln N)^[log_factor] · decay(N)`
/// where `decay(N)` is `rate^{-N}` for `rate > 1`, `rate^N` for `rate < 1`
/// and 1 for polynomial regimes.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticEstimate {
    pub regime: Regime,
    pub offset: f64,
    pub rate: f64,
    pub poly_order: f64,
    pub log_factor: bool,
    pub constant: f64,
    /// A second reading of the constant where the source formula is
    /// ambiguous; see `note`.
    pub alternative_constant: Option<f64>,
    pub note: Option<&'static str>,
}

impl AsymptoticEstimate {
    fn new(regime: Regime, rate: f64, poly_order: f64, constant: f64) -> Self {
        AsymptoticEstimate {
            regime,
            offset: 0.0,
            rate,
            poly_order,
            log_factor: false,
            constant,
            alternative_constant: None,
            note: None,
        }
    }

    /// The approximation of `P_loss(N) - offset`.
    pub fn correction(&self, n: f64) -> f64 {
        let mut ln = libm::log(self.constant) + self.poly_order * libm::log(n);
        if self.rate > 1.0 {
            ln -= n * libm::log(self.rate);
        } else if self.rate < 1.0 {
            ln += n * libm::log(self.rate);
        }
        let mut v = libm::exp(ln);
        if self.log_factor {
            v *= libm::log(n);
        }
        v
    }

    /// The approximation of `P_loss(N)`.
    pub fn evaluate(&self, n: f64) -> f64 {
        self.offset + self.correction(n)
    }
}

fn g(dist: &Distribution, lambda: f64, z: f64) -> f64 {
    match dist.transform_at(lambda, z) {
        Ok(v) => z - v,
        // Past the abscissa the transform is +∞.
        Err(_) => f64::NEG_INFINITY,
    }
}

fn polish(dist: &Distribution, lambda: f64, lo: f64, hi: f64) -> Result<f64> {
    let root = bracketed_root(|z| g(dist, lambda, z), lo, hi, ROOT_TOL, ROOT_TOL).map_err(|e| match e {
        RootError::NotBracketed { f_lo, f_hi } => {
            Error::NoRoot(format!("g({lo}) = {f_lo:e} and g({hi}) = {f_hi:e} have the same sign"))
        }
        RootError::NotFinite { x } => Error::NoRoot(format!("g is not finite at {x}")),
    })?;
    if !(libm::fabs(root.residual) <= ROOT_TOL) {
        return Err(Error::NoRoot(format!("residual {:e} at z = {} above tolerance", root.residual, root.x)));
    }
    Ok(root.x)
}

/// Root of `z = F*(λ-λz)` in `(1, R)` for a law with `λE[F] < 1`.
pub fn fixed_point_above_one(dist: &Distribution, lambda: f64) -> Result<f64> {
    let rho = lambda * dist.mean();
    if !(rho < 1.0) {
        return Err(Error::NoRoot(format!("needs ρ < 1, got {rho}")));
    }
    let r = dist.singularity(lambda).location;
    let lo = 1.0 + 1e-9;
    let hi = if r.is_finite() {
        if r <= lo {
            return Err(Error::NoRoot("transform is singular at z = 1".into()));
        }
        r - 1e-9
    } else {
        let mut hi = 2.0;
        while g(dist, lambda, hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::NoRoot("no sign change found for z up to 1e12".into()));
            }
        }
        hi
    };
    polish(dist, lambda, lo, hi)
}

/// Root of `z = F*(λ-λz)` in `(0, 1)` for a law with `λE[F] > 1`.
pub fn fixed_point_below_one(dist: &Distribution, lambda: f64) -> Result<f64> {
    let rho = lambda * dist.mean();
    if !(rho > 1.0) {
        return Err(Error::NoRoot(format!("needs ρ > 1, got {rho}")));
    }
    polish(dist, lambda, 1e-12, 1.0 - 1e-9)
}

/// `z_1`: root of `z = S*(λ-λz)` in `(1, R_{S*})`.
///
/// Fails with `NoRootError` unless `ρ < 1`, `R_{S*}` is finite or the
/// transform is entire, and `R_{S*} < S*(λ-λR_{S*})` (divergence counts).
pub fn solve_fixed_point_sub(model: &QueueModel) -> Result<f64> {
    let desc = model.service.singularity(model.lambda);
    if desc.location <= 1.0 {
        return Err(Error::NoRoot("service transform is singular at z = 1".into()));
    }
    if desc.is_finite() && !transform_exceeds(&model.service, model.lambda, desc.location) {
        return Err(Error::NoRoot("S*(λ-λR) ≤ R at the service singularity".into()));
    }
    fixed_point_above_one(&model.service, model.lambda)
}

/// `z_2`: root of `z = S*(λ-λz)` in `(0, 1)`; needs `ρ > 1`.
pub fn solve_fixed_point_super(model: &QueueModel) -> Result<f64> {
    fixed_point_below_one(&model.service, model.lambda)
}

// F*(λ-λz) > z, with a divergent transform counting as larger.
fn transform_exceeds(dist: &Distribution, lambda: f64, z: f64) -> bool {
    match dist.transform_at(lambda, z) {
        Ok(v) => v > z,
        Err(_) => true,
    }
}

fn is_heavy(d: &SingularityDescriptor) -> bool {
    matches!(d.kind, SingularityKind::HeavyTail(_))
}

/// Regime of a model by the decision tree: traffic intensity first, then
/// tails, then the singularities of the transforms.
pub fn classify(model: &QueueModel) -> Result<Regime> {
    let rho = model.rho();
    if libm::fabs(rho - 1.0) <= CRITICAL_BAND {
        return classify_critical(&model.service);
    }
    if rho > 1.0 {
        return Ok(Regime::Supercrit);
    }
    let lambda = model.lambda;
    let s = model.service.singularity(lambda);
    if model.is_standard() {
        if is_heavy(&s) {
            return Ok(Regime::SubcritHeavyS);
        }
        if !s.is_finite() || transform_exceeds(&model.service, lambda, s.location) {
            return Ok(Regime::SubcritGeom);
        }
        return Err(Error::Unclassifiable(format!("S*(λ-λR) ≤ R at R = {} for the standard queue", s.location)));
    }
    let v = model.vacation.singularity(lambda);
    match (s.regular_variation(), v.regular_variation()) {
        (Some(rs), Some(rv)) => {
            return Ok(if rs.alpha == rv.alpha {
                Regime::SubcritHeavyBoth
            } else if rv.alpha > rs.alpha {
                Regime::SubcritHeavyS
            } else {
                Regime::SubcritHeavyV
            })
        }
        (Some(_), None) => return Ok(Regime::SubcritHeavyS),
        (None, Some(_)) => return Ok(Regime::SubcritHeavyV),
        (None, None) => {}
    }
    let r = s.location.min(v.location);
    if r == s.location && transform_exceeds(&model.service, lambda, r) {
        return Ok(Regime::SubcritGeom);
    }
    if r == v.location && r < s.location {
        let at_r = model.service.transform_at(lambda, r)?;
        if at_r < r {
            return Ok(Regime::SubcritNongeom);
        }
        return Err(Error::Unclassifiable(format!("S*(λ-λr) = {at_r} is not below r = {r}")));
    }
    Err(Error::Unclassifiable(format!(
        "r = {r} with R_S* = {} and R_V* = {} meets neither light-tail condition",
        s.location, v.location
    )))
}

fn classify_critical(service: &Distribution) -> Result<Regime> {
    if service.second_moment().is_some() {
        return Ok(Regime::CritFiniteVar);
    }
    match service.density_tail() {
        Some(t) if t.theta > 2.0 && t.theta < 3.0 => Ok(Regime::CritPower),
        Some(t) if t.theta == 3.0 => Ok(Regime::CritLog),
        Some(t) => Err(Error::Unclassifiable(format!("density tail exponent {} outside (2, 3]", t.theta))),
        None => Err(Error::Unclassifiable("infinite second moment without a power-law density".into())),
    }
}

/// The asymptotic loss estimate for the model's regime.
pub fn asymptotic_loss(model: &QueueModel) -> Result<AsymptoticEstimate> {
    if model.is_standard() {
        return standard_mg1_loss(model);
    }
    let regime = classify(model)?;
    let lambda = model.lambda;
    let rho = model.rho();
    let es = model.service.mean();
    let ev = model.vacation.mean();
    Ok(match regime {
        Regime::SubcritNongeom => {
            let v = model.vacation.singularity(lambda);
            let (theta, c) = match v.kind {
                SingularityKind::Pole { order, coefficient } => (order, coefficient),
                _ => return Err(Error::Unclassifiable("vacation singularity is not a pole".into())),
            };
            let r = v.location;
            let s_r = model.service.transform_at(lambda, r)?;
            let constant = c * (1.0 - rho) * (1.0 - rho) * s_r
                / (libm::pow(r, theta - 1.0) * special::gamma(theta) * lambda * ev * (r - 1.0) * (r - s_r));
            AsymptoticEstimate::new(regime, r, theta - 1.0, constant)
        }
        Regime::SubcritGeom => {
            let z1 = solve_fixed_point_sub(model)?;
            let v_z = model.vacation.transform_at(lambda, z1)?;
            let ds = model.service.laplace_d1(lambda, z1)?;
            let constant = z1 * (1.0 - rho) * (1.0 - rho) * (1.0 - v_z) / (lambda * ev * (z1 - 1.0) * (1.0 - ds));
            AsymptoticEstimate::new(regime, z1, 0.0, constant)
        }
        Regime::SubcritHeavyBoth | Regime::SubcritHeavyS | Regime::SubcritHeavyV => heavy_subcritical(model, regime)?,
        Regime::CritFiniteVar | Regime::CritPower | Regime::CritLog => critical(&model.service, lambda, regime)?,
        Regime::Supercrit => {
            let z2 = solve_fixed_point_super(model)?;
            let ds = model.service.laplace_d1(lambda, z2)?;
            let v_z = model.vacation.transform_at(lambda, z2)?;
            let constant = (1.0 - z2) * (1.0 - ds) * ev / (z2 * rho * es * (1.0 - v_z));
            AsymptoticEstimate { offset: 1.0 - 1.0 / rho, ..AsymptoticEstimate::new(regime, z2, 0.0, constant) }
        }
        _ => unreachable!("GI/M/1 regimes are not produced by classify"),
    })
}

// Constants include the slowly varying part L_0, so evaluate(N) is
// constant · N^{-(α-1)}.
fn heavy_subcritical(model: &QueueModel, regime: Regime) -> Result<AsymptoticEstimate> {
    let lambda = model.lambda;
    let rho = model.rho();
    let ev = model.vacation.mean();
    let rs = model.service.regular_variation();
    let rv = model.vacation.regular_variation();
    let (alpha, constant) = match regime {
        Regime::SubcritHeavyS => {
            let rs = rs.expect("heavy service");
            (rs.alpha, rs.slowly_varying * libm::pow(lambda, rs.alpha) / (rs.alpha - 1.0))
        }
        Regime::SubcritHeavyV => {
            let rv = rv.expect("heavy vacation");
            let a = rv.alpha;
            (a, (1.0 - rho) * libm::pow(lambda, a - 1.0) * rv.slowly_varying / ((a - 1.0) * ev))
        }
        _ => {
            let (rs, rv) = (rs.expect("heavy service"), rv.expect("heavy vacation"));
            let a = rv.alpha;
            // V̄ ~ c S̄ ~ x^{-α} L_0^V
            let c = rv.slowly_varying / rs.slowly_varying;
            let es = model.service.mean();
            let k = rv.slowly_varying * ((1.0 - rho) / ev + rho / (c * es)) * libm::pow(lambda, a - 1.0) / (a - 1.0);
            (a, k)
        }
    };
    Ok(AsymptoticEstimate::new(regime, 1.0, -(alpha - 1.0), constant))
}

fn critical(service: &Distribution, lambda: f64, regime: Regime) -> Result<AsymptoticEstimate> {
    Ok(match regime {
        Regime::CritFiniteVar => {
            let m2 = service.second_moment().expect("finite second moment");
            AsymptoticEstimate::new(regime, 1.0, -1.0, lambda * lambda * m2 / 2.0)
        }
        Regime::CritPower => {
            let t = service.density_tail().expect("density tail");
            let th = t.theta;
            let constant = t.c * libm::pow(lambda, th - 1.0) * special::gamma(th - 1.0) * special::gamma(4.0 - th)
                / ((1.0 - th) * (2.0 - th) * (3.0 - th));
            AsymptoticEstimate::new(regime, 1.0, -(th - 2.0), constant)
        }
        _ => {
            let t = service.density_tail().expect("density tail");
            AsymptoticEstimate {
                log_factor: true,
                ..AsymptoticEstimate::new(regime, 1.0, -1.0, t.c * lambda * lambda / 2.0)
            }
        }
    })
}

/// The standard M/G/1/N queue (zero vacation).
pub fn standard_mg1_loss(model: &QueueModel) -> Result<AsymptoticEstimate> {
    let standard = QueueModel::standard(model.lambda, model.service.clone())?;
    let regime = classify(&standard)?;
    let lambda = model.lambda;
    let rho = model.rho();
    Ok(match regime {
        Regime::SubcritHeavyS => heavy_subcritical(&standard, regime)?,
        Regime::SubcritGeom => {
            let s1 = solve_fixed_point_sub(&standard)?;
            let ds = model.service.laplace_d1(lambda, s1)?;
            AsymptoticEstimate::new(regime, s1, 0.0, s1 * (1.0 - rho) * (1.0 - rho) / (ds - 1.0))
        }
        Regime::CritFiniteVar | Regime::CritPower | Regime::CritLog => critical(&model.service, lambda, regime)?,
        Regime::Supercrit => {
            let s2 = solve_fixed_point_super(&standard)?;
            let ds = model.service.laplace_d1(lambda, s2)?;
            AsymptoticEstimate {
                offset: 1.0 - 1.0 / rho,
                ..AsymptoticEstimate::new(regime, s2, 0.0, (1.0 - ds) / (s2 * rho * rho))
            }
        }
        other => return Err(Error::Unclassifiable(format!("{other} does not occur without vacations"))),
    })
}

/// GI/M/1/N with interarrival law `A` and service rate `μ`, through the dual
/// M/G/1 queue with Poisson rate `μ`, service law `A` and `ρ = 1/ρ̃`.
pub fn gim1_loss(interarrival: &Distribution, mu: f64) -> Result<AsymptoticEstimate> {
    let dual = QueueModel::standard(mu, interarrival.clone())?;
    let rho = dual.rho();
    if libm::fabs(rho - 1.0) <= CRITICAL_BAND {
        let regime = classify_critical(interarrival)?;
        return critical(interarrival, mu, regime);
    }
    if rho > 1.0 {
        // ρ̃ < 1
        let eta1 = fixed_point_below_one(interarrival, mu)?;
        let d = interarrival.laplace_d1(mu, eta1)?;
        return Ok(AsymptoticEstimate::new(Regime::Gim1Subcrit, eta1, 0.0, 1.0 - d));
    }
    let offset = 1.0 - rho;
    let desc = interarrival.singularity(mu);
    if let Some(rv) = desc.regular_variation() {
        let constant = rv.slowly_varying * libm::pow(mu, rv.alpha) / (rv.alpha - 1.0);
        return Ok(AsymptoticEstimate {
            offset,
            note: Some("heavy-tail constant evaluated with the dual arrival rate mu in place of lambda"),
            ..AsymptoticEstimate::new(Regime::Gim1SupercritHeavy, 1.0, -(rv.alpha - 1.0), constant)
        });
    }
    if desc.is_finite() && !transform_exceeds(interarrival, mu, desc.location) {
        return Err(Error::Unclassifiable("A*(μ-μR) ≤ R at the interarrival singularity".into()));
    }
    let eta2 = fixed_point_above_one(interarrival, mu)?;
    let d = interarrival.laplace_d1(mu, eta2)?;
    let value = interarrival.transform_at(mu, eta2)?;
    let sq = (1.0 - rho) * (1.0 - rho);
    Ok(AsymptoticEstimate {
        offset,
        alternative_constant: Some(sq / (value - 1.0)),
        note: Some(
            "constant uses the transform derivative A*'(mu-mu*eta2); alternative_constant uses the transform value",
        ),
        ..AsymptoticEstimate::new(Regime::Gim1SupercritGeom, eta2, 0.0, sq / (d - 1.0))
    })
}
