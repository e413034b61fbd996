//! Service, vacation and interarrival time laws.
//!
//! A [`Distribution`] knows its moments, tail, density, Laplace transform
//! (with the first two derivatives in the `z` variable used throughout the
//! embedded-chain analysis), how to sample itself, and where the transform
//! `F*(λ - λz)` stops being analytic.

use alloc::vec::Vec;
use alloc::{format, string::String};

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::real::Real;
use crate::special;

/// Parameters of a distribution family.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Exponential {
        rate: f64,
    },
    /// Density `rate^shape x^(shape-1) e^(-rate x) / (shape-1)!`.
    Erlang {
        shape: u32,
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    HyperExponential {
        weights: Vec<f64>,
        rates: Vec<f64>,
    },
    /// Tail `(scale/x)^alpha` for `x >= scale`.
    Pareto {
        alpha: f64,
        scale: f64,
    },
    /// Point mass at zero.
    Zero,
}

/// A validated probability law on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    family: Family,
}

/// Tail `F̄(x) ~ x^(-alpha) L0`, with a constant slowly varying part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularVariation {
    pub alpha: f64,
    pub slowly_varying: f64,
}

/// Density tail `f(x) ~ c x^(-theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTail {
    pub theta: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularityKind {
    /// `F*(λ - λz) ~ coefficient / (R - z)^order` as `z -> R`.
    Pole { order: f64, coefficient: f64 },
    /// The transform is entire; `R = ∞`.
    Entire,
    /// Heavy tail: the transform is singular at `R = 1`.
    HeavyTail(RegularVariation),
}

/// Leftmost singular point of `F*(λ - λz)` in the `z` plane and its type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityDescriptor {
    pub location: f64,
    pub kind: SingularityKind,
}

impl SingularityDescriptor {
    pub fn is_finite(&self) -> bool {
        self.location.is_finite()
    }

    pub fn order(&self) -> Option<f64> {
        match self.kind {
            SingularityKind::Pole { order, .. } => Some(order),
            _ => None,
        }
    }

    pub fn coefficient(&self) -> Option<f64> {
        match self.kind {
            SingularityKind::Pole { coefficient, .. } => Some(coefficient),
            _ => None,
        }
    }

    pub fn regular_variation(&self) -> Option<RegularVariation> {
        match self.kind {
            SingularityKind::HeavyTail(rv) => Some(rv),
            _ => None,
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and positive, got {x}")))
    }
}

const PARETO_TOL: f64 = 1e-13;

impl Distribution {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Exponential { rate } => positive("exponential rate", *rate)?,
            Family::Erlang { shape, rate } => {
                if *shape == 0 {
                    return Err(invalid("erlang shape must be at least 1".into()));
                }
                positive("erlang rate", *rate)?;
            }
            Family::Deterministic { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(invalid(format!("deterministic value must be >= 0, got {value}")));
                }
            }
            Family::HyperExponential { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return Err(invalid("hyperexponential needs equally many weights and rates".into()));
                }
                for &w in weights {
                    positive("hyperexponential weight", w)?;
                }
                for &r in rates {
                    positive("hyperexponential rate", r)?;
                }
                let total: f64 = weights.iter().sum();
                if libm::fabs(total - 1.0) > 1e-9 {
                    return Err(invalid(format!("hyperexponential weights sum to {total}, not 1")));
                }
                let weights = weights.iter().map(|w| w / total).collect();
                return Ok(Distribution { family: Family::HyperExponential { weights, rates: rates.clone() } });
            }
            Family::Pareto { alpha, scale } => {
                if !(alpha.is_finite() && *alpha > 1.0) {
                    return Err(invalid(format!("pareto tail index must exceed 1, got {alpha}")));
                }
                positive("pareto scale", *scale)?;
            }
            Family::Zero => {}
        }
        Ok(Distribution { family })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        Self::new(Family::Erlang { shape, rate })
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        Self::new(Family::Deterministic { value })
    }

    pub fn hyperexponential(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        Self::new(Family::HyperExponential { weights, rates })
    }

    pub fn pareto(alpha: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Pareto { alpha, scale })
    }

    pub fn zero() -> Self {
        Distribution { family: Family::Zero }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// True for laws with all mass at zero (`Zero` or `Deterministic(0)`).
    pub fn is_zero(&self) -> bool {
        match self.family {
            Family::Zero => true,
            Family::Deterministic { value } => value == 0.0,
            _ => false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Exponential { .. } => "exponential",
            Family::Erlang { .. } => "erlang",
            Family::Deterministic { .. } => "deterministic",
            Family::HyperExponential { .. } => "hyperexponential",
            Family::Pareto { .. } => "pareto",
            Family::Zero => "zero",
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.family {
            Family::Exponential { rate } => 1.0 / rate,
            Family::Erlang { shape, rate } => *shape as f64 / rate,
            Family::Deterministic { value } => *value,
            Family::HyperExponential { weights, rates } => weights.iter().zip(rates).map(|(w, p)| w / p).sum(),
            Family::Pareto { alpha, scale } => alpha * scale / (alpha - 1.0),
            Family::Zero => 0.0,
        }
    }

    /// [`mean`](Self::mean) evaluated in `R`, so that it agrees with the
    /// arrival counts computed in the same arithmetic.
    pub fn mean_in<R: Real>(&self) -> R {
        match &self.family {
            Family::Exponential { rate } => R::one() / R::from_f64(*rate),
            Family::Erlang { shape, rate } => R::from_f64(*shape as f64) / R::from_f64(*rate),
            Family::Deterministic { value } => R::from_f64(*value),
            Family::HyperExponential { weights, rates } => {
                let total = weights.iter().fold(R::zero(), |acc, w| acc + R::from_f64(*w));
                weights.iter().zip(rates).fold(R::zero(), |acc, (w, p)| acc + R::from_f64(*w) / R::from_f64(*p)) / total
            }
            Family::Pareto { alpha, scale } => {
                let a = R::from_f64(*alpha);
                a.clone() * R::from_f64(*scale) / (a - R::one())
            }
            Family::Zero => R::zero(),
        }
    }

    /// `E[X²]`, or `None` when it is infinite.
    pub fn second_moment(&self) -> Option<f64> {
        Some(match &self.family {
            Family::Exponential { rate } => 2.0 / (rate * rate),
            Family::Erlang { shape, rate } => {
                let m = *shape as f64;
                m * (m + 1.0) / (rate * rate)
            }
            Family::Deterministic { value } => value * value,
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, p)| 2.0 * w / (p * p)).sum()
            }
            Family::Pareto { alpha, scale } => {
                if *alpha <= 2.0 {
                    return None;
                }
                alpha * scale * scale / (alpha - 2.0)
            }
            Family::Zero => 0.0,
        })
    }

    /// `P(X > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match &self.family {
            Family::Exponential { rate } => libm::exp(-rate * x),
            Family::Erlang { shape, rate } => {
                let ax = rate * x;
                let mut term = 1.0;
                let mut sum = 1.0;
                for i in 1..*shape {
                    term *= ax / i as f64;
                    sum += term;
                }
                libm::exp(-ax) * sum
            }
            Family::Deterministic { value } => {
                if x < *value {
                    1.0
                } else {
                    0.0
                }
            }
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, p)| w * libm::exp(-p * x)).sum()
            }
            Family::Pareto { alpha, scale } => {
                if x < *scale {
                    1.0
                } else {
                    libm::pow(scale / x, *alpha)
                }
            }
            Family::Zero => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    /// Probability density, or `None` for laws with an atom.
    pub fn density(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return Some(0.0);
        }
        Some(match &self.family {
            Family::Exponential { rate } => rate * libm::exp(-rate * x),
            Family::Erlang { shape, rate } => {
                let m = *shape as f64;
                if x == 0.0 {
                    return Some(if *shape == 1 { *rate } else { 0.0 });
                }
                libm::exp(m * libm::log(*rate) + (m - 1.0) * libm::log(x) - rate * x - special::ln_gamma(m))
            }
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, p)| w * p * libm::exp(-p * x)).sum()
            }
            Family::Pareto { alpha, scale } => {
                if x < *scale {
                    0.0
                } else {
                    alpha * libm::pow(*scale, *alpha) * libm::pow(x, -alpha - 1.0)
                }
            }
            Family::Deterministic { .. } | Family::Zero => return None,
        })
    }

    /// `s_abs` such that `∫ e^{-tx} dF(x)` converges for every `t > -s_abs`.
    pub fn abscissa(&self) -> f64 {
        match &self.family {
            Family::Exponential { rate } | Family::Erlang { rate, .. } => *rate,
            Family::HyperExponential { rates, .. } => rates.iter().copied().fold(f64::INFINITY, f64::min),
            Family::Pareto { .. } => 0.0,
            Family::Deterministic { .. } | Family::Zero => f64::INFINITY,
        }
    }

    fn check_domain(&self, t: f64, k: u32) -> Result<()> {
        let s = self.abscissa();
        if t.is_nan() {
            return Err(Error::Domain { argument: t, abscissa: -s });
        }
        if s.is_infinite() {
            return Ok(());
        }
        if let Family::Pareto { alpha, .. } = self.family {
            // Converges at t = 0 exactly when the k-th moment is finite.
            if t > 0.0 || (t == 0.0 && (k as f64) < alpha) {
                return Ok(());
            }
            return Err(Error::Domain { argument: t, abscissa: 0.0 });
        }
        let margin = 1e-12 * s.max(1.0);
        if t > -s + margin {
            Ok(())
        } else {
            Err(Error::Domain { argument: t, abscissa: -s })
        }
    }

    /// `∫ x^k e^{-tx} dF(x)` for `k <= 2`.
    pub fn moment_transform(&self, k: u32, t: f64) -> Result<f64> {
        self.check_domain(t, k)?;
        Ok(match &self.family {
            Family::Exponential { rate } => exp_moment_transform(*rate, k, t),
            Family::Erlang { shape, rate } => {
                let base = rate + t;
                let mut rising = 1.0;
                for i in 0..k {
                    rising *= (*shape + i) as f64;
                }
                libm::pow(rate / base, *shape as f64) * rising / libm::pow(base, k as f64)
            }
            Family::Deterministic { value } => {
                let d = *value;
                libm::pow(d, k as f64) * libm::exp(-t * d)
            }
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, p)| w * exp_moment_transform(*p, k, t)).sum()
            }
            Family::Pareto { alpha, scale } => pareto_moment_transform(*alpha, *scale, k, t),
            Family::Zero => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// Laplace–Stieltjes transform `F*(t)`.
    pub fn laplace(&self, t: f64) -> Result<f64> {
        self.moment_transform(0, t)
    }

    /// `F*(λ - λz)`.
    pub fn transform_at(&self, lambda: f64, z: f64) -> Result<f64> {
        self.laplace(lambda - lambda * z)
    }

    /// `d/dz F*(λ - λz) = ∫ λt e^{-(λ-λz)t} dF(t)`.
    pub fn laplace_d1(&self, lambda: f64, z: f64) -> Result<f64> {
        Ok(lambda * self.moment_transform(1, lambda - lambda * z)?)
    }

    /// `d²/dz² F*(λ - λz) = ∫ (λt)² e^{-(λ-λz)t} dF(t)`.
    pub fn laplace_d2(&self, lambda: f64, z: f64) -> Result<f64> {
        Ok(lambda * lambda * self.moment_transform(2, lambda - lambda * z)?)
    }

    /// Transform evaluated by quadrature of the density, independent of the
    /// closed forms. Atoms are handled exactly.
    pub fn laplace_numeric(&self, t: f64) -> Result<f64> {
        self.check_domain(t, 0)?;
        match &self.family {
            Family::Deterministic { value } => Ok(libm::exp(-t * value)),
            Family::Zero => Ok(1.0),
            Family::Pareto { .. } => self.laplace(t),
            _ => {
                let f = |x: f64| libm::exp(-t * x) * self.density(x).unwrap_or(0.0);
                let est = quadrature::integrate_to_infinity(f, 0.0, Tolerance::relative(1e-13));
                Ok(est.value)
            }
        }
    }

    /// Inverse-CDF transform of a single uniform, for families where one
    /// uniform suffices. Returns `None` for Erlang and hyperexponential laws.
    pub fn quantile(&self, u: f64) -> Option<f64> {
        match &self.family {
            // `u` and `1 - u` are equal in law; `-ln(u)` is the usual form.
            Family::Exponential { rate } => Some(-libm::log(u) / rate),
            Family::Deterministic { value } => Some(*value),
            Family::Pareto { alpha, scale } => Some(scale * libm::pow(u, -1.0 / alpha)),
            Family::Zero => Some(0.0),
            Family::Erlang { .. } | Family::HyperExponential { .. } => None,
        }
    }

    /// Draws one variate.
    pub fn sample<G: RngCore + ?Sized>(&self, rng: &mut G) -> f64 {
        match &self.family {
            Family::Erlang { shape, rate } => {
                let mut s = 0.0;
                for _ in 0..*shape {
                    s -= libm::log(uniform(rng));
                }
                s / rate
            }
            Family::HyperExponential { weights, rates } => {
                let pick = uniform(rng);
                let mut acc = 0.0;
                let mut idx = rates.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if pick < acc {
                        idx = i;
                        break;
                    }
                }
                -libm::log(uniform(rng)) / rates[idx]
            }
            Family::Deterministic { value } => *value,
            Family::Zero => 0.0,
            _ => self.quantile(uniform(rng)).expect("single-uniform family"),
        }
    }

    pub fn regular_variation(&self) -> Option<RegularVariation> {
        match self.family {
            Family::Pareto { alpha, scale } => {
                Some(RegularVariation { alpha, slowly_varying: libm::pow(scale, alpha) })
            }
            _ => None,
        }
    }

    /// Power-law density tail `f(x) ~ c x^(-theta)`, when the law has one.
    pub fn density_tail(&self) -> Option<DensityTail> {
        match self.family {
            Family::Pareto { alpha, scale } => {
                Some(DensityTail { theta: alpha + 1.0, c: alpha * libm::pow(scale, alpha) })
            }
            _ => None,
        }
    }

    /// Leftmost singularity of `F*(λ - λz)`, asserted per family.
    pub fn singularity(&self, lambda: f64) -> SingularityDescriptor {
        match &self.family {
            Family::Exponential { rate } => SingularityDescriptor {
                location: 1.0 + rate / lambda,
                kind: SingularityKind::Pole { order: 1.0, coefficient: rate / lambda },
            },
            Family::Erlang { shape, rate } => SingularityDescriptor {
                location: 1.0 + rate / lambda,
                kind: SingularityKind::Pole {
                    order: *shape as f64,
                    coefficient: libm::pow(rate / lambda, *shape as f64),
                },
            },
            Family::HyperExponential { weights, rates } => {
                let min = self.abscissa();
                let coefficient =
                    weights.iter().zip(rates).filter(|(_, p)| **p == min).map(|(w, p)| w * p / lambda).sum();
                SingularityDescriptor {
                    location: 1.0 + min / lambda,
                    kind: SingularityKind::Pole { order: 1.0, coefficient },
                }
            }
            Family::Pareto { .. } => SingularityDescriptor {
                location: 1.0,
                kind: SingularityKind::HeavyTail(self.regular_variation().expect("pareto")),
            },
            Family::Deterministic { .. } | Family::Zero => {
                SingularityDescriptor { location: f64::INFINITY, kind: SingularityKind::Entire }
            }
        }
    }
}

/// Uniform on the open interval (0, 1).
pub fn uniform<G: RngCore + ?Sized>(rng: &mut G) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

fn exp_moment_transform(rate: f64, k: u32, t: f64) -> f64 {
    let base = rate + t;
    match k {
        0 => rate / base,
        1 => rate / (base * base),
        _ => {
            let mut fact = 1.0;
            for i in 2..=k {
                fact *= i as f64;
            }
            fact * rate / libm::pow(base, k as f64 + 1.0)
        }
    }
}

// α x_m^k ∫_0^1 u^(α-1-k) e^{-t x_m / u} du, from the substitution u = x_m/x.
fn pareto_moment_transform(alpha: f64, scale: f64, k: u32, t: f64) -> f64 {
    let kf = k as f64;
    let front = alpha * libm::pow(scale, kf);
    if t == 0.0 {
        return front / (alpha - kf);
    }
    let c = t * scale;
    let power = alpha - 1.0 - kf;
    let f = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            libm::exp(-c / u + power * libm::log(u))
        }
    };
    // Below u ~ c/745 the exponential underflows.
    let cut = (c / 745.0).min(0.5);
    let est = quadrature::integrate_pieces(&f, &[cut, 0.5 * (cut + 1.0), 1.0], Tolerance::relative(PARETO_TOL));
    front * est.value
}
