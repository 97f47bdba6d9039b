use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Continuous marginal law `F` with closed-form quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarginal<T>", into = "RawMarginal<T>", bound = "T: Scalar")]
pub enum MarginalDistribution<T> {
    /// Uniform on `(0, 1)`.
    Uniform,
    /// `F(x) = 1 - e^{-rate x}` on `x > 0`.
    Exponential { rate: T },
    /// Unit Fréchet, `F(x) = e^{-1/x}` on `x > 0`.
    Frechet,
    /// `F(x) = 1 - x^{-alpha}` on `x > 1`.
    Pareto { alpha: T },
}

/// Wire form; serde's tagged enums accept stray keys on unit variants.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct RawMarginal<T> {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<T>,
}

impl<T: Scalar> TryFrom<RawMarginal<T>> for MarginalDistribution<T> {
    type Error = String;

    fn try_from(raw: RawMarginal<T>) -> std::result::Result<Self, String> {
        let extra = |name: &str, present: bool| {
            if present {
                Err(format!("unknown field `{name}` for marginal `{}`", raw.kind))
            } else {
                Ok(())
            }
        };
        let need = |name: &str, v: Option<T>| v.ok_or_else(|| format!("missing field `{name}` for marginal `{}`", raw.kind));
        match raw.kind.as_str() {
            "uniform" | "frechet" => {
                extra("rate", raw.rate.is_some())?;
                extra("alpha", raw.alpha.is_some())?;
                Ok(if raw.kind == "uniform" { Self::Uniform } else { Self::Frechet })
            }
            "exponential" => {
                extra("alpha", raw.alpha.is_some())?;
                Ok(Self::Exponential { rate: need("rate", raw.rate)? })
            }
            "pareto" => {
                extra("rate", raw.rate.is_some())?;
                Ok(Self::Pareto { alpha: need("alpha", raw.alpha)? })
            }
            other => Err(format!(
                "unknown variant `{other}`, expected one of `uniform`, `exponential`, `frechet`, `pareto`"
            )),
        }
    }
}

impl<T: Scalar> From<MarginalDistribution<T>> for RawMarginal<T> {
    fn from(m: MarginalDistribution<T>) -> Self {
        let (kind, rate, alpha) = match m {
            MarginalDistribution::Uniform => ("uniform", None, None),
            MarginalDistribution::Exponential { rate } => ("exponential", Some(rate), None),
            MarginalDistribution::Frechet => ("frechet", None, None),
            MarginalDistribution::Pareto { alpha } => ("pareto", None, Some(alpha)),
        };
        Self {
            kind: kind.into(),
            rate,
            alpha,
        }
    }
}

impl<T: Scalar> MarginalDistribution<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { rate: p } | Self::Pareto { alpha: p } if !(p > T::zero() && p.is_finite()) => Err(
                Error::InvalidDistribution(format!("parameter must be positive and finite, got {p}")),
            ),
            _ => Ok(()),
        }
    }

    /// Lower end of the support.
    pub fn support_inf(&self) -> T {
        match self {
            Self::Pareto { .. } => T::one(),
            _ => T::zero(),
        }
    }

    /// Upper end of the support.
    pub fn support_sup(&self) -> T {
        match self {
            Self::Uniform => T::one(),
            _ => T::infinity(),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        if x <= self.support_inf() {
            return T::zero();
        }
        if x >= self.support_sup() {
            return T::one();
        }
        match *self {
            Self::Uniform => x,
            Self::Exponential { rate } => -(-rate * x).exp_m1(),
            Self::Frechet => (-x.recip()).exp(),
            Self::Pareto { alpha } => T::one() - x.powf(-alpha),
        }
    }

    /// `F̄(x) = 1 - F(x)`, evaluated without cancellation in the upper tail.
    pub fn sf(&self, x: T) -> T {
        if x <= self.support_inf() {
            return T::one();
        }
        if x >= self.support_sup() {
            return T::zero();
        }
        match *self {
            Self::Uniform => T::one() - x,
            Self::Exponential { rate } => (-rate * x).exp(),
            Self::Frechet => -(-x.recip()).exp_m1(),
            Self::Pareto { alpha } => x.powf(-alpha),
        }
    }

    /// `F^{-1}(q)` for `q ∈ [0, 1]`.
    pub fn quantile(&self, q: T) -> T {
        if q <= T::zero() {
            return self.support_inf();
        }
        if q >= T::one() {
            return self.support_sup();
        }
        match *self {
            Self::Uniform => q,
            Self::Exponential { rate } => -(-q).ln_1p() / rate,
            Self::Frechet => -q.ln().recip(),
            Self::Pareto { alpha } => (T::one() - q).powf(-alpha.recip()),
        }
    }

    /// `F^{-1}(1 - p)`, accurate for small `p`.
    pub fn upper_quantile(&self, p: T) -> T {
        if p <= T::zero() {
            return self.support_sup();
        }
        if p >= T::one() {
            return self.support_inf();
        }
        match *self {
            Self::Uniform => T::one() - p,
            Self::Exponential { rate } => -p.ln() / rate,
            Self::Frechet => -(-p).ln_1p().recip(),
            Self::Pareto { alpha } => p.powf(-alpha.recip()),
        }
    }

    /// `F^{-1}(e^{lq})` for `lq ≤ 0`; used for `F^{-1}(u^b)` without forming
    /// `u^b` explicitly.
    pub fn quantile_of_log(&self, lq: T) -> T {
        if lq >= T::zero() {
            return self.support_sup();
        }
        if lq == T::neg_infinity() {
            return self.support_inf();
        }
        match *self {
            Self::Uniform => lq.exp(),
            Self::Exponential { rate } => -(-lq.exp_m1()).ln() / rate,
            Self::Frechet => -lq.recip(),
            Self::Pareto { alpha } => (-lq.exp_m1()).powf(-alpha.recip()),
        }
    }
}

/// Threshold `x_n` with `size · F̄(x_n) = τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ThresholdSchedule<T> {
    pub tau: f64,
    pub level: T,
    pub size: usize,
}

pub fn threshold<T: Scalar>(marginal: &MarginalDistribution<T>, size: usize, tau: f64) -> Result<ThresholdSchedule<T>> {
    marginal.validate()?;
    if !(tau > 0.0 && tau < size as f64) {
        return Err(Error::ThresholdOutOfRange { tau, size });
    }
    let p = T::lit(tau / size as f64);
    Ok(ThresholdSchedule {
        tau,
        level: marginal.upper_quantile(p),
        size,
    })
}
