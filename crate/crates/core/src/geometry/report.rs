use serde::Serialize;

use super::body::intrinsic_volumes;
use super::set::{PConvexSet, ScalingVector};
use crate::error::{Error, Result};
use crate::Scalar;

/// Relative growth over the second half of a schedule that counts as a
/// violation.
pub const GROWTH_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionRow {
    pub scale: Vec<f64>,
    /// `Σ_i V_j(c_n⁻¹ C_{n,i})` for `j = 1..d-1`; `None` when a body kind has
    /// no closed form.
    pub intrinsic_volume_sums: Option<Vec<f64>>,
    /// Smallest `c` with `C_n ⊆ c_n [-c, c]^d`.
    pub bound: f64,
    /// `|C_n|`.
    pub set_volume: f64,
    /// `(c_{n,1} ⋯ c_{n,d}) / |C_n|`.
    pub volume_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub rows: Vec<AssumptionRow>,
    pub intrinsic_volume_growth: bool,
    pub bound_growth: bool,
    pub volume_ratio_drift: bool,
    /// Some intrinsic volumes could not be evaluated.
    pub unchecked: bool,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        !(self.intrinsic_volume_growth || self.bound_growth || self.volume_ratio_drift)
    }
}

/// Diagnostics for a sequence `C_n = s_n C` observed through scaling vectors
/// `c_n`. When `set_scales` is `None`, `s_n = c_n`.
pub fn assumption_report<T: Scalar>(
    generator: &PConvexSet<T>,
    scales: &[ScalingVector<T>],
    set_scales: Option<&[ScalingVector<T>]>,
) -> Result<AssumptionReport> {
    generator.validate()?;
    if let Some(s) = set_scales {
        if s.len() != scales.len() {
            return Err(Error::InvalidArgument("set scales and scaling vectors differ in length".into()));
        }
    }
    let d = generator.dim();
    let mut rows = Vec::with_capacity(scales.len());
    let mut unchecked = false;
    for (n, c) in scales.iter().enumerate() {
        if c.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: c.dim(),
            });
        }
        let s = set_scales.map_or(c, |s| &s[n]);
        let set_n = generator.scaled(s.entries());
        let inv: Vec<T> = c.entries().iter().map(|x| T::one() / *x).collect();
        let normalized = set_n.scaled(&inv);

        let mut sums = vec![0.0; d.saturating_sub(1)];
        let mut ok = true;
        for body in &normalized.bodies {
            match intrinsic_volumes(body) {
                Ok(v) => {
                    for j in 1..d {
                        sums[j - 1] += v[j].as_f64();
                    }
                }
                Err(_) => ok = false,
            }
        }
        unchecked |= !ok;
        let set_volume = set_n.volume().as_f64();
        rows.push(AssumptionRow {
            scale: c.entries().iter().map(|x| x.as_f64()).collect(),
            intrinsic_volume_sums: ok.then_some(sums),
            bound: normalized.bound_constant().as_f64(),
            set_volume,
            volume_ratio: c.product().as_f64() / set_volume,
        });
    }

    let series = |f: &dyn Fn(&AssumptionRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let mut intrinsic_volume_growth = false;
    if !unchecked {
        for j in 0..d.saturating_sub(1) {
            intrinsic_volume_growth |= grows(&series(&|r| r.intrinsic_volume_sums.as_ref().unwrap()[j]));
        }
    }
    let bound_growth = grows(&series(&|r| r.bound));
    let ratio = series(&|r| r.volume_ratio);
    let inverse: Vec<f64> = ratio.iter().map(|r| 1.0 / r).collect();
    let volume_ratio_drift = grows(&ratio) || grows(&inverse);
    Ok(AssumptionReport {
        rows,
        intrinsic_volume_growth,
        bound_growth,
        volume_ratio_drift,
        unchecked,
    })
}

/// Monotone increase by more than [`GROWTH_TOLERANCE`] over the last half.
fn grows(values: &[f64]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let tail = &values[values.len() / 2..];
    let tail = if tail.len() < 2 { &values[values.len() - 2..] } else { tail };
    let monotone = tail.windows(2).all(|w| w[1] > w[0]);
    monotone && tail[tail.len() - 1] > tail[0] * (1.0 + GROWTH_TOLERANCE)
}
