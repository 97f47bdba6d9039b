use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0 }
    }
}

/// Sample mean with `SE = s / √n`.
pub fn mean_estimate(xs: &[f64]) -> Result<Estimate> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::UndefinedEstimate("mean of an empty sample".into()));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { value: mean, se })
}

/// Binomial proportion `p̂` with `SE = √(p̂(1-p̂)/n)`.
pub fn proportion(successes: usize, n: usize) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::UndefinedEstimate("proportion over zero trials".into()));
    }
    let p = successes as f64 / n as f64;
    Ok(Estimate {
        value: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
    })
}

/// Pooled ratio `Σ a_i / Σ b_i` over replications with the delta-method SE
/// `√(Σ (a_i - r b_i)² / (n(n-1))) / b̄`.
pub fn ratio_estimate(pairs: &[(f64, f64)]) -> Result<Estimate> {
    let n = pairs.len();
    let (sa, sb) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    if sb <= 0.0 {
        return Err(Error::UndefinedEstimate("ratio with zero denominator".into()));
    }
    let r = sa / sb;
    let se = if n > 1 {
        let bbar = sb / n as f64;
        let ss: f64 = pairs.iter().map(|(a, b)| (a - r * b).powi(2)).sum();
        (ss / (n as f64 * (n - 1) as f64)).sqrt() / bbar
    } else {
        0.0
    };
    Ok(Estimate { value: r, se })
}

/// Poisson pmf `e^{-λ} λ^j / j!` for `j = 0..len`.
fn poisson_pmf(lambda: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-lambda).exp();
    for j in 0..len {
        out.push(p);
        p *= lambda / (j + 1) as f64;
    }
    out
}

/// Tail mass below which the reference pmf is truncated.
pub const POISSON_TAIL: f64 = 1e-9;
/// Minimum expected count per pooled chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// Goodness of fit of integer counts to a Poisson law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub n: usize,
    pub intensity: f64,
    pub mean: f64,
    pub variance: f64,
    pub var_mean_ratio: f64,
    pub total_variation: f64,
    pub chi_square: f64,
    pub chi_square_df: usize,
    pub chi_square_p: Option<f64>,
    pub se_mean: f64,
    pub se_var_mean_ratio: f64,
}

pub fn poisson_gof(counts: &[usize], intensity: f64) -> Result<GofReport> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::InvalidArgument(format!("Poisson intensity must be positive, got {intensity}")));
    }
    if counts.is_empty() {
        return Err(Error::InvalidArgument("no counts".into()));
    }
    let n = counts.len();
    let nf = n as f64;
    let xs: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
    let mean = xs.iter().sum::<f64>() / nf;
    let central = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / nf;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
    let var_mean_ratio = if mean > 0.0 { variance / mean } else { 0.0 };
    let se_mean = (variance / nf).sqrt();
    let se_var_mean_ratio = if mean > 0.0 {
        let var_s2 = (m4 - m2 * m2) / nf;
        let var_mean = m2 / nf;
        let cov = m3 / nf;
        let v = var_s2 / mean.powi(2) + variance.powi(2) / mean.powi(4) * var_mean - 2.0 * variance / mean.powi(3) * cov;
        v.max(0.0).sqrt()
    } else {
        0.0
    };

    let max_count = *counts.iter().max().unwrap();
    let mut len = max_count + 1;
    loop {
        let pmf = poisson_pmf(intensity, len);
        if 1.0 - pmf.iter().sum::<f64>() < POISSON_TAIL {
            break;
        }
        len += 1;
    }
    let pmf = poisson_pmf(intensity, len);
    let mut freq = vec![0usize; len];
    for c in counts {
        freq[*c] += 1;
    }
    let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    let total_variation = 0.5
        * (freq
            .iter()
            .zip(&pmf)
            .map(|(f, p)| (*f as f64 / nf - p).abs())
            .sum::<f64>()
            + tail);

    // Pool from the right so that every bin expects at least MIN_EXPECTED.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, tail * nf);
    for j in (0..len).rev() {
        obs += freq[j] as f64;
        exp += pmf[j] * nf;
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => bins.push((obs, exp)),
        }
    }
    let chi_square: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let chi_square_df = bins.len().saturating_sub(1);
    let chi_square_p = (chi_square_df > 0).then(|| {
        ChiSquared::new(chi_square_df as f64)
            .expect("positive degrees of freedom")
            .sf(chi_square)
    });
    Ok(GofReport {
        n,
        intensity,
        mean,
        variance,
        var_mean_ratio,
        total_variation,
        chi_square,
        chi_square_df,
        chi_square_p,
        se_mean,
        se_var_mean_ratio,
    })
}

/// Pairwise Pearson correlations of the columns of an `R × G` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// `None` where a column has zero variance.
    pub correlations: Vec<Vec<Option<f64>>>,
    pub max_abs: Option<f64>,
    pub degenerate: bool,
}

pub fn independence_check(rows: &[Vec<f64>]) -> Result<IndependenceReport> {
    let g = rows.first().map_or(0, Vec::len);
    if g < 2 {
        return Err(Error::InvalidArgument("independence check needs at least two columns".into()));
    }
    if rows.iter().any(|r| r.len() != g) {
        return Err(Error::InvalidArgument("ragged count matrix".into()));
    }
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..g).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let cov = |a: usize, b: usize| {
        rows.iter()
            .map(|r| (r[a] - means[a]) * (r[b] - means[b]))
            .sum::<f64>()
    };
    let sd: Vec<f64> = (0..g).map(|j| cov(j, j).sqrt()).collect();
    let mut correlations = vec![vec![None; g]; g];
    let mut max_abs: Option<f64> = None;
    let mut degenerate = false;
    for a in 0..g {
        for b in 0..g {
            if sd[a] > 0.0 && sd[b] > 0.0 {
                let rho = if a == b { 1.0 } else { cov(a, b) / (sd[a] * sd[b]) };
                correlations[a][b] = Some(rho);
                if a < b {
                    max_abs = Some(max_abs.map_or(rho.abs(), |m| m.max(rho.abs())));
                }
            } else {
                degenerate = true;
            }
        }
    }
    Ok(IndependenceReport {
        correlations,
        max_abs,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poisson_draw(rng: &mut impl Rng, lambda: f64) -> usize {
        let limit = (-lambda).exp();
        let mut k = 0;
        let mut p: f64 = rng.gen();
        while p > limit {
            k += 1;
            p *= rng.gen::<f64>();
        }
        k
    }

    #[test]
    fn tv_examples() {
        let r = poisson_gof(&[0; 100], 0.3).unwrap();
        assert!((r.total_variation - (1.0 - (-0.3f64).exp())).abs() < 1e-9);
        let r = poisson_gof(&[0; 100], 1e-6).unwrap();
        assert!(r.total_variation < 1e-5);
        let r = poisson_gof(&[1; 50], 0.5).unwrap();
        assert!((r.total_variation - (1.0 - 0.5 * (-0.5f64).exp())).abs() < 1e-9);
        assert!((r.total_variation - 0.696_734).abs() < 1e-6);
        assert!(poisson_gof(&[1], 0.0).is_err());
    }

    #[test]
    fn poisson_draws_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let counts: Vec<usize> = (0..4000).map(|_| poisson_draw(&mut rng, 0.5)).collect();
        let r = poisson_gof(&counts, 0.5).unwrap();
        assert!(r.total_variation <= 0.02, "{r:?}");
        assert!((0.9..=1.1).contains(&r.var_mean_ratio), "{r:?}");
        assert!(r.chi_square_p.unwrap() > 0.001);
        assert!(r.chi_square_df >= 1);
    }

    #[test]
    fn correlation_examples() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        let r = independence_check(&rows).unwrap();
        assert!((r.max_abs.unwrap() - 1.0).abs() < 1e-12);
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 3.0]).collect();
        let r = independence_check(&rows).unwrap();
        assert!(r.degenerate && r.max_abs.is_none());
        assert!(independence_check(&[vec![1.0], vec![2.0]]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..4000)
            .map(|_| vec![poisson_draw(&mut rng, 0.25) as f64, poisson_draw(&mut rng, 0.25) as f64])
            .collect();
        assert!(independence_check(&rows).unwrap().max_abs.unwrap() <= 0.05);
    }

    #[test]
    fn ratio_and_proportion() {
        let r = ratio_estimate(&[(2.0, 1.0), (4.0, 2.0), (0.0, 0.0)]).unwrap();
        assert_eq!(r.value, 2.0);
        assert!(r.se.abs() < 1e-12);
        assert!(ratio_estimate(&[(0.0, 0.0)]).is_err());
        let p = proportion(25, 100).unwrap();
        assert!((p.se - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
