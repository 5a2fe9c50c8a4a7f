//! Power-law fits `μ_i ≈ c · i^{-ρ}` and the summability test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;

/// Fewest eigenvalues a fit may use.
pub const MIN_FIT_POINTS: usize = 8;

/// Result of a log–log least-squares fit over `window` (1-based, inclusive).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub rho: f64,
    /// Half-width of the 95% confidence interval of `rho`.
    pub rho_ci: f64,
    pub window: (usize, usize),
    pub c: f64,
    pub r2: f64,
}

/// Default fit window `[max(2, n/64), n/4]`, clipped to the trusted range.
pub fn default_window(n: usize, floor_index: usize) -> (usize, usize) {
    ((n / 64).max(2), (n / 4).min(floor_index))
}

/// Two-sided 97.5% quantile of Student's t with `df` degrees of freedom,
/// from the Cornish–Fisher expansion around the normal quantile. Accurate to
/// about 1e-4 for `df ≥ 6`.
pub fn t_quantile_975(df: usize) -> f64 {
    let z: f64 = 1.959_963_984_540_054;
    let n = df as f64;
    let z3 = z.powi(3);
    let z5 = z.powi(5);
    let z7 = z.powi(7);
    z + (z3 + z) / (4.0 * n)
        + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * n * n)
        + (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * n * n * n)
}

/// Fits `log μ_i = log c - ρ log i` for `i` in `window` (1-based, inclusive).
pub fn fit_power_law(mu: &[f64], window: (usize, usize)) -> Result<DecayEstimate> {
    let (lo, hi) = window;
    if lo < 1 || hi > mu.len() || hi < lo || hi - lo + 1 < MIN_FIT_POINTS {
        return Err(Error::Window(format!(
            "window [{lo}, {hi}] over {} eigenvalues leaves fewer than {MIN_FIT_POINTS} points",
            mu.len()
        )));
    }
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for i in lo..=hi {
        let m = mu[i - 1];
        if !(m > 0.0) {
            return Err(Error::Window(format!("eigenvalue {i} is {m}, not positive")));
        }
        xs.push((i as f64).ln());
        ys.push(m.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let df = xs.len() - 2;
    let se = (ss_res / df as f64 / sxx).sqrt();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayEstimate {
        rho: -slope,
        rho_ci: t_quantile_975(df) * se,
        window,
        c: intercept.exp(),
        r2,
    })
}

/// Fit over the trusted eigenvalues of a decomposition. The default window
/// is [`default_window`]; explicit windows must stay within
/// `[2, min(floor_index, n/4)]`.
pub fn estimate_decay(
    decomp: &SpectralDecomposition,
    window: Option<(usize, usize)>,
) -> Result<DecayEstimate> {
    let n = decomp.len();
    let limit = (n / 4).min(decomp.floor_index());
    let window = match window {
        None => default_window(n, decomp.floor_index()),
        Some((lo, hi)) => {
            if lo < 2 || hi > limit {
                return Err(Error::Window(format!(
                    "window [{lo}, {hi}] leaves the trust zone [2, {limit}]"
                )));
            }
            (lo, hi)
        }
    };
    fit_power_law(decomp.eigenvalues(), window)
}

/// Outcome of a summability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Summability {
    Summable,
    Divergent,
    Inconclusive,
}

/// Evidence behind a [`Summability`] outcome for `Σ μ_i^p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub outcome: Summability,
    pub p: f64,
    pub p_rho: f64,
    pub margin: f64,
    pub estimate: DecayEstimate,
}

/// Margin on `p·ρ̂`: `max(2·rho_ci·p, 0.05)`.
pub fn summability_margin(estimate: &DecayEstimate, p: f64) -> f64 {
    (2.0 * estimate.rho_ci * p).max(0.05)
}

/// `Σ μ_i^p` converges iff `p·ρ > 1`, decided with a margin.
pub fn classify(estimate: &DecayEstimate, p: f64) -> SummabilityReport {
    let p_rho = p * estimate.rho;
    let margin = summability_margin(estimate, p);
    let outcome = if p_rho > 1.0 + margin {
        Summability::Summable
    } else if p_rho < 1.0 - margin {
        Summability::Divergent
    } else {
        Summability::Inconclusive
    };
    SummabilityReport {
        outcome,
        p,
        p_rho,
        margin,
        estimate: estimate.clone(),
    }
}

/// Summability of `Σ μ_i^p` from a default-window decay fit.
pub fn summability_test(decomp: &SpectralDecomposition, p: f64) -> Result<SummabilityReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("p must be positive, got {p}")));
    }
    Ok(classify(&estimate_decay(decomp, None)?, p))
}
