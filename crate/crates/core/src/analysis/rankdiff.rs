//! Numerical rank of `k1 - k2` on a grid, confirmed under refinement.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::quadrature::QuadratureRule;
use crate::spectral::symmetric_eigenvalues;

/// Fewest grid nodes accepted.
pub const MIN_GRID: usize = 32;

/// Rounding floor on eigenvalues of the difference, in units of
/// `ε · n · max(‖K1‖, ‖K2‖)`.
const ROUNDING_FLOOR: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "rank")]
pub enum RankOutcome {
    Finite(usize),
    /// The rank grew when the grid was refined.
    NotFiniteRank,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub outcome: RankOutcome,
    /// `(nodes, numerical rank)` on the given grid and its refinement.
    pub ranks: Vec<(usize, usize)>,
    /// `‖K1 - K2‖₂` on the given grid.
    pub diff_norm: f64,
    /// `max(‖K1‖₂, ‖K2‖₂)` on the given grid.
    pub kernel_norm: f64,
    pub tol: f64,
}

fn spectral_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `(rank, ‖D‖, max‖K‖)` of the plain Gram difference on `grid`.
fn rank_on(k1: &Kernel, k2: &Kernel, grid: &QuadratureRule, tol: f64) -> Result<(usize, f64, f64)> {
    let g1 = k1.gram(grid)?;
    let g2 = k2.gram(grid)?;
    let n = grid.len();
    let d = faer::Mat::from_fn(n, n, |i, j| g1[(i, j)] - g2[(i, j)]);
    let knorm = spectral_norm(&symmetric_eigenvalues(&g1)?).max(spectral_norm(&symmetric_eigenvalues(&g2)?));
    let dvals = symmetric_eigenvalues(&d)?;
    let dnorm = spectral_norm(&dvals);
    if dnorm <= tol * knorm {
        return Ok((0, dnorm, knorm));
    }
    let cut = (tol * dnorm).max(ROUNDING_FLOOR * f64::EPSILON * n as f64 * knorm);
    let rank = dvals.iter().filter(|v| v.abs() > cut).count();
    Ok((rank, dnorm, knorm))
}

/// Numerical rank of `k1 - k2`: eigenvalues of the difference Gram matrix
/// above `tol · ‖D‖₂`, or zero when `‖D‖₂ ≤ tol · max‖K‖₂`. The grid is then
/// doubled; a larger rank there reports [`RankOutcome::NotFiniteRank`].
pub fn finite_rank_difference(
    k1: &Kernel,
    k2: &Kernel,
    grid: &QuadratureRule,
    tol: f64,
) -> Result<RankReport> {
    if k1.domain() != k2.domain() {
        return Err(Error::Usage(format!(
            "kernels live on different domains: {} and {}",
            k1.domain().describe(),
            k2.domain().describe()
        )));
    }
    if grid.len() < MIN_GRID {
        return Err(Error::Usage(format!(
            "rank test needs at least {MIN_GRID} grid nodes, got {}",
            grid.len()
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Parameter(format!("tol must lie in (0, 1), got {tol}")));
    }
    let (r1, diff_norm, kernel_norm) = rank_on(k1, k2, grid, tol)?;
    let fine = grid.refined(2)?;
    let (r2, _, _) = rank_on(k1, k2, &fine, tol)?;
    let outcome = if r2 > r1 {
        RankOutcome::NotFiniteRank
    } else {
        RankOutcome::Finite(r1)
    };
    Ok(RankReport {
        outcome,
        ranks: vec![(grid.len(), r1), (fine.len(), r2)],
        diff_norm,
        kernel_norm,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_brownian_bridge, make_matern, make_ou, make_wiener};
    use crate::quadrature::{circle_uniform, gauss_legendre, Domain};

    fn grid() -> QuadratureRule {
        gauss_legendre(48, 0.0, 1.0).unwrap()
    }

    #[test]
    fn wiener_minus_bridge_is_rank_one() {
        let r = finite_rank_difference(&make_wiener(), &make_brownian_bridge(), &grid(), 1e-8).unwrap();
        assert_eq!(r.outcome, RankOutcome::Finite(1));
    }

    #[test]
    fn ou_variants_differ_by_rank_one() {
        let a = make_ou(1, 1.0, 2.0).unwrap();
        let b = make_ou(2, 1.0, 2.0).unwrap();
        let r = finite_rank_difference(&a, &b, &grid(), 1e-8).unwrap();
        assert_eq!(r.outcome, RankOutcome::Finite(1));
    }

    #[test]
    fn identical_kernels_have_rank_zero() {
        let w = make_wiener();
        let r = finite_rank_difference(&w, &w, &grid(), 1e-8).unwrap();
        assert_eq!(r.outcome, RankOutcome::Finite(0));
        assert_eq!(r.diff_norm, 0.0);
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let (a, b) = (make_wiener(), make_brownian_bridge());
        let ab = finite_rank_difference(&a, &b, &grid(), 1e-8).unwrap();
        let ba = finite_rank_difference(&b, &a, &grid(), 1e-8).unwrap();
        assert_eq!(ab.outcome, ba.outcome);
    }

    #[test]
    fn usage_errors() {
        let w = make_wiener();
        let m = make_matern(0.5, 1.0, Domain::unit_cube(2).unwrap(), true).unwrap();
        assert!(matches!(finite_rank_difference(&w, &m, &grid(), 1e-8), Err(Error::Usage(_))));
        let small = gauss_legendre(16, 0.0, 1.0).unwrap();
        assert!(matches!(finite_rank_difference(&w, &w, &small, 1e-8), Err(Error::Usage(_))));
        assert!(finite_rank_difference(&w, &w, &circle_uniform(64).unwrap(), 1e-8).is_err());
    }
}
