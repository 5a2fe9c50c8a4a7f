//! Truncated power kernels `k^β(s,t) = Σ_{i≤N} μ_i^β e_i(s) e_i(t)` and the
//! grid monitor for `Σ_i μ_i^β e_i(t)² < ∞`.

use faer::Mat;
use serde::Serialize;

use super::SpectralDecomposition;
use crate::error::{param, Error, Result};

/// Dyadic tail increments must shrink by at least this factor per doubling
/// to count as convergent.
pub const DIVERGENCE_RATIO: f64 = 1.1;

/// Grid points monitored at most.
const MONITOR_POINTS: usize = 256;

/// Dyadic partial sums of `Σ μ_i^β e_i(x)²` on a node grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceMonitor {
    /// Node indices of the monitor grid.
    pub grid: Vec<usize>,
    /// Block ends `…, N/4, N/2, N`.
    pub block_ends: Vec<usize>,
    /// `max_x (S_{b_k}(x) - S_{b_{k-1}}(x))` for each block after the first.
    pub sup_increments: Vec<f64>,
    /// Per grid point: last two increments shrink by `DIVERGENCE_RATIO`.
    pub point_converged: Vec<bool>,
    /// `sup_increments[K-1] / sup_increments[K]`.
    pub last_ratio: f64,
    /// The sup-over-grid tail shrinks by `DIVERGENCE_RATIO`.
    pub converged: bool,
}

impl ConvergenceMonitor {
    pub fn fraction_converged(&self) -> f64 {
        let ok = self.point_converged.iter().filter(|&&c| c).count();
        ok as f64 / self.point_converged.len().max(1) as f64
    }
}

fn shrink_ratio(prev: f64, last: f64) -> f64 {
    if last <= 0.0 {
        f64::INFINITY
    } else {
        prev / last
    }
}

/// `k^β` built from the first `n_terms` eigenpairs of a decomposition.
#[derive(Clone, Debug)]
pub struct PowerKernel<'a> {
    source: &'a SpectralDecomposition,
    beta: f64,
    n_terms: usize,
    scaled: Vec<f64>,
    monitor: ConvergenceMonitor,
}

/// Builds `k^β` with truncation `n_terms ≤ floor_index` and runs the monitor.
pub fn power_kernel(
    decomp: &SpectralDecomposition,
    beta: f64,
    n_terms: usize,
) -> Result<PowerKernel<'_>> {
    if !(beta > 0.0 && beta <= 1.0) {
        return param(format!("beta must lie in (0, 1], got {beta}"));
    }
    if n_terms == 0 || n_terms > decomp.floor_index() {
        return Err(Error::DegenerateEigenvalue {
            index: n_terms,
            floor_index: decomp.floor_index(),
        });
    }
    let scaled: Vec<f64> = decomp.eigenvalues()[..n_terms]
        .iter()
        .map(|mu| mu.powf(beta))
        .collect();
    let monitor = monitor(decomp, &scaled);
    Ok(PowerKernel {
        source: decomp,
        beta,
        n_terms,
        scaled,
        monitor,
    })
}

fn monitor(decomp: &SpectralDecomposition, scaled: &[f64]) -> ConvergenceMonitor {
    let n = decomp.rule().len();
    let grid: Vec<usize> = if n <= MONITOR_POINTS {
        (0..n).collect()
    } else {
        (0..MONITOR_POINTS).map(|k| k * n / MONITOR_POINTS).collect()
    };
    let big_n = scaled.len();
    let mut block_ends = Vec::new();
    let mut b = big_n;
    while b >= 1 {
        block_ends.push(b);
        b /= 2;
    }
    block_ends.reverse();

    // sums[p][k] = S_{block_ends[k]}(x_p)
    let sums: Vec<Vec<f64>> = grid
        .iter()
        .map(|&j| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(block_ends.len());
            let mut done = 0;
            for &end in &block_ends {
                for (i, s) in scaled.iter().enumerate().take(end).skip(done) {
                    let e = decomp.coeff(j, i);
                    acc += s * e * e;
                }
                done = end;
                out.push(acc);
            }
            out
        })
        .collect();

    let blocks = block_ends.len();
    let sup_increments: Vec<f64> = (1..blocks)
        .map(|k| {
            sums.iter()
                .map(|s| s[k] - s[k - 1])
                .fold(0.0f64, f64::max)
        })
        .collect();
    let point_converged = sums
        .iter()
        .map(|s| {
            blocks < 3
                || shrink_ratio(s[blocks - 2] - s[blocks - 3], s[blocks - 1] - s[blocks - 2])
                    >= DIVERGENCE_RATIO
        })
        .collect();
    let last_ratio = match sup_increments.len() {
        0 | 1 => f64::INFINITY,
        m => shrink_ratio(sup_increments[m - 2], sup_increments[m - 1]),
    };
    ConvergenceMonitor {
        grid,
        block_ends,
        sup_increments,
        point_converged,
        last_ratio,
        converged: last_ratio >= DIVERGENCE_RATIO,
    }
}

impl<'a> PowerKernel<'a> {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn source(&self) -> &'a SpectralDecomposition {
        self.source
    }

    pub fn monitor(&self) -> &ConvergenceMonitor {
        &self.monitor
    }

    /// `k^β(x_a, x_b)` at nodes, from the stored node values.
    pub fn eval_nodes(&self, a: usize, b: usize) -> f64 {
        self.scaled
            .iter()
            .enumerate()
            .map(|(i, s)| s * self.source.coeff(a, i) * self.source.coeff(b, i))
            .sum()
    }

    /// `k^β` on the node grid.
    pub fn node_gram(&self) -> Mat<f64> {
        let n = self.source.rule().len();
        let mut out = Mat::<f64>::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = self.eval_nodes(a, b);
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
        out
    }

    /// `k^β(s, t)` at arbitrary points via Nyström extension.
    pub fn eval(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        let es = self.source.extend_all(s, self.n_terms)?;
        let et = self.source.extend_all(t, self.n_terms)?;
        Ok(self
            .scaled
            .iter()
            .zip(es.iter().zip(&et))
            .map(|(sc, (a, b))| sc * a * b)
            .sum())
    }
}

/// `k^β(s, t)` for a built power kernel.
pub fn power_eval(pk: &PowerKernel<'_>, s: &[f64], t: &[f64]) -> Result<f64> {
    pk.eval(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_wiener;
    use crate::quadrature::gauss_legendre;
    use crate::spectral::nystrom_decompose;

    #[test]
    fn rejects_bad_beta_and_truncation() {
        let d = nystrom_decompose(&make_wiener(), &gauss_legendre(32, 0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(power_kernel(&d, 0.0, 8), Err(Error::Parameter(_))));
        assert!(matches!(power_kernel(&d, 1.5, 8), Err(Error::Parameter(_))));
        assert!(matches!(power_kernel(&d, 0.5, 0), Err(Error::DegenerateEigenvalue { .. })));
        assert!(power_kernel(&d, 0.5, 33).is_err());
    }

    #[test]
    fn wiener_half_power_diverges_on_the_grid() {
        let d = nystrom_decompose(&make_wiener(), &gauss_legendre(512, 0.0, 1.0).unwrap()).unwrap();
        let pk = power_kernel(&d, 0.5, 128).unwrap();
        let m = pk.monitor();
        assert_eq!(m.block_ends, vec![1, 2, 4, 8, 16, 32, 64, 128]);
        assert!(!m.converged, "ratio {}", m.last_ratio);
        // At β = 0.9 the tail of Σ i^{-1.8} shrinks by ≈ 2^{0.8} per doubling.
        let pk = power_kernel(&d, 0.9, 128).unwrap();
        assert!(pk.monitor().converged);
    }

    #[test]
    fn extension_agrees_with_node_form() {
        let d = nystrom_decompose(&make_wiener(), &gauss_legendre(64, 0.0, 1.0).unwrap()).unwrap();
        let pk = power_kernel(&d, 0.7, 16).unwrap();
        let x3 = d.rule().node(3).to_vec();
        let x40 = d.rule().node(40).to_vec();
        let ext = power_eval(&pk, &x3, &x40).unwrap();
        assert!((ext - pk.eval_nodes(3, 40)).abs() < 1e-8);
    }
}
