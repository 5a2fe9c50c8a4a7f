//! Discretised integral operators and their eigensystems.
//!
//! For a rule with nodes `x_j` and weights `w_j`, the operator
//! `T f = ∫ k(·, t) f(t) dν(t)` is represented by the symmetric matrix
//! `A = W^{1/2} K W^{1/2}`. An eigenvector `v` of `A` with eigenvalue `μ`
//! yields node values `e(x_j) = v_j / sqrt(w_j)`, orthonormal in the weighted
//! inner product, and the Nyström extension
//! `e(t) = μ^{-1} Σ_j w_j k(t, x_j) e(x_j)` to arbitrary points.

mod fft;
mod power;

use faer::{Mat, Side};

pub use fft::{fft_in_place, fft_spectrum};
pub use power::{power_eval, power_kernel, ConvergenceMonitor, PowerKernel, DIVERGENCE_RATIO};

use crate::error::{Error, Result};
use crate::format::f17;
use crate::kernels::Kernel;
use crate::quadrature::QuadratureRule;

/// Eigenvalues at or below `EPS_FLOOR * μ₁` are untrusted.
pub const EPS_FLOOR: f64 = 1e-12;

/// Negative eigenvalues down to `-EPS_PSD * μ₁` are rounding noise.
pub const EPS_PSD: f64 = 1e-8;

/// How a decomposition was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Nystrom,
    Fft,
}

/// Eigenvalues and node values of eigenfunctions of `T_{k,ν}`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    rule: QuadratureRule,
    kernel: Kernel,
    eigenvalues: Vec<f64>,
    /// Column `i` holds `e_{i+1}(x_j)` in row `j`.
    coeffs: Mat<f64>,
    floor_index: usize,
    clamped: usize,
    method: Method,
}

impl SpectralDecomposition {
    /// Sorts pairs into nonincreasing order, clamps rounding-level negatives
    /// and fixes the sign of every eigenfunction. `values[i]` belongs to
    /// column `i` of `coeffs`.
    pub(crate) fn assemble(
        kernel: &Kernel,
        rule: QuadratureRule,
        values: Vec<f64>,
        coeffs: Mat<f64>,
        method: Method,
    ) -> Result<Self> {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        // Stable, so equal eigenvalues keep their input order.
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let top = values[order[0]].max(0.0);
        let mut eigenvalues = Vec::with_capacity(n);
        let mut clamped = 0;
        for &i in &order {
            let mu = values[i];
            if !mu.is_finite() {
                return Err(Error::Internal(format!("eigenvalue {mu} is not finite")));
            }
            if mu < 0.0 {
                if mu < -EPS_PSD * top {
                    return Err(Error::Definiteness {
                        grid: format!("{} for kernel {}", rule.describe(), kernel.label()),
                        eigenvalue: mu,
                        floor: EPS_PSD,
                        top,
                    });
                }
                clamped += 1;
                eigenvalues.push(0.0);
            } else {
                eigenvalues.push(mu);
            }
        }
        let mut sorted = Mat::<f64>::zeros(coeffs.nrows(), n);
        for (dst, &src) in order.iter().enumerate() {
            let col = coeffs.col(src);
            let peak = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // First clearly nonzero entry is positive.
            let sign = col
                .iter()
                .find(|v| v.abs() > 1e-3 * peak)
                .map_or(1.0, |v| v.signum());
            for j in 0..coeffs.nrows() {
                sorted[(j, dst)] = sign * col[j];
            }
        }
        let floor_index = eigenvalues
            .iter()
            .position(|&mu| mu <= EPS_FLOOR * top)
            .unwrap_or(n);
        Ok(Self {
            rule,
            kernel: kernel.clone(),
            eigenvalues,
            coeffs: sorted,
            floor_index,
            clamped,
            method,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// All eigenvalues, nonincreasing, including those below the floor.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalues above the floor: `μ_1, …, μ_{floor_index}`.
    pub fn trusted(&self) -> &[f64] {
        &self.eigenvalues[..self.floor_index]
    }

    /// Number of eigenvalues strictly above `EPS_FLOOR * μ₁`; the 0-based
    /// position of the first untrusted one.
    pub fn floor_index(&self) -> usize {
        self.floor_index
    }

    /// Count of negative eigenvalues that were clamped to zero.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// `e_i(x_j)` for all nodes, `i` 1-based.
    pub fn node_values(&self, i: usize) -> Result<Vec<f64>> {
        self.check_index(i)?;
        Ok(self.coeffs.col(i - 1).iter().copied().collect())
    }

    /// `e_i(x_j)` without the floor check, `i` and `j` 0-based.
    pub(crate) fn coeff(&self, j: usize, i: usize) -> f64 {
        self.coeffs[(j, i)]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.floor_index {
            return Err(Error::DegenerateEigenvalue {
                index: i,
                floor_index: self.floor_index,
            });
        }
        Ok(())
    }

    /// `e_1(t), …, e_count(t)` by the Nyström formula; one kernel row.
    pub fn extend_all(&self, t: &[f64], count: usize) -> Result<Vec<f64>> {
        if count > 0 {
            self.check_index(count)?;
        }
        let row = self.kernel.row(t, &self.rule)?;
        let w = self.rule.weights();
        Ok((0..count)
            .map(|i| {
                let s: f64 = (0..row.len()).map(|j| w[j] * row[j] * self.coeffs[(j, i)]).sum();
                s / self.eigenvalues[i]
            })
            .collect())
    }

    /// Weighted Gram defect `max |⟨e_a, e_b⟩_ν - δ_ab|` over the first
    /// `count` eigenfunctions.
    pub fn orthonormality_defect(&self, count: usize) -> f64 {
        let w = self.rule.weights();
        let mut worst = 0.0f64;
        for a in 0..count {
            for b in a..count {
                let dot: f64 = (0..w.len())
                    .map(|j| w[j] * self.coeffs[(j, a)] * self.coeffs[(j, b)])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    /// `|Σ μ_i - Σ w_j k(x_j, x_j)| / Σ w_j k(x_j, x_j)`.
    pub fn trace_defect(&self) -> Result<f64> {
        let mut diag = 0.0;
        for (j, &w) in self.rule.weights().iter().enumerate() {
            let x = self.rule.node(j);
            diag += w * self.kernel.eval(x, x)?;
        }
        let sum: f64 = self.eigenvalues.iter().sum();
        Ok((sum - diag).abs() / diag.abs().max(f64::MIN_POSITIVE))
    }

    /// Largest `‖A v_i - μ_i v_i‖₂ / μ₁` over the first `count` pairs, with
    /// `A = W^{1/2} K W^{1/2}` reassembled from the kernel.
    pub fn max_residual(&self, count: usize) -> Result<f64> {
        let k = self.kernel.gram(&self.rule)?;
        let sw: Vec<f64> = self.rule.weights().iter().map(|w| w.sqrt()).collect();
        let n = sw.len();
        let top = self.eigenvalues[0];
        let mut worst = 0.0f64;
        for i in 0..count.min(n) {
            let v: Vec<f64> = (0..n).map(|j| sw[j] * self.coeffs[(j, i)]).collect();
            let mut norm2 = 0.0;
            for r in 0..n {
                let av: f64 = (0..n).map(|c| sw[r] * k[(r, c)] * sw[c] * v[c]).sum();
                let d = av - self.eigenvalues[i] * v[r];
                norm2 += d * d;
            }
            worst = worst.max(norm2.sqrt() / top);
        }
        Ok(worst)
    }

    /// `Σ_{i≤N} √μ_i` at `N = 1, 2, 4, …` up to `limit` (and `limit` itself
    /// if it is not a power of two).
    pub fn dyadic_sqrt_sums(&self, limit: usize) -> Vec<(usize, f64)> {
        dyadic_power_sums(&self.eigenvalues[..limit.min(self.len())], 0.5)
    }

    /// `i,mu,sqrt_mu` rows for every trusted eigenvalue, 1-based.
    pub fn spectrum_csv(&self) -> String {
        let mut out = String::from("i,mu,sqrt_mu\n");
        for (i, &mu) in self.trusted().iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, f17(mu), f17(mu.sqrt())));
        }
        out
    }
}

/// Dyadic partial sums `Σ_{i≤N} μ_i^p`, `N = 1, 2, 4, …, len`.
pub fn dyadic_power_sums(mu: &[f64], p: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut next = 1;
    for (i, &m) in mu.iter().enumerate() {
        if m > 0.0 {
            acc += m.powf(p);
        }
        if i + 1 == next || i + 1 == mu.len() {
            out.push((i + 1, acc));
            next *= 2;
        }
    }
    out
}

/// Nyström discretisation of `T_{k,ν}` and its full eigendecomposition.
pub fn nystrom_decompose(kernel: &Kernel, rule: &QuadratureRule) -> Result<SpectralDecomposition> {
    let k = kernel.gram(rule)?;
    let n = rule.len();
    let sw: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let a = Mat::from_fn(n, n, |i, j| sw[i] * k[(i, j)] * sw[j]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Internal(format!("symmetric eigensolver failed: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let u = evd.U();
    let coeffs = Mat::from_fn(n, n, |j, i| u[(j, i)] / sw[j]);
    SpectralDecomposition::assemble(kernel, rule.clone(), values, coeffs, Method::Nystrom)
}

/// Eigenvalues of a symmetric matrix in nondecreasing order.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Internal(format!("symmetric eigensolver failed: {e:?}")))
}

/// Full eigendecomposition `(values, vectors)` of a symmetric matrix, values
/// nondecreasing.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Internal(format!("symmetric eigensolver failed: {e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

/// `e_i(t)` by the Nyström formula, `i` 1-based.
pub fn nystrom_extend(decomp: &SpectralDecomposition, i: usize, t: &[f64]) -> Result<f64> {
    decomp.check_index(i)?;
    let row = decomp.kernel.row(t, &decomp.rule)?;
    let w = decomp.rule.weights();
    let s: f64 = (0..row.len())
        .map(|j| w[j] * row[j] * decomp.coeffs[(j, i - 1)])
        .sum();
    Ok(s / decomp.eigenvalues[i - 1])
}
