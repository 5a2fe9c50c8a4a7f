//! Discrete Hilbert–Schmidt traces `tr(K1 (K2 + λI)^{-1})` for comparing two
//! kernels, with the exact coefficient-ratio sum for circle kernels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{CircleCoeffs, Kernel};
use crate::quadrature::{circle_uniform, gauss_legendre, tensor_rule, uniform_midpoint, Domain, QuadratureRule};
use crate::spectral::{symmetric_eigen, DIVERGENCE_RATIO};

/// Largest condition number of `K2 + λI` accepted.
pub const MAX_CONDITION: f64 = 1e12;

/// Default ridge, relative to `tr(K2)/n`.
pub const DEFAULT_RIDGE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    /// `(n, tr(K1 (K2 + λI)^{-1}))` per grid size.
    pub traces: Vec<(usize, f64)>,
    /// Differences of consecutive traces.
    pub increments: Vec<f64>,
    /// Condition number of `K2 + λI` per grid size.
    pub conditions: Vec<f64>,
    /// The last increment shrank by the divergence ratio against the one before.
    pub bounded: bool,
    /// `Σ_n c1_n / c2_n` over all frequencies, for two circle kernels.
    pub exact: Option<f64>,
    pub ridge: f64,
}

fn rule_for(domain: &Domain, n: usize) -> Result<QuadratureRule> {
    match domain {
        Domain::Circle => circle_uniform(n),
        Domain::Interval { a, b } => gauss_legendre(n, *a, *b),
        Domain::Box { bounds } => {
            let per = ((n as f64).powf(1.0 / bounds.len() as f64) + 1e-9).floor() as usize;
            let rules = bounds
                .iter()
                .map(|&(a, b)| uniform_midpoint(per.max(1), &Domain::interval(a, b)?))
                .collect::<Result<Vec<_>>>()?;
            tensor_rule(&rules)
        }
    }
}

/// `W^{1/2} K W^{1/2}` for the rule.
fn operator_matrix(kernel: &Kernel, rule: &QuadratureRule) -> Result<faer::Mat<f64>> {
    let g = kernel.gram(rule)?;
    let sw: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let n = rule.len();
    Ok(faer::Mat::from_fn(n, n, |i, j| sw[i] * g[(i, j)] * sw[j]))
}

fn trace_at(k1: &Kernel, k2: &Kernel, n: usize, ridge: f64) -> Result<(usize, f64, f64)> {
    let rule = rule_for(k1.domain(), n)?;
    let a1 = operator_matrix(k1, &rule)?;
    let a2 = operator_matrix(k2, &rule)?;
    let m = rule.len();
    let (values, u) = symmetric_eigen(&a2)?;
    let lambda = ridge * (0..m).map(|i| a2[(i, i)]).sum::<f64>() / m as f64;
    let top = values.last().copied().unwrap_or(0.0) + lambda;
    let bottom = values.first().copied().unwrap_or(0.0).max(0.0) + lambda;
    let condition = top / bottom;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Conditioning {
            n: m,
            condition,
            limit: MAX_CONDITION,
        });
    }
    // tr(A1 (A2 + λ)^{-1}) = Σ_i (Uᵀ A1 U)_ii / (λ_i + λ)
    let au = &a1 * &u;
    let trace = (0..m)
        .map(|i| {
            let q: f64 = (0..m).map(|j| u[(j, i)] * au[(j, i)]).sum();
            q / (values[i].max(0.0) + lambda)
        })
        .sum();
    Ok((m, trace, condition))
}

/// Traces `tr(K1 (K2 + λI)^{-1})` with `λ = ridge · tr(K2)/n` on each grid
/// size (uniform rule on the circle, Gauss–Legendre on an interval, midpoint
/// on a box), using the weighted operator matrices.
pub fn dominance_trace(k1: &Kernel, k2: &Kernel, grid_sizes: &[usize], ridge: f64) -> Result<DominanceReport> {
    if k1.domain() != k2.domain() {
        return Err(Error::Usage(format!(
            "kernels live on different domains: {} and {}",
            k1.domain().describe(),
            k2.domain().describe()
        )));
    }
    if grid_sizes.is_empty() || grid_sizes.windows(2).any(|w| w[1] <= w[0]) || grid_sizes[0] < 2 {
        return Err(Error::Usage(format!(
            "grid sizes must be increasing and at least 2, got {grid_sizes:?}"
        )));
    }
    if !(ridge > 0.0 && ridge.is_finite()) {
        return Err(Error::Parameter(format!("ridge must be positive, got {ridge}")));
    }
    let mut traces = Vec::with_capacity(grid_sizes.len());
    let mut conditions = Vec::with_capacity(grid_sizes.len());
    for &n in grid_sizes {
        let (m, t, c) = trace_at(k1, k2, n, ridge)?;
        traces.push((m, t));
        conditions.push(c);
    }
    let increments: Vec<f64> = traces.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let bounded = match increments.len() {
        0 | 1 => false,
        k => {
            let (prev, last) = (increments[k - 2], increments[k - 1]);
            last.abs() * DIVERGENCE_RATIO <= prev.abs()
        }
    };
    Ok(DominanceReport {
        traces,
        increments,
        conditions,
        bounded,
        exact: exact_circle_ratio_sum(k1, k2),
        ridge,
    })
}

/// `c_n` of the untruncated law behind the coefficients.
fn law(c: &CircleCoeffs, n: usize) -> f64 {
    match c {
        CircleCoeffs::Power { c0, p, .. } => {
            if n == 0 {
                *c0
            } else {
                (n as f64).powf(-p)
            }
        }
        list => list.coefficient(n),
    }
}

/// `Σ_{n∈ℤ} c1_n / c2_n` for two circle kernels (`+∞` when some `c1_n > 0`
/// meets `c2_n = 0` or the series diverges); `None` for other kernels.
/// Power laws count as untruncated.
pub fn exact_circle_ratio_sum(k1: &Kernel, k2: &Kernel) -> Option<f64> {
    let (s1, c1) = k1.circle_coeffs()?;
    let (s2, c2) = k2.circle_coeffs()?;
    let ratio0 = |a: f64, b: f64| -> f64 {
        if a <= 0.0 {
            0.0
        } else if b <= 0.0 {
            f64::INFINITY
        } else {
            a / b
        }
    };
    let head = ratio0(s1 * law(c1, 0), s2 * law(c2, 0));
    match (c1, c2) {
        (CircleCoeffs::Power { p: p1, .. }, CircleCoeffs::Power { p: p2, .. }) => {
            let s = p1 - p2;
            let tail = if s > 1.0 { 2.0 * (s1 / s2) * zeta(s) } else { f64::INFINITY };
            Some(head + tail)
        }
        (CircleCoeffs::Power { .. }, CircleCoeffs::List(_)) => Some(f64::INFINITY),
        (CircleCoeffs::List(l), _) => {
            let mut acc = head;
            for n in 1..l.len() {
                acc += 2.0 * ratio0(s1 * law(c1, n), s2 * law(c2, n));
            }
            Some(acc)
        }
    }
}

/// Riemann zeta for `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1, got {s}");
    const N: usize = 16;
    // B_{2j} / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let nf = N as f64;
    let mut acc: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    acc += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // s (s+1) ⋯ (s+2j-2) N^{-s-2j+1}
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        acc += b * rising * power;
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        power /= nf * nf;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_circle_kernel, make_circle_power, make_wiener};
    use std::f64::consts::PI;

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        // mpmath.zeta(1.5)
        assert!((zeta(1.5) - 2.612_375_348_685_488_3).abs() < 1e-14);
        assert!((zeta(1.01) - 100.577_943_338_497).abs() < 1e-9);
    }

    #[test]
    fn exact_ratio_of_power_laws() {
        let k1 = make_circle_power(1.0, 4.0, 1 << 10).unwrap();
        let k2 = make_circle_power(1.0, 2.0, 1 << 10).unwrap();
        let want = 1.0 + PI * PI / 3.0;
        assert!((exact_circle_ratio_sum(&k1, &k2).unwrap() - want).abs() < 1e-14);
        assert_eq!(exact_circle_ratio_sum(&k2, &k1), Some(f64::INFINITY));
        assert_eq!(exact_circle_ratio_sum(&make_wiener(), &k1), None);
    }

    #[test]
    fn exact_ratio_of_lists() {
        let k1 = make_circle_kernel(&[1.0, 0.5, 0.0]).unwrap();
        let k2 = make_circle_kernel(&[2.0, 1.0, 1.0]).unwrap();
        assert!((exact_circle_ratio_sum(&k1, &k2).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(exact_circle_ratio_sum(&k2, &k1), Some(f64::INFINITY));
    }

    #[test]
    fn trace_matches_exact_sum_on_circle() {
        let k1 = make_circle_power(1.0, 4.0, 1 << 12).unwrap();
        let k2 = make_circle_power(1.0, 2.0, 1 << 12).unwrap();
        let r = dominance_trace(&k1, &k2, &[64, 128, 256], DEFAULT_RIDGE).unwrap();
        let exact = r.exact.unwrap();
        let last = r.traces.last().unwrap().1;
        assert!((last - exact).abs() < 0.05 * exact, "{last} vs {exact}");
        assert!(r.bounded);
    }

    #[test]
    fn self_trace_grows_with_n() {
        let k = make_circle_power(1.0, 2.0, 1 << 12).unwrap();
        let r = dominance_trace(&k, &k, &[32, 64, 128], DEFAULT_RIDGE).unwrap();
        for (n, t) in &r.traces {
            assert!((t - *n as f64).abs() < 1e-3 * *n as f64);
        }
        assert!(!r.bounded);
    }

    #[test]
    fn rejects_bad_sizes() {
        let k = make_circle_power(1.0, 2.0, 64).unwrap();
        assert!(matches!(dominance_trace(&k, &k, &[64, 32], 1e-10), Err(Error::Usage(_))));
        assert!(matches!(dominance_trace(&k, &k, &[], 1e-10), Err(Error::Usage(_))));
        assert!(matches!(dominance_trace(&k, &make_wiener(), &[32], 1e-10), Err(Error::Usage(_))));
    }
}
