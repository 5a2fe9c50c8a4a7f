//! Decide whether sample paths of a centred Gaussian process lie in the RKHS
//! of a power `k^β`, `0 < β < 1`, of its covariance kernel.
//!
//! The decision combines three pieces of evidence:
//!
//! * nuclear dominance needs `Σ √μ_i < ∞`, tested through the decay exponent
//!   at `p = ½`, with exact partial sums standing in when a closed-form
//!   spectrum is available and the fit is inconclusive;
//! * the eigenfunctions must stay uniformly bounded, checked on the grid;
//! * some `β` with `Σ μ_i^β e_i² < ∞` must also satisfy
//!   `Σ μ_i^{1-β} < ∞`, which gives the window `[β_lo, β_hi]`.

use serde::Serialize;

use super::decay::{classify, estimate_decay, fit_power_law, DecayEstimate, Summability};
use super::tensor::{tensor_verdict_with, TensorVerdict};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::quadrature::{
    axis_rule, circle_uniform, gauss_legendre, tensor_rule, uniform_midpoint, Domain, QuadratureRule,
    Scheme,
};
use crate::spectral::{
    dyadic_power_sums, fft_spectrum, nystrom_decompose, power_kernel, SpectralDecomposition,
    DIVERGENCE_RATIO,
};

/// Exponent of the nuclear-dominance sum `Σ μ_i^p`.
pub const NUCLEAR_P: f64 = 0.5;

/// Largest index of the exact partial sums taken from a closed-form spectrum.
pub const EXACT_LIMIT: usize = 1 << 20;

/// Nodes of the default rule on an interval or the circle.
pub const DEFAULT_NODES: usize = 1024;

/// Total node budget of the default rule on a box.
pub const DEFAULT_BOX_NODES: usize = 4096;

/// Eigenfunction sup-norms over the upper half of the trust zone may exceed
/// those over the lower half by at most this factor.
pub const SUP_GROWTH_LIMIT: f64 = 2.0;

/// `|pρ - 1|` below which an exact exponent counts as borderline.
const EXACT_BORDER: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    #[serde(rename = "EXISTS")]
    Exists,
    #[serde(rename = "NOT_EXISTS")]
    NotExists,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Exists => "EXISTS",
            Decision::NotExists => "NOT_EXISTS",
            Decision::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Outcome of [`rkhs_path_verdict`]. Field order is the JSON field order.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub kernel: serde_json::Value,
    pub n_nodes: usize,
    pub rho: f64,
    pub rho_ci: f64,
    /// `(N, Σ_{i≤N} √μ_i)` at dyadic `N` over the trust zone.
    pub sum_sqrt_partial: Vec<(usize, f64)>,
    pub decision: Decision,
    pub beta_window: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

/// Tunables of the verdict; [`Default`] gives the documented values.
#[derive(Clone, Debug, PartialEq)]
pub struct VerdictOptions {
    /// Decay-fit window; `None` selects the default window.
    pub window: Option<(usize, usize)>,
    /// Candidate `β` values scanned for the lower end of the window.
    pub betas: Vec<f64>,
    pub exact_limit: usize,
    /// Product eigenvalues enumerated for tensor kernels.
    pub tensor_budget: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            window: None,
            betas: (1..=9).map(|k| k as f64 / 10.0).collect(),
            exact_limit: EXACT_LIMIT,
            tensor_budget: 0,
        }
    }
}

/// JSON description of a kernel: its spec when it has one, else its label.
pub fn kernel_json(kernel: &Kernel) -> serde_json::Value {
    match kernel.to_spec() {
        Some(spec) => serde_json::to_value(spec).unwrap_or_else(|_| label_json(kernel)),
        None => label_json(kernel),
    }
}

fn label_json(kernel: &Kernel) -> serde_json::Value {
    serde_json::json!({ "label": kernel.label() })
}

/// Default discretisation: Gauss–Legendre with [`DEFAULT_NODES`] nodes on an
/// interval, the uniform rule with as many nodes on the circle, and a
/// midpoint grid of about [`DEFAULT_BOX_NODES`] nodes on a box. Tensor
/// kernels get the one-dimensional rule of their first factor, which the
/// verdict applies to every factor.
pub fn default_rule(kernel: &Kernel) -> Result<QuadratureRule> {
    if let Some(factors) = kernel.tensor_factors() {
        return default_rule(&factors[0]);
    }
    match kernel.domain() {
        Domain::Circle => circle_uniform(DEFAULT_NODES),
        Domain::Interval { a, b } => gauss_legendre(DEFAULT_NODES, *a, *b),
        Domain::Box { bounds } => {
            let d = bounds.len();
            let per = ((DEFAULT_BOX_NODES as f64).powf(1.0 / d as f64) + 1e-9).floor() as usize;
            let rules = bounds
                .iter()
                .map(|&(a, b)| uniform_midpoint(per.max(2), &Domain::interval(a, b)?))
                .collect::<Result<Vec<_>>>()?;
            tensor_rule(&rules)
        }
    }
}

/// Verdict with [`VerdictOptions::default`].
pub fn rkhs_path_verdict(kernel: &Kernel, rule: &QuadratureRule) -> Result<Verdict> {
    rkhs_path_verdict_with(kernel, rule, &VerdictOptions::default())
}

/// Decomposes `kernel` against `rule` and decides.
///
/// Tensor kernels are never assembled: each distinct factor is decomposed on
/// its own axis of `rule` (or on `rule` itself when it is one-dimensional)
/// and the factor verdicts are combined.
pub fn rkhs_path_verdict_with(
    kernel: &Kernel,
    rule: &QuadratureRule,
    options: &VerdictOptions,
) -> Result<Verdict> {
    if let Some(factors) = kernel.tensor_factors() {
        return tensor_kernel_verdict(kernel, factors, rule, options);
    }
    let decomp = decompose(kernel, rule)?;
    verdict_from_decomposition(&decomp, options)
}

/// FFT for stationary circle kernels on a power-of-two uniform rule,
/// Nyström otherwise.
pub fn decompose(kernel: &Kernel, rule: &QuadratureRule) -> Result<SpectralDecomposition> {
    let fft_ok = kernel.domain().is_circle()
        && kernel.is_stationary()
        && rule.scheme() == Scheme::CircleUniform
        && rule.len().is_power_of_two()
        && rule.len() >= 2;
    if fft_ok {
        fft_spectrum(kernel, rule.len())
    } else {
        nystrom_decompose(kernel, rule)
    }
}

fn tensor_kernel_verdict(
    kernel: &Kernel,
    factors: &[Kernel],
    rule: &QuadratureRule,
    options: &VerdictOptions,
) -> Result<Verdict> {
    let d = factors.len();
    let factor_rule = |i: usize, factor: &Kernel| -> Result<QuadratureRule> {
        if rule.dim() == d {
            rule.axis(i)
        } else if rule.dim() == 1 {
            let (a, b) = factor.domain().axis_bounds()[0];
            axis_rule(rule.scheme(), rule.len(), a, b)
        } else {
            Err(Error::Usage(format!(
                "tensor kernel of {d} factors needs a {d}-dimensional or one-dimensional rule, got {}",
                rule.dim()
            )))
        }
    };

    // Group identical factors so each is decomposed once.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        match groups.iter_mut().find(|(first, _)| factors[*first].same(f)) {
            Some(g) => g.1 += 1,
            None => groups.push((i, 1)),
        }
    }

    let mut parts: Vec<TensorVerdict> = Vec::with_capacity(groups.len());
    for &(first, count) in &groups {
        let frule = factor_rule(first, &factors[first])?;
        let fd = decompose(&factors[first], &frule)?;
        parts.push(tensor_verdict_with(&fd, count, options.tensor_budget, options)?);
    }

    let n_nodes = if rule.dim() == d { rule.len() } else { rule.len().saturating_pow(d as u32) };
    let mut verdict = if parts.len() == 1 {
        parts.pop().unwrap().verdict
    } else {
        combine(parts)
    };
    verdict.kernel = kernel_json(kernel);
    verdict.n_nodes = n_nodes;
    Ok(verdict)
}

/// Distinct factors: any `NOT_EXISTS` wins, all `EXISTS` gives `EXISTS`.
fn combine(parts: Vec<TensorVerdict>) -> Verdict {
    let decisions: Vec<Decision> = parts.iter().map(|p| p.verdict.decision).collect();
    let decision = if decisions.contains(&Decision::NotExists) {
        Decision::NotExists
    } else if decisions.iter().all(|&d| d == Decision::Exists) {
        Decision::Exists
    } else {
        Decision::Inconclusive
    };
    let slowest = parts
        .iter()
        .min_by(|a, b| a.verdict.rho.total_cmp(&b.verdict.rho))
        .expect("at least two factor groups");
    let mut beta_window = None;
    if decision == Decision::Exists {
        let lo = parts.iter().filter_map(|p| p.verdict.beta_window.map(|w| w.0)).fold(0.0, f64::max);
        let hi = parts.iter().filter_map(|p| p.verdict.beta_window.map(|w| w.1)).fold(1.0, f64::min);
        beta_window = Some((lo, hi));
    }
    let decision = match (decision, beta_window) {
        (Decision::Exists, Some((lo, hi))) if lo > hi => {
            beta_window = None;
            Decision::Inconclusive
        }
        (d, _) => d,
    };
    let mut notes = vec![format!(
        "tensor kernel with {} distinct factor groups; rho and sums of the slowest group",
        parts.len()
    )];
    for (g, p) in parts.iter().enumerate() {
        notes.push(format!("group {}: {}", g + 1, p.verdict.decision.as_str()));
        notes.extend(p.verdict.notes.iter().map(|n| format!("group {}: {n}", g + 1)));
    }
    Verdict {
        kernel: serde_json::Value::Null,
        n_nodes: 0,
        rho: slowest.verdict.rho,
        rho_ci: slowest.verdict.rho_ci,
        sum_sqrt_partial: slowest.verdict.sum_sqrt_partial.clone(),
        decision,
        beta_window,
        notes,
    }
}

/// Evidence about `Σ √μ_i` after the fit and any exact fallback.
struct Nuclear {
    outcome: Summability,
    notes: Vec<String>,
}

fn nuclear_evidence(
    decomp: &SpectralDecomposition,
    estimate: &DecayEstimate,
    sums: &[(usize, f64)],
    options: &VerdictOptions,
) -> Result<Nuclear> {
    let report = classify(estimate, NUCLEAR_P);
    let mut notes = vec![format!(
        "decay fit over [{}, {}]: rho={:.4} +/- {:.4}, r2={:.5}; p*rho={:.4} at p={}, margin {:.3}",
        estimate.window.0,
        estimate.window.1,
        estimate.rho,
        estimate.rho_ci,
        estimate.r2,
        report.p_rho,
        NUCLEAR_P,
        report.margin
    )];
    if report.outcome != Summability::Inconclusive {
        return Ok(Nuclear {
            outcome: report.outcome,
            notes,
        });
    }

    if let Some(known) = decomp.kernel().known_spectrum() {
        if !known.is_infinite() {
            notes.push("closed-form spectrum is finite, so every power sum converges".into());
            return Ok(Nuclear {
                outcome: Summability::Summable,
                notes,
            });
        }
        let limit = options.exact_limit.max(1 << 10);
        let head = known.head(limit);
        let far = fit_power_law(&head, (limit / 32, limit))?;
        let exact_sums = dyadic_power_sums(&head, NUCLEAR_P);
        let ratio = last_increment_ratio(&exact_sums);
        let p_rho = NUCLEAR_P * far.rho;
        let outcome = if p_rho > 1.0 + EXACT_BORDER {
            Summability::Summable
        } else if p_rho < 1.0 - EXACT_BORDER || ratio < DIVERGENCE_RATIO {
            Summability::Divergent
        } else {
            Summability::Summable
        };
        notes.push(format!(
            "closed-form spectrum up to N={limit}: far-field rho={:.5}, last dyadic increment ratio of sum sqrt(mu) {:.4}",
            far.rho, ratio
        ));
        return Ok(Nuclear { outcome, notes });
    }

    let ratio = last_increment_ratio(sums);
    let divergent = ratio < DIVERGENCE_RATIO && report.p_rho <= 1.0;
    notes.push(format!(
        "no closed-form spectrum; last dyadic increment ratio of sum sqrt(mu) on the grid {:.4}",
        ratio
    ));
    Ok(Nuclear {
        outcome: if divergent {
            Summability::Divergent
        } else {
            Summability::Inconclusive
        },
        notes,
    })
}

/// `(S_{N/2} - S_{N/4}) / (S_N - S_{N/2})` of the last three dyadic sums.
fn last_increment_ratio(sums: &[(usize, f64)]) -> f64 {
    let dyadic: Vec<f64> = sums
        .iter()
        .filter(|(n, _)| n.is_power_of_two())
        .map(|&(_, s)| s)
        .collect();
    let m = dyadic.len();
    if m < 3 {
        return f64::INFINITY;
    }
    let last = dyadic[m - 1] - dyadic[m - 2];
    if last <= 0.0 {
        return f64::INFINITY;
    }
    (dyadic[m - 2] - dyadic[m - 3]) / last
}

/// Largest eigenfunction magnitude over the nodes for `i = 1..=count`.
fn sup_norms(decomp: &SpectralDecomposition, count: usize) -> Vec<f64> {
    let n = decomp.rule().len();
    (0..count)
        .map(|i| (0..n).map(|j| decomp.coeff(j, i).abs()).fold(0.0, f64::max))
        .collect()
}

/// Verdict from an existing decomposition.
pub fn verdict_from_decomposition(
    decomp: &SpectralDecomposition,
    options: &VerdictOptions,
) -> Result<Verdict> {
    let n = decomp.len();
    let trust = (n / 4).min(decomp.floor_index());
    let estimate = estimate_decay(decomp, options.window)?;
    let sums = decomp.dyadic_sqrt_sums(trust);
    let nuclear = nuclear_evidence(decomp, &estimate, &sums, options)?;
    let mut notes = vec![format!(
        "{:?} decomposition on {}",
        decomp.method(),
        decomp.rule().describe()
    )];
    notes.extend(nuclear.notes);

    let mut verdict = Verdict {
        kernel: kernel_json(decomp.kernel()),
        n_nodes: decomp.rule().len(),
        rho: estimate.rho,
        rho_ci: estimate.rho_ci,
        sum_sqrt_partial: sums,
        decision: Decision::Inconclusive,
        beta_window: None,
        notes,
    };
    match nuclear.outcome {
        Summability::Divergent => {
            verdict.decision = Decision::NotExists;
            verdict.notes.push("sum sqrt(mu) diverges: no beta in (0, 1) works".into());
            return Ok(verdict);
        }
        Summability::Inconclusive => {
            verdict.notes.push("summability of sqrt(mu) undecided".into());
            return Ok(verdict);
        }
        Summability::Summable => {}
    }

    let sups = sup_norms(decomp, trust);
    let half = trust / 2;
    let low = sups[..half.max(1)].iter().copied().fold(0.0, f64::max);
    let high = sups[half.max(1)..].iter().copied().fold(0.0, f64::max);
    let bounded = high <= SUP_GROWTH_LIMIT * low;
    verdict.notes.push(format!(
        "eigenfunction sup-norms checked on the grid only: max {:.4} for i <= {}, {:.4} beyond",
        low,
        half.max(1),
        high
    ));

    let margin = classify(&estimate, NUCLEAR_P).margin;
    let beta_hi = (1.0 - 1.0 / estimate.rho - margin).min(1.0);
    let mut beta_lo = None;
    for &beta in &options.betas {
        let pk = power_kernel(decomp, beta, trust)?;
        if pk.monitor().converged {
            beta_lo = Some(beta);
            verdict.notes.push(format!(
                "grid monitor of sum mu^beta e^2 converges first at beta={beta} (last ratio {:.3})",
                pk.monitor().last_ratio
            ));
            break;
        }
    }

    match (bounded, beta_lo) {
        (false, _) => verdict.notes.push("eigenfunction sup-norms grow across the trust zone".into()),
        (true, None) => verdict.notes.push("no scanned beta passes the grid monitor".into()),
        (true, Some(lo)) if lo > beta_hi => verdict.notes.push(format!(
            "beta window empty: monitor needs beta >= {lo}, summability allows beta <= {beta_hi:.4}"
        )),
        (true, Some(lo)) => {
            verdict.decision = Decision::Exists;
            verdict.beta_window = Some((lo, beta_hi));
        }
    }
    Ok(verdict)
}
