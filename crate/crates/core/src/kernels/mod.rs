//! Covariance kernels.
//!
//! A [`Kernel`] is an immutable, cheaply cloneable handle. Every evaluator is
//! a pure function of its two arguments, so kernels may be shared across
//! threads.

mod bessel;
mod riemann_liouville;
mod spec;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use faer::Mat;

pub use bessel::{bessel_k, is_half_integer};
pub use riemann_liouville::{integrate_adaptive, RlCovariance};
pub use spec::{FeatureSpec, KernelSpec};

use crate::error::{param, Error, Result};
use crate::quadrature::{Domain, QuadratureRule, Scheme};

/// Default truncation of power-law Fourier series on the circle.
pub const DEFAULT_CIRCLE_TERMS: usize = 1 << 15;

/// Default relative tolerance of the Riemann–Liouville quadrature.
pub const DEFAULT_RL_TOL: f64 = 1e-10;

/// Shared user-supplied feature.
pub type FeatureFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A one-dimensional feature `f` used in finite-rank perturbations
/// `k'(s,t) = k(s,t) + sign * f(s) f(t)`.
#[derive(Clone)]
pub enum Feature {
    Constant(f64),
    /// `scale * t`
    Linear { scale: f64 },
    /// `scale * exp(-rate * t)`
    Exp { scale: f64, rate: f64 },
    /// `scale * t^exponent`
    Power { scale: f64, exponent: f64 },
    Custom(FeatureFn),
}

impl Feature {
    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Feature::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        match self {
            Feature::Constant(c) => *c,
            Feature::Linear { scale } => scale * t[0],
            Feature::Exp { scale, rate } => scale * (-rate * t[0]).exp(),
            Feature::Power { scale, exponent } => scale * t[0].powf(*exponent),
            Feature::Custom(f) => f(t),
        }
    }

    fn same_as(&self, other: &Feature) -> bool {
        match (self, other) {
            (Feature::Constant(a), Feature::Constant(b)) => a == b,
            (Feature::Linear { scale: a }, Feature::Linear { scale: b }) => a == b,
            (Feature::Exp { scale: a, rate: r }, Feature::Exp { scale: b, rate: q }) => {
                a == b && r == q
            }
            (
                Feature::Power { scale: a, exponent: e },
                Feature::Power { scale: b, exponent: f },
            ) => a == b && e == f,
            (Feature::Custom(f), Feature::Custom(g)) => Arc::ptr_eq(f, g),
            _ => false,
        }
    }

    fn is_builtin(&self) -> bool {
        !matches!(self, Feature::Custom(_))
    }
}

impl fmt::Debug for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Constant(c) => write!(f, "Constant({c})"),
            Feature::Linear { scale } => write!(f, "Linear({scale})"),
            Feature::Exp { scale, rate } => write!(f, "Exp({scale}, {rate})"),
            Feature::Power { scale, exponent } => write!(f, "Power({scale}, {exponent})"),
            Feature::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Sign of a rank-one term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i32(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => param(format!("sign must be +1 or -1, got {s}")),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Closed-form eigenvalue sequences.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumForm {
    /// `(2 / ((2i-1)π))²`
    Wiener,
    /// `(πi)^{-2}`
    Bridge,
    /// Finite nonincreasing list; zero beyond its end.
    Finite(Vec<f64>),
    /// `{c0} ∪ {n^{-p}, twice}` for `n ≥ 1`.
    CirclePower { c0: f64, p: f64 },
    /// `2σ / (σ² + ω_k²)` over the roots `ω_k` of the Ornstein–Uhlenbeck
    /// boundary-value problem on `[0, 1]`; the amplitude lives in `scale`.
    Ou { variant: u8, sigma: f64 },
}

/// `k`-th positive root (0-based) of the OU characteristic equation:
/// variant 1 solves `ω - 2 atan(σ/ω) = kπ` (Robin conditions at both ends),
/// variant 2 solves `ω + atan(ω/σ) = (k+1)π` (pinned at 0). Both left-hand
/// sides increase strictly, so each bracket holds exactly one root.
pub fn ou_root(variant: u8, sigma: f64, k: usize) -> f64 {
    let kf = k as f64;
    let (mut lo, mut hi, target) = if variant == 1 {
        (kf * PI, (kf + 1.0) * PI, kf * PI)
    } else {
        ((kf + 0.5) * PI, (kf + 1.0) * PI, (kf + 1.0) * PI)
    };
    let h = |w: f64| {
        if variant == 1 {
            w - 2.0 * (sigma / w).atan() - target
        } else {
            w + (w / sigma).atan() - target
        }
    };
    let dh = |w: f64| {
        if variant == 1 {
            1.0 + 2.0 * sigma / (w * w + sigma * sigma)
        } else {
            1.0 + sigma / (w * w + sigma * sigma)
        }
    };
    let mut w = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = h(w);
        if f == 0.0 {
            return w;
        }
        if f > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let mut next = w - f / dh(w);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * w.max(1.0) {
            return next;
        }
        w = next;
    }
    w
}

/// Exact spectrum `scale * form` of a kernel's integral operator with respect
/// to the Lebesgue (or Haar) measure on its domain.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownSpectrum {
    pub scale: f64,
    pub form: SpectrumForm,
}

impl KnownSpectrum {
    fn new(form: SpectrumForm) -> Self {
        Self { scale: 1.0, form }
    }

    /// Whether the sequence has infinitely many nonzero terms.
    pub fn is_infinite(&self) -> bool {
        !matches!(self.form, SpectrumForm::Finite(_))
    }

    /// The `n` largest eigenvalues in nonincreasing order, zero-padded.
    pub fn head(&self, n: usize) -> Vec<f64> {
        let mut out: Vec<f64> = match &self.form {
            SpectrumForm::Wiener => (1..=n)
                .map(|i| {
                    let x = 2.0 / ((2.0 * i as f64 - 1.0) * PI);
                    x * x
                })
                .collect(),
            SpectrumForm::Bridge => (1..=n)
                .map(|i| {
                    let x = PI * i as f64;
                    1.0 / (x * x)
                })
                .collect(),
            SpectrumForm::Finite(v) => {
                let mut head: Vec<f64> = v.iter().take(n).copied().collect();
                head.resize(n, 0.0);
                head
            }
            SpectrumForm::CirclePower { c0, p } => {
                let mut head = Vec::with_capacity(n + 1);
                let mut placed = false;
                let mut m = 1usize;
                while head.len() < n {
                    let c = (m as f64).powf(-p);
                    if !placed && *c0 >= c {
                        head.push(*c0);
                        placed = true;
                        continue;
                    }
                    head.push(c);
                    head.push(c);
                    m += 1;
                }
                head.truncate(n);
                head
            }
            SpectrumForm::Ou { variant, sigma } => (0..n)
                .map(|k| {
                    let w = ou_root(*variant, *sigma, k);
                    2.0 * sigma / (sigma * sigma + w * w)
                })
                .collect(),
        };
        for v in &mut out {
            *v *= self.scale;
        }
        out
    }

    /// The `i`-th eigenvalue, 1-based.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        assert!(i >= 1, "eigenvalue indices are 1-based");
        self.head(i)[i - 1]
    }

    /// `Σ_{i≤N} μ_i^p` for every `N` in `ns` (nondecreasing).
    pub fn partial_power_sums(&self, p: f64, ns: &[usize]) -> Vec<f64> {
        let max = ns.iter().copied().max().unwrap_or(0);
        let head = self.head(max);
        let mut out = Vec::with_capacity(ns.len());
        let mut acc = 0.0;
        let mut done = 0;
        for &n in ns {
            for &mu in &head[done..n.max(done)] {
                if mu > 0.0 {
                    acc += mu.powf(p);
                }
            }
            done = done.max(n);
            out.push(acc);
        }
        out
    }
}

/// Fourier coefficients of a stationary kernel on the circle.
#[derive(Clone, Debug, PartialEq)]
pub enum CircleCoeffs {
    /// `c_0, c_1, …, c_m`
    List(Vec<f64>),
    /// `c_0` and `c_n = n^{-p}` for `1 ≤ n ≤ terms`.
    Power { c0: f64, p: f64, terms: usize },
}

impl CircleCoeffs {
    /// `c_n`.
    pub fn coefficient(&self, n: usize) -> f64 {
        match self {
            CircleCoeffs::List(c) => c.get(n).copied().unwrap_or(0.0),
            CircleCoeffs::Power { c0, p, terms } => match n {
                0 => *c0,
                n if n <= *terms => (n as f64).powf(-p),
                _ => 0.0,
            },
        }
    }

    /// Number of stored coefficients `c_0, …`.
    pub fn len(&self) -> usize {
        match self {
            CircleCoeffs::List(c) => c.len(),
            CircleCoeffs::Power { terms, .. } => terms + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `κ(r) = c_0 + 2 Σ_{n≥1} c_n cos(2πnr)`, summed from the smallest term.
    fn profile(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for n in (1..self.len()).rev() {
            let c = self.coefficient(n);
            if c != 0.0 {
                acc += c * (2.0 * PI * n as f64 * r).cos();
            }
        }
        self.coefficient(0) + 2.0 * acc
    }
}

#[derive(Clone, Debug)]
pub enum KernelKind {
    Wiener,
    BrownianBridge,
    Ou { variant: u8, a: f64, sigma: f64 },
    Fbm { alpha: f64 },
    RiemannLiouville(RlCovariance),
    Matern { alpha: f64, sigma: f64, normalized: bool, norm: f64 },
    Circle(CircleCoeffs),
    Tensor(Vec<Kernel>),
    Perturbed { base: Kernel, terms: Vec<(Feature, Sign)> },
    Constant(f64),
    Scaled { base: Kernel, factor: f64 },
}

#[derive(Debug)]
struct Inner {
    kind: KernelKind,
    domain: Domain,
    stationary: bool,
    known: Option<KnownSpectrum>,
    label: String,
}

/// Covariance kernel on a bounded domain.
#[derive(Clone, Debug)]
pub struct Kernel {
    inner: Arc<Inner>,
}

impl Kernel {
    fn build(
        kind: KernelKind,
        domain: Domain,
        stationary: bool,
        known: Option<KnownSpectrum>,
        label: String,
    ) -> Self {
        Self {
            inner: Arc::new(Inner {
                kind,
                domain,
                stationary,
                known,
                label,
            }),
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.inner.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.inner.domain
    }

    pub fn dimension(&self) -> usize {
        self.inner.domain.dimension()
    }

    /// Depends on `s - t` only.
    pub fn is_stationary(&self) -> bool {
        self.inner.stationary
    }

    /// Every evaluator is symmetric by construction.
    pub fn is_symmetric(&self) -> bool {
        true
    }

    pub fn known_spectrum(&self) -> Option<&KnownSpectrum> {
        self.inner.known.as_ref()
    }

    pub fn tensor_factors(&self) -> Option<&[Kernel]> {
        match &self.inner.kind {
            KernelKind::Tensor(f) => Some(f),
            _ => None,
        }
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// Fourier coefficients of a circle kernel with their overall scale.
    pub fn circle_coeffs(&self) -> Option<(f64, &CircleCoeffs)> {
        match &self.inner.kind {
            KernelKind::Circle(c) => Some((1.0, c)),
            KernelKind::Scaled { base, factor } => base.circle_coeffs().map(|(s, c)| (s * factor, c)),
            _ => None,
        }
    }

    /// Two handles to the same kernel object.
    pub fn same(&self, other: &Kernel) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    /// `k(s, t)`. Points must have the kernel's dimension.
    pub fn eval(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        let d = self.dimension();
        if s.len() != d || t.len() != d {
            return Err(Error::Usage(format!(
                "kernel {} expects {d}-dimensional points, got {} and {}",
                self.label(),
                s.len(),
                t.len()
            )));
        }
        let v = self.eval_unchecked(s, t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!(
                "{} is not finite at ({s:?}, {t:?})",
                self.label()
            )))
        }
    }

    /// Scalar convenience for one-dimensional kernels.
    pub fn eval1(&self, s: f64, t: f64) -> Result<f64> {
        self.eval(&[s], &[t])
    }

    fn eval_unchecked(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        Ok(match &self.inner.kind {
            KernelKind::Wiener => s[0].min(t[0]),
            KernelKind::BrownianBridge => s[0].min(t[0]) - s[0] * t[0],
            KernelKind::Ou { variant, a, sigma } => {
                let base = a * (-sigma * (s[0] - t[0]).abs()).exp();
                if *variant == 1 {
                    base
                } else {
                    base - a * (-sigma * (s[0] + t[0])).exp()
                }
            }
            KernelKind::Fbm { alpha } => {
                let h = 2.0 * alpha;
                0.5 * (s[0].abs().powf(h) + t[0].abs().powf(h) - (t[0] - s[0]).abs().powf(h))
            }
            KernelKind::RiemannLiouville(rl) => rl.eval(s[0], t[0])?,
            KernelKind::Matern {
                alpha,
                sigma,
                normalized,
                norm,
            } => {
                let dist = s
                    .iter()
                    .zip(t)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let r = sigma * dist;
                let raw = if r == 0.0 {
                    *norm
                } else {
                    let k = bessel_k(*alpha, r)?;
                    if k == 0.0 {
                        0.0
                    } else {
                        (alpha * r.ln() + k.ln()).exp()
                    }
                };
                if *normalized {
                    raw / norm
                } else {
                    raw
                }
            }
            KernelKind::Circle(c) => c.profile((s[0] - t[0]).rem_euclid(1.0)),
            KernelKind::Tensor(factors) => {
                let mut prod = 1.0;
                for (i, f) in factors.iter().enumerate() {
                    prod *= f.eval_unchecked(&s[i..=i], &t[i..=i])?;
                }
                prod
            }
            KernelKind::Perturbed { base, terms } => {
                let mut v = base.eval_unchecked(s, t)?;
                for (f, sign) in terms {
                    v += sign.value() * f.eval(s) * f.eval(t);
                }
                v
            }
            KernelKind::Constant(c) => *c,
            KernelKind::Scaled { base, factor } => factor * base.eval_unchecked(s, t)?,
        })
    }

    /// Gram matrix `K_ij = k(x_i, x_j)` on the rule's nodes. The matrix is
    /// exactly symmetric. Stationary circle kernels on the uniform circle rule
    /// evaluate only the first row.
    pub fn gram(&self, rule: &QuadratureRule) -> Result<Mat<f64>> {
        self.check_rule(rule)?;
        let n = rule.len();
        if self.is_stationary() && rule.scheme() == Scheme::CircleUniform {
            let row = (0..n)
                .map(|j| self.eval(rule.node(0), rule.node(j)))
                .collect::<Result<Vec<_>>>()?;
            // κ is even, so κ(d/n) = κ((n-d)/n); read the smaller offset for exact symmetry.
            return Ok(Mat::from_fn(n, n, |i, j| {
                let d = (j + n - i) % n;
                row[d.min(n - d)]
            }));
        }
        let mut k = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval(rule.node(i), rule.node(j))?;
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// `k(t, x_j)` for every node `x_j`.
    pub fn row(&self, t: &[f64], rule: &QuadratureRule) -> Result<Vec<f64>> {
        (0..rule.len()).map(|j| self.eval(t, rule.node(j))).collect()
    }

    /// Rules must live on the kernel's domain.
    pub fn check_rule(&self, rule: &QuadratureRule) -> Result<()> {
        let domain = self.domain();
        if rule.domain().is_circle() != domain.is_circle() || rule.dim() != domain.dimension() {
            return Err(Error::Usage(format!(
                "rule on {} does not match kernel {} on {}",
                rule.domain().describe(),
                self.label(),
                domain.describe()
            )));
        }
        if let Some(j) = (0..rule.len()).find(|&j| !domain.contains(rule.node(j))) {
            return Err(Error::Usage(format!(
                "node {:?} lies outside the domain {} of kernel {}",
                rule.node(j),
                domain.describe(),
                self.label()
            )));
        }
        Ok(())
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        param(format!("{name} must be positive and finite, got {v}"))
    }
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        param(format!("{name} must lie in (0, 1), got {v}"))
    }
}

/// `min(s, t)` on `[0, 1]`.
pub fn make_wiener() -> Kernel {
    Kernel::build(
        KernelKind::Wiener,
        Domain::unit_interval(),
        false,
        Some(KnownSpectrum::new(SpectrumForm::Wiener)),
        "wiener".into(),
    )
}

/// `min(s, t) - st` on `[0, 1]`.
pub fn make_brownian_bridge() -> Kernel {
    Kernel::build(
        KernelKind::BrownianBridge,
        Domain::unit_interval(),
        false,
        Some(KnownSpectrum::new(SpectrumForm::Bridge)),
        "bridge".into(),
    )
}

/// Ornstein–Uhlenbeck covariances on `[0, 1]`: variant 1 is
/// `a e^{-σ|s-t|}`, variant 2 subtracts `a e^{-σ(s+t)}`.
pub fn make_ou(variant: u8, a: f64, sigma: f64) -> Result<Kernel> {
    if variant != 1 && variant != 2 {
        return param(format!("OU variant must be 1 or 2, got {variant}"));
    }
    check_positive("OU amplitude a", a)?;
    check_positive("OU rate sigma", sigma)?;
    let known = KnownSpectrum {
        scale: a,
        form: SpectrumForm::Ou { variant, sigma },
    };
    Ok(Kernel::build(
        KernelKind::Ou { variant, a, sigma },
        Domain::unit_interval(),
        variant == 1,
        Some(known),
        format!("ou{variant}(a={a}, sigma={sigma})"),
    ))
}

/// Fractional Brownian motion with Hurst index `alpha` on `[0, 1]`.
pub fn make_fbm(alpha: f64) -> Result<Kernel> {
    check_unit_open("fBm alpha", alpha)?;
    Ok(Kernel::build(
        KernelKind::Fbm { alpha },
        Domain::unit_interval(),
        false,
        None,
        format!("fbm(alpha={alpha})"),
    ))
}

/// Riemann–Liouville process on `[0, 1]`.
pub fn make_riemann_liouville(alpha: f64, quad_tol: f64) -> Result<Kernel> {
    check_unit_open("Riemann-Liouville alpha", alpha)?;
    check_positive("quad_tol", quad_tol)?;
    Ok(Kernel::build(
        KernelKind::RiemannLiouville(RlCovariance::new(alpha, quad_tol)),
        Domain::unit_interval(),
        false,
        None,
        format!("rl(alpha={alpha})"),
    ))
}

/// Matérn kernel `(σr)^α K_α(σr)`, optionally divided by `2^{α-1}Γ(α)` so
/// that `k(t, t) = 1`.
pub fn make_matern(alpha: f64, sigma: f64, domain: Domain, normalized: bool) -> Result<Kernel> {
    check_positive("Matern alpha", alpha)?;
    check_positive("Matern sigma", sigma)?;
    if domain.is_circle() {
        return param("Matern kernels live on intervals or boxes, not the circle");
    }
    let norm = 2f64.powf(alpha - 1.0) * libm::tgamma(alpha);
    if !norm.is_finite() {
        return param(format!("Matern alpha = {alpha} is too large"));
    }
    let d = domain.dimension();
    Ok(Kernel::build(
        KernelKind::Matern {
            alpha,
            sigma,
            normalized,
            norm,
        },
        domain,
        true,
        None,
        format!("matern(alpha={alpha}, sigma={sigma}, d={d})"),
    ))
}

/// Stationary kernel `c_0 + 2 Σ c_n cos(2πn(s-t))` on the circle from an
/// explicit coefficient list.
pub fn make_circle_kernel(coeffs: &[f64]) -> Result<Kernel> {
    if coeffs.is_empty() {
        return param("circle kernel needs at least c_0");
    }
    if let Some((n, c)) = coeffs
        .iter()
        .enumerate()
        .find(|(_, c)| !(c.is_finite() && **c >= 0.0))
    {
        return param(format!("Fourier coefficient c_{n} = {c} must be finite and >= 0"));
    }
    let mut spectrum = vec![coeffs[0]];
    for &c in &coeffs[1..] {
        spectrum.push(c);
        spectrum.push(c);
    }
    spectrum.retain(|&c| c > 0.0);
    spectrum.sort_by(|a, b| b.total_cmp(a));
    Ok(Kernel::build(
        KernelKind::Circle(CircleCoeffs::List(coeffs.to_vec())),
        Domain::Circle,
        true,
        Some(KnownSpectrum::new(SpectrumForm::Finite(spectrum))),
        format!("circle(m={})", coeffs.len() - 1),
    ))
}

/// Circle kernel with `c_n = n^{-p}`, evaluated with the series cut after
/// `terms` frequencies. The attached spectrum is the untruncated power law.
pub fn make_circle_power(c0: f64, p: f64, terms: usize) -> Result<Kernel> {
    if !(c0.is_finite() && c0 >= 0.0) {
        return param(format!("c_0 must be finite and >= 0, got {c0}"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return param(format!("power-law exponent must exceed 1 for a summable series, got {p}"));
    }
    if terms == 0 {
        return param("terms must be at least 1");
    }
    Ok(Kernel::build(
        KernelKind::Circle(CircleCoeffs::Power { c0, p, terms }),
        Domain::Circle,
        true,
        Some(KnownSpectrum::new(SpectrumForm::CirclePower { c0, p })),
        format!("circle(c_n=n^-{p})"),
    ))
}

/// Product kernel `∏ k_i(s_i, t_i)` on the box spanned by the factors.
pub fn tensor(factors: &[Kernel]) -> Result<Kernel> {
    if factors.len() < 2 {
        return param(format!("tensor needs at least 2 factors, got {}", factors.len()));
    }
    let mut bounds = Vec::with_capacity(factors.len());
    for f in factors {
        match f.domain() {
            Domain::Interval { a, b } => bounds.push((*a, *b)),
            other => {
                return param(format!(
                    "tensor factors must be kernels on intervals, got {}",
                    other.describe()
                ))
            }
        }
    }
    let label = format!(
        "tensor[{}]",
        factors.iter().map(|f| f.label()).collect::<Vec<_>>().join(" x ")
    );
    let stationary = factors.iter().all(|f| f.is_stationary());
    Ok(Kernel::build(
        KernelKind::Tensor(factors.to_vec()),
        Domain::boxed(bounds)?,
        stationary,
        None,
        label,
    ))
}

/// `d`-fold tensor power of a single factor.
pub fn tensor_power(factor: &Kernel, d: usize) -> Result<Kernel> {
    tensor(&vec![factor.clone(); d])
}

/// `k'(s,t) = k(s,t) + Σ sign_j f_j(s) f_j(t)`. A `+f` and `-f` pair of the
/// same feature cancels; if nothing remains the base kernel is returned.
/// Positive definiteness of the result is checked only when a Gram matrix is
/// decomposed.
pub fn add_finite_rank(base: &Kernel, terms: Vec<(Feature, Sign)>) -> Result<Kernel> {
    let mut kept: Vec<(Feature, Sign)> = Vec::with_capacity(terms.len());
    for (f, sign) in terms {
        if f.is_builtin() && base.dimension() != 1 {
            return param("built-in features are one-dimensional; use Feature::Custom");
        }
        if let Some(pos) = kept
            .iter()
            .position(|(g, s)| *s != sign && g.same_as(&f))
        {
            kept.remove(pos);
        } else {
            kept.push((f, sign));
        }
    }
    if kept.is_empty() {
        return Ok(base.clone());
    }
    let label = format!("{} + rank{}", base.label(), kept.len());
    Ok(Kernel::build(
        KernelKind::Perturbed {
            base: base.clone(),
            terms: kept,
        },
        base.domain().clone(),
        false,
        None,
        label,
    ))
}

/// `k ≡ c` on the given domain.
pub fn make_constant(c: f64, domain: Domain) -> Result<Kernel> {
    if !(c.is_finite() && c >= 0.0) {
        return param(format!("constant kernel value must be finite and >= 0, got {c}"));
    }
    let known = Some(KnownSpectrum::new(SpectrumForm::Finite(vec![
        c * domain.measure()
    ])));
    Ok(Kernel::build(
        KernelKind::Constant(c),
        domain,
        true,
        known,
        format!("constant({c})"),
    ))
}

/// `c · k` for `c > 0`.
pub fn scaled(base: &Kernel, factor: f64) -> Result<Kernel> {
    check_positive("scale factor", factor)?;
    let known = base.known_spectrum().map(|k| KnownSpectrum {
        scale: k.scale * factor,
        form: k.form.clone(),
    });
    Ok(Kernel::build(
        KernelKind::Scaled {
            base: base.clone(),
            factor,
        },
        base.domain().clone(),
        base.is_stationary(),
        known,
        format!("{factor} * {}", base.label()),
    ))
}
