//! Finite-measure discretisations of Lebesgue measure on intervals, boxes and
//! the unit circle. A [`QuadratureRule`] is the measure `ν` against which the
//! kernel integral operator is assembled.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest total node count any constructor will produce.
pub const MAX_NODES: usize = 10_000_000;

/// Newton iteration cap per Legendre root.
const GL_MAX_NEWTON: usize = 100;

/// Index domain of a kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Box { bounds: Vec<(f64, f64)> },
    /// `ℝ/ℤ`, represented by `[0, 1)` with period one.
    Circle,
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return param(format!("interval bounds must satisfy a < b, got [{a}, {b}]"));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn unit_interval() -> Self {
        Domain::Interval { a: 0.0, b: 1.0 }
    }

    pub fn boxed(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return param("box domain needs at least one axis");
        }
        for &(a, b) in &bounds {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return param(format!("box axis bounds must satisfy a < b, got [{a}, {b}]"));
            }
        }
        Ok(Domain::Box { bounds })
    }

    /// `[0,1]^d`; a one-dimensional request yields the unit interval.
    pub fn unit_cube(d: usize) -> Result<Self> {
        match d {
            0 => param("dimension must be at least 1"),
            1 => Ok(Self::unit_interval()),
            _ => Self::boxed(vec![(0.0, 1.0); d]),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } | Domain::Circle => 1,
            Domain::Box { bounds } => bounds.len(),
        }
    }

    /// Per-axis bounds; the circle reports `[0, 1]`.
    pub fn axis_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Domain::Interval { a, b } => vec![(*a, *b)],
            Domain::Box { bounds } => bounds.clone(),
            Domain::Circle => vec![(0.0, 1.0)],
        }
    }

    /// Lebesgue measure (Haar measure for the circle).
    pub fn measure(&self) -> f64 {
        self.axis_bounds().iter().map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        if t.len() != self.dimension() {
            return false;
        }
        match self {
            Domain::Circle => t[0].is_finite(),
            _ => self
                .axis_bounds()
                .iter()
                .zip(t)
                .all(|(&(a, b), &x)| x >= a && x <= b),
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Domain::Circle)
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::Interval { a, b } => format!("[{a}, {b}]"),
            Domain::Box { bounds } => bounds
                .iter()
                .map(|(a, b)| format!("[{a}, {b}]"))
                .collect::<Vec<_>>()
                .join("x"),
            Domain::Circle => "circle(1)".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GaussLegendre,
    UniformMidpoint,
    CircleUniform,
}

/// One axis of a product rule, kept so that a rule can be rebuilt at a finer
/// resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Axis {
    scheme: Scheme,
    n: usize,
    a: f64,
    b: f64,
}

/// Nodes and positive weights of a discrete measure on a [`Domain`].
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
    domain: Domain,
    scheme: Scheme,
    axes: Vec<Axis>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, j: usize) -> &[f64] {
        &self.nodes[j * self.dim..(j + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Nodes per axis.
    pub fn per_axis(&self) -> Vec<usize> {
        self.axes.iter().map(|ax| ax.n).collect()
    }

    /// The one-dimensional rule along axis `i`.
    pub fn axis(&self, i: usize) -> Result<Self> {
        let ax = self
            .axes
            .get(i)
            .ok_or_else(|| Error::Usage(format!("rule has {} axes, asked for {i}", self.axes.len())))?;
        axis_rule(ax.scheme, ax.n, ax.a, ax.b)
    }

    pub fn describe(&self) -> String {
        format!(
            "{:?} rule with {} nodes on {}",
            self.scheme,
            self.len(),
            self.domain.describe()
        )
    }

    /// The same scheme with `factor` times as many nodes per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return param("refinement factor must be positive");
        }
        if self.scheme == Scheme::CircleUniform {
            return circle_uniform(self.len() * factor);
        }
        let rules = self
            .axes
            .iter()
            .map(|ax| axis_rule(ax.scheme, ax.n * factor, ax.a, ax.b))
            .collect::<Result<Vec<_>>>()?;
        if rules.len() == 1 {
            Ok(rules.into_iter().next().unwrap())
        } else {
            tensor_rule(&rules)
        }
    }
}

/// `n`-point rule of the given scheme on `[a, b]` (the circle ignores the bounds).
pub fn axis_rule(scheme: Scheme, n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    match scheme {
        Scheme::GaussLegendre => gauss_legendre(n, a, b),
        Scheme::UniformMidpoint => uniform_midpoint(n, &Domain::interval(a, b)?),
        Scheme::CircleUniform => circle_uniform(n),
    }
}

fn one_dim(scheme: Scheme, nodes: Vec<f64>, weights: Vec<f64>, a: f64, b: f64) -> QuadratureRule {
    QuadratureRule {
        axes: vec![Axis {
            scheme,
            n: nodes.len(),
            a,
            b,
        }],
        nodes,
        weights,
        dim: 1,
        domain: Domain::Interval { a, b },
        scheme,
    }
}

/// Roots and Christoffel weights of the degree-`n` Legendre polynomial on
/// `[-1, 1]`, found by Newton's method from Tricomi's initial guesses.
fn legendre_roots(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..GL_MAX_NEWTON {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                dp = legendre_with_derivative(n, z).1;
                break;
            }
        }
        if !converged {
            return Err(Error::Internal(format!(
                "Newton iteration for Legendre root {i} of degree {n} did not converge"
            )));
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `n`-point Gauss–Legendre rule on `[a, b]`, exact for polynomials of degree
/// at most `2n - 1`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return param("Gauss-Legendre rule needs n >= 1");
    }
    if n > MAX_NODES {
        return Err(Error::Size(format!("{n} nodes exceed the limit {MAX_NODES}")));
    }
    Domain::interval(a, b)?;
    let (x, w) = legendre_roots(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = x.iter().map(|&xi| mid + half * xi).collect();
    let weights = w.iter().map(|&wi| half * wi).collect();
    Ok(one_dim(Scheme::GaussLegendre, nodes, weights, a, b))
}

/// Midpoint rule with `n` cells per axis. On the circle this defers to
/// [`circle_uniform`], whose nodes sit at `j/n`.
pub fn uniform_midpoint(n: usize, domain: &Domain) -> Result<QuadratureRule> {
    if n == 0 {
        return param("midpoint rule needs n >= 1");
    }
    match domain {
        Domain::Circle => circle_uniform(n),
        Domain::Interval { a, b } => {
            let h = (b - a) / n as f64;
            let nodes = (0..n).map(|j| a + (j as f64 + 0.5) * h).collect();
            Ok(one_dim(Scheme::UniformMidpoint, nodes, vec![h; n], *a, *b))
        }
        Domain::Box { bounds } => {
            check_product_size(std::iter::repeat_n(n, bounds.len()))?;
            let rules = bounds
                .iter()
                .map(|&(a, b)| uniform_midpoint(n, &Domain::interval(a, b)?))
                .collect::<Result<Vec<_>>>()?;
            tensor_rule(&rules)
        }
    }
}

/// Equispaced nodes `j/n` on the unit circle, each with weight `1/n`.
pub fn circle_uniform(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return param("circle rule needs n >= 1");
    }
    if n > MAX_NODES {
        return Err(Error::Size(format!("{n} nodes exceed the limit {MAX_NODES}")));
    }
    let nodes = (0..n).map(|j| j as f64 / n as f64).collect();
    Ok(QuadratureRule {
        nodes,
        weights: vec![1.0 / n as f64; n],
        dim: 1,
        domain: Domain::Circle,
        scheme: Scheme::CircleUniform,
        axes: vec![Axis {
            scheme: Scheme::CircleUniform,
            n,
            a: 0.0,
            b: 1.0,
        }],
    })
}

fn check_product_size(sizes: impl Iterator<Item = usize>) -> Result<usize> {
    let mut total: usize = 1;
    for n in sizes {
        total = total
            .checked_mul(n)
            .filter(|&t| t <= MAX_NODES)
            .ok_or_else(|| Error::Size(format!("product rule exceeds {MAX_NODES} nodes")))?;
    }
    Ok(total)
}

/// Product of one-dimensional interval rules.
pub fn tensor_rule(rules: &[QuadratureRule]) -> Result<QuadratureRule> {
    if rules.is_empty() {
        return param("tensor_rule needs at least one factor rule");
    }
    if let Some(bad) = rules
        .iter()
        .find(|r| r.dim != 1 || !matches!(r.domain, Domain::Interval { .. }))
    {
        return param(format!(
            "tensor_rule factors must be interval rules, got {}",
            bad.describe()
        ));
    }
    let total = check_product_size(rules.iter().map(|r| r.len()))?;
    let d = rules.len();
    let mut nodes = Vec::with_capacity(total * d);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut w = 1.0;
        for (axis, rule) in rules.iter().enumerate() {
            nodes.push(rule.nodes[idx[axis]]);
            w *= rule.weights[idx[axis]];
        }
        weights.push(w);
        // last axis varies fastest
        for axis in (0..d).rev() {
            idx[axis] += 1;
            if idx[axis] < rules[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
    let bounds = rules.iter().flat_map(|r| r.domain.axis_bounds()).collect::<Vec<_>>();
    let domain = if d == 1 {
        rules[0].domain.clone()
    } else {
        Domain::Box { bounds }
    };
    let scheme = rules[0].scheme;
    Ok(QuadratureRule {
        nodes,
        weights,
        dim: d,
        domain,
        scheme,
        axes: rules.iter().flat_map(|r| r.axes.clone()).collect(),
    })
}

/// JSON description of a rule: `{"scheme": "gl"|"uniform"|"circle", "n": int,
/// "bounds": [[a, b], ...]}`. Missing bounds fall back to the kernel's domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub scheme: SchemeName,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Gl,
    Uniform,
    Circle,
}

impl QuadratureSpec {
    pub fn build(&self, default_domain: &Domain) -> Result<QuadratureRule> {
        let domain = match (&self.bounds, self.scheme) {
            (_, SchemeName::Circle) => Domain::Circle,
            (Some(b), _) if b.len() == 1 => Domain::interval(b[0].0, b[0].1)?,
            (Some(b), _) => Domain::boxed(b.clone())?,
            (None, _) => default_domain.clone(),
        };
        match (self.scheme, &domain) {
            (SchemeName::Circle, _) => circle_uniform(self.n),
            (_, Domain::Circle) => param("a circle domain needs the \"circle\" scheme"),
            (SchemeName::Uniform, d) => uniform_midpoint(self.n, d),
            (SchemeName::Gl, Domain::Interval { a, b }) => gauss_legendre(self.n, *a, *b),
            (SchemeName::Gl, Domain::Box { bounds }) => {
                check_product_size(std::iter::repeat_n(self.n, bounds.len()))?;
                let rules = bounds
                    .iter()
                    .map(|&(a, b)| gauss_legendre(self.n, a, b))
                    .collect::<Result<Vec<_>>>()?;
                tensor_rule(&rules)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_legendre(1, 0.0, 1.0).unwrap();
        assert!((r.node(0)[0] - 0.5).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule_matches_table() {
        let r = gauss_legendre(2, 0.0, 1.0).unwrap();
        let off = 0.5 / 3f64.sqrt();
        assert!((r.node(0)[0] - (0.5 - off)).abs() < 1e-15);
        assert!((r.node(1)[0] - (0.5 + off)).abs() < 1e-15);
        assert!((r.node(0)[0] - 0.211_324_9).abs() < 1e-7);
        for &w in r.weights() {
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_rule_has_centre_node() {
        let r = gauss_legendre(5, -1.0, 1.0).unwrap();
        assert_eq!(r.node(2)[0], 0.0);
        // w_centre = 128/225 for n = 5
        assert!((r.weights()[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_converges() {
        let r = gauss_legendre(4096, 0.0, 1.0).unwrap();
        let s: f64 = r.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for x in r.nodes() {
            assert!(x[0] > prev && x[0] > 0.0 && x[0] < 1.0);
            prev = x[0];
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(gauss_legendre(0, 0.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(gauss_legendre(3, 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(
            uniform_midpoint(5000, &Domain::unit_cube(2).unwrap()),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn midpoint_and_circle_nodes() {
        let r = uniform_midpoint(2, &Domain::unit_interval()).unwrap();
        assert_eq!(r.nodes().map(|x| x[0]).collect::<Vec<_>>(), vec![0.25, 0.75]);
        let c = uniform_midpoint(4, &Domain::Circle).unwrap();
        assert_eq!(c.nodes().map(|x| x[0]).collect::<Vec<_>>(), vec![0.0, 0.25, 0.5, 0.75]);
        assert!(c.weights().iter().all(|&w| w == 0.25));
        let b = uniform_midpoint(2, &Domain::unit_cube(2).unwrap()).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn tensor_of_single_points() {
        let r1 = gauss_legendre(1, 0.0, 1.0).unwrap();
        let t = tensor_rule(&[r1.clone(), r1]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.node(0), &[0.5, 0.5]);
        assert!((t.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_rejects_circle_factor() {
        let c = circle_uniform(4).unwrap();
        let g = gauss_legendre(2, 0.0, 1.0).unwrap();
        assert!(matches!(tensor_rule(&[g, c]), Err(Error::Parameter(_))));
    }

    #[test]
    fn refinement_doubles_nodes() {
        let r = gauss_legendre(8, 0.0, 2.0).unwrap().refined(2).unwrap();
        assert_eq!(r.len(), 16);
        assert_eq!(r.domain(), &Domain::Interval { a: 0.0, b: 2.0 });
        let b = uniform_midpoint(3, &Domain::unit_cube(2).unwrap()).unwrap();
        assert_eq!(b.refined(2).unwrap().len(), 36);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec: QuadratureSpec =
            serde_json::from_str(r#"{"scheme":"gl","n":4,"bounds":[[0,2]]}"#).unwrap();
        let r = spec.build(&Domain::unit_interval()).unwrap();
        assert_eq!(r.len(), 4);
        assert!((r.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let spec: QuadratureSpec = serde_json::from_str(r#"{"scheme":"circle","n":8}"#).unwrap();
        assert_eq!(spec.build(&Domain::unit_interval()).unwrap().scheme(), Scheme::CircleUniform);
    }
}
