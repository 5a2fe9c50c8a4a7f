//! JSON form of kernels: `{"kind": "...", ...parameters}`.

use serde::{Deserialize, Serialize};

use super::{
    add_finite_rank, make_brownian_bridge, make_circle_kernel, make_circle_power, make_constant,
    make_fbm, make_matern, make_ou, make_riemann_liouville, make_wiener, scaled, tensor,
    CircleCoeffs, Feature, Kernel, KernelKind, Sign, DEFAULT_CIRCLE_TERMS, DEFAULT_RL_TOL,
};
use crate::error::{param, Result};
use crate::quadrature::Domain;

fn one() -> f64 {
    1.0
}

fn one_u8() -> u8 {
    1
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Wiener {},
    Bridge {},
    Ou {
        #[serde(default = "one_u8")]
        variant: u8,
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    Fbm {
        alpha: f64,
    },
    Rl {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quad_tol: Option<f64>,
    },
    Matern {
        alpha: f64,
        #[serde(default = "one")]
        sigma: f64,
        /// Dimension of `[0,1]^d`; ignored when `bounds` is given.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<Vec<(f64, f64)>>,
        #[serde(default = "yes", skip_serializing_if = "is_true")]
        normalized: bool,
    },
    /// Either `coeffs` (explicit `c_0, c_1, …`) or `power` (`c_n = n^{-power}`).
    Circle {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        power: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<usize>,
    },
    /// Either explicit `factors` or `factor` repeated `d` times.
    Tensor {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factors: Option<Vec<KernelSpec>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factor: Option<Box<KernelSpec>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
    },
    Perturbed {
        base: Box<KernelSpec>,
        terms: Vec<FeatureSpec>,
    },
    Constant {
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
    },
    Scaled {
        base: Box<KernelSpec>,
        factor: f64,
    },
}

/// One signed rank-one term, `{"feature": "linear", "scale": 1, "sign": -1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "feature", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureSpec {
    Constant {
        value: f64,
        sign: i32,
    },
    Linear {
        #[serde(default = "one")]
        scale: f64,
        sign: i32,
    },
    Exp {
        #[serde(default = "one")]
        scale: f64,
        rate: f64,
        sign: i32,
    },
    Power {
        #[serde(default = "one")]
        scale: f64,
        exponent: f64,
        sign: i32,
    },
}

impl FeatureSpec {
    fn build(&self) -> Result<(Feature, Sign)> {
        Ok(match *self {
            FeatureSpec::Constant { value, sign } => (Feature::Constant(value), Sign::from_i32(sign)?),
            FeatureSpec::Linear { scale, sign } => (Feature::Linear { scale }, Sign::from_i32(sign)?),
            FeatureSpec::Exp { scale, rate, sign } => {
                (Feature::Exp { scale, rate }, Sign::from_i32(sign)?)
            }
            FeatureSpec::Power {
                scale,
                exponent,
                sign,
            } => (Feature::Power { scale, exponent }, Sign::from_i32(sign)?),
        })
    }

    fn from_feature(f: &Feature, sign: Sign) -> Option<Self> {
        let sign = sign.value() as i32;
        Some(match *f {
            Feature::Constant(value) => FeatureSpec::Constant { value, sign },
            Feature::Linear { scale } => FeatureSpec::Linear { scale, sign },
            Feature::Exp { scale, rate } => FeatureSpec::Exp { scale, rate, sign },
            Feature::Power { scale, exponent } => FeatureSpec::Power {
                scale,
                exponent,
                sign,
            },
            Feature::Custom(_) => return None,
        })
    }
}

impl KernelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<Kernel> {
        match self {
            KernelSpec::Wiener {} => Ok(make_wiener()),
            KernelSpec::Bridge {} => Ok(make_brownian_bridge()),
            KernelSpec::Ou { variant, a, sigma } => make_ou(*variant, *a, *sigma),
            KernelSpec::Fbm { alpha } => make_fbm(*alpha),
            KernelSpec::Rl { alpha, quad_tol } => {
                make_riemann_liouville(*alpha, quad_tol.unwrap_or(DEFAULT_RL_TOL))
            }
            KernelSpec::Matern {
                alpha,
                sigma,
                d,
                bounds,
                normalized,
            } => {
                let domain = match bounds {
                    Some(b) if b.len() == 1 => Domain::interval(b[0].0, b[0].1)?,
                    Some(b) => Domain::boxed(b.clone())?,
                    None => Domain::unit_cube(d.unwrap_or(1))?,
                };
                make_matern(*alpha, *sigma, domain, *normalized)
            }
            KernelSpec::Circle {
                coeffs,
                power,
                c0,
                terms,
            } => match (coeffs, power) {
                (Some(c), None) => {
                    if c0.is_some() || terms.is_some() {
                        return param("circle: c0 and terms apply only with power");
                    }
                    make_circle_kernel(c)
                }
                (None, Some(p)) => {
                    make_circle_power(c0.unwrap_or(0.0), *p, terms.unwrap_or(DEFAULT_CIRCLE_TERMS))
                }
                _ => param("circle: give exactly one of coeffs or power"),
            },
            KernelSpec::Tensor { factors, factor, d } => match (factors, factor, d) {
                (Some(fs), None, None) => {
                    let built = fs.iter().map(|f| f.build()).collect::<Result<Vec<_>>>()?;
                    tensor(&built)
                }
                (None, Some(f), Some(d)) => tensor(&vec![f.build()?; *d]),
                _ => param("tensor: give either factors, or factor with d"),
            },
            KernelSpec::Perturbed { base, terms } => {
                let terms = terms.iter().map(|t| t.build()).collect::<Result<Vec<_>>>()?;
                add_finite_rank(&base.build()?, terms)
            }
            KernelSpec::Constant { value, d } => make_constant(*value, Domain::unit_cube(d.unwrap_or(1))?),
            KernelSpec::Scaled { base, factor } => scaled(&base.build()?, *factor),
        }
    }

    /// Short human-readable name.
    pub fn name(&self) -> String {
        match self {
            KernelSpec::Wiener {} => "wiener".into(),
            KernelSpec::Bridge {} => "bridge".into(),
            KernelSpec::Ou { variant, .. } => format!("ou{variant}"),
            KernelSpec::Fbm { alpha } => format!("fbm({alpha})"),
            KernelSpec::Rl { alpha, .. } => format!("rl({alpha})"),
            KernelSpec::Matern { alpha, d, bounds, .. } => {
                let d = bounds.as_ref().map(|b| b.len()).or(*d).unwrap_or(1);
                format!("matern({alpha},d={d})")
            }
            KernelSpec::Circle { power: Some(p), .. } => format!("circle(n^-{p})"),
            KernelSpec::Circle { .. } => "circle".into(),
            KernelSpec::Tensor {
                factor: Some(f),
                d: Some(d),
                ..
            } => format!("tensor({},d={d})", f.name()),
            KernelSpec::Tensor { .. } => "tensor".into(),
            KernelSpec::Perturbed { base, .. } => format!("perturbed({})", base.name()),
            KernelSpec::Constant { value, .. } => format!("constant({value})"),
            KernelSpec::Scaled { base, factor } => format!("{factor}*{}", base.name()),
        }
    }
}

impl Kernel {
    /// JSON description of the kernel, if it was built only from parameters
    /// expressible in the spec (custom features are not).
    pub fn to_spec(&self) -> Option<KernelSpec> {
        Some(match self.kind() {
            KernelKind::Wiener => KernelSpec::Wiener {},
            KernelKind::BrownianBridge => KernelSpec::Bridge {},
            KernelKind::Ou { variant, a, sigma } => KernelSpec::Ou {
                variant: *variant,
                a: *a,
                sigma: *sigma,
            },
            KernelKind::Fbm { alpha } => KernelSpec::Fbm { alpha: *alpha },
            KernelKind::RiemannLiouville(rl) => KernelSpec::Rl {
                alpha: rl.alpha(),
                quad_tol: Some(rl.quad_tol()),
            },
            KernelKind::Matern {
                alpha,
                sigma,
                normalized,
                ..
            } => KernelSpec::Matern {
                alpha: *alpha,
                sigma: *sigma,
                d: None,
                bounds: Some(self.domain().axis_bounds()),
                normalized: *normalized,
            },
            KernelKind::Circle(CircleCoeffs::List(c)) => KernelSpec::Circle {
                coeffs: Some(c.clone()),
                power: None,
                c0: None,
                terms: None,
            },
            KernelKind::Circle(CircleCoeffs::Power { c0, p, terms }) => KernelSpec::Circle {
                coeffs: None,
                power: Some(*p),
                c0: Some(*c0),
                terms: Some(*terms),
            },
            KernelKind::Tensor(fs) => KernelSpec::Tensor {
                factors: Some(fs.iter().map(|f| f.to_spec()).collect::<Option<Vec<_>>>()?),
                factor: None,
                d: None,
            },
            KernelKind::Perturbed { base, terms } => KernelSpec::Perturbed {
                base: Box::new(base.to_spec()?),
                terms: terms
                    .iter()
                    .map(|(f, s)| FeatureSpec::from_feature(f, *s))
                    .collect::<Option<Vec<_>>>()?,
            },
            KernelKind::Constant(value) => {
                let d = self.dimension();
                if self.domain().axis_bounds().iter().any(|&(a, b)| a != 0.0 || b != 1.0)
                    || self.domain().is_circle()
                {
                    return None;
                }
                KernelSpec::Constant {
                    value: *value,
                    d: (d > 1).then_some(d),
                }
            }
            KernelKind::Scaled { base, factor } => KernelSpec::Scaled {
                base: Box::new(base.to_spec()?),
                factor: *factor,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let docs = [
            r#"{"kind":"wiener"}"#,
            r#"{"kind":"bridge"}"#,
            r#"{"kind":"ou","variant":2,"a":1.5,"sigma":0.5}"#,
            r#"{"kind":"fbm","alpha":0.75}"#,
            r#"{"kind":"rl","alpha":0.25,"quad_tol":1e-9}"#,
            r#"{"kind":"matern","alpha":1.5,"d":2}"#,
            r#"{"kind":"matern","alpha":0.5,"sigma":2,"bounds":[[0,2]],"normalized":false}"#,
            r#"{"kind":"circle","coeffs":[1,0.5,0.25]}"#,
            r#"{"kind":"circle","power":4,"c0":1,"terms":1024}"#,
            r#"{"kind":"tensor","factor":{"kind":"matern","alpha":1.5},"d":3}"#,
            r#"{"kind":"tensor","factors":[{"kind":"wiener"},{"kind":"bridge"}]}"#,
            r#"{"kind":"perturbed","base":{"kind":"wiener"},"terms":[{"feature":"linear","sign":-1}]}"#,
            r#"{"kind":"constant","value":2}"#,
            r#"{"kind":"scaled","base":{"kind":"wiener"},"factor":3}"#,
        ];
        for doc in docs {
            let spec = KernelSpec::from_json(doc).unwrap_or_else(|e| panic!("{doc}: {e}"));
            let k = spec.build().unwrap_or_else(|e| panic!("{doc}: {e}"));
            let back = k.to_spec().unwrap();
            let again = back.build().unwrap();
            let p = vec![0.3; k.dimension()];
            let q = vec![0.6; k.dimension()];
            assert_eq!(k.eval(&p, &q).unwrap(), again.eval(&p, &q).unwrap(), "{doc}");
        }
    }

    #[test]
    fn rejects_bad_documents() {
        for doc in [
            r#"{"kind":"nope"}"#,
            r#"{"kind":"fbm"}"#,
            r#"{"kind":"fbm","alpha":0.5,"extra":1}"#,
            r#"{"kind":"wiener","alpha":1}"#,
        ] {
            assert!(KernelSpec::from_json(doc).is_err(), "{doc}");
        }
        for doc in [
            r#"{"kind":"circle"}"#,
            r#"{"kind":"circle","coeffs":[1],"power":2}"#,
            r#"{"kind":"tensor","factor":{"kind":"wiener"}}"#,
            r#"{"kind":"fbm","alpha":1.5}"#,
            r#"{"kind":"perturbed","base":{"kind":"wiener"},"terms":[{"feature":"linear","sign":2}]}"#,
        ] {
            let spec = KernelSpec::from_json(doc).unwrap();
            assert!(spec.build().is_err(), "{doc}");
        }
    }

    #[test]
    fn perturbed_wiener_is_bridge() {
        let spec = KernelSpec::from_json(
            r#"{"kind":"perturbed","base":{"kind":"wiener"},"terms":[{"feature":"linear","sign":-1}]}"#,
        )
        .unwrap();
        let k = spec.build().unwrap();
        assert!((k.eval1(0.5, 0.5).unwrap() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn serialization_is_stable() {
        let spec = KernelSpec::Matern {
            alpha: 1.5,
            sigma: 1.0,
            d: Some(2),
            bounds: None,
            normalized: true,
        };
        assert_eq!(
            serde_json::to_string(&spec).unwrap(),
            r#"{"kind":"matern","alpha":1.5,"sigma":1.0,"d":2}"#
        );
    }
}
