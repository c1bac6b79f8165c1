//! JSON curve specifications.
//!
//! ```json
//! {"type": "single_frequency", "freq": "sqrt(2)",
//!  "c1": ["sqrt(1/2)", 0, 0], "c2": [0, "sqrt(1/2)", 0], "c4": [0, 0, "sqrt(1/2)"]}
//! ```
//!
//! Numbers are JSON numbers, strings `"p/q"`, `"sqrt(p/q)"` (optionally
//! signed), or `[hi, lo]` double-double pairs. Parametric families sample over
//! `periods` minimal periods unless an `interval` is given; `grid` fixes the
//! node count when the command line does not.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{Curvature, Domain, Field, SampledCurve, Target, TargetSpace};
use crate::parametric::{Hemisphere, ParametricCurve};
use crate::product::{graph_curve, ProductCurve};
use crate::random::random_closed_curve;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Pair([f64; 2]),
    Text(String),
}

fn parse_ratio<T: Real>(s: &str) -> Option<T> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            (q != 0.0).then(|| T::from_f64(p) / T::from_f64(q))
        }
        None => s.trim().parse::<f64>().ok().map(T::from_f64),
    }
}

impl Num {
    pub fn value<T: Real>(&self) -> std::result::Result<T, String> {
        match self {
            Num::Float(x) => Ok(T::from_f64(*x)),
            Num::Pair([hi, lo]) => Ok(T::from_f64(*hi) + T::from_f64(*lo)),
            Num::Text(s) => {
                let t = s.trim();
                let (neg, body) = match t.strip_prefix('-') {
                    Some(rest) => (true, rest.trim()),
                    None => (false, t),
                };
                let v = match body.strip_prefix("sqrt(").and_then(|b| b.strip_suffix(')')) {
                    Some(inner) => parse_ratio::<T>(inner).filter(|v| v.to_f64() >= 0.0).map(|v| v.sqrt()),
                    None => parse_ratio::<T>(body),
                }
                .ok_or_else(|| format!("cannot read number {s:?}; expected x, \"p/q\" or \"sqrt(p/q)\""))?;
                Ok(if neg { -v } else { v })
            }
        }
    }

    /// Exact round-trip encoding of a value.
    pub fn encode<T: Real>(v: T) -> Num {
        let hi = v.to_f64();
        let lo = (v - T::from_f64(hi)).to_f64();
        if lo == 0.0 {
            Num::Float(hi)
        } else {
            Num::Pair([hi, lo])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    /// Sectional curvature: 1, 0 or -1.
    pub curvature: i64,
    /// Intrinsic dimension.
    pub dim: usize,
}

impl SpaceSpec {
    fn space(&self) -> Result<TargetSpace> {
        TargetSpace::new(Curvature::from_sign(self.curvature)?, self.dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    Periodic(Num),
    Interval([Num; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveSpec {
    Samples(SamplesSpec),
    GreatCircle(GreatCircleSpec),
    SingleFrequency(SingleFrequencySpec),
    DoubleFrequency(DoubleFrequencySpec),
    ConstantKappa(ConstantKappaSpec),
    /// Random closed curve: a perturbed great circle on spheres, a loop elsewhere.
    RandomClosed(RandomClosedSpec),
    Product(ProductSpec),
    Graph(GraphSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesSpec {
    /// Factors of the target, in order.
    pub target: Vec<SpaceSpec>,
    pub domain: DomainSpec,
    pub points: Vec<Vec<Num>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreatCircleSpec {
    #[serde(default = "default_ambient")]
    pub ambient_dim: usize,
    #[serde(flatten)]
    pub sampling: Sampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleFrequencySpec {
    pub freq: Num,
    pub c1: Vec<Num>,
    pub c2: Vec<Num>,
    pub c4: Vec<Num>,
    #[serde(flatten)]
    pub sampling: Sampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleFrequencySpec {
    pub a: Num,
    pub b: Num,
    pub c: [Vec<Num>; 4],
    #[serde(flatten)]
    pub sampling: Sampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantKappaSpec {
    pub kappa: Num,
    #[serde(default = "default_hemisphere")]
    pub hemisphere: Hemisphere,
    #[serde(flatten)]
    pub sampling: Sampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomClosedSpec {
    pub target: SpaceSpec,
    #[serde(default = "default_modes")]
    pub modes: usize,
    pub amplitude: f64,
    pub period: Num,
    /// Overrides the command-line seed.
    pub seed: Option<u64>,
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub a: Box<CurveSpec>,
    pub b: Box<CurveSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub psi: Box<CurveSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub grid: Option<usize>,
    pub periods: Option<usize>,
    pub interval: Option<[Num; 2]>,
}

fn default_ambient() -> usize {
    3
}

fn default_hemisphere() -> Hemisphere {
    Hemisphere::North
}

fn default_modes() -> usize {
    3
}

/// Everything a spec may need besides its own fields.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuildContext {
    /// Node count from the command line; wins over `grid` in the spec.
    pub grid: Option<usize>,
    pub seed: u64,
}

pub const DEFAULT_GRID: usize = 256;

/// A built spec: a plain curve, or a product kept factor by factor.
#[derive(Clone, Debug)]
pub enum Built<T> {
    Curve(SampledCurve<T>),
    Product(ProductCurve<T>),
}

impl<T: Real> Built<T> {
    /// The curve as one sampled map (the product embedding for products).
    pub fn curve(&self) -> Result<SampledCurve<T>> {
        match self {
            Built::Curve(c) => Ok(c.clone()),
            Built::Product(p) => p.combined(),
        }
    }
}

fn fields<S: serde::de::DeserializeOwned>(value: Value, path: &str) -> Result<S> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." { path.to_string() } else { format!("{path}.{inner}") };
        invalid(&full, e.into_inner().to_string())
    })
}

fn no_extra(obj: &serde_json::Map<String, Value>, path: &str) -> Result<()> {
    match obj.keys().next() {
        Some(k) => Err(invalid(&format!("{path}.{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::InvalidSpec { path: path.to_string(), message: message.into() }
}

fn num<T: Real>(n: &Num, path: &str) -> Result<T> {
    n.value::<T>().map_err(|m| invalid(path, m))
}

fn vector<T: Real>(v: &[Num], path: &str) -> Result<Vec<T>> {
    v.iter().enumerate().map(|(i, n)| num(n, &format!("{path}[{i}]"))).collect()
}

fn family_path(e: Error, path: &str) -> Error {
    match e {
        Error::InvalidFamily(m) => invalid(path, m),
        Error::DimensionMismatch { expected, found } => {
            invalid(path, format!("vectors must share one length (expected {expected}, found {found})"))
        }
        other => other,
    }
}

impl CurveSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| invalid("$", e.to_string()))?;
        Self::from_value(value, "$")
    }

    /// Dispatches on `type` by hand so that errors keep their full path.
    fn from_value(mut value: Value, path: &str) -> Result<Self> {
        let obj = value.as_object_mut().ok_or_else(|| invalid(path, "expected an object"))?;
        let tag = match obj.remove("type") {
            Some(Value::String(t)) => t,
            Some(_) => return Err(invalid(&format!("{path}.type"), "expected a string")),
            None => return Err(invalid(path, "missing field `type`")),
        };
        let mut child = |key: &str| -> Result<Box<CurveSpec>> {
            let v = obj.remove(key).ok_or_else(|| invalid(path, format!("missing field `{key}`")))?;
            Ok(Box::new(Self::from_value(v, &format!("{path}.{key}"))?))
        };
        let spec = match tag.as_str() {
            "samples" => CurveSpec::Samples(fields(value, path)?),
            "great_circle" => CurveSpec::GreatCircle(fields(value, path)?),
            "single_frequency" => CurveSpec::SingleFrequency(fields(value, path)?),
            "double_frequency" => CurveSpec::DoubleFrequency(fields(value, path)?),
            "constant_kappa" => CurveSpec::ConstantKappa(fields(value, path)?),
            "random_closed" => CurveSpec::RandomClosed(fields(value, path)?),
            "product" => {
                let a = child("a")?;
                let b = child("b")?;
                no_extra(obj, path)?;
                CurveSpec::Product(ProductSpec { a, b })
            }
            "graph" => {
                let psi = child("psi")?;
                no_extra(obj, path)?;
                CurveSpec::Graph(GraphSpec { psi })
            }
            other => {
                return Err(invalid(
                    &format!("{path}.type"),
                    format!(
                        "unknown curve type {other:?}; expected one of samples, great_circle, single_frequency, \
                         double_frequency, constant_kappa, random_closed, product, graph"
                    ),
                ))
            }
        };
        Ok(spec)
    }

    pub fn build<T: Real>(&self, ctx: &BuildContext) -> Result<Built<T>> {
        self.build_at(ctx, "$")
    }

    fn nodes(ctx: &BuildContext, grid: Option<usize>) -> usize {
        ctx.grid.or(grid).unwrap_or(DEFAULT_GRID)
    }

    fn sample<T: Real>(c: &ParametricCurve<T>, s: &Sampling, ctx: &BuildContext, path: &str) -> Result<SampledCurve<T>> {
        let n = Self::nodes(ctx, s.grid);
        match &s.interval {
            Some([a, b]) => {
                let d = Domain::interval(num(a, &format!("{path}.interval[0]"))?, num(b, &format!("{path}.interval[1]"))?)
                    .map_err(|e| invalid(&format!("{path}.interval"), e.to_string()))?;
                c.sample_on(d, n)
            }
            None => c.sample(n, s.periods.unwrap_or(1)),
        }
    }

    fn build_at<T: Real>(&self, ctx: &BuildContext, path: &str) -> Result<Built<T>> {
        let curve = match self {
            CurveSpec::Samples(SamplesSpec { target, domain, points }) => {
                let spaces = target
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.space().map_err(|e| invalid(&format!("{path}.target[{i}]"), e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if spaces.is_empty() {
                    return Err(invalid(&format!("{path}.target"), "at least one factor is required"));
                }
                let domain = match domain {
                    DomainSpec::Periodic(l) => Domain::periodic(num(l, &format!("{path}.domain.periodic"))?),
                    DomainSpec::Interval([a, b]) => Domain::interval(
                        num(a, &format!("{path}.domain.interval[0]"))?,
                        num(b, &format!("{path}.domain.interval[1]"))?,
                    ),
                }
                .map_err(|e| invalid(&format!("{path}.domain"), e.to_string()))?;
                let rows = points
                    .iter()
                    .enumerate()
                    .map(|(i, r)| vector::<T>(r, &format!("{path}.points[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let field = Field::from_rows(&rows).map_err(|e| invalid(&format!("{path}.points"), e.to_string()))?;
                SampledCurve::from_field(Target::product(spaces), domain, field)
                    .map_err(|e| invalid(&format!("{path}.points"), e.to_string()))?
            }
            CurveSpec::GreatCircle(GreatCircleSpec { ambient_dim, sampling }) => {
                let c = ParametricCurve::great_circle(*ambient_dim).map_err(|e| family_path(e, path))?;
                Self::sample(&c, sampling, ctx, path)?
            }
            CurveSpec::SingleFrequency(SingleFrequencySpec { freq, c1, c2, c4, sampling }) => {
                let c = ParametricCurve::single_frequency(
                    num(freq, &format!("{path}.freq"))?,
                    vector(c1, &format!("{path}.c1"))?,
                    vector(c2, &format!("{path}.c2"))?,
                    vector(c4, &format!("{path}.c4"))?,
                )
                .map_err(|e| family_path(e, path))?;
                Self::sample(&c, sampling, ctx, path)?
            }
            CurveSpec::DoubleFrequency(DoubleFrequencySpec { a, b, c, sampling }) => {
                let cs = [
                    vector(&c[0], &format!("{path}.c[0]"))?,
                    vector(&c[1], &format!("{path}.c[1]"))?,
                    vector(&c[2], &format!("{path}.c[2]"))?,
                    vector(&c[3], &format!("{path}.c[3]"))?,
                ];
                let curve = ParametricCurve::double_frequency(num(a, &format!("{path}.a"))?, num(b, &format!("{path}.b"))?, cs)
                    .map_err(|e| family_path(e, path))?;
                Self::sample(&curve, sampling, ctx, path)?
            }
            CurveSpec::ConstantKappa(ConstantKappaSpec { kappa, hemisphere, sampling }) => {
                let c = ParametricCurve::constant_kappa_circle(num(kappa, &format!("{path}.kappa"))?, *hemisphere)
                    .map_err(|e| family_path(e, path))?;
                Self::sample(&c, sampling, ctx, path)?
            }
            CurveSpec::RandomClosed(RandomClosedSpec { target, modes, amplitude, period, seed, grid }) => {
                let space = target.space().map_err(|e| invalid(&format!("{path}.target"), e.to_string()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(ctx.seed));
                random_closed_curve(
                    space,
                    Self::nodes(ctx, *grid),
                    num(period, &format!("{path}.period"))?,
                    *modes,
                    *amplitude,
                    &mut rng,
                )?
            }
            CurveSpec::Product(ProductSpec { a, b }) => {
                let a = a.build_at::<T>(ctx, &format!("{path}.a"))?.curve()?;
                let b = b.build_at::<T>(ctx, &format!("{path}.b"))?.curve()?;
                return Ok(Built::Product(ProductCurve::new(a, b)?));
            }
            CurveSpec::Graph(GraphSpec { psi }) => {
                let psi = psi.build_at::<T>(ctx, &format!("{path}.psi"))?.curve()?;
                return Ok(Built::Product(graph_curve(&psi)?));
            }
        };
        Ok(Built::Curve(curve))
    }

    /// A `samples` spec reproducing `curve` exactly.
    pub fn from_curve<T: Real>(curve: &SampledCurve<T>) -> Self {
        let target = curve
            .target()
            .factors()
            .iter()
            .map(|f| SpaceSpec { curvature: f.curvature().sign() as i64, dim: f.intrinsic_dim() })
            .collect();
        let domain = match curve.domain() {
            Domain::Periodic { period } => DomainSpec::Periodic(Num::encode(period)),
            Domain::Interval { start, end } => DomainSpec::Interval([Num::encode(start), Num::encode(end)]),
        };
        let points = (0..curve.nodes()).map(|i| curve.point(i).iter().map(|&v| Num::encode(v)).collect()).collect();
        CurveSpec::Samples(SamplesSpec { target, domain, points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    const EG1: &str = r#"{"type": "single_frequency", "freq": "sqrt(2)",
        "c1": ["sqrt(1/2)", 0, 0], "c2": [0, "sqrt(1/2)", 0], "c4": [0, 0, "sqrt(1/2)"], "grid": 64}"#;

    fn ctx() -> BuildContext {
        BuildContext { grid: None, seed: 0 }
    }

    #[test]
    fn numbers() {
        assert_eq!(Num::Text("1/4".into()).value::<f64>().unwrap(), 0.25);
        assert_eq!(Num::Text("-sqrt(4)".into()).value::<f64>().unwrap(), -2.0);
        assert_eq!(Num::Pair([1.0, 1e-20]).value::<Dd>().unwrap().lo, 1e-20);
        assert!(Num::Text("sqrt(-1)".into()).value::<f64>().is_err());
        let half = Num::Text("sqrt(1/2)".into()).value::<Dd>().unwrap();
        assert!(((half * half) - Dd::from_f64(0.5)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn builds_the_biharmonic_circle() {
        let c = CurveSpec::parse(EG1).unwrap().build::<Dd>(&ctx()).unwrap().curve().unwrap();
        let reference = ParametricCurve::<Dd>::biharmonic_circle(3).unwrap().sample(64, 1).unwrap();
        assert_eq!(c, reference);
        let n = CurveSpec::parse(EG1).unwrap().build::<f64>(&BuildContext { grid: Some(32), seed: 0 }).unwrap();
        assert_eq!(n.curve().unwrap().nodes(), 32);
    }

    #[test]
    fn samples_round_trip_exactly() {
        let c = CurveSpec::parse(EG1).unwrap().build::<Dd>(&ctx()).unwrap().curve().unwrap();
        let text = serde_json::to_string(&CurveSpec::from_curve(&c)).unwrap();
        let back = CurveSpec::parse(&text).unwrap().build::<Dd>(&ctx()).unwrap().curve().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_path() {
        let bad = r#"{"type": "single_frequency", "freq": 1, "c1": [1, 0, 0], "c2": [0, "x", 0], "c4": [0, 0, 1]}"#;
        match CurveSpec::parse(bad).unwrap().build::<f64>(&ctx()) {
            Err(Error::InvalidSpec { path, .. }) => assert_eq!(path, "$.c2[1]"),
            other => panic!("{other:?}"),
        }
        let schema = r#"{"type": "graph", "psi": {"type": "great_circle", "ambient_dim": "x"}}"#;
        match CurveSpec::parse(schema) {
            Err(Error::InvalidSpec { path, .. }) => assert_eq!(path, "$.psi.ambient_dim"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(CurveSpec::parse(r#"{"type": "spiral"}"#), Err(Error::InvalidSpec { path, .. }) if path == "$.type"));
        let family = r#"{"type": "single_frequency", "freq": 1, "c1": [1, 0, 0], "c2": [0, 1, 0], "c4": [0, 0, 1]}"#;
        match CurveSpec::parse(family).unwrap().build::<f64>(&ctx()) {
            Err(Error::InvalidSpec { message, .. }) => assert!(message.contains("1/2"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn graph_and_product() {
        let g = format!(r#"{{"type": "graph", "psi": {EG1}}}"#);
        match CurveSpec::parse(&g).unwrap().build::<f64>(&ctx()).unwrap() {
            Built::Product(p) => assert_eq!(p.target().ambient_dim(), 4),
            Built::Curve(_) => panic!("graph builds a product"),
        }
        let p = r#"{"type": "product", "a": {"type": "great_circle", "grid": 32}, "b": {"type": "great_circle", "grid": 64}}"#;
        assert!(matches!(CurveSpec::parse(p).unwrap().build::<f64>(&ctx()), Err(Error::DomainMismatch(_))));
    }
}
