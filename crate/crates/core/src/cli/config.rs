//! Job configuration: a flat JSON object, validated before any computation.

use serde::de::{Deserializer, Error as _};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{AffineForm, Polytope};
use crate::invariants::PLConvex;
use crate::pbundle::{AdmissibleData, AdmissibleFactor};
use crate::rational::{fmt_rational, parse_rational, Rational};
use crate::weights::{self, CalabiFactor, WeightExpr, WeightFamily};

/// A rational read from `"num/den"`, a decimal string, or a JSON integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => parse_rational(&s).map(Q).map_err(D::Error::custom),
            Value::Number(n) if n.is_i64() || n.is_u64() => {
                parse_rational(&n.to_string()).map(Q).map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!(
                "expected a rational as \"num/den\" or an integer, got {other}"
            ))),
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(&self.0))
    }
}

fn rationals(qs: &[Q]) -> Vec<Rational> {
    qs.iter().map(|q| q.0.clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    #[default]
    Float,
    Exact,
    Both,
}

impl Pipeline {
    pub fn float(self) -> bool {
        self != Pipeline::Exact
    }

    pub fn exact(self) -> bool {
        self != Pipeline::Float
    }

    pub fn tag(self) -> &'static str {
        match self {
            Pipeline::Float => "float",
            Pipeline::Exact => "exact",
            Pipeline::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSpec {
    pub normal: Vec<i64>,
    pub offset: Q,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

/// Exactly one of `labels`, `interval`, `box`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    /// Optional; checked against the normals when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<LabelSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[Q; 2]>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub cube: Option<BoxSpec>,
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<Polytope> {
        let given = [self.labels.is_some(), self.interval.is_some(), self.cube.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Error::schema("polytope", "give exactly one of `labels`, `interval`, `box`"));
        }
        let p = self.build_unchecked()?;
        match self.dim {
            Some(d) if d != p.dim() => Err(Error::DimensionMismatch { expected: d, got: p.dim() }),
            _ => Ok(p),
        }
    }

    fn build_unchecked(&self) -> Result<Polytope> {
        if let Some(labels) = &self.labels {
            let forms = labels
                .iter()
                .map(|l| AffineForm::new(l.normal.clone(), l.offset.0.clone()))
                .collect::<Result<Vec<_>>>()?;
            return Polytope::from_halfspaces(forms);
        }
        if let Some([lo, hi]) = &self.interval {
            return Polytope::interval(lo.0.clone(), hi.0.clone());
        }
        let b = self.cube.as_ref().unwrap();
        if b.lo.len() != b.hi.len() {
            return Err(Error::schema("polytope.box", "`lo` and `hi` differ in length"));
        }
        Polytope::cube(&rationals(&b.lo), &rationals(&b.hi))
    }
}

/// Factor of the generalized Calabi weights, `xi` a vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalabiFactorSpec {
    pub d: u32,
    pub scal: Q,
    pub xi: Vec<Q>,
    pub c: Q,
}

impl CalabiFactorSpec {
    fn build(&self) -> CalabiFactor {
        CalabiFactor {
            d: self.d,
            scal: self.scal.0.clone(),
            xi: rationals(&self.xi),
            c: self.c.0.clone(),
        }
    }
}

/// Factor of an admissible bundle, `xi` a scalar.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub d: u32,
    pub scal: Q,
    pub xi: Q,
    pub c: Q,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub grad: Vec<Q>,
    pub offset: Q,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub direction: Vec<Q>,
    pub offset: Q,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<CandidateSpec>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSpec {
    Analytic,
    FiniteDifference,
    Both,
}

/// Weight object form: `{expr}` or `{family, ...}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightObject {
    expr: Option<String>,
    family: Option<String>,
    value: Option<Q>,
    xi: Option<Vec<Q>>,
    a: Option<Q>,
    k: Option<Q>,
    factors: Option<Vec<CalabiFactorSpec>>,
    c: Option<Q>,
}

/// Named `(v, w)` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<Q>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<CalabiFactorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Q>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorSpec>>,
    /// Weight as an expression string, `{expr}` or `{family, ...}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<PresetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<PieceSpec>>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub klist: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<Q>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<Q>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodSpec>,
    /// Smooth correction added to the Guillemin potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Value>,
    /// Test function for the integration-by-parts check in `abreu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_function: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<Pipeline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "$".to_string() } else { path };
            Error::schema(path, e.into_inner().to_string())
        })
    }

    pub fn polytope(&self) -> Result<Polytope> {
        self.polytope
            .as_ref()
            .ok_or_else(|| Error::schema("polytope", "missing"))?
            .build()
    }

    /// `(v, w)` checked against `domain`; both default to 1.
    pub fn weights(&self, domain: &Polytope) -> Result<(WeightExpr, WeightExpr)> {
        let dim = domain.dim();
        let (v, w) = match &self.weights {
            Some(preset) => {
                if self.v.is_some() || self.w.is_some() {
                    return Err(Error::schema("weights", "cannot be combined with `v` or `w`"));
                }
                preset_pair(preset, domain)?
            }
            None => {
                let one = || WeightExpr::constant(dim, Rational::from_integer(1.into()));
                let v = match &self.v {
                    Some(x) => weight_from_value(x, "v", domain)?,
                    None => one(),
                };
                let w = match &self.w {
                    Some(x) => weight_from_value(x, "w", domain)?,
                    None => one(),
                };
                (v, w)
            }
        };
        v.check_domain(domain)?;
        w.check_domain(domain)?;
        Ok((v, w))
    }

    pub fn plconvex(&self, dim: usize) -> Result<PLConvex> {
        let pieces = self.f.as_ref().ok_or_else(|| Error::schema("f", "missing"))?;
        for (j, p) in pieces.iter().enumerate() {
            if p.grad.len() != dim {
                return Err(Error::schema(
                    format!("f[{j}].grad"),
                    format!("expected {dim} entries, got {}", p.grad.len()),
                ));
            }
        }
        PLConvex::new(pieces.iter().map(|p| (rationals(&p.grad), p.offset.0.clone())).collect())
    }

    pub fn cap(&self) -> Result<Rational> {
        Ok(self.r.as_ref().ok_or_else(|| Error::schema("R", "missing"))?.0.clone())
    }

    pub fn admissible(&self) -> Result<AdmissibleData> {
        if self.polytope.is_some() {
            return Err(Error::schema("polytope", "not used by pbundle commands; give `factors`"));
        }
        let interval = Polytope::interval(Rational::from_integer((-1).into()), Rational::from_integer(1.into()))?;
        let (v, w) = self.weights(&interval)?;
        let factors = self
            .factors
            .iter()
            .flatten()
            .map(|f| AdmissibleFactor {
                d: f.d,
                scal: f.scal.0.clone(),
                xi: f.xi.0.clone(),
                c: f.c.0.clone(),
            })
            .collect();
        AdmissibleData::new(factors, v, w)
    }

    pub fn test_function(&self, domain: &Polytope) -> Result<Option<WeightExpr>> {
        self.test_function
            .as_ref()
            .map(|x| weight_from_value(x, "test_function", domain))
            .transpose()
    }

    pub fn potential(&self, domain: &Polytope) -> Result<Option<WeightExpr>> {
        self.potential
            .as_ref()
            .map(|x| weight_from_value(x, "potential", domain))
            .transpose()
    }
}

fn need<'a, T>(x: &'a Option<T>, path: &str, family: &str) -> Result<&'a T> {
    x.as_ref()
        .ok_or_else(|| Error::schema(path, format!("required by family `{family}`")))
}

fn weight_from_value(value: &Value, path: &str, domain: &Polytope) -> Result<WeightExpr> {
    let dim = domain.dim();
    let obj: WeightObject = match value {
        Value::String(s) => return WeightExpr::parse(s, dim),
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            return Ok(WeightExpr::constant(dim, parse_rational(&n.to_string())?));
        }
        Value::Object(_) => serde_path_to_error::deserialize(value.clone()).map_err(|e| {
            let inner = e.path().to_string();
            let full = if inner == "." { path.to_string() } else { format!("{path}.{inner}") };
            Error::schema(full, e.into_inner().to_string())
        })?,
        _ => return Err(Error::schema(path, "expected an expression string or an object")),
    };
    match (&obj.expr, &obj.family) {
        (Some(text), None) => WeightExpr::parse(text, dim),
        (None, Some(name)) => {
            let field = |f: &str| format!("{path}.{f}");
            let fam = match name.as_str() {
                "constant" => WeightFamily::Constant(need(&obj.value, &field("value"), name)?.0.clone()),
                "affine" => WeightFamily::Affine {
                    xi: rationals(need(&obj.xi, &field("xi"), name)?),
                    a: need(&obj.a, &field("a"), name)?.0.clone(),
                },
                "affine_power" => WeightFamily::AffinePower {
                    xi: rationals(need(&obj.xi, &field("xi"), name)?),
                    a: need(&obj.a, &field("a"), name)?.0.clone(),
                    k: need(&obj.k, &field("k"), name)?.0.clone(),
                },
                "exponential" => WeightFamily::Exponential {
                    xi: rationals(need(&obj.xi, &field("xi"), name)?),
                },
                "calabi_v" => WeightFamily::GeneralizedCalabiV {
                    factors: need(&obj.factors, &field("factors"), name)?
                        .iter()
                        .map(CalabiFactorSpec::build)
                        .collect(),
                },
                "calabi_w" => WeightFamily::GeneralizedCalabiW {
                    factors: need(&obj.factors, &field("factors"), name)?
                        .iter()
                        .map(CalabiFactorSpec::build)
                        .collect(),
                    xi: rationals(need(&obj.xi, &field("xi"), name)?),
                    c: need(&obj.c, &field("c"), name)?.0.clone(),
                },
                other => return Err(Error::schema(field("family"), format!("unknown family `{other}`"))),
            };
            fam.build(domain)
        }
        _ => Err(Error::schema(path, "give exactly one of `expr`, `family`")),
    }
}

fn preset_pair(p: &PresetSpec, domain: &Polytope) -> Result<(WeightExpr, WeightExpr)> {
    let name = p.family.as_str();
    let dim = domain.dim();
    let xi = || -> Result<Vec<Rational>> {
        let xi = rationals(need(&p.xi, "weights.xi", name)?);
        if xi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: xi.len(),
            });
        }
        Ok(xi)
    };
    let pair = match name {
        "csck" => weights::csck(dim),
        "soliton" => weights::soliton(&xi()?)?,
        "einstein_maxwell" => {
            weights::einstein_maxwell(&xi()?, &need(&p.a, "weights.a", name)?.0, *need(&p.m, "weights.m", name)?)?
        }
        "sasaki" => weights::sasaki(&xi()?, &need(&p.a, "weights.a", name)?.0, *need(&p.m, "weights.m", name)?)?,
        "generalized_calabi" => {
            let factors: Vec<CalabiFactor> = need(&p.factors, "weights.factors", name)?
                .iter()
                .map(CalabiFactorSpec::build)
                .collect();
            weights::generalized_calabi_weights(domain, &factors, (&xi()?, &need(&p.c, "weights.c", name)?.0))?
        }
        other => return Err(Error::schema("weights.family", format!("unknown family `{other}`"))),
    };
    Ok(pair)
}
