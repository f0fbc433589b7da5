use num_traits::Signed;

use super::expr::Expr;
use super::WeightExpr;
use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::rational::{rat, Rational};

/// One base factor `(<xi, p> + c)^d` of a generalized Calabi construction,
/// together with the scalar curvature of the corresponding base.
#[derive(Debug, Clone, PartialEq)]
pub struct CalabiFactor {
    pub d: u32,
    pub scal: Rational,
    pub xi: Vec<Rational>,
    pub c: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    Constant(Rational),
    Affine {
        xi: Vec<Rational>,
        a: Rational,
    },
    AffinePower {
        xi: Vec<Rational>,
        a: Rational,
        k: Rational,
    },
    Exponential {
        xi: Vec<Rational>,
    },
    Product(Vec<WeightFamily>),
    GeneralizedCalabiV {
        factors: Vec<CalabiFactor>,
    },
    GeneralizedCalabiW {
        factors: Vec<CalabiFactor>,
        xi: Vec<Rational>,
        c: Rational,
    },
}

fn check_len(xi: &[Rational], dim: usize) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: xi.len(),
        });
    }
    Ok(())
}

fn calabi_v(factors: &[CalabiFactor], skip: Option<usize>) -> Expr {
    factors.iter().enumerate().fold(Expr::int(1), |acc, (j, f)| {
        let d = if skip == Some(j) { f.d as i64 - 1 } else { f.d as i64 };
        Expr::mul(acc, Expr::pow(Expr::affine(&f.xi, &f.c), rat(d)))
    })
}

impl WeightFamily {
    pub fn to_expr(&self, dim: usize) -> Result<Expr> {
        Ok(match self {
            WeightFamily::Constant(c) => Expr::Const(c.clone()),
            WeightFamily::Affine { xi, a } => {
                check_len(xi, dim)?;
                Expr::affine(xi, a)
            }
            WeightFamily::AffinePower { xi, a, k } => {
                check_len(xi, dim)?;
                Expr::pow(Expr::affine(xi, a), k.clone())
            }
            WeightFamily::Exponential { xi } => {
                check_len(xi, dim)?;
                Expr::exp(Expr::affine(xi, &rat(0)))
            }
            WeightFamily::Product(parts) => {
                let mut acc = Expr::int(1);
                for part in parts {
                    acc = Expr::mul(acc, part.to_expr(dim)?);
                }
                acc
            }
            WeightFamily::GeneralizedCalabiV { factors } => {
                for f in factors {
                    check_len(&f.xi, dim)?;
                }
                calabi_v(factors, None)
            }
            WeightFamily::GeneralizedCalabiW { factors, xi, c } => {
                check_len(xi, dim)?;
                for f in factors {
                    check_len(&f.xi, dim)?;
                }
                // v / (<xi_j, p> + c_j) is written with exponent d_j - 1 so no
                // division appears in the tree.
                let mut w = Expr::mul(Expr::affine(xi, c), calabi_v(factors, None));
                for (j, f) in factors.iter().enumerate() {
                    w = Expr::sub(w, Expr::mul(Expr::Const(f.scal.clone()), calabi_v(factors, Some(j))));
                }
                w
            }
        })
    }

    /// Affine forms that must be positive on the polytope, with a label for
    /// error messages.
    fn positive_forms(&self) -> Vec<(String, Vec<Rational>, Rational)> {
        match self {
            WeightFamily::AffinePower { xi, a, .. } => vec![("affine base".into(), xi.clone(), a.clone())],
            WeightFamily::Product(parts) => parts.iter().flat_map(|p| p.positive_forms()).collect(),
            WeightFamily::GeneralizedCalabiV { factors } | WeightFamily::GeneralizedCalabiW { factors, .. } => factors
                .iter()
                .enumerate()
                .map(|(j, f)| (format!("factor {}", j + 1), f.xi.clone(), f.c.clone()))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Checks the affine factors at every vertex of `polytope`.
    pub fn check_on(&self, polytope: &Polytope) -> Result<()> {
        for (name, xi, c) in self.positive_forms() {
            check_len(&xi, polytope.dim())?;
            for vtx in polytope.vertices() {
                let val: Rational = xi.iter().zip(vtx).map(|(a, b)| a * b).sum::<Rational>() + &c;
                if !val.is_positive() {
                    return Err(Error::PositivityViolation(format!(
                        "{name} is nonpositive at vertex {:?}",
                        vtx.iter().map(crate::rational::fmt_rational).collect::<Vec<_>>()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, polytope: &Polytope) -> Result<WeightExpr> {
        self.check_on(polytope)?;
        WeightExpr::from_expr(self.to_expr(polytope.dim())?, polytope.dim())
    }
}

/// `v = w = 1`.
pub fn csck(dim: usize) -> (WeightExpr, WeightExpr) {
    (WeightExpr::constant(dim, rat(1)), WeightExpr::constant(dim, rat(1)))
}

/// `v = w = e^{<xi, p>}`.
pub fn soliton(xi: &[Rational]) -> Result<(WeightExpr, WeightExpr)> {
    let f = WeightFamily::Exponential { xi: xi.to_vec() };
    let e = WeightExpr::from_expr(f.to_expr(xi.len())?, xi.len())?;
    Ok((e.clone(), e))
}

/// `v = (<xi,p> + a)^{1-2m}`, `w = (<xi,p> + a)^{-1-2m}`.
pub fn einstein_maxwell(xi: &[Rational], a: &Rational, m: i64) -> Result<(WeightExpr, WeightExpr)> {
    affine_power_pair(xi, a, rat(1 - 2 * m), rat(-1 - 2 * m))
}

/// `v = (<xi,p> + a)^{-m-1}`, `w = (<xi,p> + a)^{-m-3}`.
pub fn sasaki(xi: &[Rational], a: &Rational, m: i64) -> Result<(WeightExpr, WeightExpr)> {
    affine_power_pair(xi, a, rat(-m - 1), rat(-m - 3))
}

fn affine_power_pair(xi: &[Rational], a: &Rational, kv: Rational, kw: Rational) -> Result<(WeightExpr, WeightExpr)> {
    let dim = xi.len();
    let mk = |k: Rational| -> Result<WeightExpr> {
        let f = WeightFamily::AffinePower {
            xi: xi.to_vec(),
            a: a.clone(),
            k,
        };
        WeightExpr::from_expr(f.to_expr(dim)?, dim)
    };
    Ok((mk(kv)?, mk(kw)?))
}

/// `v = prod (<xi_j,p> + c_j)^{d_j}` and
/// `w = (<xi_0,p> + c_0) v - sum_j Scal_j v / (<xi_j,p> + c_j)`.
pub fn generalized_calabi_weights(
    polytope: &Polytope,
    base: &[CalabiFactor],
    head: (&[Rational], &Rational),
) -> Result<(WeightExpr, WeightExpr)> {
    let v = WeightFamily::GeneralizedCalabiV { factors: base.to_vec() };
    let w = WeightFamily::GeneralizedCalabiW {
        factors: base.to_vec(),
        xi: head.0.to_vec(),
        c: head.1.clone(),
    };
    Ok((v.build(polytope)?, w.build(polytope)?))
}
