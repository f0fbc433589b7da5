//! Weight functions `v`, `w` on the momentum polytope.

mod expr;
mod family;
mod parse;

use std::fmt;

use num_traits::Signed;

pub use expr::Expr;
use expr::FExpr;
pub use family::{csck, einstein_maxwell, generalized_calabi_weights, sasaki, soliton, CalabiFactor, WeightFamily};

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::poly::RationalPoly;
use crate::rational::{to_f64, Rational};

/// A parsed weight with its symbolic first and second derivatives.
#[derive(Debug, Clone)]
pub struct WeightExpr {
    dim: usize,
    ast: Expr,
    value: FExpr,
    grad: Vec<FExpr>,
    hess: Vec<Vec<FExpr>>,
    poly: Option<RationalPoly>,
}

impl WeightExpr {
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        Self::from_expr(parse::parse(text, dim)?, dim)
    }

    pub fn from_expr(ast: Expr, dim: usize) -> Result<Self> {
        if ast.arity() > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: ast.arity(),
            });
        }
        let first: Vec<Expr> = (0..dim).map(|i| ast.derivative(i)).collect();
        let mut hess = vec![vec![FExpr::Const(0.0); dim]; dim];
        for i in 0..dim {
            for j in i..dim {
                let h = FExpr::compile(&first[i].derivative(j));
                hess[i][j] = h.clone();
                hess[j][i] = h;
            }
        }
        Ok(WeightExpr {
            dim,
            value: FExpr::compile(&ast),
            grad: first.iter().map(FExpr::compile).collect(),
            hess,
            poly: ast.to_polynomial(dim),
            ast,
        })
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::from_expr(Expr::Const(c), dim).expect("constant has arity zero")
    }

    pub fn from_polynomial(p: &RationalPoly) -> Self {
        let dim = p.nvars();
        let ast = p.terms().fold(Expr::int(0), |acc, (exps, c)| {
            let mono = exps.iter().enumerate().fold(Expr::Const(c.clone()), |m, (i, &e)| {
                Expr::mul(m, Expr::pow(Expr::Var(i), crate::rational::rat(e as i64)))
            });
            Expr::add(acc, mono)
        });
        Self::from_expr(ast, dim).expect("polynomial arity matches")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.ast
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        self.value.eval(p)
    }

    pub fn eval_grad(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_point(p)?;
        self.grad.iter().map(|g| g.eval(p)).collect()
    }

    pub fn eval_hess(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_point(p)?;
        self.hess
            .iter()
            .map(|row| row.iter().map(|h| h.eval(p)).collect())
            .collect()
    }

    pub fn as_polynomial(&self) -> Result<&RationalPoly> {
        self.poly.as_ref().ok_or(Error::NotPolynomial)
    }

    pub fn is_polynomial(&self) -> bool {
        self.poly.is_some()
    }

    /// Exact value at a rational point; only for polynomial weights.
    pub fn eval_exact(&self, p: &[Rational]) -> Result<Rational> {
        Ok(self.as_polynomial()?.eval(p))
    }

    pub fn product(&self, other: &WeightExpr) -> Result<WeightExpr> {
        Self::from_expr(Expr::mul(self.ast.clone(), other.ast.clone()), self.dim.max(other.dim))
    }

    pub fn pretty(&self) -> String {
        let names = variable_names(self.dim);
        self.ast.pretty(&names)
    }

    /// Non-integer powers and logarithms must sit on affine bases that are
    /// positive at every vertex; non-affine bases under a fractional power
    /// are rejected outright.
    pub fn check_domain(&self, polytope: &Polytope) -> Result<()> {
        let mut bases = Vec::new();
        self.ast.guarded_bases(&mut bases);
        for base in bases {
            let affine = base.to_polynomial(self.dim).filter(|q| q.total_degree() <= 1);
            match affine {
                Some(q) => {
                    for vtx in polytope.vertices() {
                        if !q.eval(vtx).is_positive() {
                            return Err(Error::Domain(format!(
                                "base `{}` is not positive at vertex {:?}",
                                base.pretty(&variable_names(self.dim)),
                                vtx.iter().map(to_f64).collect::<Vec<_>>()
                            )));
                        }
                    }
                }
                None if self.ast_has_fractional_power(&base) => {
                    return Err(Error::Domain(format!(
                        "non-integer power of non-affine base `{}`",
                        base.pretty(&variable_names(self.dim))
                    )));
                }
                None => {}
            }
        }
        Ok(())
    }

    fn ast_has_fractional_power(&self, base: &Expr) -> bool {
        fn walk(e: &Expr, base: &Expr) -> bool {
            match e {
                Expr::Pow(a, r) => (!r.is_integer() && **a == *base) || walk(a, base),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => walk(a, base) || walk(b, base),
                Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) => walk(a, base),
                _ => false,
            }
        }
        walk(&self.ast, base)
    }

    /// Domain check followed by a strict positivity scan over
    /// [`positivity_grid`].
    pub fn check_positive(&self, polytope: &Polytope, name: &str) -> Result<()> {
        self.check_domain(polytope)?;
        for p in positivity_grid(polytope) {
            let val = self.eval(&p)?;
            if !(val > 0.0) {
                return Err(Error::PositivityViolation(format!("{name} = {val} at {p:?}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

fn variable_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("p{i}")).collect()
}

/// Vertices plus a uniform grid over the bounding box restricted to the
/// polytope: 1001 points in dimension one, 101 per axis in dimension two,
/// 11 per axis above.
pub fn positivity_grid(polytope: &Polytope) -> Vec<Vec<f64>> {
    let dim = polytope.dim();
    let per_axis = match dim {
        1 => 1001,
        2 => 101,
        _ => 11,
    };
    let (lo, hi) = polytope.bounding_box();
    let lo: Vec<f64> = lo.iter().map(to_f64).collect();
    let hi: Vec<f64> = hi.iter().map(to_f64).collect();
    let mut pts = polytope.vertices_f64();
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|i| lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / (per_axis - 1) as f64)
            .collect();
        if polytope.min_label(&p) >= 0.0 {
            pts.push(p);
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return pts;
            }
            i -= 1;
            if idx[i] + 1 < per_axis {
                idx[i] += 1;
                idx[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * (1.0 + b.abs())
    }

    #[test]
    fn parses_and_evaluates_basic_forms() {
        assert_eq!(WeightExpr::parse("1", 1).unwrap().eval(&[0.3]).unwrap(), 1.0);
        assert_eq!(WeightExpr::parse("exp(1/2*p1)", 1).unwrap().eval(&[0.0]).unwrap(), 1.0);
        assert_eq!(WeightExpr::parse("(p1+2)^(-3)", 1).unwrap().eval(&[-1.0]).unwrap(), 1.0);
        assert_eq!(WeightExpr::parse("z^2 - 1", 1).unwrap().eval(&[2.0]).unwrap(), 3.0);
    }

    #[test]
    fn bare_exponent_binds_tighter_than_division() {
        let e = WeightExpr::parse("p1^2/10", 1).unwrap();
        assert!((e.eval(&[3.0]).unwrap() - 0.9).abs() < 1e-15);
        let r = WeightExpr::parse("p1^(1/2)", 1).unwrap();
        assert_eq!(r.eval(&[9.0]).unwrap(), 3.0);
        assert!(WeightExpr::parse("p1^/2", 1).is_err());
    }

    #[test]
    fn derivatives_are_symbolic() {
        let e = WeightExpr::parse("p1^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), 9.0);
        assert_eq!(e.eval_grad(&[3.0]).unwrap(), vec![6.0]);
        assert_eq!(e.eval_hess(&[3.0]).unwrap(), vec![vec![2.0]]);
        let e = WeightExpr::parse("exp(p1)", 1).unwrap();
        assert_eq!(e.eval_grad(&[0.0]).unwrap(), vec![1.0]);
        assert_eq!(e.eval_hess(&[0.0]).unwrap(), vec![vec![1.0]]);
        let e = WeightExpr::parse("(p1+2)^(-3)", 1).unwrap();
        assert!(close(e.eval_grad(&[0.0]).unwrap()[0], -3.0 / 16.0));
        let e = WeightExpr::parse("p1*p2^2 + log(p1)", 2).unwrap();
        let h = e.eval_hess(&[2.0, 3.0]).unwrap();
        assert!(close(h[0][0], -0.25));
        assert!(close(h[0][1], 6.0));
        assert!(close(h[1][0], 6.0));
        assert!(close(h[1][1], 4.0));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(WeightExpr::parse("p1 +", 1), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(WeightExpr::parse("q1", 1), Err(Error::UnknownVariable(_))));
        assert!(matches!(WeightExpr::parse("sin(p1)", 1), Err(Error::UnknownVariable(_))));
        assert!(matches!(WeightExpr::parse("p3", 2), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(WeightExpr::parse("z", 2), Err(Error::UnknownVariable(_))));
        assert!(matches!(WeightExpr::parse("p1^p1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(WeightExpr::parse("(p1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(WeightExpr::parse("p1 / 0", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn domain_errors() {
        let e = WeightExpr::parse("log(p1)", 1).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::Domain(_))));
        let e = WeightExpr::parse("1/p1", 1).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::Domain(_))));
        let e = WeightExpr::parse("p1^(1/2)", 1).unwrap();
        assert!(matches!(e.eval(&[-1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn polynomial_extraction() {
        let e = WeightExpr::parse("p1^2 + 1/2", 1).unwrap();
        let q = e.as_polynomial().unwrap();
        assert_eq!(q.coeff(&[2]), rat(1));
        assert_eq!(q.coeff(&[0]), ratio(1, 2));
        let e = WeightExpr::parse("(p1+2)^3", 1).unwrap();
        let q = e.as_polynomial().unwrap();
        let want = [8, 12, 6, 1];
        for (k, c) in want.iter().enumerate() {
            assert_eq!(q.coeff(&[k as u32]), rat(*c));
        }
        assert!(matches!(WeightExpr::parse("exp(p1)", 1).unwrap().as_polynomial(), Err(Error::NotPolynomial)));
        assert!(WeightExpr::parse("p1^(-1)", 1).unwrap().as_polynomial().is_err());
        assert!(WeightExpr::parse("p1/p1", 1).unwrap().as_polynomial().is_err());
        assert!(WeightExpr::parse("p1/4", 1).unwrap().as_polynomial().is_ok());
    }

    #[test]
    fn decimals_parse_exactly() {
        let e = WeightExpr::parse("0.1*p1", 1).unwrap();
        assert_eq!(e.as_polynomial().unwrap().coeff(&[1]), ratio(1, 10));
    }

    #[test]
    fn pretty_round_trip() {
        for text in [
            "1 - (p1 - 2)",
            "-p1^2",
            "(-p1)^2",
            "2/(3*p1 + 1)",
            "exp(-p1/2)*(p1 + 3)^(-5/2)",
            "p1 - -p1",
            "1/2*p1*p2 - log(p2 + 4)",
        ] {
            let dim = if text.contains("p2") { 2 } else { 1 };
            let e = WeightExpr::parse(text, dim).unwrap();
            let back = WeightExpr::parse(&e.pretty(), dim).unwrap();
            assert_eq!(e.expr(), back.expr(), "{text} -> {}", e.pretty());
        }
    }

    #[test]
    fn generalized_calabi_examples() {
        let p = Polytope::interval(rat(-1), rat(1)).unwrap();
        let (v, w) = generalized_calabi_weights(&p, &[], (&[rat(2)], &rat(1))).unwrap();
        assert_eq!(v.eval(&[0.5]).unwrap(), 1.0);
        assert_eq!(w.eval(&[0.5]).unwrap(), 2.0);
        let f = CalabiFactor {
            d: 1,
            scal: rat(4),
            xi: vec![rat(1)],
            c: rat(2),
        };
        let (v, w) = generalized_calabi_weights(&p, &[f.clone()], (&[rat(0)], &rat(0))).unwrap();
        assert_eq!(v.eval(&[0.25]).unwrap(), 2.25);
        assert_eq!(w.as_polynomial().unwrap().as_constant(), Some(rat(-4)));
        let g = CalabiFactor { d: 2, ..f.clone() };
        let (v, _) = generalized_calabi_weights(&p, &[g], (&[rat(0)], &rat(0))).unwrap();
        assert_eq!(v.as_polynomial().unwrap().coeff(&[0]), rat(4));
        let bad = CalabiFactor { c: rat(1), ..f };
        assert!(matches!(
            generalized_calabi_weights(&p, &[bad], (&[rat(0)], &rat(0))),
            Err(Error::PositivityViolation(_))
        ));
    }

    #[test]
    fn families_construct() {
        let (v, w) = einstein_maxwell(&[rat(1)], &rat(2), 2).unwrap();
        assert_eq!(v.eval(&[0.0]).unwrap(), 0.125);
        assert_eq!(w.eval(&[0.0]).unwrap(), 1.0 / 32.0);
        let (v, w) = sasaki(&[rat(1)], &rat(2), 1).unwrap();
        assert_eq!(v.eval(&[0.0]).unwrap(), 0.25);
        assert_eq!(w.eval(&[0.0]).unwrap(), 1.0 / 16.0);
        let (v, _) = soliton(&[rat(1), rat(-1)]).unwrap();
        assert!(close(v.eval(&[1.0, 0.0]).unwrap(), std::f64::consts::E));
    }

    #[test]
    fn fractional_power_needs_positive_affine_base() {
        let p = Polytope::interval(rat(-1), rat(1)).unwrap();
        assert!(WeightExpr::parse("(p1+2)^(1/2)", 1).unwrap().check_domain(&p).is_ok());
        assert!(WeightExpr::parse("(p1+1)^(1/2)", 1).unwrap().check_domain(&p).is_err());
        assert!(WeightExpr::parse("(p1^2+1)^(1/2)", 1).unwrap().check_domain(&p).is_err());
        assert!(WeightExpr::parse("(p1^2+1)^3", 1).unwrap().check_domain(&p).is_ok());
    }

    #[test]
    fn positivity_scan() {
        let p = Polytope::interval(rat(-1), rat(1)).unwrap();
        assert_eq!(positivity_grid(&p).len(), 1003);
        assert!(WeightExpr::parse("p1 + 2", 1).unwrap().check_positive(&p, "v").is_ok());
        assert!(matches!(
            WeightExpr::parse("p1^2 - 1/4", 1).unwrap().check_positive(&p, "v"),
            Err(Error::PositivityViolation(_))
        ));
        let sq = Polytope::cube(&[rat(0), rat(0)], &[rat(1), rat(1)]).unwrap();
        assert_eq!(positivity_grid(&sq).len(), 4 + 101 * 101);
    }
}
