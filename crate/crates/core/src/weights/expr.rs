use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::RationalPoly;
use crate::rational::{fmt_rational, rat, to_f64, Rational};

/// Expression tree over `p1..pl` with exact rational literals.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Rational),
    /// Zero-based coordinate index.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Rational),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

impl Expr {
    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(rat(n))
    }

    fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(x), _) if x.is_zero() => b,
            (_, Some(y)) if y.is_zero() => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (Some(x), _) if x.is_zero() => Expr::neg(b),
            (_, Some(y)) if y.is_zero() => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(x), _) | (_, Some(x)) if x.is_zero() => Expr::Const(Rational::zero()),
            (Some(x), _) if x.is_one() => b,
            (_, Some(y)) if y.is_one() => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if !y.is_zero() => Expr::Const(x / y),
            (Some(x), _) if x.is_zero() => Expr::Const(Rational::zero()),
            (_, Some(y)) if y.is_one() => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, r: Rational) -> Expr {
        if r.is_zero() {
            return Expr::Const(Rational::one());
        }
        if r.is_one() {
            return a;
        }
        if let (Some(c), true) = (a.as_const(), r.is_integer()) {
            if let Some(k) = r.to_integer().to_i32() {
                if !(c.is_zero() && k < 0) {
                    return Expr::Const(num_traits::pow::Pow::pow(c, k));
                }
            }
        }
        Expr::Pow(Box::new(a), r)
    }

    pub fn exp(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) if c.is_zero() => Expr::Const(Rational::one()),
            _ => Expr::Exp(Box::new(a)),
        }
    }

    pub fn log(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) if c.is_one() => Expr::Const(Rational::zero()),
            _ => Expr::Log(Box::new(a)),
        }
    }

    /// `<xi, p> + a`.
    pub fn affine(xi: &[Rational], a: &Rational) -> Expr {
        xi.iter().enumerate().fold(Expr::Const(a.clone()), |acc, (i, c)| {
            Expr::add(acc, Expr::mul(Expr::Const(c.clone()), Expr::Var(i)))
        })
    }

    /// Symbolic partial derivative in coordinate `i`.
    pub fn derivative(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::int(0),
            Expr::Var(j) => Expr::int(if *j == i { 1 } else { 0 }),
            Expr::Add(a, b) => Expr::add(a.derivative(i), b.derivative(i)),
            Expr::Sub(a, b) => Expr::sub(a.derivative(i), b.derivative(i)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(i), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative(i)),
            ),
            Expr::Div(a, b) => {
                // a'/b - a b'/b^2
                let first = Expr::div(a.derivative(i), (**b).clone());
                let db = b.derivative(i);
                if db.as_const().is_some_and(|c| c.is_zero()) {
                    return first;
                }
                Expr::sub(
                    first,
                    Expr::div(Expr::mul((**a).clone(), db), Expr::pow((**b).clone(), rat(2))),
                )
            }
            Expr::Neg(a) => Expr::neg(a.derivative(i)),
            Expr::Pow(a, r) => Expr::mul(
                Expr::mul(Expr::Const(r.clone()), Expr::pow((**a).clone(), r - rat(1))),
                a.derivative(i),
            ),
            Expr::Exp(a) => Expr::mul(self.clone(), a.derivative(i)),
            Expr::Log(a) => Expr::div(a.derivative(i), (**a).clone()),
        }
    }

    /// Exact expansion when the tree is polynomial: no `exp`/`log`, no
    /// negative or fractional powers of non-constants, no division by
    /// non-constants.
    pub fn to_polynomial(&self, nvars: usize) -> Option<RationalPoly> {
        Some(match self {
            Expr::Const(c) => RationalPoly::constant(nvars, c.clone()),
            Expr::Var(i) => RationalPoly::var(nvars, *i),
            Expr::Add(a, b) => &a.to_polynomial(nvars)? + &b.to_polynomial(nvars)?,
            Expr::Sub(a, b) => &a.to_polynomial(nvars)? - &b.to_polynomial(nvars)?,
            Expr::Mul(a, b) => &a.to_polynomial(nvars)? * &b.to_polynomial(nvars)?,
            Expr::Div(a, b) => {
                let d = b.to_polynomial(nvars)?.as_constant()?;
                if d.is_zero() {
                    return None;
                }
                a.to_polynomial(nvars)?.scale(&(Rational::one() / d))
            }
            Expr::Neg(a) => -&a.to_polynomial(nvars)?,
            Expr::Pow(a, r) => {
                if !r.is_integer() || r.is_negative() {
                    return None;
                }
                let k = r.to_integer().to_u32()?;
                a.to_polynomial(nvars)?.pow(k)
            }
            Expr::Exp(_) | Expr::Log(_) => return None,
        })
    }

    /// Every `(base, exponent)` with a non-integer exponent and every `log`
    /// argument, for domain validation.
    pub(crate) fn guarded_bases(&self, out: &mut Vec<Expr>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.guarded_bases(out);
                b.guarded_bases(out);
            }
            Expr::Neg(a) | Expr::Exp(a) => a.guarded_bases(out),
            Expr::Pow(a, r) => {
                if !r.is_integer() {
                    out.push((**a).clone());
                }
                a.guarded_bases(out);
            }
            Expr::Log(a) => {
                out.push((**a).clone());
                a.guarded_bases(out);
            }
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Log(a) => a.arity(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if c.is_negative() || !c.is_integer() => 2,
            _ => 5,
        }
    }

    /// Grammar-conforming text; re-parsing reproduces this tree.
    pub fn pretty(&self, names: &[String]) -> String {
        let wrap = |e: &Expr, min: u8| {
            let s = e.pretty(names);
            if e.precedence() < min {
                format!("({s})")
            } else {
                s
            }
        };
        match self {
            Expr::Const(c) => {
                let s = fmt_rational(&c.abs());
                if c.is_negative() {
                    format!("(-{s})")
                } else if c.is_integer() {
                    s
                } else {
                    format!("({s})")
                }
            }
            Expr::Var(i) => names[*i].clone(),
            Expr::Add(a, b) => format!("{} + {}", wrap(a, 1), wrap(b, 2)),
            Expr::Sub(a, b) => format!("{} - {}", wrap(a, 1), wrap(b, 2)),
            Expr::Mul(a, b) => format!("{}*{}", wrap(a, 2), wrap(b, 3)),
            Expr::Div(a, b) => format!("{}/{}", wrap(a, 2), wrap(b, 3)),
            Expr::Neg(a) => format!("-{}", wrap(a, 4)),
            Expr::Pow(a, r) => {
                let exp = if r.is_integer() && !r.is_negative() {
                    fmt_rational(r)
                } else {
                    format!("({})", fmt_rational(r))
                };
                format!("{}^{}", wrap(a, 5), exp)
            }
            Expr::Exp(a) => format!("exp({})", a.pretty(names)),
            Expr::Log(a) => format!("log({})", a.pretty(names)),
        }
    }
}

/// Float mirror of [`Expr`] with pre-converted constants.
#[derive(Debug, Clone)]
pub(crate) enum FExpr {
    Const(f64),
    Var(usize),
    Add(Box<FExpr>, Box<FExpr>),
    Sub(Box<FExpr>, Box<FExpr>),
    Mul(Box<FExpr>, Box<FExpr>),
    Div(Box<FExpr>, Box<FExpr>),
    Neg(Box<FExpr>),
    PowInt(Box<FExpr>, i32),
    PowReal(Box<FExpr>, f64),
    Exp(Box<FExpr>),
    Log(Box<FExpr>),
}

impl FExpr {
    pub(crate) fn compile(e: &Expr) -> FExpr {
        let b = |x: &Expr| Box::new(FExpr::compile(x));
        match e {
            Expr::Const(c) => FExpr::Const(to_f64(c)),
            Expr::Var(i) => FExpr::Var(*i),
            Expr::Add(x, y) => FExpr::Add(b(x), b(y)),
            Expr::Sub(x, y) => FExpr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => FExpr::Mul(b(x), b(y)),
            Expr::Div(x, y) => FExpr::Div(b(x), b(y)),
            Expr::Neg(x) => FExpr::Neg(b(x)),
            Expr::Pow(x, r) => match r.is_integer().then(|| r.to_integer().to_i32()).flatten() {
                Some(k) => FExpr::PowInt(b(x), k),
                None => FExpr::PowReal(b(x), to_f64(r)),
            },
            Expr::Exp(x) => FExpr::Exp(b(x)),
            Expr::Log(x) => FExpr::Log(b(x)),
        }
    }

    pub(crate) fn eval(&self, p: &[f64]) -> Result<f64> {
        Ok(match self {
            FExpr::Const(c) => *c,
            FExpr::Var(i) => p[*i],
            FExpr::Add(a, b) => a.eval(p)? + b.eval(p)?,
            FExpr::Sub(a, b) => a.eval(p)? - b.eval(p)?,
            FExpr::Mul(a, b) => a.eval(p)? * b.eval(p)?,
            FExpr::Div(a, b) => {
                let d = b.eval(p)?;
                if d == 0.0 {
                    return Err(Error::Domain(format!("division by zero at {p:?}")));
                }
                a.eval(p)? / d
            }
            FExpr::Neg(a) => -a.eval(p)?,
            FExpr::PowInt(a, k) => {
                let x = a.eval(p)?;
                if x == 0.0 && *k < 0 {
                    return Err(Error::Domain(format!("zero raised to a negative power at {p:?}")));
                }
                x.powi(*k)
            }
            FExpr::PowReal(a, r) => {
                let x = a.eval(p)?;
                if x < 0.0 || (x == 0.0 && *r < 0.0) {
                    return Err(Error::Domain(format!(
                        "base {x} raised to non-integer power {r} at {p:?}"
                    )));
                }
                x.powf(*r)
            }
            FExpr::Exp(a) => a.eval(p)?.exp(),
            FExpr::Log(a) => {
                let x = a.eval(p)?;
                if x <= 0.0 {
                    return Err(Error::Domain(format!("log of nonpositive value {x} at {p:?}")));
                }
                x.ln()
            }
        })
    }
}
