//! Weighted slope, the polytope Futaki functional, the extremal affine
//! function and a single-crease destabilizer scan.
//!
//! Every routine has a float version driven by [`QuadratureRule`] and, for
//! polynomial weights, an exact rational counterpart. Values are
//! polytope-normalized: the `(2 pi)^l` torus volume is not included.

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{AffineForm, Polytope};
use crate::poly::RationalPoly;
use crate::quad::{integrate_exact_boundary_where, integrate_exact_poly, QuadratureRule};
use crate::rational::{rat, solve_exact, to_f64, Rational};
use crate::weights::{Expr, WeightExpr};

/// `(2 pi)^l`, the factor relating polytope-normalized values to
/// manifold integrals.
pub fn torus_volume(dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powi(dim as i32)
}

/// `f(p) = max_j (<v_j, p> + lambda_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PLConvex {
    pieces: Vec<(Vec<Rational>, Rational)>,
    pieces_f64: Vec<(Vec<f64>, f64)>,
}

impl PLConvex {
    pub fn new(pieces: Vec<(Vec<Rational>, Rational)>) -> Result<Self> {
        let dim = pieces.first().ok_or(Error::EmptyPiecewise)?.0.len();
        if let Some((g, _)) = pieces.iter().find(|(g, _)| g.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: g.len(),
            });
        }
        let pieces_f64 = pieces
            .iter()
            .map(|(g, b)| (g.iter().map(to_f64).collect(), to_f64(b)))
            .collect();
        Ok(PLConvex { pieces, pieces_f64 })
    }

    pub fn affine(grad: Vec<Rational>, offset: Rational) -> Self {
        Self::new(vec![(grad, offset)]).expect("one piece")
    }

    pub fn pieces(&self) -> &[(Vec<Rational>, Rational)] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].0.len()
    }

    pub fn is_affine(&self) -> bool {
        self.pieces.len() == 1
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.pieces_f64
            .iter()
            .map(|(g, b)| affine_f64(g, *b, p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn eval_exact(&self, p: &[Rational]) -> Rational {
        self.pieces
            .iter()
            .map(|(g, b)| affine_exact(g, b, p))
            .max()
            .expect("nonempty")
    }

    /// Piece `j` as an exact affine polynomial.
    pub fn piece_poly(&self, j: usize) -> RationalPoly {
        RationalPoly::affine(&self.pieces[j].0, &self.pieces[j].1)
    }

    pub fn piece_f64(&self, j: usize) -> (&[f64], f64) {
        (&self.pieces_f64[j].0, self.pieces_f64[j].1)
    }

    /// Regions of linearity on `polytope`: `(piece, cell)` for every piece
    /// whose cell has nonempty interior. Cell labels start with the
    /// polytope's own labels, so label indices below
    /// `polytope.labels().len()` mark the boundary of `polytope`.
    pub fn cells(&self, polytope: &Polytope) -> Result<Vec<(usize, Polytope)>> {
        if self.dim() != polytope.dim() {
            return Err(Error::DimensionMismatch {
                expected: polytope.dim(),
                got: self.dim(),
            });
        }
        if self.is_affine() {
            return Ok(vec![(0, polytope.clone())]);
        }
        let mut out = Vec::new();
        'pieces: for (j, (gj, bj)) in self.pieces.iter().enumerate() {
            let mut labels = polytope.labels().to_vec();
            for (k, (gk, bk)) in self.pieces.iter().enumerate() {
                if k == j {
                    continue;
                }
                let normal: Vec<Rational> = gj.iter().zip(gk).map(|(a, b)| a - b).collect();
                let offset = bj - bk;
                if normal.iter().all(Zero::is_zero) {
                    // parallel pieces: the lower one (or later duplicate) never wins
                    if offset.is_negative() || (offset.is_zero() && k < j) {
                        continue 'pieces;
                    }
                    continue;
                }
                labels.push(AffineForm::from_rational(&normal, &offset)?);
            }
            match Polytope::from_halfspaces(labels) {
                Ok(cell) => out.push((j, cell)),
                Err(Error::EmptyInterior) => {}
                Err(e) => return Err(e),
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyPiecewise);
        }
        Ok(out)
    }

    /// Drops pieces that are nowhere active on `polytope`.
    pub fn prune(&self, polytope: &Polytope) -> Result<Self> {
        let active: Vec<_> = self
            .cells(polytope)?
            .into_iter()
            .map(|(j, _)| self.pieces[j].clone())
            .collect();
        Self::new(active)
    }
}

fn affine_f64(g: &[f64], b: f64, p: &[f64]) -> f64 {
    g.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + b
}

fn affine_exact(g: &[Rational], b: &Rational, p: &[Rational]) -> Rational {
    g.iter().zip(p).map(|(a, x)| a * x).sum::<Rational>() + b
}

/// `c = 2 int_{dP} v d sigma / int_P w dp`, or `1` when `int_P w dp = 0`.
pub fn slope(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr, order: usize) -> Result<f64> {
    v.check_positive(polytope, "v")?;
    slope_unchecked(polytope, v, w, order)
}

pub(crate) fn slope_unchecked(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr, order: usize) -> Result<f64> {
    let rule = QuadratureRule::new(polytope, order);
    let bv = rule.integrate_boundary(|x| v.eval(x))?;
    let iw = rule.integrate_interior(|x| w.eval(x))?;
    let scale = rule.integrate_interior(|x| Ok(w.eval(x)?.abs()))?;
    // a symmetric cancellation leaves only rounding noise
    if iw.abs() <= 1e-13 * scale {
        return Ok(1.0);
    }
    Ok(2.0 * bv / iw)
}

/// `F(f) = 2 int_{dP} f v d sigma - c int_P f w dp`, integrated cell by cell
/// over the regions of linearity of `f`.
pub fn futaki(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr, f: &PLConvex, c: f64, order: usize) -> Result<f64> {
    let n_labels = polytope.labels().len();
    let mut total = 0.0;
    for (j, cell) in f.cells(polytope)? {
        let (g, b) = f.piece_f64(j);
        let rule = QuadratureRule::new(&cell, order);
        let bd = rule.integrate_boundary_where(|x| Ok(affine_f64(g, b, x) * v.eval(x)?), |l| l < n_labels)?;
        let int = rule.integrate_interior(|x| Ok(affine_f64(g, b, x) * w.eval(x)?))?;
        total += 2.0 * bd - c * int;
    }
    Ok(total)
}

/// `w_ext(p) = <xi, p> + c` with the condition number of its Gram system.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalAffine {
    pub xi: Vec<f64>,
    pub c: f64,
    pub gram_condition: f64,
    /// Largest orthogonality defect `|int w_ext e_a w - 2 int_{dP} e_a v|`.
    pub residual: f64,
}

impl ExtremalAffine {
    pub fn eval(&self, p: &[f64]) -> f64 {
        affine_f64(&self.xi, self.c, p)
    }

    /// The affine function as a weight expression, with coefficients
    /// carried bit-exactly.
    pub fn to_weight(&self) -> Result<WeightExpr> {
        let conv = |x: f64| Rational::from_float(x).ok_or_else(|| Error::NonFiniteIntegrand(vec![x]));
        let xi = self.xi.iter().map(|&x| conv(x)).collect::<Result<Vec<_>>>()?;
        WeightExpr::from_expr(Expr::affine(&xi, &conv(self.c)?), self.xi.len())
    }
}

fn basis(p: &[f64], a: usize) -> f64 {
    if a == 0 {
        1.0
    } else {
        p[a - 1]
    }
}

/// Solves `G x = b`, `G_ab = int_P e_a e_b w`, `b_a = 2 int_{dP} e_a v`,
/// over the affine basis `e_0 = 1, e_a = p_a`.
pub fn solve_w_ext(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr, order: usize) -> Result<ExtremalAffine> {
    let n = polytope.dim() + 1;
    let rule = QuadratureRule::new(polytope, order);
    let mut g = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for a in 0..n {
        for b in a..n {
            let val = rule.integrate_interior(|x| Ok(basis(x, a) * basis(x, b) * w.eval(x)?))?;
            g[(a, b)] = val;
            g[(b, a)] = val;
        }
        rhs[a] = 2.0 * rule.integrate_boundary(|x| Ok(basis(x, a) * v.eval(x)?))?;
    }
    let sv = g.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > smax * 1e-14) {
        return Err(Error::SingularGram);
    }
    let x = g.clone().lu().solve(&rhs).ok_or(Error::SingularGram)?;
    let residual = (&g * &x - &rhs).amax();
    Ok(ExtremalAffine {
        xi: x.iter().skip(1).copied().collect(),
        c: x[0],
        gram_condition: smax / smin,
        residual,
    })
}

/// `F` for the weights `(v, w w_ext)` with slope fixed to 1.
pub fn relative_futaki(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr, f: &PLConvex, order: usize) -> Result<f64> {
    let ext = solve_w_ext(polytope, v, w, order)?;
    let ww = w.product(&ext.to_weight()?)?;
    futaki(polytope, v, &ww, f, 1.0, order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub direction: Vec<Rational>,
    pub offset: Rational,
    pub value: f64,
}

impl ScanEntry {
    pub fn function(&self) -> PLConvex {
        let dim = self.direction.len();
        PLConvex::new(vec![
            (self.direction.clone(), self.offset.clone()),
            (vec![rat(0); dim], rat(0)),
        ])
        .expect("two pieces")
    }
}

/// Candidates `(a, b)` with `a` ranging over nonzero vectors with entries in
/// `{-1, 0, 1}` and `steps - 1` equally spaced offsets strictly inside the
/// range where the crease `<a, p> + b = 0` meets the interior.
pub fn default_scan_grid(polytope: &Polytope, steps: usize) -> Vec<(Vec<Rational>, Rational)> {
    let dim = polytope.dim();
    let mut out = Vec::new();
    let total = 3usize.pow(dim as u32);
    for code in 0..total {
        let mut c = code;
        let a: Vec<Rational> = (0..dim)
            .map(|_| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                rat(d)
            })
            .collect();
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        let vals: Vec<Rational> = polytope.vertices().iter().map(|v| affine_exact(&a, &rat(0), v)).collect();
        let lo = vals.iter().min().unwrap().clone();
        let hi = vals.iter().max().unwrap().clone();
        for i in 1..steps {
            // b in (-hi, -lo)
            let t = Rational::new((i as i64).into(), (steps as i64).into());
            out.push((a.clone(), -(&hi) + (&hi - &lo) * t));
        }
    }
    out
}

fn crease_meets_interior(polytope: &Polytope, a: &[Rational], b: &Rational) -> bool {
    let vals: Vec<Rational> = polytope.vertices().iter().map(|v| affine_exact(a, b, v)).collect();
    vals.iter().any(Signed::is_negative) && vals.iter().any(Signed::is_positive)
}

/// Evaluates `F` on `max(<a, p> + b, 0)` for every candidate whose crease
/// crosses the interior; ascending by value, ties kept in input order.
pub fn scan_destabilizers(
    polytope: &Polytope,
    v: &WeightExpr,
    w: &WeightExpr,
    candidates: &[(Vec<Rational>, Rational)],
    order: usize,
) -> Result<Vec<ScanEntry>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let c = slope(polytope, v, w, order)?;
    let results: Vec<Result<Option<ScanEntry>>> = candidates
        .par_iter()
        .map(|(a, b)| {
            if a.len() != polytope.dim() {
                return Err(Error::DimensionMismatch {
                    expected: polytope.dim(),
                    got: a.len(),
                });
            }
            if !crease_meets_interior(polytope, a, b) {
                return Ok(None);
            }
            let mut entry = ScanEntry {
                direction: a.clone(),
                offset: b.clone(),
                value: 0.0,
            };
            entry.value = futaki(polytope, v, w, &entry.function(), c, order)?;
            Ok(Some(entry))
        })
        .collect();
    let mut entries = Vec::new();
    for r in results {
        if let Some(e) = r? {
            entries.push(e);
        }
    }
    entries.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(entries)
}

// exact pipeline

pub fn slope_exact(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr) -> Result<Rational> {
    let (vp, wp) = (v.as_polynomial()?, w.as_polynomial()?);
    let n = polytope.labels().len();
    let iw = integrate_exact_poly(polytope, wp);
    if iw.is_zero() {
        return Ok(rat(1));
    }
    Ok(rat(2) * integrate_exact_boundary_where(polytope, vp, |l| l < n) / iw)
}

pub fn futaki_exact(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr, f: &PLConvex, c: &Rational) -> Result<Rational> {
    futaki_exact_poly(polytope, v.as_polynomial()?, w.as_polynomial()?, f, c)
}

pub(crate) fn futaki_exact_poly(
    polytope: &Polytope,
    vp: &RationalPoly,
    wp: &RationalPoly,
    f: &PLConvex,
    c: &Rational,
) -> Result<Rational> {
    let n_labels = polytope.labels().len();
    let mut total = Rational::zero();
    for (j, cell) in f.cells(polytope)? {
        let fj = f.piece_poly(j);
        let bd = integrate_exact_boundary_where(&cell, &(&fj * vp), |l| l < n_labels);
        let int = integrate_exact_poly(&cell, &(&fj * wp));
        total += rat(2) * bd - c * int;
    }
    Ok(total)
}

/// Exact `(xi, c)` of `w_ext`.
pub fn solve_w_ext_exact(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr) -> Result<(Vec<Rational>, Rational)> {
    let (vp, wp) = (v.as_polynomial()?, w.as_polynomial()?);
    let dim = polytope.dim();
    let e = |a: usize| {
        if a == 0 {
            RationalPoly::one(dim)
        } else {
            RationalPoly::var(dim, a - 1)
        }
    };
    let n = dim + 1;
    let mut g = vec![vec![Rational::zero(); n]; n];
    let mut rhs = Vec::with_capacity(n);
    for a in 0..n {
        for b in a..n {
            let val = integrate_exact_poly(polytope, &(&(&e(a) * &e(b)) * wp));
            g[a][b] = val.clone();
            g[b][a] = val;
        }
        rhs.push(rat(2) * crate::quad::integrate_exact_boundary(polytope, &(&e(a) * vp)));
    }
    let x = solve_exact(&g, &rhs).ok_or(Error::SingularGram)?;
    Ok((x[1..].to_vec(), x[0].clone()))
}

pub fn relative_futaki_exact(polytope: &Polytope, v: &WeightExpr, w: &WeightExpr, f: &PLConvex) -> Result<Rational> {
    let (xi, c) = solve_w_ext_exact(polytope, v, w)?;
    let ww = w.as_polynomial()? * &RationalPoly::affine(&xi, &c);
    futaki_exact_poly(polytope, v.as_polynomial()?, &ww, f, &rat(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn interval() -> Polytope {
        Polytope::interval(rat(-1), rat(1)).unwrap()
    }

    fn one() -> WeightExpr {
        WeightExpr::constant(1, rat(1))
    }

    fn abs_p() -> PLConvex {
        PLConvex::new(vec![(vec![rat(1)], rat(0)), (vec![rat(-1)], rat(0))]).unwrap()
    }

    #[test]
    fn slope_examples() {
        let p = interval();
        assert!((slope(&p, &one(), &one(), 16).unwrap() - 2.0).abs() < 1e-14);
        let sq = Polytope::cube(&[rat(0), rat(0)], &[rat(1), rat(1)]).unwrap();
        let one2 = WeightExpr::constant(2, rat(1));
        assert!((slope(&sq, &one2, &one2, 16).unwrap() - 8.0).abs() < 1e-13);
        let w = WeightExpr::parse("p1", 1).unwrap();
        assert_eq!(slope(&p, &one(), &w, 16).unwrap(), 1.0);
        assert_eq!(slope_exact(&p, &one(), &w).unwrap(), rat(1));
        assert_eq!(slope_exact(&sq, &one2, &one2).unwrap(), rat(8));
    }

    #[test]
    fn slope_requires_positive_v() {
        let v = WeightExpr::parse("p1", 1).unwrap();
        assert!(matches!(slope(&interval(), &v, &one(), 16), Err(Error::PositivityViolation(_))));
    }

    #[test]
    fn futaki_examples() {
        let p = interval();
        let lin = PLConvex::affine(vec![rat(1)], rat(0));
        assert!(futaki(&p, &one(), &one(), &lin, 2.0, 16).unwrap().abs() < 1e-14);
        assert!((futaki(&p, &one(), &one(), &abs_p(), 2.0, 16).unwrap() - 2.0).abs() < 1e-14);
        let constant = PLConvex::affine(vec![rat(0)], rat(1));
        assert!(futaki(&p, &one(), &one(), &constant, 2.0, 16).unwrap().abs() < 1e-14);
        assert_eq!(futaki_exact(&p, &one(), &one(), &abs_p(), &rat(2)).unwrap(), rat(2));
    }

    #[test]
    fn w_ext_examples() {
        let p = interval();
        let ext = solve_w_ext(&p, &one(), &one(), 16).unwrap();
        assert!((ext.c - 2.0).abs() < 1e-13 && ext.xi[0].abs() < 1e-13);
        assert_eq!(solve_w_ext_exact(&p, &one(), &one()).unwrap(), (vec![rat(0)], rat(2)));
        let q = Polytope::interval(rat(0), rat(2)).unwrap();
        assert_eq!(solve_w_ext_exact(&q, &one(), &one()).unwrap(), (vec![rat(0)], rat(2)));
        let rel = relative_futaki(&p, &one(), &one(), &abs_p(), 16).unwrap();
        assert!((rel - 2.0).abs() < 1e-13);
        assert_eq!(relative_futaki_exact(&p, &one(), &one(), &abs_p()).unwrap(), rat(2));
    }

    #[test]
    fn cells_split_at_creases() {
        let p = interval();
        let cells = abs_p().cells(&p).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].1.volume() + cells[1].1.volume(), rat(2));
        let f = PLConvex::new(vec![
            (vec![rat(1)], rat(1)),
            (vec![rat(0)], rat(1)),
            (vec![rat(0)], rat(-5)),
            (vec![rat(2)], rat(-10)),
        ])
        .unwrap();
        assert_eq!(f.prune(&p).unwrap().pieces().len(), 2);
        assert_eq!(f.eval_exact(&[ratio(1, 2)]), ratio(3, 2));
    }

    #[test]
    fn scan_on_interval_is_nonnegative() {
        let p = interval();
        let grid = default_scan_grid(&p, 20);
        let entries = scan_destabilizers(&p, &one(), &one(), &grid, 16).unwrap();
        assert_eq!(entries.len(), 2 * 19);
        assert!(entries[0].value >= -1e-12);
        assert!(entries.windows(2).all(|w| w[0].value <= w[1].value));
        for e in &entries {
            let b = to_f64(&e.offset);
            // max(+-p + b, 0) has F = (1 + b)(1 - b)
            assert!((e.value - (1.0 - b * b)).abs() < 1e-12);
        }
        assert!(scan_destabilizers(&p, &one(), &one(), &[], 16).unwrap().is_empty());
    }
}
