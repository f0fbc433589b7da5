//! Gauss rules on simplices and exact polynomial integration over polytopes.
//!
//! Simplices come from the fan triangulation stored on [`Polytope`]. The
//! reference rule on the standard `d`-simplex is a collapsed (Duffy) tensor
//! product of Gauss–Legendre rules; axis `i` gets `ceil((d - i)/2)` extra
//! nodes so that the collapse Jacobian does not cost polynomial exactness.

use crate::error::{Error, Result};
use crate::geometry::{facet_measure_factor, simplex_volume_factor, Point, Polytope};
use crate::poly::RationalPoly;
use crate::rational::{to_f64, Rational};

pub const DEFAULT_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Collapsed Gauss rule on the standard simplex `{y >= 0, sum y <= 1}`.
/// Exact for polynomials of degree `<= 2*order - 1`.
pub fn simplex_rule(d: usize, order: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if d == 0 {
        return (vec![vec![]], vec![1.0]);
    }
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (1..=d)
        .map(|i| {
            let (x, w) = gauss_legendre(order + (d - i).div_ceil(2));
            (
                x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
                w.iter().map(|v| 0.5 * v).collect(),
            )
        })
        .collect();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let mut y = Vec::with_capacity(d);
        let mut rest = 1.0;
        let mut weight = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            let t = axes[i].0[k];
            weight *= axes[i].1[k] * rest;
            y.push(rest * t);
            if i + 1 < d {
                rest *= 1.0 - t;
            }
        }
        // prod over axes of `rest` is the collapse Jacobian prod_j (1-t_j)^(d-1-j)
        nodes.push(y);
        weights.push(weight);
        let mut i = d;
        loop {
            if i == 0 {
                return (nodes, weights);
            }
            i -= 1;
            if idx[i] + 1 < axes[i].0.len() {
                idx[i] += 1;
                idx[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

fn map_simplex(s: &[Point], ref_nodes: &[Vec<f64>], ref_weights: &[f64], scale: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let origin: Vec<f64> = s[0].iter().map(to_f64).collect();
    let edges: Vec<Vec<f64>> = s[1..]
        .iter()
        .map(|q| q.iter().zip(&s[0]).map(|(a, b)| to_f64(&(a - b))).collect())
        .collect();
    let nodes = ref_nodes
        .iter()
        .map(|y| {
            let mut x = origin.clone();
            for (yj, e) in y.iter().zip(&edges) {
                for (xi, ei) in x.iter_mut().zip(e) {
                    *xi += yj * ei;
                }
            }
            x
        })
        .collect();
    (nodes, ref_weights.iter().map(|w| w * scale).collect())
}

/// Physical nodes and weights for one polytope, interior and per facet.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    order: usize,
    interior: (Vec<Vec<f64>>, Vec<f64>),
    /// `(label index, nodes, weights)` per facet, weights including `d sigma`.
    boundary: Vec<(usize, Vec<Vec<f64>>, Vec<f64>)>,
}

impl QuadratureRule {
    pub fn new(polytope: &Polytope, order: usize) -> Self {
        let dim = polytope.dim();
        let (rn, rw) = simplex_rule(dim, order);
        let mut interior = (Vec::new(), Vec::new());
        for s in polytope.simplices() {
            let (n, w) = map_simplex(s, &rn, &rw, to_f64(&simplex_volume_factor(s)));
            interior.0.extend(n);
            interior.1.extend(w);
        }
        let (bn, bw) = simplex_rule(dim - 1, order);
        let boundary = polytope
            .facets()
            .iter()
            .map(|facet| {
                let normal = polytope.labels()[facet.label].normal();
                let mut nodes = Vec::new();
                let mut weights = Vec::new();
                for s in &facet.simplices {
                    let (n, w) = map_simplex(s, &bn, &bw, to_f64(&facet_measure_factor(s, normal)));
                    nodes.extend(n);
                    weights.extend(w);
                }
                (facet.label, nodes, weights)
            })
            .collect();
        QuadratureRule {
            order,
            interior,
            boundary,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn interior_nodes(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.interior.0, &self.interior.1)
    }

    pub fn integrate_interior<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(&[f64]) -> Result<f64>,
    {
        sum_rule(&self.interior.0, &self.interior.1, &g)
    }

    pub fn integrate_boundary<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(&[f64]) -> Result<f64>,
    {
        self.integrate_boundary_where(g, |_| true)
    }

    /// Boundary integral restricted to facets whose label index passes `keep`.
    pub fn integrate_boundary_where<G, K>(&self, g: G, keep: K) -> Result<f64>
    where
        G: Fn(&[f64]) -> Result<f64>,
        K: Fn(usize) -> bool,
    {
        let mut total = 0.0;
        for (label, nodes, weights) in &self.boundary {
            if keep(*label) {
                total += sum_rule(nodes, weights, &g)?;
            }
        }
        Ok(total)
    }
}

fn sum_rule<G>(nodes: &[Vec<f64>], weights: &[f64], g: &G) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let val = g(x)?;
        if !val.is_finite() {
            return Err(Error::NonFiniteIntegrand(x.clone()));
        }
        total += w * val;
    }
    Ok(total)
}

pub fn integrate_interior<G>(polytope: &Polytope, g: G, order: usize) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    QuadratureRule::new(polytope, order).integrate_interior(g)
}

pub fn integrate_boundary<G>(polytope: &Polytope, g: G, order: usize) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    QuadratureRule::new(polytope, order).integrate_boundary(g)
}

fn simplex_integral(q: &RationalPoly, s: &[Point]) -> Rational {
    let cols: Vec<Vec<Rational>> = s[1..]
        .iter()
        .map(|p| p.iter().zip(&s[0]).map(|(a, b)| a - b).collect())
        .collect();
    q.compose_affine(&s[0], &cols).integrate_standard_simplex()
}

/// `int_P q dp`, exactly.
pub fn integrate_exact_poly(polytope: &Polytope, q: &RationalPoly) -> Rational {
    polytope
        .simplices()
        .iter()
        .map(|s| simplex_integral(q, s) * simplex_volume_factor(s))
        .sum()
}

/// `int_{dP} q d sigma`, exactly, over facets whose label index passes `keep`.
pub fn integrate_exact_boundary_where(polytope: &Polytope, q: &RationalPoly, keep: impl Fn(usize) -> bool) -> Rational {
    let mut total = Rational::from_integer(0.into());
    for facet in polytope.facets().iter().filter(|f| keep(f.label)) {
        let normal = polytope.labels()[facet.label].normal();
        for s in &facet.simplices {
            total += simplex_integral(q, s) * facet_measure_factor(s, normal);
        }
    }
    total
}

pub fn integrate_exact_boundary(polytope: &Polytope, q: &RationalPoly) -> Rational {
    integrate_exact_boundary_where(polytope, q, |_| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AffineForm;
    use crate::rational::{rat, ratio};

    fn unit_square() -> Polytope {
        Polytope::cube(&[rat(0), rat(0)], &[rat(1), rat(1)]).unwrap()
    }

    fn std_triangle() -> Polytope {
        Polytope::from_halfspaces(vec![
            AffineForm::new(vec![1, 0], rat(0)).unwrap(),
            AffineForm::new(vec![0, 1], rat(0)).unwrap(),
            AffineForm::new(vec![-1, -1], rat(1)).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in 1..40 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n = {n}");
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            if n >= 2 {
                assert!((m2 - 2.0 / 3.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn interval_integrals() {
        let p = Polytope::interval(rat(-1), rat(1)).unwrap();
        assert!((integrate_interior(&p, |_| Ok(1.0), 16).unwrap() - 2.0).abs() < 1e-14);
        assert!((integrate_interior(&p, |x| Ok(x[0] * x[0]), 2).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(integrate_boundary(&p, |_| Ok(1.0), 16).unwrap(), 2.0);
    }

    #[test]
    fn square_and_triangle_integrals() {
        let sq = unit_square();
        assert!((integrate_interior(&sq, |x| Ok(x[0] * x[1]), 4).unwrap() - 0.25).abs() < 1e-14);
        assert!((integrate_boundary(&sq, |_| Ok(1.0), 4).unwrap() - 4.0).abs() < 1e-14);
        let tri = std_triangle();
        assert!((integrate_boundary(&tri, |_| Ok(1.0), 4).unwrap() - 3.0).abs() < 1e-14);
        assert!((integrate_interior(&tri, |_| Ok(1.0), 4).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exact_integrals() {
        let p = Polytope::interval(rat(-1), rat(1)).unwrap();
        let x = RationalPoly::var(1, 0);
        assert_eq!(integrate_exact_poly(&p, &x.pow(2)), ratio(2, 3));
        let x2 = &x + &RationalPoly::constant(1, rat(2));
        assert_eq!(integrate_exact_poly(&p, &x2.pow(3)), rat(20));
        assert_eq!(integrate_exact_boundary(&p, &x2), rat(4));
        let sq = unit_square();
        let xy = &RationalPoly::var(2, 0) * &RationalPoly::var(2, 1);
        assert_eq!(integrate_exact_poly(&sq, &xy), ratio(1, 4));
        assert_eq!(integrate_exact_boundary(&std_triangle(), &RationalPoly::one(2)), rat(3));
    }

    #[test]
    fn degree_seven_is_exact_at_order_four() {
        let tri = std_triangle();
        let x = RationalPoly::var(2, 0);
        let y = RationalPoly::var(2, 1);
        let q = &(&x.pow(4) * &y.pow(3)) + &x.pow(2);
        let exact = to_f64(&integrate_exact_poly(&tri, &q));
        let num = integrate_interior(&tri, |p| Ok(q.eval_f64(p)), 4).unwrap();
        assert!((num - exact).abs() <= 1e-12 * exact.abs());
        let bexact = to_f64(&integrate_exact_boundary(&tri, &q));
        let bnum = integrate_boundary(&tri, |p| Ok(q.eval_f64(p)), 4).unwrap();
        assert!((bnum - bexact).abs() <= 1e-12 * bexact.abs());
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let p = Polytope::interval(rat(-1), rat(1)).unwrap();
        assert!(matches!(
            integrate_interior(&p, |_| Ok(f64::NAN), 4),
            Err(Error::NonFiniteIntegrand(_))
        ));
    }
}
