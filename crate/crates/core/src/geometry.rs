//! Labelled rational polytopes.
//!
//! A [`Polytope`] is given by inward affine labels `L_i(p) = <n_i, p> + b_i >= 0`
//! with primitive integer normals. Vertices, facets and a fan triangulation
//! are computed exactly at construction. Facets carry the boundary measure
//! `d sigma` fixed by `dL_i ^ d sigma = -dp`, i.e. Euclidean measure divided
//! by `|n_i|`; in dimension one each endpoint is a unit point mass.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{det_exact, lcm_of_denominators, rank_exact, rat, solve_exact, to_f64, Rational};

pub type Point = Vec<Rational>;

/// Inward label `L(p) = <normal, p> + offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    normal: Vec<i64>,
    offset: Rational,
}

impl AffineForm {
    pub fn new(normal: Vec<i64>, offset: Rational) -> Result<Self> {
        let g = normal.iter().fold(0i64, |g, &a| g.gcd(&a));
        if g != 1 {
            return Err(Error::NonPrimitiveNormal(normal));
        }
        Ok(Self { normal, offset })
    }

    /// Rescales `<normal, p> + offset >= 0` by a positive factor so the
    /// normal becomes a primitive integer vector.
    pub fn from_rational(normal: &[Rational], offset: &Rational) -> Result<Self> {
        if normal.iter().all(|a| a.is_zero()) {
            return Err(Error::NonPrimitiveNormal(vec![0; normal.len()]));
        }
        let l = lcm_of_denominators(normal.iter());
        let ints: Vec<BigInt> = normal
            .iter()
            .map(|a| (a * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, a| g.gcd(a));
        let scale = Rational::new(l, g.clone());
        let normal: Vec<i64> = ints
            .iter()
            .map(|a| (a / &g).to_i64())
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Domain("normal does not fit in 64 bits".into()))?;
        Ok(Self {
            normal,
            offset: offset * scale,
        })
    }

    pub fn normal(&self) -> &[i64] {
        &self.normal
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal_rational(&self) -> Vec<Rational> {
        self.normal.iter().map(|&a| rat(a)).collect()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_squared() as f64).sqrt()
    }

    pub fn norm_squared(&self) -> i64 {
        self.normal.iter().map(|a| a * a).sum()
    }

    pub fn eval(&self, p: &[Rational]) -> Rational {
        self.normal
            .iter()
            .zip(p)
            .fold(self.offset.clone(), |acc, (&a, x)| acc + x * rat(a))
    }

    pub fn eval_f64(&self, p: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(p)
            .fold(to_f64(&self.offset), |acc, (&a, x)| acc + a as f64 * x)
    }

    /// Same normal, offset shifted by `-eps` (the label `L - eps >= 0`).
    pub fn shifted(&self, eps: &Rational) -> Self {
        Self {
            normal: self.normal.clone(),
            offset: &self.offset - eps,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Facet {
    /// Index of the defining label.
    pub label: usize,
    /// Indices into [`Polytope::vertices`].
    pub vertices: Vec<usize>,
    /// Boundary-measure density relative to Euclidean measure (`1/|n|`),
    /// or the point mass 1 in dimension one.
    pub density: f64,
    /// Fan triangulation of the facet into `(dim-1)`-simplices.
    pub simplices: Vec<Vec<Point>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Interior,
    /// Labels vanishing at the point.
    Boundary(Vec<usize>),
    Outside,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePointSet {
    pub k: u64,
    pub points: Vec<Vec<i64>>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    labels: Vec<AffineForm>,
    vertices: Vec<Point>,
    facets: Vec<Facet>,
    simplices: Vec<Vec<Point>>,
}

impl Polytope {
    /// Builds a polytope from inward labels. Redundant labels are accepted;
    /// they simply carry no facet.
    pub fn from_halfspaces(labels: Vec<AffineForm>) -> Result<Self> {
        let dim = labels.first().map(AffineForm::dim).ok_or(Error::EmptyInterior)?;
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if let Some(bad) = labels.iter().find(|l| l.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        if labels.len() < dim + 1 {
            return Err(Error::UnboundedRegion);
        }
        let vertices = enumerate_vertices(dim, &labels)?;
        let diffs: Vec<Vec<Rational>> = vertices[1..]
            .iter()
            .map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect())
            .collect();
        if rank_exact(&diffs) < dim {
            return Err(Error::EmptyInterior);
        }

        let tight: Vec<Vec<bool>> = vertices
            .iter()
            .map(|v| labels.iter().map(|l| l.eval(v).is_zero()).collect())
            .collect();
        let tri = Triangulator {
            vertices: &vertices,
            tight: &tight,
            nlabels: labels.len(),
        };

        let mut facets = Vec::new();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (i, label) in labels.iter().enumerate() {
            let on: Vec<usize> = (0..vertices.len()).filter(|&v| tight[v][i]).collect();
            if on.is_empty() || affine_rank(&vertices, &on) != dim - 1 || !seen.insert(on.clone()) {
                continue;
            }
            let density = if dim == 1 { 1.0 } else { 1.0 / label.norm() };
            let simplices = tri.triangulate(&on, dim - 1);
            facets.push(Facet {
                label: i,
                vertices: on,
                density,
                simplices,
            });
        }
        let all: Vec<usize> = (0..vertices.len()).collect();
        let simplices = tri.triangulate(&all, dim);
        Ok(Self {
            dim,
            labels,
            vertices,
            facets,
            simplices,
        })
    }

    /// Axis-aligned box `prod [lo_i, hi_i]`.
    pub fn cube(lo: &[Rational], hi: &[Rational]) -> Result<Self> {
        let n = lo.len();
        let mut labels = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            labels.push(AffineForm::new(e.clone(), -lo[i].clone())?);
            e[i] = -1;
            labels.push(AffineForm::new(e, hi[i].clone())?);
        }
        Self::from_halfspaces(labels)
    }

    /// The interval `[lo, hi]`.
    pub fn interval(lo: Rational, hi: Rational) -> Result<Self> {
        Self::cube(&[lo], &[hi])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[AffineForm] {
        &self.labels
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .map(|v| v.iter().map(to_f64).collect())
            .collect()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Fan triangulation of the interior into `dim`-simplices.
    pub fn simplices(&self) -> &[Vec<Point>] {
        &self.simplices
    }

    pub fn centroid(&self) -> Point {
        let n = rat(self.vertices.len() as i64);
        (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| v[i].clone()).sum::<Rational>() / &n)
            .collect()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let lo = (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| &v[i]).min().unwrap().clone())
            .collect();
        let hi = (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| &v[i]).max().unwrap().clone())
            .collect();
        (lo, hi)
    }

    pub fn contains(&self, p: &[Rational]) -> Result<Location> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        let mut on = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            let v = l.eval(p);
            if v.is_negative() {
                return Ok(Location::Outside);
            }
            if v.is_zero() {
                on.push(i);
            }
        }
        Ok(if on.is_empty() {
            Location::Interior
        } else {
            Location::Boundary(on)
        })
    }

    /// Smallest distance-to-boundary measured in label units, `min_i L_i(p)`.
    pub fn min_label(&self, p: &[f64]) -> f64 {
        self.labels
            .iter()
            .map(|l| l.eval_f64(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance from `p` to the nearest facet hyperplane.
    pub fn boundary_distance(&self, p: &[f64]) -> f64 {
        self.labels
            .iter()
            .map(|l| l.eval_f64(p) / l.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Radius of the largest inscribed ball.
    pub fn inradius(&self) -> f64 {
        chebyshev_radius(self.dim, &self.labels)
    }

    /// Integer points of the dilate `kP`, in lexicographic order.
    pub fn lattice_points(&self, k: u64) -> LatticePointSet {
        assert!(k >= 1, "dilation must be positive");
        let kq = Rational::from_integer(BigInt::from(k));
        let (lo, hi) = self.bounding_box();
        let lo: Vec<i64> = lo.iter().map(|x| (x * &kq).ceil().to_integer().to_i64().unwrap()).collect();
        let hi: Vec<i64> = hi.iter().map(|x| (x * &kq).floor().to_integer().to_i64().unwrap()).collect();
        // L(lambda/k) >= 0  <=>  den*<n, lambda> + k*num >= 0
        let scaled: Vec<(Vec<BigInt>, BigInt)> = self
            .labels
            .iter()
            .map(|l| {
                let den = l.offset.denom().clone();
                let n = l.normal.iter().map(|&a| BigInt::from(a) * &den).collect();
                (n, l.offset.numer() * BigInt::from(k))
            })
            .collect();
        let mut points = Vec::new();
        let mut cur = lo.clone();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return LatticePointSet { k, points };
        }
        loop {
            let inside = scaled.iter().all(|(n, c)| {
                let s: BigInt = n.iter().zip(&cur).map(|(a, &x)| a * BigInt::from(x)).sum::<BigInt>() + c;
                !s.is_negative()
            });
            if inside {
                points.push(cur.clone());
            }
            // odometer, last coordinate fastest
            let mut i = self.dim;
            loop {
                if i == 0 {
                    return LatticePointSet { k, points };
                }
                i -= 1;
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    for j in i + 1..self.dim {
                        cur[j] = lo[j];
                    }
                    break;
                }
            }
        }
    }

    /// `P_eps = { L_i >= eps }`.
    pub fn shrink(&self, eps: &Rational) -> Result<Self> {
        Self::from_halfspaces(self.labels.iter().map(|l| l.shifted(eps)).collect())
    }

    /// Least common denominator of all vertex coordinates.
    pub fn vertex_denominator_lcm(&self) -> BigInt {
        lcm_of_denominators(self.vertices.iter().flatten())
    }

    pub fn volume(&self) -> Rational {
        let fact = crate::poly::factorial(self.dim as u64);
        self.simplices
            .iter()
            .map(|s| simplex_volume_factor(s))
            .sum::<Rational>()
            / Rational::from_integer(fact)
    }
}

/// `|det[q1 - q0, ..., qd - q0]|` for a full-dimensional simplex.
pub fn simplex_volume_factor(s: &[Point]) -> Rational {
    let rows: Vec<Vec<Rational>> = s[1..]
        .iter()
        .map(|q| q.iter().zip(&s[0]).map(|(a, b)| a - b).collect())
        .collect();
    det_exact(&rows).abs()
}

/// Boundary-measure factor of a facet simplex with primitive normal `n`:
/// `|det[n; q1 - q0; ...]| / |n|^2`. Multiplying the reference-simplex
/// integral by this gives the `d sigma` integral.
pub fn facet_measure_factor(s: &[Point], normal: &[i64]) -> Rational {
    let mut rows = vec![normal.iter().map(|&a| rat(a)).collect::<Vec<_>>()];
    rows.extend(
        s[1..]
            .iter()
            .map(|q| q.iter().zip(&s[0]).map(|(a, b)| a - b).collect::<Vec<_>>()),
    );
    let n2: i64 = normal.iter().map(|a| a * a).sum();
    det_exact(&rows).abs() / rat(n2)
}

fn affine_rank(vertices: &[Point], idx: &[usize]) -> usize {
    if idx.len() <= 1 {
        return 0;
    }
    let base = &vertices[idx[0]];
    let rows: Vec<Vec<Rational>> = idx[1..]
        .iter()
        .map(|&i| vertices[i].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rank_exact(&rows)
}

struct Triangulator<'a> {
    vertices: &'a [Point],
    tight: &'a [Vec<bool>],
    nlabels: usize,
}

impl Triangulator<'_> {
    /// Cones the face spanned by `face` (of affine dimension `d`) from its
    /// vertex centroid over a recursive triangulation of its facets.
    fn triangulate(&self, face: &[usize], d: usize) -> Vec<Vec<Point>> {
        if d == 0 {
            return vec![vec![self.vertices[face[0]].clone()]];
        }
        if face.len() == d + 1 {
            return vec![face.iter().map(|&i| self.vertices[i].clone()).collect()];
        }
        let n = rat(face.len() as i64);
        let dim = self.vertices[0].len();
        let c: Point = (0..dim)
            .map(|k| face.iter().map(|&i| self.vertices[i][k].clone()).sum::<Rational>() / &n)
            .collect();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Vec::new();
        for j in 0..self.nlabels {
            let sub: Vec<usize> = face.iter().copied().filter(|&v| self.tight[v][j]).collect();
            if sub.len() == face.len() || sub.is_empty() {
                continue;
            }
            if affine_rank(self.vertices, &sub) != d - 1 || !seen.insert(sub.clone()) {
                continue;
            }
            for mut s in self.triangulate(&sub, d - 1) {
                s.insert(0, c.clone());
                out.push(s);
            }
        }
        out
    }
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = idx.clone();
        let mut i = k;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

fn intersection(labels: &[&AffineForm], dim: usize) -> Option<Point> {
    let a: Vec<Vec<Rational>> = labels.iter().map(|l| l.normal_rational()).collect();
    let b: Vec<Rational> = labels.iter().map(|l| -l.offset.clone()).collect();
    debug_assert_eq!(a.len(), dim);
    solve_exact(&a, &b)
}

fn enumerate_vertices(dim: usize, labels: &[AffineForm]) -> Result<Vec<Point>> {
    // Candidate intersections bound every vertex, so a box strictly outside
    // them is tight only when the region escapes to infinity.
    let mut bound = Rational::one();
    for combo in combinations(labels.len(), dim) {
        let sel: Vec<&AffineForm> = combo.iter().map(|&i| &labels[i]).collect();
        if let Some(p) = intersection(&sel, dim) {
            for x in &p {
                if x.abs() > bound {
                    bound = x.abs();
                }
            }
        }
    }
    let m = bound * rat(2) + rat(1);
    let mut boxed: Vec<AffineForm> = labels.to_vec();
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        boxed.push(AffineForm { normal: e.clone(), offset: m.clone() });
        e[i] = -1;
        boxed.push(AffineForm { normal: e, offset: m.clone() });
    }
    let nlab = labels.len();
    let mut verts: BTreeSet<Point> = BTreeSet::new();
    for combo in combinations(boxed.len(), dim) {
        let sel: Vec<&AffineForm> = combo.iter().map(|&i| &boxed[i]).collect();
        let Some(p) = intersection(&sel, dim) else { continue };
        if !boxed.iter().all(|l| !l.eval(&p).is_negative()) {
            continue;
        }
        if boxed[nlab..].iter().any(|l| l.eval(&p).is_zero()) {
            return Err(Error::UnboundedRegion);
        }
        verts.insert(p);
    }
    if verts.is_empty() {
        return Err(Error::EmptyInterior);
    }
    Ok(verts.into_iter().collect())
}

fn chebyshev_radius(dim: usize, labels: &[AffineForm]) -> f64 {
    // maximize r subject to <n_i, x> + b_i - r |n_i| >= 0; optimum sits on
    // dim + 1 active constraints.
    let mut best = 0.0f64;
    for combo in combinations(labels.len(), dim + 1) {
        let mut a = nalgebra::DMatrix::<f64>::zeros(dim + 1, dim + 1);
        let mut b = nalgebra::DVector::<f64>::zeros(dim + 1);
        for (r, &i) in combo.iter().enumerate() {
            let l = &labels[i];
            for (c, &n) in l.normal.iter().enumerate() {
                a[(r, c)] = n as f64;
            }
            a[(r, dim)] = -l.norm();
            b[r] = -to_f64(&l.offset);
        }
        let Some(sol) = a.lu().solve(&b) else { continue };
        let r = sol[dim];
        let x: Vec<f64> = (0..dim).map(|i| sol[i]).collect();
        let feasible = labels
            .iter()
            .all(|l| l.eval_f64(&x) - r * l.norm() >= -1e-12 * (1.0 + r.abs()));
        if feasible && r > best {
            best = r;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn af(n: &[i64], b: i64) -> AffineForm {
        AffineForm::new(n.to_vec(), rat(b)).unwrap()
    }

    fn simplex2() -> Polytope {
        Polytope::from_halfspaces(vec![af(&[1, 0], 0), af(&[0, 1], 0), af(&[-1, -1], 1)]).unwrap()
    }

    #[test]
    fn interval_has_unit_endpoint_masses() {
        let p = Polytope::from_halfspaces(vec![af(&[1], 1), af(&[-1], 1)]).unwrap();
        assert_eq!(p.vertices(), &[vec![rat(-1)], vec![rat(1)]]);
        assert_eq!(p.facets().len(), 2);
        assert!(p.facets().iter().all(|f| f.density == 1.0));
    }

    #[test]
    fn unit_square_facets() {
        let p = Polytope::cube(&[rat(0), rat(0)], &[rat(1), rat(1)]).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        assert!(p.facets().iter().all(|f| f.density == 1.0 && f.vertices.len() == 2));
        assert_eq!(p.volume(), rat(1));
    }

    #[test]
    fn simplex_hypotenuse_density() {
        let p = simplex2();
        let hyp = p.facets().iter().find(|f| f.label == 2).unwrap();
        assert!((hyp.density - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        // sigma-mass of the diagonal is sqrt(2) * (1/sqrt(2)) = 1
        let mass: Rational = hyp
            .simplices
            .iter()
            .map(|s| facet_measure_factor(s, p.labels()[2].normal()))
            .sum();
        assert_eq!(mass, rat(1));
        assert_eq!(p.volume(), ratio(1, 2));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Polytope::from_halfspaces(vec![af(&[1, 0], 0), af(&[0, 1], 0), af(&[1, 1], 1)]).unwrap_err(),
            Error::UnboundedRegion
        );
        assert_eq!(
            Polytope::from_halfspaces(vec![af(&[1], 0), af(&[-1], -1)]).unwrap_err(),
            Error::EmptyInterior
        );
        assert_eq!(
            Polytope::from_halfspaces(vec![af(&[1], 0), af(&[-1], 0)]).unwrap_err(),
            Error::EmptyInterior
        );
        assert_eq!(
            AffineForm::new(vec![2, 0], rat(1)).unwrap_err(),
            Error::NonPrimitiveNormal(vec![2, 0])
        );
    }

    #[test]
    fn rational_normals_are_made_primitive() {
        let l = AffineForm::from_rational(&[ratio(1, 2), ratio(-3, 4)], &rat(1)).unwrap();
        assert_eq!(l.normal(), &[2, -3]);
        assert_eq!(l.offset(), &rat(4));
    }

    #[test]
    fn lattice_counts() {
        let i01 = Polytope::interval(rat(0), rat(1)).unwrap();
        assert_eq!(i01.lattice_points(3).points.len(), 4);
        let i11 = Polytope::interval(rat(-1), rat(1)).unwrap();
        let pts = i11.lattice_points(2).points;
        assert_eq!(pts, vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]);
        let sq = Polytope::cube(&[rat(0), rat(0)], &[rat(1), rat(1)]).unwrap();
        assert_eq!(sq.lattice_points(2).points.len(), 9);
        let tri = simplex2();
        // (k+1)(k+2)/2
        assert_eq!(tri.lattice_points(4).points.len(), 15);
    }

    #[test]
    fn classification() {
        let p = Polytope::interval(rat(-1), rat(1)).unwrap();
        assert_eq!(p.contains(&[rat(0)]).unwrap(), Location::Interior);
        assert_eq!(p.contains(&[rat(1)]).unwrap(), Location::Boundary(vec![1]));
        let sq = Polytope::cube(&[rat(0), rat(0)], &[rat(1), rat(1)]).unwrap();
        assert_eq!(sq.contains(&[rat(2), rat(0)]).unwrap(), Location::Outside);
        assert!(matches!(
            sq.contains(&[rat(0)]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn redundant_labels_carry_no_facet() {
        let p = Polytope::from_halfspaces(vec![af(&[1], 1), af(&[-1], 1), af(&[-1], 2)]).unwrap();
        assert_eq!(p.facets().len(), 2);
    }

    #[test]
    fn three_dimensional_cube_triangulates() {
        let c = Polytope::cube(&[rat(0), rat(0), rat(0)], &[rat(1), rat(2), rat(1)]).unwrap();
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.facets().len(), 6);
        assert_eq!(c.volume(), rat(2));
        assert!((c.inradius() - 0.5).abs() < 1e-12);
    }
}
