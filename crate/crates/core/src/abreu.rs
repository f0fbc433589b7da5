//! Symplectic potentials and the weighted Abreu scalar curvature
//! `Scal_v = -sum_ij (v H_ij)_{,ij}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::quad::QuadratureRule;
use crate::rational::Rational;
use crate::weights::WeightExpr;

#[derive(Debug, Clone)]
pub enum PotentialKind {
    /// `u0 = 1/2 sum_j L_j log L_j`.
    Guillemin,
    /// `u0 + phi` for a smooth correction `phi`.
    GuilleminPlus(WeightExpr),
}

#[derive(Debug, Clone)]
pub struct SymplecticPotential {
    polytope: Polytope,
    kind: PotentialKind,
    normals: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalMethod {
    /// Closed-form derivatives of `H` (Guillemin only).
    Analytic,
    /// Fourth-order central differences of `v H` with step `1e-3` times the
    /// inradius.
    FiniteDifference,
}

pub fn guillemin_potential(polytope: &Polytope) -> SymplecticPotential {
    SymplecticPotential::new(polytope, PotentialKind::Guillemin)
}

impl SymplecticPotential {
    pub fn new(polytope: &Polytope, kind: PotentialKind) -> Self {
        let normals = polytope
            .labels()
            .iter()
            .map(|l| DVector::from_iterator(l.dim(), l.normal().iter().map(|&a| a as f64)))
            .collect();
        SymplecticPotential {
            polytope: polytope.clone(),
            kind,
            normals,
        }
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    fn label_values(&self, p: &[f64]) -> Result<Vec<f64>> {
        let vals: Vec<f64> = self.polytope.labels().iter().map(|l| l.eval_f64(p)).collect();
        if vals.iter().any(|&l| l <= 0.0) {
            return Err(Error::EvaluationOnBoundary(p.to_vec()));
        }
        Ok(vals)
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        let ls = self.label_values(p)?;
        let u0 = 0.5 * ls.iter().map(|l| l * l.ln()).sum::<f64>();
        Ok(match &self.kind {
            PotentialKind::Guillemin => u0,
            PotentialKind::GuilleminPlus(phi) => u0 + phi.eval(p)?,
        })
    }

    /// `G = Hess(u)`.
    pub fn hessian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let ls = self.label_values(p)?;
        let n = self.polytope.dim();
        let mut g = DMatrix::zeros(n, n);
        for (nr, l) in self.normals.iter().zip(&ls) {
            g += nr * nr.transpose() * (0.5 / l);
        }
        if let PotentialKind::GuilleminPlus(phi) = &self.kind {
            let h = phi.eval_hess(p)?;
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += h[i][j];
                }
            }
        }
        Ok(g)
    }

    /// `H = G^{-1}`; fails unless `G` is positive definite at `p`.
    pub fn inverse_hessian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.hessian(p)?;
        let chol = g
            .cholesky()
            .ok_or_else(|| Error::PositivityViolation(format!("Hess(u) is not positive definite at {p:?}")))?;
        Ok(chol.inverse())
    }

    /// `(H, d_k H, d_k d_l H)` for the Guillemin potential.
    fn h_derivatives(&self, p: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>)> {
        let ls = self.label_values(p)?;
        let n = self.polytope.dim();
        let h = self.inverse_hessian(p)?;
        let mut dg = vec![DMatrix::zeros(n, n); n];
        let mut ddg = vec![vec![DMatrix::zeros(n, n); n]; n];
        for (nr, l) in self.normals.iter().zip(&ls) {
            let outer = nr * nr.transpose();
            for k in 0..n {
                dg[k] -= &outer * (0.5 * nr[k] / (l * l));
                for m in 0..n {
                    ddg[k][m] += &outer * (nr[k] * nr[m] / (l * l * l));
                }
            }
        }
        let dh: Vec<DMatrix<f64>> = dg.iter().map(|d| -(&h * d * &h)).collect();
        let mut ddh = vec![vec![DMatrix::zeros(n, n); n]; n];
        for k in 0..n {
            for m in 0..n {
                ddh[k][m] = &h * &dg[m] * &h * &dg[k] * &h + &h * &dg[k] * &h * &dg[m] * &h - &h * &ddg[k][m] * &h;
            }
        }
        Ok((h, dh, ddh))
    }

    fn fd_step(&self) -> f64 {
        1e-3 * self.polytope.inradius()
    }
}

/// `Scal_v(p)` using the analytic path for Guillemin potentials and
/// finite differences otherwise.
pub fn scal_v(u: &SymplecticPotential, v: &WeightExpr, p: &[f64]) -> Result<f64> {
    let method = match u.kind {
        PotentialKind::Guillemin => ScalMethod::Analytic,
        PotentialKind::GuilleminPlus(_) => ScalMethod::FiniteDifference,
    };
    scal_v_with(u, v, p, method)
}

pub fn scal_v_with(u: &SymplecticPotential, v: &WeightExpr, p: &[f64], method: ScalMethod) -> Result<f64> {
    match method {
        ScalMethod::Analytic => {
            if !matches!(u.kind, PotentialKind::Guillemin) {
                return Err(Error::Unsupported(
                    "analytic Scal_v needs the Guillemin potential".into(),
                ));
            }
            scal_analytic(u, v, p)
        }
        ScalMethod::FiniteDifference => scal_fd(u, v, p),
    }
}

fn scal_analytic(u: &SymplecticPotential, v: &WeightExpr, p: &[f64]) -> Result<f64> {
    let n = u.polytope.dim();
    let (h, dh, ddh) = u.h_derivatives(p)?;
    let val = v.eval(p)?;
    let grad = v.eval_grad(p)?;
    let hess = v.eval_hess(p)?;
    // (v H_ij)_{,ij} = v_ij H_ij + 2 v_i H_ij,j + v H_ij,ij
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += hess[i][j] * h[(i, j)] + 2.0 * grad[i] * dh[j][(i, j)] + val * ddh[i][j][(i, j)];
        }
    }
    Ok(-total)
}

const D1: [(i32, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const D2: [(i32, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];

fn scal_fd(u: &SymplecticPotential, v: &WeightExpr, p: &[f64]) -> Result<f64> {
    let n = u.polytope.dim();
    let h = u.fd_step();
    if u.polytope.boundary_distance(p) < 2.0 * h {
        return Err(Error::TooCloseToBoundary(p.to_vec()));
    }
    let f = |q: &[f64], i: usize, j: usize| -> Result<f64> { Ok(v.eval(q)? * u.inverse_hessian(q)?[(i, j)]) };
    let mut q = p.to_vec();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut d = 0.0;
            if i == j {
                for &(s, c) in &D2 {
                    q[i] = p[i] + s as f64 * h;
                    d += c * f(&q, i, j)?;
                }
                q[i] = p[i];
                d /= 12.0 * h * h;
            } else {
                for &(si, ci) in &D1 {
                    for &(sj, cj) in &D1 {
                        q[i] = p[i] + si as f64 * h;
                        q[j] = p[j] + sj as f64 * h;
                        d += ci * cj * f(&q, i, j)?;
                    }
                }
                q[i] = p[i];
                q[j] = p[j];
                d /= 144.0 * h * h;
            }
            total += d;
        }
    }
    Ok(-total)
}

pub const IDENTITY_EPSILONS: [(i64, i64); 3] = [(1, 100), (1, 200), (1, 400)];

/// Both sides of `int (Scal_v - c w) f = F(f) - int (sum H_ij f_ij) v` on
/// shrunk polytopes, and their extrapolation to `eps = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub epsilons: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub lhs_extrapolated: f64,
    pub rhs_extrapolated: f64,
    pub residual: f64,
}

/// Value at zero of the interpolating polynomial through `(x_i, y_i)`.
pub fn extrapolate_to_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..x.len() {
        let mut weight = 1.0;
        for j in 0..x.len() {
            if j != i {
                weight *= -x[j] / (x[i] - x[j]);
            }
        }
        total += weight * y[i];
    }
    total
}

pub fn check_futaki_identity(
    polytope: &Polytope,
    u: &SymplecticPotential,
    v: &WeightExpr,
    w: &WeightExpr,
    f: &WeightExpr,
    c: f64,
    order: usize,
) -> Result<IdentityCheck> {
    let dim = polytope.dim();
    let full = QuadratureRule::new(polytope, order);
    let bd = full.integrate_boundary(|x| Ok(f.eval(x)? * v.eval(x)?))?;
    let int = full.integrate_interior(|x| Ok(f.eval(x)? * w.eval(x)?))?;
    let fp = 2.0 * bd - c * int;

    let mut out = IdentityCheck {
        epsilons: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        lhs_extrapolated: 0.0,
        rhs_extrapolated: 0.0,
        residual: 0.0,
    };
    for &(num, den) in &IDENTITY_EPSILONS {
        let eps = Rational::new(num.into(), den.into());
        let shrunk = polytope.shrink(&eps)?;
        let rule = QuadratureRule::new(&shrunk, order);
        let lhs = rule.integrate_interior(|x| Ok((scal_v(u, v, x)? - c * w.eval(x)?) * f.eval(x)?))?;
        let corr = rule.integrate_interior(|x| {
            let h = u.inverse_hessian(x)?;
            let fh = f.eval_hess(x)?;
            let mut s = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    s += h[(i, j)] * fh[i][j];
                }
            }
            Ok(s * v.eval(x)?)
        })?;
        out.epsilons.push(num as f64 / den as f64);
        out.lhs.push(lhs);
        out.rhs.push(fp - corr);
    }
    out.lhs_extrapolated = extrapolate_to_zero(&out.epsilons, &out.lhs);
    out.rhs_extrapolated = extrapolate_to_zero(&out.epsilons, &out.rhs);
    out.residual = (out.lhs_extrapolated - out.rhs_extrapolated).abs();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn interval() -> Polytope {
        Polytope::interval(rat(-1), rat(1)).unwrap()
    }

    #[test]
    fn guillemin_on_interval() {
        let u = guillemin_potential(&interval());
        for &p in &[-0.9, -0.3, 0.0, 0.5, 0.9] {
            let h = u.inverse_hessian(&[p]).unwrap();
            assert!((h[(0, 0)] - (1.0 - p * p)).abs() < 1e-14);
            let expect = 0.5 * ((1.0 - p) * (1.0 - p).ln() + (1.0 + p) * (1.0 + p).ln());
            assert!((u.eval(&[p]).unwrap() - expect).abs() < 1e-14);
        }
        assert!(matches!(u.eval(&[1.0]), Err(Error::EvaluationOnBoundary(_))));
    }

    #[test]
    fn guillemin_on_square_is_separable() {
        let sq = Polytope::cube(&[rat(-1), rat(-1)], &[rat(1), rat(1)]).unwrap();
        let u = guillemin_potential(&sq);
        let h = u.inverse_hessian(&[0.3, -0.6]).unwrap();
        assert!((h[(0, 0)] - 0.91).abs() < 1e-14);
        assert!((h[(1, 1)] - 0.64).abs() < 1e-14);
        assert!(h[(0, 1)].abs() < 1e-15);
        let one = WeightExpr::constant(2, rat(1));
        assert!((scal_v(&u, &one, &[0.3, -0.6]).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn scal_of_interval() {
        let u = guillemin_potential(&interval());
        let one = WeightExpr::constant(1, rat(1));
        let v = WeightExpr::parse("p1 + 2", 1).unwrap();
        for &p in &[-0.9, -0.4, 0.0, 0.7, 0.9] {
            let a = scal_v_with(&u, &one, &[p], ScalMethod::Analytic).unwrap();
            let n = scal_v_with(&u, &one, &[p], ScalMethod::FiniteDifference).unwrap();
            assert!((a - 2.0).abs() < 1e-10);
            assert!((n - 2.0).abs() < 1e-4);
            let s = scal_v(&u, &v, &[p]).unwrap();
            assert!((s - (6.0 * p + 4.0)).abs() < 1e-10);
        }
        assert!(matches!(
            scal_v_with(&u, &one, &[0.9999], ScalMethod::FiniteDifference),
            Err(Error::TooCloseToBoundary(_))
        ));
    }

    #[test]
    fn extrapolation_weights() {
        let x = [0.01, 0.005, 0.0025];
        let y: Vec<f64> = x.iter().map(|e| 3.0 + 2.0 * e - 5.0 * e * e).collect();
        assert!((extrapolate_to_zero(&x, &y) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn identity_on_interval() {
        let p = interval();
        let u = guillemin_potential(&p);
        let one = WeightExpr::constant(1, rat(1));
        let f = WeightExpr::parse("p1^2", 1).unwrap();
        let r = check_futaki_identity(&p, &u, &one, &one, &f, 2.0, 16).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
        let v = WeightExpr::parse("p1 + 2", 1).unwrap();
        let c = crate::invariants::slope(&p, &v, &one, 16).unwrap();
        let r = check_futaki_identity(&p, &u, &v, &one, &f, c, 16).unwrap();
        assert!(r.residual <= 1e-5, "{r:?}");
        let lin = WeightExpr::parse("p1 - 1/3", 1).unwrap();
        let r = check_futaki_identity(&p, &u, &v, &one, &lin, c, 16).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
    }
}
