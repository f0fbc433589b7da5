//! Admissible projective line bundles: the profile `Theta` on `[-1, 1]`,
//! the extremal affine function `w_ext = A1 z + A2`, and the Futaki
//! function `F(z0)`.
//!
//! With `u = prod (xi_j z + c_j)^{d_j}` and
//! `S = v u sum_j Scal_j / (xi_j z + c_j)`, the profile solves
//! `phi'' = S - w (A1 z + A2) u` for `phi = v u Theta` with
//! `phi(+-1) = 0`, `phi'(+-1) = -+2 v(+-1) u(+-1)`.

use std::sync::OnceLock;

use nalgebra::{Matrix2, Vector2};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::poly::UniPoly;
use crate::quad::gauss_legendre;
use crate::rational::{rat, ratio, solve_exact, to_f64, Rational};
use crate::weights::WeightExpr;

/// Gauss–Legendre nodes used for every one-dimensional integral here.
const GL_ORDER: usize = 64;
pub const CHEBYSHEV_NODES: usize = 513;
pub const SCAN_POINTS: usize = 2001;
pub const Z0_GRID: usize = 99;

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleFactor {
    pub d: u32,
    pub scal: Rational,
    pub xi: Rational,
    pub c: Rational,
}

#[derive(Debug, Clone)]
pub struct AdmissibleData {
    factors: Vec<AdmissibleFactor>,
    v: WeightExpr,
    w: WeightExpr,
    u: UniPoly,
    /// `u sum_j Scal_j / (xi_j z + c_j)`, so that `S = v * s_hat`.
    s_hat: UniPoly,
    u_f64: Vec<f64>,
    s_hat_f64: Vec<f64>,
}

fn horner(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * z + x)
}

/// `prod (xi_j z + c_j)^{d_j}`.
pub fn u_poly(factors: &[AdmissibleFactor]) -> Result<UniPoly> {
    check_factors(factors)?;
    Ok(factors.iter().fold(UniPoly::constant(rat(1)), |acc, f| {
        &acc * &UniPoly::linear(f.xi.clone(), f.c.clone()).pow(f.d)
    }))
}

fn check_factors(factors: &[AdmissibleFactor]) -> Result<()> {
    for (j, f) in factors.iter().enumerate() {
        if f.c <= f.xi.abs() {
            return Err(Error::PositivityViolation(format!(
                "factor {}: xi z + c must be positive on [-1, 1]",
                j + 1
            )));
        }
        if f.d == 0 {
            return Err(Error::schema(format!("factors[{j}].d"), "must be a positive integer"));
        }
    }
    Ok(())
}

impl AdmissibleData {
    pub fn new(factors: Vec<AdmissibleFactor>, v: WeightExpr, w: WeightExpr) -> Result<Self> {
        for e in [&v, &w] {
            if e.dim() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: e.dim(),
                });
            }
        }
        let u = u_poly(&factors)?;
        let interval = Polytope::interval(rat(-1), rat(1))?;
        v.check_positive(&interval, "v")?;
        w.check_positive(&interval, "w")?;
        let mut s_hat = UniPoly::zero();
        for f in &factors {
            let (q, r) = u.div_rem(&UniPoly::linear(f.xi.clone(), f.c.clone()));
            debug_assert!(r.is_zero());
            s_hat = &s_hat + &q.scale(&f.scal);
        }
        let to_vec = |p: &UniPoly| p.coeffs().iter().map(to_f64).collect();
        Ok(AdmissibleData {
            factors,
            v,
            w,
            u_f64: to_vec(&u),
            s_hat_f64: to_vec(&s_hat),
            u,
            s_hat,
        })
    }

    /// `N = 0`, `v = w = 1`: the round sphere.
    pub fn round_sphere() -> Self {
        let one = WeightExpr::constant(1, rat(1));
        Self::new(Vec::new(), one.clone(), one).expect("valid")
    }

    pub fn factors(&self) -> &[AdmissibleFactor] {
        &self.factors
    }

    pub fn v(&self) -> &WeightExpr {
        &self.v
    }

    pub fn w(&self) -> &WeightExpr {
        &self.w
    }

    pub fn u(&self) -> &UniPoly {
        &self.u
    }

    pub fn is_polynomial(&self) -> bool {
        self.v.is_polynomial() && self.w.is_polynomial()
    }

    pub fn vu(&self, z: f64) -> Result<f64> {
        Ok(self.v.eval(&[z])? * horner(&self.u_f64, z))
    }

    pub fn s(&self, z: f64) -> Result<f64> {
        Ok(self.v.eval(&[z])? * horner(&self.s_hat_f64, z))
    }

    /// `phi''(z) = S - w (A1 z + A2) u`.
    pub fn rhs(&self, z: f64, a1: f64, a2: f64) -> Result<f64> {
        Ok(self.s(z)? - self.w.eval(&[z])? * (a1 * z + a2) * horner(&self.u_f64, z))
    }

    fn polys(&self) -> Result<(UniPoly, UniPoly, UniPoly)> {
        let v = self.v.as_polynomial()?.to_uni();
        let w = self.w.as_polynomial()?.to_uni();
        Ok((&v * &self.s_hat, &w * &self.u, &v * &self.u))
    }

    fn rhs_exact(&self, a1: &Rational, a2: &Rational) -> Result<UniPoly> {
        let (s, wu, _) = self.polys()?;
        Ok(&s - &(&wu * &UniPoly::linear(a1.clone(), a2.clone())))
    }
}

/// `int_a^b g` by Gauss–Legendre.
fn gl_integral<G: Fn(f64) -> Result<f64>>(a: f64, b: f64, g: G) -> Result<f64> {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = RULE.get_or_init(|| gauss_legendre(GL_ORDER));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut total = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        total += wi * g(mid + half * xi)?;
    }
    Ok(total * half)
}

/// `(A1, A2)` in floating point.
pub fn solve_w_ext_ode(data: &AdmissibleData) -> Result<(f64, f64)> {
    let wu = |z: f64| -> Result<f64> { Ok(data.w.eval(&[z])? * horner(&data.u_f64, z)) };
    let m = Matrix2::new(
        gl_integral(-1.0, 1.0, |t| Ok(t * wu(t)?))?,
        gl_integral(-1.0, 1.0, wu)?,
        gl_integral(-1.0, 1.0, |t| Ok((1.0 - t) * t * wu(t)?))?,
        gl_integral(-1.0, 1.0, |t| Ok((1.0 - t) * wu(t)?))?,
    );
    let (vu_p, vu_m) = (data.vu(1.0)?, data.vu(-1.0)?);
    let b = Vector2::new(
        gl_integral(-1.0, 1.0, |t| data.s(t))? + 2.0 * (vu_p + vu_m),
        gl_integral(-1.0, 1.0, |t| Ok((1.0 - t) * data.s(t)?))? + 4.0 * vu_m,
    );
    let x = m.lu().solve(&b).ok_or(Error::SingularSystem)?;
    Ok((x[0], x[1]))
}

/// `(A1, A2)` exactly; needs polynomial `v`, `w`.
pub fn solve_w_ext_ode_exact(data: &AdmissibleData) -> Result<(Rational, Rational)> {
    let (s, wu, vu) = data.polys()?;
    let (lo, hi) = (rat(-1), rat(1));
    let t = UniPoly::linear(rat(1), rat(0));
    let one_minus_t = UniPoly::linear(rat(-1), rat(1));
    let int = |p: &UniPoly| p.integrate(&lo, &hi);
    let m = vec![
        vec![int(&(&t * &wu)), int(&wu)],
        vec![int(&(&(&one_minus_t * &t) * &wu)), int(&(&one_minus_t * &wu))],
    ];
    let b = vec![
        int(&s) + rat(2) * (vu.eval(&hi) + vu.eval(&lo)),
        int(&(&one_minus_t * &s)) + rat(4) * vu.eval(&lo),
    ];
    let x = solve_exact(&m, &b).ok_or(Error::SingularSystem)?;
    Ok((x[0].clone(), x[1].clone()))
}

/// Slope of the non-extremal variant, `(2 [v u]_boundary + int S) / int w u`.
pub fn formal_slope(data: &AdmissibleData) -> Result<f64> {
    let num = 2.0 * (data.vu(1.0)? + data.vu(-1.0)?) + gl_integral(-1.0, 1.0, |t| data.s(t))?;
    let den = gl_integral(-1.0, 1.0, |t| Ok(data.w.eval(&[t])? * horner(&data.u_f64, t)))?;
    Ok(num / den)
}

#[derive(Debug, Clone)]
pub enum Phi {
    Exact(UniPoly),
    /// Chebyshev coefficients of the interpolants of `phi` and `phi'` on
    /// Chebyshev–Lobatto nodes.
    Chebyshev { phi: Vec<f64>, dphi: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct ThetaSolution {
    pub a1: f64,
    pub a2: f64,
    pub exact_a: Option<(Rational, Rational)>,
    pub phi: Phi,
    /// `phi(-1)`, `phi(1)`, `phi'(-1) - 2vu(-1)`, `phi'(1) + 2vu(1)`.
    pub boundary_residuals: [f64; 4],
    data: AdmissibleData,
}

impl ThetaSolution {
    pub fn data(&self) -> &AdmissibleData {
        &self.data
    }

    pub fn phi(&self, z: f64) -> f64 {
        match &self.phi {
            Phi::Exact(p) => p.eval_f64(z),
            Phi::Chebyshev { phi, .. } => clenshaw(phi, z),
        }
    }

    pub fn phi_prime(&self, z: f64) -> f64 {
        match &self.phi {
            Phi::Exact(p) => p.derivative().eval_f64(z),
            Phi::Chebyshev { dphi, .. } => clenshaw(dphi, z),
        }
    }

    pub fn theta(&self, z: f64) -> Result<f64> {
        Ok(self.phi(z) / self.data.vu(z)?)
    }

    /// Monomial coefficients of `phi`, ascending. The Chebyshev series is
    /// truncated below `1e-12` of its largest coefficient first.
    pub fn phi_coefficients(&self) -> Vec<f64> {
        match &self.phi {
            Phi::Exact(p) => p.coeffs().iter().map(to_f64).collect(),
            Phi::Chebyshev { phi: c, .. } => {
                let max = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let deg = c.iter().rposition(|x| x.abs() > 1e-12 * max).unwrap_or(0);
                chebyshev_to_monomial(&c[..=deg])
            }
        }
    }

    /// `Theta` as an exact rational function, when `v u` divides `phi`.
    pub fn theta_exact(&self) -> Option<UniPoly> {
        let Phi::Exact(p) = &self.phi else { return None };
        let v = self.data.v.as_polynomial().ok()?.to_uni();
        let (q, r) = p.div_rem(&(&v * &self.data.u));
        r.is_zero().then_some(q)
    }
}

fn clenshaw(c: &[f64], z: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * z * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    z * b1 - b2 + c[0]
}

fn chebyshev_to_monomial(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    let mut t_prev = vec![0.0; n];
    let mut t_cur = vec![0.0; n];
    t_prev[0] = 1.0;
    if n > 1 {
        t_cur[1] = 1.0;
    }
    for (k, &ck) in c.iter().enumerate() {
        let tk = if k == 0 { &t_prev } else { &t_cur };
        for (o, t) in out.iter_mut().zip(tk) {
            *o += ck * t;
        }
        if k >= 1 && k + 1 < n {
            let mut next = vec![0.0; n];
            for i in 0..n - 1 {
                next[i + 1] += 2.0 * t_cur[i];
            }
            for i in 0..n {
                next[i] -= t_prev[i];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
    }
    out
}

fn chebyshev_nodes(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|j| (std::f64::consts::PI * j as f64 / m).cos()).collect()
}

/// Chebyshev coefficients from values at `cos(pi j / (n-1))`.
fn chebyshev_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let mut s = 0.0;
            for (j, &f) in values.iter().enumerate() {
                let wj = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += wj * f * (std::f64::consts::PI * (j * k % (2 * n)) as f64 / nf).cos();
            }
            let ck = 2.0 / nf * s;
            if k == 0 || k == n {
                0.5 * ck
            } else {
                ck
            }
        })
        .collect()
}

fn residuals(data: &AdmissibleData, phi: impl Fn(f64) -> f64, dphi: impl Fn(f64) -> f64) -> Result<[f64; 4]> {
    Ok([
        phi(-1.0),
        phi(1.0),
        dphi(-1.0) - 2.0 * data.vu(-1.0)?,
        dphi(1.0) + 2.0 * data.vu(1.0)?,
    ])
}

/// Floating-point profile through Chebyshev interpolants of
/// `phi(z) = 2 vu(-1) (z + 1) + int_{-1}^z (z - t) phi''(t) dt` and of
/// `phi'(z) = 2 vu(-1) + int_{-1}^z phi''(t) dt`.
pub fn solve_theta(data: &AdmissibleData, a1: f64, a2: f64) -> Result<ThetaSolution> {
    let vu_m = data.vu(-1.0)?;
    let nodes = chebyshev_nodes(CHEBYSHEV_NODES);
    let pairs: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|&z| {
            if z <= -1.0 {
                return Ok((0.0, 2.0 * vu_m));
            }
            let value = gl_integral(-1.0, z, |t| Ok((z - t) * data.rhs(t, a1, a2)?))?;
            let slope = gl_integral(-1.0, z, |t| data.rhs(t, a1, a2))?;
            Ok((2.0 * vu_m * (z + 1.0) + value, 2.0 * vu_m + slope))
        })
        .collect::<Result<_>>()?;
    let (values, slopes): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let coeffs = chebyshev_coefficients(&values);
    let deriv = chebyshev_coefficients(&slopes);
    let boundary_residuals = residuals(data, |z| clenshaw(&coeffs, z), |z| clenshaw(&deriv, z))?;
    Ok(ThetaSolution {
        a1,
        a2,
        exact_a: None,
        phi: Phi::Chebyshev {
            phi: coeffs,
            dphi: deriv,
        },
        boundary_residuals,
        data: data.clone(),
    })
}

/// Exact profile by double antiderivative; needs polynomial `v`, `w`.
pub fn solve_theta_exact(data: &AdmissibleData, a1: &Rational, a2: &Rational) -> Result<ThetaSolution> {
    let (_, _, vu) = data.polys()?;
    let g = data.rhs_exact(a1, a2)?;
    let lo = rat(-1);
    let anchor = |p: UniPoly| {
        let at = p.eval(&lo);
        &p - &UniPoly::constant(at)
    };
    let i2 = anchor(anchor(g.antiderivative()).antiderivative());
    let phi = &i2 + &UniPoly::linear(rat(1), rat(1)).scale(&(rat(2) * vu.eval(&lo)));
    let dphi = phi.derivative();
    let boundary_residuals = residuals(data, |z| phi.eval_f64(z), |z| dphi.eval_f64(z))?;
    Ok(ThetaSolution {
        a1: to_f64(a1),
        a2: to_f64(a2),
        exact_a: Some((a1.clone(), a2.clone())),
        phi: Phi::Exact(phi),
        boundary_residuals,
        data: data.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Positivity {
    PositiveOnOpenInterval,
    NonpositiveAt(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityVerdict {
    pub verdict: Positivity,
    /// `min Theta` over the interior points of the 2001-point grid.
    pub margin: f64,
    /// `"sturm"` or `"scan"`.
    pub method: &'static str,
}

fn scan_grid() -> Vec<f64> {
    let n = SCAN_POINTS - 1;
    (1..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect()
}

pub fn check_positivity(sol: &ThetaSolution) -> Result<PositivityVerdict> {
    let grid = scan_grid();
    let thetas: Vec<f64> = grid.iter().map(|&z| sol.theta(z)).collect::<Result<_>>()?;
    let margin = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    match &sol.phi {
        Phi::Exact(p) => Ok(PositivityVerdict {
            verdict: sturm_verdict(p),
            margin,
            method: "sturm",
        }),
        Phi::Chebyshev { .. } => {
            let mut bad = Vec::new();
            for i in 0..grid.len() {
                if thetas[i] <= 0.0 && (i == 0 || thetas[i - 1] > 0.0) {
                    bad.push(if i == 0 {
                        grid[0]
                    } else {
                        polish_root(|z| sol.phi(z), grid[i - 1], grid[i])
                    });
                }
                if i + 1 < grid.len() && thetas[i] <= 0.0 && thetas[i + 1] > 0.0 {
                    bad.push(polish_root(|z| sol.phi(z), grid[i], grid[i + 1]));
                }
            }
            bad.dedup();
            let verdict = if bad.is_empty() {
                Positivity::PositiveOnOpenInterval
            } else {
                Positivity::NonpositiveAt(bad)
            };
            Ok(PositivityVerdict {
                verdict,
                margin,
                method: "scan",
            })
        }
    }
}

fn polish_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa0 = f(a);
    if fa0 == 0.0 {
        return a;
    }
    let mut fa = fa0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-15 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sturm count of the interior zeros of `phi` after removing the factors
/// `(1 - z)` and `(1 + z)` it always carries.
fn sturm_verdict(phi: &UniPoly) -> Positivity {
    let mut p = phi.clone();
    for root in [rat(1), rat(-1)] {
        let lin = UniPoly::linear(rat(1), -&root);
        while !p.is_zero() && p.eval(&root).is_zero() {
            p = p.div_rem(&lin).0;
        }
    }
    if p.is_zero() {
        return Positivity::NonpositiveAt(vec![0.0]);
    }
    let (lo, hi) = (rat(-1), rat(1));
    let n = p.count_roots(&lo, &hi);
    if n > 0 {
        let roots = p.isolate_roots(&lo, &hi, &ratio(1, 1 << 40));
        return Positivity::NonpositiveAt(roots.iter().map(to_f64).collect());
    }
    // no interior zero: the sign is constant on (-1, 1)
    if phi.eval(&Rational::zero()).is_positive() {
        Positivity::PositiveOnOpenInterval
    } else {
        Positivity::NonpositiveAt(vec![0.0])
    }
}

fn check_z0(z0: f64) -> Result<()> {
    if !(z0 > -1.0 && z0 < 1.0) {
        return Err(Error::Z0OutOfRange(z0));
    }
    Ok(())
}

/// `F(z0) = 2[f(1) vu(1) + f(-1) vu(-1)] + int f (S - w w_ext u)` for
/// `f = max(z + 1 - z0, 1)`, integrated separately on each side of `z0`.
pub fn futaki_z0(data: &AdmissibleData, a1: f64, a2: f64, z0: f64) -> Result<f64> {
    check_z0(z0)?;
    let boundary = 2.0 * ((2.0 - z0) * data.vu(1.0)? + data.vu(-1.0)?);
    let left = gl_integral(-1.0, z0, |z| data.rhs(z, a1, a2))?;
    let right = gl_integral(z0, 1.0, |z| Ok((z + 1.0 - z0) * data.rhs(z, a1, a2)?))?;
    Ok(boundary + left + right)
}

pub fn futaki_z0_exact(data: &AdmissibleData, a1: &Rational, a2: &Rational, z0: &Rational) -> Result<Rational> {
    check_z0(to_f64(z0))?;
    let (_, _, vu) = data.polys()?;
    let g = data.rhs_exact(a1, a2)?;
    let (lo, hi) = (rat(-1), rat(1));
    let boundary = rat(2) * ((rat(2) - z0) * vu.eval(&hi) + vu.eval(&lo));
    let fz = UniPoly::linear(rat(1), Rational::one() - z0);
    Ok(boundary + g.integrate(&lo, z0) + (&fz * &g).integrate(z0, &hi))
}

/// `z0 = -1 + 2 i / 100`, `i = 1..99`.
pub fn z0_grid() -> Vec<Rational> {
    (1..=Z0_GRID as i64).map(|i| ratio(-50 + i, 50)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub z0: f64,
    pub futaki: f64,
    /// `v u Theta` at `z0`.
    pub profile: f64,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub solution: ThetaSolution,
    pub positivity: PositivityVerdict,
    pub curve: Vec<CurvePoint>,
    /// `max |F(z0) - v u Theta (z0)|` over the grid.
    pub identity_residual: f64,
    pub exists: bool,
    /// Grid point with the most negative `F`, when `Theta` changes sign.
    pub destabilizing_z0: Option<f64>,
}

/// Full pipeline; `exact` selects the rational path (polynomial weights
/// only) for `(A1, A2)`, `phi` and the positivity certificate.
pub fn stability_report(data: &AdmissibleData, exact: bool) -> Result<StabilityReport> {
    let solution = if exact {
        let (a1, a2) = solve_w_ext_ode_exact(data)?;
        solve_theta_exact(data, &a1, &a2)?
    } else {
        let (a1, a2) = solve_w_ext_ode(data)?;
        solve_theta(data, a1, a2)?
    };
    let positivity = check_positivity(&solution)?;
    let curve: Vec<CurvePoint> = z0_grid()
        .par_iter()
        .map(|z0| {
            let zf = to_f64(z0);
            let futaki = match &solution.exact_a {
                Some((a1, a2)) => to_f64(&futaki_z0_exact(data, a1, a2, z0)?),
                None => futaki_z0(data, solution.a1, solution.a2, zf)?,
            };
            Ok(CurvePoint {
                z0: zf,
                futaki,
                profile: solution.phi(zf),
            })
        })
        .collect::<Result<_>>()?;
    let identity_residual = curve
        .iter()
        .map(|p| (p.futaki - p.profile).abs())
        .fold(0.0, f64::max);
    let exists = positivity.verdict == Positivity::PositiveOnOpenInterval;
    let destabilizing_z0 = if exists {
        None
    } else {
        curve
            .iter()
            .filter(|p| p.futaki <= 0.0)
            .min_by(|a, b| a.futaki.total_cmp(&b.futaki))
            .map(|p| p.z0)
    };
    Ok(StabilityReport {
        solution,
        positivity,
        curve,
        identity_residual,
        exists,
        destabilizing_z0,
    })
}
