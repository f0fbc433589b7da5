//! Toric test configurations built from a convex PL function `f <= R`,
//! their lattice weight sums `W_v(k) = sum_{lambda in kP} (R - f)(lambda/k) v(lambda/k)`
//! and the algebraic Donaldson–Futaki invariant read off their expansion.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{AffineForm, Polytope};
use crate::invariants::{futaki, futaki_exact, slope, slope_exact, PLConvex};
use crate::rational::{lcm_of_denominators, rat, solve_exact, to_f64, Rational};
use crate::weights::WeightExpr;

/// Reference value of `DF / F` that reports are compared against.
pub const REFERENCE_RATIO: f64 = 4.0;

pub const DISCREPANCY_NOTE: &str = "DF is computed from the fitted lattice-sum coefficients and F from the polytope \
functional; expanding both gives DF = F(R - f)/4 = -F(f)/4, so the measured ratio is -1/4 rather than the \
reference value 4.";

#[derive(Debug, Clone)]
pub struct ToricTestConfig {
    pub base: Polytope,
    pub f: PLConvex,
    pub r: Rational,
    /// `{(p, p') : p in P, 0 <= p' <= R - f(p)}`.
    pub q: Polytope,
}

pub fn build_config(base: &Polytope, f: &PLConvex, r: &Rational) -> Result<ToricTestConfig> {
    let dim = base.dim();
    let cells = f.cells(base)?;
    for (_, cell) in &cells {
        for vtx in cell.vertices() {
            if f.eval_exact(vtx) > *r {
                return Err(Error::CapViolation(vtx.iter().map(to_f64).collect()));
            }
        }
    }
    let mut labels = Vec::new();
    for l in base.labels() {
        let mut n = l.normal().to_vec();
        n.push(0);
        labels.push(AffineForm::new(n, l.offset().clone())?);
    }
    let mut bottom = vec![0; dim];
    bottom.push(1);
    labels.push(AffineForm::new(bottom, rat(0))?);
    for (g, b) in f.pieces() {
        let mut n: Vec<Rational> = g.iter().map(|a| -a).collect();
        n.push(rat(-1));
        labels.push(AffineForm::from_rational(&n, &(r - b))?);
    }
    let q = Polytope::from_halfspaces(labels)?;
    Ok(ToricTestConfig {
        base: base.clone(),
        f: f.clone(),
        r: r.clone(),
        q,
    })
}

impl ToricTestConfig {
    /// Least common denominator of the vertices of every region of
    /// linearity of `f`; dilations by its multiples make all creases
    /// lattice-aligned.
    pub fn crease_denominator(&self) -> Result<BigInt> {
        let cells = self.f.cells(&self.base)?;
        Ok(lcm_of_denominators(cells.iter().flat_map(|(_, c)| c.vertices().iter().flatten())))
    }

    /// `L * {4, 8, ..., 4 count}` with `L` the crease denominator.
    pub fn default_klist(&self, count: usize) -> Result<Vec<u64>> {
        let l = self
            .crease_denominator()?
            .to_u64()
            .ok_or_else(|| Error::Unsupported("crease denominator too large".into()))?;
        Ok((1..=count as u64).map(|i| 4 * i * l).collect())
    }

    fn cap_exact(&self, p: &[Rational]) -> Rational {
        &self.r - self.f.eval_exact(p)
    }
}

fn scaled_point(lambda: &[i64], k: u64) -> Vec<Rational> {
    let kk = BigInt::from(k);
    lambda
        .iter()
        .map(|&x| Rational::new(BigInt::from(x), kk.clone()))
        .collect()
}

/// `W_v(k)` exactly; `v` must be polynomial.
pub fn weight_sum_exact(cfg: &ToricTestConfig, v: &WeightExpr, k: u64) -> Result<Rational> {
    let vp = v.as_polynomial()?;
    let pts = cfg.base.lattice_points(k);
    let mut total = Rational::zero();
    for lambda in &pts.points {
        let p = scaled_point(lambda, k);
        total += cfg.cap_exact(&p) * vp.eval(&p);
    }
    Ok(total)
}

/// `W_v(k)` in floating point.
pub fn weight_sum_f64(cfg: &ToricTestConfig, v: &WeightExpr, k: u64) -> Result<f64> {
    let pts = cfg.base.lattice_points(k);
    let r = to_f64(&cfg.r);
    let mut total = 0.0;
    for lambda in &pts.points {
        let p: Vec<f64> = lambda.iter().map(|&x| x as f64 / k as f64).collect();
        total += (r - cfg.f.eval(&p)) * v.eval(&p)?;
    }
    Ok(total)
}

/// Least-squares fit of `W(k) ~ sum_{t < terms} c_t k^{n - t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit<T> {
    /// Coefficients of `k^n, k^{n-1}, ...`.
    pub coefficients: Vec<T>,
    pub a0: T,
    pub a1: T,
    /// Fitted coefficient of `k^{n-2}` (zero when not fitted).
    pub residual: T,
    /// Sum of squared fit errors.
    pub misfit: T,
}

/// Number of basis terms used when nothing else is known about `W`.
pub const DEFAULT_TERMS: usize = 4;

/// Terms that make the fit exact for a piecewise polynomial integrand of
/// degree `degree` over lattice-aligned cells: `k^n` down to `k^{-degree}`.
pub fn exact_terms(n: usize, degree: u32) -> usize {
    n + degree as usize + 1
}

fn check_samples(ks: &[u64], terms: usize) -> Result<()> {
    let mut distinct = ks.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let need = terms.max(DEFAULT_TERMS);
    if distinct.len() < need {
        return Err(Error::InsufficientSamples {
            need,
            got: distinct.len(),
        });
    }
    if distinct[0] == 0 {
        return Err(Error::schema("klist", "dilations must be positive"));
    }
    Ok(())
}

fn kpow_exact(k: u64, e: i64) -> Rational {
    let kq = rat(k as i64);
    if e >= 0 {
        num_traits::pow(kq, e as usize)
    } else {
        num_traits::pow(kq, (-e) as usize).recip()
    }
}

pub fn fit_expansion_exact(series: &[(u64, Rational)], n: usize, terms: usize) -> Result<ExpansionFit<Rational>> {
    let ks: Vec<u64> = series.iter().map(|s| s.0).collect();
    check_samples(&ks, terms)?;
    let rows: Vec<Vec<Rational>> = ks
        .iter()
        .map(|&k| (0..terms).map(|t| kpow_exact(k, n as i64 - t as i64)).collect())
        .collect();
    let mut ata = vec![vec![Rational::zero(); terms]; terms];
    let mut atb = vec![Rational::zero(); terms];
    for (row, (_, w)) in rows.iter().zip(series) {
        for a in 0..terms {
            atb[a] += &row[a] * w;
            for b in 0..terms {
                ata[a][b] += &row[a] * &row[b];
            }
        }
    }
    let coefficients = solve_exact(&ata, &atb).ok_or(Error::SingularSystem)?;
    let misfit = rows
        .iter()
        .zip(series)
        .map(|(row, (_, w))| {
            let fit: Rational = row.iter().zip(&coefficients).map(|(a, c)| a * c).sum();
            let e = fit - w;
            &e * &e
        })
        .sum();
    Ok(ExpansionFit {
        a0: coefficients[0].clone(),
        a1: coefficients.get(1).cloned().unwrap_or_else(Rational::zero),
        residual: coefficients.get(2).cloned().unwrap_or_else(Rational::zero),
        misfit,
        coefficients,
    })
}

pub fn fit_expansion_f64(series: &[(u64, f64)], n: usize, terms: usize) -> Result<ExpansionFit<f64>> {
    let ks: Vec<u64> = series.iter().map(|s| s.0).collect();
    check_samples(&ks, terms)?;
    let kmax = *ks.iter().max().unwrap() as f64;
    // columns scaled by kmax^{n-t} for conditioning
    let a = DMatrix::from_fn(ks.len(), terms, |i, t| {
        let e = n as i32 - t as i32;
        (ks[i] as f64 / kmax).powi(e)
    });
    let b = DVector::from_iterator(ks.len(), series.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).map_err(|_| Error::SingularSystem)?;
    let misfit = (&a * &x - &b).norm_squared();
    let coefficients: Vec<f64> = (0..terms)
        .map(|t| x[t] / kmax.powi(n as i32 - t as i32))
        .collect();
    Ok(ExpansionFit {
        a0: coefficients[0],
        a1: coefficients.get(1).copied().unwrap_or(0.0),
        residual: coefficients.get(2).copied().unwrap_or(0.0),
        misfit,
        coefficients,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSumSeries<T> {
    pub ks: Vec<u64>,
    pub sums: Vec<T>,
    pub fit: ExpansionFit<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DonaldsonFutaki<T> {
    pub c: T,
    pub a_v0: T,
    pub a_v1: T,
    pub a_w0: T,
    pub df: T,
    pub f_p: T,
    /// `df / f_p`, absent when `f_p = 0`.
    pub ratio: Option<T>,
    pub v_series: WeightSumSeries<T>,
    pub w_series: WeightSumSeries<T>,
}

fn integrand_degree(v: &WeightExpr) -> Option<u32> {
    v.as_polynomial().ok().map(|q| q.total_degree() + 1)
}

fn terms_for(cfg: &ToricTestConfig, v: &WeightExpr, nk: usize) -> usize {
    match integrand_degree(v) {
        Some(d) => exact_terms(cfg.base.dim(), d).min(nk),
        None => DEFAULT_TERMS.min(nk),
    }
}

/// Default dilations: enough lattice-aligned values for an exact fit of
/// both series when the weights are polynomial, and at least four.
pub fn default_klist(cfg: &ToricTestConfig, v: &WeightExpr, w: &WeightExpr) -> Result<Vec<u64>> {
    let n = cfg.base.dim();
    let want = [v, w]
        .iter()
        .map(|x| integrand_degree(x).map_or(DEFAULT_TERMS, |d| exact_terms(n, d)))
        .max()
        .unwrap()
        .max(DEFAULT_TERMS);
    cfg.default_klist(want)
}

pub fn series_exact(cfg: &ToricTestConfig, v: &WeightExpr, klist: &[u64]) -> Result<WeightSumSeries<Rational>> {
    let sums: Vec<Rational> = klist
        .par_iter()
        .map(|&k| weight_sum_exact(cfg, v, k))
        .collect::<Result<_>>()?;
    let series: Vec<(u64, Rational)> = klist.iter().copied().zip(sums.iter().cloned()).collect();
    let fit = fit_expansion_exact(&series, cfg.base.dim(), terms_for(cfg, v, klist.len()))?;
    Ok(WeightSumSeries {
        ks: klist.to_vec(),
        sums,
        fit,
    })
}

pub fn series_f64(cfg: &ToricTestConfig, v: &WeightExpr, klist: &[u64]) -> Result<WeightSumSeries<f64>> {
    let sums: Vec<f64> = klist
        .par_iter()
        .map(|&k| weight_sum_f64(cfg, v, k))
        .collect::<Result<_>>()?;
    let series: Vec<(u64, f64)> = klist.iter().copied().zip(sums.iter().copied()).collect();
    let fit = fit_expansion_f64(&series, cfg.base.dim(), terms_for(cfg, v, klist.len()))?;
    Ok(WeightSumSeries {
        ks: klist.to_vec(),
        sums,
        fit,
    })
}

/// `DF = a_v1 - (c/4) a_w0` next to `F(f)` with the same slope `c`.
pub fn donaldson_futaki(
    cfg: &ToricTestConfig,
    v: &WeightExpr,
    w: &WeightExpr,
    klist: &[u64],
    order: usize,
) -> Result<DonaldsonFutaki<f64>> {
    let c = slope(&cfg.base, v, w, order)?;
    let vs = series_f64(cfg, v, klist)?;
    let ws = series_f64(cfg, w, klist)?;
    let df = vs.fit.a1 - c / 4.0 * ws.fit.a0;
    let f_p = futaki(&cfg.base, v, w, &cfg.f, c, order)?;
    Ok(DonaldsonFutaki {
        c,
        a_v0: vs.fit.a0,
        a_v1: vs.fit.a1,
        a_w0: ws.fit.a0,
        df,
        f_p,
        ratio: (f_p != 0.0).then(|| df / f_p),
        v_series: vs,
        w_series: ws,
    })
}

pub fn donaldson_futaki_exact(
    cfg: &ToricTestConfig,
    v: &WeightExpr,
    w: &WeightExpr,
    klist: &[u64],
) -> Result<DonaldsonFutaki<Rational>> {
    v.check_positive(&cfg.base, "v")?;
    let c = slope_exact(&cfg.base, v, w)?;
    let vs = series_exact(cfg, v, klist)?;
    let ws = series_exact(cfg, w, klist)?;
    let df = &vs.fit.a1 - &c / rat(4) * &ws.fit.a0;
    let f_p = futaki_exact(&cfg.base, v, w, &cfg.f, &c)?;
    Ok(DonaldsonFutaki {
        ratio: (!f_p.is_zero()).then(|| &df / &f_p),
        a_v0: vs.fit.a0.clone(),
        a_v1: vs.fit.a1.clone(),
        a_w0: ws.fit.a0.clone(),
        c,
        df,
        f_p,
        v_series: vs,
        w_series: ws,
    })
}
