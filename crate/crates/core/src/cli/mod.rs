//! Command dispatch for the `kstab` binary.

pub mod config;
pub mod report;

use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::abreu::{self, PotentialKind, ScalMethod, SymplecticPotential};
use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::invariants::{self, torus_volume};
use crate::pbundle::{self, Positivity};
use crate::poly::RationalPoly;
use crate::quad::DEFAULT_ORDER;
use crate::rational::{parse_rational, to_f64, Rational};
use crate::testconfig::{self, DISCREPANCY_NOTE, REFERENCE_RATIO};
use crate::weights::WeightExpr;

pub use config::{JobConfig, MethodSpec, Pipeline};
use report::{fmt_float, num, nums, q, qs, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_COMPUTATION
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Slope,
    Wext,
    Futaki,
    Scan,
    Abreu,
    Df,
    PbundleSolve,
    PbundleFutaki,
    PbundleReport,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Slope,
        Command::Wext,
        Command::Futaki,
        Command::Scan,
        Command::Abreu,
        Command::Df,
        Command::PbundleSolve,
        Command::PbundleFutaki,
        Command::PbundleReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Slope => "slope",
            Command::Wext => "wext",
            Command::Futaki => "futaki",
            Command::Scan => "scan",
            Command::Abreu => "abreu",
            Command::Df => "df",
            Command::PbundleSolve => "pbundle-solve",
            Command::PbundleFutaki => "pbundle-futaki",
            Command::PbundleReport => "pbundle-report",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub pipeline: Option<Pipeline>,
    pub order: Option<usize>,
    /// `z0` values for `pbundle-futaki`, as rational strings.
    pub z0: Option<Vec<String>>,
    /// Multiply Futaki-type values by `(2 pi)^dim`.
    pub torus_factor: bool,
    pub timing: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: Command,
    pub config: Value,
    pub pipeline: Pipeline,
    pub results: Value,
    pub table: Option<Table>,
    pub wall_time: Option<f64>,
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command.name()));
        m.insert("config".into(), self.config.clone());
        m.insert("pipeline".into(), json!(self.pipeline.tag()));
        m.insert("results".into(), self.results.clone());
        if let Some(t) = self.wall_time {
            m.insert("wall_time_s".into(), num(t));
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        report::to_json(&self.to_value())
    }
}

/// Float and exact records of one command, before tagging.
struct Records {
    float: Option<Map<String, Value>>,
    exact: Option<Map<String, Value>>,
    table: Option<Table>,
}

pub fn run(command: Command, config: &JobConfig, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let mut resolved = config.clone();
    let pipeline = opts.pipeline.or(config.pipeline).unwrap_or_default();
    let order = opts.order.or(config.order).unwrap_or(DEFAULT_ORDER);
    if order == 0 {
        return Err(Error::schema("order", "must be positive"));
    }
    resolved.pipeline = Some(pipeline);
    resolved.order = Some(order);
    if let Some(z0) = &opts.z0 {
        resolved.z0 = Some(
            z0.iter()
                .map(|s| parse_rational(s).map(config::Q))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::schema("z0", e.to_string()))?,
        );
    }
    let ctx = Ctx {
        cfg: &resolved,
        pipeline,
        order,
        torus_factor: opts.torus_factor,
    };
    let mut klist = None;
    let recs = match command {
        Command::Slope => ctx.slope()?,
        Command::Wext => ctx.wext()?,
        Command::Futaki => ctx.futaki()?,
        Command::Scan => ctx.scan()?,
        Command::Abreu => ctx.abreu()?,
        Command::Df => ctx.df(&mut klist)?,
        Command::PbundleSolve => ctx.pbundle_solve()?,
        Command::PbundleFutaki => ctx.pbundle_futaki()?,
        Command::PbundleReport => ctx.pbundle_report()?,
    };
    if klist.is_some() {
        resolved.klist = klist;
    }
    let results = tag(recs.float, recs.exact);
    Ok(Report {
        command,
        config: serde_json::to_value(&resolved).expect("config serializes"),
        pipeline,
        results,
        table: recs.table,
        wall_time: opts.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

fn tag(float: Option<Map<String, Value>>, exact: Option<Map<String, Value>>) -> Value {
    match (float, exact) {
        (Some(mut f), None) => {
            f.insert("pipeline".into(), json!("float"));
            Value::Object(f)
        }
        (None, Some(mut e)) => {
            e.insert("pipeline".into(), json!("exact"));
            Value::Object(e)
        }
        (Some(f), Some(e)) => {
            let div = report::divergences(&f, &e);
            json!({
                "pipeline": "both",
                "float": f,
                "exact": e,
                "divergence": div,
            })
        }
        (None, None) => unreachable!("a pipeline is always selected"),
    }
}

macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = Map::new();
        $( m.insert($k.to_string(), $v); )*
        m
    }};
}

struct Ctx<'a> {
    cfg: &'a JobConfig,
    pipeline: Pipeline,
    order: usize,
    torus_factor: bool,
}

impl Ctx<'_> {
    fn scale(&self, p: &Polytope) -> f64 {
        if self.torus_factor {
            torus_volume(p.dim())
        } else {
            1.0
        }
    }

    /// Exact records stay polytope-normalized; the factor is irrational.
    fn reject_exact_torus(&self) -> Result<()> {
        if self.torus_factor && self.pipeline.exact() {
            return Err(Error::Unsupported("--torus-factor with the exact pipeline".into()));
        }
        Ok(())
    }

    fn toric(&self) -> Result<(Polytope, WeightExpr, WeightExpr)> {
        if self.cfg.factors.is_some() {
            return Err(Error::schema("factors", "only used by pbundle commands"));
        }
        let p = self.cfg.polytope()?;
        let (v, w) = self.cfg.weights(&p)?;
        Ok((p, v, w))
    }

    fn slope(&self) -> Result<Records> {
        let (p, v, w) = self.toric()?;
        let float = self
            .pipeline
            .float()
            .then(|| -> Result<_> { Ok(record! {"value" => num(invariants::slope(&p, &v, &w, self.order)?)}) })
            .transpose()?;
        let exact = self
            .pipeline
            .exact()
            .then(|| -> Result<_> { Ok(record! {"value" => q(&invariants::slope_exact(&p, &v, &w)?)}) })
            .transpose()?;
        Ok(Records {
            float,
            exact,
            table: None,
        })
    }

    fn wext(&self) -> Result<Records> {
        let (p, v, w) = self.toric()?;
        let float = self
            .pipeline
            .float()
            .then(|| -> Result<_> {
                let ext = invariants::solve_w_ext(&p, &v, &w, self.order)?;
                let ww = w.product(&ext.to_weight()?)?;
                let check = invariants::slope(&p, &v, &ww, self.order)?;
                Ok(record! {
                    "xi" => nums(&ext.xi),
                    "c" => num(ext.c),
                    "gram_condition" => num(ext.gram_condition),
                    "orthogonality_residual" => num(ext.residual),
                    "slope_check" => num(check),
                })
            })
            .transpose()?;
        let exact = self
            .pipeline
            .exact()
            .then(|| -> Result<_> {
                let (xi, c) = invariants::solve_w_ext_exact(&p, &v, &w)?;
                let ext = WeightExpr::from_polynomial(&RationalPoly::affine(&xi, &c));
                let check = invariants::slope_exact(&p, &v, &w.product(&ext)?)?;
                Ok(record! {
                    "xi" => qs(&xi),
                    "c" => q(&c),
                    "slope_check" => q(&check),
                })
            })
            .transpose()?;
        Ok(Records {
            float,
            exact,
            table: None,
        })
    }

    fn futaki(&self) -> Result<Records> {
        self.reject_exact_torus()?;
        let (p, v, w) = self.toric()?;
        let f = self.cfg.plconvex(p.dim())?;
        let s = self.scale(&p);
        let fixed_c = self.cfg.c.as_ref().map(|c| c.0.clone());
        let float = self
            .pipeline
            .float()
            .then(|| -> Result<_> {
                let c = match &fixed_c {
                    Some(c) => to_f64(c),
                    None => invariants::slope(&p, &v, &w, self.order)?,
                };
                let value = invariants::futaki(&p, &v, &w, &f, c, self.order)?;
                let rel = invariants::relative_futaki(&p, &v, &w, &f, self.order)?;
                Ok(record! {
                    "value" => num(s * value),
                    "c" => num(c),
                    "relative_value" => num(s * rel),
                })
            })
            .transpose()?;
        let exact = self
            .pipeline
            .exact()
            .then(|| -> Result<_> {
                let c = match &fixed_c {
                    Some(c) => c.clone(),
                    None => invariants::slope_exact(&p, &v, &w)?,
                };
                Ok(record! {
                    "value" => q(&invariants::futaki_exact(&p, &v, &w, &f, &c)?),
                    "c" => q(&c),
                    "relative_value" => q(&invariants::relative_futaki_exact(&p, &v, &w, &f)?),
                })
            })
            .transpose()?;
        Ok(Records {
            float,
            exact,
            table: None,
        })
    }

    fn scan(&self) -> Result<Records> {
        self.reject_exact_torus()?;
        let (p, v, w) = self.toric()?;
        let spec = self.cfg.scan.clone().unwrap_or_default();
        let candidates: Vec<(Vec<Rational>, Rational)> = match &spec.candidates {
            Some(cs) => cs
                .iter()
                .map(|c| (c.direction.iter().map(|x| x.0.clone()).collect(), c.offset.0.clone()))
                .collect(),
            None => invariants::default_scan_grid(&p, spec.steps.unwrap_or(8)),
        };
        let s = self.scale(&p);
        let entries = invariants::scan_destabilizers(&p, &v, &w, &candidates, self.order)?;
        let c_exact = if self.pipeline.exact() {
            Some(invariants::slope_exact(&p, &v, &w)?)
        } else {
            None
        };
        let mut table = Table::new(&["direction", "offset", "value"]);
        let mut float_rows = Vec::new();
        let mut exact_rows = Vec::new();
        for e in &entries {
            let dir = qs(&e.direction);
            let dir_text: Vec<String> = e.direction.iter().map(crate::rational::fmt_rational).collect();
            table.push(vec![
                dir_text.join(" "),
                crate::rational::fmt_rational(&e.offset),
                fmt_float(s * e.value),
            ]);
            float_rows.push(json!({"direction": dir, "offset": q(&e.offset), "value": num(s * e.value)}));
            if let Some(c) = &c_exact {
                let x = invariants::futaki_exact(&p, &v, &w, &e.function(), c)?;
                exact_rows.push(json!({"direction": dir, "offset": q(&e.offset), "value": q(&x)}));
            }
        }
        let float = if self.pipeline.float() {
            Some(record! {
                "entries" => Value::Array(float_rows),
                "c" => num(invariants::slope(&p, &v, &w, self.order)?),
            })
        } else {
            None
        };
        let exact = c_exact.map(|c| {
            record! {
                "entries" => Value::Array(exact_rows),
                "c" => q(&c),
            }
        });
        Ok(Records {
            float,
            exact,
            table: Some(table),
        })
    }

    fn abreu(&self) -> Result<Records> {
        if self.pipeline.exact() {
            return Err(Error::Unsupported("abreu has no exact pipeline".into()));
        }
        let (p, v, w) = self.toric()?;
        let kind = match self.cfg.potential(&p)? {
            Some(phi) => PotentialKind::GuilleminPlus(phi),
            None => PotentialKind::Guillemin,
        };
        let analytic_ok = matches!(kind, PotentialKind::Guillemin);
        let u = SymplecticPotential::new(&p, kind);
        let method = self.cfg.method.unwrap_or(if analytic_ok {
            MethodSpec::Analytic
        } else {
            MethodSpec::FiniteDifference
        });
        let points: Vec<Vec<f64>> = match &self.cfg.points {
            Some(pts) => pts
                .iter()
                .enumerate()
                .map(|(i, pt)| {
                    if pt.len() != p.dim() {
                        return Err(Error::schema(
                            format!("points[{i}]"),
                            format!("expected {} coordinates", p.dim()),
                        ));
                    }
                    Ok(pt.iter().map(|x| to_f64(&x.0)).collect())
                })
                .collect::<Result<_>>()?,
            None => default_abreu_grid(&p),
        };
        let mut rec = Map::new();
        let mut table = Table::new(&["point", "scal_v", "residual"]);
        let eval = |m: ScalMethod| -> Result<Vec<f64>> {
            points.iter().map(|x| abreu::scal_v_with(&u, &v, x, m)).collect()
        };
        let (values, residuals) = match method {
            MethodSpec::Analytic => (eval(ScalMethod::Analytic)?, None),
            MethodSpec::FiniteDifference => (eval(ScalMethod::FiniteDifference)?, None),
            MethodSpec::Both => {
                let a = eval(ScalMethod::Analytic)?;
                let fd = eval(ScalMethod::FiniteDifference)?;
                let r: Vec<f64> = a.iter().zip(&fd).map(|(x, y)| (x - y).abs()).collect();
                (a, Some(r))
            }
        };
        for (i, x) in points.iter().enumerate() {
            let coords: Vec<String> = x.iter().map(|c| fmt_float(*c)).collect();
            table.push(vec![
                coords.join(" "),
                fmt_float(values[i]),
                residuals.as_ref().map_or(String::new(), |r| fmt_float(r[i])),
            ]);
        }
        rec.insert("points".into(), Value::Array(points.iter().map(|x| nums(x)).collect()));
        rec.insert("scal_v".into(), nums(&values));
        rec.insert(
            "method".into(),
            json!(match method {
                MethodSpec::Analytic => "analytic",
                MethodSpec::FiniteDifference => "finite-difference",
                MethodSpec::Both => "both",
            }),
        );
        if let Some(r) = residuals {
            rec.insert("residuals".into(), nums(&r));
        }
        if let Some(f) = self.cfg.test_function(&p)? {
            let c = match &self.cfg.c {
                Some(c) => to_f64(&c.0),
                None => invariants::slope(&p, &v, &w, self.order)?,
            };
            let chk = abreu::check_futaki_identity(&p, &u, &v, &w, &f, c, self.order)?;
            rec.insert(
                "identity".into(),
                json!({
                    "epsilons": nums(&chk.epsilons),
                    "lhs": nums(&chk.lhs),
                    "rhs": nums(&chk.rhs),
                    "lhs_extrapolated": num(chk.lhs_extrapolated),
                    "rhs_extrapolated": num(chk.rhs_extrapolated),
                    "residual": num(chk.residual),
                }),
            );
        }
        Ok(Records {
            float: Some(rec),
            exact: None,
            table: Some(table),
        })
    }

    fn df(&self, klist_out: &mut Option<Vec<u64>>) -> Result<Records> {
        self.reject_exact_torus()?;
        let (p, v, w) = self.toric()?;
        let f = self.cfg.plconvex(p.dim())?;
        let cfg = testconfig::build_config(&p, &f, &self.cfg.cap()?)?;
        let klist = match &self.cfg.klist {
            Some(k) => k.clone(),
            None => testconfig::default_klist(&cfg, &v, &w)?,
        };
        *klist_out = Some(klist.clone());
        let s = self.scale(&p);
        let mut table = Table::new(&["k", "pipeline", "W_v", "W_w"]);
        let float = if self.pipeline.float() {
            let r = testconfig::donaldson_futaki(&cfg, &v, &w, &klist, self.order)?;
            for (i, k) in klist.iter().enumerate() {
                table.push(vec![
                    k.to_string(),
                    "float".into(),
                    fmt_float(r.v_series.sums[i]),
                    fmt_float(r.w_series.sums[i]),
                ]);
            }
            Some(record! {
                "c" => num(r.c),
                "a_v0" => num(r.a_v0),
                "a_v1" => num(r.a_v1),
                "a_w0" => num(r.a_w0),
                "df" => num(s * r.df),
                "f_p" => num(s * r.f_p),
                "ratio" => r.ratio.map_or(Value::Null, num),
                "v_sums" => nums(&r.v_series.sums),
                "w_sums" => nums(&r.w_series.sums),
                "fit_residual" => nums(&[r.v_series.fit.residual, r.w_series.fit.residual]),
                "fit_misfit" => nums(&[r.v_series.fit.misfit, r.w_series.fit.misfit]),
            })
        } else {
            None
        };
        let exact = if self.pipeline.exact() {
            let r = testconfig::donaldson_futaki_exact(&cfg, &v, &w, &klist)?;
            for (i, k) in klist.iter().enumerate() {
                table.push(vec![
                    k.to_string(),
                    "exact".into(),
                    crate::rational::fmt_rational(&r.v_series.sums[i]),
                    crate::rational::fmt_rational(&r.w_series.sums[i]),
                ]);
            }
            Some(record! {
                "c" => q(&r.c),
                "a_v0" => q(&r.a_v0),
                "a_v1" => q(&r.a_v1),
                "a_w0" => q(&r.a_w0),
                "df" => q(&r.df),
                "f_p" => q(&r.f_p),
                "ratio" => r.ratio.as_ref().map_or(Value::Null, q),
                "v_sums" => qs(&r.v_series.sums),
                "w_sums" => qs(&r.w_series.sums),
                "fit_residual" => qs(&[r.v_series.fit.residual.clone(), r.w_series.fit.residual.clone()]),
                "fit_misfit" => qs(&[r.v_series.fit.misfit.clone(), r.w_series.fit.misfit.clone()]),
            })
        } else {
            None
        };
        let add_ref = |m: Option<Map<String, Value>>| {
            m.map(|mut m| {
                m.insert("reference_ratio".into(), num(REFERENCE_RATIO));
                m.insert("note".into(), json!(DISCREPANCY_NOTE));
                m
            })
        };
        Ok(Records {
            float: add_ref(float),
            exact: add_ref(exact),
            table: Some(table),
        })
    }

    fn pbundle_solve(&self) -> Result<Records> {
        let data = self.cfg.admissible()?;
        let float = if self.pipeline.float() {
            let (a1, a2) = pbundle::solve_w_ext_ode(&data)?;
            let sol = pbundle::solve_theta(&data, a1, a2)?;
            Some(record! {
                "a1" => num(a1),
                "a2" => num(a2),
                "phi_coefficients" => nums(&sol.phi_coefficients()),
                "boundary_residuals" => nums(&sol.boundary_residuals),
            })
        } else {
            None
        };
        let exact = if self.pipeline.exact() {
            let (a1, a2) = pbundle::solve_w_ext_ode_exact(&data)?;
            let sol = pbundle::solve_theta_exact(&data, &a1, &a2)?;
            let pbundle::Phi::Exact(phi) = &sol.phi else {
                unreachable!("exact solve")
            };
            Some(record! {
                "a1" => q(&a1),
                "a2" => q(&a2),
                "phi_coefficients" => qs(phi.coeffs()),
                "phi" => json!(phi.to_string()),
                "theta" => sol.theta_exact().map_or(Value::Null, |t| json!(t.to_string())),
                "boundary_residuals" => nums(&sol.boundary_residuals),
            })
        } else {
            None
        };
        Ok(Records {
            float,
            exact,
            table: None,
        })
    }

    fn z0_values(&self) -> Vec<Rational> {
        match &self.cfg.z0 {
            Some(z) => z.iter().map(|x| x.0.clone()).collect(),
            None => pbundle::z0_grid(),
        }
    }

    fn pbundle_futaki(&self) -> Result<Records> {
        let data = self.cfg.admissible()?;
        let z0s = self.z0_values();
        for (i, z) in z0s.iter().enumerate() {
            let zf = to_f64(z);
            if !(zf > -1.0 && zf < 1.0) {
                return Err(Error::schema(format!("z0[{i}]"), Error::Z0OutOfRange(zf).to_string()));
            }
        }
        let mut table = Table::new(&["z0", "pipeline", "futaki"]);
        let float = if self.pipeline.float() {
            let (a1, a2) = pbundle::solve_w_ext_ode(&data)?;
            let vals = z0s
                .iter()
                .map(|z| pbundle::futaki_z0(&data, a1, a2, to_f64(z)))
                .collect::<Result<Vec<_>>>()?;
            for (z, x) in z0s.iter().zip(&vals) {
                table.push(vec![crate::rational::fmt_rational(z), "float".into(), fmt_float(*x)]);
            }
            Some(record! {"z0" => qs(&z0s), "futaki" => nums(&vals), "a1" => num(a1), "a2" => num(a2)})
        } else {
            None
        };
        let exact = if self.pipeline.exact() {
            let (a1, a2) = pbundle::solve_w_ext_ode_exact(&data)?;
            let vals = z0s
                .iter()
                .map(|z| pbundle::futaki_z0_exact(&data, &a1, &a2, z))
                .collect::<Result<Vec<_>>>()?;
            for (z, x) in z0s.iter().zip(&vals) {
                table.push(vec![
                    crate::rational::fmt_rational(z),
                    "exact".into(),
                    crate::rational::fmt_rational(x),
                ]);
            }
            Some(record! {"z0" => qs(&z0s), "futaki" => qs(&vals), "a1" => q(&a1), "a2" => q(&a2)})
        } else {
            None
        };
        Ok(Records {
            float,
            exact,
            table: Some(table),
        })
    }

    fn pbundle_report(&self) -> Result<Records> {
        let data = self.cfg.admissible()?;
        let mut table = Table::new(&["z0", "pipeline", "futaki", "profile"]);
        let mut one = |exact: bool| -> Result<Map<String, Value>> {
            let rep = pbundle::stability_report(&data, exact)?;
            let tagname = if exact { "exact" } else { "float" };
            for pt in &rep.curve {
                table.push(vec![
                    fmt_float(pt.z0),
                    tagname.into(),
                    fmt_float(pt.futaki),
                    fmt_float(pt.profile),
                ]);
            }
            let zeros = match &rep.positivity.verdict {
                Positivity::PositiveOnOpenInterval => Vec::new(),
                Positivity::NonpositiveAt(z) => z.clone(),
            };
            let mut m = record! {
                "verdict" => json!(if rep.exists { "exists" } else { "obstructed" }),
                "positivity" => json!({
                    "method": rep.positivity.method,
                    "margin": num(rep.positivity.margin),
                    "nonpositive_at": nums(&zeros),
                }),
                "identity_residual" => num(rep.identity_residual),
                "destabilizing_z0" => rep.destabilizing_z0.map_or(Value::Null, num),
                "curve" => json!({
                    "z0": nums(&rep.curve.iter().map(|p| p.z0).collect::<Vec<_>>()),
                    "futaki": nums(&rep.curve.iter().map(|p| p.futaki).collect::<Vec<_>>()),
                    "profile": nums(&rep.curve.iter().map(|p| p.profile).collect::<Vec<_>>()),
                }),
                "boundary_residuals" => nums(&rep.solution.boundary_residuals),
            };
            match &rep.solution.exact_a {
                Some((a1, a2)) => {
                    m.insert("a1".into(), q(a1));
                    m.insert("a2".into(), q(a2));
                    m.insert(
                        "theta".into(),
                        rep.solution.theta_exact().map_or(Value::Null, |t| json!(t.to_string())),
                    );
                }
                None => {
                    m.insert("a1".into(), num(rep.solution.a1));
                    m.insert("a2".into(), num(rep.solution.a2));
                    m.insert("phi_coefficients".into(), nums(&rep.solution.phi_coefficients()));
                }
            }
            Ok(m)
        };
        let float = self.pipeline.float().then(|| one(false)).transpose()?;
        let exact = self.pipeline.exact().then(|| one(true)).transpose()?;
        Ok(Records {
            float,
            exact,
            table: Some(table),
        })
    }
}

/// Interior grid points: 19 per axis across the bounding box, kept when
/// their distance to the boundary is at least a tenth of the inradius.
fn default_abreu_grid(p: &Polytope) -> Vec<Vec<f64>> {
    let (lo, hi) = p.bounding_box();
    let lo: Vec<f64> = lo.iter().map(to_f64).collect();
    let hi: Vec<f64> = hi.iter().map(to_f64).collect();
    let dim = p.dim();
    let per = 19usize;
    let min_dist = 0.1 * p.inradius();
    let mut out = Vec::new();
    for code in 0..per.pow(dim as u32) {
        let mut c = code;
        let x: Vec<f64> = (0..dim)
            .map(|i| {
                let t = (c % per + 1) as f64 / (per + 1) as f64;
                c /= per;
                lo[i] + (hi[i] - lo[i]) * t
            })
            .collect();
        if p.boundary_distance(&x) >= min_dist {
            out.push(x);
        }
    }
    out
}
