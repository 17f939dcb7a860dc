//! One function per subcommand; each returns a table plus warnings.

use crate::error::CliError;
use crate::output::{Cell, Report, Table};
use clap::ValueEnum;
use hardedge::exactseries::{
    c_a_correction, density_hard_series, density_hard_torus, finite_n_gap_series, finite_n_gap_torus, gap_a1_exact,
    gap_a1_finite_n, hard_gap_series, hard_gap_torus,
};
use hardedge::fredholm::{fredholm_det_auto, gap_with_correction, smallest_pdf};
use hardedge::kernels::{rho_hat2, rho_inf0, EnsembleParams, FiniteLaguerreKernel, KernelFn};
use hardedge::painleve::{TauGap, MAX_S};
use hardedge::recurrence::{gap_limit_difference, DensityRecurrence, GapRecurrence, DENSITY_CURVE_VALID_S};
use hardedge::sampler::{figure1_statistic, histogram, SampleConfig, TheoryCurve};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Fredholm,
    Painleve,
    Torus,
    Recurrence,
    #[value(name = "exact-a1")]
    ExactA1,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scaling {
    /// s/(4(N + a/β))
    Optimal,
    /// s/(4N)
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Gap,
    Density,
}

/// (β, a, ξ) shared by most commands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ensemble {
    pub beta: f64,
    pub a: f64,
    pub xi: f64,
}

impl Ensemble {
    pub fn validate(&self) -> Result<(), CliError> {
        EnsembleParams::new(1, self.beta, self.a, self.xi)?;
        Ok(())
    }

    fn int_a(&self) -> Option<usize> {
        (self.a >= 0.0 && self.a.fract() == 0.0 && self.a <= 64.0).then_some(self.a as usize)
    }

    fn require_int_a(&self, max: usize, what: &str) -> Result<usize, CliError> {
        match self.int_a() {
            Some(a) if a <= max => Ok(a),
            _ => Err(CliError::Config(format!("{what} needs integer 0 <= a <= {max}, got {}", self.a))),
        }
    }

    fn require_xi_one(&self, what: &str) -> Result<(), CliError> {
        if self.xi != 1.0 {
            return Err(CliError::Config(format!("{what} supports xi = 1 only, got {}", self.xi)));
        }
        Ok(())
    }

    fn require_beta2(&self, what: &str) -> Result<(), CliError> {
        if self.beta != 2.0 {
            return Err(CliError::Config(format!("{what} needs beta = 2, got {}", self.beta)));
        }
        Ok(())
    }

    fn torus_exact(&self) -> bool {
        let c = 2.0 / self.beta;
        c.fract() == 0.0
    }

    fn scale(&self, n: usize, scaling: Scaling) -> f64 {
        match scaling {
            Scaling::Optimal => 4.0 * (n as f64 + self.a / self.beta),
            Scaling::Naive => 4.0 * n as f64,
        }
    }
}

/// One hard-edge gap evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct HardPoint {
    pub value: f64,
    pub c2: Option<f64>,
    pub c1: Option<f64>,
    pub est_error: Option<f64>,
    pub route: &'static str,
}

pub fn resolve_hard_route(e: &Ensemble, route: Route) -> Result<Route, CliError> {
    Ok(match route {
        Route::Auto if e.beta == 2.0 => Route::Fredholm,
        Route::Auto if e.a == 1.0 && e.xi == 1.0 => Route::ExactA1,
        Route::Auto if e.int_a().is_some_and(|a| a <= 8) && e.xi == 1.0 => Route::Torus,
        Route::Auto => {
            return Err(CliError::Config(format!(
                "no hard-edge route for beta = {}, a = {}, xi = {}",
                e.beta, e.a, e.xi
            )))
        }
        Route::Recurrence => return Err(CliError::Config("the recurrence route needs --n (finite N)".into())),
        r => r,
    })
}

fn collect<T: Send>(v: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    v.into_iter().collect()
}

pub fn hard_gap_points(e: &Ensemble, route: Route, grid: &[f64]) -> Result<Vec<HardPoint>, CliError> {
    e.validate()?;
    match resolve_hard_route(e, route)? {
        Route::Fredholm => {
            e.require_beta2("the fredholm route")?;
            collect(
                grid.par_iter()
                    .map(|&s| {
                        let g = gap_with_correction(e.a, s, e.xi, None)?;
                        Ok(HardPoint {
                            value: g.e_hard,
                            c2: Some(g.c2),
                            c1: None,
                            est_error: Some(g.est_error),
                            route: "fredholm",
                        })
                    })
                    .collect(),
            )
        }
        Route::Painleve => {
            e.require_beta2("the painleve route")?;
            let top = grid.iter().copied().fold(1.0f64, f64::max);
            if top > MAX_S {
                return Err(CliError::Config(format!("the painleve route supports s <= {MAX_S}")));
            }
            let tau = TauGap::new(e.a, e.xi, top)?;
            grid.iter()
                .map(|&s| {
                    let (v, c2) = tau.eval(s)?;
                    Ok(HardPoint { value: v, c2: Some(c2), c1: None, est_error: None, route: "painleve" })
                })
                .collect()
        }
        Route::Torus => {
            e.require_xi_one("the torus route")?;
            let a = e.require_int_a(8, "the torus route")?;
            if e.torus_exact() && a <= 4 {
                collect(
                    grid.iter()
                        .map(|&s| {
                            let r = hard_gap_torus(e.beta, a, s, None)?;
                            Ok(HardPoint {
                                value: r.value,
                                c2: None,
                                c1: Some(r.c1),
                                est_error: Some(r.est_error),
                                route: "torus",
                            })
                        })
                        .collect(),
                )
            } else {
                collect(
                    grid.par_iter()
                        .map(|&s| {
                            let v = hard_gap_series(e.beta, a, s)?;
                            Ok(HardPoint { value: v, c2: None, c1: None, est_error: None, route: "jack-series" })
                        })
                        .collect(),
                )
            }
        }
        Route::ExactA1 => {
            e.require_xi_one("the exact-a1 route")?;
            if e.a != 1.0 {
                return Err(CliError::Config(format!("the exact-a1 route needs a = 1, got {}", e.a)));
            }
            grid.iter()
                .map(|&s| {
                    let (v, c2) = gap_a1_exact(e.beta, s)?;
                    Ok(HardPoint { value: v, c2: Some(c2), c1: None, est_error: None, route: "exact-a1" })
                })
                .collect()
        }
        Route::Recurrence | Route::Auto => unreachable!("resolved above"),
    }
}

/// Value and route error estimate, if any.
pub type FiniteValue = (f64, Option<f64>);

/// Finite-N gap at actual interval ends t.
pub fn finite_gap_values(
    e: &Ensemble,
    n: usize,
    route: Route,
    ts: &[f64],
    bits: usize,
) -> Result<(Vec<FiniteValue>, &'static str), CliError> {
    e.validate()?;
    let route = match route {
        Route::Auto if e.beta == 2.0 => Route::Fredholm,
        Route::Auto if e.a == 1.0 && e.xi == 1.0 => Route::ExactA1,
        Route::Auto if e.int_a().is_some_and(|a| a <= 6) && e.xi == 1.0 => Route::Recurrence,
        Route::Auto => {
            return Err(CliError::Config(format!(
                "no finite-N route for beta = {}, a = {}, xi = {}",
                e.beta, e.a, e.xi
            )))
        }
        r => r,
    };
    match route {
        Route::Fredholm => {
            e.require_beta2("the finite-N fredholm route")?;
            let p = EnsembleParams::new(n, 2.0, e.a, e.xi)?;
            let k = FiniteLaguerreKernel::new(&p)?;
            let v = collect(
                ts.par_iter()
                    .map(|&t| {
                        let d = fredholm_det_auto(&k, t, e.xi)?;
                        Ok((d.value, Some(d.est_error)))
                    })
                    .collect(),
            )?;
            Ok((v, "fredholm"))
        }
        Route::Recurrence => {
            e.require_xi_one("the recurrence route")?;
            let a = e.require_int_a(6, "the recurrence route")?;
            let g = GapRecurrence::new(n, e.beta, a as u32, bits)?;
            let v = collect(ts.iter().map(|&t| Ok((g.eval(t)?, None))).collect())?;
            Ok((v, "recurrence"))
        }
        Route::Torus => {
            e.require_xi_one("the torus route")?;
            let a = e.require_int_a(8, "the torus route")?;
            if e.torus_exact() && a <= 4 {
                let v = collect(
                    ts.iter()
                        .map(|&t| {
                            let r = finite_n_gap_torus(e.beta, a, n, t, None)?;
                            Ok((r.value, Some(r.est_error)))
                        })
                        .collect(),
                )?;
                Ok((v, "torus"))
            } else {
                let v = collect(ts.par_iter().map(|&t| Ok((finite_n_gap_series(e.beta, a, n, t)?, None))).collect())?;
                Ok((v, "jack-series"))
            }
        }
        Route::ExactA1 => {
            e.require_xi_one("the exact-a1 route")?;
            if e.a != 1.0 {
                return Err(CliError::Config(format!("the exact-a1 route needs a = 1, got {}", e.a)));
            }
            let v = collect(ts.iter().map(|&t| Ok((gap_a1_finite_n(e.beta, n, t)?, None))).collect())?;
            Ok((v, "exact-a1"))
        }
        Route::Painleve => Err(CliError::Config("the painleve route is hard-edge only; drop --n".into())),
        Route::Auto => unreachable!(),
    }
}

pub fn gap(
    e: &Ensemble,
    n: Option<usize>,
    route: Route,
    scaling: Scaling,
    grid: &[f64],
    bits: usize,
) -> Result<Report, CliError> {
    let mut report = Report::default();
    match n {
        None => {
            let pts = hard_gap_points(e, route, grid)?;
            let mut t = Table::new(&["s", "value", "correction_n2", "correction_n1", "route", "est_error"]);
            for (&s, p) in grid.iter().zip(&pts) {
                t.push(vec![s.into(), p.value.into(), p.c2.into(), p.c1.into(), p.route.into(), p.est_error.into()]);
            }
            report.table = t;
        }
        Some(n) => {
            let c = e.scale(n, scaling);
            let ts: Vec<f64> = grid.iter().map(|s| s / c).collect();
            let (vals, label) = finite_gap_values(e, n, route, &ts, bits)?;
            let mut t = Table::new(&["s", "t", "value", "route", "est_error"]);
            for ((&s, &tt), (v, err)) in grid.iter().zip(&ts).zip(&vals) {
                t.push(vec![s.into(), tt.into(), (*v).into(), label.into(), (*err).into()]);
            }
            report.table = t;
        }
    }
    Ok(report)
}

pub fn pdf(e: &Ensemble, grid: &[f64]) -> Result<Report, CliError> {
    e.validate()?;
    e.require_beta2("pdf")?;
    let vals = collect(grid.par_iter().map(|&s| smallest_pdf(e.a, s, e.xi, None).map_err(CliError::from)).collect())?;
    let mut t = Table::new(&["s", "value", "correction_n2", "route"]);
    for (&s, (p0, p2)) in grid.iter().zip(&vals) {
        t.push(vec![s.into(), (*p0).into(), (*p2).into(), "fredholm".into()]);
    }
    Ok(Report { table: t, ..Default::default() })
}

pub fn density(e: &Ensemble, n: Option<usize>, route: Route, grid: &[f64], bits: usize) -> Result<Report, CliError> {
    e.validate()?;
    e.require_xi_one("density")?;
    if grid.iter().any(|&s| !(s > 0.0)) {
        return Err(CliError::Config("density grids must be strictly positive".into()));
    }
    let even_beta = (e.beta.fract() == 0.0 && (e.beta as u32).is_multiple_of(2)).then_some(e.beta as u32);
    let mut report = Report::default();
    match n {
        None => {
            let mut t = Table::new(&["s", "value", "correction_n2", "correction_n1", "route", "est_error"]);
            let use_kernel = e.beta == 2.0 && matches!(route, Route::Auto | Route::Fredholm);
            if use_kernel {
                for &s in grid {
                    t.push(vec![
                        s.into(),
                        rho_inf0(e.a, s).into(),
                        rho_hat2(e.a, s).into(),
                        Cell::Empty,
                        "kernel".into(),
                        Cell::Empty,
                    ]);
                }
            } else if matches!(route, Route::Auto | Route::Torus) {
                let beta = even_beta
                    .ok_or_else(|| CliError::Config(format!("hard-edge density needs even beta, got {}", e.beta)))?;
                for &s in grid {
                    if beta <= 4 && ((2.0 * e.a + 2.0) / beta as f64).fract() == 0.0 {
                        let r = density_hard_torus(beta, e.a, s, None)?;
                        t.push(vec![
                            s.into(),
                            r.rho0.into(),
                            Cell::Empty,
                            r.c1.into(),
                            "torus".into(),
                            r.est_error.into(),
                        ]);
                    } else {
                        let v = density_hard_series(beta, e.a, s)?;
                        t.push(vec![s.into(), v.into(), Cell::Empty, Cell::Empty, "jack-series".into(), Cell::Empty]);
                    }
                }
            } else {
                return Err(CliError::Config(format!("route {route:?} does not provide hard-edge densities")));
            }
            report.table = t;
        }
        Some(n) => {
            let c = e.scale(n, Scaling::Optimal);
            let mut t = Table::new(&["s", "t", "value", "route"]);
            let use_kernel = e.beta == 2.0 && matches!(route, Route::Auto | Route::Fredholm);
            if use_kernel {
                let k = FiniteLaguerreKernel::new(&EnsembleParams::unitary(n, e.a)?)?;
                for &s in grid {
                    t.push(vec![s.into(), (s / c).into(), (k.diag(s / c) / c).into(), "kernel".into()]);
                }
            } else if matches!(route, Route::Auto | Route::Recurrence) {
                let beta =
                    even_beta.ok_or_else(|| CliError::Config("finite-N density needs beta in {2, 4, 6}".into()))?;
                let d = DensityRecurrence::new(n, beta, e.a, bits)?;
                for &s in grid {
                    t.push(vec![s.into(), (s / c).into(), d.eval_scaled(s)?.into(), "recurrence".into()]);
                }
            } else {
                return Err(CliError::Config(format!("route {route:?} does not provide finite-N densities")));
            }
            report.table = t;
        }
    }
    Ok(report)
}

pub fn correction(e: &Ensemble, grid: &[f64]) -> Result<Report, CliError> {
    e.validate()?;
    e.require_xi_one("correction")?;
    let a = e.require_int_a(4, "correction")?;
    let mut t = Table::new(&["s", "direct", "identity", "identity_fd", "route"]);
    for &s in grid {
        let c = c_a_correction(e.beta, a, s, None)?;
        t.push(vec![s.into(), c.direct.into(), c.identity.into(), c.identity_fd.into(), "torus".into()]);
    }
    Ok(Report { table: t, ..Default::default() })
}

pub fn painleve(e: &Ensemble, grid: &[f64]) -> Result<Report, CliError> {
    e.validate()?;
    e.require_beta2("painleve")?;
    if grid.iter().any(|&s| !(s > 0.0)) {
        return Err(CliError::Config("painleve grids must be strictly positive".into()));
    }
    let top = grid.iter().copied().fold(0.0f64, f64::max);
    if top > MAX_S {
        return Err(CliError::Config(format!("painleve supports s <= {MAX_S}")));
    }
    let tau = TauGap::new(e.a, e.xi, top)?;
    let traj = tau.trajectory();
    let mut t = Table::new(&["s", "sigma0", "sigma0_prime", "sigma0_second", "value", "correction_n2", "residual"]);
    for &s in grid {
        let (sg, sp, spp) = traj.sigma_at(s)?;
        let (v, c2) = tau.eval(s)?;
        t.push(vec![s.into(), sg.into(), sp.into(), spp.into(), v.into(), c2.into(), traj.residual(s)?.into()]);
    }
    Ok(Report { table: t, ..Default::default() })
}

pub fn recurrence(
    e: &Ensemble,
    ns: &[usize],
    n0: usize,
    quantity: Quantity,
    grid: &[f64],
    bits: usize,
) -> Result<Report, CliError> {
    e.validate()?;
    e.require_xi_one("recurrence")?;
    let a = e.require_int_a(6, "recurrence")?;
    let nmax = ns.iter().copied().max().unwrap_or(0);
    if n0 < 20 * nmax {
        return Err(CliError::Config(format!("--n0 {n0} must be at least 20 x max N = {}", 20 * nmax)));
    }
    let mut header = vec!["s".to_string()];
    header.extend(ns.iter().map(|n| format!("n2_diff_N{n}")));
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut warnings = Vec::new();
    match quantity {
        Quantity::Gap => {
            let g0 = GapRecurrence::new(n0, e.beta, a as u32, bits)?;
            for &n in ns {
                let g = GapRecurrence::new(n, e.beta, a as u32, bits)?;
                columns.push(gap_limit_difference(&g, &g0, grid)?);
            }
        }
        Quantity::Density => {
            let beta = (e.beta.fract() == 0.0 && matches!(e.beta as u32, 2 | 4 | 6))
                .then_some(e.beta as u32)
                .ok_or_else(|| CliError::Config("density curves need beta in {2, 4, 6}".into()))?;
            if grid.iter().any(|&s| !(s > 0.0)) {
                return Err(CliError::Config("density grids must be strictly positive".into()));
            }
            let d0 = DensityRecurrence::new(n0, beta, a as f64, bits)?;
            let base: Vec<f64> = collect(grid.iter().map(|&s| Ok(d0.eval_scaled(s)?)).collect())?;
            for &n in ns {
                let d = DensityRecurrence::new(n, beta, a as f64, bits)?;
                let nn = (n as f64).powi(2);
                columns
                    .push(collect(grid.iter().zip(&base).map(|(&s, b)| Ok(nn * (d.eval_scaled(s)? - b))).collect())?);
            }
            if grid.iter().any(|&s| s > DENSITY_CURVE_VALID_S) {
                warnings.push(format!(
                    "density limit-difference curves do not track the limit reliably beyond s = {DENSITY_CURVE_VALID_S}"
                ));
            }
        }
    }
    let mut t = Table { header, rows: Vec::new() };
    for (i, &s) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(s)];
        row.extend(columns.iter().map(|c| Cell::Num(c[i])));
        t.push(row);
    }
    Ok(Report { table: t, warnings, notes: Vec::new() })
}

pub struct McArgs {
    pub n: usize,
    pub samples: usize,
    pub bins: usize,
    pub s_max: f64,
    pub seed: u64,
}

pub fn mc(e: &Ensemble, args: &McArgs) -> Result<Report, CliError> {
    let cfg = SampleConfig {
        params: EnsembleParams::new(args.n, e.beta, e.a, e.xi)?,
        n_samples: args.samples,
        seed: args.seed,
        bins: args.bins,
        s_max: args.s_max,
    };
    cfg.validate()?;
    let w = args.s_max / args.bins as f64;
    let edges: Vec<f64> = (0..=args.bins).map(|i| i as f64 * w).collect();
    let theory = if e.beta == 2.0 {
        let pts = collect(
            edges
                .par_iter()
                .map(|&s| {
                    let g = gap_with_correction(e.a, s, e.xi, None)?;
                    Ok((g.e_hard, g.c2))
                })
                .collect(),
        )?;
        Some(pts)
    } else if e.a == 1.0 && e.xi == 1.0 {
        Some(collect(edges.iter().map(|&s| Ok(gap_a1_exact(e.beta, s)?)).collect())?)
    } else {
        None
    };
    let mut report = Report::default();
    match theory {
        Some(pts) => {
            let curve =
                TheoryCurve { e_hard: pts.iter().map(|p| p.0).collect(), c2: pts.iter().map(|p| p.1).collect() };
            let f = figure1_statistic(&cfg, &curve)?;
            let h = &f.histogram;
            let mut t = Table::new(&[
                "bin_lo",
                "bin_hi",
                "count",
                "density",
                "std_error",
                "scaled_difference",
                "scaled_std_error",
                "predicted",
                "z",
            ]);
            for i in 0..args.bins {
                t.push(vec![
                    h.bin_edges[i].into(),
                    h.bin_edges[i + 1].into(),
                    h.counts[i].into(),
                    h.normalized_density[i].into(),
                    h.std_errors[i].into(),
                    f.scaled_difference[i].into(),
                    f.scaled_std_error[i].into(),
                    f.predicted[i].into(),
                    f.z_scores[i].into(),
                ]);
            }
            report.notes.push(format!(
                "{:.1}% of bins within 3 sigma; mass beyond s_max {:.3e}",
                100.0 * f.fraction_within(3.0),
                h.mass_beyond
            ));
            report.warnings = f.warnings.clone();
            report.table = t;
        }
        None => {
            let h = histogram(&cfg)?;
            let mut t = Table::new(&["bin_lo", "bin_hi", "count", "density", "std_error"]);
            for i in 0..args.bins {
                t.push(vec![
                    h.bin_edges[i].into(),
                    h.bin_edges[i + 1].into(),
                    h.counts[i].into(),
                    h.normalized_density[i].into(),
                    h.std_errors[i].into(),
                ]);
            }
            report.warnings.push("no theory curve for these parameters; histogram only".into());
            report.table = t;
        }
    }
    Ok(report)
}

/// (a/β) s dE/ds by a Richardson-extrapolated central difference.
fn naive_coefficient(e: &Ensemble, route: Route, s: f64) -> Result<f64, CliError> {
    let h = 1e-2 * s.max(1.0);
    let d = |h: f64| -> Result<f64, CliError> {
        let v = hard_gap_points(e, route, &[s - h, s + h])?;
        Ok((v[1].value - v[0].value) / (2.0 * h))
    };
    let (d1, d2) = (d(h)?, d(h / 2.0)?);
    Ok(e.a / e.beta * s * (d2 + (d2 - d1) / 3.0))
}

pub fn convergence(
    e: &Ensemble,
    ns: &[usize],
    grid: &[f64],
    scaling: Scaling,
    route: Route,
    bits: usize,
) -> Result<Report, CliError> {
    let hard = hard_gap_points(e, Route::Auto, grid)?;
    let mut t = Table::new(&["N", "s", "value_n", "value_hard", "scaled_difference", "ratio", "predicted", "route"]);
    let mut prev: Vec<Option<f64>> = vec![None; grid.len()];
    let predicted: Vec<Option<f64>> = match scaling {
        Scaling::Optimal => hard.iter().map(|p| p.c2).collect(),
        Scaling::Naive => collect(
            grid.iter()
                .zip(&hard)
                .map(|(&s, p)| match p.c1 {
                    Some(c) => Ok(Some(c)),
                    None if s > 0.0 => naive_coefficient(e, Route::Auto, s).map(Some),
                    None => Ok(Some(0.0)),
                })
                .collect(),
        )?,
    };
    for &n in ns {
        let c = e.scale(n, scaling);
        let ts: Vec<f64> = grid.iter().map(|s| s / c).collect();
        let (vals, label) = finite_gap_values(e, n, route, &ts, bits)?;
        let power = match scaling {
            Scaling::Optimal => 2,
            Scaling::Naive => 1,
        };
        for (i, &s) in grid.iter().enumerate() {
            let diff = (n as f64).powi(power) * (vals[i].0 - hard[i].value);
            let ratio = prev[i].map(|p| diff / p);
            prev[i] = Some(diff);
            t.push(vec![
                n.into(),
                s.into(),
                vals[i].0.into(),
                hard[i].value.into(),
                diff.into(),
                ratio.into(),
                predicted[i].into(),
                label.into(),
            ]);
        }
    }
    Ok(Report { table: t, ..Default::default() })
}
