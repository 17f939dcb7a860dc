//! Route-agreement suites.

use crate::commands::{finite_gap_values, hard_gap_points, Ensemble, Route, Scaling};
use crate::error::CliError;
use crate::output::{Report, Table};
use clap::ValueEnum;
use hardedge::exactseries::{gap_a1_exact, hard_gap_torus};
use hardedge::fredholm::gap_with_correction_kernel;
use hardedge::kernels::{rho_hat2, rho_inf0, BesselFamilyKernel, EnsembleParams, FiniteLaguerreKernel, KernelFn};
use hardedge::painleve::TauGap;
use hardedge::recurrence::GapRecurrence;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Quick,
    Full,
}

struct Check {
    pair: String,
    params: String,
    max_diff: f64,
    at_s: f64,
    tol: f64,
}

impl Check {
    fn from_series(pair: &str, params: String, grid: &[f64], a: &[f64], b: &[f64], tol: f64) -> Self {
        let (mut max_diff, mut at_s) = (0.0f64, f64::NAN);
        for ((&s, x), y) in grid.iter().zip(a).zip(b) {
            let d = (x - y).abs();
            if !(d <= max_diff) {
                max_diff = d;
                at_s = s;
            }
        }
        Self { pair: pair.into(), params, max_diff, at_s, tol }
    }

    fn passed(&self) -> bool {
        self.max_diff <= self.tol
    }
}

fn grid(count: usize, top: f64) -> Vec<f64> {
    (1..=count).map(|i| top * i as f64 / count as f64).collect()
}

/// (E, c2) pairs from Fredholm with the correction kernel scaled by 1 + perturb.
fn fredholm_pairs(a: f64, grid: &[f64], perturb: f64) -> Result<Vec<(f64, f64)>, CliError> {
    let l2 = BesselFamilyKernel::l2hat(a).scaled(1.0 + perturb);
    grid.par_iter()
        .map(|&s| {
            let g = gap_with_correction_kernel(a, s, 1.0, None, &l2)?;
            Ok((g.e_hard, g.c2))
        })
        .collect()
}

fn beta2_checks(count: usize, perturb: f64, out: &mut Vec<Check>) -> Result<(), CliError> {
    let g = grid(count, 20.0);
    for a in 0..=2u32 {
        let af = a as f64;
        let label = format!("beta=2 a={a}");
        let fred = fredholm_pairs(af, &g, perturb)?;
        let tau = TauGap::new(af, 1.0, 20.0)?;
        let pain: Vec<(f64, f64)> = g.iter().map(|&s| tau.eval(s)).collect::<Result<_, _>>()?;
        let torus: Vec<f64> =
            g.iter().map(|&s| hard_gap_torus(2.0, a as usize, s, None).map(|r| r.value)).collect::<Result<_, _>>()?;
        let (fe, fc): (Vec<f64>, Vec<f64>) = fred.into_iter().unzip();
        let (pe, pc): (Vec<f64>, Vec<f64>) = pain.into_iter().unzip();
        out.push(Check::from_series("gap fredholm/painleve", label.clone(), &g, &fe, &pe, 1e-6));
        out.push(Check::from_series("gap fredholm/torus", label.clone(), &g, &fe, &torus, 1e-6));
        out.push(Check::from_series("gap painleve/torus", label.clone(), &g, &pe, &torus, 1e-6));
        out.push(Check::from_series("c2 fredholm/painleve", label.clone(), &g, &fc, &pc, 1e-5));
        if a == 1 {
            let ex: Vec<(f64, f64)> = g.iter().map(|&s| gap_a1_exact(2.0, s)).collect::<Result<_, _>>()?;
            let (ee, ec): (Vec<f64>, Vec<f64>) = ex.into_iter().unzip();
            out.push(Check::from_series("gap fredholm/exact-a1", label.clone(), &g, &fe, &ee, 1e-6));
            out.push(Check::from_series("c2 fredholm/exact-a1", label.clone(), &g, &fc, &ec, 1e-5));
            out.push(Check::from_series("c2 painleve/exact-a1", label, &g, &pc, &ec, 1e-5));
        }
    }
    Ok(())
}

/// Hard-edge torus vs the a = 1 closed form at β where 2/β is an integer.
fn general_beta_checks(count: usize, out: &mut Vec<Check>) -> Result<(), CliError> {
    let g = grid(count, 20.0);
    for beta in [1.0, 2.0 / 3.0] {
        let e = Ensemble { beta, a: 1.0, xi: 1.0 };
        let torus: Vec<f64> = hard_gap_points(&e, Route::Torus, &g)?.iter().map(|p| p.value).collect();
        let exact: Vec<f64> = hard_gap_points(&e, Route::ExactA1, &g)?.iter().map(|p| p.value).collect();
        out.push(Check::from_series("gap torus/exact-a1", format!("beta={beta:.4} a=1"), &g, &torus, &exact, 1e-6));
    }
    Ok(())
}

/// Finite-N routes at the same t.
fn finite_checks(count: usize, bits: usize, out: &mut Vec<Check>) -> Result<(), CliError> {
    let g = grid(count, 20.0);
    let n = 20;
    let e = Ensemble { beta: 2.0, a: 1.0, xi: 1.0 };
    let ts: Vec<f64> = g.iter().map(|s| s / (4.0 * n as f64 + 2.0)).collect();
    let fred: Vec<f64> = finite_gap_values(&e, n, Route::Fredholm, &ts, bits)?.0.iter().map(|v| v.0).collect();
    let rec: Vec<f64> = finite_gap_values(&e, n, Route::Recurrence, &ts, bits)?.0.iter().map(|v| v.0).collect();
    let ex: Vec<f64> = finite_gap_values(&e, n, Route::ExactA1, &ts, bits)?.0.iter().map(|v| v.0).collect();
    out.push(Check::from_series("finite fredholm/recurrence", "beta=2 a=1 N=20".into(), &g, &fred, &rec, 1e-7));
    out.push(Check::from_series("finite recurrence/exact-a1", "beta=2 a=1 N=20".into(), &g, &rec, &ex, 1e-7));
    for &(beta, a) in &[(1.0f64, 2usize), (3.0, 1)] {
        let e = Ensemble { beta, a: a as f64, xi: 1.0 };
        let c = 4.0 * (n as f64 + a as f64 / beta);
        let ts: Vec<f64> = g.iter().map(|s| s / c).collect();
        let rec: Vec<f64> = finite_gap_values(&e, n, Route::Recurrence, &ts, bits)?.0.iter().map(|v| v.0).collect();
        let tor: Vec<f64> = finite_gap_values(&e, n, Route::Torus, &ts, bits)?.0.iter().map(|v| v.0).collect();
        out.push(Check::from_series(
            "finite recurrence/torus",
            format!("beta={beta} a={a} N={n}"),
            &g,
            &rec,
            &tor,
            1e-7,
        ));
    }
    Ok(())
}

/// Successive N²-difference ratios and the naive-scaling coefficient.
fn rate_checks(bits: usize, out: &mut Vec<Check>) -> Result<(), CliError> {
    let s = 8.0;
    let ns = [50usize, 100, 200];
    for &(beta, a) in &[(2.0f64, 1u32), (3.0, 1), (6.0, 2)] {
        let e = Ensemble { beta, a: a as f64, xi: 1.0 };
        let label = format!("beta={beta} a={a} s={s}");
        let hard = hard_gap_points(&e, Route::Auto, &[s])?[0].value;
        let mut diffs = Vec::new();
        for &n in &ns {
            let g = GapRecurrence::new(n, beta, a, bits)?;
            let t = s / (4.0 * (n as f64 + a as f64 / beta));
            diffs.push((n as f64).powi(2) * (g.eval(t)? - hard));
        }
        let worst = diffs.windows(2).map(|w| ((w[1] / w[0]).ln()).abs()).fold(0.0f64, f64::max);
        // ratio within [0.8, 1.25] iff |ln ratio| ≤ ln 1.25
        out.push(Check {
            pair: "N^2 ratio".into(),
            params: label.clone(),
            max_diff: worst,
            at_s: s,
            tol: 1.25f64.ln(),
        });

        let naive = crate::commands::convergence(&e, &[200], &[s], Scaling::Naive, Route::Recurrence, bits)?;
        let row = &naive.table.rows[0];
        let (got, want) = match (&row[4], &row[6]) {
            (crate::output::Cell::Num(x), crate::output::Cell::Num(y)) => (*x, *y),
            _ => return Err(CliError::Numerical("missing naive-scaling coefficient".into())),
        };
        out.push(Check {
            pair: "naive N coefficient (relative)".into(),
            params: label,
            max_diff: ((got - want) / want).abs(),
            at_s: s,
            tol: 0.02,
        });
    }
    Ok(())
}

/// Kernel-diagonal density expansion at N = 400.
fn density_checks(out: &mut Vec<Check>) -> Result<(), CliError> {
    let n = 400usize;
    for a in [0.0f64, 1.0] {
        let k = FiniteLaguerreKernel::new(&EnsembleParams::unitary(n, a)?)?;
        let c = 4.0 * n as f64 + 2.0 * a;
        let xs = [1.0, 4.0, 9.0];
        let mut worst = (0.0f64, f64::NAN);
        for &x in &xs {
            let d = (n as f64).powi(2) * (k.diag(x / c) / c - rho_inf0(a, x));
            let r = ((d - rho_hat2(a, x)) / rho_hat2(a, x)).abs();
            if !(r <= worst.0) {
                worst = (r, x);
            }
        }
        out.push(Check {
            pair: "density N^2 term (relative)".into(),
            params: format!("beta=2 a={a} N={n}"),
            max_diff: worst.0,
            at_s: worst.1,
            tol: 0.01,
        });
    }
    Ok(())
}

/// Runs the suite; a breach is reported alongside the table.
pub fn cross_validate(suite: Suite, bits: usize, perturb: f64) -> Result<(Report, Option<String>), CliError> {
    let mut checks = Vec::new();
    let count = match suite {
        Suite::Quick => 8,
        Suite::Full => 40,
    };
    beta2_checks(count, perturb, &mut checks)?;
    general_beta_checks(count, &mut checks)?;
    finite_checks(count, bits, &mut checks)?;
    density_checks(&mut checks)?;
    if suite == Suite::Full {
        rate_checks(bits, &mut checks)?;
    }
    let mut t = Table::new(&["pair", "params", "max_discrepancy", "at_s", "tolerance", "status"]);
    let mut failures = Vec::new();
    for c in &checks {
        let ok = c.passed();
        if !ok {
            failures.push(format!("{} ({}) at s = {}: {:.3e} > {:.1e}", c.pair, c.params, c.at_s, c.max_diff, c.tol));
        }
        t.push(vec![
            c.pair.as_str().into(),
            c.params.as_str().into(),
            c.max_diff.into(),
            c.at_s.into(),
            c.tol.into(),
            if ok { "pass" } else { "FAIL" }.into(),
        ]);
    }
    let report = Report {
        table: t,
        warnings: Vec::new(),
        notes: vec![format!("{} checks, {} failed", checks.len(), failures.len())],
    };
    Ok((report, (!failures.is_empty()).then(|| failures.join("; "))))
}
