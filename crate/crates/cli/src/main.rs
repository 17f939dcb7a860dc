#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod grid;
mod output;
mod validate;

use clap::{Args, Parser, Subcommand};
use commands::{Ensemble, McArgs, Quantity, Route, Scaling};
use error::CliError;
use grid::{parse_count, parse_list, GridSpec};
use output::Report;
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

const GRID_HELP: &str = "grid `min:max:count[:log|:lin]` or a single value";

#[derive(Parser, Debug)]
#[command(name = "hardedge", version, about = "Hard-edge statistics of the Laguerre beta ensemble")]
struct Cli {
    /// CSV destination; also writes `<out>.json` with config and timing. Stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script `<out>.gp` (needs --out).
    #[arg(long, global = true)]
    plot_script: bool,
    /// Working precision of the recurrence route.
    #[arg(long, global = true, env = "HARDEDGE_PRECISION_BITS", default_value_t = hardedge::recurrence::DEFAULT_PRECISION_BITS)]
    precision_bits: usize,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "HARDEDGE_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct EnsembleArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Retention probability of each eigenvalue.
    #[arg(long, default_value_t = 1.0)]
    xi: f64,
}

impl From<EnsembleArgs> for Ensemble {
    fn from(e: EnsembleArgs) -> Self {
        Ensemble { beta: e.beta, a: e.a, xi: e.xi }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gap probability E(0; (0, s)); hard edge, or finite N with --N.
    Gap {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "s", help = GRID_HELP)]
        s: String,
        #[arg(long = "N", value_parser = parse_count)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "auto")]
        route: Route,
        #[arg(long, value_enum, default_value = "optimal")]
        scaling: Scaling,
    },
    /// Smallest-eigenvalue density and its 1/N² term (beta = 2).
    Pdf {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "s", help = GRID_HELP)]
        s: String,
    },
    /// Spectral density; hard edge, or finite N with --N (scaled by 4(N + a/beta)).
    Density {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "s", help = GRID_HELP)]
        s: String,
        #[arg(long = "N", value_parser = parse_count)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "auto")]
        route: Route,
    },
    /// Both sides of the 1/N-coefficient identity for the torus average.
    Correction {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "s", help = GRID_HELP)]
        s: String,
    },
    /// Sigma-form trajectory, gap and correction, with the ODE residual.
    Painleve {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "s", help = GRID_HELP)]
        s: String,
    },
    /// N²-scaled differences from a large-N0 reference.
    Recurrence {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "s", help = GRID_HELP)]
        s: String,
        /// Comma-separated N values.
        #[arg(long = "N")]
        n: String,
        #[arg(long = "N0", value_parser = parse_count, default_value = "2000")]
        n0: usize,
        #[arg(long, value_enum, default_value = "gap")]
        quantity: Quantity,
    },
    /// Monte Carlo histogram of the scaled smallest eigenvalue with z-scores.
    Mc {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "N", value_parser = parse_count)]
        n: usize,
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        samples: usize,
        #[arg(long, value_parser = parse_count, default_value = "100")]
        bins: usize,
        #[arg(long, default_value_t = 100.0)]
        smax: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scaled differences E_N − E_hard over N, with successive ratios.
    Convergence {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "N")]
        n: String,
        #[arg(long = "s", help = GRID_HELP)]
        s: String,
        #[arg(long, value_enum, default_value = "optimal")]
        scaling: Scaling,
        /// Finite-N route.
        #[arg(long, value_enum, default_value = "auto")]
        route: Route,
    },
    /// Route-agreement suite; exit 1 on any breach.
    CrossValidate {
        #[arg(long, value_enum, default_value = "quick")]
        suite: validate::Suite,
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_l2hat: f64,
    },
}

fn points(text: &str) -> Result<Vec<f64>, CliError> {
    Ok(GridSpec::parse(text)?.points())
}

fn n_list(text: &str) -> Result<Vec<usize>, CliError> {
    parse_list(text).map_err(CliError::Config)
}

fn run(cli: &Cli) -> Result<(Report, serde_json::Value, Option<String>), CliError> {
    let bits = cli.precision_bits;
    let common = json!({ "precision_bits": bits, "threads": cli.threads });
    let (report, config, breach) = match &cli.command {
        Command::Gap { ens, s, n, route, scaling } => {
            let g = points(s)?;
            let r = commands::gap(&(*ens).into(), *n, *route, *scaling, &g, bits)?;
            let cfg = json!({"command": "gap", "beta": ens.beta, "a": ens.a, "xi": ens.xi, "s": s, "N": n,
                "route": format!("{route:?}"), "scaling": format!("{scaling:?}")});
            (r, cfg, None)
        }
        Command::Pdf { ens, s } => {
            let r = commands::pdf(&(*ens).into(), &points(s)?)?;
            (r, json!({"command": "pdf", "beta": ens.beta, "a": ens.a, "xi": ens.xi, "s": s}), None)
        }
        Command::Density { ens, s, n, route } => {
            let r = commands::density(&(*ens).into(), *n, *route, &points(s)?, bits)?;
            let cfg = json!({"command": "density", "beta": ens.beta, "a": ens.a, "xi": ens.xi, "s": s, "N": n,
                "route": format!("{route:?}")});
            (r, cfg, None)
        }
        Command::Correction { ens, s } => {
            let r = commands::correction(&(*ens).into(), &points(s)?)?;
            (r, json!({"command": "correction", "beta": ens.beta, "a": ens.a, "s": s}), None)
        }
        Command::Painleve { ens, s } => {
            let r = commands::painleve(&(*ens).into(), &points(s)?)?;
            (r, json!({"command": "painleve", "beta": ens.beta, "a": ens.a, "xi": ens.xi, "s": s}), None)
        }
        Command::Recurrence { ens, s, n, n0, quantity } => {
            let ns = n_list(n)?;
            let r = commands::recurrence(&(*ens).into(), &ns, *n0, *quantity, &points(s)?, bits)?;
            let cfg = json!({"command": "recurrence", "beta": ens.beta, "a": ens.a, "s": s, "N": ns, "N0": n0,
                "quantity": format!("{quantity:?}")});
            (r, cfg, None)
        }
        Command::Mc { ens, n, samples, bins, smax, seed } => {
            let args = McArgs { n: *n, samples: *samples, bins: *bins, s_max: *smax, seed: *seed };
            let r = commands::mc(&(*ens).into(), &args)?;
            let cfg = json!({"command": "mc", "beta": ens.beta, "a": ens.a, "xi": ens.xi, "N": n, "samples": samples,
                "bins": bins, "smax": smax, "seed": seed});
            (r, cfg, None)
        }
        Command::Convergence { ens, n, s, scaling, route } => {
            let ns = n_list(n)?;
            let r = commands::convergence(&(*ens).into(), &ns, &points(s)?, *scaling, *route, bits)?;
            let cfg = json!({"command": "convergence", "beta": ens.beta, "a": ens.a, "xi": ens.xi, "N": ns, "s": s,
                "scaling": format!("{scaling:?}"), "route": format!("{route:?}")});
            (r, cfg, None)
        }
        Command::CrossValidate { suite, perturb_l2hat } => {
            let (r, breach) = validate::cross_validate(*suite, bits, *perturb_l2hat)?;
            let cfg =
                json!({"command": "cross-validate", "suite": format!("{suite:?}"), "perturb_l2hat": perturb_l2hat});
            (r, cfg, breach)
        }
    };
    let mut config = config;
    config["common"] = common;
    Ok((report, config, breach))
}

fn main() {
    let cli = Cli::parse();
    if cli.plot_script && cli.out.is_none() {
        eprintln!("configuration error: --plot-script needs --out");
        std::process::exit(2);
    }
    if cli.precision_bits < 64 {
        eprintln!("configuration error: --precision-bits must be at least 64");
        std::process::exit(2);
    }
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("configuration error: thread pool: {e}");
            std::process::exit(2);
        }
    }
    let started_at = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let result = run(&cli).and_then(|(report, config, breach)| {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        for n in &report.notes {
            eprintln!("{n}");
        }
        output::write_outputs(
            &report,
            cli.out.as_deref(),
            config,
            &started_at,
            clock.elapsed().as_secs_f64(),
            cli.plot_script,
        )?;
        breach.map_or(Ok(()), |b| Err(CliError::Breach(b)))
    });
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
