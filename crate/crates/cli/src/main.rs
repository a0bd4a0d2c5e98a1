use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde_json::json;

use geopath::density::{density_breakdown, Route};
use geopath::development::{coarsen, develop, sample_brownian};
use geopath::experiments::{run_convergence, run_ui_diagnostic, run_verify, ExperimentConfig};
use geopath::wiener::{fredholm_nystrom_with, fredholm_series, KernelDiscretization, KERNEL_SCALE};
use geopath::{Kernel, Manifold, Matrix};

#[derive(Parser)]
#[command(name = "geopath", version, about = "Piecewise-geodesic path integral experiments")]
struct Cli {
    /// Flat key-value JSON config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the self-check suite.
    Verify,
    /// Densities of Brownian-coarsened drivers, one JSON line per sample.
    Rho {
        /// `euclidean:<d>` or `sphere:<d>:<radius>`.
        #[arg(long)]
        manifold: Option<String>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, default_value = "both")]
        route: String,
    },
    /// Limiting Fredholm determinant.
    Fredholm {
        /// Use `Γ ≡ value·I` instead of a sampled development.
        #[arg(long)]
        gamma_const: Option<f64>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Coupled convergence experiment.
    Converge,
    /// Uniform-integrability diagnostic.
    UiDiag,
}

fn parse_manifold(s: &str) -> anyhow::Result<Manifold> {
    let parts: Vec<&str> = s.split(':').collect();
    let m = match parts.as_slice() {
        ["euclidean", d] => Manifold::euclidean(d.parse()?)?,
        ["sphere", d, r] => Manifold::sphere(d.parse()?, r.parse()?)?,
        _ => bail!("expected `euclidean:<d>` or `sphere:<d>:<radius>`, got `{s}`"),
    };
    Ok(m)
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, name: &str, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), text.clone() + "\n")?;
    }
    println!("{text}");
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = load_config(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Verify => {
            let report = run_verify();
            for c in &report.checks {
                println!("{:4} {:<44} {:>9.1} ms  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.millis, c.detail);
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            }
            Ok(report.all_passed())
        }
        Command::Rho { manifold, n, samples, route } => {
            let m = match manifold {
                Some(s) => parse_manifold(s)?,
                None => cfg.manifold,
            };
            let route: Route = route.parse()?;
            let mut lines = Vec::with_capacity(*samples);
            for j in 0..*samples {
                let fine = sample_brownian::<f64>(cfg.seed, j as u64, cfg.n_fine.max(*n) / n * n, m.dim)?;
                let b = density_breakdown(&m, &coarsen(&fine, *n)?, &cfg.density, route)?;
                let line = serde_json::to_string(&json!({ "sample": j, "n": n, "breakdown": b }))?;
                println!("{line}");
                lines.push(line);
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("rho.jsonl"), lines.join("\n") + "\n")?;
            }
            Ok(true)
        }
        Command::Fredholm { gamma_const, nodes, kmax } => {
            let nodes = nodes.unwrap_or(cfg.wiener_nodes);
            let kmax = kmax.unwrap_or(cfg.kmax);
            let m = &cfg.manifold;
            let kernel = match gamma_const {
                Some(g) => Kernel::constant(nodes, &(Matrix::identity(m.dim, m.dim) * *g))?,
                None => {
                    let fine = sample_brownian::<f64>(cfg.seed, 0, cfg.n_fine, m.dim)?;
                    let sigma = develop(m, &fine, cfg.substeps, cfg.integrator)?;
                    KernelDiscretization::from_path(m, &sigma, nodes)?
                }
            };
            let ny = fredholm_nystrom_with(&kernel, KERNEL_SCALE, true)?;
            let series = fredholm_series(&kernel, KERNEL_SCALE, kmax).ok();
            let mut value = json!({
                "gamma": series.as_ref().map(|s| s.gamma),
                "log_det": ny.log_det,
                "diagnostics": { "nystrom": ny.diagnostics, "series": series },
            });
            if let Some(g) = gamma_const {
                let oracle = m.dim as f64 * (g * KERNEL_SCALE).sqrt().cosh().ln();
                value["diagnostics"]["cosh_oracle"] = json!(oracle);
            }
            emit(out, "fredholm.json", &value)?;
            Ok(true)
        }
        Command::Converge => {
            let report = run_convergence(&cfg)?;
            if let Some(dir) = out {
                report.write(dir)?;
            }
            print!("{}", report.to_csv());
            Ok(true)
        }
        Command::UiDiag => {
            let report = run_ui_diagnostic(&cfg)?;
            emit(out, "report.json", &serde_json::to_value(&report)?)?;
            Ok(report.all_finite() && report.total_violations() == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
