//! Experiment driver for the planar weighted-perimeter cluster evolver.
//!
//! Exit codes: 0 success (converged, checks pass), 2 check failure on an
//! otherwise successful run, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use isocluster_core::analyze;
use isocluster_core::doc;

use isocluster_cli::{config, runner, summary, svg};

#[derive(Parser)]
#[command(
    name = "isocluster",
    about = "Evolve planar bubble clusters under the density |x|^p and verify their regularity",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (or all of them) from a configuration file.
    Evolve(EvolveArgs),
    /// Compare converged run summaries at fixed areas and exponent.
    Compare(CompareArgs),
    /// Verify the regularity conditions on a saved cluster document.
    Check(CheckArgs),
    /// Render cluster documents to SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct EvolveArgs {
    /// Configuration file defining the experiments.
    #[arg(long, default_value = "experiments.toml")]
    config: PathBuf,
    /// Experiment name; "all" runs every experiment in file order.
    #[arg(long)]
    experiment: String,
    /// Output directory root.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Override the schedule's RNG seed.
    #[arg(long)]
    rng_seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more summary.json files from converged runs.
    summaries: Vec<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// A cluster document (JSON).
    cluster: PathBuf,
    /// Density exponent override (defaults to the document's).
    #[arg(long)]
    exponent: Option<f64>,
    /// Tolerance on the 120-degree junction condition, degrees.
    #[arg(long, default_value_t = analyze::ANGLE_TOL_DEG)]
    angle_tol: f64,
    /// Bound on the curvature constancy defect.
    #[arg(long, default_value_t = analyze::CURVATURE_DEFECT_TOL)]
    defect_tol: f64,
    /// Also write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Cluster documents to render.
    clusters: Vec<PathBuf>,
    /// Output file (single input) or directory (multiple inputs).
    #[arg(long, default_value = "render")]
    out: PathBuf,
    #[arg(long, default_value_t = 720)]
    width: u32,
    #[arg(long, default_value_t = 720)]
    height: u32,
    /// Suppress the origin plus-marker.
    #[arg(long)]
    no_origin_marker: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; usage errors are not.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Check(args) => cmd_check(args),
        Command::Render(args) => cmd_render(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn cmd_evolve(args: EvolveArgs) -> Result<ExitCode> {
    let (config, index) = config::load_config(&args.config)?;
    let config_dir = args
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));

    let selected: Vec<&config::ExperimentSpec> = if args.experiment == "all" {
        config.experiments.iter().collect()
    } else {
        let idx = *index
            .get(&args.experiment)
            .ok_or_else(|| anyhow!("unknown experiment {:?}", args.experiment))?;
        vec![&config.experiments[idx]]
    };

    let mut all_passed = true;
    for spec in selected {
        println!("== {} ==", spec.name);
        if !spec.description.is_empty() {
            println!("   {}", spec.description);
        }
        let outcome = runner::run_experiment(spec, &config_dir, &args.out_dir, args.rng_seed)?;
        let s = &outcome.summary;
        println!(
            "   p={} perimeter={:.6} residual={:.3e} converged={} checks={}",
            s.exponent,
            s.perimeter,
            s.residual_norm,
            s.converged,
            if s.checks.passed { "pass" } else { "FAIL" }
        );
        for note in &s.checks.notes {
            println!("   note: {note}");
        }
        for t in &s.transitions {
            println!("   transition: {t}");
        }
        println!("   outputs in {}", outcome.out_dir.display());
        all_passed &= s.checks.passed;
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    if args.summaries.len() < 2 {
        bail!("compare needs at least two summary files");
    }
    let runs: Vec<_> = args
        .summaries
        .iter()
        .map(|p| summary::read_summary(p).map(|s| s.comparable()))
        .collect::<Result<_>>()?;
    let comparison = analyze::compare(&runs).map_err(|e| anyhow!("{e}"))?;
    println!("{comparison}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.cluster)
        .with_context(|| format!("reading {}", args.cluster.display()))?;
    let mut cluster = doc::load_cluster(&text).map_err(|e| anyhow!("{e}"))?;
    if let Some(p) = args.exponent {
        cluster.set_density(isocluster_core::DensityField::new(p).map_err(|e| anyhow!("{e}"))?);
    }
    let report = analyze::regularity_report(&cluster, args.angle_tol).map_err(|e| anyhow!("{e}"))?;
    print!("{}", report.to_table());
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    let defect_ok = report
        .arcs
        .iter()
        .filter(|a| {
            a.class != analyze::ArcClass::Insufficient && a.vertex_count >= 5 && !a.origin_local
        })
        .all(|a| a.constancy_defect < args.defect_tol);
    if report.angle_violations.is_empty() && defect_ok {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        if !report.angle_violations.is_empty() {
            println!(
                "junction angle violations at: {}",
                report
                    .angle_violations
                    .iter()
                    .map(|v| format!("v{v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        if !defect_ok {
            println!("curvature constancy defect exceeds {}", args.defect_tol);
        }
        Ok(ExitCode::from(2))
    }
}

fn cmd_render(args: RenderArgs) -> Result<ExitCode> {
    if args.clusters.is_empty() {
        bail!("render needs at least one cluster document");
    }
    let options = config::RenderSpec {
        width: args.width,
        height: args.height,
        origin_marker: !args.no_origin_marker,
        frame_every: 0,
    };
    let multiple = args.clusters.len() > 1;
    if multiple {
        std::fs::create_dir_all(&args.out)?;
    } else if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    for input in &args.clusters {
        let text = std::fs::read_to_string(input)
            .with_context(|| format!("reading {}", input.display()))?;
        let cluster = doc::load_cluster(&text).map_err(|e| anyhow!("{e}"))?;
        let svg_text = svg::render_cluster(&cluster, &options);
        let out_path = if multiple {
            args.out
                .join(input.file_stem().unwrap_or_default())
                .with_extension("svg")
        } else if args.out.extension().is_some() {
            args.out.clone()
        } else {
            std::fs::create_dir_all(&args.out)?;
            args.out
                .join(input.file_stem().unwrap_or_default())
                .with_extension("svg")
        };
        std::fs::write(&out_path, svg_text)
            .with_context(|| format!("writing {}", out_path.display()))?;
        println!("wrote {}", out_path.display());
    }
    Ok(ExitCode::SUCCESS)
}
