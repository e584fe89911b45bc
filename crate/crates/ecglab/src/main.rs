//! ecglab: extremal cocycle growth and stable-field experiments for
//! concrete geometric group actions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ecglab::runner::config::{resolve_config, ConfigOverlay};
use ecglab::runner::run_and_write;

#[derive(Parser)]
#[command(
    name = "ecglab",
    version,
    about = "Extremal cocycle growth for geometric group actions and the \
             partial-maxima dichotomy of group-indexed stable fields"
)]
struct Cli {
    /// Flat key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides file and ECGLAB_SEED)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ModelArgs {
    /// Model: tree-full, tree-subgroup, circle-harmonic
    #[arg(long)]
    model: Option<String>,

    /// Free-group rank d
    #[arg(long)]
    rank: Option<u32>,

    /// Subgroup: full, zk:1,0 or c2c3:x,y
    #[arg(long)]
    subgroup: Option<String>,

    /// Boundary measure: subgroup-patterson or ambient-uniform
    #[arg(long)]
    measure: Option<String>,

    /// Orbit-weight depth of the empirical Patterson measure
    #[arg(long)]
    ps_depth: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the normalized extremal cocycle curve C_n
    Ecg {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n_min: Option<u32>,
        #[arg(long)]
        n_max: Option<u32>,
        /// Boundary samples per point
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Exact subgroup growth ratios V_H(1,1,m)/(2d-1)^m
    Growth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        m_min: Option<u32>,
        #[arg(long)]
        m_max: Option<u32>,
    },
    /// Partial-maxima dichotomy experiment for the stable field
    Maxima {
        #[command(flatten)]
        model: ModelArgs,
        /// Stability index in (0, 2)
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated ball radii
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Series truncation J
        #[arg(long)]
        series_terms: Option<usize>,
    },
    /// Reproduce the radius-log 3 hyperbolic-plane worked example
    Sl2zExample,
    /// Run the full invariant suite (exit code 2 on any failure)
    Validate,
}

fn overlay_from_cli(cli: &Cli) -> ConfigOverlay {
    let mut o = ConfigOverlay::default();
    if let Some(seed) = cli.seed {
        o.set("seed", seed.to_string());
    }
    if let Some(out) = &cli.out {
        o.set("out", out.display().to_string());
    }
    if let Some(threads) = cli.threads {
        o.set("threads", threads.to_string());
    }
    {
        let o = &mut o;
        let mut apply_model = |m: &ModelArgs| {
            if let Some(v) = &m.model {
                o.set("model", v);
            }
            if let Some(v) = m.rank {
                o.set("rank", v.to_string());
            }
            if let Some(v) = &m.subgroup {
                o.set("subgroup", v);
            }
            if let Some(v) = &m.measure {
                o.set("measure", v);
            }
            if let Some(v) = m.ps_depth {
                o.set("ps_depth", v.to_string());
            }
        };
        match &cli.command {
            Command::Ecg { model, .. }
            | Command::Growth { model, .. }
            | Command::Maxima { model, .. } => apply_model(model),
            _ => {}
        }
    }
    match &cli.command {
        Command::Ecg {
            n_min,
            n_max,
            samples,
            ..
        } => {
            o.set("kind", "ecg");
            if let Some(v) = n_min {
                o.set("n_min", v.to_string());
            }
            if let Some(v) = n_max {
                o.set("n_max", v.to_string());
            }
            if let Some(v) = samples {
                o.set("samples", v.to_string());
            }
        }
        Command::Growth { m_min, m_max, .. } => {
            o.set("kind", "growth");
            if let Some(v) = m_min {
                o.set("m_min", v.to_string());
            }
            if let Some(v) = m_max {
                o.set("m_max", v.to_string());
            }
        }
        Command::Maxima {
            alpha,
            radii,
            replicates,
            series_terms,
            ..
        } => {
            o.set("kind", "maxima");
            if let Some(v) = alpha {
                o.set("alpha", v.to_string());
            }
            if let Some(v) = radii {
                o.set("radii", v);
            }
            if let Some(v) = replicates {
                o.set("replicates", v.to_string());
            }
            if let Some(v) = series_terms {
                o.set("series_terms", v.to_string());
            }
        }
        Command::Sl2zExample => {
            o.set("kind", "sl2z-example");
        }
        Command::Validate => {
            o.set("kind", "validate");
        }
    }
    o
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overlay = overlay_from_cli(&cli);
    let env_seed = std::env::var("ECGLAB_SEED").ok();
    let config = match resolve_config(cli.config.as_deref(), &overlay, env_seed.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ecglab: {e}");
            return ExitCode::from(1);
        }
    };
    match run_and_write(&config) {
        Ok((outcome, record)) => {
            for f in &record.outputs {
                println!(
                    "wrote {}/{} ({})",
                    config.out.display(),
                    f.name,
                    &f.sha256[..12]
                );
            }
            if config.kind == ecglab::runner::config::ExperimentKind::Validate {
                print_validation(&outcome);
                if outcome.failures > 0 {
                    eprintln!("ecglab: {} validation check(s) failed", outcome.failures);
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ecglab: {e}");
            ExitCode::from(1)
        }
    }
}

fn print_validation(outcome: &ecglab::runner::RunOutcome) {
    let summary = outcome
        .bundle
        .files
        .iter()
        .find(|f| f.name == "summary.json");
    if let Some(summary) = summary {
        if let Ok(json) = serde_json::from_slice::<serde_json::Value>(&summary.bytes) {
            if let Some(results) = json["results"].as_array() {
                for r in results {
                    let pass = r["pass"].as_bool().unwrap_or(false);
                    println!(
                        "{} {} — {}",
                        if pass { "PASS" } else { "FAIL" },
                        r["name"].as_str().unwrap_or("?"),
                        r["detail"].as_str().unwrap_or("")
                    );
                }
            }
        }
    }
}
