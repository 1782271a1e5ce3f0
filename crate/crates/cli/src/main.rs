use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gnsq_cli::{cmd_halftone, cmd_quantize, cmd_sweep, graph_info, load_config, ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "gnsq", version, about = "Noise-shaping quantization experiments on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    config: PathBuf,
    /// Override a config value, e.g. `--set bandwidth.r=20` or `--set seeds[0]=7`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Replace the seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run on a single thread.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "GNSQ_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize synthesized bandlimited signals at one bandwidth.
    Quantize(Common),
    /// Sweep bandwidths or sample counts and tabulate errors.
    Sweep(Common),
    /// Quantize a rescaled point-cloud coordinate and compare methods.
    Halftone(Common),
    /// Print size, degrees, spectral gap and incoherence.
    GraphInfo {
        #[command(flatten)]
        common: Common,
        /// Bandwidths to report incoherence for (repeatable).
        #[arg(short, long)]
        r: Vec<usize>,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = load_config(&common.config, &common.overrides)?;
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Quantize(c) | Command::Sweep(c) | Command::Halftone(c) => c,
        Command::GraphInfo { common, .. } => common,
    };
    let threads = if common.deterministic { 1 } else { common.threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    let cfg = load(common)?;
    pool.install(|| match &cli.command {
        Command::Quantize(_) | Command::Sweep(_) | Command::Halftone(_) => {
            let report = match cli.command {
                Command::Quantize(_) => cmd_quantize(&cfg)?,
                Command::Sweep(_) => cmd_sweep(&cfg)?,
                _ => cmd_halftone(&cfg)?,
            };
            println!("wrote {} rows and {} files to {}", report.rows.len(), report.files.len(), cfg.output.display());
            for c in &report.comparison {
                println!(
                    "{:<5} lowpass rel l2^2 {:.4e}  lowpass linf {:.4e}",
                    c.algorithm, c.mean_lowpass_relative_l2_sq, c.mean_lowpass_linf
                );
            }
            Ok(())
        }
        Command::GraphInfo { r, json, .. } => {
            let info = graph_info(&cfg, r)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&info)?);
            } else {
                println!("graph         {}", info.graph);
                println!("vertices      {}", info.n_vertices);
                println!("edges         {}", info.edges);
                println!("components    {}", info.components);
                println!("degree        min {:.4}  mean {:.4}  max {:.4}", info.degree_min, info.degree_mean, info.degree_max);
                println!("spectral gap  {:.6e}", info.spectral_gap);
                println!("lambda_max    {:.6}", info.lambda_max);
                for b in &info.bands {
                    let flag = if b.ambiguous_cut { "  (degenerate cut)" } else { "" };
                    println!("r = {:<5} mu = {:.4}  nu = {:.4}{flag}", b.r, b.mu, b.nu);
                }
            }
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
