//! Batch experiment runner: simulation, spectral tables, analytic
//! verification, local-time and dimension estimation, chaos tables, and a
//! combined deterministic report.
//!
//! Exit codes: 0 all asserted checks pass, 1 a check failed, 2 invalid
//! configuration, 3 compute error.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bifbm", version, about = "bifractional Brownian motion laboratory")]
struct Cli {
    /// JSON configuration file; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample paths and write them as CSV or binary.
    Simulate {
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        paths: Option<usize>,
        /// cholesky | lamperti | spectral
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; `.bin` selects the binary format, anything else CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the Lamperti spectral density and check its tail slope.
    Spectrum {
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic kernel identities over a parameter lattice.
    Verify {
        /// Path to a JSON array of [h, k] pairs, or "default".
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Occupation-measure local time at zero against the density oracle.
    Localtime {
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Time-grid points per path.
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box-counting dimension of a level set, graph, or image.
    Dimension {
        /// level | graph | image
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated chaos expansion of the local-time L2 norm, with term table.
    Chaos {
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        order_cap: Option<usize>,
        #[arg(long)]
        quad_n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full check battery and write reports to a directory.
    ReportAll {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("BIFBM_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    let file_cfg = match config::load_file(cli.config.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Cmd::Simulate {
            h,
            k,
            d,
            t_max,
            grid_n,
            paths,
            method,
            seed,
            out,
        } => commands::simulate(&file_cfg, h, k, d, t_max, grid_n, paths, method, seed, out),
        Cmd::Spectrum {
            h,
            k,
            lambda_max,
            tol,
            out,
        } => commands::spectrum(&file_cfg, h, k, lambda_max, tol, out),
        Cmd::Verify { lattice, seed, out } => commands::verify(&file_cfg, lattice, seed, out),
        Cmd::Localtime {
            h,
            k,
            bandwidth,
            bins,
            paths,
            seed,
            out,
        } => commands::localtime(&file_cfg, h, k, bandwidth, bins, paths, seed, out),
        Cmd::Dimension {
            target,
            h,
            k,
            grid_n,
            level,
            seed,
            out,
        } => commands::dimension(&file_cfg, target, h, k, grid_n, level, seed, out),
        Cmd::Chaos {
            h,
            k,
            x,
            t,
            order_cap,
            quad_n,
            out,
        } => commands::chaos(&file_cfg, h, k, x, t, order_cap, quad_n, out),
        Cmd::ReportAll { out_dir, seed } => commands::report_all(&file_cfg, out_dir, seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Compute(msg)) => {
            eprintln!("compute error: {msg}");
            ExitCode::from(3)
        }
    }
}
