use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavemix::cache::Cache;
use wavemix::config::RunConfig;
use wavemix::pipeline::{self, diff_runs, inspect, RunStatus};
use wavemix::{crystal, reconstruct, Error};

#[derive(Parser)]
#[command(name = "wavemix", version, about = "Floquet-Bloch response and x-ray-optical wave-mixing spectra of a driven 1D crystal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage of a TOML config and write outputs plus manifest.json.
    Run {
        config: PathBuf,
        /// Output directory, overriding [outputs].directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Cache directory, overriding $WAVEMIX_CACHE_DIR.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, conflicts_with = "cache_dir")]
        no_cache: bool,
        /// Gauge-fixing strategy, overriding the config.
        #[arg(long)]
        gauge: Option<String>,
        /// Modulus recovery strategy, overriding [reconstruct].moduli.
        #[arg(long)]
        moduli: Option<String>,
        #[arg(short, long)]
        quiet: bool,
    },
    /// Field-by-field relative differences between two run directories.
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Summarize a run directory, manifest, cache entry or Floquet archive.
    Inspect { archive: PathBuf },
    /// List registered strategies.
    Strategies,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, cache_dir, no_cache, gauge, moduli, quiet } => {
            let mut cfg = match RunConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(o) = out {
                cfg.outputs.directory = o;
            }
            if let Some(g) = gauge {
                if let Err(e) = crystal::gauge::registry().get(&g) {
                    return fail(&e);
                }
                cfg.gauge = g;
            }
            if let Some(m) = moduli {
                if let Err(e) = reconstruct::moduli_registry().get(&m) {
                    return fail(&e);
                }
                match cfg.reconstruct.as_mut() {
                    Some(r) => r.moduli = m,
                    None => return fail(&Error::Config("--moduli needs a [reconstruct] section".into())),
                }
            }
            let cache = if no_cache {
                Cache::disabled()
            } else {
                cache_dir.map(Cache::at).unwrap_or_else(Cache::from_env)
            };
            let manifest = match pipeline::run(&cfg, &cache) {
                Ok(m) => m,
                Err(e) => return fail(&e),
            };
            if !quiet {
                for s in &manifest.stages {
                    eprintln!("{:<18} {:>9} {:>8.3}s", s.name, format!("{:?}", s.cache).to_lowercase(), s.seconds);
                }
                for w in &manifest.warnings {
                    eprintln!("warning: {w}");
                }
            }
            match (&manifest.status, &manifest.error) {
                (RunStatus::Error, Some(e)) => {
                    eprintln!("error ({:?}): {}", e.class, e.message);
                    ExitCode::from(e.exit_code as u8)
                }
                _ => {
                    if !quiet {
                        println!("{}", cfg.outputs.directory.display());
                    }
                    ExitCode::SUCCESS
                }
            }
        }
        Command::Diff { a, b, json } => match diff_runs(&a, &b) {
            Ok(r) => {
                if json {
                    println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
                } else {
                    print!("{}", r.summary());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Inspect { archive } => match inspect(&archive) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Strategies => {
            let show = |kind: &str, items: Vec<(&str, &str)>| {
                println!("{kind}:");
                for (n, d) in items {
                    println!("  {n:<22} {d}");
                }
            };
            let g = crystal::gauge::registry();
            show(g.kind(), g.names().into_iter().map(|n| (n, g.get(n).unwrap().describe())).collect());
            let m = reconstruct::moduli_registry();
            show(m.kind(), m.names().into_iter().map(|n| (n, m.get(n).unwrap().describe())).collect());
            let p = crystal::presets::registry();
            show(p.kind(), p.names().into_iter().map(|n| (n, p.get(n).unwrap().describe())).collect());
            ExitCode::SUCCESS
        }
    }
}
