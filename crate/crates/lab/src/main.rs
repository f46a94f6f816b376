use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use latnls_lab::config::{parse_config, parse_suite_config, KernelConfig};
use latnls_lab::experiment::{reference_sensitivity, run_continuum_limit, write_outputs};
use latnls_lab::suite::{default_kernels, run_check_suite, symbol_rows, write_suite, write_symbol_table, SuiteOptions};
use latnls_lab::{resolve_output_dir, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "latnls", version, about = "Lattice NLS continuum-limit experiments and checks")]
struct Cli {
    /// Config file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for random test fields
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides LATNLS_OUT_DIR and the config file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continuum-limit experiment along an h-ladder
    Limit {
        /// Also rerun with a twice finer reference and report the change
        #[arg(long)]
        check_reference: bool,
    },
    /// Run the verification suite over a list of kernels
    Check {
        /// Kernel such as `pure_power:s=0.75` or `nearest_neighbor`; repeatable
        #[arg(long = "kernel")]
        kernels: Vec<String>,
        /// Random fields per mesh
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Tabulate omega, delta and their ratio on k = 2^-j
    Symbol {
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 1)]
        jmin: u32,
        #[arg(long, default_value_t = 32)]
        jmax: u32,
    },
}

fn out_dir(cli: &Cli, from_config: Option<&Path>) -> PathBuf {
    resolve_output_dir(cli.out.as_deref(), std::env::var_os(OUT_DIR_ENV).as_deref(), from_config)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    match &cli.command {
        Command::Limit { check_reference } => {
            let path = cli.config.as_deref().context("limit needs --config <path>")?;
            let mut config = parse_config(path).with_context(|| format!("in {}", path.display()))?;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            let base = path.parent().unwrap_or(Path::new("."));
            let report = run_continuum_limit(&config, base)?;
            let dir = out_dir(&cli, config.output_dir.as_deref());
            write_outputs(&report, &dir)?;
            std::fs::write(dir.join("config.toml"), config.to_toml_string())?;
            print!("{}", report.summary.to_text());
            if *check_reference {
                let s = reference_sensitivity(&config, base, &report)?;
                println!(
                    "reference sensitivity: max relative change {:.3e} ({})",
                    s.max_relative_change,
                    if s.converged { "converged" } else { "NOT converged" }
                );
            }
            println!("wrote {}", dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { kernels, samples } => {
            let suite_cfg = cli.config.as_deref().map(parse_suite_config).transpose()?;
            let mut list: Vec<KernelConfig> =
                kernels.iter().map(|k| KernelConfig::parse_short(k)).collect::<Result<_, _>>()?;
            if let Some(cfg) = &suite_cfg {
                list.extend(cfg.kernels.iter().cloned());
            }
            if kernels.is_empty() && suite_cfg.is_none() {
                list = default_kernels();
            }
            let mut opts = SuiteOptions { samples: *samples, ..SuiteOptions::default() };
            if let Some(seed) = cli.seed.or(suite_cfg.as_ref().map(|c| c.seed).filter(|s| *s != 0)) {
                opts.seed = seed;
            }
            let summary = run_check_suite(&list, &opts);
            let dir = out_dir(&cli, suite_cfg.as_ref().and_then(|c| c.output_dir.as_deref()));
            write_suite(&summary, &dir)?;
            print!("{}", summary.to_text());
            println!("wrote {}", dir.display());
            Ok(if summary.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Symbol { kernel, jmin, jmax } => {
            let cfg = KernelConfig::parse_short(kernel)?;
            let k = cfg.build()?;
            let rows = symbol_rows(&k, *jmin..=*jmax)?;
            println!("{:>3} {:>24} {:>24} {:>24} {:>20}", "j", "k", "omega", "delta", "ratio");
            for r in &rows {
                println!("{:>3} {:>24e} {:>24e} {:>24e} {:>20.12}", r.j, r.k, r.omega, r.delta, r.ratio);
            }
            println!("closed-form c = {}", k.limit_constant()?);
            println!("extrapolated c = {}", k.extrapolated_limit_constant()?);
            if cli.out.is_some() || std::env::var_os(OUT_DIR_ENV).is_some() {
                let dir = out_dir(&cli, None);
                std::fs::create_dir_all(&dir)?;
                write_symbol_table(&rows, &dir.join("symbol.csv"))?;
                println!("wrote {}", dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
