//! Command-line front end: landscape validation, classical-vs-quantum TTS
//! benchmark runs, and exponent fits over the emitted CSV.
//!
//! Exit codes are a stable contract: 0 success, 1 partial failure (some pairs
//! ran, some did not, or a fit could not be assembled), 2 malformed input.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qwalk_core::landscape::EnergyLandscape;
use qwalk_core::markov::AnnealingSchedule;
use qwalk_core::tts::{
    collect_fit_points, fit_exponent, format_fit_record, parse_csv, run_suite, SuitePair,
};
use qwalk_core::{caps, RegisterLayout};

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Quantum-walk search and quantum Metropolis annealing benchmarks", long_about = None)]
struct Cli {
    /// Base seed for every stochastic step; omitting it means 0, so runs are
    /// deterministic by default.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a landscape file and report its shape and ground set.
    Validate { landscape: PathBuf },
    /// Run the classical-vs-quantum comparison for every (landscape,
    /// schedule) pair of a config and write one CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Print the plan without computing or writing anything.
        #[arg(long)]
        dry_run: bool,
    },
    /// Fit the min-TTS scaling exponent from a benchmark CSV.
    Fit {
        /// Input CSV produced by `bench`.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = qwalk_core::tts::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Validate { landscape } => cmd_validate(&landscape),
        Command::Bench { config, dry_run } => cmd_bench(&config, dry_run, seed),
        Command::Fit { input, delta, bootstrap } => cmd_fit(&input, delta, bootstrap, seed),
    }
}

fn cmd_validate(path: &Path) -> ExitCode {
    let land = match EnergyLandscape::from_file(path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    println!(
        "coords={} bits={} states={} ground={} min_energy={} max_energy={}",
        land.num_coords(),
        land.bits_per_coord(),
        land.state_count(),
        land.ground_set().len(),
        land.min_energy(),
        land.max_energy()
    );
    ExitCode::SUCCESS
}

struct PlannedPair {
    instance_id: String,
    landscape: EnergyLandscape,
    schedule: AnnealingSchedule,
    schedule_label: String,
}

fn cmd_bench(config_path: &Path, dry_run: bool, seed_flag: u64) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let cfg = match config::parse_config(&text, config_dir) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let seed = if seed_flag != 0 { seed_flag } else { cfg.seed };

    // Effective caps: hard limits, optionally tightened by config and the
    // WALK_MAX_DIM environment variable (downward only).
    let state_cap = cfg.max_states.unwrap_or(caps::MAX_PROPAGATION_STATES);
    if state_cap > caps::MAX_PROPAGATION_STATES {
        eprintln!(
            "error: max_states {} exceeds the hard limit {}",
            state_cap,
            caps::MAX_PROPAGATION_STATES
        );
        return ExitCode::from(2);
    }
    let walk_cap = cfg.max_walk_dim.unwrap_or(caps::coin_walk_cap()).min(caps::coin_walk_cap());

    // Load all landscapes up front; unreadable inputs are malformed input.
    let mut planned: Vec<PlannedPair> = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    for land_path in &cfg.landscapes {
        let land = match EnergyLandscape::from_file(land_path) {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: {}: {e}", land_path.display());
                return ExitCode::from(2);
            }
        };
        let instance_id = land_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "landscape".into());
        for spec in &cfg.schedules {
            let label = format!("{}:{}", instance_id, spec.kind.name());
            let schedule =
                match AnnealingSchedule::new(spec.kind, spec.beta1, spec.alpha, land.num_coords())
                {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("error: schedule {label}: {e}");
                        return ExitCode::from(2);
                    }
                };
            let coin_dim = RegisterLayout::for_landscape(&land).total_dim();
            if land.state_count() > state_cap {
                violations.push(format!(
                    "{label}: {} states exceed the cap of {state_cap}",
                    land.state_count()
                ));
                continue;
            }
            if coin_dim > walk_cap {
                violations.push(format!(
                    "{label}: walk register dimension {coin_dim} exceeds the cap of {walk_cap}"
                ));
                continue;
            }
            if schedule.beta(cfg.t_max).map(|b| b >= qwalk_core::caps::BETA_CAP).unwrap_or(false)
            {
                eprintln!(
                    "warning: {label}: schedule reaches the inverse-temperature cap {} before t = {}",
                    qwalk_core::caps::BETA_CAP,
                    cfg.t_max
                );
            }
            planned.push(PlannedPair {
                instance_id: instance_id.clone(),
                landscape: land.clone(),
                schedule,
                schedule_label: label,
            });
        }
    }

    if dry_run {
        println!(
            "plan: {} pair(s), t_max={}, delta={}, seed={}, output={}",
            planned.len(),
            cfg.t_max,
            cfg.delta,
            seed,
            cfg.output.display()
        );
        for p in &planned {
            println!(
                "  run {} (states={}, beta1={}, alpha={})",
                p.schedule_label,
                p.landscape.state_count(),
                p.schedule.beta1,
                p.schedule.alpha
            );
        }
        for v in &violations {
            println!("  skip {v}");
        }
        return if violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) };
    }

    let pairs: Vec<SuitePair> = planned
        .iter()
        .map(|p| SuitePair {
            instance_id: p.instance_id.clone(),
            landscape: p.landscape.clone(),
            schedule: p.schedule,
        })
        .collect();
    let csv = match run_suite(&pairs, cfg.t_max, cfg.delta) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: benchmark run failed: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_atomic(&cfg.output, csv.as_bytes()) {
        eprintln!("error: writing {}: {e}", cfg.output.display());
        return ExitCode::from(1);
    }
    println!(
        "wrote {} rows for {} pair(s) to {}",
        csv.lines().count().saturating_sub(1),
        pairs.len(),
        cfg.output.display()
    );
    if violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        for v in &violations {
            eprintln!("skipped: {v}");
        }
        ExitCode::from(1)
    }
}

/// Write through a temp file and rename so readers never see partial output.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn cmd_fit(input: &Path, delta: f64, bootstrap: usize, seed: u64) -> ExitCode {
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", input.display());
            return ExitCode::from(2);
        }
    };
    let rows = match parse_csv(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", input.display());
            return ExitCode::from(2);
        }
    };
    let (points, missing, degenerate) = collect_fit_points(&rows, delta);
    if !missing.is_empty() {
        eprintln!("error: instances missing a classical or quantum min row:");
        for m in &missing {
            eprintln!("  {m}");
        }
        return ExitCode::from(1);
    }
    if degenerate > 0 {
        eprintln!("warning: excluded {degenerate} degenerate min row pair(s)");
    }
    match fit_exponent(&points, bootstrap, seed) {
        Ok(fit) => {
            print!("{}", format_fit_record(&fit));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: fit failed: {e}");
            ExitCode::from(1)
        }
    }
}
