//! Command-line driver for state-averaged VQE scans.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 1 for
//! runtime failures (solver or oracle breakdowns, I/O).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use savqe::oracle::{casci_solve, csf_character, write_civec, CasciOptions};
use savqe::scan::{metrics_from_report, plan_scan, run_scan, ScanConfig};
use savqe::ActiveSpaceHamiltonian;
use savqe::SavqeError;

#[derive(Parser)]
#[command(
    name = "savqe",
    version,
    about = "Exact-statevector state-averaged VQE scans over active-space Hamiltonians"
)]
struct Cli {
    /// Size of the worker thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scan described by a TOML or JSON config file.
    Run {
        /// Scan config file.
        config: PathBuf,
        /// Output directory (overrides `out_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Validate the config and list the planned work without solving.
        #[arg(long)]
        dry_run: bool,
    },
    /// Solve the lowest exact singlet roots of one FCIDUMP.
    Oracle {
        /// FCIDUMP file.
        fcidump: PathBuf,
        /// Number of singlet roots.
        #[arg(long, default_value_t = 1)]
        roots: usize,
        /// Directory for the JSON summary and .civec eigenvectors.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild metrics.csv from a scan report.json.
    Metrics {
        /// report.json produced by `savqe run`.
        report: PathBuf,
        /// Where to write the rebuilt CSV (default: metrics.csv next to the report).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Configuration mistakes exit 2; runtime failures exit 1.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<SavqeError>() {
        Some(
            SavqeError::Config(_)
            | SavqeError::UnknownMethod(_)
            | SavqeError::Format(_)
            | SavqeError::Index { .. }
            | SavqeError::Inconsistent { .. }
            | SavqeError::Coupling(_)
            | SavqeError::Partition(_),
        ) => 2,
        _ => 1,
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            config,
            out,
            dry_run,
        } => cmd_run(&config, out, dry_run),
        Command::Oracle {
            fcidump,
            roots,
            out,
        } => cmd_oracle(&fcidump, roots, out),
        Command::Metrics { report, out } => cmd_metrics(&report, out),
    }
}

fn cmd_run(config_path: &Path, out: Option<PathBuf>, dry_run: bool) -> anyhow::Result<()> {
    let config = ScanConfig::load(config_path)?;
    if dry_run {
        println!("config ok: {}", config_path.display());
        for line in plan_scan(&config)? {
            println!("  {line}");
        }
        return Ok(());
    }
    let out_dir = out
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("savqe_out"));
    let summary = run_scan(&config, &out_dir)?;
    println!(
        "{} run(s) complete, {} converged; report tree in {}",
        summary.n_runs,
        summary.n_converged,
        summary.out_dir.display()
    );
    for m in &summary.metrics {
        println!(
            "  {}: {} operators, MAD {:.6} mEh, max {:.6} mEh",
            m.method, m.operators, m.mad_meh, m.max_error_meh
        );
    }
    Ok(())
}

fn cmd_oracle(fcidump: &Path, roots: usize, out: Option<PathBuf>) -> anyhow::Result<()> {
    let hamiltonian = ActiveSpaceHamiltonian::from_fcidump(fcidump)?;
    let result = casci_solve(&hamiltonian, &CasciOptions::singlets(roots))?;
    println!(
        "{}: {} orbitals, {} electrons, sector dimension {}",
        fcidump.display(),
        hamiltonian.n_spatial(),
        hamiltonian.n_electrons(),
        result.sector_dim
    );
    let mut characters = Vec::with_capacity(result.states.len());
    for (i, (energy, state)) in result.energies.iter().zip(&result.states).enumerate() {
        let character = csf_character(state, 0, 0.05)?;
        let leading = character
            .iter()
            .map(|(r, w)| format!("{r} ({w:.3})"))
            .collect::<Vec<_>>()
            .join("  ");
        println!("root {i}: E = {energy:.12}  {leading}");
        characters.push(
            character
                .into_iter()
                .map(|(r, w)| (r.to_string(), w))
                .collect::<Vec<_>>(),
        );
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        let summary = serde_json::json!({
            "fcidump": fcidump.display().to_string(),
            "sector_dim": result.sector_dim,
            "energies": result.energies,
            "s2_values": result.s2_values,
            "characters": characters,
        });
        let summary_path = dir.join("oracle.json");
        std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
        for (i, state) in result.states.iter().enumerate() {
            write_civec(&dir.join(format!("root{i}.civec")), state)?;
        }
        println!("wrote {}", summary_path.display());
    }
    Ok(())
}

fn cmd_metrics(report: &Path, out: Option<PathBuf>) -> anyhow::Result<()> {
    let out_path = out.unwrap_or_else(|| {
        report
            .parent()
            .map(|p| p.join("metrics.csv"))
            .unwrap_or_else(|| PathBuf::from("metrics.csv"))
    });
    let metrics = metrics_from_report(report, &out_path)?;
    for m in &metrics {
        println!(
            "{}: {} operators, MAD {:.6} mEh, max {:.6} mEh",
            m.method, m.operators, m.mad_meh, m.max_error_meh
        );
    }
    println!("wrote {}", out_path.display());
    Ok(())
}
