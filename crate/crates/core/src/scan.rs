//! Method-by-geometry scan harness.
//!
//! A scan config names a series of FCIDUMP files, a list of method specs,
//! the CSF references to average over, and numeric knobs. Running the scan
//! solves every method at every geometry, checks each run against the exact
//! oracle (cached by integral content), and writes a report tree:
//!
//! ```text
//! out/
//!   report.json          all runs + oracle energies (input to `metrics`)
//!   metrics.csv          per-method error aggregates
//!   characters.csv       dominant CSFs of the exact roots per geometry
//!   oracle_cache/        oracle results keyed by integral content hash
//!   runs/<method>/<geometry>.json        solver report
//!   runs/<method>/<geometry>.trace.csv   convergence trace
//!   runs/<method>/<geometry>.params.json saved circuit parameters
//! ```
//!
//! With `chain_previous = true` each method hands its optimized circuit to
//! the next geometry as a warm start (identical layout for fixed-depth
//! methods, grown circuit for adaptive ones), and geometries run strictly in
//! listed order.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzProgram;
use crate::error::{Result, SavqeError};
use crate::hamiltonian::ActiveSpaceHamiltonian;
use crate::oracle::{casci_solve, csf_character, CasciOptions, CasciResult};
use crate::pool::OperatorPool;
use crate::states::CsfReference;
use crate::vqe::{
    method_metrics, write_metrics_csv, CompiledSystem, MethodMetrics, MethodRegistry, RunErrors,
    SolverConfig, SolverReport,
};

/// Minimum squared overlap for a CSF to appear in `characters.csv`.
const CHARACTER_MIN_WEIGHT: f64 = 0.05;

/// Declarative scan description (TOML or JSON).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// FCIDUMP files, in scan order. Relative paths are resolved against
    /// the config file location.
    pub fcidumps: Vec<PathBuf>,
    /// Method specs such as `fuccsd(6)` or `adapt(standard)`.
    pub methods: Vec<String>,
    /// CSF patterns averaged over, e.g. `["2200", "2020", "2ud0"]`.
    pub references: Vec<String>,
    /// Averaging weights (default: equal).
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Redundant guard: must equal `references.len()` when present.
    #[serde(default)]
    pub n_states: Option<usize>,
    /// Warm-start every geometry from the previous one.
    #[serde(default)]
    pub chain_previous: bool,
    /// Pool-gradient threshold stopping adaptive growth (default 1e-5).
    #[serde(default)]
    pub adapt_threshold: Option<f64>,
    /// Angle-optimizer gradient tolerance (default 1e-8).
    #[serde(default)]
    pub optimizer_tol: Option<f64>,
    /// Adaptive macroiteration cap (default 250).
    #[serde(default)]
    pub max_macroiterations: Option<usize>,
    /// Exact roots to compute (default: number of references).
    #[serde(default)]
    pub oracle_roots: Option<usize>,
    /// Output directory (overridable on the command line).
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ScanConfig {
    /// Parse a TOML (`.toml`) or JSON (`.json`) config file and resolve
    /// relative FCIDUMP paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SavqeError::io(path, e))?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        let mut config: ScanConfig = if is_json {
            serde_json::from_str(&text)
                .map_err(|e| SavqeError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text)
                .map_err(|e| SavqeError::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(dir) = path.parent() {
            for f in &mut config.fcidumps {
                if f.is_relative() {
                    *f = dir.join(&f);
                }
            }
            if let Some(out) = &mut config.out_dir {
                if out.is_relative() {
                    *out = dir.join(&out);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Structural validation; file contents are checked when the scan runs.
    pub fn validate(&self) -> Result<()> {
        if self.fcidumps.is_empty() {
            return Err(SavqeError::Config("no FCIDUMP files listed".to_string()));
        }
        if self.methods.is_empty() {
            return Err(SavqeError::Config("no methods listed".to_string()));
        }
        if self.references.is_empty() {
            return Err(SavqeError::Config("no reference CSFs listed".to_string()));
        }
        let registry = MethodRegistry::default();
        for spec in &self.methods {
            registry.parse(spec)?;
        }
        let refs = self.parsed_references()?;
        let first = &refs[0];
        for r in &refs[1..] {
            if r.n_spatial() != first.n_spatial()
                || r.n_alpha() != first.n_alpha()
                || r.n_beta() != first.n_beta()
                || r.two_s() != first.two_s()
            {
                return Err(SavqeError::Config(format!(
                    "reference \"{r}\" is not in the same sector and spin as \"{first}\""
                )));
            }
        }
        for (i, a) in self.references.iter().enumerate() {
            if self.references[..i].contains(a) {
                return Err(SavqeError::Config(format!(
                    "reference \"{a}\" is listed twice"
                )));
            }
        }
        if let Some(n) = self.n_states {
            if n != self.references.len() {
                return Err(SavqeError::Config(format!(
                    "n_states = {n} but {} references are listed",
                    self.references.len()
                )));
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != self.references.len() {
                return Err(SavqeError::Config(format!(
                    "{} weights for {} references",
                    w.len(),
                    self.references.len()
                )));
            }
        }
        if let Some(roots) = self.oracle_roots {
            if roots < self.references.len() {
                return Err(SavqeError::Config(format!(
                    "oracle_roots = {roots} cannot cover {} averaged states",
                    self.references.len()
                )));
            }
        }
        Ok(())
    }

    pub fn parsed_references(&self) -> Result<Vec<CsfReference>> {
        self.references
            .iter()
            .map(|s| CsfReference::parse(s))
            .collect()
    }

    fn solver_config(&self) -> SolverConfig {
        let n = self.references.len();
        let mut cfg = SolverConfig::equal_weights(n);
        if let Some(w) = &self.weights {
            cfg.weights = w.clone();
        }
        if let Some(t) = self.adapt_threshold {
            cfg.adapt_threshold = t;
        }
        if let Some(t) = self.optimizer_tol {
            cfg.optimizer_tol = t;
        }
        if let Some(m) = self.max_macroiterations {
            cfg.max_macroiterations = m;
        }
        cfg
    }

    fn oracle_roots(&self) -> usize {
        self.oracle_roots.unwrap_or(self.references.len())
    }
}

/// One solved (method, geometry) pair inside the scan report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub geometry: String,
    pub oracle_energies: Vec<f64>,
    pub report: SolverReport,
}

/// Everything `metrics` needs to rebuild the aggregate table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub references: Vec<String>,
    pub weights: Vec<f64>,
    pub geometries: Vec<String>,
    pub runs: Vec<RunRecord>,
}

/// Outcome summary returned to the caller.
#[derive(Debug)]
pub struct ScanSummary {
    pub out_dir: PathBuf,
    pub n_runs: usize,
    pub n_converged: usize,
    pub metrics: Vec<MethodMetrics>,
}

/// Cached oracle payload; states are recomputed on demand, energies and
/// characters are enough for scan reporting.
#[derive(Debug, Serialize, Deserialize)]
struct CachedOracle {
    energies: Vec<f64>,
    s2_values: Vec<f64>,
    sector_dim: usize,
    /// Per root: `(pattern, weight)` of every CSF above the report cutoff.
    characters: Vec<Vec<(String, f64)>>,
}

fn oracle_for(
    hamiltonian: &ActiveSpaceHamiltonian,
    roots: usize,
    cache_dir: &Path,
) -> Result<CachedOracle> {
    let key = format!("{}-r{roots}-s0", &hamiltonian.content_hash()[..32]);
    let path = cache_dir.join(format!("{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(cached) = serde_json::from_str::<CachedOracle>(&text) {
            if cached.energies.len() == roots {
                return Ok(cached);
            }
        }
    }
    let result: CasciResult = casci_solve(hamiltonian, &CasciOptions::singlets(roots))?;
    let characters = result
        .states
        .iter()
        .map(|s| {
            Ok(csf_character(s, 0, CHARACTER_MIN_WEIGHT)?
                .into_iter()
                .map(|(r, w)| (r.to_string(), w))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let cached = CachedOracle {
        energies: result.energies,
        s2_values: result.s2_values,
        sector_dim: result.sector_dim,
        characters,
    };
    std::fs::create_dir_all(cache_dir).map_err(|e| SavqeError::io(cache_dir, e))?;
    let json = serde_json::to_string_pretty(&cached)
        .map_err(|e| SavqeError::Format(format!("cannot serialize oracle cache: {e}")))?;
    std::fs::write(&path, json).map_err(|e| SavqeError::io(&path, e))?;
    Ok(cached)
}

/// Directory-safe form of a method spec: `adapt(0.9)` -> `adapt_0.9`.
fn sanitize_method(spec: &str) -> String {
    spec.chars()
        .filter_map(|c| match c {
            '(' => Some('_'),
            ')' | ' ' => None,
            c => Some(c),
        })
        .collect()
}

fn geometry_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Human-readable listing of the work a scan would do, without running it.
pub fn plan_scan(config: &ScanConfig) -> Result<Vec<String>> {
    config.validate()?;
    let mut lines = Vec::new();
    for f in &config.fcidumps {
        let h = ActiveSpaceHamiltonian::from_fcidump(f)?;
        lines.push(format!(
            "geometry {}: {} orbitals, {} electrons, sector dimension {}, oracle roots {}",
            geometry_label(f),
            h.n_spatial(),
            h.n_electrons(),
            h.sector_basis().dim(),
            config.oracle_roots(),
        ));
    }
    for m in &config.methods {
        lines.push(format!(
            "method {m}: {} run(s){}",
            config.fcidumps.len(),
            if config.chain_previous {
                ", chained across geometries"
            } else {
                ""
            }
        ));
    }
    Ok(lines)
}

/// Run the full scan and write the report tree under `out_dir`.
pub fn run_scan(config: &ScanConfig, out_dir: &Path) -> Result<ScanSummary> {
    config.validate()?;
    let references = config.parsed_references()?;
    let solver_config = config.solver_config();
    let registry = MethodRegistry::default();

    std::fs::create_dir_all(out_dir).map_err(|e| SavqeError::io(out_dir, e))?;
    let cache_dir = out_dir.join("oracle_cache");
    let runs_dir = out_dir.join("runs");

    // load every geometry up front so config errors surface before solving
    struct Geometry {
        label: String,
        system: CompiledSystem,
        oracle: CachedOracle,
    }
    let mut geometries: Vec<Geometry> = Vec::new();
    let mut shared_pool: Option<Arc<OperatorPool>> = None;
    for path in &config.fcidumps {
        let hamiltonian = ActiveSpaceHamiltonian::from_fcidump(path)?;
        let first = &references[0];
        if first.n_spatial() != hamiltonian.n_spatial() {
            return Err(SavqeError::Config(format!(
                "references span {} orbitals but {} has {}",
                first.n_spatial(),
                path.display(),
                hamiltonian.n_spatial()
            )));
        }
        let (na, nb) = hamiltonian.default_sector();
        if first.n_alpha() != na || first.n_beta() != nb {
            return Err(SavqeError::Config(format!(
                "references occupy sector ({}, {}) but {} declares ({na}, {nb})",
                first.n_alpha(),
                first.n_beta(),
                path.display()
            )));
        }
        if shared_pool.is_none() {
            shared_pool = Some(Arc::new(OperatorPool::build_closed_shell(
                hamiltonian.n_spatial(),
                hamiltonian.n_electrons(),
            )?));
        }
        let pool = shared_pool.as_ref().expect("pool was just built").clone();
        let oracle = oracle_for(&hamiltonian, config.oracle_roots(), &cache_dir)?;
        let system = CompiledSystem::new(&hamiltonian, pool, hamiltonian.sector_basis())?;
        geometries.push(Geometry {
            label: geometry_label(path),
            system,
            oracle,
        });
    }

    write_characters_csv(
        &out_dir.join("characters.csv"),
        &geometries
            .iter()
            .map(|g| (g.label.clone(), &g.oracle))
            .collect::<Vec<_>>(),
    )?;

    let mut runs: Vec<RunRecord> = Vec::new();
    let mut errors: Vec<RunErrors> = Vec::new();
    for spec in &config.methods {
        let method = registry.parse(spec)?;
        let method_dir = runs_dir.join(sanitize_method(&method.name()));
        std::fs::create_dir_all(&method_dir).map_err(|e| SavqeError::io(&method_dir, e))?;
        let mut warm: Option<AnsatzProgram> = None;
        for geometry in &geometries {
            let report = method.solve(
                &geometry.system,
                &references,
                &solver_config,
                if config.chain_previous {
                    warm.as_ref()
                } else {
                    None
                },
            )?;
            if config.chain_previous {
                let mut program = AnsatzProgram::empty(geometry.system.pool());
                for (&id, &theta) in report.operator_ids.iter().zip(&report.thetas) {
                    program.push(id, theta);
                }
                warm = Some(program);
            }
            write_run_outputs(
                &method_dir,
                &geometry.label,
                &report,
                geometry.system.pool(),
            )?;
            errors.push(RunErrors::new(
                &report.method,
                &geometry.label,
                report.n_operators,
                &report.energies,
                &geometry.oracle.energies,
            )?);
            runs.push(RunRecord {
                method: report.method.clone(),
                geometry: geometry.label.clone(),
                oracle_energies: geometry.oracle.energies.clone(),
                report,
            });
        }
    }

    let scan_report = ScanReport {
        references: config.references.clone(),
        weights: solver_config.weights.clone(),
        geometries: geometries.iter().map(|g| g.label.clone()).collect(),
        runs,
    };
    let report_path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(&scan_report)
        .map_err(|e| SavqeError::Format(format!("cannot serialize scan report: {e}")))?;
    std::fs::write(&report_path, json).map_err(|e| SavqeError::io(&report_path, e))?;

    let metrics = method_metrics(&errors);
    write_metrics_csv(&out_dir.join("metrics.csv"), &metrics)?;

    Ok(ScanSummary {
        out_dir: out_dir.to_path_buf(),
        n_runs: scan_report.runs.len(),
        n_converged: scan_report
            .runs
            .iter()
            .filter(|r| r.report.converged)
            .count(),
        metrics,
    })
}

/// Rebuild the metrics table from a previously written `report.json`.
pub fn metrics_from_report(report_path: &Path, out_path: &Path) -> Result<Vec<MethodMetrics>> {
    let text = std::fs::read_to_string(report_path).map_err(|e| SavqeError::io(report_path, e))?;
    let report: ScanReport = serde_json::from_str(&text)
        .map_err(|e| SavqeError::Format(format!("{}: {e}", report_path.display())))?;
    let errors = report
        .runs
        .iter()
        .map(|r| {
            RunErrors::new(
                &r.method,
                &r.geometry,
                r.report.n_operators,
                &r.report.energies,
                &r.oracle_energies,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let metrics = method_metrics(&errors);
    write_metrics_csv(out_path, &metrics)?;
    Ok(metrics)
}

fn write_run_outputs(
    method_dir: &Path,
    geometry: &str,
    report: &SolverReport,
    pool: &OperatorPool,
) -> Result<()> {
    let report_path = method_dir.join(format!("{geometry}.json"));
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| SavqeError::Format(format!("cannot serialize run report: {e}")))?;
    std::fs::write(&report_path, json).map_err(|e| SavqeError::io(&report_path, e))?;

    let trace_path = method_dir.join(format!("{geometry}.trace.csv"));
    let mut trace = String::from("iteration,n_operators,sa_energy,max_pool_gradient\n");
    for t in &report.trace {
        trace.push_str(&format!(
            "{},{},{:.12},{:.6e}\n",
            t.iteration, t.n_operators, t.sa_energy, t.max_pool_gradient
        ));
    }
    std::fs::write(&trace_path, trace).map_err(|e| SavqeError::io(&trace_path, e))?;

    let mut program = AnsatzProgram::empty(pool);
    for (&id, &theta) in report.operator_ids.iter().zip(&report.thetas) {
        program.push(id, theta);
    }
    program.save_parameters(&method_dir.join(format!("{geometry}.params.json")))
}

fn write_characters_csv(path: &Path, geometries: &[(String, &CachedOracle)]) -> Result<()> {
    let mut text = String::from("geometry,root,energy,csf,weight\n");
    for (label, oracle) in geometries {
        for (root, (energy, characters)) in
            oracle.energies.iter().zip(&oracle.characters).enumerate()
        {
            for (pattern, weight) in characters {
                text.push_str(&format!(
                    "{label},{root},{energy:.12},{pattern},{weight:.6}\n"
                ));
            }
        }
    }
    std::fs::write(path, text).map_err(|e| SavqeError::io(path, e))
}
