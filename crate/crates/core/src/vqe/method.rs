//! Named solver strategies behind a common trait.
//!
//! Method specs are strings like `fuccsd(6)`, `adapt(standard)`, or
//! `adapt(0.9)`. Families register a parser under their name; parsing a spec
//! picks the family and lets it interpret the argument. This keeps scan
//! configurations declarative: the harness never matches on method names.

use std::collections::BTreeMap;

use crate::ansatz::AnsatzProgram;
use crate::error::{Result, SavqeError};
use crate::states::CsfReference;
use crate::vqe::{solve_adaptive, solve_layered, CompiledSystem, SolverConfig, SolverReport};

/// A runnable solver variant.
pub trait Method: Send + Sync {
    /// Canonical spec string (`fuccsd(6)`, `adapt(standard)`, ...).
    fn name(&self) -> String;

    /// Run the solver. `warm_start` is a previously optimized program for
    /// the same pool, used when chaining along a geometry series.
    fn solve(
        &self,
        system: &CompiledSystem,
        references: &[CsfReference],
        config: &SolverConfig,
        warm_start: Option<&AnsatzProgram>,
    ) -> Result<SolverReport>;
}

/// Fixed-depth ansatz: `n_layers` repetitions of the full pool.
pub struct LayeredMethod {
    pub n_layers: usize,
}

impl Method for LayeredMethod {
    fn name(&self) -> String {
        format!("fuccsd({})", self.n_layers)
    }

    fn solve(
        &self,
        system: &CompiledSystem,
        references: &[CsfReference],
        config: &SolverConfig,
        warm_start: Option<&AnsatzProgram>,
    ) -> Result<SolverReport> {
        solve_layered(system, references, self.n_layers, config, warm_start)
    }
}

/// Adaptive ansatz growth. `growth_fraction = 1.0` appends a single operator
/// per macroiteration; smaller fractions append every operator within that
/// fraction of the largest pool gradient.
pub struct AdaptiveMethod {
    pub growth_fraction: f64,
}

impl Method for AdaptiveMethod {
    fn name(&self) -> String {
        if self.growth_fraction >= 1.0 {
            "adapt(standard)".to_string()
        } else {
            format!("adapt({})", self.growth_fraction)
        }
    }

    fn solve(
        &self,
        system: &CompiledSystem,
        references: &[CsfReference],
        config: &SolverConfig,
        warm_start: Option<&AnsatzProgram>,
    ) -> Result<SolverReport> {
        let mut cfg = config.clone();
        cfg.growth_fraction = self.growth_fraction;
        solve_adaptive(system, references, &cfg, warm_start)
    }
}

type FamilyParser = Box<dyn Fn(&str) -> Result<Box<dyn Method>> + Send + Sync>;

/// Registry mapping family names to spec parsers.
pub struct MethodRegistry {
    families: BTreeMap<String, FamilyParser>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut registry = MethodRegistry {
            families: BTreeMap::new(),
        };
        registry.register("fuccsd", |arg| {
            let n_layers: usize = arg.parse().map_err(|_| {
                SavqeError::UnknownMethod(format!(
                    "fuccsd expects a positive layer count, got \"{arg}\""
                ))
            })?;
            if n_layers == 0 {
                return Err(SavqeError::UnknownMethod(
                    "fuccsd layer count must be at least 1".to_string(),
                ));
            }
            Ok(Box::new(LayeredMethod { n_layers }) as Box<dyn Method>)
        });
        registry.register("adapt", |arg| {
            if arg == "standard" {
                return Ok(Box::new(AdaptiveMethod {
                    growth_fraction: 1.0,
                }) as Box<dyn Method>);
            }
            let fraction: f64 = arg.parse().map_err(|_| {
                SavqeError::UnknownMethod(format!(
                    "adapt expects \"standard\" or a fraction in (0, 1], got \"{arg}\""
                ))
            })?;
            if !(0.0 < fraction && fraction <= 1.0) {
                return Err(SavqeError::UnknownMethod(format!(
                    "adapt growth fraction {fraction} outside (0, 1]"
                )));
            }
            Ok(Box::new(AdaptiveMethod {
                growth_fraction: fraction,
            }) as Box<dyn Method>)
        });
        registry
    }
}

impl MethodRegistry {
    pub fn register(
        &mut self,
        family: &str,
        parser: impl Fn(&str) -> Result<Box<dyn Method>> + Send + Sync + 'static,
    ) {
        self.families.insert(family.to_string(), Box::new(parser));
    }

    pub fn family_names(&self) -> Vec<&str> {
        self.families.keys().map(String::as_str).collect()
    }

    /// Parse a spec like `family(arg)` into a runnable method.
    pub fn parse(&self, spec: &str) -> Result<Box<dyn Method>> {
        let spec = spec.trim();
        let (family, arg) = match spec.find('(') {
            Some(open) if spec.ends_with(')') => (&spec[..open], &spec[open + 1..spec.len() - 1]),
            _ => {
                return Err(SavqeError::UnknownMethod(format!(
                    "method spec \"{spec}\" is not of the form family(arg)"
                )))
            }
        };
        let parser = self.families.get(family).ok_or_else(|| {
            SavqeError::UnknownMethod(format!(
                "unknown method family \"{family}\" (known: {})",
                self.family_names().join(", ")
            ))
        })?;
        parser(arg.trim())
    }
}
