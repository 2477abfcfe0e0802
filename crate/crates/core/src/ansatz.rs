//! Ordered gate programs over a pool, with parameter persistence.
//!
//! A program is a sequence of `(operator id, angle)` pairs; the circuit is
//! the product of exact exponentials applied left to right (entry 0 first).
//! Repeated operator ids are allowed. Saved parameter files carry the pool
//! hash so they can only be restored against an identically laid-out pool.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SavqeError};
use crate::pool::OperatorPool;

/// One gate: pool operator id plus its angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgramEntry {
    pub op_id: usize,
    pub theta: f64,
}

/// Gate sequence bound to a specific pool layout via its hash.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzProgram {
    pool_hash: String,
    entries: Vec<ProgramEntry>,
}

/// On-disk parameter format.
#[derive(Debug, Serialize, Deserialize)]
struct ParameterFile {
    pool_hash: String,
    operator_ids: Vec<usize>,
    thetas: Vec<f64>,
}

impl AnsatzProgram {
    pub fn empty(pool: &OperatorPool) -> Self {
        AnsatzProgram {
            pool_hash: pool.hash().to_string(),
            entries: Vec::new(),
        }
    }

    /// `n_layers` repetitions of the full pool in pool order, all angles zero.
    pub fn layered(pool: &OperatorPool, n_layers: usize) -> Self {
        let entries = (0..n_layers)
            .flat_map(|_| {
                pool.ops().iter().map(|op| ProgramEntry {
                    op_id: op.id,
                    theta: 0.0,
                })
            })
            .collect();
        AnsatzProgram {
            pool_hash: pool.hash().to_string(),
            entries,
        }
    }

    pub fn pool_hash(&self) -> &str {
        &self.pool_hash
    }

    pub fn entries(&self) -> &[ProgramEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, op_id: usize, theta: f64) {
        self.entries.push(ProgramEntry { op_id, theta });
    }

    pub fn operator_ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.op_id).collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.theta).collect()
    }

    pub fn set_thetas(&mut self, thetas: &[f64]) -> Result<()> {
        if thetas.len() != self.entries.len() {
            return Err(SavqeError::ShapeMismatch(format!(
                "{} angles for a program of {} gates",
                thetas.len(),
                self.entries.len()
            )));
        }
        for (e, &t) in self.entries.iter_mut().zip(thetas) {
            e.theta = t;
        }
        Ok(())
    }

    /// Validate that the program only references operators the pool has.
    pub fn check_against(&self, pool: &OperatorPool) -> Result<()> {
        if self.pool_hash != pool.hash() {
            return Err(SavqeError::Alignment(format!(
                "program was built for pool {} but the active pool is {}",
                &self.pool_hash[..12.min(self.pool_hash.len())],
                &pool.hash()[..12]
            )));
        }
        for e in &self.entries {
            if e.op_id >= pool.len() {
                return Err(SavqeError::Alignment(format!(
                    "program references operator {} outside pool of size {}",
                    e.op_id,
                    pool.len()
                )));
            }
        }
        Ok(())
    }

    pub fn save_parameters(&self, path: &Path) -> Result<()> {
        let file = ParameterFile {
            pool_hash: self.pool_hash.clone(),
            operator_ids: self.operator_ids(),
            thetas: self.thetas(),
        };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| SavqeError::Format(format!("cannot serialize parameters: {e}")))?;
        std::fs::write(path, json).map_err(|e| SavqeError::io(path, e))
    }

    /// Restore a saved program, refusing files written for a different pool
    /// layout.
    pub fn load_parameters(path: &Path, pool: &OperatorPool) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SavqeError::io(path, e))?;
        let file: ParameterFile = serde_json::from_str(&text)
            .map_err(|e| SavqeError::Format(format!("cannot parse parameter file: {e}")))?;
        if file.pool_hash != pool.hash() {
            return Err(SavqeError::Alignment(format!(
                "parameter file was written for pool {} but the active pool is {}",
                &file.pool_hash[..12.min(file.pool_hash.len())],
                &pool.hash()[..12]
            )));
        }
        if file.operator_ids.len() != file.thetas.len() {
            return Err(SavqeError::Alignment(format!(
                "parameter file has {} operator ids but {} angles",
                file.operator_ids.len(),
                file.thetas.len()
            )));
        }
        let program = AnsatzProgram {
            pool_hash: file.pool_hash,
            entries: file
                .operator_ids
                .into_iter()
                .zip(file.thetas)
                .map(|(op_id, theta)| ProgramEntry { op_id, theta })
                .collect(),
        };
        program.check_against(pool)?;
        Ok(program)
    }

    /// Copy angles from another program with the identical gate layout
    /// (same pool and operator-id sequence). Used to warm-start a solve from
    /// a neighbouring geometry.
    pub fn adopt_thetas(&mut self, other: &AnsatzProgram) -> Result<()> {
        if self.pool_hash != other.pool_hash {
            return Err(SavqeError::Alignment(
                "cannot adopt angles across different pool layouts".to_string(),
            ));
        }
        if self.operator_ids() != other.operator_ids() {
            return Err(SavqeError::Alignment(
                "cannot adopt angles across different gate sequences".to_string(),
            ));
        }
        self.set_thetas(&other.thetas())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::OperatorPool;
    use tempfile::tempdir;

    #[test]
    fn layered_program_shape() {
        let pool = OperatorPool::build(&[0, 1], &[2, 3]).unwrap();
        let prog = AnsatzProgram::layered(&pool, 3);
        assert_eq!(prog.len(), 42);
        assert_eq!(prog.entries()[0].op_id, 0);
        assert_eq!(prog.entries()[14].op_id, 0); // second layer restarts
        assert!(prog.thetas().iter().all(|&t| t == 0.0));
        prog.check_against(&pool).unwrap();
    }

    #[test]
    fn parameter_round_trip() {
        let pool = OperatorPool::build(&[0, 1], &[2, 3]).unwrap();
        let mut prog = AnsatzProgram::empty(&pool);
        prog.push(3, 0.25);
        prog.push(3, -0.5); // duplicates are legal
        prog.push(11, 1.75);
        let dir = tempdir().unwrap();
        let path = dir.path().join("params.json");
        prog.save_parameters(&path).unwrap();
        let restored = AnsatzProgram::load_parameters(&path, &pool).unwrap();
        assert_eq!(restored, prog);
    }

    #[test]
    fn load_rejects_foreign_pool() {
        let pool_a = OperatorPool::build(&[0, 1], &[2, 3]).unwrap();
        let pool_b = OperatorPool::build(&[0], &[1, 2, 3]).unwrap();
        let mut prog = AnsatzProgram::empty(&pool_a);
        prog.push(0, 0.1);
        let dir = tempdir().unwrap();
        let path = dir.path().join("params.json");
        prog.save_parameters(&path).unwrap();
        match AnsatzProgram::load_parameters(&path, &pool_b) {
            Err(SavqeError::Alignment(_)) => {}
            other => panic!("expected alignment error, got {other:?}"),
        }
    }

    #[test]
    fn adopt_requires_identical_layout() {
        let pool = OperatorPool::build(&[0, 1], &[2, 3]).unwrap();
        let mut a = AnsatzProgram::layered(&pool, 2);
        let mut b = AnsatzProgram::layered(&pool, 2);
        b.set_thetas(&vec![0.125; b.len()]).unwrap();
        a.adopt_thetas(&b).unwrap();
        assert_eq!(a.thetas(), vec![0.125; 28]);
        let c = AnsatzProgram::layered(&pool, 3);
        assert!(a.adopt_thetas(&c).is_err());
    }
}
