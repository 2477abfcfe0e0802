//! Genealogically coupled configuration state functions.
//!
//! A CSF is written as one character per spatial orbital in ascending order:
//! `2` doubly occupied, `u` singly occupied coupling the running spin up by
//! 1/2, `d` singly occupied coupling down, `0` empty. The expansion is built
//! at the highest spin projection `M = S`. Determinant amplitudes follow the
//! canonical convention (ascending spin-orbital creation string, sign +1), so
//! the Clebsch-Gordan product coefficients attach directly.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, SavqeError};
use crate::states::{DetBasis, Determinant, Statevector};

/// Occupation/coupling role of one spatial orbital inside a CSF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbOcc {
    Doubly,
    Up,
    Down,
    Empty,
}

impl OrbOcc {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '2' => Some(OrbOcc::Doubly),
            'u' => Some(OrbOcc::Up),
            'd' => Some(OrbOcc::Down),
            '0' => Some(OrbOcc::Empty),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            OrbOcc::Doubly => '2',
            OrbOcc::Up => 'u',
            OrbOcc::Down => 'd',
            OrbOcc::Empty => '0',
        }
    }

    pub fn electrons(self) -> u32 {
        match self {
            OrbOcc::Doubly => 2,
            OrbOcc::Up | OrbOcc::Down => 1,
            OrbOcc::Empty => 0,
        }
    }
}

/// A validated CSF pattern such as `"22ud00"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CsfReference {
    pattern: Vec<OrbOcc>,
}

impl fmt::Display for CsfReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for occ in &self.pattern {
            write!(f, "{}", occ.to_char())?;
        }
        Ok(())
    }
}

impl CsfReference {
    /// Parse and validate: known characters only, and the genealogical spin
    /// path must never dip below zero.
    pub fn parse(s: &str) -> Result<Self> {
        let mut pattern = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            let occ = OrbOcc::from_char(c).ok_or_else(|| {
                SavqeError::Coupling(format!(
                    "invalid CSF character '{c}' at position {i} in \"{s}\""
                ))
            })?;
            pattern.push(occ);
        }
        let mut two_s = 0i32;
        for (i, occ) in pattern.iter().enumerate() {
            match occ {
                OrbOcc::Up => two_s += 1,
                OrbOcc::Down => two_s -= 1,
                _ => {}
            }
            if two_s < 0 {
                return Err(SavqeError::Coupling(format!(
                    "spin coupling path drops below zero at orbital {i} in \"{s}\""
                )));
            }
        }
        Ok(CsfReference { pattern })
    }

    pub fn n_spatial(&self) -> usize {
        self.pattern.len()
    }

    pub fn n_electrons(&self) -> u32 {
        self.pattern.iter().map(|o| o.electrons()).sum()
    }

    pub fn n_open(&self) -> u32 {
        self.pattern
            .iter()
            .filter(|o| matches!(o, OrbOcc::Up | OrbOcc::Down))
            .count() as u32
    }

    /// Twice the total spin `S` of the coupled state.
    pub fn two_s(&self) -> u32 {
        let ups = self
            .pattern
            .iter()
            .filter(|o| matches!(o, OrbOcc::Up))
            .count() as i32;
        let downs = self
            .pattern
            .iter()
            .filter(|o| matches!(o, OrbOcc::Down))
            .count() as i32;
        (ups - downs) as u32
    }

    /// Alpha electron count at the highest-weight projection `M = S`.
    pub fn n_alpha(&self) -> u32 {
        let doubly = self
            .pattern
            .iter()
            .filter(|o| matches!(o, OrbOcc::Doubly))
            .count() as u32;
        doubly + (self.n_open() + self.two_s()) / 2
    }

    pub fn n_beta(&self) -> u32 {
        self.n_electrons() - self.n_alpha()
    }

    /// Determinant expansion with Clebsch-Gordan product coefficients,
    /// normalized to one.
    pub fn expand(&self) -> Vec<(Determinant, f64)> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0u32, 0u32, 0i32, 0i32, 1.0f64)];
        // (orbital, alpha_mask, beta_mask, two_s, two_m(open shells), coeff)
        while let Some((p, alpha, beta, two_s, two_m, coeff)) = stack.pop() {
            if p == self.pattern.len() {
                if two_m == self.two_s() as i32 {
                    out.push((Determinant::new(alpha, beta), coeff));
                }
                continue;
            }
            let bit = 1u32 << p;
            match self.pattern[p] {
                OrbOcc::Empty => stack.push((p + 1, alpha, beta, two_s, two_m, coeff)),
                OrbOcc::Doubly => stack.push((p + 1, alpha | bit, beta | bit, two_s, two_m, coeff)),
                OrbOcc::Up => {
                    for (spin_up, mask_a, mask_b) in [(true, bit, 0u32), (false, 0u32, bit)] {
                        let tm = two_m + if spin_up { 1 } else { -1 };
                        let c = coeff * cg_step(two_s, true, spin_up, tm);
                        if c != 0.0 {
                            stack.push((p + 1, alpha | mask_a, beta | mask_b, two_s + 1, tm, c));
                        }
                    }
                }
                OrbOcc::Down => {
                    for (spin_up, mask_a, mask_b) in [(true, bit, 0u32), (false, 0u32, bit)] {
                        let tm = two_m + if spin_up { 1 } else { -1 };
                        let c = coeff * cg_step(two_s, false, spin_up, tm);
                        if c != 0.0 {
                            stack.push((p + 1, alpha | mask_a, beta | mask_b, two_s - 1, tm, c));
                        }
                    }
                }
            }
        }
        out
    }

    /// Statevector form over a matching sector basis.
    pub fn to_statevector(&self, basis: &Arc<DetBasis>) -> Result<Statevector> {
        if basis.n_spatial() != self.n_spatial() {
            return Err(SavqeError::Basis(format!(
                "CSF \"{self}\" spans {} orbitals but basis has {}",
                self.n_spatial(),
                basis.n_spatial()
            )));
        }
        let mut v = Statevector::zero(basis.clone());
        for (det, coeff) in self.expand() {
            let idx = basis.index_of(det).ok_or_else(|| {
                SavqeError::Basis(format!("CSF \"{self}\" determinant outside basis"))
            })?;
            v.amplitudes[idx] = Complex64::new(coeff, 0.0);
        }
        Ok(v)
    }
}

/// One genealogical coupling factor.
///
/// `two_s_prev` is twice the spin before this electron, `raise` selects the
/// up/down branch of the coupling, `spin_up` the electron's projection, and
/// `tm_after` twice the running projection after the electron. Invalid
/// boundary combinations evaluate to exactly zero.
fn cg_step(two_s_prev: i32, raise: bool, spin_up: bool, tm_after: i32) -> f64 {
    let s = two_s_prev as f64;
    let m = tm_after as f64;
    let denom = 2.0 * (s + 1.0);
    match (raise, spin_up) {
        (true, true) => ((s + m + 1.0) / denom).max(0.0).sqrt(),
        (true, false) => ((s - m + 1.0) / denom).max(0.0).sqrt(),
        (false, true) => -((s - m + 1.0) / denom).max(0.0).sqrt(),
        (false, false) => ((s + m + 1.0) / denom).max(0.0).sqrt(),
    }
}

/// All CSF patterns for the given electron count and total spin, enumerated
/// depth-first with character order `2`, `u`, `d`, `0` per orbital.
pub fn enumerate_csf_basis(n_spatial: usize, n_electrons: u32, two_s: u32) -> Vec<CsfReference> {
    let mut out = Vec::new();
    let mut pattern = Vec::with_capacity(n_spatial);
    enumerate_rec(n_spatial, n_electrons, two_s, 0, 0, &mut pattern, &mut out);
    out
}

fn enumerate_rec(
    n_spatial: usize,
    n_electrons: u32,
    target_two_s: u32,
    electrons: u32,
    two_s: i32,
    pattern: &mut Vec<OrbOcc>,
    out: &mut Vec<CsfReference>,
) {
    let remaining = (n_spatial - pattern.len()) as u32;
    if electrons > n_electrons || electrons + 2 * remaining < n_electrons {
        return;
    }
    // the spin path moves by at most one unit per remaining orbital
    if (two_s - target_two_s as i32).unsigned_abs() > remaining {
        return;
    }
    if pattern.len() == n_spatial {
        if electrons == n_electrons && two_s == target_two_s as i32 {
            out.push(CsfReference {
                pattern: pattern.clone(),
            });
        }
        return;
    }
    for occ in [OrbOcc::Doubly, OrbOcc::Up, OrbOcc::Down, OrbOcc::Empty] {
        let ds = match occ {
            OrbOcc::Up => 1,
            OrbOcc::Down => -1,
            _ => 0,
        };
        if two_s + ds < 0 {
            continue;
        }
        pattern.push(occ);
        enumerate_rec(
            n_spatial,
            n_electrons,
            target_two_s,
            electrons + occ.electrons(),
            two_s + ds,
            pattern,
            out,
        );
        pattern.pop();
    }
}

/// Squared overlap of `state` with each CSF, in the same order as `refs`.
pub fn project_csf_weights(state: &Statevector, refs: &[CsfReference]) -> Result<Vec<f64>> {
    refs.iter()
        .map(|r| {
            let csf = r.to_statevector(&state.basis)?;
            Ok(csf.dot(state).norm_sqr())
        })
        .collect()
}
