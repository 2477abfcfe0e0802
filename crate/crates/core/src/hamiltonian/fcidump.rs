//! FCIDUMP parsing.
//!
//! Accepts the conventional layout: a `&FCI ... &END` (or `/`-terminated)
//! namelist header carrying `NORB`, `NELEC`, and optionally `MS2`, followed
//! by one record per line: `value p q r s` with 1-based orbital indices in
//! chemists' notation. Records with `r = s = 0` are one-electron integrals,
//! the all-zero index record is the core energy, and everything else is a
//! two-electron integral `(pq|rs)`. Eight-fold permutation symmetry is
//! applied on load; conflicting duplicate records are rejected.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Result, SavqeError};
use crate::hamiltonian::{ActiveSpaceHamiltonian, Eri};

/// Agreement tolerance for duplicate records of the same integral.
const DUPLICATE_TOL: f64 = 1e-10;

pub fn parse_fcidump_path(path: &Path) -> Result<ActiveSpaceHamiltonian> {
    let text = std::fs::read_to_string(path).map_err(|e| SavqeError::io(path, e))?;
    parse_fcidump_str(&text)
}

pub fn parse_fcidump_str(text: &str) -> Result<ActiveSpaceHamiltonian> {
    let (header, body_start) = split_header(text)?;
    let norb = header_value(&header, "NORB")?
        .ok_or_else(|| SavqeError::Format("FCIDUMP header does not define NORB".to_string()))?;
    let nelec = header_value(&header, "NELEC")?
        .ok_or_else(|| SavqeError::Format("FCIDUMP header does not define NELEC".to_string()))?;
    let ms2 = header_value(&header, "MS2")?.unwrap_or(0);

    if norb == 0 || norb > 16 {
        return Err(SavqeError::Format(format!(
            "NORB={norb} outside the supported range 1..=16"
        )));
    }
    if nelec > 2 * norb {
        return Err(SavqeError::Format(format!(
            "NELEC={nelec} exceeds capacity of {norb} orbitals"
        )));
    }
    if ms2.unsigned_abs() as usize > nelec as usize || (nelec as i64 + ms2) % 2 != 0 {
        return Err(SavqeError::Format(format!(
            "MS2={ms2} is inconsistent with NELEC={nelec}"
        )));
    }

    let n = norb as usize;
    let mut h1 = DMatrix::<f64>::zeros(n, n);
    let mut h1_seen: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    let mut eri = Eri::zeros(n);
    let mut eri_seen: HashMap<(usize, usize, usize, usize), (f64, usize)> = HashMap::new();
    let mut core_energy = 0.0f64;
    let mut core_seen: Option<(f64, usize)> = None;

    for (line_no, raw) in text.lines().enumerate().skip(body_start) {
        let line = line_no + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let value_str = fields.next().unwrap();
        let value: f64 =
            value_str
                .replace(['D', 'd'], "E")
                .parse()
                .map_err(|_| SavqeError::Index {
                    line,
                    msg: format!("cannot parse integral value \"{value_str}\""),
                })?;
        let mut idx = [0usize; 4];
        for slot in &mut idx {
            let tok = fields.next().ok_or_else(|| SavqeError::Index {
                line,
                msg: "record has fewer than four orbital indices".to_string(),
            })?;
            *slot = tok.parse().map_err(|_| SavqeError::Index {
                line,
                msg: format!("cannot parse orbital index \"{tok}\""),
            })?;
        }
        if fields.next().is_some() {
            return Err(SavqeError::Index {
                line,
                msg: "record has more than five fields".to_string(),
            });
        }
        for &i in &idx {
            if i > n {
                return Err(SavqeError::Index {
                    line,
                    msg: format!("orbital index {i} exceeds NORB={norb}"),
                });
            }
        }
        let [p, q, r, s] = idx;
        match (p, q, r, s) {
            (0, 0, 0, 0) => {
                if let Some((old, old_line)) = core_seen {
                    if (old - value).abs() > DUPLICATE_TOL {
                        return Err(SavqeError::Inconsistent {
                            line,
                            msg: format!(
                                "core energy {value} conflicts with {old} from line {old_line}"
                            ),
                        });
                    }
                }
                core_seen = Some((value, line));
                core_energy = value;
            }
            (p, q, 0, 0) if p > 0 && q > 0 => {
                let key = (p.max(q), p.min(q));
                if let Some(&(old, old_line)) = h1_seen.get(&key) {
                    if (old - value).abs() > DUPLICATE_TOL {
                        return Err(SavqeError::Inconsistent {
                            line,
                            msg: format!(
                                "h({p},{q}) = {value} conflicts with {old} from line {old_line}"
                            ),
                        });
                    }
                }
                h1_seen.insert(key, (value, line));
                h1[(p - 1, q - 1)] = value;
                h1[(q - 1, p - 1)] = value;
            }
            (p, q, r, s) if p > 0 && q > 0 && r > 0 && s > 0 => {
                let key = canonical_eri_key(p, q, r, s);
                if let Some(&(old, old_line)) = eri_seen.get(&key) {
                    if (old - value).abs() > DUPLICATE_TOL {
                        return Err(SavqeError::Inconsistent {
                            line,
                            msg: format!(
                                "({p}{q}|{r}{s}) = {value} conflicts with {old} from line {old_line}"
                            ),
                        });
                    }
                }
                eri_seen.insert(key, (value, line));
                eri.set_symmetric(p - 1, q - 1, r - 1, s - 1, value);
            }
            _ => {
                return Err(SavqeError::Index {
                    line,
                    msg: format!("unsupported zero-index pattern ({p},{q},{r},{s})"),
                });
            }
        }
    }

    ActiveSpaceHamiltonian::from_parts(n, nelec as u32, ms2 as i32, core_energy, h1, eri)
}

/// Canonical representative of the eight-fold permutation class of `(pq|rs)`.
fn canonical_eri_key(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let pair = |a: usize, b: usize| if a >= b { (a, b) } else { (b, a) };
    let (p1, q1) = pair(p, q);
    let (r1, s1) = pair(r, s);
    if (p1, q1) >= (r1, s1) {
        (p1, q1, r1, s1)
    } else {
        (r1, s1, p1, q1)
    }
}

/// Locate the namelist header and return (header text, index of the first
/// body line).
fn split_header(text: &str) -> Result<(String, usize)> {
    let mut header = String::new();
    let mut in_header = false;
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if i == 0 {
            if !trimmed.to_uppercase().starts_with("&FCI") {
                return Err(SavqeError::Format(
                    "FCIDUMP must start with an &FCI namelist header".to_string(),
                ));
            }
            in_header = true;
        }
        if in_header {
            header.push(' ');
            header.push_str(trimmed);
            let upper = trimmed.to_uppercase();
            if upper.contains("&END") || upper.ends_with('/') || upper == "/" {
                return Ok((header, i + 1));
            }
        }
    }
    Err(SavqeError::Format(
        "FCIDUMP header is not terminated by &END or /".to_string(),
    ))
}

/// Extract `KEY=value` from the namelist text (first scalar after the key).
fn header_value(header: &str, key: &str) -> Result<Option<i64>> {
    let upper = header.to_uppercase();
    let Some(pos) = upper.find(&format!("{key}=")) else {
        return Ok(None);
    };
    // guard against matching a suffix of a longer key (e.g. NELEC vs ELEC)
    if pos > 0 {
        let prev = upper.as_bytes()[pos - 1] as char;
        if prev.is_ascii_alphanumeric() {
            return header_value(&header[..pos + key.len()], key);
        }
    }
    let tail = &upper[pos + key.len() + 1..];
    let token: String = tail
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '-' || *c == '+')
        .collect();
    token.parse::<i64>().map(Some).map_err(|_| {
        SavqeError::Format(format!("cannot parse header field {key} from \"{token}\""))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
&FCI NORB=2,NELEC=2,MS2=0,
 ORBSYM=1,1,
 ISYM=1,
&END
  0.6744931033260081E+00  1  1  1  1
  0.6634680586748007E+00  2  2  1  1
  0.6973979494693358E+00  2  2  2  2
  0.1812875358123322E+00  2  1  2  1
 -0.1252477303982147E+01  1  1  0  0
 -0.4759344611440753E+00  2  2  0  0
  0.7137758743754461E+00  0  0  0  0
";

    #[test]
    fn parses_minimal_file() {
        let h = parse_fcidump_str(SMALL).unwrap();
        assert_eq!(h.n_spatial(), 2);
        assert_eq!(h.n_electrons(), 2);
        assert_eq!(h.ms2(), 0);
        assert!((h.core_energy() - 0.7137758743754461).abs() < 1e-15);
        assert!((h.h1()[(0, 0)] + 1.252477303982147).abs() < 1e-12);
        // eight-fold symmetry fills (1 2|1 2) from the (2 1|2 1) record
        assert!((h.eri(0, 1, 0, 1) - 0.1812875358123322).abs() < 1e-15);
        assert!((h.eri(1, 0, 0, 1) - 0.1812875358123322).abs() < 1e-15);
        assert!((h.eri(0, 0, 1, 1) - 0.6634680586748007).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_index() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 1.0 3 1 0 0\n";
        match parse_fcidump_str(text) {
            Err(SavqeError::Index { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected index error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_conflicting_duplicates() {
        let text = "\
&FCI NORB=2,NELEC=2,MS2=0,
&END
 1.0 2 1 2 1
 1.5 1 2 1 2
";
        match parse_fcidump_str(text) {
            Err(SavqeError::Inconsistent { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected inconsistency error, got {other:?}"),
        }
    }

    #[test]
    fn accepts_agreeing_duplicates_and_fortran_exponents() {
        let text = "\
&FCI NORB=2,NELEC=2,
&END
 1.0D0 2 1 2 1
 1.0 1 2 1 2
 -5.0d-1 1 1 0 0
";
        let h = parse_fcidump_str(text).unwrap();
        assert!((h.eri(1, 0, 1, 0) - 1.0).abs() < 1e-15);
        assert!((h.h1()[(0, 0)] + 0.5).abs() < 1e-15);
        assert_eq!(h.ms2(), 0);
    }

    #[test]
    fn rejects_missing_header_fields() {
        assert!(matches!(
            parse_fcidump_str("&FCI NORB=2,\n&END\n"),
            Err(SavqeError::Format(_))
        ));
        assert!(matches!(
            parse_fcidump_str("no header\n"),
            Err(SavqeError::Format(_))
        ));
    }

    #[test]
    fn rejects_inconsistent_spin_header() {
        assert!(matches!(
            parse_fcidump_str("&FCI NORB=2,NELEC=2,MS2=1,\n&END\n"),
            Err(SavqeError::Format(_))
        ));
    }

    #[test]
    fn slash_terminated_header() {
        let text = "&FCI NORB=1,NELEC=2,MS2=0,\n /\n 1.0 1 1 0 0\n";
        let h = parse_fcidump_str(text).unwrap();
        assert_eq!(h.n_spatial(), 1);
        assert!((h.h1()[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
