//! The bundled hydrogen-chain integral files must keep reproducing the
//! spectra frozen in `data/reference_energies.json`, which were generated
//! with an independent integral and full-CI pipeline. A drift here means
//! either the data files or the Hamiltonian pipeline changed meaning.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use savqe::hamiltonian::ActiveSpaceHamiltonian;
use savqe::oracle::{casci_solve, rayleigh_energy, CasciOptions};
use savqe::states::{Determinant, Statevector};

#[derive(Deserialize)]
struct Reference {
    rhf_energy: f64,
    sector_dim: usize,
    singlet_energies: Vec<f64>,
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn load_references() -> BTreeMap<String, Reference> {
    let text = std::fs::read_to_string(data_dir().join("reference_energies.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Canonical closed-shell determinant of `n_electrons` electrons.
fn closed_shell(n_electrons: u32) -> Determinant {
    let occ = (1u32 << (n_electrons / 2)) - 1;
    Determinant::new(occ, occ)
}

#[test]
fn bundled_integrals_reproduce_frozen_spectra() {
    let references = load_references();
    assert_eq!(
        references.len(),
        6,
        "reference table lists every bundled file"
    );
    for (name, reference) in &references {
        let h = ActiveSpaceHamiltonian::from_fcidump(data_dir().join(format!("{name}.fcidump")))
            .unwrap();
        let basis = h.sector_basis();
        assert_eq!(
            basis.dim(),
            reference.sector_dim,
            "{name}: sector dimension"
        );

        let h_op = h.compile(&basis).unwrap();
        let hf = Statevector::unit(basis.clone(), closed_shell(h.n_electrons())).unwrap();
        let rhf = rayleigh_energy(&h_op, &hf);
        assert!(
            (rhf - reference.rhf_energy).abs() < 1e-9,
            "{name}: closed-shell energy {rhf} vs frozen {}",
            reference.rhf_energy
        );

        let result = casci_solve(
            &h,
            &CasciOptions::singlets(reference.singlet_energies.len()),
        )
        .unwrap();
        for (i, (got, want)) in result
            .energies
            .iter()
            .zip(&reference.singlet_energies)
            .enumerate()
        {
            assert!(
                (got - want).abs() < 1e-9,
                "{name} root {i}: {got} vs frozen {want}"
            );
            assert!(result.s2_values[i].abs() < 1e-6, "{name} root {i} spin");
        }
    }
}
