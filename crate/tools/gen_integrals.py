#!/usr/bin/env python3
"""Generate the bundled FCIDUMP fixtures and their reference energies.

Hydrogen chains in an STO-3G basis: closed-form s-orbital Gaussian
integrals, restricted Hartree-Fock with DIIS, MO transformation, FCIDUMP
output, and full CI by dense diagonalization in the complete spin-orbital
Fock space (ladder matrices built by Kronecker products, so the CI path
shares no code with any determinant-rule implementation).

Writes data/<name>.fcidump and data/reference_energies.json. The JSON
values are the source of the frozen constants in the Rust test suite.

Usage: python3 tools/gen_integrals.py [outdir]
"""

import itertools
import json
import os
import sys

import numpy as np

BOHR_PER_ANGSTROM = 1.0 / 0.529177210903

# STO-3G hydrogen: exponents and contraction coefficients for normalized
# s primitives (zeta = 1.24 scaling already applied).
H_EXPONENTS = np.array([3.425250914, 0.6239137298, 0.1688554040])
H_COEFFS = np.array([0.1543289673, 0.5353281423, 0.4446345422])


def boys0(x):
    if x < 1e-12:
        return 1.0 - x / 3.0
    from math import erf, sqrt, pi

    return 0.5 * sqrt(pi / x) * erf(sqrt(x))


def prim_norm(alpha):
    return (2.0 * alpha / np.pi) ** 0.75


class Shell:
    def __init__(self, center):
        self.center = np.asarray(center, dtype=float)
        self.exps = H_EXPONENTS
        self.coefs = H_COEFFS * prim_norm(H_EXPONENTS)
        # renormalize the contracted function
        s = 0.0
        for a, ca in zip(self.exps, self.coefs):
            for b, cb in zip(self.exps, self.coefs):
                s += ca * cb * (np.pi / (a + b)) ** 1.5
        self.coefs = self.coefs / np.sqrt(s)


def overlap_kinetic(sh_a, sh_b):
    rab2 = np.dot(sh_a.center - sh_b.center, sh_a.center - sh_b.center)
    s = t = 0.0
    for a, ca in zip(sh_a.exps, sh_a.coefs):
        for b, cb in zip(sh_b.exps, sh_b.coefs):
            p = a + b
            mu = a * b / p
            e = np.exp(-mu * rab2)
            base = (np.pi / p) ** 1.5 * e
            s += ca * cb * base
            t += ca * cb * mu * (3.0 - 2.0 * mu * rab2) * base
    return s, t


def nuclear(sh_a, sh_b, centers, charges):
    rab2 = np.dot(sh_a.center - sh_b.center, sh_a.center - sh_b.center)
    v = 0.0
    for a, ca in zip(sh_a.exps, sh_a.coefs):
        for b, cb in zip(sh_b.exps, sh_b.coefs):
            p = a + b
            mu = a * b / p
            pc = (a * sh_a.center + b * sh_b.center) / p
            pre = -2.0 * np.pi / p * np.exp(-mu * rab2)
            for rc, z in zip(centers, charges):
                v += ca * cb * pre * z * boys0(p * np.dot(pc - rc, pc - rc))
    return v


def eri(sh_a, sh_b, sh_c, sh_d):
    """Chemists' notation (ab|cd) over contracted s shells."""
    rab2 = np.dot(sh_a.center - sh_b.center, sh_a.center - sh_b.center)
    rcd2 = np.dot(sh_c.center - sh_d.center, sh_c.center - sh_d.center)
    val = 0.0
    for a, ca in zip(sh_a.exps, sh_a.coefs):
        for b, cb in zip(sh_b.exps, sh_b.coefs):
            p = a + b
            pp = (a * sh_a.center + b * sh_b.center) / p
            eab = np.exp(-a * b / p * rab2)
            for c, cc in zip(sh_c.exps, sh_c.coefs):
                for d, cd in zip(sh_d.exps, sh_d.coefs):
                    q = c + d
                    qq = (c * sh_c.center + d * sh_d.center) / q
                    ecd = np.exp(-c * d / q * rcd2)
                    rpq2 = np.dot(pp - qq, pp - qq)
                    val += (
                        ca
                        * cb
                        * cc
                        * cd
                        * 2.0
                        * np.pi**2.5
                        / (p * q * np.sqrt(p + q))
                        * eab
                        * ecd
                        * boys0(p * q / (p + q) * rpq2)
                    )
    return val


def build_integrals(centers_bohr):
    shells = [Shell(c) for c in centers_bohr]
    n = len(shells)
    charges = [1.0] * n
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            S[i, j], T[i, j] = overlap_kinetic(shells[i], shells[j])
            V[i, j] = nuclear(shells[i], shells[j], centers_bohr, charges)
    g = np.zeros((n, n, n, n))
    for i, j, k, l in itertools.product(range(n), repeat=4):
        g[i, j, k, l] = eri(shells[i], shells[j], shells[k], shells[l])
    enuc = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            enuc += 1.0 / np.linalg.norm(np.asarray(centers_bohr[i]) - np.asarray(centers_bohr[j]))
    return S, T + V, g, enuc


def rhf(S, hcore, g, nelec, enuc, max_iter=200, tol=1e-12):
    n = S.shape[0]
    nocc = nelec // 2
    sval, svec = np.linalg.eigh(S)
    X = svec @ np.diag(sval**-0.5) @ svec.T
    F = hcore.copy()
    D = np.zeros((n, n))
    errs, focks = [], []
    e_old = 0.0
    for it in range(max_iter):
        Fo = X.T @ F @ X
        eps, Co = np.linalg.eigh(Fo)
        C = X @ Co
        Cocc = C[:, :nocc]
        D = 2.0 * Cocc @ Cocc.T
        J = np.einsum("pqrs,rs->pq", g, D)
        K = np.einsum("prqs,rs->pq", g, D)
        F = hcore + J - 0.5 * K
        e = 0.5 * np.sum(D * (hcore + F)) + enuc
        # DIIS
        err = F @ D @ S - S @ D @ F
        errs.append(err)
        focks.append(F.copy())
        if len(errs) > 8:
            errs.pop(0)
            focks.pop(0)
        if len(errs) > 1:
            m = len(errs)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = np.sum(errs[i] * errs[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(B, rhs)[:m]
                F = sum(wi * fi for wi, fi in zip(w, focks))
            except np.linalg.LinAlgError:
                pass
        if abs(e - e_old) < tol and np.max(np.abs(err)) < 1e-9:
            return e, C, eps
        e_old = e
    raise RuntimeError("SCF not converged")


def mo_transform(hcore, g, C):
    h1 = C.T @ hcore @ C
    g1 = np.einsum("pqrs,pi->iqrs", g, C)
    g2 = np.einsum("iqrs,qj->ijrs", g1, C)
    g3 = np.einsum("ijrs,rk->ijks", g2, C)
    g4 = np.einsum("ijks,sl->ijkl", g3, C)
    return h1, g4


def write_fcidump(path, h1, g, ecore, nelec):
    n = h1.shape[0]
    with open(path, "w") as f:
        f.write(f"&FCI NORB={n},NELEC={nelec},MS2=0,\n")
        f.write("  ORBSYM=" + ",".join(["1"] * n) + ",\n")
        f.write("  ISYM=1,\n")
        f.write("&END\n")
        thresh = 1e-14

        def rec(val, p, q, r, s):
            f.write(f" {val: .16E} {p:3d} {q:3d} {r:3d} {s:3d}\n")

        for p in range(n):
            for q in range(p + 1):
                pq = p * (p + 1) // 2 + q
                for r in range(p + 1):
                    smax = q if r == p else r
                    for s in range(smax + 1):
                        if abs(g[p, q, r, s]) > thresh:
                            rec(g[p, q, r, s], p + 1, q + 1, r + 1, s + 1)
        for p in range(n):
            for q in range(p + 1):
                if abs(h1[p, q]) > thresh:
                    rec(h1[p, q], p + 1, q + 1, 0, 0)
        rec(ecore, 0, 0, 0, 0)


# --- full CI in the complete 4^M Fock space via ladder matrices ---------------


def ladder_matrices(n_so):
    a1 = np.array([[0.0, 1.0], [0.0, 0.0]])
    z1 = np.array([[1.0, 0.0], [0.0, -1.0]])
    i1 = np.eye(2)
    ann = []
    for k in range(n_so):
        # bit k of the basis index = occupation of spin orbital k;
        # kron is most-significant-factor first, so position k counts from the right
        op = np.array([[1.0]])
        for j in range(n_so - 1, -1, -1):
            if j > k:
                op = np.kron(op, i1)
            elif j == k:
                op = np.kron(op, a1)
            else:
                op = np.kron(op, z1)
        ann.append(op)
    return ann


def fci_reference(h1, g, ecore, nelec, n_singlets):
    m = h1.shape[0]
    n_so = 2 * m
    dim = 2**n_so
    ann = ladder_matrices(n_so)
    cre = [a.T for a in ann]
    # spin orbital 2p = (p, alpha), 2p+1 = (p, beta)
    E = [[None] * m for _ in range(m)]
    for p in range(m):
        for q in range(m):
            E[p][q] = cre[2 * p] @ ann[2 * q] + cre[2 * p + 1] @ ann[2 * q + 1]
    H = ecore * np.eye(dim)
    for p in range(m):
        for q in range(m):
            H += h1[p, q] * E[p][q]
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    if abs(g[p, q, r, s]) < 1e-15:
                        continue
                    term = E[p][q] @ E[r][s]
                    if q == r:
                        term = term - E[p][s]
                    H += 0.5 * g[p, q, r, s] * term
    # number and spin operators
    n_op = sum(cre[k] @ ann[k] for k in range(n_so))
    sz = 0.5 * sum(cre[2 * p] @ ann[2 * p] - cre[2 * p + 1] @ ann[2 * p + 1] for p in range(m))
    sp = sum(cre[2 * p] @ ann[2 * p + 1] for p in range(m))
    s2 = sp.T @ sp + sz + sz @ sz
    diag_n = np.diag(n_op)
    diag_sz = np.diag(sz)
    sel = np.where((np.abs(diag_n - nelec) < 1e-9) & (np.abs(diag_sz) < 1e-9))[0]
    Hs = H[np.ix_(sel, sel)]
    S2s = s2[np.ix_(sel, sel)]
    evals, evecs = np.linalg.eigh(Hs + 10.0 * S2s)
    singlets = []
    det_weights = []
    for i in range(len(evals)):
        v = evecs[:, i]
        s2v = float(v @ S2s @ v)
        if s2v < 1e-6:
            e = float(v @ Hs @ v)
            singlets.append(e)
            top = np.argsort(-np.abs(v))[:4]
            det_weights.append([(int(sel[t]), round(float(v[t] ** 2), 4)) for t in top])
        if len(singlets) >= n_singlets:
            break
    return singlets, det_weights, len(sel)


def det_label(index, m):
    alpha = []
    beta = []
    for p in range(m):
        if index >> (2 * p) & 1:
            alpha.append(p)
        if index >> (2 * p + 1) & 1:
            beta.append(p)
    return f"a{alpha}b{beta}"


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "data"
    os.makedirs(outdir, exist_ok=True)
    refs = {}

    systems = [("h2_0.74", [0.74 * k for k in (0, 1)])]
    for r in (1.00, 1.20, 1.40, 1.60, 1.80):
        systems.append((f"h4_{r:.2f}", [r * k for k in range(4)]))

    for name, zs in systems:
        centers = [np.array([0.0, 0.0, z * BOHR_PER_ANGSTROM]) for z in zs]
        S, hcore, g, enuc = build_integrals(centers)
        nelec = len(centers)
        e_hf, C, eps = rhf(S, hcore, g, nelec, enuc)
        h1_mo, g_mo = mo_transform(hcore, g, C)
        path = os.path.join(outdir, f"{name}.fcidump")
        write_fcidump(path, h1_mo, g_mo, enuc, nelec)
        singlets, det_w, sector_dim = fci_reference(h1_mo, g_mo, enuc, nelec, 5)
        m = h1_mo.shape[0]
        refs[name] = {
            "rhf_energy": e_hf,
            "singlet_energies": singlets,
            "sector_dim": sector_dim,
        }
        print(f"{name}: RHF = {e_hf:.12f}  singlets = {[f'{e:.10f}' for e in singlets]}")
        for i, ws in enumerate(det_w[:3]):
            print(f"  root {i}: " + ", ".join(f"{det_label(ix, m)}:{w}" for ix, w in ws))

    with open(os.path.join(outdir, "reference_energies.json"), "w") as f:
        json.dump(refs, f, indent=2, sort_keys=True)
    print("wrote", os.path.join(outdir, "reference_energies.json"))


if __name__ == "__main__":
    main()
