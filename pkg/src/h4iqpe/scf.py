"""Restricted Hartree-Fock, spin-orbital integrals and MP2 amplitudes."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, InvalidInput, ScfNotConverged
from .molsys import MolecularIntegrals, write_fcidump

log = logging.getLogger(__name__)

SCF_CONV_TOL = 1e-10
SCF_MAX_ITER = 200
DIIS_DEPTH = 8
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class ScfResult:
    mo_coefficients: np.ndarray
    orbital_energies: np.ndarray
    E_hf: float
    converged: bool
    n_iterations: int
    n_occupied: int
    density: np.ndarray  # closed-shell total density 2 C_occ C_occ^T
    fock: np.ndarray
    homo_lumo_degenerate: bool = False


def _fix_signs(C: np.ndarray) -> np.ndarray:
    C = C.copy()
    for k in range(C.shape[1]):
        col = C[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            C[:, k] = -col
    return C


def _diagonalize(F: np.ndarray, X: np.ndarray):
    eps, Cp = np.linalg.eigh(X.T @ F @ X)
    order = np.argsort(eps, kind="stable")
    return eps[order], _fix_signs(X @ Cp[:, order])


def _fock(hcore, eri, D):
    J = np.einsum("pqrs,rs->pq", eri, D)
    K = np.einsum("prqs,rs->pq", eri, D)
    return hcore + J - 0.5 * K


def run_rhf(ints: MolecularIntegrals, n_electrons: int = 4, max_iter: int = SCF_MAX_ITER,
            conv_tol: float = SCF_CONV_TOL, diis_depth: int = DIIS_DEPTH) -> ScfResult:
    """Closed-shell Roothaan SCF from the core-Hamiltonian guess with DIIS."""
    if n_electrons % 2:
        raise InvalidInput("RHF needs an even electron count")
    s_eval, s_evec = np.linalg.eigh(ints.S)
    if s_eval.min() <= 0:
        raise InvalidInput("overlap matrix is not positive definite")
    X = s_evec @ np.diag(s_eval ** -0.5) @ s_evec.T
    hcore = ints.hcore
    nocc = n_electrons // 2

    eps, C = _diagonalize(hcore, X)
    D = 2.0 * C[:, :nocc] @ C[:, :nocc].T
    focks, errors = [], []
    converged = False
    it = 0
    F = hcore
    for it in range(1, max_iter + 1):
        F = _fock(hcore, ints.ERI, D)
        err = X.T @ (F @ D @ ints.S - ints.S @ D @ F) @ X
        focks.append(F)
        errors.append(err)
        if len(focks) > diis_depth:
            focks.pop(0)
            errors.pop(0)
        F_use = F
        if len(focks) >= 2:
            F_use = _diis_extrapolate(focks, errors) if np.abs(err).max() > 1e-14 else F
        eps, C = _diagonalize(F_use, X)
        D_new = 2.0 * C[:, :nocc] @ C[:, :nocc].T
        rms = np.sqrt(np.mean((D_new - D) ** 2))
        D = D_new
        if rms < conv_tol:
            converged = True
            break

    # final orbitals from the true Fock matrix of the converged density
    F = _fock(hcore, ints.ERI, D)
    eps, C = _diagonalize(F, X)
    D = 2.0 * C[:, :nocc] @ C[:, :nocc].T
    e_elec = 0.5 * np.sum(D * (hcore + F))
    degenerate = nocc < len(eps) and abs(eps[nocc] - eps[nocc - 1]) < DEGENERACY_TOL
    result = ScfResult(
        mo_coefficients=C, orbital_energies=eps, E_hf=float(e_elec + ints.E_nuc),
        converged=converged, n_iterations=it, n_occupied=nocc, density=D, fock=F,
        homo_lumo_degenerate=bool(degenerate),
    )
    if not converged:
        raise ScfNotConverged(f"RHF not converged in {max_iter} iterations", result)
    log.debug("RHF converged in %d iterations, E = %.12f", it, result.E_hf)
    return result


def _diis_extrapolate(focks, errors):
    n = len(focks)
    B = -np.ones((n + 1, n + 1))
    B[n, n] = 0.0
    for i in range(n):
        for j in range(n):
            B[i, j] = np.sum(errors[i] * errors[j])
    rhs = np.zeros(n + 1)
    rhs[n] = -1.0
    try:
        c = np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError:
        # singular subspace: plain mixing of the two newest matrices
        return 0.5 * (focks[-1] + focks[-2])
    return sum(ci * Fi for ci, Fi in zip(c[:n], focks))


def orbital_energy_sum(ints: MolecularIntegrals, scf: ScfResult) -> float:
    """E_hf via sum over occupied (eps_i + h_ii) plus nuclear repulsion."""
    C = scf.mo_coefficients[:, : scf.n_occupied]
    h_mo = np.einsum("pi,pq,qi->i", C, ints.hcore, C)
    return float(np.sum(scf.orbital_energies[: scf.n_occupied] + h_mo) + ints.E_nuc)


@dataclass(frozen=True)
class SpinOrbitalIntegrals:
    h1: np.ndarray          # (2n, 2n)
    h2_antisym: np.ndarray  # <pq||rs>, physicists' notation
    E_nuc: float
    orbital_energies: np.ndarray  # spin-orbital energies, block-spin order
    n_electrons: int
    h1_mo: np.ndarray       # spatial MO one-body matrix
    eri_mo: np.ndarray      # spatial MO (pq|rs)
    ordering: str = "block-spin"

    @property
    def n_spin_orbitals(self) -> int:
        return self.h1.shape[0]

    @property
    def n_spatial(self) -> int:
        return self.n_spin_orbitals // 2

    @property
    def occupied(self) -> list:
        half = self.n_electrons // 2
        return list(range(half)) + [self.n_spatial + k for k in range(half)]

    @property
    def virtual(self) -> list:
        occ = set(self.occupied)
        return [p for p in range(self.n_spin_orbitals) if p not in occ]

    def hf_energy(self) -> float:
        occ = self.occupied
        e = sum(self.h1[i, i] for i in occ)
        e += 0.5 * sum(self.h2_antisym[i, j, i, j] for i in occ for j in occ)
        return float(e + self.E_nuc)

    def write_fcidump(self, path) -> None:
        write_fcidump(path, self.h1_mo, self.eri_mo, self.E_nuc, self.n_electrons)


def spin_of(p: int, n_spatial: int) -> int:
    """0 for alpha, 1 for beta in block-spin order."""
    return p // n_spatial


def to_spin_orbitals(ints: MolecularIntegrals, scf: ScfResult) -> SpinOrbitalIntegrals:
    C = scf.mo_coefficients
    n = C.shape[1]
    h_mo = C.T @ ints.hcore @ C
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, ints.ERI, optimize=True)

    nso = 2 * n
    spatial = np.arange(nso) % n
    spin = np.arange(nso) // n
    same = spin[:, None] == spin[None, :]
    h1 = np.where(same, h_mo[np.ix_(spatial, spatial)], 0.0)

    # <pq|rs> = (pr|qs) delta(sp,sr) delta(sq,ss)
    chem = eri_mo[np.ix_(spatial, spatial, spatial, spatial)]
    mask = same[:, :, None, None] & same[None, None, :, :]  # (p r) and (q s) spins
    chem = np.where(mask, chem, 0.0)       # indices (p, r, q, s)
    phys = chem.transpose(0, 2, 1, 3)      # <pq|rs>
    anti = phys - phys.transpose(0, 1, 3, 2)
    # mathematically a no-op; makes <pq||rs> = -<qp||rs> hold bit for bit
    anti = 0.5 * (anti - anti.transpose(1, 0, 2, 3))
    eps_so = np.concatenate([scf.orbital_energies, scf.orbital_energies])
    return SpinOrbitalIntegrals(
        h1=h1, h2_antisym=anti, E_nuc=ints.E_nuc, orbital_energies=eps_so,
        n_electrons=2 * scf.n_occupied, h1_mo=h_mo, eri_mo=eri_mo,
    )


@dataclass(frozen=True)
class AmplitudeVector:
    excitations: tuple
    values: np.ndarray
    mp2_energy: float = 0.0

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict:
        return dict(zip(self.excitations, self.values))


def mp2_amplitudes(so: SpinOrbitalIntegrals, eps=None, pool=None) -> AmplitudeVector:
    """theta_ij^ab = <ij||ab> / (e_i + e_j - e_a - e_b) for each pool excitation.

    The correlation energy reported is the full MP2 value, independent of the
    pool, so it can be compared against reference programs.
    """
    eps = so.orbital_energies if eps is None else np.asarray(eps)
    excitations = tuple(pool.excitations) if pool is not None else ()
    vals = np.zeros(len(excitations))
    for k, ex in enumerate(excitations):
        i, j, a, b = ex.i, ex.j, ex.a, ex.b
        denom = eps[i] + eps[j] - eps[a] - eps[b]
        if abs(denom) < DEGENERACY_TOL:
            raise DegenerateDenominator(ex, denom)
        vals[k] = so.h2_antisym[i, j, a, b] / denom
    return AmplitudeVector(excitations, vals, mp2_energy=mp2_energy(so, eps))


def mp2_energy(so: SpinOrbitalIntegrals, eps=None) -> float:
    eps = so.orbital_energies if eps is None else np.asarray(eps)
    occ, vir = so.occupied, so.virtual
    g = so.h2_antisym[np.ix_(occ, occ, vir, vir)]
    e_o = eps[occ]
    e_v = eps[vir]
    d = e_o[:, None, None, None] + e_o[None, :, None, None] - e_v[None, None, :, None] - e_v[None, None, None, :]
    return float(0.25 * np.sum(g * g / d))


def zero_amplitudes(pool) -> AmplitudeVector:
    return AmplitudeVector(tuple(pool.excitations), np.zeros(len(pool.excitations)))
