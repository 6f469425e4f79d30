"""Exact diagonalisation in the fixed-N, fixed-S_z determinant sector.

The sector Hamiltonian is assembled by applying ladder operators directly to
occupation bitmasks, so it shares no code with the Pauli-string route.
Determinant |n> = a+_{q1} a+_{q2} ... |vac> with q1 < q2 < ..., which is the
same phase convention the Jordan-Wigner Z chains produce; amplitudes can
therefore be compared with statevector amplitudes index by index.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInput, MissingLabel
from .qham import QubitHamiltonian
from .simstate import Statevector, sector_indices

SCREEN_THRESHOLD = 0.0025  # on |<HF|psi>|^2, i.e. |c| > 0.05
LABELS = ("GS", "ES1", "ES2", "ES3")


def jacobi_eigh(A: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    as columns.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, atol=1e-12):
        raise InvalidInput("jacobi_eigh needs a real symmetric matrix")
    V = np.eye(n)
    scale = max(np.abs(A).max(), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    evals = np.diag(A).copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], V[:, order]


def _annihilate(det: int, p: int):
    if not (det >> p) & 1:
        return None, 0
    sign = -1 if bin(det & ((1 << p) - 1)).count("1") & 1 else 1
    return det ^ (1 << p), sign


def _create(det: int, p: int):
    if (det >> p) & 1:
        return None, 0
    sign = -1 if bin(det & ((1 << p) - 1)).count("1") & 1 else 1
    return det | (1 << p), sign


def _apply_string(det: int, ops):
    """Apply ladder operators right to left; ops = [(index, dagger), ...] leftmost first."""
    sign = 1
    for idx, dag in reversed(ops):
        det, s = (_create if dag else _annihilate)(det, idx)
        if det is None:
            return None, 0
        sign *= s
    return det, sign


def determinant_hamiltonian(so, n_electrons: int | None = None, s_z: float = 0.0):
    """Sector basis indices and the dense sector Hamiltonian from spin-orbital integrals."""
    n = so.n_spin_orbitals
    ne = so.n_electrons if n_electrons is None else n_electrons
    basis = sector_indices(n, ne, s_z)
    pos = {int(d): k for k, d in enumerate(basis)}
    H = np.zeros((len(basis), len(basis)))
    one = [(p, q, so.h1[p, q]) for p in range(n) for q in range(n) if abs(so.h1[p, q]) > 1e-14]
    g = so.h2_antisym
    two = [
        (p, q, r, s, g[p, q, r, s])
        for p in range(n) for q in range(n) for r in range(n) for s in range(n)
        if abs(g[p, q, r, s]) > 1e-14
    ]
    for col, det in enumerate(basis):
        det = int(det)
        H[col, col] += so.E_nuc
        for p, q, v in one:
            out, sg = _apply_string(det, [(p, True), (q, False)])
            if out is not None:
                H[pos[out], col] += sg * v
        for p, q, r, s, v in two:
            out, sg = _apply_string(det, [(p, True), (q, True), (s, False), (r, False)])
            if out is not None:
                H[pos[out], col] += 0.25 * sg * v
    return basis, 0.5 * (H + H.T)


def _fix_gauge(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        mags = np.abs(col)
        top = np.flatnonzero(mags >= mags.max() - 1e-10)[0]
        if col[top] < 0:
            V[:, k] = -col
    return V


@dataclass(frozen=True)
class FciSolution:
    n_qubits: int
    basis: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: dict = field(default_factory=lambda: {"GS": 0})

    @property
    def determinants(self) -> list:
        return [format(int(d), f"0{self.n_qubits}b") for d in self.basis]

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def energy(self, label: str) -> float:
        return float(self.eigenvalues[self.labels[label]])

    def state(self, which) -> Statevector:
        k = self.labels[which] if isinstance(which, str) else int(which)
        amps = np.zeros(1 << self.n_qubits, dtype=np.complex128)
        amps[self.basis] = self.eigenvectors[:, k]
        return Statevector(amps, self.n_qubits)

    def coefficient(self, which, bits: str) -> float:
        k = self.labels[which] if isinstance(which, str) else int(which)
        idx = int(bits.replace(" ", ""), 2)
        hit = np.flatnonzero(self.basis == idx)
        if hit.size == 0:
            raise InvalidInput(f"determinant {bits} is outside the sector")
        return float(self.eigenvectors[hit[0], k])

    def coefficient_table(self, which, cutoff: float = 0.05):
        k = self.labels[which] if isinstance(which, str) else int(which)
        col = self.eigenvectors[:, k]
        order = np.argsort(-np.abs(col), kind="stable")
        return [(self.determinants[i], float(col[i])) for i in order if abs(col[i]) > cutoff]

    def write_csv(self, path, cutoff: float = 0.05) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "energy_hartree", "determinant", "coefficient"])
            for lab, k in self.labels.items():
                for det, c in self.coefficient_table(k, cutoff):
                    w.writerow([lab, f"{self.eigenvalues[k]:.12f}", det, f"{c:.6f}"])


def fci_solve(source, hf: Statevector | None = None, threshold: float = SCREEN_THRESHOLD,
              n_electrons: int | None = None) -> FciSolution:
    """Diagonalise the N, S_z=0 sector.

    ``source`` is either spin-orbital integrals (determinant route) or a
    :class:`QubitHamiltonian` (sector block of the qubit matrix).  If ``hf``
    is given, excited states are labelled with :func:`identify_states`.
    """
    if isinstance(source, QubitHamiltonian):
        if n_electrons is None:
            raise InvalidInput("n_electrons is required for a qubit Hamiltonian source")
        basis = sector_indices(source.n_qubits, n_electrons, 0.0)
        block = source.sparse[basis][:, basis].toarray()
        if np.abs(block.imag).max() > 1e-12:
            raise InvalidInput("sector block is not real")
        H = block.real
        n_qubits = source.n_qubits
    else:
        basis, H = determinant_hamiltonian(source, n_electrons)
        n_qubits = source.n_spin_orbitals
    evals, evecs = jacobi_eigh(H)
    sol = FciSolution(n_qubits, basis, evals, _fix_gauge(evecs))
    if hf is not None:
        sol = replace(sol, labels=identify_states(sol, hf, threshold))
    return sol


def identify_states(sol: FciSolution, hf: Statevector, threshold: float = SCREEN_THRESHOLD) -> dict:
    """GS plus the three lowest excited states whose HF weight exceeds ``threshold``."""
    weights = np.abs(sol.eigenvectors.T @ hf.amplitudes[sol.basis]) ** 2
    found = [k for k in range(1, len(sol.eigenvalues)) if weights[k] > threshold]
    if len(found) < 3:
        raise MissingLabel(found)
    return {"GS": 0, "ES1": found[0], "ES2": found[1], "ES3": found[2]}


@dataclass(frozen=True)
class OverlapReport:
    coefficients: dict  # label -> <psi_n|state>
    squared: dict       # label -> |c|^2
    all_weights: np.ndarray
    residual: float     # weight outside the labelled states

    def __getitem__(self, label):
        return self.squared[label]


def overlaps(state: Statevector, sol: FciSolution) -> OverlapReport:
    amps = state.amplitudes[sol.basis]
    proj = sol.eigenvectors.T @ amps
    weights = np.abs(proj) ** 2
    coeffs = {lab: complex(proj[k]) for lab, k in sol.labels.items()}
    sq = {lab: float(weights[k]) for lab, k in sol.labels.items()}
    residual = float(np.linalg.norm(state.amplitudes) ** 2 - sum(sq.values()))
    return OverlapReport(coeffs, sq, weights, residual)
