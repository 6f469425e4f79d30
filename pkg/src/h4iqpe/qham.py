"""Pauli-string algebra and the Jordan-Wigner qubit Hamiltonian.

A Pauli string is stored as two bitmasks: bit q of ``x`` / ``z`` says whether
qubit q carries an X / Z factor, with (1, 1) meaning Y.  Qubit 0 is the
least significant bit.  Printed labels list the highest qubit first, so the
Hartree-Fock determinant of H4 reads ``00110011``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInput

DROP_TOL = 1e-12

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}
_I_POW = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x: int
    z: int

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        label = label.replace(" ", "").upper()
        x = z = 0
        for q, ch in enumerate(reversed(label)):
            if ch not in _BITS:
                raise InvalidInput(f"bad Pauli letter {ch!r}")
            bx, bz = _BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @property
    def label(self) -> str:
        return "".join(
            _LETTERS[((self.x >> q) & 1, (self.z >> q) & 1)]
            for q in reversed(range(self.n_qubits))
        )

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def n_y(self) -> int:
        return _popcount(self.x & self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def commutes(self, other: "PauliString") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n matrix, built qubit by qubit with Kronecker products."""
        mats = {
            "I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1]),
        }
        out = np.ones((1, 1), dtype=complex)
        for ch in self.label:  # highest qubit is the leftmost Kronecker factor
            out = np.kron(out, mats[ch])
        return out

    def __str__(self):
        return self.label


def pauli_mul(a: PauliString, b: PauliString):
    """Return ``(phase, c)`` with ``a @ b == phase * c``."""
    if a.n_qubits != b.n_qubits:
        raise InvalidInput(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    x, z = a.x ^ b.x, a.z ^ b.z
    k = a.n_y + b.n_y - _popcount(x & z) + 2 * _popcount(a.z & b.x)
    return _I_POW[k % 4], PauliString(a.n_qubits, x, z)


# --- operator sums: dict (x, z) -> complex -----------------------------------

def _op_mul(a: dict, b: dict, n: int) -> dict:
    out: dict = {}
    for (ax, az), ca in a.items():
        for (bx, bz), cb in b.items():
            ph, p = pauli_mul(PauliString(n, ax, az), PauliString(n, bx, bz))
            key = (p.x, p.z)
            out[key] = out.get(key, 0.0) + ph * ca * cb
    return out


def _op_add(acc: dict, b: dict, scale=1.0) -> None:
    for k, v in b.items():
        acc[k] = acc.get(k, 0.0) + scale * v


def _op_clean(a: dict, tol: float = DROP_TOL) -> dict:
    return {k: v for k, v in a.items() if abs(v) > tol}


def creation(p: int) -> dict:
    """JW image of a_p^dagger = (X_p - i Y_p)/2 with a Z chain on qubits < p."""
    chain = (1 << p) - 1
    return {(1 << p, chain): 0.5, (1 << p, chain | (1 << p)): -0.5j}


def annihilation(p: int) -> dict:
    chain = (1 << p) - 1
    return {(1 << p, chain): 0.5, (1 << p, chain | (1 << p)): 0.5j}


def fermion_product(ops, n: int) -> dict:
    """JW image of a product of ladder operators.

    ``ops`` is a sequence of ``(index, dagger)`` pairs, leftmost first.
    """
    acc = {(0, 0): 1.0 + 0j}
    for idx, dag in ops:
        acc = _op_mul(acc, creation(idx) if dag else annihilation(idx), n)
    return _op_clean(acc, 1e-15)


@dataclass(frozen=True)
class PauliSum:
    """Generic (not necessarily Hermitian) sum of Pauli strings."""

    n_qubits: int
    terms: dict = field(default_factory=dict)  # PauliString -> complex

    @classmethod
    def from_raw(cls, raw: dict, n: int, tol: float = DROP_TOL) -> "PauliSum":
        items = sorted((PauliString(n, x, z), complex(c)) for (x, z), c in raw.items() if abs(c) > tol)
        return cls(n, dict(items))

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        raw = {(p.x, p.z): c for p, c in self.terms.items()}
        _op_add(raw, {(p.x, p.z): c for p, c in other.terms.items()})
        return PauliSum.from_raw(raw, self.n_qubits)

    def __mul__(self, other: "PauliSum") -> "PauliSum":
        a = {(p.x, p.z): c for p, c in self.terms.items()}
        b = {(p.x, p.z): c for p, c in other.terms.items()}
        return PauliSum.from_raw(_op_mul(a, b, self.n_qubits), self.n_qubits)

    def scaled(self, s: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, {p: s * c for p, c in self.terms.items()})

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {p: np.conj(c) for p, c in self.terms.items()})

    def commutator(self, other: "PauliSum") -> "PauliSum":
        return self * other + (other * self).scaled(-1.0)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for p, c in self.terms.items():
            out += c * p.to_matrix()
        return out


class QubitHamiltonian:
    """Real-weighted Pauli sum sum_a h_a P_a; the identity term carries E_nuc."""

    def __init__(self, n_qubits: int, terms: dict):
        self.n_qubits = n_qubits
        clean = {}
        for p, c in terms.items():
            c = complex(c)
            if abs(c.imag) > 1e-10:
                raise InvalidInput(f"non-Hermitian coefficient {c} on {p}")
            if abs(c.real) > DROP_TOL:
                clean[p] = c.real
        self.terms = dict(sorted(clean.items(), key=lambda kv: (kv[0].x, kv[0].z)))
        self.xs = np.array([p.x for p in self.terms], dtype=np.int64)
        self.zs = np.array([p.z for p in self.terms], dtype=np.int64)
        self.coeffs = np.array(list(self.terms.values()), dtype=float)

    def __len__(self):
        return len(self.terms)

    @property
    def constant(self) -> float:
        return self.terms.get(PauliString.identity(self.n_qubits), 0.0)

    @property
    def one_norm(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def as_pauli_sum(self) -> PauliSum:
        return PauliSum(self.n_qubits, {p: complex(c) for p, c in self.terms.items()})

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        dim = 1 << self.n_qubits
        idx = np.arange(dim, dtype=np.int64)
        rows, cols, vals = [], [], []
        for p, c in self.terms.items():
            # <idx ^ x | P | idx> = i^{n_y} (-1)^{|z & idx|}
            par = _parity_array(idx & p.z)
            rows.append(idx ^ p.x)
            cols.append(idx)
            vals.append(c * _I_POW[p.n_y % 4] * (1 - 2 * par))
        m = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )
        m.sum_duplicates()
        return m

    def to_dense(self) -> np.ndarray:
        return self.sparse.toarray()

    def dump(self) -> str:
        """One line per term: ``coefficient word``, word grouped in nibbles."""
        lines = []
        for p, c in self.terms.items():
            lab = p.label
            pad = (-len(lab)) % 4
            lab = "I" * pad + lab
            grouped = " ".join(lab[i:i + 4] for i in range(0, len(lab), 4))
            lines.append(f"{c:+.12e} {grouped[pad:] if pad else grouped}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str, n_qubits: int | None = None) -> "QubitHamiltonian":
        terms = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            coeff, *word = line.split()
            p = PauliString.from_label("".join(word))
            if n_qubits is not None and p.n_qubits != n_qubits:
                raise InvalidInput("qubit count mismatch in Hamiltonian dump")
            terms[p] = terms.get(p, 0.0) + float(coeff)
        n = n_qubits if n_qubits is not None else next(iter(terms)).n_qubits
        return cls(n, terms)


def _parity_array(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    par = np.zeros_like(v)
    while np.any(v):
        par ^= v & 1
        v >>= 1
    return par


def jordan_wigner(so) -> QubitHamiltonian:
    """Map H = sum h_pq a+_p a_q + 1/4 sum <pq||rs> a+_p a+_q a_s a_r + E_nuc."""
    n = so.n_spin_orbitals
    ladder = {}
    for p in range(n):
        for q in range(n):
            ladder[p, q] = _op_mul(creation(p), annihilation(q), n)
    acc: dict = {(0, 0): complex(so.E_nuc)}
    for p in range(n):
        for q in range(n):
            if abs(so.h1[p, q]) > DROP_TOL:
                _op_add(acc, ladder[p, q], so.h1[p, q])
    g = so.h2_antisym
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            for r in range(n):
                for s in range(n):
                    if r == s or abs(g[p, q, r, s]) <= DROP_TOL:
                        continue
                    # a+_p a+_q a_s a_r = a+_p (a+_q a_s) a_r
                    term = _op_mul(_op_mul(creation(p), ladder[q, s], n), annihilation(r), n)
                    _op_add(acc, term, 0.25 * g[p, q, r, s])
    acc = _op_clean(acc)
    return QubitHamiltonian(n, {PauliString(n, x, z): c for (x, z), c in acc.items()})


def number_operator(n: int) -> PauliSum:
    acc: dict = {}
    for p in range(n):
        _op_add(acc, _op_mul(creation(p), annihilation(p), n))
    return PauliSum.from_raw(acc, n)


def sz_operator(n: int) -> PauliSum:
    half = n // 2
    acc: dict = {}
    for p in range(n):
        _op_add(acc, _op_mul(creation(p), annihilation(p), n), 0.5 if p < half else -0.5)
    return PauliSum.from_raw(acc, n)


class Excitation(NamedTuple):
    """Double excitation i, j -> a, b (spin-orbital indices, i < j, a < b)."""

    i: int
    j: int
    a: int
    b: int

    def __str__(self):
        return f"{self.i},{self.j}->{self.a},{self.b}"


def excitation_operator(ex: Excitation, n: int) -> PauliSum:
    """JW image of a+_a a+_b a_j a_i."""
    return PauliSum.from_raw(
        fermion_product([(ex.a, True), (ex.b, True), (ex.j, False), (ex.i, False)], n), n, 1e-15
    )


def map_excitation(ex: Excitation, n: int = 8) -> PauliSum:
    """Anti-Hermitian generator a+_a a+_b a_j a_i - h.c. as a Pauli sum."""
    idx = (ex.i, ex.j, ex.a, ex.b)
    if len(set(idx)) != 4 or max(idx) >= n or min(idx) < 0:
        raise InvalidInput(f"invalid excitation indices {ex}")
    t = excitation_operator(ex, n)
    gen = t + t.dagger().scaled(-1.0)
    for c in gen.terms.values():
        if abs(c.real) > 1e-12:
            raise AssertionError("excitation generator is not anti-Hermitian")
    return gen
