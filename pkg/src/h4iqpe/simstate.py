"""Dense statevector engine.

Indexing is little-endian: qubit 0 is the least significant bit of the
amplitude index.  For the joint ancilla + system register used by phase
estimation the ancilla is the most significant qubit, so the joint vector
is ``[system branch for ancilla 0, system branch for ancilla 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels_py, kernels
from .errors import InvalidInput, SectorLeak, StateCorrupt
from .qham import PauliString, PauliSum, QubitHamiltonian

NORM_TOL = 1e-8
LEAK_TOL = 1e-10


class Statevector:
    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes, n_qubits: int | None = None):
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        n = int(round(math.log2(amps.shape[0]))) if n_qubits is None else n_qubits
        if amps.shape != (1 << n,):
            raise InvalidInput(f"amplitude vector of length {amps.shape} does not match {n} qubits")
        self.n_qubits = n
        self.amplitudes = amps

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "Statevector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def amplitude(self, bits: str) -> complex:
        return complex(self.amplitudes[int(bits.replace(" ", ""), 2)])

    def significant(self, cutoff: float = 0.05):
        """(bitstring, amplitude) pairs with |amplitude| > cutoff, largest first."""
        idx = np.flatnonzero(np.abs(self.amplitudes) > cutoff)
        idx = idx[np.argsort(-np.abs(self.amplitudes[idx]), kind="stable")]
        return [(format(int(i), f"0{self.n_qubits}b"), complex(self.amplitudes[i])) for i in idx]

    def __repr__(self):
        return f"Statevector(n_qubits={self.n_qubits})"


def basis_state(n_qubits: int, bits: str) -> Statevector:
    """Computational basis state; ``bits`` lists the highest qubit first."""
    bits = bits.replace(" ", "")
    if len(bits) != n_qubits or set(bits) - {"0", "1"}:
        raise InvalidInput(f"malformed occupation string {bits!r} for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return Statevector(amps, n_qubits)


def apply_exp_pauli(state: Statevector, pauli: PauliString, angle: float) -> Statevector:
    """In place: state <- exp(-i angle/2 P) state."""
    if pauli.n_qubits != state.n_qubits:
        raise InvalidInput("Pauli string and state disagree on qubit count")
    kernels.apply_exp_pauli(state.amplitudes, pauli.x, pauli.z, pauli.n_y, float(angle))
    return state


@dataclass(frozen=True)
class CompiledGenerator:
    """Anti-Hermitian sum i * sum_k g_k P_k of mutually commuting strings."""

    xs: np.ndarray
    zs: np.ndarray
    nys: np.ndarray
    weights: np.ndarray  # g_k

    @classmethod
    def from_pauli_sum(cls, gen: PauliSum) -> "CompiledGenerator":
        strings = list(gen.terms)
        for a in range(len(strings)):
            for b in range(a + 1, len(strings)):
                if not strings[a].commutes(strings[b]):
                    raise InvalidInput("generator terms do not commute; factorise per term instead")
        w = []
        for c in gen.terms.values():
            if abs(c.real) > 1e-12:
                raise InvalidInput("generator is not anti-Hermitian")
            w.append(c.imag)
        return cls(
            np.array([p.x for p in strings], dtype=np.int64),
            np.array([p.z for p in strings], dtype=np.int64),
            np.array([p.n_y for p in strings], dtype=np.int64),
            np.array(w, dtype=float),
        )

    def angles(self, theta: float) -> np.ndarray:
        # exp(theta * i g P) = exp(-i (-2 theta g)/2 P)
        return -2.0 * theta * self.weights


def apply_exp_generator(state: Statevector, gen: CompiledGenerator, theta: float) -> Statevector:
    """In place: state <- exp(theta * G) state for a compiled anti-Hermitian G."""
    kernels.apply_exp_pauli_sequence(state.amplitudes, gen.xs, gen.zs, gen.nys, gen.angles(theta))
    return state


def expectation(state: Statevector, H: QubitHamiltonian) -> float:
    if state.n_qubits != H.n_qubits:
        raise InvalidInput("state and Hamiltonian disagree on qubit count")
    nrm = state.norm()
    if abs(nrm - 1.0) > NORM_TOL:
        raise StateCorrupt(f"state norm {nrm!r} drifted from 1")
    nys = _nys(H)
    val = kernels.pauli_expectation(state.amplitudes, H.xs, H.zs, nys, H.coeffs)
    if abs(val.imag) > 1e-10:
        raise StateCorrupt(f"expectation has imaginary residual {val.imag:.3e}")
    return float(val.real)


def _nys(H: QubitHamiltonian) -> np.ndarray:
    nys = getattr(H, "_nys", None)
    if nys is None:
        nys = np.array([p.n_y for p in H.terms], dtype=np.int64)
        H._nys = nys
    return nys


def apply_operator(state: Statevector, op: PauliSum) -> Statevector:
    """Return op|state> (not normalised)."""
    out = np.zeros_like(state.amplitudes)
    for p, c in op.terms.items():
        out += c * _kernels_py._pauli_apply(state.amplitudes, p.x, p.z, p.n_y)
    return Statevector(out, state.n_qubits)


def operator_expectation(state: Statevector, op: PauliSum) -> complex:
    return state.inner(apply_operator(state, op))


# --- particle-number / spin sector ---------------------------------------------

def sector_indices(n_qubits: int, n_electrons: int, s_z: float = 0.0) -> np.ndarray:
    half = n_qubits // 2
    lo_mask = (1 << half) - 1
    out = []
    for idx in range(1 << n_qubits):
        n_a = bin(idx & lo_mask).count("1")
        n_b = bin(idx >> half).count("1")
        if n_a + n_b == n_electrons and 0.5 * (n_a - n_b) == s_z:
            out.append(idx)
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True)
class EvolutionCache:
    n_qubits: int
    basis: np.ndarray        # sector basis-state indices
    eigenvalues: np.ndarray  # ascending, hartree
    eigenvectors: np.ndarray  # columns in the sector basis
    hamiltonian_block: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def sector_amplitudes(self, amps: np.ndarray) -> np.ndarray:
        return amps[self.basis]

    def leakage(self, amps: np.ndarray) -> float:
        total = float(np.vdot(amps, amps).real)
        inside = float(np.vdot(amps[self.basis], amps[self.basis]).real)
        return max(total - inside, 0.0)

    def eigenvector_state(self, k: int) -> Statevector:
        amps = np.zeros(1 << self.n_qubits, dtype=np.complex128)
        amps[self.basis] = self.eigenvectors[:, k]
        return Statevector(amps, self.n_qubits)

    def eigen_weights(self, state: Statevector) -> np.ndarray:
        """|<u_n|state>|^2 for every sector eigenvector."""
        return np.abs(self.eigenvectors.T @ state.amplitudes[self.basis]) ** 2


def build_evolution_cache(H: QubitHamiltonian, n_electrons: int, s_z: float = 0.0) -> EvolutionCache:
    basis = sector_indices(H.n_qubits, n_electrons, s_z)
    if basis.size == 0:
        raise InvalidInput(f"empty sector N={n_electrons}, S_z={s_z}")
    cols = H.sparse[:, basis].toarray()
    block = cols[basis, :]
    outside = np.abs(cols).sum() - np.abs(block).sum()
    if outside > 1e-9:
        raise InvalidInput("Hamiltonian does not conserve the requested sector")
    if np.abs(block.imag).max() > 1e-12:
        raise InvalidInput("sector block is not real")
    block = block.real
    evals, evecs = np.linalg.eigh(block)
    return EvolutionCache(H.n_qubits, basis, evals, evecs, block)


# --- joint ancilla + system operations ---------------------------------------

def joint_state(system: Statevector, ancilla_one: bool = False) -> Statevector:
    dim = 1 << system.n_qubits
    amps = np.zeros(2 * dim, dtype=np.complex128)
    if ancilla_one:
        amps[dim:] = system.amplitudes
    else:
        amps[:dim] = system.amplitudes
    return Statevector(amps, system.n_qubits + 1)


def _branches(joint: Statevector):
    half = joint.amplitudes.shape[0] // 2
    return joint.amplitudes[:half], joint.amplitudes[half:]


def hadamard_ancilla(joint: Statevector) -> Statevector:
    b0, b1 = _branches(joint)
    s = 1.0 / math.sqrt(2.0)
    new0 = s * (b0 + b1)
    new1 = s * (b0 - b1)
    b0[:] = new0
    b1[:] = new1
    return joint


def phase_ancilla(joint: Statevector, omega: float) -> Statevector:
    """diag(1, e^{i omega}) on the ancilla."""
    _, b1 = _branches(joint)
    b1 *= np.exp(1j * omega)
    return joint


def controlled_evolve(joint: Statevector, cache: EvolutionCache, tau: float,
                      e_ref: float = 0.0) -> Statevector:
    """Multiply the ancilla-1 branch by exp(+i (H - e_ref) tau), exactly."""
    if joint.n_qubits != cache.n_qubits + 1:
        raise InvalidInput("joint state must carry one ancilla on top of the system register")
    _, b1 = _branches(joint)
    if cache.leakage(b1) > LEAK_TOL:
        raise SectorLeak(f"ancilla-1 branch leaks {cache.leakage(b1):.3e} outside the sector")
    if tau == 0.0:
        return joint
    V = cache.eigenvectors
    coeff = V.T @ b1[cache.basis]
    phases = np.exp(1j * np.mod((cache.eigenvalues - e_ref) * tau, 2.0 * math.pi))
    b1[cache.basis] = V @ (phases * coeff)
    return joint


def controlled_evolve_trotter(joint: Statevector, H: QubitHamiltonian, tau: float,
                              e_ref: float = 0.0, steps: int = 1) -> Statevector:
    """First-order product-formula version of :func:`controlled_evolve`."""
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    _, b1 = _branches(joint)
    dt = tau / steps
    mask = (H.xs != 0) | (H.zs != 0)
    xs, zs, nys = H.xs[mask], H.zs[mask], _nys(H)[mask]
    angles = -2.0 * H.coeffs[mask] * dt
    for _ in range(steps):
        kernels.apply_exp_pauli_sequence(b1, xs, zs, nys, angles)
    b1 *= np.exp(1j * (H.constant - e_ref) * tau)
    return joint


def ancilla_probability(joint: Statevector) -> float:
    _, b1 = _branches(joint)
    return float(np.clip(np.vdot(b1, b1).real, 0.0, 1.0))


def project_ancilla(joint: Statevector, outcome: int) -> Statevector:
    """Normalised system state after observing the ancilla in ``outcome``."""
    branch = _branches(joint)[outcome]
    nrm = np.linalg.norm(branch)
    if nrm < 1e-14:
        raise InvalidInput(f"ancilla outcome {outcome} has zero probability")
    return Statevector(branch / nrm, joint.n_qubits - 1)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator; the seed fully determines the stream."""
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_bits(p1: float, shots: int, rng: np.random.Generator):
    """Return (count0, count1) from ``shots`` Bernoulli(p1) draws."""
    if shots < 1:
        raise InvalidInput("shots must be >= 1")
    if not 0.0 <= p1 <= 1.0:
        raise InvalidInput(f"probability {p1} outside [0, 1]")
    ones = int(rng.binomial(shots, p1))
    return shots - ones, ones
