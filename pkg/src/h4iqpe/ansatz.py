"""UCCD excitation pools and Trotterised state preparation."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import InvalidInput
from .qham import Excitation, map_excitation
from .simstate import CompiledGenerator, Statevector, apply_exp_generator, basis_state


def _spin_tag(p: int, n_spatial: int) -> str:
    return "a" if p < n_spatial else "b"


@dataclass(frozen=True)
class ExcitationPool:
    excitations: tuple
    flavor: str
    n_spatial: int
    n_electrons: int

    def __len__(self):
        return len(self.excitations)

    def __iter__(self):
        return iter(self.excitations)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_spatial

    @property
    def hf_bits(self) -> str:
        half = self.n_electrons // 2
        occ = list(range(half)) + [self.n_spatial + k for k in range(half)]
        return "".join("1" if q in occ else "0" for q in reversed(range(self.n_qubits)))

    def hf_state(self) -> Statevector:
        return basis_state(self.n_qubits, self.hf_bits)

    def spin_tags(self, ex: Excitation) -> str:
        occ = _spin_tag(ex.i, self.n_spatial) + _spin_tag(ex.j, self.n_spatial)
        vir = _spin_tag(ex.a, self.n_spatial) + _spin_tag(ex.b, self.n_spatial)
        return f"{occ}->{vir}"

    @cached_property
    def circuit(self) -> "PreparedCircuit":
        gens = tuple(
            CompiledGenerator.from_pauli_sum(map_excitation(ex, self.n_qubits)) for ex in self.excitations
        )
        return PreparedCircuit(gens, tuple(range(len(gens))))

    def dump(self) -> str:
        lines = [f"# flavor={self.flavor} size={len(self)}"]
        for slot, ex in enumerate(self.excitations):
            lines.append(f"{slot:3d}  {ex.i} {ex.j} -> {ex.a} {ex.b}  {self.spin_tags(ex)}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PreparedCircuit:
    generators: tuple
    slots: tuple
    trotter_steps: int = 1


def _sz_conserving(ex: Excitation, n_spatial: int) -> bool:
    spin = lambda p: p // n_spatial  # noqa: E731
    return sorted((spin(ex.i), spin(ex.j))) == sorted((spin(ex.a), spin(ex.b)))


def _doubles(occ, vir, n_spatial):
    out = []
    for i, j in combinations(sorted(occ), 2):
        for a, b in combinations(sorted(vir), 2):
            ex = Excitation(i, j, a, b)
            if _sz_conserving(ex, n_spatial):
                out.append(ex)
    return tuple(sorted(out))


def build_uccd_pool(n_spatial: int = 4, n_electrons: int = 4) -> ExcitationPool:
    """All S_z-conserving doubles from the HF occupied to the virtual spin orbitals."""
    if n_electrons % 2 or not 0 < n_electrons < 2 * n_spatial:
        raise InvalidInput("need a closed-shell HF reference")
    half = n_electrons // 2
    occ = list(range(half)) + [n_spatial + k for k in range(half)]
    vir = [p for p in range(2 * n_spatial) if p not in occ]
    return ExcitationPool(_doubles(occ, vir, n_spatial), "full", n_spatial, n_electrons)


def build_minimal_pool(active_occupied=(1, 5), active_virtual=(2, 6),
                       n_spatial: int = 4, n_electrons: int = 4) -> ExcitationPool:
    """Doubles restricted to the chemically active spin orbitals."""
    half = n_electrons // 2
    occ = set(range(half)) | {n_spatial + k for k in range(half)}
    if not set(active_occupied) <= occ or set(active_virtual) & occ:
        raise InvalidInput("active occupied/virtual sets are inconsistent with the HF reference")
    exs = _doubles(active_occupied, active_virtual, n_spatial)
    if not exs:
        raise InvalidInput("active space admits no S_z-conserving double excitation")
    return ExcitationPool(exs, "minimal", n_spatial, n_electrons)


def build_pool(flavor: str, **kw) -> ExcitationPool:
    if flavor in ("full", "uccd-full"):
        return build_uccd_pool(**kw)
    if flavor in ("minimal", "uccd-min"):
        return build_minimal_pool(**kw)
    raise InvalidInput(f"unknown pool flavor {flavor!r}")


def prepare_state(pool: ExcitationPool, theta, hf: Statevector | None = None,
                  trotter_steps: int = 1, order=None) -> Statevector:
    """prod_k exp(theta_k/s G_k), repeated s = trotter_steps times, on the HF state.

    ``order`` optionally permutes the application order of the pool entries.
    """
    theta = np.asarray(getattr(theta, "values", theta), dtype=float)
    if theta.shape != (len(pool),):
        raise InvalidInput(f"expected {len(pool)} amplitudes, got {theta.shape}")
    if trotter_steps < 1:
        raise InvalidInput("trotter_steps must be >= 1")
    state = (hf if hf is not None else pool.hf_state()).copy()
    gens = pool.circuit.generators
    seq = range(len(pool)) if order is None else order
    for _ in range(trotter_steps):
        for k in seq:
            if theta[k] != 0.0:
                apply_exp_generator(state, gens[k], theta[k] / trotter_steps)
    return state
