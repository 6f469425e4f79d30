"""Single-ancilla iterative phase estimation.

The controlled unitary is U = exp(+i (H - E_ref) t), so an eigenvalue E has
phase phi = (E - E_ref) t / 2pi in [0, 1) and energy reconstruction is
linear: E = E_ref + 2pi phi / t.  Bits are extracted least significant first
with the usual phase-correction feedback.

Bit decision modes
------------------
deterministic
    threshold the exact ancilla probability, bit = p1 >= 0.5.
sampled
    ``shots`` Born samples per bit, majority vote (ties resolve to 1).
trajectory
    one sample per bit and the system register is carried over in its
    post-measurement state; this is the physical single-run circuit.

In the first two modes every bit's circuit starts again from the initial
state, so no collapse propagates between bits.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidInput
from .simstate import (
    EvolutionCache,
    Statevector,
    ancilla_probability,
    controlled_evolve,
    hadamard_ancilla,
    joint_state,
    make_rng,
    phase_ancilla,
    project_ancilla,
    sample_bits,
)

TWO_PI = 2.0 * math.pi
MODES = ("deterministic", "sampled", "trajectory")


@dataclass(frozen=True)
class PhaseWindow:
    e_ref: float
    t: float = 1.0
    e_max_bound: float = 0.0

    def phase_of(self, energy: float) -> float:
        return (energy - self.e_ref) * self.t / TWO_PI

    def energy_of(self, phase: float) -> float:
        return self.e_ref + TWO_PI * phase / self.t

    def check(self, eigenvalues) -> None:
        ph = (np.asarray(eigenvalues) - self.e_ref) * self.t
        if ph.min() < 0.0 or ph.max() >= TWO_PI:
            raise InvalidInput(
                f"spectrum [{np.min(eigenvalues):.6f}, {np.max(eigenvalues):.6f}] "
                f"does not fit the phase window E_ref={self.e_ref:.6f}, t={self.t:.6f}"
            )


def build_phase_window(H, cache: EvolutionCache, placement: str = "centered",
                       margin_fraction: float = 0.05, min_margin: float = 0.1,
                       guard: float = 0.1) -> PhaseWindow:
    """Map the sector spectrum into phases in [0, 1).

    ``placement="centered"`` puts the middle of the spectrum at phase 1/2, so
    a wrong leading bit moves the estimate by about pi rather than wrapping
    it around the whole window.  ``placement="bottom"`` leaves a margin of
    max(margin_fraction * span, min_margin) below the lowest eigenvalue.
    With t = 1 one bit of phase resolution is 2pi 2^-m hartree.
    """
    e_min = float(cache.eigenvalues[0])
    e_max = float(cache.eigenvalues[-1])
    span = e_max - e_min
    if not span > 0.0:
        raise InvalidInput(f"sector spectrum span must be positive, got {span}")
    if placement == "bottom":
        margin = max(margin_fraction * span, min_margin)
        extent = span + margin
        t = 1.0 if extent < TWO_PI else (TWO_PI - guard) / extent
        e_ref = e_min - margin
    elif placement == "centered":
        t = 1.0 if span < TWO_PI - guard else (TWO_PI - guard) / span
        e_ref = 0.5 * (e_min + e_max) - math.pi / t
    else:
        raise InvalidInput(f"unknown window placement {placement!r}")
    window = PhaseWindow(e_ref=e_ref, t=t, e_max_bound=e_max)
    window.check(cache.eigenvalues)
    return window


@dataclass
class PhaseRecord:
    bits: list                 # most significant first
    phase: float
    energy: float
    probabilities: list        # p1 per bit, most significant first
    counts: list               # (count0, count1) per bit, most significant first
    mode: str
    shots: int
    seed: int | None = None

    @property
    def phase_int(self) -> int:
        return int("".join(str(b) for b in self.bits), 2)

    @property
    def bitstring(self) -> str:
        return "0." + "".join(str(b) for b in self.bits)


def feedback_angle(lower_bits: dict, k: int) -> float:
    """omega_k = -2pi sum_{j>k} phi_j 2^{k-j-1}."""
    return -TWO_PI * sum(b * 2.0 ** (k - j - 1) for j, b in lower_bits.items() if j > k)


def iqpe_bit_circuit(init: Statevector, cache: EvolutionCache, window: PhaseWindow,
                     k: int, lower_bits: dict) -> Statevector:
    """Joint state after H, controlled-U^(2^(k-1)), feedback rotation and H."""
    joint = joint_state(init)
    hadamard_ancilla(joint)
    controlled_evolve(joint, cache, window.t * 2.0 ** (k - 1), window.e_ref)
    phase_ancilla(joint, feedback_angle(lower_bits, k))
    hadamard_ancilla(joint)
    return joint


def run_iqpe(init: Statevector, cache: EvolutionCache, window: PhaseWindow, m_bits: int,
             mode: str = "deterministic", shots: int = 1, rng=None, seed: int | None = None,
             tie_bit: int = 1) -> PhaseRecord:
    if m_bits < 1:
        raise InvalidInput("m_bits must be >= 1")
    if mode not in MODES:
        raise InvalidInput(f"unknown IQPE mode {mode!r}")
    if mode != "deterministic":
        if shots < 1:
            raise InvalidInput("sampled IQPE needs shots >= 1")
        if mode == "trajectory" and shots != 1:
            raise InvalidInput("trajectory mode takes exactly one shot per bit")
        if rng is None:
            rng = make_rng(0 if seed is None else seed)
    nrm = init.norm()
    if abs(nrm - 1.0) > 1e-8:
        raise InvalidInput(f"initial state not normalised (norm {nrm})")

    bits: dict = {}
    probs: dict = {}
    counts: dict = {}
    system = init
    for k in range(m_bits, 0, -1):
        joint = iqpe_bit_circuit(system, cache, window, k, bits)
        p1 = ancilla_probability(joint)
        probs[k] = p1
        if mode == "deterministic":
            bits[k] = 1 if p1 >= 0.5 else 0
            counts[k] = (0, 0)
        else:
            c0, c1 = sample_bits(p1, shots, rng)
            counts[k] = (c0, c1)
            bits[k] = (1 if c1 > c0 else 0) if c1 != c0 else tie_bit
            if mode == "trajectory":
                system = project_ancilla(joint, bits[k])

    msb_first = [bits[k] for k in range(1, m_bits + 1)]
    phase = sum(b * 2.0 ** (-j) for j, b in enumerate(msb_first, start=1))
    return PhaseRecord(
        bits=msb_first, phase=phase, energy=window.energy_of(phase),
        probabilities=[probs[k] for k in range(1, m_bits + 1)],
        counts=[counts[k] for k in range(1, m_bits + 1)],
        mode=mode, shots=shots if mode != "deterministic" else 0, seed=seed,
    )


def phase_to_energy(record: PhaseRecord, window: PhaseWindow) -> float:
    if not 0.0 <= record.phase < 1.0:
        raise InvalidInput(f"phase {record.phase} outside [0, 1)")
    return window.energy_of(record.phase)


def quantization_bound(m_bits: int, window: PhaseWindow) -> float:
    """2pi 2^-m / t, the energy resolution of an m-bit readout."""
    return TWO_PI * 2.0 ** (-m_bits) / window.t


# --- repetition statistics ----------------------------------------------------

@dataclass
class ShotStatistics:
    repetitions: int
    energies: list
    modal_energy: float
    modal_frequency: int
    spread: float
    histogram: dict
    seeds: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = [{"energy_hartree": e, "count": c} for e, c in sorted(self.histogram.items())]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def write_histogram_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("energy_hartree,count\n")
            for e, c in sorted(self.histogram.items()):
                fh.write(f"{e:.12f},{c}\n")


def derive_seeds(master_seed: int, n: int) -> list:
    children = np.random.SeedSequence(int(master_seed)).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def summarize(energies, seeds=(), config=None) -> ShotStatistics:
    energies = [float(e) for e in energies]
    if not energies:
        raise InvalidInput("no energies to summarise")
    hist = Counter(energies)
    top = max(hist.values())
    modal = min(e for e, c in hist.items() if c == top)
    return ShotStatistics(
        repetitions=len(energies), energies=energies, modal_energy=modal, modal_frequency=top,
        spread=max(energies) - min(energies), histogram=dict(hist), seeds=list(seeds),
        config=dict(config or {}),
    )


def repeat_experiment(init: Statevector, cache: EvolutionCache, window: PhaseWindow, m_bits: int,
                      shots: int, repetitions: int = 40, master_seed: int = 0,
                      mode: str = "sampled", config=None, tie_bit: int = 1) -> ShotStatistics:
    """``repetitions`` independent sampled IQPE runs on the same prepared state."""
    if repetitions < 1:
        raise InvalidInput("repetitions must be >= 1")
    seeds = derive_seeds(master_seed, repetitions)
    energies = [
        run_iqpe(init, cache, window, m_bits, mode=mode, shots=shots, seed=s, tie_bit=tie_bit).energy
        for s in seeds
    ]
    cfg = {"m_bits": m_bits, "shots": shots, "repetitions": repetitions,
           "master_seed": master_seed, "mode": mode, "tie_bit": tie_bit}
    cfg.update(config or {})
    return summarize(energies, seeds, cfg)
