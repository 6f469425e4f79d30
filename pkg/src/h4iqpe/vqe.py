"""Derivative-free VQE driver.

"Iterations" throughout this module are objective evaluations: the trace
holds one record per energy evaluation and the budget caps their number.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .ansatz import ExcitationPool, prepare_state
from .errors import InvalidInput
from .qham import QubitHamiltonian
from .scf import mp2_amplitudes
from .simstate import Statevector, expectation, make_rng

log = logging.getLogger(__name__)

RHOBEG = 0.1
RHOEND = 1e-6


@dataclass(frozen=True)
class VqeConfig:
    guess: str = "mp2"
    max_iterations: int = 1000
    pool: str = "full"
    objective: str = "exact"
    shots: int = 0
    rhobeg: float = RHOBEG
    rhoend: float = RHOEND
    seed: int = 0
    trotter_steps: int = 1

    def __post_init__(self):
        if self.guess not in ("zero", "mp2"):
            raise InvalidInput(f"guess must be 'zero' or 'mp2', got {self.guess!r}")
        if self.max_iterations < 1:
            raise InvalidInput("max_iterations must be >= 1")
        if not self.rhoend < self.rhobeg:
            raise InvalidInput("rhoend must be smaller than rhobeg")
        if self.objective not in ("exact", "sampled"):
            raise InvalidInput(f"unknown objective mode {self.objective!r}")
        if self.objective == "sampled" and self.shots < 1:
            raise InvalidInput("sampled objective needs shots >= 1")


@dataclass
class TraceRecord:
    index: int
    theta: np.ndarray
    energy: float


@dataclass
class VqeTrace:
    pool: ExcitationPool
    records: list = field(default_factory=list)
    theta: np.ndarray | None = None
    energy: float = float("nan")
    converged: bool = False
    config: VqeConfig | None = None
    initial_theta: np.ndarray | None = None

    def __len__(self):
        return len(self.records)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.energies)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eval_index", "energy_hartree"] + [f"theta_{k}" for k in range(len(self.pool))])
            for r in self.records:
                w.writerow([r.index, f"{r.energy:.12f}"] + [f"{t:.12e}" for t in r.theta])


@dataclass(frozen=True)
class CobylaResult:
    x: np.ndarray
    fun: float
    nfev: int
    converged: bool
    history: list


def cobyla_minimize(objective, x0, rhobeg: float = RHOBEG, rhoend: float = RHOEND,
                    maxfun: int = 1000, callback=None) -> CobylaResult:
    """Unconstrained COBYLA (scipy's implementation of Powell's method).

    ``callback(k, x, f)`` runs after every objective evaluation.  The returned
    point is the best one evaluated, which is also what COBYLA reports when
    it terminates normally.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    history = []
    best = [np.inf, x0.copy()]

    def wrapped(x):
        f = float(objective(x))
        k = len(history)
        history.append((x.copy(), f))
        if f < best[0]:
            best[0] = f
            best[1] = x.copy()
        if callback is not None:
            callback(k, x, f)
        return f

    res = minimize(wrapped, x0, method="COBYLA",
                   options={"rhobeg": rhobeg, "tol": rhoend, "maxiter": maxfun})
    converged = res.status == 1
    return CobylaResult(best[1], best[0], len(history), bool(converged), history)


def initial_amplitudes(pool: ExcitationPool, guess: str, so=None) -> np.ndarray:
    if guess == "zero":
        return np.zeros(len(pool))
    if so is None:
        raise InvalidInput("MP2 guess needs spin-orbital integrals")
    return mp2_amplitudes(so, so.orbital_energies, pool).values.copy()


def sampled_expectation(state: Statevector, H: QubitHamiltonian, shots: int, rng) -> float:
    """Estimate <H> by sampling every Pauli term independently with ``shots`` shots."""
    from .simstate import operator_expectation  # local: only the sampled mode needs it
    total = H.constant
    for p, c in H.terms.items():
        if p.is_identity():
            continue
        exact = operator_expectation(state, _single(p)).real
        p_plus = min(max(0.5 * (1.0 + exact), 0.0), 1.0)
        plus = rng.binomial(shots, p_plus)
        total += c * (2.0 * plus - shots) / shots
    return float(total)


def _single(p):
    from .qham import PauliSum
    return PauliSum(p.n_qubits, {p: 1.0})


def run_vqe(H: QubitHamiltonian, pool: ExcitationPool, config: VqeConfig = VqeConfig(),
            so=None, theta0=None) -> VqeTrace:
    if H.n_qubits != pool.n_qubits:
        raise InvalidInput("Hamiltonian and pool disagree on qubit count")
    if theta0 is None:
        theta0 = initial_amplitudes(pool, config.guess, so)
    theta0 = np.asarray(theta0, dtype=float)
    hf = pool.hf_state()
    rng = make_rng(config.seed)
    trace = VqeTrace(pool=pool, config=config, initial_theta=theta0.copy())

    def energy(theta):
        state = prepare_state(pool, theta, hf, config.trotter_steps)
        if config.objective == "exact":
            return expectation(state, H)
        return sampled_expectation(state, H, config.shots, rng)

    def record(k, x, f):
        trace.records.append(TraceRecord(k, x.copy(), f))

    res = cobyla_minimize(energy, theta0, config.rhobeg, config.rhoend,
                          config.max_iterations, record)
    trace.theta = res.x
    trace.energy = res.fun
    trace.converged = res.converged
    log.info("VQE: %d evaluations, E = %.10f, converged=%s", res.nfev, res.fun, res.converged)
    return trace


def state_at_iteration(trace: VqeTrace, k: int, trotter_steps: int | None = None) -> Statevector:
    """Re-prepare the state at evaluation ``k``.

    Indices past the end of a trace that stopped early (converged) return
    the final evaluated point; the optimiser would not have moved further.
    """
    if k < 0:
        raise InvalidInput(f"evaluation index {k} out of range")
    if not trace.records:
        raise InvalidInput("empty trace")
    if k >= len(trace.records):
        if not trace.converged:
            raise InvalidInput(f"evaluation index {k} beyond trace of length {len(trace)}")
        k = len(trace.records) - 1
    steps = trotter_steps or (trace.config.trotter_steps if trace.config else 1)
    return prepare_state(trace.pool, trace.records[k].theta, trace.pool.hf_state(), steps)


def best_state_within(trace: VqeTrace, k: int) -> tuple:
    """Best (theta, energy) among the first ``k`` evaluations."""
    recs = trace.records[: max(k, 1)]
    best = min(recs, key=lambda r: r.energy)
    return best.theta, best.energy
