"""Compiled vs numpy statevector kernels.

Workloads:
  uccd     full UCCD state preparation on 8 qubits (18 generators x 8 Pauli rotations)
  energy   <H> with the 97-term H4 Hamiltonian on 8 qubits
  random   random Pauli rotations / expectations on 12, 16 and 20 qubits

Run:  python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from h4iqpe.kernels import get_backend
from h4iqpe.ansatz import build_uccd_pool
from h4iqpe.experiments import build_system


def _best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _uccd_arrays():
    pool = build_uccd_pool()
    gens = pool.circuit.generators
    xs = np.concatenate([g.xs for g in gens])
    zs = np.concatenate([g.zs for g in gens])
    nys = np.concatenate([g.nys for g in gens])
    angles = np.concatenate([g.angles(0.05) for g in gens])
    return pool.hf_state().amplitudes, xs, zs, nys, angles


def _random_paulis(n, count, rng):
    xs = rng.integers(0, 1 << n, count, dtype=np.int64)
    zs = rng.integers(0, 1 << n, count, dtype=np.int64)
    nys = np.array([bin(int(a & b)).count("1") for a, b in zip(xs, zs)], dtype=np.int64)
    return xs, zs, nys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {name: get_backend(name) for name in ("cython", "python")}

    psi0, xs, zs, nys, angles = _uccd_arrays()
    H = build_system(80.0).H
    hx, hz, hc = H.xs, H.zs, H.coeffs
    hny = np.array([bin(int(a & b)).count("1") for a, b in zip(hx, hz)], dtype=np.int64)
    rng = np.random.default_rng(7)

    rows = []
    for label, make in [
        ("uccd prep, 8q, 144 rotations",
         lambda k: (lambda: k.apply_exp_pauli_sequence(psi0.copy(), xs, zs, nys, angles))),
        ("energy, 8q, 97 terms",
         lambda k: (lambda: k.pauli_expectation(psi0, hx, hz, hny, hc))),
    ]:
        rows.append((label, {n: _best_time(make(k), args.repeat) for n, k in backends.items()}))

    for n in (12, 16, 20):
        rx, rz, rny = _random_paulis(n, 64, rng)
        ang = rng.uniform(-1, 1, 64)
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        rows.append((f"64 rotations, {n}q",
                     {b: _best_time(lambda k=k: k.apply_exp_pauli_sequence(psi.copy(), rx, rz, rny, ang),
                                    args.repeat) for b, k in backends.items()}))
        rows.append((f"64-term expectation, {n}q",
                     {b: _best_time(lambda k=k: k.pauli_expectation(psi, rx, rz, rny, ang), args.repeat)
                      for b, k in backends.items()}))

    # both backends must agree before their timings mean anything
    a = psi0.copy()
    b = psi0.copy()
    backends["cython"].apply_exp_pauli_sequence(a, xs, zs, nys, angles)
    backends["python"].apply_exp_pauli_sequence(b, xs, zs, nys, angles)
    assert np.allclose(a, b, atol=1e-12)

    print(f"{'workload':<32s} {'cython (ms)':>12s} {'python (ms)':>12s} {'speedup':>8s}")
    for label, t in rows:
        print(f"{label:<32s} {1e3 * t['cython']:12.3f} {1e3 * t['python']:12.3f} "
              f"{t['python'] / t['cython']:8.1f}x")


if __name__ == "__main__":
    main()
