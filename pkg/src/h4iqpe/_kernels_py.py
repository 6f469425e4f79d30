"""Pure numpy statevector kernels, used when the compiled extension is absent."""
from functools import lru_cache

import numpy as np

_I_POW = np.array([1.0, 1j, -1.0, -1j])


@lru_cache(maxsize=None)
def _tables(dim: int):
    idx = np.arange(dim, dtype=np.int64)
    par = np.zeros(dim, dtype=np.int8)
    v = idx.copy()
    while np.any(v):
        par ^= (v & 1).astype(np.int8)
        v >>= 1
    return idx, 1.0 - 2.0 * par


def _pauli_apply(psi, x, z, n_y):
    idx, sign = _tables(psi.shape[0])
    d = idx ^ x
    return _I_POW[n_y & 3] * sign[z & d] * psi[d]


def apply_exp_pauli(psi, x, z, n_y, angle):
    """In place: psi <- exp(-i angle/2 P) psi."""
    p_psi = _pauli_apply(psi, int(x), int(z), int(n_y))
    psi *= np.cos(0.5 * angle)
    psi += (-1j * np.sin(0.5 * angle)) * p_psi


def apply_exp_pauli_sequence(psi, xs, zs, nys, angles):
    for x, z, ny, a in zip(xs, zs, nys, angles):
        apply_exp_pauli(psi, x, z, ny, a)


def pauli_expectation(psi, xs, zs, nys, coeffs):
    total = 0.0 + 0.0j
    conj = psi.conj()
    for x, z, ny, c in zip(xs, zs, nys, coeffs):
        total += c * np.dot(conj, _pauli_apply(psi, int(x), int(z), int(ny)))
    return complex(total)
