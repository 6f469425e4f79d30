# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels.  Semantics mirror ``_kernels_py`` exactly."""
import numpy as np

from libc.math cimport cos, sin

cdef extern from *:
    int __builtin_parityll(unsigned long long) nogil


cdef inline double complex _i_pow(int k) nogil:
    k = k & 3
    if k == 0:
        return 1.0
    elif k == 1:
        return 1j
    elif k == 2:
        return -1.0
    return -1j


cdef void _exp_pauli(double complex[::1] psi, unsigned long long x, unsigned long long z,
                     int n_y, double angle) noexcept nogil:
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t c, d
    cdef double ca = cos(0.5 * angle)
    cdef double sa = sin(0.5 * angle)
    cdef double complex ph = _i_pow(n_y)
    cdef double complex mis = -1j * sa
    cdef double complex u, v, pu, pv
    if x == 0:
        # diagonal: exp(-i a/2 (+-1))
        for c in range(dim):
            if __builtin_parityll(z & <unsigned long long> c):
                psi[c] = psi[c] * (ca + 1j * sa)
            else:
                psi[c] = psi[c] * (ca - 1j * sa)
        return
    for c in range(dim):
        d = c ^ <Py_ssize_t> x
        if d < c:
            continue
        u = psi[c]
        v = psi[d]
        # (P psi)[c] = i^ny (-1)^{|z & d|} psi[d]
        pu = ph * v
        if __builtin_parityll(z & <unsigned long long> d):
            pu = -pu
        pv = ph * u
        if __builtin_parityll(z & <unsigned long long> c):
            pv = -pv
        psi[c] = ca * u + mis * pu
        psi[d] = ca * v + mis * pv


def apply_exp_pauli(double complex[::1] psi, long long x, long long z, int n_y, double angle):
    _exp_pauli(psi, <unsigned long long> x, <unsigned long long> z, n_y, angle)


def apply_exp_pauli_sequence(double complex[::1] psi, long long[::1] xs, long long[::1] zs,
                             long long[::1] nys, double[::1] angles):
    cdef Py_ssize_t k
    with nogil:
        for k in range(xs.shape[0]):
            _exp_pauli(psi, <unsigned long long> xs[k], <unsigned long long> zs[k],
                       <int> nys[k], angles[k])


def pauli_expectation(double complex[::1] psi, long long[::1] xs, long long[::1] zs,
                      long long[::1] nys, double[::1] coeffs):
    """sum_k coeffs[k] <psi|P_k|psi>."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t k, c, d
    cdef unsigned long long x, z
    cdef double complex acc, term
    cdef double complex total = 0.0
    with nogil:
        for k in range(xs.shape[0]):
            x = <unsigned long long> xs[k]
            z = <unsigned long long> zs[k]
            acc = 0.0
            for c in range(dim):
                d = c ^ <Py_ssize_t> x
                term = psi[c].conjugate() * psi[d]
                if __builtin_parityll(z & <unsigned long long> d):
                    acc = acc - term
                else:
                    acc = acc + term
            total = total + coeffs[k] * _i_pow(<int> nys[k]) * acc
    return complex(total)
