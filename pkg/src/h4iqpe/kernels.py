"""Kernel backend selection.

The compiled extension ``_kernels`` is used when it imports; otherwise the
numpy implementation in ``_kernels_py`` takes over.  Setting the
environment variable ``H4IQPE_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("H4IQPE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

apply_exp_pauli = _impl.apply_exp_pauli
apply_exp_pauli_sequence = _impl.apply_exp_pauli_sequence
pauli_expectation = _impl.pauli_expectation


def get_backend(name: str):
    """Return the kernel module by name ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
