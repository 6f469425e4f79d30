"""H4-on-a-circle geometry, the STO-3G hydrogen basis and s-Gaussian integrals.

All internal quantities are in atomic units (bohr, hartree).  Only s-type
primitives occur, so every integral has a closed form built from the
Gaussian product theorem and the zeroth-order Boys function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import DegenerateGeometry, InvalidInput, SingularGeometry

ANGSTROM_TO_BOHR = 1.8897259886
DEFAULT_RADIUS = 1.738  # angstrom

BOYS_SERIES_CUTOFF = 1e-10

# STO-3G hydrogen 1s (zeta = 1.24), as tabulated in the Basis Set Exchange.
STO3G_H_EXPONENTS = (3.42525091, 0.62391373, 0.16885540)
STO3G_H_COEFFICIENTS = (0.15432897, 0.53532814, 0.44463454)


@dataclass(frozen=True)
class GeometrySpec:
    beta: float
    radius: float
    atoms: np.ndarray  # (4, 3) bohr
    charges: tuple = (1.0, 1.0, 1.0, 1.0)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class ContractedS:
    """One contracted s function; ``norms`` are the primitive normalisations."""

    center: np.ndarray
    exponents: np.ndarray
    coefficients: np.ndarray
    norms: np.ndarray


@dataclass(frozen=True)
class BasisSet:
    exponents: tuple
    coefficients: tuple
    functions: list = field(default_factory=list)

    def on(self, geom: GeometrySpec) -> "BasisSet":
        """Place one contracted 1s on every atom of ``geom``."""
        a = np.asarray(self.exponents, dtype=float)
        d = np.asarray(self.coefficients, dtype=float)
        prim_norm = (2.0 * a / np.pi) ** 0.75
        # renormalise the contraction so <phi|phi> = 1 exactly
        s = _prim_overlap_matrix(a, a, 0.0)
        n_contr = 1.0 / math.sqrt(float((d * prim_norm) @ s @ (d * prim_norm)))
        funcs = [
            ContractedS(np.array(c, dtype=float), a, d * n_contr, prim_norm)
            for c in geom.atoms
        ]
        return BasisSet(self.exponents, self.coefficients, funcs)


def build_h4_geometry(beta: float, radius: float = DEFAULT_RADIUS) -> GeometrySpec:
    """Four protons on a circle of ``radius`` angstrom.

    Atoms sit at polar angles +beta/2, -beta/2, 180-beta/2 and 180+beta/2,
    i.e. two H2-like pairs that merge into a square as beta -> 90.
    """
    if not (radius > 0.0 and math.isfinite(radius)):
        raise InvalidInput(f"radius must be positive, got {radius}")
    if not (70.0 <= beta <= 110.0):
        raise InvalidInput(f"beta must lie in [70, 110] degrees, got {beta}")
    if beta == 90.0:
        raise DegenerateGeometry("beta = 90 degrees is the degenerate square geometry")
    half = math.radians(beta) / 2.0
    r = radius * ANGSTROM_TO_BOHR
    angles = (half, -half, math.pi - half, math.pi + half)
    atoms = np.array([[r * math.cos(t), r * math.sin(t), 0.0] for t in angles])
    return GeometrySpec(beta=float(beta), radius=float(radius), atoms=atoms)


def load_sto3g_hydrogen() -> BasisSet:
    return BasisSet(STO3G_H_EXPONENTS, STO3G_H_COEFFICIENTS)


def boys_f0(x: float) -> float:
    """F0(x) = integral_0^1 exp(-x t^2) dt."""
    if x < 0:
        raise InvalidInput(f"Boys function argument must be >= 0, got {x}")
    if x < BOYS_SERIES_CUTOFF:
        return 1.0 - x / 3.0 + x * x / 10.0
    sx = math.sqrt(x)
    return 0.5 * math.sqrt(math.pi) / sx * math.erf(sx)


def _boys_f0_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    small = x < BOYS_SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    sx = np.sqrt(safe)
    big = 0.5 * np.sqrt(np.pi) / sx * erf(sx)
    return np.where(small, 1.0 - x / 3.0 + x * x / 10.0, big)


def _prim_overlap_matrix(a, b, r2):
    p = a[:, None] + b[None, :]
    return (np.pi / p) ** 1.5 * np.exp(-a[:, None] * b[None, :] / p * r2)


@dataclass(frozen=True)
class MolecularIntegrals:
    S: np.ndarray
    T: np.ndarray
    V: np.ndarray
    ERI: np.ndarray  # chemists' notation (pq|rs)
    E_nuc: float

    @property
    def hcore(self) -> np.ndarray:
        return self.T + self.V

    @property
    def n_basis(self) -> int:
        return self.S.shape[0]


def nuclear_repulsion(geom: GeometrySpec) -> float:
    e = 0.0
    for i in range(geom.n_atoms):
        for j in range(i + 1, geom.n_atoms):
            r = float(np.linalg.norm(geom.atoms[i] - geom.atoms[j]))
            if r < 1e-8:
                raise SingularGeometry(f"atoms {i} and {j} coincide")
            e += geom.charges[i] * geom.charges[j] / r
    return e


def compute_integrals(geom: GeometrySpec, basis: BasisSet) -> MolecularIntegrals:
    if not basis.functions:
        basis = basis.on(geom)
    funcs = basis.functions
    if len(funcs) != geom.n_atoms:
        raise InvalidInput("basis and geometry disagree on the number of centres")
    e_nuc = nuclear_repulsion(geom)

    nbf = len(funcs)
    # flatten primitives: (function index, exponent, coef*norm, centre)
    fidx, alpha, weight, centre = [], [], [], []
    for mu, f in enumerate(funcs):
        for a, d, n in zip(f.exponents, f.coefficients, f.norms):
            fidx.append(mu)
            alpha.append(a)
            weight.append(d * n)
            centre.append(f.center)
    fidx = np.array(fidx)
    alpha = np.array(alpha)
    weight = np.array(weight)
    centre = np.array(centre)
    npr = len(alpha)

    # pair quantities over primitives i, j
    p = alpha[:, None] + alpha[None, :]
    mu_red = alpha[:, None] * alpha[None, :] / p
    diff = centre[:, None, :] - centre[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    kab = np.exp(-mu_red * r2)
    P = (alpha[:, None, None] * centre[:, None, :] + alpha[None, :, None] * centre[None, :, :]) / p[..., None]
    ww = weight[:, None] * weight[None, :]

    s_prim = (np.pi / p) ** 1.5 * kab
    t_prim = mu_red * (3.0 - 2.0 * mu_red * r2) * s_prim
    v_prim = np.zeros_like(s_prim)
    for c, z in zip(geom.atoms, geom.charges):
        pc = P - c
        v_prim -= z * 2.0 * np.pi / p * kab * _boys_f0_array(p * np.einsum("ijk,ijk->ij", pc, pc))

    def contract2(prim):
        out = np.zeros((nbf, nbf))
        np.add.at(out, (fidx[:, None].repeat(npr, 1), fidx[None, :].repeat(npr, 0)), ww * prim)
        return out

    S = contract2(s_prim)
    T = contract2(t_prim)
    V = contract2(v_prim)

    # two-electron: pairs (ij) and (kl)
    pp = p[:, :, None, None]
    qq = p[None, None, :, :]
    PQ = P[:, :, None, None, :] - P[None, None, :, :, :]
    pq2 = np.einsum("ijklx,ijklx->ijkl", PQ, PQ)
    rho = pp * qq / (pp + qq)
    eri_prim = (
        2.0 * np.pi ** 2.5 / (pp * qq * np.sqrt(pp + qq))
        * kab[:, :, None, None] * kab[None, None, :, :]
        * _boys_f0_array(rho * pq2)
    )
    eri_prim *= ww[:, :, None, None] * ww[None, None, :, :]
    ERI = np.zeros((nbf,) * 4)
    I, J, K, L = np.meshgrid(fidx, fidx, fidx, fidx, indexing="ij")
    np.add.at(ERI, (I, J, K, L), eri_prim)

    S = 0.5 * (S + S.T)
    T = 0.5 * (T + T.T)
    V = 0.5 * (V + V.T)
    return MolecularIntegrals(S=S, T=T, V=V, ERI=ERI, E_nuc=e_nuc)


def h4_integrals(beta: float, radius: float = DEFAULT_RADIUS) -> MolecularIntegrals:
    geom = build_h4_geometry(beta, radius)
    return compute_integrals(geom, load_sto3g_hydrogen())


def write_fcidump(path, h1_mo: np.ndarray, eri_mo: np.ndarray, e_nuc: float,
                  nelec: int, ms2: int = 0, tol: float = 1e-12) -> None:
    """Write MO-basis integrals in FCIDUMP format (1-based, chemists' notation)."""
    n = h1_mo.shape[0]
    lines = [f" &FCI NORB={n},NELEC={nelec},MS2={ms2},", "  ORBSYM=" + "1," * n, "  ISYM=1,", " &END"]
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    v = eri_mo[i, j, k, l]
                    if abs(v) > tol:
                        lines.append(f"{v: .16e} {i + 1:4d} {j + 1:4d} {k + 1:4d} {l + 1:4d}")
    for i in range(n):
        for j in range(i + 1):
            v = h1_mo[i, j]
            if abs(v) > tol:
                lines.append(f"{v: .16e} {i + 1:4d} {j + 1:4d} {0:4d} {0:4d}")
    lines.append(f"{e_nuc: .16e} {0:4d} {0:4d} {0:4d} {0:4d}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_fcidump(path):
    """Inverse of :func:`write_fcidump`; returns (h1, eri, e_nuc, header dict)."""
    with open(path) as fh:
        text = fh.read()
    head, _, body = text.partition("&END")
    header = {}
    for tok in head.replace("&FCI", "").replace("\n", " ").split(","):
        if "=" in tok:
            k, v = tok.split("=", 1)
            v = v.strip()
            if v:
                header[k.strip().upper()] = int(v)
    n = header["NORB"]
    h1 = np.zeros((n, n))
    eri = np.zeros((n,) * 4)
    e_nuc = 0.0
    for line in body.splitlines():
        parts = line.split()
        if len(parts) != 5:
            continue
        v = float(parts[0])
        i, j, k, l = (int(x) for x in parts[1:])
        if i == j == k == l == 0:
            e_nuc = v
        elif k == l == 0:
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = v
        else:
            i, j, k, l = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k)):
                eri[a, b, c, d] = eri[c, d, a, b] = v
    return h1, eri, e_nuc, header
