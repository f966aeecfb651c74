"""Coupled pairs, dark states and dressed states of one (n, l) block.

The coupling matrix ``M`` is the matrix of G^dagger = i (G1^dagger + G2^dagger)
from the ground half V(0, n, l) (columns) to the excited half V(1, n - 1, l)
(rows).  Its singular value decomposition ``M = U diag(xi) V^H`` gives both
halves at once: ``v0_k = V[:, k]``, ``v1_k = U[:, k]`` with
``M v0_k = xi_k v1_k``, and the remaining columns span the dark states.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angular import HalfInt, TransitionSpec, _coupling_G2, as_half
from .errors import DomainError
from .statespace import BlockKey, SubspaceBasis, SubspaceKey, _basis2, basis

__all__ = [
    "BlockEigensystem",
    "DressedBlock",
    "RANK_RTOL",
    "coupling_matrix",
    "block_bases",
    "block_eigensystem",
    "dressed",
]

#: singular values below RANK_RTOL * max(1, largest) count as dark
RANK_RTOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BlockEigensystem:
    """Dark vectors and coupled pairs of the block (n, l).

    ``v0``/``d0`` are expressed in the ground-half basis and ``v1``/``d1`` in
    the excited-half basis (see :func:`block_bases`).  Columns of ``v0`` and
    ``v1`` are paired: ``M @ v0[:, k] == xi[k] * v1[:, k]``.
    """

    transition: TransitionSpec
    n: int
    l: HalfInt
    xi: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    d0: np.ndarray
    d1: np.ndarray

    @property
    def n_coupled(self) -> int:
        return len(self.xi)

    @property
    def dim0(self) -> int:
        return self.v0.shape[0]

    @property
    def dim1(self) -> int:
        return self.v1.shape[0]

    @property
    def key(self) -> BlockKey:
        return BlockKey(self.n, self.l)


@dataclass(frozen=True, eq=False)
class DressedBlock:
    """Generalized Rabi frequencies and dressed-state mixing coefficients of one block."""

    omega: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    detuning: float
    coupling: float


def block_bases(t: TransitionSpec, n: int, l) -> tuple[SubspaceBasis | None, SubspaceBasis | None]:
    """Bases of the ground half V(0, n, l) and excited half V(1, n - 1, l); ``None`` when empty."""
    l = as_half(l)
    ground = SubspaceKey(0, n, l)
    b0 = basis(t, ground) if _basis2(t.j0_2, n, l.twice)[0] else None
    b1 = None
    if n >= 1 and _basis2(t.j1_2, n - 1, l.twice)[0]:
        b1 = basis(t, SubspaceKey(1, n - 1, l))
    return b0, b1


@lru_cache(maxsize=None)
def _coupling_matrix2(j0_2: int, j1_2: int, n: int, l_2: int) -> np.ndarray:
    ms0, sig0 = _basis2(j0_2, n, l_2)
    ms1, _ = _basis2(j1_2, n - 1, l_2)
    row_of = {m: r for r, m in enumerate(ms1)}
    mat = np.zeros((len(ms1), len(ms0)), dtype=complex)
    for c, (m, sigma) in enumerate(zip(ms0, sig0)):
        # sigma+ channel: m -> m + 1, sigma -> sigma - 1
        r = row_of.get(m + 2)
        if r is not None:
            mat[r, c] += 1j * _coupling_G2(j0_2, j1_2, 1, m, n, sigma)
        # sigma- channel: m -> m - 1, sigma -> sigma + 1
        r = row_of.get(m - 2)
        if r is not None:
            mat[r, c] += 1j * _coupling_G2(j0_2, j1_2, 2, m, n, sigma)
    return _readonly(mat)


def coupling_matrix(t: TransitionSpec, n: int, l) -> np.ndarray:
    """Matrix of G^dagger on block (n, l): rows excited half, columns ground half.

    The factor ``-i`` in G is kept in the matrix, so all entries are imaginary.
    """
    if n < 1:
        raise DomainError(f"block n={n} has no excited partner; coupling needs n >= 1")
    return _coupling_matrix2(t.j0_2, t.j1_2, n, as_half(l).twice)


@lru_cache(maxsize=None)
def _eigensystem2(t: TransitionSpec, n: int, l_2: int) -> BlockEigensystem:
    l = HalfInt(l_2)
    ms0, _ = _basis2(t.j0_2, n, l_2)
    n0 = len(ms0)
    if n == 0:
        eye = np.eye(n0, dtype=complex)
        empty = np.zeros((0, 0), dtype=complex)
        return BlockEigensystem(
            t, n, l, _readonly(np.zeros(0)), _readonly(np.zeros((n0, 0), complex)),
            _readonly(empty), _readonly(eye), _readonly(empty),
        )
    mat = _coupling_matrix2(t.j0_2, t.j1_2, n, l_2)
    n1 = mat.shape[0]
    if n0 == 0 and n1 == 0:
        raise DomainError(f"block (n={n}, l={l}) of transition {t} is empty")
    if min(n0, n1) == 0:
        u = np.eye(n1, dtype=complex)
        vh = np.eye(n0, dtype=complex)
        s = np.zeros(0)
    else:
        u, s, vh = np.linalg.svd(mat, full_matrices=True)
    cutoff = RANK_RTOL * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > cutoff))
    v = vh.conj().T
    return BlockEigensystem(
        transition=t,
        n=n,
        l=l,
        xi=_readonly(np.array(s[:rank], dtype=float)),
        v0=_readonly(np.ascontiguousarray(v[:, :rank])),
        v1=_readonly(np.ascontiguousarray(u[:, :rank])),
        d0=_readonly(np.ascontiguousarray(v[:, rank:])),
        d1=_readonly(np.ascontiguousarray(u[:, rank:])),
    )


def block_eigensystem(t: TransitionSpec, n: int, l) -> BlockEigensystem:
    """Coupled pairs and dark vectors of block (n, l), cached per block.

    For ``n = 0`` every ground state is dark and the excited half is empty.
    """
    if n < 0:
        raise DomainError(f"excitation number must be >= 0, got {n}")
    return _eigensystem2(t, n, as_half(l).twice)


def dressed(es: BlockEigensystem, delta: float, theta: float) -> DressedBlock:
    """Rabi frequencies ``sqrt(delta^2 + theta^2 xi^2)`` and mixing coefficients ``c+-``."""
    if theta < 0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    omega = np.sqrt(delta**2 + (theta * es.xi) ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(omega > 0, delta / np.where(omega > 0, omega, 1.0), 0.0)
    c_plus = np.sqrt(0.5 * (1 + ratio))
    c_minus = np.sqrt(0.5 * (1 - ratio))
    return DressedBlock(omega, c_plus, c_minus, float(delta), float(theta))
