"""Block evolution operators and block-sparse density matrices.

Each block (n, l) has the ordered basis ``ground half + excited half``
(see :func:`jcdegen.spectral.block_bases`).  A :class:`BlockDensityMatrix`
stores one matrix per pair of blocks, so coherences between different blocks
(for example two ``l`` values) are kept alongside the populations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .angular import TransitionSpec, as_half
from .errors import DomainError
from .spectral import block_bases, block_eigensystem
from .statespace import BlockKey, SubspaceKey

__all__ = [
    "EvolutionParams",
    "BlockDensityMatrix",
    "block_S",
    "block_dims",
    "evolve",
    "excited_population",
    "observable_series",
    "block_eigenbasis",
]


@dataclass(frozen=True)
class EvolutionParams:
    """Detuning, coupling and time; ``theta = 1`` measures time in units of 1/theta."""

    delta: float = 0.0
    theta: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be > 0, got {self.theta}")


def block_dims(t: TransitionSpec, key: BlockKey) -> tuple[int, int]:
    b0, b1 = block_bases(t, key.n, key.l)
    return (len(b0) if b0 else 0), (len(b1) if b1 else 0)


def _block_S_stack(t: TransitionSpec, n: int, l, delta: float, theta: float, times) -> np.ndarray:
    """S(t) for each time in ``times``; shape (T, d, d)."""
    es = block_eigensystem(t, n, l)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    n0, n1 = es.dim0, es.dim1
    d = n0 + n1
    out = np.zeros((times.size, d, d), dtype=complex)

    dark_phase = np.exp(0.5j * delta * times)
    if es.d0.shape[1]:
        out[:, :n0, :n0] += dark_phase[:, None, None] * (es.d0 @ es.d0.conj().T)
    if es.d1.shape[1]:
        out[:, n0:, n0:] += dark_phase.conj()[:, None, None] * (es.d1 @ es.d1.conj().T)
    if es.n_coupled:
        omega = np.sqrt(delta**2 + (theta * es.xi) ** 2)
        half = 0.5 * np.outer(times, omega)
        sin = np.sin(half)
        cos_k = np.cos(half) + 1j * (delta / omega) * sin
        sin_k = 1j * (theta * es.xi / omega) * sin
        v0, v1 = es.v0, es.v1
        out[:, :n0, :n0] += np.einsum("ik,tk,jk->tij", v0, cos_k, v0.conj())
        out[:, n0:, n0:] += np.einsum("ik,tk,jk->tij", v1, cos_k.conj(), v1.conj())
        out[:, :n0, n0:] += np.einsum("ik,tk,jk->tij", v0, sin_k, v1.conj())
        out[:, n0:, :n0] += np.einsum("ik,tk,jk->tij", v1, sin_k, v0.conj())
    return out


def block_S(t: TransitionSpec, n: int, l, p: EvolutionParams) -> np.ndarray:
    """Evolution operator exp(i Omega t / 2) restricted to block (n, l).

    Dark ground (excited) states pick up exp(+-i delta t / 2); each coupled pair
    rotates with its own generalized Rabi frequency.  If ``p.time`` is an
    array the result is stacked along a leading time axis.
    """
    stack = _block_S_stack(t, n, l, p.delta, p.theta, p.time)
    return stack if np.ndim(p.time) else stack[0]


class BlockDensityMatrix:
    """Block-sparse density matrix.

    ``entries[(K, K')]`` is the matrix ``<block K| rho |block K'>`` between two
    blocks (n, l); rows and columns follow the ground-then-excited basis order
    of each block.  Missing pairs are zero.
    """

    def __init__(self, transition: TransitionSpec, entries=None):
        self.transition = transition
        self.entries: dict[tuple[BlockKey, BlockKey], np.ndarray] = {}
        for (k1, k2), mat in (entries or {}).items():
            self[k1, k2] = mat

    @staticmethod
    def _key(key) -> BlockKey:
        if isinstance(key, BlockKey):
            return key
        n, l = key
        return BlockKey(int(n), as_half(l))

    def __setitem__(self, pair, mat):
        k1, k2 = (self._key(k) for k in pair)
        mat = np.asarray(mat, dtype=complex)
        shape = (sum(block_dims(self.transition, k1)), sum(block_dims(self.transition, k2)))
        if mat.shape != shape:
            raise DomainError(f"entry {k1}, {k2} needs shape {shape}, got {mat.shape}")
        self.entries[k1, k2] = mat

    def __getitem__(self, pair) -> np.ndarray:
        k1, k2 = (self._key(k) for k in pair)
        if (k1, k2) in self.entries:
            return self.entries[k1, k2]
        if (k2, k1) in self.entries:
            return self.entries[k2, k1].conj().T
        shape = (sum(block_dims(self.transition, k1)), sum(block_dims(self.transition, k2)))
        return np.zeros(shape, dtype=complex)

    def keys(self):
        return self.entries.keys()

    def items(self):
        return self.entries.items()

    def __len__(self):
        return len(self.entries)

    def block_keys(self) -> list[BlockKey]:
        return sorted({k for pair in self.entries for k in pair})

    def diagonal_items(self) -> Iterator[tuple[BlockKey, np.ndarray]]:
        for (k1, k2), mat in self.entries.items():
            if k1 == k2:
                yield k1, mat

    def entry(self, key1: SubspaceKey, key2: SubspaceKey) -> np.ndarray:
        """Coherence matrix between two invariant subspaces V(a, n, l)."""
        mat = self[key1.block, key2.block]
        return mat[self._slice(key1), :][:, self._slice(key2)]

    def _slice(self, key: SubspaceKey) -> slice:
        n0, n1 = block_dims(self.transition, key.block)
        return slice(0, n0) if key.a == 0 else slice(n0, n0 + n1)

    def subspace_entries(self, atol: float = 0.0) -> dict[tuple[SubspaceKey, SubspaceKey], np.ndarray]:
        """Nonzero coherence matrices keyed by pairs of subspace keys."""
        out = {}
        for (k1, k2) in self.entries:
            for s1 in (k1.ground, k1.excited):
                for s2 in (k2.ground, k2.excited):
                    if s1 is None or s2 is None:
                        continue
                    sub = self.entry(s1, s2)
                    if sub.size and np.max(np.abs(sub)) > atol:
                        out[s1, s2] = sub
        return out

    def trace(self) -> complex:
        return sum(np.trace(m) for _, m in self.diagonal_items())

    def copy(self) -> "BlockDensityMatrix":
        return BlockDensityMatrix(self.transition, {k: m.copy() for k, m in self.entries.items()})

    def validate(self, atol: float = 1e-12, psd_tol: float = 1e-10, trace_tol: float | None = None) -> None:
        """Raise DomainError unless hermitian, unit trace and PSD on diagonal blocks.

        ``trace_tol`` (default ``atol``) bounds |tr(rho) - 1|; truncated thermal
        states pass their truncation bound here.
        """
        for (k1, k2), mat in self.entries.items():
            if k1 == k2:
                if np.max(np.abs(mat - mat.conj().T), initial=0.0) > atol:
                    raise DomainError(f"diagonal block {k1} is not hermitian")
                if mat.size and np.linalg.eigvalsh(mat)[0] < -psd_tol:
                    raise DomainError(f"diagonal block {k1} is not positive semidefinite")
            elif (k2, k1) in self.entries:
                if np.max(np.abs(mat - self.entries[k2, k1].conj().T), initial=0.0) > atol:
                    raise DomainError(f"entries {k1},{k2} and {k2},{k1} are not adjoint")
        tr = self.trace()
        if abs(tr - 1) > (atol if trace_tol is None else trace_tol):
            raise DomainError(f"trace is {tr}, expected 1")


def evolve(rho: BlockDensityMatrix, p: EvolutionParams) -> BlockDensityMatrix:
    """rho(t) = S(t) rho(0) S(t)^dagger, applied pair by pair; the set of block pairs is unchanged."""
    t = rho.transition
    cache: dict[BlockKey, np.ndarray] = {}

    def s_of(key: BlockKey) -> np.ndarray:
        if key not in cache:
            cache[key] = _block_S_stack(t, key.n, key.l, p.delta, p.theta, p.time)[0]
        return cache[key]

    out = {pair: s_of(pair[0]) @ mat @ s_of(pair[1]).conj().T for pair, mat in rho.items()}
    return BlockDensityMatrix(t, out)


def _excited_weights(t: TransitionSpec, key: BlockKey) -> np.ndarray:
    n0, n1 = block_dims(t, key)
    return np.concatenate([np.zeros(n0), np.ones(n1)])


def excited_population(rho: BlockDensityMatrix) -> float:
    """tr(P_excited rho): sum of the excited-half diagonal over all diagonal blocks."""
    t = rho.transition
    total = 0.0
    for key, mat in rho.diagonal_items():
        total += float(np.real(np.diagonal(mat) @ _excited_weights(t, key)))
    return total


WeightFn = Callable[[TransitionSpec, BlockKey], np.ndarray]

#: oscillating terms are dropped smallest-first while their summed magnitude stays below this times the block scale
PRUNE_RTOL = 1e-15


def block_eigenbasis(t: TransitionSpec, n: int, l, delta: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues ``lam`` and unitary ``U`` of the block interaction operator, S(t) = U exp(i lam t / 2) U^H.

    Columns are the dark ground states (``+delta``), the dark excited states
    (``-delta``) and the dressed pairs ``c+ v0 + c- v1`` (``+Omega``) and
    ``c- v0 - c+ v1`` (``-Omega``).
    """
    es = block_eigensystem(t, n, l)
    n0, n1 = es.dim0, es.dim1
    k = es.n_coupled
    u = np.zeros((n0 + n1, n0 + n1), dtype=complex)
    lam = np.empty(n0 + n1)
    nd0, nd1 = es.d0.shape[1], es.d1.shape[1]
    u[:n0, :nd0] = es.d0
    lam[:nd0] = delta
    u[n0:, nd0 : nd0 + nd1] = es.d1
    lam[nd0 : nd0 + nd1] = -delta
    if k:
        omega = np.sqrt(delta**2 + (theta * es.xi) ** 2)
        c_plus = np.sqrt(0.5 * (1 + delta / omega))
        c_minus = np.sqrt(0.5 * (1 - delta / omega))
        lo = nd0 + nd1
        u[:n0, lo : lo + k] = es.v0 * c_plus
        u[n0:, lo : lo + k] = es.v1 * c_minus
        u[:n0, lo + k :] = es.v0 * c_minus
        u[n0:, lo + k :] = -es.v1 * c_plus
        lam[lo : lo + k] = omega
        lam[lo + k :] = -omega
    return lam, u


def observable_series(
    rho: BlockDensityMatrix,
    delta: float,
    theta: float,
    times: Iterable[float],
    weights: WeightFn = _excited_weights,
) -> np.ndarray:
    """Expectation of a block-diagonal, basis-diagonal observable along ``times``.

    ``weights(transition, block)`` returns the observable's diagonal in the
    block basis.  Off-diagonal block pairs do not contribute to such
    observables, so only diagonal entries are used.  In each block's
    eigenbasis the expectation is a sum of terms ``c exp(i w t)``; all terms
    of all blocks are collected first and evaluated on the grid together.
    """
    t = rho.transition
    times = np.asarray(list(times) if not isinstance(times, np.ndarray) else times, dtype=float)
    const = 0.0
    coeffs, freqs = [], []
    for key, mat in rho.diagonal_items():
        w = weights(t, key)
        if not np.any(w) or not np.any(mat):
            continue
        lam, u = block_eigenbasis(t, key.n, key.l, delta, theta)
        a = u.conj().T @ mat @ u
        b = (u.conj().T * w) @ u
        # <W>(t) = sum_ab b_ba a_ab exp(i (lam_a - lam_b) t / 2)
        c = b.T * a
        const += float(np.real(np.trace(c)))
        iu = np.triu_indices(len(lam), 1)
        cu = 2 * c[iu]
        fu = 0.5 * (lam[iu[0]] - lam[iu[1]])
        mag = np.abs(cu)
        order = np.argsort(mag)
        budget = PRUNE_RTOL * max(np.max(np.abs(w)), 0.0) * np.sum(np.abs(mat))
        drop = np.searchsorted(np.cumsum(mag[order]), budget, side="right")
        keep = order[drop:]
        coeffs.append(cu[keep])
        freqs.append(fu[keep])
    total = np.full(times.size, const)
    if coeffs:
        c = np.concatenate(coeffs)
        f = np.concatenate(freqs)
        chunk = max(1, 2_000_000 // max(times.size, 1))
        for start in range(0, c.size, chunk):
            sl = slice(start, start + chunk)
            phase = np.outer(f[sl], times)
            total += c[sl].real @ np.cos(phase) - c[sl].imag @ np.sin(phase)
    return total
