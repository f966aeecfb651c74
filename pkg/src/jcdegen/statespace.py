"""Invariant subspaces of the interaction operator.

A subspace V(a, n, l) holds the states ``|J_a, m>|n, l - m>`` with the atom on
level ``a``, ``n`` photons and total projection ``l``.  The interaction couples
V(0, n, l) only to V(1, n - 1, l); together they form the block (n, l) of the
excitation-``n`` manifold.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .angular import HalfInt, TransitionSpec, as_half
from .errors import DomainError

__all__ = [
    "SubspaceKey",
    "BlockKey",
    "SubspaceBasis",
    "subspace_dims",
    "level_dims",
    "dims_profile",
    "enumerate_blocks",
    "enumerate_block_keys",
    "basis",
]


@dataclass(frozen=True, order=True)
class SubspaceKey:
    """Label of V(a, n, l); ``n`` is the photon number."""

    a: int
    n: int
    l: HalfInt

    def __post_init__(self):
        if self.a not in (0, 1):
            raise DomainError(f"atomic level must be 0 or 1, got {self.a!r}")
        if self.n < 0:
            raise DomainError(f"photon number must be >= 0, got {self.n}")
        object.__setattr__(self, "l", as_half(self.l))

    @property
    def excitation(self) -> int:
        return self.n + self.a

    @property
    def block(self) -> "BlockKey":
        return BlockKey(self.n + self.a, self.l)

    def __str__(self):
        return f"(a={self.a}, n={self.n}, l={self.l})"


class BlockKey(NamedTuple):
    """Label of the block V(n, l) = V(0, n, l) + V(1, n - 1, l); ``n`` is the excitation number."""

    n: int
    l: HalfInt

    @property
    def ground(self) -> SubspaceKey:
        return SubspaceKey(0, self.n, self.l)

    @property
    def excited(self) -> SubspaceKey | None:
        return SubspaceKey(1, self.n - 1, self.l) if self.n >= 1 else None


@dataclass(frozen=True)
class SubspaceBasis:
    """Ordered basis ``|J_a, m_k>|n, sigma_k>`` of one subspace, m ascending in steps of one."""

    key: SubspaceKey
    m_values: tuple[HalfInt, ...]
    sigma_values: tuple[int, ...]

    def __len__(self):
        return len(self.m_values)

    def index_of(self, m) -> int:
        m = as_half(m)
        for i, mk in enumerate(self.m_values):
            if mk == m:
                return i
        raise DomainError(f"m={m} is not in the basis of {self.key}")


def _level_dims2(ja_2: int, n: int, l_2: int) -> tuple[int, int]:
    """Closed-form (m_min doubled, dimension) of the subspace with J_a, n, l.

    Parity class p and position s follow l = -J_a - n + p + 2s.
    """
    if n < 0:
        raise DomainError(f"photon number must be >= 0, got {n}")
    offset = l_2 + ja_2 + 2 * n  # = 2(p + 2s)
    if offset % 2 or offset < 0:
        return ja_2 * -1, 0
    p = (offset // 2) % 2
    s = (offset // 2 - p) // 2
    # J_p doubled: J_a - p for integer J_a, J_a - 1/2 for half-integer J_a
    jp_2 = ja_2 - 2 * p if ja_2 % 2 == 0 else ja_2 - 1
    if jp_2 < 0:
        return -ja_2 + 2 * p, 0
    lp = jp_2 // 2 + n
    if s > lp:
        return -ja_2 + 2 * p, 0
    m_min_2 = -ja_2 + 2 * p if s <= n else -ja_2 + 2 * p + 4 * (s - n)
    s_lo = min(n, jp_2 // 2)
    s_hi = max(n, jp_2 // 2)
    if s <= s_lo:
        dim = s + 1
    elif s <= s_hi:
        dim = s_lo + 1
    else:
        dim = lp + 1 - s
    return m_min_2, dim


def level_dims(ja, n: int, l) -> tuple[HalfInt, int]:
    """(m_min, dimension) for angular momentum ``ja``, photon number ``n`` and projection ``l``."""
    m_min_2, dim = _level_dims2(as_half(ja).twice, n, as_half(l).twice)
    return HalfInt(m_min_2), dim


def subspace_dims(t: TransitionSpec, a: int, n: int, l) -> tuple[HalfInt, int]:
    """(m_min, dimension) of V(a, n, l) for transition ``t``; an empty subspace has dimension 0."""
    return level_dims(HalfInt(t.level_2(a)), n, l)


def dims_profile(ja, n: int) -> list[tuple[HalfInt, int]]:
    """Dimension of V(a, n, l) for every l between -(J_a + n) and J_a + n."""
    ja_2 = as_half(ja).twice
    top = ja_2 + 2 * n
    return [(HalfInt(l_2), _level_dims2(ja_2, n, l_2)[1]) for l_2 in range(-top, top + 1, 2)]


@lru_cache(maxsize=None)
def _basis2(ja_2: int, n: int, l_2: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    m_min_2, dim = _level_dims2(ja_2, n, l_2)
    ms = tuple(m_min_2 + 4 * k for k in range(dim))
    sigmas = tuple((l_2 - m) // 2 for m in ms)
    return ms, sigmas


def basis(t: TransitionSpec, key: SubspaceKey) -> SubspaceBasis:
    """Ordered basis of V(a, n, l); consecutive m differ by two (sigma steps by two)."""
    ms, sigmas = _basis2(t.level_2(key.a), key.n, key.l.twice)
    if not ms:
        raise DomainError(f"subspace {key} of transition {t} is empty")
    return SubspaceBasis(key, tuple(HalfInt(m) for m in ms), sigmas)


def enumerate_blocks(t: TransitionSpec, n: int) -> list[SubspaceKey]:
    """Nonempty subspace keys of the excitation-``n`` manifold.

    Ground keys (photon number n) come first, then excited keys (photon number
    n - 1), each sorted by l.
    """
    if n < 0:
        raise DomainError(f"excitation number must be >= 0, got {n}")
    keys = []
    for a, photons in ((0, n), (1, n - 1)):
        if photons < 0:
            continue
        ja_2 = t.level_2(a)
        top = ja_2 + 2 * photons
        for l_2 in range(-top, top + 1, 2):
            if _level_dims2(ja_2, photons, l_2)[1] > 0:
                keys.append(SubspaceKey(a, photons, HalfInt(l_2)))
    return keys


def enumerate_block_keys(t: TransitionSpec, n: int) -> list[BlockKey]:
    """Block keys (n, l) of the excitation-``n`` manifold with at least one nonempty half."""
    seen = sorted({k.l for k in enumerate_blocks(t, n)})
    return [BlockKey(n, l) for l in seen]
