"""Closed-form eigensystems used as oracles for the numerical block decomposition.

Two kinds of case are covered:

* the six transitions with J0, J1 <= 3/2 for every excitation number n >= 1;
* the single-excitation manifold (n = 1) of an arbitrary transition.

Vectors are written out with the same phase factors as the published
formulas and returned in the :class:`~jcdegen.spectral.BlockEigensystem`
layout.  Individual vectors carry arbitrary phases, so comparisons with the
numerical path should go through projectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .angular import HalfInt, TransitionSpec, _f2, as_half
from .errors import DomainError
from .spectral import BlockEigensystem, block_bases

__all__ = [
    "FAMILIES",
    "AnalyticCase",
    "analytic_eigensystem",
    "single_photon_xi",
    "f_pair",
    "parity_class",
]

FAMILIES = {
    (0, 2): "0->1",
    (2, 0): "1->0",
    (2, 2): "1->1",
    (1, 1): "1/2->1/2",
    (1, 3): "1/2->3/2",
    (3, 1): "3/2->1/2",
}


@dataclass(frozen=True)
class AnalyticCase:
    transition: TransitionSpec
    family: str
    n: int
    l: HalfInt

    def __post_init__(self):
        object.__setattr__(self, "l", as_half(self.l))
        key = (self.transition.j0_2, self.transition.j1_2)
        if self.family == "single_photon":
            if self.n != 1:
                raise DomainError("the single-photon family requires n = 1")
        elif FAMILIES.get(key) != self.family:
            raise DomainError(
                f"family {self.family!r} does not match transition {self.transition}; "
                f"supported: {sorted(FAMILIES.values())} or 'single_photon'"
            )
        if self.n < 1:
            raise DomainError("closed forms are given for n >= 1")

    @classmethod
    def for_block(cls, t: TransitionSpec, n: int, l) -> "AnalyticCase":
        family = FAMILIES.get((t.j0_2, t.j1_2))
        if family is None:
            if n != 1:
                raise DomainError(
                    f"no closed form for transition {t} at n={n}; "
                    f"supported transitions: {sorted(FAMILIES.values())}, or any transition at n=1"
                )
            family = "single_photon"
        return cls(t, family, n, as_half(l))


def parity_class(ja, n: int, l) -> tuple[int, int]:
    """(p, s) with l = -J_a - n + p + 2 s."""
    offset = as_half(l).twice + as_half(ja).twice + 2 * n
    if offset % 2:
        raise DomainError(f"l={l} is incompatible with J_a={ja}, n={n}")
    half = offset // 2
    return half % 2, half // 2


def _sqrt(x: Fraction) -> float:
    if x < 0:
        raise DomainError(f"negative argument {x} under a square root")
    return math.sqrt(float(x))


# A state is (a, 2m, sigma); an analytic vector is {state: amplitude}.
State = tuple


class _Builder:
    """Collects closed-form vectors for one block and converts them to basis coordinates."""

    def __init__(self, t: TransitionSpec, n: int, l: HalfInt):
        self.t, self.n, self.l = t, n, l
        self.xi: list[float] = []
        self.v0: list[dict] = []
        self.v1: list[dict] = []
        self.d0: list[dict] = []
        self.d1: list[dict] = []

    def g(self, m, sigma) -> State:
        """Ground-level state |J0, m>|n, sigma>."""
        return (0, as_half(m).twice, int(sigma))

    def e(self, m, sigma) -> State:
        """Excited-level state |J1, m>|n - 1, sigma>."""
        return (1, as_half(m).twice, int(sigma))

    def pair(self, xi: float, v0: dict, v1: dict):
        self.xi.append(xi)
        self.v0.append(v0)
        self.v1.append(v1)

    def build(self) -> BlockEigensystem:
        b0, b1 = block_bases(self.t, self.n, self.l)
        n0 = len(b0) if b0 else 0
        n1 = len(b1) if b1 else 0

        def index(basis, a):
            if basis is None:
                return {}
            return {(a, m.twice, s): i for i, (m, s) in enumerate(zip(basis.m_values, basis.sigma_values))}

        idx0, idx1 = index(b0, 0), index(b1, 1)

        def columns(vectors, idx, dim):
            mat = np.zeros((dim, len(vectors)), dtype=complex)
            for c, vec in enumerate(vectors):
                for state, amp in vec.items():
                    if state not in idx:
                        raise AssertionError(f"closed-form state {state} not in block basis")
                    mat[idx[state], c] += amp
            return mat

        return BlockEigensystem(
            transition=self.t,
            n=self.n,
            l=self.l,
            xi=np.array(self.xi, dtype=float),
            v0=columns(self.v0, idx0, n0),
            v1=columns(self.v1, idx1, n1),
            d0=columns(self.d0, idx0, n0),
            d1=columns(self.d1, idx1, n1),
        )


def _family_0_1(b: _Builder):
    n, l = b.n, Fraction(b.l.twice, 2)
    p, s = parity_class(0, n, b.l)
    if p == 1:
        b.d1.append({b.e(0, l): 1j})
        return
    xi = _sqrt(Fraction(n, 3))
    if s in (0, n):
        sign = 1 if l > 0 else -1
        b.pair(xi, {b.g(0, l): 1}, {b.e(sign, l - sign): 1j})
        return
    c0 = 1j * _sqrt((n - l) / (2 * n))
    c1 = 1j * _sqrt((n + l) / (2 * n))
    w0, w1 = b.e(-1, l + 1), b.e(1, l - 1)
    b.pair(xi, {b.g(0, l): 1}, {w0: c0, w1: c1})
    b.d1.append({w0: c1, w1: -c0})


def _family_1_0(b: _Builder):
    n, l = b.n, Fraction(b.l.twice, 2)
    p, s = parity_class(1, n, b.l)
    if p == 1:
        b.d0.append({b.g(0, l): 1})
        return
    if s in (0, n + 1):
        sign = 1 if l > 0 else -1
        b.d0.append({b.g(sign, sign * n): 1})
        return
    c0 = _sqrt((n + 1 + l) / (2 * (n + 1)))
    c1 = _sqrt((n + 1 - l) / (2 * (n + 1)))
    w0, w1 = b.g(-1, l + 1), b.g(1, l - 1)
    b.pair(_sqrt(Fraction(n + 1, 3)), {w0: c0, w1: c1}, {b.e(0, l): 1j})
    b.d0.append({w0: c1, w1: -c0})


def _family_1_1(b: _Builder):
    n, l = b.n, Fraction(b.l.twice, 2)
    p, s = parity_class(1, n, b.l)
    if p == 0:
        if s in (0, n + 1):
            sign = 1 if l > 0 else -1
            b.d0.append({b.g(sign, sign * n): 1})
            return
        c0 = _sqrt((n + 1 + l) / (2 * (n + 1)))
        c1 = _sqrt((n + 1 - l) / (2 * (n + 1)))
        w0, w1 = b.g(-1, l + 1), b.g(1, l - 1)
        b.pair(_sqrt(Fraction(n + 1, 6)), {w0: -c0, w1: c1}, {b.e(0, l): 1j})
        b.d0.append({w0: c1, w1: c0})
        return
    xi = _sqrt(Fraction(n, 6))
    if s in (0, n):
        sign = 1 if l > 0 else -1
        b.pair(xi, {b.g(0, l): 1}, {b.e(sign, l - sign): 1j})
        return
    c0 = 1j * _sqrt((n - l) / (2 * n))
    c1 = 1j * _sqrt((n + l) / (2 * n))
    w0, w1 = b.e(-1, l + 1), b.e(1, l - 1)
    b.pair(xi, {b.g(0, l): 1}, {w0: c0, w1: -c1})
    b.d1.append({w0: c1, w1: c0})


def _family_half_half(b: _Builder):
    n, l = b.n, Fraction(b.l.twice, 2)
    half = Fraction(1, 2)
    p, s = parity_class(half, n, b.l)
    if p == 0:
        if s == 0:
            b.d0.append({b.g(-half, -n): 1})
            return
        xi = _sqrt((n + l + half) / 6)
        b.pair(xi, {b.g(-half, l + half): 1}, {b.e(half, l - half): 1j})
        return
    if s == n:
        b.d0.append({b.g(half, n): 1})
        return
    xi = _sqrt((n - l + half) / 6)
    b.pair(xi, {b.g(half, l - half): 1}, {b.e(-half, l + half): -1j})


def _family_half_threehalf(b: _Builder):
    n, l = b.n, Fraction(b.l.twice, 2)
    half = Fraction(1, 2)
    p, s = parity_class(half, n, b.l)
    if p == 0:
        xi = _sqrt((2 * n - l - half) / 12)
        if s == 0:
            b.pair(xi, {b.g(-half, -n): 1}, {b.e(-3 * half, -n + 1): 1j})
        elif s == n:
            b.pair(xi, {b.g(-half, n): 1}, {b.e(half, n - 1): 1j})
        else:
            c0 = _sqrt(3 * (n - l - half) / (2 * (2 * n - l - half)))
            c1 = _sqrt((n + l + half) / (2 * (2 * n - l - half)))
            w0, w1 = b.e(-3 * half, l + 3 * half), b.e(half, l - half)
            # the basis states themselves carry a factor i
            b.pair(xi, {b.g(-half, l + half): 1}, {w0: 1j * c0, w1: 1j * c1})
            b.d1.append({w0: 1j * c1, w1: -1j * c0})
        return
    xi = _sqrt((2 * n + l - half) / 12)
    if s == 0:
        b.pair(xi, {b.g(half, -n): 1}, {b.e(-half, -n + 1): 1j})
    elif s == n:
        b.pair(xi, {b.g(half, n): 1}, {b.e(3 * half, n - 1): 1j})
    else:
        c0 = _sqrt((n - l + half) / (2 * (2 * n + l - half)))
        c1 = _sqrt(3 * (n + l - half) / (2 * (2 * n + l - half)))
        w0, w1 = b.e(-half, l + half), b.e(3 * half, l - 3 * half)
        b.pair(xi, {b.g(half, l - half): 1}, {w0: 1j * c0, w1: 1j * c1})
        b.d1.append({w0: 1j * c1, w1: -1j * c0})


def _family_threehalf_half(b: _Builder):
    n, l = b.n, Fraction(b.l.twice, 2)
    half = Fraction(1, 2)
    p, s = parity_class(3 * half, n, b.l)
    if p == 0:
        if s == 0:
            b.d0.append({b.g(-3 * half, -n): 1})
            return
        if s == n + 1:
            b.d0.append({b.g(half, n): 1})
            return
        c0 = _sqrt(3 * (n + l + 3 * half) / (2 * (2 * n + l + 5 * half)))
        c1 = _sqrt((n - l + half) / (2 * (2 * n + l + 5 * half)))
        w0, w1 = b.g(-3 * half, l + 3 * half), b.g(half, l - half)
        xi = _sqrt((2 * n + l + 5 * half) / 12)
        b.pair(xi, {w0: c0, w1: c1}, {b.e(-half, l + half): 1j})
        b.d0.append({w0: c1, w1: -c0})
        return
    if s == 0:
        b.d0.append({b.g(-half, -n): 1})
        return
    if s == n + 1:
        b.d0.append({b.g(3 * half, n): 1})
        return
    c0 = _sqrt((n + l + half) / (2 * (2 * n - l + 5 * half)))
    c1 = _sqrt(3 * (n - l + 3 * half) / (2 * (2 * n - l + 5 * half)))
    w0, w1 = b.g(-half, l + half), b.g(3 * half, l - 3 * half)
    xi = _sqrt((2 * n - l + 5 * half) / 12)
    b.pair(xi, {w0: c0, w1: c1}, {b.e(half, l - half): 1j})
    b.d0.append({w0: c1, w1: -c0})


_FAMILY_BUILDERS = {
    "0->1": _family_0_1,
    "1->0": _family_1_0,
    "1->1": _family_1_1,
    "1/2->1/2": _family_half_half,
    "1/2->3/2": _family_half_threehalf,
    "3/2->1/2": _family_threehalf_half,
}


def _single_photon_closed(j0_2: int, j1_2: int, l_2: int) -> tuple[float, float]:
    """Generic-l channel amplitudes for n = 1 (no range checks)."""
    J = Fraction(j0_2, 2)
    l = Fraction(l_2, 2)
    if j1_2 == j0_2 - 2:
        den = (2 * J + 1) * 2 * J * (2 * J - 1)
        return _sqrt((J - l) * (J - l + 1) / den), _sqrt((J + l) * (J + l + 1) / den)
    if j1_2 == j0_2:
        den = (J + 1) * 2 * J * (2 * J + 1)
        return _sqrt((J + l) * (J - l + 1) / den), -_sqrt((J - l) * (J + l + 1) / den)
    den = (2 * J + 3) * (2 * J + 2) * (2 * J + 1)
    return _sqrt((J + l) * (J + l + 1) / den), _sqrt((J - l) * (J - l + 1) / den)


def single_photon_xi(t: TransitionSpec, l) -> tuple[float, float]:
    """Channel amplitudes (xi0, xi1) of the n = 1 block with projection l.

    ``xi0`` connects ``|J0, l-1>|1, +1>`` and ``xi1`` connects
    ``|J0, l+1>|1, -1>`` to ``|J1, l>|0, 0>``.  A channel whose ground or
    excited projection is out of range is zero, which reproduces the
    dark-only edge cases.
    """
    l_2 = as_half(l).twice
    j0_2, j1_2 = t.j0_2, t.j1_2
    if abs(l_2) > j1_2:
        return 0.0, 0.0
    if abs(l_2) > j0_2 + 2:
        return 0.0, 0.0
    xi0, xi1 = _single_photon_closed(j0_2, j1_2, l_2) if _closed_form_defined(j0_2, j1_2, l_2) else (0.0, 0.0)
    if abs(l_2 - 2) > j0_2:
        xi0 = 0.0
    if abs(l_2 + 2) > j0_2:
        xi1 = 0.0
    return xi0, xi1


def _closed_form_defined(j0_2: int, j1_2: int, l_2: int) -> bool:
    # every radicand in the closed forms is non-negative when |l| <= J0 + 1
    J = Fraction(j0_2, 2)
    l = Fraction(l_2, 2)
    if j1_2 == j0_2 - 2:
        return (J - l) * (J - l + 1) >= 0 and (J + l) * (J + l + 1) >= 0
    if j1_2 == j0_2:
        return (J + l) * (J - l + 1) >= 0 and (J - l) * (J + l + 1) >= 0
    return (J + l) * (J + l + 1) >= 0 and (J - l) * (J - l + 1) >= 0


def _single_photon(b: _Builder):
    t, l = b.t, b.l
    J = Fraction(t.j0_2, 2)
    lf = Fraction(l.twice, 2)
    j0_2, j1_2 = t.j0_2, t.j1_2
    edge = abs(lf) in (J, J + 1) and not (J == 0 and lf == 0)

    if not edge:
        if abs(lf) > J + 1:
            raise DomainError(f"l={l} is outside the n=1 manifold of {t}")
        if J == 0 and lf == 0:
            # only |J1, 0>|0, 0> exists and nothing couples to it
            b.d1.append({b.e(0, 0): 1j})
            return
        xi0, xi1 = _single_photon_closed(j0_2, j1_2, l.twice)
        xi = math.hypot(xi0, xi1)
        c0, c1 = xi0 / xi, xi1 / xi
        w0, w1 = b.g(lf - 1, 1), b.g(lf + 1, -1)
        b.pair(xi, {w0: c0, w1: c1}, {b.e(lf, 0): 1j})
        b.d0.append({w0: c1, w1: -c0})
        return

    sign = 1 if lf > 0 else -1
    if abs(lf) == J:
        if j1_2 == j0_2 - 2:
            b.d0.append({b.g(sign * (J - 1), sign): 1})
        elif j1_2 == j0_2:
            xi = 1 / math.sqrt((J + 1) * (2 * J + 1))
            b.pair(xi, {b.g(sign * (J - 1), sign): sign}, {b.e(sign * J, 0): 1j})
        else:
            xi = math.sqrt(J / ((J + 1) * (2 * J + 3)))
            b.pair(xi, {b.g(sign * (J - 1), sign): 1}, {b.e(sign * J, 0): 1j})
        # for J1 >= J0 the other excited states at this l do not exist
        return

    # |l| = J0 + 1
    if j1_2 <= j0_2:
        b.d0.append({b.g(sign * J, sign): 1})
    else:
        xi = 1 / math.sqrt(2 * J + 3)
        b.pair(xi, {b.g(sign * J, sign): 1}, {b.e(sign * (J + 1), 0): 1j})


def analytic_eigensystem(case: AnalyticCase) -> BlockEigensystem:
    """Closed-form coupled pairs and dark vectors of the block described by ``case``."""
    b = _Builder(case.transition, case.n, case.l)
    if case.family == "single_photon":
        _single_photon(b)
    else:
        _FAMILY_BUILDERS[case.family](b)
    return b.build()


def f_pair(t: TransitionSpec, l) -> tuple[float, float]:
    """(f1(l - 1), f2(l + 1)) straight from the 3j symbols."""
    l_2 = as_half(l).twice
    return _f2(t.j0_2, t.j1_2, -1, l_2 - 2), _f2(t.j0_2, t.j1_2, 1, l_2 + 2)
