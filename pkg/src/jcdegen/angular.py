"""Angular-momentum coupling coefficients.

All angular-momentum quantum numbers are carried as doubled integers so that
half-integer values are exact.  :class:`HalfInt` is the public wrapper;
the ``_2`` helpers take doubled integers directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .errors import DomainError

__all__ = [
    "HalfInt",
    "TransitionSpec",
    "as_half",
    "wigner3j",
    "f_coeff",
    "coupling_G",
]


@dataclass(frozen=True, order=True)
class HalfInt:
    """An integer or half-odd-integer stored as ``twice`` its value."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, int) or isinstance(self.twice, bool):
            raise TypeError(f"twice must be int, got {type(self.twice).__name__}")

    @classmethod
    def parse(cls, value: HalfIntLike) -> "HalfInt":
        """Build from an int, a half-integer float/Fraction, or text like ``"3/2"``."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, bool):
            raise TypeError("bool is not a half-integer")
        if isinstance(value, int):
            return cls(2 * value)
        if isinstance(value, str):
            text = value.strip()
            try:
                frac = Fraction(text)
            except ValueError:
                raise DomainError(f"cannot parse {value!r} as a half-integer") from None
            return cls._from_fraction(frac, value)
        if isinstance(value, Fraction):
            return cls._from_fraction(value, value)
        if isinstance(value, float):
            doubled = 2.0 * value
            if not math.isfinite(doubled) or doubled != round(doubled):
                raise DomainError(f"{value!r} is not a half-integer")
            return cls(int(round(doubled)))
        # numpy integers and the like
        try:
            return cls(2 * int(value)) if int(value) == value else cls.parse(float(value))
        except (TypeError, ValueError):
            raise DomainError(f"cannot interpret {value!r} as a half-integer") from None

    @classmethod
    def _from_fraction(cls, frac: Fraction, original) -> "HalfInt":
        doubled = 2 * frac
        if doubled.denominator != 1:
            raise DomainError(f"{original!r} is not a half-integer")
        return cls(int(doubled))

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __add__(self, other):
        return HalfInt(self.twice + as_half(other).twice)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.twice - as_half(other).twice)

    def __rsub__(self, other):
        return HalfInt(as_half(other).twice - self.twice)

    def __neg__(self):
        return HalfInt(-self.twice)

    def __abs__(self):
        return HalfInt(abs(self.twice))

    def __float__(self):
        return self.twice / 2

    def __str__(self):
        if self.is_integer:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __repr__(self):
        return f"HalfInt({self})"


HalfIntLike = Union[HalfInt, int, float, Fraction, str]


def as_half(value: HalfIntLike) -> HalfInt:
    return HalfInt.parse(value)


@dataclass(frozen=True)
class TransitionSpec:
    """Dipole transition from excited angular momentum ``j1`` to ground ``j0``."""

    j0: HalfInt
    j1: HalfInt

    def __post_init__(self):
        j0, j1 = as_half(self.j0), as_half(self.j1)
        object.__setattr__(self, "j0", j0)
        object.__setattr__(self, "j1", j1)
        if j0.twice < 0 or j1.twice < 0:
            raise DomainError(f"angular momenta must be non-negative: j0={j0}, j1={j1}")
        if (j0.twice - j1.twice) % 2:
            raise DomainError(f"j0={j0} and j1={j1} must both be integer or both half-integer")
        if abs(j1.twice - j0.twice) > 2 or j0.twice + j1.twice < 2:
            raise DomainError(f"j0={j0} -> j1={j1} violates the dipole selection rule")

    @classmethod
    def of(cls, j0: HalfIntLike, j1: HalfIntLike) -> "TransitionSpec":
        return cls(as_half(j0), as_half(j1))

    @property
    def j0_2(self) -> int:
        return self.j0.twice

    @property
    def j1_2(self) -> int:
        return self.j1.twice

    def level_2(self, a: int) -> int:
        """Doubled angular momentum of atomic level ``a`` (0 ground, 1 excited)."""
        if a == 0:
            return self.j0.twice
        if a == 1:
            return self.j1.twice
        raise DomainError(f"atomic level must be 0 or 1, got {a!r}")

    def __str__(self):
        return f"{self.j0}->{self.j1}"


def _fact(k2: int) -> int:
    # factorial of k2/2, which must be a non-negative integer
    return math.factorial(k2 // 2)


@lru_cache(maxsize=65536)
def _threej_exact(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> tuple[int, Fraction]:
    """Return (sign, square) of the 3j symbol; arguments are doubled."""
    if min(j1, j2, j3) < 0:
        return 0, Fraction(0)
    if m1 + m2 + m3 != 0:
        return 0, Fraction(0)
    if (j1 + j2 + j3) % 2:
        return 0, Fraction(0)
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        if abs(m) > j or (j - m) % 2:
            return 0, Fraction(0)
    if j3 > j1 + j2 or j3 < abs(j1 - j2):
        return 0, Fraction(0)

    delta = Fraction(
        _fact(j1 + j2 - j3) * _fact(j1 - j2 + j3) * _fact(-j1 + j2 + j3),
        _fact(j1 + j2 + j3 + 2),
    )
    prefactor = delta * (
        _fact(j1 + m1) * _fact(j1 - m1) * _fact(j2 + m2)
        * _fact(j2 - m2) * _fact(j3 + m3) * _fact(j3 - m3)
    )

    # Racah single sum, in doubled units k2 = 2k
    k_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = Fraction(0)
    for k2 in range(k_min, k_max + 1, 2):
        denom = (
            _fact(k2) * _fact(j3 - j2 + k2 + m1) * _fact(j3 - j1 + k2 - m2)
            * _fact(j1 + j2 - j3 - k2) * _fact(j1 - k2 - m1) * _fact(j2 - k2 + m2)
        )
        term = Fraction(1, denom)
        total += -term if (k2 // 2) % 2 else term
    if total == 0:
        return 0, Fraction(0)
    phase = (j1 - j2 - m3) // 2
    sign = -1 if phase % 2 else 1
    if total < 0:
        sign = -sign
    return sign, total * total * prefactor


def _threej2(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    sign, square = _threej_exact(j1, j2, j3, m1, m2, m3)
    if sign == 0:
        return 0.0
    return sign * math.sqrt(float(square))


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol ``(j1 j2 j3; m1 m2 m3)``.

    Evaluated with the Racah formula in exact rational arithmetic; only the
    final square root is taken in floating point.  Arguments failing the
    triangle or projection rules give 0.
    """
    args = [as_half(x).twice for x in (j1, j2, j3, m1, m2, m3)]
    return _threej2(*args)


def _f2(j0_2: int, j1_2: int, q: int, m_2: int) -> float:
    """Dipole projection for ground projection ``m`` (doubled) and photon component ``q``.

    ``q = -1`` gives f1, ``q = +1`` gives f2 and ``q = 0`` the pi component.
    The excited projection is ``m - q``.
    """
    if abs(m_2) > j0_2 or (j0_2 - m_2) % 2:
        return 0.0
    mex_2 = m_2 - 2 * q
    if abs(mex_2) > j1_2:
        return 0.0
    value = _threej2(j0_2, 2, j1_2, -m_2, 2 * q, mex_2)
    return -value if ((j0_2 - m_2) // 2) % 2 else value


def f_coeff(t: TransitionSpec, q: int, m) -> float:
    """Dipole coefficient f_q(m) of the transition ``t``.

    ``q=-1`` couples ``|J0,m>`` to ``|J1,m+1>`` through a sigma+ photon (f1),
    ``q=+1`` couples it to ``|J1,m-1>`` through a sigma- photon (f2), and
    ``q=0`` to ``|J1,m>`` (pi component, used only by spontaneous emission).
    """
    if q not in (-1, 0, 1):
        raise DomainError(f"q must be -1, 0 or +1, got {q!r}")
    return _f2(t.j0_2, t.j1_2, q, as_half(m).twice)


def _coupling_G2(j0_2: int, j1_2: int, k: int, m_2: int, n: int, sigma: int) -> float:
    if k == 1:
        return _f2(j0_2, j1_2, -1, m_2) * math.sqrt((n + sigma) / 2)
    return _f2(j0_2, j1_2, 1, m_2) * math.sqrt((n - sigma) / 2)


def coupling_G(t: TransitionSpec, k: int, m, n: int, sigma: int) -> float:
    """Photon-dressed matrix element G_{k,m,n,sigma}.

    ``k=1`` annihilates a sigma+ photon and raises m by one; ``k=2``
    annihilates a sigma- photon and lowers m by one.
    """
    if k not in (1, 2):
        raise DomainError(f"k must be 1 or 2, got {k!r}")
    if n < 0 or abs(sigma) > n or (n - sigma) % 2:
        raise DomainError(f"sigma={sigma} is not a photon projection for n={n}")
    return _coupling_G2(t.j0_2, t.j1_2, k, as_half(m).twice, n, sigma)
