"""Independent reference computations used by the test suite and ``selfcheck``.

Nothing here is on the production path.  Each oracle reaches its answer by a
different route from the code it checks:

* :func:`threej_by_lowering` builds Clebsch-Gordan states by annihilating the
  highest weight with J+ and repeatedly applying J-, in extended precision;
* :func:`dense_D` assembles the hermitian matrices of G G^dagger and
  G^dagger G by applying the operators to basis kets one at a time;
* :func:`dense_hamiltonian` assembles the block interaction operator the same
  way, for comparison against the spectral evolution operator via ``expm``.
"""
from __future__ import annotations

from collections import defaultdict
from functools import lru_cache

import mpmath
import numpy as np

from .angular import HalfInt, TransitionSpec, as_half, coupling_G, f_coeff
from .spectral import BlockEigensystem, block_bases

__all__ = [
    "threej_by_lowering",
    "dense_D",
    "dense_hamiltonian",
    "cluster_projectors",
    "compare_eigensystems",
    "sum_rule_residual",
]

_DPS = 40


@lru_cache(maxsize=None)
def _cg_multiplet(j1: int, j2: int, J: int) -> dict:
    """CG coefficients <j1 m1 j2 m2 | J M> for all m1, m2, M (doubled arguments)."""
    with mpmath.workdps(_DPS):
        def lower(j, m):  # <j, m-1| J- |j, m>
            return mpmath.sqrt(mpmath.mpf((j + m) * (j - m + 2)) / 4)

        def raise_(j, m):  # <j, m+1| J+ |j, m>
            return mpmath.sqrt(mpmath.mpf((j - m) * (j + m + 2)) / 4)

        # highest weight |J, J>: J+ annihilates it; fix c(m1 = j1) > 0
        m1_top = min(j1, J + j2)
        coeffs = {m1_top: mpmath.mpf(1)}
        m1 = m1_top
        while True:
            m1_next = m1 - 2
            m2_next = J - m1_next
            if m1_next < -j1 or m2_next > j2:
                break
            # coefficient of |m1, J - m1 + 2> in J+ psi vanishes
            coeffs[m1_next] = -coeffs[m1] * raise_(j2, J - m1) / raise_(j1, m1_next)
            m1 = m1_next
        norm = mpmath.sqrt(sum(c * c for c in coeffs.values()))
        state = {(m1, J - m1): c / norm for m1, c in coeffs.items()}

        table = {}
        M = J
        while True:
            for (a, b), c in state.items():
                table[a, b, M] = c
            if M == -J:
                break
            nxt = defaultdict(lambda: mpmath.mpf(0))
            for (a, b), c in state.items():
                if a > -j1:
                    nxt[a - 2, b] += c * lower(j1, a)
                if b > -j2:
                    nxt[a, b - 2] += c * lower(j2, b)
            scale = lower(J, M)
            state = {k: v / scale for k, v in nxt.items()}
            M -= 2
        return {k: float(v) for k, v in table.items()}


def threej_by_lowering(j1, j2, j3, m1, m2, m3) -> float:
    """3j symbol from Clebsch-Gordan states built by angular-momentum lowering."""
    j1, j2, j3, m1, m2, m3 = (as_half(x).twice for x in (j1, j2, j3, m1, m2, m3))
    if min(j1, j2, j3) < 0 or m1 + m2 + m3 != 0:
        return 0.0
    if (j1 + j2 + j3) % 2 or j3 > j1 + j2 or j3 < abs(j1 - j2):
        return 0.0
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        if abs(m) > j or (j - m) % 2:
            return 0.0
    cg = _cg_multiplet(j1, j2, j3).get((m1, m2, -m3), 0.0)
    phase = (j1 - j2 - m3) // 2
    sign = -1.0 if phase % 2 else 1.0
    return sign * cg / np.sqrt(j3 + 1)


def _apply_Gdag(t: TransitionSpec, n: int, ket: tuple) -> list[tuple[tuple, complex]]:
    """G^dagger |J0, m>|n, sigma> as a list of (excited ket, amplitude)."""
    m, sigma = ket
    out = []
    for k, dm, ds in ((1, 2, -1), (2, -2, 1)):
        amp = coupling_G(t, k, HalfInt(m), n, sigma)
        if amp and abs(m + dm) <= t.j1_2:
            out.append(((m + dm, sigma + ds), 1j * amp))
    return out


def _apply_G(t: TransitionSpec, n: int, ket: tuple) -> list[tuple[tuple, complex]]:
    """G |J1, m>|n - 1, sigma> as a list of (ground ket, amplitude)."""
    m, sigma = ket
    out = []
    for k, dm, ds in ((1, -2, 1), (2, 2, -1)):
        m0, s0 = m + dm, sigma + ds
        if abs(m0) > t.j0_2 or abs(s0) > n:
            continue
        amp = coupling_G(t, k, HalfInt(m0), n, s0)
        if amp:
            out.append(((m0, s0), -1j * amp))
    return out


def _kets(t: TransitionSpec, n: int, l) -> tuple[list, list]:
    b0, b1 = block_bases(t, n, l)
    k0 = [(m.twice, s) for m, s in zip(b0.m_values, b0.sigma_values)] if b0 else []
    k1 = [(m.twice, s) for m, s in zip(b1.m_values, b1.sigma_values)] if b1 else []
    return k0, k1


def dense_D(t: TransitionSpec, a: int, n: int, l) -> np.ndarray:
    """Matrix of D_0 = G G^dagger (a=0) or D_1 = G^dagger G (a=1) in the block basis."""
    k0, k1 = _kets(t, n, l)
    if a == 0:
        idx = {k: i for i, k in enumerate(k0)}
        mat = np.zeros((len(k0), len(k0)), dtype=complex)
        for c, ket in enumerate(k0):
            for mid, amp1 in _apply_Gdag(t, n, ket):
                for out, amp2 in _apply_G(t, n, mid):
                    mat[idx[out], c] += amp2 * amp1
        return mat
    idx = {k: i for i, k in enumerate(k1)}
    mat = np.zeros((len(k1), len(k1)), dtype=complex)
    for c, ket in enumerate(k1):
        for mid, amp1 in _apply_G(t, n, ket):
            for out, amp2 in _apply_Gdag(t, n, mid):
                mat[idx[out], c] += amp2 * amp1
    return mat


def dense_hamiltonian(t: TransitionSpec, n: int, l, delta: float, theta: float) -> np.ndarray:
    """Interaction operator delta (P0 - P1) + theta (G + G^dagger) on block (n, l)."""
    k0, k1 = _kets(t, n, l)
    n0 = len(k0)
    idx1 = {k: n0 + i for i, k in enumerate(k1)}
    d = n0 + len(k1)
    mat = np.zeros((d, d), dtype=complex)
    mat[:n0, :n0] = delta * np.eye(n0)
    mat[n0:, n0:] = -delta * np.eye(len(k1))
    for c, ket in enumerate(k0):
        for out, amp in _apply_Gdag(t, n, ket):
            mat[idx1[out], c] += theta * amp
            mat[c, idx1[out]] += theta * np.conj(amp)
    return mat


def cluster_projectors(xi: np.ndarray, vecs: np.ndarray, rel_gap: float = 1e-9) -> list[tuple[float, np.ndarray]]:
    """Group columns by (nearly) equal xi and return (xi, projector) per group."""
    order = np.argsort(xi)
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(xi[i] - xi[groups[-1][-1]]) <= rel_gap * max(1.0, abs(xi[i])):
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        v = vecs[:, g]
        out.append((float(np.mean(xi[g])), v @ v.conj().T))
    return out


def _proj(vecs: np.ndarray) -> np.ndarray:
    return vecs @ vecs.conj().T


def compare_eigensystems(a: BlockEigensystem, b: BlockEigensystem) -> dict[str, float]:
    """Largest discrepancies between two eigensystems of the same block.

    Returns ``xi`` (sorted xi difference, inf on count mismatch), ``proj0`` and
    ``proj1`` (coupled projector differences per xi cluster), and ``dark0`` /
    ``dark1`` (dark projector differences).
    """
    out = {"xi": 0.0, "proj0": 0.0, "proj1": 0.0, "dark0": 0.0, "dark1": 0.0}
    if len(a.xi) != len(b.xi) or a.d0.shape != b.d0.shape or a.d1.shape != b.d1.shape:
        return {k: np.inf for k in out}
    if len(a.xi):
        out["xi"] = float(np.max(np.abs(np.sort(a.xi) - np.sort(b.xi))))
        for side, va, vb in (("proj0", a.v0, b.v0), ("proj1", a.v1, b.v1)):
            ca = cluster_projectors(a.xi, va)
            cb = cluster_projectors(b.xi, vb)
            if len(ca) != len(cb):
                out[side] = np.inf
                continue
            diff = max(
                (float(np.max(np.abs(pa - pb), initial=0.0)) for (_, pa), (_, pb) in zip(ca, cb)),
                default=0.0,
            )
            out[side] = diff
    out["dark0"] = float(np.max(np.abs(_proj(a.d0) - _proj(b.d0)), initial=0.0))
    out["dark1"] = float(np.max(np.abs(_proj(a.d1) - _proj(b.d1)), initial=0.0))
    return out


def sum_rule_residual(t: TransitionSpec) -> float:
    """max over excited m of |f1(m-1)^2 + f2(m+1)^2 + f0(m)^2 - 1/(2 J1 + 1)|."""
    target = 1.0 / (t.j1_2 + 1)
    worst = 0.0
    for m_2 in range(-t.j1_2, t.j1_2 + 1, 2):
        total = (
            f_coeff(t, -1, HalfInt(m_2 - 2)) ** 2
            + f_coeff(t, 1, HalfInt(m_2 + 2)) ** 2
            + f_coeff(t, 0, HalfInt(m_2)) ** 2
        )
        worst = max(worst, abs(total - target))
    return worst
