"""Turnkey computations: thermal-field excitation, the stretched-state reference and polarization swap.

Each quantity is available through a direct formula and through the generic
block evolution (:func:`jcdegen.evolution.observable_series`) starting from
a state made by :func:`build_initial_state`; the two routes share only the
block eigensystems.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analytic import single_photon_xi
from .angular import HalfInt, TransitionSpec, as_half
from .errors import DomainError
from .evolution import BlockDensityMatrix, block_dims, observable_series
from .spectral import block_bases, block_eigensystem
from .statespace import BlockKey, enumerate_block_keys

__all__ = [
    "ThermalConfig",
    "SwapConfig",
    "INITIAL_STATE_KINDS",
    "thermal_truncation",
    "thermal_weights",
    "thermal_population",
    "thermal_population_evolved",
    "stretched_population",
    "stretched_population_evolved",
    "polarization_swap",
    "polarization_swap_evolved",
    "swap_frequency",
    "build_initial_state",
]

INITIAL_STATE_KINDS = ("thermal_ground", "stretched_sigma_plus", "ground_plus_photon", "excited_vacuum")


def _grid(t_grid) -> np.ndarray:
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1:
        raise DomainError("t_grid must be one-dimensional")
    if not np.all(np.isfinite(times)):
        raise DomainError("t_grid must be finite")
    return times


@dataclass(frozen=True)
class ThermalConfig:
    """Thermal-field run: transition, detuning, coupling, mean photon number and time grid."""

    transition: TransitionSpec
    delta: float
    theta: float
    n_c: float
    t_grid: Sequence[float] = field(default_factory=lambda: np.arange(0.0, 50.0 + 1e-9, 0.02))
    truncation_eps: float = 1e-10

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be > 0, got {self.theta}")
        if not self.n_c > 0:
            raise DomainError(f"n_c must be > 0, got {self.n_c}")
        if not 0 < self.truncation_eps < 1e-3:
            raise DomainError(f"truncation_eps must lie in (0, 1e-3), got {self.truncation_eps}")
        object.__setattr__(self, "t_grid", _grid(self.t_grid))


@dataclass(frozen=True)
class SwapConfig:
    """Single sigma+ photon on a ground-level atom with populations ``ground_populations[m]``, m ascending."""

    transition: TransitionSpec
    delta: float
    theta: float
    ground_populations: Sequence[float]
    t_grid: Sequence[float] = field(default_factory=lambda: np.arange(0.0, 50.0 + 1e-9, 0.02))

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be > 0, got {self.theta}")
        pops = np.asarray(self.ground_populations, dtype=float)
        if pops.shape != (self.transition.j0_2 + 1,):
            raise DomainError(
                f"ground_populations needs {self.transition.j0_2 + 1} entries (m = -J0..J0), got {pops.shape}"
            )
        if np.any(pops < 0) or abs(pops.sum() - 1) > 1e-12:
            raise DomainError("ground_populations must be nonnegative and sum to 1")
        object.__setattr__(self, "ground_populations", pops)
        object.__setattr__(self, "t_grid", _grid(self.t_grid))

    @classmethod
    def pure(cls, transition: TransitionSpec, m, **kwargs) -> "SwapConfig":
        """Atom initially in the single ground state ``|J0, m>``."""
        m_2 = as_half(m).twice
        if abs(m_2) > transition.j0_2 or (transition.j0_2 - m_2) % 2:
            raise DomainError(f"m={as_half(m)} is not a projection of J0={HalfInt(transition.j0_2)}")
        pops = np.zeros(transition.j0_2 + 1)
        pops[(m_2 + transition.j0_2) // 2] = 1.0
        return cls(transition, ground_populations=pops, **kwargs)


# thermal distribution ---------------------------------------------------------


def thermal_truncation(n_c: float, eps: float) -> int:
    """Smallest n_max whose neglected tail sum_{n > n_max} p_n is below ``eps``."""
    if not n_c > 0:
        raise DomainError(f"n_c must be > 0, got {n_c}")
    ratio = n_c / (1.0 + n_c)
    # tail = ratio^(n_max + 1)
    n_max = max(0, math.ceil(math.log(eps) / math.log(ratio)) - 1)
    while ratio ** (n_max + 1) >= eps:
        n_max += 1
    while n_max > 0 and ratio**n_max < eps:
        n_max -= 1
    return n_max


def thermal_weights(n_c: float, n_max: int) -> np.ndarray:
    """Photon-number distribution p_n = n_c^n / (1 + n_c)^(n + 1) for n = 0..n_max."""
    n = np.arange(n_max + 1)
    return np.exp(n * math.log(n_c) - (n + 1) * math.log1p(n_c))


# initial states ---------------------------------------------------------------


def build_initial_state(kind: str, transition: TransitionSpec, **params) -> BlockDensityMatrix:
    """Initial density matrix of one of the standard experiments.

    ``thermal_ground``
        atom uniformly distributed over the ground level, field thermal and
        unpolarized; params ``n_c``, optional ``truncation_eps`` (1e-10) or ``n_max``.
    ``stretched_sigma_plus``
        atom in ``|J0, J0>``, thermal sigma+ photons only; same params.
    ``ground_plus_photon``
        one sigma+ photon, atom populations ``ground_populations`` (m ascending).
    ``excited_vacuum``
        empty cavity, excited atom with density matrix ``initial_excited``
        over m = -J1..J1.
    """
    builders = {
        "thermal_ground": _thermal_ground,
        "stretched_sigma_plus": _stretched,
        "ground_plus_photon": _ground_plus_photon,
        "excited_vacuum": _excited_vacuum,
    }
    if kind not in builders:
        raise DomainError(f"unknown initial state kind {kind!r}; choose from {INITIAL_STATE_KINDS}")
    try:
        return builders[kind](transition, **params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {kind!r}: {exc}") from None


def _resolve_n_max(n_c, truncation_eps, n_max):
    if n_max is None:
        return thermal_truncation(n_c, truncation_eps)
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    return int(n_max)


def _thermal_ground(t: TransitionSpec, n_c: float, truncation_eps: float = 1e-10, n_max: int | None = None):
    n_max = _resolve_n_max(n_c, truncation_eps, n_max)
    p = thermal_weights(n_c, n_max)
    rho = BlockDensityMatrix(t)
    for n in range(n_max + 1):
        weight = p[n] / ((t.j0_2 + 1) * (n + 1))
        for key in enumerate_block_keys(t, n):
            n0, n1 = block_dims(t, key)
            if n0 == 0:
                continue
            rho[key, key] = np.diag(np.concatenate([np.full(n0, weight), np.zeros(n1)]))
    return rho


def _stretched(t: TransitionSpec, n_c: float, truncation_eps: float = 1e-10, n_max: int | None = None):
    n_max = _resolve_n_max(n_c, truncation_eps, n_max)
    p = thermal_weights(n_c, n_max)
    rho = BlockDensityMatrix(t)
    for n in range(n_max + 1):
        # |J0, J0>|n, n> lies in the top block l = J0 + n
        key = BlockKey(n, HalfInt(t.j0_2 + 2 * n))
        b0, _ = block_bases(t, n, key.l)
        n0, n1 = block_dims(t, key)
        mat = np.zeros((n0 + n1, n0 + n1), dtype=complex)
        mat[b0.index_of(HalfInt(t.j0_2)), b0.index_of(HalfInt(t.j0_2))] = p[n]
        rho[key, key] = mat
    return rho


def _ground_plus_photon(t: TransitionSpec, ground_populations):
    pops = np.asarray(ground_populations, dtype=float)
    if pops.shape != (t.j0_2 + 1,):
        raise DomainError(f"ground_populations needs {t.j0_2 + 1} entries, got {pops.shape}")
    if np.any(pops < 0) or abs(pops.sum() - 1) > 1e-12:
        raise DomainError("ground_populations must be nonnegative and sum to 1")
    rho = BlockDensityMatrix(t)
    for i, pop in enumerate(pops):
        if pop == 0:
            continue
        m = HalfInt(-t.j0_2 + 2 * i)
        key = BlockKey(1, m + 1)
        b0, _ = block_bases(t, 1, key.l)
        n0, n1 = block_dims(t, key)
        mat = np.zeros((n0 + n1, n0 + n1), dtype=complex)
        k = b0.index_of(m)
        mat[k, k] = pop
        rho[key, key] = mat
    return rho


def _excited_vacuum(t: TransitionSpec, initial_excited):
    n1 = np.asarray(initial_excited, dtype=complex)
    size = t.j1_2 + 1
    if n1.shape != (size, size):
        raise DomainError(f"initial_excited must be {size}x{size}, got {n1.shape}")
    if np.max(np.abs(n1 - n1.conj().T)) > 1e-12:
        raise DomainError("initial_excited must be hermitian")
    if abs(np.trace(n1) - 1) > 1e-12 or np.linalg.eigvalsh(n1)[0] < -1e-12:
        raise DomainError("initial_excited must be positive semidefinite with unit trace")
    keys = [BlockKey(1, HalfInt(-t.j1_2 + 2 * i)) for i in range(size)]
    # |J1, m>|0, 0> is the only excited state of block (1, m): last basis entry
    offsets = [block_dims(t, k) for k in keys]
    rho = BlockDensityMatrix(t)
    for i, ki in enumerate(keys):
        for j, kj in enumerate(keys):
            if j < i or n1[i, j] == 0:
                continue
            di, dj = sum(offsets[i]), sum(offsets[j])
            mat = np.zeros((di, dj), dtype=complex)
            mat[offsets[i][0], offsets[j][0]] = n1[i, j]
            rho[ki, kj] = mat
    return rho


# thermal field ----------------------------------------------------------------


def _rabi_sum(weights: np.ndarray, xi: np.ndarray, delta: float, theta: float, times: np.ndarray) -> np.ndarray:
    """sum_k weights_k (theta xi_k / Omega_k)^2 sin^2(Omega_k t / 2), chunked over k."""
    out = np.zeros(times.size)
    omega = np.sqrt(delta**2 + (theta * xi) ** 2)
    amp = weights * (theta * xi / omega) ** 2
    chunk = max(1, 2_000_000 // max(times.size, 1))
    for start in range(0, xi.size, chunk):
        sl = slice(start, start + chunk)
        out += amp[sl] @ np.sin(0.5 * np.outer(omega[sl], times)) ** 2
    return out


def thermal_population(cfg: ThermalConfig, n_max: int | None = None) -> np.ndarray:
    """Excited-level population for a thermal unpolarized field and an unpolarized ground atom.

    Sums the Rabi terms of every coupled pair of every block, weighted by
    p_n / ((2 J0 + 1)(n + 1)).  ``n_max`` overrides the truncation derived
    from ``cfg.truncation_eps``.
    """
    t = cfg.transition
    n_max = _resolve_n_max(cfg.n_c, cfg.truncation_eps, n_max)
    p = thermal_weights(cfg.n_c, n_max)
    weights, xis = [], []
    for n in range(1, n_max + 1):
        w = p[n] / ((t.j0_2 + 1) * (n + 1))
        for key in enumerate_block_keys(t, n):
            xi = block_eigensystem(t, n, key.l).xi
            xis.append(xi)
            weights.append(np.full(xi.size, w))
    if not xis:
        return np.zeros(cfg.t_grid.size)
    return _rabi_sum(np.concatenate(weights), np.concatenate(xis), cfg.delta, cfg.theta, cfg.t_grid)


def thermal_population_evolved(cfg: ThermalConfig, n_max: int | None = None) -> np.ndarray:
    """Same quantity as :func:`thermal_population`, propagating the full initial state block by block."""
    rho = build_initial_state(
        "thermal_ground", cfg.transition, n_c=cfg.n_c, truncation_eps=cfg.truncation_eps, n_max=n_max
    )
    return observable_series(rho, cfg.delta, cfg.theta, cfg.t_grid)


def _require_stretched(t: TransitionSpec):
    if t.j1_2 != t.j0_2 + 2:
        raise DomainError(f"the stretched-state reduction needs J1 = J0 + 1, got {t}")


def stretched_population(cfg: ThermalConfig, n_max: int | None = None) -> np.ndarray:
    """Two-level reference: atom in |J0, J0>, thermal sigma+ photons, xi_n^2 = n / (2 J0 + 3)."""
    t = cfg.transition
    _require_stretched(t)
    n_max = _resolve_n_max(cfg.n_c, cfg.truncation_eps, n_max)
    p = thermal_weights(cfg.n_c, n_max)
    n = np.arange(1, n_max + 1)
    xi = np.sqrt(n / (t.j0_2 + 3))
    return _rabi_sum(p[1:], xi, cfg.delta, cfg.theta, cfg.t_grid)


def stretched_population_evolved(cfg: ThermalConfig, n_max: int | None = None) -> np.ndarray:
    """:func:`stretched_population` through the general block machinery."""
    _require_stretched(cfg.transition)
    rho = build_initial_state(
        "stretched_sigma_plus", cfg.transition, n_c=cfg.n_c, truncation_eps=cfg.truncation_eps, n_max=n_max
    )
    return observable_series(rho, cfg.delta, cfg.theta, cfg.t_grid)


# polarization swap ------------------------------------------------------------


def swap_frequency(t: TransitionSpec, l=0, delta: float = 0.0, theta: float = 1.0) -> float:
    """Rabi frequency sqrt(delta^2 + theta^2 (xi0^2 + xi1^2)) of the single-photon block ``l``.

    For an integer J0 and ``l = 0`` at resonance this is theta |f2(1)| sqrt(2),
    the frequency of the complete sigma+ to sigma- swap.
    """
    xi0, xi1 = single_photon_xi(t, l)
    return math.sqrt(delta**2 + theta**2 * (xi0**2 + xi1**2))


def polarization_swap(cfg: SwapConfig) -> np.ndarray:
    """Probability of a sigma- photon after starting from one sigma+ photon.

    Each ground projection m feeds the single-photon block l = m + 1 whose
    channel amplitudes (xi0, xi1) give
    ``F = xi0 xi1 / xi^2 (C(t) - exp(i delta t / 2))``.
    """
    t = cfg.transition
    times = cfg.t_grid
    total = np.zeros(times.size)
    for i, pop in enumerate(cfg.ground_populations):
        if pop == 0:
            continue
        l = HalfInt(-t.j0_2 + 2 * i + 2)
        xi0, xi1 = single_photon_xi(t, l)
        if xi0 == 0 or xi1 == 0:
            continue
        xi2 = xi0**2 + xi1**2
        omega = math.sqrt(cfg.delta**2 + cfg.theta**2 * xi2)
        half = 0.5 * omega * times
        c = np.cos(half) + 1j * (cfg.delta / omega) * np.sin(half)
        f = xi0 * xi1 / xi2 * (c - np.exp(0.5j * cfg.delta * times))
        total += pop * np.abs(f) ** 2
    return total


def _sigma_minus_weights(t: TransitionSpec, key: BlockKey) -> np.ndarray:
    n0, n1 = block_dims(t, key)
    w = np.zeros(n0 + n1)
    if key.n == 1 and n0:
        b0, _ = block_bases(t, key.n, key.l)
        w[:n0] = [1.0 if s == -1 else 0.0 for s in b0.sigma_values]
    return w


def polarization_swap_evolved(cfg: SwapConfig) -> np.ndarray:
    """:func:`polarization_swap` as tr(rho(t) |1,-1><1,-1|) through the block evolution."""
    rho = build_initial_state("ground_plus_photon", cfg.transition, ground_populations=cfg.ground_populations)
    return observable_series(rho, cfg.delta, cfg.theta, cfg.t_grid, weights=_sigma_minus_weights)
