"""Single-photon emission into an empty cavity with cavity decay and spontaneous emission.

Two routes are provided:

* :func:`emission_closed_form`, the strong-coupling solution in which each
  excited projection m keeps its own Rabi frequency and the dressed states
  decay at their diagonal rates;
* :func:`emission_lindblad`, a direct integration of the master equation on
  the closed manifold {excited atom, no photon} + {ground atom, one photon}
  + {ground atom, no photon}.  The last set collects decayed population, so
  the trace over the manifold is conserved exactly.

Photon matrices are indexed by polarization q = +1 (sigma+) then q = -1
(sigma-) and hold ``w[q, q'] = <1, q| rho_photon |1, q'>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .angular import HalfInt, TransitionSpec, as_half, f_coeff
from .errors import DomainError, IntegrationError
from .evolution import BlockDensityMatrix
from .spectral import block_bases

__all__ = [
    "EmissionConfig",
    "PhotonPolarizationMatrix",
    "EmissionTrajectory",
    "ManifoldBasis",
    "POLARIZATIONS",
    "emission_closed_form",
    "emission_closed_form_series",
    "emission_lindblad",
    "lindblad_operators",
    "photon_matrix_from_blocks",
]

#: row/column order of photon matrices
POLARIZATIONS = (1, -1)


@dataclass(frozen=True)
class EmissionConfig:
    """Emission run; rates and detuning in the same units as ``theta``.

    ``initial_excited`` is the atomic density matrix over m = -J1..J1
    (ascending) with the cavity empty.
    """

    transition: TransitionSpec
    initial_excited: np.ndarray
    delta: float = 0.0
    theta: float = 1.0
    gamma_c: float = 0.0
    gamma_a: float = 0.0

    def __post_init__(self):
        if not self.theta >= 0:
            raise DomainError(f"theta must be >= 0, got {self.theta}")
        if self.gamma_c < 0 or self.gamma_a < 0:
            raise DomainError("decay rates must be >= 0")
        n1 = np.array(self.initial_excited, dtype=complex)
        size = self.transition.j1_2 + 1
        if n1.shape != (size, size):
            raise DomainError(f"initial_excited must be {size}x{size}, got {n1.shape}")
        if np.max(np.abs(n1 - n1.conj().T)) > 1e-12:
            raise DomainError("initial_excited must be hermitian")
        if abs(np.trace(n1) - 1) > 1e-12 or np.linalg.eigvalsh(n1)[0] < -1e-12:
            raise DomainError("initial_excited must be positive semidefinite with unit trace")
        n1.setflags(write=False)
        object.__setattr__(self, "initial_excited", n1)

    @classmethod
    def pure(cls, transition: TransitionSpec, amplitudes, **kwargs) -> "EmissionConfig":
        """Excited atom in the pure state sum_m amplitudes[m] |J1, m> (normalized here)."""
        psi = np.asarray(amplitudes, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(transition, np.outer(psi, psi.conj()), **kwargs)

    @property
    def gamma(self) -> float:
        """Mean decay rate (gamma_c + gamma_a) / 2."""
        return 0.5 * (self.gamma_c + self.gamma_a)


@dataclass(frozen=True)
class PhotonPolarizationMatrix:
    """2x2 photon matrix ``w[q, q']`` for q, q' in (+1, -1)."""

    w: np.ndarray

    @property
    def probability(self) -> float:
        """Probability that the cavity holds the photon, tr(w)."""
        return float(np.real(np.trace(self.w)))

    def polarization(self) -> np.ndarray:
        """Normalized polarization matrix w / tr(w)."""
        p = self.probability
        if p <= 0:
            raise DomainError("no photon in the cavity; polarization is undefined")
        return self.w / p

    def element(self, q: int, q2: int) -> complex:
        return complex(self.w[POLARIZATIONS.index(q), POLARIZATIONS.index(q2)])


# closed form ------------------------------------------------------------------


def _excited_ms(t: TransitionSpec) -> np.ndarray:
    return np.arange(-t.j1_2, t.j1_2 + 1, 2)


def emission_closed_form_series(cfg: EmissionConfig, times) -> np.ndarray:
    """Strong-coupling photon matrices on ``times``; shape (T, 2, 2).

    For excited projection m the sigma+ channel reaches ``|J0, m-1>`` with
    amplitude ``f1(m-1)`` and the sigma- channel ``|J0, m+1>`` with ``f2(m+1)``.
    The damping factors are combined with the hyperbolic terms before
    exponentiation, so long times do not overflow.
    """
    t = cfg.transition
    times = np.atleast_1d(np.asarray(times, dtype=float))
    ms = _excited_ms(t)
    nm = len(ms)
    b = np.zeros((2, nm))
    for j, m2 in enumerate(ms.tolist()):
        b[0, j] = f_coeff(t, -1, HalfInt(m2 - 2))
        b[1, j] = f_coeff(t, 1, HalfInt(m2 + 2))
    xi2 = np.sum(b**2, axis=0)
    omega = np.sqrt(cfg.delta**2 + cfg.theta**2 * xi2)
    safe = np.where(omega > 0, omega, 1.0)
    dm = np.where(omega > 0, cfg.delta / safe, 0.0) * 0.5 * (cfg.gamma_c - cfg.gamma_a)

    tt = times[:, None]
    g = cfg.gamma
    # exp(-g t / 2) sinh(dm t / 2) and exp(-g t / 2) cosh(dm t / 2)
    e_plus = np.exp(0.5 * (dm - g) * tt)
    e_minus = np.exp(0.5 * (-dm - g) * tt)
    sh = 0.5 * (e_plus - e_minus)
    ch = 0.5 * (e_plus + e_minus)
    half = 0.5 * omega * tt
    pq = sh * np.cos(half) + 1j * ch * np.sin(half)
    h = (b * np.where(omega > 0, cfg.theta / safe, 0.0))[None, :, :] * pq[:, None, :]  # (T, q, m)

    # selection rule: the atom ends in the same ground state, m - q = m' - q'
    qs = np.array(POLARIZATIONS)
    ground = ms[None, :] - 2 * qs[:, None]  # doubled ground projection per (q, m)
    mask = ground[:, None, :, None] == ground[None, :, None, :]  # (q, q', m, m')
    kernel = mask * cfg.initial_excited[None, None, :, :]
    return np.einsum("tqm,qamn,tan->tqa", h.conj(), kernel, h)


def emission_closed_form(cfg: EmissionConfig, t: float) -> PhotonPolarizationMatrix:
    """Strong-coupling photon matrix at time ``t`` (accurate when gamma_c, gamma_a << Rabi frequencies)."""
    return PhotonPolarizationMatrix(emission_closed_form_series(cfg, [t])[0])


# master equation --------------------------------------------------------------


@dataclass(frozen=True)
class ManifoldBasis:
    """Labels of the emission manifold.

    ``states[i]`` is ``(kind, m_doubled, q)`` with kind ``"excited"``
    (photon-free, q = 0), ``"photon"`` (one photon of polarization q) or
    ``"sink"`` (photon-free ground state, q = 0).
    """

    transition: TransitionSpec
    states: tuple[tuple[str, int, int], ...]

    @classmethod
    def of(cls, t: TransitionSpec) -> "ManifoldBasis":
        states = [("excited", m, 0) for m in range(-t.j1_2, t.j1_2 + 1, 2)]
        for q in POLARIZATIONS:
            states += [("photon", m, q) for m in range(-t.j0_2, t.j0_2 + 1, 2)]
        states += [("sink", m, 0) for m in range(-t.j0_2, t.j0_2 + 1, 2)]
        return cls(t, tuple(states))

    def __len__(self):
        return len(self.states)

    def index(self, kind: str, m, q: int = 0) -> int:
        """Position of the state ``kind`` with projection ``m`` (not doubled) and polarization ``q``."""
        return self.states.index((kind, as_half(m).twice, q))

    def photon_slices(self) -> dict[int, list[int]]:
        """Indices of photon states per polarization, ground m ascending."""
        return {q: [i for i, s in enumerate(self.states) if s[0] == "photon" and s[2] == q] for q in POLARIZATIONS}


def lindblad_operators(cfg: EmissionConfig) -> tuple[ManifoldBasis, np.ndarray, list[np.ndarray]]:
    """Basis, interaction operator and jump operators of the emission manifold.

    The interaction operator is ``delta`` on ground-level states, ``-delta``
    on excited states, plus theta times the single-photon couplings
    ``<J1, m+1; 0| G^dagger |J0, m; 1, +1> = i f1(m)`` and
    ``<J1, m-1; 0| G^dagger |J0, m; 1, -1> = i f2(m)``.  Jump operators are
    sqrt(gamma_c) a_q (photon to sink) and sqrt(gamma_a (2 J1 + 1)) g_q with
    ``<J0, m0| g_q |J1, m0 - q> = f_q(m0)`` for q = -1, 0, +1.
    """
    t = cfg.transition
    basis = ManifoldBasis.of(t)
    idx = {s: i for i, s in enumerate(basis.states)}
    d = len(basis)
    ham = np.zeros((d, d), dtype=complex)
    for (kind, m, q), i in idx.items():
        ham[i, i] = -cfg.delta if kind == "excited" else cfg.delta
    for q, f_q in ((1, -1), (-1, 1)):
        # photon q = +1 is absorbed through f1 (f_coeff q=-1), raising m
        for m in range(-t.j0_2, t.j0_2 + 1, 2):
            m_ex = m + 2 * q
            if abs(m_ex) > t.j1_2:
                continue
            amp = cfg.theta * 1j * f_coeff(t, f_q, HalfInt(m))
            r, c = idx["excited", m_ex, 0], idx["photon", m, q]
            ham[r, c] += amp
            ham[c, r] += np.conj(amp)

    jumps = []
    if cfg.gamma_c > 0:
        rate = math.sqrt(cfg.gamma_c)
        for q in POLARIZATIONS:
            op = np.zeros((d, d), dtype=complex)
            for m in range(-t.j0_2, t.j0_2 + 1, 2):
                op[idx["sink", m, 0], idx["photon", m, q]] = rate
            jumps.append(op)
    if cfg.gamma_a > 0:
        rate = math.sqrt(cfg.gamma_a * (t.j1_2 + 1))
        for q in (-1, 0, 1):
            op = np.zeros((d, d), dtype=complex)
            for m0 in range(-t.j0_2, t.j0_2 + 1, 2):
                m1 = m0 - 2 * q
                if abs(m1) <= t.j1_2:
                    op[idx["sink", m0, 0], idx["excited", m1, 0]] = rate * f_coeff(t, q, HalfInt(m0))
            jumps.append(op)
    return basis, ham, jumps


def _liouvillian(ham: np.ndarray, jumps: list[np.ndarray]) -> np.ndarray:
    """Superoperator of d rho / dt = (i/2)[H, rho] + sum L rho L^H - {L^H L, rho}/2, row-major vec."""
    d = ham.shape[0]
    eye = np.eye(d)
    eff = 0.5j * ham - 0.5 * sum((L.conj().T @ L for L in jumps), np.zeros((d, d), complex))
    # A rho + rho A^H with A = eff
    sup = np.kron(eff, eye) + np.kron(eye, eff.conj())
    for L in jumps:
        sup += np.kron(L, L.conj())
    return sup


@dataclass(frozen=True)
class EmissionTrajectory:
    """Output of :func:`emission_lindblad`; item ``i`` is ``(PhotonPolarizationMatrix, rho)`` at ``times[i]``."""

    basis: ManifoldBasis
    times: np.ndarray
    w: np.ndarray
    rho: np.ndarray

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i) -> tuple[PhotonPolarizationMatrix, np.ndarray]:
        return PhotonPolarizationMatrix(self.w[i]), self.rho[i]

    def __iter__(self) -> Iterator[tuple[PhotonPolarizationMatrix, np.ndarray]]:
        for i in range(len(self)):
            yield self[i]


def _photon_readout(basis: ManifoldBasis, rho: np.ndarray) -> np.ndarray:
    """w[q, q'] = sum over ground m of <m; 1 q| rho |m; 1 q'>."""
    sl = basis.photon_slices()
    out = np.zeros(rho.shape[:-2] + (2, 2), dtype=complex)
    for a, q in enumerate(POLARIZATIONS):
        for b, q2 in enumerate(POLARIZATIONS):
            out[..., a, b] = np.einsum("...ii->...", rho[..., sl[q], :][..., :, sl[q2]])
    return out


#: Taylor order of the step propagator
TAYLOR_ORDER = 18
#: largest superoperator dimension whose one-step propagator is stored as a dense matrix
_DENSE_LIMIT = 1600


def emission_lindblad(
    cfg: EmissionConfig,
    t_grid: Sequence[float],
    tol: float = 1e-10,
    min_step: float = 1e-12,
) -> EmissionTrajectory:
    """Integrate the master equation on the emission manifold and sample it on ``t_grid``.

    The one-step propagator is the order-``TAYLOR_ORDER`` Taylor polynomial
    of exp(h L).  Each output interval is split into equal steps, halving
    the step until the remainder bound ``(|L| h)^(K+1) / (K+1)! e^(|L| h)``
    is below ``tol * h * rate``, where ``rate`` is the mean decay rate (or
    theta without decay, or 1 when both vanish).  Every power of L
    annihilates the trace, so the scheme conserves it up to rounding.

    Raises :class:`IntegrationError` if the step would fall below
    ``min_step`` times the interval, or the state stops being finite.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("t_grid must be a nonempty one-dimensional sequence")
    if times[0] != 0 or np.any(np.diff(times) < 0):
        raise DomainError("t_grid must start at 0 and be ascending")

    basis, ham, jumps = lindblad_operators(cfg)
    d = len(basis)
    sup = _liouvillian(ham, jumps)
    norm = float(np.linalg.norm(sup, 1))
    rate = cfg.gamma if cfg.gamma > 0 else (cfg.theta if cfg.theta > 0 else 1.0)

    rho0 = np.zeros((d, d), dtype=complex)
    ne = cfg.transition.j1_2 + 1
    rho0[:ne, :ne] = cfg.initial_excited
    vec = rho0.reshape(-1)

    dense = sup.shape[0] <= _DENSE_LIMIT
    cache: dict[float, np.ndarray] = {}

    def propagator(h: float) -> np.ndarray:
        if h not in cache:
            a = sup * h
            out = np.eye(a.shape[0], dtype=complex)
            for k in range(TAYLOR_ORDER, 0, -1):
                out = np.eye(a.shape[0], dtype=complex) + (a @ out) / k
            cache[h] = out
        return cache[h]

    def step(v: np.ndarray, h: float) -> np.ndarray:
        if dense:
            return propagator(h) @ v
        term, out = v, v.copy()
        for k in range(1, TAYLOR_ORDER + 1):
            term = (sup @ term) * (h / k)
            out = out + term
        return out

    def n_steps(interval: float, t_now: float) -> int:
        count = 1
        while True:
            h = interval / count
            x = norm * h
            bound = math.exp((TAYLOR_ORDER + 1) * math.log(x) - math.lgamma(TAYLOR_ORDER + 2) + x) if x > 0 else 0.0
            if bound <= tol * h * rate:
                return count
            count *= 2
            if interval / count < min_step * max(interval, 1.0):
                raise IntegrationError(
                    f"step size fell below {min_step:g} without meeting the local tolerance", t=t_now
                )

    rhos = np.empty((times.size, d, d), dtype=complex)
    rhos[0] = rho0
    steps_for: dict[float, int] = {}
    for i in range(1, times.size):
        interval = times[i] - times[i - 1]
        if interval > 0:
            if interval not in steps_for:
                steps_for[interval] = n_steps(interval, times[i - 1])
            count = steps_for[interval]
            h = interval / count
            for _ in range(count):
                vec = step(vec, h)
            if not np.all(np.isfinite(vec)):
                raise IntegrationError("state became non-finite", t=times[i])
        rhos[i] = vec.reshape(d, d)
    return EmissionTrajectory(basis, times, _photon_readout(basis, rhos), rhos)


def photon_matrix_from_blocks(rho: BlockDensityMatrix) -> PhotonPolarizationMatrix:
    """Photon matrix of the one-photon, ground-atom states of a block density matrix.

    Sums ``<J0, m; 1, q| rho |J0, m; 1, q'>`` over m using the ground halves of
    the excitation-one blocks, including coherences between blocks.
    """
    t = rho.transition
    w = np.zeros((2, 2), dtype=complex)
    for a, q in enumerate(POLARIZATIONS):
        for b, q2 in enumerate(POLARIZATIONS):
            for m in range(-t.j0_2, t.j0_2 + 1, 2):
                l1, l2 = HalfInt(m + 2 * q), HalfInt(m + 2 * q2)
                b1, _ = block_bases(t, 1, l1)
                b2, _ = block_bases(t, 1, l2)
                if b1 is None or b2 is None:
                    continue
                i = b1.index_of(HalfInt(m))
                j = b2.index_of(HalfInt(m))
                w[a, b] += rho[(1, l1), (1, l2)][i, j]
    return PhotonPolarizationMatrix(w)
