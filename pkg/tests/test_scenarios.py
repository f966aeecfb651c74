import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcdegen.angular import HalfInt, TransitionSpec, f_coeff
from jcdegen.errors import DomainError
from jcdegen.evolution import EvolutionParams, evolve, excited_population
from jcdegen.relaxation import photon_matrix_from_blocks
from jcdegen.scenarios import (
    SwapConfig,
    ThermalConfig,
    build_initial_state,
    polarization_swap,
    polarization_swap_evolved,
    stretched_population,
    stretched_population_evolved,
    swap_frequency,
    thermal_population,
    thermal_population_evolved,
    thermal_truncation,
    thermal_weights,
)
from jcdegen.selfcheck import transitions_up_to
from jcdegen.statespace import SubspaceKey

GRID = np.linspace(0, 40, 401)


# thermal field -------------------------------------------------------------------


def test_truncation_rule():
    assert thermal_truncation(3.0, 1e-10) == 80
    for n_c in (0.1, 1.0, 3.0, 12.5):
        for eps in (1e-4, 1e-10, 1e-13):
            n_max = thermal_truncation(n_c, eps)
            ratio = n_c / (1 + n_c)
            assert ratio ** (n_max + 1) < eps
            assert n_max == 0 or ratio**n_max >= eps
            tail = 1 - thermal_weights(n_c, n_max).sum()
            assert tail < eps + 1e-15


def test_thermal_weights_match_geometric_law():
    p = thermal_weights(2.0, 5)
    assert p == pytest.approx([2.0**n / 3.0 ** (n + 1) for n in range(6)], rel=1e-14)


def test_config_validation():
    t = TransitionSpec.of(1, 2)
    with pytest.raises(DomainError):
        ThermalConfig(t, 0.0, 1.0, n_c=0.0)
    with pytest.raises(DomainError):
        ThermalConfig(t, 0.0, 0.0, n_c=1.0)
    with pytest.raises(DomainError):
        ThermalConfig(t, 0.0, 1.0, n_c=1.0, truncation_eps=0.1)
    with pytest.raises(DomainError):
        SwapConfig(t, 0.0, 1.0, ground_populations=[0.5, 0.6, 0.0])
    with pytest.raises(DomainError):
        SwapConfig(t, 0.0, 1.0, ground_populations=[1.0, 0.0])
    with pytest.raises(DomainError):
        SwapConfig.pure(t, "1/2")


@pytest.mark.parametrize("t", transitions_up_to(4), ids=str)
def test_thermal_paths_agree(t):
    cfg = ThermalConfig(t, delta=0.1, theta=1.0, n_c=1.5, t_grid=GRID)
    closed = thermal_population(cfg)
    evolved = thermal_population_evolved(cfg)
    assert closed[0] == 0
    assert np.max(np.abs(closed - evolved)) < 1e-10
    assert np.all(closed >= -1e-12) and np.all(closed <= 1 + 1e-12)


def test_thermal_matches_literal_evolve():
    t = TransitionSpec.of(1, 2)
    cfg = ThermalConfig(t, delta=-0.2, theta=0.8, n_c=0.7, t_grid=[0.0, 3.0, 11.0])
    rho = build_initial_state("thermal_ground", t, n_c=0.7)
    direct = [excited_population(evolve(rho, EvolutionParams(-0.2, 0.8, tm))) for tm in cfg.t_grid]
    assert np.max(np.abs(thermal_population(cfg) - direct)) < 1e-12


def test_truncation_is_monotone():
    t = TransitionSpec.of(1, 1)
    eps = 1e-6
    cfg = ThermalConfig(t, delta=0.0, theta=1.0, n_c=2.0, t_grid=GRID, truncation_eps=eps)
    base = thermal_population(cfg)
    n_max = thermal_truncation(2.0, eps)
    for extra in (1, 5, 20):
        assert np.max(np.abs(thermal_population(cfg, n_max=n_max + extra) - base)) <= eps


def test_stretched_fock_reference():
    # the n_c -> 0 limit leaves the atom in its ground state
    t = TransitionSpec.of(3, 4)
    cfg = ThermalConfig(t, delta=0.0, theta=1.0, n_c=1e-9, t_grid=GRID)
    assert np.max(stretched_population(cfg)) < 2e-9
    # a single sigma+ photon gives a two-level Rabi flop with xi^2 = 1/9
    n1 = stretched_population(ThermalConfig(t, 0.0, 1.0, n_c=1.0, t_grid=GRID), n_max=1)
    assert np.max(np.abs(n1 - 0.25 * np.sin(GRID / 6) ** 2)) < 1e-15  # p_1 = 1/4 at n_c = 1


@pytest.mark.parametrize("j0", ["0", "1/2", "1", "2", "5/2"])
def test_stretched_paths_agree(j0):
    t = TransitionSpec.of(j0, HalfInt.parse(j0) + 1)
    cfg = ThermalConfig(t, delta=0.1, theta=1.0, n_c=2.0, t_grid=GRID)
    closed = stretched_population(cfg)
    assert np.max(np.abs(closed - stretched_population_evolved(cfg))) < 1e-12


def test_stretched_requires_j_plus_one():
    cfg = ThermalConfig(TransitionSpec.of(1, 1), 0.0, 1.0, n_c=1.0, t_grid=GRID)
    with pytest.raises(DomainError):
        stretched_population(cfg)
    with pytest.raises(DomainError):
        stretched_population_evolved(cfg)


# initial states --------------------------------------------------------------------


def test_thermal_ground_trace():
    rho = build_initial_state("thermal_ground", TransitionSpec.of(3, 4), n_c=3.0, truncation_eps=1e-10)
    assert abs(rho.trace() - 1) < 1e-10
    rho.validate(trace_tol=1e-10)


def test_excited_vacuum_single_block():
    t = TransitionSpec.of(1, 2)
    n1 = np.zeros((5, 5))
    n1[3, 3] = 1.0  # m = +1
    rho = build_initial_state("excited_vacuum", t, initial_excited=n1)
    entries = rho.subspace_entries()
    key = SubspaceKey(1, 0, 1)
    assert list(entries) == [(key, key)]
    assert entries[key, key].shape == (1, 1) and entries[key, key][0, 0] == 1


def test_excited_vacuum_keeps_coherences():
    t = TransitionSpec.of(0, 1)
    psi = np.array([1, 0, 1j]) / math.sqrt(2)
    rho = build_initial_state("excited_vacuum", t, initial_excited=np.outer(psi, psi.conj()))
    rho.validate()
    entries = rho.subspace_entries()
    assert entries[SubspaceKey(1, 0, -1), SubspaceKey(1, 0, 1)][0, 0] == pytest.approx(-0.5j)


def test_ground_plus_photon_support():
    t = TransitionSpec.of("3/2", "3/2")
    pops = [0.5, 0.0, 0.25, 0.25]
    rho = build_initial_state("ground_plus_photon", t, ground_populations=pops)
    got = sorted((k.n, k.l.twice) for k in rho.block_keys())
    assert got == [(1, -1), (1, 3), (1, 5)]
    rho.validate()
    w = photon_matrix_from_blocks(rho)
    assert w.w[0, 0] == pytest.approx(1.0) and abs(w.w[1, 1]) == 0


def test_initial_state_errors():
    t = TransitionSpec.of(1, 1)
    with pytest.raises(DomainError):
        build_initial_state("coherent", t)
    with pytest.raises(DomainError):
        build_initial_state("thermal_ground", t, nc=1.0)
    with pytest.raises(DomainError):
        build_initial_state("excited_vacuum", t, initial_excited=np.eye(3))
    with pytest.raises(DomainError):
        build_initial_state("stretched_sigma_plus", t, n_c=1.0, n_max=-1)


# polarization swap -------------------------------------------------------------------


@pytest.mark.parametrize("j", ["1", "2", "3", "4"])
def test_resonant_swap_formula(j):
    t = TransitionSpec.of(j, j)
    omega0 = abs(f_coeff(t, 1, 1)) * math.sqrt(2)
    assert swap_frequency(t) == pytest.approx(omega0, rel=1e-14)
    cfg = SwapConfig.pure(t, -1, delta=0.0, theta=1.0, t_grid=GRID)
    w = polarization_swap(cfg)
    assert np.max(np.abs(w - 0.25 * (1 - np.cos(omega0 * GRID / 2)) ** 2)) < 1e-14
    peak = polarization_swap(SwapConfig.pure(t, -1, delta=0.0, theta=1.0, t_grid=[2 * math.pi / omega0]))
    assert peak[0] == pytest.approx(1.0, abs=1e-14)


def test_half_integer_j_to_j_peak_is_below_one():
    # the two channel amplitudes differ for every reachable block
    t = TransitionSpec.of("3/2", "3/2")
    for m in ("-3/2", "-1/2"):
        omega = swap_frequency(t, HalfInt.parse(m) + 1)
        w = polarization_swap(SwapConfig.pure(t, m, delta=0.0, theta=1.0, t_grid=[2 * math.pi / omega]))
        assert w[0] == pytest.approx(48 / 49, abs=1e-14)


def test_swap_blocked_channel_contributes_nothing():
    t = TransitionSpec.of(2, 1)
    # from m = J - 1 = 1 the block l = 2 has no sigma- partner
    cfg = SwapConfig.pure(t, 1, delta=0.3, theta=1.0, t_grid=GRID)
    assert np.all(polarization_swap(cfg) == 0)
    assert np.max(np.abs(polarization_swap_evolved(cfg))) < 1e-15


@given(st.sampled_from(transitions_up_to(6)), st.integers(0, 2**32 - 1), st.floats(-1, 1), st.floats(0.2, 2))
@settings(max_examples=30)
def test_swap_paths_agree(t, seed, delta, theta):
    rng = np.random.default_rng(seed)
    pops = rng.dirichlet(np.ones(t.j0_2 + 1))
    cfg = SwapConfig(t, delta, theta, ground_populations=pops / pops.sum(), t_grid=np.linspace(0, 30, 61))
    closed = polarization_swap(cfg)
    assert closed[0] == 0
    assert np.max(np.abs(closed - polarization_swap_evolved(cfg))) < 1e-10
    assert np.all(closed >= -1e-12) and np.all(closed <= 1 + 1e-12)


def test_swap_matches_literal_evolve():
    t = TransitionSpec.of(1, 1)
    cfg = SwapConfig(t, 0.2, 1.0, ground_populations=[0.3, 0.3, 0.4], t_grid=[0.0, 2.5, 9.0])
    rho = build_initial_state("ground_plus_photon", t, ground_populations=cfg.ground_populations)
    direct = [photon_matrix_from_blocks(evolve(rho, EvolutionParams(0.2, 1.0, tm))).w[1, 1].real for tm in cfg.t_grid]
    assert np.max(np.abs(polarization_swap(cfg) - direct)) < 1e-14
