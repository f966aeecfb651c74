import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from jcdegen.angular import HalfInt, TransitionSpec
from jcdegen.errors import DomainError
from jcdegen.evolution import (
    BlockDensityMatrix,
    EvolutionParams,
    block_dims,
    block_eigenbasis,
    block_S,
    evolve,
    excited_population,
    observable_series,
)
from jcdegen.oracles import dense_hamiltonian
from jcdegen.selfcheck import transitions_up_to
from jcdegen.spectral import block_eigensystem
from jcdegen.statespace import BlockKey, SubspaceKey, enumerate_block_keys

block_strategy = st.sampled_from(transitions_up_to(8)).flatmap(
    lambda t: st.integers(1, 6).flatmap(
        lambda n: st.sampled_from(enumerate_block_keys(t, n)).map(lambda k: (t, n, k.l))
    )
)
params = st.tuples(st.floats(-2, 2), st.floats(0.1, 2), st.floats(0, 40))


def random_state(t: TransitionSpec, keys, rng) -> BlockDensityMatrix:
    """Random mixed state over ``keys``, including every cross-block coherence."""
    dims = [sum(block_dims(t, k)) for k in keys]
    total = sum(dims)
    a = rng.normal(size=(total, total)) + 1j * rng.normal(size=(total, total))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    offs = np.cumsum([0] + dims)
    out = BlockDensityMatrix(t)
    for i, ki in enumerate(keys):
        for j, kj in enumerate(keys):
            out[ki, kj] = rho[offs[i] : offs[i + 1], offs[j] : offs[j + 1]]
    return out


# block_S ----------------------------------------------------------------------


@given(block_strategy, st.floats(-2, 2), st.floats(0.1, 2))
def test_S_at_zero_is_identity(block, delta, theta):
    s = block_S(*block, EvolutionParams(delta, theta, 0.0))
    assert np.max(np.abs(s - np.eye(s.shape[0]))) < 1e-15


def test_resonant_two_by_two_sector():
    t = TransitionSpec.of(0, 1)
    es = block_eigensystem(t, 1, 1)
    xi = es.xi[0]
    for time in (0.3, 2.0, 7.7):
        s = block_S(t, 1, 1, EvolutionParams(0.0, 1.0, time))
        sector = np.array(
            [
                [es.v0[:, 0].conj() @ s[:1, :1] @ es.v0[:, 0], es.v0[:, 0].conj() @ s[:1, 1:] @ es.v1[:, 0]],
                [es.v1[:, 0].conj() @ s[1:, :1] @ es.v0[:, 0], es.v1[:, 0].conj() @ s[1:, 1:] @ es.v1[:, 0]],
            ]
        )
        c, sn = math.cos(xi * time / 2), math.sin(xi * time / 2)
        assert np.max(np.abs(sector - np.array([[c, 1j * sn], [1j * sn, c]]))) < 1e-15


def test_excited_dark_block_phase():
    t = TransitionSpec.of(0, 1)
    for delta, time in ((0.3, 1.7), (-1.2, 5.0)):
        s = block_S(t, 1, 0, EvolutionParams(delta, 1.0, time))
        assert s.shape == (1, 1)
        assert s[0, 0] == pytest.approx(np.exp(-0.5j * delta * time), abs=1e-15)


@given(block_strategy, params, st.floats(0, 40))
def test_unitarity_and_group_law(block, p, t2):
    delta, theta, t1 = p
    s1 = block_S(*block, EvolutionParams(delta, theta, t1))
    s2 = block_S(*block, EvolutionParams(delta, theta, t2))
    s12 = block_S(*block, EvolutionParams(delta, theta, t1 + t2))
    assert np.max(np.abs(s1 @ s1.conj().T - np.eye(s1.shape[0]))) < 1e-12
    assert np.max(np.abs(s12 - s1 @ s2)) < 1e-11


def test_time_stack_matches_scalar_calls():
    t = TransitionSpec.of(1, 2)
    times = np.array([0.0, 1.5, 4.0])
    stack = block_S(t, 3, 0, EvolutionParams(0.2, 0.9, times))
    for i, tm in enumerate(times):
        assert np.max(np.abs(stack[i] - block_S(t, 3, 0, EvolutionParams(0.2, 0.9, tm)))) < 1e-15


@pytest.mark.parametrize("t", transitions_up_to(8), ids=str)
def test_matches_matrix_exponential(t):
    rng = np.random.default_rng(t.j0_2 * 10 + t.j1_2)
    for n in range(1, 5):
        for key in enumerate_block_keys(t, n):
            if sum(block_dims(t, key)) > 6:
                continue
            delta, theta, time = rng.uniform(-1, 1), rng.uniform(0.2, 2), rng.uniform(0, 25)
            ref = expm(0.5j * time * dense_hamiltonian(t, n, key.l, delta, theta))
            s = block_S(t, n, key.l, EvolutionParams(delta, theta, time))
            assert np.max(np.abs(ref - s)) < 1e-10


@given(block_strategy, st.floats(-2, 2), st.floats(0.1, 2), st.floats(0, 30))
def test_eigenbasis_reproduces_S(block, delta, theta, time):
    lam, u = block_eigenbasis(*block, delta, theta)
    assert np.allclose(u.conj().T @ u, np.eye(len(lam)), atol=1e-12)
    s = (u * np.exp(0.5j * lam * time)) @ u.conj().T
    assert np.max(np.abs(s - block_S(*block, EvolutionParams(delta, theta, time)))) < 1e-11


def test_params_validation():
    with pytest.raises(DomainError):
        EvolutionParams(0.0, 0.0, 1.0)


# BlockDensityMatrix --------------------------------------------------------------


def test_density_matrix_shape_and_validation():
    t = TransitionSpec.of(1, 1)
    rho = BlockDensityMatrix(t)
    with pytest.raises(DomainError):
        rho[(1, 0), (1, 0)] = np.eye(2)  # block (1, 0) holds three states
    key = BlockKey(1, HalfInt(0))
    d = sum(block_dims(t, key))
    rho[key, key] = np.eye(d) / d
    rho.validate()
    bad = rho.copy()
    bad[key, key] = np.diag([1.5, -0.5] + [0] * (d - 2))
    with pytest.raises(DomainError):
        bad.validate()
    short = BlockDensityMatrix(t, {(key, key): np.eye(d) / d * (1 - 1e-11)})
    with pytest.raises(DomainError):
        short.validate()
    short.validate(trace_tol=1e-10)
    assert np.all(rho[(2, 0), (1, 0)] == 0)


def test_subspace_view():
    t = TransitionSpec.of(0, 1)
    rho = BlockDensityMatrix(t)
    key = BlockKey(1, HalfInt(2))
    rho[key, key] = np.array([[0.0, 0.0], [0.0, 1.0]])
    entries = rho.subspace_entries()
    assert list(entries) == [(SubspaceKey(1, 0, 1), SubspaceKey(1, 0, 1))]
    assert entries[SubspaceKey(1, 0, 1), SubspaceKey(1, 0, 1)].shape == (1, 1)


# evolve ------------------------------------------------------------------------


@given(st.sampled_from(transitions_up_to(6)), st.integers(0, 2**32 - 1), params)
def test_evolve_preserves_trace_and_hermiticity(t, seed, p):
    rng = np.random.default_rng(seed)
    keys = enumerate_block_keys(t, 1) + enumerate_block_keys(t, 2)[:2]
    rho = random_state(t, keys, rng)
    out = evolve(rho, EvolutionParams(*p))
    assert set(out.keys()) == set(rho.keys())
    assert abs(out.trace() - 1) < 1e-12
    out.validate(atol=1e-12)


def test_evolve_coherence_uses_both_blocks():
    t = TransitionSpec.of(1, 2)
    rng = np.random.default_rng(3)
    k1, k2 = BlockKey(1, HalfInt(-2)), BlockKey(1, HalfInt(2))
    rho = random_state(t, [k1, k2], rng)
    p = EvolutionParams(0.4, 1.1, 3.3)
    out = evolve(rho, p)
    s1 = block_S(t, 1, k1.l, p)
    s2 = block_S(t, 1, k2.l, p)
    assert np.max(np.abs(out[k1, k2] - s1 @ rho[k1, k2] @ s2.conj().T)) < 1e-15
    # the direct-sum propagator gives the same full matrix
    d1, d2 = s1.shape[0], s2.shape[0]
    big = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    big[:d1, :d1], big[d1:, d1:] = s1, s2
    full = np.block([[rho[k1, k1], rho[k1, k2]], [rho[k2, k1], rho[k2, k2]]])
    ref = big @ full @ big.conj().T
    assert np.max(np.abs(ref[:d1, d1:] - out[k1, k2])) < 1e-14


def test_dark_state_population_is_constant():
    t = TransitionSpec.of(1, 0)
    es = block_eigensystem(t, 2, 1)
    key = BlockKey(2, HalfInt(2))
    n0, n1 = block_dims(t, key)
    d = np.zeros((n0 + n1, 1), dtype=complex)
    d[:n0] = es.d0
    rho = BlockDensityMatrix(t, {(key, key): d @ d.conj().T})
    for time in (0.0, 1.0, 17.0):
        out = evolve(rho, EvolutionParams(0.3, 1.0, time))
        assert np.max(np.abs(out[key, key] - rho[key, key])) < 1e-14


def test_excited_population_examples():
    t = TransitionSpec.of(3, 4)
    # ground-only
    key = BlockKey(1, HalfInt(2))
    n0, n1 = block_dims(t, key)
    ground = BlockDensityMatrix(t, {(key, key): np.diag([1.0] + [0.0] * (n0 + n1 - 1))})
    assert excited_population(ground) == 0.0
    # stretched single photon: two-level Rabi with xi = 1/sqrt(2 J0 + 3)
    top = BlockKey(1, HalfInt(8))
    n0, n1 = block_dims(t, top)
    assert (n0, n1) == (1, 1)
    rho = BlockDensityMatrix(t, {(top, top): np.diag([1.0, 0.0])})
    xi = 1 / math.sqrt(9)
    for time in (math.pi / xi, 1.3, 10.0):
        got = excited_population(evolve(rho, EvolutionParams(0.0, 1.0, time)))
        assert got == pytest.approx(math.sin(xi * time / 2) ** 2, abs=1e-14)


@given(st.sampled_from(transitions_up_to(6)), st.integers(0, 2**32 - 1), st.floats(-1, 1), st.floats(0.1, 2))
def test_observable_series_matches_evolve(t, seed, delta, theta):
    rng = np.random.default_rng(seed)
    keys = enumerate_block_keys(t, 1) + enumerate_block_keys(t, 3)
    rho = random_state(t, keys, rng)
    times = np.array([0.0, 0.9, 5.5, 31.0])
    series = observable_series(rho, delta, theta, times)
    direct = [excited_population(evolve(rho, EvolutionParams(delta, theta, tm))) for tm in times]
    assert np.max(np.abs(series - direct)) < 1e-12
    assert np.all(series >= -1e-12) and np.all(series <= 1 + 1e-12)
