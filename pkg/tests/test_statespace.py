from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from jcdegen.analytic import parity_class
from jcdegen.angular import HalfInt, TransitionSpec, as_half
from jcdegen.errors import DomainError
from jcdegen.selfcheck import transitions_up_to
from jcdegen.statespace import (
    BlockKey,
    SubspaceKey,
    basis,
    dims_profile,
    enumerate_block_keys,
    enumerate_blocks,
    level_dims,
    subspace_dims,
)


def brute_counts(ja_2: int, n: int) -> Counter:
    """Number of states |J_a, m>|n, sigma> per doubled l = m + sigma."""
    counts = Counter()
    for m in range(-ja_2, ja_2 + 1, 2):
        for sigma in range(-n, n + 1, 2):
            counts[m + 2 * sigma] += 1
    return counts


def test_basis_examples():
    t11 = TransitionSpec.of(1, 1)
    b = basis(t11, SubspaceKey(0, 1, 0))
    assert b.m_values == (as_half(-1), as_half(1))
    assert b.sigma_values == (1, -1)

    t = TransitionSpec.of("3/2", "1/2")
    b = basis(t, SubspaceKey(0, 2, "-3/2"))
    assert b.m_values == (as_half("-3/2"), as_half("1/2"))
    assert b.sigma_values == (0, -2)
    assert b.index_of("1/2") == 1
    with pytest.raises(DomainError):
        b.index_of("-1/2")


@pytest.mark.parametrize("t", transitions_up_to(6), ids=str)
def test_excited_vacuum_block_is_single_state(t):
    for m in range(-t.j1_2, t.j1_2 + 1, 2):
        b = basis(t, SubspaceKey(1, 0, HalfInt(m)))
        assert b.m_values == (HalfInt(m),) and b.sigma_values == (0,)


def test_empty_subspace_is_dim_zero_and_basis_errors():
    t = TransitionSpec.of(1, 1)
    assert subspace_dims(t, 0, 1, 3)[1] == 0
    assert subspace_dims(t, 0, 1, "1/2")[1] == 0
    with pytest.raises(DomainError):
        basis(t, SubspaceKey(0, 1, 3))


def test_key_validation_and_pairing():
    with pytest.raises(DomainError):
        SubspaceKey(2, 0, 0)
    with pytest.raises(DomainError):
        SubspaceKey(0, -1, 0)
    key = SubspaceKey(1, 3, "1/2")
    assert key.block == BlockKey(4, as_half("1/2"))
    assert key.block.excited == key
    assert BlockKey(0, HalfInt(0)).excited is None


def test_enumerate_0_to_1_single_photon():
    keys = enumerate_blocks(TransitionSpec.of(0, 1), 1)
    ground = sorted(k.l.twice // 2 for k in keys if k.a == 0)
    excited = sorted(k.l.twice // 2 for k in keys if k.a == 1)
    assert ground == [-1, 1]
    assert excited == [-1, 0, 1]
    assert all(k.n == 1 for k in keys if k.a == 0) and all(k.n == 0 for k in keys if k.a == 1)


@pytest.mark.parametrize("t", transitions_up_to(6), ids=str)
def test_enumerate_vacuum(t):
    keys = enumerate_blocks(t, 0)
    assert all(k.a == 0 for k in keys)
    assert [k.l.twice for k in keys] == list(range(-t.j0_2, t.j0_2 + 1, 2))
    assert all(subspace_dims(t, 0, 0, k.l)[1] == 1 for k in keys)


def test_enumerate_3_to_4_seven_photons():
    t = TransitionSpec.of(3, 4)
    ground = [k for k in enumerate_blocks(t, 7) if k.a == 0]
    assert [k.l.twice // 2 for k in ground] == list(range(-10, 11))
    assert sum(subspace_dims(t, 0, 7, k.l)[1] for k in ground) == 56


def test_dims_profiles_plateaus():
    # full profiles interleave the two parity classes
    prof3 = dims_profile(3, 7)
    assert [d for _, d in prof3] == [1, 1, 2, 2, 3, 3, 4, 3, 4, 3, 4, 3, 4, 3, 4, 3, 3, 2, 2, 1, 1]
    assert max(d for _, d in dims_profile("5/2", 7)) == 3


@pytest.mark.parametrize("ja_2", range(0, 10))
@pytest.mark.parametrize("n", range(0, 9))
def test_dims_per_parity_class(ja_2, n):
    ja = HalfInt(ja_2)
    for p in (0, 1):
        jp_2 = ja_2 - 2 * p if ja_2 % 2 == 0 else ja_2 - 1
        cls = [d for l, d in dims_profile(ja, n) if parity_class(ja, n, l)[0] == p]
        if jp_2 < 0:
            assert not any(cls)
            continue
        peak = cls.index(max(cls))
        assert cls[: peak + 1] == sorted(cls[: peak + 1])
        assert cls[peak:] == sorted(cls[peak:], reverse=True)
        assert max(cls) == min(n, jp_2 // 2) + 1


@pytest.mark.parametrize("ja_2", range(0, 10))
@pytest.mark.parametrize("n", range(0, 9))
def test_dims_match_brute_force(ja_2, n):
    counts = brute_counts(ja_2, n)
    for l, d in dims_profile(HalfInt(ja_2), n):
        assert d == counts.get(l.twice, 0)


@given(st.sampled_from(transitions_up_to(8)), st.integers(0, 10))
def test_completeness_and_basis_invariants(t, n):
    keys = enumerate_blocks(t, n)
    states = {0: set(), 1: set()}
    for k in keys:
        b = basis(t, k)
        ja_2 = t.level_2(k.a)
        _, dim = level_dims(HalfInt(ja_2), k.n, k.l)
        assert len(b) == dim > 0
        for m, s in zip(b.m_values, b.sigma_values):
            assert abs(m.twice) <= ja_2 and abs(s) <= k.n
            assert (s - k.n) % 2 == 0
            assert m.twice + 2 * s == k.l.twice
            states[k.a].add((m.twice, s))
        assert all(b2.twice - b1.twice == 4 for b1, b2 in zip(b.m_values, b.m_values[1:]))
    assert len(states[0]) == (t.j0_2 + 1) * (n + 1)
    assert len(states[1]) == (t.j1_2 + 1) * n


@given(st.sampled_from(transitions_up_to(8)), st.integers(0, 10))
def test_block_keys_cover_both_halves(t, n):
    sub = {k.l for k in enumerate_blocks(t, n)}
    assert [k.l for k in enumerate_block_keys(t, n)] == sorted(sub)
    assert all(abs(k.l.twice) <= max(t.j0_2, t.j1_2) + 2 * n for k in enumerate_block_keys(t, n))
