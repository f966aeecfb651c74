"""Oracle suites behind ``jcdegen selfcheck``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .analytic import FAMILIES, AnalyticCase, analytic_eigensystem, f_pair, single_photon_xi
from .angular import HalfInt, TransitionSpec, wigner3j
from .evolution import EvolutionParams, block_S
from .oracles import compare_eigensystems, dense_D, dense_hamiltonian, sum_rule_residual, threej_by_lowering
from .spectral import block_eigensystem
from .statespace import dims_profile, enumerate_block_keys

__all__ = ["SuiteResult", "run_suites", "transitions_up_to"]


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    checks: int
    failures: int
    max_error: float


class _Tally:
    def __init__(self, name: str, tol: float):
        self.name, self.tol = name, tol
        self.checks = self.failures = 0
        self.worst = 0.0

    def add(self, err: float):
        self.checks += 1
        self.worst = max(self.worst, err)
        if not err <= self.tol:
            self.failures += 1

    def result(self) -> SuiteResult:
        return SuiteResult(self.name, self.checks, self.failures, self.worst)


def transitions_up_to(j_max_2: int) -> list[TransitionSpec]:
    """Every dipole transition with both momenta (doubled) at most ``j_max_2``."""
    out = []
    for j0 in range(j_max_2 + 1):
        for j1 in (j0 - 2, j0, j0 + 2):
            if 0 <= j1 <= j_max_2 and not (j0 == 0 and j1 == 0):
                out.append(TransitionSpec(HalfInt(j0), HalfInt(j1)))
    return out


def _threej_suite(j_max_2: int) -> SuiteResult:
    tally = _Tally("threej_vs_lowering", 1e-14)
    for j1 in range(j_max_2 + 1):
        for j2 in range(j_max_2 + 1):
            for j3 in range(abs(j1 - j2), min(j1 + j2, j_max_2) + 1, 2):
                for m1 in range(-j1, j1 + 1, 2):
                    for m2 in range(-j2, j2 + 1, 2):
                        m3 = -m1 - m2
                        if abs(m3) > j3:
                            continue
                        args = tuple(HalfInt(x) for x in (j1, j2, j3, m1, m2, m3))
                        tally.add(abs(wigner3j(*args) - threej_by_lowering(*args)))
    return tally.result()


def _sum_rule_suite(j_max_2: int) -> SuiteResult:
    tally = _Tally("dipole_sum_rule", 1e-14)
    for t in transitions_up_to(j_max_2):
        tally.add(sum_rule_residual(t))
    return tally.result()


def _families_suite(n_max: int) -> SuiteResult:
    tally = _Tally("closed_forms_vs_svd", 1e-11)
    for j0_2, j1_2 in FAMILIES:
        t = TransitionSpec(HalfInt(j0_2), HalfInt(j1_2))
        for n in range(1, n_max + 1):
            for key in enumerate_block_keys(t, n):
                ref = analytic_eigensystem(AnalyticCase.for_block(t, n, key.l))
                tally.add(max(compare_eigensystems(ref, block_eigensystem(t, n, key.l)).values()))
    return tally.result()


def _single_photon_suites(j_max_2: int) -> list[SuiteResult]:
    values = _Tally("single_photon_xi_vs_f", 1e-14)
    vectors = _Tally("single_photon_vs_svd", 1e-11)
    for t in transitions_up_to(j_max_2):
        for key in enumerate_block_keys(t, 1):
            closed = np.array(single_photon_xi(t, key.l))
            values.add(float(np.max(np.abs(closed - np.array(f_pair(t, key.l))))))
            ref = analytic_eigensystem(AnalyticCase(t, "single_photon", 1, key.l))
            vectors.add(max(compare_eigensystems(ref, block_eigensystem(t, 1, key.l)).values()))
    return [values.result(), vectors.result()]


def _dmatrix_suite(j_max_2: int, n_max: int) -> SuiteResult:
    tally = _Tally("D_matrix_vs_svd", 1e-12)
    for t in transitions_up_to(min(j_max_2, 6)):
        for n in range(1, min(n_max, 6) + 1):
            for key in enumerate_block_keys(t, n):
                es = block_eigensystem(t, n, key.l)
                for a, v, d in ((0, es.v0, es.d0), (1, es.v1, es.d1)):
                    mat = dense_D(t, a, n, key.l)
                    if not mat.size:
                        continue
                    recon = (v * es.xi**2) @ v.conj().T
                    tally.add(float(np.max(np.abs(mat - recon))))
    return tally.result()


def _expm_suite(j_max_2: int) -> SuiteResult:
    tally = _Tally("S_vs_expm", 1e-10)
    rng = np.random.default_rng(20240101)
    for t in transitions_up_to(min(j_max_2, 6)):
        for n in (1, 2, 3):
            for key in enumerate_block_keys(t, n):
                delta = rng.uniform(-1, 1)
                time = rng.uniform(0, 20)
                ham = dense_hamiltonian(t, n, key.l, delta, 1.0)
                ref = expm(0.5j * time * ham)
                s = block_S(t, n, key.l, EvolutionParams(delta, 1.0, time))
                tally.add(float(np.max(np.abs(ref - s))))
    return tally.result()


def _dims_suite(j_max_2: int) -> SuiteResult:
    tally = _Tally("dimension_completeness", 0.0)
    for ja_2 in range(j_max_2 + 1):
        for n in range(9):
            total = sum(d for _, d in dims_profile(HalfInt(ja_2), n))
            tally.add(float(abs(total - (ja_2 + 1) * (n + 1))))
    return tally.result()


def run_suites(n_max: int = 12, j_max_2: int = 8) -> list[SuiteResult]:
    """Run every oracle comparison; ``j_max_2`` is twice the largest angular momentum."""
    return [
        _threej_suite(j_max_2),
        _sum_rule_suite(j_max_2),
        _dims_suite(j_max_2),
        _families_suite(n_max),
        *_single_photon_suites(j_max_2),
        _dmatrix_suite(j_max_2, n_max),
        _expm_suite(j_max_2),
    ]
