"""Acceptance gate: nine end-to-end criteria at their stated tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line to the terminal (outside
pytest's capture) before asserting, so ``pytest -v`` output doubles as the
acceptance report.
"""

import json
import math
import time

import numpy as np
import pytest

from qsd.certificate import certify
from qsd.hermitian import eig_hermitian, pinv_psd, sqrt_psd
from qsd.model import Ensemble, Povm, pure_state, success_probability
from qsd.oracles import projective_oracle_qubit, random_povm_search, random_povms, simulate_game
from qsd.scenarios import (
    SWEEP_CONFIG,
    coplanar_three_states,
    CoplanarScenario,
    default_grid,
    find_threshold_numeric,
    region_sequence,
    solve_point,
    state_convention_residual,
    sweep_xi,
    threshold_xi_23,
)
from qsd.sdp import build_dual_sdp, constraint_values, dual_objective, export_sdpa, read_sdpa
from qsd.solver import SolverConfig, solve

from .conftest import HELSTROM_ZERO_PLUS, random_density, random_psd, random_qubit_ensemble, trine_ensemble

PHI = math.pi / 16


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_orthogonal(verdict):
    e = Ensemble([pure_state([1, 0]), pure_state([0, 1])], [0.5, 0.5])
    t0 = time.perf_counter()
    r = solve(e)
    elapsed = time.perf_counter() - t0
    cert = certify(e, r.povm)
    ok = abs(r.success_probability - 1) <= 1e-9 and cert.gap <= 1e-10 and r.iterations_used <= 10 and elapsed < 0.1
    verdict(1, ok, f"P_s={r.success_probability:.12f} gap={cert.gap:.1e} iterations={r.iterations_used} time={elapsed * 1e3:.2f}ms")


def test_criterion_2_zero_plus(verdict):
    e = Ensemble([pure_state([1, 0]), pure_state([1, 1])], [0.5, 0.5])
    r = solve(e)
    grid = projective_oracle_qubit(e, 400).best_value
    ok = abs(r.success_probability - 0.853553) <= 1e-6 and abs(grid - r.success_probability) <= 1e-4
    verdict(2, ok, f"P_s={r.success_probability:.9f} (Helstrom {HELSTROM_ZERO_PLUS:.9f}) grid400={grid:.9f}")


def test_criterion_3_trine(verdict):
    e = trine_ensemble()
    r = solve(e)
    cert = certify(e, r.povm)
    ok = abs(r.success_probability - 2 / 3) <= 1e-6 and cert.gap <= 1e-7
    verdict(3, ok, f"P_s={r.success_probability:.9f} gap={cert.gap:.1e}")


def test_criterion_4_scenario(verdict):
    boundary = find_threshold_numeric(PHI, ("II", "III"))
    err_one = solve_point(PHI, 1.0)[0].error_rate
    err_zero = solve_point(PHI, 0.0)[0].error_rate
    t0 = time.perf_counter()
    points = sweep_xi(PHI, default_grid(201))
    elapsed = time.perf_counter() - t0
    seq = region_sequence(points)
    residual = state_convention_residual(PHI)
    checks = {
        "a": abs(boundary - 0.839390) <= 1e-3 and abs(threshold_xi_23(PHI) - 0.839390) <= 1e-6,
        "b": abs(err_one - 0.308658) <= 1e-6 and abs(err_one - (1 - math.sin(math.pi / 8)) / 2) <= 1e-6,
        "c": err_zero <= 1e-9,
        "d": seq == [("I", 2), ("II", 3), ("III", 2)],
        "e": abs(residual) <= 1e-8,
        "time": elapsed < 30,
    }
    detail = (
        f"boundary={boundary:.6f} err(1)={err_one:.9f} err(0)={err_zero:.1e} "
        f"sequence={'->'.join(f'{r}:{n}' for r, n in seq)} residual={residual:.1e} "
        f"sweep201={elapsed:.2f}s failed={[k for k, v in checks.items() if not v]}"
    )
    verdict(4, all(checks.values()), detail)


def test_criterion_5_few_iterations(verdict):
    worst, worst_xi = 0.0, None
    for xi in default_grid(201):
        _, report = solve_point(PHI, float(xi), SWEEP_CONFIG)
        trace = report.trace
        if not trace:
            continue
        early = trace[min(50, len(trace)) - 1]
        dev = abs(early - report.success_probability)
        if dev > worst:
            worst, worst_xi = dev, float(xi)
    verdict(5, worst <= 1e-3, f"max |P_s(50) - P_s(final)| = {worst:.2e} (at xi={worst_xi})")


def test_criterion_6_oracle_sandwich(verdict):
    rng = np.random.default_rng(6)
    below, above, negative = 0, 0, 0
    worst_residual = np.inf
    for i in range(200):
        e = random_qubit_ensemble(rng, int(rng.integers(2, 4)))
        r = solve(e)
        cert = certify(e, r.povm)
        lower = random_povm_search(e, 2000, seed=[6, i]).best_value
        below += lower > r.success_probability + 1e-6
        above += r.success_probability > cert.upper_bound + 1e-9
        if cert.certifies():
            worst_residual = min(worst_residual, min(cert.helstrom_residuals))
            negative += min(cert.helstrom_residuals) < -1e-8
        else:
            negative += 1
    ok = below == 0 and above == 0 and negative == 0
    verdict(6, ok, f"200 ensembles: lower>P_s {below}, P_s>bound {above}, residual violations {negative}, min residual {worst_residual:.1e}")


def test_criterion_7_sdp_equivalence(verdict, tmp_path):
    rng = np.random.default_rng(7)
    obj_err, con_err, mismatched = 0.0, 0.0, 0
    for i in range(50):
        p, size = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        e = Ensemble([random_density(rng, p) for _ in range(size)], rng.dirichlet(np.ones(size)))
        m = Povm(random_povms(rng, 1, size, p)[0])
        prob = build_dual_sdp(e)
        obj_err = max(obj_err, abs(dual_objective(prob, m) - success_probability(e, m)))
        con_err = max(con_err, np.abs(constraint_values(prob, m) - prob.c).max())
        back = read_sdpa(export_sdpa(prob, tmp_path / f"p{i}.dat-s"))
        same = np.array_equal(back.f0, prob.f0) and np.array_equal(back.fs, prob.fs) and np.array_equal(back.c, prob.c)
        mismatched += not same
    ok = obj_err <= 1e-10 and con_err <= 1e-10 and mismatched == 0
    verdict(7, ok, f"objective err {obj_err:.1e}, constraint err {con_err:.1e}, round-trip mismatches {mismatched}/50")


def test_criterion_8_monte_carlo(verdict):
    e = Ensemble([pure_state([1, 0]), pure_state([1, 1])], [0.5, 0.5])
    m = solve(e).povm
    first = simulate_game(e, m, 1_000_000, seed=2024)
    again = simulate_game(e, m, 1_000_000, seed=2024)
    sigma = math.sqrt(0.853553 * (1 - 0.853553) / first.trials)
    z = abs(first.empirical_rate - 0.853553) / sigma
    identical = json.dumps(first.to_dict()) == json.dumps(again.to_dict())
    verdict(8, z <= 5 and identical, f"rate={first.empirical_rate:.6f} z={z:.2f} reproducible={identical}")


def test_criterion_9_linear_algebra(verdict):
    rng = np.random.default_rng(9)
    failures = []
    for i in range(1000):
        p = int(rng.integers(2, 5))
        a = random_psd(rng, p, int(rng.integers(1, p + 1)))
        norm = np.linalg.norm(a, 2)
        w, v = eig_hermitian(a)
        eig_ok = np.abs(v @ np.diag(w) @ v.conj().T - a).max() <= 1e-10 * max(1.0, norm)
        eig_ok &= np.abs(v.conj().T @ v - np.eye(p)).max() <= 1e-10
        s = sqrt_psd(a)
        sqrt_ok = np.abs(s @ s - a).max() <= 1e-9 * max(1.0, norm)
        x = pinv_psd(a)
        xn = max(1.0, np.linalg.norm(x, 2))
        pinv_ok = (
            np.abs(a @ x @ a - a).max() <= 1e-9 * max(1.0, norm)
            and np.abs(x @ a @ x - x).max() <= 1e-9 * xn
            and np.abs((a @ x).conj().T - a @ x).max() <= 1e-9
            and np.abs((x @ a).conj().T - x @ a).max() <= 1e-9
        )
        if not (eig_ok and sqrt_ok and pinv_ok):
            failures.append(i)
    verdict(9, not failures, f"1000 random PSD matrices, contract failures {len(failures)}")
