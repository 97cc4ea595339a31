import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsd.errors import IoFailure
from qsd.model import Ensemble, Povm, success_probability
from qsd.oracles import random_povms
from qsd.sdp import (
    block_diag,
    build_dual_sdp,
    constraint_values,
    dual_objective,
    export_sdpa,
    operator_basis,
    primal_objective,
    read_sdpa,
    read_sdpa_blocks,
    real_embedding,
)
from qsd.solver import solve

from .conftest import SX, SY, SZ, random_hermitian, random_qubit_ensemble, trine_ensemble

OPT = Povm([np.diag([1.0, 0]), np.diag([0, 1.0])])


def test_qubit_basis_is_pauli():
    b = operator_basis(2)
    expected = np.array([np.eye(2), SX, SY, SZ]) / math.sqrt(2)
    np.testing.assert_allclose(b.gammas, expected, atol=1e-16)
    np.testing.assert_allclose(b.gram(), np.eye(4), atol=1e-15)


@pytest.mark.parametrize("p", [1, 3, 4, 5])
def test_basis_orthonormal(p):
    b = operator_basis(p)
    assert b.gammas.shape == (p * p, p, p)
    np.testing.assert_allclose(b.gram(), np.eye(p * p), atol=1e-12)
    np.testing.assert_allclose(b.gammas[0], np.eye(p) / math.sqrt(p))
    np.testing.assert_allclose(b.gammas, b.gammas.conj().swapaxes(1, 2))
    np.testing.assert_allclose(np.trace(b.gammas[1:], axis1=1, axis2=2), 0, atol=1e-15)


def test_dual_sdp_orthogonal(orthogonal):
    prob = build_dual_sdp(orthogonal)
    assert dual_objective(prob, OPT) == 1.0
    vals = constraint_values(prob, OPT)
    assert vals[0] == pytest.approx(math.sqrt(2), abs=1e-15)
    np.testing.assert_allclose(vals[1:], 0, atol=1e-10)
    np.testing.assert_allclose(prob.c, [math.sqrt(2), 0, 0, 0], atol=1e-15)


def test_primal_objective(orthogonal):
    pt = primal_objective(orthogonal, np.eye(2) / 2)
    np.testing.assert_allclose(pt.x, [math.sqrt(2) / 2, 0, 0, 0], atol=1e-15)
    assert pt.value == pytest.approx(1.0, abs=1e-15)
    assert pt.min_eigenvalue == pytest.approx(0.0, abs=1e-15)
    pt0 = primal_objective(orthogonal, np.zeros((2, 2)))
    assert pt0.value == 0 and pt0.min_eigenvalue < 0


def test_primal_value_is_certificate_bound(rng):
    from qsd.certificate import certify

    for _ in range(10):
        e = random_qubit_ensemble(rng, 3)
        r = solve(e)
        pt = primal_objective(e, r.lagrange_operator)
        assert pt.value == pytest.approx(np.trace(r.lagrange_operator).real, abs=1e-14)
        cert = certify(e, r.povm)
        if cert.shift == 0:
            assert pt.value == pytest.approx(cert.upper_bound, abs=1e-10)
            assert pt.min_eigenvalue >= -1e-10


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), size=st.integers(1, 4), p=st.sampled_from([2, 3]))
def test_objective_and_constraint_equivalence(seed, size, p):
    rng = np.random.default_rng(seed)
    from .conftest import random_density

    e = Ensemble([random_density(rng, p) for _ in range(size)], rng.dirichlet(np.ones(size)))
    prob = build_dual_sdp(e)
    m = Povm(random_povms(rng, 1, size, p)[0])
    assert abs(dual_objective(prob, m) - success_probability(e, m)) <= 1e-10
    assert np.abs(constraint_values(prob, m) - prob.c).max() <= 1e-10
    # a completeness violation must break some constraint
    bad = Povm(m.elements + np.eye(p)[None] * np.eye(size)[0][:, None, None] * 1e-3)
    assert np.abs(constraint_values(prob, bad) - prob.c).max() > 1e-6


def test_dense_block_form_matches(rng):
    e = random_qubit_ensemble(rng, 3)
    prob = build_dual_sdp(e)
    m = Povm(random_povms(rng, 1, 3, 2)[0])
    z = block_diag(m.elements)
    assert -np.trace(block_diag(prob.f0) @ z).real == pytest.approx(success_probability(e, m), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.sampled_from([2, 3, 4]))
def test_real_embedding_spectrum(seed, p):
    a = random_hermitian(np.random.default_rng(seed), p)
    w = np.linalg.eigvalsh(a)
    np.testing.assert_allclose(np.linalg.eigvalsh(real_embedding(a)), np.repeat(w, 2), atol=1e-12)


def test_export_header(tmp_path, orthogonal):
    path = export_sdpa(build_dual_sdp(orthogonal), tmp_path / "o.dat-s")
    lines = path.read_text().split("\n")
    assert lines[0] == "4 = mDIM"
    assert lines[1] == "2 = nBLOCK"
    assert lines[2] == "4 4"
    assert "\r" not in path.read_text()


def test_export_scenario_shape(tmp_path):
    from qsd.scenarios import CoplanarScenario, coplanar_three_states

    e = coplanar_three_states(CoplanarScenario(math.pi / 16, 0.5))
    lines = export_sdpa(build_dual_sdp(e), tmp_path / "s.dat-s").read_text().split("\n")
    assert lines[:3] == ["4 = mDIM", "3 = nBLOCK", "4 4 4"]


def test_round_trip_exact(tmp_path, rng):
    for e in (random_qubit_ensemble(rng, 3), trine_ensemble()):
        prob = build_dual_sdp(e)
        back = read_sdpa(export_sdpa(prob, tmp_path / "r.dat-s"))
        assert np.array_equal(back.f0, prob.f0)
        assert np.array_equal(back.fs, prob.fs)
        assert np.array_equal(back.c, prob.c)


def test_export_byte_stable(tmp_path, rng):
    e = random_qubit_ensemble(rng, 2)
    a = export_sdpa(build_dual_sdp(e), tmp_path / "a").read_bytes()
    b = export_sdpa(build_dual_sdp(e), tmp_path / "b").read_bytes()
    assert a == b


def test_export_io_failure(tmp_path, orthogonal):
    with pytest.raises(IoFailure):
        export_sdpa(build_dual_sdp(orthogonal), tmp_path / "missing" / "x.dat-s")


def _solve_sdpa_externally(path):
    cp = pytest.importorskip("cvxpy")
    c, sizes, mats = read_sdpa_blocks(path)
    ys = [cp.Variable((s, s), symmetric=True) for s in sizes]
    cons = [y >> 0 for y in ys]
    for i in range(1, len(c) + 1):
        cons.append(sum(cp.trace(mats[i][b] @ ys[b]) for b in range(len(sizes))) == c[i - 1])
    obj = cp.Maximize(sum(cp.trace(mats[0][b] @ ys[b]) for b in range(len(sizes))))
    prob = cp.Problem(obj, cons)
    prob.solve(solver="CLARABEL")
    return prob.value


def test_external_solver_on_export(tmp_path, orthogonal):
    path = export_sdpa(build_dual_sdp(orthogonal), tmp_path / "o.dat-s")
    assert _solve_sdpa_externally(path) == pytest.approx(1.0, abs=1e-6)


def test_external_solver_matches_iteration(tmp_path, rng):
    for e in (trine_ensemble(), random_qubit_ensemble(rng, 3)):
        path = export_sdpa(build_dual_sdp(e), tmp_path / "e.dat-s")
        assert _solve_sdpa_externally(path) == pytest.approx(solve(e).success_probability, abs=1e-6)
