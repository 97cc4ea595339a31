import json

import numpy as np
import pytest

from qsd.errors import ProblemFormatError
from qsd.model import Povm
from qsd.problemfile import load_problem, parse_problem, problem_to_json


def test_round_trip(tmp_path, zero_plus):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(problem_to_json(zero_plus)))
    e, povm = load_problem(path)
    assert povm is None
    np.testing.assert_array_equal(e.states, zero_plus.states)
    np.testing.assert_array_equal(e.priors, zero_plus.priors)


def test_povm_entry(orthogonal):
    doc = problem_to_json(orthogonal, Povm([np.diag([1, 0]), np.diag([0, 1])]))
    _, povm = parse_problem(doc, require_povm=True)
    np.testing.assert_array_equal(povm.weights(), [1, 1])


def test_rejects_non_hermitian(orthogonal):
    doc = problem_to_json(orthogonal)
    doc["states"][0]["matrix"][0][1] = [0.1, 0.0]
    with pytest.raises(ProblemFormatError) as err:
        parse_problem(doc)
    assert err.value.path == "states[0].matrix"


def test_tiny_asymmetry_accepted(orthogonal):
    doc = problem_to_json(orthogonal)
    doc["states"][1]["matrix"][0][1] = [1e-10, 0.0]
    e, _ = parse_problem(doc)
    assert e.states[1][0, 1] == e.states[1][1, 0]


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d.update(dim=0), "dim"),
        (lambda d: d.update(states=[]), "states"),
        (lambda d: d["states"][1].update(prior="x"), "states[1].prior"),
        (lambda d: d["states"][0]["matrix"].pop(), "states[0].matrix"),
        (lambda d: d["states"][0]["matrix"][1].__setitem__(0, [1]), "states[0].matrix[1][0]"),
        (lambda d: d["states"][0].update(prior=0.9), "states"),
        (lambda d: d.update(povm=[[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]), "povm"),
    ],
)
def test_error_paths(orthogonal, mutate, path):
    doc = problem_to_json(orthogonal)
    mutate(doc)
    with pytest.raises(ProblemFormatError) as err:
        parse_problem(doc)
    assert err.value.path == path


def test_missing_povm_when_required(orthogonal):
    with pytest.raises(ProblemFormatError):
        parse_problem(problem_to_json(orthogonal), require_povm=True)


def test_unreadable(tmp_path):
    with pytest.raises(ProblemFormatError):
        load_problem(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ProblemFormatError):
        load_problem(bad)
