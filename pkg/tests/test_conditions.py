"""Residue-level degeneration detectors and the reducibility predictor."""

import json
import math

import numpy as np
import pytest

from conftest import random_connection
from fuchsia_heun.conditions import (
    analyze_connection,
    check_lr,
    check_was,
    check_wgrm,
    integer_hyperplanes,
    predict_reducible,
)
from fuchsia_heun.connection import (
    INFINITY,
    FuchsianConnection,
    HeunParameters,
    hypergeometric_system,
    kummer_twist,
    mobius_pushforward,
)
from fuchsia_heun.numkit import PreconditionError


def _c3(A0, A1, Aa, points=(0.0, 1.0, 3.0)):
    return FuchsianConnection(list(points),
                              [np.array(A, dtype=complex) for A in (A0, A1, Aa)])


# -------------------------------------------------------------------- was

def test_was_integer_pair():
    c = _c3([[0.0, 1.0], [0.0, 3.0]], np.diag([0.3, 0.8]), np.diag([0.2, 0.5]))
    assert check_was(c, 0.0) == 3


def test_was_negative_integer():
    c = _c3([[-2.0, 0.0], [1.0, 0.0]], np.diag([0.3, 0.8]), np.diag([0.2, 0.5]))
    assert check_was(c, 0.0) == -2


def test_was_non_integer_partner():
    c = _c3([[0.0, 1.0], [0.0, 2.5]], np.diag([0.3, 0.8]), np.diag([0.2, 0.5]))
    assert check_was(c, 0.0) is None


def test_was_no_zero_eigenvalue():
    c = _c3(np.diag([0.4, 1.7]), np.diag([0.3, 0.8]), np.diag([0.2, 0.5]))
    assert check_was(c, 0.0) is None


def test_was_zero_residue_is_not_a_hit():
    c = _c3(np.zeros((2, 2)), np.diag([0.3, 0.8]), np.diag([0.2, 0.5]))
    assert check_was(c, 0.0) is None


def test_was_at_infinity():
    c = _c3(np.diag([0.3, 0.9]), np.diag([-0.3, 1.1]), np.diag([0.45, 0.7]))
    # A_inf = -diag(0.45, 2.7): no zero eigenvalue
    assert check_was(c, INFINITY) is None
    # zero third residue makes A_inf = diag(0, -2)
    cb = _c3(np.diag([0.3, 0.9]), np.diag([-0.3, 1.1]), np.zeros((2, 2)))
    assert check_was(cb, INFINITY) == -2


# --------------------------------------------------------------------- lr

def test_lr_from_hypergeometric_alpha():
    c = hypergeometric_system(-3.0, 0.45, 1.2, 1.35)
    assert check_lr(c) == 3


def test_lr_zero_eigenvalue():
    c = _c3(np.diag([0.3, 0.9]), np.diag([-0.3, 1.1]), np.diag([0.0, 0.7]))
    # infinity eigenvalues {0, -2.7}: 0 = -0 wins as the smallest n
    assert check_lr(c) == 0


def test_lr_none_for_non_integers():
    c = _c3(np.diag([-0.5, 1.0]), np.diag([-0.6, 1.0 + math.pi - 1.0]),
            np.diag([-0.4, 1.0]))
    # infinity eigenvalues {1.5, -pi}
    assert check_lr(c) is None


def test_lr_picks_smallest():
    c = _c3(np.diag([0.5, 1.0]), np.diag([0.5, 1.0]), np.diag([1.0, 2.0]))
    # infinity eigenvalues {-2, -4}: both integers, smallest n reported
    assert check_lr(c) == 2


# ------------------------------------------------------------------- wgrm

def test_wgrm_diagonal_pair():
    c = _c3(np.diag([0.3, 0.8]), np.diag([0.1, 0.9]), np.diag([0.2, 0.5]))
    assert check_wgrm(c, 0.0, 1.0)
    assert check_wgrm(c, 0.0, INFINITY)


def test_wgrm_noncommuting_pair():
    c = _c3([[0.0, 1.0], [0.0, 3.0]], [[0.5, 0.0], [1.0, 0.0]],
            np.diag([0.2, 0.5]))
    assert not check_wgrm(c, 0.0, 1.0)


def test_wgrm_conjugation_invariant():
    P = np.array([[1.0, 2.0], [0.5, 3.0]])
    Pi = np.linalg.inv(P)
    c = _c3(P @ np.diag([0.3, 0.8]) @ Pi, P @ np.diag([0.1, 0.9]) @ Pi,
            np.diag([0.2, 0.5]))
    assert check_wgrm(c, 0.0, 1.0)
    assert not check_wgrm(c, 0.0, 3.0)


# ------------------------------------------------- reducibility prediction

def test_predict_reducible_on_constructed_witness():
    s = 0.7
    c = _c3([[0.3, s], [0.0, 0.45]], [[0.2, -s], [0.0, 0.6]],
            np.diag([0.15, 0.8]), points=(0.0, 1.0, 2.0))
    w = predict_reducible(c)
    assert w is not None
    assert w.total == 0
    assert w.pair == (2.0, INFINITY)
    assert len(w.selection) == 4
    total = sum(v for _, v in w.selection)
    assert abs(total - w.total) < 1e-8
    # deterministic serialization
    assert w.to_json() == w.to_json()
    payload = json.loads(w.to_json())
    assert payload["pair"] == [[2.0, 0.0], "inf"]


def test_predict_reducible_generic_is_none():
    rng = np.random.default_rng(47)
    for _ in range(5):
        c = random_connection(rng)
        assert predict_reducible(c) is None


def test_predict_reducible_integer_total_without_commuting_pair():
    c = _c3([[0.0, 1.0], [0.0, 1.0]], [[0.4, -0.7], [0.0, 0.6]],
            np.diag([0.6, 0.4]))
    assert predict_reducible(c) is None


def test_predict_reducible_needs_three_points():
    c = hypergeometric_system(-3.0, 0.45, 1.2, 1.35)
    with pytest.raises(PreconditionError):
        predict_reducible(c)


# ------------------------------------------------------------ hyperplanes

def test_hyperplanes_epsilon():
    h = HeunParameters(a=3.0, q=0.1, alpha=-0.6, beta=-1.7, gamma=0.3,
                       delta=0.4, epsilon=-2.0)
    assert integer_hyperplanes(h) == {"epsilon": -2}


def test_hyperplanes_alpha_minus_beta():
    h = HeunParameters(a=2.0, q=0.0, alpha=0.7, beta=-1.3, gamma=0.3,
                       delta=0.5, epsilon=-0.4)
    assert integer_hyperplanes(h) == {"alpha_minus_beta": 2}


def test_hyperplanes_zero_values_excluded():
    h = HeunParameters(a=2.0, q=0.0, alpha=0.2, beta=0.1, gamma=0.55,
                       delta=0.75, epsilon=0.0)
    assert integer_hyperplanes(h) == {}


# ---------------------------------------------------------------- analyzer

def test_analyze_connection_report():
    c = _c3(np.zeros((2, 2)), [[0.0, 1.0], [0.0, 2.0]], np.diag([0.3, 0.7]))
    rep = analyze_connection(c)
    assert rep.removable == (0.0,)
    assert rep.was == ((1.0, 2),)
    assert rep.lr is None
    assert rep.wgrm == (0.0, 1.0)       # zero residue commutes with anything
    assert rep.hyperplanes == {}


def test_analyze_connection_with_parameters():
    c = _c3(np.diag([0.3, 0.8]), np.diag([0.1, 0.9]), np.diag([0.2, 0.5]))
    h = HeunParameters(a=3.0, q=0.1, alpha=-0.6, beta=-1.7, gamma=0.3,
                       delta=0.4, epsilon=-2.0)
    rep = analyze_connection(c, h)
    assert rep.hyperplanes == {"epsilon": -2}


def test_report_json_shape():
    c = _c3(np.zeros((2, 2)), [[0.0, 1.0], [0.0, 2.0]], np.diag([0.3, 0.7]))
    rep = analyze_connection(c)
    payload = json.loads(rep.to_json())
    assert payload["removable"] == [[0.0, 0.0]]
    assert payload["was"] == [[[1.0, 0.0], 2]]
    assert payload["lr"] is None
    assert rep.to_json() == analyze_connection(c).to_json()


# ------------------------------------------------- invariance of verdicts

def test_was_stable_under_relabeling():
    c = _c3(np.diag([0.3, 0.8]), np.diag([0.1, 0.9]),
            [[0.0, 1.0], [0.0, 2.0]])
    assert check_was(c, 3.0) == 2
    shift = np.array([[1.0, 1.0], [0.0, 1.0]])     # z -> z + 1
    t = mobius_pushforward(c, shift)
    assert check_was(t, 4.0) == 2


def test_was_stable_under_twist_elsewhere():
    c = _c3(np.diag([0.3, 0.8]), np.diag([0.1, 0.9]),
            [[0.0, 1.0], [0.0, 2.0]])
    t = kummer_twist(c, 1.0, 0.5)
    assert check_was(t, 3.0) == 2
    # twisting at the point itself destroys the {0, m} pattern
    t2 = kummer_twist(c, 3.0, 0.5)
    assert check_was(t2, 3.0) is None
