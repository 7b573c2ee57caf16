import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocobench.geometry import (
    INF,
    best_in_hindsight,
    box,
    conjugate_exponent,
    dual_attainment,
    dual_norm,
    lp_ball,
    lp_norm,
    norm_from_config,
    norm_to_config,
    qhull,
    resolve_dimension,
    set_from_config,
    set_to_config,
    support_value,
    weighted_lr_ball,
    weighted_lr_norm,
)


def test_conjugate_exponent_table():
    assert conjugate_exponent(1.0) == INF
    assert conjugate_exponent(INF) == 1.0
    assert conjugate_exponent(2.0) == 2.0
    assert abs(conjugate_exponent(1.5) - 3.0) < 1e-15
    assert abs(conjugate_exponent(4.0) - 4.0 / 3.0) < 1e-15
    with pytest.raises(ValueError):
        conjugate_exponent(0.5)


def test_norm_values():
    x = np.array([3.0, -4.0])
    assert lp_norm(2.0).value(x) == pytest.approx(5.0)
    assert lp_norm(1.0).value(x) == pytest.approx(7.0)
    assert lp_norm(INF).value(x) == pytest.approx(4.0)
    w = np.array([2.0, 0.5])
    assert weighted_lr_norm(1.0, w).value(x) == pytest.approx(8.0)
    assert weighted_lr_norm(INF, w).value(x) == pytest.approx(6.0)


def test_dual_norm_values():
    x = np.array([3.0, -4.0])
    # (l_1.5)* = l_3
    assert dual_norm(lp_norm(1.5), x) == pytest.approx(
        np.sum(np.abs(x) ** 3.0) ** (1.0 / 3.0))
    w = np.array([2.0, 4.0])
    # dual of ||w g||_2 is ||x / w||_2
    assert dual_norm(weighted_lr_norm(2.0, w), x) == pytest.approx(
        np.linalg.norm(x / w))


@given(st.integers(1, 6), st.floats(1.0, 8.0), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=200, deadline=None)
def test_holder_inequality(d, r, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=d)
    y = rng.normal(size=d)
    norm = lp_norm(r)
    lhs = abs(float(x @ y))
    rhs = norm.value(x) * dual_norm(norm, y)
    assert lhs <= rhs * (1.0 + 1e-12) + 1e-12


def test_set_membership():
    s = lp_ball(2.0, 1.0)
    assert s.contains(np.array([0.6, 0.8]))
    assert not s.contains(np.array([0.8, 0.8]))
    b = box(np.array([1.0, 2.0]))
    assert b.contains(np.array([-1.0, 2.0]))
    assert not b.contains(np.array([1.1, 0.0]))
    w = weighted_lr_ball(1.0, np.array([1.0, 2.0]), 1.0)
    assert w.contains(np.array([0.5, 0.25]))
    assert not w.contains(np.array([0.5, 0.3]))


def test_resolve_dimension_conflicts():
    s = box(np.ones(3))
    norm = weighted_lr_norm(2.0, np.ones(3))
    assert resolve_dimension(s, norm) == 3
    with pytest.raises(ValueError):
        resolve_dimension(s, weighted_lr_norm(2.0, np.ones(4)))
    assert resolve_dimension(lp_ball(2.0, 1.0), lp_norm(2.0), d=5) == 5
    with pytest.raises(ValueError):
        resolve_dimension(lp_ball(2.0, 1.0), lp_norm(2.0))


def test_qhull_r_below_two_becomes_l2():
    h = qhull(lp_norm(1.0))
    assert h.exponent == pytest.approx(2.0)
    h2 = qhull(weighted_lr_norm(1.5, np.array([1.0, 3.0])))
    assert h2.exponent == pytest.approx(2.0)
    np.testing.assert_allclose(h2.weights, [1.0, 3.0])
    h3 = qhull(lp_norm(4.0))
    assert h3.exponent == pytest.approx(4.0)


def test_support_value_closed_forms():
    # l4 ball against l2 gradients: 1/t = 1 - 1/2 - 1/4, S = d^{1/4}
    assert support_value(lp_ball(4.0, 1.0), lp_norm(2.0), d=16) == pytest.approx(2.0)
    # unit box against weighted l1 gradients: S = ||a / beta||_2
    beta = np.arange(1.0, 65.0)
    S = support_value(box(np.ones(64)), weighted_lr_norm(1.0, beta))
    assert S == pytest.approx(np.sqrt(np.sum(1.0 / beta ** 2)))
    # l2 ball, l2 gradients: pi = s = 2 collapses to max_j c_j = 1
    assert support_value(lp_ball(2.0, 1.0), lp_norm(2.0), d=9) == pytest.approx(1.0)
    # radius scales linearly
    assert support_value(lp_ball(2.0, 2.5), lp_norm(2.0), d=9) == pytest.approx(2.5)
    # unit box, l2 gradients: 1/t = 1/2, S = sqrt(d)
    assert support_value(box(np.ones(9)), lp_norm(2.0)) == pytest.approx(3.0)


def test_support_value_is_an_upper_bound_on_feasible_products():
    rng = np.random.default_rng(0)
    s = weighted_lr_ball(3.0, np.array([1.0, 0.5, 2.0]), 1.5)
    norm = weighted_lr_norm(2.5, np.array([2.0, 1.0, 0.7]))
    S = support_value(s, norm)
    hull = qhull(norm)
    for _ in range(500):
        theta = rng.normal(size=3) * rng.uniform(0, 2)
        if not s.contains(theta):
            continue
        g = rng.normal(size=3)
        gn = hull.value(g)
        if gn > 1.0:
            g = g / gn
        assert float(theta @ g) <= S + 1e-9


def test_support_value_l1_ball():
    # pi = 1 fallback: S = rho * d^{max(0, 1 - 1/s - 1/pi)}
    # r = inf keeps s = inf: 1 - 0 - 1 = 0 -> S = rho
    assert support_value(lp_ball(1.0, 1.0), lp_norm(INF), d=16) == pytest.approx(1.0)
    # r = 2 keeps s = 2: 1 - 1/2 - 1 < 0 -> clamp to 0 -> S = rho
    assert support_value(lp_ball(1.0, 1.0), lp_norm(2.0), d=16) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        support_value(weighted_lr_ball(1.0, np.array([1.0, 2.0, 3.0, 4.0]), 1.0),
                      lp_norm(2.0))


def test_best_in_hindsight_box_and_balls():
    G = np.array([[1.0, -2.0], [0.5, 1.0]])
    g = G.sum(axis=0)  # (1.5, -1.0)
    theta, val = best_in_hindsight(box(np.array([2.0, 3.0])), g)
    np.testing.assert_allclose(theta, [-2.0, 3.0])
    assert val == pytest.approx(-6.0)

    theta, val = best_in_hindsight(lp_ball(2.0, 2.0), g)
    np.testing.assert_allclose(theta, -2.0 * g / np.linalg.norm(g))
    assert val == pytest.approx(-2.0 * np.linalg.norm(g))

    theta, val = best_in_hindsight(lp_ball(1.0, 1.0), np.array([3.0, -3.0]))
    np.testing.assert_allclose(theta, [-1.0, 0.0])  # lowest index on ties
    assert val == pytest.approx(-3.0)

    theta, val = best_in_hindsight(lp_ball(2.0, 1.0), np.zeros(2))
    np.testing.assert_allclose(theta, 0.0)
    assert val == 0.0


@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1),
       st.sampled_from([1.0, 1.5, 2.0, 3.0, INF]))
@settings(max_examples=150, deadline=None)
def test_best_in_hindsight_dominates_random_feasible_points(d, seed, p):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=d)
    s = lp_ball(p, 1.0)
    theta, val = best_in_hindsight(s, g)
    assert s.contains(theta * (1.0 - 1e-12))
    assert val == pytest.approx(float(theta @ g))
    for _ in range(20):
        x = rng.normal(size=d)
        nx = lp_norm(p).value(x)
        if nx > 1.0:
            x = x / nx
        assert val <= float(x @ g) + 1e-9


def test_best_in_hindsight_weighted():
    w = np.array([2.0, 0.5])
    s = weighted_lr_ball(2.0, w, 1.0)
    g = np.array([1.0, 1.0])
    theta, val = best_in_hindsight(s, g)
    assert s.contains(theta * (1 - 1e-12))
    # substitution y = w * theta reduces to an unweighted l2 ball
    y = -(g / w) / np.linalg.norm(g / w)
    np.testing.assert_allclose(theta, y / w, rtol=1e-12)
    assert val == pytest.approx(-np.linalg.norm(g / w))


def test_dual_attainment_reaches_support_value():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(2, 6))
        beta = rng.uniform(0.5, 2.0, size=d)
        sexp = float(rng.choice([2.0, 3.0, INF]))
        theta = rng.normal(size=d)
        g = dual_attainment(beta, sexp, theta)
        # g lies in {||beta g||_s <= 1} and attains sup <theta, g>
        from ocobench.geometry import _pnorm
        assert _pnorm(beta * g, sexp) <= 1.0 + 1e-9
        attained = float(theta @ g)
        expected = _pnorm(theta / beta, conjugate_exponent(sexp))
        assert attained == pytest.approx(expected, rel=1e-9)


def test_config_roundtrip():
    for s in (lp_ball(2.0, 1.5), box(np.array([1.0, 2.0])),
              weighted_lr_ball(INF, np.array([0.5, 3.0]), 2.0)):
        back = set_from_config(set_to_config(s))
        assert back.kind == s.kind
        assert back.radius == pytest.approx(s.radius)
    for norm in (lp_norm(1.0), lp_norm(INF),
                 weighted_lr_norm(2.5, np.array([1.0, 4.0]))):
        back = norm_from_config(norm_to_config(norm))
        assert back.kind == norm.kind
        assert back.exponent == norm.exponent
    with pytest.raises(ValueError):
        set_from_config({"kind": "mystery"})
    with pytest.raises(ValueError):
        norm_from_config({"exponent": 2.0})
