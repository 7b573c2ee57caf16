import numpy as np
import pytest

from ocobench import stochastic_instances as st
from ocobench.geometry import box, lp_ball, lp_norm


def test_constructor_validation():
    with pytest.raises(ValueError):
        st.sparse_coord(np.array([1.0, 2.0]), 0.3)  # v must be signs
    with pytest.raises(ValueError):
        st.sparse_coord(np.array([1.0, -1.0]), 0.6)  # delta > 1/2
    with pytest.raises(ValueError):
        st.rect_abs(np.array([1.0, -1.0]), np.array([0.2, 0.3]),
                    np.array([1.0, -1.0]))  # negative half width
    with pytest.raises(ValueError):
        st.one_dim(-0.1)
    inst = st.one_dim(0.25)
    assert inst.kind == "one_dim" and inst.d == 1


def test_stream_purity_and_determinism():
    inst = st.sparse_coord(np.array([1.0, -1.0, 1.0, 1.0]), 0.3)
    seq = st.sample_sequence(inst, seed=7, n=50)
    for i in (0, 1, 17, 49):
        np.testing.assert_array_equal(seq[i], st.sample(inst, 7, i))
    # same (seed, i) twice gives the identical draw
    np.testing.assert_array_equal(st.sample(inst, 7, 13), st.sample(inst, 7, 13))
    # different seeds decorrelate
    seq2 = st.sample_sequence(inst, seed=8, n=50)
    assert not np.array_equal(seq, seq2)


def test_sparse_coord_distribution():
    d = 4
    v = np.array([1.0, -1.0, 1.0, -1.0])
    delta = 0.4
    inst = st.sparse_coord(v, delta)
    n = 40000
    X = st.sample_sequence(inst, seed=0, n=n)
    # each draw is a single spiked coordinate
    assert np.all((X != 0).sum(axis=1) == 1)
    counts = (X != 0).sum(axis=0)
    np.testing.assert_allclose(counts / n, 0.25, atol=0.02)
    # per-coordinate sign bias: P(x_j = +v_j) = (1 + delta)/2
    for j in range(d):
        col = X[X[:, j] != 0, j]
        frac_with = np.mean(np.sign(col) == v[j])
        assert frac_with == pytest.approx((1 + delta) / 2.0, abs=0.02)


def test_dense_sign_distribution_and_eta():
    d = 9
    v = np.ones(d)
    inst = st.dense_sign(v, 0.2)
    assert inst.eta == pytest.approx(1.0 / np.sqrt(d))
    X = st.sample_sequence(inst, seed=1, n=20000)
    assert set(np.unique(X)) <= {-1.0, 1.0}
    frac = np.mean(X == 1.0, axis=0)  # biased toward +v = +1
    np.testing.assert_allclose(frac, (1 + 0.2) / 2.0, atol=0.02)


def test_linear_kind_population_identities():
    v = np.array([1.0, -1.0, 1.0])
    delta = 0.3
    inst = st.sparse_coord(v, delta)
    # F(theta) = <mu, theta>; minimum over the unit l2 ball is -||mu||_2
    # coordinate j drawn w.p. 1/d, spike sign biased toward +v_j with mean delta
    mu = (delta / 3.0) * v
    theta = np.array([0.2, -0.1, 0.4])
    assert st.population_value(inst, theta) == pytest.approx(float(mu @ theta))
    assert st.population_min(inst) == pytest.approx(-np.linalg.norm(mu))
    gap = st.population_gap(inst, theta)
    assert gap == pytest.approx(float(mu @ theta) + np.linalg.norm(mu))
    assert gap >= 0.0
    # empirical mean of subgradients matches mu
    X = st.sample_sequence(inst, seed=3, n=60000)
    G = np.stack([st.subgradient(inst, theta, x) for x in X])
    np.testing.assert_allclose(G.mean(axis=0), mu, atol=0.01)


def test_gradient_sequence_only_for_linear_kinds():
    lin = st.dense_sign(np.ones(2), 0.1)
    G = st.gradient_sequence(lin, seed=0, n=10)
    assert G.shape == (10, 2)
    X = st.sample_sequence(lin, seed=0, n=10)
    np.testing.assert_allclose(G, lin.eta * X)
    nonlin = st.rect_abs(np.ones(2), np.array([0.2, 0.2]), np.ones(2))
    with pytest.raises(ValueError):
        st.gradient_sequence(nonlin, seed=0, n=4)


def test_rect_abs_population_and_subgradient():
    d = 3
    v = np.array([1.0, -1.0, 1.0])
    a = np.array([0.5, 1.0, 2.0])
    delta = np.array([0.2, 0.3, 0.1])
    inst = st.rect_abs(v, delta, a)
    # comparator box contains the population minimizer a * v
    assert inst.comparator_set.contains(a * v)
    assert st.population_gap(inst, a * v) == pytest.approx(0.0, abs=1e-12)
    # subgradient is a single-coordinate sign
    x = st.sample(inst, seed=0, i=0)
    g = st.subgradient(inst, np.zeros(d), x)
    assert np.count_nonzero(g) == 1
    # population gap is nonnegative on random feasible points
    rng = np.random.default_rng(4)
    for _ in range(50):
        theta = rng.uniform(-1, 1, size=d) * a
        assert st.population_gap(inst, theta) >= -1e-12


def test_assouad_constants_identities():
    rng = np.random.default_rng(5)
    d = 6
    for _ in range(20):
        v = np.where(rng.random(d) < 0.5, 1.0, -1.0)
        a = rng.uniform(0.5, 2.0, size=d)
        delta = rng.uniform(0.05, 0.45, size=d)
        inst = st.rect_abs(v, delta, a)
        tau = st.assouad_constants(inst)
        assert np.all(tau > 0)
        # vertex identity: gap(a * s) = 2 sum_{j: s_j != v_j} tau_j
        s = np.where(rng.random(d) < 0.5, 1.0, -1.0)
        gap = st.population_gap(inst, a * s)
        assert gap == pytest.approx(2.0 * tau[s != v].sum(), abs=1e-12)
        # interior separation: gap >= sum tau_j 1{sign != v_j}
        theta = rng.uniform(-1, 1, size=d) * a
        lower = tau[np.sign(theta) != v].sum()
        assert st.population_gap(inst, theta) >= lower - 1e-12
    with pytest.raises(ValueError):
        st.assouad_constants(st.one_dim(0.2))


def test_one_dim_population():
    inst = st.one_dim(0.25)
    # F(theta) = E|theta - x| with P(x = +1) = (1+delta)/2
    # minimum at theta = +1: F(+1) = (1-delta)/2 * 2 = 1 - delta
    assert st.population_min(inst) == pytest.approx(0.75)
    assert st.population_gap(inst, np.array([1.0])) == pytest.approx(0.0, abs=1e-12)
    assert st.population_gap(inst, np.array([-1.0])) == pytest.approx(0.5)
    g = st.subgradient(inst, np.array([0.5]), np.array([-1.0]))
    assert g[0] == 1.0


def test_calibrated_delta():
    p = np.array([0.5, 0.25, 0.25])
    n = 64
    out = st.calibrated_delta(p, n)
    expected = np.minimum(0.5, 1.0 / (2.0 * np.sqrt(n * p * np.log(3.0))))
    np.testing.assert_allclose(out, expected)


def test_custom_gamma_and_comparator():
    v = np.array([1.0, -1.0])
    gamma = lp_norm(2.0)
    comp = lp_ball(2.0, 2.0)
    inst = st.sparse_coord(v, 0.2, gamma, comp)
    assert inst.comparator_set.radius == 2.0
    # infeasible: gamma(e_j) > 1 would put subgradients outside the unit ball
    from ocobench.geometry import weighted_lr_norm
    with pytest.raises(ValueError):
        st.sparse_coord(v, 0.2, weighted_lr_norm(2.0, np.array([10.0, 10.0])))


def test_population_gap_rows_matches_scalar():
    inst = st.dense_sign(np.ones(3), 0.15)
    rng = np.random.default_rng(6)
    T = rng.normal(size=(20, 3)) * 0.4
    rows = st.population_gap_rows(inst, T)
    for i in range(20):
        assert rows[i] == pytest.approx(st.population_gap(inst, T[i]))
