import numpy as np
import pytest

from ocobench import mirror_maps as mm
from ocobench import optimizers as opt
from ocobench.geometry import box, lp_ball, lp_norm, weighted_lr_ball


def random_G(n=40, d=5, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, d)) * scale


def test_ogd_manual_two_steps():
    G = np.array([[1.0, 0.0], [0.0, 2.0]])
    spec = opt.OGD(0.5)
    res = opt.run(spec, G)
    # theta_1 = 0, theta_2 = -0.5 g_1
    assert res.dots[0] == pytest.approx(0.0)
    assert res.dots[1] == pytest.approx(float(G[1] @ (-0.5 * G[0])))
    np.testing.assert_allclose(res.theta_final, -0.5 * (G[0] + G[1]))


def test_play_then_observe_first_dot_zero():
    G = random_G()
    for spec in (opt.OGD(0.3), opt.DiagScaled(np.ones(5)),
                 opt.AdaGradDiag(), opt.PNormMD(1.5, 0.2),
                 opt.DualAveraging(mm.PNorm(1.5), 0.2)):
        res = opt.run(spec, G)
        assert res.dots[0] == pytest.approx(0.0)


def test_zero_gradients_zero_regret():
    G = np.zeros((30, 4))
    comp = lp_ball(2.0, 1.0)
    for spec in (opt.OGD(0.3), opt.DiagScaled(np.full(4, 2.0)),
                 opt.FullEuclidean(np.eye(4), 0.5), opt.AdaGradDiag(),
                 opt.PNormMD(1.5, 0.2), opt.DualAveraging(mm.PNorm(1.5), 0.2)):
        curve = opt.regret_curve(spec, G, comp)
        np.testing.assert_allclose(curve, 0.0, atol=1e-15)


def test_dual_averaging_equals_ogd_unconstrained():
    G = random_G(seed=5)
    alpha = 0.17
    r1 = opt.run(opt.OGD(alpha), G)
    r2 = opt.run(opt.DualAveraging(mm.Euclidean(np.ones(5)), alpha), G)
    np.testing.assert_allclose(r1.dots, r2.dots, atol=1e-12)
    np.testing.assert_allclose(r1.theta_final, r2.theta_final, atol=1e-12)


def test_diag_scaled_equals_ogd_when_lam_is_inverse_alpha():
    G = random_G(seed=6)
    r1 = opt.run(opt.OGD(0.25), G)
    r2 = opt.run(opt.DiagScaled(np.full(5, 4.0)), G)
    np.testing.assert_allclose(r1.dots, r2.dots, atol=1e-14)


def test_full_euclidean_identity_matches_ogd():
    G = random_G(seed=7)
    r1 = opt.run(opt.OGD(0.3), G)
    r2 = opt.run(opt.FullEuclidean(np.eye(5), 0.3), G)
    np.testing.assert_allclose(r1.dots, r2.dots, atol=1e-12)


def test_pnorm_md_a2_equals_ogd():
    G = random_G(seed=8)
    r1 = opt.run(opt.OGD(0.1), G)
    r2 = opt.run(opt.PNormMD(2.0, 0.1), G)
    np.testing.assert_allclose(r1.dots, r2.dots, atol=1e-12)


def test_step_matches_batch_run():
    G = random_G(n=25, seed=9)
    for spec in (opt.OGD(0.2, projection=lp_ball(2.0, 1.0)),
                 opt.AdaGradDiag(projection=box(np.ones(5))),
                 opt.PNormMD(1.4, 0.15),
                 opt.DualAveraging(mm.PNorm(1.7), 0.1)):
        res = opt.run(spec, G)
        state = opt.init_state(spec, 5)
        dots = []
        for g in G:
            dots.append(float(g @ state.theta))
            state = opt.step(state, g)
        np.testing.assert_allclose(res.dots, dots, atol=1e-10)
        np.testing.assert_allclose(res.theta_final, state.theta, atol=1e-10)


def test_projection_legality():
    opt.OGD(0.1, projection=lp_ball(2.0, 1.0))
    opt.OGD(0.1, projection=box(np.ones(3)))
    opt.DiagScaled(np.ones(3), projection=box(np.ones(3)))
    opt.AdaGradDiag(projection=box(np.ones(3)))
    with pytest.raises(ValueError):
        opt.DiagScaled(np.ones(3), projection=lp_ball(2.0, 1.0))
    with pytest.raises(ValueError):
        opt.AdaGradDiag(projection=lp_ball(2.0, 1.0))
    with pytest.raises(ValueError):
        opt.PNormMD(1.5, 0.1, projection=box(np.ones(3)))
    with pytest.raises(ValueError):
        opt.OGD(0.1, projection=lp_ball(1.0, 1.0))
    with pytest.raises(ValueError):
        opt.OGD(0.1, projection=weighted_lr_ball(2.0, np.array([1.0, 2.0]), 1.0))


def test_projection_keeps_iterates_feasible():
    G = random_G(n=60, seed=10, scale=3.0)
    ball = lp_ball(2.0, 0.7)
    state = opt.init_state(opt.OGD(0.5, projection=ball), 5)
    for g in G:
        state = opt.step(state, g)
        assert np.linalg.norm(state.theta) <= 0.7 * (1 + 1e-12)
    hw = np.array([0.5, 1.0, 0.2, 2.0, 1.5])
    state = opt.init_state(opt.AdaGradDiag(projection=box(hw)), 5)
    for g in G:
        state = opt.step(state, g)
        assert np.all(np.abs(state.theta) <= hw * (1 + 1e-12))


def test_checkpoints_and_averages():
    G = random_G(n=10, seed=11)
    ck = np.array([1, 4, 10])
    res = opt.run(opt.OGD(0.3), G, checkpoints=ck)
    full = opt.run(opt.OGD(0.3), G, checkpoints=np.arange(1, 11))
    np.testing.assert_allclose(res.theta_sums[1], full.theta_sums[3])
    avg = res.averages()
    np.testing.assert_allclose(avg[2], full.theta_sums[9] / 10.0)
    with pytest.raises(ValueError):
        opt.run(opt.OGD(0.3), G, checkpoints=np.array([0, 3]))
    with pytest.raises(ValueError):
        opt.run(opt.OGD(0.3), G, checkpoints=np.array([3, 3]))
    with pytest.raises(ValueError):
        opt.run(opt.OGD(0.3), G, checkpoints=np.array([3, 11]))


def test_regret_curve_manual():
    G = np.array([[1.0, -1.0], [2.0, 0.5], [-0.3, 0.2]])
    comp = lp_ball(2.0, 1.0)
    spec = opt.OGD(0.4)
    curve = opt.regret_curve(spec, G, comp)
    from ocobench.geometry import best_in_hindsight
    theta_star, _ = best_in_hindsight(comp, G.sum(axis=0))
    state = opt.init_state(spec, 2)
    acc = 0.0
    expected = []
    for g in G:
        acc += float(g @ (state.theta - theta_star))
        expected.append(acc)
        state = opt.step(state, g)
    np.testing.assert_allclose(curve, expected, atol=1e-12)
    assert opt.final_regret(spec, G, comp) == pytest.approx(expected[-1])


def test_md_regret_bound_holds_on_random_data():
    rng = np.random.default_rng(12)
    for trial in range(30):
        d = int(rng.integers(2, 6))
        n = int(rng.integers(5, 80))
        G = rng.normal(size=(n, d))
        alpha = float(10.0 ** rng.uniform(-2, 0.5))
        which = trial % 3
        if which == 0:
            spec, mgr = opt.OGD(alpha), mm.Euclidean(np.ones(d))
        elif which == 1:
            a = float(rng.uniform(1.1, 2.0))
            spec, mgr = opt.PNormMD(a, alpha), mm.PNorm(a)
        else:
            lam = rng.uniform(0.3, 3.0, size=d)
            spec, mgr = opt.DualAveraging(mm.Euclidean(lam), alpha), mm.Euclidean(lam)
        comp = lp_ball(2.0, float(rng.uniform(0.5, 2.0)))
        r = opt.final_regret(spec, G, comp)
        from ocobench.geometry import best_in_hindsight
        theta_star, _ = best_in_hindsight(comp, G.sum(axis=0))
        bound = opt.md_regret_bound(mgr, alpha, theta_star, np.zeros(d), G)
        assert r <= bound + 1e-9 * n


def test_adagrad_bound_formula_and_validity():
    G = np.array([[3.0, 0.0], [0.0, 4.0], [3.0, 0.0]])
    expected = 2.0 * np.sqrt(2.0) * (np.sqrt(18.0) + 4.0)
    assert opt.adagrad_bound(G) == pytest.approx(expected)
    rng = np.random.default_rng(13)
    hw = np.ones(4)
    for _ in range(20):
        G = rng.normal(size=(50, 4))
        spec = opt.AdaGradDiag(projection=box(hw))
        r = opt.final_regret(spec, G, box(hw))
        assert r <= opt.adagrad_bound(G) + 1e-9 * 50


def test_dual_averaging_schedule():
    G = random_G(n=20, seed=14)
    sched = lambda k: 0.5 / np.sqrt(k)
    spec = opt.DualAveraging(mm.Euclidean(np.ones(5)), 1.0, schedule=sched)
    res = opt.run(spec, G)
    # theta_{k+1} = -alpha_{k+1} sum_{i<=k} g_i with theta0 = 0
    state = opt.init_state(spec, 5)
    for g in G[:7]:
        state = opt.step(state, g)
    np.testing.assert_allclose(state.theta,
                               -sched(7) * G[:7].sum(axis=0), atol=1e-12)
    assert np.all(np.isfinite(res.dots))
    with pytest.raises(ValueError):
        opt.run(opt.DualAveraging(mm.Euclidean(np.ones(5)), 1.0,
                                  schedule=lambda k: -1.0), G)


def test_diag_scaled_inf_freezes_coordinates():
    G = random_G(n=15, seed=15)
    lam = np.array([1.0, np.inf, 2.0, np.inf, 0.5])
    res = opt.run(opt.DiagScaled(lam), G)
    assert res.theta_final[1] == 0.0
    assert res.theta_final[3] == 0.0
    live = ~np.isinf(lam)
    r2 = opt.run(opt.DiagScaled(lam[live]), G[:, live])
    np.testing.assert_allclose(res.theta_final[live], r2.theta_final, atol=1e-14)


def test_theta0_and_validation():
    with pytest.raises(ValueError):
        opt.OGD(0.0)
    with pytest.raises(ValueError):
        opt.OGD(-1.0)
    with pytest.raises(ValueError):
        opt.DiagScaled(np.array([1.0, -2.0]))
    with pytest.raises(ValueError):
        opt.AdaGradDiag(eta=0.0)
    with pytest.raises(ValueError):
        opt.run(opt.OGD(0.1, theta0=np.array([5.0, 0.0]),
                        projection=lp_ball(2.0, 1.0)),
                np.zeros((3, 2)))
    spec = opt.OGD(1.0, theta0=np.array([1.0, 2.0]))
    res = opt.run(spec, np.zeros((4, 2)))
    np.testing.assert_allclose(res.theta_final, [1.0, 2.0])


def test_pnorm_stepsize_and_bound():
    s = lp_ball(1.0, 1.0)
    norm = lp_norm(np.inf)
    d, n = 16, 256
    a = 1.0 + 1.0 / np.log(2.0 * d)
    alpha = opt.pnorm_default_stepsize(s, norm, a, n, d=d)
    assert alpha > 0.0
    # sup ||theta||_a over the l1 ball is 1; sup ||g||_{a*} over the
    # l-infinity ball is d^{1/a*}
    astar = a / (a - 1.0)
    assert alpha == pytest.approx(1.0 / (np.sqrt(n) * d ** (1.0 / astar)))
    bound = opt.pnorm_regret_bound(s, norm, a, n, d=d)
    assert bound == pytest.approx(d ** (1.0 / astar) * np.sqrt(n / (a - 1.0)))
