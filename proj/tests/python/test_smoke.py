import math

import ssmvb


def test_simulate_shapes_and_determinism():
    a = ssmvb.simulate(dgp=2, T=200, seed=7)
    b = ssmvb.simulate(dgp=2, T=200, seed=7)
    assert len(a["y"]) == 200 and len(a["mu"]) == 200 and len(a["h"]) == 200
    assert a["y"] == b["y"]
    c = ssmvb.simulate(dgp=2, T=200, seed=8)
    assert a["y"] != c["y"]


def test_analytics():
    star = ssmvb.find_theta_star(grid_step=0.05)
    assert star["rho"] == 0.05 and star["alpha"] == 0.0

    lam = ssmvb.optimal_lambda(0.5, 1.0)
    assert 0.0 < lam < 0.5
    # argmax property: criterion at lam beats nearby lambdas
    here = ssmvb.limit_criterion(0.5, 1.0, lam)
    assert here >= ssmvb.limit_criterion(0.5, 1.0, lam - 1e-4)
    assert here >= ssmvb.limit_criterion(0.5, 1.0, lam + 1e-4)

    # 2x2 determinant: a^2 - bc
    assert math.isclose(ssmvb.tridiag_det(3.0, 1.0, 2.0, 2), 7.0)
    assert ssmvb.jensen_case2_limit(0.0) == 0.0
    assert ssmvb.jensen_case1_limit(0.5) > 0.0


def test_cy_fit_monotone_elbo():
    y = ssmvb.simulate(dgp=2, T=150, seed=3)["y"]
    fit = ssmvb.vb_fit(y, "cy", iters=50, seed=1)
    elbo = fit["sweep_elbo"]
    assert len(elbo) >= 2
    assert all(b >= a - 1e-8 for a, b in zip(elbo, elbo[1:]))


def test_predict_and_score():
    y = ssmvb.simulate(dgp=1, T=120, seed=5)["y"]
    pd = ssmvb.fit_predict(y, "cy", iters=40, J=200, seed=2)
    assert len(pd["mean"]) == 200 and all(s > 0 for s in pd["sd"])
    scores = ssmvb.score(pd["mean"], pd["sd"], y[-1], y[:-1])
    for key in ("ls", "cs10", "cs20", "cs80", "cs90", "crps", "twcrps", "is"):
        assert math.isfinite(scores[key])
    assert scores["crps"] <= 0.0 and scores["is"] <= 0.0
