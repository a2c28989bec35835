import json
import math

import numpy as np
import pytest

from scir import diagnostics as dg


def test_hill_on_pareto():
    for index in (0.9, 1.5):
        u = np.random.default_rng(1).random(10_000)
        x = u ** (-1.0 / index)
        assert dg.hill(x, k=1000) == pytest.approx(index, abs=0.05 * index + 0.05)


def test_hill_scale_invariant():
    x = np.random.default_rng(2).pareto(1.5, 5000) + 1
    assert dg.hill(7.0 * x) == pytest.approx(dg.hill(x), rel=1e-12)


def test_hill_degenerate_and_invalid():
    assert dg.hill(np.ones(100), k=20) == math.inf
    with pytest.raises(ValueError):
        dg.hill(np.array([1.0, -1.0] * 50))
    with pytest.raises(ValueError):
        dg.hill(np.ones(100), k=200)


def test_default_hill_k():
    assert dg.default_hill_k(10**6) == 10**4


def test_rate_regression_exact_slope():
    ns = np.array([1e3, 1e4, 1e5])
    fit = dg.rate_regression(ns, 5.0 * ns ** (-1 / 3))
    assert fit.slope == pytest.approx(-1 / 3, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(5.0), abs=1e-10)
    assert fit.r2 == pytest.approx(1.0)


def test_laplace_compare_exponential():
    x = np.random.default_rng(3).exponential(size=200_000)
    assert dg.laplace_compare(x, (0.5, 1.0, 2.0), lambda lam: 1 / (1 + lam)) < 0.01


def test_mixing_decay_ar1():
    # AR(1) with coefficient e^{-0.8}: the bounded functional decays at about 0.8
    rng = np.random.default_rng(4)
    phi, n = math.exp(-0.8), 200_000
    x = np.empty(n)
    x[0] = 0.0
    e = rng.standard_normal(n) * 0.3
    for k in range(1, n):
        x[k] = phi * x[k - 1] + e[k]
    assert dg.mixing_decay(x, range(1, 4)) == pytest.approx(0.8, abs=0.1)


def test_mixing_decay_needs_positive_covariance():
    with pytest.raises(ValueError):
        dg.mixing_decay(np.tile([0.0, 1.0], 100), [1, 3])


def test_report_json_serialises_numpy():
    fit = dg.rate_regression([10, 100], [1.0, 0.1])
    out = json.loads(dg.report_json(a=np.float64(1.5), b=np.arange(2), fit=fit))
    assert out["a"] == 1.5 and out["b"] == [0, 1] and out["fit"]["slope"] == pytest.approx(-1)
