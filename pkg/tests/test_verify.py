from __future__ import annotations

import json

import pytest

from abwave.verify import SUITES, pointwise_samples, run_suite

FAST = ["identity", "decomposition", "mikhlin", "decay", "holder", "schur", "macdonald"]


@pytest.mark.parametrize("name", FAST)
def test_fast_suites_pass(name):
    rep = run_suite(name)
    assert set(rep) == {"suite", "cases", "measured_constants", "max_residual", "pass"}
    assert rep["suite"] == name and rep["pass"] is True
    json.dumps(rep)


def test_identity_residual_at_round_off():
    assert run_suite("identity")["max_residual"] <= 1e-12


def test_decomposition_reports_finite_constants():
    rep = run_suite("decomposition")
    assert rep["max_residual"] <= 1e-8
    assert rep["measured_constants"]
    assert all(v == v and v < float("inf") for c in rep["measured_constants"].values()
               for v in (c if isinstance(c, list) else [c]))


def test_pointwise_small_sample_is_seeded():
    a = run_suite("pointwise", n=300, seed=4)
    b = run_suite("pointwise", n=300, seed=4)
    assert a["pass"] and a == b


def test_pointwise_samples_stay_in_regime():
    import numpy as np

    rng = np.random.default_rng(0)
    for regime, ok in (("II", lambda t, r1, r2: abs(r1 - r2) < t < r1 + r2),
                       ("III", lambda t, r1, r2: t > r1 + r2)):
        t, r1, r2, *_ = pointwise_samples(rng, 200, regime)
        assert all(ok(a, b, c) for a, b, c in zip(t, r1, r2))


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")
    assert "pointwise" in SUITES
