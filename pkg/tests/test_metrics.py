import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import soft_disk
from mattekit.errors import ParameterError, ValidationError
from mattekit.metrics import (
    METRIC_FIELDS,
    conn_error,
    evaluate,
    gaussian_derivative_kernels,
    grad_error,
    mad,
    mse,
    region_sad,
    sad,
    summarize,
)
from mattekit.rosta import make_ft, make_tt


def _pair(seed, size=32):
    rng = np.random.default_rng(seed)
    gt = soft_disk(size, center=rng.uniform(8, size - 8, 2), radius=rng.uniform(5, 12), band=rng.uniform(1, 5))
    pred = np.clip(gt + rng.normal(0, 0.15, gt.shape), 0, 1)
    return pred, gt


def test_constant_pair_arithmetic():
    pred = np.full((25, 40), 0.5)
    gt = np.ones((25, 40))
    assert sad(pred, gt) == pytest.approx(0.5, abs=1e-15)
    assert mse(pred, gt) == 0.25
    assert mad(pred, gt) == 0.5


def test_basic_metrics_match_loop_oracle():
    for seed in range(10):
        pred, gt = _pair(seed)
        s, q, a = oracles.loop_sad_mse_mad(pred, gt)
        assert abs(sad(pred, gt) - s) <= 1e-12
        assert abs(mse(pred, gt) - q) <= 1e-12
        assert abs(mad(pred, gt) - a) <= 1e-12


def test_region_sad_matches_loop_oracle_and_sums():
    for seed in range(10):
        pred, gt = _pair(seed)
        tt = make_tt(gt, 5)
        ours = region_sad(pred, gt, tt)
        ref = oracles.loop_region_sad(pred, gt, tt.labels)
        assert np.allclose(ours, ref, rtol=1e-12, atol=0)
        assert sum(ours) == pytest.approx(sad(pred, gt), abs=1e-12)


def test_region_sad_error_only_in_transition():
    gt = soft_disk(64, radius=20, band=6)
    tt = make_tt(gt, 5)
    pred = gt.copy()
    pred[tt.transition] = 1 - pred[tt.transition]
    tran, fg, bg = region_sad(pred, gt, tt)
    assert tran > 0 and fg == 0 and bg == 0


def test_region_sad_needs_tt():
    gt = soft_disk(64, radius=20)
    with pytest.raises(ParameterError):
        region_sad(gt, gt, make_ft(gt, 5))


def test_gaussian_kernels():
    g, dg = gaussian_derivative_kernels(1.4)
    assert len(g) == 11
    assert g.sum() == pytest.approx(1.0)
    assert np.allclose(dg, -dg[::-1])
    assert dg[:5].min() > 0  # correlation kernel: positive on the left for a rising edge


def test_grad_matches_direct_convolution_oracle():
    for seed in range(5):
        pred, gt = _pair(seed)
        ref = oracles.direct_grad_error(pred, gt)
        assert abs(grad_error(pred, gt) - ref) <= 1e-9


def test_grad_constants_are_zero():
    assert grad_error(np.full((20, 20), 0.2), np.full((20, 20), 0.9)) == 0.0


def test_conn_hand_built_case():
    gt = np.zeros((8, 8))
    gt[2:5, 2:5] = 1.0
    pred = gt.copy()
    pred[6, 6] = 0.5
    expected = oracles.exhaustive_conn(pred, gt)
    # detached pixel: level 0, phi(pred) = 0.5, phi(gt) = 1
    assert expected == pytest.approx(0.0005, abs=1e-15)
    assert conn_error(pred, gt) == pytest.approx(expected, abs=1e-15)


def test_conn_matches_exhaustive_oracle():
    for seed in range(6):
        rng = np.random.default_rng(seed)
        pred, gt = rng.random((12, 12)), rng.random((12, 12))
        assert abs(conn_error(pred, gt) - oracles.exhaustive_conn(pred, gt)) <= 1e-12
        pred, gt = _pair(seed, 24)
        assert abs(conn_error(pred, gt) - oracles.exhaustive_conn(pred, gt)) <= 1e-12


def test_conn_trivial_cases():
    ones = np.ones((10, 10))
    assert conn_error(ones, ones) == 0.0
    _, gt = _pair(1)
    assert conn_error(gt, gt) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_symmetry_and_transposition(seed):
    pred, gt = _pair(seed, 20)
    assert sad(pred, gt) == sad(gt, pred)
    assert mse(pred, gt) == mse(gt, pred)
    assert mad(pred, gt) == mad(gt, pred)
    assert sad(pred.T, gt.T) == pytest.approx(sad(pred, gt), rel=1e-12)
    assert mse(pred.T, gt.T) == pytest.approx(mse(pred, gt), rel=1e-12)
    assert grad_error(pred.T, gt.T) == pytest.approx(grad_error(pred, gt), rel=1e-9, abs=1e-15)
    assert conn_error(pred.T, gt.T) == pytest.approx(conn_error(pred, gt), abs=1e-12)


def test_evaluate_identity_is_all_zero():
    _, gt = _pair(4, 48)
    report = evaluate(gt, gt)
    assert all(getattr(report, f) == 0.0 for f in METRIC_FIELDS)
    assert report.regions_source.startswith("tt:k=25")


def test_evaluate_non_negative_and_summary():
    reports = [evaluate(*_pair(s)) for s in range(3)]
    for r in reports:
        assert all(getattr(r, f) >= 0 for f in METRIC_FIELDS)
    summary = summarize(reports)
    assert summary["sad"] == pytest.approx(np.mean([r.sad for r in reports]))
    assert summarize([]) == {f: 0.0 for f in METRIC_FIELDS}


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        sad(np.zeros((4, 4)), np.zeros((4, 5)))
    with pytest.raises(ValidationError):
        conn_error(np.zeros((4, 4)), np.zeros((5, 4)))
