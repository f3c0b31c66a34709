"""Tests for the experiment driver and threshold analysis.

Oracles: closed-form arithmetic for per-round conversion and cooperativity,
synthetic data generated from the scaling ansatz for fit round-trips, and
exactly constructed log-log-linear curves for crossing finders.
"""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavqec.codes import build_code
from cavqec.harness import (DataPoint, FitResult, cooperativity,
                            curve_crossing, fit_threshold, per_round,
                            points_from_csv, points_to_csv, pseudo_threshold,
                            run_point, total_from_per_round)


def _pt(code="c", d=4, p=4e-3, rate=1e-2, stderr=1e-3, shots=10000,
        failures=100):
    return DataPoint(code=code, d=d, p=p, m=1.0, model="agnostic",
                     shots=shots, failures=failures, per_round_rate=rate,
                     stderr=stderr, rounds=d)


def test_per_round_examples():
    assert per_round(0.0, 7) == 0.0
    assert per_round(0.42, 1) == pytest.approx(0.42, abs=1e-15)
    assert per_round(0.271, 4) == pytest.approx(1 - 0.729 ** 0.25, abs=1e-15)
    assert per_round(0.271, 4) == pytest.approx(0.0759, abs=1e-4)
    with pytest.raises(ValueError):
        per_round(1.5, 4)
    with pytest.raises(ValueError):
        per_round(0.5, 0)


@settings(max_examples=200)
@given(st.floats(0.0, 0.999), st.integers(1, 50))
def test_per_round_round_trip(p_total, d):
    rate = per_round(p_total, d)
    assert 0.0 <= rate <= p_total + 1e-15
    assert total_from_per_round(rate, d) == pytest.approx(p_total, abs=1e-12)


def test_data_point_validation():
    with pytest.raises(ValueError):
        _pt(failures=20000)
    with pytest.raises(ValueError):
        _pt(rate=1.5)


def _synthetic(amp, a, b, pth, ds=(4, 6, 8), ps=(3e-3, 4e-3, 5e-3, 6e-3),
               noise=0.0, rng=None):
    pts = []
    for d in ds:
        for p in ps:
            rate = amp * (p / pth) ** (a * d ** b)
            if noise and rng is not None:
                rate *= 1.0 + noise * rng.gauss(0, 1)
            rate = min(max(rate, 1e-12), 0.99)
            pts.append(_pt(code=f"d{d}", d=d, p=p, rate=rate,
                           stderr=0.05 * rate))
    return pts


def test_fit_threshold_noiseless_round_trip():
    fit = fit_threshold(_synthetic(0.1, 0.75, 1.0, 8e-3))
    assert fit.amplitude == pytest.approx(0.1, rel=1e-3)
    assert fit.a == pytest.approx(0.75, rel=1e-3)
    assert fit.b == pytest.approx(1.0, rel=1e-3)
    assert fit.p_th == pytest.approx(8e-3, rel=1e-3)
    assert fit.residual < 1e-8


def test_fit_threshold_fixed_exponents():
    fit = fit_threshold(_synthetic(0.1, 0.75, 1.0, 8e-3),
                        fix_a_b=(0.75, 1.0))
    assert fit.a == 0.75 and fit.b == 1.0
    assert fit.p_th == pytest.approx(8e-3, rel=1e-6)


def test_fit_threshold_noisy_recovery():
    rng = random.Random(7)
    misses = 0
    for _ in range(25):
        pts = _synthetic(0.1, 0.75, 1.0, 8e-3, noise=0.05, rng=rng)
        fit = fit_threshold(pts, fix_a_b=(0.75, 1.0))
        if abs(fit.p_th - 8e-3) > 0.05 * 8e-3:
            misses += 1
    assert misses == 0


def test_fit_threshold_order_invariance():
    pts = _synthetic(0.2, 0.6, 1.1, 7e-3)
    fit1 = fit_threshold(pts)
    fit2 = fit_threshold(list(reversed(pts)))
    assert fit1.p_th == pytest.approx(fit2.p_th, rel=1e-9)
    assert fit1.a == pytest.approx(fit2.a, rel=1e-9)


def test_fit_threshold_rejections():
    good = _synthetic(0.1, 0.75, 1.0, 8e-3)
    with pytest.raises(ValueError):
        fit_threshold([pt for pt in good if pt.d == 4])
    with pytest.raises(ValueError):
        fit_threshold(good[:3] + [good[4]] + good[8:])
    bad = good[:-1] + [_pt(code="d8", d=8, p=6e-3, rate=0.0, failures=0)]
    with pytest.raises(ValueError):
        fit_threshold(bad)


def test_fit_result_validation():
    with pytest.raises(ValueError):
        FitResult(amplitude=0.1, a=-1.0, b=1.0, p_th=8e-3)


def test_cooperativity_paper_rows():
    assert cooperativity(6, 1.0, 8.12e-3) == pytest.approx(2.65e6, rel=2e-3)
    assert cooperativity(6, 0.5, 8.43e-3) == pytest.approx(9.85e6, rel=2e-3)
    assert cooperativity(6, 10.0, 6.09e-3) == pytest.approx(4.72e4, rel=2e-3)


def test_cooperativity_closed_form_and_monotonicity():
    for n in (4, 6, 8):
        for m in (0.5, 1.0, 3.0):
            for pth in (2e-3, 8e-3):
                want = (n * math.pi
                        / (m * pth * math.sqrt(2 * (1 + 2 ** -n)))) ** 2
                assert cooperativity(n, m, pth) == pytest.approx(want)
    grid = [0.5, 1, 2, 5, 10]
    vals = [cooperativity(6, m, 8e-3) for m in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    vals = [cooperativity(6, 1, p) for p in (2e-3, 4e-3, 8e-3)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        cooperativity(6, 0.0, 8e-3)


def test_pseudo_threshold_constructed_crossing():
    cross = 1.5e-3
    pts = [_pt(p=p, rate=p * p / cross) for p in (5e-4, 1e-3, 2e-3, 3e-3)]
    assert pseudo_threshold(pts) == pytest.approx(cross, rel=1e-9)


def test_pseudo_threshold_rejects_monotone_data():
    pts = [_pt(p=p, rate=p / 10) for p in (1e-3, 2e-3, 4e-3)]
    with pytest.raises(ValueError):
        pseudo_threshold(pts)


def test_curve_crossing_constructed():
    # Two power laws sharing a grid cross where 0.1 (p/8e-3)^3 =
    # 0.1 (p/8e-3)^4.5, i.e. exactly at p = 8e-3.
    pa = [_pt(code="a", d=4, p=p, rate=0.1 * (p / 8e-3) ** 3.0)
          for p in (6e-3, 8e-3, 1e-2)]
    pb = [_pt(code="b", d=6, p=p, rate=0.1 * (p / 8e-3) ** 4.5)
          for p in (6e-3, 8e-3, 1e-2)]
    assert curve_crossing(pa, pb) == pytest.approx(8e-3, rel=1e-9)
    with pytest.raises(ValueError):
        curve_crossing(pa[:1], pb[:1])


def test_csv_round_trip():
    pts = _synthetic(0.1, 0.75, 1.0, 8e-3)
    text = points_to_csv(pts)
    back = points_from_csv(text)
    assert back == pts


SMALL = build_code((1, 1), 3)  # 18-qubit self-product of the length-3 ring


def test_run_point_zero_noise():
    pt = run_point(SMALL, 2, 0.0, 1.0, "agnostic", shots=64, seed=5)
    assert pt.failures == 0
    assert pt.per_round_rate == 0.0


def test_run_point_reproducible_and_sane():
    a = run_point(SMALL, 2, 3e-3, 1.0, "agnostic", shots=128, seed=9)
    b = run_point(SMALL, 2, 3e-3, 1.0, "agnostic", shots=128, seed=9)
    assert a == b
    assert 0 <= a.failures <= 128
    assert a.per_round_rate == pytest.approx(
        per_round(a.failures / 128, 2), abs=1e-15)


def test_decode_observables_slices_wide_models_consistently():
    # A model with >64 observables is decoded in 64-wide slices; the slices
    # share the mechanism graph, so predictions must agree with the same
    # model truncated to any single slice.
    from cavqec.harness import _decode_observables
    from cavqec.scheduling import diagonal_schedule
    from cavqec.circuits import (DetectorConfig, build_memory_experiment,
                                 make_noise_model)
    from cavqec.codes import layout
    from cavqec.sim import DetectorErrorModel, build_dem, sample_frames
    from cavqec.decoder import DecoderConfig

    det = DetectorConfig(per_qubit=True, parity=False, x_detectors="singles")
    circuit = build_memory_experiment(
        SMALL, 2, make_noise_model("agnostic", 4e-3, 1.0),
        diagonal_schedule(SMALL, layout(SMALL)), det)
    dem = build_dem(circuit)
    assert dem.observable_count == 2
    batch = sample_frames(circuit, 256, 21)
    narrow = _decode_observables(dem, batch.detector_array(), DecoderConfig())

    # Widen the model: copy each observable 40 slots up (81 total slots).
    mechs = tuple((p, dets, tuple(obss) + tuple(o + 40 for o in obss))
                  for p, dets, obss in dem.mechanisms)
    wide = DetectorErrorModel(mechanisms=mechs,
                              detector_count=dem.detector_count,
                              observable_count=42)
    wide_pred = _decode_observables(wide, batch.detector_array(),
                                    DecoderConfig())
    assert np.array_equal(wide_pred[:, :2], narrow)
    assert np.array_equal(wide_pred[:, 40:42], narrow)
