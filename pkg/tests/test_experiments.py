import numpy as np
import pytest
from hypothesis import given, strategies as st

from surfcycle.experiments import (
    CSV_COLUMNS,
    Row,
    SweepConfig,
    _cell_seed,
    estimate_threshold,
    per_round_rate,
    relative_ratio,
    rows_from_csv,
    rows_to_csv,
    run_sweep,
    wilson_interval,
)


# --- per-round conversion ---


def test_per_round_rate_frozen_value():
    assert per_round_rate(0.01, 10) == 0.001009115679215189


def test_per_round_rate_fixed_points():
    assert per_round_rate(0.0, 7) == 0.0
    assert per_round_rate(0.5, 7) == 0.5
    # one round must be the identity bit for bit, not merely close
    for e in (0.0, 0.037, 0.12, 0.5):
        assert per_round_rate(e, 1) == e


def test_per_round_rate_inverts_composition():
    for rounds in (2, 5, 16):
        for e in (0.001, 0.05, 0.3):
            q = per_round_rate(e, rounds)
            back = 0.5 * (1.0 - (1.0 - 2.0 * q) ** rounds)
            assert back == pytest.approx(e, rel=1e-12)


def test_per_round_rate_monotone():
    rates = [per_round_rate(e, 10) for e in (0.01, 0.02, 0.1, 0.4)]
    assert rates == sorted(rates)
    by_rounds = [per_round_rate(0.2, r) for r in (1, 2, 5, 20)]
    assert by_rounds == sorted(by_rounds, reverse=True)


def test_per_round_rate_rejects_bad_inputs():
    with pytest.raises(ValueError):
        per_round_rate(0.1, 0)
    with pytest.raises(ValueError):
        per_round_rate(0.6, 5)
    with pytest.raises(ValueError):
        per_round_rate(-0.01, 5)


@given(
    st.floats(min_value=0.0, max_value=0.5),
    st.integers(min_value=1, max_value=200),
)
def test_per_round_rate_stays_in_domain(ler, rounds):
    q = per_round_rate(ler, rounds)
    assert 0.0 <= q <= 0.5
    assert q <= ler  # splitting a run over rounds never raises the rate


# --- Wilson intervals ---


def test_wilson_frozen_values():
    assert wilson_interval(0, 10**4) == (0.0, 0.00038399837067659573)
    assert wilson_interval(55, 1000) == (
        0.04249742737476844,
        0.07090838767737563,
    )


def test_wilson_contains_the_point_estimate():
    for errors, shots in ((0, 100), (1, 100), (50, 100), (100, 100)):
        lo, hi = wilson_interval(errors, shots)
        assert 0.0 <= lo <= errors / shots <= hi <= 1.0


def test_wilson_coverage_on_synthetic_binomials():
    rng = np.random.default_rng(42)
    n, p = 500, 0.1
    hits = 0
    for k in rng.binomial(n, p, size=1000):
        lo, hi = wilson_interval(int(k), n)
        hits += lo <= p <= hi
    assert hits >= 930


def test_wilson_rejects_bad_inputs():
    with pytest.raises(ValueError):
        wilson_interval(1, 0)
    with pytest.raises(ValueError):
        wilson_interval(-1, 10)
    with pytest.raises(ValueError):
        wilson_interval(11, 10)


@given(st.integers(min_value=1, max_value=10**7), st.data())
def test_wilson_interval_is_a_proper_interval(shots, data):
    errors = data.draw(st.integers(min_value=0, max_value=shots))
    lo, hi = wilson_interval(errors, shots)
    assert 0.0 <= lo <= errors / shots <= hi <= 1.0
    # more data at the same proportion never widens the interval
    lo2, hi2 = wilson_interval(4 * errors, 4 * shots)
    assert hi2 - lo2 <= hi - lo + 1e-15


# --- sweep configuration ---


def _config(**overrides):
    base = dict(
        variants=("original",),
        noise_kinds=("combined",),
        distances=(3,),
        p_values=(0.01,),
        shots=1000,
        seed=1,
    )
    base.update(overrides)
    return SweepConfig(**base)


def test_config_round_schedule():
    assert _config(distances=(3, 5)).rounds_for(5) == 16
    cfg = _config(distances=(3, 5), rounds=(2, 4))
    assert cfg.rounds_for(3) == 2 and cfg.rounds_for(5) == 4


@pytest.mark.parametrize(
    "overrides",
    [
        {"variants": ()},
        {"variants": ("original", "original")},
        {"variants": ("rotated",)},
        {"noise_kinds": ("thermal",)},
        {"distances": ()},
        {"distances": (4,)},
        {"distances": (1,)},
        {"distances": (3, 3)},
        {"p_values": ()},
        {"p_values": (1.5,)},
        {"p_values": (-0.1,)},
        {"shots": 999},
        {"distances": (3, 5), "rounds": (2,)},
        {"rounds": (0,)},
    ],
)
def test_config_rejects(overrides):
    with pytest.raises(ValueError):
        _config(**overrides)


def test_cell_seeds_are_frozen_and_distinct():
    assert _cell_seed(7, "original", "combined", 3, 10, 0.01) == (
        15271197219836674401
    )
    assert _cell_seed(7, "modified", "combined", 3, 10, 0.01) == (
        10848492308304316374
    )
    # one ulp of p is a different cell
    assert _cell_seed(7, "original", "combined", 3, 10, 0.010000000000000002) == (
        1735003121270746851
    )


# --- running sweeps ---


def test_zero_probability_cell_is_exact():
    res = run_sweep(_config(p_values=(0.0,)))
    assert res.failures == ()
    (row,) = res.rows
    assert row.logical_errors == 0
    assert row.ler_shot == 0.0 and row.ler_round == 0.0
    assert row.ci_low == 0.0 and row.ci_high > 0.0


def test_sweep_rows_follow_grid_order_and_are_deterministic():
    cfg = SweepConfig(
        variants=("original", "modified"),
        noise_kinds=("combined",),
        distances=(3,),
        p_values=(0.0, 0.02),
        shots=1000,
        seed=5,
        rounds=(2,),
    )
    res = run_sweep(cfg)
    keys = [(r.variant, r.noise, r.distance, r.p) for r in res.rows]
    assert keys == [
        ("original", "combined", 3, 0.0),
        ("original", "combined", 3, 0.02),
        ("modified", "combined", 3, 0.0),
        ("modified", "combined", 3, 0.02),
    ]
    assert run_sweep(cfg).rows == res.rows


def test_worker_count_does_not_change_results():
    cfg = SweepConfig(
        variants=("original", "modified"),
        noise_kinds=("combined",),
        distances=(3,),
        p_values=(0.02,),
        shots=1000,
        seed=5,
        rounds=(2,),
    )
    assert run_sweep(cfg, jobs=1).rows == run_sweep(cfg, jobs=2).rows


def test_failing_cell_is_isolated_not_raised():
    # p = 0.6 passes config validation but produces decoding-graph edges
    # with probability >= 0.5, which the graph builder refuses
    res = run_sweep(_config(p_values=(0.6,), rounds=(2,)))
    assert res.rows == ()
    (failure,) = res.failures
    assert failure.p == 0.6
    assert "DecodeError" in failure.message


def test_progress_callback_sees_every_cell():
    seen = []
    run_sweep(
        _config(p_values=(0.0, 0.0054)),
        progress=lambda cell, outcome: seen.append((cell[4], outcome)),
    )
    assert [p for p, _ in seen] == [0.0, 0.0054]
    assert all(row is not None for _, (row, _) in seen)


# --- ratio aggregation ---


def _ratio_row(variant, noise, d, p, ler):
    return Row(variant, noise, d, 3 * d + 1, p, 10**5,
               int(ler * 10**5), ler, ler, ler, ler, 0)


def test_relative_ratio_hand_arithmetic():
    rows = [
        _ratio_row("original", "gate", 3, 0.01, 0.002),
        _ratio_row("modified", "gate", 3, 0.01, 0.003),
        _ratio_row("original", "gate", 3, 0.02, 0.008),
        _ratio_row("modified", "gate", 3, 0.02, 0.008),
        _ratio_row("original", "gate", 5, 0.01, 0.001),
        _ratio_row("modified", "gate", 5, 0.01, 0.002),
        _ratio_row("original", "gate", 5, 0.02, 0.004),
        _ratio_row("modified", "gate", 5, 0.02, 0.004),
    ]
    rep = relative_ratio(rows)
    assert rep.per_p == (
        ("gate", 3, 0.01, 1.5),
        ("gate", 3, 0.02, 1.0),
        ("gate", 5, 0.01, 2.0),
        ("gate", 5, 0.02, 1.0),
    )
    assert rep.per_distance == (("gate", 3, 1.25), ("gate", 5, 1.5))
    assert rep.per_noise == (("gate", 1.375),)
    assert rep.excluded == ()


def test_relative_ratio_excludes_zero_denominators():
    rows = [
        _ratio_row("original", "gate", 3, 0.001, 0.0),
        _ratio_row("modified", "gate", 3, 0.001, 0.0001),
        _ratio_row("original", "gate", 3, 0.01, 0.002),
        _ratio_row("modified", "gate", 3, 0.01, 0.004),
    ]
    rep = relative_ratio(rows)
    assert rep.excluded == (("gate", 3, 0.001),)
    assert rep.per_p == (("gate", 3, 0.01, 2.0),)
    assert rep.per_noise == (("gate", 2.0),)


def test_relative_ratio_skips_unpaired_cells():
    rows = [_ratio_row("original", "gate", 3, 0.01, 0.002)]
    rep = relative_ratio(rows)
    assert rep.per_p == () and rep.excluded == ()


# --- threshold estimation ---


def _synthetic_rows(distances, ps, pth=0.03, amp=0.3):
    rows = []
    for d in distances:
        for p in ps:
            ler = amp * (p / pth) ** ((d + 1) / 2)
            rows.append(_ratio_row("original", "combined", d, p, ler))
    return rows


def test_threshold_recovers_synthetic_power_law():
    # the gap between log-curves is linear in log p for power laws, so the
    # interpolated crossing is exact up to rounding
    rows = _synthetic_rows((3, 5, 7), (0.02, 0.028, 0.035, 0.05))
    est = estimate_threshold(rows, "combined", "original")
    assert est.estimate == pytest.approx(0.03, rel=1e-9)
    assert [(a, b) for a, b, _ in est.crossings] == [(3, 5), (5, 7)]
    assert "2 distance-pair" in est.message


def test_threshold_grid_point_exactly_on_crossing():
    rows = _synthetic_rows((3, 5), (0.01, 0.03, 0.05))
    est = estimate_threshold(rows, "combined", "original")
    assert est.estimate == pytest.approx(0.03, rel=1e-12)


def test_threshold_reports_missing_crossing():
    # curves strictly ordered the same way everywhere: no sign change
    rows = []
    for d, amp in ((3, 0.01), (5, 0.02)):
        for p in (0.01, 0.02, 0.03):
            rows.append(_ratio_row("original", "combined", d, p, amp * p))
    est = estimate_threshold(rows, "combined", "original")
    assert est.estimate is None
    assert est.crossings == ()
    assert est.message == "no crossing in range"


def test_threshold_skips_zero_rate_points():
    rows = _synthetic_rows((3, 5), (0.02, 0.028, 0.035, 0.05))
    rows.append(_ratio_row("original", "combined", 3, 0.001, 0.0))
    rows.append(_ratio_row("original", "combined", 5, 0.001, 0.0))
    est = estimate_threshold(rows, "combined", "original")
    assert est.estimate == pytest.approx(0.03, rel=1e-9)


def test_threshold_requires_enough_data():
    rows = _synthetic_rows((3,), (0.01, 0.02, 0.03))
    with pytest.raises(ValueError, match=">= 2 distances"):
        estimate_threshold(rows, "combined", "original")
    rows = _synthetic_rows((3, 5), (0.01, 0.02))
    with pytest.raises(ValueError, match=">= 3 shared"):
        estimate_threshold(rows, "combined", "original")


def test_threshold_crossing_on_measured_data():
    """End-to-end anchor: with distances 3 and 5 on a grid spanning the
    regime change, the estimator finds a crossing inside the grid."""
    cfg = SweepConfig(
        variants=("original",),
        noise_kinds=("combined",),
        distances=(3, 5),
        p_values=(0.006, 0.008, 0.01, 0.012),
        shots=2000,
        seed=20240901,
    )
    res = run_sweep(cfg)
    assert res.failures == ()
    est = estimate_threshold(res.rows, "combined", "original")
    assert est.estimate is not None
    assert 0.005 < est.estimate < 0.013


# --- CSV round trip ---


def test_csv_round_trip_and_stability():
    res = run_sweep(_config(p_values=(0.0, 0.011), rounds=(2,)))
    text = rows_to_csv(res.rows, comment="sweep seed=1")
    assert text.startswith("# sweep seed=1\n" + ",".join(CSV_COLUMNS) + "\n")
    assert rows_from_csv(text) == res.rows
    assert rows_to_csv(res.rows, comment="sweep seed=1") == text


def test_csv_floats_survive_exactly():
    row = Row("modified", "gate", 5, 16, 0.012999999999999998, 4000, 17,
              0.00425, 0.00026601431861715993, 0.0002, 0.0004, 123456789)
    (back,) = rows_from_csv(rows_to_csv([row]))
    assert back == row


def test_csv_rejects_malformed_input():
    with pytest.raises(ValueError):
        rows_from_csv("")
    with pytest.raises(ValueError):
        rows_from_csv("wrong,header\n")
    good = rows_to_csv([_ratio_row("original", "gate", 3, 0.01, 0.002)])
    truncated = good.rstrip("\n").rsplit(",", 1)[0] + "\n"
    with pytest.raises(ValueError):
        rows_from_csv(truncated)
