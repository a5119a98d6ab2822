import math
from dataclasses import asdict

import numpy as np
import pandas as pd
import pytest
import scipy.linalg

import harness
import spectral
from graph_core import NumericError, ParameterError, random_regular
from harness import (
    CONFIG_COLUMNS,
    CSV_COLUMNS,
    METRIC_COLUMNS,
    THRESHOLD_COLUMNS,
    SweepConfig,
    SweepResult,
    TrialPoint,
    anchor_seed,
    analyze_fixed_graph,
    diagnose_fixed_graph,
    format_cell,
    graph_seed,
    k_emp,
    mix_seed,
    resample_robustness,
    run_fixed_graph_sweep,
    run_sweep,
    run_trial,
    select_anchors,
    threshold_table,
    trial_seed,
    write_csv,
)


def small_config(**overrides):
    settings = dict(n_list=[60], k_list=[1, 3], m_list=[0, 2], eta_list=["0.5"], trials=2, seed=3)
    settings.update(overrides)
    return SweepConfig(**settings)


def synthetic_frame(errors_by_k, n=500, m=0, eta="0.1", quantizer="relative"):
    rows = []
    for k, errors in errors_by_k.items():
        for trial, err in enumerate(errors):
            rows.append({"n": n, "r": 3, "k": k, "m": m, "eta": eta, "quantizer": quantizer, "scaled": True,
                         "feature": "full", "anchor_strategy": "random", "trial": trial, "resample": 0, "seed": 0,
                         "error": err, "image_frac": 1 - err})
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


# -------------------------------------------------------------
# Seeds
# -------------------------------------------------------------
def test_mix_seed_is_stable_and_bounded():
    assert mix_seed(0, "graph", 500, 3, 1) == mix_seed(0, "graph", 500, 3, 1)
    assert mix_seed(0, "graph", 500, 3, 1) != mix_seed(0, "graph", 500, 3, 2)
    assert 0 <= mix_seed("x") < 2**63


def test_anchor_seed_ignores_spectral_settings():
    # same anchors for every (m, eta) at fixed trial seed, k and resample
    assert anchor_seed(11, 4, "random", 0) == anchor_seed(11, 4, "random", 0)
    assert anchor_seed(11, 4, "random", 0) != anchor_seed(11, 4, "random", 1)
    assert anchor_seed(11, 4, "random", 0) != graph_seed(11)


def test_trial_seed_separates_trials_and_degrees():
    assert trial_seed(0, 500, 3, 0) != trial_seed(0, 500, 3, 1)
    assert trial_seed(0, 500, 3, 0) != trial_seed(0, 500, 4, 0)
    assert trial_seed(0, 500, None, 0) == trial_seed(0, 500, None, 0)


# -------------------------------------------------------------
# Anchor strategies
# -------------------------------------------------------------
def test_degree_strategy_picks_star_center(star):
    assert select_anchors(star, 1, "degree", 0).anchors == (0,)


def test_farthest_strategy_on_path(path5):
    assert select_anchors(path5, 2, "farthest", 0, first=0).anchors == (0, 4)


def test_random_strategy_is_deterministic():
    g = random_regular(100, 3, 0)
    first = select_anchors(g, 5, "random", 42)
    assert first == select_anchors(g, 5, "random", 42)
    assert len(set(first.anchors)) == 5


def test_select_anchors_rejects_bad_input(path4):
    with pytest.raises(ParameterError):
        select_anchors(path4, 5, "random", 0)
    with pytest.raises(ParameterError):
        select_anchors(path4, 1, "central", 0)


# -------------------------------------------------------------
# Config
# -------------------------------------------------------------
@pytest.mark.parametrize(
    "overrides",
    [
        dict(n_list=[]),
        dict(n_list=[61]),
        dict(k_list=[100]),
        dict(eta_list=["0"]),
        dict(eta_list=["abc"]),
        dict(features=["pe"]),
        dict(trials=0),
        dict(quantizer="log"),
    ],
)
def test_config_validation(overrides):
    with pytest.raises(ParameterError):
        small_config(**overrides)


def test_points_are_ordered_by_decimal_eta():
    cfg = small_config(k_list=[1], m_list=[1], eta_list=["0.5", "0.05", "0.25"])
    assert [p.eta for p in cfg.points()] == ["0.05", "0.25", "0.5"]


@pytest.mark.parametrize("threshold", [0, 1.2])
def test_config_error_threshold_range(threshold):
    with pytest.raises(ParameterError):
        small_config(error_threshold=threshold)
    assert small_config(error_threshold=1.0).error_threshold == 1.0


def test_m_eta_pairs_restrict_grid():
    cfg = small_config(k_list=[2], m_list=[1, 2, 5], eta_list=["2.0", "1.0", "0.3"],
                       m_eta_pairs=[(1, "2.0"), (2, "1"), (5, "0.30")])
    assert [(p.m, p.eta) for p in cfg.points()] == [(1, "2.0"), (2, "1.0"), (5, "0.3")]


@pytest.mark.parametrize("pairs", [[], [(3, "0.5")], [(1, "0.4")]])
def test_m_eta_pairs_must_lie_in_grid(pairs):
    with pytest.raises(ParameterError):
        small_config(m_list=[0, 1], eta_list=["0.5"], m_eta_pairs=pairs)


# -------------------------------------------------------------
# Trials
# -------------------------------------------------------------
def test_nope_error_is_one_minus_one_over_n():
    rec = run_trial(TrialPoint(60, 3, 3, 2, "0.5", feature="nope"), seed=1)
    assert rec.error == pytest.approx(1 - 1 / 60)
    assert rec.codebook_size == 1


def test_full_with_m0_equals_distance_only():
    g = random_regular(80, 3, 2)
    full = run_trial(TrialPoint(80, 3, 2, 0, "0.3", feature="full"), seed=5, graph=g)
    dist = run_trial(TrialPoint(80, 3, 2, 0, "0.3", feature="distance"), seed=5, graph=g)
    assert [getattr(full, c) for c in METRIC_COLUMNS] == [getattr(dist, c) for c in METRIC_COLUMNS]


def test_spectral_only_ignores_anchors():
    g = random_regular(80, 3, 2)
    a = run_trial(TrialPoint(80, 3, 1, 3, "0.3", feature="spectral"), seed=5, graph=g)
    b = run_trial(TrialPoint(80, 3, 6, 3, "0.3", feature="spectral"), seed=9, graph=g)
    assert a.error == b.error
    assert a.profile_count == 1


def test_trial_records_are_consistent():
    for rec in run_sweep(small_config()).records:
        assert rec.error == 1 - rec.image_frac
        assert rec.bounds_ok is True
        assert rec.wall_time_ms is None


def test_timing_fills_wall_time():
    rec = run_trial(TrialPoint(60, 3, 2, 1, "0.5"), seed=0, timing=True)
    assert rec.wall_time_ms > 0


def test_sweep_rows_replay_from_their_seed():
    cfg = small_config(k_list=[1, 2], m_list=[0, 1, 3], eta_list=["0.5", "0.2"], trials=2, anchor_resamples=2,
                       features=["full", "spectral"])
    records = run_sweep(cfg).records
    assert len(records) == len(cfg.points()) * 4
    for rec in records:
        point = TrialPoint(*(getattr(rec, c) for c in CONFIG_COLUMNS))
        assert asdict(run_trial(point, rec.seed, rec.trial, rec.resample)) == asdict(rec)


def test_sweep_seed_column_is_the_trial_seed():
    cfg = small_config(trials=2)
    frame = run_sweep(cfg).frame()
    for trial, seeds in frame.groupby("trial")["seed"]:
        assert set(seeds) == {trial_seed(cfg.seed, 60, cfg.r, trial)}


def test_failed_trials_are_recorded(monkeypatch):
    def broken(table):
        raise NumericError("solver exploded", 1.0)

    monkeypatch.setattr(harness, "fiber_stats", broken)
    result = run_sweep(small_config(k_list=[1], m_list=[0], trials=1))
    (rec,) = result.records
    assert rec.bounds_ok == "error:NumericError"
    assert rec.error is None


def test_solver_failure_marks_rows_and_sweep_continues(monkeypatch):
    def singular(op, count):
        raise scipy.linalg.LinAlgError("eigenvalues did not converge")

    monkeypatch.setattr(spectral, "_dense_pairs", singular)
    result = run_sweep(small_config(m_list=[1, 2], trials=2))
    frame = result.frame()
    assert len(frame) == len(small_config(m_list=[1, 2]).points()) * 2
    assert (frame["bounds_ok"] == "error:NumericError").all()
    assert frame["error"].isna().all()

    fixed = run_fixed_graph_sweep(random_regular(60, 3, 0), small_config(m_list=[1], anchor_resamples=2)).frame()
    assert (fixed["bounds_ok"] == "error:NumericError").all()


def test_sweep_row_order_and_count():
    cfg = small_config(anchor_resamples=2)
    frame = run_sweep(cfg).frame()
    assert len(frame) == len(cfg.points()) * cfg.trials * cfg.anchor_resamples
    keys = list(zip(frame["k"], frame["m"], frame["trial"], frame["resample"]))
    assert keys == sorted(keys)


def test_parallel_sweep_equals_serial():
    serial = run_sweep(small_config(jobs=1)).frame()
    parallel = run_sweep(small_config(jobs=2)).frame()
    pd.testing.assert_frame_equal(serial, parallel)


def test_aggregates_group_per_config():
    agg = run_sweep(small_config()).aggregates()
    assert len(agg) == 4
    assert (agg["count"] == 2).all()
    assert "error_mean" in agg.columns


# -------------------------------------------------------------
# Fixed graphs
# -------------------------------------------------------------
def test_analyze_fixed_graph_resamples():
    g = random_regular(100, 3, 1)
    result = analyze_fixed_graph(g, k=3, m=2, eta="0.5", resamples=4, seed=7)
    frame = result.frame()
    assert frame["resample"].tolist() == [0, 1, 2, 3]
    assert frame["trial"].eq(0).all()
    assert frame["r"].isna().all()


def test_analyze_fixed_graph_validation():
    g = random_regular(20, 3, 1)
    with pytest.raises(ParameterError):
        analyze_fixed_graph(g, k=30, m=0, eta="0.5")
    with pytest.raises(ParameterError):
        analyze_fixed_graph(g, k=1, m=0, eta="0.5", resamples=0)


def test_fixed_graph_sweep_covers_grid():
    g = random_regular(100, 3, 1)
    cfg = small_config(anchor_resamples=3)
    frame = run_fixed_graph_sweep(g, cfg).frame()
    assert len(frame) == len(cfg.points()) * 3
    assert (frame["n"] == 100).all()


def test_diagnose_fixed_graph_rows():
    g = random_regular(200, 3, 4)
    rows = diagnose_fixed_graph(g, k=1, m=1, eta="2.0", resamples=2, seed=1)
    assert rows["cutoff"].tolist() == [2, 3, 10, 2, 3, 10]
    assert rows["inequality_ok"].all()
    assert (rows["refined_ok"] != False).all()  # noqa: E712


# -------------------------------------------------------------
# Thresholds
# -------------------------------------------------------------
def test_k_emp_smallest_passing_k():
    frame = synthetic_frame({1: [0.6, 0.5], 2: [0.3, 0.2], 4: [0.1, 0.05], 6: [0.0, 0.01]})
    assert k_emp(frame, 500, 0, "0.1") == 4


def test_k_emp_none_when_nothing_passes():
    frame = synthetic_frame({1: [0.6], 2: [0.3]})
    assert k_emp(frame, 500, 0, "0.1") is None


def test_k_emp_missing_grid():
    with pytest.raises(ParameterError):
        k_emp(synthetic_frame({1: [0.6]}), 500, 5, "0.1")


def test_k_emp_eta_matches_by_value():
    frame = synthetic_frame({1: [0.05]}, eta="0.10")
    assert k_emp(frame, 500, 0, "0.1") == 1


def test_k_emp_consistency_on_sweep():
    result = run_sweep(small_config(k_list=[1, 2, 3, 4], m_list=[0], trials=3))
    frame = result.frame()
    kk = k_emp(result, 60, 0, "0.5", threshold=0.3)
    means = frame.groupby("k")["error"].mean()
    below = means[means.index < (kk if kk is not None else math.inf)]
    assert (below > 0.3).all()


def test_threshold_table_columns():
    table = threshold_table(synthetic_frame({1: [0.5], 6: [0.05]}))
    assert list(table.columns) == THRESHOLD_COLUMNS
    assert table[["r", "quantizer", "scaled"]].iloc[0].tolist() == [3, "relative", "true"]
    assert table["k_emp"].iloc[0] == 6
    assert round(table["rho_emp"].iloc[0], 3) == 1.764
    assert table["image_frac"].iloc[0] == pytest.approx(0.95)


def test_threshold_keeps_quantization_protocols_apart():
    absolute = synthetic_frame({1: [0.5], 2: [0.05]}, quantizer="absolute")
    relative = synthetic_frame({1: [0.05], 2: [0.0]}, quantizer="relative")
    table = threshold_table(pd.concat([absolute, relative], ignore_index=True))
    assert len(table) == 2
    assert dict(zip(table["quantizer"], table["k_emp"])) == {"absolute": 2, "relative": 1}


def test_threshold_table_reports_spectral_code_ratio():
    result = run_sweep(small_config(k_list=[0, 1, 2, 3], m_list=[2], trials=1))
    table = threshold_table(result, threshold=1.0)
    frame = result.frame()
    assert table["spectral_code_ratio"].iloc[0] == pytest.approx(frame["codebook_size"][frame["k"] == 0].mean() / 60)


@pytest.mark.parametrize("threshold", [0, -0.1, 1.5])
def test_threshold_range_rejected(threshold):
    frame = synthetic_frame({1: [0.5], 6: [0.05]})
    with pytest.raises(ParameterError):
        k_emp(frame, 500, 0, "0.1", threshold=threshold)
    with pytest.raises(ParameterError):
        threshold_table(frame, threshold)


def test_threshold_one_accepts_smallest_k():
    frame = synthetic_frame({2: [0.99], 4: [0.5]})
    assert k_emp(frame, 500, 0, "0.1", threshold=1.0) == 2
    assert threshold_table(frame, 1.0)["k_emp"].iloc[0] == 2


def test_resample_robustness():
    cfg = small_config(k_list=[1], m_list=[0], trials=2, anchor_resamples=3)
    summary = resample_robustness(run_sweep(cfg))
    assert len(summary) == 1
    assert summary["max_within_range"].iloc[0] >= summary["mean_within_range"].iloc[0] >= 0


# -------------------------------------------------------------
# CSV
# -------------------------------------------------------------
@pytest.mark.parametrize(
    "value, text",
    [(None, "n/a"), (True, "true"), (False, "false"), (3, "3"), (0.1, "0.10000000000000001"),
     (float("nan"), "n/a"), (float("inf"), "inf"), ("0.5", "0.5"), (np.int64(7), "7")],
)
def test_format_cell(value, text):
    assert format_cell(value) == text


def test_empty_result_writes_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    write_csv(SweepResult([]), out)
    assert out.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_csv_rows_and_determinism(tmp_path):
    cfg = small_config(k_list=[2], m_list=[1], trials=2)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_sweep(cfg), first)
    write_csv(run_sweep(small_config(k_list=[2], m_list=[1], trials=2)), second)
    lines = first.read_text().splitlines()
    assert len(lines) == 3
    assert first.read_bytes() == second.read_bytes()
    assert lines[1].split(",")[CSV_COLUMNS.index("wall_time_ms")] == "n/a"


def test_csv_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        write_csv(SweepResult([]), tmp_path / "missing" / "out.csv")


# -------------------------------------------------------------
# Acceptance runs
# -------------------------------------------------------------
@pytest.mark.slow
def test_distance_only_threshold_at_n500():
    cfg = SweepConfig(n_list=[500], k_list=[1, 2, 3, 4, 6, 8], m_list=[0, 5], eta_list=["0.9", "0.1"], trials=5,
                      quantizer="absolute")
    result = run_sweep(cfg)
    assert k_emp(result, 500, 0, "0.1") == 6
    assert k_emp(result, 500, 0, "0.9") == 6
    assert k_emp(result, 500, 5, "0.1") == 1
    frame = result.frame()
    at_six = frame[(frame["k"] == 6) & (frame["m"] == 0)]
    assert at_six["error"].mean() <= 0.1


@pytest.mark.slow
def test_error_non_increasing_in_k():
    cfg = SweepConfig(n_list=[500], k_list=[1, 2, 3, 4, 6], m_list=[0], eta_list=["0.5"], trials=20)
    means = run_sweep(cfg).frame().groupby("k")["error"].mean().sort_index().tolist()
    assert all(b <= a + 0.05 for a, b in zip(means, means[1:]))


@pytest.mark.slow
@pytest.mark.parametrize("n", [500, 1000])
def test_ablation_ordering(n):
    cfg = SweepConfig(
        n_list=[n], k_list=[1, 2, 4], m_list=[0, 2, 5], eta_list=["0.5", "0.1"], trials=5, quantizer="relative",
        features=["nope", "distance", "spectral", "full"],
    )
    means = run_sweep(cfg).frame().groupby("feature")["error"].mean()
    assert means["full"] < means["distance"] < means["spectral"] < means["nope"]


@pytest.mark.slow
def test_bucketwise_regimes_at_n2000():
    cfg = SweepConfig(
        n_list=[2000], k_list=[2], m_list=[1, 2, 5], eta_list=["2.0", "1.0", "0.3"], trials=5, anchor_resamples=5,
        quantizer="absolute", m_eta_pairs=[(1, "2.0"), (2, "1.0"), (5, "0.3")],
    )
    means = run_sweep(cfg).frame().groupby("m")[["error", "weighted_collision"]].mean()
    errors = means["error"].tolist()
    assert errors == pytest.approx([0.89, 0.70, 0.02], abs=0.1)
    assert errors[0] > errors[1] > errors[2]
    collisions = means["weighted_collision"].tolist()
    assert collisions[0] > collisions[1] > collisions[2]
    assert collisions[2] < 0.01


@pytest.mark.slow
def test_unscaled_absolute_error_shrinks_with_eta():
    etas = ["5e-3", "2e-3", "1e-3", "5e-4", "2e-4"]
    cfg = SweepConfig(n_list=[1000], k_list=[4], m_list=[10], eta_list=etas, trials=3, quantizer="absolute",
                      scaled=False)
    frame = run_sweep(cfg).frame()
    frame["eta_value"] = frame["eta"].astype(float)
    errors = frame.groupby("eta_value")["error"].mean().sort_index(ascending=False).tolist()
    assert all(b <= a + 0.01 for a, b in zip(errors, errors[1:]))
    assert errors[0] == pytest.approx(0.1686, rel=0.5)
    assert errors[-1] <= 1e-3
