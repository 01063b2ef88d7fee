import logging
import math
from dataclasses import replace
from fractions import Fraction

import pandas as pd
import pytest

from codec import triple_from_doc
from config import ScenarioConfig
from errors import ConditionsUnsatisfiable, InvalidParameter
from graded_gf2 import all_passed, long_exact_ranks, verify_triple
from local_model import TwistProfile
from scenario import (FAIL, MODELED, PASS, ConditionResult, check_conditions, equally_spaced_framing,
                      p_offsets_from_local_model, quantized_kappa, recheck_triple, run_exact_sequence,
                      run_local_checks, scan_exact_sequences, scan_triples, summarize_scan, torus_scan)
from torus_curves import SlopeCurve, generic_triple, intersection_book, p_label, rank_consistency

CFG = ScenarioConfig()
P = TwistProfile(CFG.twist_r, CFG.twist_lambda)
ANTIPODES = {("x0_0", "x1_0"): math.pi}


def test_quantized_kappa_rounds_toward_zero():
    assert quantized_kappa(P) == -80 / 1024
    assert -2 * math.pi * P.r / 4 <= quantized_kappa(P) <= 0


# ---------------------- conditions ----------------------

def test_conditions_hold_for_separated_actions():
    report = check_conditions(CFG, {"q_0": -1.5, "x0_0": 0.0, "x1_0": 0.0}, ANTIPODES, P)
    assert report.ok
    assert report.get("IV").status == MODELED
    assert {r.condition for r in report.results} >= {"I", "II.q-gap", "II.sum-gap", "II.separation-5e", "III",
                                                     "V", "derived.separation-4e"}


def test_conditions_report_witnesses():
    report = check_conditions(CFG, {"q_0": -0.5, "q_1": 0.0, "x0_0": 0.0, "x1_0": 0.0}, ANTIPODES, P)
    failed = {r.condition for r in report.failed()}
    assert {"II.q-gap", "II.separation-5e", "derived.separation-4e"} <= failed
    assert all(r.witness for r in report.failed())
    assert "q_0" in report.get("II.q-gap").witness


def test_condition_three_needs_separated_base_points():
    report = check_conditions(CFG, {}, {("x0_0", "x1_0"): 0.1}, P)
    assert report.get("III").status == FAIL
    assert "x0_0" in report.get("III").witness


def test_condition_five_bounds_the_profile():
    report = check_conditions(replace(CFG, epsilon=0.05), {}, ANTIPODES, P)
    assert report.get("V").status == FAIL
    assert report.get("I").status == PASS


def test_failed_condition_needs_witness():
    with pytest.raises(ValueError):
        ConditionResult("III", FAIL)


# ---------------------- framing and offsets ----------------------

def test_default_framing_is_antipodal():
    book = intersection_book(CFG.L, CFG.L0, CFG.L1)
    framing = equally_spaced_framing(book)
    assert framing.distances == {("x0_0", "x1_0"): math.pi}
    offsets, antipodes = p_offsets_from_local_model(book, framing, P, CFG.delta)
    assert offsets == {("x0_0", "x1_0"): 0.0}
    assert antipodes == [p_label("x0_0", "x1_0")]


def test_offsets_from_fibre_intersections():
    book = intersection_book(CFG.L, CFG.L0, SlopeCurve(1, 2, Fraction(41, 97)))
    framing = equally_spaced_framing(book)
    assert framing.min_distance == pytest.approx(2 * math.pi / 3)
    offsets, antipodes = p_offsets_from_local_model(book, framing, P, CFG.delta)
    assert len(offsets) == 2 and antipodes == []
    for value in offsets.values():
        assert 0 <= value <= -2 * math.pi * float(P.R(0.0))
        assert (value * 1024).is_integer()


@pytest.mark.parametrize("excess, expected", [(1e-14, 0.0), (-0.01, 0.009765625)])
def test_offsets_clamp_only_rounding_noise(monkeypatch, excess, expected):
    book = intersection_book(CFG.L, CFG.L0, SlopeCurve(1, 2, Fraction(41, 97)))
    bound = -2 * math.pi * float(P.R(0.0))
    monkeypatch.setattr("scenario.twist_moment", lambda profile, y: bound + excess)
    offsets, _ = p_offsets_from_local_model(book, equally_spaced_framing(book), P, CFG.delta)
    assert set(offsets.values()) == {expected}


def test_offsets_reject_moment_past_bound(monkeypatch):
    book = intersection_book(CFG.L, CFG.L0, SlopeCurve(1, 2, Fraction(41, 97)))
    bound = -2 * math.pi * float(P.R(0.0))
    monkeypatch.setattr("scenario.twist_moment", lambda profile, y: bound + 0.5)
    with pytest.raises(InvalidParameter, match="K exceeds"):
        p_offsets_from_local_model(book, equally_spaced_framing(book), P, CFG.delta)


# ---------------------- end-to-end ----------------------

def test_default_run_passes():
    report = run_exact_sequence(CFG)
    assert report["status"] == PASS, report["failures"]
    assert report["dimensions"] == {"Cp": 1, "C": 2, "Cpp": 1}
    assert report["rank_consistency"] == {"lhs": 2, "rhs_sum": 2, "conn_rank": 0}
    assert report["ranks"]["rank_conn"] == 0
    assert report["decomposition"]["n_pl"] == 2
    assert report["kappa_total"] == "-0.078125"
    assert report["p_offsets"] == {p_label("x0_0", "x1_0"): "0"}
    assert report["antipodal_points"] == [p_label("x0_0", "x1_0")]
    assert report["spectral_vanishing"] == "Vanishes"
    assert all(check["passed"] for check in report["cross_checks"])
    assert report["homotopy_order"] == "(0;inf)"


def test_report_carries_its_triple():
    report = run_exact_sequence(replace(CFG, L1=SlopeCurve(1, -1, Fraction(41, 97))))
    t = triple_from_doc(report["triple"])
    assert all_passed(verify_triple(t))
    assert long_exact_ranks(t).rank_conn == report["ranks"]["rank_conn"] == 1
    assert recheck_triple(report["triple"]) == []


def test_run_is_deterministic():
    assert run_exact_sequence(CFG) == run_exact_sequence(CFG)


def test_run_with_connecting_map():
    report = run_exact_sequence(replace(CFG, L1=SlopeCurve(1, -1, Fraction(41, 97))))
    assert report["status"] == PASS, report["failures"]
    assert report["ranks"]["rank_conn"] == report["rank_consistency"]["conn_rank"] == 1


def test_run_rejects_crowded_base_points():
    cfg = replace(CFG, L1=SlopeCurve(1, 4, Fraction(41, 97)), delta=0.3)
    with pytest.raises(ConditionsUnsatisfiable) as exc:
        run_exact_sequence(cfg)
    assert exc.value.condition == "III"


def test_run_rejects_large_profile():
    with pytest.raises(ConditionsUnsatisfiable) as exc:
        run_exact_sequence(replace(CFG, epsilon=0.05))
    assert exc.value.condition == "V"


# ---------------------- scans ----------------------

def test_scan_triples_counts_permutations():
    assert len(scan_triples(1)) == 4 * 3 * 2


def test_torus_scan_small_bound():
    df = torus_scan(replace(CFG, max_slope=1), pl_bound=1)
    summary = summarize_scan(df)
    assert summary["triples"] == 24
    assert summary["conn_rank_negative"] == 0
    assert summary["decomposition_counted"] == 24
    assert summary["decomposition_failures"] == 0
    assert (df["lhs"] - df["rhs_sum"] + 2 * df["conn_rank"] == 0).all()


def test_torus_scan_with_workers_keeps_order():
    cfg = replace(CFG, max_slope=1)
    pd.testing.assert_frame_equal(torus_scan(cfg, jobs=1), torus_scan(cfg, jobs=2))


def test_large_single_worker_scan_warns(monkeypatch, caplog):
    monkeypatch.setattr("scenario.scan_triples", lambda bound: [((1, 0), (0, 1), (1, 1))] * 1001)
    monkeypatch.setattr("scenario._map", lambda fn, jobs, workers: [])
    with caplog.at_level(logging.WARNING, logger="scenario"):
        scan_exact_sequences(CFG)
    assert "1001 triples on a single worker" in caplog.text


def test_exact_sequence_scan_small_bound():
    df = scan_exact_sequences(replace(CFG, max_slope=1))
    summary = summarize_scan(df)
    assert summary["triples"] == 24
    assert summary["failures"] == 0, df[df["status"] != PASS][["L", "L0", "L1", "failure"]]
    assert (df["rank_conn"] == df["conn_rank"]).all()


@pytest.mark.slow
def test_exact_sequence_across_seeds():
    for dirs in scan_triples(1)[:10]:
        L, A, B = generic_triple(SlopeCurve(*dirs[0], CFG.L.offset), SlopeCurve(*dirs[1], CFG.L0.offset),
                                 SlopeCurve(*dirs[2], CFG.L1.offset))
        expected = rank_consistency(L, A, B).conn_rank
        for seed in range(100):
            report = run_exact_sequence(replace(CFG, L=L, L0=A, L1=B, seed=seed), adapt_delta=True)
            assert report["status"] == PASS, (str(L), str(A), str(B), seed, report["failures"])
            assert report["ranks"]["rank_conn"] == expected


# ---------------------- local model ----------------------

def test_local_checks_pass():
    report = run_local_checks(replace(CFG, local_samples=40))
    assert report["status"] == PASS, report["failures"]
    assert report["fibre_cases"] > 0
    assert {row["check"] for row in report["checks"]} >= {"symplectic defect", "fibre residual",
                                                          "q(w(z)) - z", "phi closed form"}
