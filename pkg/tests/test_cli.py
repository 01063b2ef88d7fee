import json

import pytest

import check_exact_sequence as cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_les_json_is_reproducible(capsys):
    code, first, _ = _run(capsys, "verify-les", "--format", "json")
    assert code == 0
    code, second, _ = _run(capsys, "verify-les", "--format", "json")
    assert code == 0
    assert first == second
    report = json.loads(first)
    assert report["status"] == "pass"
    assert report["curves"] == {"L": "(1,0)+0", "L0": "(0,1)+13/97", "L1": "(1,1)+41/97"}


def test_verify_les_text(capsys):
    code, out, _ = _run(capsys, "verify-les", "--seed", "3")
    assert code == 0
    assert "Status: pass" in out
    assert "seed=3" in out


def test_scan_help_states_its_size(capsys):
    code, out, _ = _run(capsys, "verify-les", "--help")
    assert code == 0
    assert "3360" in out and "--jobs" in out


def test_malformed_config_exits_with_usage(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"epsilon": "wide"}', encoding="utf-8")
    code, out, err = _run(capsys, "verify-les", "--config", str(cfg))
    assert code == 2
    assert out == ""
    assert "epsilon" in err and "usage" in err


def test_bad_cli_value_exits_two(capsys):
    code, _, _ = _run(capsys, "verify-les", "--delta", "0.7")
    assert code == 2
    code, _, _ = _run(capsys, "no-such-command")
    assert code == 2


def test_unsatisfiable_conditions_exit_one(capsys):
    code, out, err = _run(capsys, "verify-les", "--epsilon", "0.05")
    assert code == 1
    assert "condition V" in err


def test_torus_scan_json(capsys):
    code, out, _ = _run(capsys, "torus-scan", "--max-slope", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["triples"] == 24
    assert doc["summary"]["conn_rank_negative"] == 0
    assert len(doc["rows"]) == 24


def test_local_check_from_config(tmp_path, capsys):
    cfg = tmp_path / "local.json"
    cfg.write_text(json.dumps({"local_samples": 20}), encoding="utf-8")
    code, out, _ = _run(capsys, "local-check", "--config", str(cfg))
    assert code == 0
    assert "Status: pass" in out
    assert "symplectic defect" in out


def test_report_render_round_trip(tmp_path, capsys):
    saved = tmp_path / "report.json"
    code, _, _ = _run(capsys, "verify-les", "--format", "json", "--out", str(saved))
    assert code == 0
    code, out, _ = _run(capsys, "report-render", str(saved))
    assert code == 0
    assert out.startswith("Exact sequence for L=(1,0)+0")
    code, out, _ = _run(capsys, "report-render", str(saved), "--format", "json")
    assert code == 0
    assert out == saved.read_text(encoding="utf-8")


@pytest.mark.parametrize("argv", [
    ("torus-scan", "--max-slope", "1"),
    ("verify-les", "--scan", "--max-slope", "1"),
])
def test_report_render_reads_scan_documents(tmp_path, capsys, argv):
    saved = tmp_path / "scan.json"
    code, _, _ = _run(capsys, *argv, "--format", "json", "--out", str(saved))
    assert code == 0
    code, out, _ = _run(capsys, "report-render", str(saved))
    assert code == 0
    assert "Summary" in out
    assert "triples: 24" in out
    assert "(1,0)+0" in out
    code, out, _ = _run(capsys, "report-render", str(saved), "--format", "json")
    assert code == 0
    assert out == saved.read_text(encoding="utf-8")


def test_report_render_exit_code_follows_scan_summary(tmp_path, capsys):
    saved = tmp_path / "scan.json"
    saved.write_text(json.dumps({"schema": 1, "summary": {"triples": 1, "conn_rank_negative": 1},
                                 "rows": [{"L": "(1,0)+0", "conn_rank": -1}]}), encoding="utf-8")
    code, out, _ = _run(capsys, "report-render", str(saved))
    assert code == 1
    assert "conn_rank_negative: 1" in out


def test_report_render_verifies_saved_triple(tmp_path, capsys):
    saved = tmp_path / "report.json"
    code, _, _ = _run(capsys, "verify-les", "--format", "json", "--out", str(saved))
    assert code == 0
    report = json.loads(saved.read_text(encoding="utf-8"))
    report["triple"]["b"]["entries"] = []
    saved.write_text(json.dumps(report), encoding="utf-8")
    code, _, err = _run(capsys, "report-render", str(saved))
    assert code == 1
    assert "Saved triple fails beta injective" in err


def test_report_render_rejects_other_documents(tmp_path, capsys):
    stray = tmp_path / "stray.json"
    stray.write_text('{"schema": 3}', encoding="utf-8")
    code, _, _ = _run(capsys, "report-render", str(stray))
    assert code == 2


@pytest.mark.parametrize("command", ["verify-les", "report-render"])
def test_svg_is_written(tmp_path, capsys, command):
    saved = tmp_path / "report.json"
    picture = tmp_path / "curves.svg"
    _run(capsys, "verify-les", "--format", "json", "--out", str(saved))
    argv = ["verify-les"] if command == "verify-les" else ["report-render", str(saved)]
    code, _, _ = _run(capsys, *argv, "--svg", str(picture))
    assert code == 0
    text = picture.read_text(encoding="utf-8")
    assert "<svg" in text
    assert "13/97" in text
