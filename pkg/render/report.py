from __future__ import annotations

import json
from typing import Any

import pandas as pd

from .utils import fmt_bool


def render_json(doc: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _section(title: str) -> list[str]:
    return ["", title, "-" * len(title)]


def render_exact_sequence_text(report: dict) -> str:
    curves = report["curves"]
    lines = [f"Exact sequence for L={curves['L']}  L0={curves['L0']}  L1={curves['L1']}",
             f"epsilon={report['epsilon']}  delta={report['delta']}  seed={report['seed']}  "
             f"kappa_total={report['kappa_total']}"]

    lines += _section("Conditions")
    for row in report["conditions"]:
        suffix = f"  ({row['witness']})" if row.get("witness") else ""
        lines.append(f"  {row['condition']:<24} {row['status']}{suffix}")

    lines += _section("Complexes")
    dims = report["dimensions"]
    lines.append(f"  dim C'={dims['Cp']}  dim C={dims['C']}  dim C''={dims['Cpp']}  "
                 f"higher terms={'yes' if report['higher_terms'] else 'no'}")
    if report["antipodal_points"]:
        lines.append(f"  antipodal p-points: {', '.join(report['antipodal_points'])}")
    lines.append(f"  homotopy order: {report['homotopy_order']}")

    lines += _section("Triple checks")
    for check in report["triple_checks"]:
        lines.append(f"  [{fmt_bool(check['passed']):>4}] {check['name']}")

    lines += _section("Ranks")
    r = report["ranks"]
    lines.append(f"  H(C')={r['hP']}  H(C)={r['hC']}  H(C'')={r['hPP']}  "
                 f"rank b={r['rank_b']}  rank c={r['rank_c']}  rank connecting={r['rank_conn']}")
    rc = report["rank_consistency"]
    lines.append(f"  torus model: |L0.L1|={rc['lhs']}  |L.L1||L0.L|={rc['rhs_sum']}  connecting={rc['conn_rank']}")
    dec = report["decomposition"]
    lines.append(f"  PL twist: n_pl={dec['n_pl']} = n_q {dec['n_q']} + n_p {dec['n_p']}  (width {dec['width']})")
    lines.append(f"  spectral sequence: {report['spectral_vanishing']}  (gap blocks: {report['gap_blocks']})")

    lines += _section("Cross checks")
    for check in report["cross_checks"]:
        lines.append(f"  [{fmt_bool(check['passed']):>4}] {check['name']}")

    lines.append("")
    lines.append(f"Status: {report['status']}")
    for failure in report["failures"]:
        lines.append(f"  - {failure}")
    return "\n".join(lines) + "\n"


def render_local_text(report: dict) -> str:
    lines = [f"Local model checks  n={report['dimension']}  r={report['twist']['r']}  "
             f"lambda={report['twist']['lambda']}  delta={report['delta']}  samples={report['samples']}"]
    table = pd.DataFrame(report["checks"], columns=["check", "worst", "bound", "passed"])
    table["passed"] = table["passed"].map(fmt_bool)
    lines.append(table.to_string(index=False))
    for flag in report["flags"]:
        lines.append(f"  [{fmt_bool(flag['passed']):>4}] {flag['name']}")
    lines.append(f"fibre intersections solved: {report['fibre_cases']}")
    lines.append(f"Status: {report['status']}")
    for failure in report["failures"]:
        lines.append(f"  - {failure}")
    return "\n".join(lines) + "\n"


def is_scan_doc(report: dict) -> bool:
    return "rows" in report and "summary" in report


def render_text(report: dict) -> str:
    if is_scan_doc(report):
        df, summary = scan_from_doc(report)
        return _render_scan_text(df, summary)
    if "checks" in report and "dimension" in report:
        return render_local_text(report)
    return render_exact_sequence_text(report)


def scan_to_doc(df: pd.DataFrame, summary: dict) -> dict:
    rows = df.astype(object).where(pd.notna(df), None).to_dict(orient="records")
    return {"schema": 1, "summary": summary, "rows": rows}


def scan_from_doc(doc: dict) -> tuple[pd.DataFrame, dict]:
    """Inverse of scan_to_doc; column order follows the first row."""
    rows = doc["rows"]
    columns = list(rows[0]) if rows else None
    return pd.DataFrame(rows, columns=columns), dict(doc["summary"])


def render_scan(df: pd.DataFrame, summary: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return render_json(scan_to_doc(df, summary))
    return _render_scan_text(df, summary)


def _render_scan_text(df: pd.DataFrame, summary: dict) -> str:
    lines = []
    if not df.empty:
        lines.append(df.to_string(index=False))
    lines += _section("Summary")
    for key in sorted(summary):
        lines.append(f"  {key}: {summary[key]}")
    return "\n".join(lines) + "\n"
