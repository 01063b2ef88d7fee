"""JSON-shaped documents for graded spaces, maps and exact triples.

Schema (version 1)::

    space  = {"basis": [label, ...], "grades": {label: decimal-string}}
    order  = {"lo": decimal-string | "-inf", "hi": decimal-string | "inf",
              "lo_closed": bool, "hi_closed": bool}
    map    = {"entries": [[dst_label, src_label], ...], "order": order}
    triple = {"schema": 1, "epsilon": decimal-string, "kappa_total": decimal-string,
              "Cp": {"space": space, "d": map}, "C": {...}, "Cpp": {...},
              "b": map, "c": map, "h": map}

Grades are written with `str(Decimal(x))`, the exact decimal value of the
stored double, so a round trip reproduces every grade bit for bit.
"""
from __future__ import annotations

import math
from decimal import Decimal, InvalidOperation
from typing import Any, Mapping

from errors import InputError
from graded_gf2 import DifferentialSpace, ExactTriple, GradedSpace, OrderInterval, OrderMap

SCHEMA_VERSION = 1


def encode_real(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return str(Decimal(float(x)))


def decode_real(s: Any) -> float:
    if isinstance(s, (int, float)) and not isinstance(s, bool):
        return float(s)
    if s == "inf":
        return math.inf
    if s == "-inf":
        return -math.inf
    try:
        return float(Decimal(str(s)))
    except (InvalidOperation, ValueError) as exc:
        raise InputError(f"not a decimal number: {s!r}") from exc


def space_to_doc(space: GradedSpace) -> dict:
    return {"basis": list(space.basis),
            "grades": {b: encode_real(g) for b, g in zip(space.basis, space.grades)}}


def space_from_doc(doc: Mapping) -> GradedSpace:
    try:
        basis = [str(b) for b in doc["basis"]]
        grades = doc["grades"]
        return GradedSpace(tuple(basis), tuple(decode_real(grades[b]) for b in basis))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed graded space document: {exc}") from exc


def order_to_doc(order: OrderInterval) -> dict:
    return {"lo": encode_real(order.lo), "hi": encode_real(order.hi),
            "lo_closed": order.lo_closed, "hi_closed": order.hi_closed}


def order_from_doc(doc: Mapping) -> OrderInterval:
    try:
        return OrderInterval(decode_real(doc["lo"]), decode_real(doc["hi"]),
                             bool(doc.get("lo_closed", True)), bool(doc.get("hi_closed", False)))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed order document: {exc}") from exc


def map_to_doc(f: OrderMap) -> dict:
    return {"entries": [list(e) for e in sorted(f.entries)], "order": order_to_doc(f.declared_order)}


def map_from_doc(doc: Mapping, src: GradedSpace, dst: GradedSpace) -> OrderMap:
    try:
        entries = frozenset((str(i), str(j)) for i, j in doc.get("entries", []))
        order = order_from_doc(doc["order"]) if "order" in doc else OrderInterval.everything()
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed map document: {exc}") from exc
    return OrderMap(src, dst, entries, order)


def complex_to_doc(D: DifferentialSpace) -> dict:
    return {"space": space_to_doc(D.space), "d": map_to_doc(D.d)}


def complex_from_doc(doc: Mapping) -> DifferentialSpace:
    space = space_from_doc(doc["space"])
    return DifferentialSpace(space, map_from_doc(doc.get("d", {}), space, space))


def triple_to_doc(t: ExactTriple) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "epsilon": encode_real(t.epsilon),
        "kappa_total": encode_real(t.kappa_total),
        "Cp": complex_to_doc(t.Cp),
        "C": complex_to_doc(t.C),
        "Cpp": complex_to_doc(t.Cpp),
        "b": map_to_doc(t.b),
        "c": map_to_doc(t.c),
        "h": map_to_doc(t.h),
    }


def triple_from_doc(doc: Mapping) -> ExactTriple:
    if doc.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise InputError(f"unsupported schema {doc.get('schema')!r}")
    try:
        Cp, C, Cpp = (complex_from_doc(doc[k]) for k in ("Cp", "C", "Cpp"))
        return ExactTriple(
            Cp=Cp, C=C, Cpp=Cpp,
            b=map_from_doc(doc["b"], Cp.space, C.space),
            c=map_from_doc(doc["c"], C.space, Cpp.space),
            h=map_from_doc(doc["h"], Cp.space, Cpp.space),
            epsilon=decode_real(doc["epsilon"]),
            kappa_total=decode_real(doc.get("kappa_total", "0")),
        )
    except KeyError as exc:
        raise InputError(f"triple document lacks {exc}") from exc
