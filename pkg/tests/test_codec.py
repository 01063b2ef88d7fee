import json
import math

import pytest

from codec import decode_real, encode_real, order_from_doc, order_to_doc, space_from_doc, triple_from_doc, triple_to_doc
from errors import InputError, OrderViolation
from graded_gf2 import OrderInterval, verify_triple
from torus_curves import SlopeCurve, build_floer_scenario


@pytest.mark.parametrize("x, text", [
    (0.25, "0.25"),
    (-3.0, "-3"),
    (math.inf, "inf"),
    (-math.inf, "-inf"),
    (0.1, "0.1000000000000000055511151231257827021181583404541015625"),
])
def test_encode_real(x, text):
    assert encode_real(x) == text
    assert decode_real(text) == x


def test_decode_rejects_garbage():
    with pytest.raises(InputError):
        decode_real("one half")


def test_order_doc_keeps_open_ends():
    doc = order_to_doc(OrderInterval.positive())
    assert doc == {"lo": "0", "hi": "inf", "lo_closed": False, "hi_closed": False}
    assert order_from_doc(doc) == OrderInterval.positive()


def test_space_doc_requires_grades():
    with pytest.raises(InputError):
        space_from_doc({"basis": ["a"], "grades": {}})


def test_triple_document_survives_json():
    L, A, B = SlopeCurve(1, 0), SlopeCurve(0, 1, "13/97"), SlopeCurve(1, -1, "41/97")
    t = build_floer_scenario(L, A, B, 0.25, seed=3, kappa=-0.0078125, differential_density=1.0,
                             perturbation_density=0.3)
    doc = json.loads(json.dumps(triple_to_doc(t), sort_keys=True))
    back = triple_from_doc(doc)
    assert back == t
    assert all(c.passed for c in verify_triple(back))


def test_triple_document_checks_orders():
    L, A, B = SlopeCurve(1, 0), SlopeCurve(0, 1, "13/97"), SlopeCurve(1, 1, "41/97")
    doc = triple_to_doc(build_floer_scenario(L, A, B, 0.25))
    doc["b"]["order"] = order_to_doc(OrderInterval.at_least(1.0))
    with pytest.raises(OrderViolation):
        triple_from_doc(doc)


def test_triple_document_schema_version():
    L, A, B = SlopeCurve(1, 0), SlopeCurve(0, 1, "13/97"), SlopeCurve(1, 1, "41/97")
    doc = triple_to_doc(build_floer_scenario(L, A, B, 0.25))
    doc["schema"] = 7
    with pytest.raises(InputError):
        triple_from_doc(doc)
