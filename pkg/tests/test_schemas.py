from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest

from corank_ss.corank import hilbert_example, run
from corank_ss.cosheaf import Cosheaf
from corank_ss.fixtures import all_fixtures, mixed_twisted, quadrant_cone
from corank_ss.schemas import (
    SchemaError,
    complex_from_json,
    complex_to_json,
    corank_from_json,
    corank_result_to_json,
    corank_to_json,
    cosheaf_from_json,
    cosheaf_to_json,
    dumps,
    facepair_from_json,
    facepair_to_json,
    load_any,
    page_to_json,
)
from generators import BETTI

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_complex_round_trip():
    for mk, _ in BETTI.values():
        d = mk()
        assert complex_from_json(json.loads(dumps(complex_to_json(d)))) == d


def test_cosheaf_round_trip_keeps_rationals():
    f = mixed_twisted().cusps[0].cosheaves[0]
    doc = json.loads(dumps(cosheaf_to_json(f)))
    g = cosheaf_from_json(doc)
    assert g.dims == f.dims and g.ext == f.ext
    assert dumps(cosheaf_to_json(g)) == dumps(doc)


def test_corank_and_facepair_round_trip():
    for inp in (hilbert_example(2, 3), mixed_twisted()):
        doc = corank_to_json(inp)
        assert corank_to_json(corank_from_json(json.loads(dumps(doc)))) == doc
    fp = facepair_to_json(quadrant_cone())
    back = facepair_from_json(json.loads(dumps(fp)))
    assert facepair_to_json(back) == fp


def test_unknown_fields_rejected():
    doc = complex_to_json(BETTI["circle"][0]())
    doc["colour"] = "red"
    with pytest.raises(SchemaError, match="colour"):
        complex_from_json(doc)
    c = corank_to_json(hilbert_example(1, 3))
    c["cusps"][0]["extra"] = 1
    with pytest.raises(SchemaError):
        corank_from_json(c)


def test_version_mismatch_names_expected():
    doc = cosheaf_to_json(Cosheaf.constant(BETTI["circle"][0]()))
    doc["version"] = "cosheaf.v9"
    with pytest.raises(SchemaError, match="cosheaf.v1"):
        cosheaf_from_json(doc)
    with pytest.raises(SchemaError, match="expected version"):
        load_any(doc)
    with pytest.raises(SchemaError):
        load_any([1, 2])


def test_floats_rejected():
    doc = cosheaf_to_json(Cosheaf.constant(BETTI["circle"][0]()))
    doc["ext"][0]["entries"] = [[0, 0, 0.5]]
    with pytest.raises(SchemaError):
        cosheaf_from_json(doc)
    doc["ext"][0]["entries"] = [[0, 0, "1/2"]]
    assert cosheaf_from_json(doc).ext[(1, 0)][0, 0] == Fraction(1, 2)


def test_load_any_dispatch():
    v, obj = load_any(corank_to_json(hilbert_example(1, 3)))
    assert v == "corank.v1" and len(obj.cusps) == 1
    v, _ = load_any(facepair_to_json(quadrant_cone()))
    assert v == "facepair.v1"


def test_reports_are_plain_json():
    res = run(hilbert_example(1, 3))
    doc = corank_result_to_json(res)
    assert doc["version"] == "corankresult.v1"
    assert json.loads(dumps(doc)) == doc
    pg = page_to_json(res.levels[0].ss.page(1), indexing="ij")
    assert pg["version"] == "page.v1"
    assert json.loads(dumps(pg)) == pg


def test_shipped_fixtures_match_builders():
    built = all_fixtures()
    shipped = sorted(p.name for p in FIXTURES.glob("*.json"))
    assert shipped == sorted(built)
    for name, doc in built.items():
        assert (FIXTURES / name).read_text(encoding="utf-8") == dumps(doc)
