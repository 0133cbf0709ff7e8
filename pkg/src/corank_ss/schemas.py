"""Versioned JSON formats for inputs and reports.

Inputs: ``complex.v1``, ``cosheaf.v1``, ``facepair.v1``, ``corank.v1``.
Reports: ``page.v1``, ``corankresult.v1``.  Rationals are written as strings
(``"3"``, ``"-1/2"``); unknown fields are rejected.  Output is deterministic:
keys are sorted and lists follow cell or cusp order.
"""
from __future__ import annotations

import enum
import json
from fractions import Fraction
from typing import Any, Mapping

from .complex import Cell, DeltaComplex, SimplicialComplex, SubcomplexMask
from .corank import Augmentation, CorankInput, CorankResult, Cusp, cork_dims
from .cosheaf import Cosheaf
from .exactlinalg import Matrix, rank
from .retraction import FacePairInput
from .spectral import Page

__all__ = [
    "SchemaError",
    "dumps",
    "load_any",
    "complex_to_json",
    "complex_from_json",
    "cosheaf_to_json",
    "cosheaf_from_json",
    "facepair_to_json",
    "facepair_from_json",
    "corank_to_json",
    "corank_from_json",
    "page_to_json",
    "corank_result_to_json",
    "jsonable",
]


class SchemaError(ValueError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _q(x) -> str:
    return str(Fraction(x))


def _parse_q(x, where: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise SchemaError(f"{where}: rationals must be integers or strings, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"{where}: bad rational {x!r}") from None
    raise SchemaError(f"{where}: bad rational {x!r}")


def _obj(d, where: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(d, dict):
        raise SchemaError(f"{where}: expected an object")
    extra = sorted(set(d) - required - set(optional))
    if extra:
        raise SchemaError(f"{where}: unknown field(s) {extra}")
    missing = sorted(required - set(d))
    if missing:
        raise SchemaError(f"{where}: missing field(s) {missing}")
    return d


def _version(d, expected: str) -> None:
    if not isinstance(d, dict):
        raise SchemaError(f"expected a JSON object with version {expected!r}")
    v = d.get("version")
    if v != expected:
        raise SchemaError(f"expected version {expected!r}, got {v!r}")


def _int(x, where: str, lo: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(f"{where}: expected an integer, got {x!r}")
    if lo is not None and x < lo:
        raise SchemaError(f"{where}: must be at least {lo}")
    return x


def _int_list(x, where: str) -> list[int]:
    if not isinstance(x, list):
        raise SchemaError(f"{where}: expected a list")
    return [_int(v, f"{where}[{i}]") for i, v in enumerate(x)]


def _label_to_json(label):
    if label is None:
        return None
    if isinstance(label, tuple):
        return [_label_to_json(x) for x in label]
    return label


def _label_from_json(x):
    if isinstance(x, list):
        return tuple(_label_from_json(v) for v in x)
    return x


def matrix_to_json(m: Matrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "entries": [[i, j, _q(v)] for (i, j), v in sorted(m.items())]}


def matrix_from_json(d, where: str, extra: set[str] = frozenset()) -> Matrix:
    _obj(d, where, {"rows", "cols", "entries"}, extra)
    rows = _int(d["rows"], f"{where}.rows", 0)
    cols = _int(d["cols"], f"{where}.cols", 0)
    e = {}
    if not isinstance(d["entries"], list):
        raise SchemaError(f"{where}.entries: expected a list")
    for k, t in enumerate(d["entries"]):
        if not isinstance(t, list) or len(t) != 3:
            raise SchemaError(f"{where}.entries[{k}]: expected [row, col, value]")
        i, j = _int(t[0], f"{where}.entries[{k}]", 0), _int(t[1], f"{where}.entries[{k}]", 0)
        if i >= rows or j >= cols:
            raise SchemaError(f"{where}.entries[{k}]: index ({i}, {j}) outside {rows}x{cols}")
        if (i, j) in e:
            raise SchemaError(f"{where}.entries[{k}]: duplicate entry ({i}, {j})")
        e[(i, j)] = _parse_q(t[2], f"{where}.entries[{k}]")
    return Matrix(rows, cols, e)


# complex.v1


def complex_to_json(d: DeltaComplex, version: bool = True) -> dict:
    cells = []
    for c in d.cells:
        item = {"dim": c.dim, "verts": list(c.verts), "faces": list(c.faces)}
        if c.label is not None:
            item["label"] = _label_to_json(c.label)
        cells.append(item)
    out = {"vertices": list(d.vertices), "cells": cells}
    if d.masks:
        out["masks"] = {k: sorted(m.member) for k, m in sorted(d.masks.items())}
    if version:
        out["version"] = "complex.v1"
    return out


def complex_from_json(d, where: str = "complex", versioned: bool = True) -> DeltaComplex:
    if versioned:
        _version(d, "complex.v1")
    _obj(d, where, {"vertices", "cells"}, {"masks", "version"})
    vertices = _int_list(d["vertices"], f"{where}.vertices")
    if not isinstance(d["cells"], list):
        raise SchemaError(f"{where}.cells: expected a list")
    cells = []
    for i, c in enumerate(d["cells"]):
        w = f"{where}.cells[{i}]"
        _obj(c, w, {"dim", "verts", "faces"}, {"label"})
        dim = _int(c["dim"], f"{w}.dim", 0)
        cells.append(Cell(i, dim, tuple(_int_list(c["verts"], f"{w}.verts")), tuple(_int_list(c["faces"], f"{w}.faces")), _label_from_json(c.get("label"))))
    masks = {}
    raw = d.get("masks", {})
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}.masks: expected an object")
    for name, ids in sorted(raw.items()):
        masks[name] = SubcomplexMask.of(_int_list(ids, f"{where}.masks.{name}"))
    return DeltaComplex(vertices, cells, masks)


# cosheaf.v1


def _ext_to_json(f: Cosheaf) -> list:
    out = []
    for (c, i), m in sorted(f.ext.items()):
        item = matrix_to_json(m)
        item["cell"] = c
        item["face"] = i
        out.append(item)
    return out


def _ext_from_json(raw, where: str) -> dict:
    if not isinstance(raw, list):
        raise SchemaError(f"{where}: expected a list")
    ext = {}
    for k, item in enumerate(raw):
        w = f"{where}[{k}]"
        m = matrix_from_json(item, w, {"cell", "face"})
        if "cell" not in item or "face" not in item:
            raise SchemaError(f"{w}: missing cell or face")
        key = (_int(item["cell"], f"{w}.cell", 0), _int(item["face"], f"{w}.face", 0))
        if key in ext:
            raise SchemaError(f"{w}: duplicate extension map for cell {key[0]}, face {key[1]}")
        ext[key] = m
    return ext


def cosheaf_to_json(f: Cosheaf) -> dict:
    return {"version": "cosheaf.v1", "complex": complex_to_json(f.base, version=False), "dims": list(f.dims), "ext": _ext_to_json(f)}


def cosheaf_from_json(d) -> Cosheaf:
    _version(d, "cosheaf.v1")
    _obj(d, "cosheaf", {"version", "complex", "dims", "ext"})
    base = complex_from_json(d["complex"], "cosheaf.complex", versioned=False)
    dims = _int_list(d["dims"], "cosheaf.dims")
    if len(dims) != len(base):
        raise SchemaError(f"cosheaf.dims: {len(dims)} entries for {len(base)} cells")
    return Cosheaf(base, dims, _ext_from_json(d["ext"], "cosheaf.ext"))


# facepair.v1


def facepair_to_json(inp: FacePairInput) -> dict:
    s = inp.ambient
    out = {
        "version": "facepair.v1",
        "vertices": list(s.vertices),
        "simplices": [list(x) for x in s.maximal()],
        "boundary": [list(x) for x in _maximal(inp.boundary)],
    }
    if s.coords is not None:
        out["coords"] = [[_q(c) for c in s.coords[v]] for v in s.vertices]
    if inp.expected_degree is not None:
        out["expected_degree"] = inp.expected_degree
    return out


def _maximal(simplices) -> list[tuple[int, ...]]:
    ss = set(simplices)
    faces = {x[:i] + x[i + 1:] for x in ss for i in range(len(x)) if len(x) > 1}
    return sorted((x for x in ss if x not in faces), key=lambda x: (len(x), x))


def facepair_from_json(d) -> FacePairInput:
    _version(d, "facepair.v1")
    _obj(d, "facepair", {"version", "vertices", "simplices", "boundary"}, {"coords", "expected_degree"})
    vertices = _int_list(d["vertices"], "facepair.vertices")
    simplices = [_int_list(x, f"facepair.simplices[{i}]") for i, x in enumerate(d["simplices"])]
    boundary = [_int_list(x, f"facepair.boundary[{i}]") for i, x in enumerate(d["boundary"])]
    coords = None
    if "coords" in d:
        if not isinstance(d["coords"], list) or len(d["coords"]) != len(vertices):
            raise SchemaError("facepair.coords: one coordinate list per vertex expected")
        coords = {v: [_parse_q(c, f"facepair.coords[{i}]") for c in row] for i, (v, row) in enumerate(zip(vertices, d["coords"]))}
    try:
        s = SimplicialComplex(vertices, simplices, coords)
        inp = FacePairInput.make(s, boundary)
    except ValueError as e:
        raise SchemaError(f"facepair: {e}") from None
    k = d.get("expected_degree")
    if k is not None:
        inp = FacePairInput(inp.ambient, inp.boundary, _int(k, "facepair.expected_degree", 0))
    return inp


# corank.v1


def _opt_q(x):
    return None if x is None else _q(x)


def corank_to_json(inp: CorankInput) -> dict:
    cusps = []
    for c in inp.cusps:
        item = {
            "label": c.label,
            "corank": c.corank,
            "complex": complex_to_json(c.complex, version=False),
            "boundary": sorted(c.boundary.member),
            "cosheaves": [{"p": p, "dims": list(f.dims), "ext": _ext_to_json(f)} for p, f in sorted(c.cosheaves.items())],
            "gluing": [{"cell": k, "target": t, "target_cell": tc} for k, (t, tc) in sorted(c.gluing.items())],
            "chi_gamma": _opt_q(c.chi_gamma),
            "chi_hol": _opt_q(c.chi_hol),
        }
        if c.augmentation:
            item["augmentation"] = [
                {
                    "p": p,
                    "ambient": a.ambient,
                    "maps": [dict(matrix_to_json(m), cell=cid) for cid, m in sorted(a.maps.items())],
                }
                for p, a in sorted(c.augmentation.items())
            ]
        cusps.append(item)
    return {"version": "corank.v1", "n": inp.n, "r": inp.r, "n_table": list(inp.n_table), "cusps": cusps}


def corank_from_json(d) -> CorankInput:
    _version(d, "corank.v1")
    _obj(d, "corank", {"version", "n", "r", "n_table", "cusps"})
    n = _int(d["n"], "corank.n", 0)
    r = _int(d["r"], "corank.r", 0)
    n_table = tuple(_int_list(d["n_table"], "corank.n_table"))
    if not isinstance(d["cusps"], list):
        raise SchemaError("corank.cusps: expected a list")
    cusps = []
    for k, c in enumerate(d["cusps"]):
        w = f"corank.cusps[{k}]"
        _obj(c, w, {"label", "corank", "complex", "boundary", "cosheaves"}, {"gluing", "chi_gamma", "chi_hol", "augmentation"})
        if not isinstance(c["label"], str):
            raise SchemaError(f"{w}.label: expected a string")
        cx = complex_from_json(c["complex"], f"{w}.complex", versioned=False)
        boundary = SubcomplexMask.of(_int_list(c["boundary"], f"{w}.boundary"))
        sheaves = {}
        for j, item in enumerate(c["cosheaves"]):
            wj = f"{w}.cosheaves[{j}]"
            _obj(item, wj, {"p", "dims", "ext"})
            p = _int(item["p"], f"{wj}.p", 0)
            dims = _int_list(item["dims"], f"{wj}.dims")
            if len(dims) != len(cx):
                raise SchemaError(f"{wj}.dims: {len(dims)} entries for {len(cx)} cells")
            if p in sheaves:
                raise SchemaError(f"{wj}: duplicate level {p}")
            sheaves[p] = Cosheaf(cx, dims, _ext_from_json(item["ext"], f"{wj}.ext"))
        gluing = {}
        for j, g in enumerate(c.get("gluing", [])):
            wj = f"{w}.gluing[{j}]"
            _obj(g, wj, {"cell", "target", "target_cell"})
            cell = _int(g["cell"], f"{wj}.cell", 0)
            if cell in gluing:
                raise SchemaError(f"{wj}: cell {cell} glued twice")
            if not isinstance(g["target"], str):
                raise SchemaError(f"{wj}.target: expected a cusp label")
            gluing[cell] = (g["target"], _int(g["target_cell"], f"{wj}.target_cell", 0))
        aug = {}
        for j, a in enumerate(c.get("augmentation", [])):
            wj = f"{w}.augmentation[{j}]"
            _obj(a, wj, {"p", "ambient", "maps"})
            maps = {}
            for t, m in enumerate(a["maps"]):
                mm = matrix_from_json(m, f"{wj}.maps[{t}]", {"cell"})
                maps[_int(m.get("cell"), f"{wj}.maps[{t}].cell", 0)] = mm
            aug[_int(a["p"], f"{wj}.p", 0)] = Augmentation(_int(a["ambient"], f"{wj}.ambient", 0), maps)
        chi_g = c.get("chi_gamma")
        chi_h = c.get("chi_hol")
        cusps.append(
            Cusp(
                c["label"],
                _int(c["corank"], f"{w}.corank", 0),
                cx,
                boundary,
                sheaves,
                gluing,
                None if chi_g is None else _parse_q(chi_g, f"{w}.chi_gamma"),
                None if chi_h is None else _parse_q(chi_h, f"{w}.chi_hol"),
                aug,
            )
        )
    return CorankInput(n, r, n_table, tuple(cusps))


# reports


def jsonable(x):
    """Plain JSON data from report dictionaries (rationals become strings)."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return _q(x)
    if isinstance(x, enum.Enum):
        return str(x.value)
    if isinstance(x, Matrix):
        return matrix_to_json(x)
    if isinstance(x, Mapping):
        return {",".join(map(str, k)) if isinstance(k, tuple) else str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    raise TypeError(f"cannot serialize {type(x).__name__}")


def page_to_json(page: Page, indexing: str = "pq") -> dict:
    """A page in either filtration coordinates ``(p, q)`` or corank coordinates ``(i, j)``."""
    if indexing == "ij":
        dims = cork_dims(page)
        diffs = {(p, q + 1): m for (p, q), m in page.diffs.items() if not m.is_zero()}
        a, b = "i", "j"
    else:
        dims = page.dims()
        diffs = {k: m for k, m in page.diffs.items() if not m.is_zero()}
        a, b = "p", "q"
    terms = [{a: x, b: y, "dim": d} for (x, y), d in sorted(dims.items())]
    out_diffs = []
    for (x, y), m in sorted(diffs.items()):
        item = matrix_to_json(m)
        item.update({a: x, b: y, "rank": rank(m)})
        out_diffs.append(item)
    return {
        "version": "page.v1",
        "indexing": indexing,
        "r": page.r,
        "euler": page.euler(),
        "terms": terms,
        "differentials": out_diffs,
    }


def corank_result_to_json(res: CorankResult) -> dict:
    inp = res.input
    levels = []
    for p, lv in sorted(res.levels.items()):
        levels.append(
            {
                "p": p,
                "pages": [page_to_json(pg, "ij") for pg in lv.ss.pages],
                "degeneration_page": lv.ss.degeneration_page(),
                "e1_by_cusp": [
                    {"i": i, "j": j, "cusps": [{"label": l, "dim": d} for l, d in v]} for (i, j), v in sorted(lv.e1_by_cusp.items())
                ],
                "einf_by_degree": {str(m): lv.ss.e_inf(m) for m in sorted({i + j for i, j in cork_dims(lv.ss.infinity)})},
                "checks": jsonable(
                    {
                        "cross_check": lv.cross_check,
                        "convergence": lv.convergence,
                        "graded": lv.graded,
                        "iterated": lv.iterated,
                        "shape": lv.shape,
                        "degeneration": lv.degeneration,
                    }
                ),
                "eis": jsonable(lv.eis),
            }
        )
    return {
        "version": "corankresult.v1",
        "n": inp.n,
        "r": inp.r,
        "n_table": list(inp.n_table),
        "dual_complex": complex_to_json(res.dual, version=False),
        "filtration": [sorted(m.member) for m in res.masks],
        "levels": levels,
        "euler": jsonable(res.euler),
        "ok": res.ok(),
    }


_LOADERS = {
    "complex.v1": complex_from_json,
    "cosheaf.v1": cosheaf_from_json,
    "facepair.v1": facepair_from_json,
    "corank.v1": corank_from_json,
}


def load_any(d):
    """Parse any input schema by its version field; returns ``(version, object)``."""
    if not isinstance(d, dict) or d.get("version") not in _LOADERS:
        got = d.get("version") if isinstance(d, dict) else None
        raise SchemaError(f"expected version one of {sorted(_LOADERS)}, got {got!r}")
    v = d["version"]
    return v, _LOADERS[v](d)
