"""Command line front end: ``corank-ss <command> [input] [options]``.

Exit codes: 0 when every check passes, 1 when a check fails (the report is
still written), 2 on unreadable input or schema errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import fixtures
from .complex import DeltaComplex, SubcomplexMask, validate
from .corank import GluingInconsistent, MissingCosheaf, NotFaceClosed, _assemble, cork_dims, glued_cosheaf, hilbert_example, run as run_corank
from .cosheaf import Cosheaf, InvalidCosheaf, MaskNotClosed, homology_dims, relative_chain_complex, validate_cosheaf
from .retraction import (
    FaceConditionViolated,
    FacePairInput,
    boundary_decomposition_check,
    criterion_check,
    quasi_isomorphism_check,
    retract_complex,
    verify_acyclicity,
)
from .schemas import SchemaError, corank_result_to_json, corank_to_json, dumps, facepair_to_json, jsonable, load_any, page_to_json
from .spectral import FilteredComplex, InvalidFiltration, convergence_check, degeneration_page, euler_invariance, graded_check, iterated_check, pages

COMMANDS = ("validate", "homology", "ss", "corank", "retract", "acyclicity", "euler", "example")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    p: int | None = None
    format: str = "table"
    options: dict = field(default_factory=dict)


@dataclass
class Outcome:
    report: dict
    text: str
    ok: bool


def _read(path: str | None):
    if path is None:
        raise UsageError("an input file is required (use - for stdin)")
    try:
        if path == "-":
            raw = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                raw = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from None


def _load(cfg: RunConfig, allowed: Sequence[str]):
    data = _read(cfg.input_path)
    version, obj = load_any(data)
    if version not in allowed:
        raise SchemaError(f"expected version {' or '.join(repr(a) for a in allowed)}, got {version!r}")
    return version, obj


def _as_cosheaf(version: str, obj) -> Cosheaf:
    if version == "complex.v1":
        bad = validate(obj)
        if bad:
            raise SchemaError("invalid complex: " + "; ".join(bad))
        return Cosheaf.constant(obj)
    bad = validate(obj.base) or validate_cosheaf(obj)
    if bad:
        raise SchemaError("invalid cosheaf: " + "; ".join(bad))
    return obj


def _mask(base: DeltaComplex, name: str | None) -> SubcomplexMask | None:
    if name is None:
        return None
    if name not in base.masks:
        raise UsageError(f"no mask named {name!r} (have {sorted(base.masks)})")
    return base.masks[name]


def cmd_validate(cfg: RunConfig) -> Outcome:
    version, obj = _load(cfg, ("complex.v1", "cosheaf.v1", "facepair.v1", "corank.v1"))
    problems: list[str] = []
    if version == "complex.v1":
        problems = validate(obj)
    elif version == "cosheaf.v1":
        problems = validate(obj.base) or validate_cosheaf(obj)
    elif version == "facepair.v1":
        problems = [f"simplex {list(s)}: boundary vertices do not span a boundary simplex" for s in obj.condition_violations()]
    else:
        try:
            asm = _assemble(obj)
            for p in obj.levels():
                glued_cosheaf(obj, p, asm)
        except (GluingInconsistent, MissingCosheaf, NotFaceClosed) as e:
            problems = [str(e)]
    report = {"command": "validate", "version": version, "ok": not problems, "problems": problems}
    text = f"{version}: ok" if not problems else f"{version}: {len(problems)} problem(s)\n" + "\n".join(f"  {p}" for p in problems)
    return Outcome(report, text, not problems)


def cmd_homology(cfg: RunConfig) -> Outcome:
    version, obj = _load(cfg, ("complex.v1", "cosheaf.v1"))
    f = _as_cosheaf(version, obj)
    mask = _mask(f.base, cfg.options.get("mask"))
    sub = _mask(f.base, cfg.options.get("relative"))
    h = homology_dims(relative_chain_complex(f, sub, mask))
    report = {"command": "homology", "dims": {str(k): v for k, v in sorted(h.items())}}
    text = "\n".join(f"H_{k} = {v}" for k, v in sorted(h.items()))
    return Outcome(report, text, True)


def _render_grid(dims: dict[tuple[int, int], int], a: str, b: str) -> list[str]:
    if not dims:
        return ["  (all terms zero)"]
    xs = range(min(x for x, _ in dims), max(x for x, _ in dims) + 1)
    ys = range(max(y for _, y in dims), min(y for _, y in dims) - 1, -1)
    w = max(3, max(len(str(v)) for v in dims.values()))
    lines = []
    for y in ys:
        cells = " ".join(str(dims.get((x, y), ".")).rjust(w) for x in xs)
        lines.append(f"  {b}={y:>2} | {cells}")
    lines.append("         +" + "-" * ((w + 1) * len(xs)))
    lines.append("          " + " ".join(f"{a}={x}".rjust(w) for x in xs))
    return lines


def cmd_ss(cfg: RunConfig) -> Outcome:
    version, obj = _load(cfg, ("complex.v1", "cosheaf.v1"))
    f = _as_cosheaf(version, obj)
    names = cfg.options.get("filtration")
    if not names:
        raise UsageError("--filtration NAME,NAME,... is required")
    masks = [_mask(f.base, n) for n in names.split(",")]
    if masks[-1].member != f.base.all_cells().member:
        masks.append(f.base.all_cells())
    fc = FilteredComplex.from_masks(f, masks)
    ps = pages(fc)
    checks = {
        "euler": euler_invariance(fc, ps),
        "iterated": iterated_check(fc, ps),
        "graded": graded_check(fc, ps[0]),
        "convergence": convergence_check(fc, ps[-1]),
    }
    ok = all(c["ok"] for c in checks.values())
    deg = degeneration_page(fc, ps)
    report = {"command": "ss", "pages": [page_to_json(p) for p in ps], "degeneration_page": deg, "checks": jsonable(checks), "ok": ok}
    lines = []
    for pg in ps:
        label = "E^inf" if pg is ps[-1] else f"E^{pg.r}"
        lines.append(f"{label} (p across, q up):")
        lines.extend(_render_grid(pg.dims(), "p", "q"))
    lines.append(f"degenerates at E^{deg}")
    lines.append("checks: " + ", ".join(f"{k} {'ok' if v['ok'] else 'FAILED'}" for k, v in checks.items()))
    return Outcome(report, "\n".join(lines), ok)


def _corank_text(res) -> list[str]:
    lines = []
    for p, lv in sorted(res.levels.items()):
        lines.append(f"level p = {p}")
        lines.append("E^1 (i across, j up):")
        lines.extend(_render_grid(cork_dims(lv.ss.page(1)), "i", "j"))
        lines.append("E^inf:")
        lines.extend(_render_grid(cork_dims(lv.ss.infinity), "i", "j"))
        lines.append(f"degenerates at E^{lv.ss.degeneration_page()}")
        names = {
            "cusp-local E^1": lv.cross_check,
            "convergence": lv.convergence,
            "graded pieces": lv.graded,
            "iterated pages": lv.iterated,
            "shape": lv.shape,
            "degeneration ranges": lv.degeneration,
        }
        lines.append("checks: " + ", ".join(f"{k} {'ok' if v['ok'] else 'FAILED'}" for k, v in names.items()))
        for v in lv.shape["violations"]:
            lines.append(f"  shape violation: E^1_{{{v['i']},{v['j']}}} has dim {v['dim']}")
        if lv.eis is not None:
            lines.append(f"eis dim = {lv.eis['dim']}")
    return lines


def _euler_text(euler: dict) -> list[str]:
    lines = []
    for p, e in sorted(euler["levels"].items()):
        a = e["a"]
        line = f"p = {p}: chi(E^1) = {a['e1']}, chi(E^inf) = {a['einf']} ({'ok' if a['ok'] else 'MISMATCH'})"
        if e["b"] is not None:
            line += f"; cusp formula = {e['b']['formula']} ({'ok' if e['b']['ok'] else 'MISMATCH'})"
        lines.append(line)
    c = euler.get("c")
    if c is not None:
        if c["complete"]:
            lines.append(f"alternating sum over p = {c['alternating_sum']}, metadata = {c['formula']} ({'ok' if c['ok'] else 'MISMATCH'})")
        else:
            lines.append(f"metadata sum = {c['formula']} (levels incomplete, not compared)")
    return lines


def _run_corank(cfg: RunConfig):
    _, inp = _load(cfg, ("corank.v1",))
    levels = None
    if cfg.p is not None:
        if not 0 <= cfg.p < max(inp.n, 1):
            raise UsageError(f"--p must satisfy 0 <= p < n = {inp.n}")
        levels = [cfg.p]
    try:
        return run_corank(inp, levels)
    except (GluingInconsistent, NotFaceClosed, MissingCosheaf) as e:
        raise SchemaError(str(e)) from None


def cmd_corank(cfg: RunConfig) -> Outcome:
    res = _run_corank(cfg)
    report = corank_result_to_json(res)
    lines = _corank_text(res) + _euler_text(res.euler)
    return Outcome(report, "\n".join(lines), res.ok())


def cmd_euler(cfg: RunConfig) -> Outcome:
    res = _run_corank(cfg)
    report = {"command": "euler", "euler": jsonable(res.euler), "ok": res.euler["ok"]}
    return Outcome(report, "\n".join(_euler_text(res.euler)), res.euler["ok"])


def cmd_retract(cfg: RunConfig) -> Outcome:
    _, inp = _load(cfg, ("facepair.v1",))
    try:
        pair = retract_complex(inp)
    except FaceConditionViolated as e:
        raise SchemaError(str(e)) from None
    crit = criterion_check(pair)
    qis = quasi_isomorphism_check(pair)
    checks = {"criterion": crit, "quasi_isomorphism": qis}
    if len(inp.ambient.maximal()) == 1:
        checks["boundary_decomposition"] = boundary_decomposition_check(pair)
    ok = all(c["ok"] for c in checks.values()) and pair.report["restriction_consistent"]
    flags = pair.flags
    report = {
        "command": "retract",
        "masks": {
            "plus": sorted(pair.mask("plus").member),
            "boundary_plus": sorted(pair.mask("boundary_plus").member),
            "minus": sorted(pair.mask("minus").member),
        },
        "top_plus_cells": sorted([list(x) for x in flags[c].chain] for c in pair.top_plus()),
        "pieces": pair.report,
        "checks": jsonable(checks),
        "ok": ok,
    }
    lines = [
        f"subdivision cells: {pair.report['subdivision_cells']}",
        f"PLUS cells: {len(pair.plus)} ({len(pair.top_plus())} top)",
        f"boundary PLUS cells: {len(pair.boundary_plus)}",
        f"MINUS cells: {len(pair.minus)}",
    ]
    for c in sorted(pair.top_plus()):
        lines.append("  PLUS top: " + " < ".join("{" + ",".join(map(str, x)) + "}" for x in flags[c].chain))
    lines.append("checks: " + ", ".join(f"{k} {'ok' if v['ok'] else 'FAILED'}" for k, v in checks.items()))
    return Outcome(report, "\n".join(lines), ok)


def cmd_acyclicity(cfg: RunConfig) -> Outcome:
    _, inp = _load(cfg, ("facepair.v1",))
    k = cfg.options.get("degree")
    if k is None and inp.expected_degree is None:
        raise UsageError("--degree is required when the input has no expected_degree")
    try:
        rep = verify_acyclicity(inp, k)
    except FaceConditionViolated as e:
        raise SchemaError(str(e)) from None
    report = {"command": "acyclicity", **jsonable(rep)}
    h = rep["cohomology"]
    lines = [f"H^{j}(X, bd X) = {d}" for j, d in sorted(h.items())]
    lines.append(f"expected Q in degree {rep['degree']}: {'ok' if h == rep['expected'] else 'FAILED'}")
    lines.append(f"retraction quasi-isomorphism: {'ok' if rep['retraction']['ok'] else 'FAILED'}")
    return Outcome(report, "\n".join(lines), rep["ok"])


EXAMPLES = {
    "hilbert": None,
    **{k: v for k, v in fixtures.MIXED.items()},
    "shape_violation": fixtures.shape_violation,
    "quadrant_cone": fixtures.quadrant_cone,
    "three_cone": fixtures.three_cone,
    "triangle_v0": fixtures.triangle_v0,
}


def cmd_example(cfg: RunConfig) -> Outcome:
    name = cfg.options.get("name")
    if name not in EXAMPLES:
        raise UsageError(f"unknown example {name!r} (choose from {sorted(EXAMPLES)})")
    if name == "hilbert":
        obj = hilbert_example(cfg.options.get("cusps", 1), cfg.options.get("period", 3))
    else:
        obj = EXAMPLES[name]()
    doc = facepair_to_json(obj) if isinstance(obj, FacePairInput) else corank_to_json(obj)
    return Outcome(doc, dumps(doc).rstrip("\n"), True)


HANDLERS = {
    "validate": cmd_validate,
    "homology": cmd_homology,
    "ss": cmd_ss,
    "corank": cmd_corank,
    "retract": cmd_retract,
    "acyclicity": cmd_acyclicity,
    "euler": cmd_euler,
    "example": cmd_example,
}


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        res = HANDLERS[cfg.command](cfg)
    except (SchemaError, UsageError, MaskNotClosed, InvalidCosheaf, InvalidFiltration, ValueError) as e:
        print(f"error: {e}", file=err)
        return 2
    text = dumps(res.report) if cfg.format == "json" or cfg.command == "example" else res.text + "\n"
    out.write(text)
    if cfg.output_path:
        try:
            with open(cfg.output_path, "w", encoding="utf-8") as fh:
                fh.write(dumps(res.report))
        except OSError as e:
            print(f"error: cannot write {cfg.output_path}: {e.strerror}", file=err)
            return 2
    return 0 if res.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corank-ss", description="Exact cosheaf homology and corank spectral sequences.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input", nargs="?", default="-", help="input JSON file, or - for stdin (default)")
        p.add_argument("--format", choices=("json", "table"), default="table")
        p.add_argument("-o", "--output", help="also write the JSON report here")

    common(sub.add_parser("validate", help="check an input file against its schema and invariants"))
    p = sub.add_parser("homology", help="cosheaf homology of a complex or cosheaf")
    common(p)
    p.add_argument("--mask", help="restrict to a named subcomplex")
    p.add_argument("--relative", help="work relative to a named subcomplex")
    p = sub.add_parser("ss", help="spectral sequence of a filtration by named subcomplexes")
    common(p)
    p.add_argument("--filtration", help="comma-separated mask names, smallest first")
    p = sub.add_parser("corank", help="corank spectral sequence of a cusp input")
    common(p)
    p.add_argument("--p", type=int, help="level (default: every level in the input)")
    common(sub.add_parser("retract", help="split a face pair and check the retraction"))
    p = sub.add_parser("acyclicity", help="relative cohomology of a face pair")
    common(p)
    p.add_argument("--degree", type=int, help="degree where Q is expected")
    p = sub.add_parser("euler", help="Euler characteristic identities of a cusp input")
    common(p)
    p.add_argument("--p", type=int)
    p = sub.add_parser("example", help="print a built-in example input as JSON")
    p.add_argument("name", choices=sorted(EXAMPLES))
    p.add_argument("--cusps", type=int, default=1)
    p.add_argument("--period", type=int, default=3)
    p.add_argument("-o", "--output", help="also write the JSON here")
    return ap


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    opts = {}
    for key in ("mask", "relative", "filtration", "degree", "cusps", "period", "name"):
        if getattr(ns, key, None) is not None:
            opts[key] = getattr(ns, key)
    return RunConfig(
        command=ns.command,
        input_path=getattr(ns, "input", None),
        output_path=getattr(ns, "output", None),
        p=getattr(ns, "p", None),
        format=getattr(ns, "format", "json"),
        options=opts,
    )


def main(argv: Sequence[str] | None = None) -> int:
    return run(config_from_args(argv))


if __name__ == "__main__":
    sys.exit(main())
