"""The corank spectral sequence built from cusp quotient data.

Each cusp F of corank i contributes a finite Δ-complex Δ'_F with a boundary
subcomplex ∂Δ'_F whose cells are identified with cells of cusps of smaller
corank.  Gluing gives the total complex Δ, filtered by Δ_i = cells of corank
≤ i.  A cosheaf per level p on every Δ'_F glues to a cosheaf on Δ.

Output coordinates: ``(i, j)`` with ``E^1_{i,j} = H_{i+j-1}(Δ_i, Δ_{i-1}; F_p)``,
so that ``E^∞_m = sum_{i+j=m} E^∞_{i,j}`` has total dimension
``dim H_{m-1}(Δ; F_p)``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .complex import Cell, DeltaComplex, SimplicialComplex, SubcomplexMask, as_delta, validate
from .cosheaf import Cosheaf, homology_dims, relative_chain_complex, validate_cosheaf
from .exactlinalg import Matrix, rank
from .spectral import FilteredComplex, Page, convergence_check, graded_check, iterated_check, pages

__all__ = [
    "Augmentation",
    "Cusp",
    "CorankInput",
    "CorankSS",
    "LevelResult",
    "CorankResult",
    "GluingInconsistent",
    "NotFaceClosed",
    "MissingCosheaf",
    "MissingAugmentation",
    "BadPeriod",
    "build_dual_complex",
    "corank_filtration",
    "glued_cosheaf",
    "corank_ss",
    "cork_dims",
    "cork_ranks",
    "e1_cross_check",
    "e1_by_cusp",
    "d_of_p",
    "shape_check",
    "degeneration_report",
    "eis_dim",
    "euler_identity",
    "hilbert_example",
    "run",
    "thread_count",
]


class GluingInconsistent(ValueError):
    pass


class NotFaceClosed(ValueError):
    pass


class MissingCosheaf(ValueError):
    pass


class MissingAugmentation(ValueError):
    pass


class BadPeriod(ValueError):
    pass


@dataclass(frozen=True)
class Augmentation:
    """Maps from vertex stalks to a fixed ambient space, keyed by local 0-cell id."""

    ambient: int
    maps: Mapping[int, Matrix]


@dataclass
class Cusp:
    label: str
    corank: int
    complex: DeltaComplex
    boundary: SubcomplexMask
    cosheaves: dict[int, Cosheaf]
    gluing: dict[int, tuple[str, int]] = field(default_factory=dict)
    chi_gamma: Fraction | None = None
    chi_hol: Fraction | None = None
    augmentation: dict[int, Augmentation] = field(default_factory=dict)

    def interior(self) -> list[int]:
        return [c.id for c in self.complex.cells if c.id not in self.boundary]


@dataclass
class CorankInput:
    n: int
    r: int
    n_table: tuple[int, ...]
    cusps: tuple[Cusp, ...]

    def n_of(self, i: int) -> int:
        return 0 if i <= 0 else self.n_table[i - 1]

    def cusp(self, label: str) -> Cusp:
        for c in self.cusps:
            if c.label == label:
                return c
        raise KeyError(label)

    def levels(self) -> list[int]:
        got = set()
        for c in self.cusps:
            got.update(c.cosheaves)
        return sorted(got)

    def problems(self) -> list[str]:
        out = []
        if self.r != len(self.n_table):
            out.append(f"r = {self.r} but n_table has {len(self.n_table)} entries")
        prev = 0
        for i, v in enumerate(self.n_table, 1):
            if v <= prev:
                out.append(f"n_table is not strictly increasing at corank {i}")
            prev = v
        if self.n_table and self.n_table[-1] > self.n:
            out.append(f"n({len(self.n_table)}) = {self.n_table[-1]} exceeds n = {self.n}")
        seen = set()
        for c in self.cusps:
            if c.label in seen:
                out.append(f"duplicate cusp label {c.label!r}")
            seen.add(c.label)
            if not 1 <= c.corank <= self.r:
                out.append(f"cusp {c.label!r}: corank {c.corank} outside 1..{self.r}")
            for v in validate(c.complex):
                out.append(f"cusp {c.label!r}: {v}")
            if not c.boundary.is_closed(c.complex):
                out.append(f"cusp {c.label!r}: boundary is not face-closed")
        return out


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CORANK_SS_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence) -> list:
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass
class _Assembly:
    delta: DeltaComplex
    owner: list[tuple[int, int]]  # global cell -> (cusp index, local cell)
    resolve: dict[tuple[int, int], int]  # (cusp index, local cell) -> global cell
    coranks: list[int]


def _assemble(inp: CorankInput) -> _Assembly:
    bad = inp.problems()
    if bad:
        raise GluingInconsistent("; ".join(bad))
    index = {c.label: k for k, c in enumerate(inp.cusps)}
    owner: list[tuple[int, int]] = []
    resolve: dict[tuple[int, int], int] = {}
    for k, c in enumerate(inp.cusps):
        for cell in c.complex.cells:
            if cell.id not in c.boundary:
                resolve[(k, cell.id)] = len(owner)
                owner.append((k, cell.id))

    def find(k: int, cid: int) -> int:
        got = resolve.get((k, cid))
        if got is not None:
            return got
        c = inp.cusps[k]
        tgt = c.gluing.get(cid)
        if tgt is None:
            raise GluingInconsistent(f"cusp {c.label!r}: boundary cell {cid} has no gluing target")
        label, tcell = tgt
        if label not in index:
            raise GluingInconsistent(f"cusp {c.label!r}: cell {cid} glued to unknown cusp {label!r}")
        tk = index[label]
        t = inp.cusps[tk]
        if t.corank >= c.corank:
            raise GluingInconsistent(f"cusp {c.label!r}: cell {cid} glued to cusp {label!r} of corank {t.corank}, not lower")
        if not 0 <= tcell < len(t.complex):
            raise GluingInconsistent(f"cusp {c.label!r}: cell {cid} glued to missing cell {tcell} of {label!r}")
        if t.complex.cells[tcell].dim != c.complex.cells[cid].dim:
            raise GluingInconsistent(f"cusp {c.label!r}: cell {cid} glued to cell {tcell} of {label!r} of another dimension")
        g = find(tk, tcell)
        resolve[(k, cid)] = g
        return g

    for k, c in enumerate(inp.cusps):
        extra = sorted(set(c.gluing) - c.boundary.member)
        if extra:
            raise GluingInconsistent(f"cusp {c.label!r}: gluing given for interior cells {extra}")
        images: dict[int, int] = {}
        for cid in sorted(c.boundary.member):
            g = find(k, cid)
            if g in images:
                raise GluingInconsistent(f"cusp {c.label!r}: boundary cells {images[g]} and {cid} glued to the same cell")
            images[g] = cid

    def gvert(k: int, v: int) -> int:
        c = inp.cusps[k]
        zero = [x.id for x in c.complex.cells if x.dim == 0 and x.verts[0] == v]
        return find(k, zero[0])

    vcache: dict[tuple[int, int], int] = {}

    def vert(k: int, v: int) -> int:
        key = (k, v)
        if key not in vcache:
            vcache[key] = gvert(k, v)
        return vcache[key]

    cells = []
    for g, (k, cid) in enumerate(owner):
        c = inp.cusps[k]
        lc = c.complex.cells[cid]
        verts = tuple(vert(k, v) for v in lc.verts)
        faces = tuple(find(k, f) for f in lc.faces)
        cells.append(Cell(g, lc.dim, verts, faces, (c.label, cid)))
    vertices = sorted(g for g, cell in enumerate(cells) if cell.dim == 0)
    delta = DeltaComplex(vertices, cells)
    # boundary cells must sit on top of their targets face by face
    for k, c in enumerate(inp.cusps):
        for cid in sorted(c.boundary.member):
            lc = c.complex.cells[cid]
            g = cells[resolve[(k, cid)]]
            want = tuple(find(k, f) for f in lc.faces)
            if g.faces != want:
                raise GluingInconsistent(
                    f"cusp {c.label!r}: faces of boundary cell {cid} map to {list(want)}, but its target {g.id} has faces {list(g.faces)}"
                )
    bad = validate(delta)
    if bad:
        raise GluingInconsistent("glued complex is invalid: " + "; ".join(bad[:5]))
    coranks = [inp.cusps[k].corank for k, _ in owner]
    return _Assembly(delta, owner, resolve, coranks)


def build_dual_complex(inp: CorankInput) -> DeltaComplex:
    """The glued complex; each cell is labelled ``(cusp label, local cell id)``."""
    return _assemble(inp).delta


def corank_filtration(inp: CorankInput, dual: DeltaComplex | None = None) -> list[SubcomplexMask]:
    """``[Δ_0 = ∅, Δ_1, ..., Δ_r]``."""
    dual = dual if dual is not None else build_dual_complex(inp)
    cork = {c.label: c.corank for c in inp.cusps}
    masks = []
    for i in range(inp.r + 1):
        m = SubcomplexMask.of(c.id for c in dual.cells if cork[c.label[0]] <= i)
        bad = m.missing_faces(dual)
        if bad:
            c, f = bad[0]
            raise NotFaceClosed(f"Δ_{i} is not face-closed: cell {c} lacks face {f}")
        masks.append(m)
    return masks


def glued_cosheaf(inp: CorankInput, p: int, asm: _Assembly | None = None) -> Cosheaf:
    asm = asm if asm is not None else _assemble(inp)
    for c in inp.cusps:
        if p not in c.cosheaves:
            raise MissingCosheaf(f"cusp {c.label!r} has no cosheaf at level {p}")
    dims = []
    ext = {}
    for g, (k, cid) in enumerate(asm.owner):
        f = inp.cusps[k].cosheaves[p]
        dims.append(f.dims[cid])
        for i in range(len(asm.delta.cells[g].faces)):
            m = f.ext.get((cid, i))
            if m is not None:
                ext[(g, i)] = m
    out = Cosheaf(asm.delta, dims, ext)
    # a cusp's own data on its boundary must agree with the cells it is glued to
    for k, c in enumerate(inp.cusps):
        f = c.cosheaves[p]
        for cid in sorted(c.boundary.member):
            g = asm.resolve[(k, cid)]
            if f.dims[cid] != out.dims[g]:
                raise GluingInconsistent(
                    f"level {p}, cusp {c.label!r}: stalk of boundary cell {cid} has dim {f.dims[cid]}, target cell {g} has {out.dims[g]}"
                )
            for i in range(len(c.complex.cells[cid].faces)):
                if f.ext_map(cid, i) != out.ext_map(g, i):
                    raise GluingInconsistent(
                        f"level {p}, cusp {c.label!r}: extension ({cid}, {i}) differs from that of target cell {g}"
                    )
    bad = validate_cosheaf(out)
    if bad:
        raise GluingInconsistent(f"level {p}: glued cosheaf is invalid: " + "; ".join(bad[:5]))
    return out


def cork_dims(page: Page) -> dict[tuple[int, int], int]:
    """Nonzero terms of a page in ``(i, j)`` coordinates."""
    return {(p, q + 1): d for (p, q), d in page.dims().items()}


def cork_ranks(page: Page) -> dict[tuple[int, int], int]:
    return {(p, q + 1): d for (p, q), d in page.diff_ranks().items()}


@dataclass
class CorankSS:
    p: int
    dual: DeltaComplex
    masks: list[SubcomplexMask]
    fc: FilteredComplex
    pages: list[Page]

    @property
    def infinity(self) -> Page:
        return self.pages[-1]

    def page(self, r: int) -> Page:
        return self.pages[min(r, len(self.pages)) - 1]

    def e_inf(self, m: int) -> int:
        return sum(d for (i, j), d in cork_dims(self.infinity).items() if i + j == m)

    def degeneration_page(self) -> int:
        r = self.pages[-1].r
        for pg in reversed(self.pages):
            if not pg.is_degenerate():
                return pg.r + 1
            r = pg.r
        return r


def corank_ss(inp: CorankInput, p: int, asm: _Assembly | None = None) -> CorankSS:
    asm = asm if asm is not None else _assemble(inp)
    f = glued_cosheaf(inp, p, asm)
    masks = corank_filtration(inp, asm.delta)
    fc = FilteredComplex.from_masks(f, masks)
    return CorankSS(p, asm.delta, masks, fc, pages(fc))


def e1_by_cusp(inp: CorankInput, p: int) -> dict[tuple[int, int], list[tuple[str, int]]]:
    """Per-cusp relative homology ``H_m(Δ'_F, ∂Δ'_F; F_p)`` placed at ``(cork F, m - cork F + 1)``."""
    for c in inp.cusps:
        if p not in c.cosheaves:
            raise MissingCosheaf(f"cusp {c.label!r} has no cosheaf at level {p}")

    def one(c: Cusp):
        return c, homology_dims(relative_chain_complex(c.cosheaves[p], c.boundary))

    out: dict[tuple[int, int], list[tuple[str, int]]] = {}
    for c, h in _pmap(one, list(inp.cusps)):
        for m, d in sorted(h.items()):
            if d:
                out.setdefault((c.corank, m - c.corank + 1), []).append((c.label, d))
    return dict(sorted(out.items()))


def e1_cross_check(inp: CorankInput, p: int, ss: CorankSS) -> dict:
    local = {k: sum(d for _, d in v) for k, v in e1_by_cusp(inp, p).items()}
    glob = cork_dims(ss.page(1))
    keys = sorted(set(local) | set(glob))
    bad = [{"i": i, "j": j, "page": glob.get((i, j), 0), "cusps": local.get((i, j), 0)} for i, j in keys if glob.get((i, j), 0) != local.get((i, j), 0)]
    return {"ok": not bad, "mismatches": bad}


def d_of_p(inp: CorankInput, p: int) -> int:
    best = 0
    for i in range(1, inp.r + 1):
        if inp.n_of(i) <= inp.n - p:
            best = i
    return best


def shape_check(inp: CorankInput, p: int, page1: Page | Mapping[tuple[int, int], int]) -> dict:
    """Every nonzero ``E^1_{i,j}`` has ``1 <= i <= d(p)`` and ``0 <= j <= n(i) - i``."""
    dims = cork_dims(page1) if isinstance(page1, Page) else dict(page1)
    d = d_of_p(inp, p)
    bad = []
    for (i, j), v in sorted(dims.items()):
        if not v:
            continue
        if not (1 <= i <= d and 0 <= j <= inp.n_of(i) - i):
            bad.append({"i": i, "j": j, "dim": v})
    return {"ok": not bad, "d": d, "violations": bad}


def _ker_d1(ss: CorankSS, i: int, j: int) -> int:
    pg = ss.page(1)
    key = (i, j - 1)
    t = pg.terms.get(key)
    if t is None:
        return 0
    m = pg.diffs.get(key)
    return t.dim - (rank(m) if m is not None else 0)


def degeneration_report(inp: CorankInput, p: int, ss: CorankSS) -> dict:
    """Degree ranges where ``E^∞`` is read off an early page."""
    d = d_of_p(inp, p)
    checks = []
    if d >= 1:
        e1 = cork_dims(ss.page(1))
        for m in range(inp.n_of(d - 1) + 2, inp.n_of(d) + 1):
            exp = e1.get((d, m - d), 0)
            checks.append({"kind": "E1", "m": m, "expected": exp, "actual": ss.e_inf(m), "ok": exp == ss.e_inf(m)})
        m = inp.n_of(d - 1) + 1
        if m >= 1:
            exp = _ker_d1(ss, d, m - d)
            checks.append({"kind": "ker d1", "m": m, "expected": exp, "actual": ss.e_inf(m), "ok": exp == ss.e_inf(m)})
    if inp.r >= 2 and inp.n_of(1) == 1 and d >= 2:
        exp = cork_dims(ss.page(2)).get((2, 0), 0)
        checks.append({"kind": "E2", "m": 2, "expected": exp, "actual": ss.e_inf(2), "ok": exp == ss.e_inf(2)})
    return {"ok": all(c["ok"] for c in checks), "d": d, "checks": checks, "degeneration_page": ss.degeneration_page()}


def eis_dim(inp: CorankInput, p: int, asm: _Assembly | None = None) -> dict:
    """Rank of the augmentation ``C_0 -> Q^h`` and whether it kills boundaries."""
    asm = asm if asm is not None else _assemble(inp)
    ambient = None
    for c in inp.cusps:
        a = c.augmentation.get(p)
        if a is None:
            raise MissingAugmentation(f"cusp {c.label!r} has no augmentation at level {p}")
        if ambient is None:
            ambient = a.ambient
        elif ambient != a.ambient:
            raise MissingAugmentation(f"cusp {c.label!r}: augmentation lands in Q^{a.ambient}, others in Q^{ambient}")
    if ambient is None:
        return {"dim": 0, "ambient": 0, "kills_boundaries": True}
    f = glued_cosheaf(inp, p, asm)
    cc = relative_chain_complex(f)
    blocks = {}
    for k, c in enumerate(inp.cusps):
        for cid, m in c.augmentation[p].maps.items():
            if cid in c.boundary:
                continue
            g = asm.resolve[(k, cid)]
            if m.shape != (ambient, f.dims[g]):
                raise MissingAugmentation(f"cusp {c.label!r}: augmentation of cell {cid} has shape {m.shape}")
            blocks[g] = m
    e = {}
    for g, m in blocks.items():
        o = cc.offsets[0][g]
        for (r, s), v in m.items():
            e[(r, o + s)] = v
    aug = Matrix(ambient, cc.dim(0), e)
    kills = (aug @ cc.diff(1)).is_zero() if 1 in cc.dims else True
    return {"dim": rank(aug), "ambient": ambient, "kills_boundaries": kills}


def _interior_stalk(c: Cusp, p: int) -> int | None:
    dims = {c.cosheaves[p].dims[x] for x in c.interior()}
    return dims.pop() if len(dims) == 1 else None


def euler_identity(inp: CorankInput, results: Mapping[int, CorankSS]) -> dict:
    """Euler characteristic bookkeeping per level and summed over levels.

    (a) χ(E^1) = χ(E^∞) from the pages; (b) χ(E^1) against the sum over cusps of
    ``(-1)^{n(cork F)} χ_Γ · h`` with h the interior stalk dimension; (c) the
    alternating sum over levels against ``Σ (-1)^{n(cork F)} χ_hol · χ_Γ``.
    """
    levels = {}
    for p, ss in sorted(results.items()):
        chi1 = _cork_euler(ss.page(1))
        chiinf = _cork_euler(ss.infinity)
        entry = {"a": {"e1": chi1, "einf": chiinf, "ok": chi1 == chiinf}}
        contrib = {}
        checkable = True
        for c in inp.cusps:
            h = _interior_stalk(c, p)
            if c.chi_gamma is None or h is None:
                checkable = False
                break
            contrib[c.label] = (-1) ** inp.n_of(c.corank) * Fraction(c.chi_gamma) * h
        if checkable:
            total = sum(contrib.values(), Fraction(0))
            entry["b"] = {"formula": total, "e1": chi1, "ok": total == chi1, "contributions": contrib}
        else:
            entry["b"] = None
        levels[p] = entry
    out: dict = {"levels": levels}
    if inp.cusps and all(c.chi_gamma is not None and c.chi_hol is not None for c in inp.cusps):
        contrib = {c.label: (-1) ** inp.n_of(c.corank) * Fraction(c.chi_hol) * Fraction(c.chi_gamma) for c in inp.cusps}
        rhs = sum(contrib.values(), Fraction(0))
        complete = set(range(inp.n)) <= set(results)
        lhs = sum(((-1) ** p * levels[p]["a"]["e1"] for p in range(inp.n)), 0) if complete else None
        out["c"] = {"formula": rhs, "complete": complete, "alternating_sum": lhs, "ok": (lhs == rhs) if complete else None, "contributions": contrib}
    elif not inp.cusps:
        out["c"] = {"formula": Fraction(0), "complete": True, "alternating_sum": 0, "ok": True, "contributions": {}}
    else:
        out["c"] = None
    out["ok"] = all(v["a"]["ok"] and (v["b"] is None or v["b"]["ok"]) for v in levels.values()) and (
        out["c"] is None or out["c"]["ok"] is not False
    )
    return out


def _cork_euler(page: Page) -> int:
    return sum((-1) ** (i + j) * d for (i, j), d in cork_dims(page).items())


def _circle(period: int) -> DeltaComplex:
    edges = [(i, i + 1) for i in range(period - 1)] + [(0, period - 1)]
    if period == 2:
        # two distinct edges on the same two vertices
        cells = [((0,), ()), ((1,), ()), ((0, 1), (1, 0)), ((0, 1), (1, 0))]
        return DeltaComplex.from_cells(cells)
    return as_delta(SimplicialComplex(range(period), edges))


def hilbert_example(num_cusps: int, period: int) -> CorankInput:
    """``num_cusps`` corank-1 cusps of an n = 2 toy, each a circle of ``period`` edges."""
    if period < 2:
        raise BadPeriod(f"period must be at least 2, got {period}")
    if num_cusps < 0:
        raise ValueError("negative number of cusps")
    cusps = []
    for k in range(num_cusps):
        d = _circle(period)
        f = Cosheaf.constant(d)
        verts = [c.id for c in d.cells if c.dim == 0]
        aug = Augmentation(1, {v: Matrix.identity(1) for v in verts})
        cusps.append(Cusp(f"c{k}", 1, d, SubcomplexMask(), {0: f}, {}, Fraction(0), Fraction(1), {0: aug}))
    return CorankInput(2, 1, (2,), tuple(cusps))


@dataclass
class LevelResult:
    ss: CorankSS
    e1_by_cusp: dict
    cross_check: dict
    convergence: dict
    graded: dict
    iterated: dict
    shape: dict
    degeneration: dict
    eis: dict | None


@dataclass
class CorankResult:
    input: CorankInput
    dual: DeltaComplex
    masks: list[SubcomplexMask]
    levels: dict[int, LevelResult]
    euler: dict

    def ok(self) -> bool:
        good = self.euler["ok"]
        for lv in self.levels.values():
            good = good and lv.cross_check["ok"] and lv.convergence["ok"] and lv.graded["ok"] and lv.iterated["ok"]
            good = good and lv.shape["ok"] and lv.degeneration["ok"]
        return good


def run(inp: CorankInput, levels: Iterable[int] | None = None) -> CorankResult:
    asm = _assemble(inp)
    masks = corank_filtration(inp, asm.delta)
    wanted = sorted(set(levels)) if levels is not None else inp.levels()
    for p in wanted:
        if not 0 <= p < max(inp.n, 1):
            raise ValueError(f"level {p} outside 0..{inp.n - 1}")

    def one(p: int) -> LevelResult:
        ss = corank_ss(inp, p, asm)
        eis = None
        if inp.cusps and all(p in c.augmentation for c in inp.cusps):
            eis = eis_dim(inp, p, asm)
        return LevelResult(
            ss=ss,
            e1_by_cusp=e1_by_cusp(inp, p),
            cross_check=e1_cross_check(inp, p, ss),
            convergence=convergence_check(ss.fc, ss.infinity),
            graded=graded_check(ss.fc, ss.page(1)),
            iterated=iterated_check(ss.fc, ss.pages),
            shape=shape_check(inp, p, ss.page(1)),
            degeneration=degeneration_report(inp, p, ss),
            eis=eis,
        )

    results = dict(zip(wanted, _pmap(one, wanted)))
    euler = euler_identity(inp, {p: r.ss for p, r in results.items()})
    return CorankResult(inp, asm.delta, masks, results, euler)
