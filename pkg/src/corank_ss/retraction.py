"""Splitting a simplex along a face pair and retracting onto the far side.

For a simplex Δ with a face Δ_0 and opposite face Δ_1, the barycentric
subdivision splits into Δ⁺ (cells avoiding Δ_0), Δ⁻ (cells meeting Δ_0) and
∂Δ⁺ (cells avoiding both faces).  A cell of the subdivision is a flag
``s_0 < ... < s_k`` of faces of Δ, and all three pieces are read off ``s_0``.

For a complex X with a subcomplex ∂X, each simplex uses Δ_0 = its vertices in
∂X; this is consistent when those vertices always span a simplex of ∂X.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .complex import Flag, SimplicialComplex, SubcomplexMask, as_delta, barycentric_subdivide, subdivision_sign
from .cosheaf import ChainComplex, compact_cochain_pair, homology, homology_dims
from .exactlinalg import Matrix, induced_map, rank

__all__ = [
    "CellClass",
    "FacePairInput",
    "RetractionPair",
    "DegenerateFace",
    "FaceConditionViolated",
    "classify_cell",
    "retract_simplex",
    "retract_complex",
    "boundary_decomposition_check",
    "criterion_check",
    "crossing_parameter",
    "CrossingFunction",
    "carrier_flag",
    "classify_point",
    "retraction_cochain_map",
    "quasi_isomorphism_check",
    "verify_acyclicity",
]


class DegenerateFace(ValueError):
    pass


class FaceConditionViolated(ValueError):
    pass


class CellClass(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    def __str__(self) -> str:
        return self.value


def _chain(flag) -> tuple[tuple[int, ...], ...]:
    return flag.chain if isinstance(flag, Flag) else tuple(tuple(x) for x in flag)


def classify_cell(flag, delta0: Iterable[int], delta1: Iterable[int] | None = None) -> dict:
    """Side of a subdivision cell and whether it lies on ∂Δ⁺.

    Returns ``{"side": CellClass, "boundary": bool}``; boundary cells are also
    on the PLUS side.
    """
    first = set(_chain(flag)[0])
    d0 = set(delta0)
    meets0 = bool(first & d0)
    if delta1 is None:
        meets1 = bool(first - d0)
    else:
        meets1 = bool(first & set(delta1))
    side = CellClass.PLUS if not first <= d0 else CellClass.MINUS
    return {"side": side, "boundary": meets0 and meets1}


@dataclass(frozen=True)
class FacePairInput:
    """A simplicial complex X with a subcomplex ∂X (given by generating simplices)."""

    ambient: SimplicialComplex
    boundary: frozenset
    expected_degree: int | None = None

    @classmethod
    def make(cls, ambient: SimplicialComplex, boundary: Iterable[Iterable[int]], expected_degree: int | None = None) -> "FacePairInput":
        return cls(ambient, ambient.closure(boundary), expected_degree)

    @classmethod
    def simplex(cls, vertices: Sequence[int], delta0: Iterable[int], coords=None) -> "FacePairInput":
        s = SimplicialComplex.simplex(vertices, coords)
        d0 = s.sort_simplex(delta0) if list(delta0) else ()
        return cls(s, s.closure([d0]) if d0 else frozenset())

    def boundary_mask(self) -> SubcomplexMask:
        idx = self.ambient.index
        return SubcomplexMask.of(idx[x] for x in self.boundary)

    def face_of(self, simplex: tuple[int, ...]) -> tuple[int, ...]:
        """Vertices of ``simplex`` lying in ∂X, in order."""
        return tuple(v for v in simplex if (v,) in self.boundary)

    def condition_violations(self) -> list[tuple[int, ...]]:
        bad = []
        for s in self.ambient.simplices:
            f = self.face_of(s)
            if f and f not in self.boundary:
                bad.append(s)
        return bad


@dataclass
class RetractionPair:
    """Δ⁺, ∂Δ⁺ and Δ⁻ as sets of subdivision cells (indices into ``subdivided``)."""

    source: FacePairInput
    subdivided: SimplicialComplex
    flags: dict[tuple[int, ...], Flag]
    plus: frozenset
    boundary_plus: frozenset
    minus: frozenset
    report: dict = field(default_factory=dict)

    def mask(self, which: str) -> SubcomplexMask:
        idx = self.subdivided.index
        return SubcomplexMask.of(idx[c] for c in getattr(self, which))

    def top_plus(self) -> list[tuple[int, ...]]:
        d = self.source.ambient.dim
        return [c for c in self.plus if len(c) == d + 1]


def _cell_key(s: SimplicialComplex, chain) -> tuple[int, ...]:
    return tuple(s.index[x] for x in chain)


def _subsets_of_flag(cell: tuple[int, ...]):
    n = len(cell)
    for mask in range(1, 1 << n):
        yield tuple(cell[i] for i in range(n) if mask >> i & 1)


def _solo_pieces(s: SimplicialComplex, top: tuple[int, ...], face: tuple[int, ...], flags_of):
    """Δ⁺, ∂Δ⁺, Δ⁻ of the single simplex ``top`` with Δ_0 = ``face`` (as cell keys).

    Built from the definitions: closures of the full flags on each side, and
    cells none of whose vertices is a barycenter inside either face.
    """
    d0 = set(face)
    d1 = set(top) - d0
    plus, minus, bplus = set(), set(), set()
    for chain in flags_of(top):
        if len(chain) == len(top) and all(len(x) == i + 1 for i, x in enumerate(chain)):
            target = plus if chain[0][0] not in d0 else minus
            target.update(_subsets_of_flag(_cell_key(s, chain)))
    if d0 and d1:
        for k in range(1, len(top) + 1):
            for f in combinations(top, k):
                for chain in flags_of(f):
                    if not any(set(x) <= d0 or set(x) <= d1 for x in chain):
                        bplus.add(_cell_key(s, chain))
    return frozenset(plus), frozenset(bplus), frozenset(minus)


def _flag_enumerator():
    memo: dict = {}

    def flags_of(top):
        got = memo.get(top)
        if got is None:
            got = [(top,)]
            for k in range(1, len(top)):
                for f in combinations(top, k):
                    got.extend(c + (top,) for c in flags_of(f))
            memo[top] = got
        return got

    return flags_of


def retract_complex(inp: FacePairInput) -> RetractionPair:
    """Glue the per-simplex pieces over every simplex of X."""
    bad = inp.condition_violations()
    if bad:
        raise FaceConditionViolated(f"vertices of {list(bad[0])} in the boundary do not span a boundary simplex")
    s = inp.ambient
    brc, flags = barycentric_subdivide(s)
    flags_of = _flag_enumerator()
    plus, bplus, minus = set(), set(), set()
    per_simplex = {}
    for top in s.simplices:
        p, b, m = _solo_pieces(s, top, inp.face_of(top), flags_of)
        per_simplex[top] = (p, b, m)
        plus |= p
        bplus |= b
        minus |= m
    pair = RetractionPair(inp, brc, flags, frozenset(plus), frozenset(bplus), frozenset(minus))
    pair.report = _report(pair, per_simplex)
    return pair


def retract_simplex(vertices: Sequence[int], delta0: Iterable[int], coords=None) -> RetractionPair:
    delta0 = list(delta0)
    for v in delta0:
        if v not in vertices:
            raise DegenerateFace(f"vertex {v} is not a vertex of the simplex")
    return retract_complex(FacePairInput.simplex(vertices, delta0, coords))


def _report(pair: RetractionPair, per_simplex) -> dict:
    s = pair.source.ambient
    bd = pair.source.boundary
    brc = pair.subdivided
    # restriction of the glued pieces to each closed simplex equals its own pieces
    restrict_ok = True
    for top, (p, b, m) in per_simplex.items():
        inside = {k for k in pair.plus | pair.minus | pair.boundary_plus if set(pair.flags[k].last) <= set(top)}
        if {k for k in inside if k in pair.plus} != p or {k for k in inside if k in pair.minus} != m:
            restrict_ok = False
        if {k for k in inside if k in pair.boundary_plus} != b:
            restrict_ok = False
    touching = [k for k in pair.plus for v in k if s.simplices[v] in bd]
    star = {}
    for k in pair.plus:
        for v in k:
            star[v] = star.get(v, 0) + 1
    return {
        "restriction_consistent": restrict_ok,
        "plus_avoids_boundary": not touching,
        "plus_cells": len(pair.plus),
        "boundary_plus_cells": len(pair.boundary_plus),
        "minus_cells": len(pair.minus),
        "max_vertex_star": max(star.values(), default=0),
        "subdivision_cells": len(brc.simplices),
    }


def criterion_check(pair: RetractionPair) -> dict:
    """Membership read off the flag agrees with the constructed pieces.

    For every cell: in Δ⁺ iff no flag member lies in Δ_0, iff s_0 meets Δ_1,
    iff s_0 is not inside Δ_0; on ∂Δ⁺ iff s_0 meets both faces.  Also
    Δ⁺ ∪ Δ⁻ is everything and Δ⁺ ∩ Δ⁻ = ∂Δ⁺.
    """
    bad = []
    for key, fl in pair.flags.items():
        face = set(pair.source.face_of(fl.last))
        opposite = set(fl.last) - face
        cls = classify_cell(fl, face, opposite)
        inside = key in pair.plus
        if inside != (cls["side"] is CellClass.PLUS):
            bad.append((key, "first member not inside the face"))
        if inside != bool(set(fl.first) & opposite):
            bad.append((key, "first member meets the opposite face"))
        if inside != (not any(set(x) <= face for x in fl.chain)):
            bad.append((key, "cell avoids the face"))
        if (key in pair.boundary_plus) != cls["boundary"]:
            bad.append((key, "boundary"))
    every = frozenset(pair.flags)
    partition = (pair.plus | pair.minus) == every and (pair.plus & pair.minus) == pair.boundary_plus
    if not partition:
        bad.append(((), "partition"))
    return {"ok": not bad, "partition": partition, "mismatches": bad}


def _topological_boundary(cells: frozenset, top_dim: int) -> frozenset:
    """Closure of the (top-1)-cells lying in exactly one top cell."""
    count: dict = {}
    for c in cells:
        if len(c) == top_dim + 1:
            for i in range(len(c)):
                f = c[:i] + c[i + 1:]
                count[f] = count.get(f, 0) + 1
    out = set()
    for f, n in count.items():
        if n == 1:
            out.update(_subsets_of_flag(f))
    return frozenset(out)


def boundary_decomposition_check(pair: RetractionPair) -> dict:
    """Check ``bd(Δ⁺) = ∂Δ⁺ ∪ (union of σ⁺ over facets σ)`` for a single simplex."""
    s = pair.source.ambient
    tops = s.maximal()
    if len(tops) != 1:
        raise ValueError("the boundary decomposition is stated for a single simplex")
    top = tops[0]
    d = len(top) - 1
    lhs = _topological_boundary(pair.plus, d) if d > 0 else frozenset()
    flags_of = _flag_enumerator()
    facet_plus = set()
    for i in range(len(top)):
        if d == 0:
            break
        facet = top[:i] + top[i + 1:]
        p, _, _ = _solo_pieces(s, facet, pair.source.face_of(facet), flags_of)
        facet_plus |= p
    rhs = pair.boundary_plus | facet_plus
    on_bd = frozenset(k for k in pair.plus if pair.flags[k].last != top)
    interior = [k for k in lhs if pair.flags[k].last == top]
    inner = frozenset(x for k in interior for x in _subsets_of_flag(k))
    d0 = pair.source.face_of(top)
    both = bool(d0) and len(d0) < len(top)
    pure = True
    if both:
        top_b = [k for k in pair.boundary_plus if len(k) == d]
        covered = frozenset(x for k in top_b for x in _subsets_of_flag(k))
        pure = covered == pair.boundary_plus and all(len(k) <= d for k in pair.boundary_plus)
        pure = pure and any(len(k) == d + 1 for k in pair.plus)
    return {
        "ok": lhs == rhs and on_bd == facet_plus and inner == pair.boundary_plus and pure,
        "decomposition": lhs == rhs,
        "facets": on_bd == facet_plus,
        "interior": inner == pair.boundary_plus,
        "pure": pure,
    }


def _bary(x: Sequence) -> tuple[Fraction, ...]:
    out = tuple(Fraction(v) for v in x)
    if any(v < 0 for v in out) or sum(out) != 1:
        raise ValueError("not barycentric coordinates")
    return out


def crossing_parameter(x: Sequence, y: Sequence, delta0: Iterable[int] | None = None) -> Fraction:
    """The t with ``t x + (1-t) y`` on ∂Δ⁺, for x in Δ_0 and y in Δ_1.

    Points are barycentric coordinate vectors; Δ_0 defaults to the support of x.
    Larger t moves towards x, i.e. into Δ⁻.
    """
    x, y = _bary(x), _bary(y)
    if len(x) != len(y):
        raise ValueError("points of different simplices")
    d0 = {i for i, v in enumerate(x) if v} if delta0 is None else set(delta0)
    if not d0 or len(d0) == len(x):
        raise DegenerateFace("both faces must be nonempty")
    if any(v and i not in d0 for i, v in enumerate(x)):
        raise ValueError("x is not in the face Δ_0")
    if any(v and i in d0 for i, v in enumerate(y)):
        raise ValueError("y is not in the opposite face")
    mx = max(x[i] for i in d0)
    my = max(v for i, v in enumerate(y) if i not in d0)
    return my / (mx + my)


class CrossingFunction:
    """``t(x, y)`` for a fixed simplex dimension and face Δ_0."""

    def __init__(self, dim: int, delta0: Iterable[int]):
        self.dim = dim
        self.delta0 = frozenset(delta0)
        if not self.delta0 or len(self.delta0) > dim:
            raise DegenerateFace("both faces must be nonempty")

    def __call__(self, x: Sequence, y: Sequence) -> Fraction:
        if len(x) != self.dim + 1:
            raise ValueError("wrong number of barycentric coordinates")
        return crossing_parameter(x, y, self.delta0)


def carrier_flag(lam: Sequence) -> tuple[tuple[int, ...], ...]:
    """The flag of the open subdivision cell containing the point (positions 0..d)."""
    lam = _bary(lam)
    levels = sorted({v for v in lam if v}, reverse=True)
    chain = []
    for lv in levels:
        chain.append(tuple(i for i, v in enumerate(lam) if v >= lv))
    return tuple(chain)


def classify_point(lam: Sequence, delta0: Iterable[int]) -> str:
    """``"plus"``, ``"boundary"`` or ``"minus"`` for a point given in barycentric coordinates."""
    fl = carrier_flag(lam)
    d0 = set(delta0)
    c = classify_cell(fl, d0, set(range(len(lam))) - d0)
    if c["boundary"]:
        return "boundary"
    return str(c["side"])


def _relative_cochains(pair: RetractionPair) -> tuple[ChainComplex, ChainComplex]:
    src_d = as_delta(pair.subdivided)
    src = compact_cochain_pair(src_d, pair.mask("boundary_plus"), pair.mask("plus"))
    tgt = compact_cochain_pair(pair.source.ambient, pair.source.boundary_mask())
    return src, tgt


def retraction_cochain_map(pair: RetractionPair, complexes=None) -> dict[int, Matrix]:
    """``R^k: C^k(Δ⁺, ∂Δ⁺) -> C^k(X, ∂X)``, evaluating a cochain on the Δ⁺ part of each simplex."""
    src, tgt = complexes if complexes is not None else _relative_cochains(pair)
    s = pair.source.ambient
    brc = pair.subdivided
    out = {}
    for k in tgt.degrees():
        e = {}
        for c in src.cells.get(k, ()):
            key = brc.simplices[c]
            fl = pair.flags[key]
            if not fl.is_full():
                continue
            sigma = s.index[fl.last]
            row = tgt.offsets[k].get(sigma)
            if row is None:
                continue
            e[(row, src.offsets[k][c])] = subdivision_sign(fl.chain)
        out[k] = Matrix(tgt.dim(k), src.dim(k), e)
    return out


def quasi_isomorphism_check(pair: RetractionPair) -> dict:
    """Chain-map identity and the rank of R on cohomology in every degree."""
    src, tgt = _relative_cochains(pair)
    r = retraction_cochain_map(pair, (src, tgt))
    chain_ok = all((r[k + 1] @ src.diff(k)) == (tgt.diff(k) @ r[k]) for k in tgt.degrees() if k + 1 in r)
    hs = homology_dims(src)
    ht = homology_dims(tgt)
    ranks = {}
    for k in tgt.degrees():
        if hs.get(k, 0) and ht.get(k, 0):
            a, b = homology(src, k), homology(tgt, k)
            ranks[k] = rank(induced_map(r[k], a.cycles, a.boundaries, b.cycles, b.boundaries))
        else:
            ranks[k] = 0
    iso = chain_ok and all(hs.get(k, 0) == ht.get(k, 0) == ranks[k] for k in tgt.degrees())
    return {"ok": iso, "chain_map": chain_ok, "source": hs, "target": ht, "ranks": ranks}


def verify_acyclicity(inp: FacePairInput, expected_degree: int | None = None) -> dict:
    """Relative cohomology of (X, ∂X) should be Q in one degree and zero elsewhere."""
    k = expected_degree if expected_degree is not None else inp.expected_degree
    if k is None:
        raise ValueError("no expected degree given")
    tgt = compact_cochain_pair(inp.ambient, inp.boundary_mask())
    h = homology_dims(tgt)
    expect = {j: int(j == k) for j in h}
    pair = retract_complex(inp)
    qis = quasi_isomorphism_check(pair)
    return {
        "ok": h == expect and qis["ok"],
        "degree": k,
        "cohomology": h,
        "expected": expect,
        "retraction": qis,
        "pieces": pair.report,
    }
