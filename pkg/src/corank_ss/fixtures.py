"""Builders for the shipped example inputs in ``fixtures/``.

Each builder returns the in-memory object; :func:`all_fixtures` maps file
names to their JSON documents so the shipped files can be regenerated and
compared byte for byte.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .complex import DeltaComplex, SimplicialComplex, SubcomplexMask, as_delta
from .corank import Augmentation, CorankInput, Cusp, hilbert_example
from .cosheaf import Cosheaf
from .exactlinalg import Matrix
from .retraction import FacePairInput

__all__ = [
    "point",
    "simplicial_cusp",
    "mixed_sphere",
    "mixed_disk",
    "mixed_twisted",
    "mixed_siegel",
    "shape_violation",
    "quadrant_cone",
    "three_cone",
    "triangle_v0",
    "MIXED",
    "all_fixtures",
]


def point() -> DeltaComplex:
    return DeltaComplex.from_cells([((0,), ())])


def simplicial_cusp(
    label: str,
    corank: int,
    s: SimplicialComplex,
    boundary: list[tuple[int, ...]],
    targets: Mapping[tuple[int, ...], tuple[str, SimplicialComplex | None, tuple[int, ...]]],
    chi_gamma=None,
    chi_hol=None,
    cosheaf: Cosheaf | None = None,
    augment: bool = True,
) -> Cusp:
    """Cusp on a simplicial complex with constant Q unless ``cosheaf`` is given.

    ``targets`` sends each boundary simplex to ``(cusp label, its complex, simplex)``;
    a complex of ``None`` means the target is a point cusp (cell 0).
    """
    d = as_delta(s)
    bd = SubcomplexMask.of(s.index[x] for x in s.closure(boundary)) if boundary else SubcomplexMask()
    gluing = {}
    for x, (t, ts, tx) in targets.items():
        gluing[s.index[x]] = (t, 0 if ts is None else ts.index[tx])
    f = cosheaf if cosheaf is not None else Cosheaf.constant(d)
    aug = {}
    if augment:
        maps = {c.id: Matrix.from_dense([[1] * f.dims[c.id]]) for c in d.cells if c.dim == 0 and c.id not in bd and f.dims[c.id]}
        aug[0] = Augmentation(1, maps)
    return Cusp(label, corank, d, bd, {0: f}, gluing, None if chi_gamma is None else Fraction(chi_gamma), None if chi_hol is None else Fraction(chi_hol), aug)


def _point_cusp(label: str, corank: int, chi_gamma=1, chi_hol=1) -> Cusp:
    d = point()
    aug = {0: Augmentation(1, {0: Matrix.identity(1)})}
    return Cusp(label, corank, d, SubcomplexMask(), {0: Cosheaf.constant(d)}, {}, Fraction(chi_gamma), Fraction(chi_hol), aug)


def mixed_sphere() -> CorankInput:
    """Two corank-1 points and a corank-2 tetrahedron boundary touching them at two vertices."""
    sphere = SimplicialComplex(range(4), [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])
    s = simplicial_cusp("S", 2, sphere, [(0,), (3,)], {(0,): ("a", None, (0,)), (3,): ("b", None, (0,))}, 0, 1)
    return CorankInput(3, 2, (1, 3), (_point_cusp("a", 1), _point_cusp("b", 1), s))


def _circle() -> SimplicialComplex:
    return SimplicialComplex(range(3), [(0, 1), (1, 2), (0, 2)])


def _cone() -> SimplicialComplex:
    return SimplicialComplex(range(4), [(0, 1, 3), (0, 2, 3), (1, 2, 3)])


def _cone_targets(circle: SimplicialComplex) -> dict:
    return {x: ("C", circle, x) for x in [(0,), (1,), (2,), (0, 1), (1, 2), (0, 2)]}


def mixed_disk() -> CorankInput:
    """A corank-1 circle and a corank-2 disk (cone on the circle) glued along it."""
    circle = _circle()
    c = simplicial_cusp("C", 1, circle, [], {}, 0, 1)
    cone = _cone()
    d = simplicial_cusp("D", 2, cone, [(0, 1), (1, 2), (0, 2)], _cone_targets(circle), 1, 1)
    return CorankInput(3, 2, (2, 3), (c, d))


_UNIPOTENT = Matrix.from_dense([[1, 1], [0, 1]])
_E1 = Matrix.from_dense([[1], [0]])


def _twisted_circle_sheaf(d: DeltaComplex, s: SimplicialComplex) -> Cosheaf:
    ident = Matrix.identity(2)
    ext = {(c.id, i): ident for c in d.cells for i in range(len(c.faces))}
    ext[(s.index[(0, 2)], 1)] = _UNIPOTENT
    return Cosheaf(d, [2] * len(d), ext)


def mixed_twisted() -> CorankInput:
    """Like :func:`mixed_disk` with a rank-2 unipotent local system on the circle."""
    circle = _circle()
    dc = as_delta(circle)
    c = simplicial_cusp("C", 1, circle, [], {}, 0, 1, cosheaf=_twisted_circle_sheaf(dc, circle))
    cone = _cone()
    dd = as_delta(cone)
    boundary = {cone.index[x] for x in [(0,), (1,), (2,), (0, 1), (1, 2), (0, 2)]}
    dims = [2 if c_.id in boundary else 1 for c_ in dd.cells]
    ext = {}
    for cell in dd.cells:
        for i, face in enumerate(cell.faces):
            if cell.id in boundary:
                ext[(cell.id, i)] = Matrix.identity(2)
            elif face in boundary:
                ext[(cell.id, i)] = _E1
            else:
                ext[(cell.id, i)] = Matrix.identity(1)
    ext[(cone.index[(0, 2)], 1)] = _UNIPOTENT
    f = Cosheaf(dd, dims, ext)
    d = simplicial_cusp("D", 2, cone, [(0, 1), (1, 2), (0, 2)], _cone_targets(circle), 1, 1, cosheaf=f)
    return CorankInput(3, 2, (2, 3), (c, d))


def mixed_siegel() -> CorankInput:
    """Three coranks with n(i) = i(i+1)/2: points, edges, and a disk with a 3-sphere attached.

    The corank-3 piece has relative homology in degrees 2 and 3 only, so its
    Euler characteristic vanishes, matching chi_gamma = 0.
    """
    names = ["P0", "P1", "P2"]
    cusps = [_point_cusp(n, 1) for n in names]
    edge = SimplicialComplex(range(2), [(0, 1)])
    edges = {}
    for a, b in [(0, 1), (1, 2), (0, 2)]:
        lab = f"E{a}{b}"
        edges[(a, b)] = lab
        cusps.append(simplicial_cusp(lab, 2, edge, [(0,), (1,)], {(0,): (names[a], None, (0,)), (1,): (names[b], None, (0,))}, -1, 1))
    sphere3 = [tuple(x for x in range(3, 8) if x != skip) for skip in range(3, 8)]
    top = SimplicialComplex(range(8), [(0, 1, 3), (0, 2, 3), (1, 2, 3)] + sphere3)
    targets = {(v,): (names[v], None, (0,)) for v in range(3)}
    for (a, b), lab in edges.items():
        targets[(a, b)] = (lab, edge, (0, 1))
    cusps.append(simplicial_cusp("T", 3, top, [(0, 1), (1, 2), (0, 2)], targets, 0, 1))
    return CorankInput(6, 3, (1, 3, 6), tuple(cusps))


def shape_violation() -> CorankInput:
    """A corank-2 cusp that is a single closed vertex: homology lands at j = -1."""
    return CorankInput(3, 2, (1, 3), (_point_cusp("a", 1), _point_cusp("P", 2, 1, 1)))


def quadrant_cone() -> FacePairInput:
    """An interval cut into three edges, relative to its endpoints."""
    s = SimplicialComplex(range(4), [(0, 1), (1, 2), (2, 3)], {i: (Fraction(i, 3),) for i in range(4)})
    return FacePairInput.make(s, [(0,), (3,)], expected_degree=1)


def three_cone() -> FacePairInput:
    """A triangle coned from its center, relative to the outer edges."""
    coords = {0: (0, 0), 1: (1, 0), 2: (0, 1), 3: (Fraction(1, 3), Fraction(1, 3))}
    s = SimplicialComplex(range(4), [(0, 1, 3), (0, 2, 3), (1, 2, 3)], coords)
    return FacePairInput.make(s, [(0, 1), (1, 2), (0, 2)], expected_degree=2)


def triangle_v0() -> FacePairInput:
    return FacePairInput.simplex([0, 1, 2], [0], {0: (0, 0), 1: (1, 0), 2: (0, 1)})


MIXED = {
    "mixed_sphere": mixed_sphere,
    "mixed_disk": mixed_disk,
    "mixed_twisted": mixed_twisted,
    "mixed_siegel": mixed_siegel,
}


def all_fixtures() -> dict[str, dict]:
    from .schemas import corank_to_json, facepair_to_json

    out = {f"{k}.json": corank_to_json(v()) for k, v in MIXED.items()}
    out["hilbert_1_3.json"] = corank_to_json(hilbert_example(1, 3))
    out["hilbert_2_5.json"] = corank_to_json(hilbert_example(2, 5))
    out["shape_violation.json"] = corank_to_json(shape_violation())
    out["quadrant_cone.json"] = facepair_to_json(quadrant_cone())
    out["three_cone.json"] = facepair_to_json(three_cone())
    out["triangle_v0.json"] = facepair_to_json(triangle_v0())
    return out
