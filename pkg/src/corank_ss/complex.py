"""Δ-complexes, finite simplicial complexes and barycentric subdivision.

A :class:`DeltaComplex` is the general object: every k-cell carries an ordered
vertex list of length k+1 and the ids of its k+1 faces, the i-th face having
the vertex list with position i deleted.  Two cells may share a vertex set.

A :class:`SimplicialComplex` is the special case used for subdivision and the
retraction construction; it converts to a Δ-complex with :func:`as_delta`.

Boundary convention everywhere: ``d[v0..vk] = sum_i (-1)^i face_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exactlinalg import Matrix, rank

__all__ = [
    "Cell",
    "DeltaComplex",
    "SubcomplexMask",
    "SimplicialComplex",
    "Flag",
    "validate",
    "barycentric_subdivide",
    "subdivision_chain_map",
    "subdivision_sign",
    "as_delta",
    "euler_char",
]


@dataclass(frozen=True)
class Cell:
    id: int
    dim: int
    verts: tuple[int, ...]
    faces: tuple[int, ...]
    label: object = None


class DeltaComplex:
    """Finite Δ-complex.  Cell ids are ``0..len(cells)-1`` in listing order."""

    def __init__(self, vertices: Sequence[int], cells: Sequence[Cell], masks: Mapping[str, "SubcomplexMask"] | None = None):
        self.vertices = tuple(vertices)
        self.cells = tuple(cells)
        self.masks = dict(masks or {})
        by_dim: dict[int, list[int]] = {}
        for c in self.cells:
            by_dim.setdefault(c.dim, []).append(c.id)
        self._by_dim = {k: tuple(sorted(v)) for k, v in by_dim.items()}

    @classmethod
    def from_cells(cls, cells: Iterable[tuple], vertices: Sequence[int] | None = None, masks=None) -> "DeltaComplex":
        """Build from ``(verts, faces)`` or ``(verts, faces, label)`` tuples; ids by position."""
        out = []
        for i, spec in enumerate(cells):
            verts, faces = tuple(spec[0]), tuple(spec[1])
            label = spec[2] if len(spec) > 2 else None
            out.append(Cell(i, len(verts) - 1, verts, faces, label))
        if vertices is None:
            vertices = sorted({c.verts[0] for c in out if c.dim == 0})
        return cls(vertices, out, masks)

    @property
    def dim(self) -> int:
        return max(self._by_dim, default=-1)

    def cell(self, cid: int) -> Cell:
        return self.cells[cid]

    def cells_of_dim(self, k: int) -> tuple[int, ...]:
        return self._by_dim.get(k, ())

    def __len__(self) -> int:
        return len(self.cells)

    def all_cells(self) -> "SubcomplexMask":
        return SubcomplexMask(frozenset(range(len(self.cells))))

    def counts(self) -> list[int]:
        return [len(self.cells_of_dim(k)) for k in range(self.dim + 1)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DeltaComplex):
            return NotImplemented
        return self.vertices == other.vertices and self.cells == other.cells and self.masks == other.masks

    def __repr__(self) -> str:
        return f"DeltaComplex(counts={self.counts()})"


@dataclass(frozen=True)
class SubcomplexMask:
    member: frozenset = field(default_factory=frozenset)

    @classmethod
    def of(cls, cells: Iterable[int]) -> "SubcomplexMask":
        return cls(frozenset(cells))

    def __contains__(self, cid: int) -> bool:
        return cid in self.member

    def __len__(self) -> int:
        return len(self.member)

    def __iter__(self):
        return iter(sorted(self.member))

    def is_closed(self, d: DeltaComplex) -> bool:
        return all(f in self.member for c in self.member for f in d.cells[c].faces)

    def missing_faces(self, d: DeltaComplex) -> list[tuple[int, int]]:
        return sorted((c, f) for c in self.member for f in d.cells[c].faces if f not in self.member)

    @classmethod
    def closure(cls, d: DeltaComplex, cells: Iterable[int]) -> "SubcomplexMask":
        seen = set()
        stack = list(cells)
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            stack.extend(d.cells[c].faces)
        return cls(frozenset(seen))

    def __or__(self, other: "SubcomplexMask") -> "SubcomplexMask":
        return SubcomplexMask(self.member | other.member)

    def __and__(self, other: "SubcomplexMask") -> "SubcomplexMask":
        return SubcomplexMask(self.member & other.member)

    def __sub__(self, other: "SubcomplexMask") -> "SubcomplexMask":
        # not face-closed in general; used for "cells of A not in B"
        return SubcomplexMask(self.member - other.member)

    def __le__(self, other: "SubcomplexMask") -> bool:
        return self.member <= other.member


def validate(d: DeltaComplex) -> list[str]:
    """All invariant violations of ``d`` (empty list means valid)."""
    out: list[str] = []
    n = len(d.cells)
    vset = set(d.vertices)
    if len(vset) != len(d.vertices):
        out.append("duplicate vertex ids")
    zero_cells: dict[int, list[int]] = {}
    for idx, c in enumerate(d.cells):
        if c.id != idx:
            out.append(f"cell at position {idx} has id {c.id}")
            continue
        if c.dim < 0 or len(c.verts) != c.dim + 1:
            out.append(f"cell {c.id}: dimension {c.dim} with {len(c.verts)} vertices")
            continue
        for v in c.verts:
            if v not in vset:
                out.append(f"cell {c.id}: unknown vertex {v}")
        if c.dim == 0:
            zero_cells.setdefault(c.verts[0], []).append(c.id)
            if c.faces:
                out.append(f"cell {c.id}: 0-cell with faces")
            continue
        if len(c.faces) != c.dim + 1:
            out.append(f"cell {c.id}: {len(c.faces)} faces for a {c.dim}-cell")
            continue
        for i, f in enumerate(c.faces):
            if not 0 <= f < n:
                out.append(f"cell {c.id}: face {i} refers to missing cell {f}")
                continue
            fc = d.cells[f]
            if fc.dim != c.dim - 1:
                out.append(f"cell {c.id}: face {i} is cell {f} of dimension {fc.dim}, expected {c.dim - 1}")
                continue
            expect = c.verts[:i] + c.verts[i + 1:]
            if fc.verts != expect:
                out.append(f"cell {c.id}: face {i} (cell {f}) has vertices {list(fc.verts)}, expected {list(expect)}")
    for v in d.vertices:
        k = len(zero_cells.get(v, []))
        if k != 1:
            out.append(f"vertex {v} has {k} 0-cells")
    if out:
        return out
    # simplicial identities: face_i(face_j c) == face_{j-1}(face_i c) for i < j
    for c in d.cells:
        if c.dim < 2:
            continue
        for j in range(c.dim + 1):
            for i in range(j):
                a = d.cells[c.faces[j]].faces[i]
                b = d.cells[c.faces[i]].faces[j - 1]
                if a != b:
                    out.append(f"cell {c.id}: simplicial identity fails for i={i}, j={j} ({a} != {b})")
    for name, m in sorted(d.masks.items()):
        bad = [c for c in m.member if not 0 <= c < n]
        if bad:
            out.append(f"mask {name!r}: unknown cells {sorted(bad)}")
        elif not m.is_closed(d):
            c, f = m.missing_faces(d)[0]
            out.append(f"mask {name!r}: not face-closed (cell {c} lacks face {f})")
    return out


def euler_char(d: DeltaComplex, mask: SubcomplexMask | None = None) -> int:
    if mask is None:
        return sum((-1) ** c.dim for c in d.cells)
    return sum((-1) ** d.cells[c].dim for c in mask.member)


class SimplicialComplex:
    """Finite simplicial complex with a vertex numbering and optional rational coordinates.

    Simplices are tuples of vertex ids sorted by the numbering, listed by
    dimension and then lexicographically in numbering positions.
    """

    def __init__(self, vertices: Sequence[int], simplices: Iterable[Iterable[int]] = (), coords: Mapping[int, Sequence] | None = None):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        self._pos = {v: i for i, v in enumerate(self.vertices)}
        found = {(v,) for v in self.vertices}
        for s in simplices:
            s = self.sort_simplex(s)
            for k in range(1, len(s) + 1):
                found.update(combinations(s, k))
        self._set_simplices(found)
        self.coords = None
        if coords is not None:
            self._set_coords(coords)

    def _set_simplices(self, found) -> None:
        pos = self._pos
        self.simplices = tuple(sorted(found, key=lambda s: (len(s), [pos[v] for v in s])))
        self.index = {s: i for i, s in enumerate(self.simplices)}

    def _set_coords(self, coords) -> None:
        cc = {}
        n = None
        for v in self.vertices:
            if v not in coords:
                raise ValueError(f"vertex {v} has no coordinates")
            x = tuple(Fraction(c) if not isinstance(c, float) else _nofloat() for c in coords[v])
            if n is None:
                n = len(x)
            elif len(x) != n:
                raise ValueError("coordinates of differing lengths")
            cc[v] = x
        self.coords = cc
        bad = self.affinely_dependent()
        if bad:
            raise ValueError(f"simplex {list(bad[0])} has affinely dependent vertices")

    @classmethod
    def simplex(cls, vertices: Sequence[int], coords=None) -> "SimplicialComplex":
        return cls(vertices, [vertices], coords)

    @classmethod
    def _trusted(cls, vertices, simplices, coords=None) -> "SimplicialComplex":
        s = cls.__new__(cls)
        s.vertices = tuple(vertices)
        s._pos = {v: i for i, v in enumerate(s.vertices)}
        s.simplices = tuple(simplices)
        s.index = {x: i for i, x in enumerate(s.simplices)}
        s.coords = coords
        return s

    def sort_simplex(self, s: Iterable[int]) -> tuple[int, ...]:
        s = tuple(s)
        for v in s:
            if v not in self._pos:
                raise ValueError(f"unknown vertex {v}")
        out = tuple(sorted(set(s), key=self._pos.__getitem__))
        if len(out) != len(s):
            raise ValueError(f"repeated vertex in simplex {list(s)}")
        return out

    @property
    def dim(self) -> int:
        return len(self.simplices[-1]) - 1 if self.simplices else -1

    def of_dim(self, k: int) -> list[tuple[int, ...]]:
        return [s for s in self.simplices if len(s) == k + 1]

    def faces(self, s: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Codimension-1 faces in face-index order (position i deleted)."""
        return [s[:i] + s[i + 1:] for i in range(len(s))] if len(s) > 1 else []

    def maximal(self) -> list[tuple[int, ...]]:
        cofaces = set()
        for s in self.simplices:
            for f in self.faces(s):
                cofaces.add(f)
        return [s for s in self.simplices if s not in cofaces]

    def closure(self, simplices: Iterable[Iterable[int]]) -> frozenset:
        out = set()
        for s in simplices:
            s = self.sort_simplex(s)
            if s not in self.index:
                raise ValueError(f"{list(s)} is not a simplex")
            for k in range(1, len(s) + 1):
                out.update(combinations(s, k))
        return frozenset(out)

    def barycenter(self, s: tuple[int, ...]) -> tuple[Fraction, ...] | None:
        if self.coords is None:
            return None
        n = len(self.coords[s[0]])
        k = len(s)
        return tuple(sum((self.coords[v][i] for v in s), Fraction(0)) / k for i in range(n))

    def affinely_dependent(self) -> list[tuple[int, ...]]:
        if self.coords is None:
            return []
        bad = []
        for s in self.maximal():
            if len(s) < 2:
                continue
            base = self.coords[s[0]]
            rows = [[a - b for a, b in zip(self.coords[v], base)] for v in s[1:]]
            if rank(Matrix.from_dense(rows)) != len(s) - 1:
                bad.append(s)
        return bad

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self.vertices == other.vertices and self.simplices == other.simplices and self.coords == other.coords

    def __repr__(self) -> str:
        return f"SimplicialComplex(vertices={len(self.vertices)}, simplices={len(self.simplices)}, dim={self.dim})"


def _nofloat():
    raise TypeError("floating point coordinates are not accepted")


@dataclass(frozen=True)
class Flag:
    """A chain ``s_0 < s_1 < ... < s_k`` of simplices, each a proper face of the next."""

    chain: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for a, b in zip(self.chain, self.chain[1:]):
            if not (len(a) < len(b) and set(a) < set(b)):
                raise ValueError(f"{a} is not a proper face of {b}")

    @property
    def first(self) -> tuple[int, ...]:
        return self.chain[0]

    @property
    def last(self) -> tuple[int, ...]:
        return self.chain[-1]

    def __len__(self) -> int:
        return len(self.chain)

    def is_full(self) -> bool:
        """True when the flag is maximal inside its last member."""
        return all(len(s) == i + 1 for i, s in enumerate(self.chain))


def _flags_ending_at(s: SimplicialComplex, memo: dict, top: tuple[int, ...]):
    got = memo.get(top)
    if got is not None:
        return got
    out = [(top,)]
    for k in range(1, len(top)):
        for face in combinations(top, k):
            for f in _flags_ending_at(s, memo, face):
                out.append(f + (top,))
    memo[top] = out
    return out


def barycentric_subdivide(s: SimplicialComplex) -> tuple[SimplicialComplex, dict[tuple[int, ...], Flag]]:
    """Barycentric subdivision and the map from its simplices to flags of ``s``.

    Vertex ``i`` of the result is the barycenter of ``s.simplices[i]``; since
    those are listed by dimension, a flag read in increasing numbering order is
    exactly the chain ``s_0 < ... < s_k``.
    """
    memo: dict = {}
    flags = []
    for top in s.simplices:
        flags.extend(_flags_ending_at(s, memo, top))
    idx = s.index
    cells = [tuple(idx[x] for x in f) for f in flags]
    order = sorted(range(len(cells)), key=lambda i: (len(cells[i]), cells[i]))
    simplices = [cells[i] for i in order]
    flag_index = {cells[i]: Flag(flags[i]) for i in order}
    coords = None
    if s.coords is not None:
        coords = {i: s.barycenter(x) for i, x in enumerate(s.simplices)}
    brc = SimplicialComplex._trusted(range(len(s.simplices)), simplices, coords)
    return brc, flag_index


def subdivision_sign(chain: Sequence[tuple[int, ...]]) -> int:
    """Coefficient of a full flag in the subdivision of its last simplex.

    Defined by ``S(v) = b_v`` and ``S(s) = (-1)^k S(ds) * b_s`` (join with the
    barycenter placed last), which makes ``S`` a chain map.
    """
    sign = 1
    for j in range(1, len(chain)):
        prev, cur = chain[j - 1], chain[j]
        (added,) = set(cur) - set(prev)
        pos = cur.index(added)
        if (j + pos) % 2:
            sign = -sign
    return sign


def subdivision_chain_map(s: SimplicialComplex, brc: tuple | None = None) -> dict[int, Matrix]:
    """Per degree k, the subdivision operator ``C_k(s) -> C_k(brc)`` as a matrix.

    Column of a k-simplex: its full flags with :func:`subdivision_sign`.  The
    transpose is the cochain map ``C^k(brc) -> C^k(s)`` sending a subdivided
    k-cell to the simplex it subdivides.
    """
    if brc is None:
        brc = barycentric_subdivide(s)
    sub, flag_index = brc
    out = {}
    for k in range(s.dim + 1):
        src = s.of_dim(k)
        dst = sub.of_dim(k)
        src_pos = {x: i for i, x in enumerate(src)}
        e = {}
        for r, cell in enumerate(dst):
            fl = flag_index[cell]
            if fl.is_full():
                e[(r, src_pos[fl.last])] = subdivision_sign(fl.chain)
        out[k] = Matrix(len(dst), len(src), e)
    return out


def as_delta(s: SimplicialComplex) -> DeltaComplex:
    """Δ-complex with cell id = index in ``s.simplices``; labels are the simplices."""
    idx = s.index
    cells = []
    for i, x in enumerate(s.simplices):
        faces = tuple(idx[f] for f in s.faces(x))
        cells.append(Cell(i, len(x) - 1, x, faces, x))
    return DeltaComplex(s.vertices, cells)
