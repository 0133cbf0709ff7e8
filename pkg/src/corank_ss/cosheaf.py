"""Cellular cosheaves of rational vector spaces on Δ-complexes and their chain complexes.

A cosheaf assigns a stalk ``Q^{dim(c)}`` to every cell and an extension map
``stalk(c) -> stalk(face_i c)`` to every (cell, face index) pair.  The cellular
chain complex has ``C_k = sum over k-cells`` and boundary
``sum_i (-1)^i ext(c, i)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .complex import DeltaComplex, SimplicialComplex, SubcomplexMask, as_delta
from .exactlinalg import Matrix, Subspace, image, induced_map, kernel, rank

__all__ = [
    "Cosheaf",
    "ChainComplex",
    "HomologyGroup",
    "InvalidCosheaf",
    "MaskNotClosed",
    "NotAComplex",
    "validate_cosheaf",
    "chain_complex",
    "relative_chain_complex",
    "homology",
    "homology_dims",
    "les_of_pair_check",
    "compact_cochain_pair",
    "coordinate_map",
]


class InvalidCosheaf(ValueError):
    pass


class MaskNotClosed(ValueError):
    pass


class NotAComplex(ValueError):
    pass


class Cosheaf:
    def __init__(self, base: DeltaComplex, dims: Mapping[int, int] | Sequence[int], ext: Mapping[tuple[int, int], Matrix] | None = None):
        self.base = base
        if isinstance(dims, Mapping):
            self.dims = tuple(int(dims.get(c, 0)) for c in range(len(base)))
        else:
            self.dims = tuple(int(x) for x in dims)
        if len(self.dims) != len(base):
            raise InvalidCosheaf(f"{len(self.dims)} stalk dimensions for {len(base)} cells")
        if any(x < 0 for x in self.dims):
            raise InvalidCosheaf("negative stalk dimension")
        self.ext = dict(ext or {})

    @classmethod
    def constant(cls, base: DeltaComplex, rank_: int = 1) -> "Cosheaf":
        ident = Matrix.identity(rank_)
        ext = {(c.id, i): ident for c in base.cells for i in range(len(c.faces))}
        return cls(base, [rank_] * len(base), ext)

    def ext_map(self, cell: int, i: int) -> Matrix:
        m = self.ext.get((cell, i))
        if m is None:
            face = self.base.cells[cell].faces[i]
            return Matrix.zeros(self.dims[face], self.dims[cell])
        return m

    def restrict_dims(self, cells: Iterable[int]) -> int:
        return sum(self.dims[c] for c in cells)


def validate_cosheaf(f: Cosheaf) -> list[str]:
    """Shape errors and functoriality failures (composition independent of the path)."""
    out = []
    d = f.base
    for (c, i), m in sorted(f.ext.items()):
        if not 0 <= c < len(d) or not 0 <= i < len(d.cells[c].faces):
            out.append(f"extension map for missing face ({c}, {i})")
            continue
        face = d.cells[c].faces[i]
        if m.shape != (f.dims[face], f.dims[c]):
            out.append(f"extension ({c}, {i}) has shape {m.shape}, expected {(f.dims[face], f.dims[c])}")
    if out:
        return out
    for c in d.cells:
        if c.dim < 2:
            continue
        for j in range(c.dim + 1):
            for i in range(j):
                # face_i(face_j c) == face_{j-1}(face_i c)
                a = f.ext_map(c.faces[j], i) @ f.ext_map(c.id, j)
                b = f.ext_map(c.faces[i], j - 1) @ f.ext_map(c.id, i)
                if a != b:
                    out.append(f"cell {c.id}: extension maps do not commute for faces {i} < {j}")
    return out


@dataclass
class ChainComplex:
    """Finite complex of based rational vector spaces.

    ``d[k]`` is the differential leaving degree k: ``C_k -> C_{k-1}`` for a
    chain complex and ``C^k -> C^{k+1}`` when ``cohomological`` is set.
    ``cells[k]`` lists the cell ids of degree k and ``offsets[k][cell]`` the
    first coordinate of that cell's stalk.
    """

    dims: dict[int, int]
    d: dict[int, Matrix]
    cohomological: bool = False
    cells: dict[int, tuple[int, ...]] = field(default_factory=dict)
    offsets: dict[int, dict[int, int]] = field(default_factory=dict)
    stalk: dict[int, int] = field(default_factory=dict)

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def diff(self, k: int) -> Matrix:
        m = self.d.get(k)
        if m is not None:
            return m
        tgt = k + 1 if self.cohomological else k - 1
        return Matrix.zeros(self.dim(tgt), self.dim(k))

    def is_complex(self) -> bool:
        step = 1 if self.cohomological else -1
        return all((self.diff(k + step) @ self.diff(k)).is_zero() for k in self.dims)

    def check(self) -> None:
        step = 1 if self.cohomological else -1
        for k in self.degrees():
            if not (self.diff(k + step) @ self.diff(k)).is_zero():
                raise NotAComplex(f"d∘d != 0 leaving degree {k}")

    def dual(self) -> "ChainComplex":
        """Transpose complex (chains to cochains and back)."""
        step = -1 if self.cohomological else 1
        d = {k: self.diff(k + step).T for k in self.dims}
        return ChainComplex(dict(self.dims), d, not self.cohomological, dict(self.cells), dict(self.offsets), dict(self.stalk))

    def coords(self, k: int, cell: int) -> range:
        o = self.offsets[k][cell]
        return range(o, o + self.stalk[cell])


def _check_mask(d: DeltaComplex, m: SubcomplexMask, what: str) -> None:
    bad = m.missing_faces(d)
    if bad:
        c, f = bad[0]
        raise MaskNotClosed(f"{what} is not face-closed: cell {c} lacks face {f}")


def relative_chain_complex(f: Cosheaf, sub: SubcomplexMask | None = None, mask: SubcomplexMask | None = None) -> ChainComplex:
    """Chains of ``f`` on ``mask`` (default: everything) modulo ``sub``."""
    d = f.base
    if mask is None:
        mask = d.all_cells()
    else:
        _check_mask(d, mask, "mask")
    if sub is None:
        sub = SubcomplexMask()
    else:
        _check_mask(d, sub, "subcomplex")
        if not sub <= mask:
            raise MaskNotClosed("subcomplex is not contained in the mask")
    keep = mask.member - sub.member
    top = d.dim
    cells: dict[int, tuple[int, ...]] = {}
    offsets: dict[int, dict[int, int]] = {}
    dims: dict[int, int] = {}
    stalk = {}
    for k in range(max(top, 0) + 1):
        ids = tuple(c for c in d.cells_of_dim(k) if c in keep)
        cells[k] = ids
        off = {}
        o = 0
        for c in ids:
            off[c] = o
            stalk[c] = f.dims[c]
            o += f.dims[c]
        offsets[k] = off
        dims[k] = o
    diffs: dict[int, Matrix] = {}
    for k in range(max(top, 0) + 1):
        e = {}
        if k > 0:
            tgt = offsets[k - 1]
            for c in cells[k]:
                oc = offsets[k][c]
                for i, face in enumerate(d.cells[c].faces):
                    of = tgt.get(face)
                    if of is None:
                        continue
                    sign = -1 if i % 2 else 1
                    for (r, s), v in f.ext_map(c, i).items():
                        key = (of + r, oc + s)
                        t = e.get(key, 0) + sign * v
                        if t:
                            e[key] = t
                        else:
                            e.pop(key, None)
        diffs[k] = Matrix(dims.get(k - 1, 0), dims[k], e)
    return ChainComplex(dims, diffs, False, cells, offsets, stalk)


def chain_complex(f: Cosheaf, mask: SubcomplexMask | None = None) -> ChainComplex:
    return relative_chain_complex(f, None, mask)


@dataclass(frozen=True)
class HomologyGroup:
    degree: int
    dim: int
    cycles: Subspace
    boundaries: Subspace


def homology(c: ChainComplex, k: int) -> HomologyGroup:
    """Cycles, boundaries and dimension in degree k (either direction)."""
    z = kernel(c.diff(k))
    prev = k - 1 if c.cohomological else k + 1
    if prev in c.dims:
        b = image(c.diff(prev))
    else:
        b = Subspace.zero(c.dim(k))
    return HomologyGroup(k, z.dim - b.dim, z, b)


def homology_dims(c: ChainComplex) -> dict[int, int]:
    """Betti numbers by rank-nullity alone (no subspace bases)."""
    ranks = {k: rank(c.diff(k)) for k in c.dims}
    out = {}
    for k in c.degrees():
        prev = k - 1 if c.cohomological else k + 1
        out[k] = c.dim(k) - ranks[k] - ranks.get(prev, 0)
    return out


def coordinate_map(src: ChainComplex, dst: ChainComplex, k: int, sign: int = 1) -> Matrix:
    """Matrix sending each stalk coordinate of a cell in ``src`` to the same one in ``dst``.

    Cells missing from ``dst`` map to zero (inclusion or quotient projection).
    """
    e = {}
    doff = dst.offsets.get(k, {})
    for c, o in src.offsets.get(k, {}).items():
        t = doff.get(c)
        if t is None:
            continue
        for a in range(src.stalk[c]):
            e[(t + a, o + a)] = sign
    return Matrix(dst.dim(k), src.dim(k), e)


def _induced_rank(m: Matrix, src: HomologyGroup, dst: HomologyGroup) -> int:
    if src.dim == 0 or dst.dim == 0:
        return 0
    return rank(induced_map(m, src.cycles, src.boundaries, dst.cycles, dst.boundaries))


def les_of_pair_check(f: Cosheaf, sub: SubcomplexMask) -> dict:
    """Exactness of ``... -> H_k(A) -> H_k(X) -> H_k(X, A) -> H_{k-1}(A) -> ...`` at every term."""
    ca = chain_complex(f, sub)
    cx = chain_complex(f)
    cr = relative_chain_complex(f, sub)
    top = max(f.base.dim, 0)
    ha = {k: homology(ca, k) for k in range(top + 1)}
    hx = {k: homology(cx, k) for k in range(top + 1)}
    hr = {k: homology(cr, k) for k in range(top + 1)}
    ri, rj, rc = {}, {}, {}
    for k in range(top + 1):
        ri[k] = _induced_rank(coordinate_map(ca, cx, k), ha[k], hx[k])
        rj[k] = _induced_rank(coordinate_map(cx, cr, k), hx[k], hr[k])
        if k > 0:
            # connecting map: boundary of a relative chain, read in A
            lift = coordinate_map(cr, cx, k)
            proj = coordinate_map(cx, ca, k - 1)
            rc[k] = _induced_rank(proj @ cx.diff(k) @ lift, hr[k], ha[k - 1])
        else:
            rc[k] = 0
    rc[top + 1] = 0
    terms = []
    ok = True
    for k in range(top, -1, -1):
        checks = [
            ("H(A)", k, ha[k].dim - ri[k], rc[k + 1]),
            ("H(X)", k, hx[k].dim - rj[k], ri[k]),
            ("H(X,A)", k, hr[k].dim - rc[k], rj[k]),
        ]
        for name, deg, ker_dim, im_dim in checks:
            good = ker_dim == im_dim
            ok = ok and good
            terms.append({"term": name, "degree": deg, "kernel": ker_dim, "image": im_dim, "exact": good})
    return {
        "exact": ok,
        "dims": {
            "sub": [ha[k].dim for k in range(top + 1)],
            "total": [hx[k].dim for k in range(top + 1)],
            "relative": [hr[k].dim for k in range(top + 1)],
        },
        "terms": terms,
    }


def compact_cochain_pair(s: SimplicialComplex | DeltaComplex, boundary: SubcomplexMask, mask: SubcomplexMask | None = None) -> ChainComplex:
    """Relative cochains ``C^*(X, boundary; Q)`` computing compactly supported cohomology of ``X - boundary``."""
    d = as_delta(s) if isinstance(s, SimplicialComplex) else s
    return relative_chain_complex(Cosheaf.constant(d), boundary, mask).dual()
