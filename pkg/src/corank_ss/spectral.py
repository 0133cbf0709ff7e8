"""Spectral sequence of a finite increasing filtration of a chain complex.

Homological indexing: ``E^r_{p,q}`` sits in total degree ``n = p + q`` and
``d^r: E^r_{p,q} -> E^r_{p-r,q+r-1}``.  With

    Z^r_{p,n} = F_p C_n ∩ ∂^{-1}(F_{p-r} C_{n-1})

each term is computed directly as

    E^r_{p,q} = Z^r_{p,n} / (Z^{r-1}_{p-1,n} + ∂ Z^{r-1}_{p+r-1,n+1})

and ``d^r`` is the map induced by ∂.  :func:`iterated_check` recomputes every
page as the homology of the previous one, which is an independent route.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .complex import SubcomplexMask
from .cosheaf import ChainComplex, Cosheaf, chain_complex, homology_dims
from .exactlinalg import (
    Matrix,
    Subspace,
    apply,
    induced_map,
    intersect,
    preimage,
    rank,
    subspace_sum,
)

__all__ = [
    "FilteredComplex",
    "InvalidFiltration",
    "Term",
    "Page",
    "page",
    "pages",
    "infinity_page",
    "euler_invariance",
    "degeneration_page",
    "iterated_check",
    "graded_piece",
    "graded_check",
    "convergence_check",
]


class InvalidFiltration(ValueError):
    pass


class FilteredComplex:
    """Chain complex with subspaces ``F_0 ⊆ ... ⊆ F_P = C`` in every degree."""

    def __init__(self, total: ChainComplex, levels: Sequence[dict[int, Subspace]]):
        if total.cohomological:
            raise InvalidFiltration("filtered complexes are homological")
        if not levels:
            raise InvalidFiltration("at least one filtration level is required")
        self.total = total
        self.levels = [dict(l) for l in levels]
        self._cache: dict = {}
        self.validate()

    @classmethod
    def from_masks(cls, f: Cosheaf, masks: Sequence[SubcomplexMask]) -> "FilteredComplex":
        """Filtration by nested subcomplexes; the last mask is the whole complex."""
        masks = list(masks)
        if not masks:
            raise InvalidFiltration("no filtration masks")
        for a, b in zip(masks, masks[1:]):
            if not a <= b:
                raise InvalidFiltration("masks are not nested")
        for m in masks:
            if not m.is_closed(f.base):
                raise InvalidFiltration("filtration mask is not face-closed")
        total = chain_complex(f, masks[-1])
        levels = []
        for m in masks:
            lev = {}
            for k in total.degrees():
                idx = [i for c in total.cells[k] if c in m for i in total.coords(k, c)]
                lev[k] = Subspace.coordinate(total.dim(k), idx)
            levels.append(lev)
        return cls(total, levels)

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def degrees(self) -> list[int]:
        return self.total.degrees()

    def validate(self) -> None:
        c = self.total
        for p, lev in enumerate(self.levels):
            for n in c.degrees():
                s = lev.get(n)
                if s is None or s.ambient_dim != c.dim(n):
                    raise InvalidFiltration(f"level {p} has no subspace of C_{n}")
                if p > 0 and not s.contains(self.levels[p - 1][n]):
                    raise InvalidFiltration(f"F_{p - 1} C_{n} is not inside F_{p} C_{n}")
                if n - 1 in c.dims:
                    if not lev[n - 1].contains(apply(c.diff(n), s)):
                        raise InvalidFiltration(f"boundary does not preserve F_{p} in degree {n}")
        for n in c.degrees():
            if self.levels[-1][n].dim != c.dim(n):
                raise InvalidFiltration("the last filtration level is not the whole complex")

    def F(self, p: int, n: int) -> Subspace:
        dim = self.total.dim(n)
        if p < 0 or n not in self.total.dims:
            return Subspace.zero(dim)
        if p > self.top:
            return Subspace.full(dim)
        return self.levels[p][n]

    def Z(self, r: int, p: int, n: int) -> Subspace:
        """Chains in ``F_p C_n`` whose boundary lies in ``F_{p-r}``."""
        key = ("Z", r, p, n)
        got = self._cache.get(key)
        if got is None:
            fp = self.F(p, n)
            if r > 0 and n - 1 in self.total.dims:
                got = intersect(fp, preimage(self.total.diff(n), self.F(p - r, n - 1)))
            else:
                got = fp
            self._cache[key] = got
        return got

    def B(self, r: int, p: int, n: int) -> Subspace:
        """The subspace divided out of ``Z^r_{p,n}`` to form ``E^r``."""
        key = ("B", r, p, n)
        got = self._cache.get(key)
        if got is None:
            low = self.Z(r - 1, p - 1, n)
            if n + 1 in self.total.dims:
                high = apply(self.total.diff(n + 1), self.Z(r - 1, p + r - 1, n + 1))
                got = subspace_sum(low, high)
            else:
                got = low
            self._cache[key] = got
        return got

    def infinity_r(self) -> int:
        return self.top + 1


@dataclass(frozen=True)
class Term:
    dim: int
    z: Subspace
    b: Subspace


@dataclass
class Page:
    """``terms[(p, q)]`` and ``diffs[(p, q)]`` (the differential leaving that slot)."""

    r: int
    terms: dict[tuple[int, int], Term]
    diffs: dict[tuple[int, int], Matrix] = field(default_factory=dict)

    def dim(self, p: int, q: int) -> int:
        t = self.terms.get((p, q))
        return t.dim if t else 0

    def dims(self) -> dict[tuple[int, int], int]:
        return {k: t.dim for k, t in sorted(self.terms.items()) if t.dim}

    def total_dims(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (p, q), t in self.terms.items():
            out[p + q] = out.get(p + q, 0) + t.dim
        return out

    def euler(self) -> int:
        return sum((-1) ** (p + q) * t.dim for (p, q), t in self.terms.items())

    def diff_ranks(self) -> dict[tuple[int, int], int]:
        return {k: rank(m) for k, m in sorted(self.diffs.items()) if not m.is_zero()}

    def is_degenerate(self) -> bool:
        return all(m.is_zero() for m in self.diffs.values())


def page(fc: FilteredComplex, r: int, with_diffs: bool = True) -> Page:
    if r < 1:
        raise ValueError("pages start at r = 1")
    terms = {}
    for p in range(fc.top + 1):
        for n in fc.degrees():
            z = fc.Z(r, p, n)
            b = fc.B(r, p, n)
            if not z.contains(b):
                raise AssertionError(f"E^{r}_{p},{n - p}: denominator not inside numerator")
            terms[(p, n - p)] = Term(z.dim - b.dim, z, b)
    diffs = {}
    if with_diffs:
        for (p, q), t in terms.items():
            n = p + q
            tgt = terms.get((p - r, q + r - 1))
            if tgt is None:
                diffs[(p, q)] = Matrix.zeros(0, t.dim)
                continue
            if t.dim == 0 or tgt.dim == 0:
                diffs[(p, q)] = Matrix.zeros(tgt.dim, t.dim)
                continue
            diffs[(p, q)] = induced_map(fc.total.diff(n), t.z, t.b, tgt.z, tgt.b)
    return Page(r, terms, diffs)


def pages(fc: FilteredComplex) -> list[Page]:
    """Pages ``E^1 .. E^{P+1}``; the last one is ``E^∞``."""
    return [page(fc, r) for r in range(1, fc.infinity_r() + 1)]


def infinity_page(fc: FilteredComplex) -> Page:
    return page(fc, fc.infinity_r())


def euler_invariance(fc: FilteredComplex, computed: Sequence[Page] | None = None) -> dict:
    ps = list(computed) if computed is not None else pages(fc)
    chis = {p.r: p.euler() for p in ps}
    total = sum((-1) ** k * d for k, d in homology_dims(fc.total).items())
    return {"chi": chis, "homology_chi": total, "ok": len(set(chis.values()) | {total}) == 1}


def degeneration_page(fc: FilteredComplex, computed: Sequence[Page] | None = None) -> int:
    """Smallest r with every later differential zero."""
    ps = list(computed) if computed is not None else pages(fc)
    r = ps[-1].r
    for pg in reversed(ps):
        if not pg.is_degenerate():
            return pg.r + 1
        r = pg.r
    return r


def iterated_check(fc: FilteredComplex, computed: Sequence[Page] | None = None) -> dict:
    """Compare each page with the homology of the previous one."""
    ps = list(computed) if computed is not None else pages(fc)
    mismatches = []
    for prev, nxt in zip(ps, ps[1:]):
        ranks = {k: rank(m) for k, m in prev.diffs.items()}
        r = prev.r
        for (p, q), t in prev.terms.items():
            inc = ranks.get((p + r, q - r + 1), 0)
            expect = t.dim - ranks.get((p, q), 0) - inc
            if expect != nxt.dim(p, q):
                mismatches.append({"r": nxt.r, "p": p, "q": q, "direct": nxt.dim(p, q), "iterated": expect})
    return {"ok": not mismatches, "mismatches": mismatches}


def graded_piece(fc: FilteredComplex, p: int) -> ChainComplex:
    """The quotient complex ``F_p / F_{p-1}`` in the bases chosen by quotient_basis."""
    c = fc.total
    dims = {}
    diffs = {}
    for n in c.degrees():
        dims[n] = fc.F(p, n).dim - fc.F(p - 1, n).dim
    for n in c.degrees():
        if n - 1 in c.dims:
            diffs[n] = induced_map(c.diff(n), fc.F(p, n), fc.F(p - 1, n), fc.F(p, n - 1), fc.F(p - 1, n - 1))
        else:
            diffs[n] = Matrix.zeros(0, dims[n])
    return ChainComplex(dims, diffs)


def graded_check(fc: FilteredComplex, e1: Page | None = None) -> dict:
    """``E^1_{p,q}`` against the homology of ``F_p / F_{p-1}`` in degree ``p+q``."""
    e1 = e1 if e1 is not None else page(fc, 1, with_diffs=False)
    bad = []
    for p in range(fc.top + 1):
        h = homology_dims(graded_piece(fc, p))
        for n, d in h.items():
            if d != e1.dim(p, n - p):
                bad.append({"p": p, "q": n - p, "page": e1.dim(p, n - p), "graded": d})
    return {"ok": not bad, "mismatches": bad}


def convergence_check(fc: FilteredComplex, einf: Page | None = None) -> dict:
    """Total dimension of ``E^∞`` in degree n against ``dim H_n`` of the complex."""
    einf = einf if einf is not None else infinity_page(fc)
    h = homology_dims(fc.total)
    tot = einf.total_dims()
    bad = {n: (tot.get(n, 0), d) for n, d in h.items() if tot.get(n, 0) != d}
    return {"ok": not bad, "homology": h, "mismatches": bad}
