"""Exact rational linear algebra: sparse matrices and a subspace calculus.

Everything here is immutable.  Entries are :class:`fractions.Fraction`;
elimination itself runs fraction-free on primitive integer rows (see
``_backend``), so a :class:`Subspace` is stored as the integer-scaled reduced
row echelon form of its spanning vectors.  That form is unique, which makes
equality of subspaces plain representation equality.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from . import _backend

Rational = Fraction

__all__ = [
    "Rational",
    "Matrix",
    "Subspace",
    "AmbientMismatch",
    "NotContained",
    "NotWellDefined",
    "rank",
    "kernel",
    "image",
    "subspace_sum",
    "intersect",
    "preimage",
    "quotient_dim",
    "quotient_basis",
    "induced_map",
    "solve",
]


class AmbientMismatch(ValueError):
    pass


class NotContained(ValueError):
    pass


class NotWellDefined(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("floating point entries are not accepted")
    return Fraction(x)


def _int_row(row: Mapping[int, Fraction]):
    """Sparse rational row -> primitive integer ``(cols, vals)``; scale is lost."""
    if not row:
        return [], []
    cols = sorted(row)
    den = lcm(*(row[c].denominator for c in cols))
    vals = [int(row[c] * den) for c in cols]
    return cols, vals


class Matrix:
    """Sparse rational matrix; zero entries are never stored."""

    __slots__ = ("rows", "cols", "_e", "_hash")

    def __init__(self, rows: int, cols: int, entries: Mapping[tuple[int, int], object] | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        e: dict[tuple[int, int], Fraction] = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
                v = _frac(v)
                if v:
                    e[(i, j)] = v
        self.rows = rows
        self.cols = cols
        self._e = e
        self._hash = None

    @classmethod
    def _trusted(cls, rows, cols, e):
        m = cls.__new__(cls)
        m.rows, m.cols, m._e, m._hash = rows, cols, e, None
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls._trusted(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._trusted(n, n, {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[object]], cols: int | None = None) -> "Matrix":
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        entries = {}
        for i, r in enumerate(data):
            if len(r) != cols:
                raise ValueError("ragged dense matrix")
            for j, v in enumerate(r):
                entries[(i, j)] = v
        return cls(rows, cols, entries)

    @classmethod
    def from_columns(cls, n: int, columns: Sequence[Mapping[int, Fraction]]) -> "Matrix":
        e = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    e[(i, j)] = Fraction(v)
        return cls(n, len(columns), e)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def nnz(self) -> int:
        return len(self._e)

    def items(self):
        return self._e.items()

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self._e.get((i, j), Fraction(0))

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self._e.items():
            out[i][j] = v
        return out

    def row_dicts(self) -> list[dict[int, Fraction]]:
        out: list[dict[int, Fraction]] = [{} for _ in range(self.rows)]
        for (i, j), v in self._e.items():
            out[i][j] = v
        return out

    def col_dicts(self) -> list[dict[int, Fraction]]:
        out: list[dict[int, Fraction]] = [{} for _ in range(self.cols)]
        for (i, j), v in self._e.items():
            out[j][i] = v
        return out

    @property
    def T(self) -> "Matrix":
        return Matrix._trusted(self.cols, self.rows, {(j, i): v for (i, j), v in self._e.items()})

    def is_zero(self) -> bool:
        return not self._e

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        brows = other.row_dicts()
        e: dict[tuple[int, int], Fraction] = {}
        for (i, k), a in self._e.items():
            for j, b in brows[k].items():
                key = (i, j)
                v = e.get(key, 0) + a * b
                if v:
                    e[key] = v
                else:
                    e.pop(key, None)
        return Matrix._trusted(self.rows, other.cols, e)

    def apply(self, vec: Mapping[int, Fraction]) -> dict[int, Fraction]:
        """Matrix times a sparse column vector."""
        cols = self.col_dicts()
        out: dict[int, Fraction] = {}
        for j, x in vec.items():
            for i, a in cols[j].items():
                v = out.get(i, 0) + a * x
                if v:
                    out[i] = v
                else:
                    out.pop(i, None)
        return out

    def _binop(self, other: "Matrix", sign: int) -> "Matrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        e = dict(self._e)
        for k, v in other._e.items():
            s = e.get(k, 0) + sign * v
            if s:
                e[k] = s
            else:
                e.pop(k, None)
        return Matrix._trusted(self.rows, self.cols, e)

    def __add__(self, other: "Matrix") -> "Matrix":
        return self._binop(other, 1)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self._binop(other, -1)

    def __neg__(self) -> "Matrix":
        return Matrix._trusted(self.rows, self.cols, {k: -v for k, v in self._e.items()})

    def scale(self, c) -> "Matrix":
        c = _frac(c)
        if not c:
            return Matrix.zeros(self.rows, self.cols)
        return Matrix._trusted(self.rows, self.cols, {k: c * v for k, v in self._e.items()})

    def select(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "Matrix":
        """Submatrix on the given row/column index lists (in that order)."""
        rmap = {r: k for k, r in enumerate(rows)} if rows is not None else None
        cmap = {c: k for k, c in enumerate(cols)} if cols is not None else None
        e = {}
        for (i, j), v in self._e.items():
            if rmap is not None:
                if i not in rmap:
                    continue
                i = rmap[i]
            if cmap is not None:
                if j not in cmap:
                    continue
                j = cmap[j]
            e[(i, j)] = v
        return Matrix._trusted(
            len(rows) if rows is not None else self.rows,
            len(cols) if cols is not None else self.cols,
            e,
        )

    @staticmethod
    def hstack(mats: Sequence["Matrix"], rows: int | None = None) -> "Matrix":
        if not mats:
            return Matrix.zeros(rows or 0, 0)
        n = mats[0].rows
        e = {}
        off = 0
        for m in mats:
            if m.rows != n:
                raise ValueError("hstack row mismatch")
            for (i, j), v in m._e.items():
                e[(i, j + off)] = v
            off += m.cols
        return Matrix._trusted(n, off, e)

    @staticmethod
    def vstack(mats: Sequence["Matrix"], cols: int | None = None) -> "Matrix":
        if not mats:
            return Matrix.zeros(0, cols or 0)
        n = mats[0].cols
        e = {}
        off = 0
        for m in mats:
            if m.cols != n:
                raise ValueError("vstack column mismatch")
            for (i, j), v in m._e.items():
                e[(i + off, j)] = v
            off += m.rows
        return Matrix._trusted(off, n, e)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._e == other._e

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, frozenset(self._e.items())))
        return self._hash

    def __repr__(self) -> str:
        if self.rows * self.cols <= 64:
            body = [[str(x) for x in r] for r in self.to_dense()]
            return f"Matrix({self.rows}x{self.cols}, {body})"
        return f"Matrix({self.rows}x{self.cols}, nnz={self.nnz})"


class Subspace:
    """A subspace of Q^n, held as its canonical integer RREF basis.

    ``basis`` exposes the same data as a matrix in reduced column echelon
    form (pivots scaled to 1).
    """

    __slots__ = ("ambient_dim", "_rows", "_pivots")

    def __init__(self, ambient_dim: int, rows, pivots):
        self.ambient_dim = ambient_dim
        self._rows = rows
        self._pivots = pivots

    @classmethod
    def _from_int_rows(cls, n: int, rows) -> "Subspace":
        pivots, reduced = _backend.rref(rows, n)
        return cls(n, tuple((tuple(c), tuple(v)) for c, v in reduced), tuple(pivots))

    @classmethod
    def span(cls, n: int, vectors: Iterable[Mapping[int, object]]) -> "Subspace":
        rows = []
        for v in vectors:
            d = {}
            for i, x in v.items():
                if not 0 <= i < n:
                    raise AmbientMismatch(f"coordinate {i} outside ambient dimension {n}")
                x = _frac(x)
                if x:
                    d[i] = x
            rows.append(_int_row(d))
        return cls._from_int_rows(n, rows)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, (), ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(((i,), (1,)) for i in range(n)), tuple(range(n)))

    @classmethod
    def coordinate(cls, n: int, indices: Iterable[int]) -> "Subspace":
        idx = sorted(set(indices))
        if idx and not (0 <= idx[0] and idx[-1] < n):
            raise AmbientMismatch("coordinate index out of range")
        return cls(n, tuple(((i,), (1,)) for i in idx), tuple(idx))

    @property
    def dim(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return self._pivots

    def vectors(self) -> list[dict[int, Fraction]]:
        """Canonical basis vectors, pivot entries normalized to 1."""
        out = []
        for cols, vals in self._rows:
            p = vals[0]
            out.append({c: Fraction(v, p) for c, v in zip(cols, vals)})
        return out

    @property
    def basis(self) -> Matrix:
        return Matrix.from_columns(self.ambient_dim, self.vectors())

    def contains_vector(self, vec: Mapping[int, object]) -> bool:
        d = {i: _frac(x) for i, x in vec.items() if x}
        if not d:
            return True
        cols, vals = _int_row(d)
        return _backend.rank(list(self._rows) + [(cols, vals)], self.ambient_dim) == self.dim

    def contains(self, other: "Subspace") -> bool:
        _check_ambient(self, other)
        if other.dim == 0:
            return True
        return _backend.rank(list(self._rows) + list(other._rows), self.ambient_dim) == self.dim

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return intersect(self, other)

    def __le__(self, other: "Subspace") -> bool:
        return other.contains(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self._rows))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _check_ambient(a: Subspace, b: Subspace) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def _rref_rational(rows: list[dict[int, Fraction]], ncols: int):
    """RREF with pivots normalized to 1; returns (pivots, rows as dicts)."""
    pivots, reduced = _backend.rref([_int_row(r) for r in rows], ncols)
    out = []
    for cols, vals in reduced:
        p = vals[0]
        out.append({c: Fraction(v, p) for c, v in zip(cols, vals)})
    return pivots, out


def rank(m: Matrix) -> int:
    if m.rows <= m.cols:
        return _backend.rank([_int_row(r) for r in m.row_dicts()], m.cols)
    return _backend.rank([_int_row(c) for c in m.col_dicts()], m.rows)


def _nullspace_rows(rows: list[dict[int, Fraction]], ncols: int) -> list[dict[int, Fraction]]:
    pivots, red = _rref_rational(rows, ncols)
    pivset = set(pivots)
    # free column f -> list of (pivot, coefficient) where that row has f
    by_free: dict[int, dict[int, Fraction]] = {}
    for p, r in zip(pivots, red):
        for c, v in r.items():
            if c != p:
                by_free.setdefault(c, {})[p] = -v
    out = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = dict(by_free.get(f, {}))
        v[f] = Fraction(1)
        out.append(v)
    return out


def kernel(m: Matrix) -> Subspace:
    return Subspace.span(m.cols, _nullspace_rows(m.row_dicts(), m.cols))


def image(m: Matrix) -> Subspace:
    return Subspace._from_int_rows(m.rows, [_int_row(c) for c in m.col_dicts()])


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    _check_ambient(a, b)
    if b.dim == 0:
        return a
    if a.dim == 0:
        return b
    return Subspace._from_int_rows(a.ambient_dim, list(a._rows) + list(b._rows))


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """``a & b`` from the kernel of the stacked bases ``[A | B]``."""
    _check_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient_dim)
    av = a.vectors()
    bv = b.vectors()
    stacked = Matrix.from_columns(a.ambient_dim, av + bv)
    k = a.dim
    vecs = []
    for z in _nullspace_rows(stacked.row_dicts(), stacked.cols):
        x = {}
        for j, c in z.items():
            if j < k:
                for i, v in av[j].items():
                    s = x.get(i, 0) + c * v
                    if s:
                        x[i] = s
                    else:
                        x.pop(i, None)
        vecs.append(x)
    return Subspace.span(a.ambient_dim, vecs)


def annihilator(s: Subspace) -> list[dict[int, Fraction]]:
    """Row vectors ``w`` with ``w . v = 0`` for all ``v`` in ``s`` (a basis of s-perp)."""
    return _nullspace_rows(s.vectors(), s.ambient_dim)


def preimage(m: Matrix, s: Subspace) -> Subspace:
    if s.ambient_dim != m.rows:
        raise AmbientMismatch(f"subspace lives in Q^{s.ambient_dim}, map lands in Q^{m.rows}")
    ann = annihilator(s)
    if not ann:
        return Subspace.full(m.cols)
    mrows = m.row_dicts()
    rows = []
    for w in ann:
        r: dict[int, Fraction] = {}
        for i, c in w.items():
            for j, v in mrows[i].items():
                t = r.get(j, 0) + c * v
                if t:
                    r[j] = t
                else:
                    r.pop(j, None)
        rows.append(r)
    return Subspace.span(m.cols, _nullspace_rows(rows, m.cols))


def apply(m: Matrix, s: Subspace) -> Subspace:
    """The image ``m(s)``."""
    if s.ambient_dim != m.cols:
        raise AmbientMismatch("subspace does not live in the domain of the map")
    return Subspace.span(m.rows, [m.apply(v) for v in s.vectors()])


def quotient_dim(big: Subspace, small: Subspace) -> int:
    _check_ambient(big, small)
    if not big.contains(small):
        raise NotContained("small subspace is not contained in big")
    return big.dim - small.dim


def quotient_basis(big: Subspace, small: Subspace) -> list[dict[int, Fraction]]:
    """Deterministic complement: canonical vectors of ``big`` independent mod ``small``."""
    _check_ambient(big, small)
    chosen: list[dict[int, Fraction]] = []
    need = big.dim - small.dim
    rows = list(small._rows)
    r = len(rows)
    for (cols, vals), vec in zip(big._rows, big.vectors()):
        if len(chosen) == need:
            break
        trial = rows + [(list(cols), list(vals))]
        nr = _backend.rank(trial, big.ambient_dim)
        if nr > r:
            rows = trial
            r = nr
            chosen.append(vec)
    return chosen


def solve(columns: Sequence[Mapping[int, Fraction]], n: int, targets: Sequence[Mapping[int, Fraction]]) -> list[dict[int, Fraction]]:
    """Coordinates of each target in the basis ``columns`` (independent, in Q^n).

    Raises :class:`NotContained` if some target is outside their span.
    """
    k = len(columns)
    aug: list[dict[int, Fraction]] = [{} for _ in range(n)]
    for j, col in enumerate(list(columns) + list(targets)):
        for i, v in col.items():
            if v:
                aug[i][j] = Fraction(v)
    pivots, red = _rref_rational(aug, k + len(targets))
    if pivots[:k] != list(range(k)):
        raise ValueError("basis columns are not independent")
    if len(pivots) > k:
        raise NotContained("target outside the span of the basis")
    out = []
    for t in range(len(targets)):
        out.append({l: red[l][k + t] for l in range(k) if (k + t) in red[l]})
    return out


def induced_map(m: Matrix, src_big: Subspace, src_small: Subspace, dst_big: Subspace, dst_small: Subspace) -> Matrix:
    """Matrix of the map ``src_big/src_small -> dst_big/dst_small`` induced by ``m``.

    Bases of the quotients are the ones chosen by :func:`quotient_basis`.
    """
    if src_big.ambient_dim != m.cols or dst_big.ambient_dim != m.rows:
        raise AmbientMismatch("subspaces do not match the map's shape")
    _check_ambient(src_big, src_small)
    _check_ambient(dst_big, dst_small)
    if not src_big.contains(src_small) or not dst_big.contains(dst_small):
        raise NotContained("quotient pair is not nested")
    for v in src_big.vectors():
        if not dst_big.contains_vector(m.apply(v)):
            raise NotWellDefined("m(src_big) is not contained in dst_big")
    for v in src_small.vectors():
        if not dst_small.contains_vector(m.apply(v)):
            raise NotWellDefined("m(src_small) is not contained in dst_small")
    src_q = quotient_basis(src_big, src_small)
    dst_q = quotient_basis(dst_big, dst_small)
    if not src_q or not dst_q:
        return Matrix.zeros(len(dst_q), len(src_q))
    base = dst_small.vectors() + dst_q
    coords = solve(base, m.rows, [m.apply(v) for v in src_q])
    off = dst_small.dim
    e = {}
    for j, c in enumerate(coords):
        for l, v in c.items():
            if l >= off:
                e[(l - off, j)] = v
    return Matrix(len(dst_q), len(src_q), e)
