"""Pure-Python elimination kernel.

Rows are sparse integer vectors given as ``(cols, vals)`` pairs of equal-length
lists, ``cols`` strictly increasing and every value nonzero.  The compiled
module ``_kernel`` exposes the same three functions with the same semantics.
"""
from __future__ import annotations

from math import gcd


def _combine(a, ac, av, b, bc, bv):
    """Return ``a * (ac, av) - b * (bc, bv)`` divided by its content."""
    cols = []
    vals = []
    i = j = 0
    na = len(ac)
    nb = len(bc)
    while i < na and j < nb:
        ci = ac[i]
        cj = bc[j]
        if ci < cj:
            cols.append(ci)
            vals.append(a * av[i])
            i += 1
        elif cj < ci:
            cols.append(cj)
            vals.append(-b * bv[j])
            j += 1
        else:
            v = a * av[i] - b * bv[j]
            if v:
                cols.append(ci)
                vals.append(v)
            i += 1
            j += 1
    while i < na:
        cols.append(ac[i])
        vals.append(a * av[i])
        i += 1
    while j < nb:
        cols.append(bc[j])
        vals.append(-b * bv[j])
        j += 1
    if vals:
        g = gcd(*vals)
        if vals[0] < 0:
            g = -g
        if g != 1:
            vals = [v // g for v in vals]
    return cols, vals


def _normalize(cols, vals):
    g = gcd(*vals)
    if vals[0] < 0:
        g = -g
    if g != 1:
        vals = [v // g for v in vals]
    return list(cols), vals


def _reduce_into(basis, cols, vals):
    # basis: pivot col -> (cols, vals) with leading entry at the pivot
    while cols:
        lead = cols[0]
        row = basis.get(lead)
        if row is None:
            return cols, vals
        pc, pv = row
        p = pv[0]
        x = vals[0]
        g = gcd(p, x)
        cols, vals = _combine(p // g, cols, vals, x // g, pc, pv)
    return cols, vals


def echelon(rows, ncols):
    """Forward elimination; returns ``{pivot: row}`` in integer echelon form."""
    basis = {}
    for cols, vals in rows:
        if not cols:
            continue
        cols, vals = _reduce_into(basis, *_normalize(cols, vals))
        if cols:
            basis[cols[0]] = (cols, vals)
    return basis


def rank(rows, ncols):
    return len(echelon(rows, ncols))


def rref(rows, ncols):
    """Reduced row echelon form over the rationals, kept integral.

    Returns ``(pivots, reduced)`` with ``pivots`` increasing and ``reduced[k]``
    the primitive integer row whose leading entry (positive) sits at
    ``pivots[k]`` and which vanishes at every other pivot column.
    """
    basis = echelon(rows, ncols)
    pivots = sorted(basis)
    pivset = set(pivots)
    done = {}
    for q in reversed(pivots):
        cols, vals = basis[q]
        # done[c] has no pivot entry other than c, so one pass suffices
        for c in cols[1:]:
            if c not in pivset:
                continue
            try:
                k = cols.index(c)
            except ValueError:
                continue
            pc, pv = done[c]
            p = pv[0]
            x = vals[k]
            g = gcd(p, x)
            cols, vals = _combine(p // g, cols, vals, x // g, pc, pv)
        done[q] = (cols, vals)
    return pivots, [done[q] for q in pivots]
