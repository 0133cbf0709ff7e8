# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled elimination kernel; mirrors ``_kernel_py`` function for function.

Values stay Python integers (exactness first); the speedup comes from
C-level index loops and typed list access in the row merges.
"""
from math import gcd


cdef tuple _combine(object a, list ac, list av, object b, list bc, list bv):
    cdef list cols = []
    cdef list vals = []
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t na = len(ac), nb = len(bc)
    cdef long ci, cj
    cdef object v, g
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
            vals = [x // g for x in vals]
    return cols, vals


cdef tuple _normalize(list cols, list vals):
    cdef object g = gcd(*vals)
    if vals[0] < 0:
        g = -g
    if g != 1:
        vals = [x // g for x in vals]
    return list(cols), vals


cdef tuple _reduce_into(dict basis, list cols, list vals):
    cdef object row, p, x, g
    cdef list pc, pv
    while cols:
        row = basis.get(cols[0])
        if row is None:
            return cols, vals
        pc, pv = row
        p = pv[0]
        x = vals[0]
        g = gcd(p, x)
        cols, vals = _combine(p // g, cols, vals, x // g, pc, pv)
    return cols, vals


def echelon(rows, Py_ssize_t ncols):
    cdef dict basis = {}
    cdef list cols, vals
    for r in rows:
        cols = list(r[0])
        if not cols:
            continue
        vals = list(r[1])
        cols, vals = _normalize(cols, vals)
        cols, vals = _reduce_into(basis, cols, vals)
        if cols:
            basis[cols[0]] = (cols, vals)
    return basis


def rank(rows, Py_ssize_t ncols):
    return len(echelon(rows, ncols))


def rref(rows, Py_ssize_t ncols):
    cdef dict basis = echelon(rows, ncols)
    cdef list pivots = sorted(basis)
    cdef set pivset = set(pivots)
    cdef dict done = {}
    cdef list cols, vals, orig, pc, pv
    cdef Py_ssize_t k, n
    cdef object p, x, g, c
    for q in reversed(pivots):
        cols, vals = basis[q]
        orig = cols[1:]
        for c in orig:
            if c not in pivset:
                continue
            n = len(cols)
            k = 0
            while k < n and cols[k] != c:
                k += 1
            if k == n:
                continue
            pc, pv = done[c]
            p = pv[0]
            x = vals[k]
            g = gcd(p, x)
            cols, vals = _combine(p // g, cols, vals, x // g, pc, pv)
        done[q] = (cols, vals)
    return pivots, [done[q] for q in pivots]
