from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from math import factorial

import pytest

from corank_ss.complex import (
    Cell,
    DeltaComplex,
    Flag,
    SimplicialComplex,
    SubcomplexMask,
    as_delta,
    barycentric_subdivide,
    euler_char,
    subdivision_chain_map,
    subdivision_sign,
    validate,
)
from corank_ss.cosheaf import Cosheaf, chain_complex, homology_dims
from corank_ss.exactlinalg import Matrix
from generators import circle_delta, rand_simplicial, sphere_delta, torus_delta

SPHERE = SimplicialComplex(range(4), [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


def test_validate_examples():
    assert validate(as_delta(SimplicialComplex.simplex([0, 1, 2]))) == []
    circle = DeltaComplex.from_cells([((0,), ()), ((1,), ()), ((0, 1), (1, 0)), ((0, 1), (1, 0))])
    assert validate(circle) == []
    bad = DeltaComplex.from_cells([((0,), ()), ((1,), ()), ((0, 1, 2), (0, 1, 1)), ((0, 1), (2, 0))], vertices=[0, 1, 2])
    assert any("dimension" in v for v in validate(bad))


def test_validate_catches_wrong_face_and_identity():
    cells = [((0,), ()), ((1,), ()), ((0, 1), (0, 1))]
    assert validate(DeltaComplex.from_cells(cells))
    for d in (circle_delta(), sphere_delta(), torus_delta()):
        assert validate(d) == []
    # breaking a simplicial identity in the torus
    t = torus_delta()
    cells = list(t.cells)
    cells[4] = Cell(4, 2, (0, 0, 0), (1, 3, 7))
    assert validate(DeltaComplex(t.vertices, cells))


def test_mask_closure_and_validation():
    d = as_delta(SimplicialComplex.simplex([0, 1, 2]))
    top = d.cells_of_dim(2)[0]
    assert SubcomplexMask.closure(d, [top]) == d.all_cells()
    m = SubcomplexMask.of([top])
    assert not m.is_closed(d) and m.missing_faces(d)
    d.masks["bad"] = m
    assert any("not face-closed" in v for v in validate(d))


@pytest.mark.parametrize("dim", range(5))
def test_subdivision_counts(dim):
    s = SimplicialComplex.simplex(list(range(dim + 1)))
    brc, flags = barycentric_subdivide(s)
    assert len(brc.of_dim(dim)) == factorial(dim + 1)
    assert len(brc.of_dim(0)) == 2 ** (dim + 1) - 1
    assert len(flags) == len(brc.simplices)
    assert len(set(f.chain for f in flags.values())) == len(flags)


def test_subdivision_of_4_simplex():
    brc, _ = barycentric_subdivide(SimplicialComplex.simplex(list(range(5))))
    assert [len(brc.of_dim(k)) for k in range(5)] == [31, 180, 390, 360, 120]


def test_interval_subdivision():
    s = SimplicialComplex.simplex([0, 1])
    brc, flags = barycentric_subdivide(s)
    assert [len(brc.of_dim(k)) for k in range(2)] == [3, 2]
    m = subdivision_chain_map(s)
    # the two half edges carry opposite orientations relative to the barycenter
    assert sorted(m[1].to_dense()) == [[-1], [1]]
    assert sum(sum(r) for r in m[1].to_dense()) == 0


def test_degree_zero_on_vertex_is_identity():
    m = subdivision_chain_map(SimplicialComplex.simplex([7]))
    assert m[0] == Matrix.identity(1)


def test_subdivision_chain_map_commutes_and_preserves_homology():
    rng = random.Random(2)
    for s in [SPHERE] + [rand_simplicial(rng, 3, 5) for _ in range(15)]:
        brc = barycentric_subdivide(s)
        m = subdivision_chain_map(s, brc)
        a = chain_complex(Cosheaf.constant(as_delta(s)))
        b = chain_complex(Cosheaf.constant(as_delta(brc[0])))
        for k in range(1, s.dim + 1):
            assert b.diff(k) @ m[k] == m[k - 1] @ a.diff(k)
        assert homology_dims(a) == homology_dims(b)
        assert euler_char(as_delta(s)) == euler_char(as_delta(brc[0]))
    assert homology_dims(chain_complex(Cosheaf.constant(as_delta(barycentric_subdivide(SPHERE)[0])))) == {0: 1, 1: 0, 2: 1}


def test_subdivision_sign_small():
    assert subdivision_sign([(0,)]) == 1
    # S(e) = -(b1 - b0) * b_e
    assert subdivision_sign([(0,), (0, 1)]) == 1
    assert subdivision_sign([(1,), (0, 1)]) == -1


def test_as_delta_examples():
    assert as_delta(SimplicialComplex.simplex([0, 1, 2])).counts() == [3, 3, 1]
    assert len(as_delta(SimplicialComplex([], []))) == 0
    square = SimplicialComplex(range(4), [(0, 1, 2), (0, 2, 3)])
    assert as_delta(square).counts() == [4, 5, 2]


def test_euler_char_examples():
    assert euler_char(as_delta(SPHERE)) == 2
    assert euler_char(circle_delta()) == 0
    assert euler_char(as_delta(SimplicialComplex.simplex([0]))) == 1
    d = as_delta(SPHERE)
    assert euler_char(d, SubcomplexMask.closure(d, [d.cells_of_dim(1)[0]])) == 1


def test_simplicial_complex_closure_and_coords():
    s = SimplicialComplex(range(3), [(0, 1, 2)], {0: (0, 0), 1: (1, 0), 2: (0, 1)})
    assert len(s.simplices) == 7
    assert s.barycenter((0, 1, 2)) == (Fraction(1, 3), Fraction(1, 3))
    assert s.affinely_dependent() == []
    with pytest.raises(TypeError):
        SimplicialComplex(range(2), [(0, 1)], {0: (0.5,), 1: (1,)})


def test_flag_properties():
    f = Flag(((1,), (0, 1), (0, 1, 2)))
    assert f.first == (1,) and f.last == (0, 1, 2) and f.is_full()
    assert not Flag(((1,), (0, 1, 2))).is_full()
    with pytest.raises(ValueError):
        Flag(((0, 1), (1,)))


def test_flag_index_is_bijection_on_random_complexes():
    rng = random.Random(8)
    for _ in range(10):
        s = rand_simplicial(rng, 3, 5)
        brc, flags = barycentric_subdivide(s)
        expected = set()
        for top in s.simplices:
            stack = [(top,)]
            while stack:
                ch = stack.pop()
                expected.add(ch)
                for k in range(1, len(ch[0])):
                    for face in combinations(ch[0], k):
                        stack.append((face,) + ch)
        assert {f.chain for f in flags.values()} == expected
        assert len(expected) == len(brc.simplices)
