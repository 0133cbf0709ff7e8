from __future__ import annotations

import dataclasses
import pytest

from corank_ss.complex import SubcomplexMask
from corank_ss.corank import (
    Augmentation,
    BadPeriod,
    CorankInput,
    Cusp,
    GluingInconsistent,
    MissingAugmentation,
    MissingCosheaf,
    NotFaceClosed,
    build_dual_complex,
    cork_dims,
    cork_ranks,
    corank_filtration,
    corank_ss,
    d_of_p,
    degeneration_report,
    e1_by_cusp,
    eis_dim,
    glued_cosheaf,
    euler_identity,
    hilbert_example,
    run,
    shape_check,
)
from corank_ss.cosheaf import Cosheaf, chain_complex, homology_dims
from corank_ss.exactlinalg import Matrix
from corank_ss.fixtures import MIXED, mixed_disk, mixed_siegel, mixed_sphere, mixed_twisted, point, shape_violation

# frozen values: computed once by hand from the fixture geometry
FROZEN_E1 = {
    "mixed_sphere": {(1, 0): 2, (2, 0): 1, (2, 1): 1},
    "mixed_disk": {(1, 0): 1, (1, 1): 1, (2, 1): 1},
    "mixed_twisted": {(1, 0): 1, (1, 1): 1, (2, 1): 1},
}
FROZEN_EINF = {
    "mixed_sphere": {(1, 0): 1, (2, 1): 1},
    "mixed_disk": {(1, 0): 1},
    "mixed_twisted": {(1, 0): 1},
    "mixed_siegel": {(1, 0): 1, (3, 1): 1},
}


def test_dual_complex_examples():
    assert build_dual_complex(hilbert_example(1, 3)).counts() == [3, 3]
    assert len(build_dual_complex(CorankInput(2, 1, (2,), ()))) == 0
    # 2 points + tetrahedron boundary (4, 6, 4) with two vertices identified
    d = build_dual_complex(mixed_sphere())
    assert d.counts() == [4, 6, 4]
    assert {c.label[0] for c in d.cells} == {"a", "b", "S"}


def test_filtration_examples():
    masks = corank_filtration(hilbert_example(1, 3))
    assert masks[0] == SubcomplexMask() and masks[1] == build_dual_complex(hilbert_example(1, 3)).all_cells()
    inp = mixed_disk()
    d = build_dual_complex(inp)
    masks = corank_filtration(inp, d)
    assert masks[1] == SubcomplexMask.of(c.id for c in d.cells if c.label[0] == "C")
    # no corank-2 cusps: Δ_2 = Δ_1
    pts = CorankInput(3, 2, (1, 3), (mixed_sphere().cusp("a"),))
    m = corank_filtration(pts)
    assert m[1] == m[2]


def test_filtration_rejects_wrong_direction():
    inp = mixed_sphere()
    d = build_dual_complex(inp)
    swapped = tuple(dataclasses.replace(c, corank=3 - c.corank) for c in inp.cusps)
    with pytest.raises(NotFaceClosed):
        corank_filtration(dataclasses.replace(inp, cusps=swapped), d)


def test_hilbert_toy():
    inp = hilbert_example(1, 3)
    ss = corank_ss(inp, 0)
    assert cork_dims(ss.page(1)) == {(1, 0): 1, (1, 1): 1}
    assert ss.degeneration_page() == 1
    assert e1_by_cusp(inp, 0) == {(1, 0): [("c0", 1)], (1, 1): [("c0", 1)]}
    assert shape_check(inp, 0, ss.page(1))["ok"]
    rep = degeneration_report(inp, 0, ss)
    assert rep["ok"] and [c["m"] for c in rep["checks"] if c["kind"] == "E1"] == [2]
    eu = euler_identity(inp, {0: ss})
    assert eu["levels"][0]["a"]["e1"] == 0 and eu["levels"][0]["b"]["formula"] == 0 and eu["ok"]


@pytest.mark.parametrize("period", [2, 3, 5])
def test_hilbert_additivity_and_period(period):
    for c in (1, 2, 3):
        ss = corank_ss(hilbert_example(c, period), 0)
        assert cork_dims(ss.page(1)) == {(1, 0): c, (1, 1): c}


def test_hilbert_rejects_bad_period():
    with pytest.raises(BadPeriod):
        hilbert_example(1, 1)


def test_zero_input_and_zero_stalks():
    empty = CorankInput(2, 1, (2,), ())
    res = run(empty, [0])
    assert cork_dims(res.levels[0].ss.infinity) == {}
    assert res.levels[0].shape["ok"] and res.euler["ok"]
    inp = hilbert_example(1, 3)
    c = inp.cusps[0]
    zero = dataclasses.replace(c, cosheaves={0: Cosheaf(c.complex, [0] * len(c.complex))}, augmentation={})
    ss = corank_ss(dataclasses.replace(inp, cusps=(zero,)), 0)
    assert all(not pg.dims() for pg in ss.pages)


def test_d_of_p():
    assert d_of_p(hilbert_example(1, 3), 0) == 1
    assert d_of_p(hilbert_example(1, 3), 1) == 0
    siegel = mixed_siegel()
    assert [d_of_p(siegel, p) for p in range(6)] == [3, 2, 2, 2, 1, 1]


@pytest.mark.parametrize("name", sorted(MIXED))
def test_mixed_fixtures(name):
    inp = MIXED[name]()
    assert inp.problems() == []
    res = run(inp)
    assert res.ok()
    lv = res.levels[0]
    assert lv.cross_check["ok"]
    if name in FROZEN_E1:
        assert cork_dims(lv.ss.page(1)) == FROZEN_E1[name]
    assert cork_dims(lv.ss.infinity) == FROZEN_EINF[name]
    glued = chain_complex(glued_cosheaf(inp, 0))
    total = homology_dims(glued)
    assert total == homology_dims(lv.ss.fc.total)
    for m in range(2, max(total) + 2):
        assert lv.ss.e_inf(m) == total.get(m - 1, 0)


def test_two_identical_cusps_double():
    one = e1_by_cusp(hilbert_example(1, 5), 0)
    two = e1_by_cusp(hilbert_example(2, 5), 0)
    assert {k: [d for _, d in v] for k, v in two.items()} == {k: [d for _, d in v] * 2 for k, v in one.items()}


def test_shape_violation_reported():
    inp = shape_violation()
    res = run(inp)
    assert not res.ok()
    viol = res.levels[0].shape["violations"]
    assert viol == [{"i": 2, "j": -1, "dim": 1}]


def test_degeneration_m2_identity_when_n1_is_one():
    inp = mixed_sphere()
    ss = corank_ss(inp, 0)
    rep = degeneration_report(inp, 0, ss)
    e2 = [c for c in rep["checks"] if c["kind"] == "E2"]
    # d^1 from H_1(Δ_2, Δ_1) = Q onto the reduced part of H_0(Δ_1) = Q^2 kills (2, 0)
    assert cork_ranks(ss.page(1)) == {(2, 0): 1}
    assert len(e2) == 1 and e2[0]["ok"] and e2[0]["expected"] == 0


def test_euler_identity_siegel_corank_three_contributes_zero():
    inp = mixed_siegel()
    eu = run(inp).euler
    contrib = eu["levels"][0]["b"]["contributions"]
    assert contrib["T"] == 0
    assert eu["levels"][0]["b"]["ok"] and eu["levels"][0]["a"]["ok"]
    assert eu["c"]["complete"] is False and eu["c"]["ok"] is None
    assert euler_identity(CorankInput(2, 1, (2,), ()), {})["c"]["ok"]


def _aug_input(rows):
    """One corank-1 cusp: an edge with two vertices, augmentation given by ``rows`` per vertex."""
    inp = hilbert_example(1, 3)
    c = inp.cusps[0]
    verts = [x.id for x in c.complex.cells if x.dim == 0]
    maps = {v: Matrix.from_dense([[r] for r in rows[i]]) for i, v in enumerate(verts)}
    amb = len(rows[0])
    return dataclasses.replace(inp, cusps=(dataclasses.replace(c, augmentation={0: Augmentation(amb, maps)}),))


def test_eis_dim():
    assert eis_dim(_aug_input([[0], [0], [0]]), 0)["dim"] == 0
    full = eis_dim(hilbert_example(1, 3), 0)
    assert full == {"dim": 1, "ambient": 1, "kills_boundaries": True}
    assert eis_dim(_aug_input([[1, 0, 0], [0, 1, 0], [1, 1, 0]]), 0)["dim"] == 2
    assert eis_dim(_aug_input([[1, 0], [0, 1], [1, 1]]), 0)["dim"] == min(3, 2)
    with pytest.raises(MissingAugmentation):
        eis_dim(dataclasses.replace(hilbert_example(1, 3), cusps=(dataclasses.replace(hilbert_example(1, 3).cusps[0], augmentation={}),)), 0)


def test_missing_cosheaf():
    inp = hilbert_example(1, 3)
    with pytest.raises(MissingCosheaf):
        corank_ss(inp, 1)
    with pytest.raises(MissingCosheaf):
        e1_by_cusp(inp, 1)


def _pt(label, corank):
    d = point()
    return Cusp(label, corank, d, SubcomplexMask(), {0: Cosheaf.constant(d)})


def _edge_cusp(gluing, corank=2, label="E"):
    from corank_ss.complex import DeltaComplex

    d = DeltaComplex.from_cells([((0,), ()), ((1,), ()), ((0, 1), (1, 0))])
    return Cusp(label, corank, d, SubcomplexMask.of([0, 1]), {0: Cosheaf.constant(d)}, gluing)


def test_gluing_errors():
    base = (_pt("a", 1), _pt("b", 1))
    ok = CorankInput(3, 2, (1, 3), base + (_edge_cusp({0: ("a", 0), 1: ("b", 0)}),))
    assert build_dual_complex(ok).counts() == [2, 1]
    cases = [
        {0: ("a", 0)},  # missing target
        {0: ("a", 0), 1: ("zz", 0)},  # unknown cusp
        {0: ("a", 0), 1: ("a", 0)},  # not injective
        {0: ("a", 0), 1: ("b", 5)},  # missing cell
    ]
    for g in cases:
        with pytest.raises(GluingInconsistent):
            build_dual_complex(CorankInput(3, 2, (1, 3), base + (_edge_cusp(g),)))
    same = CorankInput(3, 2, (1, 3), base + (_edge_cusp({0: ("a", 0), 1: ("b", 0)}, corank=1),))
    with pytest.raises(GluingInconsistent):
        build_dual_complex(same)
    interior = _edge_cusp({0: ("a", 0), 1: ("b", 0), 2: ("a", 0)})
    with pytest.raises(GluingInconsistent):
        build_dual_complex(CorankInput(3, 2, (1, 3), base + (interior,)))


def test_gluing_stalk_mismatch():
    base = (_pt("a", 1), _pt("b", 1))
    e = _edge_cusp({0: ("a", 0), 1: ("b", 0)})
    e2 = dataclasses.replace(e, cosheaves={0: Cosheaf.constant(e.complex, 2)})
    with pytest.raises(GluingInconsistent):
        corank_ss(CorankInput(3, 2, (1, 3), base + (e2,)), 0)


def test_problems_reported():
    inp = CorankInput(2, 2, (2, 1), (_pt("a", 1), _pt("a", 3)))
    probs = inp.problems()
    assert any("strictly increasing" in p for p in probs)
    assert any("duplicate" in p for p in probs)
    assert any("corank 3" in p for p in probs)
    assert any("exceeds" in p for p in CorankInput(1, 1, (2,), ()).problems())


def test_twisted_matches_untwisted_dimensions():
    a = run(mixed_disk()).levels[0].ss
    b = run(mixed_twisted()).levels[0].ss
    assert cork_dims(a.page(1)) == cork_dims(b.page(1))
    # stalks are rank 2 on the circle, but the unipotent twist keeps one invariant line
    assert b.fc.total.dim(0) == 2 * 3 + 1
