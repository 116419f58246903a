import random
from fractions import Fraction

import pytest

from hypercone import delaunay
from hypercone.cone import cut_vector, distvec
from hypercone.delaunay import (DegenerateDistance, IndefiniteForm,
                                NotHypermetric, SphereNotEmpty, annulator,
                                circumsphere, cube_basis_distvec,
                                enumerate_sphere, gram_from_distance,
                                is_nondegenerate, realize)

from oracles import box_scan_sphere


def cube3():
    return cube_basis_distvec(3)


def test_gram_of_cube_basis_is_identity():
    g = gram_from_distance(cube3())
    for i in range(3):
        for j in range(3):
            assert g.at(i, j) == (1 if i == j else 0)


def test_gram_of_zero_distance_is_zero():
    g = gram_from_distance(distvec(2, [0, 0, 0]))
    assert all(g.at(i, j) == 0 for i in range(2) for j in range(2))


def test_gram_equilateral():
    g = gram_from_distance(distvec(2, [1, 1, 1]))
    assert g.at(0, 0) == 1 and g.at(1, 1) == 1
    assert g.at(0, 1) == Fraction(1, 2)


def test_nondegenerate_cube():
    assert is_nondegenerate(cube3())


def test_cut_is_degenerate():
    assert not is_nondegenerate(cut_vector({1}, 2))


def test_nondegenerate_rejects_non_member():
    with pytest.raises(NotHypermetric):
        is_nondegenerate(distvec(2, [1, 1, 3]))


def test_circumsphere_cube():
    c, r2 = circumsphere(cube3())
    assert c == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    assert r2 == Fraction(3, 4)


def test_circumsphere_equilateral():
    _, r2 = circumsphere(distvec(2, [1, 1, 1]))
    assert r2 == Fraction(1, 3)


def test_circumsphere_right_triangle():
    c, r2 = circumsphere(distvec(2, [1, 1, 2]))
    assert c == (Fraction(1, 2), Fraction(1, 2))
    assert r2 == Fraction(1, 2)


def test_circumsphere_degenerate_raises():
    with pytest.raises(DegenerateDistance):
        circumsphere(cut_vector({1}, 2))


def test_enumerate_sphere_cube_and_triangles():
    d = cube3()
    g = gram_from_distance(d)
    c, r2 = circumsphere(d)
    pts = enumerate_sphere(g, c, r2)
    assert sorted(pts) == [(i, j, k) for i in (0, 1) for j in (0, 1)
                           for k in (0, 1)]

    d = distvec(2, [1, 1, 1])
    pts = enumerate_sphere(gram_from_distance(d), *circumsphere(d))
    assert pts == [(0, 0), (0, 1), (1, 0)]

    d = distvec(2, [1, 1, 2])
    pts = enumerate_sphere(gram_from_distance(d), *circumsphere(d))
    assert len(pts) == 4


def test_enumerate_sphere_rejects_indefinite():
    from hypercone.delaunay import GramMatrix
    g = GramMatrix(2, ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(-1))))
    with pytest.raises(IndefiniteForm):
        enumerate_sphere(g, (0, 0), Fraction(1))


def test_enumerate_sphere_reports_interior_point():
    from hypercone.delaunay import GramMatrix
    g = GramMatrix(2, ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))))
    with pytest.raises(SphereNotEmpty):
        enumerate_sphere(g, (Fraction(1, 2), Fraction(1, 2)), Fraction(5))


def random_hypermetric(rng, n):
    """Random nonnegative cut combination: guaranteed inside the cone."""
    total = [Fraction(0)] * ((n + 1) * n // 2)
    for _ in range(rng.randint(1, 4)):
        members = {i for i in range(n + 1) if rng.random() < 0.5}
        w = Fraction(rng.randint(1, 4), rng.randint(1, 3))
        cv = cut_vector(members, n)
        total = [a + w * b for a, b in zip(total, cv.d)]
    return distvec(n, total)


def test_sphere_scan_matches_box_oracle():
    rng = random.Random(2024)
    checked = 0
    while checked < 60:
        n = rng.choice((2, 3))
        d = random_hypermetric(rng, n)
        if delaunay.doubled_gram_det(d) == 0:
            continue
        g = gram_from_distance(d)
        c, r2 = circumsphere(d)
        mine = enumerate_sphere(g, c, r2)
        grows = [[g.at(i, j) for j in range(n)] for i in range(n)]
        ref, ref_interior = box_scan_sphere(grows, c, r2)
        assert ref_interior == []
        box_pts = [p for p in mine if all(-5 <= x <= 6 for x in p)]
        assert box_pts == ref
        checked += 1


def test_annulator_cube_matches_known_addresses():
    got = sorted(b.coords for b in annulator(cube3()))
    assert got == sorted([
        (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1),
        (-1, 1, 1, 0), (-1, 0, 1, 1), (-1, 1, 0, 1), (-2, 1, 1, 1)])


def test_annulator_simplex_is_basis_only():
    ann = annulator(distvec(2, [1, 1, 1]))
    assert sorted(b.coords for b in ann) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_annulator_size_lower_bound_and_roundtrip():
    from hypercone.cone import h_eval
    rng = random.Random(77)
    checked = 0
    while checked < 25:
        n = rng.choice((2, 3))
        d = random_hypermetric(rng, n)
        if delaunay.doubled_gram_det(d) == 0:
            continue
        ann = annulator(d)
        assert len(ann) >= n + 1
        for b in ann:
            assert h_eval(b, d) == 0
        checked += 1


def test_annulator_rejects_degenerate():
    with pytest.raises(DegenerateDistance):
        annulator(cut_vector({1}, 2))


def test_realization_export_contains_all_vertices():
    real = realize(cube3())
    text = real.export_text()
    assert text.count("vertex") == 8
    assert "radius_sq 3/4" in text
    assert text.splitlines()[0] == "n 3"


def test_affine_basis_of_half_cube():
    verts = delaunay.half_cube_vertices(4)
    sub = delaunay.affine_basis_of_points(verts)
    assert sub is not None
    dv = delaunay.distvec_of_points([verts[k] for k in sub])
    assert is_nondegenerate(dv, check_membership=False)


def test_prism_vertices_cardinality():
    base = delaunay.half_cube_vertices(5)
    prism = delaunay.prism_vertices(base)
    assert len(prism) == 2 * len(base)
    assert len({len(v) for v in prism}) == 1
