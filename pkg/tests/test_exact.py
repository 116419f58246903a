import random
from fractions import Fraction

import pytest

from hypercone import exact
from hypercone.cone import facet_catalog, h_form
from hypercone.exact import RatMatrix


def test_det_identity():
    assert exact.det(RatMatrix.identity(3)) == 1


def test_det_diagonal():
    m = RatMatrix.from_rows([[2, 0, 0], [0, 2, 0], [0, 0, 2]])
    assert exact.det(m) == 8


def test_det_equal_rows_singular():
    m = RatMatrix.from_rows([[1, 2, 3], [1, 2, 3], [0, 1, 4]])
    assert exact.det(m) == 0


def test_det_rejects_non_square():
    with pytest.raises(exact.DimensionError):
        exact.det(RatMatrix.from_rows([[1, 2, 3], [4, 5, 6]]))


def test_det_multiplicative_on_random_matrices():
    rng = random.Random(42)
    for _ in range(25):
        n = rng.randint(1, 4)
        a = RatMatrix.from_rows([[Fraction(rng.randint(-6, 6), rng.randint(1, 4))
                                  for _ in range(n)] for _ in range(n)])
        b = RatMatrix.from_rows([[Fraction(rng.randint(-6, 6), rng.randint(1, 4))
                                  for _ in range(n)] for _ in range(n)])
        prod = RatMatrix.from_rows(
            [[sum(a.at(i, k) * b.at(k, j) for k in range(n))
              for j in range(n)] for i in range(n)])
        assert exact.det(prod) == exact.det(a) * exact.det(b)


def test_rank_zero_matrix():
    assert exact.rank(RatMatrix.from_rows([[0, 0], [0, 0], [0, 0]])) == 0


def test_rank_identity():
    for n in (1, 3, 5):
        assert exact.rank(RatMatrix.identity(n)) == n


def test_solve_identity():
    assert exact.solve(RatMatrix.identity(3), [1, 2, 3]) == (1, 2, 3)


def test_solve_inconsistent_returns_none():
    m = RatMatrix.from_rows([[1, 0], [1, 0]])
    assert exact.solve(m, [1, 2]) is None


def test_solve_cube_circumcenter_system():
    # Identity Gram of the 3-cube basis: G c = diag(G)/2.
    g = RatMatrix.identity(3)
    sol = exact.solve(g, [Fraction(1, 2)] * 3)
    assert sol == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))


def test_solve_substitution_roundtrip():
    rng = random.Random(7)
    for _ in range(30):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        a = [[Fraction(rng.randint(-5, 5)) for _ in range(cols)]
             for _ in range(rows)]
        x = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(cols)]
        rhs = [sum(a[i][j] * x[j] for j in range(cols)) for i in range(rows)]
        sol = exact.solve(RatMatrix.from_rows(a), rhs)
        assert sol is not None
        back = [sum(a[i][j] * sol[j] for j in range(cols)) for i in range(rows)]
        assert back == rhs


def test_kernel_identity_trivial():
    assert exact.kernel(RatMatrix.identity(4)) == []


def test_kernel_single_row():
    basis = exact.kernel(RatMatrix.from_rows([[1, 1, 1]]))
    assert len(basis) == 2
    for v in basis:
        assert sum(v) == 0


def test_kernel_vectors_annihilate():
    rng = random.Random(3)
    for _ in range(20):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 6)
        a = [[Fraction(rng.randint(-3, 3)) for _ in range(cols)]
             for _ in range(rows)]
        m = RatMatrix.from_rows(a)
        basis = exact.kernel(m)
        assert len(basis) == cols - exact.rank(m)
        for v in basis:
            for i in range(rows):
                assert sum(a[i][j] * v[j] for j in range(cols)) == 0


def test_kernel_of_full_cut_system_is_trivial():
    # b(S) = 0 for all 63 nonzero cuts plus sum(b) = 0 forces b = 0:
    # the whole cone is non-degenerate (the simplex is basic).
    from hypercone.schlafli import nonzero_cut_sets
    rows = [[Fraction(1) if i in s else Fraction(0) for i in range(7)]
            for s in nonzero_cut_sets(6)]
    rows.append([Fraction(1)] * 7)
    assert exact.kernel(RatMatrix.from_rows(rows)) == []


def test_lp_three_term_decomposition():
    target = h_form((-2, 1, 1, 1))
    gens = [h_form(b) for b in [(-1, 1, 1, 0), (-1, 0, 1, 1), (-1, 1, 0, 1)]]
    res = exact.lp_feasible(gens, target)
    assert res.coeffs == (1, 1, 1)
    assert res.support == (0, 1, 2)


def test_lp_target_equals_generator():
    gens = [(1, 2, 3), (0, 1, 0)]
    res = exact.lp_feasible(gens, (1, 2, 3))
    assert res
    assert res.coeffs[0] == 1 and res.coeffs[1] == 0


def test_lp_infeasible_has_valid_farkas():
    gens = [(1, 0), (0, 1), (2, 3)]
    res = exact.lp_feasible(gens, (-1, -1))
    assert not res
    y = res.farkas
    assert sum(a * b for a, b in zip(y, (-1, -1))) > 0
    for g in gens:
        assert sum(a * b for a, b in zip(y, g)) <= 0


def test_lp_random_feasible_and_infeasible():
    rng = random.Random(11)
    for _ in range(20):
        m = rng.randint(2, 4)
        k = rng.randint(2, 5)
        gens = [tuple(Fraction(rng.randint(-4, 4)) for _ in range(m))
                for _ in range(k)]
        lam = [Fraction(rng.randint(0, 3)) for _ in range(k)]
        target = tuple(sum(lam[j] * gens[j][i] for j in range(k))
                       for i in range(m))
        res = exact.lp_feasible(gens, target)
        assert res, "constructed combination must be found feasible"
        back = tuple(sum(res.coeffs[j] * gens[j][i] for j in range(k))
                     for i in range(m))
        assert back == target
    for _ in range(20):
        m = rng.randint(2, 4)
        gens = [tuple(Fraction(rng.randint(0, 3)) for _ in range(m))
                for _ in range(rng.randint(1, 4))]
        target = tuple(Fraction(-rng.randint(1, 3)) for _ in range(m))
        res = exact.lp_feasible(gens, target)
        assert not res
        assert res.farkas is not None


def test_lp_strict_rejects_zero_target():
    with pytest.raises(ValueError):
        exact.lp_feasible([(1, 0)], (0, 0), strict=True)


@pytest.mark.slow
def test_lp_facet_form_never_decomposes():
    # A facet-defining label cannot be a nonnegative combination of the
    # other facet forms; the exact LP must report a Farkas certificate.
    catalog = facet_catalog(6)
    b1 = (1, 1, -1, 0, 0, 0, 0)
    target = h_form(b1)
    gens = [h_form(b) for orbit in catalog.orbits for b in orbit
            if b.coords != b1]
    assert len(gens) == 3772
    res = exact.lp_feasible(gens, target)
    assert not res
    y = res.farkas
    assert sum(a * b for a, b in zip(y, target)) > 0
    for g in gens[:50]:
        assert sum(a * b for a, b in zip(y, g)) <= 0
