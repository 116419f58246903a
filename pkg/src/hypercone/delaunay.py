"""Lattice Delaunay polytope reconstruction from a distance vector.

Given squared distances among n+1 points, the doubled Gram matrix
``2 (v_i - v_0).(v_j - v_0) = d(0,i) + d(0,j) - d(i,j)`` decides degeneracy;
when it is nonsingular the points embed as 0, e_1, ..., e_n of a lattice with
that Gram matrix, and enumerating all lattice points on the circumsphere
recovers the full vertex set of the Delaunay polytope (and certifies that
the sphere is empty).

Sphere enumeration works on an exact square-root-free decomposition of the
quadratic form: all interval bounds are compared as squared rationals, so
there is no tolerance parameter anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import exact
from .cone import (BVector, DistVec, format_rational, h_eval, is_hypermetric,
                   pair_list)
from .exact import RatMatrix, _frac


class DegenerateDistance(ValueError):
    """Distance vector with singular Gram matrix where a nondegenerate one is required."""


class NotHypermetric(ValueError):
    """Distance vector outside the cone handed to an operation that assumes membership."""


class IndefiniteForm(ValueError):
    """Quadratic form that is not positive definite."""


class SphereNotEmpty(AssertionError):
    """A lattice point strictly inside a sphere that must be empty.

    On a hypermetric input this contradicts the defining inequalities, so it
    is reported as a fatal implementation bug rather than a data error.
    """

    def __init__(self, point):
        self.point = tuple(point)
        super().__init__(f"lattice point {self.point} strictly inside the sphere")


@dataclass(frozen=True)
class GramMatrix:
    n: int
    g: tuple[tuple[Fraction, ...], ...]

    def at(self, i: int, j: int) -> Fraction:
        return self.g[i][j]

    def as_matrix(self) -> RatMatrix:
        return RatMatrix.from_rows([list(r) for r in self.g])


def gram_from_distance(d: DistVec) -> GramMatrix:
    """G_ij = (d(0,i) + d(0,j) - d(i,j)) / 2 on the basis v_i - v_0."""
    n = d.n
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            row.append((d.get(0, i) + d.get(0, j) - d.get(i, j)) / 2)
        rows.append(tuple(row))
    return GramMatrix(n, tuple(rows))


def doubled_gram_det(d: DistVec) -> Fraction:
    """Determinant of [d(0,i) + d(0,j) - d(i,j)], the degeneracy witness."""
    n = d.n
    rows = [[d.get(0, i) + d.get(0, j) - d.get(i, j) for j in range(1, n + 1)]
            for i in range(1, n + 1)]
    return exact.det(RatMatrix.from_rows(rows))


def is_nondegenerate(d: DistVec, check_membership: bool = True) -> bool:
    """True iff the point family is affinely independent.

    Membership in the cone is a precondition; it is checked for n <= 6 unless
    the caller has already established it (pipeline interior points are sums
    of rays, hence members by construction).
    """
    if check_membership and d.n <= 6 and not is_hypermetric(d):
        raise NotHypermetric("distance vector violates a hypermetric inequality")
    return doubled_gram_det(d) != 0


def circumsphere(d: DistVec) -> tuple[tuple[Fraction, ...], Fraction]:
    """Center (in basis coordinates) and squared radius of the empty sphere."""
    g = gram_from_distance(d)
    rhs = [g.at(i, i) / 2 for i in range(d.n)]
    center = exact.solve(g.as_matrix(), rhs)
    if center is None or doubled_gram_det(d) == 0:
        raise DegenerateDistance("no unique circumcenter: degenerate input")
    r2 = Fraction(0)
    for i in range(d.n):
        for j in range(d.n):
            r2 += center[i] * g.at(i, j) * center[j]
    return center, r2


def _ldlt(g: GramMatrix) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Exact decomposition Q(y) = sum_k d_k (y_k + sum_{j>k} u_kj y_j)^2."""
    n = g.n
    a = [[g.at(i, j) for j in range(n)] for i in range(n)]
    diag: list[Fraction] = []
    u = [[Fraction(0)] * n for _ in range(n)]
    for k in range(n):
        if a[k][k] <= 0:
            raise IndefiniteForm(f"leading pivot {k} is {a[k][k]}")
        dk = a[k][k]
        diag.append(dk)
        for j in range(k + 1, n):
            u[k][j] = a[k][j] / dk
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] -= a[k][i] * a[k][j] / dk
    return diag, u


def _sphere_scan(g: GramMatrix, center: Sequence, r2,
                 collect_interior: bool = False):
    """All integer points with Q(x - c) = r2; optionally also those with < r2.

    Returns (on_sphere, interior).  Recursive interval bounding from the
    last coordinate down; every comparison is an exact rational one.
    """
    n = g.n
    c = [_frac(x) for x in center]
    r2 = _frac(r2)
    diag, u = _ldlt(g)
    on_sphere: list[tuple[int, ...]] = []
    interior: list[tuple[int, ...]] = []
    x = [0] * n

    def descend(k: int, budget: Fraction):
        if k < 0:
            if budget == 0:
                on_sphere.append(tuple(x))
            else:
                interior.append(tuple(x))
                if not collect_interior:
                    raise SphereNotEmpty(x)
            return
        shift = sum(u[k][j] * (x[j] - c[j]) for j in range(k + 1, n))
        z = c[k] - shift  # term vanishes at x_k = z
        dk = diag[k]
        t = int(z)  # floor for positive z; adjust below for negatives
        if Fraction(t) > z:
            t -= 1
        xk = t
        while True:
            y = xk - z
            term = dk * y * y
            if term > budget:
                break
            x[k] = xk
            descend(k - 1, budget - term)
            xk -= 1
        xk = t + 1
        while True:
            y = xk - z
            term = dk * y * y
            if term > budget:
                break
            x[k] = xk
            descend(k - 1, budget - term)
            xk += 1

    descend(n - 1, r2)
    on_sphere.sort()
    interior.sort()
    return on_sphere, interior


def enumerate_sphere(g: GramMatrix, center: Sequence, r2) -> list[tuple[int, ...]]:
    """Complete list of lattice points on the sphere, asserting emptiness.

    Raises SphereNotEmpty if a lattice point lies strictly inside: for inputs
    coming from the cone that would contradict the defining inequalities.
    """
    on_sphere, _ = _sphere_scan(g, center, r2, collect_interior=False)
    return on_sphere


def annulator(d: DistVec) -> list[BVector]:
    """All b with coordinate sum 1 and H(b) d = 0, via the sphere bijection.

    Each lattice point x on the empty sphere is the vertex with address
    b = (1 - sum(x), x_1, ..., x_n).
    """
    if not is_nondegenerate(d):
        raise DegenerateDistance("annulator is infinite for a degenerate vector")
    g = gram_from_distance(d)
    center, r2 = circumsphere(d)
    points = enumerate_sphere(g, center, r2)
    ann = [BVector((1 - sum(x),) + tuple(x)) for x in points]
    for b in ann:
        if h_eval(b, d) != 0:
            raise AssertionError(f"annulator member {b.coords} fails to vanish")
    basics = {tuple(1 if k == i else 0 for k in range(d.n + 1))
              for i in range(d.n + 1)}
    got = {b.coords for b in ann}
    if not basics <= got:
        raise AssertionError("basis vertices missing from the annulator")
    return ann


@dataclass(frozen=True)
class DelaunayRealization:
    """Explicit model of the polytope in basis coordinates."""

    gram: GramMatrix
    center: tuple[Fraction, ...]
    radius_sq: Fraction
    vertices: tuple[tuple[int, ...], ...]
    ann: tuple[BVector, ...]

    def export_text(self) -> str:
        n = self.gram.n
        lines = [f"n {n}"]
        for i in range(n):
            lines.append("gram " + " ".join(format_rational(self.gram.at(i, j))
                                            for j in range(n)))
        lines.append("center " + " ".join(format_rational(x) for x in self.center))
        lines.append("radius_sq " + format_rational(self.radius_sq))
        for v in self.vertices:
            lines.append("vertex " + " ".join(str(x) for x in v))
        return "\n".join(lines) + "\n"


def realize(d: DistVec) -> DelaunayRealization:
    g = gram_from_distance(d)
    center, r2 = circumsphere(d)
    points = enumerate_sphere(g, center, r2)
    ann = tuple(BVector((1 - sum(x),) + tuple(x)) for x in points)
    return DelaunayRealization(g, tuple(center), r2, tuple(points), ann)


# ---------------------------------------------------------------------------
# explicit vertex families (cube, half-cube, prisms) used for verification

def distvec_of_points(points: Sequence[Sequence[int]]) -> DistVec:
    """Squared-distance vector of an ordered point family in Z^m."""
    n = len(points) - 1
    entries = []
    for i, j in pair_list(n):
        entries.append(Fraction(sum((a - b) ** 2
                                    for a, b in zip(points[i], points[j]))))
    return DistVec(n, tuple(entries))


def cube_vertices(n: int) -> list[tuple[int, ...]]:
    verts = []
    for mask in range(2 ** n):
        verts.append(tuple((mask >> k) & 1 for k in range(n)))
    return sorted(verts)


def half_cube_vertices(n: int) -> list[tuple[int, ...]]:
    return [v for v in cube_vertices(n) if sum(v) % 2 == 0]


def prism_vertices(base: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Direct product of a vertex family with a unit segment."""
    return sorted([tuple(v) + (0,) for v in base] + [tuple(v) + (1,) for v in base])


def hnf_basis(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of the integer lattice generated by the rows (row-style HNF)."""
    work = [list(r) for r in rows if any(r)]
    ncols = len(rows[0]) if rows else 0
    basis: list[list[int]] = []
    col = 0
    while work and col < ncols:
        live = [r for r in work if r[col] != 0]
        if not live:
            col += 1
            continue
        while True:
            live.sort(key=lambda r: abs(r[col]))
            pivot = live[0]
            done = True
            for r in live[1:]:
                q = r[col] // pivot[col]
                if q:
                    for j in range(ncols):
                        r[j] -= q * pivot[j]
                if r[col]:
                    done = False
            live = [pivot] + [r for r in live[1:] if r[col] != 0]
            if done or len(live) == 1:
                break
        if pivot[col] < 0:
            pivot[:] = [-x for x in pivot]
        basis.append(list(pivot))
        work = [r for r in work if r is not pivot and any(r)]
        col += 1
    return basis


def lattice_coordinates(points: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Coordinates of each point over a basis of its difference lattice.

    The first point maps to the origin; the result is a family in Z^dim whose
    difference lattice is exactly Z^dim, which reduces affine-basis tests to
    unimodularity of coordinate differences.
    """
    pts = [tuple(p) for p in points]
    diffs = [[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]
    basis = hnf_basis(diffs)
    dim = len(basis)
    mat = RatMatrix.from_rows([[Fraction(basis[r][c]) for r in range(dim)]
                               for c in range(len(pts[0]))])
    out = [tuple([0] * dim)]
    for d in diffs:
        sol = exact.solve(mat, [Fraction(x) for x in d])
        if sol is None or any(x.denominator != 1 for x in sol):
            raise AssertionError("difference outside its own lattice")
        out.append(tuple(int(x) for x in sol))
    return out


def affine_basis_of_points(points: Sequence[Sequence[int]]) -> Optional[tuple[int, ...]]:
    """First (lexicographic) subset forming an affine basis of the family.

    In difference-lattice coordinates a subset qualifies exactly when its
    coordinate differences are unimodular, so the search is an integer
    determinant test over a depth-first scan with dependence pruning.
    """
    coords = lattice_coordinates(points)
    dim = len(coords[0])

    def descend(start: int, chosen: list[int],
                ech: exact.IntEchelon) -> Optional[tuple[int, ...]]:
        if len(chosen) == dim + 1:
            rows = [[a - b for a, b in zip(coords[k], coords[chosen[0]])]
                    for k in chosen[1:]]
            if exact.bareiss_det_int(rows) in (1, -1):
                return tuple(chosen)
            return None
        for k in range(start, len(coords)):
            diff = [a - b for a, b in zip(coords[k], coords[chosen[0]])]
            snapshot = list(ech.pivots)
            if ech.add(diff):
                chosen.append(k)
                hit = descend(k + 1, chosen, ech)
                if hit:
                    return hit
                chosen.pop()
            ech.pivots = snapshot
        return None

    for first in range(len(coords) - dim):
        hit = descend(first + 1, [first], exact.IntEchelon(len(coords[0])))
        if hit:
            return hit
    return None


def basis_distvec(points: Sequence[Sequence[int]]) -> DistVec:
    """Distance vector of the first affine basis of an explicit vertex family."""
    subset = affine_basis_of_points(points)
    if subset is None:
        raise ValueError("family admits no affine basis")
    return distvec_of_points([points[k] for k in subset])


def cube_basis_distvec(n: int) -> DistVec:
    """Standard cube basis 0, e_1, ..., e_n: d(0,i) = 1 and d(i,j) = 2."""
    entries = []
    for i, j in pair_list(n):
        entries.append(Fraction(1) if i == 0 else Fraction(2))
    return DistVec(n, tuple(entries))
