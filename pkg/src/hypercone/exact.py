"""Exact rational linear algebra and LP feasibility.

Everything in this module is exact: matrices carry ``fractions.Fraction``
entries, elimination is fraction-free on integer-scaled rows, and the simplex
method pivots in rational arithmetic under Bland's rule.  There are no
tolerances anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

Rat = Fraction


class DimensionError(ValueError):
    """Operand shapes do not match."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RatMatrix:
    """Dense rational matrix, row-major, immutable."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"entry count {len(self.entries)} != {self.rows}x{self.cols}"
            )

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "RatMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        if any(len(row) != c for row in rows):
            raise DimensionError("ragged rows")
        return RatMatrix(r, c, tuple(_frac(x) for row in rows for x in row))

    @staticmethod
    def identity(n: int) -> "RatMatrix":
        one, zero = Fraction(1), Fraction(0)
        return RatMatrix(n, n, tuple(one if i == j else zero
                                     for i in range(n) for j in range(n)))

    def at(self, i: int, j: int) -> Fraction:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def row_lists(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]


def _row_gcd(row: Sequence[int]) -> int:
    g = 0
    for x in row:
        g = gcd(g, x)
        if g == 1:
            return 1
    return g


def _scale_rows_to_int(rows: list[list[Fraction]]) -> tuple[list[list[int]], Fraction]:
    """Clear denominators row by row.  Returns (int rows, det multiplier)."""
    out = []
    mult = Fraction(1)
    for row in rows:
        lcm = 1
        for x in row:
            d = x.denominator
            lcm = lcm * d // gcd(lcm, d)
        mult *= lcm
        out.append([int(x * lcm) for x in row])
    return out, mult


def bareiss_det_int(a: list[list[int]]) -> int:
    """Fraction-free determinant of an integer matrix (destroys ``a``)."""
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            arow = a[i]
            krow = a[k]
            for j in range(k + 1, n):
                arow[j] = (arow[j] * pivot - aik * krow[j]) // prev
            arow[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def det(m: RatMatrix) -> Fraction:
    """Exact determinant via fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise DimensionError(f"matrix is {m.rows}x{m.cols}, not square")
    irows, mult = _scale_rows_to_int(m.row_lists())
    return Fraction(bareiss_det_int(irows)) / mult


class IntEchelon:
    """Incremental integer row echelon used for exact rank computations.

    Rows are reduced against stored pivot rows by cross-multiplication and
    renormalized by their gcd, so entries stay integral and bounded.  Used
    heavily on hot paths (ray spans, facet spans) where early exit at a known
    rank cap saves most of the work.
    """

    def __init__(self, width: int):
        self.width = width
        self.pivots: list[tuple[int, list[int]]] = []  # (pivot col, row)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add(self, row: Sequence[int]) -> bool:
        """Reduce ``row`` and absorb it; True if the rank grew."""
        r = list(row)
        for col, prow in self.pivots:
            if r[col]:
                a, b = prow[col], r[col]
                r = [a * x - b * y for x, y in zip(r, prow)]
        lead = -1
        for j, x in enumerate(r):
            if x:
                lead = j
                break
        if lead < 0:
            return False
        g = _row_gcd(r)
        if g > 1:
            r = [x // g for x in r]
        if r[lead] < 0:
            r = [-x for x in r]
        self.pivots.append((lead, r))
        self.pivots.sort(key=lambda p: p[0])
        return True


def rank_int_rows(rows, width: int, cap: Optional[int] = None) -> int:
    """Rank of a set of integer rows, stopping early once ``cap`` is hit."""
    ech = IntEchelon(width)
    for row in rows:
        ech.add(row)
        if cap is not None and ech.rank >= cap:
            return ech.rank
    return ech.rank


def rank(m: RatMatrix) -> int:
    """Exact linear rank."""
    irows, _ = _scale_rows_to_int(m.row_lists())
    return rank_int_rows(irows, m.cols)


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Fractions; returns (rows, pivot cols)."""
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        sel = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def solve(a: RatMatrix, rhs: Sequence) -> Optional[tuple[Fraction, ...]]:
    """One exact solution of ``a x = rhs`` or None if inconsistent.

    When ``a`` is square and nonsingular the solution is the unique one;
    otherwise free variables are set to zero.
    """
    if len(rhs) != a.rows:
        raise DimensionError(f"rhs length {len(rhs)} != {a.rows} rows")
    aug = [list(a.row(i)) + [_frac(rhs[i])] for i in range(a.rows)]
    red, pivots = _rref(aug)
    n = a.cols
    for i in range(len(red)):
        if all(red[i][j] == 0 for j in range(n)) and red[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for r, c in enumerate(pivots):
        if c == n:
            return None  # pivot in the rhs column: inconsistent
        x[c] = red[r][n]
    return tuple(x)


def kernel(a: RatMatrix) -> list[tuple[Fraction, ...]]:
    """Exact basis of the null space (empty list for a trivial kernel)."""
    rows = a.row_lists()
    red, pivots = _rref(rows)
    n = a.cols
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -red[r][fc]
        basis.append(tuple(v))
    return basis


@dataclass(frozen=True)
class LPResult:
    """Outcome of an exact feasibility run.

    ``coeffs`` is the nonnegative combination if one exists (with ``support``
    the indices of its strictly positive entries); otherwise ``farkas`` holds
    an exact separating vector y with y.g <= 0 for every generator g and
    y.target > 0, which makes infeasibility auditable.
    """

    coeffs: Optional[tuple[Fraction, ...]]
    support: Optional[tuple[int, ...]]
    farkas: Optional[tuple[Fraction, ...]]

    def __bool__(self) -> bool:
        return self.coeffs is not None


def lp_feasible(generators: Sequence[Sequence], target: Sequence,
                strict: bool = False) -> LPResult:
    """Exact simplex feasibility: find lambda >= 0 with sum(l_i g_i) = target.

    Phase-I simplex with Bland's rule (exact arithmetic makes cycling the
    only possible failure mode, and Bland's rule rules it out).  On success
    the support of the returned coefficients is reported; with ``strict`` the
    target must be nonzero so that the support is guaranteed nonempty.
    """
    m = len(target)
    if any(len(g) != m for g in generators):
        raise DimensionError("generator/target length mismatch")
    t = [_frac(x) for x in target]
    if strict and all(x == 0 for x in t):
        raise ValueError("strict mode requires a nonzero target")
    n = len(generators)

    # Flip rows so every right hand side is nonnegative.
    flip = [-1 if t[i] < 0 else 1 for i in range(m)]
    tab = []
    for i in range(m):
        row = [flip[i] * _frac(g[i]) for g in generators]
        row += [Fraction(1) if k == i else Fraction(0) for k in range(m)]
        row.append(flip[i] * t[i])
        tab.append(row)
    ncols = n + m

    # Objective: minimize the sum of artificials.  The maintained row is
    # z_j = y.A_j with y the simplex multipliers; it starts as the column
    # sums (all-artificial basis) and stays consistent because only original
    # columns, whose cost is zero, ever enter.
    z = [Fraction(0)] * (ncols + 1)
    for row in tab:
        for j in range(ncols + 1):
            z[j] += row[j]
    basis = list(range(n, n + m))

    while True:
        if z[ncols] == 0:
            break  # objective zero: feasible, no optimality proof needed
        enter = -1
        for j in range(n):  # artificials never re-enter
            if z[j] > 0:
                enter = j  # Bland: smallest improving index
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][ncols] / tab[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            # Unbounded cannot happen in phase I (objective bounded below by 0).
            raise RuntimeError("phase-I simplex reported unbounded")
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        if z[enter] != 0:
            f = z[enter]
            z = [x - f * y for x, y in zip(z, tab[leave])]
        basis[leave] = enter

    objective = z[ncols]
    if objective == 0:
        lam = [Fraction(0)] * n
        for i, b in enumerate(basis):
            if b < n:
                lam[b] = tab[i][ncols]
        assert all(x >= 0 for x in lam)
        # Exactness audit: the combination reproduces the target.
        for i in range(m):
            s = sum(lam[j] * _frac(generators[j][i]) for j in range(n) if lam[j])
            assert s == t[i]
        support = tuple(j for j in range(n) if lam[j] > 0)
        return LPResult(tuple(lam), support, None)

    # Infeasible: the multipliers live in the artificial columns (A_k = e_k),
    # unflipped back to the original row signs they form a Farkas vector.
    yv = tuple(flip[i] * z[n + i] for i in range(m))
    # Audit the certificate exactly before handing it out.
    assert sum(yv[i] * t[i] for i in range(m)) > 0
    for g in generators:
        assert sum(yv[i] * _frac(g[i]) for i in range(m)) <= 0
    return LPResult(None, None, yv)
