"""Hypermetric vectors, cut semimetrics and the facet catalog.

A distance vector on points ``0..n`` is stored as a flat vector indexed by
unordered pairs in lexicographic order::

    (0,1), (0,2), ..., (0,n), (1,2), ..., (n-1,n)

This pair order is the single source of truth for every serialization in the
package (catalog exports, ray inventories, distance-vector files).

An inequality label is an integer vector b with coordinate sum 1; the induced
linear form has coefficient ``b_i * b_j`` on pair (i, j), and metric vectors
inside the cone evaluate to <= 0 on all of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

from .exact import _frac


class UnsupportedDimension(ValueError):
    """Requested n outside the supported range."""


class InvalidBVector(ValueError):
    """Integer vector whose coordinates do not sum to 1."""


# ---------------------------------------------------------------------------
# pair indexing

def num_pairs(n: int) -> int:
    return (n + 1) * n // 2


@lru_cache(maxsize=None)
def pair_list(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n + 1) for j in range(i + 1, n + 1))


@lru_cache(maxsize=None)
def pair_index_map(n: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(pair_list(n))}


def pair_index(i: int, j: int, n: int) -> int:
    if i > j:
        i, j = j, i
    return pair_index_map(n)[(i, j)]


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class BVector:
    """Hypermetric inequality label; also a lattice point address."""

    coords: tuple[int, ...]

    def __post_init__(self):
        if sum(self.coords) != 1:
            raise InvalidBVector(f"coordinates sum to {sum(self.coords)}, not 1")

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def __getitem__(self, i: int) -> int:
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)


def _coords(b) -> tuple[int, ...]:
    if isinstance(b, BVector):
        return b.coords
    t = tuple(int(x) for x in b)
    if sum(t) != 1:
        raise InvalidBVector(f"coordinates sum to {sum(t)}, not 1")
    return t


@dataclass(frozen=True)
class DistVec:
    """Vector of squared distances indexed by pairs (see module docstring)."""

    n: int
    d: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.d) != num_pairs(self.n):
            raise ValueError(f"need {num_pairs(self.n)} entries, got {len(self.d)}")

    def get(self, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        return self.d[pair_index(i, j, self.n)]


def distvec(n: int, entries: Sequence) -> DistVec:
    return DistVec(n, tuple(_frac(x) for x in entries))


@dataclass(frozen=True)
class CutSet:
    """Canonical cut label: the side of the bipartition not containing 0."""

    members: frozenset[int]
    n: int

    @property
    def is_zero(self) -> bool:
        return not self.members


def cutset(members: Iterable[int], n: int) -> CutSet:
    s = frozenset(members)
    if any(x < 0 or x > n for x in s):
        raise ValueError("cut member out of range")
    if 0 in s:
        s = frozenset(range(n + 1)) - s
    return CutSet(s, n)


@dataclass(frozen=True)
class FacetCatalog:
    n: int
    orbit_reps: tuple[BVector, ...]
    orbits: tuple[tuple[BVector, ...], ...]

    @property
    def total(self) -> int:
        return sum(len(o) for o in self.orbits)

    def all_vectors(self) -> list[BVector]:
        return [b for orbit in self.orbits for b in orbit]


# ---------------------------------------------------------------------------
# forms and evaluation

def h_form(b) -> tuple[int, ...]:
    """Coefficient vector of the inequality labelled by b: entry (i,j) is b_i b_j."""
    c = _coords(b)
    n = len(c) - 1
    return tuple(c[i] * c[j] for i, j in pair_list(n))


def h_eval(b, d: DistVec) -> Fraction:
    c = _coords(b)
    if len(c) != d.n + 1:
        raise ValueError(f"b has {len(c)} coordinates but d is on {d.n + 1} points")
    total = Fraction(0)
    for k, (i, j) in enumerate(pair_list(d.n)):
        cij = c[i] * c[j]
        if cij:
            total += cij * d.d[k]
    return total


def b_weight(b, members: Iterable[int]) -> int:
    """Sum of the b coordinates over a point subset."""
    c = _coords(b)
    return sum(c[i] for i in members)


def cut_vector(s: CutSet | Iterable[int], n: int | None = None) -> DistVec:
    if isinstance(s, CutSet):
        members, n = s.members, s.n
    else:
        if n is None:
            raise ValueError("n required when passing a raw member set")
        members = cutset(s, n).members
    one, zero = Fraction(1), Fraction(0)
    return DistVec(n, tuple(
        one if (i in members) != (j in members) else zero
        for i, j in pair_list(n)))


def switch_root(b, a_set: Iterable[int]) -> BVector:
    """Negate b on a subset with zero b-weight; maps facets to facets."""
    c = _coords(b)
    a = frozenset(a_set)
    if any(x < 0 or x >= len(c) for x in a):
        raise ValueError("switch set out of range")
    w = sum(c[i] for i in a)
    if w != 0:
        raise ValueError(f"switch set has b-weight {w}, expected 0")
    return BVector(tuple(-c[i] if i in a else c[i] for i in range(len(c))))


def geometric_partner(b, i: int) -> BVector:
    """Negate every coordinate except position i (which must hold a 1).

    Re-bases a repartitioning polytope on its extra vertex, so the partner's
    facet orbit belongs to the same geometric-equivalence class.
    """
    c = _coords(b)
    if c[i] != 1:
        raise ValueError(f"coordinate {i} is {c[i]}, expected 1")
    return BVector(tuple(x if k == i else -x for k, x in enumerate(c)))


def zero_extension(b) -> BVector:
    c = _coords(b)
    return BVector(c + (0,))


# ---------------------------------------------------------------------------
# facet catalog
#
# For n <= 5 the cone coincides with the cut cone and the facet orbits are
# the classical ones, reachable from n = 2 by zero extension; n = 6 has the
# fourteen known orbits.  Every representative is re-verified at runtime by
# the ray-span test in the face-lattice engine rather than trusted.

FACET_ORBIT_REPS: dict[int, tuple[tuple[int, ...], ...]] = {
    2: ((1, 1, -1),),
    3: ((1, 1, -1, 0),),
    4: ((1, 1, -1, 0, 0),
        (1, 1, 1, -1, -1)),
    5: ((1, 1, -1, 0, 0, 0),
        (1, 1, 1, -1, -1, 0),
        (1, 1, 1, 1, -1, -2),
        (2, 1, 1, -1, -1, -1)),
    6: ((1, 1, -1, 0, 0, 0, 0),
        (1, 1, 1, -1, -1, 0, 0),
        (1, 1, 1, 1, -1, -2, 0),
        (2, 1, 1, -1, -1, -1, 0),
        (1, 1, 1, 1, -1, -1, -1),
        (2, 1, 1, 1, -1, -1, -2),
        (2, 2, 1, -1, -1, -1, -1),
        (1, 1, 1, 1, 1, -2, -2),
        (3, 1, 1, -1, -1, -1, -1),
        (1, 1, 1, 1, 1, -1, -3),
        (2, 2, 1, 1, -1, -1, -3),
        (3, 1, 1, 1, -1, -2, -2),
        (3, 2, 1, -1, -1, -1, -2),
        (2, 1, 1, 1, 1, -2, -3)),
}


def orbit_of(rep: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """All distinct coordinate permutations, lexicographically sorted."""
    return tuple(sorted(set(itertools.permutations(rep))))


@lru_cache(maxsize=None)
def facet_catalog(n: int) -> FacetCatalog:
    if n not in FACET_ORBIT_REPS:
        raise UnsupportedDimension(f"facet catalog only available for n in 2..6, got {n}")
    reps = FACET_ORBIT_REPS[n]
    orbits = tuple(tuple(BVector(v) for v in orbit_of(rep)) for rep in reps)
    return FacetCatalog(n, tuple(BVector(r) for r in reps), orbits)


def is_hypermetric(d: DistVec) -> bool:
    """Membership test against the complete facet list (n <= 6 only)."""
    if d.n not in FACET_ORBIT_REPS:
        raise UnsupportedDimension(f"membership test only available for n in 2..6, got {d.n}")
    # Scale to integers once so the inner loop is pure int arithmetic.
    lcm = 1
    for x in d.d:
        q = _frac(x).denominator
        lcm = lcm * q // gcd(lcm, q)
    di = [int(_frac(x) * lcm) for x in d.d]
    plist = pair_list(d.n)
    for orbit in facet_catalog(d.n).orbits:
        for b in orbit:
            c = b.coords
            total = 0
            for k, (i, j) in enumerate(plist):
                total += c[i] * c[j] * di[k]
            if total > 0:
                return False
    return True


def merge_orbits_geometrically(catalog: FacetCatalog) -> list[list[int]]:
    """Group facet orbits into geometric-equivalence classes.

    Two orbits merge when some member of one maps into the other under the
    partner operation at a coordinate holding 1 (re-basing on the extra
    vertex of the repartitioning polytope).  Returns sorted orbit-index
    groups.
    """
    key_to_orbit = {}
    for oi, rep in enumerate(catalog.orbit_reps):
        key_to_orbit[tuple(sorted(rep.coords))] = oi

    parent = list(range(len(catalog.orbit_reps)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for oi, rep in enumerate(catalog.orbit_reps):
        for i, x in enumerate(rep.coords):
            if x == 1:
                partner = geometric_partner(rep, i)
                key = tuple(sorted(partner.coords))
                if key in key_to_orbit:
                    union(oi, key_to_orbit[key])
                # A partner outside the catalog would not define a facet;
                # the ray-span verification would have caught that earlier.
    groups: dict[int, list[int]] = {}
    for oi in range(len(catalog.orbit_reps)):
        groups.setdefault(find(oi), []).append(oi)
    return sorted(groups.values())


# ---------------------------------------------------------------------------
# serialization

def format_rational(x) -> str:
    f = _frac(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_rational(s: str) -> Fraction:
    return Fraction(s)


def format_catalog(catalog: FacetCatalog) -> str:
    lines = []
    for k, orbit in enumerate(catalog.orbits):
        lines.append(f"# orbit {k} size {len(orbit)}")
        for b in orbit:
            lines.append(" ".join(str(x) for x in b.coords))
    return "\n".join(lines) + "\n"


def parse_distvec_text(text: str) -> DistVec:
    """Whitespace-separated rationals; n inferred from the entry count."""
    entries = [parse_rational(tok) for tok in text.split()]
    for n in range(2, 8):
        if num_pairs(n) == len(entries):
            return DistVec(n, tuple(entries))
    raise ValueError(f"{len(entries)} entries do not match any supported dimension")
