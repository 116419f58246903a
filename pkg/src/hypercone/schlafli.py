"""The 27-vertex model behind the non-cut extreme rays.

The construction is combinatorial: 27 labels a_i, b_i, c_ij with the classical
line-meeting rules, skeleton graph = complement of the meeting graph, and the
two-distance assignment (squared length 2 across edges, 4 across non-edges).
Correctness is not assumed: the build verifies the strongly regular
parameters, the symmetry group order, and, through the Delaunay machinery,
that a basis distance vector has an empty sphere with exactly 27 lattice
points on it.

Affine bases are enumerated exactly (unimodularity in the vertex-difference
lattice), grouped into orbits under the symmetry group, and their distance
vectors classified up to coordinate permutation.  Expanding those classes
under all permutations, together with the nonzero cuts, yields the complete
extreme-ray inventory of the cone on seven points.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import delaunay, exact, equiv
from .cone import BVector, DistVec, distvec, pair_list
from .equiv import ColoredGraph, canonical_form
from .exact import RatMatrix

SCHLAFLI_AUT_ORDER = 51840


class ModelCheckError(AssertionError):
    """A construction self-check failed; the model cannot be trusted."""


def _line_labels() -> list[str]:
    labels = [f"a{i}" for i in range(1, 7)] + [f"b{i}" for i in range(1, 7)]
    labels += [f"c{i}{j}" for i in range(1, 7) for j in range(i + 1, 7)]
    return labels


def _meeting_edges() -> list[tuple[int, int]]:
    """Pairs of intersecting lines among a_i, b_i, c_ij."""
    idx_a = {i: i - 1 for i in range(1, 7)}
    idx_b = {i: 5 + i for i in range(1, 7)}
    idx_c = {}
    k = 12
    for i in range(1, 7):
        for j in range(i + 1, 7):
            idx_c[(i, j)] = k
            k += 1
    edges = []
    for i in range(1, 7):
        for j in range(i + 1, 7):
            edges.append((idx_a[i], idx_b[j]))
            edges.append((idx_a[j], idx_b[i]))
    for (p, q), cix in idx_c.items():
        for i in (p, q):
            edges.append((idx_a[i], cix))
            edges.append((idx_b[i], cix))
    pairs = list(idx_c.items())
    for x in range(len(pairs)):
        for y in range(x + 1, len(pairs)):
            (p1, q1), c1 = pairs[x]
            (p2, q2), c2 = pairs[y]
            if not ({p1, q1} & {p2, q2}):
                edges.append((c1, c2))
    return edges


@dataclass(frozen=True)
class SchlafliModel:
    graph: ColoredGraph                       # skeleton (non-meeting lines)
    labels: tuple[str, ...]
    dist: tuple[tuple[int, ...], ...]         # 27x27 squared distances
    aut_gens: tuple[tuple[int, ...], ...]
    aut_order: int
    base: tuple[int, ...]                     # one affine basis (vertex ids)
    coords: tuple[tuple[int, ...], ...]       # all 27 vertices over the base
    base_dist: DistVec


def _srg_params(g: ColoredGraph) -> Optional[tuple[int, int, int, int]]:
    n = g.n
    degs = {g.degree(v) for v in range(n)}
    if len(degs) != 1:
        return None
    k = degs.pop()
    lam = set()
    mu = set()
    for u in range(n):
        for v in range(u + 1, n):
            common = (g.adj[u] & g.adj[v]).bit_count()
            if (g.adj[u] >> v) & 1:
                lam.add(common)
            else:
                mu.add(common)
    if len(lam) > 1 or len(mu) > 1:
        return None
    return (n, k, lam.pop() if lam else 0, mu.pop() if mu else 0)


def _gram_rows(dist, basis: Sequence[int]) -> list[list[Fraction]]:
    p0 = basis[0]
    rest = basis[1:]
    return [[Fraction(dist[p0][pi] + dist[p0][pj] - dist[pi][pj], 2)
             for pj in rest] for pi in rest]


def _barycentric(dist, basis: Sequence[int], w: int,
                 gram: RatMatrix) -> Optional[tuple[Fraction, ...]]:
    p0 = basis[0]
    rhs = [Fraction(dist[p0][w] + dist[p0][pi] - dist[pi][w], 2)
           for pi in basis[1:]]
    return exact.solve(gram, rhs)


def _first_affine_basis(dist) -> Optional[tuple[int, ...]]:
    """Lexicographically first 7-subset whose barycentric coordinates for
    all 27 vertices are integral."""
    nv = len(dist)

    def gram_rank(basis):
        rows = _gram_rows(dist, basis)
        irows = [[int(x) for x in r] for r in rows]
        return exact.rank_int_rows(irows, len(irows))

    def leaf_ok(basis) -> bool:
        rows = _gram_rows(dist, basis)
        gram = RatMatrix.from_rows(rows)
        if exact.det(gram) == 0:
            return False
        for w in range(nv):
            sol = _barycentric(dist, basis, w, gram)
            if sol is None or any(x.denominator != 1 for x in sol):
                return False
        return True

    def descend(chosen: list[int], start: int) -> Optional[tuple[int, ...]]:
        if len(chosen) == 7:
            return tuple(chosen) if leaf_ok(chosen) else None
        for v in range(start, nv):
            chosen.append(v)
            if gram_rank(chosen) == len(chosen) - 1:
                hit = descend(chosen, v + 1)
                if hit:
                    return hit
            chosen.pop()
        return None

    return descend([], 0)


def build_schlafli(verify: bool = True) -> SchlafliModel:
    """Construct and self-check the model; raises ModelCheckError on failure."""
    labels = tuple(_line_labels())
    nv = len(labels)
    meet = set()
    for u, v in _meeting_edges():
        meet.add((min(u, v), max(u, v)))
    skeleton_edges = [(u, v) for u in range(nv) for v in range(u + 1, nv)
                      if (u, v) not in meet]
    graph = ColoredGraph.from_edges(nv, skeleton_edges)

    dist_rows = []
    for u in range(nv):
        row = []
        for v in range(nv):
            if u == v:
                row.append(0)
            elif (graph.adj[u] >> v) & 1:
                row.append(2)
            else:
                row.append(4)
        dist_rows.append(tuple(row))
    dist = tuple(dist_rows)

    if verify:
        params = _srg_params(graph)
        if params != (27, 16, 10, 8):
            raise ModelCheckError(f"skeleton SRG parameters {params}")
        comp_edges = [(u, v) for (u, v) in meet]
        comp = ColoredGraph.from_edges(nv, comp_edges)
        cparams = _srg_params(comp)
        if cparams != (27, 10, 1, 5):
            raise ModelCheckError(f"meeting-graph SRG parameters {cparams}")

    _, raw_gens = canonical_form(graph)
    gens, order = equiv.shrink_generators(raw_gens, cap=200000)
    if verify and order != SCHLAFLI_AUT_ORDER:
        raise ModelCheckError(f"symmetry group order {order}")

    base = _first_affine_basis(dist)
    if base is None:
        raise ModelCheckError("no affine basis found")
    gram = RatMatrix.from_rows(_gram_rows(dist, base))
    coords = []
    for w in range(nv):
        sol = _barycentric(dist, base, w, gram)
        coords.append(tuple(int(x) for x in sol))
    coords = tuple(coords)

    base_dist = distvec(6, [Fraction(dist[base[i]][base[j]])
                            for i, j in pair_list(6)])

    if verify:
        values = {dist[u][v] for u in range(nv) for v in range(nv) if u != v}
        if values != {2, 4}:
            raise ModelCheckError(f"distance values {values}")
        # The basis vector must describe an empty sphere carrying all 27
        # vertices; this turns the distance assignment into a proven fact.
        real = delaunay.realize(base_dist)
        if len(real.vertices) != nv:
            raise ModelCheckError(f"sphere carries {len(real.vertices)} points")
        if set(real.vertices) != set(coords):
            raise ModelCheckError("sphere points do not match vertex coordinates")

    return SchlafliModel(graph, labels, dist, tuple(gens), order,
                         base, coords, base_dist)


# ---------------------------------------------------------------------------
# affine bases and their classes

@dataclass(frozen=True)
class BasisOrbit:
    """One class of affine bases up to symmetry plus basis relabeling."""

    representative: tuple[int, ...]
    dist_vec: DistVec
    orbit_size_under_aut: int
    ann: tuple[BVector, ...]      # vertex id -> address over the representative


def _all_affine_subsets(model: SchlafliModel) -> list[tuple[int, ...]]:
    """Every 7-subset of vertices that is unimodular in the difference lattice.

    The difference lattice is exactly Z^6 in base coordinates (the base is an
    affine basis), so the test is |det| = 1 on coordinate differences.  A
    float determinant pass filters candidates (entries are tiny, so the
    filter cannot miss), and exact integer elimination confirms each one.
    """
    coords = np.array(model.coords, dtype=np.int64)
    combos = np.array(list(itertools.combinations(range(27), 7)), dtype=np.int16)
    hits: list[tuple[int, ...]] = []
    chunk = 60000
    for lo in range(0, len(combos), chunk):
        part = combos[lo:lo + chunk]
        pts = coords[part]                      # (m, 7, 6)
        diffs = (pts[:, 1:, :] - pts[:, :1, :]).astype(np.float64)
        dets = np.abs(np.linalg.det(diffs))
        cand = np.nonzero((dets > 0.5) & (dets < 1.5))[0]
        for k in cand:
            sub = tuple(int(x) for x in part[k])
            rows = [[int(coords[sub[i + 1]][c] - coords[sub[0]][c])
                     for c in range(6)] for i in range(6)]
            if exact.bareiss_det_int(rows) in (1, -1):
                hits.append(sub)
    return hits


def _basis_ann(model: SchlafliModel, basis: Sequence[int]) -> tuple[BVector, ...]:
    """Vertex addresses over an ordered basis, one per vertex id."""
    gram = RatMatrix.from_rows(_gram_rows(model.dist, basis))
    out = []
    for w in range(27):
        sol = _barycentric(model.dist, basis, w, gram)
        if sol is None or any(x.denominator != 1 for x in sol):
            raise ModelCheckError(f"vertex {w} not integral over {basis}")
        beta = tuple(int(x) for x in sol)
        out.append(BVector((1 - sum(beta),) + beta))
    return tuple(out)


def _basis_graph_cert(model: SchlafliModel, subset: Sequence[int]) -> bytes:
    """Canonical form of the 7-point two-distance pattern of a subset."""
    edges = [(i, j) for i in range(7) for j in range(i + 1, 7)
             if model.dist[subset[i]][subset[j]] == 2]
    cert, _ = canonical_form(ColoredGraph.from_edges(7, edges))
    return cert


def affine_bases(model: SchlafliModel) -> list[BasisOrbit]:
    """All classes of affine bases, with exact orbit bookkeeping.

    Subsets are grouped under the symmetry group (union-find over generator
    images) and orbit representatives are classified by the canonical form of
    their 7-point distance pattern, which is the distance vector up to
    coordinate permutation.
    """
    subsets = _all_affine_subsets(model)
    index = {s: k for k, s in enumerate(subsets)}
    parent = list(range(len(subsets)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, sub in enumerate(subsets):
        for g in model.aut_gens:
            img = tuple(sorted(g[v] for v in sub))
            j = index.get(img)
            if j is None:
                raise ModelCheckError("symmetry image of a basis is not a basis")
            rk, rj = find(k), find(j)
            if rk != rj:
                parent[max(rk, rj)] = min(rk, rj)

    orbit_members: dict[int, list[int]] = {}
    for k in range(len(subsets)):
        orbit_members.setdefault(find(k), []).append(k)

    classes: dict[bytes, dict] = {}
    for root, members in orbit_members.items():
        rep = subsets[root]
        cert = _basis_graph_cert(model, rep)
        entry = classes.setdefault(cert, {"size": 0, "rep": rep})
        entry["size"] += len(members)
        if rep < entry["rep"]:
            entry["rep"] = rep

    orbits = []
    for cert in sorted(classes):
        entry = classes[cert]
        rep = entry["rep"]
        dv = distvec(6, [Fraction(model.dist[rep[i]][rep[j]])
                         for i, j in pair_list(6)])
        orbits.append(BasisOrbit(rep, dv, entry["size"],
                                 _basis_ann(model, rep)))
    return orbits


# ---------------------------------------------------------------------------
# extreme-ray inventory

@dataclass(frozen=True)
class RayInventory:
    """Complete extreme-ray list of the cone: nonzero cuts plus the expanded
    basis classes (n = 6), or cuts alone (n <= 5)."""

    n: int
    vectors: tuple[tuple[int, ...], ...]
    kinds: tuple[str, ...]                 # "cut" | "schlafli"
    orbit_ids: tuple[int, ...]
    cut_members: dict[int, frozenset[int]]
    ray_class: dict[int, tuple[int, tuple[int, ...]]]  # ray id -> (class, sigma)
    basis_orbits: tuple[BasisOrbit, ...]
    num_cut_orbits: int

    @property
    def num_orbits(self) -> int:
        return self.num_cut_orbits + len(self.basis_orbits)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"n={self.n};".encode())
        for v, k, o in zip(self.vectors, self.kinds, self.orbit_ids):
            h.update(f"{k}:{o}:{','.join(map(str, v))};".encode())
        return h.hexdigest()

    def export_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for rid, (v, k, o) in enumerate(zip(self.vectors, self.kinds,
                                                self.orbit_ids)):
                rec = {"id": rid, "kind": k, "orbit": o,
                       "dist": [str(x) for x in v]}
                fh.write(json.dumps(rec) + "\n")


def nonzero_cut_sets(n: int) -> list[frozenset[int]]:
    """Canonical nonzero cut labels (the side not containing 0), by size."""
    out = []
    for size in range(1, n + 1):
        for members in itertools.combinations(range(1, n + 1), size):
            out.append(frozenset(members))
    out.sort(key=lambda s: (len(s), sorted(s)))
    return out


def _cut_orbit_id(members: frozenset[int], n: int) -> int:
    """Orbit index of a cut under coordinate permutations: bipartition size."""
    return min(len(members), n + 1 - len(members)) - 1


def _cut_ray_vector(members: frozenset[int], n: int) -> tuple[int, ...]:
    return tuple(1 if (i in members) != (j in members) else 0
                 for i, j in pair_list(n))


def _pair_perm(sigma: Sequence[int], n: int) -> list[int]:
    """Index map sending pair slot (i,j) to slot (sigma i, sigma j)."""
    plist = pair_list(n)
    pidx = {p: k for k, p in enumerate(plist)}
    out = []
    for (i, j) in plist:
        a, b = sigma[i], sigma[j]
        if a > b:
            a, b = b, a
        out.append(pidx[(a, b)])
    return out


def cut_inventory(n: int) -> RayInventory:
    """Cuts-only inventory; complete for n <= 5 where no other rays exist."""
    cuts = nonzero_cut_sets(n)
    vectors = tuple(_cut_ray_vector(s, n) for s in cuts)
    kinds = tuple("cut" for _ in cuts)
    orbit_ids = tuple(_cut_orbit_id(s, n) for s in cuts)
    members = {i: s for i, s in enumerate(cuts)}
    return RayInventory(n, vectors, kinds, orbit_ids, members, {}, (),
                        (n + 1) // 2)


def extreme_rays_hyp7(model: SchlafliModel,
                      orbits: Sequence[BasisOrbit]) -> RayInventory:
    """63 nonzero cuts in 3 orbits plus the expansion of every basis class
    under all coordinate permutations, deduplicated exactly."""
    cuts = nonzero_cut_sets(6)
    vectors: list[tuple[int, ...]] = [_cut_ray_vector(s, 6) for s in cuts]
    kinds = ["cut"] * len(cuts)
    orbit_ids = [_cut_orbit_id(s, 6) for s in cuts]
    cut_members = {i: s for i, s in enumerate(cuts)}
    ray_class: dict[int, tuple[int, tuple[int, ...]]] = {}

    sigmas = list(itertools.permutations(range(7)))
    pairmaps = [_pair_perm(s, 6) for s in sigmas]

    seen: dict[tuple[int, ...], int] = {}
    for cid, orbit in enumerate(orbits):
        base_vec = tuple(int(x) for x in orbit.dist_vec.d)
        for sig, pm in zip(sigmas, pairmaps):
            img = [0] * len(base_vec)
            for k, val in enumerate(base_vec):
                img[pm[k]] = val
            timg = tuple(img)
            prev = seen.get(timg)
            if prev is None:
                rid = len(vectors)
                seen[timg] = rid
                vectors.append(timg)
                kinds.append("schlafli")
                orbit_ids.append(3 + cid)
                ray_class[rid] = (cid, tuple(sig))
            elif orbit_ids[prev] != 3 + cid:
                raise ModelCheckError("distinct basis classes produced one ray")
    return RayInventory(6, tuple(vectors), tuple(kinds), tuple(orbit_ids),
                        cut_members, ray_class, tuple(orbits), 3)


def ray_annulator(inv: RayInventory, ray_id: int) -> tuple[tuple[int, ...], ...]:
    """Annulator of a non-cut ray: the class annulator pushed through sigma,
    indexed by model vertex id."""
    cid, sigma = inv.ray_class[ray_id]
    ann = inv.basis_orbits[cid].ann
    out = []
    for b in ann:
        img = [0] * 7
        for i, x in enumerate(b.coords):
            img[sigma[i]] = x
        out.append(tuple(img))
    return tuple(out)
