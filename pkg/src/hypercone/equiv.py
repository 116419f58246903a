"""Geometric-equivalence machinery.

Three layers:

* a canonical-labeling engine for vertex-colored graphs (equitable partition
  refinement plus target-cell backtracking with automorphism pruning), which
  also reports automorphism generators as a byproduct;
* the two fast certificate schemes used by the face classification: a
  vertex-subset scheme for faces containing a non-cut extreme ray, and a
  bipartition scheme for faces generated by cuts (disjoint namespaces);
* a brute-force oracle that searches for a unimodular affine re-basing
  mapping one annulator onto another, kept for auditing the certificates.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .exact import IntEchelon, bareiss_det_int


@dataclass(frozen=True)
class ColoredGraph:
    """Undirected loopless graph with small-integer vertex colors."""

    n: int
    adj: tuple[int, ...]      # bitmask per vertex
    colors: tuple[int, ...]

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int]],
                   colors: Optional[Sequence[int]] = None) -> "ColoredGraph":
        masks = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError("loops not supported")
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        cols = tuple(colors) if colors is not None else (0,) * n
        if len(cols) != n:
            raise ValueError("color count mismatch")
        return ColoredGraph(n, tuple(masks), cols)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()


def relabel(g: ColoredGraph, perm: Sequence[int]) -> ColoredGraph:
    """Image of g under vertex -> perm[vertex]."""
    masks = [0] * g.n
    for v in range(g.n):
        m = g.adj[v]
        w = 0
        while m:
            low = m & -m
            w |= 1 << perm[low.bit_length() - 1]
            m ^= low
        masks[perm[v]] = w
    colors = [0] * g.n
    for v in range(g.n):
        colors[perm[v]] = g.colors[v]
    return ColoredGraph(g.n, tuple(masks), tuple(colors))


@dataclass(frozen=True)
class Certificate:
    """Canonical byte string naming a geometric-equivalence class.

    Certificates compare only within a scheme; the scheme tag keeps the
    cut-generated and non-cut namespaces disjoint.
    """

    scheme: str
    blob: bytes

    @property
    def key(self) -> tuple[str, bytes]:
        return (self.scheme, self.blob)


# ---------------------------------------------------------------------------
# canonical labeling

def _refine(adj: Sequence[int], cells: list[list[int]],
            queue: deque) -> list[list[int]]:
    """Equitable refinement; ``queue`` holds splitter bitmask snapshots."""
    while queue:
        splitter = queue.popleft()
        out: list[list[int]] = []
        for cell in cells:
            if len(cell) == 1:
                out.append(cell)
                continue
            groups: dict[int, list[int]] = {}
            for v in cell:
                groups.setdefault((adj[v] & splitter).bit_count(), []).append(v)
            if len(groups) == 1:
                out.append(cell)
            else:
                for key in sorted(groups):
                    sub = groups[key]
                    out.append(sub)
                    m = 0
                    for v in sub:
                        m |= 1 << v
                    queue.append(m)
        cells = out
    return cells


class _CanonSearch:
    def __init__(self, g: ColoredGraph):
        self.g = g
        self.n = g.n
        self.adj = g.adj
        self.best_string: Optional[bytes] = None
        self.best_perm: Optional[list[int]] = None
        self.first_string: Optional[bytes] = None
        self.first_perm: Optional[list[int]] = None
        self.gens: list[tuple[int, ...]] = []

    def run(self) -> tuple[bytes, tuple[tuple[int, ...], ...]]:
        by_color: dict[int, list[int]] = {}
        for v in range(self.n):
            by_color.setdefault(self.g.colors[v], []).append(v)
        cells = [by_color[c] for c in sorted(by_color)]
        queue = deque()
        for cell in cells:
            m = 0
            for v in cell:
                m |= 1 << v
            queue.append(m)
        cells = _refine(self.adj, cells, queue)
        self._node(cells, [])
        colors_by_pos = [self.g.colors[self.best_perm[i]] for i in range(self.n)]
        header = f"{self.n};{','.join(map(str, colors_by_pos))};".encode()
        return header + self.best_string, tuple(self.gens)

    def _leaf_string(self, perm: list[int]) -> bytes:
        bits = bytearray()
        acc = 0
        nb = 0
        for i in range(self.n):
            ai = self.adj[perm[i]]
            for j in range(i + 1, self.n):
                acc = (acc << 1) | ((ai >> perm[j]) & 1)
                nb += 1
                if nb == 8:
                    bits.append(acc)
                    acc = 0
                    nb = 0
        if nb:
            bits.append(acc << (8 - nb))
        return bytes(bits)

    def _add_automorphism(self, p1: list[int], p2: list[int]):
        sigma = [0] * self.n
        for i in range(self.n):
            sigma[p1[i]] = p2[i]
        tsig = tuple(sigma)
        if tsig != tuple(range(self.n)) and tsig not in self.gens:
            self.gens.append(tsig)

    def _orbit_reps(self, fixed: list[int]) -> list[int]:
        """Union-find over vertices under generators fixing the prefix."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for gperm in self.gens:
            if all(gperm[f] == f for f in fixed):
                for v in range(self.n):
                    rv, rg = find(v), find(gperm[v])
                    if rv != rg:
                        parent[max(rv, rg)] = min(rv, rg)
        return [find(v) for v in range(self.n)]

    def _node(self, cells: list[list[int]], fixed: list[int]):
        target = None
        for idx, cell in enumerate(cells):
            if len(cell) > 1 and (target is None or len(cell) < len(cells[target])):
                target = idx
        if target is None:
            perm = [cell[0] for cell in cells]
            s = self._leaf_string(perm)
            if self.first_string is None:
                self.first_string, self.first_perm = s, perm
            elif s == self.first_string:
                self._add_automorphism(self.first_perm, perm)
            if self.best_string is None or s > self.best_string:
                self.best_string, self.best_perm = s, list(perm)
            elif s == self.best_string and perm != self.best_perm:
                self._add_automorphism(self.best_perm, perm)
            return

        tried: list[int] = []
        for v in cells[target]:
            if tried:
                roots = self._orbit_reps(fixed)
                if any(roots[v] == roots[u] for u in tried):
                    continue
            tried.append(v)
            new_cells = []
            for idx, cell in enumerate(cells):
                if idx == target:
                    new_cells.append([v])
                    new_cells.append([u for u in cell if u != v])
                else:
                    new_cells.append(list(cell))
            queue = deque([1 << v])
            m = 0
            for u in cells[target]:
                if u != v:
                    m |= 1 << u
            queue.append(m)
            refined = _refine(self.adj, new_cells, queue)
            fixed.append(v)
            self._node(refined, fixed)
            fixed.pop()


def canonical_form(g: ColoredGraph) -> tuple[bytes, tuple[tuple[int, ...], ...]]:
    """Relabeling-invariant certificate plus automorphism generators.

    The certificate of ``relabel(g, pi)`` equals the certificate of ``g`` for
    every permutation pi; the returned generators generate the automorphism
    group of the colored graph.
    """
    if g.n == 0:
        return b"0;;", ()
    return _CanonSearch(g).run()


# ---------------------------------------------------------------------------
# permutation-group helpers

def perm_compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """First q, then p."""
    return tuple(p[q[i]] for i in range(len(p)))


def perm_inverse(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v] = i
    return tuple(inv)


def group_closure(gens: Sequence[Sequence[int]], cap: int = 10 ** 7) -> set[tuple[int, ...]]:
    """All elements generated; BFS products, exact (no group theory shortcuts)."""
    if not gens:
        return {()}
    n = len(gens[0])
    ident = tuple(range(n))
    gens = [tuple(g) for g in gens]
    elements = {ident}
    frontier = [ident]
    while frontier:
        new = []
        for e in frontier:
            for g in gens:
                prod = perm_compose(g, e)
                if prod not in elements:
                    elements.add(prod)
                    new.append(prod)
                    if len(elements) > cap:
                        raise RuntimeError("group closure exceeded cap")
        frontier = new
    return elements


def shrink_generators(gens: Sequence[Sequence[int]],
                      cap: int = 10 ** 7) -> tuple[list[tuple[int, ...]], int]:
    """Greedy sub-list of ``gens`` generating the same group.

    Returns (generators, group order).  Canonical-form searches report many
    redundant automorphisms; orbit computations downstream get much cheaper
    with two or three generators.
    """
    chosen: list[tuple[int, ...]] = []
    closure: set[tuple[int, ...]] = set()
    if gens:
        closure = {tuple(range(len(gens[0])))}
    for g in gens:
        tg = tuple(g)
        if tg in closure:
            continue
        chosen.append(tg)
        closure = group_closure(chosen, cap)
    return chosen, (len(closure) if closure else 1)


def orbit_partition(gens: Sequence[Sequence[int]], n: int) -> list[int]:
    """Root labels of the point orbits under the generated group."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in gens:
        for v in range(n):
            rv, rg = find(v), find(g[v])
            if rv != rg:
                parent[max(rv, rg)] = min(rv, rg)
    return [find(v) for v in range(n)]


# ---------------------------------------------------------------------------
# certificate schemes

def vertex_subset_certificate(graph: ColoredGraph,
                              subsets: Iterable[frozenset[int]]) -> Certificate:
    """Minimum canonical form of the graph 2-colored by each vertex subset.

    Used for faces containing a non-cut extreme ray: each such ray identifies
    the face annulator with a vertex subset of the ambient polytope skeleton,
    and the minimum over the face's rays is a well-defined class key.
    """
    best: Optional[bytes] = None
    for s in set(subsets):
        colors = tuple(1 if v in s else 0 for v in range(graph.n))
        cert, _ = canonical_form(ColoredGraph(graph.n, graph.adj, colors))
        if best is None or cert < best:
            best = cert
    if best is None:
        raise ValueError("no subsets given")
    return Certificate("schlafli", best)


def bipartition_certificate(n_points: int,
                            bipartitions: Iterable[tuple[frozenset[int], frozenset[int]]]
                            ) -> Certificate:
    """Canonical form of the point/bipartition incidence structure.

    Every cut incident to a cut-generated face splits the annulator in two;
    the unordered system of these splits is the face's combinatorial content.
    Each deduplicated split contributes a *pair* of side nodes joined by an
    edge (so the encoding cannot depend on which side of a cut was stored),
    with membership edges to the annulator points.
    """
    seen: set[frozenset[frozenset[int]]] = set()
    pairs: list[tuple[frozenset[int], frozenset[int]]] = []
    for a, b in bipartitions:
        key = frozenset((frozenset(a), frozenset(b)))
        if key not in seen:
            seen.add(key)
            pairs.append((frozenset(a), frozenset(b)))
    n = n_points + 2 * len(pairs)
    edges = []
    colors = [0] * n_points + [1] * (2 * len(pairs))
    for k, (a, b) in enumerate(pairs):
        pa = n_points + 2 * k
        pb = pa + 1
        edges.append((pa, pb))
        for x in a:
            edges.append((pa, x))
        for x in b:
            edges.append((pb, x))
    cert, _ = canonical_form(ColoredGraph.from_edges(n, edges, colors))
    return Certificate("cutgraph", cert)


# ---------------------------------------------------------------------------
# brute-force oracle

def _diff_counter(pts: list[tuple[int, ...]]) -> Counter:
    c: Counter = Counter()
    for x in pts:
        for y in pts:
            c[tuple(a - b for a, b in zip(x, y))] += 1
    return c


def _dependency_projector(pts: list[tuple[int, ...]]) -> dict[tuple, dict[tuple, "Fraction"]]:
    """Orthogonal projector onto the affine-dependency space of the points.

    Dependencies are vectors lambda with sum_v lambda_v v = 0 (coordinate sums
    being 1 forces sum lambda = 0 automatically).  A re-basing bijection acts
    on the dependency space purely by permuting point labels, so the
    projector conjugates by that permutation: its entries are exact affine
    invariants of points and pairs.
    """
    from fractions import Fraction

    from .exact import RatMatrix, kernel, solve

    m = len(pts[0])
    cols = RatMatrix.from_rows([[Fraction(pts[j][i]) for j in range(len(pts))]
                                for i in range(m)])
    kbasis = kernel(cols)
    nv = len(pts)
    proj = {v: {u: Fraction(0) for u in pts} for v in pts}
    if not kbasis:
        return proj
    k = len(kbasis)
    gram = RatMatrix.from_rows([[sum(kbasis[a][i] * kbasis[b][i] for i in range(nv))
                                 for b in range(k)] for a in range(k)])
    # P = K (K^T K)^-1 K^T, assembled column by column.
    for j in range(nv):
        rhs = [kbasis[a][j] for a in range(k)]
        w = solve(gram, rhs)
        col = [sum(kbasis[a][i] * w[a] for a in range(k)) for i in range(nv)]
        for i in range(nv):
            proj[pts[i]][pts[j]] = col[i]
    return proj


def _parallelogram_counts(pts: list[tuple[int, ...]]) -> dict[tuple, dict[tuple, int]]:
    """r[v][u] = number of w in the set with v + u - w also in the set."""
    s = set(pts)
    r: dict[tuple, dict[tuple, int]] = {v: {} for v in pts}
    for v in pts:
        for u in pts:
            cnt = 0
            for w in pts:
                if tuple(a + b - c for a, b, c in zip(v, u, w)) in s:
                    cnt += 1
            r[v][u] = cnt
    return r


def _wl_colors(pts: list[tuple[int, ...]], diff: Counter,
               proj) -> dict[tuple, int]:
    """Iterated affine-invariant point coloring (1-dimensional refinement)."""
    para = _parallelogram_counts(pts)
    colors = {v: 0 for v in pts}
    for _ in range(len(pts)):
        sigs = {}
        for v in pts:
            profile = sorted(
                (colors[u], para[v][u], proj[v][u],
                 diff[tuple(a - b for a, b in zip(v, u))])
                for u in pts)
            sigs[v] = (colors[v], proj[v][v], tuple(profile))
        order = sorted(set(sigs.values()))
        new = {v: order.index(sigs[v]) for v in pts}
        if new == colors:
            break
        colors = new
    return colors


def oracle_equivalent(ann_f: Sequence[Sequence[int]],
                      ann_g: Sequence[Sequence[int]]) -> bool:
    """Exhaustive test for a unimodular affine re-basing of one annulator
    onto the other.

    Searches ordered tuples (b^0, ..., b^n) from ann_f with determinant +-1
    such that b' -> sum b'_i b^i maps ann_g bijectively onto ann_f.  Affine
    invariants (additive-relation counts per point and difference
    multiplicities per pair) prune the search; only workable at low corank,
    which is all it is used for.
    """
    vf = [tuple(int(x) for x in b) for b in ann_f]
    vg = [tuple(int(x) for x in b) for b in ann_g]
    if len(vf) != len(vg):
        return False
    if not vf:
        return True
    npt = len(vf[0])
    if any(len(b) != npt for b in vg):
        return False
    set_f = set(vf)
    diff_f, diff_g = _diff_counter(vf), _diff_counter(vg)
    if sorted(diff_f.values()) != sorted(diff_g.values()):
        return False
    proj_f, proj_g = _dependency_projector(vf), _dependency_projector(vg)
    col_f = _wl_colors(vf, diff_f, proj_f)
    col_g = _wl_colors(vg, diff_g, proj_g)
    if sorted(col_f.values()) != sorted(col_g.values()):
        return False

    basis_targets = [tuple(1 if k == i else 0 for k in range(npt))
                     for i in range(npt)]
    candidates = [[v for v in vf if col_f[v] == col_g[e]] for e in basis_targets]
    # Most constrained basis position first.
    order = sorted(range(npt), key=lambda i: len(candidates[i]))
    chosen: dict[int, tuple[int, ...]] = {}

    def accept() -> bool:
        rows = [list(chosen[i]) for i in range(npt)]
        if bareiss_det_int(rows) not in (1, -1):
            return False
        for b in vg:
            img = tuple(sum(b[i] * chosen[i][k] for i in range(npt))
                        for k in range(npt))
            if img not in set_f:
                return False
        return True

    def descend(step: int, ech: IntEchelon) -> bool:
        if step == npt:
            return accept()
        i = order[step]
        ei = basis_targets[i]
        for cand in candidates[i]:
            ok = True
            for j in (order[s] for s in range(step)):
                if proj_f[cand][chosen[j]] != proj_g[ei][basis_targets[j]] or \
                        diff_f[tuple(a - b for a, b in zip(cand, chosen[j]))] != \
                        diff_g[tuple(a - b for a, b in zip(ei, basis_targets[j]))]:
                    ok = False
                    break
            if not ok:
                continue
            snapshot = list(ech.pivots)
            if not ech.add(cand):
                ech.pivots = snapshot
                continue
            chosen[i] = cand
            if descend(step + 1, ech):
                return True
            del chosen[i]
            ech.pivots = snapshot
        return False

    return descend(0, IntEchelon(npt))
