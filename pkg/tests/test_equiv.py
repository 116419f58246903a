import random

from hypercone.equiv import (Certificate, ColoredGraph, bipartition_certificate,
                             canonical_form, group_closure, oracle_equivalent,
                             perm_compose, perm_inverse, relabel,
                             shrink_generators, vertex_subset_certificate)

from conftest import repartitioning_ann


def complete_graph(n):
    return ColoredGraph.from_edges(
        n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, 5 + i) for i in range(5)]
    return ColoredGraph.from_edges(10, outer + inner + spokes)


def random_graph(rng, n, p=0.4, colors=None):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p]
    return ColoredGraph.from_edges(n, edges, colors)


def test_k5_automorphism_group_order():
    _, gens = canonical_form(complete_graph(5))
    assert len(group_closure(gens)) == 120


def test_petersen_automorphism_group_order():
    _, gens = canonical_form(petersen())
    assert len(group_closure(gens)) == 120


def test_canonical_form_invariance_random_graphs():
    rng = random.Random(123)
    for trial in range(6):
        n = rng.randint(6, 16)
        g = random_graph(rng, n)
        base, _ = canonical_form(g)
        for _ in range(50):
            p = list(range(n))
            rng.shuffle(p)
            cert, _ = canonical_form(relabel(g, p))
            assert cert == base


def test_canonical_form_respects_colors():
    g1 = ColoredGraph.from_edges(3, [(0, 1)], colors=(0, 0, 1))
    g2 = ColoredGraph.from_edges(3, [(0, 1)], colors=(0, 1, 0))
    c1, _ = canonical_form(g1)
    c2, _ = canonical_form(g2)
    assert c1 != c2  # the isolated vertex carries a different color


def test_colored_invariance():
    rng = random.Random(5)
    g = random_graph(rng, 12, colors=tuple(rng.randint(0, 2) for _ in range(12)))
    base, _ = canonical_form(g)
    for _ in range(60):
        p = list(range(12))
        rng.shuffle(p)
        cert, _ = canonical_form(relabel(g, p))
        assert cert == base


def test_distinguishes_nonisomorphic_same_degrees():
    c6 = ColoredGraph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
    two_triangles = ColoredGraph.from_edges(
        6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    assert canonical_form(c6)[0] != canonical_form(two_triangles)[0]


def test_automorphisms_are_automorphisms():
    rng = random.Random(31)
    g = random_graph(rng, 10)
    _, gens = canonical_form(g)
    for p in gens:
        assert relabel(g, p).adj == g.adj


def test_perm_helpers():
    p = (2, 0, 1)
    assert perm_compose(p, perm_inverse(p)) == (0, 1, 2)


def test_shrink_generators_preserves_group():
    _, gens = canonical_form(complete_graph(4))
    small, order = shrink_generators(gens)
    assert order == 24
    assert len(small) <= len(gens)


def test_group_closure_of_transposition_and_cycle():
    n = 5
    cyc = tuple((i + 1) % n for i in range(n))
    swap = (1, 0, 2, 3, 4)
    assert len(group_closure([cyc, swap])) == 120


def test_vertex_subset_certificate_invariance():
    rng = random.Random(17)
    g = random_graph(rng, 9, p=0.5)
    s = frozenset({1, 3, 4})
    c1 = vertex_subset_certificate(g, [s])
    p = list(range(9))
    rng.shuffle(p)
    gp = relabel(g, p)
    sp = frozenset(p[v] for v in s)
    c2 = vertex_subset_certificate(gp, [sp])
    assert c1.key == c2.key
    assert c1.scheme == "schlafli"


def test_bipartition_certificate_side_independence():
    parts = [(frozenset({0, 1}), frozenset({2, 3, 4}))]
    swapped = [(frozenset({2, 3, 4}), frozenset({0, 1}))]
    assert bipartition_certificate(5, parts).key == \
        bipartition_certificate(5, swapped).key


def test_bipartition_certificate_detects_structure():
    a = bipartition_certificate(4, [(frozenset({0}), frozenset({1, 2, 3}))])
    b = bipartition_certificate(4, [(frozenset({0, 1}), frozenset({2, 3}))])
    assert a.key != b.key


def test_certificate_schemes_are_disjoint():
    assert Certificate("schlafli", b"x").key != Certificate("cutgraph", b"x").key


def test_oracle_reflexive():
    ann = repartitioning_ann((2, 2, 1, -1, -1, -1, -1))
    assert oracle_equivalent(ann, ann)


def test_oracle_switching_pair_equivalent():
    # Re-basing on the extra vertex: all coordinates negated except one.
    a = repartitioning_ann((2, 2, 1, -1, -1, -1, -1))
    b = repartitioning_ann((-2, -2, 1, 1, 1, 1, 1))
    assert oracle_equivalent(a, b)


def test_oracle_switching_pair_inequivalent():
    a = repartitioning_ann((2, 2, 1, -1, -1, -1, -1))
    b = repartitioning_ann((2, -2, 1, 1, 1, -1, -1))
    assert not oracle_equivalent(a, b)


def test_oracle_on_facet_table_classes():
    # The merged classes pair 3-4, 7-8, 9-10, 11-12, 13-14.
    pairs = [((1, 1, 1, 1, -1, -2, 0), (2, 1, 1, -1, -1, -1, 0), True),
             ((1, 1, -1, 0, 0, 0, 0), (1, 1, 1, -1, -1, 0, 0), False),
             ((3, 1, 1, -1, -1, -1, -1), (1, 1, 1, 1, 1, -1, -3), True),
             ((1, 1, 1, 1, -1, -1, -1), (2, 1, 1, 1, -1, -1, -2), False)]
    for a, b, expected in pairs:
        assert oracle_equivalent(repartitioning_ann(a),
                                 repartitioning_ann(b)) is expected


def test_oracle_sizes_must_match():
    a = repartitioning_ann((1, 1, -1, 0, 0, 0, 0))
    assert not oracle_equivalent(a, a[:-1])
