"""Command-line driver.

Commands:

* ``facets -n N``: facet orbit catalog, totals, geometric classes; with
  ``--inventory`` also the ray-span verification of every representative.
* ``rays``: build the extreme-ray inventory (n = 6), verify the basis
  classes, write the inventory file.
* ``classify``: run the face classification level by level with checkpoints.
* ``verify-basic``: exact decompositions for the relative-volume tables.
* ``report DIR``: rank distribution of a (possibly partial) run against the
  known classification counts.
* ``annulator --dist FILE``: lattice-polytope reconstruction for a distance
  vector given as whitespace-separated rationals.

Exit code 0 means every check requested by the command passed.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import delaunay, exact, pipeline, schlafli
from .cone import (FACET_ORBIT_REPS, BVector, FacetCatalog, facet_catalog,
                   format_catalog, format_rational, h_form, is_hypermetric,
                   merge_orbits_geometrically, num_pairs, orbit_of,
                   parse_distvec_text)
from .faces import FaceLattice, build_lattice


def _load_inventory_context(verbose: bool = True):
    t0 = time.time()
    model = schlafli.build_schlafli()
    orbits = schlafli.affine_bases(model)
    inv = schlafli.extreme_rays_hyp7(model, orbits)
    if verbose:
        print(f"# inventory built in {time.time() - t0:.0f}s "
              f"({len(inv.vectors)} rays, {inv.num_orbits} orbits)")
    return model, orbits, inv


def _lattice_for(n: int) -> FaceLattice:
    if n == 6:
        model, _, inv = _load_inventory_context()
        return FaceLattice(6, inv, model)
    return build_lattice(n)


def cmd_facets(args) -> int:
    n = args.n
    if args.selftest_corrupt:
        # Swap one representative for a decomposable non-facet vector; the
        # totals check (n >= 3) or the ray-span check must then fail.
        # Test hook only.
        reps = list(FACET_ORBIT_REPS[n])
        reps[0] = (2, -1) + (0,) * (n - 1)
        catalog = FacetCatalog(
            n, tuple(BVector(r) for r in reps),
            tuple(tuple(BVector(v) for v in orbit_of(r)) for r in reps))
    else:
        catalog = facet_catalog(n)

    print(f"facet catalog n={n}: {len(catalog.orbits)} orbits")
    for k, (rep, orbit) in enumerate(zip(catalog.orbit_reps, catalog.orbits)):
        print(f"  orbit {k + 1:2d}: rep {tuple(rep.coords)} size {len(orbit)}")
    total = catalog.total
    print(f"total inequalities: {total}")
    classes = merge_orbits_geometrically(catalog)
    print(f"geometric classes: {len(classes)}")
    for group in classes:
        print("   {" + ", ".join(str(i + 1) for i in group) + "}")

    expected_totals = {2: 3, 3: 12, 4: 40, 5: 210, 6: 3773}
    ok = total == expected_totals[n]
    if not ok:
        print(f"TOTAL MISMATCH: {total} != {expected_totals[n]}")
    if n == 6 and len(classes) != 9:
        print(f"CLASS COUNT MISMATCH: {len(classes)} != 9")
        ok = False

    if args.inventory:
        lat = _lattice_for(n)
        for k, rep in enumerate(catalog.orbit_reps):
            good = lat.is_facet_by_rays(rep)
            print(f"  ray-span check orbit {k + 1}: {'ok' if good else 'FAIL'}")
            ok = ok and good
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(format_catalog(catalog))
        print(f"catalog written to {args.out}")
    return 0 if ok else 1


def cmd_rays(args) -> int:
    model, orbits, inv = _load_inventory_context()
    lat = FaceLattice(6, inv, model)
    print(f"extreme rays: {len(inv.vectors)} total, {inv.num_orbits} orbits")
    cut_count = sum(1 for k in inv.kinds if k == "cut")
    print(f"  cut rays: {cut_count} in {inv.num_cut_orbits} orbits")
    print(f"  basis-class rays: {len(inv.vectors) - cut_count} "
          f"in {len(inv.basis_orbits)} orbits")
    ok = cut_count == 63 and inv.num_orbits == 29

    for cid, orbit in enumerate(inv.basis_orbits):
        dv = orbit.dist_vec
        vals = lat.H @ np.array([int(x) for x in dv.d], dtype=np.int64)
        if (vals > 0).any():
            print(f"  class {cid}: inequality VIOLATED")
            ok = False
            continue
        tight_count = int((vals == 0).sum())
        nondeg = delaunay.is_nondegenerate(dv, check_membership=False)
        ann = delaunay.annulator(dv)
        face_rank = num_pairs(6) - exact.rank_int_rows(
            [h_form(b) for b in ann], num_pairs(6))
        line_ok = (tight_count == 20 and nondeg and len(ann) == 27
                   and face_rank == 1)
        ok = ok and line_ok
        print(f"  class {cid:2d}: bases {orbit.orbit_size_under_aut:6d}, "
              f"tight facets {tight_count}, |ann| {len(ann)}, "
              f"face rank {face_rank} {'ok' if line_ok else 'FAIL'}")

    degenerate_cuts = sum(
        1 for i, kind in enumerate(inv.kinds)
        if kind == "cut" and lat.doubled_gram_det(inv.vectors[i]) == 0)
    print(f"  degenerate cut rays: {degenerate_cuts} (expected 63)")
    ok = ok and degenerate_cuts == 63
    if args.out:
        inv.export_jsonl(args.out)
        print(f"inventory written to {args.out} "
              f"(hash {inv.content_hash()[:16]})")
    return 0 if ok else 1


def cmd_classify(args) -> int:
    cfg = pipeline.RunConfig(
        n=args.n, max_corank=args.max_corank,
        checkpoint_dir=args.checkpoint, threads=args.threads,
        verify_level=args.verify_level, budget_seconds=args.budget)
    lat = _lattice_for(args.n)
    t0 = time.time()

    def progress(level):
        print(f"corank {level.corank:2d} (rank {level.rank:2d}): "
              f"{level.type_count:5d} types, "
              f"{len(level.degenerate_masks):5d} degenerate faces, "
              f"{time.time() - t0:7.0f}s", flush=True)

    summary = pipeline.classify(lat, cfg, progress=progress)
    print(f"levels completed: {len(summary.levels)}"
          + ("" if summary.completed else " (stopped on budget)"))
    print(f"heredity violations: {summary.heredity_violations}")
    ok = summary.heredity_violations == 0
    if args.n == 6:
        for lv in summary.levels:
            ref = pipeline.REFERENCE_RANK_COUNTS_DIM6.get(lv.rank)
            if ref is not None and ref != lv.type_count:
                print(f"MISMATCH at rank {lv.rank}: {lv.type_count} vs {ref}")
                ok = False
    return 0 if ok else 1


def cmd_verify_basic(args) -> int:
    checks = pipeline.verify_basic()
    ok = True
    for chk in checks:
        vec = "(" + ", ".join(format_rational(x) for x in chk.vector) + ")"
        if not chk.feasible:
            print(f"k={chk.k} {vec}: INFEASIBLE")
            ok = False
            continue
        terms = " + ".join(
            f"{format_rational(lam)}*H({','.join(format_rational(c) for c in g)})"
            for lam, g in chk.support[:2])
        more = "" if len(chk.support) <= 2 else f" + {len(chk.support) - 2} more terms"
        pivot = "pivot ok" if chk.pivot_ok else "PIVOT MISSING"
        print(f"k={chk.k} {vec}: H = {terms}{more}   [{pivot}]")
        ok = ok and chk.pivot_ok
    print(f"{sum(1 for c in checks if c.feasible)}/{len(checks)} decompositions found")
    return 0 if ok else 1


def cmd_report(args) -> int:
    summary = pipeline.load_summary(args.checkpoint_dir)
    sys.stdout.write(pipeline.format_report(summary))
    return 0


def cmd_annulator(args) -> int:
    with open(args.dist) as fh:
        dv = parse_distvec_text(fh.read())
    print(f"n = {dv.n}")
    if dv.n <= 6 and not is_hypermetric(dv):
        print("distance vector is outside the cone")
        return 1
    if not delaunay.is_nondegenerate(dv, check_membership=False):
        print("degenerate distance vector (annulator infinite)")
        return 1
    real = delaunay.realize(dv)
    sys.stdout.write(real.export_text())
    print(f"annulator size: {len(real.ann)}")
    for b in real.ann:
        print("  " + " ".join(str(x) for x in b.coords))
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="hypercone",
                                description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("facets", help="facet catalog and geometric classes")
    f.add_argument("-n", type=int, default=6, choices=range(2, 7))
    f.add_argument("--inventory", action="store_true",
                   help="build the ray inventory and verify each representative")
    f.add_argument("--out", help="write the catalog to a text file")
    f.add_argument("--selftest-corrupt", action="store_true",
                   help=argparse.SUPPRESS)
    f.set_defaults(func=cmd_facets)

    r = sub.add_parser("rays", help="extreme-ray inventory (n = 6)")
    r.add_argument("--out", help="write JSON-lines inventory")
    r.set_defaults(func=cmd_rays)

    c = sub.add_parser("classify", help="face classification pipeline")
    c.add_argument("-n", type=int, default=6, choices=range(2, 7))
    c.add_argument("--max-corank", type=int, default=None)
    c.add_argument("--checkpoint", default=None)
    c.add_argument("--threads", type=int, default=1,
                   help="accepted for interface compatibility; execution is "
                        "serial and deterministic")
    c.add_argument("--verify-level", choices=("fast", "full"), default="full")
    c.add_argument("--budget", type=float, default=None,
                   help="wall-clock budget in seconds; stops after a level")
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify-basic",
                       help="exact decompositions showing every type has an affine basis")
    v.set_defaults(func=cmd_verify_basic)

    rep = sub.add_parser("report", help="rank table of a classification run")
    rep.add_argument("checkpoint_dir")
    rep.set_defaults(func=cmd_report)

    a = sub.add_parser("annulator", help="reconstruct a polytope from distances")
    a.add_argument("--dist", required=True)
    a.set_defaults(func=cmd_annulator)

    args = p.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
