"""Exact classification of Delaunay polytope combinatorial types.

The library builds the facet catalog and extreme-ray inventory of the
hypermetric cone on up to seven points, reconstructs lattice Delaunay
polytopes from distance vectors with exact rational arithmetic, and
enumerates the cone's non-degenerate faces up to geometric equivalence.
"""

from .cone import (BVector, CutSet, DistVec, FacetCatalog, cut_vector,
                   distvec, facet_catalog, h_eval, h_form, is_hypermetric)
from .delaunay import (DelaunayRealization, GramMatrix, annulator,
                       circumsphere, enumerate_sphere, gram_from_distance,
                       is_nondegenerate, realize)
from .equiv import Certificate, ColoredGraph, canonical_form, oracle_equivalent
from .exact import LPResult, Rat, RatMatrix, det, kernel, lp_feasible, rank, solve
from .faces import Face, FaceLattice, build_lattice
from .pipeline import RunConfig, RunSummary, TypeRecord, classify, verify_basic
from .schlafli import (BasisOrbit, RayInventory, SchlafliModel, affine_bases,
                       build_schlafli, cut_inventory, extreme_rays_hyp7)

__version__ = "0.1.0"

__all__ = [
    "BVector", "CutSet", "DistVec", "FacetCatalog", "cut_vector", "distvec",
    "facet_catalog", "h_eval", "h_form", "is_hypermetric",
    "DelaunayRealization", "GramMatrix", "annulator", "circumsphere",
    "enumerate_sphere", "gram_from_distance", "is_nondegenerate", "realize",
    "Certificate", "ColoredGraph", "canonical_form", "oracle_equivalent",
    "LPResult", "Rat", "RatMatrix", "det", "kernel", "lp_feasible", "rank",
    "solve", "Face", "FaceLattice", "build_lattice", "RunConfig",
    "RunSummary", "TypeRecord", "classify", "verify_basic", "BasisOrbit",
    "RayInventory", "SchlafliModel", "affine_bases", "build_schlafli",
    "cut_inventory", "extreme_rays_hyp7",
]
