"""Shared fixtures: the 27-vertex model, ray inventory, and face lattices
are expensive to build, so they are session-scoped."""

from __future__ import annotations

import pytest

from hypercone import faces, pipeline, schlafli


@pytest.fixture(scope="session")
def model6():
    return schlafli.build_schlafli(verify=True)


@pytest.fixture(scope="session")
def basis_orbits6(model6):
    return schlafli.affine_bases(model6)


@pytest.fixture(scope="session")
def inventory6(model6, basis_orbits6):
    return schlafli.extreme_rays_hyp7(model6, basis_orbits6)


@pytest.fixture(scope="session")
def lattice6(model6, inventory6):
    return faces.FaceLattice(6, inventory6, model6)


@pytest.fixture(scope="session")
def lattice3():
    return faces.build_lattice(3)


@pytest.fixture(scope="session")
def checkpoint_dir6(tmp_path_factory):
    return str(tmp_path_factory.mktemp("ckpt6"))


@pytest.fixture(scope="session")
def summary6(lattice6, checkpoint_dir6):
    """Classification of dimension six down to corank 3, checkpointed."""
    cfg = pipeline.RunConfig(n=6, max_corank=3, checkpoint_dir=checkpoint_dir6)
    return pipeline.classify(lattice6, cfg)


def repartitioning_ann(b):
    """Annulator of a facet face: the basis vectors plus the label itself."""
    n = len(b) - 1
    out = [tuple(1 if k == i else 0 for k in range(n + 1)) for i in range(n + 1)]
    out.append(tuple(b))
    return out


def expand_nondegenerate(lat, parent_faces, target_rank):
    """All distinct non-degenerate subfaces of the parents at the target rank."""
    masks = {}
    for parent in parent_faces:
        for m in lat.subface_masks(parent):
            masks.setdefault(m, None)
    out = []
    for m in masks:
        if lat.ray_span_rank(m, cap=target_rank) == target_rank:
            f = lat.face_from_rays(m, rank=target_rank)
            if not f.degenerate:
                out.append(f)
    return out


def corank1_rep_faces(lat):
    full = lat.full_cone()
    return [lat.face_from_rays(full.ray_bits & lat.facet_raymask[h])
            for h in lat.facet_orbit_starts]
