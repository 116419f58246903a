"""Faces of the cone as facet/ray incidence objects.

A face is carried redundantly: a bitset over the facet catalog (inequalities
vanishing on the face), a bitset over the extreme-ray inventory (rays lying
on the face), the face dimension, and, once computed, the annulator and a
geometric-equivalence certificate.  Bitsets are plain Python integers; the
bulk facet-times-ray incidence is built once with numpy (all values are tiny
integers, so the float matrix product is exact) and every decision after
that is exact integer or rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import delaunay, exact, equiv
from .cone import (DistVec, distvec, facet_catalog, h_form, num_pairs,
                   pair_list)
from .equiv import Certificate
from .exact import IntEchelon, RatMatrix, bareiss_det_int
from .schlafli import (RayInventory, SchlafliModel, cut_inventory,
                       ray_annulator)


class FaceConsistencyError(AssertionError):
    """The two independent rank computations disagreed, or an incidence
    closure failed an internal cross-check."""


@dataclass
class Face:
    """One face: mutual facet/ray closure plus derived data."""

    ray_bits: int
    facet_bits: int
    rank: int
    interior: tuple[int, ...]
    degenerate: bool
    ann: Optional[tuple[tuple[int, ...], ...]] = None
    cert: Optional[Certificate] = None

    @property
    def ray_count(self) -> int:
        return self.ray_bits.bit_count()

    @property
    def facet_count(self) -> int:
        return self.facet_bits.bit_count()


def _mask_from_indices(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


class FaceLattice:
    """Incidence engine for the cone on n+1 points (n <= 6)."""

    def __init__(self, n: int, inventory: RayInventory,
                 model: Optional[SchlafliModel] = None):
        if inventory.n != n:
            raise ValueError("inventory dimension mismatch")
        self.n = n
        self.N = num_pairs(n)
        self.inventory = inventory
        self.model = model
        catalog = facet_catalog(n)
        self.catalog = catalog
        self.facet_vectors: list[tuple[int, ...]] = [
            b.coords for orbit in catalog.orbits for b in orbit]
        self.facet_orbit_of: list[int] = [
            oi for oi, orbit in enumerate(catalog.orbits) for _ in orbit]
        self.facet_orbit_starts: list[int] = []
        pos = 0
        for orbit in catalog.orbits:
            self.facet_orbit_starts.append(pos)
            pos += len(orbit)
        self.F = len(self.facet_vectors)
        self.R = len(inventory.vectors)

        self.H = np.array([h_form(b) for b in self.facet_vectors], dtype=np.int64)
        self.rays = np.array(inventory.vectors, dtype=np.int64)

        incid = np.zeros((self.F, self.R), dtype=bool)
        chunk = max(1, 4_000_000 // max(self.F, 1))
        hf = self.H.astype(np.float64)
        for lo in range(0, self.R, chunk):
            block = self.rays[lo:lo + chunk].astype(np.float64)
            vals = hf @ block.T
            if vals.max(initial=0.0) > 0.0:
                raise FaceConsistencyError(
                    "an inventory ray violates a cataloged inequality")
            incid[:, lo:lo + chunk] = vals == 0.0
        self._ray_bytes = (self.R + 7) // 8
        self._facet_bytes = (self.F + 7) // 8
        packed_fr = np.packbits(incid, axis=1, bitorder="little")
        self.facet_raymask: list[int] = [
            int.from_bytes(packed_fr[f].tobytes(), "little") for f in range(self.F)]
        packed_rf = np.packbits(incid.T.copy(), axis=1, bitorder="little")
        self.ray_facetmask: list[int] = [
            int.from_bytes(packed_rf[r].tobytes(), "little") for r in range(self.R)]
        del incid

        self.all_rays_mask = (1 << self.R) - 1
        self.schlafli_mask = _mask_from_indices(
            i for i, k in enumerate(inventory.kinds) if k == "schlafli")
        self._ann_cache: dict[int, tuple[tuple[int, ...], ...]] = {}

    # -- mask helpers ------------------------------------------------------

    def ray_indices(self, mask: int) -> np.ndarray:
        raw = mask.to_bytes(self._ray_bytes, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8),
                             bitorder="little")[: self.R]
        return np.nonzero(bits)[0]

    def facet_indices(self, mask: int) -> np.ndarray:
        raw = mask.to_bytes(self._facet_bytes, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8),
                             bitorder="little")[: self.F]
        return np.nonzero(bits)[0]

    # -- basic geometry ----------------------------------------------------

    def interior_sum(self, ray_mask: int) -> tuple[int, ...]:
        """Sum of the extreme rays: an exact relative-interior point."""
        if ray_mask == 0:
            raise ValueError("empty ray set")
        idx = self.ray_indices(ray_mask)
        return tuple(int(x) for x in self.rays[idx].sum(axis=0))

    def tight_facets(self, point: Sequence[int]) -> int:
        vals = self.H @ np.array(point, dtype=np.int64)
        mask = 0
        for f in np.nonzero(vals == 0)[0]:
            mask |= 1 << int(f)
        if np.any(vals > 0):
            raise FaceConsistencyError("point violates a facet inequality")
        return mask

    def doubled_gram_det(self, point: Sequence[int]) -> int:
        n = self.n
        pidx = {p: k for k, p in enumerate(pair_list(n))}

        def d(i, j):
            if i == j:
                return 0
            return point[pidx[(min(i, j), max(i, j))]]

        rows = [[d(0, i) + d(0, j) - d(i, j) for j in range(1, n + 1)]
                for i in range(1, n + 1)]
        return bareiss_det_int(rows)

    def ray_span_rank(self, ray_mask: int, cap: Optional[int] = None) -> int:
        ech = IntEchelon(self.N)
        for r in self.ray_indices(ray_mask):
            ech.add([int(x) for x in self.rays[r]])
            if cap is not None and ech.rank >= cap:
                break
        return ech.rank

    def facet_span_rank(self, facet_mask: int, cap: Optional[int] = None) -> int:
        ech = IntEchelon(self.N)
        for f in self.facet_indices(facet_mask):
            ech.add(self.H[f].tolist())
            if cap is not None and ech.rank >= cap:
                break
        return ech.rank

    # -- faces -------------------------------------------------------------

    def closure(self, rays: Iterable[int] | int) -> Face:
        """Smallest face containing the rays: intersect facet incidences,
        then re-collect the rays on all of those facets."""
        ray_mask = rays if isinstance(rays, int) else _mask_from_indices(rays)
        if ray_mask == 0:
            raise ValueError("closure of an empty ray set")
        facet_bits = None
        for r in self.ray_indices(ray_mask):
            fm = self.ray_facetmask[r]
            facet_bits = fm if facet_bits is None else facet_bits & fm
        if facet_bits == 0:
            closed_rays = self.all_rays_mask
        else:
            closed_rays = None
            for f in self.facet_indices(facet_bits):
                rm = self.facet_raymask[f]
                closed_rays = rm if closed_rays is None else closed_rays & rm
        return self.face_from_rays(closed_rays, facet_bits=facet_bits)

    def face_from_rays(self, ray_mask: int,
                       facet_bits: Optional[int] = None,
                       rank: Optional[int] = None) -> Face:
        """Build the face record for an exact ray set of a face.

        The two independent dimension computations (ray span and facet-span
        complement) must agree; with a known expected rank both run with an
        early-exit cap, which pins the dimension from both sides.
        """
        interior = self.interior_sum(ray_mask)
        if facet_bits is None:
            facet_bits = self.tight_facets(interior)
        if rank is None:
            dim = self.N - self.facet_span_rank(facet_bits)
            span = self.ray_span_rank(ray_mask, cap=dim)
            if span != dim:
                raise FaceConsistencyError(
                    f"ray span {span} but facet complement says {dim}")
        else:
            dim = rank
            span = self.ray_span_rank(ray_mask, cap=dim)
            fspan = self.facet_span_rank(facet_bits, cap=self.N - dim)
            if span != dim or (dim < self.N and fspan != self.N - dim):
                raise FaceConsistencyError(
                    f"rank checks failed: ray span {span}, facet span {fspan}, "
                    f"expected rank {dim}")
        degenerate = self.doubled_gram_det(interior) == 0
        return Face(ray_mask, facet_bits, dim, interior, degenerate)

    def full_cone(self) -> Face:
        face = self.face_from_rays(self.all_rays_mask, rank=self.N)
        if face.facet_bits != 0 or face.degenerate:
            raise FaceConsistencyError("full cone failed its own checks")
        face.ann = tuple(tuple(1 if k == i else 0 for k in range(self.n + 1))
                         for i in range(self.n + 1))
        return face

    def subface_masks(self, face: Face) -> dict[int, int]:
        """Candidate ray sets face & facet, keyed by mask -> generating facet.

        Every face one rank lower arises among these; candidates that drop
        more than one rank are discarded by the caller and re-found at their
        own level.
        """
        out: dict[int, int] = {}
        for h in range(self.F):
            if (face.facet_bits >> h) & 1:
                continue
            cand = face.ray_bits & self.facet_raymask[h]
            if cand == 0 or cand == face.ray_bits:
                continue
            if cand not in out:
                out[cand] = h
        return out

    def subfaces(self, face: Face) -> list[Face]:
        """All faces of rank exactly face.rank - 1 contained in the face."""
        if face.rank < 2:
            raise ValueError("subfaces need rank >= 2")
        kept = []
        for mask in self.subface_masks(face):
            if self.ray_span_rank(mask, cap=face.rank - 1) == face.rank - 1:
                kept.append(self.face_from_rays(mask, rank=face.rank - 1))
        return kept

    def interior_point(self, face: Face) -> DistVec:
        return distvec(self.n, [Fraction(x) for x in face.interior])

    def face_rank(self, face: Face) -> int:
        """Face dimension from the annulator, cross-checked against the ray
        span; disagreement is a fatal self-check failure."""
        ann = self.face_annulator(face)
        from_ann = self.N - exact.rank_int_rows(
            [h_form(b) for b in ann], self.N)
        from_rays = self.ray_span_rank(face.ray_bits)
        if from_ann != from_rays:
            raise FaceConsistencyError(
                f"annulator says {from_ann}, ray span says {from_rays}")
        return from_ann

    # -- annulators ---------------------------------------------------------

    def _ray_ann(self, ray_id: int) -> tuple[tuple[int, ...], ...]:
        cached = self._ann_cache.get(ray_id)
        if cached is None:
            cached = ray_annulator(self.inventory, ray_id)
            self._ann_cache[ray_id] = cached
        return cached

    def face_annulator(self, face: Face) -> tuple[tuple[int, ...], ...]:
        """Annulator of a non-degenerate face.

        With a non-cut ray inside, filter that ray's 27 vertex addresses by
        vanishing on the interior point; otherwise run the sphere
        enumeration on the interior point.
        """
        if face.degenerate:
            raise delaunay.DegenerateDistance("degenerate face has no finite annulator")
        if face.ann is not None:
            return face.ann
        plist = pair_list(self.n)
        interior = face.interior
        sch = face.ray_bits & self.schlafli_mask
        if sch:
            rid = (sch & -sch).bit_length() - 1
            cand = self._ray_ann(rid)
            ann = []
            for b in cand:
                tot = 0
                for k, (i, j) in enumerate(plist):
                    c = b[i] * b[j]
                    if c:
                        tot += c * interior[k]
                if tot == 0:
                    ann.append(b)
            face.ann = tuple(ann)
        else:
            dv = self.interior_point(face)
            face.ann = tuple(b.coords for b in delaunay.annulator(dv))
        rank_ann = self.N - exact.rank_int_rows(
            [h_form(b) for b in face.ann], self.N)
        if rank_ann != face.rank:
            raise FaceConsistencyError(
                f"annulator rank {rank_ann} != face rank {face.rank}")
        return face.ann

    def is_degenerate_cutface(self, cuts: Iterable[frozenset[int]]) -> bool:
        """Kernel test on {b(S_i) = 0, sum b = 0}: nonzero kernel means the
        cut-generated face is degenerate.  Fast pre-filter before sphere
        enumeration."""
        rows = [[Fraction(1) if i in s else Fraction(0)
                 for i in range(self.n + 1)] for s in cuts]
        rows.append([Fraction(1)] * (self.n + 1))
        return bool(exact.kernel(RatMatrix.from_rows(rows)))

    def cut_sets_of_face(self, face: Face) -> list[frozenset[int]]:
        out = []
        for r in self.ray_indices(face.ray_bits):
            members = self.inventory.cut_members.get(int(r))
            if members is not None:
                out.append(members)
        return out

    # -- certificates --------------------------------------------------------

    def schlafli_certificate(self, face: Face,
                             max_rays: Optional[int] = None) -> Certificate:
        """Minimum canonical form over the face's non-cut rays.

        Each such ray identifies the annulator with a vertex subset of the
        27-vertex skeleton; geometric equivalence is exactly matching subsets
        up to the skeleton's symmetry, so the minimum over rays is a sound and
        complete class key.  ``max_rays`` caps the scan for the full cone,
        whose level holds a single face.
        """
        if self.model is None:
            raise ValueError("no skeleton model attached")
        sch = face.ray_bits & self.schlafli_mask
        if sch == 0:
            raise ValueError("face has no non-cut ray")
        ann = set(self.face_annulator(face))
        subsets = set()
        count = 0
        m = sch
        while m:
            low = m & -m
            rid = low.bit_length() - 1
            m ^= low
            addresses = self._ray_ann(rid)
            s = frozenset(w for w in range(27) if addresses[w] in ann)
            if len(s) != len(ann):
                raise FaceConsistencyError("annulator not contained in ray annulator")
            subsets.add(s)
            count += 1
            if max_rays is not None and count >= max_rays:
                break
        return equiv.vertex_subset_certificate(self.model.graph, subsets)

    def cut_certificate(self, face: Face) -> Certificate:
        """Bipartition-system certificate for a face generated by cuts."""
        if face.ray_bits & self.schlafli_mask:
            raise ValueError("face contains a non-cut ray; wrong scheme")
        if face.degenerate:
            raise delaunay.DegenerateDistance("degenerate face has no certificate")
        ann = list(self.face_annulator(face))
        pairs = []
        for s in self.cut_sets_of_face(face):
            one = set()
            zero = set()
            for k, b in enumerate(ann):
                w = sum(b[i] for i in s)
                if w == 1:
                    one.add(k)
                elif w == 0:
                    zero.add(k)
                else:
                    raise FaceConsistencyError("cut weight outside {0,1} on annulator")
            pairs.append((frozenset(one), frozenset(zero)))
        return equiv.bipartition_certificate(len(ann), pairs)

    def certificate(self, face: Face,
                    max_rays: Optional[int] = None) -> Certificate:
        if face.cert is None:
            if face.ray_bits & self.schlafli_mask:
                face.cert = self.schlafli_certificate(face, max_rays=max_rays)
            else:
                face.cert = self.cut_certificate(face)
        return face.cert

    # -- facet verification --------------------------------------------------

    def rays_on_form(self, b) -> int:
        vals = self.rays @ np.array(h_form(b), dtype=np.int64)
        if np.any(vals > 0):
            raise FaceConsistencyError("inequality violated by an extreme ray")
        mask = 0
        for r in np.nonzero(vals == 0)[0]:
            mask |= 1 << int(r)
        return mask

    def is_facet_by_rays(self, b) -> bool:
        """A valid inequality is facet-defining iff its tight rays span a
        hyperplane (dimension N - 1)."""
        mask = self.rays_on_form(b)
        if mask == 0:
            return False
        return self.ray_span_rank(mask, cap=self.N - 1) == self.N - 1


def build_lattice(n: int, inventory: Optional[RayInventory] = None,
                  model: Optional[SchlafliModel] = None) -> FaceLattice:
    """Convenience constructor; n <= 5 needs no model (cuts are complete)."""
    if inventory is None:
        if n == 6:
            raise ValueError("n = 6 needs the full ray inventory")
        inventory = cut_inventory(n)
    return FaceLattice(n, inventory, model)
