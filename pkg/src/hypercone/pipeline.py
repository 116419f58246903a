"""Level-by-level face classification with checkpoints.

Starting from the full cone (the simplex type), each level expands the type
representatives of the previous corank into their candidate subfaces, filters
to faces exactly one rank lower, tests non-degeneracy on exact interior
points, and groups the survivors by geometric-equivalence certificate.
Degenerate faces are recorded but never expanded; an audit asserts that no
non-degenerate face ever shows up below a recorded degenerate one, which is
what justifies the pruning.

Checkpoints are JSON-lines per level (gzip above a size threshold) plus a
manifest keyed by the ray-inventory hash, so stale checkpoints are rejected
and a resumed run reproduces a fresh one byte for byte.
"""

from __future__ import annotations

import base64
import gzip
import hashlib
import json
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cone import num_pairs
from .equiv import Certificate
from .exact import lp_feasible
from .faces import Face, FaceLattice

GZIP_THRESHOLD_BYTES = 1 << 20

# Known classification of dimension six by rank (count of combinatorial
# types).  The rows sum to 6421 while the commonly stated grand total is
# 6241, so cmd_report surfaces both numbers.
REFERENCE_RANK_COUNTS_DIM6 = {
    21: 1, 20: 9, 19: 30, 18: 95, 17: 233, 16: 500, 15: 814, 14: 1092,
    13: 1145, 12: 984, 11: 686, 10: 417, 9: 218, 8: 108, 7: 52, 6: 21,
    5: 8, 4: 4, 3: 2, 2: 1, 1: 1,
}
REFERENCE_STATED_TOTAL_DIM6 = 6241
REFERENCE_MAXIMAL_DIM6 = 4


class ChecksumMismatch(RuntimeError):
    """Checkpoint does not belong to the current ray inventory."""


class HeredityViolation(AssertionError):
    """A non-degenerate face appeared below a pruned degenerate face."""


@dataclass
class RunConfig:
    n: int
    max_corank: Optional[int] = None
    checkpoint_dir: Optional[str] = None
    threads: int = 1
    verify_level: str = "full"          # "fast" skips the redundant audits
    budget_seconds: Optional[float] = None

    def __post_init__(self):
        if not 2 <= self.n <= 6:
            raise ValueError("dimension must be between 2 and 6")
        big_n = num_pairs(self.n)
        if self.max_corank is None:
            self.max_corank = big_n - 1
        if self.max_corank > big_n - 1:
            raise ValueError(f"max_corank above {big_n - 1}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.verify_level not in ("fast", "full"):
            raise ValueError("verify_level must be fast or full")


@dataclass
class TypeRecord:
    corank: int
    rank: int
    certificate: Certificate
    ann: tuple[tuple[int, ...], ...]
    vertex_count: int
    facet_bits: int
    ray_bits: int
    extreme: bool
    maximal: Optional[bool]     # None until the next level has been expanded

    @property
    def ann_size(self) -> int:
        return len(self.ann)


@dataclass
class LevelResult:
    corank: int
    rank: int
    types: list[TypeRecord]
    degenerate_masks: list[int]
    candidates_seen: int

    @property
    def type_count(self) -> int:
        return len(self.types)


@dataclass
class RunSummary:
    n: int
    levels: list[LevelResult]
    heredity_violations: int
    completed: bool             # reached rank 1 (or max_corank)

    def counts_by_rank(self) -> dict[int, int]:
        return {lv.rank: lv.type_count for lv in self.levels}

    def maximal_types(self) -> list[TypeRecord]:
        out = []
        for lv in self.levels:
            for t in lv.types:
                if t.maximal:
                    out.append(t)
        return out


def _cert_b64(cert: Certificate) -> str:
    return base64.b64encode(cert.blob).decode()


def _record_to_json(t: TypeRecord) -> dict:
    return {
        "corank": t.corank,
        "rank": t.rank,
        "cert_scheme": t.certificate.scheme,
        "cert_b64": _cert_b64(t.certificate),
        "ann": [list(b) for b in t.ann],
        "vertex_count": t.vertex_count,
        "facet_bits_hex": format(t.facet_bits, "x"),
        "ray_bits_hex": format(t.ray_bits, "x"),
        "extreme": t.extreme,
        "maximal": t.maximal,
        "degenerate": False,
    }


def _record_from_json(rec: dict) -> TypeRecord:
    cert = Certificate(rec["cert_scheme"], base64.b64decode(rec["cert_b64"]))
    return TypeRecord(
        rec["corank"], rec["rank"], cert,
        tuple(tuple(b) for b in rec["ann"]),
        rec["vertex_count"], int(rec["facet_bits_hex"], 16),
        int(rec["ray_bits_hex"], 16), rec["extreme"], rec["maximal"])


class Classification:
    """Driver owning the lattice, the level loop, and checkpoint IO."""

    def __init__(self, lattice: FaceLattice, config: RunConfig):
        if lattice.n != config.n:
            raise ValueError("lattice/config dimension mismatch")
        self.lat = lattice
        self.config = config
        self.inventory_hash = lattice.inventory.content_hash()
        self.levels: list[LevelResult] = []
        self.degenerate_seen: list[int] = []
        self.heredity_violations = 0

    # -- checkpoint layout --------------------------------------------------

    def _level_path(self, corank: int) -> Optional[str]:
        d = self.config.checkpoint_dir
        if d is None:
            return None
        return os.path.join(d, f"level_{corank:02d}.jsonl")

    def _manifest_path(self) -> Optional[str]:
        d = self.config.checkpoint_dir
        if d is None:
            return None
        return os.path.join(d, "manifest.json")

    def _write_level(self, level: LevelResult) -> None:
        path = self._level_path(level.corank)
        if path is None:
            return
        lines = []
        for t in sorted(level.types,
                        key=lambda t: (t.certificate.key, t.ray_bits)):
            lines.append(json.dumps(_record_to_json(t), sort_keys=True))
        for mask in sorted(level.degenerate_masks):
            lines.append(json.dumps({
                "corank": level.corank, "degenerate": True,
                "ray_bits_hex": format(mask, "x")}, sort_keys=True))
        payload = ("\n".join(lines) + "\n").encode()
        if len(payload) > GZIP_THRESHOLD_BYTES:
            with gzip.open(path + ".gz", "wb") as fh:
                fh.write(payload)
            if os.path.exists(path):
                os.remove(path)
        else:
            with open(path, "wb") as fh:
                fh.write(payload)
            if os.path.exists(path + ".gz"):
                os.remove(path + ".gz")
        self._write_manifest()

    def _write_manifest(self) -> None:
        path = self._manifest_path()
        if path is None:
            return
        manifest = {
            "n": self.config.n,
            "inventory_hash": self.inventory_hash,
            "levels_completed": [lv.corank for lv in self.levels],
        }
        with open(path, "w") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=1)

    def _read_level(self, corank: int) -> Optional[LevelResult]:
        path = self._level_path(corank)
        if path is None:
            return None
        data = None
        if os.path.exists(path + ".gz"):
            with gzip.open(path + ".gz", "rb") as fh:
                data = fh.read()
        elif os.path.exists(path):
            with open(path, "rb") as fh:
                data = fh.read()
        if data is None:
            return None
        types = []
        degs = []
        for line in data.decode().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("degenerate"):
                degs.append(int(rec["ray_bits_hex"], 16))
            else:
                types.append(_record_from_json(rec))
        rank = num_pairs(self.config.n) - corank
        return LevelResult(corank, rank, types, degs, -1)

    def try_resume(self) -> int:
        """Load completed levels from the checkpoint dir; returns the next
        corank to compute (0 when starting fresh)."""
        path = self._manifest_path()
        if path is None or not os.path.exists(path):
            return 0
        with open(path) as fh:
            manifest = json.load(fh)
        if manifest.get("n") != self.config.n:
            raise ChecksumMismatch("checkpoint dimension differs")
        if manifest.get("inventory_hash") != self.inventory_hash:
            raise ChecksumMismatch("checkpoint belongs to another ray inventory")
        for corank in manifest.get("levels_completed", []):
            level = self._read_level(corank)
            if level is None:
                break
            self.levels.append(level)
            self.degenerate_seen.extend(level.degenerate_masks)
        return len(self.levels)

    # -- the level loop -----------------------------------------------------

    def _corank0(self) -> LevelResult:
        face = self.lat.full_cone()
        cert = self.lat.certificate(face, max_rays=1)
        rec = TypeRecord(0, face.rank, cert, face.ann, len(face.ann),
                         face.facet_bits, face.ray_bits,
                         extreme=(face.rank == 1), maximal=None)
        return LevelResult(0, face.rank, [rec], [], 1)

    def _expand_level(self, corank: int) -> LevelResult:
        parents = self.levels[corank - 1].types
        parent_rank = num_pairs(self.config.n) - (corank - 1)
        target_rank = parent_rank - 1
        lat = self.lat
        full_audit = self.config.verify_level == "full"
        mask_bytes = (lat.R + 7) // 8

        # Candidates are deduplicated by digest so the big levels of a full
        # run do not hold millions of multi-kilobyte masks; verdicts are
        # remembered for the maximal-flag bookkeeping of the parents.
        verdicts: dict[bytes, int] = {}   # digest -> 1 nondeg, 0 deg/dropped
        types: dict[tuple, TypeRecord] = {}
        degenerate_masks: list[int] = []
        parent_has_nondeg = [False] * len(parents)

        def handle(mask: int) -> int:
            if lat.ray_span_rank(mask, cap=target_rank) != target_rank:
                return 0
            face = lat.face_from_rays(mask, rank=target_rank)
            if face.degenerate:
                degenerate_masks.append(mask)
                return 0
            if full_audit:
                for deg in self.degenerate_seen:
                    if mask & deg == mask:
                        self.heredity_violations += 1
                        raise HeredityViolation(
                            f"face {mask:x} below degenerate {deg:x}")
            ann = lat.face_annulator(face)
            if face.ray_bits & lat.schlafli_mask:
                if len(ann) != (self.config.n + 1) + corank:
                    raise AssertionError(
                        f"annulator size {len(ann)} at corank {corank}")
            cert = lat.certificate(face)
            known = types.get(cert.key)
            if known is None or face.ray_bits < known.ray_bits:
                types[cert.key] = TypeRecord(
                    corank, target_rank, cert, ann, len(ann),
                    face.facet_bits, face.ray_bits,
                    extreme=(target_rank == 1), maximal=None)
            return 1

        for pi, parent in enumerate(parents):
            pface = Face(parent.ray_bits, parent.facet_bits, parent.rank,
                         lat.interior_sum(parent.ray_bits), False,
                         ann=parent.ann)
            if corank == 1:
                # The full cone is invariant under all coordinate
                # permutations, so one facet per orbit covers every class.
                masks = [pface.ray_bits & lat.facet_raymask[h]
                         for h in lat.facet_orbit_starts]
            else:
                masks = lat.subface_masks(pface)
            for mask in masks:
                digest = hashlib.blake2b(
                    mask.to_bytes(mask_bytes, "little"),
                    digest_size=16).digest()
                verdict = verdicts.get(digest)
                if verdict is None:
                    verdict = handle(mask)
                    verdicts[digest] = verdict
                if verdict:
                    parent_has_nondeg[pi] = True

        for pi, parent in enumerate(parents):
            parent.maximal = not parent_has_nondeg[pi]
            if parent.extreme:
                parent.maximal = True

        self.degenerate_seen.extend(degenerate_masks)
        ordered = sorted(types.values(),
                         key=lambda t: (t.certificate.key, t.ray_bits))
        return LevelResult(corank, target_rank, ordered,
                           sorted(degenerate_masks), len(verdicts))

    def run(self, progress=None) -> RunSummary:
        start = time.time()
        if self.config.checkpoint_dir:
            os.makedirs(self.config.checkpoint_dir, exist_ok=True)
        next_corank = len(self.levels)
        budget_hit = False
        while next_corank <= self.config.max_corank:
            if self.levels and self.levels[-1].rank <= 1:
                break  # extreme level reached, nothing below
            if (self.config.budget_seconds is not None and next_corank > 0
                    and time.time() - start > self.config.budget_seconds):
                budget_hit = True
                break
            if next_corank == 0:
                level = self._corank0()
            else:
                level = self._expand_level(next_corank)
            self.levels.append(level)
            # Re-write the previous level so its maximal flags are final.
            if next_corank > 0:
                self._write_level(self.levels[next_corank - 1])
            self._write_level(level)
            if progress:
                progress(level)
            next_corank += 1
        if self.levels and self.levels[-1].rank == 1:
            for t in self.levels[-1].types:
                t.maximal = True
            self._write_level(self.levels[-1])
        completed = not budget_hit
        return RunSummary(self.config.n, self.levels,
                          self.heredity_violations, completed)


def classify(lattice: FaceLattice, config: RunConfig,
             progress=None, resume: bool = True) -> RunSummary:
    run = Classification(lattice, config)
    if resume and config.checkpoint_dir:
        run.try_resume()
    return run.run(progress=progress)


# ---------------------------------------------------------------------------
# report

def load_summary(checkpoint_dir: str, n: Optional[int] = None) -> RunSummary:
    manifest_path = os.path.join(checkpoint_dir, "manifest.json")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if n is not None and manifest["n"] != n:
        raise ChecksumMismatch("dimension mismatch in checkpoint")
    n = manifest["n"]
    reader = Classification.__new__(Classification)
    reader.config = RunConfig(n=n, checkpoint_dir=checkpoint_dir)
    levels = []
    for corank in manifest["levels_completed"]:
        level = reader._read_level(corank)
        if level is None:
            break
        levels.append(level)
    done = bool(levels) and levels[-1].rank == 1
    return RunSummary(n, levels, 0, done)


def format_report(summary: RunSummary) -> str:
    lines = []
    big_n = num_pairs(summary.n)
    lines.append(f"rank distribution (n={summary.n}, N={big_n}):")
    reference = REFERENCE_RANK_COUNTS_DIM6 if summary.n == 6 else None
    total = 0
    for lv in summary.levels:
        total += lv.type_count
        if reference is not None:
            ref = reference.get(lv.rank)
            mark = "match" if ref == lv.type_count else "MISMATCH"
            lines.append(f"  rank {lv.rank:2d}: {lv.type_count:5d} vs {ref:5d}  {mark}")
        else:
            lines.append(f"  rank {lv.rank:2d}: {lv.type_count:5d}")
    lines.append(f"total types over completed levels: {total}")
    if summary.n == 6:
        ref_rows = sum(REFERENCE_RANK_COUNTS_DIM6.values())
        lines.append(f"reference rows sum to {ref_rows}; "
                     f"stated grand total {REFERENCE_STATED_TOTAL_DIM6}")
    maximal = summary.maximal_types()
    flagged = [t for t in maximal if t.maximal]
    if summary.completed:
        lines.append(f"maximal types: {len(flagged)}")
    else:
        lines.append(f"maximal types so far (run incomplete): {len(flagged)}")
    for t in flagged:
        lines.append(f"  corank {t.corank} rank {t.rank} vertices {t.vertex_count}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# basicness decomposition tables

# Generator families behind the relative-volume argument: every annulator
# vector of a volume-k simplex (k = 2, 3) decomposes nonnegatively over
# coordinate permutations of these.  The middle k=3 row is printed in the
# source table with coordinate sum 1/3; the intended vector is the one
# parallel to the k=2 row (-1,-1,-1,1,1,1,2)/2, with last entry k.
BASIC_TABLE_K2 = [
    (Fraction(1, 2), (-1, -1, 1, 1, 1, 1, 0)),
    (Fraction(1, 2), (-1, -1, -1, 1, 1, 1, 2)),
    (Fraction(1, 2), (-2, -1, -1, 1, 1, 1, 3)),
    (Fraction(1, 2), (-2, -1, 1, 1, 1, 1, 1)),
    (Fraction(1, 2), (-1, -1, -1, -1, 1, 2, 3)),
    (Fraction(1, 2), (-3, -1, 1, 1, 1, 1, 2)),
    (Fraction(1), (-1, 1, 1, 0, 0, 0, 0)),
]
BASIC_TABLE_K3 = [
    (Fraction(1, 3), (-1, -1, -1, 1, 1, 2, 2)),
    (Fraction(1, 3), (-1, -1, -1, 1, 1, 1, 3)),
    (Fraction(1, 3), (-2, -1, 1, 1, 1, 1, 2)),
]


def _frac_vector(scale: Fraction, core: tuple[int, ...]) -> tuple[Fraction, ...]:
    return tuple(scale * c for c in core)


def _h_form_frac(b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    n = len(b) - 1
    from .cone import pair_list
    return tuple(b[i] * b[j] for i, j in pair_list(n))


@dataclass
class BasicCheck:
    vector: tuple[Fraction, ...]
    k: int
    pivot_ok: bool              # some coordinate has absolute value 1/k
    support: Optional[tuple[tuple[Fraction, tuple[Fraction, ...]], ...]]

    @property
    def feasible(self) -> bool:
        return self.support is not None


def verify_basic() -> list[BasicCheck]:
    """Exact nonnegative decompositions for all table vectors.

    For each vector b, H(b) is decomposed over the forms of all coordinate
    permutations of all table vectors with lambda >= 0 and nonzero support
    (the target's own orbit makes the system feasible; the LP certifies it
    exactly and reports the support found).  Each fractional vector is also
    checked for the pivot property: one coordinate of absolute value 1/k.
    """
    import itertools

    table = [(2, _frac_vector(s, c)) for s, c in BASIC_TABLE_K2]
    table += [(3, _frac_vector(s, c)) for s, c in BASIC_TABLE_K3]

    for _, vec in table:
        if sum(vec) != 1:
            raise AssertionError(f"table vector {vec} has coordinate sum {sum(vec)}")

    results = []
    for k, vec in table:
        generators = []
        gen_vectors = []
        for _, other in table:
            for perm in sorted(set(itertools.permutations(other))):
                gen_vectors.append(perm)
                generators.append(_h_form_frac(perm))
        # Put the target's identity permutation first so the solver lands on
        # a decomposition immediately; any feasible support is acceptable.
        order = sorted(range(len(gen_vectors)),
                       key=lambda i: (gen_vectors[i] != vec,))
        gen_vectors = [gen_vectors[i] for i in order]
        generators = [generators[i] for i in order]
        target = _h_form_frac(vec)
        res = lp_feasible(generators, target, strict=True)
        if not res:
            results.append(BasicCheck(vec, k, False, None))
            continue
        support = tuple((res.coeffs[i], gen_vectors[i]) for i in res.support)
        fractional = any(x.denominator != 1 for x in vec)
        pivot_ok = (not fractional
                    or any(abs(x) == Fraction(1, k) for x in vec))
        results.append(BasicCheck(vec, k, pivot_ok, support))
    return results
