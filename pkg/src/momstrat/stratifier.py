"""Construction of the canonical stratification induced by a valid cover.

The direction field assigns to each refined piece the intersection of the
direction spaces of all cover members through it.  Strata are the maximal
connected unions of pieces sharing one direction space and one affine
translate of it, glued across codimension-one pieces of the same group;
this merge-over-refinement construction produces the unique partition into
connected affine-open sets integrating the field.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidCover, NonIntegrable
from .cover import PiecewiseAffineCover, membership_signature, refined_cells, validate
from .linalg import AffineSubspace, Mat, Vec, direction_intersect
from .polyhedron import (
    ClosedFace,
    RelOpenCell,
    _canon_cut,
    _closure_intersection_vertices,
    _closures_separated,
    _meets_relopen,
    _split_pieces,
    cell_key,
)


@dataclass(frozen=True)
class DField:
    """Refined pieces annotated with their direction spaces."""

    entries: tuple[tuple[RelOpenCell, Mat], ...]


@dataclass(frozen=True)
class Stratum:
    id: int
    direction: Mat
    carrier: AffineSubspace
    cells: tuple[RelOpenCell, ...]
    dim: int
    adjacency: tuple[tuple[int, int], ...]  # (lower cell idx, top cell idx) witnesses
    integer_direction: Mat | None = None

    def sample_point(self) -> Vec:
        return self.cells[0].sample_point()

    def contains(self, x: Vec) -> bool:
        return any(cell.contains(x) for cell in self.cells)

    def closure_contains(self, x: Vec) -> bool:
        return any(cell.closure_contains(x) for cell in self.cells)


@dataclass(frozen=True)
class Stratification:
    strata: tuple[Stratum, ...]
    frontier: tuple[tuple[int, int], ...]  # (lower id, upper id)
    ambient_dim: int


def compute_d_field(c: PiecewiseAffineCover) -> DField:
    """Refine the support and intersect member directions along signatures."""
    if not validate(c).valid:
        raise InvalidCover("cover fails the closure condition")
    entries = []
    for piece in refined_cells(c):
        sig = membership_signature(c, piece.sample_point())
        direction = direction_intersect([c.members[i].carrier for i in sig])
        entries.append((piece, direction))
    entries.sort(key=lambda e: cell_key(e[0]))
    return DField(tuple(entries))


def _translate_through(piece: RelOpenCell, direction: Mat) -> AffineSubspace:
    return AffineSubspace.from_point_and_directions(piece.carrier.base, direction)


def stratify(c: PiecewiseAffineCover) -> Stratification:
    """The unique stratification of the support induced by the cover."""
    dfield = compute_d_field(c)
    groups: dict[AffineSubspace, list[tuple[RelOpenCell, Mat]]] = {}
    for piece, direction in dfield.entries:
        translate = _translate_through(piece, direction)
        if not all(translate.contains(v) for v in piece.closure_vertices):
            raise NonIntegrable(
                "refined piece leaves the translate of its direction space"
            )
        groups.setdefault(translate, []).append((piece, direction))

    strata_raw = []
    for translate in sorted(groups, key=lambda t: (t.dim, t.base, t.directions)):
        entries = sorted(groups[translate], key=lambda e: cell_key(e[0]))
        cells = [e[0] for e in entries]
        r = translate.dim
        tops = [i for i, cell in enumerate(cells) if cell.dim == r]
        lowers = [i for i, cell in enumerate(cells) if cell.dim < r]
        parent = list(range(len(cells)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i, j):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

        attach_edges = []
        for li in lowers:
            low = cells[li]
            containing = [
                ti
                for ti in tops
                if all(cells[ti].closure_contains(v) for v in low.closure_vertices)
            ]
            if not containing:
                raise NonIntegrable(
                    "group piece of positive codimension not glued to any top piece"
                )
            for ti in containing:
                union(li, ti)
                attach_edges.append((li, ti))
        components: dict[int, list[int]] = {}
        for i in range(len(cells)):
            components.setdefault(find(i), []).append(i)
        for root in sorted(components):
            idxs = components[root]
            comp_cells = tuple(cells[i] for i in idxs)
            remap = {orig: new for new, orig in enumerate(idxs)}
            edges = tuple(
                sorted((remap[a], remap[b]) for a, b in attach_edges if a in remap and b in remap)
            )
            strata_raw.append((translate, comp_cells, edges))

    strata_raw.sort(key=lambda s: (s[0].dim, s[0].base, s[0].directions, tuple(cell_key(c0) for c0 in s[1])))
    strata = tuple(
        Stratum(i, translate.directions, translate, cells, translate.dim, edges)
        for i, (translate, cells, edges) in enumerate(strata_raw)
    )
    frontier = _frontier_pairs(strata)
    return Stratification(strata, frontier, c.ambient_dim)


def _cell_inside_closure(sigma: RelOpenCell, stratum: Stratum) -> bool:
    """sigma ⊆ Cl(stratum); complete for cells of one common refinement."""
    return any(
        all(t.closure_contains(v) for v in sigma.closure_vertices) for t in stratum.cells
    )


def _frontier_pairs(strata: Sequence[Stratum]) -> tuple[tuple[int, int], ...]:
    pairs = []
    for lo in strata:
        for up in strata:
            if lo.dim >= up.dim or lo.id == up.id:
                continue
            if all(_cell_inside_closure(sigma, up) for sigma in lo.cells):
                pairs.append((lo.id, up.id))
    return tuple(sorted(pairs))


# ---------------------------------------------------------------------------
# verification reports


@dataclass(frozen=True)
class FrontierViolation:
    lower_id: int
    upper_id: int
    reason: str
    witness: Vec | None = None


@dataclass(frozen=True)
class FrontierReport:
    violations: tuple[FrontierViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


from functools import lru_cache


@lru_cache(maxsize=None)
def _closed_face_of(cell: RelOpenCell) -> ClosedFace:
    face = ClosedFace(cell.closure_vertices, cell.carrier)
    # the cell already carries its canonical facet rows; seed the caches so
    # closure tests never re-enumerate hyperplanes
    face.__dict__["rows"] = tuple(cell.local_rows())
    face.__dict__["bbox"] = cell.bbox
    return face


def _bbox_disjoint(b1, b2) -> bool:
    (lo1, hi1), (lo2, hi2) = b1, b2
    return any(h1 < l2 or h2 < l1 for l1, h1, l2, h2 in zip(lo1, hi1, lo2, hi2))


def _cell_meets_closure(sigma: RelOpenCell, t: RelOpenCell) -> bool:
    """Exact test: does the relopen sigma meet the closed Cl(t)?"""
    if _bbox_disjoint(sigma.bbox, t.bbox):
        return False
    if t.closure_contains(sigma.sample_point()):
        return True
    obj = _closed_face_of(t)
    if _closures_separated(sigma, obj):
        return False
    q = _closure_intersection_vertices(sigma, obj)
    return _meets_relopen(sigma, obj, q)


def _stratum_bbox(st: Stratum):
    los, his = zip(*(c.bbox for c in st.cells))
    return tuple(map(min, zip(*los))), tuple(map(max, zip(*his)))


def _cell_subset_of_closure_union(sigma: RelOpenCell, stratum: Stratum) -> tuple[bool, Vec | None]:
    """Exact sigma ⊆ ∪ Cl(t): refine sigma by the cells' defining hyperplanes
    and point-test each sub-piece (membership is then sign-determined)."""
    relevant = [t for t in stratum.cells if not _bbox_disjoint(sigma.bbox, t.bbox)]
    cuts = set()
    for t in relevant:
        cuts.update(_canon_cut(f) for f in t.ambient_equations())
        cuts.update(_canon_cut(f) for f in t.ambient_facet_rows())
    pieces = [sigma]
    for cut in sorted(cuts):
        pieces = _split_pieces(pieces, cut)
    for piece in pieces:
        s = piece.sample_point()
        if not any(t.closure_contains(s) for t in relevant):
            return False, s
    return True, None


def verify_frontier(s: Stratification) -> FrontierReport:
    """Exhaustive exact check of the frontier condition on all stratum pairs."""
    violations = []
    boxes = {st.id: _stratum_bbox(st) for st in s.strata}
    for up in s.strata:
        for lo in s.strata:
            if lo.id == up.id:
                continue
            if _bbox_disjoint(boxes[lo.id], boxes[up.id]):
                continue
            meets = any(
                _cell_meets_closure(sigma, t) for sigma in lo.cells for t in up.cells
            )
            if not meets:
                continue
            if lo.dim >= up.dim:
                violations.append(
                    FrontierViolation(lo.id, up.id, "closure meets a stratum of equal or larger dimension")
                )
                continue
            # cells of one common refinement never straddle a closure, so a
            # per-cell containment scan settles almost every pair cheaply
            if all(_cell_inside_closure(sigma, up) for sigma in lo.cells):
                continue
            ok, witness = _cell_subset_wrapper(lo, up)
            if not ok:
                violations.append(
                    FrontierViolation(lo.id, up.id, "stratum not contained in the closure it meets", witness)
                )
    return FrontierReport(tuple(violations))


def _cell_subset_wrapper(lo: Stratum, up: Stratum) -> tuple[bool, Vec | None]:
    for sigma in lo.cells:
        ok, witness = _cell_subset_of_closure_union(sigma, up)
        if not ok:
            return False, witness
    return True, None


@dataclass(frozen=True)
class TangentMismatch:
    stratum_id: int
    point: Vec
    expected: Mat
    found: Mat


@dataclass(frozen=True)
class TangentReport:
    checked: int
    mismatches: tuple[TangentMismatch, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def verify_tangent_condition(
    s: Stratification, c: PiecewiseAffineCover, samples_per_stratum: int = 5
) -> TangentReport:
    """At rational samples of each stratum, the stratum direction must equal
    the intersection of the directions of all members through the sample."""
    checked = 0
    mismatches = []
    for stratum in s.strata:
        rng = random.Random(0xC0FFEE + stratum.id)
        points = [stratum.sample_point()]
        cell_cycle = list(stratum.cells)
        i = 0
        while len(points) < samples_per_stratum:
            cell = cell_cycle[i % len(cell_cycle)]
            points.extend(cell.interior_points(1, rng))
            i += 1
        for x in points[:samples_per_stratum]:
            sig = membership_signature(c, x)
            found = direction_intersect([c.members[j].carrier for j in sig])
            checked += 1
            if found != stratum.direction:
                mismatches.append(TangentMismatch(stratum.id, x, stratum.direction, found))
    return TangentReport(checked, tuple(mismatches))
