"""Exact rational convex polyhedra, face lattices and relatively open cells.

All geometry is desk scale (ambient dimension <= 8, handfuls of facets), so
the algorithms favour transparent exactness over asymptotics: vertices come
from exhaustive tight-set basis enumeration, facets of a point set from
exhaustive hyperplane enumeration, feasibility from Fourier-Motzkin.

A ``RelOpenCell`` is the relative interior of a bounded rational polytope:
a carrier affine subspace, the facet inequalities of its closure expressed in
carrier-local coordinates, and the excluded proper faces (the facets).  Cells
are constructed canonically from the vertex set of their closure, so equal
cells have bit-identical encodings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .errors import DimensionMismatch, EmptyPolytope, RankDeficient, UnboundedPolytope
from .linalg import (
    ONE,
    ZERO,
    AffineSubspace,
    Mat,
    Vec,
    add,
    dot,
    identity,
    mat,
    mat_vec,
    nullspace,
    primitive_functional,
    rank,
    rref,
    scale,
    sub,
    vec,
    zeros,
)

# An affine functional (a, beta) stands for the hyperplane {x : a.x = beta}
# or the inequality a.x <= beta depending on context.
Functional = tuple[Vec, Fraction]


def _canon_cut(f: Functional) -> Functional:
    """Canonical representative of the hyperplane {a.x = beta} (sign fixed)."""
    a, b = primitive_functional(*f)
    lead = next((x for x in a if x != 0), ZERO)
    if lead < 0:
        a, b = tuple(-x for x in a), -b
    return a, b


def _canon_row(f: Functional) -> Functional:
    """Canonical oriented inequality row a.x <= beta (positive scaling only)."""
    return primitive_functional(*f)


# ---------------------------------------------------------------------------
# H-polytopes


@dataclass(frozen=True)
class HPolytope:
    """The set {x : A.x <= b} with rational data."""

    A: Mat
    b: Vec

    @staticmethod
    def from_rows(rows: Iterable[Iterable], offsets: Iterable) -> "HPolytope":
        return HPolytope(mat(rows), vec(offsets))

    @property
    def ambient_dim(self) -> int:
        return len(self.A[0]) if self.A else 0

    def contains(self, x: Vec) -> bool:
        return all(dot(row, x) <= bi for row, bi in zip(self.A, self.b))


def _fm_feasible(rows: list[Functional], nvars: int) -> bool:
    """Fourier-Motzkin feasibility of a system of rows a.x <= beta."""
    rows = [_canon_row(r) for r in rows]
    for v in range(nvars):
        pos = [r for r in rows if r[0][v] > 0]
        neg = [r for r in rows if r[0][v] < 0]
        zero = [r for r in rows if r[0][v] == 0]
        new = list(zero)
        for (ap, bp) in pos:
            for (an, bn) in neg:
                coeff = tuple(x * (-an[v]) + y * ap[v] for x, y in zip(ap, an))
                new.append(_canon_row((coeff, bp * (-an[v]) + bn * ap[v])))
        rows = sorted(set(new))
    return all(b >= 0 for _, b in rows)


def is_bounded(p: HPolytope) -> bool:
    """Exact boundedness: the recession cone {A.x <= 0} is the origin alone."""
    n = p.ambient_dim
    cone = [(row, ZERO) for row in p.A]
    for i in range(n):
        for s in (ONE, -ONE):
            e = tuple(s if j == i else ZERO for j in range(n))
            rows = cone + [(e, -ONE), (tuple(-x for x in e), ONE)]
            if _fm_feasible(rows, n):
                return False
    return True


def is_empty(p: HPolytope) -> bool:
    return not _fm_feasible(list(zip(p.A, p.b)), p.ambient_dim)


def enumerate_vertices(rows: Sequence[Functional], dim: int) -> list[Vec]:
    """All vertices of {x : a.x <= beta} by exhaustive tight-basis enumeration."""
    if dim == 0:
        return [()] if all(b >= 0 for _, b in rows) else []
    found: set[Vec] = set()
    for subset in itertools.combinations(range(len(rows)), dim):
        a = mat(rows[i][0] for i in subset)
        red, pivots = rref(tuple(r + (rows[i][1],) for r, i in zip(a, subset)))
        if len(pivots) != dim or dim in pivots:
            continue
        x = [ZERO] * dim
        for r, pc in enumerate(pivots):
            x[pc] = red[r][dim]
        pt = tuple(x)
        if pt not in found and all(dot(ar, pt) <= br for ar, br in rows):
            found.add(pt)
    return sorted(found)


def vertices(p: HPolytope) -> list[Vec]:
    """Exact, deduplicated, lexicographically sorted vertex list."""
    if not is_bounded(p):
        raise UnboundedPolytope("polytope has a nonzero recession direction")
    vs = enumerate_vertices(list(zip(p.A, p.b)), p.ambient_dim)
    if not vs:
        raise EmptyPolytope("polytope has no points")
    return vs


def facets_from_points(points: Sequence[Vec], dim: int) -> list[Functional]:
    """Canonical facet rows of the full-dimensional conv(points) in R^dim."""
    if dim == 0:
        return []
    facets: set[Functional] = set()
    for subset in itertools.combinations(points, dim):
        p0 = subset[0]
        diffs = mat(sub(q, p0) for q in subset[1:])
        normals = nullspace(diffs, dim) if diffs else identity(dim)
        if len(normals) != 1:
            continue
        a = normals[0]
        beta = dot(a, p0)
        vals = [dot(a, q) - beta for q in points]
        if all(v <= 0 for v in vals):
            facets.add(_canon_row((a, beta)))
        elif all(v >= 0 for v in vals):
            facets.add(_canon_row((tuple(-x for x in a), -beta)))
    return sorted(facets)


def _lift_functional(carrier: AffineSubspace, a_loc: Vec, b_loc: Fraction) -> Functional:
    """Ambient functional agreeing with a_loc.t <= b_loc on the carrier.

    Uses the pivot-coordinate chart, so the lift is canonical given the
    carrier encoding (and exact on the carrier itself).
    """
    n = carrier.ambient_dim
    a_amb = [ZERO] * n
    shift = ZERO
    for coef, piv in zip(a_loc, carrier.pivots):
        a_amb[piv] = coef
        shift += coef * carrier.base[piv]
    return tuple(a_amb), b_loc + shift


@lru_cache(maxsize=200000)
def _restrict_cached(carrier: AffineSubspace, a: Vec, beta: Fraction) -> Functional:
    a_loc = tuple(dot(a, row) for row in carrier.directions)
    b_loc = beta - dot(a, carrier.base)
    return a_loc, b_loc


def _restrict_functional(carrier: AffineSubspace, a: Vec, beta: Fraction) -> Functional:
    """Carrier-local form of the ambient functional a.x <= beta."""
    return _restrict_cached(carrier, a, beta)


def hpolytope_from_points(points: Sequence[Vec]) -> HPolytope:
    """Ambient H-description of conv(points) (affine hull as paired rows)."""
    points = sorted(set(tuple(p) for p in points))
    hull = AffineSubspace.from_points(list(points))
    rows: list[Functional] = []
    for a, beta in hull.equations():
        rows.append(_canon_row((a, beta)))
        rows.append(_canon_row((tuple(-x for x in a), -beta)))
    local = [hull.to_local(p) for p in points]
    for a_loc, b_loc in facets_from_points(local, hull.dim):
        rows.append(_canon_row(_lift_functional(hull, a_loc, b_loc)))
    return HPolytope(mat(r[0] for r in rows), vec(r[1] for r in rows))


# ---------------------------------------------------------------------------
# faces and the face lattice


@dataclass(frozen=True)
class Face:
    """A face of a polytope: tight rows, affine hull, dimension, vertices."""

    active_set: tuple[int, ...]
    affine_hull: AffineSubspace | None
    dim: int
    vertex_ids: tuple[int, ...]
    vertex_coords: Mat


@dataclass(frozen=True)
class FaceLattice:
    faces: tuple[Face, ...]
    covers: tuple[tuple[int, int], ...]  # (lower index, upper index), dim gap one
    vertex_list: Mat

    def by_dim(self, d: int) -> list[Face]:
        return [f for f in self.faces if f.dim == d]

    def nonempty_faces(self) -> list[Face]:
        return [f for f in self.faces if f.dim >= 0]


@lru_cache(maxsize=None)
def face_lattice(p: HPolytope) -> FaceLattice:
    """Complete graded face lattice from the empty face to the polytope.

    Faces are generated by closing the facet vertex sets under intersection
    (vertex-facet incidence), which stays correct for redundant H-rows.
    """
    verts = vertices(p)
    all_ids = frozenset(range(len(verts)))
    tight_sets = []
    for row, beta in zip(p.A, p.b):
        s = frozenset(i for i, v in enumerate(verts) if dot(row, v) == beta)
        if s and s != all_ids:
            tight_sets.append(s)
    closure: set[frozenset[int]] = {all_ids}
    frontier = {all_ids}
    while frontier:
        nxt = set()
        for s in frontier:
            for t in tight_sets:
                c = s & t
                if c and c not in closure:
                    nxt.add(c)
        closure |= nxt
        frontier = nxt
    faces = []
    for s in closure:
        coords = mat(verts[i] for i in sorted(s))
        hull = AffineSubspace.from_points(list(coords))
        active = tuple(
            i
            for i, (row, beta) in enumerate(zip(p.A, p.b))
            if all(dot(row, c) == beta for c in coords)
        )
        faces.append(Face(active, hull, hull.dim, tuple(sorted(s)), coords))
    faces.append(Face(tuple(range(len(p.A))), None, -1, (), ()))
    faces.sort(key=lambda f: (f.dim, f.active_set, f.vertex_ids))
    covers = []
    for i, lo in enumerate(faces):
        for j, hi in enumerate(faces):
            if hi.dim == lo.dim + 1 and set(lo.vertex_ids) <= set(hi.vertex_ids):
                covers.append((i, j))
    return FaceLattice(tuple(faces), tuple(covers), mat(verts))


# ---------------------------------------------------------------------------
# relatively open cells


@dataclass(frozen=True)
class RelOpenCell:
    """relint of a bounded polytope, canonical in its carrier coordinates."""

    carrier: AffineSubspace
    closed_A: Mat  # facet rows in carrier-local coordinates
    closed_b: Vec
    excluded_faces: tuple[tuple[int, ...], ...]
    closure_vertices: Mat

    @property
    def dim(self) -> int:
        return self.carrier.dim

    @property
    def ambient_dim(self) -> int:
        return self.carrier.ambient_dim

    def sample_point(self) -> Vec:
        """Centroid of the closure vertices; always in the relative interior."""
        return self._centroid

    @cached_property
    def _centroid(self) -> Vec:
        total = zeros(self.ambient_dim)
        for v in self.closure_vertices:
            total = add(total, v)
        return scale(total, Fraction(1, len(self.closure_vertices)))

    def local_rows(self) -> list[Functional]:
        return list(zip(self.closed_A, self.closed_b))

    @cached_property
    def local_vertices(self) -> tuple[Vec, ...]:
        return tuple(self.carrier.to_local(v) for v in self.closure_vertices)

    @cached_property
    def bbox(self) -> tuple[Vec, Vec]:
        return _bbox(self.closure_vertices)

    def ambient_equations(self) -> list[Functional]:
        return self._ambient_equations

    @cached_property
    def _ambient_equations(self) -> list[Functional]:
        return [_canon_row(e) for e in self.carrier.equations()]

    def ambient_facet_rows(self) -> list[Functional]:
        return self._ambient_facet_rows

    @cached_property
    def _ambient_facet_rows(self) -> list[Functional]:
        return [_canon_row(_lift_functional(self.carrier, a, b)) for a, b in self.local_rows()]

    def _bbox_contains(self, x: Vec) -> bool:
        lo, hi = self.bbox
        return all(l <= xi <= h for l, xi, h in zip(lo, x, hi))

    def closure_contains(self, x: Vec) -> bool:
        if len(x) != self.ambient_dim:
            raise DimensionMismatch("point dimension mismatch")
        if not self._bbox_contains(x):
            return False
        if not self.carrier.contains(x):
            return False
        t = self.carrier.to_local(x)
        return all(dot(a, t) <= b for a, b in self.local_rows())

    def contains(self, x: Vec) -> bool:
        if len(x) != self.ambient_dim:
            raise DimensionMismatch("point dimension mismatch")
        if not self._bbox_contains(x):
            return False
        if not self.carrier.contains(x):
            return False
        if self.dim == 0:
            return True
        t = self.carrier.to_local(x)
        vals = [b - dot(a, t) for a, b in self.local_rows()]
        if any(v < 0 for v in vals):
            return False
        # relative openness: each excluded face must keep one row strict
        return all(any(vals[i] > 0 for i in face) for face in self.excluded_faces)

    def interior_points(self, count: int, rng) -> list[Vec]:
        """Deterministic rational points in the cell: positive vertex mixes."""
        pts = []
        verts = self.closure_vertices
        for _ in range(count):
            weights = [Fraction(1 + rng.randrange(64)) for _ in verts]
            total = sum(weights)
            x = zeros(self.ambient_dim)
            for w, v in zip(weights, verts):
                x = add(x, scale(v, w / total))
            pts.append(x)
        return pts


def cell_from_closure_points(points: Sequence[Vec]) -> RelOpenCell:
    """Canonical cell whose closure is conv(points)."""
    pts = sorted(set(tuple(p) for p in points))
    carrier = AffineSubspace.from_points(pts)
    d = carrier.dim
    local = [carrier.to_local(p) for p in pts]
    rows = facets_from_points(local, d)
    if d == 0:
        verts = pts
    else:
        verts = []
        for p, t in zip(pts, local):
            active = mat(a for a, b in rows if dot(a, t) == b)
            if active and rank(active) == d:
                verts.append(p)
    a = mat(r[0] for r in rows)
    b = vec(r[1] for r in rows)
    excluded = tuple((i,) for i in range(len(rows)))
    return RelOpenCell(carrier, a, b, excluded, mat(sorted(verts)))


def cell_key(c: RelOpenCell):
    """Canonical sort key: dimension first, then the full encoding."""
    return (c.dim, c.carrier.base, c.carrier.directions, c.closure_vertices)


def project_relint(f: Face, b_t: Mat) -> RelOpenCell:
    """The cell pi(relint F) for the linear map pi with matrix b_t (k x n)."""
    if f.dim < 0 or not f.vertex_coords:
        raise EmptyPolytope("cannot project the empty face")
    if rank(b_t) != len(b_t):
        raise RankDeficient("projection matrix must have full row rank")
    return cell_from_closure_points([mat_vec(b_t, v) for v in f.vertex_coords])


def cell_contains(c: RelOpenCell, x) -> bool:
    return c.contains(vec(x))


# ---------------------------------------------------------------------------
# splitting cells by hyperplanes


def _cell_from_split(points: list[Vec], candidates: list[Functional]) -> RelOpenCell:
    """Canonical cell from closure points when an ambient superset of the
    facet hyperplanes is already known (much cheaper than re-enumeration)."""
    pts = sorted(set(tuple(p) for p in points))
    carrier = AffineSubspace.from_points(pts)
    d = carrier.dim
    if d == 0:
        return RelOpenCell(carrier, (), (), (), mat(pts))
    local_pts = [carrier.to_local(p) for p in pts]
    rows: set[Functional] = set()
    for a, beta in candidates:
        a_loc, b_loc = _restrict_functional(carrier, a, beta)
        if all(c == 0 for c in a_loc):
            continue
        vals = [dot(a_loc, t) - b_loc for t in local_pts]
        if all(v <= 0 for v in vals):
            row = _canon_row((a_loc, b_loc))
        elif all(v >= 0 for v in vals):
            row = _canon_row((tuple(-c for c in a_loc), -b_loc))
        else:
            continue
        if row in rows:
            continue
        tight = mat(t for t, v in zip(local_pts, vals) if v == 0)
        if not tight:
            continue
        diffs = mat(sub(t, tight[0]) for t in tight[1:])
        if rank(diffs) == d - 1:
            rows.add(row)
    sorted_rows = sorted(rows)
    verts = []
    for p, t in zip(pts, local_pts):
        active = mat(a for a, b in sorted_rows if dot(a, t) == b)
        if active and rank(active) == d:
            verts.append(p)
    a = mat(r[0] for r in sorted_rows)
    b = vec(r[1] for r in sorted_rows)
    excluded = tuple((i,) for i in range(len(sorted_rows)))
    return RelOpenCell(carrier, a, b, excluded, mat(sorted(verts)))


def split_cell(cell: RelOpenCell, cut: Functional) -> dict[int, RelOpenCell]:
    """Split a cell by the hyperplane {a.x = beta}.

    Returns a dict from sign (-1, 0, +1 relative to the hyperplane) to the
    nonempty subcells on that side.  A cell whose relative interior misses
    the hyperplane comes back intact under its single sign.
    """
    a, beta = cut
    a_loc, b_loc = _restrict_functional(cell.carrier, a, beta)
    if all(x == 0 for x in a_loc):
        return {0 if b_loc == 0 else (-1 if b_loc > 0 else 1): cell}
    local_pts = list(cell.local_vertices)
    vals = [dot(a_loc, t) - b_loc for t in local_pts]
    negs = [i for i, v in enumerate(vals) if v < 0]
    poss = [i for i, v in enumerate(vals) if v > 0]
    if not (negs and poss):
        if not negs and not poss:
            return {0: cell}
        return {-1 if negs else 1: cell}
    d = cell.dim
    rows = cell.local_rows()
    crossings: list[Vec] = []
    for i in negs:
        u, vu = local_pts[i], vals[i]
        for j in poss:
            w, vw = local_pts[j], vals[j]
            if d > 1:
                active = mat(ar for ar, br in rows if dot(ar, u) == br and dot(ar, w) == br)
                if not active or rank(active) != d - 1:
                    continue
            lam = vu / (vu - vw)
            crossings.append(add(u, scale(sub(w, u), lam)))
    to_amb = cell.carrier.from_local
    cut_row = _canon_cut(cut)
    candidates = cell.ambient_facet_rows() + [cut_row, (tuple(-c for c in cut_row[0]), -cut_row[1])]
    lo = [to_amb(p) for p, v in zip(local_pts, vals) if v <= 0] + [to_amb(t) for t in crossings]
    hi = [to_amb(p) for p, v in zip(local_pts, vals) if v >= 0] + [to_amb(t) for t in crossings]
    mid = [to_amb(p) for p, v in zip(local_pts, vals) if v == 0] + [to_amb(t) for t in crossings]
    return {
        -1: _cell_from_split(lo, candidates),
        0: _cell_from_split(mid, candidates),
        1: _cell_from_split(hi, candidates),
    }


def _split_pieces(pieces: list[RelOpenCell], cut: Functional) -> list[RelOpenCell]:
    out: list[RelOpenCell] = []
    for piece in pieces:
        out.extend(split_cell(piece, cut).values())
    return out


# ---------------------------------------------------------------------------
# closure faces of a cell (as closed, vertex-described polytopes)


@dataclass(frozen=True)
class ClosedFace:
    """A face of some cell's closure, kept as its vertex set plus hull."""

    points: Mat
    hull: AffineSubspace

    @cached_property
    def rows(self) -> tuple[Functional, ...]:
        local = [self.hull.to_local(p) for p in self.points]
        return tuple(facets_from_points(local, self.hull.dim))

    @cached_property
    def bbox(self) -> tuple[Vec, Vec]:
        return _bbox(self.points)

    def contains(self, x: Vec) -> bool:
        if not self.hull.contains(x):
            return False
        t = self.hull.to_local(x)
        return all(dot(a, t) <= b for a, b in self.rows)


def closure_faces(cell: RelOpenCell) -> list[ClosedFace]:
    """All nonempty faces of the cell's closure, the closure itself included."""
    local_pts = list(cell.local_vertices)
    rows = cell.local_rows()
    all_ids = frozenset(range(len(local_pts)))
    tight = []
    for a, b in rows:
        s = frozenset(i for i, t in enumerate(local_pts) if dot(a, t) == b)
        if s and s != all_ids:
            tight.append(s)
    closure: set[frozenset[int]] = {all_ids}
    frontier = {all_ids}
    while frontier:
        nxt = set()
        for s in frontier:
            for t in tight:
                c = s & t
                if c and c not in closure:
                    nxt.add(c)
        closure |= nxt
        frontier = nxt
    out = []
    for s in sorted(closure, key=sorted):
        pts = mat(cell.closure_vertices[i] for i in sorted(s))
        out.append(ClosedFace(pts, AffineSubspace.from_points(list(pts))))
    return out


# ---------------------------------------------------------------------------
# constancy tests used by the refinement fixpoint


def _bbox(points: Mat) -> tuple[Vec, Vec]:
    cols = list(zip(*points))
    return tuple(min(c) for c in cols), tuple(max(c) for c in cols)


def _bbox_disjoint(b1, b2) -> bool:
    (lo1, hi1), (lo2, hi2) = b1, b2
    return any(h1 < l2 or h2 < l1 for l1, h1, l2, h2 in zip(lo1, hi1, lo2, hi2))


@lru_cache(maxsize=None)
def _closed_system_rows(obj) -> tuple[list[Functional], list[Functional]]:
    """(equality rows, inequality rows) of the closure of a cell or face."""
    if isinstance(obj, RelOpenCell):
        return obj.ambient_equations(), obj.ambient_facet_rows()
    eqs = [_canon_row(e) for e in obj.hull.equations()]
    rows = [_canon_row(_lift_functional(obj.hull, a, b)) for a, b in obj.rows]
    return eqs, rows


def _object_points(obj) -> Mat:
    return obj.closure_vertices if isinstance(obj, RelOpenCell) else obj.points


def _closures_separated(x: RelOpenCell, obj) -> bool:
    """Cheap sufficient test for x ∩ Cl(obj) = ∅ (x relatively open).

    Points of x are strictly positive mixes of its closure vertices and lie
    strictly inside every facet of x, so one-sided weak separations with one
    strict vertex already rule out the intersection.
    """
    eqs, ineqs = _closed_system_rows(obj)
    xverts = x.closure_vertices
    for a, b in ineqs:
        vals = [dot(a, v) - b for v in xverts]
        if all(v >= 0 for v in vals) and any(v > 0 for v in vals):
            return True
    for a, b in eqs:
        vals = [dot(a, v) - b for v in xverts]
        if (all(v >= 0 for v in vals) and any(v > 0 for v in vals)) or (
            all(v <= 0 for v in vals) and any(v < 0 for v in vals)
        ):
            return True
    pts = _object_points(obj)
    for a, b in x.ambient_facet_rows():
        if all(dot(a, p) >= b for p in pts):
            return True
    for a, b in x.ambient_equations():
        vals = [dot(a, p) - b for p in pts]
        if all(v > 0 for v in vals) or all(v < 0 for v in vals):
            return True
    return False


def _closure_intersection_vertices(x: RelOpenCell, obj) -> list[Vec]:
    """Vertices of Cl(x) ∩ Cl(obj), in x-local coordinates ([] when empty)."""
    eqs, ineqs = _closed_system_rows(obj)
    rows: list[Functional] = x.local_rows()
    for a, b in eqs:
        a_loc, b_loc = _restrict_functional(x.carrier, a, b)
        if all(c == 0 for c in a_loc):
            if b_loc != 0:
                return []
            continue
        rows.append((a_loc, b_loc))
        rows.append((tuple(-c for c in a_loc), -b_loc))
    for a, b in ineqs:
        a_loc, b_loc = _restrict_functional(x.carrier, a, b)
        if all(c == 0 for c in a_loc):
            if b_loc < 0:
                return []
            continue
        rows.append((a_loc, b_loc))
    return enumerate_vertices(rows, x.dim)


def _meets_relopen(x: RelOpenCell, obj, q_local: list[Vec]) -> bool:
    """Given the vertices of Q = Cl(x) ∩ Cl(obj), decide whether x ∩ obj != ∅.

    Q minus finitely many hyperplanes is nonempty exactly when the convex Q
    is contained in none of them.
    """
    if not q_local:
        return False
    strict: list[Functional] = list(x.local_rows())
    if isinstance(obj, RelOpenCell):
        for a, b in obj.ambient_facet_rows():
            a_loc, b_loc = _restrict_functional(x.carrier, a, b)
            if any(c != 0 for c in a_loc):
                strict.append((a_loc, b_loc))
    return all(any(dot(a, q) != b for q in q_local) for a, b in strict)


def _membership_constant(x: RelOpenCell, obj) -> bool:
    """Is membership in obj (relopen cell or closed face) constant on x?"""
    if _bbox_disjoint(x.bbox, obj.bbox):
        return True
    if isinstance(obj, RelOpenCell):
        if all(obj.closure_contains(v) for v in x.closure_vertices):
            # inside the closure: x is either inside a facet (constant false)
            # or strictly inside every facet (constant true)
            return True
    else:
        if all(obj.contains(v) for v in x.closure_vertices):
            return True
    if _closures_separated(x, obj):
        return True
    # mixed situation: non-constant exactly when x still meets obj
    if obj.contains(x.sample_point()):
        return False
    q = _closure_intersection_vertices(x, obj)
    return not _meets_relopen(x, obj, q)


def _object_functionals(obj) -> list[Functional]:
    """Cut functionals that make membership in obj sign-determined."""
    eqs, ineqs = _closed_system_rows(obj)
    return [_canon_cut(f) for f in eqs + ineqs]


def _object_sign_table(obj) -> list[tuple[Functional, tuple[int, ...]]]:
    """(cut, allowed signs) pairs: a piece whose recorded sign for some cut
    falls outside the allowed set cannot meet the object."""
    eqs, ineqs = _closed_system_rows(obj)
    closed = not isinstance(obj, RelOpenCell)
    table = []
    for a, b in eqs:
        table.append((_canon_cut((a, b)), (0,)))
    for a, b in ineqs:
        cut = _canon_cut((a, b))
        flipped = cut != _canon_row((a, b))
        good = 1 if flipped else -1
        allowed = (good, 0) if closed else (good,)
        table.append((cut, allowed))
    return table


def _object_key(obj):
    if isinstance(obj, RelOpenCell):
        return ("cell", cell_key(obj))
    return ("face", obj.points)


# ---------------------------------------------------------------------------
# common refinement


def _initial_cuts(objects: Sequence) -> set[Functional]:
    """Codimension-one affine hulls among the members and closure faces."""
    cuts: set[Functional] = set()
    for obj in objects:
        hull = obj.carrier if isinstance(obj, RelOpenCell) else obj.hull
        if hull.dim == hull.ambient_dim - 1:
            cuts.update(_canon_cut(e) for e in hull.equations())
        if isinstance(obj, RelOpenCell) and obj.dim == obj.ambient_dim:
            cuts.update(_canon_cut(r) for r in obj.ambient_facet_rows())
    return cuts


def _refine_engine(cells: Sequence[RelOpenCell], regions: Sequence[RelOpenCell]) -> list[RelOpenCell]:
    """Refine the regions until membership in every cell and in every face of
    every cell's closure is constant per piece.

    Order invariant: the cut set grows by globally collected demands and the
    final pieces are the sign classes of that set intersected with the
    regions, independent of any processing order.  An object all of whose
    defining hyperplanes are already cuts is sign-determined and needs no
    geometric test.
    """
    objects: list = []
    seen = set()
    for c in cells:
        for obj in [c, *closure_faces(c)]:
            key = _object_key(obj)
            if key not in seen:
                seen.add(key)
                objects.append(obj)
    obj_funcs = [frozenset(_object_functionals(obj)) for obj in objects]
    obj_tables = [_object_sign_table(obj) for obj in objects]
    cuts: set[Functional] = _initial_cuts(objects)
    pieces: list[tuple[RelOpenCell, dict[Functional, int]]] = []
    seen_pieces: set = set()
    for r in regions:
        key = cell_key(r)
        if key not in seen_pieces:
            seen_pieces.add(key)
            pieces.append((r, {}))
    pending = sorted(cuts)
    while True:
        for cut in pending:
            split: list[tuple[RelOpenCell, dict[Functional, int]]] = []
            seen_pieces = set()
            for cell, signs in pieces:
                for sgn, sub_cell in split_cell(cell, cut).items():
                    key = cell_key(sub_cell)
                    if key in seen_pieces:
                        continue  # overlapping regions produce identical classes
                    seen_pieces.add(key)
                    stamped = dict(signs)
                    stamped[cut] = sgn
                    split.append((sub_cell, stamped))
            pieces = split
        demands: set[Functional] = set()
        for obj, funcs, table in zip(objects, obj_funcs, obj_tables):
            if funcs <= cuts:
                continue  # fully sign-determined: membership constant per piece
            for cell, signs in pieces:
                excluded = False
                for cut, allowed in table:
                    sgn = signs.get(cut)
                    if sgn is not None and sgn not in allowed:
                        excluded = True
                        break
                if excluded:
                    continue
                if not _membership_constant(cell, obj):
                    demands |= funcs
                    break
        new = demands - cuts
        if not new:
            dedup = {cell_key(p): p for p, _ in pieces}
            return [dedup[k] for k in sorted(dedup)]
        cuts |= new
        pending = sorted(new)


def common_refinement(cells: Sequence[RelOpenCell], within) -> list[RelOpenCell]:
    """Partition `within` so membership in every input cell and in every face
    of every input cell's closure is constant on each output cell.

    `within` may be a relatively open cell (the partition covers exactly that
    set) or a closed HPolytope (the partition covers the whole polytope,
    boundary faces included).
    """
    if isinstance(within, HPolytope):
        lattice = face_lattice(within)
        regions = [cell_from_closure_points(list(f.vertex_coords)) for f in lattice.nonempty_faces()]
    else:
        regions = [within]
    n = regions[0].ambient_dim
    if any(c.ambient_dim != n for c in cells):
        raise DimensionMismatch("cells and region live in different ambient spaces")
    return _refine_engine(cells, regions)
