"""Hamiltonian subtorus actions on symplectic toric manifolds.

The input is purely polyhedral: the momentum polytope of the big torus in
R^n (a complete invariant of the toric manifold) and an integral n x k
matrix embedding the subtorus Lie algebra.  The induced map on duals is the
transpose, and the momentum image of every orbit-type stratum is a
projection of an open face, so the whole cover machinery applies verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from .cover import PiecewiseAffineCover
from .errors import (
    NonEffectiveAction,
    NonIntegralInput,
    PointOutsideImage,
    RankDeficient,
)
from .linalg import (
    Mat,
    Vec,
    integer_row_basis,
    mat,
    nullspace,
    rank,
    row_space_basis,
    smith_invariants,
    transpose,
    vec,
)
from .polyhedron import (
    Face,
    HPolytope,
    RelOpenCell,
    cell_key,
    face_lattice,
    hpolytope_from_points,
    project_relint,
    vertices,
)
from .stratifier import Stratification, stratify


@dataclass(frozen=True)
class ToricAction:
    """Momentum polytope in R^n plus the subtorus inclusion matrix B (n x k)."""

    polytope: HPolytope
    B: Mat
    name: str = ""

    @staticmethod
    def make(polytope: HPolytope, b: Mat, name: str = "") -> "ToricAction":
        b = mat(b)
        if any(x.denominator != 1 for row in b for x in row):
            raise NonIntegralInput("subtorus matrix must be integral")
        n = polytope.ambient_dim
        if len(b) != n:
            raise RankDeficient("subtorus matrix must have one row per ambient dimension")
        k = len(b[0]) if b else 0
        if rank(b) != k:
            raise RankDeficient("subtorus matrix must have full column rank")
        vertices(polytope)  # raises UnboundedPolytope / EmptyPolytope
        return ToricAction(polytope, b, name)

    @property
    def n(self) -> int:
        return self.polytope.ambient_dim

    @property
    def k(self) -> int:
        return len(self.B[0]) if self.B else 0

    @property
    def projection(self) -> Mat:
        """The induced map on duals t_n^* -> t_k^*: the transpose of B."""
        return transpose(self.B)

    def is_effective(self) -> bool:
        """The subtorus embeds iff the Smith form of B has all divisors one."""
        inv = smith_invariants(self.B)
        return len(inv) == self.k and all(d == 1 for d in inv)

    def is_delzant(self) -> bool:
        """Each vertex must lie on exactly n facets whose primitive normals
        form a Z^n basis (the smoothness criterion for toric manifolds)."""
        from .linalg import primitive_functional

        lattice = face_lattice(self.polytope)
        for f in lattice.by_dim(0):
            prim = sorted(
                {primitive_functional(self.polytope.A[i], self.polytope.b[i])[0] for i in f.active_set}
            )
            if len(prim) != self.n:
                return False
            ints = [[int(x) for x in row] for row in prim]
            if abs(_det_int(ints)) != 1:
                return False
        return True


def _det_int(rows: list[list[int]]) -> int:
    """Integer determinant by fraction-free Gaussian elimination (Bareiss)."""
    a = [r[:] for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for i in range(n - 1):
        if a[i][i] == 0:
            piv = next((j for j in range(i + 1, n) if a[j][i] != 0), None)
            if piv is None:
                return 0
            a[i], a[piv] = a[piv], a[i]
            sign = -sign
        for j in range(i + 1, n):
            for c in range(i + 1, n):
                a[j][c] = (a[j][c] * a[i][i] - a[j][i] * a[i][c]) // prev
            a[j][i] = 0
        prev = a[i][i]
    return sign * a[-1][-1]


@dataclass(frozen=True)
class IsotropyData:
    """Isotropy Lie algebra of the subtorus over a face, with its annihilator."""

    face_active_set: tuple[int, ...]
    face_dim: int
    isotropy_basis: Mat  # basis of {xi in R^k : B.xi in span(active normals)}
    annihilator: Mat  # canonical basis of the annihilator in (R^k)*

    @property
    def isotropy_rank(self) -> int:
        return len(self.isotropy_basis)


@lru_cache(maxsize=None)
def isotropy_for_face(a: ToricAction, f: Face) -> IsotropyData:
    normals = mat(a.polytope.A[i] for i in f.active_set)
    k = a.k
    # unknowns (xi, lambda): B.xi - N^T.lambda = 0, one equation per ambient coord
    rows = []
    for i in range(a.n):
        row = list(a.B[i]) + [-nr[i] for nr in normals]
        rows.append(vec(row))
    kernel = nullspace(mat(rows), k + len(normals))
    iso = row_space_basis(mat(r[:k] for r in kernel)) if kernel else ()
    ann = nullspace(iso, k)
    return IsotropyData(f.active_set, f.dim, iso, ann)


@lru_cache(maxsize=None)
def face_image_cells(a: ToricAction) -> tuple[tuple[Face, RelOpenCell], ...]:
    """Every nonempty face paired with the projection of its relative interior."""
    lattice = face_lattice(a.polytope)
    b_t = a.projection
    return tuple((f, project_relint(f, b_t)) for f in lattice.nonempty_faces())


def momentum_cover(a: ToricAction) -> PiecewiseAffineCover:
    """Cover of the momentum image by projected open faces, deduplicated."""
    pairs = face_image_cells(a)
    dedup = {cell_key(cell): cell for _, cell in pairs}
    members = [dedup[key] for key in sorted(dedup)]
    pts = [v for _, cell in pairs for v in cell.closure_vertices]
    support = hpolytope_from_points(pts)
    return PiecewiseAffineCover.make(members, (support,))


def hamiltonian_stratification(a: ToricAction) -> Stratification:
    """Stratify the momentum cover and attach integer direction bases.

    Every stratum direction is a rational subspace of (R^k, Z^k), so the
    integer basis always exists; it witnesses the integral affine structure.
    """
    s = stratify(momentum_cover(a))
    strata = tuple(
        replace(st, integer_direction=integer_row_basis(st.direction)) for st in s.strata
    )
    return Stratification(strata, s.frontier, s.ambient_dim)


def faces_through(a: ToricAction, x: Vec) -> list[tuple[Face, RelOpenCell]]:
    return [(f, cell) for f, cell in face_image_cells(a) if cell.contains(x)]


def isotropy_at(a: ToricAction, x) -> list[IsotropyData]:
    """Isotropy data of every face whose projected open face contains x."""
    point = vec(x)
    hits = faces_through(a, point)
    if not hits:
        raise PointOutsideImage(f"{x} is not in the momentum image")
    return [isotropy_for_face(a, f) for f, _ in hits]


def regular_locus(a: ToricAction, s: Stratification) -> set[int]:
    """Stratum ids over which every contributing face has zero isotropy."""
    if not a.is_effective():
        raise NonEffectiveAction("regular locus is only defined for effective actions")
    out = set()
    for st in s.strata:
        regular = True
        for cell in st.cells:
            x = cell.sample_point()
            for f, _ in faces_through(a, x):
                if isotropy_for_face(a, f).isotropy_rank != 0:
                    regular = False
                    break
            if not regular:
                break
        if regular:
            out.add(st.id)
    return out
