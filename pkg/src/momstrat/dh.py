"""Exact fiber volumes and per-chamber density polynomials.

The density at x is the volume of the momentum fiber over x, measured in the
affine lattice Z^n ∩ ker(pi) (so a fundamental cell of that lattice has
volume one).  Working in kernel-lattice coordinates makes the normalization
automatic: the fiber becomes a polytope in R^(n-k) whose Euclidean volume is
the lattice-normalized one.  On each top-dimensional stratum the density is
a polynomial of total degree at most n-k, recovered by exact interpolation
and re-verified on held-out points.

The Monte-Carlo estimator at the bottom is the only floating-point code in
the package outside SVG coordinate formatting; it exists purely as an
independent cross-check of the exact path.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateFiber,
    EmptyFiber,
    InterpolationInconsistent,
    NotTopDimensional,
)
from .linalg import (
    ZERO,
    AffineSubspace,
    Mat,
    Vec,
    dot,
    kernel_lattice,
    mat,
    rref,
    solve,
    sub,
    vec,
)
from .polyhedron import Functional, enumerate_vertices
from .stratifier import Stratification
from .toric import ToricAction


@dataclass(frozen=True)
class FiberVolume:
    point: Vec
    volume: Fraction


@dataclass(frozen=True)
class DensityPoly:
    """Multivariate polynomial with rational coefficients on one stratum."""

    stratum_id: int
    coefficients: tuple[tuple[tuple[int, ...], Fraction], ...]  # sorted, nonzero
    degree: int

    def evaluate(self, x) -> Fraction:
        point = vec(x)
        total = ZERO
        for expo, coeff in self.coefficients:
            term = coeff
            for xi, e in zip(point, expo):
                term *= xi**e
            total += term
        return total

    def coefficient(self, expo: tuple[int, ...]) -> Fraction:
        for e, c in self.coefficients:
            if e == expo:
                return c
        return ZERO


def _fiber_rows(a: ToricAction, x: Vec) -> tuple[list[Functional], Vec, Mat]:
    """The fiber polytope over x in kernel-lattice coordinates.

    Returns (rows, particular solution p, lattice basis L) with the fiber
    equal to {p + t.L : rows hold at t}.
    """
    p = solve(a.projection, x)
    if p is None:
        raise EmptyFiber(f"projection misses {x}")
    lattice = kernel_lattice(a.projection, a.n)
    rows = []
    for row, beta in zip(a.polytope.A, a.polytope.b):
        coeffs = tuple(dot(row, li) for li in lattice)
        rows.append((coeffs, beta - dot(row, p)))
    return rows, p, lattice


def _det(rows: list[Vec]) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for i in range(n):
        piv = next((j for j in range(i, n) if a[j][i] != 0), None)
        if piv is None:
            return ZERO
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            det = -det
        det *= a[i][i]
        inv = Fraction(1) / a[i][i]
        for j in range(i + 1, n):
            if a[j][i] != 0:
                f = a[j][i] * inv
                a[j] = [u - f * v for u, v in zip(a[j], a[i])]
    return det


def _triangulate(points: list[Vec], d: int) -> list[tuple[Vec, ...]]:
    """Fan triangulation of the full-dimensional conv(points) in R^d."""
    if d == 0:
        return [(points[0],)]
    from .polyhedron import facets_from_points

    v0 = min(points)
    simplices = []
    for a, beta in facets_from_points(points, d):
        if dot(a, v0) == beta:
            continue
        fpts = [p for p in points if dot(a, p) == beta]
        hull = AffineSubspace.from_points(fpts)
        local = [hull.to_local(p) for p in fpts]
        for s in _triangulate(local, d - 1):
            simplices.append((v0,) + tuple(hull.from_local(q) for q in s))
    return simplices


def polytope_volume(verts: list[Vec], d: int) -> Fraction:
    """Exact Euclidean d-volume of conv(verts) inside R^d."""
    if d == 0:
        return Fraction(1)
    hull = AffineSubspace.from_points(verts)
    if hull.dim < d:
        return ZERO
    total = ZERO
    factorial = 1
    for i in range(2, d + 1):
        factorial *= i
    for simplex in _triangulate(verts, d):
        rows = [sub(p, simplex[0]) for p in simplex[1:]]
        total += abs(_det(rows))
    return total / factorial


def fiber_volume(a: ToricAction, x) -> FiberVolume:
    """Lattice-normalized exact volume of the momentum fiber over x."""
    point = vec(x)
    rows, _, lattice = _fiber_rows(a, point)
    d = a.n - a.k
    verts = enumerate_vertices(rows, d)
    if not verts:
        raise EmptyFiber(f"fiber over {x} is empty")
    return FiberVolume(point, polytope_volume(verts, d))


# ---------------------------------------------------------------------------
# density polynomials by exact interpolation


def _monomials(k: int, max_degree: int) -> list[tuple[int, ...]]:
    out = [
        e
        for e in itertools.product(range(max_degree + 1), repeat=k)
        if sum(e) <= max_degree
    ]
    out.sort(key=lambda e: (sum(e), e))
    return out


def _monomial_row(x: Vec, monomials: list[tuple[int, ...]]) -> Vec:
    row = []
    for expo in monomials:
        term = Fraction(1)
        for xi, e in zip(x, expo):
            term *= xi**e
        row.append(term)
    return tuple(row)


def _stratum_point_stream(stratum, seed: int):
    """Deterministic stream of rational interior points of the stratum."""
    rng = random.Random(seed)
    cells = list(stratum.cells)
    i = 0
    while True:
        cell = cells[i % len(cells)]
        yield cell.interior_points(1, rng)[0]
        i += 1


def density_polynomial(
    a: ToricAction, s: Stratification, stratum_id: int, seed: int = 0
) -> DensityPoly:
    """The unique polynomial of degree <= n-k matching fiber volumes on the
    stratum, interpolated on affinely generic points and verified on held-out
    interior points (exact equality required)."""
    stratum = s.strata[stratum_id]
    if stratum.dim != a.k:
        raise NotTopDimensional(
            f"stratum {stratum_id} has dimension {stratum.dim}, expected {a.k}"
        )
    monomials = _monomials(a.k, a.n - a.k)
    m = len(monomials)
    stream = _stratum_point_stream(stratum, seed + 7919 * stratum_id)
    rows: list[Vec] = []
    rhs: list[Fraction] = []
    used: set[Vec] = set()
    # grow an invertible interpolation system, rejecting rank-neutral points
    while len(rows) < m:
        x = next(stream)
        if x in used:
            continue
        candidate = rows + [_monomial_row(x, monomials)]
        if len(rref(mat(candidate))[1]) == len(candidate):
            rows.append(candidate[-1])
            rhs.append(fiber_volume(a, x).volume)
            used.add(x)
    coeffs = solve(mat(rows), vec(rhs))
    assert coeffs is not None
    poly = DensityPoly(
        stratum_id,
        tuple((e, c) for e, c in zip(monomials, coeffs) if c != 0),
        max((sum(e) for e, c in zip(monomials, coeffs) if c != 0), default=0),
    )
    holdout = max(a.k + 1, 3)
    checked = 0
    while checked < holdout:
        x = next(stream)
        if x in used:
            continue
        used.add(x)
        if poly.evaluate(x) != fiber_volume(a, x).volume:
            raise InterpolationInconsistent(
                f"held-out point {x} disagrees with the interpolated density"
            )
        checked += 1
    return poly


# ---------------------------------------------------------------------------
# Monte-Carlo oracle (floating point, test harness only)


@dataclass(frozen=True)
class MCVolume:
    point: Vec
    estimate: float
    std_error: float
    trials: int
    seed: int


def mc_fiber_volume(a: ToricAction, x, trials: int, seed: int) -> MCVolume:
    """Rejection-sampling estimate of the lattice-normalized fiber volume.

    Samples uniformly in the bounding box of the fiber in kernel-lattice
    coordinates; reproducible for a fixed seed.
    """
    point = vec(x)
    rows, _, _ = _fiber_rows(a, point)
    d = a.n - a.k
    if d == 0:
        verts = enumerate_vertices(rows, 0)
        if not verts:
            raise EmptyFiber(f"fiber over {x} is empty")
        return MCVolume(point, 1.0, 0.0, trials, seed)
    verts = enumerate_vertices(rows, d)
    if not verts:
        raise EmptyFiber(f"fiber over {x} is empty")
    hull = AffineSubspace.from_points(verts)
    if hull.dim < d:
        raise DegenerateFiber(f"fiber over {x} has dimension {hull.dim} < {d}")
    lo = np.array([float(min(v[i] for v in verts)) for i in range(d)])
    hi = np.array([float(max(v[i] for v in verts)) for i in range(d)])
    amat = np.array([[float(c) for c in row] for row, _ in rows])
    bvec = np.array([float(b) for _, b in rows])
    box_volume = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    samples = lo + rng.random((trials, d)) * (hi - lo)
    inside = np.all(samples @ amat.T <= bvec + 0.0, axis=1)
    p_hat = float(np.count_nonzero(inside)) / trials
    estimate = p_hat * box_volume
    std_error = box_volume * float(np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials))
    return MCVolume(point, estimate, std_error, trials, seed)
