"""Shared fixtures: canonical worked examples and the randomized toric corpus."""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from momstrat import HPolytope, ToricAction, mat, vec
from momstrat.linalg import AffineSubspace, Mat, Vec, mat_vec, rank, row_space_basis, transpose
from momstrat.polyhedron import RelOpenCell, cell_from_closure_points, cell_key
from momstrat.stratifier import Stratification, Stratum


def prism_polytope() -> HPolytope:
    """[0,1] x 3*simplex2 in coordinates (u, v1, v2)."""
    return HPolytope.from_rows(
        [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 0, -1], [0, 1, 1]],
        [0, 1, 0, 0, 3],
    )


def paper_action() -> ToricAction:
    return ToricAction.make(prism_polytope(), mat([[1, 0], [1, 0], [0, 1]]), "paper")


def unit_square() -> HPolytope:
    return HPolytope.from_rows([[-1, 0], [1, 0], [0, -1], [0, 1]], [0, 1, 0, 1])


def square_identity_action() -> ToricAction:
    return ToricAction.make(unit_square(), mat([[1, 0], [0, 1]]), "square")


def simplex2_scaled(c: int = 2) -> HPolytope:
    return HPolytope.from_rows([[-1, 0], [0, -1], [1, 1]], [0, 0, c])


def simplex_sum_action() -> ToricAction:
    return ToricAction.make(simplex2_scaled(2), mat([[1], [1]]), "simplex_sum")


def segment_cell(p, q) -> RelOpenCell:
    return cell_from_closure_points([vec(p), vec(q)])


def point_cell(p) -> RelOpenCell:
    return cell_from_closure_points([vec(p)])


def box_cell(corners) -> RelOpenCell:
    return cell_from_closure_points([vec(c) for c in corners])


# ---------------------------------------------------------------------------
# randomized toric corpus


def _simplex_block(dim: int, scale: int, shift: list[int]) -> tuple[list[list[int]], list[int]]:
    """Scaled standard simplex translated by the integer shift vector."""
    rows = []
    offs = []
    for i in range(dim):
        row = [0] * dim
        row[i] = -1
        rows.append(row)
        offs.append(-shift[i])
    rows.append([1] * dim)
    offs.append(scale + sum(shift))
    return rows, offs


def product_polytope(factor_dims: list[int], scales: list[int], shifts: list[list[int]]) -> HPolytope:
    n = sum(factor_dims)
    rows: list[list[int]] = []
    offs: list = []
    at = 0
    for d, c, sh in zip(factor_dims, scales, shifts):
        block_rows, block_offs = _simplex_block(d, c, sh)
        for row, off in zip(block_rows, block_offs):
            full = [0] * n
            full[at : at + d] = row
            rows.append(full)
            offs.append(off)
        at += d
    return HPolytope.from_rows(rows, offs)


def _face_count(factor_dims: list[int]) -> int:
    total = 1
    for d in factor_dims:
        total *= 2 ** (d + 1) - 1
    return total


def random_toric_instance(seed: int, n_max: int = 6, k_max: int = 3) -> ToricAction:
    """A random effective subtorus action on a product of scaled simplices.

    Instance sizes are kept at desk scale: the projected cover must stay
    below a per-rank member budget (exact arrangements grow quickly with
    the number of distinct hyperplanes, especially for k = 3).
    """
    from momstrat.toric import momentum_cover

    rng = random.Random(seed)
    while True:
        n = rng.choices(range(2, n_max + 1), weights=[1, 2, 2, 2, 2][: n_max - 1])[0]
        dims = None
        for _ in range(8):
            trial: list[int] = []
            rem = n
            while rem > 0:
                d = rng.randint(1, rem)
                trial.append(d)
                rem -= d
            if _face_count(trial) <= 130:
                dims = trial
                break
        if dims is None:
            continue
        k = rng.randint(1, min(k_max, n))
        scales = [rng.randint(1, 3) for _ in dims]
        shifts = [[rng.randint(-1, 1) for _ in range(d)] for d in dims]
        polytope = product_polytope(dims, scales, shifts)
        action = None
        for _ in range(40):
            b = mat([[rng.randint(-2, 2) for _ in range(k)] for _ in range(n)])
            if rank(b) != k:
                continue
            candidate = ToricAction(polytope, b, f"corpus_{seed}")
            if candidate.is_effective():
                action = candidate
                break
        if action is None:
            continue
        budget = 55 if k == 3 else 70
        if len(momentum_cover(action).members) > budget:
            continue
        return action


@lru_cache(maxsize=None)
def corpus(count: int = 50, start_seed: int = 1000) -> tuple[ToricAction, ...]:
    return tuple(random_toric_instance(start_seed + i) for i in range(count))


@lru_cache(maxsize=None)
def stratification_for(action: ToricAction):
    from momstrat.toric import hamiltonian_stratification

    return hamiltonian_stratification(action)


# ---------------------------------------------------------------------------
# unimodular transforms of stratifications


def random_unimodular(rng: random.Random, k: int) -> Mat:
    """Product of elementary integer shears and swaps: always in GL(k, Z)."""
    u = [[Fraction(1 if i == j else 0) for j in range(k)] for i in range(k)]
    for _ in range(6):
        i, j = rng.randrange(k), rng.randrange(k)
        if i == j:
            continue
        c = rng.choice([-2, -1, 1, 2])
        for col in range(k):
            u[i][col] += c * u[j][col]
    if rng.random() < 0.5 and k > 1:
        u[0], u[1] = u[1], u[0]
    return mat(u)


def transform_cell(cell: RelOpenCell, u: Mat) -> RelOpenCell:
    return cell_from_closure_points([mat_vec(u, v) for v in cell.closure_vertices])


def transform_stratification(s: Stratification, u: Mat) -> Stratification:
    """Push the stratification through x -> u.x and re-canonicalize.

    Mirrors the canonical ordering rules of the stratifier so the result can
    be compared bit-for-bit with stratifying the transformed input.
    """
    ut = transpose(u)
    raw = []
    for st in s.strata:
        cells = sorted((transform_cell(c, u) for c in st.cells), key=cell_key)
        direction = row_space_basis(mat([mat_vec(u, d) for d in st.direction]))
        carrier = AffineSubspace.from_point_and_directions(
            mat_vec(u, st.carrier.base), direction
        )
        r = carrier.dim
        tops = [i for i, c in enumerate(cells) if c.dim == r]
        edges = []
        for li, low in enumerate(cells):
            if low.dim == r:
                continue
            for ti in tops:
                if all(cells[ti].closure_contains(v) for v in low.closure_vertices):
                    edges.append((li, ti))
        integer_direction = None
        if st.integer_direction is not None:
            from momstrat.linalg import integer_row_basis

            integer_direction = integer_row_basis(direction)
        raw.append((st.id, carrier, tuple(cells), tuple(sorted(edges)), integer_direction))
    order = sorted(
        range(len(raw)),
        key=lambda i: (
            raw[i][1].dim,
            raw[i][1].base,
            raw[i][1].directions,
            tuple(cell_key(c) for c in raw[i][2]),
        ),
    )
    old_to_new = {raw[i][0]: new for new, i in enumerate(order)}
    strata = tuple(
        Stratum(
            new,
            raw[i][1].directions,
            raw[i][1],
            raw[i][2],
            raw[i][1].dim,
            raw[i][3],
            raw[i][4],
        )
        for new, i in enumerate(order)
    )
    frontier = tuple(sorted((old_to_new[a], old_to_new[b]) for a, b in s.frontier))
    return Stratification(strata, frontier, s.ambient_dim)


def stratum_point_set(st: Stratum) -> set:
    return {tuple(v) for c in st.cells for v in c.closure_vertices}


def interior_rational_points(cell: RelOpenCell, count: int, seed: int) -> list[Vec]:
    rng = random.Random(seed)
    return cell.interior_points(count, rng)
