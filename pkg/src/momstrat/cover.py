"""Piecewise-affine covers of compact polyhedral sets and their validation.

A cover is a finite ordered collection of relatively open cells whose union
is the supported set.  The two cover axioms checked here: every member is
open in its affine hull (true by construction of ``RelOpenCell``), and the
closure of each member inside the support is again a union of members.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import DimensionMismatch, PointOutsideSupport
from .linalg import Vec, vec
from .polyhedron import HPolytope, RelOpenCell, _refine_engine, cell_key


@dataclass(frozen=True)
class PiecewiseAffineCover:
    members: tuple[RelOpenCell, ...]
    ambient_dim: int
    support_closure: tuple[HPolytope, ...]

    @staticmethod
    def make(
        members: Sequence[RelOpenCell], support_closure: Sequence[HPolytope] = ()
    ) -> "PiecewiseAffineCover":
        if not members:
            raise DimensionMismatch("a cover needs at least one member")
        n = members[0].ambient_dim
        if any(m.ambient_dim != n for m in members):
            raise DimensionMismatch("cover members live in different ambient spaces")
        return PiecewiseAffineCover(tuple(members), n, tuple(support_closure))


@dataclass(frozen=True)
class MemberReport:
    member_index: int
    affine_open: bool
    closure_covered: bool
    covering_members: tuple[int, ...]
    uncovered_witness: Vec | None


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    member_reports: tuple[MemberReport, ...]

    def offending_members(self) -> list[int]:
        return [r.member_index for r in self.member_reports if not r.closure_covered]


@lru_cache(maxsize=None)
def refined_cells(c: PiecewiseAffineCover) -> tuple[RelOpenCell, ...]:
    """The canonical partition of the support underlying every refinement use.

    Pieces are the sign classes of the refinement cut set intersected with
    the members; overlapping members produce identical pieces, deduplicated
    by their canonical encodings.
    """
    return tuple(_refine_engine(c.members, c.members))


@lru_cache(maxsize=None)
def validate(c: PiecewiseAffineCover) -> ValidationReport:
    """Check the closure condition for every member; never raises.

    For member P the closure within the support X is Cl(P) ∩ X; it equals a
    union of members iff every refined piece inside Cl(P) lies in some member
    that is itself contained in Cl(P).
    """
    pieces = refined_cells(c)
    reports = []
    valid = True
    for i, p in enumerate(c.members):
        contained = tuple(
            j
            for j, q in enumerate(c.members)
            if all(p.closure_contains(v) for v in q.closure_vertices)
        )
        witness = None
        for piece in pieces:
            s = piece.sample_point()
            if not p.closure_contains(s):
                continue
            if not any(c.members[j].contains(s) for j in contained):
                witness = s
                break
        covered = witness is None
        valid = valid and covered
        reports.append(MemberReport(i, True, covered, contained, witness))
    return ValidationReport(valid, tuple(reports))


def membership_signature(c: PiecewiseAffineCover, x) -> tuple[int, ...]:
    """The exact index set {i : x in P_i}; raises when x misses the support."""
    point = vec(x)
    sig = tuple(i for i, m in enumerate(c.members) if m.contains(point))
    if not sig:
        raise PointOutsideSupport(f"{x} lies in no cover member")
    return sig


def support_sample_points(c: PiecewiseAffineCover) -> list[Vec]:
    """One interior rational point per refined piece (covers the support)."""
    return [piece.sample_point() for piece in refined_cells(c)]


def member_sort_key(m: RelOpenCell):
    return cell_key(m)
