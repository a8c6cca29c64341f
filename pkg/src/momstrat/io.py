"""JSON input/output.

Rationals are serialized as exact "p/q" strings, never floats.  Output files
are deterministic: canonical field ordering, sorted keys, no timestamps, and
the provenance block carries only the input hash and tool version.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from . import __version__
from .cover import PiecewiseAffineCover, ValidationReport
from .dh import DensityPoly
from .errors import MomstratError, ParseError
from .linalg import AffineSubspace, Mat, Vec, frac, mat, vec
from .polyhedron import HPolytope, RelOpenCell, cell_from_closure_points, hpolytope_from_points
from .stratifier import Stratification, Stratum
from .toric import ToricAction

SCHEMA_STRATIFICATION = "momstrat.stratification/1"


def _f2s(x: Fraction) -> str:
    return str(x)


def _vec2j(v: Vec) -> list[str]:
    return [_f2s(x) for x in v]


def _mat2j(m: Mat) -> list[list[str]]:
    return [_vec2j(row) for row in m]


def _j2vec(data) -> Vec:
    return vec(frac(x) if isinstance(x, str) else x for x in data)


def _j2mat(data) -> Mat:
    return mat([_j2vec(row) for row in data])


def input_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


# ---------------------------------------------------------------------------
# toric spec files


def parse_toric_spec(data: dict) -> ToricAction:
    try:
        n = int(data["ambient_dim"])
        rows = []
        offsets = []
        for ineq in data["inequalities"]:
            normal = [int(c) for c in ineq["normal"]]
            if len(normal) != n:
                raise ParseError("inequality normal has wrong dimension")
            rows.append(normal)
            offsets.append(frac(ineq["offset"]) if isinstance(ineq["offset"], str) else Fraction(ineq["offset"]))
        b = [[int(c) for c in row] for row in data["subtorus_matrix"]]
        name = data.get("name", "")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed toric spec: {exc}") from exc
    polytope = HPolytope.from_rows(rows, offsets)
    try:
        return ToricAction.make(polytope, mat(b), name)
    except MomstratError as exc:
        raise ParseError(f"invalid toric spec: {exc}") from exc


def toric_spec_to_json(a: ToricAction) -> dict:
    return {
        "name": a.name,
        "ambient_dim": a.n,
        "inequalities": [
            {"normal": [int(c) for c in row], "offset": _f2s(beta)}
            for row, beta in zip(a.polytope.A, a.polytope.b)
        ],
        "subtorus_matrix": [[int(c) for c in row] for row in a.B],
    }


# ---------------------------------------------------------------------------
# cover files


def parse_cover(data: dict) -> PiecewiseAffineCover:
    try:
        members = [
            cell_from_closure_points([_j2vec(p) for p in m["closure_vertices"]])
            for m in data["members"]
        ]
        support = tuple(
            hpolytope_from_points([_j2vec(p) for p in poly["vertices"]])
            for poly in data.get("support_closure", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed cover file: {exc}") from exc
    try:
        return PiecewiseAffineCover.make(members, support)
    except MomstratError as exc:
        raise ParseError(f"invalid cover: {exc}") from exc


def cover_to_json(c: PiecewiseAffineCover) -> dict:
    return {
        "ambient_dim": c.ambient_dim,
        "members": [{"closure_vertices": _mat2j(m.closure_vertices)} for m in c.members],
        "support_closure": [
            {"vertices": _mat2j(mat(sorted(set(_poly_vertex_set(p)))))} for p in c.support_closure
        ],
    }


def _poly_vertex_set(p: HPolytope):
    from .polyhedron import vertices

    return [tuple(v) for v in vertices(p)]


def parse_input_file(raw: bytes):
    """Dispatch on content: toric spec or cover file."""
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object")
    if "subtorus_matrix" in data:
        return parse_toric_spec(data)
    if "members" in data:
        return parse_cover(data)
    raise ParseError("input is neither a toric spec nor a cover file")


# ---------------------------------------------------------------------------
# stratification files


@dataclass(frozen=True)
class StratificationDocument:
    stratification: Stratification
    densities: tuple[tuple[int, DensityPoly], ...]  # (stratum id, poly), sorted
    provenance: tuple[tuple[str, str], ...]  # sorted key/value pairs

    def density_for(self, stratum_id: int) -> DensityPoly | None:
        for sid, poly in self.densities:
            if sid == stratum_id:
                return poly
        return None


def make_document(
    s: Stratification,
    densities: dict[int, DensityPoly] | None = None,
    raw_input: bytes = b"",
    extra_provenance: dict[str, str] | None = None,
) -> StratificationDocument:
    entries = {
        "input_sha256": input_hash(raw_input),
        "tool_version": __version__,
    }
    entries.update(extra_provenance or {})
    dens = tuple(sorted((densities or {}).items()))
    return StratificationDocument(s, dens, tuple(sorted(entries.items())))


def _subspace2j(s: AffineSubspace) -> dict:
    return {
        "ambient_dim": s.ambient_dim,
        "base": _vec2j(s.base),
        "directions": _mat2j(s.directions),
    }


def _j2subspace(data) -> AffineSubspace:
    return AffineSubspace(_j2vec(data["base"]), _j2mat(data["directions"]), int(data["ambient_dim"]))


def _cell2j(c: RelOpenCell) -> dict:
    return {
        "carrier": _subspace2j(c.carrier),
        "inequalities": {"A": _mat2j(c.closed_A), "b": _vec2j(c.closed_b)},
        "excluded_faces": [list(f) for f in c.excluded_faces],
        "closure_vertices": _mat2j(c.closure_vertices),
    }


def _j2cell(data) -> RelOpenCell:
    return RelOpenCell(
        _j2subspace(data["carrier"]),
        _j2mat(data["inequalities"]["A"]),
        _j2vec(data["inequalities"]["b"]),
        tuple(tuple(int(i) for i in f) for f in data["excluded_faces"]),
        _j2mat(data["closure_vertices"]),
    )


def _density2j(poly: DensityPoly) -> dict:
    return {
        "stratum_id": poly.stratum_id,
        "degree": poly.degree,
        "coefficients": [
            {"exponents": list(e), "value": _f2s(c)} for e, c in poly.coefficients
        ],
    }


def _j2density(data) -> DensityPoly:
    return DensityPoly(
        int(data["stratum_id"]),
        tuple(
            (tuple(int(i) for i in item["exponents"]), frac(item["value"]))
            for item in data["coefficients"]
        ),
        int(data["degree"]),
    )


def document_to_json(doc: StratificationDocument) -> dict:
    s = doc.stratification
    strata = []
    for st in s.strata:
        entry = {
            "id": st.id,
            "dim": st.dim,
            "direction": _mat2j(st.direction),
            "carrier": _subspace2j(st.carrier),
            "cells": [_cell2j(c) for c in st.cells],
            "adjacency": [list(e) for e in st.adjacency],
        }
        if st.integer_direction is not None:
            entry["integer_direction"] = [[int(x) for x in row] for row in st.integer_direction]
        poly = doc.density_for(st.id)
        if poly is not None:
            entry["density"] = _density2j(poly)
        strata.append(entry)
    return {
        "schema": SCHEMA_STRATIFICATION,
        "ambient_dim": s.ambient_dim,
        "strata": strata,
        "frontier": [list(p) for p in s.frontier],
        "provenance": dict(doc.provenance),
    }


def parse_document(raw: bytes) -> StratificationDocument:
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if data.get("schema") != SCHEMA_STRATIFICATION:
        raise ParseError("unknown or missing stratification schema")
    try:
        strata = []
        densities = {}
        for entry in data["strata"]:
            integer_direction = None
            if "integer_direction" in entry:
                integer_direction = _j2mat(entry["integer_direction"])
            st = Stratum(
                int(entry["id"]),
                _j2mat(entry["direction"]),
                _j2subspace(entry["carrier"]),
                tuple(_j2cell(c) for c in entry["cells"]),
                int(entry["dim"]),
                tuple(tuple(int(i) for i in e) for e in entry["adjacency"]),
                integer_direction,
            )
            strata.append(st)
            if "density" in entry:
                densities[st.id] = _j2density(entry["density"])
        s = Stratification(
            tuple(strata),
            tuple(tuple(int(i) for i in p) for p in data["frontier"]),
            int(data["ambient_dim"]),
        )
        prov = tuple(sorted((str(k), str(v)) for k, v in data["provenance"].items()))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed stratification file: {exc}") from exc
    return StratificationDocument(s, tuple(sorted(densities.items())), prov)


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def serialize_document(doc: StratificationDocument) -> str:
    return dumps(document_to_json(doc))


def validation_report_to_json(report: ValidationReport) -> dict:
    return {
        "valid": report.valid,
        "members": [
            {
                "index": r.member_index,
                "affine_open": r.affine_open,
                "closure_covered": r.closure_covered,
                "covering_members": list(r.covering_members),
                "uncovered_witness": _vec2j(r.uncovered_witness) if r.uncovered_witness else None,
            }
            for r in report.member_reports
        ],
    }
