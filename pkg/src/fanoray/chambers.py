"""Dual-side checks: nef cones, boundary facet patching, chamber graphs.

The nef cone is the dual of the ray cone; each ray supports one facet.
The patching check re-states the exhaustion criterion on the dual side:
the facet cut out by a ray, read in the contraction's divisor chart, must
coincide with the dual of that ray's target edge set, and the facets must
meet pairwise along honest codimension-two faces.  Chamber graphs are
transcribed adjacency data, validated and emitted as deterministic DOT.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .cone import Cone, ConeError, _ivec_dot
from .exhaustion import TargetEntry
from .model import (FLOP_TYPES, ChamberSpec, FanoRecord, Finding)
from .rational import QVec, solve_linear


class ChamberError(ValueError):
    pass


def nef_cone(record: FanoRecord,
             candidate_labels: Optional[Sequence[str]] = None) -> Cone:
    """Dual of the ray cone; requires a pointed, full-dimensional input."""
    cone = record.ray_cone(candidate_labels)
    if not cone.is_pointed().pointed:
        raise ChamberError(
            f"{record.record_id.render()}: ray cone is not pointed")
    if not cone.is_full_dimensional():
        raise ChamberError(
            f"{record.record_id.render()}: ray cone has rank {cone.rank()} "
            f"< {record.rho}, nef cone would not be pointed")
    return cone.dual()


def facet_patch_check(record: FanoRecord,
                      targets: Mapping[str, TargetEntry],
                      candidate_labels: Optional[Sequence[str]] = None
                      ) -> list[Finding]:
    """Boundary-patching audit of the nef cone.

    For each candidate ray with a descriptor: the generators of the facet
    it cuts out of the nef cone, written in the pullback chart, must
    generate exactly the dual of its target edge set (mutual membership).
    Separately,
    every codimension-two face of the nef cone must lie in exactly two
    facets.  Findings mirror exhaustion failures: a candidate set missing
    a ray leaves some facet strictly larger than the dual it should match.
    """
    labels = list(candidate_labels) if candidate_labels is not None \
        else record.ray_labels()
    findings: list[Finding] = []
    amp = nef_cone(record, labels)

    for lab in labels:
        ray = record.ray(lab)
        if ray.contraction is None or lab not in targets:
            continue
        pullback = ray.contraction.pullback
        wall = [w for w in amp.generators
                if _ivec_dot(w, ray.vec.entries) == 0]
        chart_wall = []
        for w in wall:
            solved = solve_linear(pullback, QVec(w))
            if solved is None:
                findings.append(Finding(
                    "facet-patch", f"rays.{lab}",
                    f"facet generator {w} is outside the pullback chart"))
                continue
            chart_wall.append(solved[0])
        dual_target = Cone(record.rho - 1,
                           list(targets[lab].edges)).dual()
        for w in chart_wall:
            if not dual_target.contains(w):
                findings.append(Finding(
                    "facet-patch", f"rays.{lab}",
                    f"facet of the nef cone on {lab}'s wall is strictly "
                    f"larger than the dual of its target edges: witness "
                    f"({', '.join(w.to_strings())})"))
        if chart_wall:
            chart_cone = Cone(record.rho - 1, chart_wall)
            for e in dual_target.generators:
                if not chart_cone.contains(e):
                    findings.append(Finding(
                        "facet-patch", f"rays.{lab}",
                        f"dual of target edges exceeds the facet on {lab}'s "
                        f"wall: witness {e}"))

    try:
        amp.codim2_faces()
    except ConeError as exc:
        findings.append(Finding("facet-patch", "codim2", str(exc)))
    return findings


# ---------------------------------------------------------------------------
# Chamber graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChamberGraph:
    nodes: tuple[tuple[str, str], ...]        # (id, label), sorted by id
    edges: tuple[tuple[str, str, str], ...]   # (from, to, flop_type)


def chamber_graph(record: FanoRecord,
                  adjacency: Optional[ChamberSpec] = None) -> ChamberGraph:
    """Validated chamber graph from transcribed adjacency data."""
    spec = adjacency if adjacency is not None else record.chambers
    if spec is None:
        raise ChamberError(
            f"{record.record_id.render()} carries no chamber data")
    ids = [n.node_id for n in spec.nodes]
    if len(set(ids)) != len(ids):
        raise ChamberError("duplicate chamber ids")
    known = set(ids)
    for e in spec.edges:
        if e.flop_type not in FLOP_TYPES:
            raise ChamberError(f"illegal flop type {e.flop_type!r}")
        if e.src not in known or e.dst not in known:
            raise ChamberError(f"edge {e.src}--{e.dst} references unknown "
                               f"chamber")
        if e.src == e.dst:
            raise ChamberError(f"self-loop at {e.src}")
    nodes = tuple(sorted((n.node_id, n.label) for n in spec.nodes))
    edges = tuple(sorted((e.src, e.dst, e.flop_type) for e in spec.edges))
    return ChamberGraph(nodes, edges)


def emit_dot(graph: ChamberGraph) -> str:
    """Deterministic Graphviz text: nodes sorted by id, edges by (from, to)."""
    lines = ["graph {"]
    for node_id, label in graph.nodes:
        lines.append(f'  "{node_id}" [label="{label}"];')
    for src, dst, flop_type in graph.edges:
        lines.append(f'  "{src}" -- "{dst}" [label="{flop_type}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
