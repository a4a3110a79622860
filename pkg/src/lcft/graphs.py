"""Admissible multigraphs encoding pants decompositions.

A vertex has three slots; each slot is used exactly once, either by a linking
edge (an identified boundary circle, possibly a self-loop) or by a phantom
edge attaching a marked point.  With N vertices and L linking edges the genus
is g = L - N + 1, so N = 2g - 2 + m and L = 3g - 3 + m with m marked points.

JSON format (one object):

    {"vertices": [{"id": 1, "slots": 3}, ...],
     "edges":    [{"from": [j, k], "to": [j2, k2], "q": [re, im]}, ...],
     "marked":   [{"vertex": j, "slot": k, "alpha": a}, ...]}

Slots are numbered 1..3.  Edge orientation runs from "from" (outgoing, sign
-1) to "to" (incoming, sign +1); the sign fixes which of Q -/+ ip feeds each
DOZZ factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import GraphInvalid
from .params import CftParams

__all__ = ["EdgeSpec", "MarkedPoint", "AdmissibleGraph", "validate_graph", "Violation"]


@dataclass(frozen=True)
class EdgeSpec:
    v_from: tuple[int, int]  # (vertex id, slot)
    v_to: tuple[int, int]
    q: complex = 0.1 + 0.0j


@dataclass(frozen=True)
class MarkedPoint:
    vertex: int
    slot: int
    alpha: float


@dataclass
class AdmissibleGraph:
    edges: list[EdgeSpec]
    marked: list[MarkedPoint] = field(default_factory=list)
    vertex_ids: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.vertex_ids:
            ids = set()
            for e in self.edges:
                ids.add(e.v_from[0])
                ids.add(e.v_to[0])
            for m in self.marked:
                ids.add(m.vertex)
            self.vertex_ids = sorted(ids)

    # -- structure -----------------------------------------------------------

    def check_structure(self) -> None:
        used: dict[tuple[int, int], str] = {}
        for e in self.edges:
            for end in (e.v_from, e.v_to):
                if end in used:
                    raise GraphInvalid(f"slot {end} used more than once")
                if end[1] not in (1, 2, 3):
                    raise GraphInvalid(f"slot index must be 1..3, got {end}")
                used[end] = "edge"
        for m in self.marked:
            end = (m.vertex, m.slot)
            if end in used:
                raise GraphInvalid(f"slot {end} used more than once")
            used[end] = "mark"
        for vid in self.vertex_ids:
            n_used = sum(1 for (v, _k) in used if v == vid)
            if n_used != 3:
                raise GraphInvalid(f"vertex {vid} uses {n_used} slots, need exactly 3")
        if self.genus() < 0:
            raise GraphInvalid(f"negative genus L - N + 1 = {self.genus()}")
        if not self._connected():
            raise GraphInvalid("graph is not connected")

    def _connected(self) -> bool:
        if not self.vertex_ids:
            return False
        adj: dict[int, set[int]] = {v: set() for v in self.vertex_ids}
        for e in self.edges:
            adj[e.v_from[0]].add(e.v_to[0])
            adj[e.v_to[0]].add(e.v_from[0])
        seen = {self.vertex_ids[0]}
        stack = [self.vertex_ids[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertex_ids)

    def genus(self) -> int:
        return len(self.edges) - len(self.vertex_ids) + 1

    def n_marked(self) -> int:
        return len(self.marked)

    def slot_map(self) -> dict[int, list[tuple[int, str, int]]]:
        """vertex id -> ordered [(slot, 'edge'|'mark', edge index or -1)]."""
        out: dict[int, list[tuple[int, str, int]]] = {v: [] for v in self.vertex_ids}
        for i, e in enumerate(self.edges):
            out[e.v_from[0]].append((e.v_from[1], "edge", i))
            out[e.v_to[0]].append((e.v_to[1], "edge", i))
        for m in self.marked:
            out[m.vertex].append((m.slot, "mark", -1))
        for v in out:
            out[v].sort()
        return out

    def edge_end_of_slot(self, vid: int, slot: int) -> tuple[int, int]:
        """(edge index, end) with end 0 for the outgoing side, 1 for incoming."""
        for i, e in enumerate(self.edges):
            if e.v_from == (vid, slot):
                return i, 0
            if e.v_to == (vid, slot):
                return i, 1
        raise GraphInvalid(f"slot ({vid}, {slot}) is not an edge slot")

    def orientation_sign(self, vid: int, slot: int) -> int:
        _i, end = self.edge_end_of_slot(vid, slot)
        return 1 if end == 1 else -1

    def q_vector(self) -> list[complex]:
        return [e.q for e in self.edges]

    def alphas(self) -> list[float]:
        return [m.alpha for m in self.marked]

    # -- JSON ------------------------------------------------------------------

    @classmethod
    def from_json(cls, obj) -> "AdmissibleGraph":
        if isinstance(obj, str):
            obj = json.loads(obj)
        edges = [
            EdgeSpec(
                v_from=tuple(e["from"]),
                v_to=tuple(e["to"]),
                q=complex(e["q"][0], e["q"][1]) if "q" in e else 0.1 + 0j,
            )
            for e in obj.get("edges", [])
        ]
        marked = [
            MarkedPoint(vertex=m["vertex"], slot=m["slot"], alpha=float(m["alpha"]))
            for m in obj.get("marked", [])
        ]
        ids = [v["id"] for v in obj.get("vertices", [])]
        return cls(edges=edges, marked=marked, vertex_ids=ids)

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": v, "slots": 3} for v in self.vertex_ids],
            "edges": [
                {"from": list(e.v_from), "to": list(e.v_to), "q": [e.q.real, e.q.imag]}
                for e in self.edges
            ],
            "marked": [
                {"vertex": m.vertex, "slot": m.slot, "alpha": m.alpha} for m in self.marked
            ],
        }


@dataclass
class Violation:
    vertex: int
    kind: str
    margin: float

    def __str__(self) -> str:
        return f"vertex {self.vertex}: {self.kind} margin {self.margin:+.6g}"


def validate_graph(graph: AdmissibleGraph, alphas, params: CftParams) -> list[Violation]:
    """Seiberg/spectral admissibility: per-vertex sum(alpha) - (2 - b) Q > 0 and
    every alpha < Q; for closed-surface global data also sum(alpha) + 2Q(g-1) > 0.
    Returns a (possibly empty) list of violations; structural problems raise."""
    graph.check_structure()
    if len(alphas) != len(graph.marked):
        raise GraphInvalid(f"need {len(graph.marked)} alphas, got {len(alphas)}")
    out: list[Violation] = []
    Q = params.Q
    alpha_of = {(m.vertex, m.slot): a for m, a in zip(graph.marked, alphas)}
    slot_map = graph.slot_map()
    for vid in graph.vertex_ids:
        slots = slot_map[vid]
        b = sum(1 for (_k, kind, _e) in slots if kind == "edge")
        a_sum = sum(alpha_of[(vid, k)] for (k, kind, _e) in slots if kind == "mark")
        margin = a_sum - (2 - b) * Q
        if margin <= 0:
            out.append(Violation(vertex=vid, kind="spectral (sum alpha - (2-b)Q > 0)", margin=margin))
    for (vid, _k), a in alpha_of.items():
        if a >= Q:
            out.append(Violation(vertex=vid, kind="Seiberg (alpha < Q)", margin=Q - a))
    total = sum(alphas) + 2.0 * Q * (graph.genus() - 1)
    if total <= 0:
        out.append(Violation(vertex=-1, kind="global Seiberg (sum alpha + 2Q(g-1) > 0)", margin=total))
    return out
