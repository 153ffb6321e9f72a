"""Power-grid model, regularized susceptance matrix and DC power flow."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    kind: str  # "generator" or "load"
    p_min: float = 0.0
    p_max: float = 0.0
    demand: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("generator", "load"):
            raise GridError(f"node {self.id}: unknown kind {self.kind!r}")
        if self.kind == "generator" and not 0 < self.p_min <= self.p_max:
            raise GridError(f"node {self.id}: need 0 < p_min <= p_max")
        if self.kind == "load":
            object.__setattr__(self, "demand", tuple(float(d) for d in self.demand))
            if any(d < 0 for d in self.demand):
                raise GridError(f"node {self.id}: negative demand")


@dataclass(frozen=True)
class Line:
    a: str
    b: str
    susceptance: float
    tariff: float = 0.0

    def __post_init__(self):
        if self.a == self.b:
            raise GridError(f"line {self.a}-{self.b}: endpoints must differ")
        if not self.susceptance > 0:
            raise GridError(f"line {self.a}-{self.b}: susceptance must be positive")


@dataclass(frozen=True)
class Grid:
    nodes: tuple[Node, ...]
    lines: tuple[Line, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "lines", tuple(self.lines))
        ids = [nd.id for nd in self.nodes]
        if len(set(ids)) != len(ids):
            raise GridError("duplicate node ids")
        if not self.generators or not self.loads:
            raise GridError("grid needs at least one generator and one load")
        known = set(ids)
        pairs = set()
        for ln in self.lines:
            if ln.a not in known or ln.b not in known:
                raise GridError(f"line {ln.a}-{ln.b} references an unknown node")
            key = frozenset((ln.a, ln.b))
            if key in pairs:
                raise GridError(f"more than one line between {ln.a} and {ln.b}")
            pairs.add(key)
        if not self.is_connected():
            raise GridError("grid is disconnected")

    @property
    def generators(self) -> list[Node]:
        return [nd for nd in self.nodes if nd.kind == "generator"]

    @property
    def loads(self) -> list[Node]:
        return [nd for nd in self.nodes if nd.kind == "load"]

    def node(self, node_id: str) -> Node:
        for nd in self.nodes:
            if nd.id == node_id:
                return nd
        raise KeyError(node_id)

    def degree(self, node_id: str) -> int:
        return sum(node_id in (ln.a, ln.b) for ln in self.lines)

    def is_connected(self) -> bool:
        adj: dict[str, list[str]] = {nd.id: [] for nd in self.nodes}
        for ln in self.lines:
            adj[ln.a].append(ln.b)
            adj[ln.b].append(ln.a)
        start = self.nodes[0].id
        seen = {start}
        todo = deque([start])
        while todo:
            for nb in adj[todo.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    todo.append(nb)
        return len(seen) == len(self.nodes)

    def demand(self, t: int) -> float:
        return float(sum(ld.demand[t] for ld in self.loads))

    @classmethod
    def from_dict(cls, data: Mapping) -> Grid:
        nodes = []
        for rec in data["nodes"]:
            if rec["kind"] == "generator":
                nodes.append(Node(rec["id"], "generator", float(rec["p_min"]), float(rec["p_max"])))
            else:
                nodes.append(Node(rec["id"], "load", demand=tuple(rec.get("demand", ()))))
        lines = [
            Line(rec["a"], rec["b"], float(rec["susceptance"]), float(rec.get("tariff", 0.0)))
            for rec in data["lines"]
        ]
        return cls(tuple(nodes), tuple(lines))

    def to_dict(self) -> dict:
        nodes = []
        for nd in self.nodes:
            if nd.kind == "generator":
                nodes.append({"id": nd.id, "kind": nd.kind, "p_min": nd.p_min, "p_max": nd.p_max})
            else:
                nodes.append({"id": nd.id, "kind": nd.kind, "demand": list(nd.demand)})
        lines = [
            {"a": ln.a, "b": ln.b, "susceptance": ln.susceptance, "tariff": ln.tariff}
            for ln in self.lines
        ]
        return {"nodes": nodes, "lines": lines}


@dataclass(frozen=True, eq=False)
class BMatrix:
    """Susceptance matrix in ``order`` (generators by descending P_max, then loads).

    ``laplacian`` is the singular matrix before the slack shift; ``matrix`` has
    ``avg_susceptance`` added to the slack diagonal.
    """

    grid: Grid
    order: tuple[str, ...]
    laplacian: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    slack_index: int
    avg_susceptance: float

    def position(self, node_id: str) -> int:
        return self.order.index(node_id)


@dataclass(frozen=True, eq=False)
class FlowSolution:
    theta: np.ndarray  # in bmat.order
    line_flows: np.ndarray  # per grid line, oriented a -> b
    trans_costs: np.ndarray  # per grid line, tariff * |flow|
    injections: np.ndarray  # in bmat.order, after masking inactive generators


def node_order(grid: Grid) -> list[str]:
    gens = sorted(grid.generators, key=lambda nd: -nd.p_max)  # stable on ties
    return [nd.id for nd in gens] + [nd.id for nd in grid.loads]


def build_b_matrix(grid: Grid) -> BMatrix:
    if not grid.is_connected():
        raise GridError("grid is disconnected")
    order = node_order(grid)
    pos = {nid: k for k, nid in enumerate(order)}
    n = len(order)
    lap = np.zeros((n, n))
    for ln in grid.lines:
        i, j = pos[ln.a], pos[ln.b]
        lap[i, j] -= ln.susceptance
        lap[j, i] -= ln.susceptance
        lap[i, i] += ln.susceptance
        lap[j, j] += ln.susceptance
    degrees = [grid.degree(nid) for nid in order]
    slack = max(range(n), key=lambda k: (degrees[k], -k))
    avg = float(np.mean([ln.susceptance for ln in grid.lines]))
    mat = lap.copy()
    mat[slack, slack] += avg
    lap.setflags(write=False)
    mat.setflags(write=False)
    return BMatrix(grid, tuple(order), lap, mat, slack, avg)


def injection_vector(
    bmat: BMatrix, gen_powers: Sequence[float], t: int, active: Sequence[int] | None = None
) -> np.ndarray:
    """Nodal injections in ``bmat.order``: generator outputs (grid generator
    order) masked by ``active``, loads as negative demand at timestep ``t``."""
    grid = bmat.grid
    gens = grid.generators
    if len(gen_powers) != len(gens):
        raise GridError("one power value per generator expected")
    if active is None:
        active = [1] * len(gens)
    p = np.zeros(len(bmat.order))
    for g, pw, on in zip(gens, gen_powers, active):
        p[bmat.position(g.id)] = float(pw) if on else 0.0
    for ld in grid.loads:
        p[bmat.position(ld.id)] = -ld.demand[t]
    return p


def solve_dcpf(
    bmat: BMatrix, injections: Sequence[float], active: Sequence[int] | None = None
) -> FlowSolution:
    """Solve B theta = p; ``active`` (grid generator order) zeroes generator entries."""
    grid = bmat.grid
    p = np.array(injections, dtype=float)
    if p.shape != (len(bmat.order),):
        raise GridError("injection vector does not match the node count")
    if active is not None:
        gens = grid.generators
        if len(active) != len(gens):
            raise GridError("one active bit per generator expected")
        for g, on in zip(gens, active):
            if not on:
                p[bmat.position(g.id)] = 0.0
    try:
        theta = np.linalg.solve(bmat.matrix, p)
    except np.linalg.LinAlgError as exc:
        raise GridError("susceptance matrix is singular") from exc
    flows = np.array(
        [
            ln.susceptance * (theta[bmat.position(ln.a)] - theta[bmat.position(ln.b)])
            for ln in grid.lines
        ]
    )
    costs = np.array([ln.tariff for ln in grid.lines]) * np.abs(flows)
    return FlowSolution(theta, flows, costs, p)


def transmission_cost_total(flow: FlowSolution) -> float:
    return float(np.sum(flow.trans_costs))
