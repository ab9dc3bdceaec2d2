"""Resistor-network construction and nodal analysis for drawn trace patterns.

A pattern's conductors are split at their junctions into resistive edges
(segment pieces and ring arcs), the terminal bars collapse to single nodes,
the load resistor returns to ground, and the node-potential system is solved
with the source bar pinned at the supply voltage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .config import ExperimentSpec
from .geometry import (
    DEFAULT_BARS,
    MERGE_TOL,
    MIDLINE_Y,
    Bar,
    Conductor,
    Junction,
    Pattern,
    Ring,
    Segment,
    ShapeKind,
    WORKSPACE_W,
    find_junctions,
    fuse_collinear,
    nearest_point_on,
    shape_geometry,
)

OBSTACLE_POINT = (WORKSPACE_W / 2.0, MIDLINE_Y)


class NetlistError(ValueError):
    """Raised when conductor splitting produces a degenerate edge."""


class NumericalError(RuntimeError):
    """Raised when a linear solve or factorization fails its residual check."""


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    ohms: float


@dataclass(frozen=True)
class Terminals:
    source: int
    load: int
    ground: int
    obstacle: int | None = None


@dataclass
class CircuitGraph:
    """Resistive multigraph with node positions kept for reporting."""

    positions: dict[int, tuple[float, float] | None]
    edges: list[Edge]
    terminals: Terminals

    def validate(self):
        for e in self.edges:
            if e.ohms <= 0.0:
                raise NetlistError(f"edge {e.a}-{e.b} has non-positive resistance {e.ohms}")
            if e.a == e.b:
                raise NetlistError(f"self-loop edge at node {e.a}")


@dataclass
class SolveResult:
    node_potentials: dict[int, float]
    branch_currents: list[float]  # aligned with graph.edges, positive a -> b
    load_voltage: float
    connected: bool
    max_kcl_residual: float = 0.0


def obstacle_contact(pattern: Pattern) -> bool:
    """Whether the drawn pattern touches the mid-workspace obstacle bar.

    Contact happens when the second shape sits at or right of its nominal
    center (x1 >= 0), the fourth at or left of its nominal center (x3 <= 0),
    or the middle shape is a circle. Boundary offsets of exactly 0 count.
    """
    x1, _, x3 = pattern.offsets
    return x1 >= 0.0 or x3 <= 0.0 or pattern.shapes[2] is ShapeKind.CIRCLE


def _split_segment(
    seg: Segment, hits: list[tuple[int, tuple[float, float]]], fresh, tol: float
) -> list[Edge]:
    """Edges for one segment split at its junctions; free ends get fresh nodes."""
    length = seg.length
    params = sorted(((seg.param_of(pos), node) for node, pos in hits), key=lambda t: t[0])
    entries: list[tuple[float, int]] = []
    for t, node in params:
        if entries and (t - entries[-1][0]) * length <= tol:
            continue  # coincident along the segment; junction clustering should prevent this
        entries.append((t, node))
    if not entries:
        a = fresh(seg.point_at(0.0))
        b = fresh(seg.point_at(1.0))
        return [Edge(a, b, seg.resistivity * length)]
    edges = []
    t0, first = entries[0]
    if t0 * length > tol:
        edges.append(Edge(fresh(seg.point_at(0.0)), first, seg.resistivity * t0 * length))
    for (ta, na), (tb, nb) in zip(entries, entries[1:]):
        if na == nb:
            continue  # piece between two merged nodes carries no current
        edges.append(Edge(na, nb, seg.resistivity * (tb - ta) * length))
    t1, last = entries[-1]
    if (1.0 - t1) * length > tol:
        edges.append(Edge(last, fresh(seg.point_at(1.0)), seg.resistivity * (1.0 - t1) * length))
    return edges


def _split_ring(ring: Ring, hits: list[tuple[int, tuple[float, float]]]) -> list[Edge]:
    """Arc edges between consecutive junction angles; wraps around the ring.

    A ring touched at fewer than two points carries no current and yields
    nothing (a dangling loop is electrically inert).
    """
    if len(hits) < 2:
        return []
    by_angle = sorted(((ring.angle_of(pos), node) for node, pos in hits), key=lambda t: t[0])
    edges = []
    two_pi = 2.0 * math.pi
    for k in range(len(by_angle)):
        a_ang, a_node = by_angle[k]
        b_ang, b_node = by_angle[(k + 1) % len(by_angle)]
        dtheta = (b_ang - a_ang) % two_pi
        if k == len(by_angle) - 1:
            dtheta = (b_ang + two_pi - a_ang) % two_pi or two_pi
        if a_node == b_node:
            continue  # merged junction seen twice; skip the degenerate arc
        edges.append(Edge(a_node, b_node, ring.resistivity * ring.radius * dtheta))
    return edges


def build_netlist(
    conductors: list[Conductor],
    junctions: list[Junction],
    experiment: ExperimentSpec,
    *,
    touches_obstacle: bool = False,
    bars: tuple[Bar, Bar] = DEFAULT_BARS,
    tol: float = MERGE_TOL,
) -> CircuitGraph:
    """Assemble the resistor network for a set of conductors and junctions.

    ``junctions`` must come from find_junctions on the same conductor list
    (members index the fused conductors). All junctions on a bar merge into
    that bar's terminal node. When ``touches_obstacle`` and the experiment has
    an obstacle, the shunt attaches at the conductor point nearest the
    workspace center, splitting the trace there. Degree-1 chains that reach no
    terminal are pruned.
    """
    fused = fuse_collinear(conductors, tol)
    juncs = list(junctions)

    obstacle_junction: int | None = None
    if touches_obstacle and experiment.has_obstacle and fused:
        best = None
        for ci, cond in enumerate(fused):
            p, d = nearest_point_on(cond, OBSTACLE_POINT)
            if best is None or d < best[0] - 1e-12:
                best = (d, ci, p)
        _, ci, p = best
        for ji, j in enumerate(juncs):
            if math.dist(j.position, p) <= tol:
                juncs[ji] = Junction(j.position, j.members | {("obstacle",)})
                obstacle_junction = ji
                break
        else:
            juncs.append(Junction(p, frozenset({("trace", ci), ("obstacle",)})))
            obstacle_junction = len(juncs) - 1

    # node ids: one per junction, unified across each bar, then fresh ids
    node_of = list(range(len(juncs)))

    def root(i: int) -> int:
        while node_of[i] != i:
            node_of[i] = node_of[node_of[i]]
            i = node_of[i]
        return i

    for bi in range(len(bars)):
        on_bar = [i for i, j in enumerate(juncs) if ("bar", bi) in j.members]
        for i in on_bar[1:]:
            node_of[root(i)] = root(on_bar[0])

    positions: dict[int, tuple[float, float] | None] = {}
    for i, j in enumerate(juncs):
        positions.setdefault(root(i), j.position)

    next_id = len(juncs)

    def fresh(pos):
        nonlocal next_id
        node = next_id
        next_id += 1
        positions[node] = pos
        return node

    edges: list[Edge] = []
    for ci, cond in enumerate(fused):
        hits = [
            (root(i), j.position)
            for i, j in enumerate(juncs)
            if ("trace", ci) in j.members
        ]
        if isinstance(cond, Segment):
            edges.extend(_split_segment(cond, hits, fresh, tol))
        else:
            edges.extend(_split_ring(cond, hits))

    def bar_node(bi: int) -> int:
        for i, j in enumerate(juncs):
            if ("bar", bi) in j.members:
                return root(i)
        return fresh((bars[bi].x, (bars[bi].y_min + bars[bi].y_max) / 2.0))

    source = bar_node(0)
    load = bar_node(1)
    ground = fresh(None)
    positions[ground] = None
    edges.append(Edge(load, ground, experiment.load_ohms))

    obstacle_node = None
    if obstacle_junction is not None:
        obstacle_node = root(obstacle_junction)
        edges.append(Edge(obstacle_node, ground, experiment.obstacle_ohms))

    graph = CircuitGraph(
        positions=positions,
        edges=edges,
        terminals=Terminals(source, load, ground, obstacle_node),
    )
    graph.validate()
    _prune_dead_ends(graph)
    return graph


def _prune_dead_ends(graph: CircuitGraph):
    """Drop degree<=1 non-terminal nodes (and their edges) until none remain."""
    keep = {graph.terminals.source, graph.terminals.load, graph.terminals.ground}
    if graph.terminals.obstacle is not None:
        keep.add(graph.terminals.obstacle)
    while True:
        degree: dict[int, int] = {n: 0 for n in graph.positions}
        for e in graph.edges:
            degree[e.a] += 1
            degree[e.b] += 1
        drop = {n for n, d in degree.items() if d <= 1 and n not in keep}
        if not drop:
            break
        graph.edges = [e for e in graph.edges if e.a not in drop and e.b not in drop]
        for n in drop:
            del graph.positions[n]


def _reachable(adj: dict[int, set[int]], start: set[int], skip: set[int] = frozenset()) -> set[int]:
    seen = set(start)
    stack = [n for n in start if n not in skip]
    while stack:
        n = stack.pop()
        for m in adj.get(n, ()):
            if m not in seen:
                seen.add(m)
                if m not in skip:
                    stack.append(m)
    return seen


def solve_network(graph: CircuitGraph, source_volts: float) -> SolveResult:
    """Node potentials and branch currents with the source bar pinned.

    Ground is the reference (0 V); the source node is fixed at source_volts.
    Nodes in components touching neither are left at 0 V (they carry no
    current). ``connected`` reports whether a conductive path joins source and
    load without passing through ground (i.e. through the drawn pattern, not
    through the return resistors).
    """
    graph.validate()
    t = graph.terminals
    nodes = sorted(graph.positions)
    index = {n: k for k, n in enumerate(nodes)}
    n = len(nodes)

    adj: dict[int, set[int]] = {m: set() for m in nodes}
    for e in graph.edges:
        adj[e.a].add(e.b)
        adj[e.b].add(e.a)

    connected = t.load in _reachable(adj, {t.source}, skip={t.ground})

    lap = np.zeros((n, n))
    for e in graph.edges:
        g = 1.0 / e.ohms
        ia, ib = index[e.a], index[e.b]
        lap[ia, ia] += g
        lap[ib, ib] += g
        lap[ia, ib] -= g
        lap[ib, ia] -= g

    live = _reachable(adj, {t.source, t.ground})
    unknown = [m for m in nodes if m in live and m not in (t.source, t.ground)]
    potentials = {m: 0.0 for m in nodes}
    potentials[t.source] = source_volts

    if unknown:
        rows = [index[m] for m in unknown]
        a_mat = lap[np.ix_(rows, rows)]
        rhs = -lap[np.ix_(rows, [index[t.source]])].ravel() * source_volts
        try:
            factor = cho_factor(a_mat, lower=True, check_finite=False)
            x = cho_solve(factor, rhs, check_finite=False)
        except LinAlgError as exc:
            raise NumericalError(f"node-potential system not SPD: {exc}") from exc
        residual = np.abs(a_mat @ x - rhs).max()
        if residual > 1e-9:
            x = x + cho_solve(factor, rhs - a_mat @ x, check_finite=False)
            residual = np.abs(a_mat @ x - rhs).max()
        if residual > 1e-9:
            raise NumericalError(f"linear solve residual {residual:.3e} A exceeds 1e-9")
        for m, v in zip(unknown, x):
            potentials[m] = float(v)

    currents = [
        (potentials[e.a] - potentials[e.b]) / e.ohms for e in graph.edges
    ]
    net = {m: 0.0 for m in nodes}
    for e, i_e in zip(graph.edges, currents):
        net[e.a] -= i_e
        net[e.b] += i_e
    interior = [abs(net[m]) for m in nodes if m not in (t.source, t.ground)]
    max_residual = max(interior, default=0.0)

    if connected:
        load_voltage = min(max(potentials[t.load], 0.0), source_volts)
    else:
        load_voltage = 0.0
    return SolveResult(potentials, currents, load_voltage, connected, max_residual)


def build_pattern_network(
    pattern: Pattern, experiment: ExperimentSpec
) -> tuple[list[Conductor], list[Junction], CircuitGraph]:
    """Geometry -> junctions -> netlist for one pattern under one experiment."""
    conductors = fuse_collinear(shape_geometry(pattern))
    junctions = find_junctions(conductors)
    graph = build_netlist(
        conductors,
        junctions,
        experiment,
        touches_obstacle=experiment.has_obstacle and obstacle_contact(pattern),
    )
    return conductors, junctions, graph


def load_voltage(pattern: Pattern, experiment: ExperimentSpec) -> float:
    """Voltage across the load resistor for a drawn pattern (deterministic)."""
    _, _, graph = build_pattern_network(pattern, experiment)
    return solve_network(graph, experiment.source_volts).load_voltage


def connection_resistance(volts: float, experiment: ExperimentSpec) -> float:
    """Source-to-load resistance implied by the voltage divider; inf when open."""
    if volts <= 0.0:
        return math.inf
    return experiment.load_ohms * (experiment.source_volts - volts) / volts
