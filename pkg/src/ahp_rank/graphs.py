"""Availability and dominance graphs of an incomplete comparison matrix.

The undirected availability graph has an edge per compared pair and carries
the Laplacian used by the least-squares solvers. The directed dominance graph
orients each compared pair toward the weakly preferred alternative and is the
object whose cycle structure decides between the certified fast path and the
exact ordinal solver.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import CycleExplosionError
from .pcm import IncompletePCM, _frozen_array

DEFAULT_CYCLE_CAP = 100_000


@dataclass(frozen=True)
class ComparisonGraph:
    """Undirected availability graph with Laplacian and log-ratio matrix."""

    n: int
    edges: tuple[tuple[int, int], ...]  # unordered pairs, i < j
    degree: np.ndarray
    laplacian: np.ndarray
    log_matrix: np.ndarray  # ln(ratio) on present entries, 0 elsewhere

    def __post_init__(self) -> None:
        object.__setattr__(self, "degree", np.asarray(self.degree, dtype=int))
        object.__setattr__(self, "laplacian", np.asarray(self.laplacian, dtype=float))
        object.__setattr__(self, "log_matrix", _frozen_array(self.log_matrix))

    @property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = True
        return adj

    def row_log_sums(self) -> np.ndarray:
        """Per-node sum of log-ratios over its neighbors."""
        return self.log_matrix.sum(axis=1)


@dataclass(frozen=True)
class DominanceGraph:
    """One directed edge per compared pair, oriented toward ratio >= 1.

    Tie pairs (ratio exactly 1) contribute the single orientation
    low-index -> high-index and are recorded in ``tie_pairs``.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: dict[tuple[int, int], float] = field(repr=False)
    tie_pairs: frozenset[tuple[int, int]] = frozenset()


@dataclass(frozen=True)
class Cycle:
    """An elementary directed cycle annotated with its minimum edge ratio."""

    edges: tuple[tuple[int, int], ...]
    min_weight: float
    min_multiplicity: int

    @property
    def ambiguous(self) -> bool:
        return self.min_multiplicity > 1

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.edges)


@dataclass(frozen=True)
class UniquenessReport:
    eligible: bool
    reasons: tuple[str, ...] = ()


def build_graphs(pcm: IncompletePCM) -> tuple[ComparisonGraph, DominanceGraph]:
    """Construct both graph views of a validated matrix."""
    n = pcm.n
    a = pcm.entries
    mask = pcm.present
    edges = tuple(pcm.edges())
    degree = mask.sum(axis=1).astype(int)
    laplacian = np.diag(degree).astype(float) - mask.astype(float)
    log_matrix = np.where(mask, np.log(np.where(mask, a, 1.0)), 0.0)

    directed: list[tuple[int, int]] = []
    weights: dict[tuple[int, int], float] = {}
    ties: set[tuple[int, int]] = set()
    for i, j in edges:
        if a[i, j] == 1.0:
            directed.append((i, j))  # deterministic tie orientation
            weights[(i, j)] = 1.0
            ties.add((i, j))
        elif a[i, j] > 1.0:
            directed.append((i, j))
            weights[(i, j)] = float(a[i, j])
        else:
            directed.append((j, i))
            weights[(j, i)] = float(a[j, i])
    gd = DominanceGraph(n=n, edges=tuple(directed), weights=weights, tie_pairs=frozenset(ties))
    g = ComparisonGraph(n=n, edges=edges, degree=degree, laplacian=laplacian, log_matrix=log_matrix)
    return g, gd


def is_connected(g: ComparisonGraph) -> bool:
    """Breadth-first reachability from node 0."""
    if g.n == 0:
        return True
    adj = defaultdict(list)
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return len(seen) == g.n


def density(g: ComparisonGraph) -> float:
    """Fraction of compared pairs: 2|E| / (n(n-1))."""
    if g.n < 2:
        raise ValueError("density needs at least two nodes")
    return 2.0 * len(g.edges) / (g.n * (g.n - 1))


def _johnson_cycles(n: int, adj: dict[int, list[int]], cap: int) -> list[list[int]]:
    """Elementary circuits of a digraph; each cycle starts at its smallest node."""
    cycles: list[list[int]] = []

    for start in range(n):
        # Restrict to nodes >= start so each cycle is found exactly once,
        # rooted at its minimum node.
        sub = {u: sorted(v for v in adj.get(u, ()) if v >= start) for u in range(start, n)}
        blocked: set[int] = set()
        b: dict[int, set[int]] = defaultdict(set)
        path = [start]
        blocked.add(start)
        stack = [iter(sub.get(start, ()))]
        closed = [False]

        def unblock(u: int) -> None:
            pending = {u}
            while pending:
                v = pending.pop()
                if v in blocked:
                    blocked.remove(v)
                    pending.update(b[v])
                    b[v].clear()

        while stack:
            advanced = False
            for w in stack[-1]:
                if w == start:
                    cycles.append(path.copy())
                    if len(cycles) > cap:
                        raise CycleExplosionError(cap)
                    closed[-1] = True
                elif w not in blocked:
                    path.append(w)
                    blocked.add(w)
                    stack.append(iter(sub.get(w, ())))
                    closed.append(False)
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                v = path.pop()
                if closed.pop():
                    if closed:
                        closed[-1] = True
                    unblock(v)
                else:
                    for w in sub.get(v, ()):
                        b[w].add(v)
    return cycles


def enumerate_cycles(gd: DominanceGraph, cap: int = DEFAULT_CYCLE_CAP) -> list[Cycle]:
    """All elementary directed cycles, annotated and deterministically ordered.

    Raises :class:`CycleExplosionError` past ``cap`` cycles, signalling that
    callers should route to the exact ordinal solver instead of the fast path.
    """
    adj: dict[int, list[int]] = defaultdict(list)
    for i, j in gd.edges:
        adj[i].append(j)
    node_cycles = _johnson_cycles(gd.n, adj, cap)

    out: list[Cycle] = []
    for nodes in node_cycles:
        edges = tuple(
            (nodes[k], nodes[(k + 1) % len(nodes)]) for k in range(len(nodes))
        )
        ws = [gd.weights[e] for e in edges]
        w_min = min(ws)
        mult = sum(1 for w in ws if w == w_min)
        out.append(Cycle(edges=edges, min_weight=w_min, min_multiplicity=mult))
    out.sort(key=lambda c: (sorted(c.nodes), c.edges))
    return out


def check_uniqueness_conditions(
    gd: DominanceGraph,
    cycles: list[Cycle] | None = None,
    cap: int = DEFAULT_CYCLE_CAP,
) -> UniquenessReport:
    """Fast-path eligibility: no ambiguous cycle and pairwise edge-disjoint cycles."""
    if cycles is None:
        cycles = enumerate_cycles(gd, cap=cap)
    reasons: list[str] = []
    for c in cycles:
        if c.ambiguous:
            reasons.append(
                f"ambiguous cycle through nodes {c.nodes}: minimum ratio "
                f"{c.min_weight:g} appears {c.min_multiplicity} times"
            )
    for a in range(len(cycles)):
        ea = set(cycles[a].edges)
        for b in range(a + 1, len(cycles)):
            shared = ea.intersection(cycles[b].edges)
            if shared:
                reasons.append(
                    f"cycles through {cycles[a].nodes} and {cycles[b].nodes} "
                    f"share edge(s) {sorted(shared)}"
                )
    return UniquenessReport(eligible=not reasons, reasons=tuple(reasons))


def to_dot(pcm: IncompletePCM, g: ComparisonGraph, gd: DominanceGraph) -> str:
    """DOT export of both graphs for documentation figures."""
    lines = ["digraph dominance {"]
    for i in range(gd.n):
        lines.append(f'  {i} [label="{pcm.label(i)}"];')
    for i, j in gd.edges:
        style = ' style=dashed color=gray50' if (i, j) in gd.tie_pairs else ""
        lines.append(f'  {i} -> {j} [label="{gd.weights[(i, j)]:g}"{style}];')
    lines.append("}")
    lines.append("graph availability {")
    for i in range(g.n):
        lines.append(f'  {i} [label="{pcm.label(i)}"];')
    for i, j in g.edges:
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
