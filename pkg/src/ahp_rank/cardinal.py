"""Logarithmic least squares on the comparison graph, with ordinal constraints.

The unconstrained solve reduces to the Laplacian linear system of the
availability graph after the log substitution. The constrained variant adds a
separation margin ``y_i >= y_j + epsilon`` for every stated preference and is
solved as a strictly convex quadratic program by a primal active-set method
whose multipliers feed a verifiable first-order optimality certificate.

Objective convention: each compared pair is counted once, i.e. the value
reported is half of the sum over both orientations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedError, MaxIterationsError, SingularSystemError
from .graphs import ComparisonGraph, is_connected
from .ordinal import OrdinalPreferenceMatrix
from .pcm import PriorityVector

DEFAULT_EPSILON = 1e-4
CERTIFICATE_TOL = 1e-8


@dataclass(frozen=True)
class LogLSProblem:
    """Constrained log-least-squares instance.

    Each constraint pair ``(i, j)`` encodes ``y_i >= y_j + epsilon`` and must
    correspond to a stated preference of ``i`` over ``j``. The constraint
    digraph is acyclic whenever the preferences form a strict partial order.
    """

    graph: ComparisonGraph
    constraints: tuple[tuple[int, int], ...]
    epsilon: float

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        n = self.graph.n
        for i, j in self.constraints:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"bad constraint pair ({i},{j})")

    @staticmethod
    def from_ordinal(
        graph: ComparisonGraph,
        x: OrdinalPreferenceMatrix,
        epsilon: float = DEFAULT_EPSILON,
    ) -> "LogLSProblem":
        pairs = tuple(
            (i, j) for i in range(x.n) for j in range(x.n) if x.x[i, j]
        )
        return LogLSProblem(graph=graph, constraints=pairs, epsilon=epsilon)


@dataclass(frozen=True)
class KKTCertificate:
    """First-order optimality residuals for a constrained solution."""

    lambda_matrix: np.ndarray
    residual_stationarity: float
    residual_complementarity: float
    primal_feasibility: float

    @property
    def accepted(self) -> bool:
        return (
            self.residual_stationarity <= CERTIFICATE_TOL
            and self.residual_complementarity <= CERTIFICATE_TOL
            and self.primal_feasibility <= CERTIFICATE_TOL
        )


def lls_objective(graph: ComparisonGraph, y: np.ndarray) -> float:
    """Sum of squared log residuals, one term per compared pair."""
    y = np.asarray(y, dtype=float)
    total = 0.0
    for i, j in graph.edges:
        total += (graph.log_matrix[i, j] - y[i] + y[j]) ** 2
    return float(total)


def lls_gradient(graph: ComparisonGraph, y: np.ndarray) -> np.ndarray:
    """Gradient of :func:`lls_objective`: 2 (L y - r)."""
    y = np.asarray(y, dtype=float)
    return 2.0 * (graph.laplacian @ y - graph.row_log_sums())


def solve_ills(graph: ComparisonGraph, gauge: int | None = None) -> PriorityVector:
    """Unconstrained log-least-squares via the reduced Laplacian system.

    One log-weight is pinned to zero (the ``gauge`` index, last by default),
    the remaining symmetric positive-definite system is solved densely, and
    the exponentiated result is renormalized to sum one.
    """
    if not is_connected(graph):
        raise DisconnectedError("the comparison graph must be connected")
    n = graph.n
    g = n - 1 if gauge is None else gauge
    keep = [i for i in range(n) if i != g]
    L = graph.laplacian
    r = graph.row_log_sums()
    try:
        y_red = np.linalg.solve(L[np.ix_(keep, keep)], r[keep])
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by connectivity
        raise SingularSystemError(str(exc)) from None
    y = np.zeros(n)
    y[keep] = y_red
    residual = float(np.max(np.abs(L @ y - r)))
    if residual > 1e-10:
        raise SingularSystemError(f"Laplacian solve residual {residual:.3e} exceeds 1e-10")
    return PriorityVector.from_log_weights(y)


def _feasible_start(y0: np.ndarray, constraints: tuple[tuple[int, int], ...], eps: float) -> np.ndarray:
    """Raise nodes along the constraint order until every margin holds.

    Processes nodes in reverse topological order of the constraint digraph,
    so the warm start stays as close to the unconstrained solution as the
    margins allow.
    """
    n = y0.size
    out_edges: dict[int, list[int]] = {}
    preds: dict[int, list[int]] = {}
    for i, j in constraints:
        out_edges.setdefault(i, []).append(j)
        preds.setdefault(j, []).append(i)
    remaining = [len(out_edges.get(i, ())) for i in range(n)]
    queue = [i for i in range(n) if remaining[i] == 0]  # sinks settle first
    y = y0.copy()
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        lo = max((y[j] + eps for j in out_edges.get(v, ())), default=-math.inf)
        if lo > y[v]:
            y[v] = lo
        for p in preds.get(v, ()):
            remaining[p] -= 1
            if remaining[p] == 0:
                queue.append(p)
    if seen != n:
        raise ValueError("constraint digraph has a cycle; preferences are not a partial order")
    return y


def solve_constrained(
    problem: LogLSProblem,
    gauge: int | None = None,
    max_iter: int | None = None,
) -> tuple[PriorityVector, KKTCertificate]:
    """Minimize the log-least-squares objective under separation constraints.

    Primal active-set iteration warm-started from the unconstrained solution;
    the final working-set multipliers populate the certificate matrix, which
    satisfies stationarity, complementarity and feasibility to within 1e-8.
    """
    graph = problem.graph
    if not is_connected(graph):
        raise DisconnectedError("the comparison graph must be connected")
    n = graph.n
    g = n - 1 if gauge is None else gauge
    keep = [i for i in range(n) if i != g]
    eps = problem.epsilon
    cons = list(problem.constraints)
    m = len(cons)

    ills = solve_ills(graph, gauge=g)
    y = ills.log_weights.copy()
    y = y - y[g]

    H = 2.0 * graph.laplacian[np.ix_(keep, keep)]
    r = graph.row_log_sums()

    # Constraint rows in reduced coordinates: a^T y_red >= eps.
    A_rows = np.zeros((m, n - 1), dtype=float)
    pos = {node: k for k, node in enumerate(keep)}
    for c, (i, j) in enumerate(cons):
        if i != g:
            A_rows[c, pos[i]] += 1.0
        if j != g:
            A_rows[c, pos[j]] -= 1.0

    def full(y_red: np.ndarray) -> np.ndarray:
        out = np.zeros(n)
        out[keep] = y_red
        return out

    if m == 0:
        cert = verify_kkt(problem, y, np.zeros((n, n)))
        return PriorityVector.from_log_weights(y), cert

    y = _feasible_start(y, problem.constraints, eps)
    y = y - y[g]
    y_red = y[keep]

    working: list[int] = []
    lam_work = np.zeros(0)
    limit = max_iter if max_iter is not None else 200 + 20 * m
    converged = False
    for _ in range(limit):
        grad = 2.0 * (graph.laplacian @ full(y_red) - r)
        g_red = grad[keep]
        if working:
            A = A_rows[working]
            k = len(working)
            K = np.block([[H, A.T], [A, np.zeros((k, k))]])
            rhs = np.concatenate([-g_red, np.zeros(k)])
            sol = np.linalg.solve(K, rhs)
            p = sol[: n - 1]
            lam_work = -sol[n - 1:]
        else:
            p = np.linalg.solve(H, -g_red)
            lam_work = np.zeros(0)

        if np.max(np.abs(p)) <= 1e-11 * max(1.0, np.max(np.abs(y_red))):
            if lam_work.size == 0 or np.min(lam_work) >= -1e-10:
                converged = True
                break
            drop = working[int(np.argmin(lam_work))]
            working.remove(drop)
            continue

        alpha = 1.0
        blocking = -1
        slacks = A_rows @ y_red - eps
        dirs = A_rows @ p
        for c in range(m):
            if c in working:
                continue
            if dirs[c] < -1e-13:
                step = max(slacks[c], 0.0) / (-dirs[c])
                if step < alpha - 1e-15:
                    alpha = max(step, 0.0)
                    blocking = c
        y_red = y_red + alpha * p
        if blocking >= 0 and alpha < 1.0:
            working.append(blocking)
    if not converged:
        raise MaxIterationsError(f"active-set did not converge within {limit} iterations")

    lam = np.zeros((n, n))
    for c, l in zip(working, lam_work):
        i, j = cons[c]
        lam[i, j] = max(float(l), 0.0)
    y_full = full(y_red)
    cert = verify_kkt(problem, y_full, lam)
    return PriorityVector.from_log_weights(y_full), cert


def verify_kkt(problem: LogLSProblem, y: np.ndarray, lam: np.ndarray) -> KKTCertificate:
    """Evaluate the three optimality residuals; pure computation, no mutation.

    Stationarity: || L y - (Lambda - Lambda^T) 1 / 2 - r ||_inf with r the
    per-node sum of log ratios. Complementarity: largest |Lambda_ij * slack|
    over constraints. Feasibility: largest constraint violation.
    """
    graph = problem.graph
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    r = graph.row_log_sums()
    stat = graph.laplacian @ y - 0.5 * (lam - lam.T) @ np.ones(graph.n) - r
    residual_stationarity = float(np.max(np.abs(stat)))
    comp = 0.0
    feas = 0.0
    for i, j in problem.constraints:
        slack = y[j] - y[i] + problem.epsilon
        comp = max(comp, abs(lam[i, j] * slack))
        feas = max(feas, slack)
    return KKTCertificate(
        lambda_matrix=lam,
        residual_stationarity=residual_stationarity,
        residual_complementarity=comp,
        primal_feasibility=max(feas, 0.0),
    )
