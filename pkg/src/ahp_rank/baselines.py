"""Reference prioritization methods: eigenvector, direct LS, weighted LS.

The unconstrained logarithmic least squares baseline lives in
:mod:`ahp_rank.cardinal`; this module adds the remaining three comparison
methods. All of them accept incomplete matrices with a connected comparison
graph and return sum-one weight vectors with method-specific diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cardinal import solve_ills
from .errors import DisconnectedError, NoConvergenceError, SingularSystemError
from .graphs import build_graphs, is_connected
from .pcm import IncompletePCM, PriorityVector

METHOD_MWOV = "ILLS-MWOV"
METHOD_ILLS = "ILLS"
METHOD_EV = "EV"
METHOD_IDLS = "IDLS"
METHOD_IWLS = "IWLS"
ALL_METHODS = (METHOD_MWOV, METHOD_ILLS, METHOD_EV, METHOD_IDLS, METHOD_IWLS)


@dataclass(frozen=True)
class BaselineResult:
    """Weights are None when the method produced a nonpositive vector;
    the raw outcome then sits in ``diagnostics["raw_weights"]``."""

    method: str
    weights: PriorityVector | None
    diagnostics: dict = field(default_factory=dict)


def _require_connected(pcm: IncompletePCM):
    g, gd = build_graphs(pcm)
    if not is_connected(g):
        raise DisconnectedError("the comparison graph must be connected")
    return g


def solve_ev(pcm: IncompletePCM, tol: float = 1e-12, max_iter: int = 100_000) -> BaselineResult:
    """Dominant eigenvector of D^-1 (A - I) by power iteration.

    The iteration runs on the matrix shifted by the identity, which shares
    eigenvectors but is primitive, so convergence does not depend on the
    periodicity of the comparison pattern. The eigen-residual is measured on
    the unshifted matrix.
    """
    _require_connected(pcm)
    n = pcm.n
    deg = pcm.present.sum(axis=1).astype(float)
    m = (pcm.entries - np.eye(n)) / deg[:, None]
    v = np.full(n, 1.0 / n)
    lam = 0.0
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        u = m @ v + v
        u_sum = u.sum()
        if u_sum <= 0:  # pragma: no cover - impossible for connected nonneg input
            raise NoConvergenceError("power iteration collapsed to a nonpositive vector")
        u /= u_sum
        mv = m @ u
        lam = float(u @ mv / (u @ u))
        residual = float(np.max(np.abs(mv - lam * u)))
        v = u
        if residual <= tol:
            break
    else:
        raise NoConvergenceError(
            f"power iteration residual {residual:.3e} after {max_iter} iterations"
        )
    weights = PriorityVector.from_weights(v)
    return BaselineResult(
        method=METHOD_EV,
        weights=weights,
        diagnostics={"iterations": iterations, "eigenvalue": lam, "residual": residual},
    )


def _idls_objective(entries, mask_i, mask_j, u: np.ndarray) -> np.ndarray:
    """Vectorized objective for a batch of log-parameter points."""
    ratios = np.exp(u[:, mask_i] - u[:, mask_j])
    return ((entries[None, :] - ratios) ** 2).sum(axis=1)


def solve_idls(
    pcm: IncompletePCM,
    restarts: int = 50,
    seed: int = 0,
    grad_tol: float = 1e-8,
    max_iter: int = 20_000,
    jitter: float = 0.5,
) -> BaselineResult:
    """Local minimization of the squared ratio deviations, sum-one normalized.

    The objective is nonconvex, so this is multi-start gradient descent in a
    log parameterization (which enforces positivity and removes the sum
    constraint, the objective being scale invariant). The first start is the
    unconstrained log-least-squares solution, the rest add Gaussian jitter in
    log space. Steps use a Barzilai-Borwein guess safeguarded by backtracking.
    Global optimality is not claimed; diagnostics carry the achieved gradient
    norm and the restart that won.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    _require_connected(pcm)
    n = pcm.n
    pairs = [(i, j) for i in range(n) for j in range(n) if pcm.present[i, j]]
    mask_i = np.array([p[0] for p in pairs])
    mask_j = np.array([p[1] for p in pairs])
    entries = pcm.entries[mask_i, mask_j]

    rng = np.random.default_rng(seed)
    ills = solve_ills(_require_connected(pcm))
    base = ills.log_weights - ills.log_weights.mean()
    u = np.tile(base, (restarts, 1))
    if restarts > 1:
        u[1:] += rng.normal(0.0, jitter, size=(restarts - 1, n))

    def grad(batch: np.ndarray) -> np.ndarray:
        ratios = np.exp(batch[:, mask_i] - batch[:, mask_j])
        coeff = -2.0 * (entries[None, :] - ratios) * ratios
        g = np.zeros_like(batch)
        rows = np.repeat(np.arange(batch.shape[0]), mask_i.size)
        np.add.at(g, (rows, np.tile(mask_i, batch.shape[0])), coeff.ravel())
        np.subtract.at(g, (rows, np.tile(mask_j, batch.shape[0])), coeff.ravel())
        return g

    f = _idls_objective(entries, mask_i, mask_j, u)
    g = grad(u)
    step = np.full(restarts, 1e-2)
    active = np.ones(restarts, dtype=bool)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gnorm = np.max(np.abs(g), axis=1)
        active = gnorm > grad_tol
        if not active.any():
            break
        trial_step = step.copy()
        g_sq = (g * g).sum(axis=1)
        # Backtracking Armijo on the active rows only.
        for _ in range(60):
            u_try = u - (trial_step * active)[:, None] * g
            f_try = _idls_objective(entries, mask_i, mask_j, u_try)
            bad = active & (f_try > f - 1e-4 * trial_step * g_sq)
            if not bad.any():
                break
            trial_step[bad] *= 0.5
        u_new = u - (trial_step * active)[:, None] * g
        g_new = grad(u_new)
        du = u_new - u
        dg = g_new - g
        denom = (dg * dg).sum(axis=1)
        numer = np.abs((du * dg).sum(axis=1))
        bb = np.where(denom > 0, numer / np.maximum(denom, 1e-300), trial_step * 2)
        step = np.clip(bb, 1e-10, 1e3)
        u, g = u_new, g_new
        f = _idls_objective(entries, mask_i, mask_j, u)
    gnorm = np.max(np.abs(grad(u)), axis=1)
    if np.min(gnorm) > grad_tol:
        raise NoConvergenceError(
            f"no restart reached gradient norm {grad_tol:g} "
            f"(best {np.min(gnorm):.3e} after {max_iter} iterations)"
        )

    # Deterministic winner: best objective among converged rows, ties broken
    # by lexicographically smallest weight vector.
    f = _idls_objective(entries, mask_i, mask_j, u)
    converged = gnorm <= grad_tol
    order = sorted(
        np.flatnonzero(converged),
        key=lambda k: (f[k], tuple(np.exp(u[k] - u[k].max()) / np.exp(u[k] - u[k].max()).sum())),
    )
    best = order[0]
    weights = PriorityVector.from_log_weights(u[best])
    return BaselineResult(
        method=METHOD_IDLS,
        weights=weights,
        diagnostics={
            "restarts": restarts,
            "winner": int(best),
            "objective": float(f[best]),
            "grad_norm": float(gnorm[best]),
            "iterations": iterations,
            "nonconvex": True,
        },
    )


def solve_iwls(pcm: IncompletePCM) -> BaselineResult:
    """Exact solution of the weighted least-squares program.

    Minimizes the squared residuals of ``ratio * w_j - w_i`` over compared
    pairs subject to the weights summing to one, via the linear first-order
    system of this equality-constrained convex program. Positivity is not part
    of the program; nonpositive outcomes are reported, not repaired.
    """
    _require_connected(pcm)
    n = pcm.n
    b = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if pcm.present[i, j]:
                row = np.zeros(n)
                row[j] = pcm.entries[i, j]
                row[i] -= 1.0
                b += np.outer(row, row)
    k = np.zeros((n + 1, n + 1))
    k[:n, :n] = 2.0 * b
    k[:n, n] = 1.0
    k[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    try:
        sol = np.linalg.solve(k, rhs)
    except np.linalg.LinAlgError:
        raise SingularSystemError("weighted LS system is rank deficient") from None
    w = sol[:n]
    kkt_residual = float(np.max(np.abs(k @ sol - rhs)))
    objective = float(w @ b @ w)
    positive = bool(np.all(w > 0))
    diagnostics = {
        "kkt_residual": kkt_residual,
        "objective": objective,
        "positive": positive,
        "multiplier": float(sol[n]),
    }
    if not positive:
        diagnostics["raw_weights"] = w.copy()
        return BaselineResult(method=METHOD_IWLS, weights=None, diagnostics=diagnostics)
    return BaselineResult(
        method=METHOD_IWLS, weights=PriorityVector.from_weights(w), diagnostics=diagnostics
    )
