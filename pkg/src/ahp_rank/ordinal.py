"""Weighted ordinal ranking: find the preference matrix maximizing sigma + tau.

The objective rewards agreement with each compared ratio by |ln(ratio)| and
penalizes activated preferences on tie pairs by a small delta, subject to
asymmetry and transitivity of the Boolean preference matrix. Two solvers are
provided: a certified polynomial fast path (valid when the dominance graph has
no ambiguous cycle and all cycles are edge-disjoint) and an exact depth-first
branch-and-bound that also enumerates optima to certify uniqueness.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedError, NotEligibleError, TieBreakWarning
from .graphs import (
    ComparisonGraph,
    DominanceGraph,
    build_graphs,
    check_uniqueness_conditions,
    enumerate_cycles,
    is_connected,
)
from .errors import CycleExplosionError
from .pcm import IncompletePCM, PriorityVector

DEFAULT_DELTA = 1e-4
DEFAULT_BUDGET_SECONDS = 10.0
DEFAULT_OPTIMA_CAP = 512

FAST_PATH = "FastPath"
EXACT_ILP = "ExactILP"
FROM_WEIGHTS = "FromWeights"

_OBJ_TOL = 1e-10


@dataclass(frozen=True)
class OrdinalPreferenceMatrix:
    """Asymmetric, transitive Boolean preference matrix with provenance.

    ``x[i, j]`` is True when alternative ``i`` is preferred to ``j``; both
    entries False mean no stated preference for the pair.
    """

    n: int
    x: np.ndarray
    provenance: str
    uniqueness_certificate: bool
    num_optima: int | None = None
    hit_budget: bool = False

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=bool)
        if x.shape != (self.n, self.n):
            raise ValueError(f"x must be {self.n}x{self.n}")
        if x.diagonal().any():
            raise ValueError("diagonal preferences are not allowed")
        if (x & x.T).any():
            raise ValueError("asymmetry violated: some pair is preferred both ways")
        reach2 = (x.astype(np.uint8) @ x.astype(np.uint8)) > 0
        if (reach2 & ~x).any():
            raise ValueError("transitivity violated")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def as_int(self) -> np.ndarray:
        return self.x.astype(int)


@dataclass(frozen=True)
class OrdinalObjective:
    sigma: float
    tau: float
    delta: float

    @property
    def value(self) -> float:
        return self.sigma + self.tau


def evaluate_objective(
    pcm: IncompletePCM, x: OrdinalPreferenceMatrix | np.ndarray, delta: float = DEFAULT_DELTA
) -> OrdinalObjective:
    """Score a preference matrix against the compared ratios.

    sigma sums ln(ratio) * (x_ij - x_ji) over compared pairs; tau subtracts
    delta for every activated preference variable on a tie pair.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    xb = x.x if isinstance(x, OrdinalPreferenceMatrix) else np.asarray(x, dtype=bool)
    a = pcm.entries
    sigma = 0.0
    tau = 0.0
    for i, j in pcm.edges():
        diff = int(xb[i, j]) - int(xb[j, i])
        if a[i, j] == 1.0:
            tau -= delta * (int(xb[i, j]) + int(xb[j, i]))
        elif diff:
            sigma += math.log(a[i, j]) * diff
    return OrdinalObjective(sigma=sigma, tau=tau, delta=delta)


def edge_reward_bound(pcm: IncompletePCM) -> float:
    """Upper bound on sigma: sum of |ln(ratio)| over compared pairs."""
    a = pcm.entries
    return float(sum(abs(math.log(a[i, j])) for i, j in pcm.edges()))


def delta_negligibility_bound(pcm: IncompletePCM) -> float:
    """Largest delta that provably cannot alter which ratios get satisfied.

    Equals min ln(ratio) over present ratios above one, divided by the number
    of compared pairs; infinite when every present ratio is a tie.
    """
    a = pcm.entries
    edges = pcm.edges()
    logs = [math.log(max(a[i, j], a[j, i])) for i, j in edges if max(a[i, j], a[j, i]) > 1.0]
    if not logs or not edges:
        return math.inf
    return min(logs) / len(edges)


def _warn_if_delta_too_large(pcm: IncompletePCM, delta: float) -> None:
    bound = delta_negligibility_bound(pcm)
    if delta >= bound:
        warnings.warn(
            f"delta={delta:g} is not below the negligibility bound {bound:g}; "
            "tie penalties may interfere with ratio rewards",
            TieBreakWarning,
            stacklevel=3,
        )


def ordinal_from_weights(pcm: IncompletePCM, pv: PriorityVector) -> OrdinalPreferenceMatrix:
    """Strict preference matrix induced by a weight vector (ties left unset)."""
    w = pv.weights
    if w.size != pcm.n:
        raise ValueError("weight vector size does not match the matrix")
    x = w[:, None] > w[None, :]
    return OrdinalPreferenceMatrix(
        n=pcm.n, x=x, provenance=FROM_WEIGHTS, uniqueness_certificate=True
    )


def solve_fast_path(
    gd: DominanceGraph, pcm: IncompletePCM, delta: float = DEFAULT_DELTA
) -> OrdinalPreferenceMatrix:
    """Certified polynomial solver for eligible dominance graphs.

    For each cycle the unique minimum-ratio link is reversed; every other
    dominance edge with ratio above one is kept; ties stay unset; the result
    is closed transitively by repeated Boolean adjacency squaring.
    """
    cycles = enumerate_cycles(gd)
    report = check_uniqueness_conditions(gd, cycles=cycles)
    if not report.eligible:
        raise NotEligibleError(report.reasons)
    _warn_if_delta_too_large(pcm, delta)

    n = gd.n
    adj = np.zeros((n, n), dtype=bool)
    reversed_links: set[tuple[int, int]] = set()
    for cycle in cycles:
        u, v = min(cycle.edges, key=lambda e: (gd.weights[e], e))
        adj[v, u] = True
        reversed_links.add((u, v))
    for i, j in gd.edges:
        if (i, j) not in reversed_links and gd.weights[(i, j)] > 1.0:
            adj[i, j] = True
    for _ in range(n - 1):
        adj = adj | ((adj.astype(np.uint8) @ adj.astype(np.uint8)) > 0)
    return OrdinalPreferenceMatrix(
        n=n, x=adj, provenance=FAST_PATH, uniqueness_certificate=True, num_optima=1
    )


# Branch-and-bound over per-pair decisions. Each compared pair is assigned a
# final value: forward preference, reversed preference, or unset. Preferences
# on non-compared pairs arise only through transitive closure, which is
# objective-neutral and loses no optima.

_UNSET = 0
_FORWARD = 1
_REVERSED = 2


class _Pair:
    __slots__ = ("idx", "u", "v", "reward", "is_tie")

    def __init__(self, idx: int, u: int, v: int, reward: float, is_tie: bool):
        self.idx = idx
        self.u = u  # preferred end of the dominance orientation
        self.v = v
        self.reward = reward  # contribution of the forward decision
        self.is_tie = is_tie

    def contribution(self, value: int) -> float:
        if self.is_tie:
            return 0.0 if value == _UNSET else -self.reward
        if value == _FORWARD:
            return self.reward
        if value == _REVERSED:
            return -self.reward
        return 0.0

    def best(self) -> float:
        return 0.0 if self.is_tie else self.reward


class _Search:
    def __init__(self, pairs: list[_Pair], n: int, budget: float, optima_cap: int):
        self.pairs = pairs
        self.n = n
        self.budget = budget
        self.optima_cap = optima_cap
        self.deadline = time.monotonic() + budget
        self.best = -math.inf
        self.solutions: dict[bytes, tuple[np.ndarray, float]] = {}
        self.hit_budget = False
        self.cap_hit = False
        self.nodes = 0

    def out_of_time(self) -> bool:
        self.nodes += 1
        if self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            self.hit_budget = True
        return self.hit_budget

    def record(self, reach: np.ndarray) -> None:
        value = self._value_of(reach)
        if value < self.best - _OBJ_TOL:
            return
        if value > self.best + _OBJ_TOL:
            self.best = value
            self.solutions = {
                k: rv for k, rv in self.solutions.items() if rv[1] >= value - _OBJ_TOL
            }
        key = np.packbits(reach).tobytes()
        if key not in self.solutions:
            if len(self.solutions) >= self.optima_cap:
                self.cap_hit = True
            else:
                self.solutions[key] = (reach.copy(), value)

    def _value_of(self, reach: np.ndarray) -> float:
        total = 0.0
        for p in self.pairs:
            if reach[p.u, p.v]:
                total += p.contribution(_FORWARD)
            elif reach[p.v, p.u]:
                total += p.contribution(_REVERSED)
        return total

    def run(self) -> None:
        reach = np.zeros((self.n, self.n), dtype=bool)
        states = [_UNSET] * len(self.pairs)
        decided = [False] * len(self.pairs)
        committed_zero = [False] * len(self.pairs)
        remaining = sum(p.best() for p in self.pairs)
        self._dfs(reach, states, decided, committed_zero, 0.0, remaining)

    def _dfs(
        self,
        reach: np.ndarray,
        states: list[int],
        decided: list[bool],
        committed_zero: list[bool],
        locked: float,
        remaining: float,
    ) -> None:
        if self.out_of_time():
            return
        if locked + remaining < self.best - _OBJ_TOL:
            return
        nxt = None
        for k, p in enumerate(self.pairs):
            if not decided[k]:
                nxt = k
                break
        if nxt is None:
            self.record(reach)
            return
        pair = self.pairs[nxt]
        order = (_UNSET, _FORWARD, _REVERSED) if pair.is_tie else (_FORWARD, _REVERSED, _UNSET)
        for value in order:
            if value == _UNSET:
                # Commit the pair to stay outside the closure.
                if reach[pair.u, pair.v] or reach[pair.v, pair.u]:
                    continue
                decided[nxt] = True
                committed_zero[nxt] = True
                states[nxt] = _UNSET
                self._dfs(
                    reach, states, decided, committed_zero,
                    locked, remaining - pair.best(),
                )
                decided[nxt] = False
                committed_zero[nxt] = False
                if self.hit_budget:
                    return
                continue

            a, b = (pair.u, pair.v) if value == _FORWARD else (pair.v, pair.u)
            if reach[b, a]:
                continue  # would close a preference cycle
            new_reach = reach | np.outer(
                reach[:, a] | (np.arange(self.n) == a),
                reach[b, :] | (np.arange(self.n) == b),
            )
            np.fill_diagonal(new_reach, False)
            # Newly forced pairs are already inside the closure, so a single
            # propagation scan suffices.
            new_states = states.copy()
            new_decided = decided.copy()
            new_locked = locked + pair.contribution(value)
            new_remaining = remaining - pair.best()
            new_states[nxt] = value
            new_decided[nxt] = True
            feasible = True
            for k, q in enumerate(self.pairs):
                if new_decided[k]:
                    if committed_zero[k] and (new_reach[q.u, q.v] or new_reach[q.v, q.u]):
                        feasible = False
                        break
                    continue
                if new_reach[q.u, q.v]:
                    forced = _FORWARD
                elif new_reach[q.v, q.u]:
                    forced = _REVERSED
                else:
                    continue
                new_states[k] = forced
                new_decided[k] = True
                new_locked += q.contribution(forced)
                new_remaining -= q.best()
            if feasible:
                self._dfs(
                    new_reach, new_states, new_decided, committed_zero,
                    new_locked, new_remaining,
                )
            if self.hit_budget:
                return


def _pairs_for(pcm: IncompletePCM, gd: DominanceGraph, delta: float) -> list[_Pair]:
    pairs = []
    for i, j in gd.edges:
        w = gd.weights[(i, j)]
        is_tie = (i, j) in gd.tie_pairs
        reward = delta if is_tie else math.log(w)
        pairs.append(_Pair(0, i, j, reward, is_tie))
    # Decide high-reward pairs first; deterministic tie-break on indices.
    pairs.sort(key=lambda p: (-p.best(), p.u, p.v))
    for k, p in enumerate(pairs):
        p.idx = k
    return pairs


def solve_exact_ilp(
    pcm: IncompletePCM,
    delta: float = DEFAULT_DELTA,
    budget_seconds: float = DEFAULT_BUDGET_SECONDS,
    optima_cap: int = DEFAULT_OPTIMA_CAP,
) -> OrdinalPreferenceMatrix:
    """Exact maximizer of sigma + tau by depth-first branch-and-bound.

    The bound adds the full reward of every undecided compared pair, which is
    admissible, and pruning keeps ties with the incumbent so all optima are
    enumerated. Among several optima the lexicographically smallest matrix
    (flattened row-major) is returned and the uniqueness certificate is
    withheld.
    """
    g, gd = build_graphs(pcm)
    if not is_connected(g):
        raise DisconnectedError("the comparison graph must be connected")
    _warn_if_delta_too_large(pcm, delta)

    search = _Search(_pairs_for(pcm, gd, delta), pcm.n, budget_seconds, optima_cap)
    search.run()
    if not search.solutions:  # pragma: no cover - empty relation is always feasible
        raise RuntimeError("search ended with no feasible solution")

    candidates = sorted(
        (rv[0] for rv in search.solutions.values()), key=lambda r: r.flatten().tolist()
    )
    x = candidates[0]
    num = len(candidates)
    unique = num == 1 and not search.cap_hit and not search.hit_budget
    return OrdinalPreferenceMatrix(
        n=pcm.n,
        x=x,
        provenance=EXACT_ILP,
        uniqueness_certificate=unique,
        num_optima=num if not search.cap_hit else None,
        hit_budget=search.hit_budget,
    )


def solve_ordinal(
    pcm: IncompletePCM,
    delta: float = DEFAULT_DELTA,
    budget_seconds: float = DEFAULT_BUDGET_SECONDS,
) -> OrdinalPreferenceMatrix:
    """Route to the certified fast path when eligible, else the exact solver."""
    g, gd = build_graphs(pcm)
    if not is_connected(g):
        raise DisconnectedError("the comparison graph must be connected")
    try:
        cycles = enumerate_cycles(gd)
        report = check_uniqueness_conditions(gd, cycles=cycles)
    except CycleExplosionError:
        return solve_exact_ilp(pcm, delta=delta, budget_seconds=budget_seconds)
    if report.eligible:
        return solve_fast_path(gd, pcm, delta=delta)
    return solve_exact_ilp(pcm, delta=delta, budget_seconds=budget_seconds)
