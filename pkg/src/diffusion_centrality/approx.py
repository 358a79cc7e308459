"""Residual-push approximation of Alpha-Centrality.

The state is a pair of vectors: the approximation ``cr~`` and the residual
``r``, starting at ``0`` and ``s``. Popping node ``u`` from a FIFO queue
moves ``r(u)`` into ``cr~(u)`` and pushes ``alpha * r(u) * w(u, v)`` onto
each out-neighbor's residual. Nodes are queued when their residual rises
strictly above ``eps = delta * ||s||_1 / n``. At every point
``cr~ = cr(s - r)`` holds exactly, so the error is ``cr(r)``, which is
at most ``delta * cr(s)`` entrywise for a uniform ``s`` and
``alpha <= c / d_max`` with ``c < 1``.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .centrality import CentralityConfig, CentralityResult, alpha_centrality, starting_vector
from .graph import Graph


class ResidualState:
    """Approximation, residual and FIFO work queue of one push run."""

    def __init__(self, g: Graph, s, alpha: float, epsilon: float):
        self.graph = g
        self.alpha = float(alpha)
        self.epsilon = float(epsilon)
        self.approx = np.zeros(g.node_count)
        self.residual = np.array(s, dtype=np.float64)
        self.queue: deque[int] = deque()
        self.in_queue = np.zeros(g.node_count, dtype=bool)
        self.iterations = 0
        src, dst, w = g.edges
        ptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=g.node_count))])
        # Plain lists are much faster than numpy scalars inside the loop.
        self._ptr = ptr.tolist()
        self._dst = dst.tolist()
        self._w = w.tolist()
        for u in range(g.node_count):
            if self.residual[u] > self.epsilon:
                self.queue.append(u)
                self.in_queue[u] = True

    def push(self) -> int:
        """Dequeue one node and push its residual; returns the node."""
        u = self.queue.popleft()
        self.in_queue[u] = False
        ru = self.residual[u]
        self.approx[u] += ru
        t = self.alpha * ru
        self.residual[u] = 0.0
        r, eps, inq = self.residual, self.epsilon, self.in_queue
        for i in range(self._ptr[u], self._ptr[u + 1]):
            v = self._dst[i]
            r[v] += t * self._w[i]
            if not inq[v] and r[v] > eps:
                self.queue.append(v)
                inq[v] = True
        self.iterations += 1
        return u

    def run(self, hook: Callable[["ResidualState"], None] | None = None,
            every: int = 1, max_iterations: int | None = None):
        while self.queue:
            if max_iterations is not None and self.iterations >= max_iterations:
                raise RuntimeError(f"push loop exceeded {max_iterations} iterations")
            self.push()
            if hook is not None and self.iterations % every == 0:
                hook(self)
        return self


def _epsilon(s, n, delta):
    return delta * float(np.sum(s)) / n if n else 0.0


def approximate_centrality(g: Graph, s, alpha: float, delta: float,
                           epsilon: float | None = None,
                           max_iterations: int | None = None) -> CentralityResult:
    """Approximate ``cr_alpha(s)`` by residual pushing.

    Parameters
    ----------
    g : Graph
    s : array-like or {"uniform", "indegree"}
        Starting vector.
    alpha : float
        Attenuation factor.
    delta : float
        Accuracy parameter in ``(0, 1]``; sets ``eps = delta * ||s||_1 / n``.
    epsilon : float, optional
        Use this queue threshold instead of the one derived from ``delta``.
    max_iterations : int, optional
        Safety cap on pushes; the loop is unbounded by default.

    Returns
    -------
    CentralityResult
        ``extra`` carries ``epsilon``, ``residual`` (final vector),
        ``bound_applicable`` and, when it applies, ``iteration_bound``.
    """
    if not (0.0 < delta <= 1.0):
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if not (math.isfinite(alpha) and alpha >= 0):
        raise ValueError("alpha must be finite and non-negative")
    s = starting_vector(g, s)
    n = g.node_count
    eps = _epsilon(s, n, delta) if epsilon is None else float(epsilon)
    if not (math.isfinite(eps) and eps >= 0):
        raise ValueError("epsilon must be finite and non-negative")
    d_max = float(g.out_degree.max()) if n else 0.0
    c = alpha * d_max
    if c >= 1.0:
        warnings.warn(f"alpha*d_max = {c:.4g} >= 1: the runtime and error guarantees do "
                      "not apply (the loop still ends if alpha*lambda1 < 1)", stacklevel=2)
    uniform = bool(n) and np.all(s == s[0])
    bound_applicable = bool(uniform and c < 1.0 and epsilon is None)

    state = ResidualState(g, s, alpha, eps).run(max_iterations=max_iterations)
    extra = {"epsilon": eps, "residual": state.residual,
             "residual_l1_final": float(state.residual.sum()),
             "bound_applicable": bound_applicable, "alpha_dmax": c}
    if c < 1.0 and eps > 0:
        extra["iteration_bound"] = float(np.sum(s)) / ((1.0 - c) * eps)
    return CentralityResult(state.approx, state.iterations, extra["residual_l1_final"],
                            True, float(alpha), "approx", extra)


@dataclass
class InvariantReport:
    checkpoints: int
    max_violation: float
    iterations: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.max_violation < 1e-6


def _dense_centrality_operator(g: Graph, alpha: float) -> np.ndarray:
    n = g.node_count
    if n > 200:
        raise ValueError("invariant check needs the dense oracle (n <= 200)")
    return np.linalg.inv(np.eye(n) - alpha * g.to_dense())


def verify_loop_invariant(g: Graph, s, alpha: float, delta: float,
                          every: int = 1) -> InvariantReport:
    """Run the push loop and check ``cr~ + cr(r) = cr(s)`` every ``every`` pushes.

    ``cr`` here is the exact dense operator ``x (I - alpha A)^-1``. The
    check also runs once before the first push.
    """
    s = starting_vector(g, s)
    op = _dense_centrality_operator(g, alpha)
    target = s @ op
    eps = _epsilon(s, g.node_count, delta)
    worst = [0.0]
    trace = []

    def check(st: ResidualState):
        v = float(np.max(np.abs(st.approx + st.residual @ op - target), initial=0.0))
        trace.append(v)
        worst[0] = max(worst[0], v)

    state = ResidualState(g, s, alpha, eps)
    check(state)
    state.run(hook=check, every=every)
    return InvariantReport(len(trace), worst[0], state.iterations, trace)


def rms_error_vs_exact(g: Graph, alpha: float, s="indegree", delta: float = 0.01,
                       epsilon_override: float | None = None,
                       exact_tol: float = 1e-13) -> float:
    """RMS of per-node relative error, approximate vs power iteration.

    Nodes whose exact score is zero are skipped (both methods give 0).
    """
    cfg = CentralityConfig(alpha=alpha, start=s, tol=exact_tol, max_iterations=100_000)
    exact = alpha_centrality(g, cfg).scores
    approx = approximate_centrality(g, s, alpha, delta, epsilon=epsilon_override).scores
    mask = exact > 0
    if not np.any(mask):
        return 0.0
    rel = (exact[mask] - approx[mask]) / exact[mask]
    return float(np.sqrt(np.mean(rel ** 2)))
