"""PageRank, Alpha-Centrality and normalized Alpha-Centrality.

PageRank is the steady state of conservative diffusion with restarts,
``pr = (1-alpha) s + alpha pr D^-1 A``. Alpha-Centrality is the steady
state of non-conservative diffusion, ``cr = s + alpha cr A``, which only
exists for ``alpha < 1/lambda1``. The normalized variant divides the
truncated path sum by its L1 norm at every step and is defined for every
``alpha >= 0`` except ``1/lambda1`` itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .diffusion import DanglingPolicy, random_walk_step
from .graph import Graph
from .spectral import SINGULAR_MARGIN, SpectralEstimate, spectral_radius

# alpha * lambda1 must not exceed this for unnormalized Alpha-Centrality.
SPECTRAL_MARGIN = 0.999
DENSE_LIMIT = 200

StartSpec = Union[str, np.ndarray, list]


class ConvergenceBoundError(ValueError):
    """alpha lies outside the region where the requested metric exists."""


@dataclass
class CentralityConfig:
    alpha: float
    start: StartSpec = "uniform"
    max_iterations: int = 10_000
    tol: float = 1e-9
    dangling: DanglingPolicy = DanglingPolicy.SINK
    allow_alpha_one: bool = False

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        self.dangling = DanglingPolicy(self.dangling)


@dataclass
class CentralityResult:
    scores: np.ndarray
    iterations_used: int
    final_residual: float
    converged: bool
    alpha: float
    metric: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def ranking(self) -> np.ndarray:
        return ranking(self.scores)

    def ranks(self) -> np.ndarray:
        """1-based rank position of every node."""
        r = np.empty(self.scores.size, dtype=np.int64)
        r[self.ranking] = np.arange(1, self.scores.size + 1)
        return r

    def to_tsv(self, labels) -> str:
        ranks = self.ranks()
        return "".join(f"{labels[i]}\t{float(self.scores[i])!r}\t{ranks[i]}\n"
                       for i in self.ranking)

    def to_json(self, labels) -> str:
        ranks = self.ranks()
        return json.dumps({
            "metric": self.metric, "alpha": self.alpha,
            "iterations": self.iterations_used, "residual": self.final_residual,
            "converged": self.converged, **self.extra,
            "scores": [{"node": labels[i], "score": float(self.scores[i]),
                        "rank": int(ranks[i])} for i in self.ranking],
        }, indent=2)


def ranking(scores) -> np.ndarray:
    """Node indices by descending score, ties by ascending index."""
    scores = np.asarray(scores)
    return np.lexsort((np.arange(scores.size), -scores))


def starting_vector(g: Graph, start: StartSpec) -> np.ndarray:
    if isinstance(start, str):
        if start == "uniform":
            return np.ones(g.node_count)
        if start in ("indegree", "in-degree"):
            return np.array(g.in_degree, dtype=np.float64)
        raise ValueError(f"unknown starting vector {start!r}")
    s = np.asarray(start, dtype=np.float64).reshape(-1)
    if s.shape[0] != g.node_count:
        raise ValueError("custom starting vector has wrong length")
    if not np.all(np.isfinite(s)) or np.any(s < 0):
        raise ValueError("starting vector must be finite and non-negative")
    return s.copy()


def pagerank(g: Graph, cfg: CentralityConfig) -> CentralityResult:
    """Iterate ``pr(t) = (1-alpha) s + alpha pr(t-1) D^-1 A`` from ``pr(0) = s``.

    ``s`` is normalized to unit L1 norm. At ``alpha = 1`` (requires
    ``cfg.allow_alpha_one``) this is a plain random walk with no restarts;
    it may oscillate and is then reported as not converged.
    """
    a = cfg.alpha
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"PageRank damping must lie in [0, 1], got {a}")
    if a == 1.0 and not cfg.allow_alpha_one:
        raise ValueError("alpha = 1 has no convergence guarantee; set allow_alpha_one")
    s = starting_vector(g, cfg.start)
    total = s.sum()
    if total <= 0:
        raise ValueError("starting vector must have positive mass")
    s = s / total
    x = s.copy()
    change = math.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        nxt = (1.0 - a) * s + a * random_walk_step(g, x, cfg.dangling)
        change = float(np.abs(nxt - x).sum())
        x = nxt
        if change < cfg.tol:
            break
    return CentralityResult(x, it, change, change < cfg.tol, a, "pagerank")


def _check_alpha_bound(g, alpha, estimate):
    est = estimate or spectral_radius(g)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha * est.lambda1 > SPECTRAL_MARGIN:
        bound = math.inf if est.lambda1 == 0 else 1.0 / est.lambda1
        raise ConvergenceBoundError(
            f"alpha={alpha:g} violates the Alpha-Centrality bound alpha < 1/lambda1 "
            f"(lambda1~{est.lambda1:.6g}, 1/lambda1~{bound:.6g}, required "
            f"alpha*lambda1 <= {SPECTRAL_MARGIN}); use normalized Alpha-Centrality instead")
    return est


def alpha_centrality(g: Graph, cfg: CentralityConfig,
                     estimate: SpectralEstimate | None = None) -> CentralityResult:
    """Iterate ``cr(t) = s + alpha cr(t-1) A`` to its fixed point ``s (I - alpha A)^-1``.

    Convergence is declared when the L1 change falls below
    ``tol * max(1, ||cr||_1)``.
    """
    est = _check_alpha_bound(g, cfg.alpha, estimate)
    s = starting_vector(g, cfg.start)
    x = s.copy()
    change = math.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        nxt = s + cfg.alpha * g.left_multiply(x)
        change = float(np.abs(nxt - x).sum())
        x = nxt
        if change < cfg.tol * max(1.0, float(x.sum())):
            converged = True
            break
    return CentralityResult(x, it, change, converged, cfg.alpha, "acentrality",
                            {"lambda1": est.lambda1})


def normalized_alpha_centrality(g: Graph, cfg: CentralityConfig,
                                estimate: SpectralEstimate | None = None) -> CentralityResult:
    """``cr(t) / ||cr(t)||_1`` with ``cr(t) = sum_{k<=t} s (alpha A)^k``.

    The partial sum and the current term are rescaled together after each
    step so neither overflows when ``alpha > 1/lambda1``; the ratio, which
    is all the metric needs, is unaffected.
    """
    a = cfg.alpha
    if a < 0:
        raise ValueError("alpha must be >= 0")
    est = estimate or spectral_radius(g)
    if est.lambda1 > 0 and abs(a * est.lambda1 - 1.0) < SINGULAR_MARGIN:
        raise ConvergenceBoundError(
            f"normalized Alpha-Centrality is undefined at alpha = 1/lambda1 "
            f"(alpha={a:g}, 1/lambda1~{1 / est.lambda1:.6g})")
    s = starting_vector(g, cfg.start)
    total = s.sum()
    if total <= 0:
        raise ValueError("starting vector must have positive mass")
    term = s / total
    acc = term.copy()
    change = math.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        term = a * g.left_multiply(term)
        nxt = acc + term
        scale = nxt.sum()
        nxt /= scale
        term /= scale
        change = float(np.abs(nxt - acc).sum())
        acc = nxt
        if change < cfg.tol:
            converged = True
            break
    return CentralityResult(acc, it, change, converged, a, "nacentrality",
                            {"lambda1": est.lambda1})


def dense_steady_state_oracle(g: Graph, cfg: CentralityConfig, metric: str) -> np.ndarray:
    """Exact steady state by a dense linear solve (test-scale graphs only).

    ``pagerank``: ``(1-alpha) s (I - alpha W)^-1`` with ``s`` normalized and
    ``W`` the random-walk matrix under ``cfg.dangling``;
    ``alpha-centrality``: ``s (I - alpha A)^-1``.
    """
    n = g.node_count
    if n > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to {DENSE_LIMIT} nodes, graph has {n}")
    s = starting_vector(g, cfg.start)
    a = cfg.alpha
    if metric == "pagerank":
        s = s / s.sum()
        m = np.array([random_walk_step(g, row, cfg.dangling) for row in np.eye(n)])
        if n == 0:
            m = np.zeros((0, 0))
        rhs = (1.0 - a) * s
    elif metric in ("alpha-centrality", "acentrality"):
        m = g.to_dense()
        rhs = s
    else:
        raise ValueError(f"unknown metric {metric!r}")
    system = np.eye(n) - a * m
    if n and np.linalg.cond(system) > 1e12:
        raise np.linalg.LinAlgError(f"singular system at alpha={a}")
    return np.linalg.solve(system.T, rhs)
