"""Time-stepped conservative and non-conservative diffusion.

Both processes act on row vectors. A conservative step moves a fraction
``alpha`` of what each node received last step along the row-stochastic
transfer matrix ``delta*I + (1-delta)*D^-1 A``; a non-conservative step
replicates it along ``(delta/alpha)*I + A``, so ``alpha * x @ W`` equals
``delta*x + alpha*(x @ A)``. Neither matrix is ever materialized.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .graph import Graph


class Mode(str, Enum):
    CONSERVATIVE = "conservative"
    NONCONSERVATIVE = "non-conservative"


class DanglingPolicy(str, Enum):
    ERROR = "error"
    SINK = "sink"
    UNIFORM = "uniform"


class DanglingMassError(ValueError):
    """Weight reached a node with no out-edges under the ``error`` policy."""


@dataclass(frozen=True)
class DiffusionConfig:
    alpha: float
    delta_self: float = 0.0
    mode: Mode = Mode.CONSERVATIVE
    dangling: DanglingPolicy = DanglingPolicy.SINK

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "dangling", DanglingPolicy(self.dangling))
        a, d = float(self.alpha), float(self.delta_self)
        if not (np.isfinite(a) and np.isfinite(d)):
            raise ValueError("alpha and delta_self must be finite")
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"delta_self must lie in [0, 1], got {d}")
        if self.mode is Mode.CONSERVATIVE:
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"conservative alpha must lie in [0, 1], got {a}")
        else:
            if a < 0:
                raise ValueError(f"non-conservative alpha must be >= 0, got {a}")
            if d > 0 and a == 0:
                raise ValueError("replication matrix (delta/alpha) I + A is undefined "
                                 "for alpha = 0 with delta_self > 0")


@dataclass
class DiffusionTrajectory:
    """Per-step received vectors and totals, index 0 is the initial state."""

    mode: Mode
    received: np.ndarray
    totals: np.ndarray
    steps: int
    alpha: float = 0.0
    delta_self: float = 0.0
    extra: dict = field(default_factory=dict)

    def l1_norms(self):
        return np.abs(self.totals).sum(axis=1)

    def to_csv(self, fh, labels=None, max_nodes=50):
        """One row per step: ``step, l1_norm`` plus per-node totals when
        the graph has at most ``max_nodes`` nodes."""
        n = self.totals.shape[1]
        per_node = n <= max_nodes
        writer = csv.writer(fh, lineterminator="\n")
        header = ["step", "l1_norm"]
        if per_node:
            header += list(labels) if labels is not None else [f"n{i}" for i in range(n)]
        writer.writerow(header)
        for t, (row, norm) in enumerate(zip(self.totals, self.l1_norms())):
            rec = [t, repr(float(norm))]
            if per_node:
                rec += [repr(float(x)) for x in row]
            writer.writerow(rec)


def _as_weights(g: Graph, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != g.node_count:
        raise ValueError(f"vector length {x.shape[0]} != node_count {g.node_count}")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ValueError("weight vectors must be finite and non-negative")
    return x


def random_walk_step(g: Graph, x, dangling=DanglingPolicy.SINK) -> np.ndarray:
    """``x @ D^-1 A`` with rows of out-degree-zero nodes set by ``dangling``.

    ``sink`` keeps a dangling node's mass in place (row ``e_u``);
    ``uniform`` spreads it evenly over all nodes.
    """
    dangling = DanglingPolicy(dangling)
    dout = g.out_degree
    dead = dout == 0
    scaled = np.divide(x, dout, out=np.zeros_like(x), where=~dead)
    out = g.left_multiply(scaled)
    if np.any(dead):
        stuck = x[dead]
        if np.any(stuck != 0):
            if dangling is DanglingPolicy.ERROR:
                nodes = np.flatnonzero(dead & (x != 0))
                raise DanglingMassError(
                    f"mass at dangling node(s) {nodes[:5].tolist()} under 'error' policy")
            if dangling is DanglingPolicy.SINK:
                out[dead] += stuck
            else:
                out += stuck.sum() / g.node_count
    return out


def conservative_step(g: Graph, received, cfg: DiffusionConfig) -> np.ndarray:
    """``alpha * received @ (delta*I + (1-delta)*D^-1 A)``."""
    if cfg.mode is not Mode.CONSERVATIVE:
        raise ValueError("conservative_step needs a conservative config")
    x = _as_weights(g, received)
    moved = random_walk_step(g, x, cfg.dangling)
    return cfg.alpha * (cfg.delta_self * x + (1.0 - cfg.delta_self) * moved)


def nonconservative_step(g: Graph, received, cfg: DiffusionConfig) -> np.ndarray:
    """``alpha * received @ ((delta/alpha)*I + A)``."""
    if cfg.mode is not Mode.NONCONSERVATIVE:
        raise ValueError("nonconservative_step needs a non-conservative config")
    x = _as_weights(g, received)
    out = cfg.alpha * g.left_multiply(x)
    if cfg.delta_self:
        out += cfg.delta_self * x
    return out


def run_conservative(g: Graph, initial, cfg: DiffusionConfig, steps: int) -> DiffusionTrajectory:
    """Iterate ``C(t) = (1-alpha) C(0) + alpha C(t-1) W_c``.

    The received amounts ``Delta(t) = alpha Delta(t-1) W_c`` are tracked
    alongside so the retained-plus-received identity can be checked.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    c0 = _as_weights(g, initial)
    received = np.empty((steps + 1, g.node_count))
    totals = np.empty((steps + 1, g.node_count))
    received[0] = totals[0] = c0
    a = cfg.alpha
    for t in range(1, steps + 1):
        received[t] = conservative_step(g, received[t - 1], cfg)
        totals[t] = (1.0 - a) * c0 + conservative_step(g, totals[t - 1], cfg)
    return DiffusionTrajectory(Mode.CONSERVATIVE, received, totals, steps,
                               alpha=a, delta_self=cfg.delta_self)


def run_nonconservative(g: Graph, initial, cfg: DiffusionConfig, steps: int,
                        tol=None) -> DiffusionTrajectory:
    """Iterate ``N(t) = N(0) + alpha N(t-1) W_n``.

    ``extra['converged']`` reports whether the last L1 change fell below
    ``tol`` (default ``1e-9 * max(1, ||N(t)||_1)``).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    n0 = _as_weights(g, initial)
    received = np.empty((steps + 1, g.node_count))
    totals = np.empty((steps + 1, g.node_count))
    received[0] = totals[0] = n0
    for t in range(1, steps + 1):
        received[t] = nonconservative_step(g, received[t - 1], cfg)
        totals[t] = n0 + nonconservative_step(g, totals[t - 1], cfg)
    change = float(np.abs(totals[-1] - totals[-2]).sum()) if steps else 0.0
    limit = tol if tol is not None else 1e-9 * max(1.0, float(totals[-1].sum()))
    extra = {"last_change": change, "converged": bool(steps and change < limit)}
    return DiffusionTrajectory(Mode.NONCONSERVATIVE, received, totals, steps,
                               alpha=cfg.alpha, delta_self=cfg.delta_self, extra=extra)
