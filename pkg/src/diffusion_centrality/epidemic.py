"""Network SIS epidemics: the linear matrix recurrence and Monte Carlo.

The linearized model advances infection probabilities as
``P_t = P_{t-1} ((1 - beta) I + mu A)``, identical to the received-weight
recurrence of non-conservative diffusion with ``alpha = mu`` and
``delta = 1 - beta``. Entries can exceed 1 since the linearization only
holds for small probabilities; they are reported raw and flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import Graph
from .spectral import epidemic_threshold


@dataclass(frozen=True)
class EpidemicParams:
    mu: float
    beta: float
    p0: np.ndarray
    steps: int

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        p0 = np.asarray(self.p0, dtype=np.float64).reshape(-1)
        if np.any(p0 < 0) or np.any(p0 > 1) or not np.all(np.isfinite(p0)):
            raise ValueError("p0 entries must lie in [0, 1]")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        object.__setattr__(self, "p0", p0)


@dataclass
class EpidemicTrace:
    deterministic: np.ndarray | None = None
    stochastic: np.ndarray | None = None
    trials: int = 0
    classification: str = "indeterminate"
    extra: dict = field(default_factory=dict)

    @property
    def exceeds_one(self) -> np.ndarray:
        """Per step, whether any linearized probability is above 1."""
        return (self.deterministic > 1.0).any(axis=1)

    @property
    def clamped(self) -> np.ndarray:
        return np.clip(self.deterministic, 0.0, 1.0)

    def mean_infected(self) -> np.ndarray:
        return self.stochastic.mean(axis=0)


def sis_deterministic(g: Graph, params: EpidemicParams) -> EpidemicTrace:
    if params.p0.shape[0] != g.node_count:
        raise ValueError("p0 length must equal node_count")
    out = np.empty((params.steps + 1, g.node_count))
    out[0] = params.p0
    keep = 1.0 - params.beta
    for t in range(1, params.steps + 1):
        out[t] = keep * out[t - 1] + params.mu * g.left_multiply(out[t - 1])
    trace = EpidemicTrace(deterministic=out)
    trace.extra["steps_exceeding_one"] = int(trace.exceeds_one.sum())
    return trace


def classify(mean_final: float, n: int) -> str:
    if mean_final < 1.0:
        return "died-out"
    if mean_final > 0.05 * n:
        return "persisted"
    return "indeterminate"


def sis_montecarlo(g: Graph, params: EpidemicParams, trials: int, seed: int) -> EpidemicTrace:
    """Simulate the stochastic SIS process, all trials advanced together.

    Each step every infected node infects each out-neighbor independently
    with probability ``min(1, mu * w)``; independently, each node that was
    infected at the start of the step stays infected with probability
    ``1 - beta``. A node is infected after the step if it stayed infected
    or was reached by at least one transmission. Random numbers are drawn
    in a fixed order from one generator, so a seed reproduces every trace
    bit for bit, and runs that differ only in ``mu`` share their draws.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = g.node_count
    if params.p0.shape[0] != n:
        raise ValueError("p0 length must equal node_count")
    rng = np.random.default_rng(seed)
    src, dst, w = g.edges
    prob = np.minimum(1.0, params.mu * w)
    incidence = sp.csr_matrix((np.ones(src.size), (np.arange(src.size), dst)),
                              shape=(src.size, n))
    infected = rng.random((trials, n)) < params.p0
    counts = np.zeros((trials, params.steps + 1), dtype=np.int64)
    counts[:, 0] = infected.sum(axis=1)
    for t in range(1, params.steps + 1):
        if not infected.any():
            break
        fire = (rng.random((trials, src.size)) < prob) & infected[:, src]
        reached = np.asarray((incidence.T @ fire.T.astype(np.float64)).T > 0)
        stay = infected & (rng.random((trials, n)) >= params.beta)
        infected = stay | reached
        counts[:, t] = infected.sum(axis=1)
    final = float(counts[:, -1].mean())
    return EpidemicTrace(stochastic=counts, trials=trials,
                         classification=classify(final, n),
                         extra={"mean_final": final, "seed": seed})


@dataclass
class ThresholdRow:
    ratio: float
    mu: float
    beta: float
    mean_final: float
    classification: str


def threshold_experiment(g: Graph, mu_over_beta_grid, trials=500, horizon=200, seed=0,
                         beta=0.5, p0=None):
    """Classify Monte Carlo outcomes along a grid of ``mu / beta`` ratios.

    Returns ``(tau, rows)`` where ``tau = 1/lambda1``. Every run starts
    from ``p0`` (default: all nodes infected).
    """
    tau = epidemic_threshold(g)
    if p0 is None:
        p0 = np.ones(g.node_count)
    rows = []
    for i, ratio in enumerate(mu_over_beta_grid):
        if ratio < 0:
            raise ValueError("grid ratios must be non-negative")
        mu = ratio * beta
        if mu > 1.0:
            raise ValueError(f"ratio {ratio} with beta={beta} gives mu > 1")
        params = EpidemicParams(mu=mu, beta=beta, p0=p0, steps=horizon)
        tr = sis_montecarlo(g, params, trials, seed)
        rows.append(ThresholdRow(float(ratio), mu, beta, tr.extra["mean_final"],
                                 tr.classification))
    return tau, rows


def growth_rate(trace: EpidemicTrace, window: int = 1) -> float:
    """Per-step L1 growth factor of the deterministic trace at its end."""
    norms = trace.deterministic.sum(axis=1)
    if norms[-1 - window] == 0:
        return math.nan
    return float((norms[-1] / norms[-1 - window]) ** (1.0 / window))
