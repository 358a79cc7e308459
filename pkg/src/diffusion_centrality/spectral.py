"""Spectral radius, epidemic threshold and attenuated path-count series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph

# |alpha * lambda1 - 1| below this is treated as sitting on the singular point.
SINGULAR_MARGIN = 1e-3
MAX_PERIOD = 8


@dataclass(frozen=True)
class SpectralEstimate:
    lambda1: float
    iterations: int
    rel_change_final: float
    converged: bool
    period: int = 1

    @property
    def threshold(self) -> float:
        return math.inf if self.lambda1 == 0 else 1.0 / self.lambda1


def spectral_radius(g: Graph, tol=1e-10, max_iters=10_000) -> SpectralEstimate:
    """Power iteration on ``A`` from the all-ones vector, L1-renormalized.

    Each step's growth ratio ``||x A||_1 / ||x||_1`` is recorded. If the
    ratios settle (relative change below ``tol``) the estimate is the last
    ratio. Periodic spectra (e.g. bipartite graphs) make the ratios cycle
    with some period ``p``; then the geometric mean over a window of ``p``
    steps is stable and equals the spectral radius, and the estimate is
    reported with ``converged=False``. A vector that vanishes means ``A``
    is nilpotent (acyclic graph) and the radius is exactly 0.
    """
    n = g.node_count
    if n < 1:
        raise ValueError("spectral_radius needs at least one node")
    x = np.full(n, 1.0 / n)
    logs: list[float] = []
    best = (float("nan"), math.inf, 1)
    for k in range(1, max_iters + 1):
        y = g.left_multiply(x)
        total = y.sum()
        if total <= 0.0:
            return SpectralEstimate(0.0, k, 0.0, True, 1)
        logs.append(math.log(total))
        x = y / total
        for p in range(1, MAX_PERIOD + 1):
            need = p + 1 if p == 1 else 2 * p
            if len(logs) < p + need - 1:
                break
            cums = np.cumsum([0.0] + logs[-(p + need - 1):])
            window = np.exp((cums[p:] - cums[:-p]) / p)
            est = float(window[-1])
            spread = float(window.max() - window.min()) / est
            if spread < best[1]:
                best = (est, spread, p)
            if spread <= tol:
                return SpectralEstimate(est, k, spread, p == 1, p)
    est, spread, p = best
    if not math.isfinite(est):
        est = math.exp(np.mean(logs)) if logs else 0.0
    return SpectralEstimate(est, max_iters, spread, False, p)


def epidemic_threshold(g: Graph, estimate: SpectralEstimate | None = None) -> float:
    """``1 / lambda1``; ``math.inf`` for acyclic graphs."""
    est = estimate or spectral_radius(g)
    return est.threshold


@dataclass
class PathSeriesReport:
    alpha: float
    t_max: int
    series_l1: np.ndarray
    expected_path_length: np.ndarray
    log_series_l1: np.ndarray
    diverging: bool

    def rows(self):
        for k in range(self.t_max + 1):
            yield k, float(self.series_l1[k]), float(self.expected_path_length[k])


def path_series(g: Graph, alpha: float, t_max: int) -> PathSeriesReport:
    """Accumulate ``||S(alpha, k)||_1`` and the expected path length.

    ``S(alpha, t) = sum_{k<=t} (alpha A)^k`` and ``||M||_1`` is the sum of
    all entries, so the k-th term is ``1^T (alpha A)^k 1``. The row vector
    ``1^T (alpha A)^k`` is advanced one sparse product per step and kept
    normalized; its log-norm is tracked so the sums survive past the
    floating-point range when ``alpha * lambda1 > 1``.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    n = g.node_count
    log_terms = np.full(t_max + 1, -np.inf)
    if n:
        log_terms[0] = math.log(n)
        v = np.ones(n) / n
        log_scale = math.log(n)
        for k in range(1, t_max + 1):
            if alpha == 0:
                break
            v = alpha * g.left_multiply(v)
            total = v.sum()
            if total <= 0:
                break
            log_scale += math.log(total)
            v /= total
            log_terms[k] = log_scale
    ks = np.arange(t_max + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_den = np.logaddexp.accumulate(log_terms)
        log_num = np.logaddexp.accumulate(log_terms + np.log(ks))
        length = np.exp(log_num - log_den)
    length = np.where(np.isfinite(log_den), length, 0.0)
    with np.errstate(over="ignore"):
        series = np.exp(log_den)
    finite = log_terms[np.isfinite(log_terms)]
    diverging = False
    if finite.size >= 3:
        tail = finite[finite.size // 2:]
        growth = (tail[-1] - tail[0]) / max(tail.size - 1, 1)
        diverging = bool(growth > 1e-9)
    return PathSeriesReport(alpha=float(alpha), t_max=int(t_max), series_l1=series,
                            expected_path_length=length, log_series_l1=log_den,
                            diverging=diverging)


def expected_path_length_asymptotic(g: Graph, alpha: float,
                                    estimate: SpectralEstimate | None = None) -> float:
    """Closed-form approximation ``1 / (1 - alpha * lambda1)``.

    Returns ``math.inf`` above the threshold, where the exact length grows
    linearly in the horizon instead of converging.
    """
    lam = (estimate or spectral_radius(g)).lambda1
    x = alpha * lam
    if abs(x - 1.0) < SINGULAR_MARGIN:
        raise ValueError(f"alpha={alpha} is within {SINGULAR_MARGIN:g} of 1/lambda1="
                         f"{1 / lam:.6g}; the approximation is singular there")
    if x > 1.0:
        return math.inf
    return 1.0 / (1.0 - x)


def path_length_regime(g: Graph, alpha: float, estimate=None) -> str:
    """``'bounded'`` below the threshold, ``'O(t)'`` above it."""
    lam = (estimate or spectral_radius(g)).lambda1
    return "O(t)" if alpha * lam > 1.0 else "bounded"
