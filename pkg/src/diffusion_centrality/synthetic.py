"""Synthetic follower graphs and broadcast-cascade vote logs.

Users get a planted influence weight. Each story starts with a random
submitter; every user who acts on the story (submits or votes) exposes it
to all of their followers, each of whom votes with probability
``min(1, base_rate * weight(exposer))`` after an exponential delay. A few
background votes from random users are mixed in to mimic exposure from
outside the network.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .influence import SUBMISSION, VOTE, ActivityLog, Event


@dataclass
class SyntheticData:
    graph: Graph
    events: list
    planted: np.ndarray

    @property
    def log(self) -> ActivityLog:
        return ActivityLog.from_events(self.events)


def follower_graph(n: int, rng, mean_follows: float = 6.0, popularity_shape: float = 1.5,
                   activity_sigma: float = 1.0) -> Graph:
    """Directed graph where ``u -> v`` means u follows v.

    Follow counts are log-normal (heavy tail of users who follow many);
    whom to follow is drawn in proportion to a Pareto popularity score.
    """
    if n < 2:
        raise ValueError("need at least two users")
    popularity = rng.pareto(popularity_shape, n) + 1.0
    follows = rng.lognormal(np.log(mean_follows) - activity_sigma ** 2 / 2, activity_sigma, n)
    follows = np.clip(np.rint(follows), 1, n - 1).astype(int)
    src, dst = [], []
    for u in range(n):
        p = popularity.copy()
        p[u] = 0.0
        p /= p.sum()
        targets = rng.choice(n, size=follows[u], replace=False, p=p)
        src.extend([u] * targets.size)
        dst.extend(targets.tolist())
    return Graph(n, src, dst, labels=[f"u{i}" for i in range(n)])


def broadcast_cascades(g: Graph, planted, n_cascades: int, rng, base_rate: float = 0.25,
                       background_votes: int = 2, horizon: float = 50.0) -> list:
    n = g.node_count
    prob = np.minimum(1.0, base_rate * np.asarray(planted))
    followers = [g.in_edges(v)[0].tolist() for v in range(n)]
    labels = g.labels
    events = []
    for k in range(n_cascades):
        sid = f"s{k:05d}"
        t0 = float(k) * (horizon + 1.0)
        sub = int(rng.integers(n))
        events.append(Event(sid, labels[sub], t0, SUBMISSION))
        acted = {sub}
        heap = [(t0, sub)]
        votes = []
        while heap:
            t, u = heapq.heappop(heap)
            for y in followers[u]:
                if y in acted:
                    continue
                if rng.random() < prob[u]:
                    ty = t + float(rng.exponential(1.0))
                    if ty - t0 > horizon:
                        continue
                    acted.add(y)
                    votes.append((ty, y))
                    heapq.heappush(heap, (ty, y))
        for _ in range(background_votes):
            y = int(rng.integers(n))
            if y not in acted:
                acted.add(y)
                votes.append((t0 + float(rng.uniform(0.0, horizon)), y))
        votes.sort()
        events.extend(Event(sid, labels[y], ty, VOTE) for ty, y in votes)
    return events


def synth(n_users: int = 200, n_cascades: int = 1000, seed: int = 0,
          mean_follows: float = 6.0, base_rate: float = 0.25,
          background_votes: int = 2) -> SyntheticData:
    """Deterministic synthetic dataset for a given seed."""
    if n_cascades < 0:
        raise ValueError("n_cascades must be >= 0")
    rng = np.random.default_rng(seed)
    g = follower_graph(n_users, rng, mean_follows=mean_follows)
    planted = rng.uniform(0.5, 1.5, n_users)
    events = broadcast_cascades(g, planted, n_cascades, rng, base_rate=base_rate,
                                background_votes=background_votes)
    return SyntheticData(g, events, planted)
