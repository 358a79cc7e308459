"""Empirical influence from vote logs and its correlation with centrality.

Follower graphs use the convention that an edge ``u -> v`` means "u
follows v". A story's cascade starts at its submitter; a voter joins when
they follow someone already in the cascade at the time of the vote.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

from .centrality import (CentralityConfig, ConvergenceBoundError,
                         normalized_alpha_centrality, pagerank)
from .graph import Graph
from .spectral import spectral_radius

LOG_HEADER = ("story_id", "user_id", "timestamp", "kind")
SUBMISSION, VOTE = "submission", "vote"


class ActivityLogError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    """One of the score vectors has zero variance."""


class Event(NamedTuple):
    story_id: str
    user_id: str
    timestamp: float
    kind: str


@dataclass
class Story:
    story_id: str
    submission: Event
    votes: list


@dataclass
class ActivityLog:
    """Events grouped by story and sorted by time; the submission leads."""

    stories: dict
    timestamp_ties: int = 0

    @property
    def events(self) -> list:
        out = []
        for st in self.stories.values():
            out.append(st.submission)
            out.extend(st.votes)
        return out

    def story(self, story_id) -> Story:
        try:
            return self.stories[story_id]
        except KeyError:
            raise KeyError(f"unknown story_id {story_id!r}") from None

    def __len__(self):
        return len(self.stories)

    @classmethod
    def from_events(cls, events: Iterable[Event]) -> "ActivityLog":
        grouped = defaultdict(list)
        for i, ev in enumerate(events):
            grouped[ev.story_id].append((i, ev))
        stories = {}
        ties = 0
        for sid in sorted(grouped):
            rows = grouped[sid]
            subs = [ev for _, ev in rows if ev.kind == SUBMISSION]
            if not subs:
                raise ActivityLogError(f"story {sid!r} has no submission")
            if len(subs) > 1:
                raise ActivityLogError(f"story {sid!r} has {len(subs)} submissions")
            sub = subs[0]
            votes = sorted(((ev.timestamp, i, ev) for i, ev in rows if ev.kind == VOTE),
                           key=lambda x: (x[0], x[1]))
            seen = set()
            for ts, _, ev in votes:
                if ts < sub.timestamp:
                    raise ActivityLogError(
                        f"story {sid!r}: vote by {ev.user_id!r} at {ts} precedes "
                        f"the submission at {sub.timestamp}")
                if ev.user_id in seen:
                    raise ActivityLogError(f"story {sid!r}: duplicate vote by {ev.user_id!r}")
                seen.add(ev.user_id)
            stamps = [sub.timestamp] + [ts for ts, _, _ in votes]
            ties += sum(1 for a, b in zip(stamps, stamps[1:]) if a == b)
            stories[sid] = Story(sid, sub, [ev for _, _, ev in votes])
        return cls(stories, ties)


def load_activity_log(source) -> ActivityLog:
    """Read a ``story_id,user_id,timestamp,kind`` CSV (path, stream or text)."""
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    elif isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != LOG_HEADER:
        raise ActivityLogError(f"expected header {','.join(LOG_HEADER)}, got {header}")
    events = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ActivityLogError(f"line {lineno}: expected 4 fields, got {len(row)}")
        sid, uid, ts, kind = (c.strip() for c in row)
        try:
            t = float(ts)
        except ValueError:
            raise ActivityLogError(f"line {lineno}: bad timestamp {ts!r}") from None
        if not math.isfinite(t):
            raise ActivityLogError(f"line {lineno}: bad timestamp {ts!r}")
        if kind not in (SUBMISSION, VOTE):
            raise ActivityLogError(f"line {lineno}: kind must be submission or vote")
        if not sid or not uid:
            raise ActivityLogError(f"line {lineno}: empty story_id or user_id")
        events.append(Event(sid, uid, t, kind))
    return ActivityLog.from_events(events)


def write_activity_log(events: Iterable[Event], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for ev in events:
        writer.writerow([ev.story_id, ev.user_id, repr(float(ev.timestamp)), ev.kind])


@dataclass
class CascadeRecord:
    story_id: str
    submitter: str
    members: list

    @property
    def size(self) -> int:
        return len(self.members)


def _follows(g: Graph, user: str) -> set:
    if not g.has_label(user):
        return set()
    targets, _ = g.out_edges(g.index_of(user))
    return set(targets.tolist())


def extract_cascade(g: Graph, log: ActivityLog, story_id) -> CascadeRecord:
    story = log.story(story_id)
    sub = story.submission.user_id
    members = [sub]
    member_idx = {g.index_of(sub)} if g.has_label(sub) else set()
    for ev in story.votes:
        if ev.user_id == sub:
            continue
        if _follows(g, ev.user_id) & member_idx:
            members.append(ev.user_id)
            member_idx.add(g.index_of(ev.user_id))
    return CascadeRecord(story.story_id, sub, members)


@dataclass
class InfluenceEstimate:
    user_id: str
    stories_counted: int
    avg_follower_votes: float
    avg_cascade_size: float


def follower_votes(g: Graph, story: Story, first_k: int | None = None) -> int:
    sub = story.submission.user_id
    if not g.has_label(sub):
        return 0
    target = g.index_of(sub)
    votes = story.votes if first_k is None else story.votes[:first_k]
    return sum(1 for ev in votes if ev.user_id != sub and target in _follows(g, ev.user_id))


def influence_estimates(g: Graph, log: ActivityLog, min_stories: int = 2,
                        min_votes: int = 100, first_k: int | None = None):
    """Average follower votes and cascade size per eligible submitter.

    A story qualifies with at least ``min_votes`` votes; a submitter is
    eligible with at least ``min_stories`` qualifying stories. ``first_k``
    counts follower votes among the first ``k`` votes only.
    """
    per_user = defaultdict(list)
    for sid, story in log.stories.items():
        if len(story.votes) < min_votes:
            continue
        per_user[story.submission.user_id].append(
            (follower_votes(g, story, first_k), extract_cascade(g, log, sid).size))
    out = []
    for user in sorted(per_user):
        vals = per_user[user]
        if len(vals) < min_stories:
            continue
        fv, cs = zip(*vals)
        out.append(InfluenceEstimate(user, len(vals), float(np.mean(fv)), float(np.mean(cs))))
    return out


def pearson_rank_correlation(a, b) -> float:
    """Pearson correlation of average-tie ranks (Spearman with tie correction)."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape or a.size < 2:
        raise ValueError("need two score vectors of equal length >= 2")
    ra = rankdata(a, method="average")
    rb = rankdata(b, method="average")
    ra -= ra.mean()
    rb -= rb.mean()
    den = math.sqrt(float(ra @ ra) * float(rb @ rb))
    if den == 0.0:
        raise UndefinedCorrelationError("rank correlation undefined for a constant ranking")
    return float(np.clip((ra @ rb) / den, -1.0, 1.0))


def default_alpha_grid() -> np.ndarray:
    coarse = np.round(np.arange(0, 101) * 0.01, 10)
    inset = np.round(np.arange(0, 21) * 0.0005, 10)
    return np.unique(np.concatenate([coarse, inset]))


ESTIMATES = ("follower_votes", "cascade_size")


class SweepRow(NamedTuple):
    alpha: float
    metric: str
    estimate: str
    correlation: float
    excluded_reason: str


@dataclass
class CorrelationSweep:
    alpha_grid: list
    rows: list = field(default_factory=list)
    users: list = field(default_factory=list)
    lambda1: float = 0.0

    @property
    def excluded(self):
        return [(r.alpha, r.metric, r.excluded_reason) for r in self.rows if r.excluded_reason]

    def curve(self, metric, estimate):
        pts = [(r.alpha, r.correlation) for r in self.rows
               if r.metric == metric and r.estimate == estimate and not r.excluded_reason]
        return np.array(pts).reshape(-1, 2)

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "metric", "estimate", "correlation", "excluded_reason"])
        for r in self.rows:
            corr = "" if r.excluded_reason else repr(r.correlation)
            writer.writerow([repr(r.alpha), r.metric, r.estimate, corr, r.excluded_reason])


def _metric_scores(g, metric, alpha, est, nac_start, tol, max_iterations):
    if metric == "pagerank":
        cfg = CentralityConfig(alpha=alpha, start="uniform", tol=tol,
                               max_iterations=max_iterations, allow_alpha_one=True)
        return pagerank(g, cfg).scores
    if metric == "nacentrality":
        cfg = CentralityConfig(alpha=alpha, start=nac_start, tol=tol,
                               max_iterations=max_iterations)
        return normalized_alpha_centrality(g, cfg, estimate=est).scores
    raise ValueError(f"unknown metric {metric!r}")


def correlation_sweep(g: Graph, log: ActivityLog | None, alpha_grid=None,
                      metrics: Sequence[str] = ("pagerank", "nacentrality"),
                      estimates: list | None = None, exclusion: float = 0.01,
                      nac_start="indegree", tol: float = 1e-9,
                      max_iterations: int = 10_000, **estimate_kwargs) -> CorrelationSweep:
    """Correlate metric rankings with empirical rankings along ``alpha_grid``.

    Only submitters that have estimates and appear in ``g`` are ranked.
    PageRank at ``alpha = 0`` gives a constant ranking and is skipped;
    normalized Alpha-Centrality is skipped within ``exclusion`` (relative)
    of ``1/lambda1``.
    """
    if estimates is None:
        estimates = influence_estimates(g, log, **estimate_kwargs)
    ests = [e for e in estimates if g.has_label(e.user_id)]
    if not ests:
        raise ValueError("no eligible users with influence estimates in the graph")
    idx = np.array([g.index_of(e.user_id) for e in ests])
    truth = {"follower_votes": np.array([e.avg_follower_votes for e in ests]),
             "cascade_size": np.array([e.avg_cascade_size for e in ests])}
    grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, float)
    est = spectral_radius(g)
    sweep = CorrelationSweep(alpha_grid=[float(a) for a in grid],
                             users=[e.user_id for e in ests], lambda1=est.lambda1)
    for alpha in grid:
        alpha = float(alpha)
        for metric in metrics:
            reason = ""
            scores = None
            if metric == "pagerank" and alpha == 0.0:
                reason = "pagerank constant at alpha=0"
            elif (metric == "nacentrality" and est.lambda1 > 0
                  and abs(alpha * est.lambda1 - 1.0) <= exclusion):
                reason = "within singular window of 1/lambda1"
            else:
                try:
                    scores = _metric_scores(g, metric, alpha, est, nac_start, tol,
                                            max_iterations)[idx]
                except ConvergenceBoundError as exc:
                    reason = str(exc)
            for name in ESTIMATES:
                corr, why = math.nan, reason
                if scores is not None:
                    try:
                        corr = pearson_rank_correlation(scores, truth[name])
                    except UndefinedCorrelationError:
                        why = "zero variance"
                sweep.rows.append(SweepRow(alpha, metric, name, corr, why))
    return sweep
