"""Directed weighted sparse graphs.

A :class:`Graph` is immutable once built. Nodes are dense integer indices
``0..n-1``; external string labels map onto them in first-appearance order.
Edges are stored twice, grouped by source (out-adjacency) and by target
(in-adjacency), and the sparse adjacency matrix ``A[u, v] = w(u, v)`` is
exposed for row-vector products ``x @ A``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised for malformed or invalid edge-list input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DegreeTable:
    out_degree: np.ndarray
    in_degree: np.ndarray
    d_max: float


class Graph:
    """Immutable directed weighted graph.

    Parameters
    ----------
    node_count : int
        Number of nodes.
    src, dst, weight : array-like
        Edge endpoints and strictly positive finite weights.
    labels : sequence of str, optional
        External identifiers, one per node. Defaults to ``"0".."n-1"``.
    allow_self_loops : bool
        Reject ``u -> u`` edges when False.
    """

    def __init__(self, node_count, src, dst, weight=None, labels=None,
                 allow_self_loops=True):
        n = int(node_count)
        if n < 0:
            raise ValueError("node_count must be non-negative")
        src = np.asarray(src, dtype=np.int64).reshape(-1)
        dst = np.asarray(dst, dtype=np.int64).reshape(-1)
        if weight is None:
            weight = np.ones(src.shape[0])
        weight = np.asarray(weight, dtype=np.float64).reshape(-1)
        if not (src.shape == dst.shape == weight.shape):
            raise ValueError("src, dst and weight must have equal length")
        if src.size:
            if src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n:
                raise ValueError("edge endpoint out of range [0, node_count)")
            if not np.all(np.isfinite(weight)) or np.any(weight <= 0):
                raise ValueError("edge weights must be strictly positive and finite")
            if not allow_self_loops and np.any(src == dst):
                raise ValueError("self-loops are not allowed")
            keys = src * n + dst
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate (source, target) edge")

        if labels is None:
            labels = [str(i) for i in range(n)]
        labels = [str(x) for x in labels]
        if len(labels) != n:
            raise ValueError("labels must have one entry per node")
        index = {lab: i for i, lab in enumerate(labels)}
        if len(index) != n:
            raise ValueError("node labels must be unique")

        # Stable sorts keep input order inside each adjacency list.
        out_order = np.argsort(src, kind="stable")
        in_order = np.argsort(dst, kind="stable")
        self._n = n
        self._src = _frozen(src[out_order])
        self._dst = _frozen(dst[out_order])
        self._w = _frozen(weight[out_order])
        self._out_ptr = _frozen(np.concatenate(
            [[0], np.cumsum(np.bincount(src, minlength=n))]).astype(np.int64))
        self._in_src = _frozen(src[in_order])
        self._in_w = _frozen(weight[in_order])
        self._in_ptr = _frozen(np.concatenate(
            [[0], np.cumsum(np.bincount(dst, minlength=n))]).astype(np.int64))
        self._labels = tuple(labels)
        self._index = index
        self._input_order = _frozen(out_order)

    # -- basic accessors -------------------------------------------------

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return int(self._src.size)

    def __len__(self):
        return self._n

    def __repr__(self):
        return f"Graph(node_count={self._n}, edge_count={self.edge_count})"

    @property
    def edges(self):
        """``(src, dst, weight)`` arrays grouped by source node."""
        return self._src, self._dst, self._w

    @property
    def labels(self) -> tuple:
        return self._labels

    def index_of(self, label: str) -> int:
        return self._index[label]

    def label_of(self, index: int) -> str:
        return self._labels[index]

    def has_label(self, label: str) -> bool:
        return label in self._index

    def out_edges(self, u: int):
        """Targets and weights of ``u``'s out-edges, in input order."""
        lo, hi = self._out_ptr[u], self._out_ptr[u + 1]
        return self._dst[lo:hi], self._w[lo:hi]

    def in_edges(self, v: int):
        lo, hi = self._in_ptr[v], self._in_ptr[v + 1]
        return self._in_src[lo:hi], self._in_w[lo:hi]

    def out_adjacency(self):
        return [list(zip(*(a.tolist() for a in self.out_edges(u))))
                for u in range(self._n)]

    def in_adjacency(self):
        return [list(zip(*(a.tolist() for a in self.in_edges(v))))
                for v in range(self._n)]

    def edge_set(self):
        return {(int(u), int(v), float(w)) for u, v, w in zip(*self.edges)}

    # -- derived matrices ------------------------------------------------

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse ``A`` with ``A[u, v] = w(u, v)``."""
        return sp.csr_matrix((self._w, (self._src, self._dst)),
                             shape=(self._n, self._n))

    @cached_property
    def adjacency_t(self) -> sp.csr_matrix:
        return self.adjacency.T.tocsr()

    def left_multiply(self, x):
        """Row-vector product ``x @ A``."""
        return self.adjacency_t @ np.asarray(x, dtype=np.float64)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self._src, weights=self._w, minlength=self._n))

    @cached_property
    def in_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self._dst, weights=self._w, minlength=self._n))

    def to_dense(self):
        return self.adjacency.toarray()

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self._n == other._n and self._labels == other._labels
                and self.edge_set() == other.edge_set())

    __hash__ = None

    # -- construction helpers --------------------------------------------

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence], node_count=None, labels=None,
                   allow_self_loops=True):
        """Build from ``(u, v)`` or ``(u, v, w)`` integer tuples."""
        edges = list(edges)
        src = [e[0] for e in edges]
        dst = [e[1] for e in edges]
        w = [e[2] if len(e) > 2 else 1.0 for e in edges]
        if node_count is None:
            node_count = max([*src, *dst], default=-1) + 1
        return cls(node_count, src, dst, w, labels=labels,
                   allow_self_loops=allow_self_loops)


def degrees(g: Graph) -> DegreeTable:
    out = g.out_degree
    return DegreeTable(out_degree=out, in_degree=g.in_degree,
                       d_max=float(out.max()) if out.size else 0.0)


def transpose(g: Graph) -> Graph:
    src, dst, w = g.edges
    return Graph(g.node_count, dst, src, w, labels=g.labels)


def load_edge_list(source, allow_self_loops=True, reverse=False) -> Graph:
    """Parse a ``src dst [weight]`` edge list.

    ``source`` may be a path, a text/binary stream, or bytes. Fields are
    separated by tabs or whitespace; blank lines and lines starting with
    ``#`` are skipped. Labels are assigned indices in order of first
    appearance. ``reverse`` flips every edge after parsing.
    """
    text = _read_text(source)
    labels: dict[str, int] = {}
    src, dst, wts = [], [], []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(
                f"expected 'src dst [weight]', got {len(parts)} fields", lineno)
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"malformed weight {parts[2]!r}", lineno) from None
            if not math.isfinite(w) or w <= 0:
                raise GraphFormatError(f"weight must be positive and finite, got {parts[2]}",
                                       lineno)
        u = labels.setdefault(parts[0], len(labels))
        v = labels.setdefault(parts[1], len(labels))
        if u == v and not allow_self_loops:
            raise GraphFormatError(f"self-loop on {parts[0]!r}", lineno)
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge {parts[0]} -> {parts[1]}", lineno)
        seen.add((u, v))
        src.append(u)
        dst.append(v)
        wts.append(w)
    if reverse:
        src, dst = dst, src
    return Graph(len(labels), src, dst, wts, labels=list(labels))


def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data


def dump_edge_list(g: Graph, fh: IO[str] | None = None) -> str:
    """Serialize as a tab-separated edge list (full float precision).

    Nodes without edges cannot be represented; use :func:`graph_metadata`
    to carry the full label map.
    """
    out = io.StringIO()
    src, dst, w = g.edges
    # Emit in the original input order so first-appearance labels survive a reload.
    pos = np.empty_like(g._input_order)
    pos[g._input_order] = np.arange(pos.size)
    src, dst, w = src[pos], dst[pos], w[pos]
    for u, v, x in zip(src.tolist(), dst.tolist(), w.tolist()):
        out.write(f"{g.label_of(u)}\t{g.label_of(v)}\t{x!r}\n")
    text = out.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def graph_metadata(g: Graph) -> dict:
    return {"node_count": g.node_count, "edge_count": g.edge_count,
            "labels": {lab: i for i, lab in enumerate(g.labels)}}


def write_metadata(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_metadata(g), fh, indent=2)


# -- small generators used by tests and the CLI --------------------------

def cycle_graph(n: int) -> Graph:
    return Graph(n, np.arange(n), (np.arange(n) + 1) % n)


def path_graph(n: int) -> Graph:
    return Graph(n, np.arange(n - 1), np.arange(1, n))


def complete_graph(n: int) -> Graph:
    u, v = np.nonzero(~np.eye(n, dtype=bool))
    return Graph(n, u, v)


def star_graph(leaves: int, undirected=False) -> Graph:
    """Center 0 with edges to ``leaves`` leaves (and back if undirected)."""
    edges = [(0, i) for i in range(1, leaves + 1)]
    if undirected:
        edges += [(i, 0) for i in range(1, leaves + 1)]
    return Graph.from_edges(edges, node_count=leaves + 1)


def erdos_renyi(n: int, p: float, seed=None, self_loops=False) -> Graph:
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    if not self_loops:
        np.fill_diagonal(mask, False)
    u, v = np.nonzero(mask)
    return Graph(n, u, v)
