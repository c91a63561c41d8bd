"""Temporal windowing and per-window co-participation graphs.

Every post maps to exactly one fixed-width window counted from the corpus
first post. Within a window, two users are connected iff they posted in at
least one common thread; the edge weight is the number of distinct shared
threads. Centralities are computed on the unweighted graph.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import ConfigError

SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class SnapshotWindow:
    index: int
    start: datetime  # inclusive
    end: datetime    # exclusive


@dataclass(frozen=True)
class InteractionGraph:
    snapshot_index: int
    nodes: frozenset        # of user_id
    edges: dict             # (user_a, user_b) with user_a < user_b -> weight

    def neighbors(self):
        """Adjacency map user_id -> set of user_id."""
        adj = {u: set() for u in self.nodes}
        for (a, b) in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def build_windows(first_post, last_post, window_days):
    """Contiguous window_days-wide windows covering [first_post, last_post]."""
    if window_days <= 0:
        raise ConfigError(f"window_days must be positive, got {window_days}")
    if first_post > last_post:
        raise ConfigError("first_post must not be after last_post")
    span_days = (last_post - first_post).total_seconds() / SECONDS_PER_DAY
    count = math.floor(span_days / window_days) + 1
    width = timedelta(days=window_days)
    return [
        SnapshotWindow(index=i, start=first_post + i * width, end=first_post + (i + 1) * width)
        for i in range(count)
    ]


def window_index(first_post, ts, window_days):
    """Index of the window a timestamp falls in, counted from first_post."""
    days_since = (ts - first_post).total_seconds() / SECONDS_PER_DAY
    return math.floor(days_since / window_days)


def build_graph(posts, window):
    """Co-participation graph over the posts whose timestamps fall in window."""
    thread_users = {}
    nodes = set()
    for post in posts:
        if window.start <= post.created_at < window.end:
            nodes.add(post.user_id)
            thread_users.setdefault(post.thread_id, set()).add(post.user_id)
    edges = {}
    for users in thread_users.values():
        for a, b in combinations(sorted(users), 2):
            edges[(a, b)] = edges.get((a, b), 0) + 1
    return InteractionGraph(snapshot_index=window.index, nodes=frozenset(nodes), edges=edges)


def _to_csr(graph):
    order = sorted(graph.nodes)
    idx = {u: i for i, u in enumerate(order)}
    neigh = [[] for _ in order]
    for (a, b) in graph.edges:
        neigh[idx[a]].append(idx[b])
        neigh[idx[b]].append(idx[a])
    indptr = np.zeros(len(order) + 1, dtype=np.int64)
    indices = []
    for i, lst in enumerate(neigh):
        lst.sort()
        indices.extend(lst)
        indptr[i + 1] = len(indices)
    return order, indptr, np.asarray(indices, dtype=np.int64)


def centrality_all(graph, backend=None):
    """(closeness map, betweenness map) over every node of the graph."""
    order, indptr, indices = _to_csr(graph)
    if not order:
        return {}, {}
    closeness, betweenness = _kernels.centrality_csr(indptr, indices, backend=backend)
    return (
        {u: float(closeness[i]) for i, u in enumerate(order)},
        {u: float(betweenness[i]) for i, u in enumerate(order)},
    )


def closeness_all(graph, backend=None):
    return centrality_all(graph, backend=backend)[0]


def betweenness_all(graph, backend=None):
    return centrality_all(graph, backend=backend)[1]


def edges_csv(graphs):
    """CSV edge list snapshot_index,user_a,user_b,weight across snapshots."""
    buf = io.StringIO()
    buf.write("snapshot_index,user_a,user_b,weight\n")
    for graph in sorted(graphs, key=lambda g: g.snapshot_index):
        for (a, b) in sorted(graph.edges):
            buf.write(f"{graph.snapshot_index},{a},{b},{graph.edges[(a, b)]}\n")
    return buf.getvalue()
