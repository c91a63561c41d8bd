from datetime import datetime, timedelta, timezone

import pytest

from forumflux.community import Community
from forumflux.graph import InteractionGraph, SnapshotWindow
from forumflux.ingest import PostRecord

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)


def make_post(post_id, thread_id, user_id, minutes=0, body="hello"):
    return PostRecord(post_id=post_id, thread_id=thread_id, user_id=user_id,
                      created_at=T0 + timedelta(minutes=minutes), body=body)


def make_graph(edges, snapshot_index=0, extra_nodes=()):
    """Graph from (u, v) or (u, v, weight) tuples."""
    nodes = set(extra_nodes)
    edge_map = {}
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else 1
        a, b = (u, v) if u < v else (v, u)
        nodes.update((a, b))
        edge_map[(a, b)] = w
    return InteractionGraph(snapshot_index=snapshot_index, nodes=frozenset(nodes),
                            edges=edge_map)


def make_community(members, community_id=0, snapshot_index=0):
    return Community(snapshot_index=snapshot_index, community_id=community_id,
                     members=frozenset(members))


@pytest.fixture
def day_window():
    return SnapshotWindow(index=0, start=T0, end=T0 + timedelta(days=1))


TWO_TRIANGLES_BRIDGE = [("a", "b"), ("a", "c"), ("b", "c"),
                        ("d", "e"), ("d", "f"), ("e", "f"),
                        ("c", "d")]
