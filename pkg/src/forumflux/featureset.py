"""Assembly of the 18-feature vector per labeled user.

Current-window fields come from the feature snapshot itself; every "*_before"
and "last_*" field looks strictly before the feature window's start, so the
vector never peeks at the window it describes. A user with no prior posts
gets zeroed history fields, with times_appeared_before = 0 as the
disambiguator, and last_activity measured from the corpus start.
"""

from __future__ import annotations

import io
from bisect import bisect_left
from dataclasses import astuple, dataclass

import numpy as np

from . import community as community_mod
from . import graph as graph_mod
from .errors import DegenerateDatasetError, ForumFluxError
from .evolution import Role, Task, label_all
from .lexifeat import text_measures

FEATURE_NAMES = [
    "sentiment", "cognition", "intent",
    "connectiveness", "betweenness",
    "times_appeared_before",
    "avg_sentiment_before", "avg_cognition_before", "avg_intent_before",
    "avg_connectiveness", "avg_betweenness",
    "last_sentiment", "last_cognition", "last_intent",
    "last_connectiveness", "last_betweenness",
    "last_activity",
    "modularity",
]

N_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class FeatureVector:
    sentiment: float
    cognition: float
    intent: float
    connectiveness: float
    betweenness: float
    times_appeared_before: float
    avg_sentiment_before: float
    avg_cognition_before: float
    avg_intent_before: float
    avg_connectiveness: float
    avg_betweenness: float
    last_sentiment: float
    last_cognition: float
    last_intent: float
    last_connectiveness: float
    last_betweenness: float
    last_activity: float
    modularity: float

    def to_array(self):
        return np.array(astuple(self), dtype=np.float64)


@dataclass(frozen=True)
class LabeledExample:
    user_id: str
    snapshot_index: int
    task: Task
    label: int               # 1 = Joining/Leaving, 0 = Previous/Staying
    features: FeatureVector


class FeatureContext:
    """Everything feature assembly needs, precomputed per corpus.

    Holds the windows, per-snapshot graphs/centralities, detected communities
    with their modularity, per-post text measures, and per-user post indexes
    sorted by time.
    """

    def __init__(self, posts, windows, graphs, communities_by_snapshot,
                 lexicon, patterns, backend=None):
        self.posts = list(posts)
        self.windows = list(windows)
        self.graphs = {g.snapshot_index: g for g in graphs}
        self.communities = communities_by_snapshot
        self.corpus_start = min(p.created_at for p in self.posts)

        self.closeness = {}
        self.betweenness = {}
        for idx, g in self.graphs.items():
            clo, bet = graph_mod.centrality_all(g, backend=backend)
            self.closeness[idx] = clo
            self.betweenness[idx] = bet
        self.snapshot_modularity = {
            idx: community_mod.modularity(self.graphs[idx], self.communities.get(idx, []))
            for idx in self.graphs
        }

        self.post_measures = {
            p.post_id: text_measures(p.body, lexicon, patterns) for p in self.posts
        }
        self.user_posts = {}
        for pos, p in enumerate(self.posts):
            self.user_posts.setdefault(p.user_id, []).append((p.created_at, pos, p))
        for entry in self.user_posts.values():
            entry.sort(key=lambda t: (t[0], t[1]))
        self.user_snapshots = {}
        for idx in sorted(self.graphs):
            for user in self.graphs[idx].nodes:
                self.user_snapshots.setdefault(user, []).append(idx)

    @classmethod
    def build(cls, posts, window_days, lexicon, patterns, prop_config, backend=None):
        """Run windowing, graphs, and community detection over a corpus."""
        if not posts:
            raise ForumFluxError("cannot build a feature context from an empty corpus")
        times = [p.created_at for p in posts]
        windows = graph_mod.build_windows(min(times), max(times), window_days)
        graphs = [graph_mod.build_graph(posts, w) for w in windows]
        communities = {
            g.snapshot_index: community_mod.detect_communities(g, prop_config)
            for g in graphs
        }
        return cls(posts, windows, graphs, communities, lexicon, patterns, backend=backend)

    def labels(self):
        return label_all(self.communities)


def user_window_measures(user, window, posts, lexicon, patterns):
    """Summed per-post text measures for one user inside one window."""
    s = c = i = 0
    for p in posts:
        if p.user_id == user and window.start <= p.created_at < window.end:
            m = text_measures(p.body, lexicon, patterns)
            s += m.sentiment
            c += m.cognition
            i += m.intent
    from .lexifeat import TextMeasures
    return TextMeasures(sentiment=s, cognition=c, intent=i)


def assemble_features(ctx, user, snapshot_index):
    """The 18-feature vector for a user at a feature snapshot."""
    window = ctx.windows[snapshot_index]
    graph = ctx.graphs[snapshot_index]
    entry = ctx.user_posts.get(user)
    if entry is None:
        raise ForumFluxError(f"unknown user {user!r}")
    in_window = [p for ts, _, p in entry if window.start <= ts < window.end]
    if not in_window and user not in graph.nodes:
        raise ForumFluxError(
            f"user {user!r} has no activity at snapshot {snapshot_index}")

    sentiment = cognition = intent = 0
    for p in in_window:
        m = ctx.post_measures[p.post_id]
        sentiment += m.sentiment
        cognition += m.cognition
        intent += m.intent

    times = [ts for ts, _, _ in entry]
    n_before = bisect_left(times, window.start)
    if n_before > 0:
        prior = [ctx.post_measures[entry[k][2].post_id] for k in range(n_before)]
        avg_sent = sum(m.sentiment for m in prior) / n_before
        avg_cog = sum(m.cognition for m in prior) / n_before
        avg_int = sum(m.intent for m in prior) / n_before
        last = prior[-1]
        last_sent, last_cog, last_int = last.sentiment, last.cognition, last.intent
        last_post_ts = entry[n_before - 1][0]
        last_activity = (window.start - last_post_ts).total_seconds() / graph_mod.SECONDS_PER_DAY
    else:
        avg_sent = avg_cog = avg_int = 0.0
        last_sent = last_cog = last_int = 0.0
        last_activity = (window.start - ctx.corpus_start).total_seconds() / graph_mod.SECONDS_PER_DAY

    prior_snaps = [j for j in ctx.user_snapshots.get(user, []) if j < snapshot_index]
    if prior_snaps:
        avg_clo = sum(ctx.closeness[j][user] for j in prior_snaps) / len(prior_snaps)
        avg_bet = sum(ctx.betweenness[j][user] for j in prior_snaps) / len(prior_snaps)
        last_j = prior_snaps[-1]
        last_clo = ctx.closeness[last_j][user]
        last_bet = ctx.betweenness[last_j][user]
    else:
        avg_clo = avg_bet = last_clo = last_bet = 0.0

    return FeatureVector(
        sentiment=float(sentiment),
        cognition=float(cognition),
        intent=float(intent),
        connectiveness=ctx.closeness[snapshot_index].get(user, 0.0),
        betweenness=ctx.betweenness[snapshot_index].get(user, 0.0),
        times_appeared_before=float(n_before),
        avg_sentiment_before=avg_sent,
        avg_cognition_before=avg_cog,
        avg_intent_before=avg_int,
        avg_connectiveness=avg_clo,
        avg_betweenness=avg_bet,
        last_sentiment=float(last_sent),
        last_cognition=float(last_cog),
        last_intent=float(last_int),
        last_connectiveness=last_clo,
        last_betweenness=last_bet,
        last_activity=last_activity,
        modularity=ctx.snapshot_modularity[snapshot_index],
    )


def build_dataset(labels, task, ctx):
    """Labeled examples for one task.

    JoinVsPrevious vectors are taken at the current snapshot t; LeaveVsStay
    vectors at t-1, the last snapshot where leavers are still present, which
    keeps the prediction causal. Duplicate (user, snapshot) rows collapse
    with positive-label precedence.
    """
    positive_role, negative_role = {
        Task.JOIN_VS_PREVIOUS: (Role.JOINING, Role.PREVIOUS),
        Task.LEAVE_VS_STAY: (Role.LEAVING, Role.STAYING),
    }[task]
    rows = {}
    for label in labels:
        if label.role not in (positive_role, negative_role):
            continue
        snap = label.snapshot_index if task is Task.JOIN_VS_PREVIOUS else label.snapshot_index - 1
        y = 1 if label.role is positive_role else 0
        key = (label.user_id, snap)
        if key in rows and rows[key] >= y:
            continue
        rows[key] = y
    if not any(y == 1 for y in rows.values()) or not any(y == 0 for y in rows.values()):
        raise DegenerateDatasetError(
            f"task {task.value} needs at least one positive and one negative example")
    examples = []
    for (user, snap) in sorted(rows, key=lambda k: (k[1], k[0])):
        examples.append(LabeledExample(
            user_id=user,
            snapshot_index=snap,
            task=task,
            label=rows[(user, snap)],
            features=assemble_features(ctx, user, snap),
        ))
    return examples


def dataset_to_arrays(examples):
    """(X, y) float64 arrays in example order."""
    X = np.stack([ex.features.to_array() for ex in examples])
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    return X, y


def dataset_csv(examples):
    """CSV task,snapshot_index,user_id,label,<18 feature columns>."""
    buf = io.StringIO()
    buf.write("task,snapshot_index,user_id,label," + ",".join(FEATURE_NAMES) + "\n")
    ordered = sorted(examples, key=lambda e: (e.task.value, e.snapshot_index, e.user_id))
    for ex in ordered:
        values = ",".join(repr(v) for v in astuple(ex.features))
        buf.write(f"{ex.task.value},{ex.snapshot_index},{ex.user_id},{ex.label},{values}\n")
    return buf.getvalue()
