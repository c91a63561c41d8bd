import io
from datetime import timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forumflux import ingest
from forumflux.errors import ConfigError, EmptyCorpusError, ParseError
from forumflux.ingest import PostRecord, SynthParams

from conftest import T0, make_post


def parse_bytes(data, fmt):
    return ingest.parse_posts(io.BytesIO(data), fmt)


class TestParsePosts:
    def test_empty_stream(self):
        assert parse_bytes(b"", "jsonl") == []
        assert parse_bytes(b"", "csv") == []

    def test_single_jsonl_row(self):
        row = (b'{"post_id":"p1","thread_id":"t1","user_id":"u1",'
               b'"created_at":"2000-04-21T00:00:00Z","body":"hi"}\n')
        records = parse_bytes(row, "jsonl")
        assert len(records) == 1
        rec = records[0]
        assert rec.post_id == "p1"
        assert rec.created_at.tzinfo == timezone.utc
        assert rec.body == "hi"

    def test_duplicate_post_id(self):
        row = ('{"post_id":"p1","thread_id":"t1","user_id":"u1",'
               '"created_at":"2000-04-21T00:00:00Z","body":"x"}\n')
        with pytest.raises(ParseError, match="p1"):
            parse_bytes((row + row).encode(), "jsonl")

    def test_malformed_row_reports_line(self):
        good = ('{"post_id":"p1","thread_id":"t1","user_id":"u1",'
                '"created_at":"2000-04-21T00:00:00Z","body":"x"}\n')
        with pytest.raises(ParseError, match="line 2"):
            parse_bytes((good + "{oops\n").encode(), "jsonl")

    def test_naive_timestamp_rejected(self):
        row = ('{"post_id":"p1","thread_id":"t1","user_id":"u1",'
               '"created_at":"2000-04-21T00:00:00","body":"x"}\n')
        with pytest.raises(ParseError, match="naive"):
            parse_bytes(row.encode(), "jsonl")

    def test_csv_round_trips_newlines_in_body(self):
        rec = make_post("p1", "t1", "u1", body="line one\nline two")
        data = ingest.serialize_posts([rec], "csv")
        assert parse_bytes(data, "csv") == [rec]

    def test_csv_bad_header(self):
        with pytest.raises(ParseError, match="header"):
            parse_bytes(b"a,b,c\n", "csv")

    def test_unknown_format(self):
        with pytest.raises(ConfigError):
            parse_bytes(b"", "xml")


_record_strategy = st.builds(
    PostRecord,
    post_id=st.uuids().map(str),
    thread_id=st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters=",\r\n\"\x00"),
                      min_size=1, max_size=8),
    user_id=st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters=",\r\n\"\x00"),
                    min_size=1, max_size=8),
    created_at=st.integers(min_value=0, max_value=10**9).map(
        lambda s: T0 + timedelta(seconds=s)),
    body=st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"),
                 max_size=40),
)


@settings(max_examples=50, deadline=None)
@given(st.lists(_record_strategy, max_size=8, unique_by=lambda r: r.post_id),
       st.sampled_from(["jsonl", "csv"]))
def test_serialize_parse_round_trip(records, fmt):
    data = ingest.serialize_posts(records, fmt)
    assert parse_bytes(data, fmt) == records


class TestCorpusStats:
    def test_two_posts_one_thread_one_user(self):
        posts = [make_post("p1", "t1", "u1"), make_post("p2", "t1", "u1", minutes=5)]
        stats = ingest.corpus_stats(posts)
        assert stats.post_count == 2
        assert stats.user_count == 1
        assert stats.thread_count == 1
        assert stats.avg_thread_depth == 2.0
        assert stats.first_post == posts[0].created_at
        assert stats.last_post == posts[1].created_at

    def test_25_posts_one_thread(self):
        posts = [make_post(f"p{i}", "t1", f"u{i % 3}", minutes=i) for i in range(25)]
        assert ingest.corpus_stats(posts).avg_thread_depth == 25.0

    def test_six_posts_three_threads(self):
        posts = [make_post(f"p{i}", f"t{i % 3}", "u1", minutes=i) for i in range(6)]
        assert ingest.corpus_stats(posts).avg_thread_depth == 6 / 3

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            ingest.corpus_stats([])

    def test_permutation_invariant(self):
        posts = [make_post(f"p{i}", f"t{i % 2}", f"u{i % 4}", minutes=i) for i in range(8)]
        assert ingest.corpus_stats(posts) == ingest.corpus_stats(list(reversed(posts)))


SMALL = SynthParams(n_users=60, n_threads=96, n_windows=4, window_days=24,
                    churn_signal_strength=1.0)


class TestSyntheticForum:
    def test_deterministic_for_fixed_seed(self):
        a = ingest.generate_synthetic_forum(3, SMALL)
        b = ingest.generate_synthetic_forum(3, SMALL)
        assert a == b
        assert ingest.serialize_posts(a, "jsonl") == ingest.serialize_posts(b, "jsonl")

    def test_different_seeds_differ(self):
        assert ingest.generate_synthetic_forum(3, SMALL) != ingest.generate_synthetic_forum(4, SMALL)

    @pytest.mark.parametrize("seed", [0, 1, 2**31, 2**32 - 1])
    def test_invariants_hold_for_any_seed(self, seed):
        posts = ingest.generate_synthetic_forum(seed, SMALL)
        ids = [p.post_id for p in posts]
        assert len(ids) == len(set(ids))
        assert all(p.thread_id and p.user_id for p in posts)
        assert all(p.created_at.tzinfo is not None for p in posts)

    def test_window_span_matches_params(self):
        posts = ingest.generate_synthetic_forum(5, SMALL)
        stats = ingest.corpus_stats(posts)
        from forumflux.graph import build_windows
        assert len(build_windows(stats.first_post, stats.last_post, SMALL.window_days)) \
            == SMALL.n_windows

    def test_invalid_params_rejected(self):
        with pytest.raises(ConfigError):
            ingest.generate_synthetic_forum(1, SynthParams(n_windows=0))
        with pytest.raises(ConfigError):
            ingest.generate_synthetic_forum(1, SynthParams(churn_signal_strength=-0.5))


def test_no_signal_distributions_indistinguishable():
    # With the signal off, users about to rotate out must be statistically
    # indistinguishable from stayers in the recovered feature table.
    from scipy import stats as sps

    from forumflux import community, featureset, lexifeat
    posts = ingest.generate_synthetic_forum(11, SynthParams(churn_signal_strength=0.0))
    ctx = featureset.FeatureContext.build(posts, 24, lexifeat.default_lexicon(),
                                          lexifeat.default_intent_patterns(),
                                          community.PropinquityConfig())
    from forumflux.evolution import Task
    examples = featureset.build_dataset(ctx.labels(), Task.LEAVE_VS_STAY, ctx)
    assert len(examples) >= 1000
    for feature in ("cognition", "connectiveness"):
        leavers = [getattr(e.features, feature) for e in examples if e.label == 1]
        stayers = [getattr(e.features, feature) for e in examples if e.label == 0]
        _, p_value = sps.ks_2samp(leavers, stayers)
        assert p_value > 0.01
