"""Forum corpus parsing, summary statistics, and seeded synthetic corpora.

Input posts arrive as JSONL (one object per line) or RFC-4180 CSV with the
fixed column order post_id,thread_id,user_id,created_at,body. Timestamps must
be ISO-8601 with an explicit UTC offset; naive timestamps are rejected rather
than guessed so that downstream windowing never drifts.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import ConfigError, EmptyCorpusError, ParseError

CSV_COLUMNS = ["post_id", "thread_id", "user_id", "created_at", "body"]


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    thread_id: str
    user_id: str
    created_at: datetime  # always tz-aware UTC, second precision
    body: str


@dataclass(frozen=True)
class CorpusStats:
    post_count: int
    user_count: int
    thread_count: int
    avg_thread_depth: float
    first_post: datetime
    last_post: datetime


def parse_timestamp(text, where=""):
    """Parse an ISO-8601 timestamp with explicit offset into UTC."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError:
        raise ParseError(f"unparseable timestamp {text!r}{where}") from None
    if ts.tzinfo is None:
        raise ParseError(f"naive timestamp {text!r}{where}: UTC offset required")
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts):
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _make_record(fields, line_no, seen_ids):
    where = f" at line {line_no}"
    missing = [k for k in CSV_COLUMNS if k not in fields]
    if missing:
        raise ParseError(f"missing field(s) {missing}{where}")
    extra = [k for k in fields if k not in CSV_COLUMNS]
    if extra:
        raise ParseError(f"unknown field(s) {extra}{where}")
    post_id = fields["post_id"]
    if not post_id:
        raise ParseError(f"empty post_id{where}")
    if not fields["thread_id"]:
        raise ParseError(f"empty thread_id{where}")
    if not fields["user_id"]:
        raise ParseError(f"empty user_id{where}")
    if post_id in seen_ids:
        raise ParseError(f"duplicate post_id {post_id!r}{where}")
    seen_ids.add(post_id)
    return PostRecord(
        post_id=post_id,
        thread_id=fields["thread_id"],
        user_id=fields["user_id"],
        created_at=parse_timestamp(fields["created_at"], where),
        body=fields["body"],
    )


def parse_posts(stream, fmt):
    """Parse a byte stream of posts; fmt is 'jsonl' or 'csv'.

    Records come back in input order. Any malformed row, bad timestamp, or
    duplicate post_id aborts with a ParseError naming the offending line.
    """
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    seen = set()
    records = []
    if fmt == "jsonl":
        for line_no, line in enumerate(text, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON at line {line_no}: {exc}") from None
            if not isinstance(obj, dict):
                raise ParseError(f"malformed row at line {line_no}: expected object")
            records.append(_make_record({k: str(v) for k, v in obj.items()}, line_no, seen))
    elif fmt == "csv":
        reader = csv.reader(text)
        try:
            header = next(reader)
        except StopIteration:
            return []
        if header != CSV_COLUMNS:
            raise ParseError(f"bad CSV header {header}, expected {CSV_COLUMNS}")
        for row in reader:
            if len(row) != len(CSV_COLUMNS):
                raise ParseError(f"malformed row at line {reader.line_num}: {len(row)} columns")
            records.append(_make_record(dict(zip(CSV_COLUMNS, row)), reader.line_num, seen))
    else:
        raise ConfigError(f"unknown format {fmt!r}, expected 'jsonl' or 'csv'")
    return records


def serialize_posts(records, fmt):
    """Serialize records to bytes in 'jsonl' or 'csv'; inverse of parse_posts."""
    buf = io.StringIO()
    if fmt == "jsonl":
        for rec in records:
            obj = {
                "post_id": rec.post_id,
                "thread_id": rec.thread_id,
                "user_id": rec.user_id,
                "created_at": format_timestamp(rec.created_at),
                "body": rec.body,
            }
            buf.write(json.dumps(obj, ensure_ascii=False) + "\n")
    elif fmt == "csv":
        # RFC-4180 line endings; also forces quoting of bodies containing \r
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([rec.post_id, rec.thread_id, rec.user_id,
                             format_timestamp(rec.created_at), rec.body])
    else:
        raise ConfigError(f"unknown format {fmt!r}, expected 'jsonl' or 'csv'")
    return buf.getvalue().encode("utf-8")


def corpus_stats(posts):
    if not posts:
        raise EmptyCorpusError("cannot summarize an empty corpus")
    users = {p.user_id for p in posts}
    threads = {p.thread_id for p in posts}
    times = [p.created_at for p in posts]
    return CorpusStats(
        post_count=len(posts),
        user_count=len(users),
        thread_count=len(threads),
        avg_thread_depth=len(posts) / len(threads),
        first_post=min(times),
        last_post=max(times),
    )


# ---------------------------------------------------------------------------
# Synthetic corpus generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthParams:
    n_users: int = 240
    n_threads: int = 384
    n_windows: int = 12
    window_days: int = 24
    churn_signal_strength: float = 1.0


_SYNTH_EPOCH = datetime(2020, 1, 1, tzinfo=timezone.utc)

# Neutral vocabulary; none of these words match the bundled lexicon entries
# (including its prefix patterns) so they carry no category signal.
_FILLER_WORDS = [
    "forum", "thread", "topic", "exam", "doctor", "student", "residency",
    "school", "hospital", "question", "answer", "page", "week", "year",
    "month", "people", "group", "case", "board", "lecture", "book",
    "subject", "city", "room", "table", "paper", "note", "slide", "video",
]


def _community_rosters(rng, pool, n_windows):
    """Per-window active membership with exactly half the roster rotating out.

    Keeping turnover at exactly 50% of the roster makes the downstream
    leave-vs-stay classes balanced, which is what lets the no-signal setting
    behave like a fair coin instead of a degenerate majority vote.
    """
    roster_size = min(14, (2 * len(pool)) // 3)
    roster_size -= roster_size % 2
    if roster_size < 4:
        raise ConfigError("n_users too small: need at least 6 users per community")
    turnover = roster_size // 2
    rosters = []
    current = sorted(rng.choice(pool, size=roster_size, replace=False).tolist())
    rosters.append(current)
    for _ in range(1, n_windows):
        stayers = sorted(rng.choice(current, size=roster_size - turnover, replace=False).tolist())
        outside = sorted(set(pool) - set(current))
        joiners = sorted(rng.choice(outside, size=turnover, replace=False).tolist())
        current = sorted(stayers + joiners)
        rosters.append(current)
    return rosters


def _signal_words():
    # Lazy import: lexifeat pulls nothing from this module, but keeping the
    # generator decoupled from lexicon loading at import time is tidier.
    from .lexifeat import default_intent_patterns, default_lexicon

    lex = default_lexicon()
    by_cat = {}
    for pattern, category in lex.entries:
        if pattern.endswith("*"):
            continue
        by_cat.setdefault(category, []).append(pattern)
    sentiment_words = sorted(
        by_cat.get("posemo", []) + by_cat.get("negemo", [])
        + by_cat.get("anger", []) + by_cat.get("sadness", [])
    )
    cognition_words = sorted(by_cat.get("cogmech", []))
    phrases = [" ".join(p) for p in default_intent_patterns().phrases]
    return sentiment_words, cognition_words, phrases


def _post_body(rng, cognition_p, sentiment_words, cognition_words, phrases):
    n_words = 8 + int(rng.integers(0, 5))
    words = []
    for _ in range(n_words):
        u = rng.random()
        if u < cognition_p:
            words.append(cognition_words[int(rng.integers(0, len(cognition_words)))])
        elif u < cognition_p + 0.12:
            words.append(sentiment_words[int(rng.integers(0, len(sentiment_words)))])
        else:
            words.append(_FILLER_WORDS[int(rng.integers(0, len(_FILLER_WORDS)))])
    if rng.random() < 0.05:
        words.append(phrases[int(rng.integers(0, len(phrases)))])
    return " ".join(words)


def generate_synthetic_forum(seed, params=SynthParams()):
    """Generate a deterministic forum corpus with a planted churn signal.

    Users are split into disjoint community pools. Each window, half of a
    community's active roster rotates out and an equal number rotates in.
    Users about to rotate out ("leavers") post in fewer threads and use fewer
    cognition words than stayers, with the gap scaled by
    churn_signal_strength. No labels are written anywhere: the signal lives
    only in post text and thread co-participation, and the pipeline has to
    recover it.
    """
    p = params
    for name in ("n_users", "n_threads", "n_windows", "window_days"):
        if getattr(p, name) <= 0:
            raise ConfigError(f"{name} must be positive, got {getattr(p, name)}")
    if p.churn_signal_strength < 0:
        raise ConfigError("churn_signal_strength must be non-negative")

    rng = np.random.default_rng(seed)
    sentiment_words, cognition_words, phrases = _signal_words()

    pool_size = 30 if p.n_users >= 30 else p.n_users
    n_comm = max(1, p.n_users // pool_size)
    user_ids = [f"u{i:04d}" for i in range(p.n_users)]
    pools = [user_ids[c * pool_size:(c + 1) * pool_size] for c in range(n_comm)]
    rosters = [_community_rosters(rng, pool, p.n_windows) for pool in pools]

    threads_per_cw = max(3, p.n_threads // (n_comm * p.n_windows))
    window_seconds = p.window_days * 86400
    base_cognition_p = 0.35

    posts = []
    seq = 0
    for w in range(p.n_windows):
        window_start = _SYNTH_EPOCH + timedelta(days=w * p.window_days)
        anchored = False
        for c in range(n_comm):
            roster = rosters[c][w]
            next_roster = set(rosters[c][w + 1]) if w + 1 < p.n_windows else None
            threads = [f"t{c:02d}_{w:03d}_{k}" for k in range(threads_per_cw)]
            for user in roster:
                is_leaver = next_roster is not None and user not in next_roster
                s = p.churn_signal_strength if is_leaver else 0.0
                n_threads_user = max(1, min(threads_per_cw, round(4 - 3 * s)))
                chosen = rng.choice(threads_per_cw, size=n_threads_user, replace=False)
                cognition_p = base_cognition_p * max(0.0, 1.0 - s)
                for t_idx in chosen:
                    n_posts = 1 + (1 if rng.random() < 0.5 * (1.0 - s) else 0)
                    for _ in range(n_posts):
                        offset = 0 if not anchored else int(rng.integers(0, window_seconds))
                        anchored = True
                        posts.append(PostRecord(
                            post_id=f"p{seq:06d}",
                            thread_id=threads[int(t_idx)],
                            user_id=user,
                            created_at=window_start + timedelta(seconds=offset),
                            body=_post_body(rng, cognition_p, sentiment_words,
                                            cognition_words, phrases),
                        ))
                        seq += 1
    return posts
