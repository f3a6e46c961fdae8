"""Transcript search: exact substring matches first, then fuzzy token matches.

The index is a single JSON file (schema-versioned, byte-deterministic for
identical inputs) holding each ad's transcript, token stream with original
offsets, and the metadata the UI filters on.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .jsonio import atomic_write_text, dumps_stable, read_json
from .records import Manifest, output_paths

logger = logging.getLogger(__name__)

INDEX_SCHEMA_VERSION = 1

SNIPPET_CONTEXT_CHARS = 40

_TOKEN_RE = re.compile(r"[0-9a-z]+(?:['’-][0-9a-z]+)*")


class EmptyQuery(Exception):
    """Queries must be nonempty after trimming."""


class IndexSchemaMismatch(Exception):
    """Persisted index was written by an incompatible schema version."""


def tokenize_with_offsets(text: str) -> list[tuple[str, int]]:
    """Case-folded tokens with their offsets into the original text.

    str.lower() is length-preserving for this corpus, so offsets computed on
    the lowered text index the original string directly.
    """
    lowered = text.lower()
    return [(m.group(), m.start()) for m in _TOKEN_RE.finditer(lowered)]


@dataclass
class IndexedAd:
    ad_id: str
    year: int
    candidate: str
    candidate_last: str
    party: str
    title: Optional[str]
    text: str
    tokens: list[tuple[str, int]]
    segments: list[list] = field(default_factory=list)  # [start_s, end_s, text]
    summary: Optional[str] = None
    frames: list[dict] = field(default_factory=list)
    video_path: Optional[str] = None
    duration_s: float = 0.0
    attack_ad: bool = False

    def to_json(self) -> dict:
        return {
            "ad_id": self.ad_id,
            "year": self.year,
            "candidate": self.candidate,
            "candidate_last": self.candidate_last,
            "party": self.party,
            "title": self.title,
            "text": self.text,
            "tokens": [[t, o] for t, o in self.tokens],
            "segments": self.segments,
            "summary": self.summary,
            "frames": self.frames,
            "video_path": self.video_path,
            "duration_s": self.duration_s,
            "attack_ad": self.attack_ad,
        }

    @classmethod
    def from_json(cls, data: dict) -> "IndexedAd":
        return cls(
            ad_id=data["ad_id"],
            year=data["year"],
            candidate=data["candidate"],
            candidate_last=data["candidate_last"],
            party=data["party"],
            title=data.get("title"),
            text=data["text"],
            tokens=[(t, o) for t, o in data["tokens"]],
            segments=data.get("segments", []),
            summary=data.get("summary"),
            frames=data.get("frames", []),
            video_path=data.get("video_path"),
            duration_s=data.get("duration_s", 0.0),
            attack_ad=data.get("attack_ad", False),
        )


@dataclass
class SearchIndex:
    ads: dict[str, IndexedAd] = field(default_factory=dict)

    def years(self) -> list[int]:
        return sorted({ad.year for ad in self.ads.values()})

    def candidates(self, year: Optional[int] = None) -> list[str]:
        return sorted(
            {
                ad.candidate_last
                for ad in self.ads.values()
                if year is None or ad.year == year
            }
        )

    def to_json(self) -> dict:
        return {
            "schema_version": INDEX_SCHEMA_VERSION,
            "ads": {ad_id: ad.to_json() for ad_id, ad in sorted(self.ads.items())},
        }

    def save(self, path: Path) -> None:
        atomic_write_text(Path(path), dumps_stable(self.to_json()))

    @classmethod
    def load(cls, path: Path) -> "SearchIndex":
        data = read_json(Path(path))
        version = data.get("schema_version")
        if version != INDEX_SCHEMA_VERSION:
            raise IndexSchemaMismatch(
                f"index schema {version} != {INDEX_SCHEMA_VERSION}; rebuild the index"
            )
        return cls(ads={k: IndexedAd.from_json(v) for k, v in data["ads"].items()})


def candidate_last_name(candidate: str) -> str:
    parts = candidate.strip().split()
    return parts[-1].lower() if parts else ""


def build_index(manifest: Manifest, outputs_root: Path) -> tuple[SearchIndex, list[str]]:
    """Index every manifest ad that has a transcript artifact.

    Ads without one are skipped with a warning.  Summary text and the frame
    index are picked up when present so the detail endpoint can serve them.
    """
    outputs_root = Path(outputs_root)
    index = SearchIndex()
    warnings: list[str] = []
    for rec in manifest.records:
        paths = output_paths(rec, outputs_root)
        if not paths.transcript_json.exists():
            warnings.append(f"{rec.id}: no transcript at {paths.transcript_json}; skipped")
            continue
        data = read_json(paths.transcript_json)
        text = data.get("full_text", "")
        segments = [[s["start_s"], s["end_s"], s["text"]] for s in data.get("segments", [])]
        summary = None
        if paths.summary_txt.exists():
            summary = paths.summary_txt.read_text(encoding="utf-8").strip()
        frames: list[dict] = []
        if paths.frames_index.exists():
            for row in read_json(paths.frames_index).get("frames", []):
                if row.get("image_path"):
                    frames.append(
                        {
                            "timestamp_s": row["timestamp_s"],
                            "origin": row["origin"],
                            # Path relative to the outputs root, URL-friendly.
                            "image_path": f"{rec.election_year}/{row['image_path']}",
                        }
                    )
        index.ads[rec.id] = IndexedAd(
            ad_id=rec.id,
            year=rec.election_year,
            candidate=rec.candidate,
            candidate_last=candidate_last_name(rec.candidate),
            party=rec.party.value,
            title=rec.title,
            text=text,
            tokens=tokenize_with_offsets(text),
            segments=segments,
            summary=summary,
            frames=frames,
            video_path=rec.video_path.as_posix(),
            duration_s=rec.duration_s,
            attack_ad=rec.attack_ad,
        )
    for message in warnings:
        logger.warning("%s", message)
    return index, warnings


@dataclass(frozen=True)
class SearchHit:
    ad_id: str
    score: float
    match_kind: str  # exact | fuzzy
    snippet: str
    span: tuple[int, int]  # match offsets within the snippet
    year: int
    candidate: str

    def to_json(self) -> dict:
        return {
            "ad_id": self.ad_id,
            "score": self.score,
            "match_kind": self.match_kind,
            "snippet": self.snippet,
            "span": list(self.span),
            "year": self.year,
            "candidate": self.candidate,
        }


def edit_distance(a: str, b: str) -> int:
    """Plain character-level Levenshtein distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def fuzzy_bound(token: str) -> int:
    """Allowed edits per query token: one for short words, len/4 for long."""
    return max(1, len(token) // 4)


def _snippet(text: str, start: int, length: int) -> tuple[str, tuple[int, int]]:
    lo = max(0, start - SNIPPET_CONTEXT_CHARS)
    hi = min(len(text), start + length + SNIPPET_CONTEXT_CHARS)
    prefix = "…" if lo > 0 else ""
    suffix = "…" if hi < len(text) else ""
    snippet = prefix + text[lo:hi] + suffix
    span_start = start - lo + len(prefix)
    return snippet, (span_start, span_start + length)


def _match_exact(ad: IndexedAd, needle: str) -> Optional[SearchHit]:
    pos = ad.text.lower().find(needle)
    if pos < 0:
        return None
    snippet, span = _snippet(ad.text, pos, len(needle))
    return SearchHit(
        ad_id=ad.ad_id,
        score=1.0,
        match_kind="exact",
        snippet=snippet,
        span=span,
        year=ad.year,
        candidate=ad.candidate,
    )


def _match_fuzzy(ad: IndexedAd, query_tokens: list[str]) -> Optional[SearchHit]:
    """Every query token must hit some transcript token within its bound.

    Score is 1 - total_edits/total_query_chars, clamped into (0, 1).
    """
    if not ad.tokens or not query_tokens:
        return None
    total_chars = sum(len(t) for t in query_tokens)
    total_dist = 0
    first_hit: Optional[tuple[int, int]] = None  # (offset, length) of first token's match
    for qi, qtok in enumerate(query_tokens):
        bound = fuzzy_bound(qtok)
        best: Optional[tuple[int, int, int]] = None  # (distance, offset, length)
        for ttok, offset in ad.tokens:
            if abs(len(ttok) - len(qtok)) > bound:
                continue
            dist = edit_distance(qtok, ttok)
            if dist <= bound and (best is None or dist < best[0]):
                best = (dist, offset, len(ttok))
                if dist == 0:
                    break
        if best is None:
            return None
        total_dist += best[0]
        if qi == 0:
            first_hit = (best[1], best[2])
    raw = 1.0 - total_dist / max(total_chars, 1)
    score = min(max(raw, 1e-9), 1.0 - 1e-9)
    offset, length = first_hit if first_hit else (0, 0)
    snippet, span = _snippet(ad.text, offset, length)
    return SearchHit(
        ad_id=ad.ad_id,
        score=score,
        match_kind="fuzzy",
        snippet=snippet,
        span=span,
        year=ad.year,
        candidate=ad.candidate,
    )


def matches_fuzzy(ad: IndexedAd, q: str) -> bool:
    """Fuzzy relaxation predicate; exact substring matches always satisfy it."""
    needle = q.strip().lower()
    if needle and needle in ad.text.lower():
        return True
    qtokens = [t for t, _ in tokenize_with_offsets(q)]
    return bool(qtokens) and _match_fuzzy(ad, qtokens) is not None


def query(
    index: SearchIndex,
    q: str,
    year: Optional[int] = None,
    candidate_last: Optional[str] = None,
    limit: int = 10,
) -> list[SearchHit]:
    """Filtered search: exact tier first, then fuzzy, each best-score first.

    Ordering is exact-before-fuzzy, descending score, ascending year, then
    ad id — stable and explainable.
    """
    needle = q.strip().lower()
    if not needle:
        raise EmptyQuery("query must be nonempty")
    qtokens = [t for t, _ in tokenize_with_offsets(q)]

    candidates = [
        ad
        for ad in index.ads.values()
        if (year is None or ad.year == year)
        and (candidate_last is None or ad.candidate_last == candidate_last.strip().lower())
    ]

    hits: list[SearchHit] = []
    for ad in candidates:
        hit = _match_exact(ad, needle)
        if hit is None and qtokens:
            hit = _match_fuzzy(ad, qtokens)
        if hit is not None:
            hits.append(hit)

    hits.sort(key=lambda h: (h.match_kind != "exact", -h.score, h.year, h.ad_id))
    return hits[:limit] if limit is not None and limit >= 0 else hits


__all__ = [
    "EmptyQuery",
    "INDEX_SCHEMA_VERSION",
    "IndexSchemaMismatch",
    "IndexedAd",
    "SearchHit",
    "SearchIndex",
    "build_index",
    "candidate_last_name",
    "edit_distance",
    "fuzzy_bound",
    "matches_fuzzy",
    "query",
    "tokenize_with_offsets",
]
