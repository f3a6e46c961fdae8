"""Shared fixtures: the Hope-ad fixture corpus, stub videos, mock backends,
and a virtual clock for time-dependent tests."""

from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest

from spotforge.backends import (
    BackendFailure,
    MockTextBackend,
    MockTranscriptionBackend,
    MockVisionBackend,
)
from spotforge.media import StubMediaTool
from spotforge.orchestrator import Backends
from spotforge.records import AdRecord, Manifest, Party, write_manifest
from spotforge.transcriber import TranscriptSegment

GOLDENS = Path(__file__).parent / "goldens"


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].removeprefix("test_")
    status = "PASS" if report.passed else "FAIL"
    print(f"\n[ACCEPTANCE] {name}: {status}", flush=True)

# Hope, Arkansas ad (P-1291-61062): the 17 published transcript segments.
HOPE_SEGMENTS = [
    (0.0, 4.40, "I was born in a little town called Hope, Arkansas, three months after my father died."),
    (5.36, 8.58, "I remember that old, too-story house where I lived with my grandparents."),
    (9.06, 10.28, "They had very limited incomes."),
    (11.88, 17.68, "It was in 1963 that I went to Washington and met President Kennedy at the Boys' Nation program."),
    (18.62, 23.24, "And I remember just thinking what an incredible country this was,"),
    (23.24, 26.0, "that somebody like me, you know, had no money or anything,"),
    (26.20, 28.2, "would be given the opportunity to meet the president."),
    (28.20, 31.16, "And that's when I decided that I could really do public service"),
    (31.16, 32.64, "because I cared so much about people."),
    (33.18, 36.56, "I worked my way through law school with part-time jobs, anything I could find."),
    (37.4, 40.46, "And after I graduated, I really didn't care about making a lot of money."),
    (40.54, 42.68, "I just wanted to go home and see if I could make a difference."),
    (43.72, 48.22, "We've worked hard in education and health care to create jobs,"),
    (48.36, 50.16, "and we've made real progress."),
    (50.44, 53.06, "Now it's exhilarating to me to think that as president,"),
    (53.2, 55.76, "I could help to change all our people's lives for the better"),
    (55.76, 58.16, "and bring hope back to the American dream."),
]

HOPE_DESCRIPTIONS = [
    "Black-and-white close-up of a man speaking directly to the camera.",
    "A young man shakes hands with the president at a formal gathering.",
    "Text on screen reads Hope, Arkansas over a small-town street.",
]


@pytest.fixture
def hope_segments() -> list[TranscriptSegment]:
    return [TranscriptSegment(s, e, t) for s, e, t in HOPE_SEGMENTS]


@pytest.fixture
def hope_record() -> AdRecord:
    return AdRecord(
        id="P-1291-61062",
        candidate="Bill Clinton",
        party=Party.DEMOCRATIC,
        election_year=1992,
        title="Hope, Arkansas",
        source_format="16mm film",
        duration_s=58.16,
        attack_ad=False,
        video_path=Path("1992/P-1291-61062.mp4"),
    )


class VirtualClock:
    """Deterministic clock: sleep() advances virtual time instantly."""

    def __init__(self, start: float = 0.0):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def sleep(self, seconds: float) -> None:
        with self._lock:
            self._now += max(seconds, 0.0)


class CallCountingAsr:
    """Wraps a transcription backend and counts physical calls."""

    def __init__(self, inner):
        self.inner = inner
        self.name = f"counting({inner.name})"
        self.calls = 0
        self._lock = threading.Lock()

    def transcribe(self, audio):
        with self._lock:
            self.calls += 1
        return self.inner.transcribe(audio)


class CallCountingVision:
    def __init__(self, inner):
        self.inner = inner
        self.name = f"counting({inner.name})"
        self.calls = 0
        self._lock = threading.Lock()

    def describe(self, image, prompt):
        with self._lock:
            self.calls += 1
        return self.inner.describe(image, prompt)


class CallCountingText:
    def __init__(self, inner):
        self.inner = inner
        self.name = f"counting({inner.name})"
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt):
        with self._lock:
            self.calls += 1
        return self.inner.complete(prompt)


class PoisonedAsr:
    """Fails transcription for specific ad stems, passes others through."""

    def __init__(self, inner, poisoned_stems: set[str]):
        self.inner = inner
        self.poisoned = poisoned_stems
        self.name = "poisoned-asr"

    def transcribe(self, audio):
        stem = Path(audio).stem.replace(".trimmed", "")
        if stem in self.poisoned:
            raise BackendFailure(self.name, f"injected failure for {stem}")
        return self.inner.transcribe(audio)


CORPUS_ADS = [
    # (id, candidate, party, year, title, attack, duration_s)
    ("P-1291-61062", "Bill Clinton", "Democratic", 1992, "Hope, Arkansas", False, 58.16),
    ("P-2001-70001", "Bob Dole", "Republican", 1996, "Record Check", True, 30.0),
    ("P-2101-80001", "Barack Obama", "Democratic", 2008, "Forward", False, 33.0),
]

CORPUS_TRANSCRIPTS = {
    "P-1291-61062": HOPE_SEGMENTS,
    "P-2001-70001": [
        (0.0, 4.0, "His record tells a different story."),
        (4.5, 9.0, "Higher taxes, broken promises, and no plan for the future."),
        (10.0, 14.0, "We deserve better than this."),
    ],
    "P-2101-80001": [
        (0.0, 5.0, "Change is what this country needs."),
        (6.0, 12.0, "From the factory floor to the kitchen table, people are ready."),
        (13.0, 18.0, "Join us and move this country forward."),
    ],
}


def build_stub_corpus(root: Path, ads=CORPUS_ADS) -> tuple[Path, Path]:
    """Write stub videos, annotations, and a manifest under root.

    Returns (manifest_path, videos_root).
    """
    videos = root / "videos"
    records = []
    for ad_id, candidate, party, year, title, attack, duration in ads:
        rel = Path(str(year)) / f"{ad_id}.mp4"
        video = videos / rel
        video.parent.mkdir(parents=True, exist_ok=True)
        video.write_text(json.dumps({"duration_s": duration}), encoding="utf-8")
        annotations = {
            "words": [[0.0, duration]],
            "persons": [],
            "scenes": [[0.0, duration]],
            "duration_s": duration,
        }
        video.with_name(f"{ad_id}.annotations.json").write_text(
            json.dumps(annotations), encoding="utf-8"
        )
        records.append(
            AdRecord(
                id=ad_id,
                candidate=candidate,
                party=Party.parse(party),
                election_year=year,
                title=title,
                source_format=None,
                duration_s=duration,
                attack_ad=attack,
                video_path=rel,
            )
        )
    manifest = Manifest(records=tuple(records), root=videos)
    manifest_path = videos / "manifest.csv"
    videos.mkdir(parents=True, exist_ok=True)
    write_manifest(manifest, manifest_path)
    return manifest_path, videos


def make_mock_backends(text_responses=("A short mock summary of the ad.",)) -> Backends:
    return Backends(
        asr=MockTranscriptionBackend(
            fixtures={k: [list(row) for row in v] for k, v in CORPUS_TRANSCRIPTS.items()}
        ),
        vision=MockVisionBackend(),
        text=MockTextBackend(responses=tuple(text_responses)),
        media=StubMediaTool(),
    )


@pytest.fixture
def stub_corpus(tmp_path) -> dict:
    manifest_path, videos = build_stub_corpus(tmp_path)
    return {
        "root": tmp_path,
        "manifest_path": manifest_path,
        "videos": videos,
        "outputs": tmp_path / "outputs",
        "checkpoint": tmp_path / "outputs" / "checkpoint.jsonl",
    }
