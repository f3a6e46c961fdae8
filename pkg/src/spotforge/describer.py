"""Frame-description prompts and captions from a pluggable vision backend.

Captions longer than the requested 15 words are flagged, never truncated:
the length bound is advisory to the model and truncation would destroy
meaning.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .backends import BackendFailure, VisionBackend  # noqa: F401
from .jsonio import write_json
from .keyframer import KeyFrame
from .records import AdRecord
from .summarizer import word_count

logger = logging.getLogger(__name__)

CAPTION_WORD_LIMIT = 15

FRAME_PROMPT_TEMPLATE = (
    "Describe what is depicted in this video frame in no more than 15 words. "
    "Do not state that the frame depicts a vintage advertisement, and do not "
    "comment on the image quality. If the image includes text, then state that "
    "it includes text and also include a summary of the text that is shown. "
    "For context, this video frame is a still taken from an advertisement for "
    "the {context}. The transcript of the entire ad is: {transcript}"
)

ADVOCACY_CONTEXT = "{year} presidential campaign of {party} {candidate}"
ATTACK_CONTEXT = "{year} presidential election. This ad is anti-{candidate} and pro-{party}"


def ad_context_clause(rec: AdRecord, advocacy_template: str = ADVOCACY_CONTEXT) -> str:
    """Context phrase naming the campaign; attack ads get the anti/pro variant."""
    template = ATTACK_CONTEXT if rec.attack_ad else advocacy_template
    return template.format(
        year=rec.election_year, party=rec.party.value, candidate=rec.candidate
    )


def build_frame_prompt(rec: AdRecord, transcript: str) -> str:
    """Pure function of (record, transcript): byte-identical across calls."""
    return FRAME_PROMPT_TEMPLATE.format(
        context=ad_context_clause(rec), transcript=transcript
    )


@dataclass(frozen=True)
class FrameDescription:
    frame: KeyFrame
    text: str
    word_count: int
    overlength: bool

    def to_json(self) -> dict:
        return {
            "timestamp_s": self.frame.timestamp_s,
            "origin": self.frame.origin,
            "text": self.text,
            "word_count": self.word_count,
            "overlength": self.overlength,
        }


def make_description(frame: KeyFrame, text: str) -> FrameDescription:
    count = word_count(text)
    return FrameDescription(
        frame=frame, text=text, word_count=count, overlength=count > CAPTION_WORD_LIMIT
    )


@dataclass
class DescribeResult:
    descriptions: list[FrameDescription]
    failures: list[str]


def describe_frames(
    frames: Sequence[KeyFrame],
    rec: AdRecord,
    transcript: str,
    backend: VisionBackend,
    max_workers: int = 1,
) -> DescribeResult:
    """Caption every frame that has an image; failures are recorded per frame.

    Fan-out across frames is allowed; results are reassembled in input
    (timestamp) order so output is deterministic regardless of completion
    order.  Frames without an image (skipped at extraction) are ignored.
    """
    prompt = build_frame_prompt(rec, transcript)
    targets = [(i, f) for i, f in enumerate(frames) if f.image_path is not None]

    slots: dict[int, FrameDescription] = {}
    failures: dict[int, str] = {}

    def work(item: tuple[int, KeyFrame]) -> None:
        index, frame = item
        try:
            text = backend.describe(frame.image_path, prompt)
            slots[index] = make_description(frame, text)
        except BackendFailure as exc:
            failures[index] = (
                f"frame {index} at {frame.timestamp_s:.3f}s: {exc.cause}"
            )

    if max_workers > 1 and len(targets) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(work, targets))
    else:
        for item in targets:
            work(item)

    if failures:
        logger.warning("ad %s: %d frame description failure(s)", rec.id, len(failures))
    return DescribeResult(
        descriptions=[slots[i] for i in sorted(slots)],
        failures=[failures[i] for i in sorted(failures)],
    )


def write_framedesc(path: Path, result: DescribeResult) -> None:
    write_json(
        path,
        {
            "descriptions": [d.to_json() for d in result.descriptions],
            "failures": result.failures,
        },
    )


__all__ = [
    "ADVOCACY_CONTEXT",
    "ATTACK_CONTEXT",
    "CAPTION_WORD_LIMIT",
    "DescribeResult",
    "FRAME_PROMPT_TEMPLATE",
    "FrameDescription",
    "ad_context_clause",
    "build_frame_prompt",
    "describe_frames",
    "make_description",
    "write_framedesc",
]
