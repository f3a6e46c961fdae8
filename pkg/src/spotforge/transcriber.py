"""Time-stamped transcripts from a pluggable speech-to-text backend.

Backend text is preserved verbatim apart from an outer whitespace trim;
overlapping segments are kept (sorted) and flagged, never merged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .backends import BackendFailure, TranscriptionBackend, ValidationFailure  # noqa: F401
from .jsonio import read_json, write_json
from .records import AdRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TranscriptSegment:
    """One spoken phrase with its start/end timestamps in seconds."""

    start_s: float
    end_s: float
    text: str

    def to_json(self) -> dict:
        return {"start_s": self.start_s, "end_s": self.end_s, "text": self.text}

    @classmethod
    def from_json(cls, data: dict) -> "TranscriptSegment":
        return cls(start_s=data["start_s"], end_s=data["end_s"], text=data["text"])


def normalize_segments(segments: Sequence[TranscriptSegment]) -> list[TranscriptSegment]:
    """Trim outer whitespace and sort by start time.

    Raises ValidationFailure when any segment has end < start or empty text.
    """
    cleaned: list[TranscriptSegment] = []
    for seg in segments:
        if seg.end_s < seg.start_s:
            raise ValidationFailure(
                f"segment ({seg.start_s}, {seg.end_s}) has end before start"
            )
        text = seg.text.strip()
        if not text:
            raise ValidationFailure(
                f"segment ({seg.start_s}, {seg.end_s}) has empty text"
            )
        cleaned.append(TranscriptSegment(seg.start_s, seg.end_s, text))
    cleaned.sort(key=lambda s: (s.start_s, s.end_s))
    return cleaned


def has_overlap(segments: Sequence[TranscriptSegment]) -> bool:
    return any(
        segments[i].end_s > segments[i + 1].start_s for i in range(len(segments) - 1)
    )


def transcribe_ad(
    rec: AdRecord, backend: TranscriptionBackend, audio: Path
) -> list[TranscriptSegment]:
    """Transcribe the (already trimmed) clip for one ad.

    Returns normalized segments; an empty list just means no speech.
    """
    segments = normalize_segments(backend.transcribe(Path(audio)))
    if has_overlap(segments):
        logger.warning("ad %s: transcript has overlapping segments", rec.id)
    return segments


def full_text(segments: Sequence[TranscriptSegment]) -> str:
    """Whole-ad transcript: segment texts in time order, single-space joined."""
    ordered = sorted(segments, key=lambda s: (s.start_s, s.end_s))
    return " ".join(seg.text.strip() for seg in ordered)


def write_transcript(path: Path, segments: Sequence[TranscriptSegment]) -> None:
    write_json(
        path,
        {
            "segments": [seg.to_json() for seg in segments],
            "full_text": full_text(segments),
            "has_overlap": has_overlap(segments),
        },
    )


def read_transcript(path: Path) -> list[TranscriptSegment]:
    data = read_json(path)
    return [TranscriptSegment.from_json(s) for s in data["segments"]]


__all__ = [
    "BackendFailure",
    "TranscriptSegment",
    "TranscriptionBackend",
    "ValidationFailure",
    "full_text",
    "has_overlap",
    "normalize_segments",
    "read_transcript",
    "transcribe_ad",
    "write_transcript",
]
