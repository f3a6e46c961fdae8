"""Pre/post-roll trimming from word, person, and scene detections.

The retained window runs from the start of the earliest scene containing a
spoken word or an onscreen person to the end of the latest such scene.
Scene membership is closed on both ends: a detection touching a boundary
marks both adjacent scenes, which errs toward undertrimming (benign) rather
than cutting ad content.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .jsonio import read_json
from .media import DecoderFailure, FfmpegTool, MediaTool  # noqa: F401  (DecoderFailure re-exported)
from .transcriber import TranscriptSegment

Interval = tuple[float, float]


class InvalidAnnotations(Exception):
    """The annotation set violates the scene/interval invariants."""


def _as_interval(raw) -> Interval:
    # Point events (bare numbers) become zero-length intervals.
    if isinstance(raw, (int, float)):
        return (float(raw), float(raw))
    start, end = float(raw[0]), float(raw[1])
    return (start, end)


@dataclass
class AnnotationSet:
    """Word/person/scene detections for one video, all in seconds."""

    words: list[Interval] = field(default_factory=list)
    persons: list[Interval] = field(default_factory=list)
    scenes: list[Interval] = field(default_factory=list)
    duration_s: float = 0.0

    @classmethod
    def from_json(cls, data: dict) -> "AnnotationSet":
        return cls(
            words=[_as_interval(w) for w in data.get("words", [])],
            persons=[_as_interval(p) for p in data.get("persons", [])],
            scenes=[_as_interval(s) for s in data.get("scenes", [])],
            duration_s=float(data.get("duration_s", 0.0)),
        )

    @classmethod
    def load(cls, path: Path) -> "AnnotationSet":
        return cls.from_json(read_json(path))


@dataclass(frozen=True)
class TrimWindow:
    """The retained span [s, s_prime]; degenerate means "kept everything"."""

    s: float
    s_prime: float
    degenerate: bool = False

    def __post_init__(self):
        if not 0 <= self.s <= self.s_prime:
            raise ValueError(f"invalid trim window [{self.s}, {self.s_prime}]")

    @property
    def length_s(self) -> float:
        return self.s_prime - self.s

    def to_json(self) -> dict:
        return {"s": self.s, "s_prime": self.s_prime, "degenerate": self.degenerate}

    @classmethod
    def from_json(cls, data: dict) -> "TrimWindow":
        return cls(s=data["s"], s_prime=data["s_prime"], degenerate=data["degenerate"])


def _check_intervals(name: str, intervals: Sequence[Interval], duration_s: float) -> None:
    for start, end in intervals:
        if start > end:
            raise InvalidAnnotations(f"{name} interval ({start}, {end}) has start > end")
        if start < 0 or end > duration_s + 1e-9:
            raise InvalidAnnotations(
                f"{name} interval ({start}, {end}) outside [0, {duration_s}]"
            )


def normalize_scenes(scenes: Sequence[Interval], duration_s: float) -> list[Interval]:
    """Validate the scene list and absorb any gaps into the preceding scene.

    Detectors occasionally emit non-contiguous scenes; each gap is merged
    into the scene before it so the result partitions [0, duration].
    """
    if duration_s < 0:
        raise InvalidAnnotations(f"negative duration {duration_s}")
    if not scenes:
        raise InvalidAnnotations("scene list is empty")
    ordered = sorted((float(s), float(e)) for s, e in scenes)
    _check_intervals("scene", ordered, duration_s)
    out: list[Interval] = []
    for start, end in ordered:
        if not out:
            # A leading gap belongs to the first scene.
            out.append((0.0, end) if start > 0 else (start, end))
            continue
        prev_start, prev_end = out[-1]
        if start < prev_end - 1e-9:
            raise InvalidAnnotations(
                f"scenes overlap: ({prev_start}, {prev_end}) and ({start}, {end})"
            )
        if start > prev_end:
            out[-1] = (prev_start, start)
        out.append((start, end))
    last_start, last_end = out[-1]
    if last_end < duration_s:
        out[-1] = (last_start, duration_s)
    return out


def _touches(a: Interval, b: Interval) -> bool:
    # Closed-closed intersection: shared endpoints count.
    return a[0] <= b[1] and b[0] <= a[1]


def compute_trim(annotations: AnnotationSet) -> TrimWindow:
    """Find [s, s'] per the earliest/latest qualifying scene.

    With no detections at all the full video is kept and flagged degenerate
    (some ads legitimately contain no speech or people).
    """
    duration = annotations.duration_s
    _check_intervals("word", annotations.words, duration)
    _check_intervals("person", annotations.persons, duration)
    scenes = normalize_scenes(annotations.scenes, duration)

    detections = list(annotations.words) + list(annotations.persons)
    marked = [
        scene for scene in scenes if any(_touches(scene, det) for det in detections)
    ]
    if not marked:
        return TrimWindow(s=0.0, s_prime=duration, degenerate=True)
    return TrimWindow(s=marked[0][0], s_prime=marked[-1][1], degenerate=False)


def words_from_transcript(segments: Sequence[TranscriptSegment]) -> list[Interval]:
    """Segment timestamps double as word intervals when no word detector ran."""
    return [(seg.start_s, seg.end_s) for seg in segments]


def apply_trim(
    video: Path, window: TrimWindow, out: Path, tool: Optional[MediaTool] = None
) -> Path:
    """Materialize the trim as a new clip; the original file is untouched."""
    tool = tool if tool is not None else FfmpegTool()
    return tool.trim(Path(video), window.s, window.s_prime, Path(out))


__all__ = [
    "AnnotationSet",
    "DecoderFailure",
    "Interval",
    "InvalidAnnotations",
    "TrimWindow",
    "apply_trim",
    "compute_trim",
    "normalize_scenes",
    "words_from_transcript",
]
