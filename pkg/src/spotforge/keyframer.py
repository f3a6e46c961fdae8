"""Storyboard frame selection: speech-segment midpoints plus a 3-second grid.

The two frame sets are merged by timestamp without deduplication, so the
storyboard covers both narrated imagery and speech-free stretches.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .jsonio import write_json
from .media import MediaTool
from .records import frame_image_name
from .transcriber import TranscriptSegment

logger = logging.getLogger(__name__)

ORIGIN_SEGMENT_MID = "segment_mid"
ORIGIN_REGULAR_GRID = "regular_grid"

GRID_SPACING_S = 3.0


@dataclass(frozen=True)
class KeyFrame:
    timestamp_s: float
    origin: str  # segment_mid | regular_grid
    image_path: Optional[Path] = None

    def to_json(self) -> dict:
        return {
            "timestamp_s": self.timestamp_s,
            "origin": self.origin,
            "image_path": self.image_path.as_posix() if self.image_path else None,
        }

    @classmethod
    def from_json(cls, data: dict) -> "KeyFrame":
        return cls(
            timestamp_s=data["timestamp_s"],
            origin=data["origin"],
            image_path=Path(data["image_path"]) if data.get("image_path") else None,
        )


def segment_midpoints(segments: Sequence[TranscriptSegment]) -> list[KeyFrame]:
    """One frame at the temporal center of each spoken phrase."""
    return [
        KeyFrame((seg.start_s + seg.end_s) / 2.0, ORIGIN_SEGMENT_MID)
        for seg in segments
    ]


def regular_grid(
    duration_s: float, spacing_s: float = GRID_SPACING_S, phase_s: float = 0.0
) -> list[KeyFrame]:
    """Transcription-agnostic frames at the center of each full window.

    Centers sit at phase + spacing/2 + k*spacing for k = 0 .. floor(d/spacing)-1,
    so a 30 s spot yields 10 frames and a 60 s spot yields 20.  The phase
    offset shifts sampling away from fade-in black without changing counts
    (frames past the end are dropped).
    """
    if duration_s < 0:
        raise ValueError(f"duration must be nonnegative, got {duration_s}")
    count = math.floor(duration_s / spacing_s)
    frames = []
    for k in range(count):
        center = phase_s + spacing_s / 2.0 + k * spacing_s
        if center > duration_s:
            break
        frames.append(KeyFrame(center, ORIGIN_REGULAR_GRID))
    return frames


def merge_frames(
    mids: Sequence[KeyFrame],
    grid: Sequence[KeyFrame],
    dedup_epsilon_s: Optional[float] = None,
) -> list[KeyFrame]:
    """Merge by ascending timestamp; equal timestamps keep the midpoint first.

    No deduplication by default (both sources are retained in full).  With
    ``dedup_epsilon_s`` set, grid frames within epsilon of a midpoint frame
    are dropped to cut vision-backend cost.
    """
    grid_kept = list(grid)
    if dedup_epsilon_s is not None:
        grid_kept = [
            g
            for g in grid_kept
            if not any(abs(g.timestamp_s - m.timestamp_s) <= dedup_epsilon_s for m in mids)
        ]
    combined = list(mids) + grid_kept
    return sorted(
        combined,
        key=lambda f: (f.timestamp_s, 0 if f.origin == ORIGIN_SEGMENT_MID else 1),
    )


def grab_frames(
    video: Path,
    frames: Sequence[KeyFrame],
    out_dir: Path,
    stem: str,
    tool: MediaTool,
    duration_s: Optional[float] = None,
) -> tuple[list[KeyFrame], list[str]]:
    """Decode one still per keyframe into ``out_dir``.

    Timestamps past the end of the clip are skipped and reported in the
    returned warnings rather than failing the whole storyboard.
    """
    if duration_s is None:
        duration_s = tool.probe_duration(Path(video))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result: list[KeyFrame] = []
    warnings: list[str] = []
    for i, frame in enumerate(frames):
        if frame.timestamp_s > duration_s:
            warnings.append(
                f"frame {i} at {frame.timestamp_s:.3f}s is beyond the clip end "
                f"({duration_s:.3f}s); skipped"
            )
            result.append(frame)
            continue
        image = out_dir / frame_image_name(stem, i, frame.timestamp_s)
        tool.grab_frame(Path(video), frame.timestamp_s, image)
        result.append(replace(frame, image_path=image))
    if warnings:
        logger.warning("%s: %d frame(s) skipped past EOF", stem, len(warnings))
    return result, warnings


def write_frames_index(
    path: Path, frames: Sequence[KeyFrame], warnings: Sequence[str] = ()
) -> None:
    """Index entries use paths relative to the index file's directory."""
    base = Path(path).parent
    rows = []
    for frame in frames:
        entry = frame.to_json()
        if frame.image_path is not None:
            try:
                entry["image_path"] = frame.image_path.relative_to(base).as_posix()
            except ValueError:
                entry["image_path"] = frame.image_path.as_posix()
        rows.append(entry)
    write_json(path, {"frames": rows, "warnings": list(warnings)})


__all__ = [
    "GRID_SPACING_S",
    "KeyFrame",
    "ORIGIN_REGULAR_GRID",
    "ORIGIN_SEGMENT_MID",
    "grab_frames",
    "merge_frames",
    "regular_grid",
    "segment_midpoints",
    "write_frames_index",
]
