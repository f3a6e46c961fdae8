"""Child-process video decoding: duration probe, clip trimming, still extraction.

The reference tool is ffmpeg/ffprobe with the argument lists pinned below
(overridable through config).  ``StubMediaTool`` understands JSON stand-in
"videos" ({"duration_s": ...}) so pipelines can be exercised end to end on
machines without a decoder.
"""

from __future__ import annotations

import json
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .jsonio import atomic_write_bytes, dumps_stable


class DecoderFailure(Exception):
    """A decode/probe child process failed; carries the tool's exit status."""

    def __init__(self, message: str, exit_status: int | None = None):
        super().__init__(message)
        self.exit_status = exit_status


class MediaTool(Protocol):
    def probe_duration(self, video: Path) -> float: ...

    def trim(self, video: Path, start_s: float, end_s: float, out: Path) -> Path: ...

    def grab_frame(self, video: Path, timestamp_s: float, out: Path) -> Path: ...


# Pinned ffmpeg argument lists. {placeholders} are filled per call; output
# seeking (-ss after -i) keeps trims and stills frame-accurate.
FFMPEG_TRIM_ARGS = [
    "-y", "-hide_banner", "-loglevel", "error",
    "-i", "{input}",
    "-ss", "{start}", "-to", "{end}",
    "-c:v", "libx264", "-preset", "veryfast", "-c:a", "aac",
    "{output}",
]
# -q:v 2 approximates JPEG quality 90: good enough for vision-model input.
FFMPEG_FRAME_ARGS = [
    "-y", "-hide_banner", "-loglevel", "error",
    "-i", "{input}",
    "-ss", "{timestamp}",
    "-frames:v", "1", "-q:v", "2",
    "{output}",
]
FFPROBE_DURATION_ARGS = [
    "-v", "error",
    "-show_entries", "format=duration",
    "-of", "default=noprint_wrappers=1:nokey=1",
    "{input}",
]


def _fill(args: list[str], **values: str) -> list[str]:
    return [arg.format(**values) for arg in args]


@dataclass
class FfmpegTool:
    """Runs the pinned ffmpeg/ffprobe invocations as child processes."""

    ffmpeg: str = "ffmpeg"
    ffprobe: str = "ffprobe"
    trim_args: list[str] = field(default_factory=lambda: list(FFMPEG_TRIM_ARGS))
    frame_args: list[str] = field(default_factory=lambda: list(FFMPEG_FRAME_ARGS))

    def _run(self, binary: str, args: list[str]) -> str:
        try:
            proc = subprocess.run(
                [binary, *args], capture_output=True, text=True, check=False
            )
        except FileNotFoundError:
            raise DecoderFailure(f"decoder binary not found: {binary}")
        if proc.returncode != 0:
            raise DecoderFailure(
                f"{binary} exited with status {proc.returncode}: {proc.stderr.strip()}",
                exit_status=proc.returncode,
            )
        return proc.stdout

    def probe_duration(self, video: Path) -> float:
        out = self._run(self.ffprobe, _fill(FFPROBE_DURATION_ARGS, input=str(video)))
        try:
            return float(out.strip())
        except ValueError:
            raise DecoderFailure(f"unparseable duration from ffprobe: {out!r}")

    def trim(self, video: Path, start_s: float, end_s: float, out: Path) -> Path:
        out.parent.mkdir(parents=True, exist_ok=True)
        self._run(
            self.ffmpeg,
            _fill(self.trim_args, input=str(video), start=f"{start_s:.3f}",
                  end=f"{end_s:.3f}", output=str(out)),
        )
        return out

    def grab_frame(self, video: Path, timestamp_s: float, out: Path) -> Path:
        out.parent.mkdir(parents=True, exist_ok=True)
        self._run(
            self.ffmpeg,
            _fill(self.frame_args, input=str(video), timestamp=f"{timestamp_s:.3f}",
                  output=str(out)),
        )
        return out


# Minimal valid JPEG so stub stills are readable by image libraries.
_STUB_JPEG_HEADER = bytes.fromhex("ffd8ffe000104a46494600010100000100010000")
_STUB_JPEG_TRAILER = bytes.fromhex("ffd9")


@dataclass
class StubMediaTool:
    """Decoder stand-in for JSON stub videos ({"duration_s": ...}).

    Deterministic: outputs are pure functions of the inputs, which keeps
    repeated pipeline runs byte-identical.
    """

    def _read_stub(self, video: Path) -> dict:
        try:
            data = json.loads(Path(video).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DecoderFailure(f"cannot decode stub video {video}: {exc}")
        if "duration_s" not in data:
            raise DecoderFailure(f"stub video {video} has no duration_s")
        return data

    def probe_duration(self, video: Path) -> float:
        return float(self._read_stub(video)["duration_s"])

    def trim(self, video: Path, start_s: float, end_s: float, out: Path) -> Path:
        stub = self._read_stub(video)
        if not 0 <= start_s <= end_s <= stub["duration_s"] + 1e-9:
            raise DecoderFailure(
                f"trim window [{start_s}, {end_s}] outside stub duration {stub['duration_s']}"
            )
        clip = dict(stub)
        clip["duration_s"] = round(end_s - start_s, 6)
        clip["trimmed_from"] = [round(start_s, 6), round(end_s, 6)]
        atomic_write_bytes(out, dumps_stable(clip).encode("utf-8"))
        return out

    def grab_frame(self, video: Path, timestamp_s: float, out: Path) -> Path:
        stub = self._read_stub(video)
        if timestamp_s > stub["duration_s"]:
            raise DecoderFailure(
                f"timestamp {timestamp_s} beyond stub duration {stub['duration_s']}"
            )
        label = f"{Path(video).stem}@{timestamp_s:.3f}".encode("utf-8")
        atomic_write_bytes(out, _STUB_JPEG_HEADER + label + _STUB_JPEG_TRAILER)
        return out


def ffmpeg_available() -> bool:
    return shutil.which("ffmpeg") is not None and shutil.which("ffprobe") is not None


__all__ = [
    "DecoderFailure",
    "FFMPEG_FRAME_ARGS",
    "FFMPEG_TRIM_ARGS",
    "FFPROBE_DURATION_ARGS",
    "FfmpegTool",
    "MediaTool",
    "StubMediaTool",
    "ffmpeg_available",
]
