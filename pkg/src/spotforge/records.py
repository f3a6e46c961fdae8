"""Domain records: ad metadata, manifest CSV ingestion, on-disk layout, corpus stats.

The manifest is a UTF-8 CSV (RFC-4180 quoting) with one row per ad.  Every
per-ad artifact lives at ``<root>/<election_year>/<video-stem><suffix>`` so
a corpus splits cleanly into one directory per election year.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .describer import FrameDescription
    from .keyframer import KeyFrame
    from .summarizer import SummaryResult
    from .transcriber import TranscriptSegment
    from .trimmer import TrimWindow

MANIFEST_HEADER = [
    "id",
    "candidate",
    "party",
    "election_year",
    "title",
    "source_format",
    "duration_s",
    "attack_ad",
    "video_path",
]

STAGES = ("trim", "transcribe", "keyframes", "describe", "summarize")

# Per-artifact filename suffixes, appended to the video stem.
SUFFIX_TRIM = ".trim.json"
SUFFIX_TRANSCRIPT = ".transcript.json"
SUFFIX_FRAMES_DIR = ".frames"
SUFFIX_FRAMES_INDEX = ".frames.json"
SUFFIX_FRAMEDESC = ".framedesc.json"
SUFFIX_SUMMARY = ".summary.txt"
SUFFIX_STATE = ".state.json"
SUFFIX_TRIMMED_VIDEO = ".trimmed.mp4"


class ManifestError(Exception):
    """Base for manifest ingestion failures."""


class MissingColumn(ManifestError):
    def __init__(self, column: str):
        super().__init__(f"manifest is missing required column {column!r}")
        self.column = column


class DuplicateId(ManifestError):
    def __init__(self, ad_id: str, line: int):
        super().__init__(f"duplicate ad id {ad_id!r} at line {line}")
        self.ad_id = ad_id
        self.line = line


class MalformedRow(ManifestError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"malformed manifest row at line {line}: {reason}")
        self.line = line
        self.reason = reason


class Party(str, enum.Enum):
    DEMOCRATIC = "Democratic"
    REPUBLICAN = "Republican"
    OTHER = "Other"

    @classmethod
    def parse(cls, raw: str) -> "Party":
        # Minor-party candidates are real; anything unrecognized is Other.
        normalized = raw.strip().lower()
        if normalized == "democratic":
            return cls.DEMOCRATIC
        if normalized == "republican":
            return cls.REPUBLICAN
        return cls.OTHER


@dataclass(frozen=True)
class AdRecord:
    """One ad's curated metadata plus the location of its video file."""

    id: str
    candidate: str
    party: Party
    election_year: int
    title: Optional[str] = None
    source_format: Optional[str] = None
    duration_s: float = 0.0
    attack_ad: bool = False
    video_path: Path = Path()

    def __post_init__(self):
        if not self.id:
            raise ValueError("ad id must be nonempty")
        if self.election_year <= 0:
            raise ValueError(f"election_year must be positive, got {self.election_year}")
        if self.duration_s < 0:
            raise ValueError(f"duration_s must be nonnegative, got {self.duration_s}")

    @property
    def stem(self) -> str:
        return self.video_path.stem


@dataclass(frozen=True)
class Manifest:
    records: tuple[AdRecord, ...]
    root: Path

    def __post_init__(self):
        seen: set[str] = set()
        for rec in self.records:
            if rec.id in seen:
                raise ValueError(f"duplicate ad id {rec.id!r} in manifest")
            seen.add(rec.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, ad_id: str) -> Optional[AdRecord]:
        for rec in self.records:
            if rec.id == ad_id:
                return rec
        return None

    def video_file(self, rec: AdRecord) -> Path:
        return self.root / rec.video_path


@dataclass
class StatsReport:
    n_ads: int
    n_by_party: dict[str, int]
    total_hours: float
    year_range: Optional[tuple[int, int]]


def _parse_bool(raw: str, line: int) -> bool:
    val = raw.strip().lower()
    if val in ("true", "1", "yes"):
        return True
    if val in ("false", "0", "no", ""):
        return False
    raise MalformedRow(line, f"cannot parse boolean {raw!r}")


def parse_manifest(path: Path, root: Optional[Path] = None) -> Manifest:
    """Parse a manifest CSV. Row order is preserved; the first bad row aborts.

    ``root`` defaults to the manifest's own directory.
    """
    path = Path(path)
    root = Path(root) if root is not None else path.parent
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(MANIFEST_HEADER[0])
        for col in MANIFEST_HEADER:
            if col not in header:
                raise MissingColumn(col)
        idx = {col: header.index(col) for col in MANIFEST_HEADER}

        records: list[AdRecord] = []
        seen: set[str] = set()
        for line, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) < len(header):
                raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
            ad_id = row[idx["id"]].strip()
            if not ad_id:
                raise MalformedRow(line, "empty id")
            if ad_id in seen:
                raise DuplicateId(ad_id, line)
            seen.add(ad_id)
            try:
                year = int(row[idx["election_year"]])
            except ValueError:
                raise MalformedRow(line, f"bad election_year {row[idx['election_year']]!r}")
            raw_duration = row[idx["duration_s"]].strip()
            try:
                # Empty duration means "probe the media file later"; the
                # manifest value wins whenever it is present.
                duration = float(raw_duration) if raw_duration else 0.0
            except ValueError:
                raise MalformedRow(line, f"bad duration_s {raw_duration!r}")
            video_path = row[idx["video_path"]].strip()
            if not video_path:
                raise MalformedRow(line, "empty video_path")
            if ".." in PurePosixPath(video_path).parts:
                raise MalformedRow(line, f"video_path escapes the corpus root: {video_path!r}")
            try:
                rec = AdRecord(
                    id=ad_id,
                    candidate=row[idx["candidate"]].strip(),
                    party=Party.parse(row[idx["party"]]),
                    election_year=year,
                    title=row[idx["title"]] or None,
                    source_format=row[idx["source_format"]] or None,
                    duration_s=duration,
                    attack_ad=_parse_bool(row[idx["attack_ad"]], line),
                    video_path=Path(video_path),
                )
            except ValueError as exc:
                raise MalformedRow(line, str(exc))
            records.append(rec)
    return Manifest(records=tuple(records), root=root)


def write_manifest(manifest: Manifest, path: Path) -> None:
    """Inverse of parse_manifest (round-trips field-for-field)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for rec in manifest.records:
            writer.writerow(
                [
                    rec.id,
                    rec.candidate,
                    rec.party.value,
                    rec.election_year,
                    rec.title or "",
                    rec.source_format or "",
                    _format_duration(rec.duration_s),
                    "true" if rec.attack_ad else "false",
                    rec.video_path.as_posix(),
                ]
            )


def _format_duration(value: float) -> str:
    # repr() round-trips floats exactly; integral values stay short.
    if value == int(value):
        return str(int(value))
    return repr(value)


def corpus_stats(manifest: Manifest) -> StatsReport:
    by_party: dict[str, int] = {}
    total_s = 0.0
    years: list[int] = []
    for rec in manifest.records:
        by_party[rec.party.value] = by_party.get(rec.party.value, 0) + 1
        total_s += rec.duration_s
        years.append(rec.election_year)
    return StatsReport(
        n_ads=len(manifest.records),
        n_by_party=by_party,
        total_hours=total_s / 3600.0,
        year_range=(min(years), max(years)) if years else None,
    )


@dataclass
class StageStatus:
    status: str = "pending"  # pending | done | failed
    reason: Optional[str] = None

    def to_json(self) -> dict:
        out: dict = {"status": self.status}
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass
class PipelineOutputs:
    """Workflow state of one ad: stage outputs plus per-stage status."""

    trim: Optional["TrimWindow"] = None
    transcript: list["TranscriptSegment"] = field(default_factory=list)
    keyframes: list["KeyFrame"] = field(default_factory=list)
    descriptions: list["FrameDescription"] = field(default_factory=list)
    summary: Optional["SummaryResult"] = None
    stage_status: dict[str, StageStatus] = field(
        default_factory=lambda: {name: StageStatus() for name in STAGES}
    )

    def __post_init__(self):
        if set(self.stage_status) != set(STAGES):
            raise ValueError(
                f"stage_status keys must be exactly {STAGES}, got {sorted(self.stage_status)}"
            )

    def mark_done(self, stage: str) -> None:
        self.stage_status[stage] = StageStatus(status="done")

    def mark_failed(self, stage: str, reason: str) -> None:
        self.stage_status[stage] = StageStatus(status="failed", reason=reason)

    def status_json(self) -> dict:
        return {name: st.to_json() for name, st in self.stage_status.items()}


@dataclass(frozen=True)
class ArtifactPaths:
    """Where every pipeline artifact of one ad lives."""

    trim_json: Path
    trimmed_video: Path
    transcript_json: Path
    frames_dir: Path
    frames_index: Path
    framedesc_json: Path
    summary_txt: Path
    state_json: Path

    def all_suffix_artifacts(self) -> tuple[Path, ...]:
        return (
            self.trim_json,
            self.transcript_json,
            self.frames_dir,
            self.frames_index,
            self.framedesc_json,
            self.summary_txt,
            self.state_json,
        )


def output_paths(rec: AdRecord, root: Path) -> ArtifactPaths:
    """Artifact layout: ``<root>/<election_year>/<video-stem><suffix>``.

    The stem is used verbatim (spaces and all) so artifact names always
    match the source video name.
    """
    base = Path(root) / str(rec.election_year)
    stem = rec.stem
    return ArtifactPaths(
        trim_json=base / f"{stem}{SUFFIX_TRIM}",
        trimmed_video=base / f"{stem}{SUFFIX_TRIMMED_VIDEO}",
        transcript_json=base / f"{stem}{SUFFIX_TRANSCRIPT}",
        frames_dir=base / f"{stem}{SUFFIX_FRAMES_DIR}",
        frames_index=base / f"{stem}{SUFFIX_FRAMES_INDEX}",
        framedesc_json=base / f"{stem}{SUFFIX_FRAMEDESC}",
        summary_txt=base / f"{stem}{SUFFIX_SUMMARY}",
        state_json=base / f"{stem}{SUFFIX_STATE}",
    )


def frame_image_name(stem: str, index: int, timestamp_s: float) -> str:
    """Still filenames carry both the extraction order and the timestamp."""
    return f"{stem}.f{index:04d}@{int(round(timestamp_s * 1000))}.jpg"


__all__ = [
    "AdRecord",
    "ArtifactPaths",
    "DuplicateId",
    "MalformedRow",
    "Manifest",
    "ManifestError",
    "MissingColumn",
    "Party",
    "PipelineOutputs",
    "STAGES",
    "StageStatus",
    "StatsReport",
    "corpus_stats",
    "frame_image_name",
    "output_paths",
    "parse_manifest",
    "write_manifest",
]
