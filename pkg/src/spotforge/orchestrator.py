"""Five-stage pipeline runner: trim, transcribe, keyframes, describe, summarize.

Each ad is an independent workload; a worker pool fans out across ads (and a
sub-pool across frames for captioning) under per-backend concurrency and
requests-per-minute limits.  Stage outputs are written atomically before the
checkpoint records them, so an interrupted run resumes without repeating
finished work or re-billing backends.
"""

from __future__ import annotations

import json
import logging
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence

from . import describer, keyframer, summarizer, transcriber, trimmer
from .backends import BackendFailure, TextBackend, TranscriptionBackend, VisionBackend
from .jsonio import atomic_write_text, read_json, write_json
from .media import MediaTool
from .records import (
    AdRecord,
    ArtifactPaths,
    Manifest,
    PipelineOutputs,
    STAGES,
    output_paths,
)

logger = logging.getLogger(__name__)

CHECKPOINT_SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Run configuration failed validation."""


class CorruptCheckpoint(Exception):
    """Checkpoint log is unreadable; rerun with --restart to start over."""


class MissingPrerequisite(Exception):
    """A stage's input artifact is absent (earlier stage not run)."""


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


@dataclass
class BackendLimits:
    max_concurrency: int = 4
    rpm: Optional[int] = None  # None = unlimited

    def validate(self, name: str) -> None:
        if self.max_concurrency < 1:
            raise ConfigError(f"{name}.max_concurrency must be >= 1")
        if self.rpm is not None and self.rpm < 1:
            raise ConfigError(f"{name}.rpm must be >= 1 or unlimited")


@dataclass
class RunConfig:
    workers: int = 48
    asr: BackendLimits = field(default_factory=BackendLimits)
    vision: BackendLimits = field(default_factory=BackendLimits)
    text: BackendLimits = field(default_factory=BackendLimits)
    stage_retries: dict[str, int] = field(default_factory=dict)
    default_retries: int = 2
    word_limit_retries: int = 2
    checkpoint: Path = Path("checkpoint.jsonl")
    grid_phase_s: float = 0.0
    dedup_epsilon_s: Optional[float] = None

    def validate(self) -> None:
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for name, limits in (("asr", self.asr), ("vision", self.vision), ("text", self.text)):
            limits.validate(name)
        for stage, budget in self.stage_retries.items():
            if stage not in STAGES:
                raise ConfigError(f"unknown stage {stage!r} in retry budget")
            if budget < 0:
                raise ConfigError(f"retry budget for {stage} must be >= 0")
        if self.default_retries < 0 or self.word_limit_retries < 0:
            raise ConfigError("retry budgets must be >= 0")

    def retries_for(self, stage: str) -> int:
        return self.stage_retries.get(stage, self.default_retries)


@dataclass
class Backends:
    asr: TranscriptionBackend
    vision: VisionBackend
    text: TextBackend
    media: MediaTool


class RateLimiter:
    """Sliding-window limiter: at most ``rpm`` acquisitions per 60 seconds."""

    WINDOW_S = 60.0

    def __init__(self, rpm: Optional[int], clock: Clock):
        self.rpm = rpm
        self.clock = clock
        self._stamps: list[float] = []
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if self.rpm is None:
            return
        while True:
            with self._lock:
                now = self.clock.now()
                cutoff = now - self.WINDOW_S
                self._stamps = [t for t in self._stamps if t > cutoff]
                if len(self._stamps) < self.rpm:
                    self._stamps.append(now)
                    return
                wait = self._stamps[0] + self.WINDOW_S - now
            self.clock.sleep(max(wait, 1e-6))


def call_with_retry(
    fn: Callable[[], object],
    retries: int,
    clock: Clock,
    base_delay_s: float = 1.0,
    factor: float = 2.0,
    rng: Optional[random.Random] = None,
):
    """Retry BackendFailure with exponential backoff and jitter.

    Validation failures (and everything else) propagate immediately.
    """
    attempt = 0
    while True:
        try:
            return fn()
        except BackendFailure:
            if attempt >= retries:
                raise
            delay = base_delay_s * factor**attempt
            if rng is not None:
                delay *= 1.0 + rng.random() * 0.25
            clock.sleep(delay)
            attempt += 1


class Checkpoint:
    """Append-only log of durably-written stage completions."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def start_fresh(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"schema": CHECKPOINT_SCHEMA_VERSION}) + "\n")

    def record(self, ad_id: str, stage: str) -> None:
        line = json.dumps({"ad": ad_id, "stage": stage, "status": "done"}) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()

    def load_done(self) -> set[tuple[str, str]]:
        if not self.path.exists():
            raise FileNotFoundError(f"no checkpoint at {self.path}")
        done: set[tuple[str, str]] = set()
        with open(self.path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise CorruptCheckpoint(f"{self.path} is empty; rerun with --restart")
        try:
            header = json.loads(lines[0])
            if header.get("schema") != CHECKPOINT_SCHEMA_VERSION:
                raise CorruptCheckpoint(
                    f"{self.path} has schema {header.get('schema')}; rerun with --restart"
                )
            for line in lines[1:]:
                rec = json.loads(line)
                if rec["status"] == "done":
                    done.add((rec["ad"], rec["stage"]))
        except CorruptCheckpoint:
            raise
        except (ValueError, KeyError, TypeError):
            raise CorruptCheckpoint(
                f"{self.path} is truncated or malformed; rerun with --restart"
            )
        return done

    def compact(self) -> None:
        """Rewrite the log with one record per completed (ad, stage)."""
        done = self.load_done()
        lines = [json.dumps({"schema": CHECKPOINT_SCHEMA_VERSION})]
        for ad_id, stage in sorted(done):
            lines.append(json.dumps({"ad": ad_id, "stage": stage, "status": "done"}))
        atomic_write_text(self.path, "\n".join(lines) + "\n")


@dataclass
class RunReport:
    completed: int = 0
    failed: int = 0
    skipped: int = 0
    wall_time_s: float = 0.0
    failures: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "completed": self.completed,
            "failed": self.failed,
            "skipped": self.skipped,
            "wall_time_s": self.wall_time_s,
            "failures": dict(sorted(self.failures.items())),
        }


class _GuardedBackend:
    """Applies the per-backend gate (concurrency, rpm, retries) to each call."""

    def __init__(self, runner: "PipelineRunner", kind: str, stage: str):
        self._runner = runner
        self._kind = kind
        self._stage = stage
        self.name = getattr(getattr(runner.backends, kind), "name", kind)

    def _call(self, fn: Callable[[], object]):
        return self._runner.guarded_call(self._kind, self._stage, fn)

    def transcribe(self, audio: Path):
        return self._call(lambda: self._runner.backends.asr.transcribe(audio))

    def describe(self, image: Path, prompt: str):
        return self._call(lambda: self._runner.backends.vision.describe(image, prompt))

    def complete(self, prompt: str):
        return self._call(lambda: self._runner.backends.text.complete(prompt))


class PipelineRunner:
    def __init__(
        self,
        manifest: Manifest,
        stages: Sequence[str],
        config: RunConfig,
        backends: Backends,
        outputs_root: Path,
        clock: Optional[Clock] = None,
        jitter_rng: Optional[random.Random] = None,
    ):
        config.validate()
        unknown = [s for s in stages if s not in STAGES]
        if unknown:
            raise ConfigError(f"unknown stages: {unknown}")
        self.manifest = manifest
        self.stages = [s for s in STAGES if s in stages]
        self.config = config
        self.backends = backends
        self.outputs_root = Path(outputs_root)
        self.clock = clock if clock is not None else SystemClock()
        self.jitter_rng = jitter_rng
        self.checkpoint = Checkpoint(config.checkpoint)
        self._limiters = {
            "asr": RateLimiter(config.asr.rpm, self.clock),
            "vision": RateLimiter(config.vision.rpm, self.clock),
            "text": RateLimiter(config.text.rpm, self.clock),
        }
        self._gates = {
            "asr": threading.Semaphore(self._effective_concurrency("asr", config.asr)),
            "vision": threading.Semaphore(self._effective_concurrency("vision", config.vision)),
            "text": threading.Semaphore(self._effective_concurrency("text", config.text)),
        }

    def _effective_concurrency(self, kind: str, limits: BackendLimits) -> int:
        declared = getattr(getattr(self.backends, kind), "max_concurrency", None)
        if declared is None:
            return limits.max_concurrency
        return max(1, min(limits.max_concurrency, int(declared)))

    def vision_fanout(self) -> int:
        return self._effective_concurrency("vision", self.config.vision)

    def guarded_call(self, kind: str, stage: str, fn: Callable[[], object]):
        limiter = self._limiters[kind]
        gate = self._gates[kind]

        def limited() -> object:
            limiter.acquire()
            return fn()

        with gate:
            return call_with_retry(
                limited,
                retries=self.config.retries_for(stage),
                clock=self.clock,
                rng=self.jitter_rng,
            )

    # ----- stage implementations -------------------------------------------

    def _stage_trim(self, rec: AdRecord, paths: ArtifactPaths) -> None:
        video = self.manifest.video_file(rec)
        annotations_path = video.with_name(f"{rec.stem}.annotations.json")
        duration = rec.duration_s
        if duration <= 0:
            duration = self.backends.media.probe_duration(video)
        if annotations_path.exists():
            annotations = trimmer.AnnotationSet.load(annotations_path)
            window = trimmer.compute_trim(annotations)
        else:
            # No detections available: keep everything, flag for review.
            window = trimmer.TrimWindow(s=0.0, s_prime=duration, degenerate=True)
            logger.warning("ad %s: no annotations at %s; keeping full video", rec.id, annotations_path)
        trimmer.apply_trim(video, window, paths.trimmed_video, tool=self.backends.media)
        write_json(paths.trim_json, window.to_json())

    def _stage_transcribe(self, rec: AdRecord, paths: ArtifactPaths) -> None:
        if not paths.trimmed_video.exists():
            raise MissingPrerequisite(f"no trimmed clip at {paths.trimmed_video}")
        backend = _GuardedBackend(self, "asr", "transcribe")
        segments = transcriber.transcribe_ad(rec, backend, paths.trimmed_video)
        transcriber.write_transcript(paths.transcript_json, segments)

    def _stage_keyframes(self, rec: AdRecord, paths: ArtifactPaths) -> None:
        for needed in (paths.trim_json, paths.transcript_json, paths.trimmed_video):
            if not needed.exists():
                raise MissingPrerequisite(f"missing {needed}")
        window = trimmer.TrimWindow.from_json(read_json(paths.trim_json))
        segments = transcriber.read_transcript(paths.transcript_json)
        mids = keyframer.segment_midpoints(segments)
        grid = keyframer.regular_grid(window.length_s, phase_s=self.config.grid_phase_s)
        merged = keyframer.merge_frames(mids, grid, dedup_epsilon_s=self.config.dedup_epsilon_s)
        frames, warnings = keyframer.grab_frames(
            paths.trimmed_video,
            merged,
            paths.frames_dir,
            rec.stem,
            tool=self.backends.media,
            duration_s=window.length_s,
        )
        keyframer.write_frames_index(paths.frames_index, frames, warnings)

    def _stage_describe(self, rec: AdRecord, paths: ArtifactPaths) -> None:
        for needed in (paths.frames_index, paths.transcript_json):
            if not needed.exists():
                raise MissingPrerequisite(f"missing {needed}")
        frames = []
        for row in read_json(paths.frames_index)["frames"]:
            image = (
                paths.frames_index.parent / row["image_path"]
                if row.get("image_path")
                else None
            )
            frames.append(
                keyframer.KeyFrame(
                    timestamp_s=row["timestamp_s"], origin=row["origin"], image_path=image
                )
            )
        transcript_text = read_json(paths.transcript_json)["full_text"]
        backend = _GuardedBackend(self, "vision", "describe")
        result = describer.describe_frames(
            frames, rec, transcript_text, backend, max_workers=self.vision_fanout()
        )
        describer.write_framedesc(paths.framedesc_json, result)

    def _stage_summarize(self, rec: AdRecord, paths: ArtifactPaths) -> Optional[summarizer.SummaryResult]:
        for needed in (paths.framedesc_json, paths.transcript_json):
            if not needed.exists():
                raise MissingPrerequisite(f"missing {needed}")
        transcript_text = read_json(paths.transcript_json)["full_text"]
        desc_rows = read_json(paths.framedesc_json)["descriptions"]
        descriptions = [
            describer.FrameDescription(
                frame=keyframer.KeyFrame(row["timestamp_s"], row["origin"]),
                text=row["text"],
                word_count=row["word_count"],
                overlength=row["overlength"],
            )
            for row in desc_rows
        ]
        backend = _GuardedBackend(self, "text", "summarize")
        result = summarizer.summarize(
            rec,
            transcript_text,
            descriptions,
            backend,
            max_retries=self.config.word_limit_retries,
        )
        atomic_write_text(paths.summary_txt, result.text + "\n")
        return result

    _STAGE_FNS = {
        "trim": _stage_trim,
        "transcribe": _stage_transcribe,
        "keyframes": _stage_keyframes,
        "describe": _stage_describe,
        "summarize": _stage_summarize,
    }

    # ----- per-ad driver ----------------------------------------------------

    def process_ad(self, rec: AdRecord, done: set[tuple[str, str]]) -> tuple[str, Optional[str]]:
        paths = output_paths(rec, self.outputs_root)
        state = PipelineOutputs()
        summary_meta: Optional[dict] = None
        for stage in self.stages:
            if (rec.id, stage) in done:
                state.mark_done(stage)
        newly_run = 0
        outcome: tuple[str, Optional[str]] = ("completed", None)
        for stage in self.stages:
            if state.stage_status[stage].status == "done":
                continue
            try:
                result = self._STAGE_FNS[stage](self, rec, paths)
                if stage == "summarize" and result is not None:
                    summary_meta = result.to_json()
                self.checkpoint.record(rec.id, stage)
                state.mark_done(stage)
                newly_run += 1
            except Exception as exc:  # noqa: BLE001 — failures isolate to this ad
                reason = f"{stage}: {exc}"
                state.mark_failed(stage, str(exc))
                logger.error("ad %s failed at %s: %s", rec.id, stage, exc)
                outcome = ("failed", reason)
                break
        self._write_state(rec, paths, state, summary_meta)
        if outcome[0] == "completed" and newly_run == 0:
            return ("skipped", None)
        return outcome

    def _write_state(
        self,
        rec: AdRecord,
        paths: ArtifactPaths,
        state: PipelineOutputs,
        summary_meta: Optional[dict],
    ) -> None:
        payload: dict = {"ad_id": rec.id, "stages": state.status_json()}
        if summary_meta is None and paths.state_json.exists():
            # Preserve summary metadata from an earlier run.
            summary_meta = read_json(paths.state_json).get("summary")
        if summary_meta is not None:
            payload["summary"] = summary_meta
        write_json(paths.state_json, payload)

    # ----- whole-run drivers -------------------------------------------------

    def execute(self, done: set[tuple[str, str]]) -> RunReport:
        start = self.clock.now()
        report = RunReport()
        results: list[tuple[str, tuple[str, Optional[str]]]] = []
        if self.config.workers == 1:
            for rec in self.manifest.records:
                results.append((rec.id, self.process_ad(rec, done)))
        else:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                futures = {
                    pool.submit(self.process_ad, rec, done): rec.id
                    for rec in self.manifest.records
                }
                for future, ad_id in futures.items():
                    results.append((ad_id, future.result()))
        for ad_id, (status, reason) in results:
            if status == "completed":
                report.completed += 1
            elif status == "skipped":
                report.skipped += 1
            else:
                report.failed += 1
                report.failures[ad_id] = reason or "unknown"
        report.wall_time_s = self.clock.now() - start
        self.checkpoint.compact()
        return report


def run(
    manifest: Manifest,
    stages: Sequence[str],
    config: RunConfig,
    backends: Backends,
    outputs_root: Path,
    clock: Optional[Clock] = None,
    jitter_rng: Optional[random.Random] = None,
) -> RunReport:
    """Fresh run: any existing checkpoint is restarted."""
    runner = PipelineRunner(manifest, stages, config, backends, outputs_root, clock, jitter_rng)
    runner.checkpoint.start_fresh()
    return runner.execute(done=set())


def resume(
    manifest: Manifest,
    stages: Sequence[str],
    config: RunConfig,
    backends: Backends,
    outputs_root: Path,
    clock: Optional[Clock] = None,
    jitter_rng: Optional[random.Random] = None,
) -> RunReport:
    """Continue from the checkpoint: completed stages are never re-run."""
    runner = PipelineRunner(manifest, stages, config, backends, outputs_root, clock, jitter_rng)
    done = runner.checkpoint.load_done()
    return runner.execute(done=done)


__all__ = [
    "BackendLimits",
    "Backends",
    "CHECKPOINT_SCHEMA_VERSION",
    "Checkpoint",
    "Clock",
    "ConfigError",
    "CorruptCheckpoint",
    "MissingPrerequisite",
    "PipelineRunner",
    "RateLimiter",
    "RunConfig",
    "RunReport",
    "SystemClock",
    "call_with_retry",
    "resume",
    "run",
]
