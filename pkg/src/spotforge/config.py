"""Global configuration: spotforge.toml, environment, then flag overrides.

Precedence is flags > environment > config file.  Auth tokens are read only
from the environment (SPOTFORGE_ASR_TOKEN, SPOTFORGE_VISION_TOKEN,
SPOTFORGE_LLM_TOKEN), never from files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover — py310 fallback
    import tomli as tomllib

from .backends import (
    HttpTextBackend,
    HttpTranscriptionBackend,
    HttpVisionBackend,
    LocalProcessTranscriptionBackend,
    MockTextBackend,
    MockTranscriptionBackend,
    MockVisionBackend,
)
from .media import FfmpegTool, StubMediaTool
from .orchestrator import BackendLimits, Backends, ConfigError, RunConfig

DEFAULT_CONFIG_NAME = "spotforge.toml"


@dataclass
class BackendConfig:
    kind: str = "mock"  # mock | local | http
    fixture: Optional[Path] = None
    argv: list[str] = field(default_factory=list)
    base_url: str = ""
    model: str = ""
    timeout_s: float = 120.0
    temperature: float = 0.0
    max_concurrency: int = 4
    rpm: Optional[int] = None
    responses: list[str] = field(default_factory=list)  # mock text scripts


@dataclass
class GlobalConfig:
    workers: int = 48
    outputs: Path = Path("outputs")
    checkpoint: Optional[Path] = None  # default: <outputs>/checkpoint.jsonl
    default_retries: int = 2
    word_limit_retries: int = 2
    grid_phase_s: float = 0.0
    dedup_epsilon_s: Optional[float] = None
    asr: BackendConfig = field(default_factory=BackendConfig)
    vision: BackendConfig = field(default_factory=BackendConfig)
    llm: BackendConfig = field(default_factory=BackendConfig)
    media_kind: str = "ffmpeg"  # ffmpeg | stub
    ffmpeg: str = "ffmpeg"
    ffprobe: str = "ffprobe"

    def validate(self) -> None:
        for name, cfg in (("asr", self.asr), ("vision", self.vision), ("llm", self.llm)):
            if cfg.kind not in ("mock", "local", "http"):
                raise ConfigError(f"[{name}] kind must be mock, local, or http, got {cfg.kind!r}")
            if cfg.kind == "http" and not cfg.base_url:
                raise ConfigError(f"[{name}] kind=http requires base_url")
            if cfg.kind == "local" and name != "asr":
                raise ConfigError(f"[{name}] kind=local is only supported for asr")
            if cfg.kind == "local" and not cfg.argv:
                raise ConfigError("[asr] kind=local requires argv")
            if cfg.max_concurrency < 1:
                raise ConfigError(f"[{name}] max_concurrency must be >= 1")
            if cfg.rpm is not None and cfg.rpm < 1:
                raise ConfigError(f"[{name}] rpm must be >= 1 or omitted")
        if self.media_kind not in ("ffmpeg", "stub"):
            raise ConfigError(f"[media] kind must be ffmpeg or stub, got {self.media_kind!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def checkpoint_path(self) -> Path:
        return self.checkpoint if self.checkpoint else self.outputs / "checkpoint.jsonl"


def _backend_config(section: dict[str, Any]) -> BackendConfig:
    cfg = BackendConfig()
    if "kind" in section:
        cfg.kind = str(section["kind"])
    if "fixture" in section:
        cfg.fixture = Path(section["fixture"])
    if "argv" in section:
        cfg.argv = [str(a) for a in section["argv"]]
    if "base_url" in section:
        cfg.base_url = str(section["base_url"])
    if "model" in section:
        cfg.model = str(section["model"])
    if "timeout_s" in section:
        cfg.timeout_s = float(section["timeout_s"])
    if "temperature" in section:
        cfg.temperature = float(section["temperature"])
    if "max_concurrency" in section:
        cfg.max_concurrency = int(section["max_concurrency"])
    if "rpm" in section:
        rpm = int(section["rpm"])
        cfg.rpm = rpm if rpm > 0 else None
    if "responses" in section:
        cfg.responses = [str(r) for r in section["responses"]]
    return cfg


def load_config(path: Optional[Path] = None) -> GlobalConfig:
    """Load spotforge.toml (if present) and apply environment overrides."""
    cfg = GlobalConfig()
    if path is None and Path(DEFAULT_CONFIG_NAME).exists():
        path = Path(DEFAULT_CONFIG_NAME)
    if path is not None:
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"cannot parse {path}: {exc}")
        run_section = data.get("run", {})
        if "workers" in run_section:
            cfg.workers = int(run_section["workers"])
        if "outputs" in run_section:
            cfg.outputs = Path(run_section["outputs"])
        if "checkpoint" in run_section:
            cfg.checkpoint = Path(run_section["checkpoint"])
        if "default_retries" in run_section:
            cfg.default_retries = int(run_section["default_retries"])
        if "word_limit_retries" in run_section:
            cfg.word_limit_retries = int(run_section["word_limit_retries"])
        keyframes = data.get("keyframes", {})
        if "grid_phase_s" in keyframes:
            cfg.grid_phase_s = float(keyframes["grid_phase_s"])
        if "dedup_epsilon_s" in keyframes:
            cfg.dedup_epsilon_s = float(keyframes["dedup_epsilon_s"])
        if "asr" in data:
            cfg.asr = _backend_config(data["asr"])
        if "vision" in data:
            cfg.vision = _backend_config(data["vision"])
        if "llm" in data:
            cfg.llm = _backend_config(data["llm"])
        media = data.get("media", {})
        if "kind" in media:
            cfg.media_kind = str(media["kind"])
        if "ffmpeg" in media:
            cfg.ffmpeg = str(media["ffmpeg"])
        if "ffprobe" in media:
            cfg.ffprobe = str(media["ffprobe"])

    if "SPOTFORGE_WORKERS" in os.environ:
        cfg.workers = int(os.environ["SPOTFORGE_WORKERS"])
    if "SPOTFORGE_OUTPUTS" in os.environ:
        cfg.outputs = Path(os.environ["SPOTFORGE_OUTPUTS"])
    if "SPOTFORGE_CHECKPOINT" in os.environ:
        cfg.checkpoint = Path(os.environ["SPOTFORGE_CHECKPOINT"])

    cfg.validate()
    return cfg


def make_backends(cfg: GlobalConfig) -> Backends:
    if cfg.asr.kind == "mock":
        asr = (
            MockTranscriptionBackend.from_file(cfg.asr.fixture)
            if cfg.asr.fixture
            else MockTranscriptionBackend()
        )
    elif cfg.asr.kind == "local":
        asr = LocalProcessTranscriptionBackend(argv=cfg.asr.argv, timeout_s=cfg.asr.timeout_s)
    else:
        asr = HttpTranscriptionBackend(
            base_url=cfg.asr.base_url,
            model=cfg.asr.model or "whisper-large-v3",
            timeout_s=cfg.asr.timeout_s,
        )

    if cfg.vision.kind == "mock":
        fixtures = {}
        if cfg.vision.fixture:
            from .jsonio import read_json

            fixtures = read_json(cfg.vision.fixture)
        vision = MockVisionBackend(fixtures=fixtures)
    else:
        vision = HttpVisionBackend(
            base_url=cfg.vision.base_url,
            model=cfg.vision.model,
            timeout_s=cfg.vision.timeout_s,
            temperature=cfg.vision.temperature,
        )

    if cfg.llm.kind == "mock":
        text = (
            MockTextBackend(responses=tuple(cfg.llm.responses))
            if cfg.llm.responses
            else MockTextBackend()
        )
    else:
        text = HttpTextBackend(
            base_url=cfg.llm.base_url,
            model=cfg.llm.model,
            timeout_s=cfg.llm.timeout_s,
            temperature=cfg.llm.temperature,
        )

    if cfg.media_kind == "stub":
        media = StubMediaTool()
    else:
        media = FfmpegTool(ffmpeg=cfg.ffmpeg, ffprobe=cfg.ffprobe)
    return Backends(asr=asr, vision=vision, text=text, media=media)


def make_run_config(
    cfg: GlobalConfig,
    workers: Optional[int] = None,
    checkpoint: Optional[Path] = None,
) -> RunConfig:
    run_config = RunConfig(
        workers=workers if workers is not None else cfg.workers,
        asr=BackendLimits(cfg.asr.max_concurrency, cfg.asr.rpm),
        vision=BackendLimits(cfg.vision.max_concurrency, cfg.vision.rpm),
        text=BackendLimits(cfg.llm.max_concurrency, cfg.llm.rpm),
        default_retries=cfg.default_retries,
        word_limit_retries=cfg.word_limit_retries,
        checkpoint=checkpoint if checkpoint is not None else cfg.checkpoint_path(),
        grid_phase_s=cfg.grid_phase_s,
        dedup_epsilon_s=cfg.dedup_epsilon_s,
    )
    run_config.validate()
    return run_config


__all__ = [
    "BackendConfig",
    "DEFAULT_CONFIG_NAME",
    "GlobalConfig",
    "load_config",
    "make_backends",
    "make_run_config",
]
