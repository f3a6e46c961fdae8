"""Pluggable model backends: speech-to-text, vision captioning, text completion.

Each kind ships three flavors: a deterministic mock (fixture-driven, for
tests and dry runs), a local child-process wrapper, and a hosted HTTP API
client.  Auth tokens come from environment variables, never config files.
"""

from __future__ import annotations

import base64
import json
import os
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx

ASR_TOKEN_ENV = "SPOTFORGE_ASR_TOKEN"
VISION_TOKEN_ENV = "SPOTFORGE_VISION_TOKEN"
LLM_TOKEN_ENV = "SPOTFORGE_LLM_TOKEN"


class BackendFailure(Exception):
    """Transport/model failure; the orchestrator may retry these."""

    def __init__(self, name: str, cause: str):
        super().__init__(f"backend {name!r} failed: {cause}")
        self.name = name
        self.cause = cause


class ValidationFailure(Exception):
    """Backend output violated its contract; not retryable."""


class TranscriptionBackend(Protocol):
    name: str

    def transcribe(self, audio: Path) -> list["TranscriptSegment"]: ...


class VisionBackend(Protocol):
    name: str

    def describe(self, image: Path, prompt: str) -> str: ...


class TextBackend(Protocol):
    name: str

    def complete(self, prompt: str) -> str: ...


def _strip_artifact_stem(path: Path) -> str:
    """Ad stem for a media file, tolerating the `.trimmed` intermediate."""
    stem = Path(path).stem
    if stem.endswith(".trimmed"):
        stem = stem[: -len(".trimmed")]
    return stem


@dataclass
class MockTranscriptionBackend:
    """Replays scripted segments keyed by video stem.

    ``fixtures`` maps stem -> [[start_s, end_s, text], ...]; a fixture file
    holds the same mapping as JSON.
    """

    fixtures: dict[str, list] = field(default_factory=dict)
    name: str = "mock-asr"

    @classmethod
    def from_file(cls, path: Path) -> "MockTranscriptionBackend":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(fixtures=json.load(fh))

    def transcribe(self, audio: Path) -> list["TranscriptSegment"]:
        from .transcriber import TranscriptSegment

        stem = _strip_artifact_stem(audio)
        rows = self.fixtures.get(stem, [])
        return [TranscriptSegment(float(r[0]), float(r[1]), str(r[2])) for r in rows]


@dataclass
class MockVisionBackend:
    """Caption = fixture lookup by image filename, else a deterministic stub."""

    fixtures: dict[str, str] = field(default_factory=dict)
    name: str = "mock-vision"

    def describe(self, image: Path, prompt: str) -> str:
        key = Path(image).name
        if key in self.fixtures:
            return self.fixtures[key]
        return f"Mock caption for frame {key}"


@dataclass
class MockTextBackend:
    """Deterministic given the attempt counter: responses play in order,
    the last one repeating once the script is exhausted."""

    responses: Sequence[str] = ("Mock fifty word summary placeholder.",)
    name: str = "mock-llm"

    def __post_init__(self):
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def complete(self, prompt: str) -> str:
        with self._lock:
            idx = min(self._calls, len(self.responses) - 1)
            self._calls += 1
        return self.responses[idx]


@dataclass
class LocalProcessTranscriptionBackend:
    """Runs a local speech-to-text CLI; expects JSON segments on stdout.

    ``argv`` is a full command template where "{audio}" is substituted; the
    process must print {"segments": [{"start_s", "end_s", "text"}, ...]}.
    """

    argv: list[str]
    name: str = "local-asr"
    timeout_s: float = 600.0

    def transcribe(self, audio: Path) -> list["TranscriptSegment"]:
        from .transcriber import TranscriptSegment

        cmd = [part.format(audio=str(audio)) for part in self.argv]
        try:
            proc = subprocess.run(
                cmd, capture_output=True, text=True, timeout=self.timeout_s, check=False
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendFailure(self.name, str(exc))
        if proc.returncode != 0:
            raise BackendFailure(
                self.name, f"exit {proc.returncode}: {proc.stderr.strip()[:500]}"
            )
        try:
            payload = json.loads(proc.stdout)
            return [
                TranscriptSegment(float(s["start_s"]), float(s["end_s"]), str(s["text"]))
                for s in payload["segments"]
            ]
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendFailure(self.name, f"unparseable output: {exc}")


def _auth_headers(token_env: str) -> dict[str, str]:
    token = os.environ.get(token_env, "")
    return {"Authorization": f"Bearer {token}"} if token else {}


@dataclass
class HttpTranscriptionBackend:
    base_url: str
    model: str = "whisper-large-v3"
    timeout_s: float = 120.0
    token_env: str = ASR_TOKEN_ENV
    name: str = "http-asr"

    def transcribe(self, audio: Path) -> list["TranscriptSegment"]:
        from .transcriber import TranscriptSegment

        try:
            with open(audio, "rb") as fh:
                resp = httpx.post(
                    f"{self.base_url.rstrip('/')}/transcribe",
                    files={"audio": (Path(audio).name, fh)},
                    data={"model": self.model},
                    headers=_auth_headers(self.token_env),
                    timeout=self.timeout_s,
                )
            resp.raise_for_status()
            payload = resp.json()
            return [
                TranscriptSegment(float(s["start_s"]), float(s["end_s"]), str(s["text"]))
                for s in payload["segments"]
            ]
        except (httpx.HTTPError, OSError, ValueError, KeyError, TypeError) as exc:
            raise BackendFailure(self.name, str(exc))


@dataclass
class HttpVisionBackend:
    base_url: str
    model: str
    timeout_s: float = 120.0
    token_env: str = VISION_TOKEN_ENV
    temperature: float = 0.0
    name: str = "http-vision"

    def describe(self, image: Path, prompt: str) -> str:
        try:
            image_b64 = base64.b64encode(Path(image).read_bytes()).decode("ascii")
            resp = httpx.post(
                f"{self.base_url.rstrip('/')}/describe",
                json={
                    "model": self.model,
                    "prompt": prompt,
                    "image_b64": image_b64,
                    "temperature": self.temperature,
                },
                headers=_auth_headers(self.token_env),
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            return str(resp.json()["text"])
        except (httpx.HTTPError, OSError, ValueError, KeyError) as exc:
            raise BackendFailure(self.name, str(exc))


@dataclass
class HttpTextBackend:
    base_url: str
    model: str
    timeout_s: float = 120.0
    token_env: str = LLM_TOKEN_ENV
    temperature: float = 0.0
    name: str = "http-llm"

    def complete(self, prompt: str) -> str:
        try:
            resp = httpx.post(
                f"{self.base_url.rstrip('/')}/complete",
                json={
                    "model": self.model,
                    "prompt": prompt,
                    "temperature": self.temperature,
                },
                headers=_auth_headers(self.token_env),
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            return str(resp.json()["text"])
        except (httpx.HTTPError, OSError, ValueError, KeyError) as exc:
            raise BackendFailure(self.name, str(exc))


__all__ = [
    "ASR_TOKEN_ENV",
    "BackendFailure",
    "HttpTextBackend",
    "HttpTranscriptionBackend",
    "HttpVisionBackend",
    "LLM_TOKEN_ENV",
    "LocalProcessTranscriptionBackend",
    "MockTextBackend",
    "MockTranscriptionBackend",
    "MockVisionBackend",
    "TextBackend",
    "TranscriptionBackend",
    "ValidationFailure",
    "VISION_TOKEN_ENV",
    "VisionBackend",
]
