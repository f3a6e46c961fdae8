"""Convert cloud video-intelligence detection output into annotation files.

Accepts the JSON produced by the video-intelligence API (either REST-style
"12.5s" offsets or proto-style {"seconds", "nanos"} objects) and emits the
trimmer's ingestion format: {words, persons, scenes, duration_s}.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .jsonio import read_json, write_json


def parse_offset(value) -> float:
    """Time offset in seconds from either API encoding."""
    if value is None:
        return 0.0
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(value.rstrip("s") or 0)
    return float(value.get("seconds", 0)) + float(value.get("nanos", 0)) / 1e9


def _segment(obj: dict) -> tuple[float, float]:
    start = obj.get("start_time_offset", obj.get("startTimeOffset"))
    end = obj.get("end_time_offset", obj.get("endTimeOffset"))
    return parse_offset(start), parse_offset(end)


def convert_annotations(payload: dict) -> dict:
    """Flatten one video's annotation_results into the trimmer schema."""
    results = payload.get("annotation_results", payload.get("annotationResults", [payload]))
    words: list[list[float]] = []
    persons: list[list[float]] = []
    scenes: list[list[float]] = []
    duration = 0.0

    for result in results:
        seg = result.get("segment")
        if seg:
            duration = max(duration, _segment(seg)[1])
        for transcription in result.get(
            "speech_transcriptions", result.get("speechTranscriptions", [])
        ):
            for alternative in transcription.get("alternatives", []):
                for word in alternative.get("words", []):
                    start = parse_offset(word.get("start_time", word.get("startTime")))
                    end = parse_offset(word.get("end_time", word.get("endTime")))
                    words.append([start, end])
        for person in result.get(
            "person_detection_annotations", result.get("personDetectionAnnotations", [])
        ):
            for track in person.get("tracks", []):
                seg = track.get("segment", {})
                start, end = _segment(seg)
                persons.append([start, end])
        for shot in result.get("shot_annotations", result.get("shotAnnotations", [])):
            scenes.append(list(_segment(shot)))

    words.sort()
    persons.sort()
    scenes.sort()
    if duration == 0.0:
        candidates = [end for _, end in words + persons + scenes]
        duration = max(candidates) if candidates else 0.0
    return {
        "words": words,
        "persons": persons,
        "scenes": scenes,
        "duration_s": duration,
    }


@click.command()
@click.argument("source", type=click.Path(path_type=Path, exists=True))
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Output path (default: <video-stem>.annotations.json next to SOURCE).")
def main(source: Path, out_path: Path | None) -> None:
    """Convert a video-intelligence JSON dump into <stem>.annotations.json."""
    payload = read_json(source)
    converted = convert_annotations(payload)
    if out_path is None:
        stem = source.stem.removesuffix(".detections")
        out_path = source.with_name(f"{stem}.annotations.json")
    write_json(out_path, converted)
    click.echo(str(out_path))


if __name__ == "__main__":
    sys.exit(main())
