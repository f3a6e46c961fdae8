"""Keyframe selection: midpoints, 3-second grid, merge, and extraction."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spotforge.keyframer import (
    KeyFrame,
    ORIGIN_REGULAR_GRID,
    ORIGIN_SEGMENT_MID,
    grab_frames,
    merge_frames,
    regular_grid,
    segment_midpoints,
    write_frames_index,
)
from spotforge.media import DecoderFailure, StubMediaTool
from spotforge.transcriber import TranscriptSegment


def test_published_midpoints():
    mids = segment_midpoints(
        [TranscriptSegment(0, 4.40, "a"), TranscriptSegment(5.36, 8.58, "b")]
    )
    assert mids[0].timestamp_s == (0 + 4.40) / 2
    assert abs(mids[0].timestamp_s - 2.2) < 1e-12
    assert mids[1].timestamp_s == (5.36 + 8.58) / 2
    assert abs(mids[1].timestamp_s - 6.97) < 1e-12
    assert all(m.origin == ORIGIN_SEGMENT_MID for m in mids)


def test_midpoints_empty():
    assert segment_midpoints([]) == []


def test_grid_standard_spot_lengths():
    assert len(regular_grid(30)) == 10
    assert len(regular_grid(60)) == 20
    assert len(regular_grid(2.9)) == 0


def test_grid_centers():
    frames = regular_grid(9)
    assert [f.timestamp_s for f in frames] == [1.5, 4.5, 7.5]
    assert all(f.origin == ORIGIN_REGULAR_GRID for f in frames)


def test_grid_phase_offset():
    frames = regular_grid(9, phase_s=0.5)
    assert [f.timestamp_s for f in frames] == [2.0, 5.0, 8.0]


@settings(max_examples=500, deadline=None)
@given(st.floats(0, 1000, allow_nan=False))
def test_grid_count_closed_form(duration):
    assert len(regular_grid(duration)) == math.floor(duration / 3.0)


def test_merge_hand_example():
    mids = [KeyFrame(2.2, ORIGIN_SEGMENT_MID), KeyFrame(6.97, ORIGIN_SEGMENT_MID)]
    grid = [KeyFrame(1.5, ORIGIN_REGULAR_GRID), KeyFrame(4.5, ORIGIN_REGULAR_GRID)]
    merged = merge_frames(mids, grid)
    assert [f.timestamp_s for f in merged] == [1.5, 2.2, 4.5, 6.97]


def test_merge_empty_side_is_identity():
    mids = [KeyFrame(1.0, ORIGIN_SEGMENT_MID)]
    assert merge_frames(mids, []) == mids
    grid = [KeyFrame(1.5, ORIGIN_REGULAR_GRID)]
    assert merge_frames([], grid) == grid


def test_merge_tie_mid_first():
    mids = [KeyFrame(4.5, ORIGIN_SEGMENT_MID)]
    grid = [KeyFrame(4.5, ORIGIN_REGULAR_GRID)]
    merged = merge_frames(mids, grid)
    assert len(merged) == 2
    assert merged[0].origin == ORIGIN_SEGMENT_MID
    assert merged[1].origin == ORIGIN_REGULAR_GRID


@st.composite
def frame_inputs(draw):
    mids = sorted(draw(st.lists(st.floats(0, 100, allow_nan=False), max_size=15)))
    grid = sorted(draw(st.lists(st.floats(0, 100, allow_nan=False), max_size=15)))
    return (
        [KeyFrame(t, ORIGIN_SEGMENT_MID) for t in mids],
        [KeyFrame(t, ORIGIN_REGULAR_GRID) for t in grid],
    )


@settings(max_examples=500, deadline=None)
@given(frame_inputs())
def test_merge_count_is_sum(inputs):
    mids, grid = inputs
    merged = merge_frames(mids, grid)
    assert len(merged) == len(mids) + len(grid)
    times = [f.timestamp_s for f in merged]
    assert times == sorted(times)


def test_midpoint_strictly_inside_nondegenerate():
    segments = [TranscriptSegment(1.0, 3.0, "a"), TranscriptSegment(4.0, 9.5, "b")]
    for seg, mid in zip(segments, segment_midpoints(segments)):
        assert seg.start_s < mid.timestamp_s < seg.end_s


def test_epsilon_dedup_optional():
    mids = [KeyFrame(4.4, ORIGIN_SEGMENT_MID)]
    grid = [KeyFrame(4.5, ORIGIN_REGULAR_GRID), KeyFrame(7.5, ORIGIN_REGULAR_GRID)]
    merged = merge_frames(mids, grid, dedup_epsilon_s=0.25)
    assert [f.timestamp_s for f in merged] == [4.4, 7.5]
    # default keeps everything
    assert len(merge_frames(mids, grid)) == 3


def _stub_video(tmp_path, duration=30.0):
    video = tmp_path / "clip.trimmed.mp4"
    video.write_text(json.dumps({"duration_s": duration}), encoding="utf-8")
    return video


def test_grab_frames_counts(tmp_path):
    video = _stub_video(tmp_path)
    frames = regular_grid(30)
    out, warnings = grab_frames(
        video, frames, tmp_path / "clip.frames", "clip", tool=StubMediaTool()
    )
    assert warnings == []
    images = list((tmp_path / "clip.frames").glob("*.jpg"))
    assert len(images) == 10
    assert all(f.image_path is not None and f.image_path.exists() for f in out)


def test_grab_frames_beyond_eof_skipped(tmp_path):
    video = _stub_video(tmp_path, duration=10.0)
    frames = [KeyFrame(5.0, ORIGIN_REGULAR_GRID), KeyFrame(11.0, ORIGIN_SEGMENT_MID)]
    out, warnings = grab_frames(
        video, frames, tmp_path / "f", "clip", tool=StubMediaTool()
    )
    assert len(warnings) == 1
    assert out[0].image_path is not None
    assert out[1].image_path is None


def test_grab_frames_decoder_failure(tmp_path):
    frames = [KeyFrame(1.0, ORIGIN_REGULAR_GRID)]
    with pytest.raises(DecoderFailure):
        grab_frames(
            tmp_path / "missing.mp4", frames, tmp_path / "f", "x", tool=StubMediaTool()
        )


def test_frames_index_relative_paths(tmp_path):
    video = _stub_video(tmp_path, duration=9.0)
    frames, warnings = grab_frames(
        video, regular_grid(9), tmp_path / "clip.frames", "clip", tool=StubMediaTool()
    )
    index_path = tmp_path / "clip.frames.json"
    write_frames_index(index_path, frames, warnings)
    data = json.loads(index_path.read_text())
    assert [row["image_path"] for row in data["frames"]] == [
        "clip.frames/clip.f0000@1500.jpg",
        "clip.frames/clip.f0001@4500.jpg",
        "clip.frames/clip.f0002@7500.jpg",
    ]
