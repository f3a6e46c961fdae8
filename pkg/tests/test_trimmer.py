"""Trim-window computation against a brute-force scene-marking oracle."""

import json
import subprocess

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spotforge.media import DecoderFailure, FfmpegTool, StubMediaTool, ffmpeg_available
from spotforge.transcriber import TranscriptSegment
from spotforge.trimmer import (
    AnnotationSet,
    InvalidAnnotations,
    TrimWindow,
    apply_trim,
    compute_trim,
    normalize_scenes,
    words_from_transcript,
)


def oracle_trim(annotations: AnnotationSet) -> TrimWindow:
    """Independent brute force: test every scene for intersection on its own.

    Closed-interval intersection; earliest marked scene start / latest marked
    scene end; full-video degenerate fallback.
    """
    detections = list(annotations.words) + list(annotations.persons)
    marked = []
    for scene in annotations.scenes:
        hit = False
        for det in detections:
            if det[0] <= scene[1] and scene[0] <= det[1]:
                hit = True
                break
        if hit:
            marked.append(scene)
    if not marked:
        return TrimWindow(0.0, annotations.duration_s, degenerate=True)
    return TrimWindow(
        min(s[0] for s in marked), max(s[1] for s in marked), degenerate=False
    )


# ----- fixed examples ---------------------------------------------------------


def test_fig1_geometry():
    a = AnnotationSet(
        words=[(3.0, 8.0)],
        persons=[(2.5, 8.5)],
        scenes=[(0, 2), (2, 6), (6, 9), (9, 12)],
        duration_s=12,
    )
    window = compute_trim(a)
    assert (window.s, window.s_prime) == (2.0, 9.0)
    assert not window.degenerate
    assert window == oracle_trim(a)


def test_single_scene_contains_everything():
    a = AnnotationSet(words=[(1.0, 2.0)], persons=[], scenes=[(0, 7)], duration_s=7)
    window = compute_trim(a)
    assert (window.s, window.s_prime) == (0.0, 7.0)


def test_no_detections_degenerate():
    a = AnnotationSet(words=[], persons=[], scenes=[(0, 5), (5, 10)], duration_s=10)
    window = compute_trim(a)
    assert (window.s, window.s_prime) == (0.0, 10.0)
    assert window.degenerate


def test_boundary_straddle_marks_both_scenes():
    a = AnnotationSet(
        words=[], persons=[(4.9, 5.1)], scenes=[(0, 5), (5, 10)], duration_s=10
    )
    window = compute_trim(a)
    assert (window.s, window.s_prime) == (0.0, 10.0)
    assert not window.degenerate


def test_exact_boundary_touch_marks_both():
    # A detection ending exactly at a boundary marks the next scene too.
    a = AnnotationSet(
        words=[(1.0, 5.0)], persons=[], scenes=[(0, 5), (5, 10)], duration_s=10
    )
    assert compute_trim(a) == TrimWindow(0.0, 10.0, False)


def test_point_person_detection():
    a = AnnotationSet(
        words=[], persons=[(7.0, 7.0)], scenes=[(0, 5), (5, 10)], duration_s=10
    )
    assert compute_trim(a) == TrimWindow(5.0, 10.0, False)


def test_scene_gaps_absorbed_into_preceding():
    scenes = normalize_scenes([(0, 2), (4, 6), (8, 10)], 10)
    assert scenes == [(0, 4), (4, 8), (8, 10)]


def test_trailing_and_leading_gaps():
    assert normalize_scenes([(1, 4), (4, 8)], 10) == [(0, 4), (4, 10)]


def test_invalid_scenes():
    with pytest.raises(InvalidAnnotations):
        compute_trim(AnnotationSet(scenes=[], duration_s=5))
    with pytest.raises(InvalidAnnotations):
        compute_trim(AnnotationSet(scenes=[(0, 3), (2, 5)], duration_s=5))
    with pytest.raises(InvalidAnnotations):
        compute_trim(AnnotationSet(scenes=[(0, 6)], duration_s=5))
    with pytest.raises(InvalidAnnotations):
        compute_trim(
            AnnotationSet(words=[(4, 2)], scenes=[(0, 5)], duration_s=5)
        )


# ----- property tests ---------------------------------------------------------


@st.composite
def annotation_sets(draw):
    duration = draw(st.floats(0.5, 120.0, allow_nan=False))
    n_bounds = draw(st.integers(0, 7))
    bounds = sorted(
        draw(
            st.lists(
                st.floats(0.0, duration, allow_nan=False, exclude_min=True, exclude_max=True),
                min_size=n_bounds,
                max_size=n_bounds,
                unique=True,
            )
        )
    )
    edges = [0.0, *bounds, duration]
    scenes = [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]

    def intervals(max_count):
        return st.lists(
            st.tuples(
                st.floats(0.0, duration, allow_nan=False),
                st.floats(0.0, duration, allow_nan=False),
            ).map(lambda p: (min(p), max(p))),
            max_size=max_count,
        )

    return AnnotationSet(
        words=draw(intervals(5)),
        persons=draw(intervals(5)),
        scenes=scenes,
        duration_s=duration,
    )


@settings(max_examples=1000, deadline=None)
@given(annotation_sets())
def test_matches_oracle(a):
    assert compute_trim(a) == oracle_trim(a)


@settings(max_examples=1000, deadline=None)
@given(annotation_sets())
def test_containment_no_overtrim(a):
    detections = a.words + a.persons
    window = compute_trim(a)
    if detections:
        lo = min(d[0] for d in detections)
        hi = max(d[1] for d in detections)
        assert window.s <= lo and hi <= window.s_prime


@settings(max_examples=300, deadline=None)
@given(annotation_sets(), st.randoms())
def test_permutation_invariance(a, rng):
    base = compute_trim(a)
    words = list(a.words)
    persons = list(a.persons)
    rng.shuffle(words)
    rng.shuffle(persons)
    shuffled = AnnotationSet(words=words, persons=persons, scenes=a.scenes, duration_s=a.duration_s)
    assert compute_trim(shuffled) == base


# ----- words_from_transcript ----------------------------------------------------


def test_instant_person_from_json():
    a = AnnotationSet.from_json(
        {"words": [], "persons": [7.0, [1.0, 2.0]], "scenes": [[0, 5], [5, 10]], "duration_s": 10}
    )
    assert a.persons == [(7.0, 7.0), (1.0, 2.0)]
    assert compute_trim(a) == TrimWindow(0.0, 10.0, False)


def test_words_from_transcript():
    segments = [TranscriptSegment(0, 4.40, "x"), TranscriptSegment(5.36, 8.58, "y")]
    assert words_from_transcript(segments) == [(0, 4.40), (5.36, 8.58)]
    assert words_from_transcript([]) == []


# ----- apply_trim -----------------------------------------------------------------


def test_apply_trim_stub_identity(tmp_path):
    video = tmp_path / "clip.mp4"
    video.write_text(json.dumps({"duration_s": 12.0}), encoding="utf-8")
    out = tmp_path / "clip.trimmed.mp4"
    apply_trim(video, TrimWindow(0.0, 12.0), out, tool=StubMediaTool())
    clip = json.loads(out.read_text())
    assert clip["duration_s"] == pytest.approx(12.0, abs=0.1)


def test_apply_trim_stub_window(tmp_path):
    video = tmp_path / "clip.mp4"
    video.write_text(json.dumps({"duration_s": 12.0}), encoding="utf-8")
    out = tmp_path / "out.mp4"
    apply_trim(video, TrimWindow(2.0, 9.0), out, tool=StubMediaTool())
    clip = json.loads(out.read_text())
    assert clip["duration_s"] == pytest.approx(7.0, abs=0.1)


def test_apply_trim_unreadable_file(tmp_path):
    with pytest.raises(DecoderFailure):
        apply_trim(
            tmp_path / "missing.mp4", TrimWindow(0, 1), tmp_path / "o.mp4", tool=StubMediaTool()
        )


@pytest.mark.skipif(not ffmpeg_available(), reason="ffmpeg not installed")
def test_apply_trim_ffmpeg_real(tmp_path):
    video = tmp_path / "src.mp4"
    subprocess.run(
        ["ffmpeg", "-y", "-hide_banner", "-loglevel", "error", "-f", "lavfi",
         "-i", "testsrc=duration=12:size=128x96:rate=10", str(video)],
        check=True,
    )
    tool = FfmpegTool()
    out = tmp_path / "out.mp4"
    apply_trim(video, TrimWindow(2.0, 9.0), out, tool=tool)
    assert tool.probe_duration(out) == pytest.approx(7.0, abs=0.1)
    assert tool.probe_duration(video) == pytest.approx(12.0, abs=0.1)
