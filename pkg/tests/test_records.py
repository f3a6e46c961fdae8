"""Manifest parsing, corpus stats, and artifact layout."""

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spotforge.records import (
    AdRecord,
    DuplicateId,
    MalformedRow,
    Manifest,
    MissingColumn,
    Party,
    PipelineOutputs,
    corpus_stats,
    output_paths,
    parse_manifest,
    write_manifest,
)

HEADER = "id,candidate,party,election_year,title,source_format,duration_s,attack_ad,video_path"


def write_csv(tmp_path: Path, body: str) -> Path:
    path = tmp_path / "manifest.csv"
    path.write_text(HEADER + "\n" + body, encoding="utf-8")
    return path


def test_empty_manifest(tmp_path):
    manifest = parse_manifest(write_csv(tmp_path, ""))
    assert len(manifest) == 0


def test_hope_row_with_quoted_comma(tmp_path):
    row = 'P-1291-61062,Clinton,Democratic,1992,"Hope, Arkansas",16mm film,58.16,false,1992/P-1291-61062.mp4\n'
    manifest = parse_manifest(write_csv(tmp_path, row))
    assert len(manifest) == 1
    rec = manifest.records[0]
    assert rec.id == "P-1291-61062"
    assert rec.election_year == 1992
    assert rec.title == "Hope, Arkansas"
    assert rec.party is Party.DEMOCRATIC
    assert rec.duration_s == 58.16
    assert rec.attack_ad is False
    assert rec.video_path == Path("1992/P-1291-61062.mp4")


def test_duplicate_id_rejected(tmp_path):
    body = (
        "A-1,X,Democratic,1992,,,10,false,1992/a.mp4\n"
        "A-1,Y,Republican,1996,,,20,false,1996/b.mp4\n"
    )
    with pytest.raises(DuplicateId) as excinfo:
        parse_manifest(write_csv(tmp_path, body))
    assert excinfo.value.line == 3


def test_missing_column(tmp_path):
    path = tmp_path / "manifest.csv"
    path.write_text("id,candidate,party\nA-1,X,Democratic\n", encoding="utf-8")
    with pytest.raises(MissingColumn):
        parse_manifest(path)


@pytest.mark.parametrize(
    "row",
    [
        "A-1,X,Democratic,not_a_year,,,10,false,1992/a.mp4",
        "A-1,X,Democratic,1992,,,ten,false,1992/a.mp4",
        "A-1,X,Democratic,1992,,,10,maybe,1992/a.mp4",
        "A-1,X,Democratic,1992,,,10,false,",
        ",X,Democratic,1992,,,10,false,1992/a.mp4",
        "A-1,X,Democratic,1992,,,10,false,../../etc/passwd",
        "A-1,X,Democratic,-4,,,10,false,1992/a.mp4",
    ],
)
def test_malformed_rows_report_line(tmp_path, row):
    with pytest.raises(MalformedRow) as excinfo:
        parse_manifest(write_csv(tmp_path, row + "\n"))
    assert excinfo.value.line == 2


def test_unknown_party_maps_to_other(tmp_path):
    manifest = parse_manifest(
        write_csv(tmp_path, "A-1,Perot,Independent,1992,,,10,false,1992/a.mp4\n")
    )
    assert manifest.records[0].party is Party.OTHER


ids = st.integers(1, 5000).map(lambda n: f"P-{n}-{n * 7}")
candidates = st.text(
    st.characters(whitelist_categories=("Lu", "Ll"), max_codepoint=0x2FF), min_size=1, max_size=20
)
titles = st.one_of(st.none(), st.text(min_size=1, max_size=30).filter(lambda t: t.strip()))


@st.composite
def ad_records(draw):
    year = draw(st.integers(1952, 2032))
    n = draw(st.integers(0, 10**6))
    return AdRecord(
        id=draw(ids),
        candidate=draw(candidates),
        party=draw(st.sampled_from(list(Party))),
        election_year=year,
        title=draw(titles),
        source_format=draw(st.one_of(st.none(), st.just("16mm film"), st.just("videotape"))),
        duration_s=draw(st.floats(0, 7200, allow_nan=False, allow_infinity=False)),
        attack_ad=draw(st.booleans()),
        video_path=Path(str(year)) / f"vid-{n}.mp4",
    )


@settings(max_examples=50, deadline=None)
@given(st.lists(ad_records(), max_size=12, unique_by=lambda r: r.id))
def test_manifest_round_trip(tmp_path_factory, records):
    tmp = tmp_path_factory.mktemp("roundtrip")
    manifest = Manifest(records=tuple(records), root=tmp)
    path = tmp / "m.csv"
    write_manifest(manifest, path)
    parsed = parse_manifest(path, root=tmp)
    assert parsed.records == manifest.records


def test_stats_hand_sum():
    recs = (
        AdRecord("A-1", "X", Party.DEMOCRATIC, 1992, duration_s=30, video_path=Path("1992/a.mp4")),
        AdRecord("A-2", "Y", Party.DEMOCRATIC, 1996, duration_s=60, video_path=Path("1996/b.mp4")),
        AdRecord("A-3", "Z", Party.REPUBLICAN, 2000, duration_s=30, video_path=Path("2000/c.mp4")),
    )
    report = corpus_stats(Manifest(records=recs, root=Path(".")))
    assert report.n_ads == 3
    assert report.n_by_party == {"Democratic": 2, "Republican": 1}
    assert report.total_hours == pytest.approx(120 / 3600)
    assert report.year_range == (1992, 2000)


def test_stats_empty():
    report = corpus_stats(Manifest(records=(), root=Path(".")))
    assert report.n_ads == 0
    assert report.n_by_party == {}
    assert report.total_hours == 0.0
    assert report.year_range is None


@settings(max_examples=50, deadline=None)
@given(st.lists(ad_records(), max_size=10, unique_by=lambda r: r.id), st.randoms())
def test_stats_invariants_under_reorder(records, rng):
    manifest = Manifest(records=tuple(records), root=Path("."))
    report = corpus_stats(manifest)
    assert sum(report.n_by_party.values()) == report.n_ads
    shuffled = list(records)
    rng.shuffle(shuffled)
    report2 = corpus_stats(Manifest(records=tuple(shuffled), root=Path(".")))
    assert report2.total_hours == pytest.approx(report.total_hours)
    assert report2.n_by_party == report.n_by_party


def test_output_paths_template(hope_record):
    paths = output_paths(hope_record, Path("/out"))
    assert paths.transcript_json == Path("/out/1992/P-1291-61062.transcript.json")
    assert paths.trim_json == Path("/out/1992/P-1291-61062.trim.json")
    assert paths.frames_dir == Path("/out/1992/P-1291-61062.frames")
    assert paths.frames_index == Path("/out/1992/P-1291-61062.frames.json")
    assert paths.framedesc_json == Path("/out/1992/P-1291-61062.framedesc.json")
    assert paths.summary_txt == Path("/out/1992/P-1291-61062.summary.txt")
    assert paths.state_json == Path("/out/1992/P-1291-61062.state.json")


def test_output_paths_year_directory():
    rec = AdRecord("B-1", "X", Party.REPUBLICAN, 2012, video_path=Path("2012/spot.mp4"))
    paths = output_paths(rec, Path("/out"))
    assert paths.summary_txt.parent == Path("/out/2012")


def test_output_paths_preserves_spaces():
    rec = AdRecord("C-1", "X", Party.OTHER, 1960, video_path=Path("1960/my spot 1.mp4"))
    paths = output_paths(rec, Path("/out"))
    assert paths.trim_json.name == "my spot 1.trim.json"


@settings(max_examples=50, deadline=None)
@given(st.lists(ad_records(), max_size=10, unique_by=lambda r: (r.id, r.video_path)))
def test_output_paths_injective_for_unique_stems(records):
    stems = {(r.election_year, r.stem) for r in records}
    paths = {output_paths(r, Path("/out")).state_json for r in records}
    assert len(paths) == len(stems)


def test_pipeline_outputs_stage_keys():
    state = PipelineOutputs()
    assert set(state.stage_status) == {"trim", "transcribe", "keyframes", "describe", "summarize"}
    with pytest.raises(ValueError):
        PipelineOutputs(stage_status={"trim": None})
