"""Command-line entry point: pipeline runs, per-stage commands, validation,
indexing, serving, and searching.

Exit codes: 0 success, 1 partial failure (some ads failed), 2 usage/config
errors.  Logs go to stderr; data output (json or table) goes to stdout.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import click

from . import orchestrator, search as search_mod, server, validator
from .config import GlobalConfig, load_config, make_backends, make_run_config
from .jsonio import dumps_stable, write_json
from .orchestrator import ConfigError, CorruptCheckpoint
from .records import STAGES, Manifest, ManifestError, corpus_stats, parse_manifest
from .validator import AnalysisRow

logger = logging.getLogger("spotforge")

STAGE_ALIASES = {"frames": "keyframes"}


def _fail(message: str, code: int = 2) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _render_table(rows: Sequence[dict]) -> str:
    if not rows:
        return "(empty)"
    columns = list(rows[0].keys())
    widths = {c: max(len(str(c)), *(len(str(r.get(c, ""))) for r in rows)) for c in columns}
    header = "  ".join(str(c).ljust(widths[c]) for c in columns)
    sep = "  ".join("-" * widths[c] for c in columns)
    body = [
        "  ".join(str(r.get(c, "")).ljust(widths[c]) for c in columns) for r in rows
    ]
    return "\n".join([header, sep, *body])


def _emit(data, fmt: str) -> None:
    """Data goes to stdout: json verbatim, tables for humans."""
    if fmt == "json":
        click.echo(dumps_stable(data), nl=False)
        return
    if isinstance(data, dict):
        rows = [{"field": k, "value": v} for k, v in data.items()]
        click.echo(_render_table(rows))
    elif isinstance(data, list):
        click.echo(_render_table(data))
    else:
        click.echo(str(data))


def output_options(fn):
    fn = click.option(
        "--format", "fmt", type=click.Choice(["json", "table"]), default="table",
        help="Output format on stdout.",
    )(fn)
    fn = click.option(
        "--dry-run", is_flag=True, help="Print planned actions and touch nothing."
    )(fn)
    return fn


@click.group()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="Path to spotforge.toml (default: ./spotforge.toml if present).")
@click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug.")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], verbose: int) -> None:
    level = logging.WARNING - min(verbose, 2) * 10
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = {"config_path": config_path}


def _load_global_config(ctx: click.Context) -> GlobalConfig:
    try:
        return load_config(ctx.obj.get("config_path"))
    except (ConfigError, OSError) as exc:
        _fail(str(exc))


def _load_manifest(path: Path) -> Manifest:
    try:
        return parse_manifest(path)
    except (ManifestError, OSError) as exc:
        _fail(str(exc))


def _parse_stages(raw: str) -> list[str]:
    if raw == "all":
        return list(STAGES)
    stages = []
    for name in raw.split(","):
        name = name.strip()
        stage = STAGE_ALIASES.get(name, name)
        if stage not in STAGES:
            _fail(f"unknown stage {name!r}; choose from {', '.join(STAGES)} or 'all'")
        stages.append(stage)
    return stages


def _run_pipeline(
    ctx: click.Context,
    manifest_path: Path,
    stages: list[str],
    workers: Optional[int],
    checkpoint: Optional[Path],
    resume_flag: bool,
    outputs: Optional[Path],
    dry_run: bool,
    fmt: str,
) -> None:
    cfg = _load_global_config(ctx)
    manifest = _load_manifest(manifest_path)
    outputs_root = outputs if outputs is not None else cfg.outputs

    if dry_run:
        plan = [
            {"ad_id": rec.id, "stages": ",".join(stages), "outputs": str(outputs_root)}
            for rec in manifest.records
        ]
        _emit(plan, fmt)
        return

    try:
        backends = make_backends(cfg)
        run_config = make_run_config(cfg, workers=workers, checkpoint=checkpoint)
        entry = orchestrator.resume if resume_flag else orchestrator.run
        report = entry(manifest, stages, run_config, backends, outputs_root)
    except ConfigError as exc:
        _fail(str(exc))
    except CorruptCheckpoint as exc:
        _fail(f"{exc} (use a fresh run without --resume to restart)")
    except FileNotFoundError as exc:
        _fail(str(exc))

    outputs_root.mkdir(parents=True, exist_ok=True)
    write_json(outputs_root / "run_report.json", report.to_json())
    _emit(report.to_json(), fmt)
    sys.exit(0 if report.failed == 0 else 1)


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(path_type=Path))
@click.option("--stages", default="all", help="all or comma-separated stage names.")
@click.option("--workers", type=int, default=None)
@click.option("--checkpoint", type=click.Path(path_type=Path), default=None)
@click.option("--resume", "resume_flag", is_flag=True, help="Skip checkpointed stages.")
@click.option("--outputs", type=click.Path(path_type=Path), default=None)
@output_options
@click.pass_context
def run(ctx, manifest_path, stages, workers, checkpoint, resume_flag, outputs, dry_run, fmt):
    """Run the pipeline across a manifest."""
    _run_pipeline(ctx, manifest_path, _parse_stages(stages), workers, checkpoint,
                  resume_flag, outputs, dry_run, fmt)


def _stage_command(command_name: str, stage: str, help_text: str):
    @cli.command(name=command_name, help=help_text)
    @click.option("--manifest", "manifest_path", required=True, type=click.Path(path_type=Path))
    @click.option("--workers", type=int, default=None)
    @click.option("--checkpoint", type=click.Path(path_type=Path), default=None)
    @click.option("--resume", "resume_flag", is_flag=True)
    @click.option("--outputs", type=click.Path(path_type=Path), default=None)
    @output_options
    @click.pass_context
    def command(ctx, manifest_path, workers, checkpoint, resume_flag, outputs, dry_run, fmt):
        _run_pipeline(ctx, manifest_path, [stage], workers, checkpoint,
                      resume_flag, outputs, dry_run, fmt)

    return command


_stage_command("trim", "trim", "Compute and apply trim windows.")
_stage_command("transcribe", "transcribe", "Transcribe trimmed clips.")
_stage_command("frames", "keyframes", "Extract storyboard keyframes.")
_stage_command("describe", "describe", "Caption storyboard frames.")
_stage_command("summarize", "summarize", "Generate 50-word summaries.")


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(path_type=Path))
@output_options
@click.pass_context
def stats(ctx, manifest_path, dry_run, fmt):
    """Corpus statistics from a manifest."""
    if dry_run:
        _emit({"action": "stats", "manifest": str(manifest_path)}, fmt)
        return
    manifest = _load_manifest(manifest_path)
    report = corpus_stats(manifest)
    year_range = (
        f"{report.year_range[0]}-{report.year_range[1]}" if report.year_range else ""
    )
    _emit(
        {
            "n_ads": report.n_ads,
            "n_by_party": report.n_by_party,
            "total_hours": round(report.total_hours, 4),
            "year_range": year_range,
        },
        fmt,
    )


# ----- validation suite ------------------------------------------------------


@cli.group()
def validate():
    """Technical-validation metrics."""


def _read_text_pairs(refs_dir: Path, hyps_dir: Path) -> list[tuple[str, str, str]]:
    pairs = []
    for ref_path in sorted(Path(refs_dir).glob("*.txt")):
        hyp_path = Path(hyps_dir) / ref_path.name
        hyp = hyp_path.read_text(encoding="utf-8") if hyp_path.exists() else ""
        if not hyp_path.exists():
            logger.warning("no hypothesis for %s; scoring against empty text", ref_path.name)
        pairs.append((ref_path.stem, ref_path.read_text(encoding="utf-8"), hyp))
    return pairs


@validate.command("wer")
@click.option("--refs", "refs_dir", required=True, type=click.Path(path_type=Path))
@click.option("--hyps", "hyps_dir", required=True, type=click.Path(path_type=Path))
@click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), default=None)
@click.option("--emit-tables", "tables_dir", type=click.Path(path_type=Path), default=None,
              help="Write the regression-ready recovered-fraction table here.")
@output_options
@click.pass_context
def validate_wer(ctx, refs_dir, hyps_dir, manifest_path, tables_dir, dry_run, fmt):
    """WER of hypothesis transcripts against references (matched by filename)."""
    if dry_run:
        _emit({"action": "validate wer", "refs": str(refs_dir), "hyps": str(hyps_dir)}, fmt)
        return
    named_pairs = _read_text_pairs(refs_dir, hyps_dir)
    if not named_pairs:
        _fail(f"no .txt references found in {refs_dir}")
    try:
        aggregate = validator.mean_and_pooled_wer([(r, h) for _, r, h in named_pairs])
    except validator.NoValidPairs as exc:
        _fail(str(exc))
    per_file = []
    fractions: dict[str, float] = {}
    for stem, ref, hyp in named_pairs:
        counts = validator.align_words(ref, hyp)
        if counts.n == 0:
            per_file.append({"file": stem, "wer": "", "note": "empty reference"})
            continue
        fractions[stem] = validator.recovered_fraction(counts)
        per_file.append({"file": stem, "wer": round(validator.wer(counts), 6), "note": ""})

    if tables_dir is not None:
        if manifest_path is None:
            _fail("--emit-tables requires --manifest for party/year columns")
        manifest = _load_manifest(manifest_path)
        by_stem = {rec.stem: rec for rec in manifest.records}
        rows = []
        n_sample = len(fractions)
        for stem, fraction in fractions.items():
            rec = by_stem.get(stem)
            if rec is None:
                logger.warning("no manifest record for %s; excluded from table", stem)
                continue
            rows.append(
                AnalysisRow(rec.id, rec.party.value, rec.election_year,
                            validator.squeeze(fraction, n_sample))
            )
        out = Path(tables_dir) / "transcription_recovered.csv"
        validator.write_analysis_table(out, rows)
        logger.info("wrote %s", out)

    _emit({"per_file": per_file, **{k: round(v, 6) if isinstance(v, float) else v
                                    for k, v in aggregate.items()}}, fmt)


def _read_windows_csv(path: Path) -> dict[str, "validator.TrimWindow"]:
    from .trimmer import TrimWindow

    windows = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            windows[row["ad_id"]] = TrimWindow(
                s=float(row["s"]), s_prime=float(row["s_prime"])
            )
    return windows


@validate.command("trim")
@click.option("--human", "human_csv", required=True, type=click.Path(path_type=Path),
              help="CSV with columns ad_id,s,s_prime.")
@click.option("--auto", "auto_csv", required=True, type=click.Path(path_type=Path))
@click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), default=None)
@click.option("--emit-tables", "tables_dir", type=click.Path(path_type=Path), default=None)
@output_options
@click.pass_context
def validate_trim(ctx, human_csv, auto_csv, manifest_path, tables_dir, dry_run, fmt):
    """Classify automated trim windows against human references."""
    if dry_run:
        _emit({"action": "validate trim", "human": str(human_csv), "auto": str(auto_csv)}, fmt)
        return
    human = _read_windows_csv(human_csv)
    auto = _read_windows_csv(auto_csv)
    shared = sorted(set(human) & set(auto))
    if not shared:
        _fail("no shared ad_id between the two files")
    rows = []
    flags = {"overtrim_start": 0, "undertrim_start": 0, "overtrim_end": 0, "undertrim_end": 0}
    errors = {}
    for ad_id in shared:
        err = validator.trim_errors(human[ad_id], auto[ad_id])
        errors[ad_id] = err
        for name in flags:
            flags[name] += int(getattr(err, name))
        rows.append(
            {
                "ad_id": ad_id,
                "start_err_s": round(err.start_err_s, 3),
                "end_err_s": round(err.end_err_s, 3),
                "abs_error_sum_s": round(err.abs_error_sum_s, 3),
                "flags": ",".join(n for n in flags if getattr(err, n)) or "-",
            }
        )
    n = len(shared)
    summary = {f"{name}_pct": round(100.0 * count / n, 2) for name, count in flags.items()}

    if tables_dir is not None:
        if manifest_path is None:
            _fail("--emit-tables requires --manifest for party/year columns")
        manifest = _load_manifest(manifest_path)
        for column, getter in (
            ("trim_start_err", lambda e: e.start_err_s),
            ("trim_end_err", lambda e: e.end_err_s),
            ("trim_abs_err", lambda e: e.abs_error_sum_s),
        ):
            table_rows = []
            for ad_id in shared:
                rec = manifest.get(ad_id)
                if rec is None:
                    logger.warning("no manifest record for %s; excluded from table", ad_id)
                    continue
                table_rows.append(
                    AnalysisRow(ad_id, rec.party.value, rec.election_year, getter(errors[ad_id]))
                )
            out = Path(tables_dir) / f"{column}.csv"
            validator.write_analysis_table(out, table_rows)
            logger.info("wrote %s", out)

    _emit({"n": n, **summary, "rows": rows} if fmt == "json" else rows, fmt)
    if fmt == "table":
        _emit({"n": n, **summary}, fmt)


def _read_matrix_csv(path: Path) -> list[list[float]]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for raw in csv.reader(fh):
            if not raw:
                continue
            cells = raw[1:] if raw and not _is_number(raw[0]) else raw
            if not cells or not all(_is_number(c) for c in cells):
                continue  # header or label-only line
            rows.append([float(c) for c in cells])
    return rows


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


@validate.command("icc")
@click.option("--matrix", "matrix_csv", required=True, type=click.Path(path_type=Path),
              help="CSV of ratings, one row per subject, one column per rater.")
@output_options
@click.pass_context
def validate_icc(ctx, matrix_csv, dry_run, fmt):
    """ICC(2,1): two-way random effects, absolute agreement, single rater."""
    if dry_run:
        _emit({"action": "validate icc", "matrix": str(matrix_csv)}, fmt)
        return
    matrix = _read_matrix_csv(matrix_csv)
    try:
        value = validator.icc_2_1(matrix)
    except (validator.DegenerateVariance, ValueError) as exc:
        _fail(str(exc))
    _emit({"icc_2_1": round(value, 6), "n_subjects": len(matrix),
           "k_raters": len(matrix[0]) if matrix else 0}, fmt)


def _read_column_csv(path: Path) -> list[float]:
    values = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for raw in csv.reader(fh):
            if raw and _is_number(raw[0]):
                values.append(float(raw[0]))
    return values


@validate.command("paired")
@click.option("--x", "x_csv", required=True, type=click.Path(path_type=Path))
@click.option("--y", "y_csv", required=True, type=click.Path(path_type=Path))
@click.option("--wilcoxon", "with_wilcoxon", is_flag=True,
              help="Also run the paired Wilcoxon signed-rank test.")
@output_options
@click.pass_context
def validate_paired(ctx, x_csv, y_csv, with_wilcoxon, dry_run, fmt):
    """Paired t-test (and optional Wilcoxon) between two single-column CSVs."""
    if dry_run:
        _emit({"action": "validate paired", "x": str(x_csv), "y": str(y_csv)}, fmt)
        return
    x = _read_column_csv(x_csv)
    y = _read_column_csv(y_csv)
    out = {}
    try:
        t_result = validator.paired_t(x, y)
        out["t"] = round(t_result.t, 6)
        out["df"] = t_result.df
        out["p_two_sided"] = round(t_result.p_two_sided, 6)
        out["ci95_low"] = round(t_result.ci95_of_diff[0], 6)
        out["ci95_high"] = round(t_result.ci95_of_diff[1], 6)
    except (validator.ZeroVariance, ValueError) as exc:
        _fail(str(exc))
    if with_wilcoxon:
        try:
            w = validator.wilcoxon_signed_rank(x, y)
            out["V"] = w.v
            out["wilcoxon_p_two_sided"] = round(w.p_two_sided, 6)
            out["wilcoxon_method"] = w.method
        except validator.AllZeroDifferences as exc:
            _fail(str(exc))
    _emit(out, fmt)


# ----- search service ----------------------------------------------------------


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(path_type=Path))
@click.option("--transcripts", "transcripts_dir", type=click.Path(path_type=Path),
              default=None, help="Outputs tree holding <stem>.transcript.json (default: configured outputs).")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@output_options
@click.pass_context
def index(ctx, manifest_path, transcripts_dir, out_path, dry_run, fmt):
    """Build the transcript search index."""
    cfg = _load_global_config(ctx)
    roots = transcripts_dir if transcripts_dir is not None else cfg.outputs
    if dry_run:
        _emit({"action": "index", "manifest": str(manifest_path),
               "transcripts": str(roots), "out": str(out_path)}, fmt)
        return
    manifest = _load_manifest(manifest_path)
    built, warnings = search_mod.build_index(manifest, roots)
    built.save(out_path)
    _emit({"indexed": len(built.ads), "skipped": len(warnings), "out": str(out_path)}, fmt)


def _load_index(path: Path) -> search_mod.SearchIndex:
    try:
        return search_mod.SearchIndex.load(path)
    except (search_mod.IndexSchemaMismatch, OSError, ValueError) as exc:
        _fail(str(exc))


@cli.command()
@click.option("--index", "index_path", required=True, type=click.Path(path_type=Path))
@click.option("--bind", default="127.0.0.1:8080", help="HOST:PORT to listen on.")
@click.option("--ui", "ui_dir", type=click.Path(path_type=Path), default=None,
              help="Built web UI to serve at /.")
@click.option("--media", "media_dir", type=click.Path(path_type=Path), default=None,
              help="Outputs tree to serve at /media (storyboard stills).")
@output_options
@click.pass_context
def serve(ctx, index_path, bind, ui_dir, media_dir, dry_run, fmt):
    """Serve the search API (and optionally the browser UI)."""
    if dry_run:
        _emit({"action": "serve", "index": str(index_path), "bind": bind,
               "ui": str(ui_dir) if ui_dir else "", "media": str(media_dir) if media_dir else ""}, fmt)
        return
    idx = _load_index(index_path)
    try:
        server.serve(idx, bind, media_root=media_dir, ui_dir=ui_dir)
    except ValueError as exc:
        _fail(str(exc))
    except OSError as exc:
        _fail(f"cannot bind {bind}: {exc}", code=1)


@cli.command()
@click.option("--index", "index_path", required=True, type=click.Path(path_type=Path))
@click.option("-q", "--query", "query_text", required=True)
@click.option("--year", type=int, default=None)
@click.option("--candidate", default=None, help="Candidate last name filter.")
@click.option("--limit", type=int, default=10)
@output_options
@click.pass_context
def search(ctx, index_path, query_text, year, candidate, limit, dry_run, fmt):
    """Query the transcript index from the command line."""
    if dry_run:
        _emit({"action": "search", "index": str(index_path), "q": query_text}, fmt)
        return
    idx = _load_index(index_path)
    try:
        hits = search_mod.query(idx, query_text, year=year, candidate_last=candidate, limit=limit)
    except search_mod.EmptyQuery as exc:
        _fail(str(exc))
    _emit([h.to_json() for h in hits], fmt)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=True)
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
