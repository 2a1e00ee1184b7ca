"""Headless command-line driver: ingest, run, export, annotlette, serve, filters."""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .config import ServiceConfig
from .engine import Engine, load_plugin_catalog, register_builtins
from .errors import SessionlensError
from .report import annotlette_svg, export_tabular
from .storage import ProjectStore

KIND_BY_SUFFIX = {".wav": "audio-wav", ".srt": "transcript", ".vtt": "transcript",
                  ".jsonl": "transcript"}


def build_engine(data_dir: Path, workers: int = 2) -> tuple[ProjectStore, Engine]:
    store = ProjectStore(data_dir)
    engine = Engine(store, workers=workers)
    register_builtins(engine)
    load_plugin_catalog(engine, data_dir / "plugins")
    return store, engine


def _ensure_project(store: ProjectStore, project_id: str) -> None:
    try:
        store.get_project(project_id)
    except SessionlensError:
        store.create_project(name=project_id, project_id=project_id)


def _parse_params(pairs: tuple[str, ...], seed: int | None) -> dict:
    out: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.BadParameter(f"expected key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    if seed is not None:
        out["seed"] = seed
    return out


@click.group()
@click.option("--data-dir", envvar="SESSIONLENS_DATA_DIR", default="data",
              type=click.Path(path_type=Path), help="Root data directory.")
@click.pass_context
def main(ctx: click.Context, data_dir: Path) -> None:
    """Behavioral feature streams from session recordings."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir


@main.command()
@click.option("--project", required=True, help="Project id (created if missing).")
@click.option("--kind", type=click.Choice(["audio-wav", "frame-sequence", "transcript"]),
              default=None, help="Recording kind; inferred from the source when omitted.")
@click.argument("sources", nargs=-1, required=True,
                type=click.Path(exists=True, path_type=Path))
@click.pass_context
def ingest(ctx: click.Context, project: str, kind: str | None,
           sources: tuple[Path, ...]) -> None:
    """Register one or more recordings under a project."""
    store = ProjectStore(ctx.obj["data_dir"])
    _ensure_project(store, project)
    for source in sources:
        source_kind = kind or _infer_kind(source)
        try:
            rec = store.add_recording(project, source, source_kind)
        except SessionlensError as exc:
            click.echo(f"error: {source}: {exc}", err=True)
            sys.exit(1)
        click.echo(f"ingested {rec.id} kind={rec.kind} duration_ms={rec.duration_ms}")


def _infer_kind(source: Path) -> str:
    if source.is_dir():
        return "frame-sequence"
    try:
        return KIND_BY_SUFFIX[source.suffix.lower()]
    except KeyError:
        raise click.BadParameter(
            f"cannot infer kind for {source}; pass --kind") from None


@main.command()
@click.option("--project", required=True)
@click.option("--filters", "filter_csv", required=True,
              help="Comma-separated filter ids.")
@click.option("--params", "param_pairs", multiple=True,
              help="key=value merged into every scheduled filter's params.")
@click.option("--seed", type=int, default=None, help="Seed for seeded filters.")
@click.option("--recording", "recording_id", default=None,
              help="Limit to one recording id.")
@click.option("--workers", type=int, default=2)
@click.pass_context
def run(ctx: click.Context, project: str, filter_csv: str,
        param_pairs: tuple[str, ...], seed: int | None,
        recording_id: str | None, workers: int) -> None:
    """Schedule filters and block until every job finishes."""
    store, engine = build_engine(ctx.obj["data_dir"], workers=workers)
    overrides = _parse_params(param_pairs, seed)
    filter_ids = [f.strip() for f in filter_csv.split(",") if f.strip()]
    try:
        if recording_id:
            jobs = engine.schedule(project, recording_id, filter_ids, overrides)
        else:
            jobs = engine.schedule_all(project, filter_ids, overrides)
    except SessionlensError as exc:
        click.echo(f"error: {exc}", err=True)
        engine.shutdown()
        sys.exit(2)

    last: dict[str, str] = {}
    try:
        while True:
            pending = False
            for job in jobs:
                line = f"{job.job_id} {job.filter_id} {job.state} {job.progress:.0%}"
                if last.get(job.job_id) != line:
                    click.echo(line)
                    last[job.job_id] = line
                if job.state not in ("done", "failed", "cached"):
                    pending = True
            if not pending:
                break
            time.sleep(0.1)
    finally:
        engine.shutdown()

    failed = [j for j in jobs if j.state == "failed"]
    for job in failed:
        click.echo(f"failed: {job.filter_id} on {job.recording_id or '(none)'}: "
                   f"{job.error}", err=True)
    click.echo(f"{len(jobs)} job(s): "
               f"{sum(j.state == 'done' for j in jobs)} done, "
               f"{sum(j.state == 'cached' for j in jobs)} cached, "
               f"{len(failed)} failed")
    sys.exit(1 if failed else 0)


@main.command()
@click.option("--project", required=True)
@click.option("--what", type=click.Choice(["streams", "annotations", "transcript"]),
              default="streams")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="jsonl")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Output file (stdout when omitted).")
@click.pass_context
def export(ctx: click.Context, project: str, what: str, fmt: str,
           out_path: Path | None) -> None:
    """Write project contents as CSV or JSONL."""
    store = ProjectStore(ctx.obj["data_dir"])
    try:
        doc = export_tabular(store, project, what, fmt)
    except SessionlensError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if out_path:
        out_path.write_text(doc, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(doc, nl=False)


@main.command()
@click.option("--project", required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.argument("annotation_id")
@click.pass_context
def annotlette(ctx: click.Context, project: str, out_path: Path | None,
               annotation_id: str) -> None:
    """Render one annotation as a standalone SVG."""
    store = ProjectStore(ctx.obj["data_dir"])
    try:
        svg = annotlette_svg(store, project, annotation_id)
    except SessionlensError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if out_path:
        out_path.write_text(svg, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(svg)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8765)
@click.option("--workers", type=int, default=2)
@click.option("--static-dir", type=click.Path(path_type=Path), default=None,
              help="Directory of built UI assets to serve at /ui.")
@click.pass_context
def serve(ctx: click.Context, host: str, port: int, workers: int,
          static_dir: Path | None) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .server import create_app

    config = ServiceConfig(data_dir=ctx.obj["data_dir"], host=host, port=port,
                           workers=workers, static_dir=static_dir)
    uvicorn.run(create_app(config), host=host, port=port, log_level="info")


@main.command()
@click.pass_context
def filters(ctx: click.Context) -> None:
    """List the filter catalog (builtins plus configured plugins)."""
    _store, engine = build_engine(ctx.obj["data_dir"])
    try:
        for d in engine.catalog():
            kinds = ",".join(d.input_kinds)
            click.echo(f"{d.filter_id}\t{d.model_id}/{d.model_version}\t"
                       f"[{kinds}]\t{d.display_name}")
    finally:
        engine.shutdown()


if __name__ == "__main__":
    main()
