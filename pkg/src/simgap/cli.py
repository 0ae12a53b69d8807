"""Command-line entry point: thin wrappers over the library modules.

Every subcommand parses arguments, calls into the core package, and
serializes the result; no computation lives here.  Data goes to stdout
(or ``--out``), diagnostics to stderr.  Exit codes: 0 success, 2 for
anything wrong with the inputs (unknown flags, malformed files, domain
validation), 1 for runtime failures.
"""

from __future__ import annotations

import csv as csv_mod
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import click
import numpy as np

from . import bench, mof
from .errors import SimgapError
from .miner import (
    MinerConfig,
    mine_blind_pairs,
    rank_pairs,
    read_pairs,
    to_records,
    write_pairs,
)
from .store import ingest as ingest_store
from .store import normalize, read_embeddings, write_embeddings

logger = logging.getLogger("simgap")

FORMATS = ("json", "csv", "text")


@dataclass
class Settings:
    threads: int = 1
    seed: int = 0
    fmt: str = "json"


def _emit_rows(rows: Sequence[dict[str, Any]], fmt: str, out) -> None:
    """Serialize a list of flat records in the requested format."""
    if fmt == "json":
        out.write(json.dumps(list(rows), indent=2) + "\n")
    elif fmt == "csv":
        if rows:
            writer = csv_mod.DictWriter(out, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    else:
        for row in rows:
            out.write("  ".join(f"{k}={v}" for k, v in row.items()) + "\n")


def _emit_doc(doc: dict[str, Any], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        writer = csv_mod.writer(out)
        writer.writerow(["key", "value"])
        for k, v in doc.items():
            writer.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
    else:
        for k, v in doc.items():
            out.write(f"{k}: {v}\n")


def _open_out(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


@click.group()
@click.option("--threads", default=1, show_default=True, help="Worker threads for scans.")
@click.option("--seed", default=0, show_default=True, help="RNG seed for demo data.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(FORMATS),
    default="json",
    show_default=True,
    help="Serialization for data printed to stdout.",
)
@click.option("--verbose", is_flag=True, help="Log progress to stderr.")
@click.pass_context
def cli(ctx: click.Context, threads: int, seed: int, fmt: str, verbose: bool) -> None:
    """Mine, curate, and score pairs that two embedding spaces disagree on."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = Settings(threads=threads, seed=seed, fmt=fmt)


@cli.command()
@click.option("--embeddings", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def ingest(settings: Settings, embeddings: str, manifest: str) -> None:
    """Validate an embedding file against its manifest and summarize."""
    store = ingest_store(embeddings, manifest)
    _emit_doc(
        {
            "n": store.matrix.n,
            "d": store.matrix.d,
            "images": len(store.manifest),
            "normalized": store.matrix.normalized,
        },
        settings.fmt,
        sys.stdout,
    )


@cli.command("normalize")
@click.argument("src", type=click.Path(exists=True, dir_okay=False))
@click.argument("dest", type=click.Path(dir_okay=False))
def normalize_cmd(src: str, dest: str) -> None:
    """Rewrite an embedding file with unit-norm rows."""
    matrix = normalize(read_embeddings(src))
    write_embeddings(matrix, dest)
    click.echo(f"normalized {matrix.n} rows -> {dest}", err=True)


@cli.command()
@click.option("--space-a", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--space-b", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tau-high", default=0.95, show_default=True)
@click.option("--tau-low", default=0.6, show_default=True)
@click.option("--tile", default=1024, show_default=True)
@click.option("--max-pairs", default=None, type=int)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.pass_obj
def mine(
    settings: Settings,
    space_a: str,
    space_b: str,
    manifest: str,
    tau_high: float,
    tau_low: float,
    tile: int,
    max_pairs: int | None,
    out: str | None,
) -> None:
    """Scan two embedding spaces and write blind pairs as JSON lines.

    Inputs are normalized before comparison; thresholds are strict on
    both sides.  Output is identical for every --threads value.
    """
    store_a = ingest_store(space_a, manifest)
    store_b = ingest_store(space_b, manifest)
    a = normalize(store_a.matrix)
    b = normalize(store_b.matrix)
    cfg = MinerConfig(tau_high=tau_high, tau_low=tau_low, tile=tile, max_pairs=max_pairs)
    pairs = mine_blind_pairs(a, b, cfg, threads=settings.threads)
    records = to_records(pairs, store_a.manifest)
    dest = _open_out(out)
    try:
        write_pairs(records, dest)
    finally:
        if dest is not sys.stdout:
            dest.close()
    click.echo(f"mined {len(records)} pairs from n={a.n}", err=True)


@cli.command()
@click.option("--pairs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def rank(pairs: str, out: str | None) -> None:
    """Reorder a pairs file by gap, largest first."""
    records = read_pairs(pairs)
    ranked = rank_pairs(records)  # ties fall back to (i, j)
    dest = _open_out(out)
    try:
        write_pairs(ranked, dest)
    finally:
        if dest is not sys.stdout:
            dest.close()


@cli.group()
def score() -> None:
    """Score model outputs against a benchmark."""


@score.command("mmvp")
@click.option("--benchmark", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--responses", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.pass_obj
def score_mmvp_cmd(
    settings: Settings, benchmark: str, responses: str, out: str | None
) -> None:
    """Paired accuracy: a pair scores only when both answers are right."""
    pairs = bench.load_benchmark(benchmark)
    resp = bench.load_responses(responses)
    report = bench.score_mmvp(pairs, resp)
    dest = _open_out(out)
    try:
        if settings.fmt == "csv":
            dest.write(bench.emit_csv([report]))
        elif settings.fmt == "text":
            avg = "n/a" if report.mmvp_average is None else f"{report.mmvp_average:.1f}"
            dest.write(
                f"{report.model_id}: {report.pairs_correct}/{report.pairs_total} pairs "
                f"({report.overall_pair_accuracy:.1f}%), pattern average {avg}\n"
            )
        else:
            dest.write(bench.dumps_report(report))
    finally:
        if dest is not sys.stdout:
            dest.close()


@score.command("vlm")
@click.option("--sims", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--benchmark", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model-id", default="model", show_default=True)
@click.option(
    "--direction",
    type=click.Choice([bench.TEXT_TO_IMAGE, bench.IMAGE_TO_TEXT]),
    default=bench.TEXT_TO_IMAGE,
    show_default=True,
)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.pass_obj
def score_vlm_cmd(
    settings: Settings,
    sims: str,
    benchmark: str,
    model_id: str,
    direction: str,
    out: str | None,
) -> None:
    """Two-way retrieval accuracy per pattern from a sims file."""
    grids = bench.load_vlm_sims(sims)
    pairs = bench.load_benchmark(benchmark)
    pattern_of = {p.pair_id: p.patterns[0] for p in pairs}
    results = {g.pair_id: bench.score_vlm_pair(g, direction=direction) for g in grids}
    report = bench.aggregate_vlm(results, pattern_of, model_id=model_id)
    dest = _open_out(out)
    try:
        if settings.fmt == "csv":
            dest.write(bench.emit_csv([report]))
        elif settings.fmt == "text":
            dest.write(f"{report.model_id}: pattern average {report.average:.1f}\n")
        else:
            doc = {
                "model_id": report.model_id,
                "per_pattern": {
                    p: {
                        "pairs_total": s.pairs_total,
                        "pairs_correct": s.pairs_correct,
                        "accuracy": s.accuracy,
                    }
                    for p, s in report.per_pattern.items()
                },
                "average": report.average,
            }
            dest.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    finally:
        if dest is not sys.stdout:
            dest.close()


def _read_values(path: str) -> list[float]:
    """Floats from a file: one per line, or the last CSV field per row.

    A first line whose last field does not parse as a number is treated
    as a header and skipped.
    """
    values: list[float] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        field = line.split(",")[-1].strip()
        try:
            values.append(float(field))
        except ValueError:
            if lineno == 0:
                continue
            raise SimgapError(f"{path}:{lineno + 1}: {field!r} is not a number")
    return values


@cli.command()
@click.option("--x", "x_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--y", "y_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def correlate(settings: Settings, x_path: str, y_path: str) -> None:
    """Pearson correlation between two value files."""
    r = bench.pearson(_read_values(x_path), _read_values(y_path))
    if settings.fmt == "text":
        click.echo(f"r={r:.6f}")
    elif settings.fmt == "csv":
        click.echo(f"r\n{r!r}")
    else:
        click.echo(json.dumps({"r": r}))


@cli.group()
def ablate() -> None:
    """Presentation ablations over a benchmark file."""


@ablate.command("swap")
@click.option("--benchmark", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def ablate_swap(benchmark: str, out: str | None) -> None:
    """Reverse the option order of every question, remapping the key."""
    pairs = [bench.swap_options(p) for p in bench.load_benchmark(benchmark)]
    dest = _open_out(out)
    try:
        dest.write(bench.dumps_benchmark(pairs))
    finally:
        if dest is not sys.stdout:
            dest.close()


@ablate.command("renotate")
@click.option("--benchmark", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--scheme",
    type=click.Choice([bench.NOTATION_LETTERS, bench.NOTATION_NUMBERS]),
    required=True,
)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def ablate_renotate(benchmark: str, scheme: str, out: str | None) -> None:
    """Switch option labels between letters and numbers."""
    pairs = [bench.renotate(p, scheme) for p in bench.load_benchmark(benchmark)]
    dest = _open_out(out)
    try:
        dest.write(bench.dumps_benchmark(pairs))
    finally:
        if dest is not sys.stdout:
            dest.close()


@cli.group("mof")
def mof_group() -> None:
    """Feature-mixing demos and token arithmetic."""


@mof_group.command("mix")
@click.option("--tokens", default=256, show_default=True, help="Tokens per grid.")
@click.option("--dim", default=64, show_default=True, help="Token dimension.")
@click.pass_obj
def mof_mix(settings: Settings, tokens: int, dim: int) -> None:
    """Sweep the additive mixing ratio grid over seeded random grids."""
    side = int(np.sqrt(tokens))
    if side * side != tokens:
        raise SimgapError(f"--tokens {tokens} is not a square grid")
    rng = np.random.default_rng(settings.seed)
    clip_grid = mof.FeatureGrid(
        tokens=rng.standard_normal((tokens, dim)).astype(np.float32),
        grid_h=side,
        grid_w=side,
        source=mof.SOURCE_CLIP,
    )
    ssl_grid = mof.FeatureGrid(
        tokens=rng.standard_normal((tokens, dim)).astype(np.float32),
        grid_h=side,
        grid_w=side,
        source=mof.SOURCE_SSL,
    )
    rows = []
    for ratio in mof.RATIO_GRID:
        mixed = mof.additive_mof(clip_grid, ssl_grid, ratio)
        rows.append(
            {
                "ssl_ratio": ratio,
                "source": mixed.source,
                "tokens": mixed.n,
                "dim": mixed.d,
                "frobenius_norm": repr(float(np.linalg.norm(mixed.tokens))),
            }
        )
    _emit_rows(rows, settings.fmt, sys.stdout)


@mof_group.command("interleave")
@click.pass_obj
def mof_interleave(settings: Settings) -> None:
    """Token counts before and after interleaving, common resolutions."""
    rows = []
    for image_edge, patch_edge in ((224, 14), (336, 14)):
        per_grid = mof.token_count(image_edge, patch_edge)
        rows.append(
            {
                "image_edge": image_edge,
                "patch_edge": patch_edge,
                "per_grid": per_grid,
                "interleaved": 2 * per_grid,
            }
        )
    _emit_rows(rows, settings.fmt, sys.stdout)


@mof_group.command("tokens")
@click.option("--image-edge", required=True, type=int)
@click.option("--patch-edge", required=True, type=int)
@click.pass_obj
def mof_tokens(settings: Settings, image_edge: int, patch_edge: int) -> None:
    """Patch-token count for one resolution, and doubled when interleaved."""
    per_grid = mof.token_count(image_edge, patch_edge)
    _emit_doc(
        {
            "image_edge": image_edge,
            "patch_edge": patch_edge,
            "per_grid": per_grid,
            "interleaved": 2 * per_grid,
        },
        settings.fmt,
        sys.stdout,
    )


@cli.command()
@click.option("--pairs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus-root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--log", "log_path", required=True, type=click.Path(dir_okay=False))
@click.option("--bind", default="127.0.0.1:8000", show_default=True)
@click.option("--thumb-cache", default=None, type=click.Path(file_okay=False))
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False))
def serve(
    pairs: str,
    manifest: str,
    corpus_root: str,
    log_path: str,
    bind: str,
    thumb_cache: str | None,
    ui_dir: str | None,
) -> None:
    """Run the curation service (loopback by default)."""
    import uvicorn

    from .service import create_app

    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise SimgapError(f"--bind must look like HOST:PORT, got {bind!r}")
    app = create_app(
        pairs=pairs,
        manifest=manifest,
        corpus_root=corpus_root,
        log=log_path,
        thumb_cache=thumb_cache,
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(130)
    except SimgapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc!r}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
