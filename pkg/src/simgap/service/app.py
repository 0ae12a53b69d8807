"""HTTP facade over mined pairs, annotations, and benchmark export.

Endpoints (all reads are safe to hit concurrently; writes serialize on
the annotation log's lock):

* ``GET /api/health`` basic liveness and counts
* ``GET /api/pairs?page=&size=&sort=&status=`` paginated ranked listing
* ``GET /api/pairs/{pair_id}`` one pair with its current annotation
* ``PUT /api/pairs/{pair_id}/annotation`` durably record an annotation
* ``GET /api/export`` accepted annotations as a benchmark document
* ``GET /img/{image_id}?thumb=1`` corpus image or cached thumbnail

When a built UI directory is supplied it is mounted at ``/`` behind the
API routes, so the same process serves both the data and the frontend.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import AsyncIterator, Literal

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from ..bench.io import dumps_benchmark
from ..bench.model import BenchmarkPair, Question
from ..errors import ConsistencyError, SimgapError
from ..miner import PairRecord, read_pairs
from ..store import read_manifest
from .annotations import Annotation, AnnotationLog, AnnotationQuestion
from .images import ImageStore
from .schemas import (
    AnnotationIn,
    AnnotationOut,
    HealthOut,
    PageOut,
    PairDetailOut,
    PairOut,
    QuestionOut,
)

SORTS = ("gap", "index")


def _annotation_out(seq: int, a: Annotation) -> AnnotationOut:
    return AnnotationOut(
        seq=seq,
        pair_id=a.pair_id,
        author=a.author,
        created_at=a.created_at,
        status=a.status,
        patterns=list(a.patterns),
        questions=[
            QuestionOut(
                image_slot=q.image_slot,
                text=q.text,
                options=list(q.options),
                correct_index=q.correct_index,
            )
            for q in sorted(a.questions, key=lambda q: q.image_slot)
        ],
    )


def _pair_out(record: PairRecord, status: str | None) -> PairOut:
    ids = (record.image_id_i, record.image_id_j)
    return PairOut(
        pair_id=record.pair_id,
        i=record.i,
        j=record.j,
        image_id_i=record.image_id_i,
        image_id_j=record.image_id_j,
        sim_a=record.sim_a,
        sim_b=record.sim_b,
        gap=record.gap,
        annotation_status=status,
        image_urls=[f"/img/{i}" for i in ids],
        thumb_urls=[f"/img/{i}?thumb=1" for i in ids],
    )


def export_benchmark(
    records: dict[str, PairRecord], log: AnnotationLog
) -> list[BenchmarkPair]:
    """Accepted annotations as benchmark pairs, ordered by (i, j)."""
    accepted = [
        (records[pair_id], annotation)
        for pair_id, (_seq, annotation) in log.snapshot().items()
        if annotation.status == "accepted" and pair_id in records
    ]
    accepted.sort(key=lambda item: (item[0].i, item[0].j))
    pairs = []
    for record, annotation in accepted:
        by_slot = sorted(annotation.questions, key=lambda q: q.image_slot)
        pairs.append(
            BenchmarkPair(
                pair_id=record.pair_id,
                images=(record.image_id_i, record.image_id_j),
                questions=tuple(
                    Question(
                        question_id=f"{record.pair_id}-q{q.image_slot}",
                        text=q.text,
                        options=q.options,
                        correct_index=q.correct_index,
                    )
                    for q in by_slot
                ),
                patterns=annotation.patterns,
            )
        )
    return pairs


def create_app(
    pairs: str | Path,
    manifest: str | Path,
    corpus_root: str | Path,
    log: str | Path,
    thumb_cache: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Wire a service instance around one mined-pairs file.

    Args:
        pairs: line-delimited mined pairs (miner output).
        manifest: corpus manifest naming every image id and path.
        corpus_root: directory image paths are relative to.
        log: annotation log file; created when missing.
        thumb_cache: thumbnail directory; defaults next to the log.
        ui_dir: optional built frontend to serve at ``/``.
    """
    records_list = read_pairs(pairs)
    records: dict[str, PairRecord] = {}
    for r in records_list:
        if r.pair_id in records:
            raise ConsistencyError(f"duplicate pair {r.pair_id} in pairs file")
        records[r.pair_id] = r
    manifest_entries = read_manifest(manifest)
    paths = {e.image_id: e.path for e in manifest_entries.entries}
    for r in records_list:
        for image_id in (r.image_id_i, r.image_id_j):
            if image_id not in paths:
                raise ConsistencyError(
                    f"pair {r.pair_id} references unknown image {image_id!r}"
                )

    log_path = Path(log)
    cache_dir = Path(thumb_cache) if thumb_cache else log_path.parent / "thumbs"
    store = ImageStore(corpus_root=Path(corpus_root), cache_dir=cache_dir, paths=paths)
    annotation_log = AnnotationLog(log_path)

    by_gap = sorted(records_list, key=lambda r: (-r.gap, r.i, r.j))
    by_index = sorted(records_list, key=lambda r: (r.i, r.j))

    @asynccontextmanager
    async def lifespan(_: FastAPI) -> AsyncIterator[None]:
        yield
        annotation_log.close()

    app = FastAPI(title="simgap curation service", lifespan=lifespan)
    app.state.log = annotation_log

    @app.get("/api/health", response_model=HealthOut)
    def health() -> HealthOut:
        return HealthOut(
            status="ok", pairs=len(records), annotations=annotation_log.count()
        )

    @app.get("/api/pairs", response_model=PageOut)
    def list_pairs(
        page: int = Query(default=1, ge=1),
        size: int = Query(default=50, ge=1, le=500),
        sort: Literal["gap", "index"] = "gap",
        status: Literal["any", "none", "draft", "accepted", "rejected"] = "any",
    ) -> PageOut:
        ordered = by_gap if sort == "gap" else by_index
        state = annotation_log.snapshot()

        def status_of(r: PairRecord) -> str | None:
            entry = state.get(r.pair_id)
            return entry[1].status if entry else None

        if status == "any":
            selected = ordered
        elif status == "none":
            selected = [r for r in ordered if status_of(r) is None]
        else:
            selected = [r for r in ordered if status_of(r) == status]
        start = (page - 1) * size
        window = selected[start : start + size]
        return PageOut(
            items=[_pair_out(r, status_of(r)) for r in window],
            page=page,
            size=size,
            total=len(selected),
        )

    @app.get("/api/pairs/{pair_id}", response_model=PairDetailOut)
    def pair_detail(pair_id: str) -> PairDetailOut:
        record = records.get(pair_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown pair {pair_id!r}")
        entry = annotation_log.latest(pair_id)
        status = entry[1].status if entry else None
        base = _pair_out(record, status)
        return PairDetailOut(
            **base.model_dump(),
            annotation=_annotation_out(*entry) if entry else None,
        )

    @app.put("/api/pairs/{pair_id}/annotation", response_model=AnnotationOut)
    def put_annotation(pair_id: str, body: AnnotationIn) -> AnnotationOut:
        if pair_id not in records:
            raise HTTPException(status_code=404, detail=f"unknown pair {pair_id!r}")
        try:
            annotation = Annotation(
                pair_id=pair_id,
                author=body.author,
                created_at=datetime.now(timezone.utc).isoformat(),
                status=body.status,
                patterns=tuple(body.patterns),
                questions=tuple(  # type: ignore[arg-type]
                    AnnotationQuestion(
                        image_slot=q.image_slot,
                        text=q.text,
                        options=tuple(q.options),
                        correct_index=q.correct_index,
                    )
                    for q in body.questions
                ),
            )
        except SimgapError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        seq = annotation_log.append(annotation)
        return _annotation_out(seq, annotation)

    @app.get("/api/export")
    def export() -> Response:
        pairs_out = export_benchmark(records, annotation_log)
        if not pairs_out:
            raise HTTPException(status_code=400, detail="no accepted annotations")
        return Response(
            content=dumps_benchmark(pairs_out), media_type="application/json"
        )

    @app.get("/img/{image_id}")
    def image(image_id: str, thumb: bool = False) -> FileResponse:
        try:
            if thumb:
                return FileResponse(store.thumbnail(image_id), media_type="image/png")
            return FileResponse(
                store.resolve(image_id), media_type=store.media_type(image_id)
            )
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
        except FileNotFoundError:
            raise HTTPException(status_code=404, detail=f"missing file for {image_id!r}")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
