"""File formats for benchmarks, responses, similarity grids, reports.

The benchmark document is a single JSON object ``{"version": 1,
"pairs": [...]}``.  Serialization is canonical (sorted keys, 2-space
indent, trailing newline) so that parse/serialize round trips are byte
stable; the curation service's export endpoint leans on this.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence, TextIO

from ..errors import FormatError
from .model import (
    BenchmarkPair,
    Question,
    ResponseSet,
    ScoreReport,
    VlmPairSims,
    VlmReport,
)

BENCHMARK_VERSION = 1


def benchmark_to_doc(pairs: Sequence[BenchmarkPair]) -> dict[str, Any]:
    return {
        "version": BENCHMARK_VERSION,
        "pairs": [
            {
                "pair_id": p.pair_id,
                "images": list(p.images),
                "notation": p.notation,
                "patterns": list(p.patterns),
                "questions": [
                    {
                        "question_id": q.question_id,
                        "text": q.text,
                        "options": list(q.options),
                        "correct_index": q.correct_index,
                    }
                    for q in p.questions
                ],
            }
            for p in pairs
        ],
    }


def doc_to_benchmark(doc: Any) -> list[BenchmarkPair]:
    """Validate a parsed benchmark document into domain objects."""
    if not isinstance(doc, dict):
        raise FormatError("benchmark document must be a JSON object")
    if doc.get("version") != BENCHMARK_VERSION:
        raise FormatError(f"unsupported benchmark version {doc.get('version')!r}")
    raw_pairs = doc.get("pairs")
    if not isinstance(raw_pairs, list):
        raise FormatError("benchmark document needs a 'pairs' array")
    pairs: list[BenchmarkPair] = []
    for k, raw in enumerate(raw_pairs):
        try:
            questions = tuple(
                Question(
                    question_id=str(q["question_id"]),
                    text=str(q["text"]),
                    options=tuple(str(o) for o in q["options"]),
                    correct_index=int(q["correct_index"]),
                )
                for q in raw["questions"]
            )
            pairs.append(
                BenchmarkPair(
                    pair_id=str(raw["pair_id"]),
                    images=tuple(str(i) for i in raw["images"]),
                    questions=questions,  # type: ignore[arg-type]
                    patterns=tuple(str(p) for p in raw["patterns"]),
                    notation=str(raw.get("notation", "letters")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"benchmark pair #{k}: {exc}") from exc
    return pairs


def dumps_benchmark(pairs: Sequence[BenchmarkPair]) -> str:
    return json.dumps(benchmark_to_doc(pairs), indent=2, sort_keys=True) + "\n"


def save_benchmark(pairs: Sequence[BenchmarkPair], dest: str | Path | TextIO) -> None:
    text = dumps_benchmark(pairs)
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


def load_benchmark(src: str | Path | TextIO) -> list[BenchmarkPair]:
    if isinstance(src, (str, Path)):
        text = Path(src).read_text(encoding="utf-8")
    else:
        text = src.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"benchmark file is not valid JSON: {exc}") from exc
    return doc_to_benchmark(doc)


def load_responses(src: str | Path | TextIO) -> ResponseSet:
    """Parse ``{"model_id": ..., "answers": {question_id: index|null}}``."""
    if isinstance(src, (str, Path)):
        text = Path(src).read_text(encoding="utf-8")
    else:
        text = src.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"responses file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "model_id" not in doc:
        raise FormatError("responses document needs a 'model_id'")
    raw = doc.get("answers")
    if not isinstance(raw, dict):
        raise FormatError("responses document needs an 'answers' object")
    answers: dict[str, int | None] = {}
    for qid, val in raw.items():
        if val is None:
            answers[qid] = None
        elif isinstance(val, int) and not isinstance(val, bool):
            answers[qid] = val
        else:
            raise FormatError(f"answer for {qid!r} must be an integer or null")
    return ResponseSet(model_id=str(doc["model_id"]), answers=answers)


def load_vlm_sims(src: str | Path | TextIO) -> list[VlmPairSims]:
    """Parse line-delimited ``{"pair_id": ..., "sims": [[..],[..]]}``."""
    if isinstance(src, (str, Path)):
        lines = Path(src).read_text(encoding="utf-8").splitlines()
    else:
        lines = src.read().splitlines()
    out: list[VlmPairSims] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            grid = raw["sims"]
            sims = (
                (float(grid[0][0]), float(grid[0][1])),
                (float(grid[1][0]), float(grid[1][1])),
            )
            out.append(VlmPairSims(pair_id=str(raw["pair_id"]), sims=sims))
        except (json.JSONDecodeError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise FormatError(f"sims line {lineno}: {exc}") from exc
    return out


def report_to_doc(report: ScoreReport) -> dict[str, Any]:
    def bins(scores: dict) -> dict[str, Any]:
        return {
            p: {
                "pairs_total": s.pairs_total,
                "pairs_correct": s.pairs_correct,
                "accuracy": s.accuracy,
            }
            for p, s in sorted(scores.items())
        }

    doc: dict[str, Any] = {
        "model_id": report.model_id,
        "pairs_total": report.pairs_total,
        "pairs_correct": report.pairs_correct,
        "overall_pair_accuracy": report.overall_pair_accuracy,
        "per_pattern": bins(report.per_pattern),
        "per_pattern_primary": bins(report.per_pattern_primary),
        "mmvp_average": report.mmvp_average,
    }
    if report.in1k_zeroshot is not None:
        doc["in1k_zeroshot"] = report.in1k_zeroshot
    return doc


def dumps_report(report: ScoreReport) -> str:
    return json.dumps(report_to_doc(report), indent=2, sort_keys=True) + "\n"


def emit_csv(reports: Sequence[ScoreReport | VlmReport]) -> str:
    """Render reports as CSV: one row per pattern, one column per model.

    Accuracies print to one decimal place.  The final ``average`` row is
    the nine-pattern mean (blank when a report lacks it); an
    ``in1k_zeroshot`` row appears only when some report carries one.
    """
    from .model import PATTERNS  # local to avoid a cycle on partial imports

    header = ["pattern"] + [r.model_id for r in reports]
    rows = [",".join(header)]
    for p in PATTERNS:
        cells = [p]
        for r in reports:
            score = r.per_pattern.get(p)
            cells.append(f"{score.accuracy:.1f}" if score is not None else "")
        rows.append(",".join(cells))
    avg_cells = ["average"]
    for r in reports:
        avg = r.average if isinstance(r, VlmReport) else r.mmvp_average
        avg_cells.append(f"{avg:.1f}" if avg is not None else "")
    rows.append(",".join(avg_cells))
    zs = [getattr(r, "in1k_zeroshot", None) for r in reports]
    if any(v is not None for v in zs):
        rows.append(
            ",".join(["in1k_zeroshot"] + [f"{v:.1f}" if v is not None else "" for v in zs])
        )
    return "\n".join(rows) + "\n"
