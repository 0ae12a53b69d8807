"""Scoring rules: paired accuracy, two-way retrieval, correlation.

The paired rule is deliberately unforgiving: a pair counts as correct
only when both of its questions are answered correctly, which puts
random guessing on 2-option questions at 25 percent, not 50.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import ConsistencyError, DataError, ValidationError
from .model import (
    PATTERNS,
    BenchmarkPair,
    PatternScore,
    ResponseSet,
    ScoreReport,
    VlmPairSims,
    VlmReport,
)

TEXT_TO_IMAGE = "text_to_image"
IMAGE_TO_TEXT = "image_to_text"


def _validate_benchmark(pairs: Sequence[BenchmarkPair]) -> None:
    if not pairs:
        raise ValidationError("benchmark has no pairs")
    pair_ids: set[str] = set()
    question_ids: set[str] = set()
    for pair in pairs:
        if pair.pair_id in pair_ids:
            raise ConsistencyError(f"duplicate pair_id {pair.pair_id!r}")
        pair_ids.add(pair.pair_id)
        for q in pair.questions:
            if q.question_id in question_ids:
                raise ConsistencyError(f"duplicate question_id {q.question_id!r}")
            question_ids.add(q.question_id)


def _pct(correct: int, total: int) -> float:
    return 100.0 * correct / total


def _bin_scores(tallies: Mapping[str, list[int]]) -> dict[str, PatternScore]:
    return {
        p: PatternScore(
            pairs_total=total, pairs_correct=correct, accuracy=_pct(correct, total)
        )
        for p, (total, correct) in tallies.items()
    }


def score_mmvp(pairs: Sequence[BenchmarkPair], responses: ResponseSet) -> ScoreReport:
    """Score a model's answers under the both-questions-correct rule.

    Args:
        pairs: the benchmark; pair and question ids must be unique.
        responses: chosen option index per question_id.  A missing or
            None answer is an abstention and scores the pair wrong;
            answers for unknown question ids are ignored.

    Returns:
        A report with overall pair accuracy, both pattern binnings, and
        the nine-pattern average when all patterns are covered.

    Raises:
        ValidationError: empty benchmark, or an answer index out of
            range for its question.
        ConsistencyError: duplicate pair or question ids.
    """
    _validate_benchmark(pairs)
    correct_pairs = 0
    multi: dict[str, list[int]] = {}
    primary: dict[str, list[int]] = {}
    for pair in pairs:
        ok = True
        for q in pair.questions:
            answer = responses.answers.get(q.question_id)
            if answer is not None and not 0 <= answer < len(q.options):
                raise ValidationError(
                    f"answer {answer} out of range for question {q.question_id!r} "
                    f"with {len(q.options)} options"
                )
            if answer != q.correct_index:
                ok = False
        correct_pairs += ok
        for p in pair.patterns:
            multi.setdefault(p, [0, 0])
            multi[p][0] += 1
            multi[p][1] += ok
        first = pair.patterns[0]
        primary.setdefault(first, [0, 0])
        primary[first][0] += 1
        primary[first][1] += ok

    per_pattern = _bin_scores(multi)
    average: float | None = None
    if all(p in per_pattern for p in PATTERNS):
        average = sum(per_pattern[p].accuracy for p in PATTERNS) / len(PATTERNS)
    return ScoreReport(
        model_id=responses.model_id,
        pairs_total=len(pairs),
        pairs_correct=correct_pairs,
        overall_pair_accuracy=_pct(correct_pairs, len(pairs)),
        per_pattern=per_pattern,
        per_pattern_primary=_bin_scores(primary),
        mmvp_average=average,
    )


def score_vlm_pair(
    sims: VlmPairSims | Sequence[Sequence[float]],
    direction: str = TEXT_TO_IMAGE,
) -> bool:
    """Two-way retrieval rule for one pair's 2x2 similarity grid.

    ``sims[image][text]`` holds the image-text cosine.  In the default
    text_to_image direction each caption must score its own image higher
    than the other image; image_to_text requires each image to score its
    own caption higher.  Ties fail either way.
    """
    grid = sims.sims if isinstance(sims, VlmPairSims) else sims
    if len(grid) != 2 or any(len(row) != 2 for row in grid):
        raise ValidationError("sims must be a 2x2 grid")
    if direction == TEXT_TO_IMAGE:
        return grid[0][0] > grid[1][0] and grid[1][1] > grid[0][1]
    if direction == IMAGE_TO_TEXT:
        return grid[0][0] > grid[0][1] and grid[1][1] > grid[1][0]
    raise ValidationError(f"unknown direction {direction!r}")


def aggregate_vlm(
    results: Mapping[str, bool],
    pattern_of: Mapping[str, str],
    model_id: str = "model",
) -> VlmReport:
    """Fold per-pair outcomes into per-pattern accuracies and their mean.

    Args:
        results: pair_id to the outcome of :func:`score_vlm_pair`.
        pattern_of: pair_id to its single pattern tag.
        model_id: label carried into the report.

    Raises:
        ValidationError: empty results, a pair without a pattern tag, an
            unknown pattern slug, or a pattern with no pairs at all.
    """
    if not results:
        raise ValidationError("no pair results to aggregate")
    totals: Counter[str] = Counter()
    wins: Counter[str] = Counter()
    for pair_id, outcome in results.items():
        if pair_id not in pattern_of:
            raise ValidationError(f"pair {pair_id!r} has no pattern tag")
        pattern = pattern_of[pair_id]
        if pattern not in PATTERNS:
            raise ValidationError(f"pair {pair_id!r}: unknown pattern {pattern!r}")
        totals[pattern] += 1
        wins[pattern] += bool(outcome)
    missing = [p for p in PATTERNS if totals[p] == 0]
    if missing:
        raise ValidationError(f"patterns with no pairs: {', '.join(missing)}")
    per_pattern = {
        p: PatternScore(
            pairs_total=totals[p], pairs_correct=wins[p], accuracy=_pct(wins[p], totals[p])
        )
        for p in PATTERNS
    }
    average = sum(s.accuracy for s in per_pattern.values()) / len(PATTERNS)
    return VlmReport(model_id=model_id, per_pattern=per_pattern, average=average)


def pearson(x: Iterable[float], y: Iterable[float]) -> float:
    """Sample Pearson correlation of two equal-length sequences.

    Computed two-pass in float64: center both vectors, then
    ``dot(dx, dy) / (sqrt(dot(dx, dx)) * sqrt(dot(dy, dy)))``, clamped to
    [-1, 1] against last-ulp excursions.  The roots are taken separately;
    the product of the two sums can underflow to zero for tiny inputs
    even when neither sum is zero.

    Raises:
        ValidationError: length mismatch or fewer than 2 points.
        DataError: a constant input (correlation undefined), or
            non-finite values.
    """
    xs = np.asarray(list(x), dtype=np.float64)
    ys = np.asarray(list(y), dtype=np.float64)
    if xs.shape != ys.shape:
        raise ValidationError(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size < 2:
        raise ValidationError(f"need >= 2 points, got {xs.size}")
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise DataError("non-finite values in correlation input")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DataError("correlation undefined for a constant input")
    r = float(np.dot(dx, dy)) / (float(np.sqrt(sxx)) * float(np.sqrt(syy)))
    return max(-1.0, min(1.0, r))
