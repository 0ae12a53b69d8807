"""Shared builders for corpora, benchmarks, and service fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from simgap.bench.model import PATTERNS, BenchmarkPair, Question
from simgap.store import CorpusManifest, EmbeddingMatrix, ManifestEntry, normalize


def unit_rows(rng: np.random.Generator, n: int, d: int) -> EmbeddingMatrix:
    """Random unit-norm rows as a normalized matrix."""
    raw = rng.standard_normal((n, d)).astype(np.float32)
    return normalize(EmbeddingMatrix(data=raw))


def planted_corpus(
    rng: np.random.Generator, n: int, d: int, planted: int
) -> tuple[EmbeddingMatrix, EmbeddingMatrix, list[tuple[int, int]]]:
    """Two spaces over one corpus with near-duplicates planted in A only.

    Each planted pair (i, j) gets a[j] almost equal to a[i] while b[j]
    stays in general position, so with default thresholds the pair is
    blind in A but separated in B.  Returns both normalized matrices and
    the planted index pairs.
    """
    a = rng.standard_normal((n, d)).astype(np.float32)
    b = rng.standard_normal((n, d)).astype(np.float32)
    pairs: list[tuple[int, int]] = []
    used: set[int] = set()
    while len(pairs) < planted:
        i, j = rng.integers(0, n, size=2)
        if i == j or i in used or j in used:
            continue
        i, j = int(min(i, j)), int(max(i, j))
        a[j] = a[i] + 0.01 * rng.standard_normal(d).astype(np.float32)
        used.update((i, j))
        pairs.append((i, j))
    return (
        normalize(EmbeddingMatrix(data=a)),
        normalize(EmbeddingMatrix(data=b)),
        sorted(pairs),
    )


def sequential_manifest(n: int) -> CorpusManifest:
    return CorpusManifest(
        entries=[
            ManifestEntry(image_id=f"img{k:05d}", path=f"images/img{k:05d}.png", source="corpus")
            for k in range(n)
        ]
    )


def make_pair(
    pair_id: str,
    patterns: tuple[str, ...] = (PATTERNS[0],),
    correct: tuple[int, int] = (0, 1),
    options: tuple[str, str] = ("Open", "Closed"),
) -> BenchmarkPair:
    return BenchmarkPair(
        pair_id=pair_id,
        images=(f"{pair_id}-left", f"{pair_id}-right"),
        questions=(
            Question(
                question_id=f"{pair_id}-q0",
                text=f"Is the subject of {pair_id} open or closed?",
                options=options,
                correct_index=correct[0],
            ),
            Question(
                question_id=f"{pair_id}-q1",
                text=f"And in the second image of {pair_id}?",
                options=options,
                correct_index=correct[1],
            ),
        ),
        patterns=patterns,
    )


def perfect_answers(pairs: list[BenchmarkPair]) -> dict[str, int]:
    return {q.question_id: q.correct_index for p in pairs for q in p.questions}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
