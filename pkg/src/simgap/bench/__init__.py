"""Paired-image benchmark: types, scoring rules, ablations, file formats."""

from .model import (
    NOTATION_LETTERS,
    NOTATION_NUMBERS,
    PATTERN_TITLES,
    PATTERNS,
    BenchmarkPair,
    PatternScore,
    Question,
    ResponseSet,
    ScoreReport,
    VlmPairSims,
    VlmReport,
)
from .scoring import (
    IMAGE_TO_TEXT,
    TEXT_TO_IMAGE,
    aggregate_vlm,
    pearson,
    score_mmvp,
    score_vlm_pair,
)
from .transforms import render_options, renotate, swap_options
from .io import (
    benchmark_to_doc,
    doc_to_benchmark,
    dumps_benchmark,
    dumps_report,
    emit_csv,
    load_benchmark,
    load_responses,
    load_vlm_sims,
    report_to_doc,
    save_benchmark,
)

__all__ = [
    "PATTERNS",
    "PATTERN_TITLES",
    "TEXT_TO_IMAGE",
    "IMAGE_TO_TEXT",
    "NOTATION_LETTERS",
    "NOTATION_NUMBERS",
    "Question",
    "BenchmarkPair",
    "ResponseSet",
    "VlmPairSims",
    "PatternScore",
    "ScoreReport",
    "VlmReport",
    "score_mmvp",
    "score_vlm_pair",
    "aggregate_vlm",
    "pearson",
    "swap_options",
    "renotate",
    "render_options",
    "benchmark_to_doc",
    "doc_to_benchmark",
    "dumps_benchmark",
    "load_benchmark",
    "save_benchmark",
    "load_responses",
    "load_vlm_sims",
    "report_to_doc",
    "dumps_report",
    "emit_csv",
]
