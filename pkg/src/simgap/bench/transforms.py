"""Presentation ablations: option order and option label notation.

Both transforms are pure and invertible.  Swapping reverses the two
options of every question and remaps the answer key with it, so any
correctly remapped response set scores identically.  Renotating only
switches how option labels render ("(a) Closed" vs "(1) Closed"); the
option texts and the answer key never move.
"""

from __future__ import annotations

import string

from ..errors import ValidationError
from .model import NOTATION_LETTERS, NOTATION_NUMBERS, NOTATIONS, BenchmarkPair, Question


def swap_options(pair: BenchmarkPair) -> BenchmarkPair:
    """Reverse the option order of both questions, remapping the key.

    Requires exactly two options per question; applying the transform
    twice returns the original pair.
    """
    swapped = []
    for q in pair.questions:
        if len(q.options) != 2:
            raise ValidationError(
                f"question {q.question_id}: swap needs exactly 2 options, "
                f"got {len(q.options)}"
            )
        swapped.append(
            Question(
                question_id=q.question_id,
                text=q.text,
                options=(q.options[1], q.options[0]),
                correct_index=1 - q.correct_index,
            )
        )
    return BenchmarkPair(
        pair_id=pair.pair_id,
        images=pair.images,
        questions=(swapped[0], swapped[1]),
        patterns=pair.patterns,
        notation=pair.notation,
    )


def renotate(pair: BenchmarkPair, scheme: str) -> BenchmarkPair:
    """Switch the option label scheme; contents and key are untouched."""
    if scheme not in NOTATIONS:
        raise ValidationError(f"unknown notation scheme {scheme!r}")
    return BenchmarkPair(
        pair_id=pair.pair_id,
        images=pair.images,
        questions=pair.questions,
        patterns=pair.patterns,
        notation=scheme,
    )


def render_options(question: Question, notation: str) -> list[str]:
    """Render options with their labels, e.g. "(a) Closed" or "(1) Closed"."""
    if notation == NOTATION_LETTERS:
        if len(question.options) > len(string.ascii_lowercase):
            raise ValidationError(
                f"question {question.question_id}: letter labels support at most "
                f"{len(string.ascii_lowercase)} options"
            )
        labels = string.ascii_lowercase
        return [f"({labels[k]}) {opt}" for k, opt in enumerate(question.options)]
    if notation == NOTATION_NUMBERS:
        return [f"({k + 1}) {opt}" for k, opt in enumerate(question.options)]
    raise ValidationError(f"unknown notation scheme {notation!r}")
