"""Domain types for the paired-image benchmark.

A benchmark is a list of image pairs.  Each pair carries two questions,
one per image, asking about the visual detail that separates the two;
a model scores the pair only by answering both questions correctly.
Every pair is tagged with at least one of nine fixed visual patterns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConsistencyError, ValidationError

# The nine visual patterns, in canonical report order.
PATTERNS: tuple[str, ...] = (
    "orientation_direction",
    "presence_of_features",
    "state_condition",
    "quantity_count",
    "positional_relational",
    "color_appearance",
    "structural_physical",
    "text",
    "viewpoint_perspective",
)

PATTERN_TITLES: dict[str, str] = {
    "orientation_direction": "Orientation and Direction",
    "presence_of_features": "Presence of Specific Features",
    "state_condition": "State and Condition",
    "quantity_count": "Quantity and Count",
    "positional_relational": "Positional and Relational Context",
    "color_appearance": "Color and Appearance",
    "structural_physical": "Structural and Physical Characteristics",
    "text": "Text",
    "viewpoint_perspective": "Viewpoint and Perspective",
}

NOTATION_LETTERS = "letters"
NOTATION_NUMBERS = "numbers"
NOTATIONS = (NOTATION_LETTERS, NOTATION_NUMBERS)


@dataclass(frozen=True)
class Question:
    """One multiple-choice question about one image of a pair."""

    question_id: str
    text: str
    options: tuple[str, ...]
    correct_index: int

    def __post_init__(self) -> None:
        if not self.question_id:
            raise ValidationError("question_id must be non-empty")
        if len(self.options) < 2:
            raise ValidationError(
                f"question {self.question_id}: needs >= 2 options, got {len(self.options)}"
            )
        if not 0 <= self.correct_index < len(self.options):
            raise ValidationError(
                f"question {self.question_id}: correct_index {self.correct_index} "
                f"out of range for {len(self.options)} options"
            )


@dataclass(frozen=True)
class BenchmarkPair:
    """An image pair, its two questions, and its pattern tags."""

    pair_id: str
    images: tuple[str, str]
    questions: tuple[Question, Question]
    patterns: tuple[str, ...]
    notation: str = NOTATION_LETTERS

    def __post_init__(self) -> None:
        if not self.pair_id:
            raise ValidationError("pair_id must be non-empty")
        if len(self.images) != 2:
            raise ValidationError(f"pair {self.pair_id}: needs exactly 2 images")
        if len(self.questions) != 2:
            raise ValidationError(f"pair {self.pair_id}: needs exactly 2 questions")
        if self.questions[0].question_id == self.questions[1].question_id:
            raise ConsistencyError(
                f"pair {self.pair_id}: both questions share id "
                f"{self.questions[0].question_id!r}"
            )
        if not self.patterns:
            raise ValidationError(f"pair {self.pair_id}: needs >= 1 pattern")
        seen = set()
        for p in self.patterns:
            if p not in PATTERNS:
                raise ValidationError(f"pair {self.pair_id}: unknown pattern {p!r}")
            if p in seen:
                raise ValidationError(f"pair {self.pair_id}: duplicate pattern {p!r}")
            seen.add(p)
        if self.notation not in NOTATIONS:
            raise ValidationError(
                f"pair {self.pair_id}: unknown notation {self.notation!r}"
            )


@dataclass
class ResponseSet:
    """A model's answers: question_id to chosen option index, None = abstain."""

    model_id: str
    answers: dict[str, int | None] = field(default_factory=dict)


@dataclass(frozen=True)
class VlmPairSims:
    """Image–text cosine grid for one pair, indexed sims[image][text]."""

    pair_id: str
    sims: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self) -> None:
        if len(self.sims) != 2 or any(len(row) != 2 for row in self.sims):
            raise ValidationError(f"pair {self.pair_id}: sims must be 2x2")
        for row in self.sims:
            for v in row:
                if v != v or v in (float("inf"), float("-inf")):
                    raise ValidationError(
                        f"pair {self.pair_id}: non-finite similarity {v}"
                    )


@dataclass(frozen=True)
class PatternScore:
    """Per-pattern tally: pairs seen, pairs fully correct, percent."""

    pairs_total: int
    pairs_correct: int
    accuracy: float


@dataclass
class ScoreReport:
    """Result of scoring one model on the benchmark.

    ``per_pattern`` bins a pair under every pattern it carries;
    ``per_pattern_primary`` bins it under its first listed pattern only.
    ``mmvp_average`` is the mean of the nine per-pattern accuracies and is
    None when the benchmark does not cover all nine patterns.
    ``in1k_zeroshot`` is an externally supplied accuracy, never computed here.
    """

    model_id: str
    pairs_total: int
    pairs_correct: int
    overall_pair_accuracy: float
    per_pattern: dict[str, PatternScore]
    per_pattern_primary: dict[str, PatternScore]
    mmvp_average: float | None
    in1k_zeroshot: float | None = None


@dataclass
class VlmReport:
    """Per-pattern outcome of the two-way retrieval rule."""

    model_id: str
    per_pattern: dict[str, PatternScore]
    average: float
