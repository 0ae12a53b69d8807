"""Pydantic request/response models for the curation API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..bench.model import PATTERNS


class QuestionIn(BaseModel):
    image_slot: int = Field(ge=0, le=1)
    text: str = Field(min_length=1)
    options: list[str] = Field(min_length=2)
    correct_index: int = Field(ge=0)


class AnnotationIn(BaseModel):
    author: str = Field(min_length=1)
    status: Literal["draft", "accepted", "rejected"]
    patterns: list[str] = Field(min_length=1)
    questions: list[QuestionIn] = Field(min_length=2, max_length=2)


class QuestionOut(BaseModel):
    image_slot: int
    text: str
    options: list[str]
    correct_index: int


class AnnotationOut(BaseModel):
    seq: int
    pair_id: str
    author: str
    created_at: str
    status: str
    patterns: list[str]
    questions: list[QuestionOut]


class PairOut(BaseModel):
    pair_id: str
    i: int
    j: int
    image_id_i: str
    image_id_j: str
    sim_a: float
    sim_b: float
    gap: float
    annotation_status: str | None
    image_urls: list[str]
    thumb_urls: list[str]


class PairDetailOut(PairOut):
    annotation: AnnotationOut | None


class PageOut(BaseModel):
    items: list[PairOut]
    page: int
    size: int
    total: int


class HealthOut(BaseModel):
    status: str
    pairs: int
    annotations: int
    patterns: list[str] = list(PATTERNS)
