"""Curation service: browse mined pairs, annotate, export a benchmark."""

from .annotations import Annotation, AnnotationLog, AnnotationQuestion
from .app import create_app

__all__ = ["Annotation", "AnnotationQuestion", "AnnotationLog", "create_app"]
