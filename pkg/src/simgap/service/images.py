"""Image lookup and on-disk thumbnail cache for the curation UI."""

from __future__ import annotations

import mimetypes
import re
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image

from ..errors import ValidationError

THUMB_EDGE = 256

_SAFE = re.compile(r"[^A-Za-z0-9._-]")


def _cache_name(image_id: str) -> str:
    return _SAFE.sub("_", image_id) + ".png"


@dataclass
class ImageStore:
    """Resolves manifest ids to files under one corpus root.

    Paths from the manifest are joined to ``corpus_root`` and must stay
    inside it; anything escaping the root is rejected at lookup time.
    Thumbnails are built lazily with a longest-edge cap of
    ``THUMB_EDGE`` pixels and cached as PNG files in ``cache_dir``.
    """

    corpus_root: Path
    cache_dir: Path
    paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.corpus_root = Path(self.corpus_root).resolve()
        self.cache_dir = Path(self.cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def resolve(self, image_id: str) -> Path:
        rel = self.paths.get(image_id)
        if rel is None:
            raise KeyError(image_id)
        candidate = (self.corpus_root / rel).resolve()
        if not candidate.is_relative_to(self.corpus_root):
            raise ValidationError(f"image path escapes corpus root: {rel!r}")
        return candidate

    def media_type(self, image_id: str) -> str:
        guessed, _ = mimetypes.guess_type(self.resolve(image_id).name)
        return guessed or "application/octet-stream"

    def thumbnail(self, image_id: str) -> Path:
        """Path of the cached thumbnail, building it on first use."""
        source = self.resolve(image_id)
        target = self.cache_dir / _cache_name(image_id)
        if target.exists() and target.stat().st_mtime >= source.stat().st_mtime:
            return target
        with Image.open(source) as img:
            small = img.convert("RGB")
            small.thumbnail((THUMB_EDGE, THUMB_EDGE))
            tmp = target.with_suffix(".tmp")
            small.save(tmp, format="PNG")
        tmp.replace(target)
        return target
