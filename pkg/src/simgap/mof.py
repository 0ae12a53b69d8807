"""Mixing of visual feature grids from two encoders.

Two pure transforms over per-patch token grids, one vision encoder each:

* additive mixing produces ``(1 - r) * clip + r * ssl`` token by token,
  applied before any downstream projection of the blended grid;
* interleaving stacks the two grids token-alternating (clip first) while
  keeping each source's spatial order, doubling sequence length, and is
  meant for features that were already projected separately.

Both leave their inputs untouched.  Token counts follow the usual square
patching rule: an image of edge E with patch edge P yields (E / P)^2
tokens, so 224/14 gives 256 per grid and 1024 tokens become 512 after a
same-ratio interleave of two such grids, 336/14 gives 576 and 1152.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ValidationError

SOURCE_CLIP = "clip"
SOURCE_SSL = "ssl"
_SOURCES = (SOURCE_CLIP, SOURCE_SSL)

# Mixing-ratio sweep used by the CLI demo and the linearity tests.
RATIO_GRID = (0.0, 0.25, 0.5, 0.625, 0.75, 0.875, 1.0)


@dataclass(frozen=True)
class MixRatio:
    """Share of the ssl grid in an additive mix; 0 is pure clip."""

    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValidationError(f"mix ratio {self.value} outside [0, 1]")


@dataclass
class FeatureGrid:
    """A (grid_h x grid_w) patch grid of d-dimensional tokens.

    Attributes:
        tokens: (n, d) float32 array, row-major over the grid.
        grid_h: grid height in patches.
        grid_w: grid width in patches.
        source: which encoder produced (or dominates) these tokens.
    """

    tokens: np.ndarray
    grid_h: int
    grid_w: int
    source: str

    def __post_init__(self) -> None:
        if self.tokens.ndim != 2:
            raise ValidationError(f"tokens must be 2-D, got {self.tokens.ndim}-D")
        if self.tokens.dtype != np.float32:
            raise ValidationError(f"tokens must be float32, got {self.tokens.dtype}")
        if self.grid_h < 1 or self.grid_w < 1:
            raise ValidationError(
                f"grid dims must be positive, got {self.grid_h}x{self.grid_w}"
            )
        if self.grid_h * self.grid_w != self.tokens.shape[0]:
            raise ValidationError(
                f"grid {self.grid_h}x{self.grid_w} does not cover "
                f"{self.tokens.shape[0]} tokens"
            )
        if self.source not in _SOURCES:
            raise ValidationError(f"unknown source {self.source!r}")
        if not np.isfinite(self.tokens).all():
            raise DataError("non-finite token values")

    @property
    def n(self) -> int:
        return int(self.tokens.shape[0])

    @property
    def d(self) -> int:
        return int(self.tokens.shape[1])


@dataclass
class InterleavedSequence:
    """Token-alternating merge of two grids; provenance tracks origins."""

    tokens: np.ndarray
    provenance: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.tokens.shape[0] != len(self.provenance):
            raise ValidationError(
                f"{self.tokens.shape[0]} tokens but {len(self.provenance)} provenance tags"
            )
        for k, tag in enumerate(self.provenance):
            want = SOURCE_CLIP if k % 2 == 0 else SOURCE_SSL
            if tag != want:
                raise ValidationError(
                    f"provenance must alternate clip/ssl; position {k} is {tag!r}"
                )

    @property
    def n(self) -> int:
        return int(self.tokens.shape[0])


def _check_compatible(clip_grid: FeatureGrid, ssl_grid: FeatureGrid) -> None:
    if clip_grid.source != SOURCE_CLIP:
        raise ValidationError(f"first grid must be source 'clip', got {clip_grid.source!r}")
    if ssl_grid.source != SOURCE_SSL:
        raise ValidationError(f"second grid must be source 'ssl', got {ssl_grid.source!r}")
    if clip_grid.tokens.shape != ssl_grid.tokens.shape:
        raise ValidationError(
            f"token shapes differ: {clip_grid.tokens.shape} vs {ssl_grid.tokens.shape}"
        )
    if (clip_grid.grid_h, clip_grid.grid_w) != (ssl_grid.grid_h, ssl_grid.grid_w):
        raise ValidationError(
            f"grid dims differ: {clip_grid.grid_h}x{clip_grid.grid_w} vs "
            f"{ssl_grid.grid_h}x{ssl_grid.grid_w}"
        )


def additive_mof(
    clip_grid: FeatureGrid,
    ssl_grid: FeatureGrid,
    ssl_ratio: float | MixRatio,
) -> FeatureGrid:
    """Blend two aligned grids: ``(1 - r) * clip + r * ssl``.

    Args:
        clip_grid: tokens from the contrastively trained encoder.
        ssl_grid: tokens from the self-supervised encoder, same shape.
        ssl_ratio: share of the ssl grid, in [0, 1].

    Returns:
        A new grid; ratios 0 and 1 reproduce the respective input tokens
        bit for bit.  The source tag is "clip" below 0.5, "ssl" from 0.5 up.
    """
    r = ssl_ratio.value if isinstance(ssl_ratio, MixRatio) else MixRatio(float(ssl_ratio)).value
    _check_compatible(clip_grid, ssl_grid)
    if r == 0.0:
        mixed = clip_grid.tokens.copy()
    elif r == 1.0:
        mixed = ssl_grid.tokens.copy()
    else:
        mixed = (1.0 - r) * clip_grid.tokens + r * ssl_grid.tokens
    source = SOURCE_CLIP if r < 0.5 else SOURCE_SSL
    return FeatureGrid(
        tokens=mixed.astype(np.float32, copy=False),
        grid_h=clip_grid.grid_h,
        grid_w=clip_grid.grid_w,
        source=source,
    )


def interleave_mof(
    clip_grid: FeatureGrid, ssl_grid: FeatureGrid
) -> InterleavedSequence:
    """Merge two aligned grids into [c0, s0, c1, s1, ...].

    Spatial order within each source is preserved; the result has 2n
    tokens and an alternating provenance starting with "clip".
    """
    _check_compatible(clip_grid, ssl_grid)
    n, d = clip_grid.tokens.shape
    merged = np.empty((2 * n, d), dtype=np.float32)
    merged[0::2] = clip_grid.tokens
    merged[1::2] = ssl_grid.tokens
    provenance = tuple(
        SOURCE_CLIP if k % 2 == 0 else SOURCE_SSL for k in range(2 * n)
    )
    return InterleavedSequence(tokens=merged, provenance=provenance)


def deinterleave(seq: InterleavedSequence) -> tuple[np.ndarray, np.ndarray]:
    """Split an interleaved sequence back into (clip, ssl) token arrays.

    The returned arrays are copies and equal the original grids bit for
    bit; the sequence length must be even.
    """
    if seq.n % 2 != 0:
        raise ValidationError(f"sequence length {seq.n} is not even")
    return seq.tokens[0::2].copy(), seq.tokens[1::2].copy()


def token_count(image_edge: int, patch_edge: int) -> int:
    """Patch tokens for a square image: (image_edge / patch_edge) ** 2.

    Raises:
        ValidationError: nonpositive edges, or patch does not divide image.
    """
    if image_edge <= 0 or patch_edge <= 0:
        raise ValidationError(
            f"edges must be positive, got image={image_edge} patch={patch_edge}"
        )
    if image_edge % patch_edge != 0:
        raise ValidationError(
            f"patch edge {patch_edge} does not divide image edge {image_edge}"
        )
    side = image_edge // patch_edge
    return side * side
