"""Blind-pair mining: near-duplicates in space A that space B separates.

A pair (i, j), i < j, is *blind* when the two embeddings are nearly
identical in space A (cosine strictly above ``tau_high``) yet clearly
distinct in space B (cosine strictly below ``tau_low``).  Equality at
either boundary excludes the pair; the thresholds mean "exceeds" and
"less than", not "at least" / "at most".

Membership is always decided by the canonical scalar similarity
(:func:`simgap.store.cosine`, a float64 dot over the float32 rows).  The
tiled scan uses float32 GEMM only to prefilter candidates, with a safety
margin wider than the worst-case accumulation error, then re-verifies
every candidate canonically.  Two consequences fall out of this design:

* the tiled miner and :func:`brute_force_mine` return identical sets,
  not merely sets that agree within tolerance, and
* output is byte-identical for any ``threads`` value, because tiling is
  fixed by config (never by worker count) and GEMM rounding can only
  move candidates inside the margin, never change the verified set.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ConsistencyError, FormatError, ValidationError
from .store import CorpusManifest, EmbeddingMatrix, cosine

logger = logging.getLogger(__name__)

# Prefilter slack below tau_high.  A float32 GEMM over d <= 4096 terms of
# unit vectors errs by well under 1e-4, so no pair whose canonical
# similarity clears tau_high can fall below tau_high - GEMM_MARGIN.
GEMM_MARGIN = 2e-4

# Matrices up to this many elements are cast to float64 once for the
# verify pass; above it, rows are cast per candidate to bound memory.
_PRECAST_LIMIT = 20_000_000


@dataclass
class MinerConfig:
    """Scan parameters.

    Attributes:
        tau_high: space-A similarity must strictly exceed this.
        tau_low: space-B similarity must be strictly below this.
        tile: edge length of the square scan tiles.
        max_pairs: keep only the globally largest-gap pairs when set.
        dedup: drop exact (i, j) repeats after the scan.
    """

    tau_high: float = 0.95
    tau_low: float = 0.6
    tile: int = 1024
    max_pairs: int | None = None
    dedup: bool = True

    def __post_init__(self) -> None:
        if not -1.0 <= self.tau_high <= 1.0:
            raise ValidationError(f"tau_high {self.tau_high} outside [-1, 1]")
        if not -1.0 <= self.tau_low <= 1.0:
            raise ValidationError(f"tau_low {self.tau_low} outside [-1, 1]")
        if self.tile <= 0:
            raise ValidationError(f"tile must be positive, got {self.tile}")
        if self.max_pairs is not None and self.max_pairs <= 0:
            raise ValidationError(f"max_pairs must be positive, got {self.max_pairs}")


@dataclass(frozen=True)
class BlindPair:
    """One mined pair; gap is sim_a - sim_b, the ranking key."""

    i: int
    j: int
    sim_a: float
    sim_b: float
    gap: float


def _check_inputs(a: EmbeddingMatrix, b: EmbeddingMatrix, threads: int) -> None:
    if not a.normalized or not b.normalized:
        raise ValidationError("mining requires normalized matrices in both spaces")
    if a.n != b.n:
        raise ConsistencyError(f"space A has {a.n} rows but space B has {b.n}")
    if threads < 1:
        raise ValidationError(f"threads must be >= 1, got {threads}")


def _candidate_tiles(n: int, tile: int) -> list[tuple[int, int]]:
    blocks = range(0, n, tile)
    return [(bi, bj) for bi in blocks for bj in blocks if bj >= bi]


def _scan_tile(
    data: np.ndarray, bi: int, bj: int, tile: int, cutoff: float
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate (i, j) indices in one tile pair, row-major local order."""
    rows = data[bi : bi + tile]
    cols = data[bj : bj + tile]
    block = rows @ cols.T
    mask = block > cutoff
    if bi == bj:
        mask[np.tril_indices(rows.shape[0])] = False
    ii, jj = np.nonzero(mask)
    return ii + bi, jj + bj


def mine_blind_pairs(
    a: EmbeddingMatrix,
    b: EmbeddingMatrix,
    cfg: MinerConfig,
    threads: int = 1,
) -> list[BlindPair]:
    """Scan all i < j and return blind pairs sorted by (i, j) ascending.

    Args:
        a: normalized matrix for the conflating space.
        b: normalized matrix for the separating space, same row count.
        cfg: thresholds and scan shape.
        threads: worker threads over tile pairs; the result is identical
            for every value.

    Returns:
        Pairs with ``sim_a > cfg.tau_high`` and ``sim_b < cfg.tau_low``
        (strict), capped to ``cfg.max_pairs`` largest gaps when set,
        sorted by (i, j).
    """
    _check_inputs(a, b, threads)
    cutoff = cfg.tau_high - GEMM_MARGIN
    tasks = _candidate_tiles(a.n, cfg.tile)
    logger.debug("scanning %d tile pairs with %d threads", len(tasks), threads)

    if threads == 1 or len(tasks) <= 1:
        parts = [_scan_tile(a.data, bi, bj, cfg.tile, cutoff) for bi, bj in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    lambda t: _scan_tile(a.data, t[0], t[1], cfg.tile, cutoff), tasks
                )
            )

    if parts:
        cand_i = np.concatenate([p[0] for p in parts])
        cand_j = np.concatenate([p[1] for p in parts])
    else:
        cand_i = cand_j = np.empty(0, dtype=np.int64)
    order = np.lexsort((cand_j, cand_i))
    cand_i, cand_j = cand_i[order], cand_j[order]
    logger.debug("prefilter kept %d candidates", cand_i.size)

    pairs = _verify_candidates(a, b, cand_i, cand_j, cfg)
    return _cap_to_max_pairs(pairs, cfg.max_pairs)


def _verify_candidates(
    a: EmbeddingMatrix,
    b: EmbeddingMatrix,
    cand_i: np.ndarray,
    cand_j: np.ndarray,
    cfg: MinerConfig,
) -> list[BlindPair]:
    """Re-check candidates with the canonical similarity, in (i, j) order."""
    precast = a.n * a.d <= _PRECAST_LIMIT
    a64 = a.data.astype(np.float64) if precast else None
    b64 = b.data.astype(np.float64) if precast else None
    pairs: list[BlindPair] = []
    prev: tuple[int, int] | None = None
    for i, j in zip(cand_i.tolist(), cand_j.tolist()):
        if cfg.dedup and (i, j) == prev:
            continue
        prev = (i, j)
        if precast:
            sim_a = float(np.dot(a64[i], a64[j]))
        else:
            sim_a = cosine(a, i, j)
        if not sim_a > cfg.tau_high:
            continue
        if precast:
            sim_b = float(np.dot(b64[i], b64[j]))
        else:
            sim_b = cosine(b, i, j)
        if not sim_b < cfg.tau_low:
            continue
        pairs.append(BlindPair(i=i, j=j, sim_a=sim_a, sim_b=sim_b, gap=sim_a - sim_b))
    return pairs


def _cap_to_max_pairs(pairs: list[BlindPair], max_pairs: int | None) -> list[BlindPair]:
    if max_pairs is not None and len(pairs) > max_pairs:
        by_gap = sorted(pairs, key=lambda p: (-p.gap, p.i, p.j))
        pairs = sorted(by_gap[:max_pairs], key=lambda p: (p.i, p.j))
    return pairs


def brute_force_mine(
    a: EmbeddingMatrix,
    b: EmbeddingMatrix,
    cfg: MinerConfig,
) -> list[BlindPair]:
    """Reference miner: the naive double loop over every i < j.

    Computes the same canonical float64 similarity as the tiled scan for
    every single pair, with no prefilter, no tiling, and no threading.
    Intended for tests and small corpora; quadratic in n.
    """
    _check_inputs(a, b, threads=1)
    a64 = a.data.astype(np.float64)
    b64 = b.data.astype(np.float64)
    pairs: list[BlindPair] = []
    for i in range(a.n):
        for j in range(i + 1, a.n):
            sim_a = float(np.dot(a64[i], a64[j]))
            if not sim_a > cfg.tau_high:
                continue
            sim_b = float(np.dot(b64[i], b64[j]))
            if not sim_b < cfg.tau_low:
                continue
            pairs.append(
                BlindPair(i=i, j=j, sim_a=sim_a, sim_b=sim_b, gap=sim_a - sim_b)
            )
    if cfg.max_pairs is not None and len(pairs) > cfg.max_pairs:
        keep = sorted(pairs, key=lambda p: (-p.gap, p.i, p.j))[: cfg.max_pairs]
        pairs = sorted(keep, key=lambda p: (p.i, p.j))
    return pairs


def rank_pairs(pairs: Sequence[BlindPair]) -> list[BlindPair]:
    """Order by gap descending; ties fall back to (i, j) ascending."""
    return sorted(pairs, key=lambda p: (-p.gap, p.i, p.j))


@dataclass(frozen=True)
class PairRecord:
    """A mined pair as written to disk, with manifest ids resolved."""

    i: int
    j: int
    image_id_i: str
    image_id_j: str
    sim_a: float
    sim_b: float
    gap: float

    @property
    def pair_id(self) -> str:
        return f"{self.i}-{self.j}"


def to_records(
    pairs: Iterable[BlindPair], manifest: CorpusManifest
) -> list[PairRecord]:
    """Attach image ids from the manifest to mined pairs."""
    records = []
    for p in pairs:
        if not (0 <= p.i < len(manifest) and 0 <= p.j < len(manifest)):
            raise ConsistencyError(
                f"pair ({p.i}, {p.j}) indexes outside the {len(manifest)}-entry manifest"
            )
        records.append(
            PairRecord(
                i=p.i,
                j=p.j,
                image_id_i=manifest.image_id(p.i),
                image_id_j=manifest.image_id(p.j),
                sim_a=p.sim_a,
                sim_b=p.sim_b,
                gap=p.gap,
            )
        )
    return records


def write_pairs(records: Iterable[PairRecord], dest: str | Path | TextIO) -> None:
    """Write pair records as line-delimited JSON with a fixed key order."""
    lines = []
    for r in records:
        lines.append(
            json.dumps(
                {
                    "i": r.i,
                    "j": r.j,
                    "image_id_i": r.image_id_i,
                    "image_id_j": r.image_id_j,
                    "sim_a": r.sim_a,
                    "sim_b": r.sim_b,
                    "gap": r.gap,
                }
            )
        )
    text = "\n".join(lines) + ("\n" if lines else "")
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


def read_pairs(src: str | Path | TextIO) -> list[PairRecord]:
    """Parse a pairs file written by :func:`write_pairs`."""
    if isinstance(src, (str, Path)):
        lines = Path(src).read_text(encoding="utf-8").splitlines()
    else:
        lines = src.read().splitlines()
    records: list[PairRecord] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            records.append(
                PairRecord(
                    i=int(raw["i"]),
                    j=int(raw["j"]),
                    image_id_i=str(raw["image_id_i"]),
                    image_id_j=str(raw["image_id_j"]),
                    sim_a=float(raw["sim_a"]),
                    sim_b=float(raw["sim_b"]),
                    gap=float(raw["gap"]),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"pairs line {lineno}: {exc}") from exc
    return records
