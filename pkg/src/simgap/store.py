"""Embedding corpus storage: binary matrix file, manifest, normalization.

Binary layout (all integers little-endian)::

    magic    4 bytes   b"EMB1"
    version  u16       1
    dtype    u8        1 = float32 (the only code defined)
    reserved u8        0
    n        u64       row count
    d        u32       embedding dimension
    payload  n*d*4     float32 row-major matrix
    checksum 8 bytes   blake2b(payload, digest_size=8)

The trailing checksum covers the raw payload bytes only, so a header edit
is caught by field validation and a payload flip by the digest.  blake2b
was chosen over an xxhash dependency because it ships in the stdlib and
hashes at C speed; the algorithm is part of the format contract.

The manifest is a line-delimited JSON file, one object per line with keys
``image_id``, ``path``, ``source`` and an optional ``checksum``.  Row i of
the matrix describes the image on manifest line i.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, TextIO

import numpy as np

from .errors import ConsistencyError, DataError, FormatError, ValidationError

MAGIC = b"EMB1"
VERSION = 1
DTYPE_F32 = 1
_HEADER = struct.Struct("<4sHBBQI")

# Row norms below this are considered zero vectors and refuse to normalize.
ZERO_NORM_EPS = 1e-12
# Unit-norm tolerance used when asserting a matrix claims to be normalized.
UNIT_NORM_TOL = 1e-5


def payload_checksum(payload: bytes) -> bytes:
    """8-byte digest of the raw payload bytes (blake2b, digest_size=8)."""
    return hashlib.blake2b(payload, digest_size=8).digest()


@dataclass
class EmbeddingMatrix:
    """A dense float32 embedding matrix plus its normalization state.

    Attributes:
        data: (n, d) float32 array, row-major, one embedding per row.
        normalized: True only after :func:`normalize` has produced this
            matrix; raw ingested matrices start False.
    """

    data: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise ValidationError(
                f"embedding matrix must be 2-D, got {self.data.ndim}-D"
            )
        if self.data.dtype != np.float32:
            raise ValidationError(
                f"embedding matrix must be float32, got {self.data.dtype}"
            )

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @property
    def d(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class ManifestEntry:
    """One corpus image: stable id, path on disk, provenance label."""

    image_id: str
    path: str
    source: str
    checksum: str | None = None


@dataclass
class CorpusManifest:
    """Ordered image records; line i corresponds to matrix row i."""

    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            if entry.image_id in seen:
                raise ConsistencyError(f"duplicate image_id {entry.image_id!r}")
            seen.add(entry.image_id)

    def __len__(self) -> int:
        return len(self.entries)

    def image_id(self, row: int) -> str:
        return self.entries[row].image_id


@dataclass
class EmbeddingStore:
    """A validated matrix/manifest pair for one embedding space."""

    matrix: EmbeddingMatrix
    manifest: CorpusManifest


def _as_binary_reader(src: str | Path | BinaryIO) -> tuple[BinaryIO, bool]:
    if isinstance(src, (str, Path)):
        return open(src, "rb"), True
    return src, False


def write_embeddings(matrix: EmbeddingMatrix, dest: str | Path | BinaryIO) -> None:
    """Serialize a matrix to the binary format described in the module docs.

    Args:
        matrix: embeddings to write; dtype is enforced by the type.
        dest: output path or writable binary stream.
    """
    payload = np.ascontiguousarray(matrix.data, dtype="<f4").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, DTYPE_F32, 0, matrix.n, matrix.d)
    blob = header + payload + payload_checksum(payload)
    if isinstance(dest, (str, Path)):
        with open(dest, "wb") as fh:
            fh.write(blob)
    else:
        dest.write(blob)


def read_embeddings(src: str | Path | BinaryIO) -> EmbeddingMatrix:
    """Parse and validate a binary embedding file.

    Validates magic, version, dtype code, exact payload length, the
    trailing checksum, and finiteness of every row.

    Returns:
        The matrix with ``normalized=False``; callers that need unit rows
        run :func:`normalize` explicitly.

    Raises:
        FormatError: malformed header, truncated payload, bad checksum.
        DataError: NaN or Inf entries (message names the first bad row).
    """
    fh, owned = _as_binary_reader(src)
    try:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError("truncated header")
        magic, version, dtype, _reserved, n, d = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise FormatError(f"unsupported version {version}")
        if dtype != DTYPE_F32:
            raise FormatError(f"unsupported dtype code {dtype}")
        if d == 0:
            raise FormatError("dimension must be positive")
        expected = n * d * 4
        payload = fh.read(expected)
        if len(payload) != expected:
            raise FormatError(
                f"truncated payload: expected {expected} bytes, got {len(payload)}"
            )
        stored = fh.read(8)
        if len(stored) != 8:
            raise FormatError("missing payload checksum")
        if stored != payload_checksum(payload):
            raise FormatError("payload checksum mismatch")
        data = np.frombuffer(payload, dtype="<f4").reshape(n, d).copy()
    finally:
        if owned:
            fh.close()

    bad = ~np.isfinite(data).all(axis=1)
    if bad.any():
        row = int(np.argmax(bad))
        raise DataError(f"non-finite value in row {row}")
    return EmbeddingMatrix(data=data, normalized=False)


def write_manifest(manifest: CorpusManifest, dest: str | Path | TextIO) -> None:
    """Write manifest entries as line-delimited JSON."""
    lines = []
    for entry in manifest.entries:
        record: dict[str, str] = {
            "image_id": entry.image_id,
            "path": entry.path,
            "source": entry.source,
        }
        if entry.checksum is not None:
            record["checksum"] = entry.checksum
        lines.append(json.dumps(record, sort_keys=True))
    text = "\n".join(lines) + ("\n" if lines else "")
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


def read_manifest(src: str | Path | TextIO | Iterable[str]) -> CorpusManifest:
    """Parse a line-delimited JSON manifest.

    Raises:
        FormatError: a line is not a JSON object or misses a required key.
        ConsistencyError: two lines share an image_id.
    """
    if isinstance(src, (str, Path)):
        lines: Iterable[str] = Path(src).read_text(encoding="utf-8").splitlines()
    elif isinstance(src, io.TextIOBase):
        lines = src.read().splitlines()
    else:
        lines = src
    entries: list[ManifestEntry] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"manifest line {lineno}: invalid JSON ({exc})") from exc
        if not isinstance(record, dict):
            raise FormatError(f"manifest line {lineno}: expected an object")
        try:
            entry = ManifestEntry(
                image_id=str(record["image_id"]),
                path=str(record["path"]),
                source=str(record["source"]),
                checksum=record.get("checksum"),
            )
        except KeyError as exc:
            raise FormatError(f"manifest line {lineno}: missing key {exc}") from exc
        entries.append(entry)
    return CorpusManifest(entries=entries)


def ingest(
    embeddings: str | Path | BinaryIO,
    manifest: str | Path | TextIO,
) -> EmbeddingStore:
    """Load one embedding space: binary matrix plus its manifest.

    Args:
        embeddings: binary matrix file (path or stream).
        manifest: line-delimited JSON manifest (path or stream).

    Returns:
        A store whose matrix row i describes manifest entry i.

    Raises:
        ConsistencyError: manifest length differs from the matrix row count.
    """
    matrix = read_embeddings(embeddings)
    records = read_manifest(manifest)
    if len(records) != matrix.n:
        raise ConsistencyError(
            f"manifest has {len(records)} entries but matrix has {matrix.n} rows"
        )
    return EmbeddingStore(matrix=matrix, manifest=records)


def normalize(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Return a unit-row copy of ``matrix``.

    Norms are computed in float64 and the result cast back to float32, so
    re-normalizing an already normalized matrix moves entries by at most a
    couple of ulps.

    Raises:
        DataError: a row norm falls below ``ZERO_NORM_EPS`` (names the row).
    """
    wide = matrix.data.astype(np.float64)
    norms = np.sqrt((wide * wide).sum(axis=1))
    tiny = norms < ZERO_NORM_EPS
    if tiny.any():
        row = int(np.argmax(tiny))
        raise DataError(f"cannot normalize row {row}: norm {norms[row]:.3e} is ~0")
    unit = (wide / norms[:, None]).astype(np.float32)
    return EmbeddingMatrix(data=unit, normalized=True)


def is_unit_normalized(matrix: EmbeddingMatrix, tol: float = UNIT_NORM_TOL) -> bool:
    """True when every row norm is within ``tol`` of 1."""
    if matrix.n == 0:
        return True
    norms = np.linalg.norm(matrix.data.astype(np.float64), axis=1)
    return bool(np.max(np.abs(norms - 1.0)) <= tol)


def cosine(matrix: EmbeddingMatrix, i: int, j: int) -> float:
    """Cosine similarity between rows i and j of a normalized matrix.

    This is the canonical similarity for the whole package: a float64 dot
    product over the float32 rows, in row index order.  The miner and its
    brute-force oracle both call it, which is what makes their outputs
    comparable bit for bit.

    Raises:
        ValidationError: matrix not normalized, or an index out of range.
    """
    if not matrix.normalized:
        raise ValidationError("cosine requires a normalized matrix")
    for name, idx in (("i", i), ("j", j)):
        if not 0 <= idx < matrix.n:
            raise ValidationError(
                f"row index {name}={idx} out of range for n={matrix.n}"
            )
    a = matrix.data[i].astype(np.float64)
    b = matrix.data[j].astype(np.float64)
    return float(np.dot(a, b))
