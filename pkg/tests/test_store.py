"""Embedding store: binary format, manifest, normalization, similarity."""

from __future__ import annotations

import io
import math
import struct

import numpy as np
import pytest

from simgap.errors import ConsistencyError, DataError, FormatError, ValidationError
from simgap.store import (
    CorpusManifest,
    EmbeddingMatrix,
    ManifestEntry,
    cosine,
    ingest,
    is_unit_normalized,
    normalize,
    payload_checksum,
    read_embeddings,
    read_manifest,
    write_embeddings,
    write_manifest,
)

from conftest import sequential_manifest, unit_rows


def roundtrip(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    buf = io.BytesIO()
    write_embeddings(matrix, buf)
    buf.seek(0)
    return read_embeddings(buf)


def test_write_read_roundtrip_is_bit_identical(rng) -> None:
    matrix = EmbeddingMatrix(data=rng.standard_normal((37, 19)).astype(np.float32))
    back = roundtrip(matrix)
    assert back.data.shape == (37, 19)
    assert np.array_equal(back.data, matrix.data)
    assert back.normalized is False


def test_header_layout_is_exactly_twenty_bytes(rng) -> None:
    matrix = EmbeddingMatrix(data=rng.standard_normal((3, 4)).astype(np.float32))
    buf = io.BytesIO()
    write_embeddings(matrix, buf)
    blob = buf.getvalue()
    assert blob[:4] == b"EMB1"
    version, dtype, reserved = struct.unpack("<HBB", blob[4:8])
    assert (version, dtype, reserved) == (1, 1, 0)
    n, d = struct.unpack("<QI", blob[8:20])
    assert (n, d) == (3, 4)
    assert len(blob) == 20 + 3 * 4 * 4 + 8


def test_checksum_is_eight_bytes_and_payload_sensitive() -> None:
    digest = payload_checksum(b"abc")
    assert len(digest) == 8
    assert digest != payload_checksum(b"abd")


@pytest.mark.parametrize(
    "mangle, message",
    [
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:4] + struct.pack("<H", 9) + b[6:], "version"),
        (lambda b: b[:6] + b"\x07" + b[7:], "dtype"),
        (lambda b: b[:-12], "truncated payload"),
        (lambda b: b[:-4], "checksum"),
        (lambda b: b[:10], "truncated header"),
    ],
)
def test_malformed_binary_is_rejected(rng, mangle, message) -> None:
    matrix = EmbeddingMatrix(data=rng.standard_normal((5, 8)).astype(np.float32))
    buf = io.BytesIO()
    write_embeddings(matrix, buf)
    with pytest.raises(FormatError, match=message):
        read_embeddings(io.BytesIO(mangle(buf.getvalue())))


def test_payload_bit_flip_fails_the_checksum(rng) -> None:
    matrix = EmbeddingMatrix(data=rng.standard_normal((5, 8)).astype(np.float32))
    buf = io.BytesIO()
    write_embeddings(matrix, buf)
    blob = bytearray(buf.getvalue())
    blob[20 + 7] ^= 0x01
    with pytest.raises(FormatError, match="checksum mismatch"):
        read_embeddings(io.BytesIO(bytes(blob)))


def test_nan_and_inf_name_the_offending_row(rng) -> None:
    data = rng.standard_normal((6, 4)).astype(np.float32)
    data[3, 2] = np.nan
    buf = io.BytesIO()
    write_embeddings(EmbeddingMatrix(data=np.nan_to_num(data)), buf)
    # rebuild with the bad value but a matching checksum
    bad = data.tobytes()
    head = buf.getvalue()[:20]
    with pytest.raises(DataError, match="row 3"):
        read_embeddings(io.BytesIO(head + bad + payload_checksum(bad)))


def test_manifest_roundtrip_and_optional_checksum(tmp_path) -> None:
    manifest = CorpusManifest(
        entries=[
            ManifestEntry("a", "img/a.png", "web", checksum="deadbeef"),
            ManifestEntry("b", "img/b.png", "scan"),
        ]
    )
    path = tmp_path / "manifest.jsonl"
    write_manifest(manifest, path)
    back = read_manifest(path)
    assert back.entries == manifest.entries


def test_manifest_duplicate_id_is_rejected() -> None:
    lines = [
        '{"image_id": "a", "path": "x.png", "source": "web"}',
        '{"image_id": "a", "path": "y.png", "source": "web"}',
    ]
    with pytest.raises(ConsistencyError, match="duplicate image_id"):
        read_manifest(lines)


def test_manifest_bad_json_names_the_line() -> None:
    with pytest.raises(FormatError, match="line 2"):
        read_manifest(['{"image_id": "a", "path": "p", "source": "s"}', "{nope"])


def test_manifest_missing_key_names_the_line() -> None:
    with pytest.raises(FormatError, match="line 1"):
        read_manifest(['{"image_id": "a", "path": "p"}'])


def test_ingest_cross_checks_counts(rng, tmp_path) -> None:
    matrix = EmbeddingMatrix(data=rng.standard_normal((4, 8)).astype(np.float32))
    emb = tmp_path / "x.emb"
    man = tmp_path / "m.jsonl"
    write_embeddings(matrix, emb)
    write_manifest(sequential_manifest(3), man)
    with pytest.raises(ConsistencyError, match="3 entries but matrix has 4"):
        ingest(emb, man)
    write_manifest(sequential_manifest(4), man)
    store = ingest(emb, man)
    assert store.matrix.n == 4
    assert store.manifest.image_id(2) == "img00002"


def test_normalize_produces_unit_rows_and_is_idempotent(rng) -> None:
    matrix = EmbeddingMatrix(data=(rng.standard_normal((50, 24)) * 7).astype(np.float32))
    unit = normalize(matrix)
    assert unit.normalized
    norms = np.linalg.norm(unit.data.astype(np.float64), axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-5
    again = normalize(unit)
    assert np.max(np.abs(again.data - unit.data)) < 1e-6
    # the input must not be touched
    assert not matrix.normalized


def test_normalize_rejects_zero_rows_by_index(rng) -> None:
    data = rng.standard_normal((5, 6)).astype(np.float32)
    data[2] = 0.0
    with pytest.raises(DataError, match="row 2"):
        normalize(EmbeddingMatrix(data=data))


def test_is_unit_normalized_detects_raw_matrices(rng) -> None:
    raw = EmbeddingMatrix(data=(rng.standard_normal((10, 8)) * 3).astype(np.float32))
    assert not is_unit_normalized(raw)
    assert is_unit_normalized(normalize(raw))


def test_cosine_matches_scalar_loop_oracle(rng) -> None:
    matrix = unit_rows(rng, 20, 33)
    for _ in range(40):
        i, j = rng.integers(0, 20, size=2)
        expect = math.fsum(
            float(matrix.data[i, k]) * float(matrix.data[j, k]) for k in range(33)
        )
        assert cosine(matrix, int(i), int(j)) == pytest.approx(expect, abs=1e-6)


def test_cosine_is_symmetric_bit_for_bit(rng) -> None:
    matrix = unit_rows(rng, 15, 64)
    for _ in range(30):
        i, j = (int(v) for v in rng.integers(0, 15, size=2))
        assert cosine(matrix, i, j) == cosine(matrix, j, i)


def test_cosine_self_similarity_is_one(rng) -> None:
    matrix = unit_rows(rng, 8, 40)
    for i in range(8):
        assert cosine(matrix, i, i) == pytest.approx(1.0, abs=1e-5)


def test_cosine_requires_normalization_and_valid_indices(rng) -> None:
    raw = EmbeddingMatrix(data=rng.standard_normal((4, 5)).astype(np.float32))
    with pytest.raises(ValidationError, match="normalized"):
        cosine(raw, 0, 1)
    unit = normalize(raw)
    with pytest.raises(ValidationError, match="j=4"):
        cosine(unit, 0, 4)
    with pytest.raises(ValidationError, match="i=-1"):
        cosine(unit, -1, 2)


def test_matrix_type_constraints() -> None:
    with pytest.raises(ValidationError, match="float32"):
        EmbeddingMatrix(data=np.zeros((2, 2), dtype=np.float64))
    with pytest.raises(ValidationError, match="2-D"):
        EmbeddingMatrix(data=np.zeros(4, dtype=np.float32))
