"""Build the ten-pair fixture corpus for the end-to-end UI session.

Writes a mined pairs file, a manifest, and the image files under the
directory given as the only argument, using the core package's public
API so the fixture is exactly what the service expects to load.
"""

import sys
from pathlib import Path

import numpy as np
from PIL import Image

from simgap.miner import MinerConfig, mine_blind_pairs, to_records, write_pairs
from simgap.store import (
    CorpusManifest,
    EmbeddingMatrix,
    ManifestEntry,
    normalize,
    write_manifest,
)

N, D, PLANTED = 30, 64, 10


def main(root: Path) -> None:
    rng = np.random.default_rng(606)
    raw_a = rng.standard_normal((N, D)).astype(np.float32)
    raw_b = rng.standard_normal((N, D)).astype(np.float32)
    for k in range(PLANTED):
        raw_a[2 * k + 1] = raw_a[2 * k] + 0.01 * rng.standard_normal(D).astype(
            np.float32
        )
    a = normalize(EmbeddingMatrix(data=raw_a))
    b = normalize(EmbeddingMatrix(data=raw_b))
    pairs = mine_blind_pairs(a, b, MinerConfig())
    if len(pairs) != PLANTED:
        raise SystemExit(f"expected {PLANTED} mined pairs, got {len(pairs)}")

    manifest = CorpusManifest(
        entries=[
            ManifestEntry(
                image_id=f"img{k:05d}", path=f"images/img{k:05d}.png", source="fixture"
            )
            for k in range(N)
        ]
    )
    images = root / "corpus" / "images"
    images.mkdir(parents=True, exist_ok=True)
    for k, entry in enumerate(manifest.entries):
        Image.new("RGB", (64, 48), ((37 * k) % 256, 96, 160)).save(
            root / "corpus" / entry.path
        )

    write_pairs(to_records(pairs, manifest), root / "pairs.jsonl")
    write_manifest(manifest, root / "manifest.jsonl")
    print(f"fixture ready: {len(pairs)} pairs under {root}")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        raise SystemExit("usage: fixture.py <target-dir>")
    main(Path(sys.argv[1]))
