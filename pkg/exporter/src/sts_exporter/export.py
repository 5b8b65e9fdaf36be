"""Export benchmark pairs as simcal interchange files.

Emits three artifacts into the output directory:

  embeddings.bin  header ``simcal-emb v1 <d> <n> 32`` then per record a
                  UTF-8 id, a tab, and d little-endian binary32 values;
                  two records per pair (ids ``<pair>#a`` / ``<pair>#b``),
                  unit-normalized before the binary32 cast
  pairs.jsonl     one {id, model_score, human_score} object per line;
                  model_score is the float64 cosine of the two binary32
                  vectors exactly as a reader of embeddings.bin would
                  recompute it, human_score the 0-5 label rescaled by 1/5
  manifest.json   dataset/encoder identity, pair count, sha256 digests of
                  the two files, creation timestamp

Writes are staged with a temporary suffix and renamed at the end, so a
failing export leaves nothing behind.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import load_split
from .encoder import make_encoder

MANIFEST_SCHEMA = "simcal-export v1"
EMBEDDINGS_NAME = "embeddings.bin"
PAIRS_NAME = "pairs.jsonl"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class ExportManifest:
    dataset: str
    encoder_id: str
    dimension: int
    n_pairs: int
    digests: dict
    created_at: str

    def to_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "dataset": self.dataset,
            "encoder_id": self.encoder_id,
            "dimension": self.dimension,
            "n_pairs": self.n_pairs,
            "files": self.digests,
            "created_at": self.created_at,
        }


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _normalize_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise ValueError("encoder produced a degenerate embedding")
    return vectors / norms[:, None]


def _write_embeddings(path: Path, ids, vectors32: np.ndarray) -> None:
    n, d = vectors32.shape
    with path.open("wb") as fh:
        fh.write(f"simcal-emb v1 {d} {n} 32\n".encode("ascii"))
        for rec_id, vec in zip(ids, vectors32):
            fh.write(rec_id.encode("utf-8") + b"\t")
            fh.write(vec.tobytes())


def export(split: str, encoder_id: str, out_dir, batch_size: int = 32) -> ExportManifest:
    rows = load_split(split)
    encoder = make_encoder(encoder_id, batch_size)

    texts: list[str] = []
    for row in rows:
        texts.append(row.sentence1)
        texts.append(row.sentence2)
    raw = encoder.encode(texts, batch_size=batch_size)
    if raw.shape != (2 * len(rows), encoder.dimension):
        raise ValueError(f"encoder returned shape {raw.shape}")

    unit = _normalize_rows(np.asarray(raw, dtype=np.float64))
    quantized = unit.astype("<f4")
    stored = quantized.astype(np.float64)  # exactly what a reader recovers

    ids: list[str] = []
    for row in rows:
        ids.append(f"{row.id}#a")
        ids.append(f"{row.id}#b")

    scores = np.clip(np.einsum("ij,ij->i", stored[0::2], stored[1::2]), -1.0, 1.0)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    final_paths = {name: out_dir / name for name in (EMBEDDINGS_NAME, PAIRS_NAME, MANIFEST_NAME)}
    tmp_paths = {name: out_dir / (name + ".tmp") for name in final_paths}
    try:
        _write_embeddings(tmp_paths[EMBEDDINGS_NAME], ids, quantized)
        with tmp_paths[PAIRS_NAME].open("w", encoding="utf-8") as fh:
            for row, score in zip(rows, scores):
                fh.write(
                    json.dumps(
                        {
                            "id": row.id,
                            "model_score": float(score),
                            "human_score": row.score / 5.0,
                        }
                    )
                    + "\n"
                )
        manifest = ExportManifest(
            dataset=split,
            encoder_id=encoder_id,
            dimension=int(encoder.dimension),
            n_pairs=len(rows),
            digests={
                EMBEDDINGS_NAME: _sha256(tmp_paths[EMBEDDINGS_NAME]),
                PAIRS_NAME: _sha256(tmp_paths[PAIRS_NAME]),
            },
            created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        )
        tmp_paths[MANIFEST_NAME].write_text(
            json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        for name in final_paths:
            tmp_paths[name].rename(final_paths[name])
    except BaseException:
        for path in list(tmp_paths.values()) + list(final_paths.values()):
            path.unlink(missing_ok=True)
        raise
    return manifest


def verify_manifest(out_dir) -> ExportManifest:
    """Re-hash the emitted files and check them against the manifest."""
    out_dir = Path(out_dir)
    doc = json.loads((out_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    if doc.get("schema") != MANIFEST_SCHEMA:
        raise ValueError(f"unexpected manifest schema {doc.get('schema')!r}")
    for name, want in doc["files"].items():
        got = _sha256(out_dir / name)
        if got != want:
            raise ValueError(f"{name}: digest mismatch ({got} != {want})")
    return ExportManifest(
        dataset=doc["dataset"],
        encoder_id=doc["encoder_id"],
        dimension=int(doc["dimension"]),
        n_pairs=int(doc["n_pairs"]),
        digests=doc["files"],
        created_at=doc["created_at"],
    )
