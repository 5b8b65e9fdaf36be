"""Sentence encoders behind one minimal interface.

The default is a pretrained paraphrase transformer (d=768) loaded through
sentence-transformers; model ids prefixed ``stub:`` select an offline
hash-seeded Gaussian encoder that exists purely to exercise the export
formats without a model download.
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_MODEL_ID = "sentence-transformers/paraphrase-mpnet-base-v2"
DEFAULT_DIMENSION = 768


class StubEncoder:
    """Deterministic text-hash encoder; no semantics, format testing only."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension

    def encode(self, texts, batch_size: int = 32) -> np.ndarray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            rng = np.random.Generator(np.random.PCG64(seed))
            out[i] = rng.standard_normal(self.dimension)
        return out


class SentenceTransformerEncoder:
    def __init__(self, model_id: str = DEFAULT_MODEL_ID, batch_size: int = 32):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise RuntimeError(
                "sentence-transformers is not installed; "
                "install the 'encode' extra or use a stub: model id"
            ) from exc
        self._model = SentenceTransformer(model_id)
        self.model_id = model_id
        self.batch_size = batch_size
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts, batch_size: int | None = None) -> np.ndarray:
        vectors = self._model.encode(
            list(texts),
            batch_size=batch_size or self.batch_size,
            convert_to_numpy=True,
            normalize_embeddings=False,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float64)


def make_encoder(model_id: str, batch_size: int = 32):
    if model_id.startswith("stub:"):
        suffix = model_id.split(":", 1)[1]
        return StubEncoder(dimension=int(suffix) if suffix else DEFAULT_DIMENSION)
    return SentenceTransformerEncoder(model_id, batch_size)
