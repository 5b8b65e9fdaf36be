"""Unit-sphere geometry: normalization, cosine similarity, and the
isotropic baseline that anisotropic embedding sets are contrasted with.

All reductions accumulate in input order through exactly rounded sums
(``math.fsum``), so repeated runs and any internal parallelism produce
bit-identical statistics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

#: tolerance on |norm - 1| for vectors passed to cosine / isotropy_stats
UNIT_TOL = 1e-6

EMB_MAGIC = "simcal-emb"
EMB_VERSION = "v1"


@dataclass(frozen=True)
class EmbeddingRecord:
    """An opaque identifier plus one point on the unit sphere."""

    id: str
    vector: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.vector.shape[0])


@dataclass(frozen=True)
class IsotropyStats:
    """Pairwise-cosine statistics of a vector set.

    ``std_cos`` uses the population (n-denominator) convention.
    """

    n_pairs: int
    mean_cos: float
    std_cos: float
    dimension: int


def normalize(v) -> np.ndarray:
    """Scale ``v`` onto the unit sphere.

    Raises ValueError("degenerate embedding") for a zero vector.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError("degenerate embedding")
    return v / norm


def cosine(u, v) -> float:
    """Inner product of two unit vectors, clamped to [-1, 1].

    Both inputs must already be unit-norm within 1e-6; rounding can push
    the raw inner product past the bounds by ~1e-16, and downstream
    angle/threshold logic needs the closed interval.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    for name, w in (("u", u), ("v", v)):
        if abs(np.linalg.norm(w) - 1.0) > UNIT_TOL:
            raise ValueError(f"{name} is not unit-norm within {UNIT_TOL:g}")
    return float(min(1.0, max(-1.0, float(np.dot(u, v)))))


def sample_uniform_sphere(d: int, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` vectors uniformly from the unit sphere in R^d.

    Normalized i.i.d. standard Gaussian rows; rejection-free and
    dimension-robust. Deterministic (bit-for-bit) for a given seed.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal((n, d))
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):  # probability ~0, but the contract is total
        raise ValueError("degenerate embedding")
    return x / norms[:, None]


def isotropy_stats(vectors) -> IsotropyStats:
    """Mean and population std of the cosine over all unordered pairs.

    Accumulation is exactly rounded and follows input order, so the
    result does not depend on chunking or thread count.
    """
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise ValueError("need at least 2 vectors of a common dimension")
    norms = np.linalg.norm(mat, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ValueError(f"vectors must be unit-norm within {UNIT_TOL:g}")
    n, d = mat.shape
    gram = mat @ mat.T
    iu = np.triu_indices(n, k=1)
    vals = np.clip(gram[iu], -1.0, 1.0)
    n_pairs = vals.size
    mean = math.fsum(vals) / n_pairs
    var = math.fsum((x - mean) ** 2 for x in vals) / n_pairs
    return IsotropyStats(
        n_pairs=int(n_pairs),
        mean_cos=mean,
        std_cos=math.sqrt(max(var, 0.0)),
        dimension=int(d),
    )


# ---------------------------------------------------------------------------
# Embedding interchange files
#
# Binary: one ASCII header line `simcal-emb v1 <d> <n> 32`, then n records of
# (UTF-8 id, tab, d little-endian IEEE-754 binary32 values).  The JSONL
# alternative carries the same payload one object per line and round-trips
# losslessly at binary32 precision.
# ---------------------------------------------------------------------------


def write_embeddings(path, records: Sequence[EmbeddingRecord]) -> None:
    records = list(records)
    if not records:
        raise ValidationError(f"{path}: refusing to write an empty embedding set")
    d = records[0].dimension
    with open(path, "wb") as fh:
        fh.write(f"{EMB_MAGIC} {EMB_VERSION} {d} {len(records)} 32\n".encode("ascii"))
        for rec in records:
            if rec.dimension != d:
                raise ValidationError(
                    f"{path}: record {rec.id!r} has dimension {rec.dimension}, expected {d}"
                )
            if "\t" in rec.id or "\n" in rec.id:
                raise ValidationError(f"{path}: id {rec.id!r} contains a tab or newline")
            fh.write(rec.id.encode("utf-8") + b"\t")
            fh.write(np.asarray(rec.vector, dtype="<f4").tobytes())


def read_embeddings(path) -> list[EmbeddingRecord]:
    blob = Path(path).read_bytes()
    nl = blob.find(b"\n")
    if nl < 0:
        raise ValidationError(f"{path}: missing header line")
    parts = blob[:nl].decode("ascii", errors="replace").split()
    if len(parts) != 5 or parts[0] != EMB_MAGIC or parts[1] != EMB_VERSION:
        raise ValidationError(f"{path}: bad header {blob[:nl]!r}")
    try:
        d, n, width = int(parts[2]), int(parts[3]), int(parts[4])
    except ValueError:
        raise ValidationError(f"{path}: non-integer header fields {parts[2:]!r}") from None
    if width != 32:
        raise ValidationError(f"{path}: unsupported float width {width}")
    if d < 1 or n < 1:
        raise ValidationError(f"{path}: invalid dimensions d={d} n={n}")
    records: list[EmbeddingRecord] = []
    pos = nl + 1
    vec_bytes = 4 * d
    for i in range(n):
        tab = blob.find(b"\t", pos)
        if tab < 0:
            raise ValidationError(f"{path}: record {i + 1}: missing id terminator")
        rec_id = blob[pos:tab].decode("utf-8")
        pos = tab + 1
        if pos + vec_bytes > len(blob):
            raise ValidationError(f"{path}: record {i + 1}: truncated vector")
        vec = np.frombuffer(blob[pos : pos + vec_bytes], dtype="<f4").astype(np.float64)
        pos += vec_bytes
        records.append(EmbeddingRecord(id=rec_id, vector=vec))
    if pos != len(blob):
        raise ValidationError(f"{path}: {len(blob) - pos} trailing bytes after {n} records")
    return records


def write_embeddings_jsonl(path, records: Iterable[EmbeddingRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            # Cast through binary32 so binary and JSONL carry identical payloads.
            vec = [float(x) for x in np.asarray(rec.vector, dtype=np.float32)]
            fh.write(json.dumps({"id": rec.id, "vector": vec}) + "\n")


def read_embeddings_jsonl(path) -> list[EmbeddingRecord]:
    records: list[EmbeddingRecord] = []
    d = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "id" not in obj or "vector" not in obj:
                raise ValidationError(f"{path}:{lineno}: expected an object with id and vector")
            vec = obj["vector"]
            if not isinstance(vec, list) or not vec:
                raise ValidationError(f"{path}:{lineno}: vector must be a non-empty array")
            if d is None:
                d = len(vec)
            elif len(vec) != d:
                raise ValidationError(f"{path}:{lineno}: dimension {len(vec)} != {d}")
            try:
                arr = np.asarray(vec, dtype=np.float64)
            except (TypeError, ValueError):
                raise ValidationError(f"{path}:{lineno}: non-numeric vector entry") from None
            records.append(EmbeddingRecord(id=str(obj["id"]), vector=arr))
    if not records:
        raise ValidationError(f"{path}: empty embedding file")
    return records
