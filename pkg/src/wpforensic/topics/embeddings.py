"""Embedding interchange format: a JSON header plus a raw float32 file.

The header describes the matrix (row count, dimension, dtype tag,
normalization flag, row ids); the companion ``.bin`` file holds the
vectors row-major as little-endian float32. The pair is produced by the
embedding sidecar and consumed here, so validation is strict: sizes,
ids, and finiteness are all checked on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DTYPE_TAG = "f32le"

#: Row-norm slack allowed when a file claims unit-normalized rows.
NORM_TOLERANCE = 1e-3


class EmbeddingFormatError(ValueError):
    """Raised when a header/bin pair is inconsistent or malformed."""


@dataclass
class EmbeddingMatrix:
    """A dense float32 matrix with one string id per row."""

    ids: list[str]
    rows: np.ndarray
    l2_normalized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise EmbeddingFormatError("embedding rows must be a 2-d array")
        if len(self.ids) != self.rows.shape[0]:
            raise EmbeddingFormatError(
                f"id count {len(self.ids)} does not match row count {self.rows.shape[0]}"
            )
        if len(set(self.ids)) != len(self.ids):
            raise EmbeddingFormatError("duplicate row ids")
        if not np.isfinite(self.rows).all():
            raise EmbeddingFormatError("non-finite values in embedding matrix")
        if self.l2_normalized and len(self.ids):
            norms = np.linalg.norm(self.rows.astype(np.float64), axis=1)
            worst = float(np.abs(norms - 1.0).max())
            if worst > NORM_TOLERANCE:
                raise EmbeddingFormatError(
                    f"header claims unit rows but worst norm deviation is {worst:.2e}"
                )

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def row_index(self) -> dict[str, int]:
        """Map row id -> row number."""
        return {rid: i for i, rid in enumerate(self.ids)}

    def vector(self, rid: str) -> np.ndarray:
        return self.rows[self.row_index()[rid]]


def _paths_from_stem(stem: str | Path) -> tuple[Path, Path]:
    stem = Path(stem)
    return stem.with_suffix(".json"), stem.with_suffix(".bin")


def save_embeddings(
    matrix: EmbeddingMatrix,
    header_path: str | Path,
    bin_path: str | Path,
) -> None:
    """Write the header JSON and raw little-endian float32 rows."""
    header_path = Path(header_path)
    bin_path = Path(bin_path)
    header = {
        "count": matrix.count,
        "dim": matrix.dim,
        "dtype": DTYPE_TAG,
        "l2_normalized": matrix.l2_normalized,
        "ids": list(matrix.ids),
    }
    header.update(matrix.meta)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    header_path.write_text(json.dumps(header, ensure_ascii=False), encoding="utf-8")
    data = np.ascontiguousarray(matrix.rows, dtype="<f4")
    bin_path.write_bytes(data.tobytes())


def save_embeddings_stem(matrix: EmbeddingMatrix, stem: str | Path) -> None:
    """Write ``<stem>.json`` and ``<stem>.bin``."""
    header, bin_ = _paths_from_stem(stem)
    save_embeddings(matrix, header, bin_)


def load_embeddings(header_path: str | Path, bin_path: str | Path) -> EmbeddingMatrix:
    """Load and validate a header/bin pair.

    Raises :class:`EmbeddingFormatError` on size mismatch, id/count
    mismatch, duplicate ids, unknown dtype, or non-finite values.
    """
    header_path = Path(header_path)
    bin_path = Path(bin_path)
    try:
        header = json.loads(header_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise EmbeddingFormatError(f"invalid header JSON in {header_path}: {exc}") from exc
    for key in ("count", "dim", "dtype", "ids"):
        if key not in header:
            raise EmbeddingFormatError(f"header missing required key {key!r}")
    if header["dtype"] != DTYPE_TAG:
        raise EmbeddingFormatError(f"unsupported dtype {header['dtype']!r}")
    count = int(header["count"])
    dim = int(header["dim"])
    ids = [str(x) for x in header["ids"]]
    if len(ids) != count:
        raise EmbeddingFormatError(
            f"header count {count} does not match {len(ids)} ids"
        )
    raw = bin_path.read_bytes()
    expected = count * dim * 4
    if len(raw) != expected:
        raise EmbeddingFormatError(
            f"{bin_path} holds {len(raw)} bytes, expected {expected} "
            f"({count} rows x {dim} dims x 4 bytes)"
        )
    rows = np.frombuffer(raw, dtype="<f4").reshape(count, dim)
    meta = {
        k: v
        for k, v in header.items()
        if k not in {"count", "dim", "dtype", "ids", "l2_normalized"}
    }
    return EmbeddingMatrix(
        ids=ids,
        rows=rows.copy(),
        l2_normalized=bool(header.get("l2_normalized", False)),
        meta=meta,
    )


def load_embeddings_stem(stem: str | Path) -> EmbeddingMatrix:
    """Load ``<stem>.json`` + ``<stem>.bin``."""
    header, bin_ = _paths_from_stem(stem)
    return load_embeddings(header, bin_)
