"""Dimensionality reduction for sentence embeddings.

The reference method is a plain centered PCA projection. The projection
basis is deterministic: components are ordered by singular value and
each component's sign is fixed so that its largest-magnitude loading is
positive. Alternative reducers (e.g. a manifold method) can be plugged
in through :func:`register_reducer` without touching the pipeline.
"""

from __future__ import annotations

import logging
from typing import Callable, Protocol

import numpy as np

from .embeddings import EmbeddingMatrix

logger = logging.getLogger(__name__)


class Reducer(Protocol):
    def __call__(self, matrix: EmbeddingMatrix, target_dim: int) -> EmbeddingMatrix: ...


def fit_pca(x: np.ndarray, target_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Fit a centered PCA basis.

    Returns ``(mean, components)`` where ``components`` is a
    ``target_dim x d`` matrix whose rows are the principal axes in
    decreasing-variance order, sign-fixed (largest |loading| positive).
    If the centered data has rank below ``target_dim`` the trailing
    components are zero rows (and a warning is logged), so projections
    carry explicit zero coordinates in the degenerate directions.
    """
    x = np.asarray(x, dtype=np.float64)
    n, d = x.shape
    if target_dim < 1:
        raise ValueError("target_dim must be >= 1")
    if target_dim >= d:
        raise ValueError(f"target_dim {target_dim} must be smaller than input dim {d}")
    if n < target_dim:
        raise ValueError(f"need at least {target_dim} rows, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    tol = (s.max(initial=0.0)) * max(n, d) * np.finfo(np.float64).eps
    rank = int((s > tol).sum())
    components = np.zeros((target_dim, d), dtype=np.float64)
    keep = min(rank, target_dim)
    components[:keep] = vt[:keep]
    if rank < target_dim:
        logger.warning(
            "data rank %d below target dimension %d; padding %d zero dimension(s)",
            rank,
            target_dim,
            target_dim - rank,
        )
    for i in range(keep):
        j = int(np.abs(components[i]).argmax())
        if components[i, j] < 0:
            components[i] = -components[i]
    return mean, components


def pca_reduce(matrix: EmbeddingMatrix, target_dim: int) -> EmbeddingMatrix:
    """Project rows onto the top ``target_dim`` principal axes.

    Output rows are float32 and are not unit-normalized.
    """
    mean, components = fit_pca(matrix.rows, target_dim)
    projected = (matrix.rows.astype(np.float64) - mean) @ components.T
    return EmbeddingMatrix(
        ids=list(matrix.ids),
        rows=projected.astype(np.float32),
        l2_normalized=False,
    )


_REDUCERS: dict[str, Callable[[EmbeddingMatrix, int], EmbeddingMatrix]] = {
    "pca": pca_reduce,
}


def register_reducer(name: str, fn: Callable[[EmbeddingMatrix, int], EmbeddingMatrix]) -> None:
    """Register an alternative reducer under ``name``."""
    _REDUCERS[name] = fn


def reduce_dimensions(
    matrix: EmbeddingMatrix,
    target_dim: int = 5,
    method: str = "pca",
) -> EmbeddingMatrix:
    """Reduce ``matrix`` to ``target_dim`` dimensions with a named method."""
    try:
        reducer = _REDUCERS[method]
    except KeyError:
        known = ", ".join(sorted(_REDUCERS))
        raise ValueError(f"unknown reduction method {method!r} (known: {known})") from None
    reduced = reducer(matrix, target_dim)
    if reduced.dim != target_dim or reduced.count != matrix.count:
        raise ValueError(
            f"reducer {method!r} returned shape {reduced.count}x{reduced.dim}, "
            f"expected {matrix.count}x{target_dim}"
        )
    return reduced
