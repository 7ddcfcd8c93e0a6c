"""PCA dimensionality reduction for inter-group structure analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmbeddingMatrix
from .errors import DimMismatch, InvariantError, TooFewRows


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray               # (m,)
    components: np.ndarray         # (n, m), orthonormal rows
    explained_variance: np.ndarray  # (n,), nonincreasing
    rank_deficient: bool = False   # set when fewer than requested components exist

    def __post_init__(self):
        n = self.components.shape[0]
        gram = self.components @ self.components.T
        if n and np.max(np.abs(gram - np.eye(n))) > 1e-8:
            raise InvariantError("components are not orthonormal")
        if np.any(np.diff(self.explained_variance) > 0):
            raise InvariantError("explained_variance must be nonincreasing")

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def pca_fit(matrix: EmbeddingMatrix, n: int) -> PcaModel:
    """Top-n principal directions of the mean-centered rows.

    Deterministic: each component's sign is fixed so its largest-magnitude
    coordinate is positive. If the data has fewer than n nonzero singular
    values, the model carries only the nonzero ones and is flagged
    rank_deficient.
    """
    rows = len(matrix)
    if rows < 2:
        raise TooFewRows(f"PCA needs at least 2 rows, got {rows}")
    if not (1 <= n <= min(matrix.dim, rows - 1)):
        raise InvariantError(
            f"n must be in [1, min(dim, rows-1)] = [1, {min(matrix.dim, rows - 1)}], got {n}"
        )
    X = np.asarray(matrix.vectors, dtype=np.float64)
    mean = X.mean(axis=0)
    centered = X - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)

    # scale-aware cutoff so numerically-zero directions (e.g. identical rows,
    # where centering leaves ~eps residue) do not count toward the rank
    scale = max(float(s[0]) if s.size else 0.0, float(np.abs(X).max()) if X.size else 0.0)
    tol = max(centered.shape) * np.finfo(np.float64).eps * scale
    rank = int(np.sum(s > tol))
    n_eff = min(n, rank)
    components = vt[:n_eff].copy()
    explained = (s[:n_eff] ** 2) / (rows - 1)

    for i in range(n_eff):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]

    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=explained,
        rank_deficient=n_eff < n,
    )


def pca_transform(model: PcaModel, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Project rows onto the principal directions, keeping clip keys in order."""
    if matrix.dim != model.mean.shape[0]:
        raise DimMismatch(
            f"matrix dim {matrix.dim} != model dim {model.mean.shape[0]}"
        )
    X = np.asarray(matrix.vectors, dtype=np.float64)
    reduced = (X - model.mean) @ model.components.T
    return EmbeddingMatrix(matrix.keys, reduced)


def reconstruction_error(model: PcaModel, matrix: EmbeddingMatrix) -> float:
    """Frobenius norm of the residual after projecting onto the components."""
    X = np.asarray(matrix.vectors, dtype=np.float64)
    centered = X - model.mean
    recon = centered @ model.components.T @ model.components
    return float(np.linalg.norm(recon - centered))
