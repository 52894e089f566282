"""Spectral embedding: eigenvector columns to unit-norm vertex coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigenvectorError, GraphValidationError
from .graph import DegreeVector
from .operators import LaplacianOperator

# A column whose constraint energy is below this fraction of its squared
# norm cannot be meaningfully normalized.
DEGENERACY_EPS = 1e-10


@dataclass
class EmbeddingResult:
    """Row-normalized spectral coordinates.

    ``coords`` rows are unit vectors (or exactly zero), ``row_norms``
    holds the pre-normalization row lengths l_j; l_j = 0 marks vertices
    the eigenvectors carry no information about.
    """

    coords: np.ndarray
    row_norms: np.ndarray


def compute_embedding(
    vectors: np.ndarray,
    b_op: LaplacianOperator,
    deg: DegreeVector,
) -> EmbeddingResult:
    """Normalize eigenvector columns, then rows, into an embedding.

    Each column x is first centered in the degree inner product
    (x <- x - (x·d / 1·d) 1, so x·d = 0) and scaled to unit constraint
    energy x^T L_H x = 1; each row of the resulting matrix is then scaled
    to unit Euclidean length. Rows of zero length are left at zero and
    reported via ``row_norms``.
    """
    x = np.array(vectors, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if deg.n != n or b_op.n != n:
        raise GraphValidationError("embedding inputs have mismatched sizes")
    d, vol = deg.d, deg.vol
    for j in range(x.shape[1]):
        col = x[:, j]
        col -= (d @ col / vol)
        energy = b_op.quadratic(col)
        sq = float(col @ col)
        if energy <= DEGENERACY_EPS * sq:
            raise DegenerateEigenvectorError(
                f"eigenvector column {j} has numerically zero constraint energy "
                "and cannot be normalized"
            )
        col /= np.sqrt(energy)
    row_norms = np.linalg.norm(x, axis=1)
    coords = np.zeros_like(x)
    nz = row_norms > 0
    coords[nz] = x[nz] / row_norms[nz, None]
    return EmbeddingResult(coords=coords, row_norms=row_norms)
