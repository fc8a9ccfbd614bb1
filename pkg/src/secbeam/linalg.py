"""Dense complex linear-algebra helpers used across the package.

Vectors are 1-D and matrices 2-D ``numpy`` arrays of ``complex128``,
row-major. Every problem here is tiny (tens of antennas, at most ~10
users), so plain dense arithmetic is all we need.
"""

from __future__ import annotations

import numpy as np


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes."""


class SingularMatrixError(ValueError):
    """Matrix has no usable inverse at working precision."""


# Relative pivot threshold below which elimination treats a matrix as singular.
PIVOT_RTOL = 1e-12


def hermitian(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[0]:
        raise DimensionMismatchError(
            f"cannot multiply {a.shape} by {b.shape}: inner dimensions differ"
        )
    return a @ b


def inverse(m: np.ndarray) -> np.ndarray:
    """Invert a square matrix by Gauss-Jordan elimination with partial pivoting.

    Raises SingularMatrixError when the best available pivot falls below
    PIVOT_RTOL times the largest-magnitude entry of the input.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"inverse needs a square matrix, got {m.shape}")
    n = m.shape[0]
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        raise SingularMatrixError("zero matrix")
    aug = np.hstack([m.copy(), np.eye(n, dtype=np.complex128)])
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(aug[col:, col])))
        if np.abs(aug[pivot_row, col]) < PIVOT_RTOL * scale:
            raise SingularMatrixError(
                f"pivot in column {col} below {PIVOT_RTOL:g} of the largest entry"
            )
        if pivot_row != col:
            aug[[col, pivot_row]] = aug[[pivot_row, col]]
        aug[col] = aug[col] / aug[col, col]
        factors = aug[:, col].copy()
        factors[col] = 0.0
        aug -= np.outer(factors, aug[col])
    return aug[:, n:]


def two_norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(v)))


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def abs_entrywise(v: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(v))
