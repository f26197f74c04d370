"""Dense linear algebra helpers and deterministic random number generation.

Everything in this package runs on row-major numpy arrays: a "matrix" is a
2-D float array, a "vector" is 1-D. The helpers here are thin, shape-checked
wrappers; verification code uses them at float64, training code may pass
float32 arrays and the wrappers preserve the dtype.

Randomness goes through :func:`make_rng`, which returns a PCG64 generator.
PCG64 is seedable, platform-stable, and documented by numpy, so a seed fully
determines every experiment in this package.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ShapeError",
    "make_rng",
    "as_matrix",
    "as_vector",
    "gemm",
    "row_sq_norms",
    "gaussian_fill",
    "sym_eig_min",
]

_FLOAT_DTYPES = (np.float32, np.float64)


class ShapeError(ValueError):
    """Operand shapes are inconsistent with the operation's contract."""


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator: identical seeds yield identical streams."""
    return np.random.default_rng(int(seed))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a C-contiguous 2-D float64 array, rejecting other ranks."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name}: expected 2-D array, got ndim={m.ndim}")
    return np.ascontiguousarray(m)


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce to a contiguous 1-D float64 array."""
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"{name}: expected 1-D array, got ndim={v.ndim}")
    return np.ascontiguousarray(v)


def _check_2d(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise ShapeError(f"{name}: expected 2-D array, got ndim={a.ndim}")
    if a.dtype not in _FLOAT_DTYPES:
        a = a.astype(np.float64)
    return a


def gemm(a, b_transposed) -> np.ndarray:
    """Product ``a @ b_transposed.T`` with the second operand pre-transposed.

    Call sites in this package all compute ``X W^T`` with ``W`` stored as
    ``n x d`` rows, so the second operand is given in that layout and no
    transpose copies are needed.
    """
    a = _check_2d(a, "gemm lhs")
    b = _check_2d(b_transposed, "gemm rhs")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(
            f"gemm: inner dimensions differ, lhs is {a.shape}, rhs is {b.shape} "
            "(rhs must share the column count of lhs)"
        )
    return a @ b.T


def row_sq_norms(m) -> np.ndarray:
    """Squared Euclidean norm of every row; entries are always >= 0."""
    m = _check_2d(m, "row_sq_norms")
    return np.einsum("ij,ij->i", m, m)


def gaussian_fill(rng: np.random.Generator, rows: int, cols: int, sigma: float) -> np.ndarray:
    """Matrix of i.i.d. N(0, sigma^2) draws, deterministic given the generator state."""
    if sigma <= 0:
        raise ValueError(f"gaussian_fill: sigma must be positive, got {sigma}")
    return rng.normal(0.0, sigma, size=(rows, cols))


def sym_eig_min(m) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    The input must be square and symmetric to 1e-12 relative to its largest
    entry. Accuracy is well within 1e-8 relative to the spectral radius.
    """
    m = _check_2d(m, "sym_eig_min")
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"sym_eig_min: matrix must be square, got {m.shape}")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > 1e-12 * max(scale, 1e-300):
        raise ShapeError(
            f"sym_eig_min: matrix is not symmetric (max |M - M^T| = {asym:.3e}, "
            f"max |M| = {scale:.3e})"
        )
    return float(np.linalg.eigvalsh(m)[0])
