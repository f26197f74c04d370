"""The yat product and its analytic gradients.

The yat product of a weight ``w`` and an input ``x`` is

    yat(w, x) = <w, x>^2 / (||w - x||^2 + eps)

a Mercer kernel that is large only when the two vectors are both aligned
and close: the squared inner product rewards alignment, the inverse squared
distance rewards proximity, and ``eps > 0`` keeps the pole at ``w == x``
out of reach. The biased variant squares ``<w, x> + b`` instead; the
denominator never sees the bias.

Scalar pairs compute the distance by direct subtraction. Batched paths use
one GEMM plus cached row norms through the identity

    ||w - x||^2 = ||w||^2 + ||x||^2 - 2 <w, x>

whose floating-point residue can dip slightly below zero and is clamped.

Gradients follow the quotient rule. With ``s = <w, x> + b`` and
``D = ||w - x||^2 + eps``:

    d yat / dx = (2 s / D) (w - s (x - w) / D)
    d yat / dw = (2 s / D) (x - s (w - x) / D)
    d yat / db = 2 s / D

Every backward path here is gated by central finite differences in the
test suite.

The squashing helpers (:func:`softermax`, :func:`soft_sigmoid`,
:func:`soft_tanh`) are algebraic alternatives to exponential normalizers
for non-negative scores. They ship as utilities; the default attention
stack normalizes with plain softmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ShapeError, as_vector, gemm, row_sq_norms

__all__ = [
    "KernelConfig",
    "SquashConfig",
    "PairCache",
    "YatBatchCache",
    "yat",
    "yat_biased",
    "yat_batch",
    "yat_grads",
    "yat_batch_backward",
    "softermax",
    "soft_sigmoid",
    "soft_tanh",
]

_EPS_FLOOR = 1e-12


@dataclass
class KernelConfig:
    """Stability policy for yat evaluations.

    ``eps_mode="fixed"`` uses ``eps`` as given. ``eps_mode="auto"`` rescales
    to ``d * sigma_hat^2`` where ``sigma_hat^2`` is the mean per-coordinate
    variance of the batch the kernel is applied to, clamped below at 1e-12.
    The auto rule matches the noise floor of the squared distance so the
    stabilizer neither drowns the signal nor disappears under it.
    """

    eps: float = 1e-6
    eps_mode: str = "fixed"

    def __post_init__(self):
        if self.eps_mode not in ("fixed", "auto"):
            raise ValueError(f"eps_mode must be 'fixed' or 'auto', got {self.eps_mode!r}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    def resolved_eps(self, x: np.ndarray | None = None) -> float:
        """The eps actually used for an evaluation against data ``x``.

        In auto mode a batch estimates ``sigma_hat^2`` as the per-coordinate
        variance across rows, averaged over coordinates; a single vector
        falls back to the variance of its own coordinates.
        """
        if self.eps_mode == "fixed" or x is None:
            return float(self.eps)
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        d = x.shape[1]
        if x.shape[0] > 1:
            sigma_sq = float(np.mean(np.var(x, axis=0)))
        else:
            sigma_sq = float(np.var(x))
        return max(d * sigma_sq, _EPS_FLOOR)


@dataclass
class SquashConfig:
    """Sharpness exponent and stability term for the squashing functions."""

    n_exp: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        if self.n_exp <= 0:
            raise ValueError(f"n_exp must be positive, got {self.n_exp}")
        if self.eps < 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")


@dataclass
class PairCache:
    """Forward quantities of one scalar pair: numerator root, distance, denominator."""

    s: float
    dsq: float
    denom: float


@dataclass
class YatBatchCache:
    """Forward quantities of a batched evaluation, kept for the backward pass.

    ``s`` holds the biased inner products (numerator roots), ``dsq`` the
    clamped squared distances, ``denom = dsq + eps``. ``has_bias`` records
    whether a bias vector participated in the forward.
    """

    s: np.ndarray
    dsq: np.ndarray
    denom: np.ndarray
    has_bias: bool


def _pair(w, x, b: float, cfg: KernelConfig | None):
    cfg = cfg or KernelConfig()
    w = as_vector(w, "w")
    x = as_vector(x, "x")
    if w.shape[0] != x.shape[0]:
        raise ShapeError(f"yat: length mismatch, w has {w.shape[0]}, x has {x.shape[0]}")
    eps = cfg.resolved_eps(x[None, :])
    s = float(w @ x) + b
    diff = w - x
    dsq = max(float(diff @ diff), 0.0)
    return w, x, s, dsq, dsq + eps


def yat(w, x, cfg: KernelConfig | None = None) -> float:
    """Scalar yat product ``<w,x>^2 / (||w-x||^2 + eps)``; always >= 0."""
    _, _, s, _, denom = _pair(w, x, 0.0, cfg)
    return s * s / denom


def yat_biased(w, x, b: float, cfg: KernelConfig | None = None) -> float:
    """Biased yat product ``(<w,x> + b)^2 / (||w-x||^2 + eps)``."""
    _, _, s, _, denom = _pair(w, x, float(b), cfg)
    return s * s / denom


def yat_grads(w, x, cfg: KernelConfig | None = None):
    """Analytic gradients of ``yat(w, x)`` with respect to ``w`` and ``x``.

    Returns ``(grad_w, grad_x)``. Both vanish when ``<w, x> = 0`` and decay
    like ``1/||x||`` as the input runs away from the weight.
    """
    w, x, s, _, denom = _pair(w, x, 0.0, cfg)
    lead = 2.0 * s / denom
    grad_w = lead * (x - s * (w - x) / denom)
    grad_x = lead * (w - s * (x - w) / denom)
    return grad_w, grad_x


def yat_batch(X, W, bias=None, cfg: KernelConfig | None = None):
    """All-pairs yat products of input rows against weight rows.

    ``X`` is ``B x d``, ``W`` is ``n x d``, ``bias`` (optional) has length
    ``n``. Returns ``(Y, cache)`` where ``Y[i, j] = yat_biased(W[j], X[i],
    bias[j])`` and the cache feeds :func:`yat_batch_backward`.

    The distance matrix comes from one GEMM and two row-norm passes; any
    negative floating-point residue is clamped to zero before ``eps`` is
    added.
    """
    cfg = cfg or KernelConfig()
    X = np.asarray(X)
    W = np.asarray(W)
    P = gemm(X, W)
    eps = cfg.resolved_eps(X)
    r = row_sq_norms(X)
    c = row_sq_norms(W)
    dsq = r[:, None] + c[None, :] - 2.0 * P
    np.maximum(dsq, 0.0, out=dsq)
    if bias is not None:
        bias = np.asarray(bias)
        if bias.ndim != 1 or bias.shape[0] != W.shape[0]:
            raise ShapeError(
                f"yat_batch: bias must have length {W.shape[0]}, got shape {bias.shape}"
            )
        s = P + bias[None, :]
    else:
        s = P
    denom = dsq + eps
    Y = s * s / denom
    return Y, YatBatchCache(s=s, dsq=dsq, denom=denom, has_bias=bias is not None)


def yat_batch_backward(upstream, cache: YatBatchCache, X, W):
    """Chain rule through a batched forward.

    Given the loss gradient with respect to the forward output, returns
    ``(gX, gW, gBias)``; ``gBias`` is ``None`` when the forward ran without
    a bias. Derivation: with ``Y = s^2 / (r + c - 2 p + eps)`` where ``p``
    is the raw inner product and ``s = p + b``,

        dY/dp = 2 s / denom + 2 s^2 / denom^2
        dY/db = 2 s / denom
        dY/dr = dY/dc = -s^2 / denom^2
    """
    upstream = np.asarray(upstream)
    X = np.asarray(X)
    W = np.asarray(W)
    if upstream.shape != cache.s.shape:
        raise ShapeError(
            f"yat_batch_backward: upstream shape {upstream.shape} does not match "
            f"cached forward shape {cache.s.shape}"
        )
    if X.shape[0] != cache.s.shape[0] or W.shape[0] != cache.s.shape[1]:
        raise ShapeError(
            f"yat_batch_backward: X {X.shape} / W {W.shape} inconsistent with "
            f"cache {cache.s.shape}"
        )
    s_over_d = cache.s / cache.denom
    g_lin = upstream * 2.0 * s_over_d          # dL/ds through the numerator
    g_p = g_lin * (1.0 + s_over_d)             # adds the -2p term of the denominator
    g_norm = -upstream * s_over_d * s_over_d   # dL/dr and dL/dc per entry
    gX = g_p @ W + 2.0 * X * np.sum(g_norm, axis=1, keepdims=True)
    gW = g_p.T @ X + 2.0 * W * np.sum(g_norm, axis=0)[:, None]
    gBias = np.sum(g_lin, axis=0) if cache.has_bias else None
    return gX, gW, gBias


def softermax(x, cfg: SquashConfig | None = None) -> np.ndarray:
    """Algebraic normalization ``x_k^n / (eps + sum_i x_i^n)`` for scores >= 0.

    Entries land in [0, 1] and sum to at most 1, with equality only when
    ``eps == 0`` and some score is positive. An all-zero input returns all
    zeros (the sparse-input guard).
    """
    cfg = cfg or SquashConfig()
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("softermax: scores must be non-negative")
    t = x**cfg.n_exp
    total = cfg.eps + float(np.sum(t))
    if total == 0.0:
        return np.zeros_like(t)
    return t / total


def soft_sigmoid(x, n: float):
    """Algebraic sigmoid ``x^n / (1 + x^n)`` mapping [0, inf) onto [0, 1).

    Saturates polynomially rather than exponentially, so large scores keep
    a heavy tail instead of flat-lining.
    """
    if n <= 0:
        raise ValueError(f"soft_sigmoid: n must be positive, got {n}")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("soft_sigmoid: input must be non-negative")
    t = x**n
    out = t / (1.0 + t)
    return float(out) if out.ndim == 0 else out


def soft_tanh(x, n: float):
    """Algebraic tanh ``(x^n - 1) / (x^n + 1)`` mapping [0, inf) onto [-1, 1).

    Computed as ``2 * soft_sigmoid(x, n) - 1`` so the rescaling identity
    holds bit-exactly.
    """
    s = soft_sigmoid(x, n)
    out = 2.0 * np.asarray(s) - 1.0
    return float(out) if out.ndim == 0 else out
