"""Differentiable layers with explicit forward caches and analytic backwards.

Layers here follow one small protocol: ``forward(X)`` returns the output
and stashes whatever the backward needs on the instance, ``backward(G)``
takes the upstream gradient, accumulates parameter gradients, and returns
the input gradient. ``named_params()`` lists ``(name, Parameter)`` pairs.

The NMN dense layer is the package's reason to exist: each unit scores the
input with a biased yat product against its prototype row, and the whole
layer is rescaled by ``s = (n / log(1 + n))**alpha`` with a learnable
``alpha``. There is no activation function and no normalization anywhere
in it; the kernel's denominator carries the normalization.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from .kernel import KernelConfig, yat_batch, yat_batch_backward
from .linalg import ShapeError, gaussian_fill

__all__ = ["Parameter", "NmnDense", "Linear", "LayerNorm", "Gelu"]

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Parameter:
    """A trainable tensor paired with its accumulated gradient."""

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self):
        self.grad[...] = 0.0

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.value.shape})"


class NmnDense:
    """Dense layer of biased yat units with an adaptive output scale.

    Unit ``j`` holds a prototype row ``W[j]`` and inner bias ``b[j]`` and
    responds with ``(W[j]^T x + b[j])^2 / (||W[j] - x||^2 + eps)``. The
    response matrix is multiplied by ``s = (n / log(1+n))**alpha`` where
    ``n`` is the unit count; ``alpha`` starts at 1 and is trained like any
    other parameter. Kernel responses are bounded, so the scale is what
    lets downstream softmax layers sharpen.
    """

    def __init__(self, in_dim: int, units: int, rng: np.random.Generator,
                 cfg: KernelConfig | None = None, use_bias: bool = True,
                 alpha_init: float = 1.0, dtype=np.float64):
        self.in_dim = in_dim
        self.units = units
        self.cfg = cfg or KernelConfig()
        sigma = 1.0 / np.sqrt(in_dim)
        self.W = Parameter("w", gaussian_fill(rng, units, in_dim, sigma).astype(dtype))
        self.bias = Parameter("bias", np.zeros(units, dtype=dtype)) if use_bias else None
        self.alpha = Parameter("alpha", np.asarray(alpha_init, dtype=dtype))
        # base of the scale law; log is natural
        self._scale_base = units / np.log1p(units)
        self._cache = None

    def scale(self) -> float:
        """Current output scale ``(n / log(1+n))**alpha``."""
        return float(self._scale_base ** float(self.alpha.value))

    def named_params(self):
        ps = [("w", self.W), ("alpha", self.alpha)]
        if self.bias is not None:
            ps.insert(1, ("bias", self.bias))
        return ps

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.in_dim:
            raise ShapeError(f"NmnDense: expected B x {self.in_dim} input, got {X.shape}")
        bias = self.bias.value if self.bias is not None else None
        K, kcache = yat_batch(X, self.W.value, bias, self.cfg)
        s = self.scale()
        self._cache = (X, K, kcache, s)
        return s * K

    def backward(self, G: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise RuntimeError("NmnDense.backward called before forward")
        X, K, kcache, s = self._cache
        if G.shape != K.shape:
            raise ShapeError(f"NmnDense: upstream shape {G.shape} != forward shape {K.shape}")
        # d out / d alpha = out * log(scale_base)
        self.alpha.grad += np.sum(G * K) * s * np.log(self._scale_base)
        gX, gW, gBias = yat_batch_backward(G * s, kcache, X, self.W.value)
        self.W.grad += gW
        if self.bias is not None:
            self.bias.grad += gBias
        return gX


class Linear:
    """Plain projection ``Y = X W^T (+ b)`` with weights stored out x in."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator,
                 bias: bool = False, dtype=np.float64):
        self.in_dim = in_dim
        self.out_dim = out_dim
        sigma = 1.0 / np.sqrt(in_dim)
        self.W = Parameter("w", gaussian_fill(rng, out_dim, in_dim, sigma).astype(dtype))
        self.bias = Parameter("bias", np.zeros(out_dim, dtype=dtype)) if bias else None
        self._cache = None

    def named_params(self):
        ps = [("w", self.W)]
        if self.bias is not None:
            ps.append(("bias", self.bias))
        return ps

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.in_dim:
            raise ShapeError(f"Linear: expected B x {self.in_dim} input, got {X.shape}")
        self._cache = X
        Y = X @ self.W.value.T
        if self.bias is not None:
            Y = Y + self.bias.value
        return Y

    def backward(self, G: np.ndarray) -> np.ndarray:
        X = self._cache
        self.W.grad += G.T @ X
        if self.bias is not None:
            self.bias.grad += G.sum(axis=0)
        return G @ self.W.value


class LayerNorm:
    """Per-row normalization with learned gain and shift (baseline blocks only)."""

    def __init__(self, dim: int, dtype=np.float64, eps: float = 1e-5):
        self.dim = dim
        self.eps = eps
        self.gain = Parameter("gain", np.ones(dim, dtype=dtype))
        self.shift = Parameter("shift", np.zeros(dim, dtype=dtype))
        self._cache = None

    def named_params(self):
        return [("gain", self.gain), ("shift", self.shift)]

    def forward(self, X: np.ndarray) -> np.ndarray:
        mu = X.mean(axis=1, keepdims=True)
        var = X.var(axis=1, keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (X - mu) * inv
        self._cache = (xhat, inv)
        return xhat * self.gain.value + self.shift.value

    def backward(self, G: np.ndarray) -> np.ndarray:
        xhat, inv = self._cache
        self.gain.grad += np.sum(G * xhat, axis=0)
        self.shift.grad += np.sum(G, axis=0)
        gh = G * self.gain.value
        n = xhat.shape[1]
        return (inv / n) * (
            n * gh
            - gh.sum(axis=1, keepdims=True)
            - xhat * np.sum(gh * xhat, axis=1, keepdims=True)
        )


class Gelu:
    """Exact (erf-form) GeLU, used only by the baseline transformer block."""

    def __init__(self):
        self._cache = None

    def named_params(self):
        return []

    def forward(self, X: np.ndarray) -> np.ndarray:
        self._cache = X
        return 0.5 * X * (1.0 + erf(X * _INV_SQRT2))

    def backward(self, G: np.ndarray) -> np.ndarray:
        X = self._cache
        cdf = 0.5 * (1.0 + erf(X * _INV_SQRT2))
        pdf = np.exp(-0.5 * X * X) * _INV_SQRT_2PI
        return G * (cdf + X * pdf)
