"""FLOP accounting and micro-benchmarks for the batched kernel.

Per-neuron FLOP model (one output element, input width d):

    linear + ReLU        2d + 1
    linear + GeLU        2d + 15
    yat, naive           5d + 1   (separate distance pass)
    yat, optimized       4d + 4   (distance via the reused GEMM identity)

Whole-layer counts for a B x d batch against n units follow the same
bookkeeping: the optimized forward costs ``2Bnd + Bd + nd + 5Bn`` and the
backward ``4Bnd + 6Bn`` plus lower-order norm terms, i.e. the same
``Theta(Bnd)`` order as a linear layer.

Wall-clock numbers are medians over repeats and are reported, not
asserted: absolute throughput is hardware-dependent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .kernel import KernelConfig, yat_batch
from .linalg import make_rng

__all__ = [
    "flops_per_neuron",
    "flop_ratios",
    "forward_flops_yat",
    "forward_flops_linear",
    "peak_transient_bytes",
    "time_op",
    "bench_matched",
    "bench_scaling",
]


def flops_per_neuron(d: int) -> dict:
    return {
        "linear_relu": 2 * d + 1,
        "linear_gelu": 2 * d + 15,
        "yat_naive": 5 * d + 1,
        "yat_optimized": 4 * d + 4,
    }


def flop_ratios(d: int) -> dict:
    """Per-neuron cost of the optimized yat product relative to the baselines."""
    f = flops_per_neuron(d)
    return {
        "yat_vs_linear_relu": f["yat_optimized"] / f["linear_relu"],
        "yat_vs_linear_gelu": f["yat_optimized"] / f["linear_gelu"],
        "yat_naive_vs_linear_relu": f["yat_naive"] / f["linear_relu"],
    }


def forward_flops_yat(B: int, n: int, d: int) -> int:
    """GEMM + row norms + five element-wise passes."""
    return 2 * B * n * d + B * d + n * d + 5 * B * n


def forward_flops_linear(B: int, n: int, d: int, act_cost: int = 1) -> int:
    return 2 * B * n * d + act_cost * B * n


def peak_transient_bytes(B: int, n: int, d: int, itemsize: int = 8) -> int:
    """Live buffer estimate of this implementation's batched forward.

    Five B x n buffers (products, distances, denominators, outputs, one
    arithmetic temporary) plus the two norm vectors.
    """
    return itemsize * (5 * B * n + B + n)


def time_op(fn, repeats: int = 9, warmup: int = 2) -> float:
    """Median wall-clock seconds of ``fn()`` over ``repeats`` runs."""
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _linear_gelu(X, W):
    Z = X @ W.T
    return 0.5 * Z * (1.0 + erf(Z / np.sqrt(2.0)))


@dataclass
class MatchedTiming:
    B: int
    n: int
    d: int
    yat_seconds: float
    linear_gelu_seconds: float

    @property
    def wallclock_ratio(self) -> float:
        return self.yat_seconds / self.linear_gelu_seconds


def bench_matched(B: int, n: int, d: int, seed: int = 0,
                  repeats: int = 9) -> MatchedTiming:
    """Time the batched yat forward against a linear + GeLU forward."""
    rng = make_rng(seed)
    X = rng.normal(size=(B, d))
    W = rng.normal(size=(n, d))
    cfg = KernelConfig()
    yat_t = time_op(lambda: yat_batch(X, W, None, cfg), repeats=repeats)
    lin_t = time_op(lambda: _linear_gelu(X, W), repeats=repeats)
    return MatchedTiming(B=B, n=n, d=d, yat_seconds=yat_t, linear_gelu_seconds=lin_t)


def bench_scaling(base=(256, 256, 256), factor: int = 4, seed: int = 0,
                  repeats: int = 9) -> dict:
    """Wall-clock growth of the batched forward along each axis.

    Returns, per axis, the measured time ratio between the scaled and base
    size; linear Theta(Bnd) scaling predicts a ratio of ``factor``.
    """
    B0, n0, d0 = base
    rng = make_rng(seed)
    cfg = KernelConfig()

    def timed(B, n, d):
        X = rng.normal(size=(B, d))
        W = rng.normal(size=(n, d))
        return time_op(lambda: yat_batch(X, W, None, cfg), repeats=repeats)

    t_base = timed(B0, n0, d0)
    out = {"base": {"B": B0, "n": n0, "d": d0, "seconds": t_base},
           "factor": factor, "axes": {}}
    for axis, shape in (("B", (factor * B0, n0, d0)),
                        ("n", (B0, factor * n0, d0)),
                        ("d", (B0, n0, factor * d0))):
        t = timed(*shape)
        out["axes"][axis] = {"seconds": t, "ratio": t / t_base}
    return out
