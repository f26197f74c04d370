"""Central finite-difference gradient oracle.

Every analytic backward pass in this package is checked against this
oracle. The step size adapts per coordinate, ``h = 1e-6 * max(1, |v|)``,
and errors are reported as the worst relative deviation with an absolute
floor so that genuinely zero gradients compare cleanly.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["central_diff_grad", "max_rel_err", "gradcheck"]


def central_diff_grad(f: Callable[[np.ndarray], float], v: np.ndarray,
                      h_scale: float = 1e-6) -> np.ndarray:
    """Numerical gradient of scalar ``f`` at ``v`` by central differences.

    ``f`` must not mutate its argument; ``v`` is perturbed one coordinate at
    a time with step ``h_scale * max(1, |v_i|)``.
    """
    v = np.asarray(v, dtype=np.float64)
    g = np.zeros_like(v)
    flat = v.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        h = h_scale * max(1.0, abs(flat[i]))
        orig = flat[i]
        flat[i] = orig + h
        fp = f(v)
        flat[i] = orig - h
        fm = f(v)
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def max_rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Worst relative error between two gradients.

    The denominator is floored at a small multiple of the overall gradient
    scale so that coordinates where both gradients vanish do not explode
    the ratio.
    """
    a = np.asarray(analytic, dtype=np.float64).reshape(-1)
    b = np.asarray(numeric, dtype=np.float64).reshape(-1)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), 1e-12)
    denom = np.maximum(np.abs(a) + np.abs(b), 1e-6 * scale)
    return float(np.max(np.abs(a - b) / denom, initial=0.0))


def gradcheck(f: Callable[[np.ndarray], float], v: np.ndarray,
              analytic: np.ndarray, h_scale: float = 1e-6) -> float:
    """Worst relative error of ``analytic`` against central differences of ``f``."""
    return max_rel_err(analytic, central_diff_grad(f, v, h_scale=h_scale))
