"""Loss and optimizer: stabilized softmax cross-entropy and Adam.

Both are fully deterministic: two runs from the same parameters and
gradients produce bit-identical trajectories.
"""

from __future__ import annotations

import numpy as np

from .linalg import ShapeError

__all__ = ["softmax_xent", "Adam"]


def softmax_xent(logits, targets):
    """Mean negative log-likelihood of integer targets under row softmax.

    Returns ``(loss, grad)`` with ``grad = (softmax - onehot) / B``. Logits
    are max-shifted per row before exponentiation.
    """
    logits = np.asarray(logits)
    targets = np.asarray(targets)
    if logits.ndim != 2:
        raise ShapeError(f"softmax_xent: logits must be 2-D, got {logits.shape}")
    B, C = logits.shape
    if targets.shape != (B,):
        raise ShapeError(f"softmax_xent: targets must have shape ({B},), got {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= C):
        raise ValueError(f"softmax_xent: target id out of range [0, {C})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    Z = e.sum(axis=1, keepdims=True)
    p = e / Z
    log_p = shifted - np.log(Z)
    loss = -float(np.mean(log_p[np.arange(B), targets]))
    grad = p.copy()
    grad[np.arange(B), targets] -= 1.0
    grad /= B
    return loss, grad.astype(logits.dtype, copy=False)


class Adam:
    """Bias-corrected Adam over a list of ``Parameter`` objects.

    Weight decay, when nonzero, is decoupled (applied directly to the
    values, not through the moments).
    """

    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, weight_decay: float = 0.0):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self._m = [np.zeros_like(p.value) for p in self.params]
        self._v = [np.zeros_like(p.value) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            if g.shape != p.value.shape:
                raise ShapeError(
                    f"adam: gradient shape {g.shape} != parameter shape {p.value.shape} "
                    f"for {p.name!r}"
                )
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / (1.0 - b1**t)
            v_hat = v / (1.0 - b2**t)
            if self.weight_decay:
                p.value *= 1.0 - self.lr * self.weight_decay
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
