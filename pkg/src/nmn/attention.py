"""Multi-head attention scored by the yat kernel.

Per head, queries, keys, and values come from learned projections of the
input sequence. Scores between query ``i`` and key ``j`` are raw yat
products, which are non-negative and carry the kernel's potential-well
geometry; there is no ``1/sqrt(d_h)`` rescaling because the kernel's
dimensional self-normalization takes that role. Rows are normalized with
softmax over the unmasked keys (causal masking removes future keys before
normalization, so masked weights are exactly zero). Softermax row
normalization is available behind ``score_norm="softermax"``.

``score_kind="dot"`` swaps the scores for classic scaled dot products,
which is what the baseline transformer block uses.
"""

from __future__ import annotations

import numpy as np

from .kernel import KernelConfig, SquashConfig, yat_batch, yat_batch_backward
from .layers import Parameter
from .linalg import ShapeError, gaussian_fill

__all__ = ["YatAttention"]


class YatAttention:
    """Multi-head self-attention over a single sequence (L x d_model)."""

    def __init__(self, d_model: int, heads: int, rng: np.random.Generator,
                 cfg: KernelConfig | None = None, causal: bool = True,
                 score_norm: str = "softmax", score_kind: str = "yat",
                 squash: SquashConfig | None = None, dtype=np.float64):
        if d_model % heads != 0:
            raise ShapeError(f"d_model={d_model} not divisible by heads={heads}")
        if score_norm not in ("softmax", "softermax"):
            raise ValueError(f"score_norm must be softmax or softermax, got {score_norm!r}")
        if score_kind not in ("yat", "dot"):
            raise ValueError(f"score_kind must be yat or dot, got {score_kind!r}")
        if score_norm == "softermax" and score_kind != "yat":
            raise ValueError("softermax requires non-negative scores (score_kind='yat')")
        self.d_model = d_model
        self.heads = heads
        self.d_head = d_model // heads
        self.cfg = cfg or KernelConfig()
        self.causal = causal
        self.score_norm = score_norm
        self.score_kind = score_kind
        self.squash = squash or SquashConfig(n_exp=1.0, eps=1e-9)
        sigma = 1.0 / np.sqrt(d_model)
        self.Wq = [Parameter(f"wq{h}", gaussian_fill(rng, d_model, self.d_head, sigma).astype(dtype))
                   for h in range(heads)]
        self.Wk = [Parameter(f"wk{h}", gaussian_fill(rng, d_model, self.d_head, sigma).astype(dtype))
                   for h in range(heads)]
        self.Wv = [Parameter(f"wv{h}", gaussian_fill(rng, d_model, self.d_head, sigma).astype(dtype))
                   for h in range(heads)]
        self.Wo = Parameter("wo", gaussian_fill(rng, d_model, d_model, sigma).astype(dtype))
        self._cache = None

    def named_params(self):
        ps = []
        for h in range(self.heads):
            ps += [(f"wq{h}", self.Wq[h]), (f"wk{h}", self.Wk[h]), (f"wv{h}", self.Wv[h])]
        ps.append(("wo", self.Wo))
        return ps

    def _mask(self, L: int) -> np.ndarray:
        if self.causal:
            return np.tril(np.ones((L, L), dtype=bool))
        return np.ones((L, L), dtype=bool)

    def _normalize(self, S: np.ndarray, mask: np.ndarray):
        """Row-normalize scores over unmasked keys; masked weights are exact zeros."""
        if self.score_norm == "softmax":
            logits = np.where(mask, S, -np.inf)
            logits = logits - logits.max(axis=1, keepdims=True)
            e = np.exp(logits)
            A = e / e.sum(axis=1, keepdims=True)
            return A, None
        # softermax: masked scores drop out of the denominator entirely
        t = np.where(mask, S, 0.0) ** self.squash.n_exp
        t = np.where(mask, t, 0.0)
        Z = self.squash.eps + t.sum(axis=1, keepdims=True)
        A = np.where(Z > 0, t / np.where(Z > 0, Z, 1.0), 0.0)
        return A, Z

    def _normalize_backward(self, gA, A, S, Z, mask):
        if self.score_norm == "softmax":
            gS = A * (gA - np.sum(gA * A, axis=1, keepdims=True))
            return gS
        n = self.squash.n_exp
        inner = gA - np.sum(gA * A, axis=1, keepdims=True)
        if n == 1.0:
            pw = np.ones_like(S)
        else:
            # zero subgradient at S == 0 (only structurally orthogonal pairs land there)
            pw = np.where(S > 0, S, 1.0) ** (n - 1.0)
            pw = np.where(S > 0, pw, 0.0)
        gS = np.where(mask, n * pw * inner / Z, 0.0)
        return gS

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.d_model:
            raise ShapeError(f"attention: expected L x {self.d_model} input, got {X.shape}")
        L = X.shape[0]
        mask = self._mask(L)
        per_head = []
        outs = []
        for h in range(self.heads):
            Q = X @ self.Wq[h].value
            K = X @ self.Wk[h].value
            V = X @ self.Wv[h].value
            if self.score_kind == "yat":
                S, kcache = yat_batch(Q, K, None, self.cfg)
            else:
                S = (Q @ K.T) / np.sqrt(self.d_head)
                kcache = None
            A, Z = self._normalize(S, mask)
            H = A @ V
            per_head.append((Q, K, V, S, A, Z, kcache))
            outs.append(H)
        C = np.concatenate(outs, axis=1)
        out = C @ self.Wo.value
        self._cache = (X, mask, per_head, C)
        return out

    def backward(self, G: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise RuntimeError("YatAttention.backward called before forward")
        X, mask, per_head, C = self._cache
        self.Wo.grad += C.T @ G
        gC = G @ self.Wo.value.T
        gX = np.zeros_like(X)
        dh = self.d_head
        for h in range(self.heads):
            Q, K, V, S, A, Z, kcache = per_head[h]
            gH = gC[:, h * dh:(h + 1) * dh]
            gA = gH @ V.T
            gV = A.T @ gH
            gS = self._normalize_backward(gA, A, S, Z, mask)
            if self.score_kind == "yat":
                gQ, gK, _ = yat_batch_backward(gS, kcache, Q, K)
            else:
                gQ = (gS @ K) / np.sqrt(dh)
                gK = (gS.T @ Q) / np.sqrt(dh)
            self.Wq[h].grad += X.T @ gQ
            self.Wk[h].grad += X.T @ gK
            self.Wv[h].grad += X.T @ gV
            gX += gQ @ self.Wq[h].value.T
            gX += gK @ self.Wk[h].value.T
            gX += gV @ self.Wv[h].value.T
        return gX
