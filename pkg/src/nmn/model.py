"""Sequence model: embeddings, a stack of blocks, and an unembedding.

The model processes one token sequence at a time (``L`` ids in, ``L x V``
logits out). Parameters live in a flat registry of uniquely named tensors,
which is what the optimizer walks and what checkpoints serialize. The
unembedding can be tied to the token embedding, in which case it does not
appear in the registry separately.
"""

from __future__ import annotations

import numpy as np

from .blocks import make_block
from .kernel import KernelConfig
from .linalg import ShapeError, gaussian_fill
from .layers import Parameter

__all__ = ["Model"]


class Model:
    """Decoder-only language model over a fixed vocabulary."""

    def __init__(self, vocab_size: int, d_model: int, max_len: int, n_layers: int,
                 heads: int, rng: np.random.Generator, kind: str = "aether",
                 cfg: KernelConfig | None = None, ln_injection: str = "none",
                 tied: bool = False, emb_sigma: float = 0.01, dtype=np.float64):
        self.vocab_size = vocab_size
        self.d_model = d_model
        self.max_len = max_len
        self.kind = kind
        self.tied = tied
        sigma = 1.0 / np.sqrt(d_model)
        # small embedding init keeps the untrained model near the uniform predictor
        self.tok_emb = Parameter("tok_emb", gaussian_fill(rng, vocab_size, d_model, emb_sigma).astype(dtype))
        self.pos_emb = Parameter("pos_emb", gaussian_fill(rng, max_len, d_model, emb_sigma).astype(dtype))
        self.blocks = [make_block(kind, d_model, heads, rng, cfg=cfg,
                                  ln_injection=ln_injection, dtype=dtype)
                       for _ in range(n_layers)]
        if tied:
            self.unembed = None
        else:
            self.unembed = Parameter("unembed", gaussian_fill(rng, d_model, vocab_size, sigma).astype(dtype))
        self._cache = None

    def norm_layer_count(self) -> int:
        """Number of normalization layers in the whole stack."""
        return sum(b.norm_layer_count() for b in self.blocks)

    def named_params(self):
        """Flat registry: every trainable tensor exactly once, stable order."""
        ps = [("tok_emb", self.tok_emb), ("pos_emb", self.pos_emb)]
        for i, b in enumerate(self.blocks):
            ps += [(f"blocks.{i}.{n}", p) for n, p in b.named_params()]
        if self.unembed is not None:
            ps.append(("unembed", self.unembed))
        return ps

    def params(self):
        return [p for _, p in self.named_params()]

    def zero_grad(self):
        for p in self.params():
            p.zero_grad()

    def forward(self, ids) -> np.ndarray:
        ids = np.asarray(ids)
        if ids.ndim != 1:
            raise ShapeError(f"model: expected a 1-D id sequence, got shape {ids.shape}")
        if ids.size > self.max_len:
            raise ValueError(f"sequence length {ids.size} exceeds max_len {self.max_len}")
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise ValueError(
                f"token id out of range [0, {self.vocab_size}): "
                f"min={ids.min()}, max={ids.max()}"
            )
        L = ids.size
        X = self.tok_emb.value[ids] + self.pos_emb.value[:L]
        for b in self.blocks:
            X = b.forward(X)
        W_u = self.tok_emb.value.T if self.tied else self.unembed.value
        logits = X @ W_u
        self._cache = (ids, X)
        return logits

    def backward(self, g_logits: np.ndarray):
        """Accumulate gradients from logit gradients into the registry."""
        if self._cache is None:
            raise RuntimeError("Model.backward called before forward")
        ids, X_final = self._cache
        if self.tied:
            self.tok_emb.grad += (X_final.T @ g_logits).T
            gX = g_logits @ self.tok_emb.value
        else:
            self.unembed.grad += X_final.T @ g_logits
            gX = g_logits @ self.unembed.value.T
        for b in reversed(self.blocks):
            gX = b.backward(gX)
        np.add.at(self.tok_emb.grad, ids, gX)
        self.pos_emb.grad[:ids.size] += gX

    def state_dict(self):
        return {name: p.value.copy() for name, p in self.named_params()}

    def load_state_dict(self, sd):
        for name, p in self.named_params():
            if name not in sd:
                raise KeyError(f"checkpoint missing tensor {name!r}")
            v = np.asarray(sd[name])
            if tuple(v.shape) != tuple(p.value.shape):
                raise ShapeError(
                    f"tensor {name!r}: checkpoint shape {v.shape} != model shape {p.value.shape}"
                )
            p.value[...] = v.astype(p.value.dtype)
