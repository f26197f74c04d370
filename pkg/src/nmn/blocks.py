"""Transformer-style blocks: the Aether variant and a classic baseline.

The Aether block is two residual stages with no normalization anywhere:

    r = x + YatAttention(x)
    y = r + Linear(NmnDense(r))

The kernel's bounded responses stand in for LayerNorm. For the ablation
that re-inserts normalization, ``ln_injection`` places a LayerNorm
immediately before ("pre") or immediately after ("post") the NMN layer.

The standard block is the usual pre-LN transformer block with scaled
dot-product attention and a GeLU MLP, kept as a fixed reference for
head-to-head language-model runs.
"""

from __future__ import annotations

import numpy as np

from .attention import YatAttention
from .kernel import KernelConfig
from .layers import Gelu, LayerNorm, Linear, NmnDense

__all__ = ["AetherBlock", "StandardBlock", "make_block"]


class AetherBlock:
    """Residual block of yat attention plus an NMN -> linear MLP."""

    kind = "aether"

    def __init__(self, d_model: int, heads: int, rng: np.random.Generator,
                 cfg: KernelConfig | None = None, ln_injection: str = "none",
                 mlp_ratio: int = 4, dtype=np.float64):
        if ln_injection not in ("none", "pre", "post"):
            raise ValueError(f"ln_injection must be none/pre/post, got {ln_injection!r}")
        cfg = cfg or KernelConfig()
        hidden = mlp_ratio * d_model
        self.ln_injection = ln_injection
        self.attn = YatAttention(d_model, heads, rng, cfg=cfg, causal=True,
                                 score_kind="yat", dtype=dtype)
        self.nmn = NmnDense(d_model, hidden, rng, cfg=cfg, use_bias=True, dtype=dtype)
        self.proj = Linear(hidden, d_model, rng, bias=False, dtype=dtype)
        self.ln = None
        if ln_injection == "none":
            pass
        elif ln_injection == "pre":
            self.ln = LayerNorm(d_model, dtype=dtype)
        else:
            self.ln = LayerNorm(hidden, dtype=dtype)

    def norm_layer_count(self) -> int:
        return 0 if self.ln is None else 1

    def named_params(self):
        ps = [(f"attn.{n}", p) for n, p in self.attn.named_params()]
        ps += [(f"nmn.{n}", p) for n, p in self.nmn.named_params()]
        ps += [(f"proj.{n}", p) for n, p in self.proj.named_params()]
        if self.ln is not None:
            ps += [(f"ln.{n}", p) for n, p in self.ln.named_params()]
        return ps

    def forward(self, X: np.ndarray) -> np.ndarray:
        r = X + self.attn.forward(X)
        h = self.ln.forward(r) if self.ln_injection == "pre" else r
        h = self.nmn.forward(h)
        if self.ln_injection == "post":
            h = self.ln.forward(h)
        return r + self.proj.forward(h)

    def backward(self, G: np.ndarray) -> np.ndarray:
        gh = self.proj.backward(G)
        if self.ln_injection == "post":
            gh = self.ln.backward(gh)
        gr = self.nmn.backward(gh)
        if self.ln_injection == "pre":
            gr = self.ln.backward(gr)
        gr = gr + G
        return gr + self.attn.backward(gr)


class StandardBlock:
    """Classic pre-LN transformer block: LN -> attention, LN -> GeLU MLP."""

    kind = "standard"

    def __init__(self, d_model: int, heads: int, rng: np.random.Generator,
                 mlp_ratio: int = 4, dtype=np.float64):
        hidden = mlp_ratio * d_model
        self.ln1 = LayerNorm(d_model, dtype=dtype)
        self.attn = YatAttention(d_model, heads, rng, causal=True,
                                 score_kind="dot", dtype=dtype)
        self.ln2 = LayerNorm(d_model, dtype=dtype)
        self.fc1 = Linear(d_model, hidden, rng, bias=False, dtype=dtype)
        self.act = Gelu()
        self.fc2 = Linear(hidden, d_model, rng, bias=False, dtype=dtype)

    def norm_layer_count(self) -> int:
        return 2

    def named_params(self):
        ps = [(f"ln1.{n}", p) for n, p in self.ln1.named_params()]
        ps += [(f"attn.{n}", p) for n, p in self.attn.named_params()]
        ps += [(f"ln2.{n}", p) for n, p in self.ln2.named_params()]
        ps += [(f"fc1.{n}", p) for n, p in self.fc1.named_params()]
        ps += [(f"fc2.{n}", p) for n, p in self.fc2.named_params()]
        return ps

    def forward(self, X: np.ndarray) -> np.ndarray:
        a = X + self.attn.forward(self.ln1.forward(X))
        return a + self.fc2.forward(self.act.forward(self.fc1.forward(self.ln2.forward(a))))

    def backward(self, G: np.ndarray) -> np.ndarray:
        ga = self.ln2.backward(self.fc1.backward(self.act.backward(self.fc2.backward(G))))
        ga = ga + G
        return ga + self.ln1.backward(self.attn.backward(ga))


def make_block(kind: str, d_model: int, heads: int, rng: np.random.Generator,
               cfg: KernelConfig | None = None, ln_injection: str = "none",
               dtype=np.float64):
    """Block factory; ``ln_injection`` only applies to the aether kind."""
    if kind == "aether":
        return AetherBlock(d_model, heads, rng, cfg=cfg, ln_injection=ln_injection,
                           dtype=dtype)
    if kind == "standard":
        return StandardBlock(d_model, heads, rng, dtype=dtype)
    raise ValueError(f"unknown block kind {kind!r}")
