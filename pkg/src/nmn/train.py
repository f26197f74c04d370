"""Training loops for the prototype classifier and the toy language model.

Both loops are deterministic given their seed and emit a
:class:`MetricsLog` whose CSV form is bit-stable across runs. The
classifier loop aborts with a diagnostic if the loss has not come down
after its first fifty steps; the language-model loop records a divergence
flag when validation loss exceeds 10 or turns non-finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import CharCorpus, Dataset, lm_batches
from .kernel import KernelConfig
from .layers import Linear, NmnDense
from .linalg import make_rng
from .model import Model
from .optim import Adam, softmax_xent

__all__ = [
    "TrainConfig",
    "MetricsLog",
    "TrainingDiverged",
    "ClassifierHead",
    "train_classifier",
    "evaluate_classifier",
    "invert_prototypes_eval",
    "LmRun",
    "train_lm",
    "DIVERGENCE_THRESHOLD",
]

DIVERGENCE_THRESHOLD = 10.0


class TrainingDiverged(RuntimeError):
    """Raised when a run fails its early loss-decrease check."""


@dataclass
class TrainConfig:
    """Knobs shared by the training loops.

    ``epochs`` drives the classifier, ``steps`` the language model. The
    only supported schedule is a constant learning rate. ``dtype`` selects
    fp64 (default, used by all verification) or fp32 training.
    """

    epochs: int = 5
    steps: int = 300
    batch_size: int = 128
    seed: int = 0
    lr: float = 1e-3
    lr_schedule: str = "constant"
    dtype: str = "fp64"
    eval_every: int = 25

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr_schedule != "constant":
            raise ValueError(f"unsupported lr schedule {self.lr_schedule!r}")
        if self.dtype not in ("fp64", "fp32"):
            raise ValueError(f"dtype must be fp64 or fp32, got {self.dtype!r}")

    @property
    def np_dtype(self):
        return np.float64 if self.dtype == "fp64" else np.float32


@dataclass
class MetricsLog:
    """Fixed-column run log: step, split, loss, accuracy, prototype_norm_mean, alpha."""

    COLUMNS = ("step", "split", "loss", "accuracy", "prototype_norm_mean", "alpha")
    rows: list = field(default_factory=list)

    def log(self, step: int, split: str, loss: float, accuracy: float = math.nan,
            prototype_norm_mean: float = math.nan, alpha: float = math.nan):
        self.rows.append((int(step), str(split), float(loss), float(accuracy),
                          float(prototype_norm_mean), float(alpha)))

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(",".join(self.COLUMNS) + "\n")
            for step, split, *vals in self.rows:
                f.write(f"{step},{split}," + ",".join(repr(v) for v in vals) + "\n")

    @classmethod
    def read_csv(cls, path) -> "MetricsLog":
        log = cls()
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip().split(",")
            if tuple(header) != cls.COLUMNS:
                raise ValueError(f"unexpected metrics header {header}")
            for line in f:
                if not line.strip():
                    continue
                step, split, *vals = line.strip().split(",")
                log.rows.append((int(step), split, *(float(v) for v in vals)))
        return log

    def split_rows(self, split: str):
        return [r for r in self.rows if r[1] == split]


class ClassifierHead:
    """Single-layer classifier: linear logits or scaled yat-kernel logits.

    The yat head scores inputs against one prototype per class and applies
    the adaptive scale before softmax; the linear head is a plain
    projection. Neither carries a bias, which keeps the sign-flip analysis
    of the prototypes clean: negating the prototypes leaves the yat
    numerator untouched and flips every linear logit.
    """

    def __init__(self, kind: str, in_dim: int, n_classes: int, seed: int = 0,
                 eps: float = 1e-6, dtype=np.float64):
        if kind not in ("nmn", "linear"):
            raise ValueError(f"kind must be 'nmn' or 'linear', got {kind!r}")
        self.kind = kind
        rng = make_rng(seed)
        if kind == "nmn":
            self.layer = NmnDense(in_dim, n_classes, rng, cfg=KernelConfig(eps=eps),
                                  use_bias=False, dtype=dtype)
        else:
            self.layer = Linear(in_dim, n_classes, rng, bias=False, dtype=dtype)

    @property
    def prototypes(self) -> np.ndarray:
        return self.layer.W.value

    @property
    def alpha(self) -> float:
        return float(self.layer.alpha.value) if self.kind == "nmn" else math.nan

    def params(self):
        return [p for _, p in self.layer.named_params()]

    def logits(self, X: np.ndarray) -> np.ndarray:
        return self.layer.forward(X)

    def backward(self, G: np.ndarray):
        self.layer.backward(G)

    def prototype_norm_mean(self) -> float:
        return float(np.mean(np.linalg.norm(self.prototypes, axis=1)))


def evaluate_classifier(head: ClassifierHead, data: Dataset,
                        batch_size: int = 1024) -> float:
    """Top-1 accuracy of the head on a dataset."""
    hits = 0
    for i in range(0, len(data), batch_size):
        logits = head.logits(data.inputs[i:i + batch_size])
        hits += int(np.sum(np.argmax(logits, axis=1) == data.labels[i:i + batch_size]))
    return hits / len(data)


def _early_abort_check(losses):
    """Net loss decrease over the first fifty steps, else abort."""
    if len(losses) == 50 and float(np.mean(losses[40:50])) > losses[0]:
        raise TrainingDiverged(
            "loss failed to decrease over the first 50 steps "
            f"(start {losses[0]:.6f}, recent mean {np.mean(losses[40:50]):.6f}); "
            "check learning rate and data scaling"
        )


def train_classifier(kind: str, train_data: Dataset, cfg: TrainConfig,
                     eval_data: Dataset | None = None, n_classes: int | None = None,
                     eps: float = 1e-6):
    """Train a 1-layer classifier head with Adam; returns (log, head).

    Logs one train row per epoch (mean batch loss, train accuracy, mean
    prototype norm, alpha) and, when ``eval_data`` is given, one eval row.
    """
    if n_classes is None:
        n_classes = int(train_data.labels.max()) + 1
    head = ClassifierHead(kind, train_data.inputs.shape[1], n_classes,
                          seed=cfg.seed, eps=eps, dtype=cfg.np_dtype)
    opt = Adam(head.params(), lr=cfg.lr)
    rng = make_rng(cfg.seed)
    log = MetricsLog()
    X_all = train_data.inputs.astype(cfg.np_dtype, copy=False)
    y_all = train_data.labels
    n = len(train_data)
    losses = []
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for i in range(0, n, cfg.batch_size):
            idx = order[i:i + cfg.batch_size]
            logits = head.logits(X_all[idx])
            loss, g = softmax_xent(logits, y_all[idx])
            opt.zero_grad()
            head.backward(g)
            opt.step()
            step += 1
            epoch_losses.append(loss)
            if len(losses) < 50:
                losses.append(loss)
                _early_abort_check(losses)
        train_acc = evaluate_classifier(head, train_data)
        log.log(epoch + 1, "train", float(np.mean(epoch_losses)), train_acc,
                head.prototype_norm_mean(), head.alpha)
        if eval_data is not None:
            eval_acc = evaluate_classifier(head, eval_data)
            log.log(epoch + 1, "test", math.nan, eval_acc,
                    head.prototype_norm_mean(), head.alpha)
    return log, head


def invert_prototypes_eval(head: ClassifierHead, data: Dataset):
    """Accuracy with the trained prototypes W and with -W."""
    original = evaluate_classifier(head, data)
    head.layer.W.value *= -1.0
    try:
        inverted = evaluate_classifier(head, data)
    finally:
        head.layer.W.value *= -1.0
    return original, inverted


@dataclass
class LmRun:
    """Outcome of one language-model run."""

    log: MetricsLog
    model: Model
    final_val_loss: float
    diverged: bool
    nan_seen: bool
    kind: str


_LM_KINDS = {
    "aether": ("aether", "none"),
    "standard": ("standard", "none"),
    "aether-preln": ("aether", "pre"),
    "aether-postln": ("aether", "post"),
}


def _lm_eval_loss(model: Model, ids: np.ndarray, seq_len: int, n_windows: int) -> float:
    """Mean next-token cross-entropy over evenly spaced validation windows."""
    if ids.size < seq_len + 1:
        raise ValueError("validation split too small for one window")
    starts = np.linspace(0, ids.size - seq_len - 1, n_windows).astype(int)
    losses = []
    for s in starts:
        logits = model.forward(ids[s:s + seq_len])
        loss, _ = softmax_xent(logits, ids[s + 1:s + seq_len + 1])
        losses.append(loss)
    return float(np.mean(losses))


def train_lm(kind: str, corpus: CharCorpus, cfg: TrainConfig, d_model: int = 128,
             n_layers: int = 2, heads: int = 4, seq_len: int = 128,
             eps: float = 1e-6, eval_windows: int = 8) -> LmRun:
    """Train a character-level model of the given kind on a corpus.

    ``kind`` is one of aether, standard, aether-preln, aether-postln.
    Logs train loss per step cadence and validation loss at every
    evaluation; flags the run as diverged when validation loss exceeds
    10 or goes non-finite (a NaN/Inf also stops the run early).
    """
    if kind not in _LM_KINDS:
        raise ValueError(f"unknown lm kind {kind!r}; expected one of {sorted(_LM_KINDS)}")
    block_kind, ln_injection = _LM_KINDS[kind]
    rng = make_rng(cfg.seed)
    model = Model(corpus.vocab_size, d_model, seq_len, n_layers, heads, rng,
                  kind=block_kind, cfg=KernelConfig(eps=eps),
                  ln_injection=ln_injection, dtype=cfg.np_dtype)
    opt = Adam(model.params(), lr=cfg.lr)
    batch_rng = make_rng(cfg.seed + 1)
    batches = lm_batches(corpus.train_ids, seq_len, cfg.batch_size, batch_rng,
                         n_batches=cfg.steps)
    log = MetricsLog()
    diverged = False
    nan_seen = False
    val_loss = _lm_eval_loss(model, corpus.val_ids, seq_len, eval_windows)
    log.log(0, "val", val_loss)
    for step, (inputs, targets) in enumerate(batches, start=1):
        batch_loss = 0.0
        opt.zero_grad()
        for b in range(inputs.shape[0]):
            logits = model.forward(inputs[b])
            loss, g = softmax_xent(logits, targets[b])
            model.backward(g / inputs.shape[0])
            batch_loss += loss / inputs.shape[0]
        if not math.isfinite(batch_loss):
            nan_seen = True
            diverged = True
            log.log(step, "train", batch_loss)
            break
        opt.step()
        if step % cfg.eval_every == 0 or step == cfg.steps:
            log.log(step, "train", batch_loss)
            val_loss = _lm_eval_loss(model, corpus.val_ids, seq_len, eval_windows)
            log.log(step, "val", val_loss)
            if not math.isfinite(val_loss) or val_loss > DIVERGENCE_THRESHOLD:
                diverged = True
                nan_seen = nan_seen or not math.isfinite(val_loss)
                break
    return LmRun(log=log, model=model, final_val_loss=val_loss, diverged=diverged,
                 nan_seen=nan_seen, kind=kind)
