"""Weighted-loss training loop, optimizers, and the finite-difference gradient checker.

Everything is deterministic under a fixed config seed: parameter init,
shuffling, and dropout masks all derive from it through tagged seed
sequences, and gradient/optimizer reductions run in a fixed serial order
(sorted parameter names).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import class_weights as compute_class_weights
from .errors import DataError, TrainingDiverged
from .features import FeatureSample
from .model import (
    LOG_FLOOR,
    Batch,
    FusionModel,
    backward_batch,
    dropout_generator,
    forward_batch,
    init_model,
    make_batch,
)

_SHUFFLE_TAG = 0x5467


@dataclass
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    batch_size: int = 16
    dropout_rate: float = 0.2
    seed: int = 0
    class_weights: dict[int, float] | None = None  # None: inverse frequency from the train set
    early_stop_patience: int = 25
    mode: str = "merged"
    head_activation: str = "identity"
    reduction: str = "mean"  # "sum" exists for the weight/duplicate equivalence property

    def __post_init__(self):
        if self.epochs < 1:
            raise DataError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate >= 0:
            raise DataError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise DataError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.early_stop_patience < 0:
            raise DataError(f"early_stop_patience must be >= 0, got {self.early_stop_patience}")
        if self.optimizer not in ("sgd", "adam"):
            raise DataError(f"unknown optimizer {self.optimizer!r}")
        if self.reduction not in ("mean", "sum"):
            raise DataError(f"unknown reduction {self.reduction!r}")


@dataclass
class TrainReport:
    train_losses: list[float]
    val_losses: list[float]
    val_f1s: list[float]
    best_epoch: int  # 0-based index into the traces
    epochs_run: int
    checkpoint_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "train_losses": self.train_losses,
            "val_losses": self.val_losses,
            "val_f1s": self.val_f1s,
            "best_epoch": self.best_epoch,
            "epochs_run": self.epochs_run,
            "checkpoint_path": self.checkpoint_path,
        }


def weighted_ce_loss(probabilities, label: int, class_weights: dict[int, float]) -> float:
    """-w[label] * log(p[label] + 1e-12); the floor keeps confident-wrong finite."""
    p = float(np.asarray(probabilities)[int(label)])
    return -class_weights[int(label)] * math.log(p + LOG_FLOOR)


def batch_loss(
    model: FusionModel,
    batch: Batch,
    sample_weights: np.ndarray,
    train_mode: bool = False,
    dropout_rng: np.random.Generator | None = None,
    reduction: str = "mean",
):
    """Weighted cross-entropy over a batch; returns (loss, probs, cache)."""
    probs, cache = forward_batch(model, batch, train_mode=train_mode, dropout_rng=dropout_rng)
    B = probs.shape[0]
    p_y = probs[np.arange(B), batch.labels]
    losses = -np.asarray(sample_weights) * np.log(p_y + LOG_FLOOR)
    loss = losses.mean() if reduction == "mean" else losses.sum()
    return float(loss), probs, cache


class Sgd:
    def __init__(self, learning_rate: float):
        self.lr = learning_rate

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name in sorted(grads):
            params[name] -= self.lr * grads[name]


class Adam:
    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for name in sorted(grads):
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            params[name] -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "sgd":
        return Sgd(config.learning_rate)
    return Adam(config.learning_rate)


def _subbatch(batch: Batch, idx: np.ndarray) -> Batch:
    return Batch(
        x=batch.x[idx] if batch.x is not None else None,
        mask=batch.mask[idx] if batch.mask is not None else None,
        meta=batch.meta[idx] if batch.meta is not None else None,
        labels=batch.labels[idx],
        video_ids=[batch.video_ids[i] for i in idx],
    )


def _weights_for(labels: np.ndarray, table: dict[int, float]) -> np.ndarray:
    return np.array([table[int(y)] for y in labels])


def fit(
    train: list[FeatureSample],
    val: list[FeatureSample],
    config: TrainConfig,
) -> tuple[FusionModel, TrainReport]:
    """Train on shuffled mini-batches, early-stop on validation loss.

    The returned model carries the best-validation-loss parameters seen, on
    early stop and on normal completion alike.
    """
    if not train or not val:
        raise DataError("fit needs non-empty train and validation sets")
    labels = [s.label.value for s in train]
    if len(set(labels)) < 2:
        raise DataError("training set must contain both classes")
    weight_table = config.class_weights if config.class_weights is not None else compute_class_weights(labels)

    in_dim = None
    if config.mode != "facial_only":
        in_dim = int(train[0].meta_vec.shape[0])
    model = init_model(
        seed=config.seed,
        in_dim=in_dim,
        mode=config.mode,
        dropout_rate=config.dropout_rate,
        head_activation=config.head_activation,
    )

    from .evaluation import confusion_counts, f1_score  # cycle-free: evaluation defers its import of fit

    train_batch = make_batch(train, config.mode)
    val_batch = make_batch(val, config.mode)
    val_weights = _weights_for(val_batch.labels, weight_table)
    N = len(train)

    optimizer = make_optimizer(config)
    train_losses: list[float] = []
    val_losses: list[float] = []
    val_f1s: list[float] = []
    best_val = math.inf
    best_epoch = -1
    best_params: dict[str, np.ndarray] | None = None
    bad_epochs = 0

    for epoch in range(config.epochs):
        order = np.random.default_rng(
            np.random.SeedSequence([config.seed, _SHUFFLE_TAG, epoch])
        ).permutation(N)
        epoch_loss_sum = 0.0
        for bidx, start in enumerate(range(0, N, config.batch_size)):
            idx = order[start : start + config.batch_size]
            sub = _subbatch(train_batch, idx)
            weights = _weights_for(sub.labels, weight_table)
            rng = (
                dropout_generator(config.seed, epoch, bidx)
                if config.dropout_rate > 0
                else None
            )
            loss, _, cache = batch_loss(
                model, sub, weights, train_mode=True, dropout_rng=rng, reduction=config.reduction
            )
            if not math.isfinite(loss):
                raise TrainingDiverged(epoch, bidx)
            grads = backward_batch(model, sub, cache, weights, reduction=config.reduction)
            optimizer.step(model.params, grads)
            epoch_loss_sum += loss * (len(idx) if config.reduction == "mean" else 1.0)
        train_losses.append(epoch_loss_sum / N if config.reduction == "mean" else epoch_loss_sum)

        val_loss, val_probs, _ = batch_loss(model, val_batch, val_weights)
        if not math.isfinite(val_loss):
            raise TrainingDiverged(epoch, -1)
        preds = np.argmax(val_probs, axis=1)  # argmax ties resolve to class 0
        tp, fp, fn, _ = confusion_counts(val_batch.labels, preds, positive=1)
        val_losses.append(val_loss)
        val_f1s.append(f1_score(tp, fp, fn))

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in model.params.items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > config.early_stop_patience:
                break

    model.params = best_params
    report = TrainReport(
        train_losses=train_losses,
        val_losses=val_losses,
        val_f1s=val_f1s,
        best_epoch=best_epoch,
        epochs_run=len(train_losses),
    )
    return model, report


@dataclass
class GradCheckReport:
    mode: str
    head_activation: str
    dropout_rate: float
    seed: int
    n_params: int
    max_rel_error: float
    worst_param: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_rel_error < self.tolerance)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "head_activation": self.head_activation,
            "dropout_rate": float(self.dropout_rate),
            "seed": int(self.seed),
            "n_params": int(self.n_params),
            "max_rel_error": float(self.max_rel_error),
            "worst_param": self.worst_param,
            "tolerance": float(self.tolerance),
            "passed": self.passed,
        }


_GC_TAG = 0x6C47
_GC_IN_DIM = 6
_GC_SEQ_LEN = 5

# Small fixture class weights keep the loss near 1e-2 so central-difference
# cancellation noise (a few ulp of the loss over 2*eps) stays orders of
# magnitude below tolerance even for parameters whose true gradient sits at
# the 1e-8 floor of the relative-error denominator. Gradients and the noise
# both scale with the loss; the floor does not.
_GC_WEIGHTS = (0.025, 0.011)


def _gradcheck_fixture(seed: int, mode: str):
    from .dataset import Label
    from .features import DeltaSeries

    rng = np.random.default_rng(np.random.SeedSequence([seed, _GC_TAG]))
    samples = []
    for k, (T, label) in enumerate(((_GC_SEQ_LEN, 1), (_GC_SEQ_LEN - 1, 0))):
        channels = rng.uniform(-1.0, 1.0, size=(8, T))
        deltas = DeltaSeries(f"gc{k}", channels, np.zeros(T, dtype=bool))
        meta = rng.normal(size=_GC_IN_DIM)
        samples.append(FeatureSample(f"gc{k}", deltas, meta, Label(label)))
    batch = make_batch(samples, mode)
    weights = np.array([_GC_WEIGHTS[int(v)] for v in batch.labels])
    return batch, weights


def grad_check(
    seed: int,
    mode: str,
    tolerance: float = 1e-4,
    head_activation: str = "identity",
    dropout_rate: float = 0.0,
    corrupt=None,
    eps: float = 1e-5,
) -> GradCheckReport:
    """Analytic vs central finite-difference gradients on a tiny model.

    Covers every parameter entry; a two-sample batch with unequal lengths
    exercises the padding mask, and a nonzero ``dropout_rate`` checks the
    path through dropout masks (held fixed across all loss evaluations). The
    finite-difference loop re-runs only the network stage the perturbed
    tensor feeds (branches, meta, or head) and composes it with the frozen
    outputs of the untouched stages; the stages are the same functions the
    full forward is built from. Failure is reported, never raised;
    ``corrupt`` lets tests damage the analytic gradients to prove the check
    has teeth.
    """
    from .model import LOG_FLOOR, draw_keep_masks, run_branches, run_head, run_meta

    batch, weights = _gradcheck_fixture(seed, mode)
    model = init_model(
        seed=seed,
        in_dim=_GC_IN_DIM,
        mode=mode,
        dropout_rate=dropout_rate,
        head_activation=head_activation,
    )
    train_mode = dropout_rate > 0.0
    keeps = (
        draw_keep_masks(model, len(batch.labels), dropout_generator(seed, 0, 0))
        if train_mode
        else (None, None, None)
    )
    keep_b, keep1, keep2 = keeps

    _, cache = forward_batch(model, batch, train_mode=train_mode, keeps=keeps)
    grads = backward_batch(model, batch, cache, weights)
    if corrupt is not None:
        grads = corrupt(grads)

    p = model.params
    H = model.hidden_size
    B = len(batch.labels)
    rows = np.arange(B)
    y = batch.labels

    def facial_piece() -> np.ndarray:
        out = run_branches(p, batch.x, batch.mask, H)[0]
        if keep_b is not None:
            out = out * keep_b
        return out.reshape(B, -1)

    def meta_piece() -> np.ndarray:
        return run_meta(p, batch.meta, keep1, keep2)[0]

    def merged_of(facial, meta) -> np.ndarray:
        if facial is None:
            return meta
        if meta is None:
            return facial
        return np.concatenate([facial, meta], axis=1)

    def loss_of(merged: np.ndarray) -> float:
        pr, _ = run_head(p, merged, model.head_activation)
        return float(np.mean(-weights * np.log(pr[rows, y] + LOG_FLOOR)))

    base_facial = facial_piece() if model.has_facial else None
    base_meta = meta_piece() if model.has_meta else None

    def loss_for(name: str) -> float:
        if name.startswith("branch_"):
            return loss_of(merged_of(facial_piece(), base_meta))
        if name.startswith("meta_"):
            return loss_of(merged_of(base_facial, meta_piece()))
        return loss_of(cache.merged)

    worst = 0.0
    worst_name = ""
    n_params = 0
    for name in sorted(grads):
        flat = p[name].reshape(-1)
        gflat = grads[name].reshape(-1)
        for i in range(flat.size):
            n_params += 1
            keep = flat[i]
            flat[i] = keep + eps
            lp = loss_for(name)
            flat[i] = keep - eps
            lm = loss_for(name)
            flat[i] = keep
            gn = (lp - lm) / (2.0 * eps)
            ga = gflat[i]
            rel = abs(ga - gn) / max(abs(ga), abs(gn), 1e-8)
            if rel > worst:
                worst = rel
                worst_name = f"{name}[{i}]"
    return GradCheckReport(
        mode=mode,
        head_activation=head_activation,
        dropout_rate=dropout_rate,
        seed=seed,
        n_params=n_params,
        max_rel_error=worst,
        worst_param=worst_name,
        tolerance=tolerance,
    )


def grad_check_suite(
    n_configs: int = 20,
    tolerance: float = 1e-4,
    base_seed: int = 0,
) -> list[GradCheckReport]:
    """Randomized configurations covering all modes, both head activations,
    and dropout on/off; at least one of each combination when n_configs >= 12."""
    modes = ("merged", "facial_only", "meta_only")
    acts = ("identity", "relu")
    reports = []
    for k in range(n_configs):
        mode = modes[k % 3]
        act = acts[(k // 3) % 2]
        dropout = 0.0 if (k // 6) % 2 == 0 else 0.3
        reports.append(
            grad_check(
                seed=base_seed + k,
                mode=mode,
                tolerance=tolerance,
                head_activation=act,
                dropout_rate=dropout,
            )
        )
    return reports
