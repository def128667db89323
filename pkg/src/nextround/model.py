"""The fusion network: 8 per-channel recurrent branches, a meta branch, a binary head.

Every facial channel's delta sequence runs through its own single-layer
recurrent cell (input size 1, hidden size 10, input/forget/output gates and a
tanh candidate); the meta vector runs through two rectified affine layers
(128 then 64); the concatenated outputs feed an affine head over 2 classes
followed by softmax. All forward/backward math is written out by hand in
double precision so gradients can be checked against finite differences.

Parameter tensors live in ``FusionModel.params`` keyed by name; the branch
tensors are stacked across the 8 channels (leading axis C) so a whole batch
advances one time step per numpy call. Gate order along the fused 4H axis is
input, forget, output, candidate (i, f, o, g): the three sigmoid gates sit in
one contiguous block.

Dropout is the inverted kind (kept units scaled by 1/(1-p)) and is applied to
each branch's final hidden output and to both meta hidden activations, never
to inputs or class scores. Masks are drawn from a seeded generator in a fixed
order: branch mask, then first meta layer, then second.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import N_CHANNELS
from .errors import DataError, NumericError
from .features import FeatureSample

MODES = ("merged", "facial_only", "meta_only")
HEAD_ACTIVATIONS = ("relu", "identity")

HIDDEN_SIZE = 10
META_HIDDEN_1 = 128
META_HIDDEN_2 = 64
N_CLASSES = 2

LOG_FLOOR = 1e-12

CHECKPOINT_FORMAT = "nextround-checkpoint"
CHECKPOINT_VERSION = 1

# Domain separation tags for derived random streams.
_INIT_TAG = 0x1217
_DROPOUT_TAG = 0xD0D0


def head_input_dim(mode: str) -> int:
    if mode == "merged":
        return N_CHANNELS * HIDDEN_SIZE + META_HIDDEN_2
    if mode == "facial_only":
        return N_CHANNELS * HIDDEN_SIZE
    if mode == "meta_only":
        return META_HIDDEN_2
    raise DataError(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass
class RecurrentBranchParams:
    """One channel's cell: fused gate weights, gate order i, f, o, g."""

    w_x: np.ndarray  # (4H,) input weights (scalar input per step)
    w_h: np.ndarray  # (4H, H) recurrent weights
    b: np.ndarray  # (4H,)


@dataclass
class MetaBranchParams:
    w1: np.ndarray  # (in_dim, 128)
    b1: np.ndarray  # (128,)
    w2: np.ndarray  # (128, 64)
    b2: np.ndarray  # (64,)


@dataclass
class FusionHeadParams:
    w: np.ndarray  # (D, 2)
    b: np.ndarray  # (2,)


@dataclass
class FusionModel:
    """Parameters plus architecture knobs; tensors live in ``params``.

    The typed accessors (``branches``, ``meta``, ``head``) return views into
    the same arrays, so in-place optimizer updates are visible through them.
    """

    mode: str
    head_activation: str
    dropout_rate: float
    in_dim: int | None
    hidden_size: int = HIDDEN_SIZE
    params: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DataError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.head_activation not in HEAD_ACTIVATIONS:
            raise DataError(f"unknown head_activation {self.head_activation!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise DataError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.mode != "facial_only" and (self.in_dim is None or self.in_dim < 1):
            raise DataError("in_dim must be >= 1 when the meta branch is present")

    @property
    def has_facial(self) -> bool:
        return self.mode != "meta_only"

    @property
    def has_meta(self) -> bool:
        return self.mode != "facial_only"

    @property
    def branches(self) -> list[RecurrentBranchParams]:
        p = self.params
        return [
            RecurrentBranchParams(p["branch_w_x"][c], p["branch_w_h"][c], p["branch_b"][c])
            for c in range(N_CHANNELS)
        ]

    @property
    def meta(self) -> MetaBranchParams | None:
        if not self.has_meta:
            return None
        p = self.params
        return MetaBranchParams(p["meta_w1"], p["meta_b1"], p["meta_w2"], p["meta_b2"])

    @property
    def head(self) -> FusionHeadParams:
        return FusionHeadParams(self.params["head_w"], self.params["head_b"])

    def check_finite(self) -> None:
        for name, arr in self.params.items():
            if not np.all(np.isfinite(arr)):
                raise NumericError(f"non-finite values in parameter {name}")


def init_model(
    seed: int,
    in_dim: int | None = None,
    mode: str = "merged",
    dropout_rate: float = 0.2,
    head_activation: str = "identity",
) -> FusionModel:
    """Seeded uniform init, bounds +-1/sqrt(fan_in) per layer.

    fan_in per layer: branch cells 1 + H (scalar input plus recurrent state),
    first meta layer in_dim, second 128, head the merged dimension of the
    mode. Identical seeds give bitwise-identical parameters.
    """
    model = FusionModel(mode=mode, head_activation=head_activation, dropout_rate=dropout_rate, in_dim=in_dim)
    rng = np.random.default_rng(np.random.SeedSequence([seed, _INIT_TAG]))
    H = HIDDEN_SIZE
    p: dict[str, np.ndarray] = {}
    if model.has_facial:
        bound = 1.0 / np.sqrt(1 + H)
        p["branch_w_x"] = rng.uniform(-bound, bound, size=(N_CHANNELS, 4 * H))
        p["branch_w_h"] = rng.uniform(-bound, bound, size=(N_CHANNELS, 4 * H, H))
        p["branch_b"] = rng.uniform(-bound, bound, size=(N_CHANNELS, 4 * H))
    if model.has_meta:
        b1 = 1.0 / np.sqrt(in_dim)
        p["meta_w1"] = rng.uniform(-b1, b1, size=(in_dim, META_HIDDEN_1))
        p["meta_b1"] = rng.uniform(-b1, b1, size=META_HIDDEN_1)
        b2 = 1.0 / np.sqrt(META_HIDDEN_1)
        p["meta_w2"] = rng.uniform(-b2, b2, size=(META_HIDDEN_1, META_HIDDEN_2))
        p["meta_b2"] = rng.uniform(-b2, b2, size=META_HIDDEN_2)
    D = head_input_dim(mode)
    bh = 1.0 / np.sqrt(D)
    p["head_w"] = rng.uniform(-bh, bh, size=(D, N_CLASSES))
    p["head_b"] = rng.uniform(-bh, bh, size=N_CLASSES)
    model.params = p
    return model


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # exp overflow for very negative x saturates to inf and the quotient to
    # exactly 0.0, which is the right limit; silence only that warning.
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def softmax(a: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; finite input gives finite output."""
    shifted = a - a.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def branch_forward(params: RecurrentBranchParams, seq, mask=None) -> np.ndarray:
    """Run one cell over a scalar sequence from zero state; final hidden state.

    ``mask`` (same length, boolean) skips the state update at False steps, so
    a sequence padded with masked steps ends in exactly the state of the
    unpadded run. This per-sample loop is the reference route the batched
    kernel is checked against.
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 1 or seq.size == 0:
        raise DataError("branch_forward needs a non-empty 1-D sequence")
    if not np.all(np.isfinite(seq)):
        raise DataError("branch_forward: non-finite input")
    if mask is None:
        mask = np.ones(seq.size, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != seq.shape:
        raise DataError("branch_forward: mask length mismatch")
    H = params.w_h.shape[1]
    h = np.zeros(H)
    c = np.zeros(H)
    for t in range(seq.size):
        if not mask[t]:
            continue
        z = params.w_x * seq[t] + params.w_h @ h + params.b
        sig = _sigmoid(z[: 3 * H])
        i, f, o = sig[:H], sig[H : 2 * H], sig[2 * H :]
        g = np.tanh(z[3 * H :])
        c = f * c + i * g
        h = o * np.tanh(c)
    return h


def meta_forward(params: MetaBranchParams, meta_vec) -> np.ndarray:
    """relu(W2 . relu(W1 . x + b1) + b2); eval path, no dropout."""
    x = np.asarray(meta_vec, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != params.w1.shape[0]:
        raise DataError(f"meta vector length {x.shape} does not match in_dim {params.w1.shape[0]}")
    h1 = np.maximum(x @ params.w1 + params.b1, 0.0)
    return np.maximum(h1 @ params.w2 + params.b2, 0.0)


@dataclass
class Batch:
    """Padded, mask-annotated batch ready for the stacked kernels.

    ``x`` is (B, C, T) with zero padding past each sample's true length,
    ``mask`` is (B, T); ``meta`` is (B, in_dim) or None in facial_only mode.
    """

    x: np.ndarray | None
    mask: np.ndarray | None
    meta: np.ndarray | None
    labels: np.ndarray
    video_ids: list[str]


def make_batch(samples: list[FeatureSample], mode: str) -> Batch:
    if not samples:
        raise DataError("empty batch")
    if mode not in MODES:
        raise DataError(f"unknown mode {mode!r}")
    labels = np.array([s.label.value for s in samples], dtype=np.int64)
    ids = [s.video_id for s in samples]
    x = mask = meta = None
    if mode != "meta_only":
        lengths = [len(s.deltas) for s in samples]
        T = max(lengths)
        B = len(samples)
        x = np.zeros((B, N_CHANNELS, T))
        mask = np.zeros((B, T), dtype=bool)
        for b, s in enumerate(samples):
            L = lengths[b]
            x[b, :, :L] = s.deltas.channels
            mask[b, :L] = True
    if mode != "facial_only":
        dims = {s.meta_vec.shape[0] for s in samples}
        if len(dims) != 1:
            raise DataError(f"inconsistent meta vector lengths in batch: {sorted(dims)}")
        meta = np.stack([s.meta_vec for s in samples]).astype(np.float64)
    return Batch(x=x, mask=mask, meta=meta, labels=labels, video_ids=ids)


@dataclass
class ForwardCache:
    """Everything the backward pass reuses from one forward call."""

    train_mode: bool
    gates: np.ndarray | None  # (T, B, C, 4H) post-activation i,f,o,g
    h_seq: np.ndarray | None  # (T+1, B, C, H)
    c_seq: np.ndarray | None  # (T+1, B, C, H)
    branch_out: np.ndarray | None  # (B, C, H) pre-dropout final states
    branch_keep: np.ndarray | None  # dropout scale mask, (B, C, H)
    z1: np.ndarray | None  # (B, 128) pre-activation
    h1d: np.ndarray | None  # (B, 128) post relu+dropout
    keep1: np.ndarray | None
    z2: np.ndarray | None  # (B, 64)
    h2d: np.ndarray | None  # (B, 64)
    keep2: np.ndarray | None
    merged: np.ndarray  # (B, D)
    a_pre: np.ndarray  # (B, 2)
    probs: np.ndarray  # (B, 2)


def _dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    # Inverted dropout: kept units scaled so the expectation matches eval mode.
    keep = (rng.random(shape) >= rate).astype(np.float64)
    return keep / (1.0 - rate)


def draw_keep_masks(model: FusionModel, batch_size: int, rng: np.random.Generator):
    """The three dropout masks of one train-mode forward, in draw order."""
    rate = model.dropout_rate
    H = model.hidden_size
    keep_b = _dropout_mask(rng, (batch_size, N_CHANNELS, H), rate) if model.has_facial else None
    keep1 = _dropout_mask(rng, (batch_size, META_HIDDEN_1), rate) if model.has_meta else None
    keep2 = _dropout_mask(rng, (batch_size, META_HIDDEN_2), rate) if model.has_meta else None
    return keep_b, keep1, keep2


def run_branches(params: dict[str, np.ndarray], x: np.ndarray, mask: np.ndarray, H: int, collect: bool = False):
    """Advance all branches over the batch; returns (final_h, gates, h_seq, c_seq).

    The sequence caches are only assembled when ``collect`` is set (they are
    backward-pass material); the plain loss path skips them.
    """
    B, C, T = x.shape
    w_x, w_h, b = params["branch_w_x"], params["branch_w_h"], params["branch_b"]
    h = np.zeros((B, C, H))
    c = np.zeros((B, C, H))
    gates = np.empty((T, B, C, 4 * H)) if collect else None
    h_seq = np.zeros((T + 1, B, C, H)) if collect else None
    c_seq = np.zeros((T + 1, B, C, H)) if collect else None
    H3 = 3 * H
    for t in range(T):
        z = x[:, :, t, None] * w_x + np.einsum("bch,cgh->bcg", h, w_h) + b
        sig = _sigmoid(z[:, :, :H3])
        i = sig[:, :, :H]
        f = sig[:, :, H : 2 * H]
        o = sig[:, :, 2 * H :]
        g = np.tanh(z[:, :, H3:])
        c_new = f * c + i * g
        h_new = o * np.tanh(c_new)
        m = mask[:, t][:, None, None]
        h = np.where(m, h_new, h)
        c = np.where(m, c_new, c)
        if collect:
            gates[t, :, :, :H3] = sig
            gates[t, :, :, H3:] = g
            h_seq[t + 1] = h
            c_seq[t + 1] = c
    return h, gates, h_seq, c_seq


def _affine(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    # einsum (unoptimized) reduces each row in a fixed order regardless of how
    # many rows the batch has; BLAS matmul picks different kernels for B=1 vs
    # B>1, which would break bitwise padding equivalence across batch sizes
    return np.einsum("bd,dk->bk", x, w) + b


def run_meta(params: dict[str, np.ndarray], meta: np.ndarray, keep1, keep2):
    """Two rectified affine layers with optional precomputed dropout masks;
    returns (h2d, z1, h1d, z2)."""
    z1 = _affine(meta, params["meta_w1"], params["meta_b1"])
    h1 = np.maximum(z1, 0.0)
    h1d = h1 * keep1 if keep1 is not None else h1
    z2 = _affine(h1d, params["meta_w2"], params["meta_b2"])
    h2 = np.maximum(z2, 0.0)
    h2d = h2 * keep2 if keep2 is not None else h2
    return h2d, z1, h1d, z2


def run_head(params: dict[str, np.ndarray], merged: np.ndarray, head_activation: str):
    """Affine head, optional rectifier, softmax; returns (probs, a_pre)."""
    a_pre = _affine(merged, params["head_w"], params["head_b"])
    a = np.maximum(a_pre, 0.0) if head_activation == "relu" else a_pre
    return softmax(a), a_pre


def forward_batch(
    model: FusionModel,
    batch: Batch,
    train_mode: bool = False,
    dropout_rng: np.random.Generator | None = None,
    keeps=None,
) -> tuple[np.ndarray, ForwardCache]:
    """Advance the whole batch through the network; returns (probs (B,2), cache).

    ``keeps`` injects precomputed dropout masks (the gradient checker uses
    this to hold masks fixed); normally they are drawn from ``dropout_rng``.
    """
    H = model.hidden_size
    p = model.params
    use_dropout = train_mode and model.dropout_rate > 0.0
    if use_dropout and keeps is None:
        if dropout_rng is None:
            raise DataError("train-mode forward with dropout needs a dropout generator")
        keeps = draw_keep_masks(model, len(batch.labels), dropout_rng)
    keep_b, keep1, keep2 = keeps if use_dropout else (None, None, None)

    gates = h_seq = c_seq = branch_out = None
    z1 = h1d = z2 = h2d = None
    pieces = []

    if model.has_facial:
        if batch.x is None:
            raise DataError(f"mode {model.mode!r} needs facial channels but the batch has none")
        B = batch.x.shape[0]
        branch_out, gates, h_seq, c_seq = run_branches(p, batch.x, batch.mask, H, collect=True)
        dropped = branch_out * keep_b if keep_b is not None else branch_out
        pieces.append(dropped.reshape(B, N_CHANNELS * H))

    if model.has_meta:
        if batch.meta is None:
            raise DataError(f"mode {model.mode!r} needs meta vectors but the batch has none")
        if batch.meta.shape[1] != model.in_dim:
            raise DataError(f"meta vector length {batch.meta.shape[1]} does not match model in_dim {model.in_dim}")
        h2d, z1, h1d, z2 = run_meta(p, batch.meta, keep1, keep2)
        pieces.append(h2d)

    merged = pieces[0] if len(pieces) == 1 else np.concatenate(pieces, axis=1)
    probs, a_pre = run_head(p, merged, model.head_activation)
    cache = ForwardCache(
        train_mode=train_mode,
        gates=gates,
        h_seq=h_seq,
        c_seq=c_seq,
        branch_out=branch_out,
        branch_keep=keep_b,
        z1=z1,
        h1d=h1d,
        keep1=keep1,
        z2=z2,
        h2d=h2d,
        keep2=keep2,
        merged=merged,
        a_pre=a_pre,
        probs=probs,
    )
    return probs, cache


def backward_batch(
    model: FusionModel,
    batch: Batch,
    cache: ForwardCache,
    sample_weights: np.ndarray,
    reduction: str = "mean",
) -> dict[str, np.ndarray]:
    """Analytic gradients of the weighted cross-entropy batch loss.

    The loss being differentiated is
    ``red . sum_b w_b . (-log(p_b[y_b] + 1e-12))`` with ``red`` 1/B for mean
    reduction and 1 for sum; the log floor is part of the differentiated
    expression so finite differences agree to first order.
    """
    if reduction not in ("mean", "sum"):
        raise DataError(f"unknown reduction {reduction!r}")
    p = model.params
    H = model.hidden_size
    B = cache.probs.shape[0]
    y = batch.labels
    w = np.asarray(sample_weights, dtype=np.float64)
    red = 1.0 / B if reduction == "mean" else 1.0

    probs = cache.probs
    p_y = probs[np.arange(B), y]
    onehot = np.zeros_like(probs)
    onehot[np.arange(B), y] = 1.0
    # dL/da = red * w * p_y/(p_y + floor) * (p - onehot)
    coeff = red * w * (p_y / (p_y + LOG_FLOOR))
    da = coeff[:, None] * (probs - onehot)
    if model.head_activation == "relu":
        da = da * (cache.a_pre > 0.0)

    grads: dict[str, np.ndarray] = {}
    grads["head_w"] = cache.merged.T @ da
    grads["head_b"] = da.sum(axis=0)
    dmerged = da @ p["head_w"].T

    offset = 0
    if model.has_facial:
        C = N_CHANNELS
        width = C * H
        dbranch = dmerged[:, :width].reshape(B, C, H)
        offset = width
        if cache.branch_keep is not None:
            dbranch = dbranch * cache.branch_keep

        x, mask = batch.x, batch.mask
        T = x.shape[2]
        w_h = p["branch_w_h"]
        gw_x = np.zeros_like(p["branch_w_x"])
        gw_h = np.zeros_like(w_h)
        gb = np.zeros_like(p["branch_b"])
        dh = dbranch
        dc = np.zeros_like(dbranch)
        H3 = 3 * H
        for t in range(T - 1, -1, -1):
            gates_t = cache.gates[t]
            i = gates_t[:, :, :H]
            f = gates_t[:, :, H : 2 * H]
            o = gates_t[:, :, 2 * H : H3]
            g = gates_t[:, :, H3:]
            c_prev = cache.c_seq[t]
            tc = np.tanh(cache.c_seq[t + 1])
            m = mask[:, t][:, None, None]

            do = dh * tc
            dct = dc + dh * o * (1.0 - tc * tc)
            dz = np.concatenate(
                [
                    dct * g * i * (1.0 - i),
                    dct * c_prev * f * (1.0 - f),
                    do * o * (1.0 - o),
                    dct * i * (1.0 - g * g),
                ],
                axis=-1,
            )
            dz = np.where(m, dz, 0.0)
            gw_x += np.einsum("bcg,bc->cg", dz, x[:, :, t])
            gw_h += np.einsum("bcg,bch->cgh", dz, cache.h_seq[t])
            gb += dz.sum(axis=0)
            dh = np.where(m, np.einsum("bcg,cgh->bch", dz, w_h), dh)
            dc = np.where(m, dct * f, dc)
        grads["branch_w_x"] = gw_x
        grads["branch_w_h"] = gw_h
        grads["branch_b"] = gb

    if model.has_meta:
        dh2d = dmerged[:, offset:]
        dh2 = dh2d * cache.keep2 if cache.keep2 is not None else dh2d
        dz2 = dh2 * (cache.z2 > 0.0)
        grads["meta_w2"] = cache.h1d.T @ dz2
        grads["meta_b2"] = dz2.sum(axis=0)
        dh1d = dz2 @ p["meta_w2"].T
        dh1 = dh1d * cache.keep1 if cache.keep1 is not None else dh1d
        dz1 = dh1 * (cache.z1 > 0.0)
        grads["meta_w1"] = batch.meta.T @ dz1
        grads["meta_b1"] = dz1.sum(axis=0)

    return grads


def dropout_generator(dropout_seed: int, *context: int) -> np.random.Generator:
    """Dropout stream for one forward call; extra ints separate epoch/batch."""
    return np.random.default_rng(np.random.SeedSequence([int(dropout_seed), _DROPOUT_TAG, *map(int, context)]))


def fusion_forward(
    model: FusionModel,
    sample: FeatureSample,
    train_mode: bool = False,
    dropout_seed: int = 0,
) -> tuple[np.ndarray, ForwardCache]:
    """Single-sample forward; probabilities (2,) plus the backward cache."""
    batch = make_batch([sample], model.mode)
    rng = dropout_generator(dropout_seed) if train_mode and model.dropout_rate > 0 else None
    probs, cache = forward_batch(model, batch, train_mode=train_mode, dropout_rng=rng)
    return probs[0], cache


def fusion_backward(
    model: FusionModel,
    sample: FeatureSample,
    label: int,
    class_weight: float,
    cache: ForwardCache,
) -> dict[str, np.ndarray]:
    """Single-sample gradients of the weighted cross-entropy loss."""
    batch = make_batch([sample], model.mode)
    if int(label) != int(batch.labels[0]):
        batch.labels[0] = int(label)
    return backward_batch(model, batch, cache, np.array([class_weight]), reduction="sum")


def _params_to_jsonable(params: dict[str, np.ndarray]) -> dict:
    return {name: arr.tolist() for name, arr in sorted(params.items())}


def save_checkpoint(model: FusionModel, path: str, seed: int, extras: dict | None = None) -> None:
    """Write the model as one JSON document; floats use repr round-tripping,
    so load followed by save is byte-identical."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": {
            "mode": model.mode,
            "head_activation": model.head_activation,
            "dropout_rate": model.dropout_rate,
            "hidden_size": model.hidden_size,
            "in_dim": model.in_dim,
            "seed": seed,
        },
        "params": _params_to_jsonable(model.params),
    }
    if extras:
        doc["extras"] = extras
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_checkpoint(path: str) -> tuple[FusionModel, int, dict]:
    """Read a checkpoint; returns (model, seed, extras)."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{path}: not a model checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {doc.get('version')!r}")
    cfg = doc["config"]
    model = FusionModel(
        mode=cfg["mode"],
        head_activation=cfg["head_activation"],
        dropout_rate=cfg["dropout_rate"],
        in_dim=cfg["in_dim"],
        hidden_size=cfg["hidden_size"],
    )
    model.params = {name: np.asarray(arr, dtype=np.float64) for name, arr in doc["params"].items()}
    expected = set(_expected_param_names(model))
    if set(model.params) != expected:
        raise DataError(f"{path}: parameter set mismatch (got {sorted(model.params)}, want {sorted(expected)})")
    model.check_finite()
    return model, cfg["seed"], doc.get("extras", {})


def _expected_param_names(model: FusionModel) -> list[str]:
    names = ["head_w", "head_b"]
    if model.has_facial:
        names += ["branch_w_x", "branch_w_h", "branch_b"]
    if model.has_meta:
        names += ["meta_w1", "meta_b1", "meta_w2", "meta_b2"]
    return names
