import json

import numpy as np
import pytest

from nextround.dataset import Label
from nextround.errors import DataError
from nextround.features import DeltaSeries, FeatureSample
from nextround.model import (
    HIDDEN_SIZE,
    MetaBranchParams,
    RecurrentBranchParams,
    branch_forward,
    backward_batch,
    dropout_generator,
    forward_batch,
    fusion_backward,
    fusion_forward,
    head_input_dim,
    init_model,
    load_checkpoint,
    make_batch,
    meta_forward,
    save_checkpoint,
    softmax,
)


def make_sample(rng, T=12, in_dim=6, label=None, vid="v"):
    channels = rng.uniform(-1.0, 1.0, size=(8, T))
    deltas = DeltaSeries(vid, channels, np.zeros(T, dtype=bool))
    meta = rng.normal(size=in_dim)
    value = int(rng.integers(0, 2)) if label is None else label
    return FeatureSample(vid, deltas, meta, Label(value))


def test_head_input_dims():
    assert head_input_dim("merged") == 144
    assert head_input_dim("facial_only") == 80
    assert head_input_dim("meta_only") == 64


def test_init_model_deterministic_and_bounded():
    a = init_model(seed=5, in_dim=22, mode="merged")
    b = init_model(seed=5, in_dim=22, mode="merged")
    c = init_model(seed=6, in_dim=22, mode="merged")
    assert sorted(a.params) == sorted(b.params)
    for name in a.params:
        assert np.array_equal(a.params[name], b.params[name])
    assert any(not np.array_equal(a.params[n], c.params[n]) for n in a.params)
    assert a.params["head_w"].shape == (144, 2)
    bound = 1.0 / np.sqrt(144)
    assert np.all(np.abs(a.params["head_w"]) <= bound)
    assert np.all(np.abs(a.params["branch_w_h"]) <= 1.0 / np.sqrt(11))


def test_init_model_mode_param_sets():
    facial = init_model(seed=0, mode="facial_only")
    assert "meta_w1" not in facial.params and "branch_w_x" in facial.params
    assert facial.params["head_w"].shape == (80, 2)
    meta = init_model(seed=0, in_dim=9, mode="meta_only")
    assert "branch_w_x" not in meta.params and "meta_w1" in meta.params
    assert meta.params["head_w"].shape == (64, 2)


def test_init_model_rejects_bad_args():
    with pytest.raises(DataError, match="dropout_rate"):
        init_model(seed=0, in_dim=5, dropout_rate=1.0)
    with pytest.raises(DataError, match="in_dim"):
        init_model(seed=0, in_dim=None, mode="merged")
    with pytest.raises(DataError, match="unknown mode"):
        init_model(seed=0, in_dim=5, mode="both")


def test_branch_forward_zero_fixed_point():
    H = HIDDEN_SIZE
    params = RecurrentBranchParams(
        w_x=np.random.default_rng(0).normal(size=4 * H),
        w_h=np.random.default_rng(1).normal(size=(4 * H, H)),
        b=np.zeros(4 * H),
    )
    out = branch_forward(params, np.zeros(7))
    assert np.array_equal(out, np.zeros(H))


def test_branch_forward_state_evolves():
    rng = np.random.default_rng(2)
    H = HIDDEN_SIZE
    params = RecurrentBranchParams(
        w_x=rng.normal(size=4 * H),
        w_h=rng.normal(size=(4 * H, H)),
        b=rng.normal(size=4 * H),
    )
    one = branch_forward(params, np.array([0.5]))
    two = branch_forward(params, np.array([0.5, 0.5]))
    assert not np.allclose(one, two)


def test_branch_forward_padding_masking_exact():
    rng = np.random.default_rng(3)
    H = HIDDEN_SIZE
    params = RecurrentBranchParams(
        w_x=rng.normal(size=4 * H),
        w_h=rng.normal(size=(4 * H, H)),
        b=rng.normal(size=4 * H),
    )
    seq = rng.uniform(-1, 1, size=9)
    plain = branch_forward(params, seq)
    padded = np.concatenate([seq, np.full(5, 123.0)])
    mask = np.concatenate([np.ones(9, bool), np.zeros(5, bool)])
    assert np.array_equal(branch_forward(params, padded, mask), plain)
    # masked gaps in the middle are skipped, matching the compacted sequence
    interleaved = np.insert(seq, 4, [9.0, 9.0])
    imask = np.ones(11, bool)
    imask[4:6] = False
    assert np.array_equal(branch_forward(params, interleaved, imask), plain)


def test_branch_forward_rejects_empty():
    params = RecurrentBranchParams(np.zeros(40), np.zeros((40, 10)), np.zeros(40))
    with pytest.raises(DataError, match="non-empty"):
        branch_forward(params, np.array([]))


def test_meta_forward_zero_and_nonnegative():
    rng = np.random.default_rng(4)
    params = MetaBranchParams(
        w1=rng.normal(size=(6, 128)),
        b1=np.zeros(128),
        w2=rng.normal(size=(128, 64)),
        b2=np.zeros(64),
    )
    assert np.array_equal(meta_forward(params, np.zeros(6)), np.zeros(64))
    out = meta_forward(params, rng.normal(size=6))
    assert out.shape == (64,)
    assert np.all(out >= 0.0)
    with pytest.raises(DataError, match="does not match in_dim"):
        meta_forward(params, np.zeros(5))


def test_softmax_rows_sum_to_one_and_stable():
    a = np.array([[1000.0, 1000.0], [-1000.0, 0.0], [3.0, -2.0]])
    p = softmax(a)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(np.isfinite(p))
    np.testing.assert_allclose(p[0], [0.5, 0.5])


def test_fusion_forward_probabilities_and_determinism():
    rng = np.random.default_rng(5)
    sample = make_sample(rng, in_dim=6)
    model = init_model(seed=1, in_dim=6, mode="merged", dropout_rate=0.3)
    p_eval, _ = fusion_forward(model, sample, train_mode=False)
    assert p_eval.shape == (2,)
    assert abs(p_eval.sum() - 1.0) < 1e-12
    assert np.all(p_eval > 0.0) and np.all(p_eval <= 1.0)
    p1, _ = fusion_forward(model, sample, train_mode=True, dropout_seed=9)
    p2, _ = fusion_forward(model, sample, train_mode=True, dropout_seed=9)
    p3, _ = fusion_forward(model, sample, train_mode=True, dropout_seed=10)
    assert np.array_equal(p1, p2)
    assert not np.array_equal(p1, p3)


def test_dropout_zero_train_equals_eval():
    rng = np.random.default_rng(6)
    sample = make_sample(rng)
    model = init_model(seed=2, in_dim=6, mode="merged", dropout_rate=0.0)
    p_train, _ = fusion_forward(model, sample, train_mode=True, dropout_seed=3)
    p_eval, _ = fusion_forward(model, sample, train_mode=False)
    assert np.array_equal(p_train, p_eval)


def test_relu_head_saturation_gives_uniform():
    rng = np.random.default_rng(7)
    sample = make_sample(rng)
    model = init_model(seed=3, in_dim=6, mode="merged", head_activation="relu")
    # force both head pre-activations negative
    model.params["head_w"][:] = 0.0
    model.params["head_b"][:] = [-1.0, -2.0]
    p, _ = fusion_forward(model, sample)
    np.testing.assert_allclose(p, [0.5, 0.5])


def test_batched_forward_matches_per_sample_branch_forward():
    # Dual route: the stacked masked kernel against the plain per-sample loop.
    rng = np.random.default_rng(8)
    samples = [make_sample(rng, T=t, vid=f"v{t}") for t in (5, 9, 14)]
    model = init_model(seed=4, in_dim=6, mode="facial_only")
    batch = make_batch(samples, "facial_only")
    _, cache = forward_batch(model, batch)
    for b, s in enumerate(samples):
        for c, params in enumerate(model.branches):
            ref = branch_forward(params, s.deltas.channels[c])
            np.testing.assert_allclose(cache.branch_out[b, c], ref, rtol=0, atol=1e-12)


def test_batched_padding_equivalence_exact():
    # A sample run alone (no padding) and inside a padded batch must agree
    # bitwise: masked steps carry state through untouched.
    rng = np.random.default_rng(9)
    short = make_sample(rng, T=6, vid="short")
    long = make_sample(rng, T=15, vid="long")
    model = init_model(seed=5, in_dim=6, mode="merged")
    solo, _ = forward_batch(model, make_batch([short], "merged"))
    padded, _ = forward_batch(model, make_batch([short, long], "merged"))
    assert np.array_equal(padded[0], solo[0])


def test_dropout_expectation_matches_eval():
    # Inverted dropout is unbiased at the layer it masks: averaging the
    # dropped branch outputs (and the dropped first meta activation) over
    # many seeds approaches the eval-mode values.
    rng = np.random.default_rng(10)
    sample = make_sample(rng)
    model = init_model(seed=6, in_dim=6, mode="merged", dropout_rate=0.4)
    batch = make_batch([sample], "merged")
    _, eval_cache = forward_batch(model, batch)
    branch_draws = []
    h1_draws = []
    for k in range(4000):
        _, c = forward_batch(model, batch, train_mode=True, dropout_rng=dropout_generator(k))
        branch_draws.append(c.branch_out[0] * c.branch_keep[0])
        h1_draws.append(c.h1d[0])
    for draws, target in ((branch_draws, eval_cache.branch_out[0]), (h1_draws, eval_cache.h1d[0])):
        mean = np.mean(draws, axis=0)
        se = np.std(draws, axis=0) / np.sqrt(len(draws))
        diff = np.abs(mean - target)
        assert np.all(diff <= 5 * se + 1e-12)


def relative_errors(model, batch, weights, analytic, eps=1e-5):
    from nextround.training import batch_loss

    worst = 0.0
    rng = np.random.default_rng(0)
    for name, grad in analytic.items():
        arr = model.params[name]
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        idxs = rng.choice(flat.size, size=min(25, flat.size), replace=False)
        for i in idxs:
            keep = flat[i]
            flat[i] = keep + eps
            lp = batch_loss(model, batch, weights)[0]
            flat[i] = keep - eps
            lm = batch_loss(model, batch, weights)[0]
            flat[i] = keep
            gn = (lp - lm) / (2 * eps)
            ga = gflat[i]
            worst = max(worst, abs(ga - gn) / max(abs(ga), abs(gn), 1e-8))
    return worst


@pytest.mark.parametrize("mode", ["merged", "facial_only", "meta_only"])
def test_backward_spot_check_against_finite_differences(mode):
    rng = np.random.default_rng(11)
    samples = [make_sample(rng, T=5, vid="a", label=1), make_sample(rng, T=4, vid="b", label=0)]
    model = init_model(seed=7, in_dim=6, mode=mode)
    batch = make_batch(samples, mode)
    # small weights keep finite-difference roundoff noise far below tolerance
    weights = np.array([0.025, 0.011])
    _, cache = forward_batch(model, batch)
    grads = backward_batch(model, batch, cache, weights)
    assert relative_errors(model, batch, weights, grads) < 1e-4


def test_zero_class_weight_zeroes_gradients():
    rng = np.random.default_rng(12)
    sample = make_sample(rng, T=6, label=1)
    model = init_model(seed=8, in_dim=6, mode="merged")
    _, cache = fusion_forward(model, sample)
    grads = fusion_backward(model, sample, label=1, class_weight=0.0, cache=cache)
    for g in grads.values():
        assert np.all(g == 0.0)


def test_meta_only_has_no_branch_gradients():
    rng = np.random.default_rng(13)
    sample = make_sample(rng, T=6)
    model = init_model(seed=9, in_dim=6, mode="meta_only")
    batch = make_batch([sample], "meta_only")
    _, cache = forward_batch(model, batch)
    grads = backward_batch(model, batch, cache, np.ones(1))
    assert not any(k.startswith("branch_") for k in grads)
    assert set(grads) == {"head_w", "head_b", "meta_w1", "meta_b1", "meta_w2", "meta_b2"}


def test_checkpoint_round_trip_exact(tmp_path):
    model = init_model(seed=10, in_dim=7, mode="merged", dropout_rate=0.25, head_activation="relu")
    path = tmp_path / "model.json"
    save_checkpoint(model, str(path), seed=10, extras={"note": "x"})
    loaded, seed, extras = load_checkpoint(str(path))
    assert seed == 10
    assert extras == {"note": "x"}
    assert loaded.mode == "merged" and loaded.head_activation == "relu"
    assert loaded.dropout_rate == 0.25 and loaded.in_dim == 7
    for name in model.params:
        assert np.array_equal(loaded.params[name], model.params[name])
    # save -> load -> save emits identical bytes
    path2 = tmp_path / "model2.json"
    save_checkpoint(loaded, str(path2), seed=seed, extras=extras)
    assert path.read_bytes() == path2.read_bytes()


def test_checkpoint_rejects_foreign_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"hello": 1}))
    with pytest.raises(DataError, match="not a model checkpoint"):
        load_checkpoint(str(p))
    p.write_text("{broken")
    with pytest.raises(DataError, match="not valid JSON"):
        load_checkpoint(str(p))


def test_make_batch_validation():
    rng = np.random.default_rng(14)
    with pytest.raises(DataError, match="empty batch"):
        make_batch([], "merged")
    a = make_sample(rng, in_dim=6, vid="a")
    b = make_sample(rng, in_dim=7, vid="b")
    with pytest.raises(DataError, match="inconsistent meta"):
        make_batch([a, b], "merged")


def test_forward_rejects_mode_mismatch():
    rng = np.random.default_rng(15)
    sample = make_sample(rng, in_dim=6)
    model = init_model(seed=11, in_dim=6, mode="merged")
    batch = make_batch([sample], "meta_only")
    with pytest.raises(DataError, match="needs facial channels"):
        forward_batch(model, batch)
    model2 = init_model(seed=11, in_dim=9, mode="meta_only")
    with pytest.raises(DataError, match="does not match model in_dim"):
        forward_batch(model2, make_batch([sample], "meta_only"))
