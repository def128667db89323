import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nextround.dataset import (
    CHANNELS,
    GolferMeta,
    Label,
    LandmarkSeries,
    MetaStats,
    ScoreRecord,
    build_vocab,
    class_weights,
    derive_label,
    encode_meta,
    group_split,
    parse_labels,
    parse_landmarks,
    parse_metadata,
    parse_scores,
    stratified_split,
)
from nextround.errors import DataError, ParseError

LANDMARKS_HEADER = "video_id,frame_index,timestamp_s," + ",".join(CHANNELS)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def landmark_row(vid, fidx, ts, base=100.0):
    coords = ",".join(str(base + i) for i in range(8))
    return f"{vid},{fidx},{ts},{coords}"


def test_parse_landmarks_roundtrip(tmp_path):
    lines = [LANDMARKS_HEADER]
    for f in range(3):
        lines.append(landmark_row("v1", f, f * 0.25, base=10.0 * f))
    lines.append(landmark_row("v2", 0, 0.0))
    path = write(tmp_path, "lm.csv", "\n".join(lines) + "\n")
    series = {s.video_id: s for s in parse_landmarks(path)}
    assert set(series) == {"v1", "v2"}
    s = series["v1"]
    assert len(s) == 3
    assert s.frame_index.tolist() == [0, 1, 2]
    assert s.timestamps.tolist() == [0.0, 0.25, 0.5]
    assert s.channels.shape == (3, 8)
    assert s.channels[1, 0] == 10.0
    assert s.truncated_from is None


def test_parse_landmarks_sorts_by_frame_index(tmp_path):
    text = "\n".join([
        LANDMARKS_HEADER,
        landmark_row("v", 2, 0.5, base=2.0),
        landmark_row("v", 0, 0.0, base=0.0),
        landmark_row("v", 1, 0.25, base=1.0),
    ])
    (s,) = parse_landmarks(write(tmp_path, "lm.csv", text))
    assert s.frame_index.tolist() == [0, 1, 2]
    assert s.channels[:, 0].tolist() == [0.0, 1.0, 2.0]


def test_parse_landmarks_truncates_to_100_earliest(tmp_path):
    lines = [LANDMARKS_HEADER]
    for f in range(130):
        lines.append(landmark_row("v", f, f * 0.25, base=float(f)))
    (s,) = parse_landmarks(write(tmp_path, "lm.csv", "\n".join(lines)))
    assert len(s) == 100
    assert s.truncated_from == 130
    assert s.frame_index[-1] == 99


def test_parse_landmarks_duplicate_frame_is_error(tmp_path):
    text = "\n".join([
        LANDMARKS_HEADER,
        landmark_row("v", 0, 0.0),
        landmark_row("v", 0, 0.25),
    ])
    with pytest.raises(ParseError, match=r"lm\.csv:3: duplicate frame_index 0"):
        parse_landmarks(write(tmp_path, "lm.csv", text))


def test_parse_landmarks_bad_header_and_bad_value(tmp_path):
    with pytest.raises(ParseError, match=r":1: bad header"):
        parse_landmarks(write(tmp_path, "a.csv", "video_id,frame\nv,0\n"))
    text = LANDMARKS_HEADER + "\n" + "v,0,0.0,1,2,3,4,5,6,7,oops\n"
    with pytest.raises(ParseError, match=r":2: non-numeric value 'oops'"):
        parse_landmarks(write(tmp_path, "b.csv", text))
    text = LANDMARKS_HEADER + "\n" + "v,0,0.0,1,2,3\n"
    with pytest.raises(ParseError, match=r":2: expected 11 columns, got 6"):
        parse_landmarks(write(tmp_path, "c.csv", text))


def test_parse_landmarks_nonfinite_coordinate(tmp_path):
    text = LANDMARKS_HEADER + "\n" + "v,0,0.0,1,2,nan,4,5,6,7,8\n"
    with pytest.raises(ParseError, match="non-finite"):
        parse_landmarks(write(tmp_path, "d.csv", text))


def test_series_validation():
    with pytest.raises(DataError, match="strictly increasing"):
        LandmarkSeries("v", [0, 0], [0.0, 0.25], np.zeros((2, 8)))
    with pytest.raises(DataError, match="timestamps decrease"):
        LandmarkSeries("v", [0, 1], [0.5, 0.25], np.zeros((2, 8)))
    with pytest.raises(DataError, match="shape"):
        LandmarkSeries("v", [0], [0.0], np.zeros((1, 7)))


def test_parse_metadata(tmp_path):
    text = (
        "video_id,golfer_id,age,career_years,height_cm,prev_rank,nationality\n"
        "v1,g1,27,5.5,168,12,KOR\n"
        "v2,g2,31,9,175,3,USA\n"
    )
    metas = parse_metadata(write(tmp_path, "meta.csv", text))
    assert [m.video_id for m in metas] == ["v1", "v2"]
    assert metas[0].prev_rank == 12
    assert metas[1].nationality == "USA"
    np.testing.assert_allclose(metas[0].numeric_features(), [27.0, 5.5, 168.0, 12.0])


def test_parse_metadata_rejects_bad_rows(tmp_path):
    header = "video_id,golfer_id,age,career_years,height_cm,prev_rank,nationality\n"
    with pytest.raises(ParseError, match=r":2: .*age must be > 0"):
        parse_metadata(write(tmp_path, "m1.csv", header + "v,g,-3,5,168,12,KOR\n"))
    with pytest.raises(ParseError, match=r":2: .*prev_rank must be >= 1"):
        parse_metadata(write(tmp_path, "m2.csv", header + "v,g,27,5,168,0,KOR\n"))
    with pytest.raises(ParseError, match=r":3: duplicate metadata"):
        parse_metadata(write(tmp_path, "m3.csv", header + "v,g,27,5,168,1,KOR\nv,g,27,5,168,1,KOR\n"))


def test_parse_scores_and_labels(tmp_path):
    scores = parse_scores(
        write(
            tmp_path,
            "s.csv",
            "video_id,strokes_day,field_avg_day,strokes_next,field_avg_next\nv1,68,72,70,71\n",
        )
    )
    assert scores[0].strokes_next == 70.0
    labels = parse_labels(write(tmp_path, "l.csv", "video_id,label\nv1,1\nv2,0\n"))
    assert labels["v1"].value == 1 and labels["v2"].value == 0
    with pytest.raises(ParseError, match="label must be 0 or 1"):
        parse_labels(write(tmp_path, "l2.csv", "video_id,label\nv1,2\n"))


def test_parse_scores_rejects_nonpositive(tmp_path):
    text = "video_id,strokes_day,field_avg_day,strokes_next,field_avg_next\nv1,68,0,70,71\n"
    with pytest.raises(ParseError, match="field_avg_day must be positive"):
        parse_scores(write(tmp_path, "s.csv", text))


# Worked examples, frozen by hand: 68/72 ~= 0.9444 vs 70/71 ~= 0.9859 rises -> 1;
# 72/70 ~= 1.0286 vs 68/70 ~= 0.9714 falls -> 0; equal ratios count as 1.
def test_derive_label_worked_examples():
    assert derive_label(ScoreRecord("a", 68, 72, 70, 71)).value == 1
    assert derive_label(ScoreRecord("b", 72, 70, 68, 70)).value == 0
    assert derive_label(ScoreRecord("c", 71, 71, 70, 70)).value == 1


@settings(max_examples=200)
@given(
    strokes=st.floats(50, 100),
    avg=st.floats(60, 90),
    strokes2=st.floats(50, 100),
    avg2=st.floats(60, 90),
    scale=st.floats(0.5, 2.0),
)
def test_derive_label_scale_invariance(strokes, avg, strokes2, avg2, scale):
    # The label depends only on the two ratios, so rescaling one day's
    # strokes and field average together never changes it. Exact ties sit on
    # the comparison boundary where a 1-ulp rounding shift can flip the
    # outcome; stay off that measure-zero edge.
    r_day, r_next = strokes / avg, strokes2 / avg2
    assume(abs(r_day - r_next) > 1e-9 * max(r_day, r_next))
    base = derive_label(ScoreRecord("v", strokes, avg, strokes2, avg2))
    scaled = derive_label(ScoreRecord("v", strokes * scale, avg * scale, strokes2, avg2))
    assert base.value == scaled.value


def test_build_vocab_first_seen_order_and_unknown():
    metas = [
        GolferMeta("v1", "g1", 27, 5, 168, 1, "KOR"),
        GolferMeta("v2", "g2", 30, 8, 170, 2, "USA"),
        GolferMeta("v3", "g3", 24, 2, 165, 3, "KOR"),
        GolferMeta("v4", "g4", 28, 6, 172, 4, "JPN"),
    ]
    vocab = build_vocab(metas)
    assert vocab.codes == ("KOR", "USA", "JPN")
    assert len(vocab) == 4
    assert vocab.index("USA") == 1
    assert vocab.index("THA") == vocab.unknown_index == 3


def test_encode_meta_layout_and_unknown():
    metas = [
        GolferMeta("v1", "g1", 20, 2, 160, 1, "KOR"),
        GolferMeta("v2", "g2", 30, 8, 170, 21, "USA"),
    ]
    vocab = build_vocab(metas)
    stats = MetaStats.fit(metas)
    np.testing.assert_allclose(stats.means, [25.0, 5.0, 165.0, 11.0])
    vec = encode_meta(metas[0], vocab, stats)
    assert vec.shape == (4 + 3,)
    np.testing.assert_allclose(vec[:4], [-1.0, -1.0, -1.0, -1.0])
    assert vec[4:].tolist() == [1.0, 0.0, 0.0]
    outsider = GolferMeta("v9", "g9", 25, 5, 165, 11, "THA")
    vec9 = encode_meta(outsider, vocab, stats)
    np.testing.assert_allclose(vec9[:4], [0.0, 0.0, 0.0, 0.0])
    assert vec9[4:].tolist() == [0.0, 0.0, 1.0]


def test_encode_meta_zero_variance_is_identity_shift():
    metas = [
        GolferMeta("v1", "g1", 25, 5, 170, 3, "KOR"),
        GolferMeta("v2", "g2", 25, 7, 170, 9, "KOR"),
    ]
    stats = MetaStats.fit(metas)
    assert stats.stds[0] == 1.0 and stats.stds[2] == 1.0
    vec = encode_meta(metas[0], build_vocab(metas), stats)
    assert vec[0] == 0.0 and vec[2] == 0.0


@given(st.lists(st.sampled_from(["KOR", "USA", "JPN", "THA", "AUS"]), min_size=1, max_size=30))
def test_encode_meta_onehot_sums_to_one(nats):
    metas = [GolferMeta(f"v{i}", f"g{i}", 25, 5, 168, 1 + i, n) for i, n in enumerate(nats)]
    vocab = build_vocab(metas)
    stats = MetaStats.fit(metas)
    for m in metas:
        vec = encode_meta(m, vocab, stats)
        assert vec[4:].sum() == 1.0
        assert len(vec) == 4 + len(vocab)


# Worked example, frozen by hand: 100 samples 80/20, fraction 0.2 puts
# round(80*.2)=16 and round(20*.2)=4 in test.
def test_stratified_split_worked_example():
    labels = [0] * 80 + [1] * 20
    train, test = stratified_split(labels, test_fraction=0.2, seed=7)
    assert len(test) == 20 and len(train) == 80
    assert sum(labels[i] for i in test) == 4
    assert sum(labels[i] for i in train) == 16
    assert sorted(train + test) == list(range(100))


def test_stratified_split_deterministic_and_seed_sensitive():
    labels = [0] * 30 + [1] * 10
    a = stratified_split(labels, 0.25, seed=3)
    b = stratified_split(labels, 0.25, seed=3)
    c = stratified_split(labels, 0.25, seed=4)
    assert a == b
    assert a != c


def test_stratified_split_rejects_degenerate():
    with pytest.raises(DataError, match="at least 2 per class"):
        stratified_split([0, 0, 0, 1], 0.5, seed=0)
    with pytest.raises(DataError, match="test_fraction"):
        stratified_split([0, 0, 1, 1], 0.0, seed=0)


@settings(max_examples=50)
@given(
    n0=st.integers(4, 60),
    n1=st.integers(4, 60),
    frac=st.floats(0.1, 0.5),
    seed=st.integers(0, 2**31 - 1),
)
def test_stratified_split_partition_properties(n0, n1, frac, seed):
    labels = [0] * n0 + [1] * n1
    train, test = stratified_split(labels, frac, seed)
    assert sorted(train + test) == list(range(n0 + n1))
    assert len(set(train) & set(test)) == 0
    # per-class test count is round(n_c * frac) exactly
    assert sum(1 for i in test if labels[i] == 0) == int(round(n0 * frac))
    assert sum(1 for i in test if labels[i] == 1) == int(round(n1 * frac))


def test_group_split_keeps_groups_intact():
    labels = [0, 1] * 10
    groups = [f"g{i // 4}" for i in range(20)]  # 5 golfers, 4 videos each
    train, test = group_split(labels, groups, 0.2, seed=11)
    train_groups = {groups[i] for i in train}
    test_groups = {groups[i] for i in test}
    assert train_groups.isdisjoint(test_groups)
    assert sorted(train + test) == list(range(20))
    assert train and test


# Worked examples, frozen by hand: 180/33 -> N/(2*Nc) = 213/360 and 213/66;
# 3/1 -> 4/6 and 4/2.
def test_class_weights_worked_examples():
    w = class_weights([0] * 180 + [1] * 33)
    assert math.isclose(w[0], 213 / 360)
    assert math.isclose(w[1], 213 / 66)
    w2 = class_weights([Label(0), Label(0), Label(0), Label(1)])
    assert math.isclose(w2[0], 2 / 3)
    assert math.isclose(w2[1], 2.0)


@given(n0=st.integers(1, 500), n1=st.integers(1, 500))
def test_class_weights_balance_identity(n0, n1):
    # Weighted class masses are equal: N_c * w_c == N_total / 2 for both classes.
    w = class_weights([0] * n0 + [1] * n1)
    assert math.isclose(n0 * w[0], (n0 + n1) / 2)
    assert math.isclose(n1 * w[1], (n0 + n1) / 2)


def test_class_weights_requires_both_classes():
    with pytest.raises(DataError, match="class 1 is absent"):
        class_weights([0, 0, 0])
