import json

import pytest

from framemarks.config import (
    CHANNELS,
    DEFAULT_INDEX_MAP,
    ExtractionConfig,
    load_index_map,
    validate_index_map,
)
from framemarks.errors import InputError


def make(**kw):
    kw.setdefault("video_path", "v.avi")
    kw.setdefault("out_path", "out.csv")
    return ExtractionConfig(**kw)


def test_defaults():
    cfg = make()
    assert cfg.interval_s == 0.25
    assert cfg.max_frames == 100
    assert cfg.min_confidence == 0.5
    assert cfg.index_map == DEFAULT_INDEX_MAP
    assert cfg.resolved_log_path == "out.csv.log.jsonl"
    assert cfg.min_neighbor_votes == 4


def test_default_map_covers_all_channels_distinctly():
    assert set(DEFAULT_INDEX_MAP) == set(CHANNELS)
    values = list(DEFAULT_INDEX_MAP.values())
    assert len(set(values)) == len(values)
    assert all(0 <= v <= 67 for v in values)


@pytest.mark.parametrize("interval", [0.0, -0.25, float("nan"), float("inf")])
def test_bad_interval_rejected(interval):
    with pytest.raises(InputError):
        make(interval_s=interval)


@pytest.mark.parametrize("max_frames", [1, 0, -5])
def test_bad_max_frames_rejected(max_frames):
    with pytest.raises(InputError):
        make(max_frames=max_frames)


@pytest.mark.parametrize("conf", [0.0, -0.5, 1.5])
def test_bad_confidence_rejected(conf):
    with pytest.raises(InputError):
        make(min_confidence=conf)


def test_confidence_steers_neighbor_votes():
    assert make(min_confidence=1.0).min_neighbor_votes == 8
    assert make(min_confidence=0.05).min_neighbor_votes == 1


def test_index_map_missing_channel_rejected():
    bad = dict(DEFAULT_INDEX_MAP)
    del bad["mid_of_lip"]
    with pytest.raises(InputError, match="missing channels: mid_of_lip"):
        validate_index_map(bad)


def test_index_map_unknown_channel_rejected():
    bad = dict(DEFAULT_INDEX_MAP, chin=8)
    with pytest.raises(InputError, match="unknown channels: chin"):
        validate_index_map(bad)


def test_index_map_duplicate_point_rejected():
    bad = dict(DEFAULT_INDEX_MAP, mid_of_lip=54)  # collides with right_end_of_lip
    with pytest.raises(InputError, match="same point"):
        validate_index_map(bad)


@pytest.mark.parametrize("idx", [-1, 68, 3.5, "38", True])
def test_index_map_bad_index_rejected(idx):
    bad = dict(DEFAULT_INDEX_MAP, mid_of_lip=idx)
    with pytest.raises(InputError):
        validate_index_map(bad)


def test_load_index_map_round_trip(tmp_path):
    custom = dict(DEFAULT_INDEX_MAP, mid_of_lip=51)
    path = tmp_path / "map.json"
    path.write_text(json.dumps(custom))
    assert load_index_map(str(path)) == custom


def test_load_index_map_bad_json(tmp_path):
    path = tmp_path / "map.json"
    path.write_text("{not json")
    with pytest.raises(InputError, match="not valid JSON"):
        load_index_map(str(path))


def test_load_index_map_missing_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        load_index_map(str(tmp_path / "absent.json"))


def test_load_index_map_non_object(tmp_path):
    path = tmp_path / "map.json"
    path.write_text("[1, 2, 3]")
    with pytest.raises(InputError, match="JSON object"):
        load_index_map(str(path))
