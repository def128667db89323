"""Extraction configuration and the channel-to-landmark index map."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import InputError

# Output column order is fixed by the nextround landmarks CSV contract;
# ingestion over there rejects any other header.
CHANNELS = (
    "left_upper_eyeline",
    "left_lower_eyeline",
    "right_upper_eyeline",
    "right_lower_eyeline",
    "left_eyebrow",
    "right_eyebrow",
    "mid_of_lip",
    "right_end_of_lip",
)

CSV_HEADER = ["video_id", "frame_index", "timestamp_s", *CHANNELS]

N_LANDMARKS = 68

# Which point of the standard 68-point annotation scheme feeds each channel.
# Nothing downstream pins these; they are a reviewed default, overridable per
# run via an index-map file, and echoed into the extraction log.
DEFAULT_INDEX_MAP = {
    "left_upper_eyeline": 38,
    "left_lower_eyeline": 41,
    "right_upper_eyeline": 44,
    "right_lower_eyeline": 47,
    "left_eyebrow": 19,
    "right_eyebrow": 24,
    "mid_of_lip": 62,
    "right_end_of_lip": 54,
}


def validate_index_map(index_map: dict[str, int]) -> dict[str, int]:
    """Check an index map covers all 8 channels with distinct in-range points."""
    unknown = sorted(set(index_map) - set(CHANNELS))
    if unknown:
        raise InputError(f"index map names unknown channels: {', '.join(unknown)}")
    missing = sorted(set(CHANNELS) - set(index_map))
    if missing:
        raise InputError(f"index map is missing channels: {', '.join(missing)}")
    for name, idx in index_map.items():
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise InputError(f"index map entry {name!r} must be an integer, got {idx!r}")
        if not 0 <= idx < N_LANDMARKS:
            raise InputError(f"index map entry {name!r} is {idx}, outside [0, {N_LANDMARKS - 1}]")
    values = list(index_map.values())
    if len(set(values)) != len(values):
        raise InputError("index map assigns the same point to more than one channel")
    return dict(index_map)


def load_index_map(path: str) -> dict[str, int]:
    """Read a channel-to-index JSON object from ``path`` and validate it."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read index map {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"index map {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InputError(f"index map {path} must be a JSON object of channel: index")
    return validate_index_map(raw)


@dataclass(frozen=True)
class ExtractionConfig:
    """Everything one extraction run needs.

    ``min_confidence`` steers the detector's neighbor-vote threshold: the
    cascade must re-find a face in round(min_confidence * 8) overlapping
    windows out of a nominal 8 before we trust it. 0.5 reproduces the
    detector's stock behavior.
    """

    video_path: str
    out_path: str
    interval_s: float = 0.25
    max_frames: int = 100
    index_map: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_INDEX_MAP))
    min_confidence: float = 0.5
    log_path: str | None = None  # defaults to out_path + ".log.jsonl"
    video_id: str | None = None  # defaults to the video file's stem

    def __post_init__(self):
        if not (math.isfinite(self.interval_s) and self.interval_s > 0):
            raise InputError(f"interval must be a positive number of seconds, got {self.interval_s}")
        if self.max_frames < 2:
            raise InputError(f"max frames must be >= 2, got {self.max_frames}")
        if not (0 < self.min_confidence <= 1):
            raise InputError(f"min confidence must be in (0, 1], got {self.min_confidence}")
        validate_index_map(self.index_map)

    @property
    def resolved_log_path(self) -> str:
        return self.log_path if self.log_path is not None else f"{self.out_path}.log.jsonl"

    @property
    def min_neighbor_votes(self) -> int:
        return max(1, round(self.min_confidence * 8))
