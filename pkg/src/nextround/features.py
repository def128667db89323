"""Landmark series to normalized per-channel delta sequences, and sample assembly.

Deltas are consecutive-frame differences of each x-coordinate channel;
normalization divides each channel by its own max absolute delta within the
video, so the sequences are dimensionless and camera-distance free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import (
    GolferMeta,
    Label,
    LandmarkSeries,
    MetaStats,
    N_CHANNELS,
    NationalityVocab,
    encode_meta,
)
from .errors import DataError


@dataclass
class DeltaSeries:
    """Per-video delta sequences, one per channel, length retained_frames - 1.

    ``channels`` has shape (8, T-1). ``gap_flags`` (length T-1) marks deltas
    computed across a frame_index gap > 1; available frames are differenced
    as adjacent regardless, the flag just preserves the information.
    """

    video_id: str
    channels: np.ndarray
    gap_flags: np.ndarray

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.float64)
        self.gap_flags = np.asarray(self.gap_flags, dtype=bool)
        if self.channels.ndim != 2 or self.channels.shape[0] != N_CHANNELS:
            raise DataError(f"deltas {self.video_id!r}: expected shape (8, T-1), got {self.channels.shape}")
        if self.channels.shape[1] < 1:
            raise DataError(f"deltas {self.video_id!r}: need at least one delta per channel")
        if self.gap_flags.shape != (self.channels.shape[1],):
            raise DataError(f"deltas {self.video_id!r}: gap_flags length mismatch")

    def __len__(self) -> int:
        return self.channels.shape[1]


@dataclass
class FeatureSample:
    """One fully assembled training sample: deltas + encoded meta + label."""

    video_id: str
    deltas: DeltaSeries
    meta_vec: np.ndarray
    label: Label


def compute_deltas(series: LandmarkSeries) -> DeltaSeries:
    """Raw consecutive-frame differences for every channel.

    Requires at least 2 frames; shorter series are excluded upstream the same
    way undetectable videos are.
    """
    if len(series) < 2:
        raise DataError(f"series {series.video_id!r}: need >= 2 frames to compute deltas, got {len(series)}")
    deltas = np.diff(series.channels, axis=0).T  # (8, T-1)
    gap_flags = np.diff(series.frame_index) > 1
    return DeltaSeries(video_id=series.video_id, channels=deltas, gap_flags=gap_flags)


def normalize_deltas(raw: DeltaSeries) -> DeltaSeries:
    """Divide each channel by its max absolute delta; all-zero channels stay zero."""
    peaks = np.abs(raw.channels).max(axis=1, keepdims=True)
    scale = np.where(peaks == 0.0, 1.0, peaks)
    return DeltaSeries(
        video_id=raw.video_id,
        channels=raw.channels / scale,
        gap_flags=raw.gap_flags.copy(),
    )


def build_sample(
    series: LandmarkSeries,
    meta: GolferMeta,
    vocab: NationalityVocab,
    stats: MetaStats,
    label: Label,
) -> FeatureSample:
    """Assemble a FeatureSample from parts that must share one video_id."""
    if series.video_id != meta.video_id:
        raise DataError(
            f"video_id mismatch: landmarks {series.video_id!r} vs metadata {meta.video_id!r}"
        )
    deltas = normalize_deltas(compute_deltas(series))
    meta_vec = encode_meta(meta, vocab, stats)
    return FeatureSample(video_id=series.video_id, deltas=deltas, meta_vec=meta_vec, label=label)


def dump_deltas_csv(samples: list[DeltaSeries], path: str) -> None:
    """Debug dump of normalized deltas, one row per delta step per video."""
    from .dataset import CHANNELS

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("video_id,delta_index," + ",".join(CHANNELS) + "\n")
        for d in samples:
            for t in range(len(d)):
                row = ",".join(repr(float(v)) for v in d.channels[:, t])
                fh.write(f"{d.video_id},{t},{row}\n")
