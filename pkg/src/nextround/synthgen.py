"""Synthetic interview corpora with tunable per-modality signal strength.

The generator plants a label-correlated oscillation amplitude in the four
eyeline channels and a label-correlated mean shift in ``prev_rank``. Each
modality sees the true label only through its own "effective class", which
agrees with the label with probability ``p_face`` / ``p_meta``; at 0.5 a
modality is pure noise, at 1.0 it is maximally informative. That makes the
two modalities partially complementary, so a fused model has measurable
headroom over either one alone.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from dataclasses import dataclass

import numpy as np

from .dataset import (
    CHANNELS,
    EYELINE_CHANNELS,
    LANDMARKS_HEADER,
    MAX_FRAMES,
    METADATA_HEADER,
    SCORES_HEADER,
    GolferMeta,
    Label,
    LandmarkSeries,
    N_CHANNELS,
)
from .errors import DataError

_SYNTH_TAG = 0x5EED

# Interview sampling interval in seconds; matches the extraction cadence the
# rest of the pipeline assumes.
FRAME_INTERVAL_S = 0.25

# Rough per-channel x positions (pixels) for a centered face; absolute
# placement is irrelevant downstream (deltas are shift invariant) but keeps
# generated files plausible to eyeball.
_BASE_X = (262.0, 266.0, 338.0, 342.0, 252.0, 348.0, 300.0, 336.0)

_NATIONALITIES = ("KR", "US", "JP", "TH", "SE", "AU", "CN", "GB", "CA", "NZ", "DE", "FR")

# Eyeline oscillation amplitude by facial effective class. The per-channel
# max-abs normalization downstream removes any global scale, so what survives
# is the oscillation's size relative to the fixed-sigma jitter; the two
# classes must differ enough for that ratio to stay separable after noise.
_AMP_CLASS0 = 0.8
_AMP_CLASS1 = 3.6
_AMP_JITTER_SIGMA = 0.25  # lognormal sigma on the per-channel amplitude
_OSC_CYCLES_PER_100 = 12.0
_OSC_CYCLES_SIGMA = 1.0
_WALK_SIGMA = 0.12

# prev_rank class-conditional distributions (mean, sd); effective class 1
# golfers sit further down the rankings. The distributions overlap on purpose:
# a clean separation would let the tabular branch alone saturate its planted
# informativeness, leaving a fused model nothing to add. With overlap the
# tabular cue is a weak classifier on its own and fusion with the eyeline cue
# is what recovers the full planted signal.
_RANK_CLASS0 = (12.0, 6.0)
_RANK_CLASS1 = (26.0, 8.0)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters controlling corpus size, imbalance, and signal strength."""

    n_samples: int = 213
    class_balance: float = 0.15
    frames: int = 100
    p_face: float = 0.65
    p_meta: float = 0.65
    noise_sigma: float = 0.45
    seed: int = 0
    nationality_pool: int = 4

    def __post_init__(self):
        if self.n_samples < 10:
            raise DataError(f"n_samples must be >= 10, got {self.n_samples}")
        if not 0.0 < self.class_balance < 1.0:
            raise DataError(f"class_balance must be in (0, 1), got {self.class_balance}")
        if not 2 <= self.frames <= MAX_FRAMES:
            raise DataError(f"frames must be in [2, {MAX_FRAMES}], got {self.frames}")
        for name in ("p_face", "p_meta"):
            v = getattr(self, name)
            if not 0.5 <= v <= 1.0:
                raise DataError(f"{name} must be in [0.5, 1], got {v}")
        if self.noise_sigma < 0:
            raise DataError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.nationality_pool < 1:
            raise DataError(f"nationality_pool must be >= 1, got {self.nationality_pool}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _nationality_codes(pool: int) -> list[str]:
    codes = list(_NATIONALITIES[:pool])
    codes += [f"X{k}" for k in range(len(codes), pool)]
    return codes


def _facial_channels(rng: np.random.Generator, spec: SynthSpec, face_class: int) -> np.ndarray:
    t = np.arange(spec.frames, dtype=np.float64)
    out = np.empty((spec.frames, N_CHANNELS))
    face_shift = rng.normal(0.0, 15.0)
    base_amp = _AMP_CLASS1 if face_class == 1 else _AMP_CLASS0
    for c in range(N_CHANNELS):
        walk = np.cumsum(rng.normal(0.0, _WALK_SIGMA, size=spec.frames))
        noise = rng.normal(0.0, spec.noise_sigma, size=spec.frames)
        chan = _BASE_X[c] + face_shift + walk + noise
        if c in EYELINE_CHANNELS:
            amp = base_amp * rng.lognormal(0.0, _AMP_JITTER_SIGMA)
            cycles = max(rng.normal(_OSC_CYCLES_PER_100, _OSC_CYCLES_SIGMA), 2.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            chan = chan + amp * np.sin(2.0 * np.pi * (cycles / 100.0) * t + phase)
        out[:, c] = chan
    return out


def _meta_for(rng: np.random.Generator, spec: SynthSpec, i: int, meta_class: int, codes: list[str]) -> GolferMeta:
    mean, sd = _RANK_CLASS1 if meta_class == 1 else _RANK_CLASS0
    rank = int(np.clip(round(rng.normal(mean, sd)), 1, 150))
    # label-independent numerics are held constant: z-scoring turns any
    # nonzero spread into a full-variance noise dimension, and those are
    # exactly what an overparameterized net memorizes first
    return GolferMeta(
        video_id=f"v{i:04d}",
        golfer_id=f"g{i // 2:03d}",
        age=27.0,
        career_years=7.0,
        height_cm=167.0,
        prev_rank=rank,
        nationality=codes[int(rng.integers(len(codes)))],
    )


def generate(spec: SynthSpec) -> tuple[list[LandmarkSeries], list[GolferMeta], list[Label]]:
    """Draw one corpus: landmark series, golfer metadata, and labels.

    Deterministic per seed. The positive count is fixed at
    ``round(n_samples * class_balance)`` and positions are shuffled, so small
    corpora cannot accidentally lose a class. Each sample's content comes
    from its own derived seed, so samples could be generated in parallel.
    """
    label_rng = np.random.default_rng(np.random.SeedSequence([spec.seed, _SYNTH_TAG]))
    n_pos = round(spec.n_samples * spec.class_balance)
    labels_arr = np.zeros(spec.n_samples, dtype=np.int64)
    labels_arr[label_rng.permutation(spec.n_samples)[:n_pos]] = 1
    codes = _nationality_codes(spec.nationality_pool)

    series_list: list[LandmarkSeries] = []
    metas: list[GolferMeta] = []
    labels: list[Label] = []
    frame_index = np.arange(spec.frames, dtype=np.int64)
    timestamps = FRAME_INTERVAL_S * np.arange(spec.frames, dtype=np.float64)
    for i in range(spec.n_samples):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, _SYNTH_TAG, 1 + i]))
        y = int(labels_arr[i])
        # antithetic coupling: one uniform drives both agreement draws, so a
        # modality tends to be right exactly where the other is wrong; the
        # marginals stay p_face / p_meta but the errors are maximally
        # complementary, which is what gives fusion its headroom
        u = rng.random()
        face_class = y if u < spec.p_face else 1 - y
        meta_class = y if u >= 1.0 - spec.p_meta else 1 - y
        series_list.append(
            LandmarkSeries(
                video_id=f"v{i:04d}",
                frame_index=frame_index.copy(),
                timestamps=timestamps.copy(),
                channels=_facial_channels(rng, spec, face_class),
            )
        )
        metas.append(_meta_for(rng, spec, i, meta_class, codes))
        labels.append(Label(y))
    return series_list, metas, labels


def _scores_row(rng: np.random.Generator, vid: str, label: int) -> list:
    # next-day ratio moves at least 0.2% away from the day ratio so the
    # label survives the write/parse/divide round trip with room to spare
    strokes_day = float(np.clip(rng.normal(71.0, 2.5), 62.0, 82.0))
    field_day = float(np.clip(rng.normal(72.0, 1.0), 69.0, 75.0))
    field_next = float(np.clip(rng.normal(72.0, 1.0), 69.0, 75.0))
    r_day = strokes_day / field_day
    u = rng.uniform(0.002, 0.05)
    r_next = r_day * (1.0 + u) if label == 1 else r_day * (1.0 - u)
    return [vid, strokes_day, field_day, r_next * field_next, field_next]


@dataclass(frozen=True)
class SynthBundle:
    """Paths of one written synthetic corpus."""

    out_dir: str
    landmarks_path: str
    metadata_path: str
    scores_path: str
    manifest_path: str


def write_bundle(spec: SynthSpec, out_dir: str) -> SynthBundle:
    """Generate a corpus and write it as the pipeline's file contracts.

    Emits landmarks and metadata CSVs plus a scores CSV whose derived labels
    reproduce the generated ones (labels travel through scores only, so the
    bundle feeds straight into ingestion without an ambiguous second label
    source), and a manifest JSON echoing the spec. Floats are written with
    full repr so parsing returns the exact generated values.
    """
    series_list, metas, labels = generate(spec)
    os.makedirs(out_dir, exist_ok=True)
    score_rng = np.random.default_rng(np.random.SeedSequence([spec.seed, _SYNTH_TAG, 0]))

    bundle = SynthBundle(
        out_dir=out_dir,
        landmarks_path=os.path.join(out_dir, "landmarks.csv"),
        metadata_path=os.path.join(out_dir, "metadata.csv"),
        scores_path=os.path.join(out_dir, "scores.csv"),
        manifest_path=os.path.join(out_dir, "manifest.json"),
    )

    with open(bundle.landmarks_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(LANDMARKS_HEADER)
        for s in series_list:
            for k in range(len(s)):
                w.writerow(
                    [s.video_id, int(s.frame_index[k]), float(s.timestamps[k])]
                    + [float(v) for v in s.channels[k]]
                )

    with open(bundle.metadata_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(METADATA_HEADER)
        for m in metas:
            w.writerow([m.video_id, m.golfer_id, m.age, m.career_years, m.height_cm, m.prev_rank, m.nationality])

    with open(bundle.scores_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SCORES_HEADER)
        for m, y in zip(metas, labels):
            w.writerow(_scores_row(score_rng, m.video_id, y.value))

    manifest = {
        "format": "nextround-synth-bundle",
        "version": 1,
        "spec": spec.to_dict(),
        "n_positive": sum(y.value for y in labels),
        "channels": list(CHANNELS),
    }
    with open(bundle.manifest_path, "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    return bundle
