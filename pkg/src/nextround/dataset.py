"""Dataset ingestion: landmark/meta/score parsing, labeling, vocab, splits, class weights.

File contracts (UTF-8, ``.`` decimal separator):

* landmarks CSV: ``video_id,frame_index,timestamp_s,<8 channel columns>``
  with one row per retained frame.
* metadata CSV: ``video_id,golfer_id,age,career_years,height_cm,prev_rank,nationality``
* scores CSV:   ``video_id,strokes_day,field_avg_day,strokes_next,field_avg_next``
  or, alternatively, a labels CSV ``video_id,label``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParseError

# Fixed channel order; column order in the landmarks CSV follows it.
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
N_CHANNELS = len(CHANNELS)

# Eyeline channels carry the micro-movement signal emphasised by the synthetic
# generator; indexes into CHANNELS.
EYELINE_CHANNELS = (0, 1, 2, 3)

MAX_FRAMES = 100

LANDMARKS_HEADER = ["video_id", "frame_index", "timestamp_s", *CHANNELS]
METADATA_HEADER = ["video_id", "golfer_id", "age", "career_years", "height_cm", "prev_rank", "nationality"]
SCORES_HEADER = ["video_id", "strokes_day", "field_avg_day", "strokes_next", "field_avg_next"]
LABELS_HEADER = ["video_id", "label"]

UNKNOWN_NATIONALITY = "<unknown>"


@dataclass
class LandmarkSeries:
    """Per-video time series of the 8 tracked x-coordinate channels.

    ``frame_index`` is strictly increasing, ``timestamps`` non-decreasing,
    ``channels`` has shape (n_frames, 8) with finite values. At most
    ``MAX_FRAMES`` frames are retained (the earliest ones); when a series was
    truncated at parse time ``truncated_from`` records the original length.
    """

    video_id: str
    frame_index: np.ndarray
    timestamps: np.ndarray
    channels: np.ndarray
    truncated_from: int | None = None

    def __post_init__(self):
        self.frame_index = np.asarray(self.frame_index, dtype=np.int64)
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.channels = np.asarray(self.channels, dtype=np.float64)
        n = len(self.frame_index)
        if self.channels.shape != (n, N_CHANNELS):
            raise DataError(
                f"series {self.video_id!r}: channels shape {self.channels.shape} "
                f"does not match {n} frames x {N_CHANNELS} channels"
            )
        if n > MAX_FRAMES:
            raise DataError(f"series {self.video_id!r}: {n} frames exceeds the {MAX_FRAMES}-frame cap")
        if n > 1:
            if not np.all(np.diff(self.frame_index) > 0):
                raise DataError(f"series {self.video_id!r}: frame_index not strictly increasing")
            if not np.all(np.diff(self.timestamps) >= 0):
                raise DataError(f"series {self.video_id!r}: timestamps decrease")
        if not np.all(np.isfinite(self.channels)):
            raise DataError(f"series {self.video_id!r}: non-finite coordinate")

    def __len__(self) -> int:
        return len(self.frame_index)


@dataclass(frozen=True)
class GolferMeta:
    """Player meta-data attached to one interview video."""

    video_id: str
    golfer_id: str
    age: float
    career_years: float
    height_cm: float
    prev_rank: int
    nationality: str

    def __post_init__(self):
        if not (self.age > 0 and math.isfinite(self.age)):
            raise DataError(f"meta {self.video_id!r}: age must be > 0")
        if not (self.career_years >= 0 and math.isfinite(self.career_years)):
            raise DataError(f"meta {self.video_id!r}: career_years must be >= 0")
        if not (self.height_cm > 0 and math.isfinite(self.height_cm)):
            raise DataError(f"meta {self.video_id!r}: height_cm must be > 0")
        if self.prev_rank < 1:
            raise DataError(f"meta {self.video_id!r}: prev_rank must be >= 1")

    def numeric_features(self) -> np.ndarray:
        return np.array([self.age, self.career_years, self.height_cm, float(self.prev_rank)])


@dataclass(frozen=True)
class ScoreRecord:
    """Strokes and field averages for the interview day and the following day."""

    video_id: str
    strokes_day: float
    field_avg_day: float
    strokes_next: float
    field_avg_next: float

    def __post_init__(self):
        for name in ("strokes_day", "field_avg_day", "strokes_next", "field_avg_next"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DataError(f"scores {self.video_id!r}: {name} must be positive and finite")


@dataclass(frozen=True)
class Label:
    """Binary next-day outcome: 1 when the relative stroke ratio did not decrease."""

    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.value!r}")


@dataclass(frozen=True)
class NationalityVocab:
    """Distinct nationality codes in first-seen order plus a trailing unknown slot."""

    codes: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.codes)) != len(self.codes):
            raise DataError("vocabulary codes must be distinct")

    def __len__(self) -> int:
        return len(self.codes) + 1  # +1 for the unknown slot

    @property
    def unknown_index(self) -> int:
        return len(self.codes)

    def index(self, code: str) -> int:
        try:
            return self.codes.index(code)
        except ValueError:
            return self.unknown_index


@dataclass(frozen=True)
class MetaStats:
    """Per-feature mean/std of the numeric meta features, fit on training data.

    Zero-variance features keep std 1 so standardization is the identity
    shift for them.
    """

    means: np.ndarray
    stds: np.ndarray

    @classmethod
    def fit(cls, metas: list[GolferMeta]) -> "MetaStats":
        if not metas:
            raise DataError("cannot fit meta statistics on an empty set")
        mat = np.stack([m.numeric_features() for m in metas])
        means = mat.mean(axis=0)
        stds = mat.std(axis=0)
        stds = np.where(stds == 0.0, 1.0, stds)
        return cls(means=means, stds=stds)


def _read_rows(path: str, header: list[str]):
    """Yield (line_number, row) for a CSV file after validating its header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "missing header") from None
        if [c.strip() for c in got] != header:
            raise ParseError(path, 1, f"bad header: expected {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # skip blank lines
            yield lineno, row


def _parse_float(path: str, lineno: int, text: str, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(path, lineno, f"non-numeric value {text!r} in column {column}") from None


def _parse_int(path: str, lineno: int, text: str, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(path, lineno, f"non-integer value {text!r} in column {column}") from None


def parse_landmarks(path: str) -> list[LandmarkSeries]:
    """Parse a landmarks CSV into one series per video.

    Frames are sorted by frame_index; series longer than ``MAX_FRAMES`` keep
    their earliest ``MAX_FRAMES`` frames and record the original length in
    ``truncated_from``. Malformed rows and duplicate (video_id, frame_index)
    pairs raise :class:`ParseError` naming the offending line.
    """
    per_video: dict[str, list[tuple[int, float, list[float], int]]] = {}
    seen: dict[tuple[str, int], int] = {}
    for lineno, row in _read_rows(path, LANDMARKS_HEADER):
        if len(row) != len(LANDMARKS_HEADER):
            raise ParseError(path, lineno, f"expected {len(LANDMARKS_HEADER)} columns, got {len(row)}")
        vid = row[0]
        fidx = _parse_int(path, lineno, row[1], "frame_index")
        ts = _parse_float(path, lineno, row[2], "timestamp_s")
        coords = [_parse_float(path, lineno, row[3 + i], CHANNELS[i]) for i in range(N_CHANNELS)]
        key = (vid, fidx)
        if key in seen:
            raise ParseError(path, lineno, f"duplicate frame_index {fidx} for video {vid!r} (first at line {seen[key]})")
        seen[key] = lineno
        per_video.setdefault(vid, []).append((fidx, ts, coords, lineno))

    out = []
    for vid, frames in per_video.items():
        frames.sort(key=lambda f: f[0])
        truncated_from = None
        if len(frames) > MAX_FRAMES:
            truncated_from = len(frames)
            frames = frames[:MAX_FRAMES]
        try:
            series = LandmarkSeries(
                video_id=vid,
                frame_index=[f[0] for f in frames],
                timestamps=[f[1] for f in frames],
                channels=[f[2] for f in frames],
                truncated_from=truncated_from,
            )
        except DataError as exc:
            raise ParseError(path, frames[0][3], str(exc)) from None
        out.append(series)
    return out


def parse_metadata(path: str) -> list[GolferMeta]:
    out = []
    seen: dict[str, int] = {}
    for lineno, row in _read_rows(path, METADATA_HEADER):
        if len(row) != len(METADATA_HEADER):
            raise ParseError(path, lineno, f"expected {len(METADATA_HEADER)} columns, got {len(row)}")
        vid = row[0]
        if vid in seen:
            raise ParseError(path, lineno, f"duplicate metadata row for video {vid!r} (first at line {seen[vid]})")
        seen[vid] = lineno
        try:
            out.append(
                GolferMeta(
                    video_id=vid,
                    golfer_id=row[1],
                    age=_parse_float(path, lineno, row[2], "age"),
                    career_years=_parse_float(path, lineno, row[3], "career_years"),
                    height_cm=_parse_float(path, lineno, row[4], "height_cm"),
                    prev_rank=_parse_int(path, lineno, row[5], "prev_rank"),
                    nationality=row[6],
                )
            )
        except DataError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return out


def parse_scores(path: str) -> list[ScoreRecord]:
    out = []
    seen: dict[str, int] = {}
    for lineno, row in _read_rows(path, SCORES_HEADER):
        if len(row) != len(SCORES_HEADER):
            raise ParseError(path, lineno, f"expected {len(SCORES_HEADER)} columns, got {len(row)}")
        vid = row[0]
        if vid in seen:
            raise ParseError(path, lineno, f"duplicate scores row for video {vid!r} (first at line {seen[vid]})")
        seen[vid] = lineno
        try:
            out.append(
                ScoreRecord(
                    video_id=vid,
                    strokes_day=_parse_float(path, lineno, row[1], "strokes_day"),
                    field_avg_day=_parse_float(path, lineno, row[2], "field_avg_day"),
                    strokes_next=_parse_float(path, lineno, row[3], "strokes_next"),
                    field_avg_next=_parse_float(path, lineno, row[4], "field_avg_next"),
                )
            )
        except DataError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return out


def parse_labels(path: str) -> dict[str, Label]:
    out: dict[str, Label] = {}
    for lineno, row in _read_rows(path, LABELS_HEADER):
        if len(row) != len(LABELS_HEADER):
            raise ParseError(path, lineno, f"expected {len(LABELS_HEADER)} columns, got {len(row)}")
        vid = row[0]
        if vid in out:
            raise ParseError(path, lineno, f"duplicate label row for video {vid!r}")
        value = _parse_int(path, lineno, row[1], "label")
        if value not in (0, 1):
            raise ParseError(path, lineno, f"label must be 0 or 1, got {value}")
        out[vid] = Label(value)
    return out


def derive_label(record: ScoreRecord) -> Label:
    """Label 1 when the next day's relative stroke ratio rose or stayed equal.

    The relative score of a round is the player's strokes divided by the
    field average for that round; the comparison of the two ratios is an
    exact floating-point comparison after the two divisions.
    """
    r_day = record.strokes_day / record.field_avg_day
    r_next = record.strokes_next / record.field_avg_next
    return Label(1 if r_next >= r_day else 0)


def build_vocab(metas: list[GolferMeta]) -> NationalityVocab:
    """Distinct nationality codes in first-seen order; the unknown slot is last."""
    codes: list[str] = []
    known = set()
    for m in metas:
        if m.nationality not in known:
            known.add(m.nationality)
            codes.append(m.nationality)
    return NationalityVocab(codes=tuple(codes))


def encode_meta(meta: GolferMeta, vocab: NationalityVocab, stats: MetaStats) -> np.ndarray:
    """Standardized numeric features followed by a one-hot nationality segment.

    Numeric features are z-scored with training-set statistics. Nationalities
    outside the vocabulary map to the unknown slot; the result always has
    length ``4 + len(vocab)``.
    """
    numeric = (meta.numeric_features() - stats.means) / stats.stds
    onehot = np.zeros(len(vocab))
    onehot[vocab.index(meta.nationality)] = 1.0
    return np.concatenate([numeric, onehot])


def stratified_split(labels: list[int], test_fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Split indices 0..n-1 into (train, test) preserving class proportions.

    Per class, ``round(n_class * test_fraction)`` indices go to test, so the
    test share of each class is within one sample of the target. The
    partition is a pure function of (labels, test_fraction, seed).
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    by_class: dict[int, list[int]] = {}
    for i, y in enumerate(labels):
        by_class.setdefault(int(y), []).append(i)
    for y, idxs in sorted(by_class.items()):
        if len(idxs) < 2:
            raise DataError(f"class {y} has {len(idxs)} sample(s); need at least 2 per class to split")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5A11]))
    train: list[int] = []
    test: list[int] = []
    for y in sorted(by_class):
        idxs = np.array(by_class[y])
        perm = rng.permutation(len(idxs))
        n_test = int(round(len(idxs) * test_fraction))
        shuffled = idxs[perm]
        test.extend(int(i) for i in shuffled[:n_test])
        train.extend(int(i) for i in shuffled[n_test:])
    return sorted(train), sorted(test)


def group_split(labels: list[int], groups: list[str], test_fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Split by group (e.g. golfer id) so no group straddles train and test.

    Whole groups are assigned to test until the test share reaches
    ``test_fraction`` of the samples. Class proportions are not guaranteed;
    this exists to rule out same-player leakage.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if len(groups) != len(labels):
        raise DataError("labels and groups must align")
    members: dict[str, list[int]] = {}
    for i, g in enumerate(groups):
        members.setdefault(g, []).append(i)
    names = sorted(members)
    if len(names) < 2:
        raise DataError("need at least 2 groups for a group split")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6B12]))
    order = rng.permutation(len(names))
    target = test_fraction * len(labels)
    test: list[int] = []
    for j in order:
        if len(test) >= target:
            break
        test.extend(members[names[j]])
    if len(test) == len(labels):  # keep train non-empty
        test = test[: -len(members[names[order[-1]]])] or test[:-1]
    test_set = set(test)
    train = [i for i in range(len(labels)) if i not in test_set]
    return sorted(train), sorted(test)


def class_weights(labels: list[Label] | list[int]) -> dict[int, float]:
    """Inverse-frequency weights ``N_total / (2 * N_class)`` for both classes."""
    values = [lab.value if isinstance(lab, Label) else int(lab) for lab in labels]
    counts = {0: values.count(0), 1: values.count(1)}
    if counts[0] == 0 or counts[1] == 0:
        missing = 0 if counts[0] == 0 else 1
        raise DataError(f"class {missing} is absent; cannot compute class weights")
    total = len(values)
    return {c: total / (2.0 * n) for c, n in counts.items()}
