"""Frontal-face detection on grayscale frames.

Backend is scikit-image's bundled LBP cascade. It ships inside the wheel, so
detection works offline, and scanning is deterministic: the same frame with
the same thresholds always yields the same boxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from skimage import data as _skdata
from skimage.feature import Cascade

_SCALE_FACTOR = 1.2
_STEP_RATIO = 1.2
# Faces smaller than frame_min/12 are ignored; interview framing keeps the
# subject much larger than that.
_MIN_SIZE_DIVISOR = 12


@dataclass(frozen=True)
class FaceBox:
    """Axis-aligned detection box, row/col origin in pixel coordinates."""

    r: int
    c: int
    width: int
    height: int

    @property
    def area(self) -> int:
        return self.width * self.height


@lru_cache(maxsize=1)
def _cascade() -> Cascade:
    return Cascade(_skdata.lbp_frontal_face_cascade_filename())


def detect_faces(gray: np.ndarray, min_neighbor_votes: int = 4) -> list[FaceBox]:
    """Return every detected face in a grayscale uint8 frame."""
    h, w = gray.shape
    side = max(24, min(h, w) // _MIN_SIZE_DIVISOR)
    hits = _cascade().detect_multi_scale(
        img=gray,
        scale_factor=_SCALE_FACTOR,
        step_ratio=_STEP_RATIO,
        min_size=(side, side),
        max_size=(min(h, w), min(h, w)),
        min_neighbor_number=min_neighbor_votes,
    )
    return [FaceBox(r=d["r"], c=d["c"], width=d["width"], height=d["height"]) for d in hits]


def largest_box(boxes: list[FaceBox]) -> FaceBox:
    """Pick the biggest detection; position breaks exact-area ties."""
    return max(boxes, key=lambda b: (b.area, -b.r, -b.c))
