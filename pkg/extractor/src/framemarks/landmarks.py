"""68-point landmark placement inside a detected face box.

Points follow the standard 68-point annotation ordering: jaw 0-16, eyebrows
17-26, nose 27-35, eyes 36-47, outer lip 48-59, inner lip 60-67. Positions
come from a fixed canonical template registered to the detection box, which
keeps extraction dependency-light and bit-reproducible; a learned per-frame
regressor could replace ``place_landmarks`` without touching the callers.
"""

from __future__ import annotations

import numpy as np

from .detect import FaceBox


def _template() -> np.ndarray:
    """Canonical face shape, (68, 2) as (u, v) fractions of the face box."""
    pts = np.empty((68, 2), dtype=np.float64)

    # jaw contour, left ear to right ear through the chin
    theta = np.linspace(0.0, np.pi, 17)
    pts[0:17, 0] = 0.5 - 0.45 * np.cos(theta)
    pts[0:17, 1] = 0.30 + 0.62 * np.sin(theta)

    # eyebrows, each left to right with a slight arch
    pts[17:22] = [(0.13, 0.26), (0.20, 0.23), (0.265, 0.22), (0.33, 0.23), (0.40, 0.25)]
    pts[22:27] = [(0.60, 0.25), (0.67, 0.23), (0.735, 0.22), (0.80, 0.23), (0.87, 0.26)]

    # nose bridge down the midline, then the base left to right
    pts[27:31] = [(0.5, 0.30), (0.5, 0.38), (0.5, 0.46), (0.5, 0.54)]
    pts[31:36] = [(0.40, 0.60), (0.45, 0.615), (0.5, 0.62), (0.55, 0.615), (0.60, 0.60)]

    # left eye: outer corner, upper lid x2, inner corner, lower lid x2
    pts[36:42] = [
        (0.205, 0.330), (0.245, 0.305), (0.305, 0.305),
        (0.355, 0.330), (0.305, 0.355), (0.245, 0.355),
    ]
    # right eye mirrors the left: inner corner, upper lid x2, outer corner,
    # lower lid x2
    pts[42:48] = [
        (0.645, 0.330), (0.695, 0.305), (0.755, 0.305),
        (0.795, 0.330), (0.755, 0.355), (0.695, 0.355),
    ]

    # outer lip ring: corners at 48 and 54
    pts[48:60] = [
        (0.36, 0.760), (0.42, 0.735), (0.465, 0.725), (0.50, 0.730),
        (0.535, 0.725), (0.58, 0.735), (0.64, 0.760), (0.58, 0.800),
        (0.535, 0.815), (0.50, 0.820), (0.465, 0.815), (0.42, 0.800),
    ]
    # inner lip ring: corners at 60 and 64, 62 is the top middle
    pts[60:68] = [
        (0.40, 0.760), (0.46, 0.750), (0.50, 0.752), (0.54, 0.750),
        (0.60, 0.760), (0.54, 0.775), (0.50, 0.780), (0.46, 0.775),
    ]
    return pts


TEMPLATE = _template()


def place_landmarks(box: FaceBox) -> np.ndarray:
    """Scale the template into a detection box, returning (68, 2) as (x, y) pixels.

    Template fractions stay strictly inside (0, 1), so every placed point lies
    strictly inside the box and therefore inside the frame.
    """
    out = np.empty_like(TEMPLATE)
    out[:, 0] = box.c + TEMPLATE[:, 0] * box.width
    out[:, 1] = box.r + TEMPLATE[:, 1] * box.height
    return out
