"""Regenerate data/interview_sample.avi.

A 5 second, 4 fps, 512x512 clip built from scikit-image's astronaut
portrait. The subject drifts sideways a little each frame so the extracted
x-coordinates carry motion. Two frames are replaced by a flat gradient (no
face, exercising skip logging) and one frame gets a second, smaller face
pasted in (exercising the largest-box choice). FFV1 keeps the encoding
lossless: decoded frames match these arrays exactly, so detector behavior
on the clip is the behavior on the arrays. Deterministic: no RNG.
"""

import os

import cv2
import numpy as np
from skimage import data

FPS = 4.0
N_FRAMES = 20
NO_FACE_FRAMES = (6, 13)
TWO_FACE_FRAME = 16


def build_frames() -> list[np.ndarray]:
    base = data.astronaut()  # 512x512 RGB
    h, w = base.shape[:2]
    frames = []
    for i in range(N_FRAMES):
        if i in NO_FACE_FRAMES:
            ramp = np.linspace(40, 215, h, dtype=np.uint8)
            frame = np.repeat(ramp[:, None, None], w, axis=1).repeat(3, axis=2)
        else:
            frame = np.roll(base, shift=2 * i, axis=1)
            frame = np.roll(frame, shift=i % 3, axis=0)
            if i == TWO_FACE_FRAME:
                face = base[30:210, 140:320]  # the head region
                small = cv2.resize(face, (128, 128), interpolation=cv2.INTER_CUBIC)
                frame = frame.copy()
                frame[360:488, 370:498] = small
        frames.append(frame)
    return frames


def main() -> None:
    out = os.path.join(os.path.dirname(__file__), "..", "data", "interview_sample.avi")
    out = os.path.normpath(out)
    os.makedirs(os.path.dirname(out), exist_ok=True)
    writer = cv2.VideoWriter(out, cv2.VideoWriter_fourcc(*"FFV1"), FPS, (512, 512))
    if not writer.isOpened():
        raise SystemExit("could not open video writer")
    for frame in build_frames():
        writer.write(cv2.cvtColor(frame, cv2.COLOR_RGB2BGR))
    writer.release()
    print(f"wrote {N_FRAMES} frames at {FPS} fps to {out}")


if __name__ == "__main__":
    main()
