"""Video to landmarks CSV.

Timestamps are sampled at k * interval for k = 0 .. max_frames - 1 and mapped
to the nearest source frame. A detected face yields one CSV row whose
frame_index is the sample ordinal k, so detection failures leave gaps in
frame_index but never reorder it; the downstream contract only requires
strictly increasing. Rows and the JSONL extraction log are built in memory
and written once at the end, with no wall-clock anywhere, so re-running a
config reproduces both files byte for byte.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import cv2

from .config import CHANNELS, CSV_HEADER, ExtractionConfig
from .detect import detect_faces, largest_box
from .errors import ExtractionError, InputError
from .landmarks import place_landmarks


@dataclass(frozen=True)
class ExtractionResult:
    rows_written: int
    frames_skipped: int
    frames_sampled: int
    csv_path: str
    log_path: str


def _video_id(config: ExtractionConfig) -> str:
    if config.video_id is not None:
        return config.video_id
    base = os.path.basename(config.video_path)
    stem = os.path.splitext(base)[0]
    return stem or base


def extract(config: ExtractionConfig) -> ExtractionResult:
    """Run one extraction. Returns counts; writes the CSV and the log."""
    cap = cv2.VideoCapture(config.video_path)
    if not cap.isOpened():
        raise InputError(f"cannot open video {config.video_path}")
    try:
        fps = cap.get(cv2.CAP_PROP_FPS)
        if not fps or fps <= 0:
            raise InputError(f"video {config.video_path} reports no frame rate; cannot place samples")
        vid = _video_id(config)
        events: list[dict] = []
        rows: list[list] = []
        events.append(
            {
                "event": "start",
                "video": config.video_path,
                "video_id": vid,
                "fps": fps,
                "interval_s": config.interval_s,
                "max_frames": config.max_frames,
                "min_confidence": config.min_confidence,
                "index_map": {k: config.index_map[k] for k in sorted(config.index_map)},
            }
        )

        # source frame index for each sample ordinal; nearest-frame rounding
        # keeps each timestamp within half a frame duration of k * interval
        targets = [(k, k * config.interval_s, round(k * config.interval_s * fps)) for k in range(config.max_frames)]
        column_of = [config.index_map[name] for name in CHANNELS]

        skipped = 0
        sampled = 0
        ti = 0
        src = -1
        frame = None
        while ti < len(targets):
            k, t, want = targets[ti]
            while src < want:
                ok, nxt = cap.read()
                if not ok:
                    events.append({"event": "end_of_video", "after_frame": src, "next_sample": k})
                    break
                frame = nxt
                src += 1
            if src < want:
                break  # ran out of frames
            sampled += 1
            ti += 1
            gray = cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY)
            boxes = detect_faces(gray, config.min_neighbor_votes)
            if not boxes:
                skipped += 1
                events.append({"event": "no_face", "sample": k, "timestamp_s": t, "source_frame": src})
                continue
            box = largest_box(boxes)
            if len(boxes) > 1:
                events.append(
                    {
                        "event": "multiple_faces",
                        "sample": k,
                        "timestamp_s": t,
                        "n": len(boxes),
                        "chosen": {"r": box.r, "c": box.c, "width": box.width, "height": box.height},
                    }
                )
            points = place_landmarks(box)
            rows.append([vid, k, repr(float(t)), *(repr(float(points[i, 0])) for i in column_of)])

        events.append({"event": "done", "rows": len(rows), "skipped": skipped, "sampled": sampled})
    finally:
        cap.release()

    # the log is the record of what happened, so it is written even when the
    # run fails; the CSV only exists when there is something to feed downstream
    with open(config.resolved_log_path, "w", encoding="utf-8", newline="\n") as fh:
        for event in events:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    if sampled == 0:
        raise InputError(f"video {config.video_path} yielded no decodable frames")
    if not rows:
        raise ExtractionError(f"no face detected in any of the {sampled} sampled frames of {config.video_path}")

    with open(config.out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)

    return ExtractionResult(
        rows_written=len(rows),
        frames_skipped=skipped,
        frames_sampled=sampled,
        csv_path=config.out_path,
        log_path=config.resolved_log_path,
    )
