import csv
import json
from pathlib import Path

import cv2
import numpy as np
import pytest

from framemarks import ExtractionConfig, extract

SAMPLE = Path(__file__).resolve().parents[1] / "data" / "interview_sample.avi"


@pytest.fixture(scope="session")
def sample_video() -> str:
    assert SAMPLE.exists(), "bundled sample clip missing; run tools/make_sample_video.py"
    return str(SAMPLE)


@pytest.fixture(scope="session")
def default_run(sample_video, tmp_path_factory):
    """One extraction of the bundled clip with stock settings, shared read-only."""
    out = tmp_path_factory.mktemp("extract") / "lm.csv"
    result = extract(ExtractionConfig(video_path=sample_video, out_path=str(out)))
    return result


@pytest.fixture(scope="session")
def blank_video(tmp_path_factory) -> str:
    """A decodable clip containing no faces at all."""
    path = tmp_path_factory.mktemp("blank") / "blank.avi"
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"FFV1"), 4.0, (256, 256))
    assert writer.isOpened()
    for i in range(6):
        writer.write(np.full((256, 256, 3), 60 + 20 * i, dtype=np.uint8))
    writer.release()
    return str(path)


def read_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_log(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh]
