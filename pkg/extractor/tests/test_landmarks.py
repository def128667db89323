import cv2
import numpy as np
import pytest
from skimage import data as skdata

from framemarks.detect import FaceBox, detect_faces, largest_box
from framemarks.landmarks import TEMPLATE, place_landmarks


def test_template_shape_and_bounds():
    assert TEMPLATE.shape == (68, 2)
    assert np.all(TEMPLATE > 0.0)
    assert np.all(TEMPLATE < 1.0)


def test_template_left_right_symmetry():
    # mirrored features sit at mirrored horizontal positions; the rings are
    # traversed in opposite senses, hence the explicit pairing
    eye_pairs = [(36, 45), (37, 44), (38, 43), (39, 42), (40, 47), (41, 46)]
    brow_pairs = [(17, 26), (18, 25), (19, 24), (20, 23), (21, 22)]
    for left, right in eye_pairs + brow_pairs:
        assert TEMPLATE[left, 0] + TEMPLATE[right, 0] == pytest.approx(1.0, abs=1e-12)
        assert TEMPLATE[left, 1] == pytest.approx(TEMPLATE[right, 1], abs=1e-12)


def test_place_landmarks_stays_inside_box():
    box = FaceBox(r=10, c=20, width=100, height=200)
    pts = place_landmarks(box)
    assert pts.shape == (68, 2)
    assert np.all(pts[:, 0] > 20) and np.all(pts[:, 0] < 120)
    assert np.all(pts[:, 1] > 10) and np.all(pts[:, 1] < 210)


def test_place_landmarks_scales_linearly():
    small = place_landmarks(FaceBox(r=0, c=0, width=100, height=100))
    big = place_landmarks(FaceBox(r=0, c=0, width=200, height=200))
    np.testing.assert_allclose(big, 2.0 * small, rtol=0, atol=1e-12)


def test_detects_the_portrait_face():
    gray = cv2.cvtColor(skdata.astronaut(), cv2.COLOR_RGB2GRAY)
    boxes = detect_faces(gray)
    assert len(boxes) == 1
    (box,) = boxes
    # the face box should contain the portrait's eye line, around (125, 216)
    assert box.c < 216 < box.c + box.width
    assert box.r < 125 < box.r + box.height


def test_blank_frame_has_no_faces():
    blank = np.full((300, 300), 128, dtype=np.uint8)
    assert detect_faces(blank) == []


def test_two_faces_detected_and_largest_chosen():
    gray = cv2.cvtColor(skdata.astronaut(), cv2.COLOR_RGB2GRAY)
    canvas = np.zeros((512, 1024), dtype=np.uint8)
    canvas[:, :512] = gray
    small = cv2.resize(gray, (256, 256))
    canvas[100:356, 600:856] = small
    boxes = detect_faces(canvas)
    assert len(boxes) == 2
    chosen = largest_box(boxes)
    assert chosen == max(boxes, key=lambda b: b.area)
    assert chosen.c < 512  # the full-size portrait, not the pasted copy


def test_largest_box_tie_break_is_positional():
    a = FaceBox(r=0, c=0, width=10, height=10)
    b = FaceBox(r=5, c=5, width=10, height=10)
    assert largest_box([a, b]) == a
    assert largest_box([b, a]) == a
