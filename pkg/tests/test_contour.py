import numpy as np
import pytest

from shapestring.exceptions import DegenerateRegion, EmptyMask, InvalidContour, ZeroExtent
from shapestring.services.contour import (
    BinaryMask, Contour, Orientation, normalize, resample, signed_area, to_clockwise, trace_boundary,
)
from tests.conftest import make_blob


def test_from_points_drops_consecutive_and_closing_duplicates():
    contour = Contour.from_points([(0, 0), (1, 0), (1, 0), (1, 1), (0, 1), (0, 0)])
    assert contour.points.tolist() == [[0, 0], [1, 0], [1, 1], [0, 1]]


def test_from_points_rejects_bad_input():
    with pytest.raises(InvalidContour):
        Contour.from_points([(0, 0), (1, 0)])
    with pytest.raises(InvalidContour):
        Contour.from_points([(0, 0), (1, np.nan), (1, 1)])
    with pytest.raises(InvalidContour):
        Contour.from_points([1, 2, 3])
    with pytest.raises(ZeroExtent):
        Contour.from_points([(2, 2), (2, 2), (2, 2)])


def test_orientation_follows_shoelace_sign(unit_square):
    # right then down on screen is clockwise when y grows downward
    assert unit_square.orientation is Orientation.CLOCKWISE
    assert unit_square.signed_area == pytest.approx(1.0)

    reversed_square = unit_square.reversed()
    assert reversed_square.orientation is Orientation.COUNTERCLOCKWISE
    assert reversed_square.points[0].tolist() == [0, 0]
    assert to_clockwise(reversed_square).points.tolist() == unit_square.points.tolist()


def test_contour_points_are_read_only(unit_square):
    with pytest.raises(ValueError):
        unit_square.points[0, 0] = 5.0


def test_trace_single_pixel_is_degenerate():
    bits = np.zeros((3, 3), dtype=bool)
    bits[1, 1] = True
    with pytest.raises(DegenerateRegion):
        trace_boundary(BinaryMask.from_array(bits))


def test_trace_empty_mask():
    with pytest.raises(EmptyMask):
        trace_boundary(BinaryMask.from_array(np.zeros((4, 4))))


def test_trace_three_by_three_square():
    bits = np.zeros((5, 5), dtype=bool)
    bits[0:3, 0:3] = True
    contour = trace_boundary(BinaryMask.from_array(bits))

    assert len(contour) == 8
    assert contour.orientation is Orientation.CLOCKWISE
    assert signed_area(contour.points) > 0
    ring = {tuple(p) for p in contour.points.astype(int).tolist()}
    expected = {(x, y) for x in range(3) for y in range(3)} - {(1, 1)}
    assert ring == expected


def test_trace_rectangle_area():
    bits = np.zeros((10, 14), dtype=bool)
    bits[2:8, 2:12] = True  # 10 wide, 6 high
    contour = trace_boundary(BinaryMask.from_array(bits))
    assert abs(contour.signed_area) == pytest.approx(45.0)
    assert contour.orientation is Orientation.CLOCKWISE


def test_trace_keeps_largest_region():
    bits = np.zeros((12, 12), dtype=bool)
    bits[1:3, 1:3] = True
    bits[5:11, 4:10] = True
    contour = trace_boundary(BinaryMask.from_array(bits))
    assert contour.points[:, 0].min() == 4
    assert contour.points[:, 1].min() == 5


def test_resample_square_corners(unit_square):
    assert np.allclose(resample(unit_square, 4).points, unit_square.points)

    eight = resample(unit_square, 8).points
    expected = [(0, 0), (0.5, 0), (1, 0), (1, 0.5), (1, 1), (0.5, 1), (0, 1), (0, 0.5)]
    assert np.allclose(eight, expected)


def test_resample_spacing_is_uniform(unit_square):
    out = resample(unit_square, 20)
    closed = np.vstack([out.points, out.points[:1]])
    spacing = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    assert np.max(np.abs(spacing - 0.2)) < 1e-9


def test_resample_preserves_perimeter_and_orientation(blob):
    out = resample(blob, 100)
    assert len(out) == 100
    assert out.points[0].tolist() == blob.points[0].tolist()
    assert out.perimeter() == pytest.approx(blob.perimeter(), rel=0.01)
    assert out.orientation is blob.orientation


def test_resample_needs_three_points(unit_square):
    with pytest.raises(InvalidContour):
        resample(unit_square, 2)


def test_normalize_is_idempotent(blob):
    once, _ = normalize(blob)
    twice, record = normalize(once)
    assert np.allclose(once.points, twice.points, atol=1e-12)
    assert record.centroid.x == pytest.approx(0.0, abs=1e-12)
    assert record.scale == pytest.approx(1.0, abs=1e-12)


def test_normalize_translation_and_scale_equivariance():
    base = make_blob(seed=5)
    shifted = Contour.from_points(base.points + np.array([5.0, -3.0]))
    scaled = Contour.from_points(base.points * 7.0)

    out_base, rec_base = normalize(base)
    out_shift, rec_shift = normalize(shifted)
    out_scale, rec_scale = normalize(scaled)

    assert np.allclose(out_base.points, out_shift.points, atol=1e-12)
    assert np.allclose(out_base.points, out_scale.points, atol=1e-12)
    assert rec_shift.centroid.x == pytest.approx(rec_base.centroid.x + 5.0)
    assert rec_shift.centroid.y == pytest.approx(rec_base.centroid.y - 3.0)
    assert rec_scale.scale == pytest.approx(7.0 * rec_base.scale)
    assert np.allclose(rec_base.invert(out_base.points), base.points)
