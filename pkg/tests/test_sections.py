import math

import numpy as np
import pytest

from shapestring.exceptions import ZeroChord
from shapestring.services.arp import SurroundingCircle
from shapestring.services.contour import Point2
from shapestring.services.sections import (
    SectionConfig, SectionKind, curvature_labels, detect_inflexions, make_sections, smooth, turning_sines,
)

UNIT = SurroundingCircle(Point2(0.0, 0.0), 1.0)


def _arc(start, stop, count, center=(0.0, 0.0), radius=1.0):
    t = np.linspace(start, stop, count)
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def _s_curve():
    first = _arc(math.pi, 0.0, 101)
    second = _arc(math.pi, 2.0 * math.pi, 101, center=(2.0, 0.0))[1:]
    return np.vstack([first, second])


def test_smooth_is_a_clipped_moving_average():
    assert np.allclose(smooth(np.array([0.0, 0.0, 5.0, 0.0, 0.0]), 5), [5 / 3, 5 / 4, 1.0, 5 / 4, 5 / 3])
    values = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(smooth(values, 1), values)


def test_turning_sines_sign_follows_traversal():
    arc = _arc(0.0, math.pi / 2, 20)
    assert np.all(turning_sines(arc) > 0)
    assert np.all(turning_sines(arc[::-1]) < 0)
    assert np.all(turning_sines(np.array([[0, 0], [1, 0]])) == 0)


def test_collinear_run_is_one_line():
    run = np.column_stack([np.arange(10.0), np.zeros(10)])
    circle = SurroundingCircle(Point2(0.0, 0.0), 10.0)
    sections = make_sections(run, circle)

    assert len(sections) == 1
    line = sections[0]
    assert line.kind is SectionKind.LINE
    assert line.area == 0.0
    assert line.degree == 0.0
    assert line.alpha == 0.0
    assert line.d1 == 0.0
    assert line.d2 == pytest.approx(0.9)
    assert detect_inflexions(run) == []


def test_convex_arc():
    sections = make_sections(_arc(0.0, math.pi / 2, 30), UNIT)
    assert [s.kind for s in sections] == [SectionKind.CONVEX]
    segment = (math.pi / 2 - 1.0) / 2.0
    assert sections[0].area == pytest.approx(segment / math.pi, rel=0.01)
    assert sections[0].d1 == pytest.approx(1.0)


def test_reversed_arc_is_concave():
    sections = make_sections(_arc(math.pi / 2, 0.0, 30), UNIT)
    assert [s.kind for s in sections] == [SectionKind.CONCAVE]


def test_semicircle_features():
    (section,) = make_sections(_arc(0.0, math.pi, 201), UNIT)
    assert section.kind is SectionKind.CONVEX
    assert section.degree == pytest.approx(0.5, abs=1e-9)
    assert section.area == pytest.approx(0.5, abs=1e-3)
    assert min(section.alpha, math.pi - section.alpha) < 1e-9
    assert section.d1 == pytest.approx(1.0)
    assert section.d2 == pytest.approx(1.0)


def test_small_semicircle_is_measured_against_the_circle_radius():
    (section,) = make_sections(_arc(0.0, math.pi, 1000, radius=0.5), UNIT)
    assert section.kind is SectionKind.CONVEX
    assert section.area == pytest.approx(0.125, rel=1e-3)
    assert section.degree == pytest.approx(0.5, abs=1e-3)
    assert section.d1 == pytest.approx(0.5)
    assert section.d2 == pytest.approx(0.5)


def test_s_curve_splits_once_at_the_inflexion():
    curve = _s_curve()
    splits = detect_inflexions(curve)
    assert len(splits) == 1
    assert abs(splits[0] - 100) <= 5

    circle = SurroundingCircle(Point2(1.0, 0.0), 2.0)
    sections = make_sections(curve, circle)
    assert [s.kind for s in sections] == [SectionKind.CONCAVE, SectionKind.CONVEX]
    # neighbouring sections share the split point
    assert sections[0].last == sections[1].first


def test_labels_respect_line_threshold():
    curve = _s_curve()
    _, labels = curvature_labels(curve, SectionConfig(eps_line=1.0))
    assert np.all(labels == 0)


def test_open_run_with_coincident_ends_raises():
    loop = _arc(0.0, 2.0 * math.pi, 50)
    with pytest.raises(ZeroChord):
        make_sections(loop, UNIT)


def test_closed_run_uses_the_farthest_point():
    loop = _arc(0.0, 2.0 * math.pi, 50)[:-1]
    sections = make_sections(loop, UNIT, closed=True)
    assert len(sections) == 1
    assert sections[0].kind is SectionKind.CONVEX
    assert sections[0].degree == pytest.approx(0.5, abs=0.01)


def test_two_point_run_is_a_line():
    (section,) = make_sections(np.array([[0.0, 0.0], [0.0, 0.5]]), UNIT)
    assert section.kind is SectionKind.LINE
    assert section.alpha == pytest.approx(math.pi / 2)
    assert section.to_dict()['point_count'] == 2
