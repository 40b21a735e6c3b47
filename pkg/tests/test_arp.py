import math

import numpy as np
import pytest

from shapestring.exceptions import OutsideCircle
from shapestring.services.arp import (
    ArpConfig, SectorId, SurroundingCircle, assign_sectors, minimal_enclosing_circle, partition_contour,
    sector_of_point, surrounding_circle,
)
from shapestring.services.contour import Contour, Point2
from tests.conftest import make_circle

UNIT = SurroundingCircle(Point2(0.0, 0.0), 1.0)


def test_centroid_circle_of_square(unit_square):
    circle = surrounding_circle(unit_square)
    assert circle.center == (pytest.approx(0.5), pytest.approx(0.5))
    assert circle.radius == pytest.approx(math.sqrt(0.5))
    assert circle.radius > math.sqrt(0.5)


def test_minimal_circle_never_exceeds_centroid_circle(blob):
    centroid = surrounding_circle(blob, 'centroid')
    minimal = surrounding_circle(blob, 'minimal')
    assert minimal.radius <= centroid.radius + 1e-12
    with pytest.raises(ValueError):
        surrounding_circle(blob, 'smallest')


def test_minimal_enclosing_circle_contains_every_point():
    rng = np.random.default_rng(4)
    for _ in range(20):
        pts = rng.normal(size=(50, 2))
        center, radius = minimal_enclosing_circle(pts)
        dist = np.linalg.norm(pts - center, axis=1)
        assert np.all(dist <= radius * (1 + 1e-9))
        # a minimal circle touches at least two points
        assert np.sum(np.isclose(dist, radius, rtol=1e-7)) >= 2

    center, radius = minimal_enclosing_circle(np.array([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert np.allclose(center, [0.5, 0.5])
    assert radius == pytest.approx(math.sqrt(0.5))


@pytest.mark.parametrize('point, start_angle, expected', [
    ((0.1, 0.05), 0.0, SectorId(0, 0, 1)),
    ((-0.3, 0.4), 0.0, SectorId(2, 2, 19)),
    ((0.2, -0.6), 0.0, SectorId(2, 6, 23)),
    ((-0.3, 0.4), 1.0, SectorId(2, 1, 18)),
    ((0.0, 0.0), 0.0, SectorId(0, 0, 1)),
    ((1.0, 0.0), 0.0, SectorId(3, 0, 25)),
])
def test_sector_of_point(point, start_angle, expected):
    cfg = ArpConfig(radial_count=4, angular_count=8, start_angle=start_angle)
    assert sector_of_point(point, UNIT, cfg) == expected


def test_point_outside_circle():
    with pytest.raises(OutsideCircle):
        sector_of_point((2.0, 0.0), UNIT, ArpConfig())


def test_sector_ids_round_trip_through_ordinals():
    cfg = ArpConfig(radial_count=3, angular_count=5)
    for ordinal in range(1, cfg.sector_count + 1):
        sid = SectorId.from_ordinal(ordinal, cfg)
        assert sid.ring * cfg.angular_count + sid.wedge + 1 == ordinal


def test_single_sector_gives_one_closed_run(blob):
    cfg = ArpConfig(radial_count=1, angular_count=1)
    slices = partition_contour(blob, surrounding_circle(blob), cfg)
    assert len(slices) == 1
    assert slices[0].sector.ordinal == 1
    (run,) = slices[0].runs
    assert run.closed
    assert run.indices == tuple(range(len(blob)))


def test_circle_partition_into_outer_ring():
    circle_contour = make_circle(64)
    cfg = ArpConfig(radial_count=4, angular_count=16)
    slices = partition_contour(circle_contour, surrounding_circle(circle_contour), cfg)

    assert [s.sector.ordinal for s in slices] == list(range(49, 65))
    for wedge, s in enumerate(slices):
        assert s.sector.ring == 3
        assert len(s.runs) == 1
        assert s.runs[0].indices == tuple(range(4 * wedge, 4 * wedge + 4))
        assert not s.runs[0].closed


def test_run_crossing_the_seam_is_merged():
    t = 2.0 * np.pi * (np.arange(64) - 2 + 0.5) / 64
    contour = Contour.from_points(np.column_stack([np.cos(t), np.sin(t)]))
    cfg = ArpConfig(radial_count=4, angular_count=16)
    slices = partition_contour(contour, surrounding_circle(contour), cfg)

    last = slices[-1]
    assert last.sector.ordinal == 64
    assert len(last.runs) == 1
    assert last.runs[0].indices == (62, 63, 0, 1)


def test_partition_covers_every_point_once(blob):
    cfg = ArpConfig(radial_count=4, angular_count=8)
    slices = partition_contour(blob, surrounding_circle(blob), cfg)
    covered = [i for s in slices for r in s.runs for i in r.indices]
    assert sorted(covered) == list(range(len(blob)))

    ordinals = [s.sector.ordinal for s in slices]
    assert ordinals == sorted(ordinals)
    for s in slices:
        starts = [r.start for r in s.runs]
        assert starts == sorted(starts)

    sectors = assign_sectors(blob.points, surrounding_circle(blob), cfg)
    for s in slices:
        for r in s.runs:
            assert set(sectors[list(r.indices)]) == {s.sector.ordinal}
