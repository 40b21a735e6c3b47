"""
Angular radial partitioning.

The surrounding circle of a contour is split into M concentric rings and N
equal wedges. Sectors are numbered from the innermost ring outward and,
inside a ring, clockwise on screen starting at ``start_angle`` from +x.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Tuple

import numpy as np

from ..exceptions import OutsideCircle, ZeroExtent
from .contour import Contour, Point2

logger = logging.getLogger(__name__)

# Relative slack that keeps boundary points inside the circle
CIRCLE_SLACK = 1e-9

CIRCLE_METHODS = ('centroid', 'minimal')


@dataclass(frozen=True)
class ArpConfig:
    radial_count: int = 4
    angular_count: int = 8
    start_angle: float = 0.0
    circle_method: str = 'centroid'

    def __post_init__(self):
        if self.radial_count < 1 or self.angular_count < 1:
            raise ValueError("ARP needs at least one ring and one wedge")
        if self.circle_method not in CIRCLE_METHODS:
            raise ValueError(f"Unknown circle method: {self.circle_method}")

    @property
    def sector_count(self) -> int:
        return self.radial_count * self.angular_count

    @property
    def wedge_angle(self) -> float:
        return 2.0 * math.pi / self.angular_count


@dataclass(frozen=True)
class SurroundingCircle:
    center: Point2
    radius: float

    def to_dict(self) -> dict:
        return {'center': [self.center.x, self.center.y], 'radius': self.radius}


class SectorId(NamedTuple):
    ring: int
    wedge: int
    ordinal: int

    @classmethod
    def from_ordinal(cls, ordinal: int, cfg: ArpConfig) -> 'SectorId':
        ring, wedge = divmod(ordinal - 1, cfg.angular_count)
        return cls(ring, wedge, ordinal)


@dataclass(frozen=True)
class SectorRun:
    """Maximal stretch of consecutive contour indices inside one sector"""

    indices: Tuple[int, ...]
    closed: bool = False

    @property
    def start(self) -> int:
        return self.indices[0]

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SectorSlice:
    sector: SectorId
    runs: Tuple[SectorRun, ...]

    def point_count(self) -> int:
        return sum(len(r) for r in self.runs)

    def to_dict(self) -> dict:
        return {
            'sector': self.sector.ordinal,
            'ring': self.sector.ring,
            'wedge': self.sector.wedge,
            'runs': [{'indices': list(r.indices), 'closed': r.closed} for r in self.runs],
        }


def _circle_from(center: np.ndarray, points: np.ndarray) -> SurroundingCircle:
    radius = float(np.max(np.linalg.norm(points - center, axis=1)))
    if radius <= 0.0:
        raise ZeroExtent("Surrounding circle has zero radius")
    return SurroundingCircle(Point2(float(center[0]), float(center[1])), radius * (1.0 + CIRCLE_SLACK))


def surrounding_circle(contour: Contour, method: str = 'centroid') -> SurroundingCircle:
    """
    Circle centred on the contour centroid (or the minimal enclosing circle)
    whose radius reaches the farthest point
    """
    pts = contour.points
    if method == 'minimal':
        center = minimal_enclosing_circle(pts)[0]
    elif method == 'centroid':
        center = pts.mean(axis=0)
    else:
        raise ValueError(f"Unknown circle method: {method}")
    return _circle_from(np.asarray(center, dtype=float), pts)


def _circumcircle(a, b, c) -> Tuple[np.ndarray, float]:
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if abs(d) < 1e-18:
        # collinear: widest pair spans the circle
        pairs = [(a, b), (a, c), (b, c)]
        p, q = max(pairs, key=lambda pq: np.linalg.norm(pq[0] - pq[1]))
        return (p + q) / 2.0, float(np.linalg.norm(p - q)) / 2.0
    sa, sb, sc = a @ a, b @ b, c @ c
    ux = (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / d
    uy = (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / d
    center = np.array([ux, uy])
    return center, float(np.linalg.norm(a - center))


def minimal_enclosing_circle(points: np.ndarray, seed: int = 0) -> Tuple[np.ndarray, float]:
    """
    Smallest circle containing every point (randomized incremental construction)

    The shuffle uses a fixed seed so the result is reproducible.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    rng = np.random.default_rng(seed)
    pts = pts[rng.permutation(len(pts))]
    tol = 1e-12 * max(1.0, float(np.max(np.abs(pts))))

    def outside(p, c, r):
        return np.linalg.norm(p - c) > r + tol

    center, radius = pts[0].copy(), 0.0
    for i in range(1, len(pts)):
        if not outside(pts[i], center, radius):
            continue
        center, radius = pts[i].copy(), 0.0
        for j in range(i):
            if not outside(pts[j], center, radius):
                continue
            center = (pts[i] + pts[j]) / 2.0
            radius = float(np.linalg.norm(pts[i] - pts[j])) / 2.0
            for k in range(j):
                if outside(pts[k], center, radius):
                    center, radius = _circumcircle(pts[i], pts[j], pts[k])
    return center, radius


def _polar(points: np.ndarray, circle: SurroundingCircle, cfg: ArpConfig):
    offset = points - np.asarray(circle.center)
    dist = np.hypot(offset[:, 0], offset[:, 1])
    if np.any(dist > circle.radius * (1.0 + CIRCLE_SLACK)):
        worst = float(np.max(dist))
        raise OutsideCircle(f"Point at distance {worst:.6g} lies outside the circle of radius {circle.radius:.6g}")
    phi = np.mod(np.arctan2(offset[:, 1], offset[:, 0]) - cfg.start_angle, 2.0 * math.pi)
    return dist, phi


def assign_sectors(points: np.ndarray, circle: SurroundingCircle, cfg: ArpConfig) -> np.ndarray:
    """Sector ordinal (1-based) of every point"""
    dist, phi = _polar(np.asarray(points, dtype=float), circle, cfg)
    ring = np.minimum(np.floor(dist * cfg.radial_count / circle.radius).astype(int), cfg.radial_count - 1)
    wedge = np.minimum(np.floor(phi * cfg.angular_count / (2.0 * math.pi)).astype(int), cfg.angular_count - 1)
    # the centre itself belongs to the first sector
    wedge[dist == 0.0] = 0
    return ring * cfg.angular_count + wedge + 1


def sector_of_point(p, circle: SurroundingCircle, cfg: ArpConfig) -> SectorId:
    """
    Sector containing one point

    Args:
        p: Point2 or (x, y) pair
        circle: Surrounding circle
        cfg: Ring and wedge counts

    Returns:
        Ring, wedge and 1-based ordinal
    """
    ordinal = int(assign_sectors(np.asarray([p], dtype=float), circle, cfg)[0])
    return SectorId.from_ordinal(ordinal, cfg)


def partition_contour(contour: Contour, circle: SurroundingCircle, cfg: ArpConfig) -> List[SectorSlice]:
    """
    Group the contour into maximal runs of points sharing a sector

    A run that crosses the contour's start point is merged across the seam.
    Slices are ordered by sector ordinal, runs inside a slice by their first
    contour index. Empty sectors get no slice.
    """
    ordinals = assign_sectors(contour.points, circle, cfg)
    n = len(ordinals)

    if np.all(ordinals == ordinals[0]):
        run = SectorRun(indices=tuple(range(n)), closed=True)
        return [SectorSlice(SectorId.from_ordinal(int(ordinals[0]), cfg), (run,))]

    # rotate so index `first` opens a run; the last run then never wraps
    change = np.flatnonzero(ordinals != np.roll(ordinals, 1))
    first = int(change[0])
    order = np.roll(np.arange(n), -first)
    bounds = np.concatenate([np.flatnonzero(np.diff(ordinals[order]) != 0) + 1, [n]])

    runs_by_sector: Dict[int, List[SectorRun]] = {}
    begin = 0
    for end in bounds:
        indices = tuple(int(i) for i in order[begin:end])
        runs_by_sector.setdefault(int(ordinals[indices[0]]), []).append(SectorRun(indices=indices))
        begin = int(end)

    slices = []
    for ordinal in sorted(runs_by_sector):
        runs = tuple(sorted(runs_by_sector[ordinal], key=lambda r: r.start))
        slices.append(SectorSlice(SectorId.from_ordinal(ordinal, cfg), runs))

    logger.debug(f"Partitioned {n} points into {sum(len(s.runs) for s in slices)} runs over {len(slices)} sectors")
    return slices
