"""
Contour ingestion: closed point lists, boundary tracing of binary masks,
arc-length resampling and centroid/scale normalization.

All coordinates follow the image convention (y grows downward). In that
frame a positive shoelace area is a clockwise traversal on screen.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from ..exceptions import DegenerateRegion, EmptyMask, InvalidContour, ZeroExtent

logger = logging.getLogger(__name__)

# Relative tolerance, in units of the contour extent, for duplicate points
DEDUP_TOLERANCE = 1e-12

# Moore neighbourhood, clockwise on screen, starting west of the pixel
MOORE_NEIGHBOURS = (
    (-1, 0), (-1, -1), (0, -1), (1, -1),
    (1, 0), (1, 1), (0, 1), (-1, 1),
)


class Point2(NamedTuple):
    x: float
    y: float


class Orientation(str, Enum):
    CLOCKWISE = 'clockwise'
    COUNTERCLOCKWISE = 'counterclockwise'


def signed_area(points: np.ndarray) -> float:
    """Shoelace area of the closed polygon; positive means clockwise on screen"""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orientation_of(points: np.ndarray) -> Orientation:
    # Zero-area outlines (a traced one-pixel line) count as clockwise
    return Orientation.CLOCKWISE if signed_area(points) >= 0 else Orientation.COUNTERCLOCKWISE


@dataclass(frozen=True, eq=False)
class Contour:
    """Closed, ordered point list; the last point connects back to the first"""

    points: np.ndarray
    orientation: Orientation

    @classmethod
    def from_points(cls, points: Union[np.ndarray, Sequence[Sequence[float]]]) -> 'Contour':
        """
        Build a contour, dropping consecutive duplicates and a repeated closing point

        Args:
            points: (n, 2) array-like of x, y coordinates

        Returns:
            Validated contour with its orientation derived from the shoelace sign
        """
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidContour(f"Expected an (n, 2) point array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidContour("Contour points must be finite")
        if len(arr) == 0:
            raise InvalidContour("Contour has no points")

        extent = float(np.max(np.ptp(arr, axis=0)))
        if extent == 0.0:
            raise ZeroExtent("All contour points coincide")
        tol = DEDUP_TOLERANCE * extent

        step = np.linalg.norm(np.diff(arr, axis=0), axis=1)
        keep = np.concatenate([[True], step > tol])
        arr = arr[keep]
        while len(arr) > 1 and np.linalg.norm(arr[-1] - arr[0]) <= tol:
            arr = arr[:-1]

        if len(arr) < 3:
            raise InvalidContour(f"A contour needs at least 3 distinct points, got {len(arr)}")

        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        return cls(points=arr, orientation=_orientation_of(arr))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def signed_area(self) -> float:
        return signed_area(self.points)

    def perimeter(self) -> float:
        closed = np.vstack([self.points, self.points[:1]])
        return float(np.sum(np.linalg.norm(np.diff(closed, axis=0), axis=1)))

    def centroid(self) -> Point2:
        c = self.points.mean(axis=0)
        return Point2(float(c[0]), float(c[1]))

    def reversed(self) -> 'Contour':
        """Opposite traversal that keeps the first point first"""
        pts = np.vstack([self.points[:1], self.points[:0:-1]])
        return Contour.from_points(pts)

    def to_dict(self) -> dict:
        return {'points': self.points.tolist(), 'closed': True}


def to_clockwise(contour: Contour) -> Contour:
    """Canonical traversal used before partitioning and encoding"""
    if contour.orientation is Orientation.CLOCKWISE:
        return contour
    return contour.reversed()


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Row-major boolean silhouette"""

    width: int
    height: int
    bits: np.ndarray

    @classmethod
    def from_array(cls, array) -> 'BinaryMask':
        bits = np.asarray(array).astype(bool)
        if bits.ndim != 2:
            raise InvalidContour(f"A mask must be two-dimensional, got shape {bits.shape}")
        bits = np.ascontiguousarray(bits)
        bits.setflags(write=False)
        return cls(width=bits.shape[1], height=bits.shape[0], bits=bits)


def _largest_region(bits: np.ndarray) -> np.ndarray:
    # scipy's default structuring element is the 4-connected cross
    labels, count = ndimage.label(bits)
    sizes = np.bincount(labels.ravel())[1:]
    return labels == (int(np.argmax(sizes)) + 1)


def trace_boundary(mask: BinaryMask) -> Contour:
    """
    Outer boundary of the largest 4-connected foreground region

    Moore-neighbour tracing from the topmost-leftmost pixel; tracing stops
    when a pixel is re-entered from the same neighbour (Jacob's criterion).

    Args:
        mask: Binary silhouette

    Returns:
        Clockwise contour through the boundary pixel centres
    """
    if not mask.bits.any():
        raise EmptyMask("Mask has no foreground pixel")

    region = np.pad(_largest_region(mask.bits), 1, constant_values=False)
    ys, xs = np.nonzero(region)
    start = (int(xs[0]), int(ys[0]))
    start_backtrack = 0  # west of the first pixel in raster order is background

    boundary = [start]
    seen = {(start, start_backtrack)}
    p, backtrack = start, start_backtrack
    max_steps = 8 * int(region.sum()) + 8

    for _ in range(max_steps):
        found = None
        for k in range(1, 9):
            d = (backtrack + k) % 8
            dx, dy = MOORE_NEIGHBOURS[d]
            if region[p[1] + dy, p[0] + dx]:
                found = d
                break
        if found is None:
            break  # isolated pixel

        bx, by = MOORE_NEIGHBOURS[(found - 1) % 8]
        came_from = (p[0] + bx, p[1] + by)
        dx, dy = MOORE_NEIGHBOURS[found]
        p = (p[0] + dx, p[1] + dy)
        backtrack = MOORE_NEIGHBOURS.index((came_from[0] - p[0], came_from[1] - p[1]))

        if (p, backtrack) in seen:
            break
        seen.add((p, backtrack))
        boundary.append(p)

    if len(set(boundary)) < 3:
        raise DegenerateRegion(f"Region boundary has only {len(set(boundary))} pixel(s)")

    points = np.asarray(boundary, dtype=float) - 1.0
    contour = Contour.from_points(points)
    logger.debug(f"Traced boundary of {len(contour)} points from a {mask.width}x{mask.height} mask")
    return to_clockwise(contour)


def resample(contour: Contour, n: int) -> Contour:
    """
    n points equally spaced by arc length, starting at the first input point

    Args:
        contour: Input contour
        n: Number of output points (at least 3)

    Returns:
        Resampled contour
    """
    if n < 3:
        raise InvalidContour(f"Resampling needs n >= 3, got {n}")

    closed = np.vstack([contour.points, contour.points[:1]])
    segments = np.diff(closed, axis=0)
    seg_len = np.linalg.norm(segments, axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = float(arc[-1])

    target = np.arange(n) * (total / n)
    idx = np.searchsorted(arc, target, side='right') - 1
    idx = np.clip(idx, 0, len(seg_len) - 1)
    local_t = (target - arc[idx]) / seg_len[idx]
    sampled = closed[idx] + local_t[:, None] * segments[idx]
    return Contour.from_points(sampled)


@dataclass(frozen=True)
class NormalizationRecord:
    """Centroid and mean radius removed by ``normalize``"""

    centroid: Point2
    scale: float

    def invert(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) * self.scale + np.asarray(self.centroid)


def normalize(contour: Contour) -> Tuple[Contour, NormalizationRecord]:
    """Translate the centroid to the origin and scale the mean radius to 1"""
    pts = contour.points
    centroid = pts.mean(axis=0)
    centred = pts - centroid
    scale = float(np.mean(np.linalg.norm(centred, axis=1)))
    if not np.isfinite(scale) or scale <= 0.0:
        raise ZeroExtent("Cannot normalize a contour whose points coincide")
    record = NormalizationRecord(Point2(float(centroid[0]), float(centroid[1])), scale)
    return Contour.from_points(centred / scale), record
