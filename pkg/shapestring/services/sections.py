"""
Section extraction.

Each sector run is split at inflexion points into Line, Convex and Concave
sections, and every section gets its five features: area, chord angle,
convexity degree and the two endpoint distances from the circle centre.

Runs are expected in the clockwise (image frame) traversal produced by
``to_clockwise``. There a left-turning corner of the outline has a positive
cross product and bulges outward, so positive smoothed curvature is Convex.
This is the familiar "negative cross product is Convex" rule of a y-up
frame, written with y pointing down: both label sections that bulge away
from the interior.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np

from ..exceptions import ZeroChord
from .arp import SurroundingCircle
from .contour import Point2

logger = logging.getLogger(__name__)

# Chords shorter than this fraction of R count as zero length
CHORD_TOLERANCE = 1e-12


class SectionKind(str, Enum):
    LINE = 'line'
    CONVEX = 'convex'
    CONCAVE = 'concave'


@dataclass(frozen=True)
class SectionConfig:
    window: int = 5
    eps_line: float = 1e-6

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("Curvature smoothing window must be at least 1")
        if self.eps_line < 0:
            raise ValueError("eps_line must be non-negative")


@dataclass(frozen=True, eq=False)
class Section:
    kind: SectionKind
    first: Point2
    last: Point2
    points: np.ndarray
    area: float
    alpha: float
    degree: float
    d1: float
    d2: float

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'first': [self.first.x, self.first.y],
            'last': [self.last.x, self.last.y],
            'point_count': len(self.points),
            'area': self.area,
            'alpha': self.alpha,
            'degree': self.degree,
            'd1': self.d1,
            'd2': self.d2,
        }


def turning_sines(points: np.ndarray) -> np.ndarray:
    """Signed sine of the turning angle at every interior point; ends copy their neighbour"""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    kappa = np.zeros(n)
    if n < 3:
        return kappa

    a = pts[1:-1] - pts[:-2]
    b = pts[2:] - pts[1:-1]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    lengths = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    kappa[1:-1] = np.divide(cross, lengths, out=np.zeros_like(cross), where=lengths > 0)
    kappa[0] = kappa[1]
    kappa[-1] = kappa[-2]
    return kappa


def smooth(values: np.ndarray, window: int) -> np.ndarray:
    """Centred moving average, the window clipped at both ends"""
    n = len(values)
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(values)])
    lo = np.clip(np.arange(n) - half, 0, n)
    hi = np.clip(np.arange(n) + (window - half), 0, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def curvature_labels(points: np.ndarray, cfg: SectionConfig = SectionConfig()):
    """
    Smoothed curvature and its label per point

    Returns:
        (smoothed, labels) where labels are +1 (convex), -1 (concave) or 0 (line)
    """
    smoothed = smooth(turning_sines(points), cfg.window)
    labels = np.sign(smoothed).astype(int)
    labels[np.abs(smoothed) < cfg.eps_line] = 0
    return smoothed, labels


def detect_inflexions(points: np.ndarray, cfg: SectionConfig = SectionConfig()) -> List[int]:
    """
    Split indices where the curvature label changes

    Between points j-1 and j with different labels the split falls on the
    one with the smaller smoothed curvature. Runs under 3 points have none.
    """
    if len(points) < 3:
        return []
    smoothed, labels = curvature_labels(points, cfg)
    splits: List[int] = []
    for j in np.flatnonzero(np.diff(labels) != 0) + 1:
        j = int(j)
        at = j - 1 if abs(smoothed[j - 1]) <= abs(smoothed[j]) else j
        if 0 < at < len(points) - 1 and (not splits or splits[-1] != at):
            splits.append(at)
    return splits


def _kind_of(labels: np.ndarray, smoothed: np.ndarray, a: int, b: int) -> SectionKind:
    if b - a >= 2:
        label = labels[a + 1]
    else:
        label = labels[a] if abs(smoothed[a]) >= abs(smoothed[b]) else labels[b]
    if label > 0:
        return SectionKind.CONVEX
    if label < 0:
        return SectionKind.CONCAVE
    return SectionKind.LINE


def _polygon_area(pts: np.ndarray) -> float:
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def _features(pts: np.ndarray, kind: SectionKind, circle: SurroundingCircle, closed: bool) -> Section:
    origin = np.asarray(circle.center)
    radius = circle.radius
    p_first = pts[0]
    p_last = pts[-1]

    chord = p_last - p_first
    chord_len = float(np.hypot(*chord))
    if chord_len <= CHORD_TOLERANCE * radius:
        if kind is not SectionKind.LINE and not closed:
            raise ZeroChord("Section endpoints coincide")
        # closed loop: chord from the first point to the farthest one
        spread = np.linalg.norm(pts - p_first, axis=1)
        chord = pts[int(np.argmax(spread))] - p_first
        chord_len = float(np.hypot(*chord))

    if chord_len > 0:
        alpha = math.atan2(chord[1], chord[0]) % math.pi
        if alpha >= math.pi:
            alpha = 0.0
    else:
        alpha = 0.0

    if kind is SectionKind.LINE or chord_len == 0:
        area = 0.0
        degree = 0.0
    else:
        area = _polygon_area(pts) / (math.pi * radius ** 2)
        rel = pts - p_first
        sagitta = np.abs(chord[0] * rel[:, 1] - chord[1] * rel[:, 0]) / chord_len
        degree = float(np.max(sagitta)) / chord_len

    return Section(
        kind=kind,
        first=Point2(float(p_first[0]), float(p_first[1])),
        last=Point2(float(p_last[0]), float(p_last[1])),
        points=pts,
        area=area,
        alpha=float(alpha),
        degree=degree,
        d1=float(np.hypot(*(p_first - origin))) / radius,
        d2=float(np.hypot(*(p_last - origin))) / radius,
    )


def make_sections(run: np.ndarray, circle: SurroundingCircle,
                  cfg: SectionConfig = SectionConfig(), closed: bool = False) -> List[Section]:
    """
    Split one sector run into sections and measure each of them

    Args:
        run: (n, 2) points of the run in contour order
        circle: Surrounding circle of the whole contour
        cfg: Curvature smoothing settings
        closed: The run is the entire contour; its first point is appended
            so the loop closes

    Returns:
        Sections in run order; consecutive sections share their split point
    """
    pts = np.asarray(run, dtype=float)
    if closed:
        pts = np.vstack([pts, pts[:1]])

    if len(pts) < 3:
        return [_features(pts, SectionKind.LINE, circle, closed)]

    smoothed, labels = curvature_labels(pts, cfg)
    bounds = [0] + detect_inflexions(pts, cfg) + [len(pts) - 1]

    sections = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        kind = _kind_of(labels, smoothed, a, b)
        whole_loop = closed and len(bounds) == 2
        sections.append(_features(pts[a:b + 1], kind, circle, whole_loop))
    return sections
