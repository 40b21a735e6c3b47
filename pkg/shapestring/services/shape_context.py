"""
Shape context matching and pose alignment.

Per-point log-polar histograms, chi-square matching costs, one-to-one
assignment and a closed-form similarity Procrustes fit that brings the
second shape onto the first.

Transforms act on points written as complex numbers x + iy: a rotation by
``r`` multiplies by exp(i r). With y pointing down this turns clockwise on
screen.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..exceptions import DegenerateCorrespondence, DimensionMismatch, InvalidContour, ZeroExtent
from .contour import Contour, Point2

logger = logging.getLogger(__name__)

PointsLike = Union[Contour, np.ndarray, Sequence[Sequence[float]]]

# Relative eigenvalue gap under which a shape has no principal axis
ISOTROPY_GAP = 1e-3
# Third moment (normalized units) under which the axis direction is undecided
SKEW_TOLERANCE = 1e-3


def as_points(shape: PointsLike) -> np.ndarray:
    if isinstance(shape, Contour):
        return shape.points
    arr = np.asarray(shape, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidContour(f"Expected an (n, 2) point array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ScConfig:
    radial_bins: int = 5
    angular_bins: int = 12
    r_inner: float = 0.125
    r_outer: float = 2.0
    dummy_cost: float = 0.25

    def __post_init__(self):
        if self.radial_bins < 1 or self.angular_bins < 1:
            raise ValueError("Shape context needs at least one radial and one angular bin")
        if not 0.0 < self.r_inner < self.r_outer:
            raise ValueError("Shape context radii must satisfy 0 < r_inner < r_outer")

    @property
    def bin_count(self) -> int:
        return self.radial_bins * self.angular_bins


@dataclass(frozen=True, eq=False)
class ScHistogram:
    """Raw bin counts of one point's shape context"""

    counts: np.ndarray

    @property
    def norm(self) -> np.ndarray:
        total = self.counts.sum()
        if total == 0:
            return np.zeros(len(self.counts), dtype=float)
        return self.counts / total

    def __len__(self) -> int:
        return len(self.counts)


def compute_histograms(shape: PointsLike, cfg: ScConfig = ScConfig()) -> List[ScHistogram]:
    """
    Log-polar histogram of the other n-1 points around every point

    Radial edges are log-spaced between r_inner and r_outer times the mean
    pairwise distance; distances beyond either end fall in the first or last
    ring. Angles are measured in the global frame.

    Args:
        shape: Contour or (n, 2) point array with n >= 2
        cfg: Bin layout

    Returns:
        One histogram per point, bins ordered ring-major
    """
    pts = as_points(shape)
    n = len(pts)
    if n < 2:
        raise InvalidContour("Shape context needs at least 2 points")

    diff = pts[None, :, :] - pts[:, None, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    off_diag = ~np.eye(n, dtype=bool)
    mean_dist = float(dist[off_diag].mean())

    edges = np.logspace(np.log10(cfg.r_inner), np.log10(cfg.r_outer), cfg.radial_bins + 1) * mean_dist
    ring = np.searchsorted(edges[1:-1], dist, side='right')

    theta = np.mod(np.arctan2(diff[..., 1], diff[..., 0]), 2.0 * np.pi)
    wedge = np.minimum((theta / (2.0 * np.pi / cfg.angular_bins)).astype(int), cfg.angular_bins - 1)

    bins = ring * cfg.angular_bins + wedge
    histograms = []
    for i in range(n):
        counts = np.bincount(bins[i][off_diag[i]], minlength=cfg.bin_count)
        histograms.append(ScHistogram(counts=counts))
    return histograms


def _as_distribution(h: Union[ScHistogram, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(h, ScHistogram):
        return h.norm
    arr = np.asarray(h, dtype=float)
    total = arr.sum()
    return arr / total if total > 0 else arr


def chi2_cost(h, g) -> float:
    """Half the chi-square statistic between two normalized histograms, in [0, 1]"""
    p = _as_distribution(h)
    q = _as_distribution(g)
    if p.shape != q.shape:
        raise DimensionMismatch(f"Histogram sizes differ: {p.shape[0]} vs {q.shape[0]}")
    num = (p - q) ** 2
    den = p + q
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return 0.5 * float(terms.sum())


@dataclass(frozen=True, eq=False)
class CostMatrix:
    entries: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape


def cost_matrix(hists_a: Sequence[ScHistogram], hists_b: Sequence[ScHistogram]) -> CostMatrix:
    """Chi-square cost between every histogram of a and every histogram of b"""
    p = np.stack([_as_distribution(h) for h in hists_a])
    q = np.stack([_as_distribution(h) for h in hists_b])
    if p.shape[1] != q.shape[1]:
        raise DimensionMismatch(f"Histogram sizes differ: {p.shape[1]} vs {q.shape[1]}")
    num = (p[:, None, :] - q[None, :, :]) ** 2
    den = p[:, None, :] + q[None, :, :]
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return CostMatrix(entries=0.5 * terms.sum(axis=2))


@dataclass(frozen=True)
class Correspondence:
    pairs: Tuple[Tuple[int, int], ...]
    total_cost: float

    def __len__(self) -> int:
        return len(self.pairs)


def assign(cost: Union[CostMatrix, np.ndarray], dummy_cost: float = 0.25) -> Correspondence:
    """
    Minimum-cost one-to-one matching

    Rectangular matrices are padded to square with ``dummy_cost`` entries;
    pairs that land on a dummy row or column are dropped.
    """
    entries = np.asarray(cost.entries if isinstance(cost, CostMatrix) else cost, dtype=float)
    n, m = entries.shape
    if n < 1 or m < 1:
        raise ValueError("Assignment needs a non-empty cost matrix")

    size = max(n, m)
    padded = np.full((size, size), float(dummy_cost))
    padded[:n, :m] = entries
    rows, cols = linear_sum_assignment(padded)

    pairs = tuple((int(i), int(j)) for i, j in zip(rows, cols) if i < n and j < m)
    total = float(sum(entries[i, j] for i, j in pairs))
    return Correspondence(pairs=pairs, total_cost=total)


@dataclass(frozen=True)
class SimilarityTransform:
    """p -> scale * R(rotation) p + translation"""

    rotation: float = 0.0
    scale: float = 1.0
    translation: Point2 = field(default_factory=lambda: Point2(0.0, 0.0))

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("Similarity transform scale must be positive")

    @property
    def coefficient(self) -> complex:
        return self.scale * complex(math.cos(self.rotation), math.sin(self.rotation))

    def apply(self, shape: PointsLike) -> np.ndarray:
        pts = as_points(shape)
        z = pts[:, 0] + 1j * pts[:, 1]
        w = self._apply_complex(z)
        return np.column_stack([w.real, w.imag])

    def _apply_complex(self, z: np.ndarray) -> np.ndarray:
        return self.coefficient * z + self.offset

    @property
    def offset(self) -> complex:
        return complex(self.translation.x, self.translation.y)

    def inverse(self) -> 'SimilarityTransform':
        a = 1.0 / self.coefficient
        return SimilarityTransform.from_coefficients(a, -a * self.offset)

    def compose(self, inner: 'SimilarityTransform') -> 'SimilarityTransform':
        """Transform applying ``inner`` first, then this one"""
        a = self.coefficient
        return SimilarityTransform.from_coefficients(a * inner.coefficient, a * inner.offset + self.offset)

    @classmethod
    def from_coefficients(cls, a: complex, t: complex) -> 'SimilarityTransform':
        return cls(rotation=math.atan2(a.imag, a.real), scale=abs(a), translation=Point2(t.real, t.imag))

    def to_dict(self) -> dict:
        return {
            'rotation': self.rotation,
            'scale': self.scale,
            'translation': [self.translation.x, self.translation.y],
        }


@dataclass(frozen=True)
class ProcrustesResult:
    transform: SimilarityTransform
    aligned: np.ndarray
    residual: float


def _to_complex(pts: np.ndarray) -> np.ndarray:
    return pts[:, 0] + 1j * pts[:, 1]


def procrustes(target: PointsLike, source: PointsLike, corr: Correspondence) -> ProcrustesResult:
    """
    Least-squares similarity transform taking matched source points onto the target

    Args:
        target: Reference shape (pair index i)
        source: Shape to move (pair index j)
        corr: Pairs (i, j), at least two

    Returns:
        Transform, the full transformed source and the RMS residual over the pairs
    """
    if len(corr.pairs) < 2:
        raise DegenerateCorrespondence("Procrustes needs at least 2 corresponding pairs")

    tgt = as_points(target)
    src = as_points(source)
    idx_t = np.array([i for i, _ in corr.pairs])
    idx_s = np.array([j for _, j in corr.pairs])
    y = _to_complex(tgt[idx_t])
    x = _to_complex(src[idx_s])

    mu_x = x.mean()
    mu_y = y.mean()
    xc = x - mu_x
    yc = y - mu_y
    energy = np.vdot(xc, xc).real
    if energy <= 1e-24 * max(1.0, float(np.max(np.abs(x)) ** 2)):
        raise DegenerateCorrespondence("Matched source points are all coincident")

    a = np.vdot(xc, yc) / energy
    t = mu_y - a * mu_x
    transform = SimilarityTransform.from_coefficients(complex(a), complex(t))

    moved = a * _to_complex(src) + t
    residual = float(np.sqrt(np.mean(np.abs(a * x + t - y) ** 2)))
    return ProcrustesResult(
        transform=transform,
        aligned=np.column_stack([moved.real, moved.imag]),
        residual=residual,
    )


@dataclass(frozen=True)
class AlignmentTrace:
    """Outcome of ``align_pair``; ``aligned`` is shape b moved onto shape a"""

    aligned: Contour
    correspondence: Correspondence
    transform: SimilarityTransform
    residual: float
    refined: bool

    def to_dict(self) -> dict:
        return {
            'pairs': [list(p) for p in self.correspondence.pairs],
            'transform': self.transform.to_dict(),
            'residual': self.residual,
            'total_cost': self.correspondence.total_cost,
            'refined': self.refined,
        }


def _match(a_hists: List[ScHistogram], b_shape: np.ndarray, cfg: ScConfig) -> Correspondence:
    costs = cost_matrix(a_hists, compute_histograms(b_shape, cfg))
    return assign(costs, cfg.dummy_cost)


def _start_shapes(pts_a: np.ndarray, pts_b: np.ndarray) -> List[np.ndarray]:
    """b as given, then b laid on a's principal axis in both directions"""
    try:
        from_a = principal_pose(pts_a).inverse()
        to_frame = principal_pose(pts_b)
    except ZeroExtent:
        return [pts_b]
    flipped = SimilarityTransform(rotation=math.pi).compose(to_frame)
    return [pts_b, from_a.compose(to_frame).apply(pts_b), from_a.compose(flipped).apply(pts_b)]


def align_pair(a: PointsLike, b: PointsLike, cfg: ScConfig = ScConfig()) -> AlignmentTrace:
    """
    Pose-align shape b onto shape a

    Histograms are binned in the global frame, so b is first matched from a
    few start poses: as given, and turned onto a's principal axis in both
    directions. The start whose Procrustes fit leaves the smallest residual
    seeds one refinement round (histograms of the aligned b, re-assignment,
    re-fit of the original b). The refined fit is kept only when its
    residual does not grow. Every fit maps the original b, so the returned
    transform already includes the start pose.
    """
    pts_a = as_points(a)
    pts_b = as_points(b)
    if len(pts_a) != len(pts_b):
        logger.debug(f"Aligning shapes of different sizes ({len(pts_a)} vs {len(pts_b)})")

    a_hists = compute_histograms(pts_a, cfg)
    corr, fit = None, None
    failure = None
    for start in _start_shapes(pts_a, pts_b):
        start_corr = _match(a_hists, start, cfg)
        try:
            start_fit = procrustes(pts_a, pts_b, start_corr)
        except DegenerateCorrespondence as e:
            failure = e
            continue
        if fit is None or start_fit.residual < fit.residual:
            corr, fit = start_corr, start_fit
    if fit is None:
        raise failure

    refined_corr = _match(a_hists, fit.aligned, cfg)
    refined_fit = procrustes(pts_a, pts_b, refined_corr)

    refined = refined_fit.residual <= fit.residual
    if refined:
        corr, fit = refined_corr, refined_fit
    logger.debug(f"Pair aligned: residual={fit.residual:.6g}, refined={refined}")

    return AlignmentTrace(
        aligned=Contour.from_points(fit.aligned),
        correspondence=corr,
        transform=fit.transform,
        residual=fit.residual,
        refined=refined,
    )


def principal_pose(points: PointsLike) -> SimilarityTransform:
    """
    Transform taking points to their canonical frame

    Centroid to the origin, mean radius to 1, principal axis onto +x. The
    axis direction follows the sign of the third moment along it, or the
    side of the first point when the shape is symmetric about its minor
    axis. Shapes without a principal axis turn their first point onto +x.
    """
    pts = as_points(points)
    centroid = pts.mean(axis=0)
    centred = pts - centroid
    scale = float(np.mean(np.linalg.norm(centred, axis=1)))
    if not np.isfinite(scale) or scale <= 0.0:
        raise ZeroExtent("Cannot pose a shape whose points coincide")
    centred = centred / scale

    cov = centred.T @ centred / len(centred)
    evals, evecs = np.linalg.eigh(cov)
    gap = (evals[1] - evals[0]) / (evals[1] + evals[0])
    if gap > ISOTROPY_GAP:
        axis = evecs[:, 1]
        proj = centred @ axis
        m3 = float(np.mean(proj ** 3))
        if abs(m3) > SKEW_TOLERANCE:
            sign = 1.0 if m3 > 0 else -1.0
        else:
            sign = 1.0 if proj[0] >= 0 else -1.0
        angle = math.atan2(sign * axis[1], sign * axis[0])
    else:
        angle = math.atan2(centred[0, 1], centred[0, 0])

    a = complex(math.cos(-angle), math.sin(-angle)) / scale
    t = -a * complex(centroid[0], centroid[1])
    return SimilarityTransform.from_coefficients(a, t)


def canonical_pose(contour: Contour) -> Tuple[Contour, SimilarityTransform]:
    """Move a contour into its canonical frame (see ``principal_pose``)"""
    transform = principal_pose(contour)
    return Contour.from_points(transform.apply(contour)), transform
