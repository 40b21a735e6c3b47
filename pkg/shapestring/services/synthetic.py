"""
Synthetic labeled silhouettes for desk-scale retrieval experiments.

Each class is one base outline (star, ellipse, notched rectangle or smooth
blob). Instances perturb every point radially, then apply a random
rotation, scale and translation.
"""

import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Union

import numpy as np
import pandas as pd

from ..exceptions import FormatError
from ..utils.io_utils import atomic_write_tsv, load_contour, save_contour
from .contour import Contour, resample

logger = logging.getLogger(__name__)

BASE_POINTS = 400
SCALE_RANGE = (0.5, 2.0)
TRANSLATION_RANGE = 100.0
MANIFEST_NAME = 'manifest.tsv'


class LabeledContour(NamedTuple):
    id: str
    label: Optional[str]
    contour: Contour


def _densify(vertices: np.ndarray) -> np.ndarray:
    return resample(Contour.from_points(vertices), BASE_POINTS).points


def _star(rng: np.random.Generator, phase: float) -> np.ndarray:
    spikes = int(rng.integers(5, 9))
    inner = rng.uniform(0.4, 0.6)
    angles = phase + np.pi * np.arange(2 * spikes) / spikes
    radii = np.where(np.arange(2 * spikes) % 2 == 0, 1.0, inner)
    return _densify(np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]))


def _ellipse(rng: np.random.Generator, phase: float) -> np.ndarray:
    minor = rng.uniform(0.4, 0.7)
    t = phase + 2.0 * np.pi * np.arange(BASE_POINTS) / BASE_POINTS
    return np.column_stack([np.cos(t), minor * np.sin(t)])


def _notched_rectangle(rng: np.random.Generator, phase: float) -> np.ndarray:
    h = rng.uniform(0.5, 0.8)
    notch_w = rng.uniform(0.2, 0.4)
    notch_d = rng.uniform(0.2, 0.4) * h
    vertices = np.array([
        (-1.0, -h), (-notch_w, -h), (-notch_w, -h + notch_d), (notch_w, -h + notch_d),
        (notch_w, -h), (1.0, -h), (1.0, h), (-1.0, h),
    ])
    c, s = math.cos(phase), math.sin(phase)
    return _densify(vertices @ np.array([[c, s], [-s, c]]))


def _blob(rng: np.random.Generator, phase: float) -> np.ndarray:
    t = phase + 2.0 * np.pi * np.arange(BASE_POINTS) / BASE_POINTS
    radius = 1.0 + rng.uniform(0.15, 0.25) * np.cos(2 * t + rng.uniform(0, 2 * np.pi))
    for harmonic in range(3, 6):
        radius = radius + rng.uniform(0.0, 0.1) * np.cos(harmonic * t + rng.uniform(0, 2 * np.pi))
    return np.column_stack([radius * np.cos(t), radius * np.sin(t)])


FAMILIES: Dict[str, Callable[[np.random.Generator, float], np.ndarray]] = {
    'star': _star,
    'ellipse': _ellipse,
    'notched_rectangle': _notched_rectangle,
    'blob': _blob,
}


def _perturb(base: np.ndarray, rng: np.random.Generator, noise_level: float) -> np.ndarray:
    pts = base - base.mean(axis=0)
    radius = float(np.max(np.linalg.norm(pts, axis=1)))
    if noise_level > 0:
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        directions = np.divide(pts, norms, out=np.zeros_like(pts), where=norms > 0)
        shift = rng.uniform(-1.0, 1.0, size=(len(pts), 1)) * noise_level * radius
        pts = pts + directions * shift

    theta = rng.uniform(0.0, 2.0 * np.pi)
    scale = rng.uniform(*SCALE_RANGE)
    offset = rng.uniform(-TRANSLATION_RANGE, TRANSLATION_RANGE, size=2)
    c, s = math.cos(theta), math.sin(theta)
    return scale * pts @ np.array([[c, s], [-s, c]]) + offset


def gen_synthetic(class_count: int, per_class: int, noise_level: float = 0.0,
                  seed: int = 0) -> List[LabeledContour]:
    """
    Labeled contours, ``per_class`` instances of ``class_count`` base shapes

    Args:
        class_count: Number of classes; families cycle star, ellipse,
            notched rectangle, blob
        per_class: Instances per class
        noise_level: Radial noise bound as a fraction of the base radius
        seed: Seed of the only random generator used

    Returns:
        Contours ordered by class, then instance
    """
    if class_count < 1 or per_class < 1:
        raise ValueError("class_count and per_class must be at least 1")
    if noise_level < 0:
        raise ValueError("noise_level must be non-negative")

    rng = np.random.default_rng(seed)
    names = list(FAMILIES)
    bases = []
    for c in range(class_count):
        family = names[c % len(names)]
        phase = rng.uniform(0.0, 2.0 * np.pi)
        bases.append((f'c{c:02d}-{family}', FAMILIES[family](rng, phase)))

    items = []
    for label, base in bases:
        for i in range(per_class):
            points = _perturb(base, rng, noise_level)
            items.append(LabeledContour(f'{label}-{i:02d}', label, Contour.from_points(points)))

    logger.debug(f"Generated {len(items)} contours in {class_count} classes (noise {noise_level}, seed {seed})")
    return items


def write_dataset(items: List[LabeledContour], directory: Union[str, Path]) -> Path:
    """One contour JSON per item plus a manifest of id, label and relative path"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for item in items:
        name = f'{item.id}.json'
        save_contour(directory / name, item.contour)
        rows.append({'id': item.id, 'label': item.label or '', 'path': name})
    atomic_write_tsv(directory / MANIFEST_NAME, pd.DataFrame(rows, columns=['id', 'label', 'path']))
    return directory / MANIFEST_NAME


def load_dataset(directory: Union[str, Path]) -> List[LabeledContour]:
    directory = Path(directory)
    manifest = directory / MANIFEST_NAME
    if not manifest.exists():
        raise FormatError(f"{directory}: no {MANIFEST_NAME}")
    frame = pd.read_csv(manifest, sep='\t', dtype=str, keep_default_na=False)
    missing = {'id', 'label', 'path'} - set(frame.columns)
    if missing:
        raise FormatError(f"{manifest}: missing columns {sorted(missing)}")
    return [
        LabeledContour(row.id, row.label or None, load_contour(directory / row.path))
        for row in frame.itertuples(index=False)
    ]
