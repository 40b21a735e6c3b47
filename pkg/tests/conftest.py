import os

import numpy as np
import pytest

from shapestring.services.contour import Contour
from shapestring.utils.config import RunConfig

WORKED_A = 'S S1 S2 A1 D1'
WORKED_B = 'L S1 M2 A1 D2'


def make_blob(n=120, seed=3, center=(0.0, 0.0), scale=1.0):
    """Smooth asymmetric outline from a few random Fourier harmonics"""
    rng = np.random.default_rng(seed)
    t = 2.0 * np.pi * (np.arange(n) + 0.37) / n
    radius = 1.0 + 0.2 * np.cos(2 * t + rng.uniform(0, 2 * np.pi))
    for harmonic in (3, 4):
        radius = radius + rng.uniform(0.03, 0.08) * np.cos(harmonic * t + rng.uniform(0, 2 * np.pi))
    pts = np.column_stack([radius * np.cos(t), radius * np.sin(t)]) * scale + np.asarray(center)
    return Contour.from_points(pts)


def make_circle(n=64, radius=1.0):
    t = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    return Contour.from_points(np.column_stack([radius * np.cos(t), radius * np.sin(t)]))


@pytest.fixture
def blob():
    return make_blob()


@pytest.fixture
def unit_square():
    return Contour.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def run_config(monkeypatch):
    for key in list(os.environ):
        if key.startswith('SHAPESTRING_'):
            monkeypatch.delenv(key, raising=False)
    return RunConfig(use_env=False)


@pytest.fixture
def worked_pair():
    return WORKED_A, WORKED_B
