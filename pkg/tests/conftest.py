import os
import sys

import numpy as np
import pytest

# Agregar path del proyecto
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.geometry.blockspace import SpaceSpec  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def l1_spec():
    """l^1_8(l^2_3) con pesos unitarios."""
    return SpaceSpec(p=1, q=2, n=8, d=3)


@pytest.fixture
def weighted_l1_spec():
    return SpaceSpec(p=1, q=2, n=6, d=3, weights=(0.5, 2.0, 1.5, 4.0, 0.1, 3.0))


@pytest.fixture
def lp_spec():
    return SpaceSpec(p=3, q=1.5, n=6, d=3, weights=(1.0, 0.5, 2.0, 1.0, 3.0, 0.25))


@pytest.fixture
def hilbert_spec():
    return SpaceSpec(p=2, q=2, n=4, d=2, weights=(1.0, 2.0, 0.5, 3.0))
