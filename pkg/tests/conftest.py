import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lesionpipe.grid import LabelMask, ProbabilityMap, VoxelGeometry, Volume3D


def make_geometry(spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    return VoxelGeometry(np.asarray(spacing, float), np.asarray(origin, float))


def make_volume(values, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    return Volume3D(np.asarray(values, np.float32), make_geometry(spacing, origin))


def make_mask(labels, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    return LabelMask(np.asarray(labels, np.uint8), make_geometry(spacing, origin))


def make_prob(probs, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    return ProbabilityMap(np.asarray(probs, np.float32), make_geometry(spacing, origin))


def random_mask(rng, dims, density=0.3, spacing=(1.0, 1.0, 1.0)):
    return make_mask((rng.random(dims) < density).astype(np.uint8), spacing)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
