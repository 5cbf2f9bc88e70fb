import json

import numpy as np
import pytest

from memkernel.timegrid import Kernel, TimeGrid


@pytest.fixture
def unit_grid():
    return TimeGrid(1.0, 400)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_nonnegative_kernel(grid, rng, knots=6, high=2.0):
    """Piecewise-linear kernel with values in [0, high]."""
    x = np.linspace(0.0, grid.horizon, knots)
    y = rng.uniform(0.0, high, size=knots)
    return Kernel(grid.sample(lambda t: np.interp(t, x, y)))


@pytest.fixture
def write_params(tmp_path):
    """Write a params JSON file whose outputs land under tmp_path/out."""

    def write(params, name="params.json"):
        params = dict(params)
        params.setdefault("outputDirectory", str(tmp_path / "out"))
        path = tmp_path / name
        path.write_text(json.dumps(params))
        return str(path)

    return write
