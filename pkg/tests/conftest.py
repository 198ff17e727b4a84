import numpy as np
import pytest

from sarfocus import (
    ObservationMatrix,
    SceneGrid,
    build_observation_matrix,
    default_radar_params,
    make_scene_grid,
)


@pytest.fixture
def radar():
    return default_radar_params()


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def small_matrix(radar, rows, cols):
    grid = make_scene_grid(radar, rows, cols)
    return build_observation_matrix(radar, grid)


@pytest.fixture
def C8(radar):
    return small_matrix(radar, 8, 8)


@pytest.fixture
def C4(radar):
    return small_matrix(radar, 4, 4)


def random_phase_matrix(n_apertures, n_samples, n_pixels, seed):
    """Synthetic unit-modulus observation matrix with random entry phases."""
    gen = np.random.default_rng(seed)
    phases = gen.uniform(-np.pi, np.pi, (n_apertures * n_samples, n_pixels))
    return ObservationMatrix(
        entries=np.exp(1j * phases),
        num_apertures=n_apertures,
        samples_per_pulse=n_samples,
    )


def single_pixel_grid():
    return SceneGrid(rows=1, cols=1, pixel_coords=np.zeros((1, 2)))
