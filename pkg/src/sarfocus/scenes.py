"""Builtin synthetic test scenes.

All scenes are magnitude images in [0, 1] with zero phase, returned as
column-major flattened complex vectors of a size x size grid.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

# (row, col) fractions of the point reflectors in the "points" scene.
POINT_REFLECTORS = (
    (0.25, 0.25),
    (0.25, 0.70),
    (0.50, 0.50),
    (0.75, 0.30),
    (0.70, 0.75),
    (0.40, 0.80),
    (0.80, 0.60),
    (0.30, 0.45),
    (0.60, 0.20),
)

# (row0, row1, col0, col1, magnitude) fractions of the "blocks" scene regions.
BLOCK_REGIONS = (
    (0.125, 0.375, 0.125, 0.50, 1.0),
    (0.5625, 0.875, 0.625, 0.875, 1.0),
    (0.625, 0.8125, 0.1875, 0.375, 0.5),
)

BUILTIN_SCENES = ("points", "blocks", "constant")


def make_builtin_scene(name: str, size: int) -> np.ndarray:
    """Deterministic synthetic scene as a complex vector of length size**2."""
    if size < 4:
        raise ConfigurationError("builtin scenes need size >= 4")
    image = np.zeros((size, size))
    if name == "constant":
        image[:, :] = 1.0
    elif name == "points":
        for row_frac, col_frac in POINT_REFLECTORS:
            image[int(row_frac * size), int(col_frac * size)] = 1.0
    elif name == "blocks":
        for r0, r1, c0, c1, mag in BLOCK_REGIONS:
            image[int(r0 * size) : int(r1 * size), int(c0 * size) : int(c1 * size)] = mag
    else:
        raise ConfigurationError(
            f"unknown builtin scene {name!r}; choose from {BUILTIN_SCENES}"
        )
    return image.flatten(order="F").astype(complex)
