import math

import numpy as np
import pytest

from cellarea.errors import DegenerateInput, DegenerateFace
from cellarea.optimizer import area_objective
from cellarea.polyhedron import HalfSpace, bounded_intersection, tangent_polytope


def random_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def random_tangent_polytope(rng: np.random.Generator, n_min: int = 8, n_max: int = 30):
    """A bounded polytope whose every face plane touches the unit ball."""
    while True:
        normals = random_unit_vectors(rng, int(rng.integers(n_min, n_max + 1)))
        if not math.isfinite(area_objective(normals)):
            continue
        try:
            return tangent_polytope(normals)
        except (DegenerateInput, DegenerateFace):
            continue


def random_unit_ball_cell(rng: np.random.Generator, n_min: int = 8, n_max: int = 30):
    """A bounded polytope containing the unit ball, with faces at distances in [1, 2]."""
    while True:
        normals = random_unit_vectors(rng, int(rng.integers(n_min, n_max + 1)))
        if not math.isfinite(area_objective(normals)):
            continue
        offsets = rng.uniform(1.0, 2.0, len(normals))
        try:
            return bounded_intersection([HalfSpace(tuple(n), float(d)) for n, d in zip(normals, offsets)])
        except (DegenerateInput, DegenerateFace):
            continue


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
