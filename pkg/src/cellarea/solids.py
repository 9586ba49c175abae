"""Reference constants and the face-normal sets of the classical tangent solids."""

from __future__ import annotations

import itertools
import math

import numpy as np

#: Lower bound on the average cell surface area of a normal tiling.
AREA_LOWER_BOUND = 24.0 / math.sqrt(3.0)
#: Surface area of the rhombic dodecahedron of inradius 1 (FCC Voronoi cell).
RHOMBIC_DODECAHEDRON_AREA = 12.0 * math.sqrt(2.0)
#: Surface area of the regular dodecahedron of inradius 1, as quoted (4 decimals).
DODECAHEDRON_AREA_QUOTED = 16.6508
#: Brakke's modified Williams foam cell area; reference only, never reproduced.
BRAKKE_FOAM_AREA = 16.95753
#: Densest packing density of unit balls.
KEPLER_DENSITY = math.pi / math.sqrt(18.0)
#: Total edge length of the cube circumscribed about the unit ball.
CUBE_EDGE_TOTAL = 24.0

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def _unit_rows(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    return a / np.linalg.norm(a, axis=1)[:, None]


def _signed_perms(base) -> list[tuple[float, float, float]]:
    out: set[tuple[float, float, float]] = set()
    for perm in itertools.permutations(base):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            out.add(tuple(float(s * c) for s, c in zip(signs, perm)))
    return sorted(out)


def _cyclic_signed(base) -> list[tuple[float, float, float]]:
    out: set[tuple[float, float, float]] = set()
    for shift in range(3):
        rot = base[shift:] + base[:shift]
        for signs in itertools.product((1.0, -1.0), repeat=3):
            out.add(tuple(float(s * c) for s, c in zip(signs, rot)))
    return sorted(out)


def tetrahedron_normals() -> np.ndarray:
    return _unit_rows([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)])


def cube_normals() -> np.ndarray:
    return _unit_rows([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])


def octahedron_normals() -> np.ndarray:
    return _unit_rows(list(itertools.product((1, -1), repeat=3)))


def fcc_normals() -> np.ndarray:
    """The 12 nearest-neighbour directions of the FCC lattice."""
    return _unit_rows(_signed_perms((1.0, 1.0, 0.0)))


def dodecahedron_normals() -> np.ndarray:
    """Face normals of the regular dodecahedron (the icosahedron's vertices)."""
    return _unit_rows(_cyclic_signed((0.0, 1.0, GOLDEN)))


def icosahedron_normals() -> np.ndarray:
    """Face normals of the regular icosahedron (the dodecahedron's vertices)."""
    pts = [tuple(float(c) for c in v) for v in itertools.product((1, -1), repeat=3)]
    pts += _cyclic_signed((0.0, 1.0 / GOLDEN, GOLDEN))
    return _unit_rows(sorted(set(pts)))


def regular_dodecahedron_closed_form() -> dict[str, float]:
    """Closed-form metrics of the regular dodecahedron with inradius 1."""
    # inradius = edge * sqrt(250 + 110 sqrt5) / 20
    edge = 20.0 / math.sqrt(250.0 + 110.0 * math.sqrt(5.0))
    area = 3.0 * math.sqrt(25.0 + 10.0 * math.sqrt(5.0)) * edge**2
    beta = math.acos(-1.0 / math.sqrt(5.0))
    return {
        "edge": edge,
        "sarea": area,
        "vol": area / 3.0,
        "dihedral": beta,
        "total_edge_length": 30.0 * edge,
        "ecurv": 30.0 * edge / math.tan(beta / 2.0),
    }


def truncated_octahedron_closed_form() -> dict[str, float]:
    """Closed-form metrics of the BCC Voronoi cell at nearest-neighbour distance 2."""
    s = 2.0 / math.sqrt(6.0)
    beta_hs = math.acos(-1.0 / math.sqrt(3.0))
    beta_hh = math.acos(-1.0 / 3.0)
    return {
        "edge": s,
        "sarea": (6.0 + 12.0 * math.sqrt(3.0)) * s**2,
        "vol": 8.0 * math.sqrt(2.0) * s**3,
        "total_edge_length": 36.0 * s,
        "ecurv": s * (24.0 / math.tan(beta_hs / 2.0) + 12.0 / math.tan(beta_hh / 2.0)),
        "inradius": 1.0,
        "circumradius": s * math.sqrt(10.0) / 2.0,
    }


def symmetric_seeds(n: int) -> list[np.ndarray]:
    """Highly symmetric normal configurations with exactly ``n`` members."""
    table = {
        4: [tetrahedron_normals],
        6: [cube_normals],
        8: [octahedron_normals],
        12: [dodecahedron_normals, fcc_normals],
        20: [icosahedron_normals],
    }
    return [f() for f in table.get(n, [])]
