"""Minimum-area convex polytopes circumscribed about the unit ball.

A candidate is a set of N unit normals; the polytope is ``{x : x . n_j <= 1}``
so every face plane touches the unit ball.  Its surface area is evaluated
through the polar body: the vertices of the polytope are the poles of the
facets of ``conv(n_j)``, and each face is fanned from its tangent point
``n_j``, which always lies inside that face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError

from .errors import NoBoundedCandidate
from .polyhedron import ConvexPolyhedron, tangent_polytope
from .solids import symmetric_seeds

#: Nelder-Mead stops once every simplex vertex is this close to the best one
SIMPLEX_TOL = 1e-8
MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class TangentPolytopeParams:
    normals: np.ndarray

    def __post_init__(self):
        n = np.array(self.normals, dtype=float).reshape(-1, 3)
        if len(n) < 4:
            raise ValueError("a bounded tangent polytope needs at least 4 normals")
        n = n / np.linalg.norm(n, axis=1)[:, None]
        n.setflags(write=False)
        object.__setattr__(self, "normals", n)

    @classmethod
    def from_angles(cls, x: np.ndarray) -> "TangentPolytopeParams":
        return cls(_angles_to_normals(x))

    def angles(self) -> np.ndarray:
        n = self.normals
        theta = np.arccos(np.clip(n[:, 2], -1.0, 1.0))
        phi = np.arctan2(n[:, 1], n[:, 0])
        return np.column_stack([theta, phi]).ravel()

    def polytope(self) -> ConvexPolyhedron:
        return tangent_polytope(self.normals)


def _angles_to_normals(x: np.ndarray) -> np.ndarray:
    a = np.asarray(x, dtype=float).reshape(-1, 2)
    st = np.sin(a[:, 0])
    return np.column_stack([st * np.cos(a[:, 1]), st * np.sin(a[:, 1]), np.cos(a[:, 0])])


def _area(normals: np.ndarray) -> float:
    try:
        hull = ConvexHull(normals)
    except (QhullError, ValueError):
        return math.inf
    off = hull.equations[:, 3]
    if np.any(off > -1e-9):
        # origin not strictly inside conv(normals): the polytope is unbounded
        return math.inf
    poles = hull.equations[:, :3] / (-off)[:, None]
    simp = hull.simplices
    total = 0.0
    for slot in range(3):
        nb = hull.neighbors[:, slot]
        a = poles
        b = poles[nb]
        for other in ((slot + 1) % 3, (slot + 2) % 3):
            t = normals[simp[:, other]]
            total += 0.5 * float(np.linalg.norm(np.cross(a - t, b - t), axis=1).sum())
    # every ridge was visited from both of its simplices
    return total / 2.0


def area_objective(params: TangentPolytopeParams | np.ndarray) -> float:
    """Surface area of the tangent polytope, ``inf`` when it is unbounded."""
    normals = params.normals if isinstance(params, TangentPolytopeParams) else np.asarray(params, dtype=float)
    return _area(normals)


@dataclass(frozen=True)
class RestartSummary:
    index: int
    seed_kind: str
    area: float
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    best_params: TangentPolytopeParams
    best_area: float
    history: list[tuple[int, float]]
    restarts_used: int
    restarts: list[RestartSummary] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "n_faces": len(self.best_params.normals),
            "best_area": self.best_area,
            "best_normals": self.best_params.normals.tolist(),
            "restarts_used": self.restarts_used,
            "restarts": [r.__dict__ for r in self.restarts],
            "history": [[i, a] for i, a in self.history],
        }


def _random_bounded_normals(n: int, rng: np.random.Generator, tries: int = 10_000) -> np.ndarray | None:
    for _ in range(tries):
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        if math.isfinite(_area(v)):
            return v
    return None


def _starts(N: int, restarts: int, seed: int) -> list[tuple[str, np.ndarray | None]]:
    starts: list[tuple[str, np.ndarray | None]] = [("symmetric", s) for s in symmetric_seeds(N)][:restarts]
    streams = np.random.SeedSequence(seed).spawn(restarts)
    for k in range(len(starts), restarts):
        starts.append(("random", _random_bounded_normals(N, np.random.default_rng(streams[k]))))
    return starts


def _nelder_mead(x0: np.ndarray, max_iter: int, step: float):
    dim = len(x0)
    simplex = np.vstack([x0, x0 + step * np.eye(dim)])
    history: list[tuple[int, float]] = []
    best = [math.inf]

    def f(x):
        val = _area(_angles_to_normals(x))
        if val < best[0]:
            best[0] = val
        return val

    def record(xk):
        history.append((len(history) + 1, best[0]))

    res = minimize(
        f,
        x0,
        method="Nelder-Mead",
        callback=record,
        options={
            "initial_simplex": simplex,
            "xatol": SIMPLEX_TOL,
            "fatol": math.inf,
            "maxiter": max_iter,
            "maxfev": 10 * max_iter * dim,
            "adaptive": dim > 10,
        },
    )
    return res, history


def minimize_area(N: int, restarts: int, seed: int, max_iter: int = MAX_ITER, step: float = 0.1) -> OptimizationResult:
    """Best tangent polytope with ``N`` faces over ``restarts`` Nelder-Mead runs.

    Starts are the exact symmetric configurations with ``N`` members (when
    any exist), then uniformly random normal sets drawn from independent
    streams spawned from ``seed``.  Deterministic for fixed arguments; the
    winner is the minimum by ``(area, restart index)``.
    """
    if N < 4:
        raise ValueError("N must be at least 4")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    runs = []
    for idx, (kind, start) in enumerate(_starts(N, restarts, seed)):
        if start is None:
            runs.append((math.inf, idx, kind, None, [], 0, False))
            continue
        x0 = TangentPolytopeParams(start).angles()
        res, hist = _nelder_mead(x0, max_iter, step)
        area = float(res.fun)
        normals = _angles_to_normals(res.x)
        start_area = _area(start)
        if start_area < area:
            # never report worse than the starting configuration
            area, normals = start_area, start
        runs.append((area, idx, kind, normals, hist, int(res.nit), res.nit < max_iter))
    area, idx, _, normals, hist, _, _ = min(runs, key=lambda r: (r[0], r[1]))
    if not math.isfinite(area):
        raise NoBoundedCandidate(f"no bounded tangent polytope found for N={N}")
    summaries = [RestartSummary(r[1], r[2], r[0], r[5], r[6]) for r in runs]
    return OptimizationResult(TangentPolytopeParams(normals), area, hist, len(runs), summaries)
