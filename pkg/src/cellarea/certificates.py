"""Numerical certificates for the per-cell and per-partition area inequalities.

Every check returns a :class:`CertificateReport` with ``slack = lhs - rhs``;
a report passes when ``slack >= -tol`` where ``tol`` is the relative
certificate tolerance scaled by ``max(1, |rhs|)``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CaseSumMismatch, InvalidDiameter, NotAPartition, PreconditionViolated
from .polyhedron import EPS_ANGLE, EPS_GEOM_REL, CellMetrics, ConvexPolyhedron, metrics
from .solids import AREA_LOWER_BOUND, CUBE_EDGE_TOTAL

DEFAULT_REL_TOL = 1e-7
TOL_ENV_VAR = "CELLAREA_TOL"


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV_VAR)
    return float(raw) if raw else DEFAULT_REL_TOL


@dataclass(frozen=True)
class CertificateReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tol: float
    extra: dict = field(default_factory=dict, compare=False)
    related: tuple["CertificateReport", ...] = ()

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "tol": self.tol,
        }
        if self.extra:
            out["extra"] = dict(self.extra)
        return out

    def flatten(self) -> list["CertificateReport"]:
        out = [self]
        for r in self.related:
            out.extend(r.flatten())
        return out


def make_report(name: str, lhs: float, rhs: float, rel_tol: float | None = None, **extra) -> CertificateReport:
    """Report for the inequality ``lhs >= rhs``."""
    rel = default_tol() if rel_tol is None else rel_tol
    lhs = float(lhs)
    rhs = float(rhs)
    tol = rel * max(1.0, abs(rhs))
    slack = lhs - rhs
    return CertificateReport(name, lhs, rhs, slack, bool(slack >= -tol), tol, extra)


def _as_metrics(m) -> CellMetrics:
    return metrics(m) if isinstance(m, ConvexPolyhedron) else m


def _require_unit_ball(m: CellMetrics, rel_tol: float | None) -> None:
    tol = default_tol() if rel_tol is None else rel_tol
    if m.inradius < 1.0 - tol:
        raise PreconditionViolated(f"cell does not contain a unit ball (inradius {m.inradius:.12g})")


# --------------------------------------------------------------------------
# per-cell inequalities


def check_fejes_toth(m, rel_tol: float | None = None) -> CertificateReport:
    """``sarea^2 >= 3 vol ecurv`` (Brunn-Minkowski consequence)."""
    m = _as_metrics(m)
    return make_report("fejes-toth", m.sarea**2, 3.0 * m.vol * m.ecurv, rel_tol)


def check_containment_volume(m, rel_tol: float | None = None) -> CertificateReport:
    """``vol >= sarea / 3`` for a cell containing a unit ball."""
    m = _as_metrics(m)
    _require_unit_ball(m, rel_tol)
    return make_report("containment-volume", m.vol, m.sarea / 3.0, rel_tol)


def check_area_dominates_ecurv(m, rel_tol: float | None = None) -> CertificateReport:
    m = _as_metrics(m)
    _require_unit_ball(m, rel_tol)
    return make_report("area-dominates-ecurv", m.sarea, m.ecurv, rel_tol)


def check_besicovitch_eggleston(m, rel_tol: float | None = None) -> CertificateReport:
    """Total edge length of a cell containing a unit ball is at least the cube's 24."""
    m = _as_metrics(m)
    _require_unit_ball(m, rel_tol)
    return make_report("besicovitch-eggleston", m.total_edge_length, CUBE_EDGE_TOTAL, rel_tol)


def check_jung_area(m, rel_tol: float | None = None) -> CertificateReport:
    """Area is at most that of the Jung ball: ``(3/2) pi diam^2``."""
    m = _as_metrics(m)
    return make_report("jung-area-bound", 1.5 * math.pi * m.diameter**2, m.sarea, rel_tol)


CELL_CHECKS = (
    check_fejes_toth,
    check_containment_volume,
    check_area_dominates_ecurv,
    check_besicovitch_eggleston,
)


def certify_cell(m, rel_tol: float | None = None) -> list[CertificateReport]:
    """Run the four per-cell checks; raises on a violated precondition."""
    m = _as_metrics(m)
    return [check(m, rel_tol) for check in CELL_CHECKS]


# --------------------------------------------------------------------------
# meeting segments

CASE_TOTALS = {"A_cube_edge": math.pi / 2.0, "B_face_interior": math.pi, "C_interior": 2.0 * math.pi}
CASE_MIN_K = {"A_cube_edge": 1, "B_face_interior": 2, "C_interior": 3}


@dataclass(frozen=True)
class MeetingSegment:
    """A segment along which ``k`` cells meet with inner dihedral angles ``betas``."""

    case_tag: str
    k: int
    betas: tuple[float, ...]

    def __post_init__(self):
        if self.case_tag not in CASE_TOTALS:
            raise ValueError(f"unknown case tag {self.case_tag!r}")
        betas = tuple(float(b) for b in self.betas)
        object.__setattr__(self, "betas", betas)
        if self.k != len(betas):
            raise ValueError("k must equal the number of angles")
        if self.k < CASE_MIN_K[self.case_tag]:
            raise ValueError(f"case {self.case_tag} needs k >= {CASE_MIN_K[self.case_tag]}")
        if any(not (0.0 < b < math.pi) for b in betas):
            raise ValueError("inner dihedral angles must lie in (0, pi)")

    @property
    def total(self) -> float:
        return CASE_TOTALS[self.case_tag]

    @property
    def case_bound(self) -> float:
        """Bound attained by equal angles: ``k cot(total / 2k)``."""
        return self.k / math.tan(self.total / (2.0 * self.k))


def cot_sum_bound(seg: MeetingSegment, rel_tol: float | None = None) -> CertificateReport:
    """``sum cot(beta_i / 2) >= k / sqrt 3``, with the sharper case bound attached."""
    s = math.fsum(seg.betas)
    if abs(s - seg.total) > EPS_ANGLE * max(1, seg.k):
        raise CaseSumMismatch(f"angles sum to {s!r}, case {seg.case_tag} requires {seg.total!r}")
    lhs = math.fsum(1.0 / math.tan(b / 2.0) for b in seg.betas)
    sharp = make_report("cot-sum-case-bound", lhs, seg.case_bound, rel_tol)
    base = make_report("cot-sum", lhs, seg.k / math.sqrt(3.0), rel_tol, case=seg.case_tag, k=seg.k, case_bound=seg.case_bound)
    return CertificateReport(base.name, base.lhs, base.rhs, base.slack, base.passed, base.tol, base.extra, (sharp,))


def _line_key(a: np.ndarray, b: np.ndarray, q: float):
    d = b - a
    d = d / np.linalg.norm(d)
    # sign fixed by the first clearly non-zero component (ties in magnitude are common)
    j = int(np.argmax(np.abs(d) > 1e-6))
    if d[j] < 0:
        d = -d
    foot = a - (a @ d) * d
    key = tuple(int(round(x / 1e-9)) for x in d) + tuple(int(round(x / q)) for x in foot)
    return key, d


def meeting_segments(
    cells: Sequence[ConvexPolyhedron],
    cube_side: float | None = None,
    center=(0.0, 0.0, 0.0),
    select: Callable[[np.ndarray], bool] | None = None,
):
    """Group the edges of a cell family into maximal meeting segments.

    Edges are hashed by their supporting line (quantised at the geometric
    tolerance), split at every endpoint on that line, and each elementary
    piece collects the inner dihedral angles of the cells having an edge
    there.  Returns ``(MeetingSegment, midpoint)`` pairs.

    With ``cube_side`` the family partitions that cube: pieces on a cube edge
    are case A, pieces in a cube face are case B.  Interior pieces are case B
    when their angles sum to ``pi`` (a cell face passes straight through),
    otherwise case C.  ``select`` filters pieces by midpoint before they are
    classified (use it to drop pieces on the fringe of a finite cell set).
    """
    scale = max(c.scale for c in cells)
    eps = EPS_GEOM_REL * scale
    lines: dict[tuple, list] = {}
    dirs: dict[tuple, np.ndarray] = {}
    for ci, cell in enumerate(cells):
        v = cell.vertices
        for e, beta in zip(cell.edges, cell.dihedral_angles):
            a, b = v[e.v0], v[e.v1]
            key, d = _line_key(a, b, eps)
            dirs.setdefault(key, d)
            d0 = dirs[key]
            ta, tb = float(a @ d0), float(b @ d0)
            lines.setdefault(key, []).append((min(ta, tb), max(ta, tb), ci, float(beta), a, b))

    c0 = np.asarray(center, dtype=float)
    out = []
    for key in sorted(lines):
        items = lines[key]
        d = dirs[key]
        ts = sorted(t for it in items for t in it[:2])
        breaks = [ts[0]]
        for t in ts[1:]:
            if t - breaks[-1] > eps:
                breaks.append(t)
        ref_a, ref_ta = items[0][4], float(items[0][4] @ d)
        for lo, hi in zip(breaks, breaks[1:]):
            cover = sorted((ci, beta) for tlo, thi, ci, beta, _, _ in items if tlo <= lo + eps and thi >= hi - eps)
            if not cover:
                continue
            betas = tuple(beta for _, beta in cover)
            mid = ref_a + ((lo + hi) / 2.0 - ref_ta) * d
            if select is not None and not select(mid):
                continue
            tag = _classify(mid, d, betas, cube_side, c0, eps)
            out.append((MeetingSegment(tag, len(betas), betas), mid))
    return out


def _classify(mid, d, betas, cube_side, center, eps) -> str:
    if cube_side is not None:
        rel = mid - center
        on = [abs(abs(rel[k]) - cube_side / 2.0) <= eps * 10 and abs(d[k]) < 1e-9 for k in range(3)]
        if sum(on) >= 2:
            return "A_cube_edge"
        if sum(on) == 1:
            return "B_face_interior"
    if abs(math.fsum(betas) - math.pi) <= EPS_ANGLE * max(1, len(betas)):
        return "B_face_interior"
    return "C_interior"


# --------------------------------------------------------------------------
# partitions of a cube


def partition_area_certificate(
    cells: Sequence[ConvexPolyhedron],
    cube_side: float,
    center=(0.0, 0.0, 0.0),
    rel_tol: float | None = None,
    samples: int = 100_000,
    seed: int = 0,
) -> CertificateReport:
    """Total area of a cube partition into unit-ball cells is at least ``(24/sqrt 3) n``.

    The partition is checked by volume sum, containment in the cube and
    pairwise interior-disjointness on random samples.  Related reports: the
    intermediate edge-length aggregate and the cotangent-sum bound on every
    meeting segment.
    """
    ms = [metrics(c) for c in cells]
    c0 = np.asarray(center, dtype=float)
    h = cube_side / 2.0
    total_vol = math.fsum(m.vol for m in ms)
    if abs(total_vol - cube_side**3) > 1e-6 * cube_side**3:
        raise NotAPartition(f"cell volumes sum to {total_vol!r}, cube volume is {cube_side**3!r}")
    eps = EPS_GEOM_REL * cube_side
    for i, c in enumerate(cells):
        if np.any(np.abs(c.vertices - c0) > h + eps):
            raise NotAPartition(f"cell {i} leaves the cube")
    rng = np.random.default_rng(seed)
    pts = c0 + rng.uniform(-h, h, size=(samples, 3))
    hits = np.zeros(samples, dtype=int)
    for c in cells:
        hits += np.all(pts @ c.normals.T < c.offsets - eps, axis=1)
    if np.any(hits > 1):
        raise NotAPartition(f"{int(np.sum(hits > 1))} sample points lie in two cells")
    for i, m in enumerate(ms):
        try:
            _require_unit_ball(m, rel_tol)
        except PreconditionViolated as exc:
            raise PreconditionViolated(f"cell {i}: {exc}") from None

    n = len(cells)
    sarea = math.fsum(m.sarea for m in ms)
    edges = math.fsum(m.total_edge_length for m in ms)
    aggregate = make_report("partition-edge-aggregate", sarea, edges / math.sqrt(3.0), rel_tol)
    segment_reports = tuple(cot_sum_bound(seg, rel_tol) for seg, _ in meeting_segments(cells, cube_side, c0))
    seg_ok = all(r.passed for r in segment_reports)
    main = make_report("partition-area-bound", sarea, AREA_LOWER_BOUND * n, rel_tol, n_cells=n, n_segments=len(segment_reports), segments_pass=seg_ok)
    return CertificateReport(main.name, main.lhs, main.rhs, main.slack, main.passed, main.tol, main.extra, (aggregate,) + segment_reports)


def normality_bounds(D: float) -> tuple[float, float, float, float]:
    """Bounds for cells of diameter at most ``D``: (area, faces, edges, total edge length)."""
    if not D >= 2.0:
        raise InvalidDiameter(f"a cell containing a unit ball has diameter >= 2, got {D!r}")
    return (1.5 * math.pi * D**2, 8.0 * D**3 - 1.0, 24.0 * D**3 - 9.0, 24.0 * D**4 - 9.0 * D)
