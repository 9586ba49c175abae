"""Periodic unit-ball packings, their Voronoi tilings and cube-window accounting.

Every cell of a periodic Voronoi tiling is a translate of one of a few
prototype cells (one per motif point), so a window report only builds the
prototypes once.  Cells are then classified against the window ``C_L`` with a
vectorised separating-axis test; only cells straddling ``bd C_L`` are clipped,
and clips are cached by the offsets of the cutting planes relative to the
cell's center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .certificates import CertificateReport, make_report
from .errors import CutoffTooSmall, GeometryError, UnknownPreset
from .polyhedron import (
    EPS_GEOM_REL,
    CellMetrics,
    ConvexPolyhedron,
    HalfSpace,
    _clip_with_planes,
    _volume,
    intersect_halfspaces,
    metrics,
)
from .solids import AREA_LOWER_BOUND

PRESETS = ("SC", "FCC", "BCC", "HCP")


@dataclass(frozen=True, eq=False)
class PeriodicPacking:
    """Lattice (rows of ``basis``) plus motif of unit-ball centers."""

    basis: np.ndarray
    motif: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float).reshape(3, 3)
        motif = np.array(self.motif, dtype=float).reshape(-1, 3)
        det = float(np.linalg.det(basis))
        if abs(det) < 1e-9 * float(np.prod(np.linalg.norm(basis, axis=1))):
            raise ValueError("lattice basis is singular")
        basis.setflags(write=False)
        motif.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "motif", motif)

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.basis)))

    def points_near(self, center, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """All packing centers within ``radius`` of ``center``.

        Returns ``(points, motif_ids)`` in deterministic lattice order.
        """
        c = np.asarray(center, dtype=float)
        pts, ids = self.points_in_box(c - radius, c + radius)
        keep = np.linalg.norm(pts - c, axis=1) <= radius
        return pts[keep], ids[keep]

    def points_in_box(self, lo, hi) -> tuple[np.ndarray, np.ndarray]:
        """All centers in the closed axis-aligned box ``[lo, hi]``."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        inv = np.linalg.inv(self.basis)
        corners = np.array([[(lo, hi)[(k >> j) & 1][j] for j in range(3)] for k in range(8)])
        pts_all = []
        ids_all = []
        for j, m in enumerate(self.motif):
            coef = (corners - m) @ inv
            nlo = np.floor(coef.min(axis=0)).astype(int) - 1
            nhi = np.ceil(coef.max(axis=0)).astype(int) + 1
            grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(nlo, nhi)], indexing="ij")
            n = np.stack([g.ravel() for g in grids], axis=1)
            p = n @ self.basis + m
            keep = np.all((p >= lo) & (p <= hi), axis=1)
            pts_all.append(p[keep])
            ids_all.append(np.full(int(keep.sum()), j))
        pts = np.concatenate(pts_all)
        ids = np.concatenate(ids_all)
        order = np.lexsort((ids, pts[:, 2], pts[:, 1], pts[:, 0]))
        return pts[order], ids[order]

    def min_distance(self) -> float:
        """Minimum pairwise center distance over the infinite packing."""
        reach = float(np.max(np.linalg.norm(self.basis, axis=1))) * 2.0
        best = math.inf
        for m in self.motif:
            pts, _ = self.points_near(m, reach)
            d = np.linalg.norm(pts - m, axis=1)
            d = d[d > 1e-12]
            if len(d):
                best = min(best, float(d.min()))
        return best


def preset_packing(name: str) -> PeriodicPacking:
    """Preset packing scaled so the minimum center distance is exactly 2."""
    key = name.upper()
    if key == "SC":
        return PeriodicPacking(2.0 * np.eye(3), [[0.0, 0.0, 0.0]], "SC")
    if key == "FCC":
        a = 2.0 * math.sqrt(2.0)
        motif = [[0, 0, 0], [0, a / 2, a / 2], [a / 2, 0, a / 2], [a / 2, a / 2, 0]]
        return PeriodicPacking(a * np.eye(3), motif, "FCC")
    if key == "BCC":
        a = 4.0 / math.sqrt(3.0)
        return PeriodicPacking(a * np.eye(3), [[0, 0, 0], [a / 2, a / 2, a / 2]], "BCC")
    if key == "HCP":
        c = 4.0 * math.sqrt(2.0 / 3.0)
        basis = [[2.0, 0.0, 0.0], [1.0, math.sqrt(3.0), 0.0], [0.0, 0.0, c]]
        second = np.array([2.0, 0.0, 0.0]) / 3.0 + np.array([1.0, math.sqrt(3.0), 0.0]) / 3.0
        motif = [[0.0, 0.0, 0.0], [second[0], second[1], c / 2.0]]
        return PeriodicPacking(basis, motif, "HCP")
    raise UnknownPreset(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")


# --------------------------------------------------------------------------
# Voronoi cells


def _bisector_cell(center: np.ndarray, others: np.ndarray, bound: float) -> ConvexPolyhedron:
    v = others - center
    dist = np.linalg.norm(v, axis=1)
    keep = dist > 1e-12
    v, dist = v[keep], dist[keep]
    order = np.argsort(dist, kind="stable")
    hs = [HalfSpace(tuple(v[k] / dist[k]), dist[k] / 2.0) for k in order]
    return intersect_halfspaces(hs, bound)


def _circumradius(P: ConvexPolyhedron) -> float:
    return float(np.max(np.linalg.norm(P.vertices, axis=1)))


def _same_cell(P: ConvexPolyhedron, Q: ConvexPolyhedron, tol: float) -> bool:
    if P.n_vertices != Q.n_vertices or P.n_faces != Q.n_faces:
        return False
    a = P.vertices[np.lexsort(P.vertices.T[::-1])]
    b = Q.vertices[np.lexsort(Q.vertices.T[::-1])]
    return bool(np.max(np.abs(a - b)) <= tol)


def voronoi_cell(p: PeriodicPacking, center_index: int, cutoff_R: float | None = None) -> ConvexPolyhedron:
    """Voronoi cell of motif point ``center_index``, in coordinates centered on it.

    Bisector planes of all centers within ``2 * cutoff_R`` are used.  By
    default ``cutoff_R`` is grown until it is at least the cell's
    circumradius (the packing's covering radius for this motif point), which
    makes the cell exact.  The result is then re-computed at ``2 * cutoff_R``
    and :class:`CutoffTooSmall` is raised if the two disagree.
    """
    o = p.motif[center_index]
    if cutoff_R is None:
        R = max(1.0, 0.5 * float(np.min(np.linalg.norm(p.basis, axis=1))))
        while True:
            pts, _ = p.points_near(o, 2.0 * R)
            cell = _bisector_cell(o, pts, 4.0 * R)
            rho = _circumradius(cell) if cell.intrinsically_bounded else math.inf
            if cell.intrinsically_bounded and rho <= R:
                break
            R = 2.0 * R if not math.isfinite(rho) else rho * (1.0 + 1e-9)
    else:
        R = float(cutoff_R)
        pts, _ = p.points_near(o, 2.0 * R)
        cell = _bisector_cell(o, pts, 4.0 * R)
        if not cell.intrinsically_bounded:
            raise CutoffTooSmall(f"cutoff {R} leaves the Voronoi cell unbounded")
    pts2, _ = p.points_near(o, 4.0 * R)
    check = _bisector_cell(o, pts2, 4.0 * R)
    if not _same_cell(cell, check, EPS_GEOM_REL * 8.0 * R):
        raise CutoffTooSmall(f"doubling the cutoff {R} changes the Voronoi cell")
    return cell


def voronoi_cell_of_centers(centers, index: int, bound: float) -> ConvexPolyhedron:
    """Voronoi cell of ``centers[index]`` among an explicit finite center list.

    Absolute coordinates.  Cells of hull points are cut by a safety cube of
    half-width ``bound`` around their center and flagged not intrinsically
    bounded.
    """
    c = np.asarray(centers, dtype=float)
    o = c[index]
    return _bisector_cell(o, c, bound).translated(o)


# --------------------------------------------------------------------------
# window accounting


@dataclass(frozen=True)
class WindowReport:
    L: float
    n_contained: int
    n_boundary: int
    n_cells: int
    sum_clipped_sarea: float
    average_sarea: float
    f_L: float
    g_L: float
    delta_upper: float
    delta_bar_upper: float
    density: float
    sum_clipped_vol: float
    max_cell_sarea: float
    max_cell_edge_length: float
    max_cell_diameter: float

    @property
    def boundary_ratio(self) -> float:
        return self.n_boundary / self.n_contained if self.n_contained else math.inf

    @property
    def delta(self) -> float:
        """Actual value of the window's area excess ``f(L) - sum of clipped areas``."""
        return self.f_L - self.sum_clipped_sarea

    @property
    def cell_density(self) -> float:
        """Ball volume over the volume of the contained cells' clipped parts."""
        return (4.0 * math.pi / 3.0) * self.n_contained / self.sum_clipped_vol

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["boundary_ratio"] = self.boundary_ratio
        out["cell_density"] = self.cell_density
        return out


@dataclass(frozen=True, eq=False)
class _Prototype:
    cell: ConvexPolyhedron
    metrics: CellMetrics
    axes: np.ndarray
    proj_min: np.ndarray
    proj_max: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    interior_edge_total: float = 0.0
    records: list = field(default_factory=list)


def _prototype(cell: ConvexPolyhedron) -> _Prototype:
    m = metrics(cell)
    eye = np.eye(3)
    cand = [eye, cell.normals]
    v = cell.vertices
    dirs = np.array([v[e.v1] - v[e.v0] for e in cell.edges])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    for k in range(3):
        cr = np.cross(dirs, eye[k])
        nrm = np.linalg.norm(cr, axis=1)
        cand.append(cr[nrm > 1e-9] / nrm[nrm > 1e-9, None])
    axes = np.concatenate(cand)
    # canonical sign, then de-duplicate
    sgn = np.sign(axes[np.arange(len(axes)), np.abs(axes).argmax(axis=1)])
    axes = axes * sgn[:, None]
    _, uniq = np.unique(np.round(axes, 9), axis=0, return_index=True)
    axes = axes[np.sort(uniq)]
    proj = v @ axes.T
    return _Prototype(
        cell=cell,
        metrics=m,
        axes=axes,
        proj_min=proj.min(axis=0),
        proj_max=proj.max(axis=0),
        lo=v.min(axis=0),
        hi=v.max(axis=0),
    )


@dataclass(frozen=True)
class _ClipSummary:
    sarea: float
    interior_area: float
    interior_edge_length: float
    vol: float


class _WindowAccountant:
    """Accumulates window quantities over (prototype, center) cells."""

    def __init__(self, prototypes: Sequence[_Prototype], L: float):
        self.protos = prototypes
        self.L = float(L)
        self.cache: dict = {}

    def classify(self, proto_id: int, centers: np.ndarray):
        """Return masks (touch, interior_overlap, strictly_inside) for translates."""
        pr = self.protos[proto_id]
        h = self.L / 2.0
        scale = max(self.L, float(np.max(pr.hi - pr.lo)))
        eps = EPS_GEOM_REL * scale
        shift = centers @ pr.axes.T
        half = h * np.abs(pr.axes).sum(axis=1)
        overlap = np.minimum(pr.proj_max + shift, half) - np.maximum(pr.proj_min + shift, -half)
        touch = np.all(overlap >= -eps, axis=1)
        interior = np.all(overlap > eps, axis=1)
        inside = np.all(centers + pr.hi < h - eps, axis=1) & np.all(centers + pr.lo > -h + eps, axis=1)
        return touch, interior, inside

    def cut_planes(self, proto_id: int, center: np.ndarray) -> tuple[tuple, list[HalfSpace]]:
        """Window planes reaching the cell, in cell-centered coordinates, plus a cache key."""
        pr = self.protos[proto_id]
        h = self.L / 2.0
        eps = EPS_GEOM_REL * max(self.L, 1.0)
        key_parts: list = [proto_id]
        planes = []
        for axis in range(3):
            for sign in (1.0, -1.0):
                reach = pr.hi[axis] if sign > 0 else -pr.lo[axis]
                rel = h - sign * center[axis]
                if reach >= rel - eps:
                    key_parts.append((axis, sign, round(rel, 9)))
                    n = [0.0, 0.0, 0.0]
                    n[axis] = sign
                    planes.append(HalfSpace(tuple(n), rel))
        return tuple(key_parts), planes

    def clip(self, proto_id: int, center: np.ndarray) -> _ClipSummary:
        pr = self.protos[proto_id]
        key, planes = self.cut_planes(proto_id, center)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        Q, on_cube = _clip_with_planes(pr.cell, planes)
        areas = Q.face_areas
        interior_edges = [
            length for e, length in zip(Q.edges, Q.edge_lengths) if not on_cube[e.f0] and not on_cube[e.f1]
        ]
        summary = _ClipSummary(
            sarea=math.fsum(areas),
            interior_area=math.fsum(a for a, flag in zip(areas, on_cube) if not flag),
            interior_edge_length=math.fsum(interior_edges),
            vol=_volume(Q),
        )
        self.cache[key] = summary
        return summary

    def report(self, proto_ids: np.ndarray, centers: np.ndarray) -> WindowReport:
        L = self.L
        n = len(centers)
        touch = np.zeros(n, bool)
        interior = np.zeros(n, bool)
        inside = np.zeros(n, bool)
        for pid in range(len(self.protos)):
            sel = proto_ids == pid
            if sel.any():
                t, i, s = self.classify(pid, centers[sel])
                touch[sel], interior[sel], inside[sel] = t, i, s
        eps = EPS_GEOM_REL * max(L, 1.0)
        contained = np.all(np.abs(centers) <= L / 2.0 - 1.0 + eps, axis=1)
        boundary = touch & ~(interior & inside)

        f_terms: list[float] = []
        g_terms: list[float] = []
        clipped_area: list[float] = []
        clipped_vol: list[float] = []
        delta_terms: list[float] = []
        delta_bar_terms: list[float] = []
        for k in range(n):
            if not touch[k]:
                continue
            pr = self.protos[int(proto_ids[k])]
            m = pr.metrics
            if interior[k] and inside[k]:
                f_terms.append(m.sarea)
                g_terms.append(m.total_edge_length)
                if contained[k]:
                    clipped_area.append(m.sarea)
                    clipped_vol.append(m.vol)
                continue
            # boundary cell
            delta_terms.append(2.0 * m.sarea)
            delta_bar_terms.append(m.total_edge_length)
            if interior[k]:
                c = self.clip(int(proto_ids[k]), centers[k])
                f_terms.append(c.interior_area)
                f_terms.append(m.sarea - c.interior_area)  # delta_i
                g_terms.append(c.interior_edge_length)
                if contained[k]:
                    clipped_area.append(c.sarea)
                    clipped_vol.append(c.vol)
            else:
                f_terms.append(m.sarea)  # delta_i: nothing of P_i lies inside C_L
                if contained[k]:
                    raise GeometryError("a contained ball lies in a cell without interior overlap")

        n_contained = int(contained.sum())
        total_area = math.fsum(clipped_area)
        return WindowReport(
            L=L,
            n_contained=n_contained,
            n_boundary=int(boundary.sum()),
            n_cells=int(interior.sum()),
            sum_clipped_sarea=total_area,
            average_sarea=total_area / n_contained if n_contained else math.nan,
            f_L=math.fsum(f_terms),
            g_L=math.fsum(g_terms) / math.sqrt(3.0),
            delta_upper=math.fsum(delta_terms),
            delta_bar_upper=math.fsum(delta_bar_terms),
            density=(4.0 * math.pi / 3.0) * n_contained / L**3,
            sum_clipped_vol=math.fsum(clipped_vol),
            max_cell_sarea=max(p.metrics.sarea for p in self.protos),
            max_cell_edge_length=max(p.metrics.total_edge_length for p in self.protos),
            max_cell_diameter=max(p.metrics.diameter for p in self.protos),
        )


_PROTOTYPE_CACHE: dict[tuple, list[_Prototype]] = {}


def packing_prototypes(p: PeriodicPacking, cutoff_R: float | None = None) -> list[_Prototype]:
    key = (p.basis.tobytes(), p.motif.tobytes(), cutoff_R)
    protos = _PROTOTYPE_CACHE.get(key)
    if protos is None:
        protos = [_prototype(voronoi_cell(p, j, cutoff_R)) for j in range(len(p.motif))]
        _PROTOTYPE_CACHE[key] = protos
    return protos


def _window_candidates(p: PeriodicPacking, protos: Sequence[_Prototype], L: float):
    reach = max(float(np.max(np.abs(np.concatenate([pr.lo, pr.hi])))) for pr in protos)
    h = L / 2.0 + reach + 1e-6
    return p.points_in_box(np.full(3, -h), np.full(3, h))


def window_report(p: PeriodicPacking, L: float, cutoff_R: float | None = None) -> WindowReport:
    """All cube-window quantities for the Voronoi tiling of ``p`` and window ``C_L``."""
    if not L > 0:
        raise ValueError("L must be positive")
    protos = packing_prototypes(p, cutoff_R)
    centers, ids = _window_candidates(p, protos, L)
    return _WindowAccountant(protos, L).report(ids, centers)


def window_cells(p: PeriodicPacking, L: float, cutoff_R: float | None = None) -> list[ConvexPolyhedron]:
    """Every cell of the tiling clipped to ``C_L`` (cells with interior overlap only)."""
    protos = packing_prototypes(p, cutoff_R)
    centers, ids = _window_candidates(p, protos, L)
    acct = _WindowAccountant(protos, L)
    out = []
    for pid, pr in enumerate(protos):
        sel = np.nonzero(ids == pid)[0]
        _, interior, inside = acct.classify(pid, centers[sel])
        for k, i_ok, s_ok in zip(sel, interior, inside):
            if not i_ok:
                continue
            if s_ok:
                out.append(pr.cell.translated(centers[k]))
            else:
                planes = acct.cut_planes(pid, centers[k])[1]
                out.append(_clip_with_planes(pr.cell, planes)[0].translated(centers[k]))
    return out


def window_report_from_cells(cells: Sequence[ConvexPolyhedron], centers, L: float) -> WindowReport:
    """Window report for an explicit finite list of cells (absolute coordinates).

    ``centers[i]`` is the unit-ball center inside ``cells[i]``.  Cells not
    listed are assumed to lie outside the window.
    """
    c = np.asarray(centers, dtype=float).reshape(-1, 3)
    protos = [_prototype(cell.translated(-ci)) for cell, ci in zip(cells, c)]
    return _WindowAccountant(protos, L).report(np.arange(len(protos)), c)


@dataclass(frozen=True)
class SeriesReport:
    preset: str
    reports: tuple[WindowReport, ...]

    @property
    def min_average(self) -> float:
        """Minimum over the series; the finite stand-in for the liminf."""
        return min(r.average_sarea for r in self.reports)

    @property
    def final_average(self) -> float:
        return self.reports[-1].average_sarea

    def as_dict(self) -> dict:
        return {
            "preset": self.preset,
            "reports": [r.as_dict() for r in self.reports],
            "min_average_sarea": self.min_average,
            "final_average_sarea": self.final_average,
        }


def average_sarea_series(p: PeriodicPacking, Ls: Sequence[float], cutoff_R: float | None = None) -> SeriesReport:
    Ls = [float(x) for x in Ls]
    if not Ls or any(b <= a for a, b in zip(Ls, Ls[1:])):
        raise ValueError("Ls must be a non-empty strictly increasing sequence")
    return SeriesReport(p.name, tuple(window_report(p, L, cutoff_R) for L in Ls))


# --------------------------------------------------------------------------
# window certificates


def density_bound_check(r: WindowReport, rel_tol: float | None = None) -> CertificateReport:
    """Finite-window density chain: ``density <= 4 pi / average_sarea``."""
    return make_report("density-chain", 4.0 * math.pi / r.average_sarea, r.density, rel_tol)


def window_certificates(r: WindowReport, rel_tol: float | None = None) -> list[CertificateReport]:
    """Every inequality of the window argument evaluated on one report."""
    n_b, n_c = r.n_boundary, r.n_contained
    main_lhs = (2.0 * r.max_cell_sarea * n_b + r.sum_clipped_sarea) / n_c
    main_rhs = (-r.max_cell_edge_length * n_b + n_c * AREA_LOWER_BOUND) / n_c
    return [
        make_report("window-average-lower-bound", r.average_sarea, AREA_LOWER_BOUND, rel_tol),
        make_report("window-f-ge-g", r.f_L, r.g_L, rel_tol),
        make_report("window-area-excess-nonneg", r.f_L, r.sum_clipped_sarea, rel_tol),
        make_report("window-area-excess-upper", r.sum_clipped_sarea + r.delta_upper, r.f_L, rel_tol),
        make_report("window-edge-length-bound", r.g_L, -r.delta_bar_upper + n_c * AREA_LOWER_BOUND, rel_tol),
        make_report("window-corrected-average", main_lhs, main_rhs, rel_tol),
        make_report("density-cell-volume", (4.0 * math.pi / 3.0) * n_c / r.sum_clipped_vol, r.density, rel_tol),
        make_report("density-area", 4.0 * math.pi * n_c / r.sum_clipped_sarea, r.cell_density, rel_tol),
        density_bound_check(r, rel_tol),
    ]


def meeting_segments_of_packing(p: PeriodicPacking, radius: float = 1.5, cutoff_R: float | None = None):
    """Meeting segments of the Voronoi tiling whose midpoints lie near the origin.

    All cells that can touch the ball of ``radius`` are built, so every
    returned segment carries its full set of incident cells.
    """
    from .certificates import meeting_segments

    protos = packing_prototypes(p, cutoff_R)
    reach = max(_circumradius(pr.cell) for pr in protos)
    centers, ids = p.points_near(np.zeros(3), radius + 2.0 * reach)
    cells = [protos[int(j)].cell.translated(c) for c, j in zip(centers, ids)]
    segs = meeting_segments(cells, select=lambda mid: float(np.linalg.norm(mid)) <= radius)
    return [s for s, _ in segs]
