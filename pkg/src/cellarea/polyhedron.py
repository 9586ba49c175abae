"""Bounded convex polyhedra built by incremental half-space clipping.

A polyhedron is constructed by starting from an axis-aligned bounding cube and
clipping it by one plane at a time (Sutherland-Hodgman on every face, plus a
new section face on the cutting plane).  Vertices created on an edge are
shared by both incident faces, so the face lattice stays consistent without
any global hull step.

All metric reductions run in face/edge index order, which makes results
bit-reproducible for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import (
    DegenerateFace,
    DegenerateInput,
    EmptyIntersection,
    EmptyInterior,
    GeometryError,
    InvalidPolyhedron,
)

EPS_UNIT = 1e-9
#: point-on-plane tolerance, relative to the characteristic length
EPS_GEOM_REL = 1e-9
#: adjacent faces closer than this to flat (radians) are merged
EPS_ANGLE = 1e-7


@dataclass(frozen=True)
class HalfSpace:
    """The closed half-space ``{x : x . normal <= offset}``."""

    normal: tuple[float, float, float]
    offset: float

    def __post_init__(self):
        n = tuple(float(c) for c in self.normal)
        if len(n) != 3:
            raise ValueError("normal must have three components")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))
        if abs(math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2) - 1.0) > EPS_UNIT:
            raise ValueError(f"half-space normal {n} is not a unit vector")

    @classmethod
    def normalized(cls, normal, offset) -> "HalfSpace":
        """Build from an arbitrary non-zero normal, rescaling the offset."""
        n = np.asarray(normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if norm == 0.0 or not math.isfinite(norm):
            raise ValueError("half-space normal must be a finite non-zero vector")
        return cls(tuple(n / norm), float(offset) / norm)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.normal)


class Face(NamedTuple):
    halfspace: int
    cycle: tuple[int, ...]


class Edge(NamedTuple):
    v0: int
    v1: int
    f0: int
    f1: int


class EdgeRecord(NamedTuple):
    """An edge with its length and inner dihedral angle, in world coordinates."""

    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    length: float
    beta: float


@dataclass(frozen=True)
class CellMetrics:
    sarea: float
    vol: float
    ecurv: float
    total_edge_length: float
    inradius: float
    diameter: float
    dihedral_angles: tuple[float, ...]
    edge_lengths: tuple[float, ...]
    chebyshev_center: tuple[float, float, float]

    def as_dict(self) -> dict:
        return {
            "sarea": self.sarea,
            "vol": self.vol,
            "ecurv": self.ecurv,
            "total_edge_length": self.total_edge_length,
            "inradius": self.inradius,
            "diameter": self.diameter,
            "n_edges": len(self.edge_lengths),
            "chebyshev_center": list(self.chebyshev_center),
            "dihedral_angles": list(self.dihedral_angles),
            "edge_lengths": list(self.edge_lengths),
        }


@dataclass(frozen=True, eq=False)
class ConvexPolyhedron:
    """An immutable bounded convex polyhedron with its full face lattice.

    ``halfspaces`` is the irredundant H-representation; ``faces[i].halfspace``
    indexes into it.  Face cycles are counterclockwise seen from outside.
    """

    halfspaces: tuple[HalfSpace, ...]
    vertices: np.ndarray
    faces: tuple[Face, ...]
    edges: tuple[Edge, ...]
    intrinsically_bounded: bool = True

    @cached_property
    def normals(self) -> np.ndarray:
        return np.array([h.normal for h in self.halfspaces])

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.array([h.offset for h in self.halfspaces])

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def scale(self) -> float:
        span = float(np.max(np.ptp(self.vertices, axis=0)))
        return max(span, 1e-300)

    @cached_property
    def face_areas(self) -> np.ndarray:
        areas = np.empty(len(self.faces))
        for i, face in enumerate(self.faces):
            areas[i] = _polygon_area(self.vertices[list(face.cycle)], self.normals[face.halfspace])
        return areas

    @cached_property
    def face_centroids(self) -> np.ndarray:
        out = np.empty((len(self.faces), 3))
        for i, face in enumerate(self.faces):
            out[i] = _polygon_centroid(self.vertices[list(face.cycle)], self.normals[face.halfspace])
        return out

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.array([float(np.linalg.norm(v[e.v1] - v[e.v0])) for e in self.edges])

    @cached_property
    def dihedral_angles(self) -> np.ndarray:
        """Inner dihedral angle of every edge, ``pi - angle(outer normals)``."""
        out = np.empty(len(self.edges))
        for i, e in enumerate(self.edges):
            n0 = self.normals[self.faces[e.f0].halfspace]
            n1 = self.normals[self.faces[e.f1].halfspace]
            c = min(1.0, max(-1.0, float(n0 @ n1)))
            out[i] = math.pi - math.acos(c)
        return out

    def edge_records(self) -> list[EdgeRecord]:
        v = self.vertices
        return [
            EdgeRecord(tuple(v[e.v0]), tuple(v[e.v1]), float(length), float(beta))
            for e, length, beta in zip(self.edges, self.edge_lengths, self.dihedral_angles)
        ]

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Boolean mask of points inside the closed polyhedron (with slack ``tol``)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(pts @ self.normals.T <= self.offsets + tol, axis=1)

    def translated(self, shift) -> "ConvexPolyhedron":
        t = np.asarray(shift, dtype=float)
        hs = tuple(HalfSpace(h.normal, h.offset + float(np.dot(h.normal, t))) for h in self.halfspaces)
        verts = self.vertices + t
        verts.setflags(write=False)
        return ConvexPolyhedron(hs, verts, self.faces, self.edges, self.intrinsically_bounded)

    def triangles(self) -> list[tuple[int, int, int]]:
        """Fan triangulation of every face, counterclockwise from outside."""
        tris = []
        for face in self.faces:
            c = face.cycle
            tris.extend((c[0], c[k], c[k + 1]) for k in range(1, len(c) - 1))
        return tris


# --------------------------------------------------------------------------
# polygon helpers


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (u, w) with u x w = normal."""
    a = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, a)
    u /= np.linalg.norm(u)
    w = np.cross(normal, u)
    return u, w


def _polygon_vector_area(pts: np.ndarray) -> np.ndarray:
    base = pts[0]
    rel = pts[1:] - base
    return 0.5 * np.cross(rel[:-1], rel[1:]).sum(axis=0)


def _polygon_area(pts: np.ndarray, normal: np.ndarray) -> float:
    return float(_polygon_vector_area(pts) @ normal)


def _polygon_centroid(pts: np.ndarray, normal: np.ndarray) -> np.ndarray:
    base = pts[0]
    a = pts[1:-1] - base
    b = pts[2:] - base
    w = np.cross(a, b) @ normal
    total = w.sum()
    if total <= 0:
        return pts.mean(axis=0)
    cent = (base + pts[1:-1] + pts[2:]) / 3.0
    return (w[:, None] * cent).sum(axis=0) / total


def _order_cycle(points: np.ndarray, idx: Sequence[int], normal: np.ndarray) -> list[int]:
    """Order coplanar point indices counterclockwise seen from ``+normal``."""
    pts = points[list(idx)]
    c = pts.mean(axis=0)
    u, w = _plane_basis(normal)
    rel = pts - c
    ang = np.arctan2(rel @ w, rel @ u)
    order = np.argsort(ang, kind="stable")
    return [idx[k] for k in order]


# --------------------------------------------------------------------------
# incremental clipper


class _Clipper:
    """Mutable working state: vertex list plus faces as (plane id, index cycle)."""

    def __init__(self, vertices: np.ndarray, faces: list[tuple[int, list[int]]], planes: list[tuple[np.ndarray, float]], eps: float):
        self.verts = [np.asarray(v, dtype=float) for v in vertices]
        self.faces = faces
        self.planes = planes
        self.eps = eps

    @classmethod
    def box(cls, lo: np.ndarray, hi: np.ndarray, eps: float) -> "_Clipper":
        corners = np.array([[(lo, hi)[(k >> j) & 1][j] for j in range(3)] for k in range(8)], dtype=float)
        planes: list[tuple[np.ndarray, float]] = []
        faces: list[tuple[int, list[int]]] = []
        for axis in range(3):
            for sign in (-1.0, 1.0):
                n = np.zeros(3)
                n[axis] = sign
                off = hi[axis] if sign > 0 else -lo[axis]
                planes.append((n, float(off)))
                bit = 1 if sign > 0 else 0
                idx = [k for k in range(8) if ((k >> axis) & 1) == bit]
                faces.append((len(planes) - 1, _order_cycle(corners, idx, n)))
        return cls(corners, faces, planes, eps)

    @classmethod
    def from_polyhedron(cls, P: ConvexPolyhedron, eps: float) -> "_Clipper":
        planes = [(h.array, h.offset) for h in P.halfspaces]
        faces = [(f.halfspace, list(f.cycle)) for f in P.faces]
        return cls(P.vertices, faces, planes, eps)

    def clip(self, normal: np.ndarray, offset: float) -> bool:
        """Intersect with ``x . normal <= offset``.  Returns False if redundant."""
        eps = self.eps
        V = np.array(self.verts)
        s_arr = V @ normal - offset
        live = sorted({i for _, c in self.faces for i in c})
        if s_arr[live].max() <= eps:
            return False
        if s_arr[live].min() >= -eps:
            raise EmptyInterior("half-space leaves no interior")
        s = s_arr.tolist()
        out = [x > eps for x in s]
        on = [abs(x) <= eps for x in s]
        pid = len(self.planes)
        self.planes.append((normal, float(offset)))

        cut: dict[tuple[int, int], int] = {}
        section: list[int] = []
        seen: set[int] = set()

        def mark(i: int) -> None:
            if i not in seen:
                seen.add(i)
                section.append(i)

        new_faces = []
        for plane, cyc in self.faces:
            if not any(out[i] for i in cyc):
                new_faces.append((plane, cyc))
                for i in cyc:
                    if on[i]:
                        mark(i)
                continue
            res = []
            n = len(cyc)
            for k in range(n):
                a = cyc[k]
                b = cyc[(k + 1) % n]
                if not out[a]:
                    res.append(a)
                    if on[a]:
                        mark(a)
                if (s[a] < -eps and s[b] > eps) or (s[a] > eps and s[b] < -eps):
                    key = (a, b) if a < b else (b, a)
                    j = cut.get(key)
                    if j is None:
                        p, q = key
                        t = s[p] / (s[p] - s[q])
                        self.verts.append(V[p] + t * (V[q] - V[p]))
                        j = len(self.verts) - 1
                        cut[key] = j
                    res.append(j)
                    mark(j)
            if len(res) >= 3:
                new_faces.append((plane, res))
        if len(section) >= 3:
            pts = np.array(self.verts)
            new_faces.append((pid, _order_cycle(pts, section, normal)))
        self.faces = new_faces
        return True

    def finalize(self, scale: float) -> tuple[ConvexPolyhedron, list[int]]:
        """Clean up and freeze.  Also returns the working plane id of every face."""
        eps = self.eps
        verts = np.array(self.verts)
        faces = [(p, list(c)) for p, c in self.faces]

        used = sorted({i for _, c in faces for i in c})
        # merge vertices closer than eps (first index wins)
        rep = {i: i for i in used}
        U = verts[used]
        for a in range(len(used)):
            ia = used[a]
            if rep[ia] != ia:
                continue
            d = np.linalg.norm(U[a + 1:] - U[a], axis=1)
            for b in np.nonzero(d <= eps)[0]:
                ib = used[a + 1 + int(b)]
                if rep[ib] == ib:
                    rep[ib] = ia
        faces = [(p, _dedupe_cycle([rep[i] for i in c])) for p, c in faces]
        faces = [(p, c) for p, c in faces if len(c) >= 3]

        faces = _merge_coplanar(faces, self.planes, verts)

        # drop vertices lying on fewer than three faces (collinear points on an edge)
        while True:
            count: dict[int, int] = {}
            for _, c in faces:
                for i in c:
                    count[i] = count.get(i, 0) + 1
            weak = {i for i, k in count.items() if k < 3}
            if not weak:
                break
            faces = [(p, [i for i in c if i not in weak]) for p, c in faces]
            faces = [(p, c) for p, c in faces if len(c) >= 3]

        if len(faces) < 4:
            raise EmptyInterior("polyhedron has fewer than four faces")

        used = sorted({i for _, c in faces for i in c})
        remap = {old: new for new, old in enumerate(used)}
        vertices = verts[used].copy()
        vertices.setflags(write=False)

        halfspaces = []
        out_faces = []
        plane_ids = []
        for fi, (p, c) in enumerate(faces):
            n, off = self.planes[p]
            halfspaces.append(HalfSpace(tuple(n), off))
            out_faces.append(Face(fi, tuple(remap[i] for i in c)))
            plane_ids.append(p)

        edge_faces: dict[tuple[int, int], list[int]] = {}
        for fi, f in enumerate(out_faces):
            c = f.cycle
            for k in range(len(c)):
                a, b = c[k], c[(k + 1) % len(c)]
                edge_faces.setdefault((a, b) if a < b else (b, a), []).append(fi)
        edges = []
        for (a, b), fs in sorted(edge_faces.items()):
            if len(fs) != 2:
                raise InvalidPolyhedron(f"edge ({a}, {b}) has {len(fs)} incident faces")
            edges.append(Edge(a, b, fs[0], fs[1]))
        if len(vertices) - len(edges) + len(out_faces) != 2:
            raise InvalidPolyhedron("Euler relation V - E + F = 2 violated")

        poly = ConvexPolyhedron(tuple(halfspaces), vertices, tuple(out_faces), tuple(edges))
        vol = _volume(poly)
        if vol <= eps * scale * scale:
            raise EmptyInterior("polyhedron has (numerically) zero volume")
        return poly, plane_ids


def _dedupe_cycle(c: list[int]) -> list[int]:
    out: list[int] = []
    for i in c:
        if not out or out[-1] != i:
            out.append(i)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    # a face touching itself is not a simple polygon; keep the first occurrence
    seen: set[int] = set()
    return [i for i in out if not (i in seen or seen.add(i))]


def _merge_coplanar(faces, planes, verts):
    cos_tol = math.cos(EPS_ANGLE)
    n = len(faces)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owners: dict[tuple[int, int], list[int]] = {}
    for fi, (_, c) in enumerate(faces):
        for k in range(len(c)):
            a, b = c[k], c[(k + 1) % len(c)]
            owners.setdefault((a, b) if a < b else (b, a), []).append(fi)
    merged = False
    for fs in owners.values():
        if len(fs) == 2:
            na = planes[faces[fs[0]][0]][0]
            nb = planes[faces[fs[1]][0]][0]
            if float(na @ nb) > cos_tol:
                ra, rb = find(fs[0]), find(fs[1])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
                    merged = True
    if not merged:
        return faces
    groups: dict[int, list[int]] = {}
    for fi in range(n):
        groups.setdefault(find(fi), []).append(fi)
    out = []
    for root in sorted(groups):
        members = groups[root]
        if len(members) == 1:
            out.append(faces[root])
            continue
        p = faces[root][0]
        idx = sorted({i for m in members for i in faces[m][1]})
        out.append((p, _order_cycle(verts, idx, planes[p][0])))
    return out


def _volume(P: ConvexPolyhedron) -> float:
    c = P.vertices.mean(axis=0)
    total = 0.0
    for face in P.faces:
        pts = P.vertices[list(face.cycle)] - c
        a = pts[0]
        for k in range(1, len(pts) - 1):
            total += float(np.dot(a, np.cross(pts[k], pts[k + 1])))
    return total / 6.0


# --------------------------------------------------------------------------
# public operations


def intersect_halfspaces(hs: Sequence[HalfSpace], bound: float) -> ConvexPolyhedron:
    """Intersect half-spaces with the cube ``[-bound, bound]^3``.

    The result is flagged ``intrinsically_bounded=False`` when a face of the
    safety cube survives; callers decide whether that is an error.
    """
    if not bound > 0:
        raise ValueError("bound must be positive")
    eps = EPS_GEOM_REL * bound
    clipper = _Clipper.box(np.full(3, -bound), np.full(3, bound), eps)
    for h in hs:
        clipper.clip(h.array, h.offset)
    poly, plane_ids = clipper.finalize(2.0 * bound)
    box_faces = [i for i, p in enumerate(plane_ids) if p < 6]
    if box_faces:
        # a safety-cube face may coincide with a user plane that did not cut
        user = [(h.array, h.offset) for h in hs]
        for i in box_faces:
            n, off = clipper.planes[plane_ids[i]]
            if not any(float(n @ un) > 1.0 - 1e-12 and abs(uo - off) <= eps for un, uo in user):
                return ConvexPolyhedron(poly.halfspaces, poly.vertices, poly.faces, poly.edges, False)
    return poly


def cube_halfspaces(L: float, center=(0.0, 0.0, 0.0)) -> list[HalfSpace]:
    c = np.asarray(center, dtype=float)
    out = []
    for axis in range(3):
        for sign in (1.0, -1.0):
            n = [0.0, 0.0, 0.0]
            n[axis] = sign
            out.append(HalfSpace(tuple(n), L / 2.0 + sign * c[axis]))
    return out


def box_polyhedron(lo, hi) -> ConvexPolyhedron:
    """Axis-aligned box ``[lo, hi]``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    hs = []
    for axis in range(3):
        n = [0.0, 0.0, 0.0]
        n[axis] = 1.0
        hs.append(HalfSpace(tuple(n), hi[axis]))
        n = [0.0, 0.0, 0.0]
        n[axis] = -1.0
        hs.append(HalfSpace(tuple(n), -lo[axis]))
    bound = 2.0 * float(np.max(np.abs(np.concatenate([lo, hi])))) + 1.0
    return intersect_halfspaces(hs, bound)


def bounded_intersection(hs: Sequence[HalfSpace], max_bound: float = 1e6) -> ConvexPolyhedron:
    """Intersection of half-spaces that must be bounded on its own.

    The safety cube grows until no face of it survives, which keeps the
    tolerance (relative to the cube) matched to the polyhedron's size.
    """
    bound = 4.0 * max(1.0, max(abs(h.offset) for h in hs))
    while True:
        P = intersect_halfspaces(hs, bound)
        if P.intrinsically_bounded:
            return P
        if bound >= max_bound:
            raise DegenerateInput("half-spaces do not bound a polyhedron")
        bound *= 8.0


def tangent_polytope(normals) -> ConvexPolyhedron:
    """Polytope ``{x : x . n <= 1}`` circumscribed about the unit ball."""
    return bounded_intersection([HalfSpace.normalized(n, 1.0) for n in np.asarray(normals, dtype=float)])


def hull_of_points(points) -> ConvexPolyhedron:
    """Convex hull of a point cloud, via its facet planes."""
    from scipy.spatial import ConvexHull, QhullError

    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 4:
        raise DegenerateInput("need at least four 3-D points")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateInput(f"points do not span 3-space: {exc}") from None
    hs = [HalfSpace.normalized(eq[:3], -eq[3]) for eq in hull.equations]
    bound = 2.0 * float(np.max(np.abs(pts))) + 1.0
    return intersect_halfspaces(hs, bound)


def clip_to_cube(P: ConvexPolyhedron, L: float, center=(0.0, 0.0, 0.0)):
    """Clip ``P`` to the axis-aligned cube of edge ``L``.

    Returns ``(Q, clipped_face_area, interior_boundary_area, interior_edges)``
    where ``clipped_face_area`` is the part of ``bd Q`` lying on the cube's
    boundary and ``interior_edges`` are the edges of ``Q`` whose two faces are
    both off the cube's boundary (portions of edges of ``P``).
    """
    if not L > 0:
        raise ValueError("L must be positive")
    c = np.asarray(center, dtype=float)
    Q, on_cube = _clip_with_planes(P, cube_halfspaces(L, c))
    areas = Q.face_areas
    clipped = math.fsum(a for a, flag in zip(areas, on_cube) if flag)
    interior = math.fsum(a for a, flag in zip(areas, on_cube) if not flag)
    records = Q.edge_records()
    interior_edges = [r for r, e in zip(records, Q.edges) if not on_cube[e.f0] and not on_cube[e.f1]]
    return Q, clipped, interior, interior_edges


def _clip_with_planes(P: ConvexPolyhedron, planes: Sequence[HalfSpace]) -> tuple[ConvexPolyhedron, list[bool]]:
    """Clip by extra planes; flags faces lying on any of those planes."""
    scale = P.scale
    eps = EPS_GEOM_REL * scale
    clipper = _Clipper.from_polyhedron(P, eps)
    n_orig = len(clipper.planes)
    try:
        for h in planes:
            clipper.clip(h.array, h.offset)
        Q, plane_ids = clipper.finalize(scale)
    except EmptyInterior as exc:
        raise EmptyIntersection(str(exc)) from None
    flags = []
    for pid in plane_ids:
        if pid >= n_orig:
            flags.append(True)
            continue
        n, off = clipper.planes[pid]
        flags.append(any(float(n @ h.array) > 1.0 - 1e-12 and abs(off - h.offset) <= eps for h in planes))
    return Q, flags


def chebyshev_center(P: ConvexPolyhedron) -> tuple[np.ndarray, float]:
    """Center and radius of the largest ball inside ``P`` (small LP)."""
    A = np.hstack([P.normals, np.ones((len(P.halfspaces), 1))])
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=A,
        b_ub=P.offsets,
        bounds=[(None, None)] * 3 + [(0, None)],
        method="highs-ds",
    )
    if res.status != 0:
        raise GeometryError(f"Chebyshev center LP failed: {res.message}")
    return np.asarray(res.x[:3]), float(res.x[3])


def metrics(P: ConvexPolyhedron) -> CellMetrics:
    scale = P.scale
    areas = P.face_areas
    degenerate_tol = (EPS_GEOM_REL * scale) * scale
    for i, a in enumerate(areas):
        if not a > degenerate_tol:
            raise DegenerateFace(f"face {i} has (numerically) zero area")
    sarea = math.fsum(areas)
    vol = _volume(P)
    lengths = P.edge_lengths
    betas = P.dihedral_angles
    if np.any(lengths <= EPS_GEOM_REL * scale):
        raise DegenerateFace("zero-length edge")
    ecurv = math.fsum(float(length) / math.tan(float(b) / 2.0) for length, b in zip(lengths, betas))
    center, radius = chebyshev_center(P)
    d = P.vertices[:, None, :] - P.vertices[None, :, :]
    diameter = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))
    return CellMetrics(
        sarea=sarea,
        vol=vol,
        ecurv=ecurv,
        total_edge_length=math.fsum(lengths),
        inradius=radius,
        diameter=diameter,
        dihedral_angles=tuple(float(b) for b in betas),
        edge_lengths=tuple(float(x) for x in lengths),
        chebyshev_center=tuple(float(x) for x in center),
    )
