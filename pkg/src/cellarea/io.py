"""JSON and OFF readers/writers for polyhedra and reports."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .errors import ParseError
from .polyhedron import ConvexPolyhedron, HalfSpace, bounded_intersection, hull_of_points

log = logging.getLogger(__name__)


def halfspaces_from_rows(rows) -> list[HalfSpace]:
    """Parse ``[nx, ny, nz, offset]`` rows, normalising non-unit normals."""
    out = []
    for i, row in enumerate(rows):
        try:
            nx, ny, nz, off = (float(v) for v in row)
        except (TypeError, ValueError):
            raise ParseError(f"half-space {i} is not a list of four numbers: {row!r}") from None
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if norm == 0.0 or not math.isfinite(norm) or not math.isfinite(off):
            raise ParseError(f"half-space {i} has an invalid normal or offset")
        if abs(norm - 1.0) > 1e-12:
            log.warning("half-space %d: normal of length %.17g normalised; offset rescaled", i, norm)
        out.append(HalfSpace.normalized((nx, ny, nz), off))
    return out


def polyhedron_from_halfspaces(hs: list[HalfSpace]) -> ConvexPolyhedron:
    if not hs:
        raise ParseError("empty half-space list")
    return bounded_intersection(hs)


def polyhedron_from_json(data: Any) -> ConvexPolyhedron:
    if isinstance(data, dict) and "halfspaces" in data:
        return polyhedron_from_halfspaces(halfspaces_from_rows(data["halfspaces"]))
    if isinstance(data, dict) and "vertices" in data:
        return hull_of_points(_points(data["vertices"]))
    if isinstance(data, list) and data and all(isinstance(r, (list, tuple)) for r in data):
        width = {len(r) for r in data}
        if width == {4}:
            return polyhedron_from_halfspaces(halfspaces_from_rows(data))
        if width == {3}:
            return hull_of_points(_points(data))
    raise ParseError("expected {'halfspaces': [[nx,ny,nz,d],...]} or {'vertices': [[x,y,z],...]}")


def _points(rows) -> np.ndarray:
    try:
        pts = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("vertex list is not numeric") from None
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ParseError("vertices must be [x, y, z] triples")
    return pts


def polyhedron_to_json(P: ConvexPolyhedron) -> dict:
    return {
        "halfspaces": [[*h.normal, h.offset] for h in P.halfspaces],
        "vertices": P.vertices.tolist(),
    }


def read_off(path: str | Path) -> tuple[np.ndarray, list[list[int]]]:
    """Read an ASCII OFF file into (vertices, faces)."""
    tokens: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or not tokens[0].startswith("OFF"):
        raise ParseError(f"{path}: missing OFF header")
    rest = tokens[0][3:]
    pos = 1
    if rest:
        # header fused with counts, e.g. "OFF8 6 0"
        tokens = [rest] + tokens[1:]
        pos = 0
    try:
        nv, nf = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3
        verts = np.array([float(t) for t in tokens[pos : pos + 3 * nv]]).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            faces.append([int(t) for t in tokens[pos + 1 : pos + 1 + k]])
            pos += 1 + k
    except (IndexError, ValueError):
        raise ParseError(f"{path}: truncated or malformed OFF body") from None
    return verts, faces


def write_off(P: ConvexPolyhedron, path: str | Path) -> None:
    """Triangulated surface, counterclockwise seen from outside."""
    path = Path(path)
    tris = P.triangles()
    lines = ["OFF", f"{P.n_vertices} {len(tris)} {P.n_edges}"]
    lines += [" ".join(repr(float(c)) for c in v) for v in P.vertices]
    lines += [f"3 {a} {b} {c}" for a, b, c in tris]
    path.write_text("\n".join(lines) + "\n")


def write_off_many(polys: Iterable[ConvexPolyhedron], path: str | Path) -> None:
    """Several polyhedra concatenated into one OFF mesh."""
    verts: list[np.ndarray] = []
    tris: list[tuple[int, int, int]] = []
    base = 0
    for P in polys:
        verts.append(P.vertices)
        tris.extend((a + base, b + base, c + base) for a, b, c in P.triangles())
        base += P.n_vertices
    V = np.concatenate(verts) if verts else np.zeros((0, 3))
    lines = ["OFF", f"{len(V)} {len(tris)} 0"]
    lines += [" ".join(repr(float(c)) for c in v) for v in V]
    lines += [f"3 {a} {b} {c}" for a, b, c in tris]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_polyhedron(path: str | Path) -> ConvexPolyhedron:
    """Load a polyhedron from JSON (half-spaces or vertices) or OFF (vertices; hull taken)."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    if path.suffix.lower() == ".off":
        verts, _ = read_off(path)
        return hull_of_points(verts)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return polyhedron_from_json(data)


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON: shortest round-trip float repr, non-finite as null."""
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_jsonl(records: Iterable[dict], path: str | Path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(_clean(rec), allow_nan=False) + "\n")
