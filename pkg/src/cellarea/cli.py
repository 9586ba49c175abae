"""Command-line front end: reproducible audit runs over cells, tilings and optimizer output.

Exit status is 0 when every certificate of the run passes, 2 when any fails
(or a precondition such as "contains a unit ball" does not hold), and 1 on
malformed input or a geometric failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import io
from .certificates import CELL_CHECKS, CertificateReport, check_jung_area, default_tol, make_report
from .errors import CellAreaError, ParseError, PreconditionViolated
from .optimizer import minimize_area
from .polyhedron import metrics
from .solids import (
    AREA_LOWER_BOUND,
    BRAKKE_FOAM_AREA,
    DODECAHEDRON_AREA_QUOTED,
    KEPLER_DENSITY,
    RHOMBIC_DODECAHEDRON_AREA,
)
from .tilings import average_sarea_series, preset_packing, window_cells, window_certificates, window_report

COMMANDS = ("cell-metrics", "cell-certify", "tiling-report", "tiling-series", "optimize")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CERTIFICATE = 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    polyhedron: Path | None = None
    preset: str | None = None
    L: float = 20.0
    Ls: tuple[float, ...] = (10.0, 20.0, 40.0)
    N: int = 12
    restarts: int = 16
    seed: int = 0
    max_iter: int = 10_000
    cutoff_R: float | None = None
    tol: float | None = None
    output: Path | None = None
    off: Path | None = None
    jsonl: Path | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ParseError(f"unknown command {self.command!r}")
        if self.command in ("cell-metrics", "cell-certify") and self.polyhedron is None:
            raise ParseError(f"{self.command} needs a polyhedron file")
        if self.command in ("tiling-report", "tiling-series") and not self.preset:
            raise ParseError(f"{self.command} needs --preset")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ParseError("L must be positive")
        if any(not (x > 0 and math.isfinite(x)) for x in self.Ls) or not self.Ls:
            raise ParseError("every L must be positive")
        if any(b <= a for a, b in zip(self.Ls, self.Ls[1:])):
            raise ParseError("L list must be strictly increasing")
        if self.N < 4:
            raise ParseError("N must be at least 4")
        if self.restarts < 1 or self.max_iter < 1:
            raise ParseError("restarts and max-iter must be positive")
        if self.seed < 0:
            raise ParseError("seed must be non-negative")
        if self.tol is not None and not (0 <= self.tol < 1):
            raise ParseError("tol must lie in [0, 1)")
        if self.cutoff_R is not None and not self.cutoff_R > 0:
            raise ParseError("cutoff must be positive")

    @property
    def rel_tol(self) -> float:
        return default_tol() if self.tol is None else self.tol


@dataclass
class _Run:
    config: RunConfig
    report: dict = field(default_factory=dict)
    certificates: list[CertificateReport] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)
    meshes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and all(c.passed for c in self.certificates)


def _certify_cell(run: _Run, m) -> list[dict]:
    out = []
    for check in (*CELL_CHECKS, check_jung_area):
        try:
            rep = check(m, run.config.rel_tol)
        except PreconditionViolated as exc:
            rec = {"name": check.__name__.removeprefix("check_").replace("_", "-"),
                   "error": "PreconditionViolated", "message": str(exc), "pass": False}
            run.violations.append(rec)
            out.append(rec)
            continue
        run.certificates.append(rep)
        out.append(rep.as_dict())
    return out


def _cell_metrics(run: _Run) -> None:
    P = io.parse_polyhedron(run.config.polyhedron)
    run.meshes = [P]
    run.report["polyhedron"] = _summary(P)
    run.report["metrics"] = metrics(P).as_dict()


def _cell_certify(run: _Run) -> None:
    _cell_metrics(run)
    m = metrics(run.meshes[0])
    run.report["certificates"] = _certify_cell(run, m)


def _summary(P) -> dict:
    return {"n_vertices": P.n_vertices, "n_edges": P.n_edges, "n_faces": P.n_faces, **io.polyhedron_to_json(P)}


def _window_block(run: _Run, r) -> dict:
    certs = window_certificates(r, run.config.rel_tol)
    run.certificates.extend(certs)
    return {**r.as_dict(), "certificates": [c.as_dict() for c in certs]}


def _tiling_report(run: _Run) -> None:
    cfg = run.config
    p = preset_packing(cfg.preset)
    r = window_report(p, cfg.L, cfg.cutoff_R)
    run.report["preset"] = p.name
    run.report["window"] = _window_block(run, r)
    if cfg.off is not None:
        run.meshes = window_cells(p, cfg.L, cfg.cutoff_R)


def _tiling_series(run: _Run) -> None:
    cfg = run.config
    p = preset_packing(cfg.preset)
    s = average_sarea_series(p, cfg.Ls, cfg.cutoff_R)
    summary = make_report("series-min-average", s.min_average, AREA_LOWER_BOUND, cfg.rel_tol)
    run.certificates.append(summary)
    run.report["preset"] = p.name
    run.report["windows"] = [_window_block(run, r) for r in s.reports]
    run.report["summary"] = {
        "min_average_sarea": s.min_average,
        "final_average_sarea": s.final_average,
        "certificate": summary.as_dict(),
    }
    if cfg.off is not None:
        run.meshes = window_cells(p, cfg.Ls[-1], cfg.cutoff_R)


def _optimize(run: _Run) -> None:
    cfg = run.config
    res = minimize_area(cfg.N, cfg.restarts, cfg.seed, max_iter=cfg.max_iter)
    P = res.best_params.polytope()
    run.meshes = [P]
    run.report["result"] = res.as_dict()
    run.report["metrics"] = metrics(P).as_dict()
    run.report["certificates"] = _certify_cell(run, metrics(P))
    run.report["reference"] = {
        "area_lower_bound": AREA_LOWER_BOUND,
        "regular_dodecahedron": DODECAHEDRON_AREA_QUOTED,
        "rhombic_dodecahedron": RHOMBIC_DODECAHEDRON_AREA,
        "modified_williams_foam_cell": BRAKKE_FOAM_AREA,
        "kepler_density": KEPLER_DENSITY,
    }


_PIPELINES = {
    "cell-metrics": _cell_metrics,
    "cell-certify": _cell_certify,
    "tiling-report": _tiling_report,
    "tiling-series": _tiling_series,
    "optimize": _optimize,
}


def _config_dict(cfg: RunConfig) -> dict:
    out = {}
    for k in cfg.__dataclass_fields__:
        v = getattr(cfg, k)
        out[k] = str(v) if isinstance(v, Path) else (list(v) if isinstance(v, tuple) else v)
    out["tol"] = cfg.rel_tol
    return out


def run(config: RunConfig) -> int:
    """Execute one command; write the report files; return the exit status."""
    try:
        config.validate()
        state = _Run(config)
        _PIPELINES[config.command](state)
    except (CellAreaError, ValueError) as exc:
        # parse, geometry and argument errors (incl. NoBoundedCandidate from the optimizer)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT

    status = EXIT_OK if state.passed else EXIT_CERTIFICATE
    doc = {"command": config.command, "config": _config_dict(config), **state.report,
           "all_pass": state.passed, "exit_status": status}
    text = io.dumps(doc)
    if config.output is not None:
        Path(config.output).write_text(text)
    else:
        sys.stdout.write(text)
    if config.jsonl is not None:
        records = [r.as_dict() for c in state.certificates for r in c.flatten()] + state.violations
        io.write_jsonl(records, config.jsonl)
    if config.off is not None and state.meshes:
        if len(state.meshes) == 1:
            io.write_off(state.meshes[0], config.off)
        else:
            io.write_off_many(state.meshes, config.off)
    return status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors, not certificate failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cellarea", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("-o", "--output", type=Path, help="JSON report path (default: stdout)")
        sp.add_argument("--jsonl", type=Path, help="write one certificate per line here")
        sp.add_argument("--off", type=Path, help="write the resulting mesh(es) as OFF")
        sp.add_argument("--tol", type=float, help="relative certificate tolerance (default: $CELLAREA_TOL or 1e-7)")

    for name in ("cell-metrics", "cell-certify"):
        sp = sub.add_parser(name, help=f"{name.replace('-', ' ')} of a polyhedron file (JSON or OFF)")
        sp.add_argument("polyhedron", type=Path)
        common(sp)

    sp = sub.add_parser("tiling-report", help="window report for a preset packing")
    sp.add_argument("--preset", required=True)
    sp.add_argument("-L", type=float, default=20.0)
    sp.add_argument("--cutoff", type=float, dest="cutoff_R")
    common(sp)

    sp = sub.add_parser("tiling-series", help="window reports over increasing cube sides")
    sp.add_argument("--preset", required=True)
    sp.add_argument("--Ls", type=_float_list, default=(10.0, 20.0, 40.0), help="comma-separated, e.g. 10,20,40")
    sp.add_argument("--cutoff", type=float, dest="cutoff_R")
    common(sp)

    sp = sub.add_parser("optimize", help="minimum-area tangent polytope with N faces")
    sp.add_argument("-N", type=int, default=12)
    sp.add_argument("--restarts", type=int, default=16)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-iter", type=int, default=10_000, dest="max_iter")
    common(sp)
    return parser


def config_from_args(argv: Sequence[str] | None = None) -> tuple[RunConfig, bool]:
    ns = vars(build_parser().parse_args(argv))
    verbose = ns.pop("verbose")
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in ns.items() if k in fields}), verbose


def main(argv: Sequence[str] | None = None) -> int:
    config, verbose = config_from_args(argv)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
