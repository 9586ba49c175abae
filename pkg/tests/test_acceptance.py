"""Acceptance criteria, each checked at its stated tolerance.

Every test prints exactly one ``[criterion N] PASS|FAIL ...`` line (shown
with ``pytest -s`` or in the ``-v`` log) before asserting.
"""

import math
import time

import numpy as np
import pytest

from cellarea.certificates import (
    CASE_TOTALS,
    CELL_CHECKS,
    MeetingSegment,
    check_besicovitch_eggleston,
    check_containment_volume,
    check_fejes_toth,
    cot_sum_bound,
)
from cellarea.optimizer import minimize_area
from cellarea.polyhedron import metrics, tangent_polytope
from cellarea.solids import (
    AREA_LOWER_BOUND,
    KEPLER_DENSITY,
    cube_normals,
    fcc_normals,
    truncated_octahedron_closed_form,
)
from cellarea.tilings import density_bound_check, preset_packing, voronoi_cell, window_report

from conftest import random_tangent_polytope, random_unit_ball_cell

PRESETS = ("SC", "FCC", "BCC", "HCP")
LS = (10.0, 20.0, 40.0)
RD_AREA = 12.0 * math.sqrt(2.0)


def announce(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def windows():
    t0 = time.perf_counter()
    reports = {(name, L): window_report(preset_packing(name), L) for name in PRESETS for L in LS}
    return reports, time.perf_counter() - t0


def test_criterion_1_fcc_cell(capsys):
    t0 = time.perf_counter()
    P = voronoi_cell(preset_packing("FCC"), 0)
    m = metrics(P)
    elapsed = time.perf_counter() - t0
    errs = [
        rel(m.sarea, RD_AREA),
        rel(m.vol, 4.0 * math.sqrt(2.0)),
        abs(m.inradius - 1.0),
        max(abs(b - 2.0 * math.pi / 3.0) / (2.0 * math.pi / 3.0) for b in m.dihedral_angles),
    ]
    ok = len(m.edge_lengths) == 24 and max(errs) <= 1e-9 and elapsed < 1.0
    announce(capsys, 1, ok, f"sarea={m.sarea:.12f} vol={m.vol:.12f} r={m.inradius:.12f} edges={len(m.edge_lengths)} max rel err={max(errs):.1e} time={elapsed:.3f}s")
    assert ok


def test_criterion_2_window_lower_bound(capsys, windows):
    reports, elapsed = windows
    worst = min(reports.items(), key=lambda kv: kv[1].average_sarea)
    ok = all(r.average_sarea >= AREA_LOWER_BOUND - 1e-7 for r in reports.values()) and elapsed < 120.0
    announce(capsys, 2, ok, f"min average {worst[1].average_sarea:.6f} at {worst[0]} >= {AREA_LOWER_BOUND:.6f}; 12 windows in {elapsed:.1f}s")
    assert ok


def test_criterion_3_window_convergence(capsys, windows):
    reports, _ = windows
    targets = {"FCC": RD_AREA, "SC": 24.0, "BCC": truncated_octahedron_closed_form()["sarea"]}
    errs = {name: rel(reports[(name, 40.0)].average_sarea, t) for name, t in targets.items()}
    ok = all(e <= 0.02 for e in errs.values())
    announce(capsys, 3, ok, "L=40 relative errors " + ", ".join(f"{k}={v:.2e}" for k, v in errs.items()) + " (limit 2%)")
    assert ok


def test_criterion_4_f_ge_g(capsys, windows):
    reports, _ = windows
    slack = {k: r.f_L - r.g_L for k, r in reports.items()}
    worst = min(slack, key=slack.get)
    ok = all(s >= 0.0 for s in slack.values())
    announce(capsys, 4, ok, f"f(L) - g(L) >= 0 on all 12 windows; smallest {slack[worst]:.4f} at {worst}")
    assert ok


def test_criterion_5_density_chain(capsys, windows):
    reports, _ = windows
    r = reports[("FCC", 40.0)]
    close = rel(r.density, KEPLER_DENSITY) <= 0.01
    chain = r.density <= 4.0 * math.pi / r.average_sarea + 1e-7
    ok = close and chain and density_bound_check(r).passed
    announce(
        capsys,
        5,
        ok,
        f"density={r.density:.5f} vs {KEPLER_DENSITY:.5f} (rel err {rel(r.density, KEPLER_DENSITY):.2%}, limit 1%: {'ok' if close else 'no'}); "
        f"density <= 4pi/avg={4 * math.pi / r.average_sarea:.5f}: {'ok' if chain else 'no'}",
    )
    assert chain
    assert close


def test_criterion_6_random_tangent_polytopes(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    failures = 0
    for _ in range(1000):
        m = metrics(random_tangent_polytope(rng))
        failures += sum(not check(m).passed for check in CELL_CHECKS)
    equality = []
    for normals in (cube_normals(), fcc_normals()):
        m = metrics(tangent_polytope(normals))
        for check in (check_fejes_toth, check_containment_volume):
            r = check(m)
            equality.append(abs(r.lhs - r.rhs) / r.rhs)
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and max(equality) <= 1e-9 and elapsed < 30.0
    announce(capsys, 6, ok, f"1000 polytopes, {failures} failed checks; cube/RD equality max rel gap {max(equality):.1e}; time={elapsed:.1f}s")
    assert ok


def test_criterion_7_cot_sums(capsys):
    rng = np.random.default_rng(7)
    failures = 0
    worst_equal = 0.0
    for tag, kmin in (("A_cube_edge", 1), ("B_face_interior", 2), ("C_interior", 3)):
        total = CASE_TOTALS[tag]
        done = 0
        while done < 10_000:
            k = int(rng.integers(kmin, kmin + 10))
            w = rng.uniform(0.01, 1.0, k)
            betas = total * w / w.sum()
            if np.any(betas >= math.pi):
                continue
            failures += not cot_sum_bound(MeetingSegment(tag, k, tuple(betas))).passed
            done += 1
        for k in range(kmin, kmin + 10):
            seg = MeetingSegment(tag, k, (total / k,) * k)
            worst_equal = max(worst_equal, abs(cot_sum_bound(seg).lhs - seg.case_bound) / seg.case_bound)
    ok = failures == 0 and worst_equal <= 1e-9
    announce(capsys, 7, ok, f"3 x 10^4 random segments, {failures} failures; equal-angle case-bound gap {worst_equal:.1e}")
    assert ok


def test_criterion_8_edge_length(capsys):
    rng = np.random.default_rng(8)
    labelled = [("tangent", random_tangent_polytope(rng)) for _ in range(200)]
    labelled += [("unit-ball", random_unit_ball_cell(rng)) for _ in range(200)]
    for name in PRESETS:
        p = preset_packing(name)
        labelled += [(f"voronoi-{name}", voronoi_cell(p, j)) for j in range(len(p.motif))]
    labelled.append(("cube", tangent_polytope(cube_normals())))
    reports = [(label, check_besicovitch_eggleston(c)) for label, c in labelled]
    # the SC Voronoi cell is the tangent cube itself
    cubes = [r.slack for label, r in reports if label in ("cube", "voronoi-SC")]
    others = [r.slack for label, r in reports if label not in ("cube", "voronoi-SC")]
    ok = all(r.passed for _, r in reports) and max(abs(x) for x in cubes) <= 1e-12 and min(others) > 1e-6
    announce(capsys, 8, ok, f"{len(reports)} cells >= 24; cube slack {max(abs(x) for x in cubes):.1e}; smallest non-cube slack {min(others):.4f}")
    assert ok


def test_criterion_9_optimizer(capsys):
    t0 = time.perf_counter()
    best = {N: minimize_area(N, restarts=16, seed=0).best_area for N in (4, 6, 12)}
    elapsed = time.perf_counter() - t0
    ok = (
        abs(best[6] - 24.0) <= 0.01
        and abs(best[12] - 16.651) <= 0.02
        and best[12] < RD_AREA
        and abs(best[4] - 41.569) <= 0.05
        and elapsed < 120.0
    )
    announce(capsys, 9, ok, f"N=4: {best[4]:.5f}, N=6: {best[6]:.5f}, N=12: {best[12]:.5f}; time={elapsed:.1f}s")
    assert ok


def test_criterion_10_monte_carlo_volume(capsys):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(50):
        P = random_unit_ball_cell(rng)
        lo, hi = P.vertices.min(0), P.vertices.max(0)
        inside = 0
        for _ in range(10):
            inside += int(P.contains(rng.uniform(lo, hi, (100_000, 3))).sum())
        est = float(np.prod(hi - lo)) * inside / 1_000_000
        worst = max(worst, rel(est, metrics(P).vol))
    ok = worst <= 0.01
    announce(capsys, 10, ok, f"50 cells, 10^6 samples each; worst relative volume error {worst:.2e} (limit 1%)")
    assert ok
