import math

import numpy as np
import pytest

from cellarea.certificates import cot_sum_bound
from cellarea.errors import UnknownPreset
from cellarea.polyhedron import metrics
from cellarea.solids import AREA_LOWER_BOUND, KEPLER_DENSITY, truncated_octahedron_closed_form
from cellarea.tilings import (
    PeriodicPacking,
    average_sarea_series,
    density_bound_check,
    meeting_segments_of_packing,
    preset_packing,
    voronoi_cell,
    window_cells,
    window_certificates,
    window_report,
    window_report_from_cells,
)

PRESETS = ["SC", "FCC", "BCC", "HCP"]
RD_AREA = 12.0 * math.sqrt(2.0)
TO_AREA = 4.0 + 8.0 * math.sqrt(3.0)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_have_unit_balls_at_distance_two(name):
    p = preset_packing(name)
    assert p.min_distance() == pytest.approx(2.0, abs=1e-12)


def test_preset_shapes():
    sc, fcc, hcp = preset_packing("SC"), preset_packing("fcc"), preset_packing("HCP")
    assert np.allclose(sc.basis, 2 * np.eye(3)) and len(sc.motif) == 1
    assert np.allclose(fcc.basis, 2 * math.sqrt(2) * np.eye(3)) and len(fcc.motif) == 4
    assert len(hcp.motif) == 2
    with pytest.raises(UnknownPreset):
        preset_packing("diamond")
    with pytest.raises(ValueError):
        PeriodicPacking(np.ones((3, 3)), [[0, 0, 0]])


@pytest.mark.parametrize("name,area", [("SC", 24.0), ("FCC", RD_AREA), ("BCC", TO_AREA), ("HCP", RD_AREA)])
def test_voronoi_cells(name, area):
    p = preset_packing(name)
    vols = []
    for j in range(len(p.motif)):
        m = metrics(voronoi_cell(p, j))
        assert m.sarea == pytest.approx(area, rel=1e-10)
        assert m.inradius >= 1.0 - 1e-9
        vols.append(m.vol)
    # the cells of one fundamental domain fill it
    assert sum(vols) == pytest.approx(p.volume, rel=1e-9)


def test_bcc_cell_matches_closed_form():
    m = metrics(voronoi_cell(preset_packing("BCC"), 0))
    ref = truncated_octahedron_closed_form()
    for key in ("sarea", "vol", "ecurv", "total_edge_length"):
        assert getattr(m, key) == pytest.approx(ref[key], rel=1e-10), key


def test_hcp_cell_is_trapezo_rhombic():
    P = voronoi_cell(preset_packing("HCP"), 0)
    assert (P.n_faces, P.n_vertices) == (12, 14)


def test_sc_window_examples():
    r = window_report(preset_packing("SC"), 10.0)
    assert r.n_contained == 125
    assert r.average_sarea == pytest.approx(24.0, rel=1e-12)
    r = window_report(preset_packing("SC"), 4.0)
    assert r.n_contained == 1
    c = density_bound_check(r)
    assert c.passed and c.slack > 0.4


@pytest.mark.parametrize("name", PRESETS)
def test_window_certificates_pass(name):
    p = preset_packing(name)
    for L in (6.0, 10.0, 15.0):
        r = window_report(p, L)
        failing = [c.as_dict() for c in window_certificates(r) if not c.passed]
        assert not failing
        assert r.f_L >= r.g_L
        assert 0.0 <= r.delta <= r.delta_upper


@pytest.mark.parametrize("name", PRESETS)
def test_boundary_ratio_decreases(name):
    p = preset_packing(name)
    ratios = [window_report(p, L).boundary_ratio for L in (10.0, 20.0, 40.0)]
    assert ratios[0] > ratios[1] > ratios[2]


@pytest.mark.parametrize("name", PRESETS)
def test_window_cells_fill_the_window(name):
    L = 7.0
    cells = window_cells(preset_packing(name), L)
    total = sum(metrics(c).vol for c in cells)
    assert total == pytest.approx(L**3, rel=1e-9)


@pytest.mark.parametrize("name", ["FCC", "BCC"])
def test_report_from_explicit_cells_agrees(name):
    p = preset_packing(name)
    L = 8.0
    centers, ids = p.points_in_box(np.full(3, -L / 2 - 2), np.full(3, L / 2 + 2))
    cells = [voronoi_cell(p, int(j)).translated(c) for c, j in zip(centers, ids)]
    a = window_report(p, L)
    b = window_report_from_cells(cells, centers, L)
    assert (a.n_contained, a.n_boundary) == (b.n_contained, b.n_boundary)
    for key in ("sum_clipped_sarea", "f_L", "g_L", "delta_upper", "sum_clipped_vol"):
        assert getattr(a, key) == pytest.approx(getattr(b, key), rel=1e-9), key


def test_sc_density_is_pi_over_six():
    r = window_report(preset_packing("SC"), 40.0)
    assert r.cell_density == pytest.approx(math.pi / 6.0, rel=1e-12)
    assert density_bound_check(r).passed


def test_fcc_cell_density_is_kepler():
    r = window_report(preset_packing("FCC"), 20.0)
    assert r.cell_density == pytest.approx(KEPLER_DENSITY, rel=1e-12)


def test_series():
    s = average_sarea_series(preset_packing("FCC"), [10, 20])
    assert s.min_average >= AREA_LOWER_BOUND
    assert s.final_average == pytest.approx(RD_AREA, rel=0.02)
    with pytest.raises(ValueError):
        average_sarea_series(preset_packing("FCC"), [20, 10])


@pytest.mark.parametrize("name,k,beta", [("FCC", 3, 2 * math.pi / 3), ("HCP", 3, None), ("SC", 4, math.pi / 2), ("BCC", 3, None)])
def test_tiling_meeting_segments(name, k, beta):
    segs = meeting_segments_of_packing(preset_packing(name))
    assert segs
    for seg in segs:
        assert seg.case_tag == "C_interior"
        assert seg.k == k
        r = cot_sum_bound(seg)
        assert r.passed
        if beta is not None:
            assert np.allclose(seg.betas, beta, atol=1e-9)
            assert r.lhs == pytest.approx(seg.case_bound, rel=1e-9)
