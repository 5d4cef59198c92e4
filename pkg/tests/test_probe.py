import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipvessel.lip import lip_sub
from lipvessel.probe import (
    ProbeFamily,
    ProbeSpec,
    adapt_intensities,
    bresenham,
    build_family,
    fov_diameter,
    orientations,
    probe_lengths,
    probe_widths,
    rasterize,
)
from oracles import frac_lip_add, frac_lip_sub


@pytest.mark.parametrize("d_fov, angle, expected", [
    (540, 45, (10.8, 8.1, 5.4)),
    (50, 45, (1.0, 0.75, 0.5)),
    (540, 50, (9.72, 7.29, 4.86)),
])
def test_probe_widths(d_fov, angle, expected):
    assert probe_widths(d_fov, angle) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("bad", [(0, 45), (-5, 45), (100, 0)])
def test_probe_widths_rejects_non_positive(bad):
    with pytest.raises(ValueError):
        probe_widths(*bad)


@given(st.floats(1, 5000), st.floats(10, 90), st.floats(0.1, 10))
def test_probe_widths_homogeneous(d, a, s):
    scaled = probe_widths(d * s, a)
    for w_s, w in zip(scaled, probe_widths(d, a)):
        assert w_s == pytest.approx(s * w, rel=1e-12)


def test_probe_lengths():
    assert probe_lengths((10.8, 8.1, 5.4)) == pytest.approx((8.1, 6.075, 4.05))
    assert probe_lengths((4,)) == (3,)
    assert all(l < w for l, w in zip(probe_lengths((0.1, 3, 77)), (0.1, 3, 77)))


def test_adapt_intensities_reference_point():
    assert adapt_intensities(215) == pytest.approx((215, 225))


@pytest.mark.parametrize("m_f", [100, 0, 150.5, -30])
def test_adapt_intensities_matches_oracle(m_f):
    h_c, h_lr = adapt_intensities(m_f)
    assert h_c == m_f
    assert h_lr == pytest.approx(float(frac_lip_add(225, frac_lip_sub(m_f, 215))), rel=1e-12)
    assert h_lr < 256


def test_adapt_intensities_example_value():
    assert adapt_intensities(100)[1] == pytest.approx(138.05, abs=5e-3)


@given(st.floats(-1000, 255.9))
def test_adapt_intensities_applies_one_lip_offset(m_f):
    h_c, h_lr = adapt_intensities(m_f)
    assert lip_sub(h_lr, 225) == pytest.approx(lip_sub(h_c, 215), rel=1e-9, abs=1e-9)
    assert h_c < 256 and h_lr < 256


def test_orientations():
    assert np.degrees(orientations(18))[1] == pytest.approx(20.0)
    assert np.degrees(orientations(4)) == pytest.approx([0, 90, 180, 270])
    assert orientations(1) == [0.0]
    with pytest.raises(ValueError):
        orientations(0)


def _as_set(a):
    return set(map(tuple, a.tolist()))


def test_rasterize_axis_aligned():
    rp = rasterize(ProbeSpec(4, 3, 100, 10), 0.0)
    assert _as_set(rp.center) == {(0, 0), (1, 0), (2, 0), (3, 0)}
    assert _as_set(rp.left) == {(x, -2) for x in range(4)}
    assert _as_set(rp.right) == {(x, 2) for x in range(4)}


def test_rasterize_vertical_shift():
    rp = rasterize(ProbeSpec(4, 3, 100, 10), math.pi / 2)
    assert _as_set(rp.center) == {(0, y) for y in range(4)}
    shifts = {tuple(rp.left[0] - rp.center[0]), tuple(rp.right[0] - rp.center[0])}
    assert shifts == {(2, 0), (-2, 0)}


def test_rasterize_rejects_short_probe():
    with pytest.raises(ValueError):
        rasterize(ProbeSpec(4, 0.5, 100, 10), 0.0)


@settings(max_examples=200)
@given(st.floats(2.0, 40.0), st.floats(0.75, 1.0), st.floats(0, 2 * math.pi))
def test_raster_probe_invariants(w, ratio, theta):
    spec = ProbeSpec(w, max(1.0, ratio * 0.75 * w), 120, 80)
    rp = rasterize(spec, theta)
    c, l, r = _as_set(rp.center), _as_set(rp.left), _as_set(rp.right)
    assert (0, 0) in c
    assert len(rp.center) == len(rp.left) == len(rp.right) == len(c)
    assert not (c & l or c & r or l & r)
    # left and right reflect exactly through each central raster point
    assert np.array_equal(rp.left + rp.right, 2 * rp.center)
    # and the central raster stays within a pixel of the analytic line
    n = np.array([-math.sin(theta), math.cos(theta)])
    assert np.abs(rp.center @ n).max() <= 1.0
    # the side offset is perpendicular up to rounding
    half = rp.right[0] - rp.center[0]
    assert np.hypot(*half) == pytest.approx(w / 2, abs=1.0)


def test_bresenham_is_connected_and_hits_end():
    for end in [(7, 3), (-4, 9), (0, -5), (6, 6), (-8, -1)]:
        pts = bresenham(*end)
        assert tuple(pts[0]) == (0, 0) and tuple(pts[-1]) == end
        steps = np.abs(np.diff(pts, axis=0)).max(axis=1)
        assert (steps == 1).all()
        assert len(pts) == max(abs(end[0]), abs(end[1])) + 1


def test_family_orders_and_drops_degenerate_scales():
    fam = build_family(540, 45, 120, 80)
    assert [p.width for p in fam.probes] == pytest.approx([10.8, 8.1, 5.4])
    assert [p.length for p in fam.probes] == pytest.approx([8.1, 6.075, 4.05])
    assert len(fam.orientations) == 18
    # w = (2.6, 1.95, 1.3): the last one rounds to a 2-pixel raster width only
    # if its half-width rounds to 1; 0.65 does, but its length 0.975 < 1 drops it
    small = build_family(130, 45, 120, 80)
    assert [round(p.width, 2) for p in small.probes] == [2.6, 1.95]
    with pytest.raises(ValueError):
        build_family(20, 45, 120, 80)
    with pytest.raises(ValueError):
        ProbeFamily((ProbeSpec(4, 3, 1, 1), ProbeSpec(5, 3, 1, 1)))


def test_fov_diameter():
    assert fov_diameter(np.ones((100, 100), bool)) == 100
    one = np.zeros((9, 9), bool)
    one[4, 5] = True
    assert fov_diameter(one) == 1
    rect = np.zeros((80, 90), bool)
    rect[10:50, 20:80] = True  # 40 rows x 60 columns
    assert fov_diameter(rect) == 50
    with pytest.raises(ValueError):
        fov_diameter(np.zeros((3, 3), bool))
