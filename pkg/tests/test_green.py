import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ps_sojourn.errors import ContourError, DomainError
from ps_sojourn.green import (delta_g, delta_h, delta_h_branch_cut, delta_h_sign, g_integral,
                              green_pair, h_branch_cut, h_contour, h_contour_detail,
                              h_recurrence, wronskian_check)
from ps_sojourn.model import ModelParams, root_data


def rd_of(rho, theta):
    return root_data(ModelParams(rho, 2), theta)


def test_small_values_at_zero():
    rd = rd_of(0.5, 0.0)
    assert [float(h_contour(rd, n)) for n in range(4)] == pytest.approx([1, 3, 8, 20], rel=1e-12)
    assert float(delta_h(rd, 1)) == pytest.approx(2.0, rel=1e-12)
    assert float(g_integral(rd, 0)) == pytest.approx(0.1931471805599453, rel=1e-12)


def test_h_against_frozen(frozen):
    for item in frozen["h_values"]:
        rd = rd_of(item["rho"], item["theta"])
        for n in [0, 1, 2, 7, 19, 40]:
            assert float(h_contour(rd, n)) == pytest.approx(item["values"][n], rel=1e-10), (item["rho"], n)


def test_g_against_frozen(frozen):
    for item in frozen["g_values"]:
        rd = rd_of(item["rho"], item["theta"])
        assert float(g_integral(rd, item["n"])) == pytest.approx(item["value"], rel=1e-11)


@pytest.mark.parametrize("rho, theta", [(0.5, 0.7), (2.0, -0.1), (1.0, 0.2)])
def test_delta_forms_match_differences(rho, theta):
    rd = rd_of(rho, theta)
    for K in [1, 4, 15]:
        dh = float(h_contour(rd, K)) - float(h_contour(rd, K - 1))
        assert float(delta_h(rd, K)) == pytest.approx(dh, rel=1e-9)
        dg = float(g_integral(rd, K)) - float(g_integral(rd, K - 1))
        assert float(delta_g(rd, K)) == pytest.approx(dg, rel=1e-9, abs=1e-13 * abs(float(g_integral(rd, K - 1))))


@settings(max_examples=40, deadline=None)
@given(rho=st.floats(0.2, 4.0), frac=st.floats(0.05, 3.0), n=st.integers(0, 30))
def test_contour_matches_recurrence_above_coalescence(rho, frac, n):
    p = ModelParams(rho, 2)
    theta = p.coalescence() + frac
    rd = root_data(p, theta)
    ref = h_recurrence(rd, n)[n]
    assert float(h_contour(rd, n)) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("rho, depth", [(0.5, 0.3), (0.5, 1.5), (2.0, 2.0), (1.0, 0.8)])
def test_branch_cut_matches_contour_in_band(rho, depth):
    p = ModelParams(rho, 2)
    rd = root_data(p, p.coalescence() - depth)
    assert not rd.is_real
    rec = h_recurrence(rd, 30)
    for n in [0, 3, 10, 30]:
        hc = float(h_contour(rd, n))
        hb = float(h_branch_cut(rd, n))
        scale = max(abs(rec[n]), 1e-6 * np.abs(rec[: n + 1]).max())
        assert abs(hc - rec[n]) <= 1e-9 * scale
        assert abs(hb - rec[n]) <= 1e-9 * scale
    dh = float(delta_h_branch_cut(rd, 12))
    assert dh == pytest.approx(rec[12] - rec[11], rel=1e-8, abs=1e-9 * np.abs(rec[:13]).max())


def test_branch_cut_refused_outside_band():
    with pytest.raises(DomainError):
        h_branch_cut(rd_of(0.5, 0.3), 3)


def test_h_is_real_for_real_theta():
    for rho, theta in [(0.5, 0.3), (2.0, 1.0)]:
        res = h_contour_detail(rd_of(rho, theta), 12)
        assert res.imag_residual < 1e-9


def test_h_independent_of_margin():
    rd = rd_of(0.8, 0.4)
    ref = float(h_contour(rd, 9))
    for margin in [0.05, 0.3, 1.0]:
        assert float(h_contour(rd, 9, margin=margin)) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("rho, theta", [(0.5, 0.0), (0.5, 1.0), (2.0, 0.3), (1.0, 0.05), (0.8, 2.5)])
@pytest.mark.parametrize("l", [0, 3, 20, 60])
def test_wronskian(rho, theta, l):
    assert wronskian_check(rd_of(rho, theta), l) < 1e-9


def test_growth_laws():
    rd = rd_of(0.5, 1.0)
    g = g_integral(rd, 201).log_abs - g_integral(rd, 200).log_abs
    h = h_contour(rd, 201).log_abs - h_contour(rd, 200).log_abs
    zm, zp = rd.z_minus.real, rd.z_plus.real
    # ratios approach the roots at rate O(1/n)
    assert math.exp(g) == pytest.approx(zm, rel=2e-2)
    assert math.exp(h) == pytest.approx(zp, rel=2e-2)
    assert abs(math.exp(g) - zm) < abs(float(g_integral(rd, 11)) / float(g_integral(rd, 10)) - zm)


def test_scaled_values_survive_large_n():
    rd = rd_of(0.25, 3.0)
    h = h_contour(rd, 600)
    assert math.isfinite(h.log_abs) and h.log_abs > 700
    pair = green_pair(rd, 600)
    assert pair.log_scale_g < -700


def test_delta_h_sign_matches_value():
    for rho, theta in [(0.5, -0.2), (2.0, -0.4), (1.0, -0.3), (0.8, 0.5)]:
        p = ModelParams(rho, 6)
        rd = root_data(p, theta)
        assert delta_h_sign(rd, 6) == np.sign(float(delta_h(rd, 6)))


def test_errors():
    rd = rd_of(0.5, 0.5)
    with pytest.raises(ContourError):
        h_contour(rd, -1)
    band = root_data(ModelParams(0.5, 2), -0.5)
    with pytest.raises(DomainError):
        g_integral(band, 2)
    with pytest.raises(DomainError):
        g_integral(rd, -1)
