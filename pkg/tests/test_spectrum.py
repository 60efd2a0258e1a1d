import math

import numpy as np
import pytest

from ps_sojourn.errors import RegimeError
from ps_sojourn.model import ModelParams, generator_matrix
from ps_sojourn.special import airy_max_root
from ps_sojourn.spectrum import (applicable_estimates, asymp_critical, asymp_subcritical,
                                 asymp_supercritical, asymptotic_estimate, critical_numerator,
                                 delta_h_roots, deltah_spectrum, dominant_pole, eigen_spectrum,
                                 eta_of, regime_of, spectral_gap, theta_s_auto, theta_s_via_deltaH)


def test_eigenvalues_match_frozen(frozen):
    for case in frozen["eigenvalues"]:
        ev = eigen_spectrum(ModelParams(case["rho"], case["K"])).eigenvalues
        np.testing.assert_allclose(ev, case["values"], rtol=0, atol=1e-12)


def test_eigenvalues_agree_with_dense_solver():
    p = ModelParams(1.3, 40)
    dense = np.sort(np.linalg.eigvals(generator_matrix(p).dense()).real)
    np.testing.assert_allclose(eigen_spectrum(p).eigenvalues, dense, atol=1e-9)


@pytest.mark.parametrize("rho, K", [(0.5, 7), (1.0, 30), (4.0, 200)])
def test_poles_real_negative_and_simple(rho, K):
    ev = eigen_spectrum(ModelParams(rho, K)).eigenvalues
    assert ev.size == K
    assert np.all(ev < 0)
    assert np.all(np.diff(ev) > 0)
    # Gershgorin-type bound from the symmetric form
    assert ev[0] >= -(1 + math.sqrt(rho)) ** 2 - 1e-12


def test_closed_forms():
    assert dominant_pole(ModelParams(0.3, 1)) == pytest.approx(-1.0, abs=1e-14)
    ev = eigen_spectrum(ModelParams(1.0, 2)).eigenvalues
    np.testing.assert_allclose(ev, [(-3 - math.sqrt(3)) / 2, (-3 + math.sqrt(3)) / 2], atol=1e-13)


def test_dominant_pole_is_top_eigenvalue():
    p = ModelParams(0.8, 60)
    assert dominant_pole(p) == pytest.approx(eigen_spectrum(p).theta_s, abs=1e-13)
    ev = eigen_spectrum(p).eigenvalues
    assert spectral_gap(p) == pytest.approx(ev[-1] - ev[-2], abs=1e-12)
    assert spectral_gap(ModelParams(0.8, 1)) == math.inf


def test_theta_s_against_lapack(frozen):
    for case in frozen["theta_s"]:
        p = ModelParams(case["rho"], case["K"])
        assert dominant_pole(p) == pytest.approx(case["value"], abs=1e-11)


def test_theta_s_increases_with_capacity():
    for rho in (0.5, 1.0, 2.0):
        values = [dominant_pole(ModelParams(rho, K)) for K in (5, 10, 20, 40, 80)]
        assert np.all(np.diff(values) > 0)


@pytest.mark.parametrize("rho, K", [(0.5, 4), (1.0, 6), (2.0, 9), (0.5, 12)])
def test_delta_h_roots_are_the_poles(rho, K):
    p = ModelParams(rho, K)
    roots = delta_h_roots(p)
    np.testing.assert_allclose(roots, eigen_spectrum(p).eigenvalues, atol=1e-7)
    assert deltah_spectrum(p).theta_s == pytest.approx(roots[-1])


@pytest.mark.parametrize("rho, K", [(0.5, 40), (1.0, 100), (2.0, 25)])
def test_theta_s_via_delta_h(rho, K):
    p = ModelParams(rho, K)
    assert theta_s_via_deltaH(p) == pytest.approx(dominant_pole(p), abs=1e-8)


def test_theta_s_via_delta_h_capacity_limit():
    with pytest.raises(ValueError):
        theta_s_via_deltaH(ModelParams(0.5, 201))


def test_subcritical_terms():
    est = asymp_subcritical(ModelParams(0.5, 100))
    r0 = airy_max_root()
    sr = math.sqrt(0.5)
    expected = [-(1 - sr) ** 2, -sr / 100, sr * r0 / 100 ** (4 / 3), -8 * sr * r0 ** 2 / (15 * 100 ** (5 / 3))]
    np.testing.assert_allclose(est.terms, expected, rtol=1e-14)
    assert est.theta_s_estimate == pytest.approx(-0.0974, abs=2e-4)


def test_subcritical_error_shrinks_like_k_minus_two():
    Ks = np.array([100, 200, 400, 800, 1600])
    err = [abs(dominant_pole(ModelParams(0.5, K)) - asymp_subcritical(ModelParams(0.5, K)).theta_s_estimate)
           for K in Ks]
    slope = np.polyfit(np.log(Ks), np.log(err), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.3)


def test_supercritical_terms_and_order():
    est = asymp_supercritical(ModelParams(2.0, 20))
    assert est.theta_s_estimate == pytest.approx(-0.05259375, abs=1e-15)
    Ks = np.array([25, 50, 100, 200])
    err = [abs(dominant_pole(ModelParams(2.0, K)) - asymp_supercritical(ModelParams(2.0, K)).theta_s_estimate)
           for K in Ks]
    orders = -np.diff(np.log(err)) / np.log(2.0)
    assert orders[-1] == pytest.approx(5.0, abs=0.5)


def test_critical_window_and_third_term():
    p = ModelParams(1.0, 1000)
    est = asymp_critical(p)
    assert est.eta == 0.0
    assert est.airy_root == pytest.approx(-1.0187929716, abs=1e-8)
    two_term = est.terms[0] + est.terms[1]
    assert abs(dominant_pole(p) - two_term) < 3 * abs(est.terms[2])
    assert critical_numerator(0.0, est.airy_root) == pytest.approx(16 * est.airy_root ** 3 + 9)


def test_regime_guards():
    with pytest.raises(RegimeError):
        asymp_subcritical(ModelParams(1.0, 50))
    with pytest.raises(RegimeError):
        asymp_supercritical(ModelParams(0.9, 50))
    with pytest.raises(RegimeError):
        asymp_critical(ModelParams(2.0, 1000))


def test_regime_selection():
    assert regime_of(ModelParams(0.5, 1000)) == "sub"
    assert regime_of(ModelParams(1.0, 1000)) == "critical"
    assert regime_of(ModelParams(2.0, 1000)) == "super"
    # eta = 0.02 * 100 = 2: inside the window even though rho > 1
    p = ModelParams(1.02, 1000)
    assert eta_of(p) == pytest.approx(2.0)
    assert asymptotic_estimate(p).regime == "critical"
    assert [e.regime for e in applicable_estimates(p)] == ["critical", "super"]


def test_theta_s_auto():
    exact, est = theta_s_auto(ModelParams(2.0, 100))
    assert est.regime == "super"
    assert abs(exact - est.theta_s_estimate) < 1e-8
    with pytest.raises(ValueError):
        theta_s_auto(ModelParams(2.0, 1))
