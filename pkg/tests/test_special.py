import math

import numpy as np
import pytest
from scipy import special as sp

from ps_sojourn.errors import DomainError
from ps_sojourn.special import (airy, airy_max_root, airy_prime_max_root, airy_scaled,
                                gamma_fn, r1_residual, solve_r1)


@pytest.mark.parametrize("x, expected", [(1, 1), (5, 24), (0.5, math.sqrt(math.pi))])
def test_gamma_examples(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-13)


def test_gamma_frozen(frozen):
    for item in frozen["gamma"]:
        assert gamma_fn(item["x"]) == pytest.approx(item["value"], rel=1e-12)


def test_gamma_domain():
    with pytest.raises(DomainError):
        gamma_fn(0.0)
    with pytest.raises(DomainError):
        gamma_fn(-1.5)


def test_airy_frozen(frozen):
    ref = frozen["airy"]
    assert airy(0).ai == pytest.approx(ref["ai0"], rel=1e-13)
    assert airy(0).ai_prime == pytest.approx(ref["aip0"], rel=1e-13)
    for pt in ref["points"]:
        v = airy(pt["x"])
        scale_ai = max(abs(pt["ai"]), 1e-3 * abs(pt["aip"]) / max(1.0, abs(pt["x"])) ** 0.5)
        assert abs(v.ai - pt["ai"]) <= 1e-10 * max(abs(pt["ai"]), scale_ai), pt
        assert abs(v.ai_prime - pt["aip"]) <= 1e-10 * max(abs(pt["aip"]), 1e-3 * abs(pt["ai"])), pt


@pytest.mark.parametrize("x", [-19.5, -8.25, -2.7, -0.3, 0.9, 1.1, 4.4, 15.0])
def test_airy_against_scipy(x):
    ai, aip, _, _ = sp.airy(x)
    v = airy(x)
    amp = math.hypot(ai, aip / max(1.0, abs(x)) ** 0.5)
    assert abs(v.ai - ai) <= 1e-10 * max(abs(ai), amp if x < 0 else abs(ai))
    assert abs(v.ai_prime - aip) <= 1e-10 * max(abs(aip), amp * max(1.0, abs(x)) ** 0.5 if x < 0 else abs(aip))


def test_airy_domain():
    with pytest.raises(DomainError):
        airy(20.5)


@pytest.mark.parametrize("x", [-2.0, 0.0, 1.0])
def test_derivative_consistency(x):
    h = 1e-5
    fd = (airy(x + h).ai - airy(x - h).ai) / (2 * h)
    assert fd == pytest.approx(airy(x).ai_prime, abs=1e-6)


@pytest.mark.parametrize("x", [-15.0, -6.0, -2.5, -1.0, 0.0, 0.7, 2.0, 5.0])
def test_ode_residual(x):
    h = 1e-3
    second = (airy(x + h).ai - 2 * airy(x).ai + airy(x - h).ai) / h ** 2
    scale = max(1.0, abs(x)) * max(abs(airy(x).ai), abs(airy(x).ai_prime) / max(1.0, abs(x)) ** 0.5)
    assert abs(second - x * airy(x).ai) <= 1e-5 * scale


def test_airy_roots(frozen):
    assert airy_max_root() == pytest.approx(frozen["airy"]["ai_zero"], abs=1e-11)
    assert airy_prime_max_root() == pytest.approx(frozen["airy"]["aip_zero"], abs=1e-11)
    assert abs(airy(airy_max_root()).ai) < 1e-12
    assert round(airy_max_root(), 4) == -2.3381


def test_airy_scaled_large_argument():
    for x in [30.0, 150.0, 650.0]:
        ai, aip = airy_scaled(x)
        e_ai, e_aip, _, _ = sp.airye(x)
        assert ai == pytest.approx(e_ai, rel=1e-11)
        assert aip == pytest.approx(e_aip, rel=1e-11)


def test_solve_r1(frozen):
    for item in frozen["airy"]["r1"]:
        r1 = solve_r1(item["eta"])
        assert r1 == pytest.approx(item["r1"], abs=1e-9)
        assert abs(r1_residual(item["eta"], r1)) < 1e-9
    assert solve_r1(0.0) == pytest.approx(airy_prime_max_root(), abs=1e-12)


@pytest.mark.parametrize("eta", [-50.0, -20.0, 20.0, 50.0])
def test_solve_r1_extreme_eta(eta):
    r1 = solve_r1(eta)
    assert abs(r1_residual(eta, r1)) < 1e-8


def test_solve_r1_domain():
    with pytest.raises(DomainError):
        solve_r1(51.0)


def test_airy_decays_on_positive_axis():
    xs = np.linspace(0.0, 8.0, 81)
    values = [airy(x).ai for x in xs]
    assert np.all(np.diff(values) < 0)
    # mpmath: Ai(5)/Ai(2) = 0.00310227990856061
    assert airy(5.0).ai / airy(2.0).ai == pytest.approx(0.00310227990856061, rel=1e-9)
