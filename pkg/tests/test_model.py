import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ps_sojourn.errors import CoalescentRoots
from ps_sojourn.model import (ModelParams, characteristic_roots, generator_matrix,
                              initial_density, root_data)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.0, 3)
    with pytest.raises(ValueError):
        ModelParams(1.0, 0)
    p = ModelParams(0.25, 4)
    assert p.coalescence() == pytest.approx(-0.25)
    assert p.lower_coalescence() == pytest.approx(-2.25)


@pytest.mark.parametrize("rho, expected", [(0.5, (1.0, 2.0)), (2.0, (0.5, 1.0))])
def test_roots_factorise_at_zero(rho, expected):
    zm, zp = characteristic_roots(ModelParams(rho, 3), 0.0)
    assert (zm, zp) == pytest.approx(expected, rel=1e-14)


def test_double_root_at_coalescence():
    zm, zp = characteristic_roots(ModelParams(0.25, 3), -0.25)
    assert zm == pytest.approx(2.0, abs=1e-7)
    assert zp == pytest.approx(2.0, abs=1e-7)
    with pytest.raises(CoalescentRoots):
        root_data(ModelParams(0.25, 3), -0.25)


def test_root_data_examples():
    rd = root_data(ModelParams(0.5, 3), 0.0)
    assert rd.alpha == pytest.approx(2.0)
    assert rd.m_factor == pytest.approx(4.0)
    rd = root_data(ModelParams(2.0, 3), 0.0)
    assert rd.alpha == pytest.approx(2.0)
    assert rd.m_factor == pytest.approx(2.0)
    rd = root_data(ModelParams(0.5, 3), 1.0)
    assert rd.z_minus.real == pytest.approx(0.4384, abs=1e-4)
    assert rd.z_plus.real == pytest.approx(4.5616, abs=1e-4)
    assert rd.alpha.real == pytest.approx(1.106, abs=1e-3)


def test_band_labelling_gives_half_alpha():
    p = ModelParams(0.5, 3)
    rd = root_data(p, p.coalescence() - 0.3)
    assert rd.z_plus.imag > 0
    assert rd.alpha.real == pytest.approx(0.5, abs=1e-14)


@settings(max_examples=1000, deadline=None)
@given(rho=st.floats(1e-3, 1e3), theta=st.floats(-50, 50))
def test_vieta(rho, theta):
    zm, zp = characteristic_roots(ModelParams(rho, 2), theta)
    assert abs(zm * zp * rho - 1) <= 1e-12
    b = (1 + rho + theta) / rho
    assert abs(zm + zp - b) <= 1e-12 * max(1.0, abs(zm) + abs(zp))


@pytest.mark.parametrize("rho", [0.25, 0.7, 2.0])
def test_root_continuity_across_coalescence(rho):
    p = ModelParams(rho, 2)
    c = p.coalescence()
    above = characteristic_roots(p, c + 1e-17 + 1e-15)
    below = characteristic_roots(p, c - 1e-15)
    for a, b in zip(above, below):
        assert abs(a - b) < 1e-6


def test_generator_examples():
    assert generator_matrix(ModelParams(0.3, 1)).dense().tolist() == [[-1.0]]
    A = generator_matrix(ModelParams(1.0, 2)).dense()
    np.testing.assert_allclose(A, [[-2, 1], [0.5, -1]])
    g = generator_matrix(ModelParams(0.5, 3))
    np.testing.assert_allclose(g.sub, [0.5, 2 / 3])
    np.testing.assert_allclose(g.diag, [-1.5, -1.5, -1.0])
    np.testing.assert_allclose(g.sup, [0.5, 0.5])
    np.testing.assert_allclose(initial_density(3), [1, 0.5, 1 / 3])


@settings(max_examples=60, deadline=None)
@given(rho=st.floats(0.05, 5), K=st.integers(2, 50), theta=st.floats(-0.5, 3))
def test_generator_rows_times_n_plus_one_give_recurrence(rho, K, theta):
    A = generator_matrix(ModelParams(rho, K)).dense()
    M = theta * np.eye(K) - A
    for n in range(K):
        row = (n + 1) * M[n]
        # (n+1)(1+rho+theta) p_n - (n+1) rho p_{n+1} - n p_{n-1} = 1, folded at n = K-1
        diag = (n + 1) * (1 + rho + theta) if n < K - 1 else K * (1 + theta)
        assert row[n] == pytest.approx(diag, rel=1e-12, abs=1e-12)
        if n + 1 < K:
            assert row[n + 1] == pytest.approx(-(n + 1) * rho, rel=1e-12)
        if n > 0:
            assert row[n - 1] == pytest.approx(-n, rel=1e-12)
        assert (n + 1) * initial_density(K)[n] == pytest.approx(1.0)


def test_similarity_scales_symmetrise():
    g = generator_matrix(ModelParams(0.7, 9))
    A = g.dense()
    s = np.exp(g.log_similarity_scales())
    T = np.diag(1 / s) @ A @ np.diag(s)
    np.testing.assert_allclose(T, T.T, atol=1e-14)
    np.testing.assert_allclose(np.diag(T, 1), g.symmetric_offdiag(), rtol=1e-14)
    assert math.isclose(g.inf_norm(), np.abs(A).sum(axis=1).max())
