import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from ps_sojourn.errors import InvalidInitial
from ps_sojourn.model import ModelParams
from ps_sojourn.simulator import (RunningStats, admission_weights, empirical_laplace,
                                  empirical_survival, empirical_tail_rate, empirical_tail_slope,
                                  max_workers, ordered_map, read_csv, simulate_conditional,
                                  simulate_stationary, write_csv)
from ps_sojourn.spectrum import dominant_pole
from ps_sojourn.timedomain import earliest_tail_start
from ps_sojourn.transform import conditional_moments, resolvent_solve


def z_score(stats, target):
    return abs(stats.mean - target) / stats.sem


def test_single_room_is_unit_exponential():
    s = simulate_conditional(ModelParams(0.7, 1), 0, 200_000, seed=1)
    assert z_score(s.stats(), 1.0) < 4
    assert s.stats().variance == pytest.approx(1.0, rel=0.02)


def test_two_rooms_mean():
    s = simulate_conditional(ModelParams(1.0, 2), 1, 200_000, seed=2)
    assert z_score(s.stats(), 5 / 3) < 4


def test_conditional_laplace_and_mean():
    p = ModelParams(0.9, 10)
    s = simulate_conditional(p, 3, 300_000, seed=3)
    assert z_score(s.stats(), conditional_moments(p)[3]) < 4
    for theta in (0.25, 1.0):
        est, sem = empirical_laplace(s.samples, theta)
        assert abs(est - resolvent_solve(p, theta).values[3]) < 4 * sem


def test_second_moment():
    p = ModelParams(1.3, 6)
    s = simulate_conditional(p, 2, 300_000, seed=4)
    sq = RunningStats.from_samples(s.samples ** 2)
    assert z_score(sq, conditional_moments(p, 2)[2]) < 4


def test_tail_rate():
    p = ModelParams(0.9, 10)
    s = simulate_conditional(p, 3, 400_000, seed=5)
    rate, sem = empirical_tail_rate(s.samples, earliest_tail_start(p, 3))
    assert abs(rate - dominant_pole(p)) < max(4 * sem, 0.05 * abs(dominant_pole(p)))


def test_reproducible_and_chunk_independent(monkeypatch):
    p = ModelParams(0.8, 5)
    a = simulate_conditional(p, 1, 1000, seed=9).samples
    b = simulate_conditional(p, 1, 1000, seed=9, workers=1).samples
    np.testing.assert_array_equal(a, b)
    import ps_sojourn.simulator as sim
    monkeypatch.setattr(sim, "CHUNK", 7)
    c = simulate_conditional(p, 1, 1000, seed=9, workers=3).samples
    np.testing.assert_array_equal(a, c)
    # a longer run extends a shorter one
    d = simulate_conditional(p, 1, 1500, seed=9).samples
    np.testing.assert_array_equal(a, d[:1000])
    assert not np.array_equal(a, simulate_conditional(p, 1, 1000, seed=10).samples)


def test_invalid_initial():
    with pytest.raises(InvalidInitial):
        simulate_conditional(ModelParams(0.8, 5), 5, 10, seed=0)
    with pytest.raises(ValueError):
        simulate_conditional(ModelParams(0.8, 5), 0, 0, seed=0)


def test_admission_weights():
    w = admission_weights(ModelParams(2.0, 4))
    np.testing.assert_allclose(w, np.array([1, 2, 4, 8]) / 15)
    np.testing.assert_allclose(admission_weights(ModelParams(1.0, 5)), 0.2)


def test_stationary_sees_admission_law():
    p = ModelParams(0.8, 5)
    s = simulate_stationary(p, 100_000, seed=11)
    counts = np.bincount(s.observed_initial, minlength=5)
    # arrivals are correlated through the queue; a generous threshold
    expected = admission_weights(p) * counts.sum()
    stat, _ = chisquare(counts, expected)
    assert stat < 30
    target = float(admission_weights(p) @ conditional_moments(p))
    assert abs(s.stats().mean - target) < 0.02 * target
    assert s.blocked_count > 0
    assert s.summary()["n_initial"] == "stationary"


def test_stationary_reproducible():
    p = ModelParams(1.5, 3)
    a = simulate_stationary(p, 500, seed=3, burn_in=10.0)
    b = simulate_stationary(p, 500, seed=3, burn_in=10.0)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert np.all(a.samples > 0)


def test_empirical_helpers():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(empirical_survival(x, [0.5, 2.0, 4.0]), [1.0, 0.5, 0.0])
    rng = np.random.default_rng(0)
    slope = empirical_tail_slope(rng.exponential(2.0, 200_000), (1.0, 6.0))
    assert slope == pytest.approx(-0.5, rel=0.03)
    with pytest.raises(ValueError):
        empirical_tail_slope(x, (1.0, 10.0))
    with pytest.raises(ValueError):
        empirical_tail_rate(x, 3.5)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=0, max_size=40),
       st.lists(st.floats(-1e3, 1e3), min_size=0, max_size=40))
def test_running_stats_merge(a, b):
    merged = RunningStats.from_samples(np.array(a)).merge(RunningStats.from_samples(np.array(b)))
    ref = RunningStats.from_samples(np.array(a + b))
    assert merged.count == ref.count
    assert merged.mean == pytest.approx(ref.mean, abs=1e-9)
    assert merged.m2 == pytest.approx(ref.m2, rel=1e-9, abs=1e-6)


def test_csv_round_trip(tmp_path):
    s = simulate_conditional(ModelParams(0.8, 4), 2, 100, seed=5)
    path = tmp_path / "s.csv"
    write_csv(s, path)
    assert path.read_text().splitlines()[0] == "sojourn_time"
    np.testing.assert_array_equal(read_csv(path), s.samples)
    path.write_text("time\n1.0\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("PS_SOJOURN_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("PS_SOJOURN_THREADS", "zero")
    with pytest.raises(ValueError):
        max_workers()
    assert ordered_map(lambda x: x * x, range(10), workers=4) == [x * x for x in range(10)]
