"""Discrete-event Monte Carlo of the M/M/1/K processor-sharing queue.

With ``m`` customers present the completion rate is 1 in total, so the
chain is driven by an event race: the next event comes after an
``Exp(1 + rho 1{m<K})`` time and a completion hits each customer with
probability ``1/m``.  Random numbers come from a counter-based SplitMix64
stream keyed by ``(seed, replication)``, which makes every replication
reproducible on its own and lets replications run in any order.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import kernels
from .errors import InvalidInitial
from .model import ModelParams
from .spectrum import dominant_pole

CHUNK = 50_000
BURN_IN_RELAXATIONS = 50.0


def max_workers() -> int:
    """Thread cap from ``PS_SOJOURN_THREADS`` (default: CPU count)."""
    raw = os.environ.get("PS_SOJOURN_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"PS_SOJOURN_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def ordered_map(fn, items, workers: int | None = None) -> list:
    """``[fn(x) for x in items]`` on a thread pool, results in input order."""
    items = list(items)
    workers = min(workers or max_workers(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class RunningStats:
    """Count, mean and sum of squared deviations; merges associatively."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def from_samples(cls, x: np.ndarray) -> "RunningStats":
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls()
        mu = float(x.mean())
        return cls(int(x.size), mu, float(((x - mu) ** 2).sum()))

    def merge(self, other: "RunningStats") -> "RunningStats":
        n = self.count + other.count
        if n == 0:
            return RunningStats()
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return RunningStats(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def sem(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.nan


@dataclass(frozen=True)
class SojournSamples:
    params: ModelParams
    n_initial: int | str
    seed: int
    samples: np.ndarray
    blocked_count: int | None = None
    observed_initial: np.ndarray | None = field(default=None, repr=False)

    def stats(self) -> RunningStats:
        return RunningStats.from_samples(self.samples)

    def summary(self) -> dict:
        st = self.stats()
        out = {
            "rho": self.params.rho,
            "capacity": self.params.capacity,
            "n_initial": self.n_initial,
            "seed": self.seed,
            "count": st.count,
            "mean": st.mean,
            "sem": st.sem,
            "std": math.sqrt(st.variance) if st.count > 1 else math.nan,
        }
        if self.blocked_count is not None:
            out["blocked"] = self.blocked_count
        return out


def simulate_conditional(params: ModelParams, n: int, count: int, seed: int,
                         workers: int | None = None) -> SojournSamples:
    """Sojourn times of a tagged arrival that finds ``n`` customers present."""
    K = params.capacity
    if not 0 <= n < K:
        raise InvalidInitial(f"n must lie in 0..{K - 1}, got {n}")
    if count < 1:
        raise ValueError("count must be >= 1")
    bounds = [(a, min(a + CHUNK, count)) for a in range(0, count, CHUNK)]

    def run(b):
        return np.asarray(kernels.simulate_conditional(params.rho, K, n, b[0], b[1], seed))

    parts = ordered_map(run, bounds, workers)
    return SojournSamples(params, n, seed, np.concatenate(parts))


def simulate_stationary(params: ModelParams, count: int, seed: int,
                        burn_in: float | None = None) -> SojournSamples:
    """Sojourns of admitted arrivals in a queue started empty and run to stationarity.

    ``burn_in`` defaults to ``50 / |theta_s|`` time units.  One trajectory is
    simulated, so this mode is sequential.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if burn_in is None:
        burn_in = BURN_IN_RELAXATIONS / abs(dominant_pole(params))
    samples, seen, blocked = kernels.simulate_stationary(params.rho, params.capacity, count, seed,
                                                         float(burn_in))
    return SojournSamples(params, "stationary", seed, np.asarray(samples), int(blocked),
                          np.asarray(seen))


def admission_weights(params: ModelParams) -> np.ndarray:
    """Law of ``N(0-)`` seen by admitted arrivals: ``rho^n (1-rho)/(1-rho^K)``."""
    K, rho = params.capacity, params.rho
    n = np.arange(K)
    if rho == 1.0:
        return np.full(K, 1.0 / K)
    w = np.exp(n * math.log(rho))
    return w / w.sum()


def empirical_laplace(samples: np.ndarray, theta: float) -> tuple[float, float]:
    """Mean of ``exp(-theta V)`` and its standard error."""
    st = RunningStats.from_samples(np.exp(-theta * np.asarray(samples)))
    return st.mean, st.sem


def empirical_survival(samples: np.ndarray, t: np.ndarray) -> np.ndarray:
    x = np.sort(np.asarray(samples))
    return 1.0 - np.searchsorted(x, np.asarray(t, dtype=float), side="right") / x.size


def empirical_tail_slope(samples: np.ndarray, window: tuple[float, float],
                         points: int = 25) -> float:
    """Slope of log empirical survival fitted on ``points`` equispaced times in ``window``."""
    t = np.linspace(window[0], window[1], points)
    s = empirical_survival(samples, t)
    if np.any(s <= 0):
        raise ValueError("empirical survival vanishes inside the window")
    return float(np.polyfit(t, np.log(s), 1)[0])


def empirical_tail_rate(samples: np.ndarray, t1: float) -> tuple[float, float]:
    """Tail exponent from the excesses over ``t1`` and its standard error.

    Beyond the point where one mode dominates, ``V - t1 | V > t1`` is
    exponential, and the maximum-likelihood rate is the reciprocal mean
    excess.  Returned negative, to compare with ``theta_s`` directly.
    """
    x = np.asarray(samples)
    excess = x[x > t1] - t1
    if excess.size < 2:
        raise ValueError(f"fewer than two samples exceed t1={t1:g}")
    rate = -1.0 / float(excess.mean())
    return rate, abs(rate) / math.sqrt(excess.size)


def write_csv(samples: SojournSamples | np.ndarray, path: str | Path) -> None:
    """One sojourn per line under the header ``sojourn_time`` (17 significant digits)."""
    x = samples.samples if isinstance(samples, SojournSamples) else np.asarray(samples)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sojourn_time"])
        w.writerows([f"{v:.17g}"] for v in x)


def read_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["sojourn_time"]:
        raise ValueError("missing sojourn_time header")
    return np.array([float(r[0]) for r in rows[1:]])
