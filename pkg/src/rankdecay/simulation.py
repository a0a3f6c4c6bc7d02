"""Random walk of click distributions on the simplex and estimator evaluation.

A hidden sequence of categorical distributions ``C_1 .. C_m`` generates
clicks on ``n`` items; each ``C_k`` is active for a random number of
clicks.  Two estimators track the stream: the exponential decay update and
a normalized click counter.  Each is scored per phase by its time-averaged
l1 distance to the active ``C_k``.

Randomness comes from ``numpy.random.Generator(PCG64(seed))`` only, with a
fixed draw order (phase lengths, then distributions, then clicks per
phase), so results are reproducible across platforms for a given seed.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import alpha_from_half_life
from .validation import check_open_unit, check_positive, check_simplex_point


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``alpha=None`` means a half-life of one mean phase, ``exp(-ln 2 / mu)``.
    """

    n: int = 10
    alpha: float | None = None
    days: int = 14
    mu: float = 90.0
    eps_walk: float = 0.01
    seed: int = 42
    record_trajectory: bool = False

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if self.alpha is not None:
            check_open_unit(self.alpha, "alpha")
        check_positive(self.days, "days", integer=True)
        if check_positive(self.mu, "mu") < 1:
            raise ValueError(f"mu must be >= 1, got {self.mu!r}")
        check_positive(self.eps_walk, "eps_walk")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise TypeError("seed must be an integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def resolved_alpha(self):
        return self.alpha if self.alpha is not None else alpha_from_half_life(self.mu)

    def to_dict(self):
        d = asdict(self)
        d["alpha"] = self.resolved_alpha
        return d


@dataclass
class PhaseSchedule:
    distributions: np.ndarray  # (m, n)
    lengths: np.ndarray  # (m,)

    @property
    def total(self):
        return int(self.lengths.sum())


@dataclass
class SimResult:
    delta_x: np.ndarray
    delta_r: np.ndarray
    schedule: PhaseSchedule
    config: SimConfig
    trajectory: dict | None = field(default=None, repr=False)

    @property
    def mean_delta_x(self):
        return float(self.delta_x.mean())

    @property
    def mean_delta_r(self):
        return float(self.delta_r.mean())

    def summary(self):
        return {
            "mean_delta_x": self.mean_delta_x,
            "mean_delta_r": self.mean_delta_r,
            "config": self.config.to_dict(),
        }


def next_distribution(current, eps_walk, rng):
    """Perturb a simplex point by a random-covariance Gaussian step.

    A matrix ``S`` with uniform [0, 1) entries gives the covariance
    ``I + eps_walk * S.T @ S``; one draw from the normal centred at
    ``current`` is folded to the nonnegative orthant and renormalized.
    """
    x = check_simplex_point(current, "current")
    n = x.size
    while True:
        s = rng.random((n, n))
        cov = np.eye(n) + eps_walk * (s.T @ s)
        v = np.abs(x + np.linalg.cholesky(cov) @ rng.standard_normal(n))
        total = v.sum()
        if total > 0:
            return v / total


def sample_phase_lengths(mu, days, rng):
    """Phase lengths from N(mu, mu/5), rounded and clamped to at least 1."""
    draws = rng.normal(mu, mu / 5.0, size=days)
    return np.maximum(np.rint(draws), 1).astype(np.int64)


def build_schedule(config, rng):
    lengths = sample_phase_lengths(config.mu, config.days, rng)
    c = np.full(config.n, 1.0 / config.n)
    dists = []
    for _ in range(config.days):
        c = next_distribution(c, config.eps_walk, rng)
        dists.append(c)
    return PhaseSchedule(np.array(dists), lengths)


def decay_step(x, clicked, alpha):
    """In-place exponential decay update of one or many estimates.

    ``x`` has shape ``(n,)`` or ``(runs, n)``; ``clicked`` holds the clicked
    index per row.
    """
    x *= alpha
    if x.ndim == 1:
        x[clicked] += 1.0 - alpha
    else:
        x[np.arange(x.shape[0]), clicked] += 1.0 - alpha
    return x


def _sample_indices(p, size, rng):
    cdf = np.cumsum(p)
    idx = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
    return np.minimum(idx, p.size - 1)


def run_simulation(config: SimConfig, schedule: PhaseSchedule | None = None) -> SimResult:
    """Run both estimators over one random phase schedule.

    Estimates are recorded after the update at every click.
    """
    rng = make_rng(config.seed)
    if schedule is None:
        schedule = build_schedule(config, rng)
    n = schedule.distributions.shape[1]
    alpha = config.resolved_alpha
    x = np.full(n, 1.0 / n)
    counts = np.ones(n)
    delta_x = np.empty(len(schedule.lengths))
    delta_r = np.empty(len(schedule.lengths))
    traj = {"phase": [], "clicked": [], "x": [], "r": []} if config.record_trajectory else None

    for k, (c, length) in enumerate(zip(schedule.distributions, schedule.lengths)):
        clicks = _sample_indices(c, int(length), rng)
        sx = sr = 0.0
        for i in clicks:
            decay_step(x, i, alpha)
            counts[i] += 1.0
            sx += np.abs(x - c).sum()
            sr += np.abs(counts / counts.sum() - c).sum()
            if traj is not None:
                traj["phase"].append(k + 1)
                traj["clicked"].append(int(i))
                traj["x"].append(x.copy())
                traj["r"].append(counts / counts.sum())
        delta_x[k] = sx / length
        delta_r[k] = sr / length

    if traj is not None:
        traj = {key: np.array(val) for key, val in traj.items()}
    return SimResult(delta_x, delta_r, schedule, config, traj)


def _run_one(config):
    return run_simulation(config)


def run_sweep(config: SimConfig, seeds, jobs=1):
    """Run ``config`` once per seed; results follow ``seeds`` order."""
    configs = [SimConfig(**{**asdict(config), "seed": int(s)}) for s in seeds]
    if jobs <= 1 or len(configs) <= 1:
        return [run_simulation(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, configs))


def simulate_final_estimates(initial, distributions, lengths, alpha, runs, rng):
    """Final decay estimates of ``runs`` independent streams on one schedule.

    Returns an array of shape ``(runs, n)``.
    """
    x = np.tile(check_simplex_point(initial, "initial"), (runs, 1))
    for c, length in zip(distributions, lengths):
        c = np.asarray(c, dtype=float)
        for _ in range(int(length)):
            decay_step(x, _sample_indices(c, runs, rng), alpha)
    return x


def expected_coefficients(lengths, alpha):
    """Weights of the initial point and of each phase in the expected estimate.

    Phase ``k`` gets ``alpha**(clicks after phase k) * (1 - alpha**t_k)``
    and the initial point ``alpha**t``; they sum to one.
    """
    lengths = [int(t) for t in lengths]
    if any(t <= 0 for t in lengths):
        raise ValueError("phase lengths must be positive")
    total = sum(lengths)
    coefs = []
    elapsed = 0
    for t in lengths:
        elapsed += t
        coefs.append(alpha ** (total - elapsed) * (1.0 - alpha**t))
    return alpha**total, np.array(coefs)


def expected_distribution(initial, phases, alpha):
    """Closed-form expectation of the decay estimate after a phase schedule.

    Parameters
    ----------
    initial : array_like of shape (n,)
        Estimate before the first click.
    phases : sequence of (distribution, length)
    alpha : float
    """
    x0 = check_simplex_point(initial, "initial")
    dists = np.array([check_simplex_point(d, "phase distribution") for d, _ in phases])
    c0, coefs = expected_coefficients([t for _, t in phases], alpha)
    return c0 * x0 + coefs @ dists


def velocity_boost_ratio(alpha, t1, t2):
    """Weight ratio of a recent phase (t2 clicks) to an older one (t1 clicks).

    Returns the exact ratio and its small-``1 - alpha`` approximation
    ``alpha**-t2 * t2 / t1``.
    """
    check_open_unit(alpha, "alpha")
    t1 = check_positive(t1, "t1", integer=True)
    t2 = check_positive(t2, "t2", integer=True)
    exact = (1.0 - alpha**t2) / (alpha**t2 * (1.0 - alpha**t1))
    approx = alpha**-t2 * (t2 / t1)
    return exact, approx


def write_metrics_csv(results, path, with_seed=False):
    """Write ``phase,length,delta_x,delta_r`` rows (prefixed by ``seed`` for sweeps)."""
    if isinstance(results, SimResult):
        results = [results]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["phase", "length", "delta_x", "delta_r"]
        w.writerow(["seed"] + header if with_seed else header)
        for res in results:
            for k, (t, dx, dr) in enumerate(zip(res.schedule.lengths, res.delta_x, res.delta_r), 1):
                row = [k, int(t), repr(float(dx)), repr(float(dr))]
                w.writerow([res.config.seed] + row if with_seed else row)


def write_trajectory_csv(result, path):
    if result.trajectory is None:
        raise ValueError("simulation was run without record_trajectory")
    tr = result.trajectory
    n = tr["x"].shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "phase", "i_clicked"] + [f"x_{j}" for j in range(n)])
        for t, (k, i, x) in enumerate(zip(tr["phase"], tr["clicked"], tr["x"]), 1):
            w.writerow([t, int(k), int(i)] + [repr(float(v)) for v in x])


def sweep_summary(results):
    mx = [r.mean_delta_x for r in results]
    mr = [r.mean_delta_r for r in results]
    return {
        "mean_delta_x": math.fsum(mx) / len(mx),
        "mean_delta_r": math.fsum(mr) / len(mr),
        "config": results[0].config.to_dict(),
        "seeds": [r.config.seed for r in results],
        "per_seed": [{"seed": r.config.seed, "mean_delta_x": a, "mean_delta_r": b} for r, a, b in zip(results, mx, mr)],
    }


def write_summary_json(summary, path):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
