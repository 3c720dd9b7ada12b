"""Synthetic pairs from a latent-variable LiNGAM and a recovery-rate harness.

Data follow::

    x1 = mu1 + sum_q lam1q f_q + e1
    x2 = mu2 + b21 x1 + sum_q lam2q f_q + e2

with ``e1``, ``e2`` and every confounder ``f_q`` drawn from the 18-entry
non-Gaussian source catalog below, then presented to the estimator in a
random column order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dists import InvalidArgument, RngStream, _require, as_generator
from .model import Direction, PairDataset
from .search import DirectionEstimate, GridSpec, estimate_direction


# Source catalog.  Mixtures are (weights, locations, spreads); "gauss"
# spreads are standard deviations, "laplace" spreads are Laplace scales.
@dataclass(frozen=True)
class SourceDist:
    id: int
    name: str
    kind: str
    params: tuple = ()

    def moments(self) -> tuple[float, float]:
        """Analytic mean and variance of the raw (unstandardized) law."""
        k, p = self.kind, self.params
        if k == "t":
            return 0.0, p[0] / (p[0] - 2.0)
        if k == "laplace":
            return 0.0, 2.0
        if k == "uniform":
            return 0.0, 1.0 / 3.0
        if k == "exponential":
            return 1.0, 1.0
        w, m, s = (np.asarray(a, dtype=float) for a in p)
        comp_var = s**2 if k == "gauss_mix" else 2.0 * s**2
        mean = float(w @ m)
        return mean, float(w @ (comp_var + m**2) - mean**2)

    def raw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        k, p = self.kind, self.params
        if k == "t":
            return gen.standard_t(p[0], size=count)
        if k == "laplace":
            return gen.laplace(0.0, 1.0, size=count)
        if k == "uniform":
            return gen.uniform(-1.0, 1.0, size=count)
        if k == "exponential":
            return gen.exponential(1.0, size=count)
        w, m, s = (np.asarray(a, dtype=float) for a in p)
        comp = gen.choice(len(w), size=count, p=w / w.sum())
        if k == "gauss_mix":
            return m[comp] + s[comp] * gen.standard_normal(count)
        return m[comp] + gen.laplace(0.0, 1.0, size=count) * s[comp]


def _mix(w, m, s):
    return (tuple(w), tuple(m), tuple(s))


SOURCES: tuple[SourceDist, ...] = (
    SourceDist(1, "student t, 3 dof", "t", (3.0,)),
    SourceDist(2, "double exponential", "laplace"),
    SourceDist(3, "uniform", "uniform"),
    SourceDist(4, "student t, 5 dof", "t", (5.0,)),
    SourceDist(5, "exponential", "exponential"),
    SourceDist(6, "mixture of two double exponentials", "laplace_mix",
               _mix((0.5, 0.5), (-1.0, 1.0), (0.5, 0.5))),
    SourceDist(7, "symmetric 2-gaussian mixture, multimodal", "gauss_mix",
               _mix((0.5, 0.5), (-1.5, 1.5), (0.5, 0.5))),
    SourceDist(8, "symmetric 2-gaussian mixture, transitional", "gauss_mix",
               _mix((0.5, 0.5), (-0.8, 0.8), (0.6, 0.6))),
    SourceDist(9, "symmetric 2-gaussian mixture, unimodal", "gauss_mix",
               _mix((0.5, 0.5), (-0.5, 0.5), (0.7, 0.7))),
    SourceDist(10, "asymmetric 2-gaussian mixture, multimodal", "gauss_mix",
               _mix((0.3, 0.7), (-1.5, 1.0), (0.4, 0.5))),
    SourceDist(11, "asymmetric 2-gaussian mixture, transitional", "gauss_mix",
               _mix((0.3, 0.7), (-1.0, 0.5), (0.6, 0.6))),
    SourceDist(12, "asymmetric 2-gaussian mixture, unimodal", "gauss_mix",
               _mix((0.7, 0.3), (0.0, 1.5), (1.0, 0.5))),
    SourceDist(13, "symmetric 4-gaussian mixture, multimodal", "gauss_mix",
               _mix((0.25,) * 4, (-3.0, -1.0, 1.0, 3.0), (0.4,) * 4)),
    SourceDist(14, "symmetric 4-gaussian mixture, transitional", "gauss_mix",
               _mix((0.25,) * 4, (-1.5, -0.5, 0.5, 1.5), (0.45,) * 4)),
    SourceDist(15, "symmetric 4-gaussian mixture, unimodal", "gauss_mix",
               _mix((0.25,) * 4, (-1.0, -0.3, 0.3, 1.0), (0.6,) * 4)),
    SourceDist(16, "asymmetric 4-gaussian mixture, multimodal", "gauss_mix",
               _mix((0.1, 0.2, 0.3, 0.4), (-3.0, -1.0, 1.0, 3.0), (0.4,) * 4)),
    SourceDist(17, "asymmetric 4-gaussian mixture, transitional", "gauss_mix",
               _mix((0.1, 0.4, 0.3, 0.2), (-2.0, -0.5, 0.7, 2.0), (0.5,) * 4)),
    SourceDist(18, "asymmetric 4-gaussian mixture, unimodal", "gauss_mix",
               _mix((0.4, 0.3, 0.2, 0.1), (-0.5, 0.0, 0.8, 2.0), (0.6, 0.6, 0.7, 1.0))),
)


def source(dist_id: int) -> SourceDist:
    if not isinstance(dist_id, (int, np.integer)) or not 1 <= dist_id <= len(SOURCES):
        raise InvalidArgument(f"unknown source id {dist_id!r}")
    return SOURCES[int(dist_id) - 1]


def sample_source(dist: SourceDist | int, rng: RngStream | np.random.Generator, count: int) -> np.ndarray:
    """Zero-mean, unit-variance i.i.d. draws from a catalog entry."""
    dist = source(dist) if not isinstance(dist, SourceDist) else dist
    _require(count >= 1, "count must be >= 1")
    mean, var = dist.moments()
    return (dist.raw(as_generator(rng), int(count)) - mean) / math.sqrt(var)


@dataclass(frozen=True)
class GenConfig:
    n: int = 100
    q: int = 0
    coef_low: float = 0.5
    coef_high: float = 1.5
    err_var_low: float = 0.25
    err_var_high: float = 2.25
    sources: tuple[int, ...] = tuple(range(1, 19))
    seed: int = 0
    keep_latents: bool = False
    b21: Optional[float] = None  # fixed causal coefficient instead of a random draw
    permute: bool = True

    def __post_init__(self):
        _require(self.n >= 3, "n must be >= 3")
        _require(self.q >= 0, "q must be >= 0")
        _require(0 < self.coef_low < self.coef_high, "need 0 < coef_low < coef_high")
        _require(0 < self.err_var_low < self.err_var_high, "need 0 < err_var_low < err_var_high")
        _require(len(self.sources) > 0, "source catalog selection is empty")
        for s in self.sources:
            source(s)


@dataclass(frozen=True, eq=False)
class GenTruth:
    true_direction: Direction
    permutation: tuple[int, int]
    mu: tuple[float, float]
    b21: float
    lam1: np.ndarray
    lam2: np.ndarray
    err_vars: tuple[float, float]
    err_sources: tuple[int, int]
    conf_sources: tuple[int, ...]
    latents: Optional[dict] = None


def gen_pair(config: GenConfig, rng: RngStream | np.random.Generator | None = None) -> tuple[PairDataset, GenTruth]:
    gen = as_generator(rng if rng is not None else RngStream(config.seed))
    n, q = config.n, config.q
    ids = np.asarray(config.sources)

    def coefs(k):
        return gen.choice((-1.0, 1.0), size=k) * gen.uniform(config.coef_low, config.coef_high, size=k)

    mu1, mu2 = gen.standard_normal(2)
    b21 = float(coefs(1)[0])
    if config.b21 is not None:
        b21 = float(config.b21)
    lam1, lam2 = coefs(q), coefs(q)
    err_ids = tuple(int(i) for i in gen.choice(ids, size=2))
    conf_ids = tuple(int(i) for i in gen.choice(ids, size=q))
    err_vars = tuple(float(v) for v in gen.uniform(config.err_var_low, config.err_var_high, size=2))
    f = np.stack([sample_source(i, gen, n) for i in conf_ids]) if q else np.zeros((0, n))
    e1 = math.sqrt(err_vars[0]) * sample_source(err_ids[0], gen, n)
    e2 = math.sqrt(err_vars[1]) * sample_source(err_ids[1], gen, n)

    x1 = mu1 + lam1 @ f + e1
    x2 = mu2 + b21 * x1 + lam2 @ f + e2
    swap = bool(gen.integers(2)) and config.permute
    if swap:
        data = PairDataset(np.column_stack([x2, x1]), ("x2", "x1"))
    else:
        data = PairDataset(np.column_stack([x1, x2]), ("x1", "x2"))
    latents = {"f": f, "e1": e1, "e2": e2, "x1": x1, "x2": x2} if config.keep_latents else None
    truth = GenTruth(Direction.M2 if swap else Direction.M1, (1, 0) if swap else (0, 1),
                     (float(mu1), float(mu2)), b21, lam1, lam2, err_vars, err_ids, conf_ids, latents)
    return data, truth


def binomial_se_percent(successes: int, trials: int) -> float:
    """Standard error of a success percentage under a binomial model."""
    _require(trials >= 1 and 0 <= successes <= trials, "need 0 <= successes <= trials, trials >= 1")
    p = successes / trials
    return 100.0 * math.sqrt(p * (1.0 - p) / trials)


@dataclass(frozen=True)
class TrialRecord:
    index: int
    true_direction: Direction
    estimated: Optional[Direction]
    success: bool
    decided: bool
    tau_fracs: tuple[float, float]
    sigma12: float
    best_log_ml: float
    runner_up_log_ml: float
    err_sources: tuple[int, int]
    conf_sources: tuple[int, ...]
    seconds: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class SuccessReport:
    trials: int
    successes: int
    n: int
    q: int
    records: list[TrialRecord]

    @property
    def percent(self) -> float:
        return 100.0 * self.successes / self.trials

    @property
    def se_percent(self) -> float:
        return binomial_se_percent(self.successes, self.trials)


def trial_streams(base_seed: int, index: int) -> tuple[RngStream, int]:
    """Data stream and estimator seed for one trial.

    The data stream ignores the grid, so two experiments sharing a
    ``base_seed`` see identical datasets trial by trial.
    """
    root = RngStream(base_seed, (index,))
    return root.child(0), root.child(1).derive_seed()


def run_experiment(trials: int, config: GenConfig, spec: GridSpec = GridSpec(), base_seed: int = 0,
                   progress: Optional[Callable[[TrialRecord], None]] = None) -> SuccessReport:
    _require(trials >= 1, "trials must be >= 1")
    records = []
    for t in range(trials):
        data_rng, est_seed = trial_streams(base_seed, t)
        t0 = time.perf_counter()
        data, truth = gen_pair(config, data_rng)
        est = estimate_direction(data, spec, est_seed)
        rec = _record(t, truth, est, time.perf_counter() - t0)
        records.append(rec)
        if progress is not None:
            progress(rec)
    return SuccessReport(trials, sum(r.success for r in records), config.n, config.q, records)


def _record(index: int, truth: GenTruth, est: DirectionEstimate, seconds: float) -> TrialRecord:
    fr = est.best_hyper.fracs or (math.nan, math.nan)
    return TrialRecord(index, truth.true_direction, est.winner, est.decided and est.winner is truth.true_direction,
                       est.decided, fr, est.best_hyper.sigma12, est.best_log_ml, est.runner_up_log_ml,
                       truth.err_sources, truth.conf_sources, seconds)
