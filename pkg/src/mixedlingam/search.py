"""Empirical-Bayes search over hyperparameters and direction selection."""

from __future__ import annotations

import graphlib
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .dists import InvalidArgument, _require
from .marginal import MarginalEstimate, score_table
from .model import Direction, ErrorFamily, HyperParams, PairDataset, PriorFamily, default_tau_cmmn

DEFAULT_TAU_FRACS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_SIGMA12 = (0.0, 0.3, -0.3, 0.5, -0.5, 0.7, -0.7, 0.9, -0.9)

FAST_TAU_FRACS = (0.0, 0.4, 0.8, 1.0)
FAST_SIGMA12 = (0.0, 0.5, -0.5, 0.9, -0.9)


@dataclass(frozen=True)
class GridSpec:
    """Candidate hyperparameter values.

    ``tau_fracs`` are fractions ``f`` giving ``tau_indvdl = f**2 * var(x)``.
    """

    tau_fracs: tuple[float, ...] = DEFAULT_TAU_FRACS
    sigma12_values: tuple[float, ...] = DEFAULT_SIGMA12
    prior_family: PriorFamily = PriorFamily.T
    error_family: ErrorFamily = ErrorFamily.LAPLACE
    samples: int = 1000
    nu: int = 6
    dedupe: bool = True
    crn: bool = False
    threads: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "tau_fracs", tuple(float(f) for f in self.tau_fracs))
        object.__setattr__(self, "sigma12_values", tuple(float(s) for s in self.sigma12_values))
        object.__setattr__(self, "prior_family", PriorFamily(self.prior_family))
        object.__setattr__(self, "error_family", ErrorFamily(self.error_family))
        _require(len(self.tau_fracs) > 0 and len(self.sigma12_values) > 0, "grid lists must be non-empty")
        _require(all(f >= 0 for f in self.tau_fracs), "tau fractions must be non-negative")
        _require(list(self.tau_fracs) == sorted(self.tau_fracs), "tau fractions must be sorted")
        _require(0.0 in self.tau_fracs, "tau fractions must contain 0")
        _require(0.0 in self.sigma12_values, "sigma12 values must contain 0")
        _require(all(abs(s) < 1 for s in self.sigma12_values), "|sigma12| must be < 1")
        _require(self.samples >= 1, "samples must be >= 1")

    @classmethod
    def fast(cls, **kw) -> "GridSpec":
        """Reduced, non-canonical profile for quick checks."""
        kw.setdefault("samples", 250)
        return cls(tau_fracs=FAST_TAU_FRACS, sigma12_values=FAST_SIGMA12, **kw)

    @classmethod
    def no_individual_effects(cls, **kw) -> "GridSpec":
        """Degenerate grid with both individual-effect variances fixed at zero."""
        return cls(tau_fracs=(0.0,), sigma12_values=(0.0,), **kw)

    def is_canonical(self) -> bool:
        return (self.tau_fracs == DEFAULT_TAU_FRACS and set(self.sigma12_values) == set(DEFAULT_SIGMA12)
                and self.samples == 1000 and self.nu == 6 and self.dedupe)


def grid_hyperparams(data: PairDataset, spec: GridSpec) -> list[HyperParams]:
    """Enumerate the grid.

    With ``spec.dedupe`` a point where either ``tau_indvdl`` is zero is kept
    only with ``sigma12 = 0``, since the correlation then has no effect.
    """
    tau = default_tau_cmmn(data)
    v1, v2 = data.variances()
    out = []
    for f1, f2, s in itertools.product(spec.tau_fracs, spec.tau_fracs, spec.sigma12_values):
        if spec.dedupe and (f1 == 0 or f2 == 0) and s != 0:
            continue
        out.append(HyperParams(tau, f1 * f1 * v1, f2 * f2 * v2, s, spec.prior_family, spec.nu,
                               spec.error_family, (f1, f2)))
    return out


@dataclass(frozen=True)
class DirectionEstimate:
    winner: Optional[Direction]
    best_hyper: HyperParams
    best_log_ml: float
    runner_up_log_ml: float
    table: list[MarginalEstimate] = field(repr=False)
    decided: bool = True

    def best_for(self, model: Direction) -> MarginalEstimate:
        return max((e for e in self.table if e.model is model), key=lambda e: e.log_ml)

    @property
    def winning_cell(self) -> MarginalEstimate:
        return max(self.table, key=lambda e: e.log_ml)


def select_direction(table: Sequence[MarginalEstimate]) -> DirectionEstimate:
    """Pick the model and hyperparameters with the largest log-marginal likelihood.

    ``runner_up_log_ml`` is the best score of the losing model.  If the best
    scores of the two models are exactly equal the result is undecided
    (``decided=False``, ``winner=None``).
    """
    _require(len(table) > 0, "empty score table")
    best = {}
    for e in table:  # first occurrence wins ties within a model
        cur = best.get(e.model)
        if cur is None or e.log_ml > cur.log_ml:
            best[e.model] = e
    _require(len(best) == 2, "score table must contain both models")
    b1, b2 = best[Direction.M1], best[Direction.M2]
    if b1.log_ml == b2.log_ml:
        return DirectionEstimate(None, b1.hyper, b1.log_ml, b2.log_ml, list(table), decided=False)
    top, other = (b1, b2) if b1.log_ml > b2.log_ml else (b2, b1)
    return DirectionEstimate(top.model, top.hyper, top.log_ml, other.log_ml, list(table))


def estimate_direction(data: PairDataset, spec: GridSpec = GridSpec(), base_seed: int = 0) -> DirectionEstimate:
    grid = grid_hyperparams(data, spec)
    table = score_table(data, grid, spec.samples, base_seed, crn=spec.crn, threads=spec.threads)
    return select_direction(table)


@dataclass(frozen=True)
class GaussianityCheck:
    laplace: DirectionEstimate = field(repr=False)
    gaussian: DirectionEstimate = field(repr=False)
    laplace_best_log_ml: float = -math.inf
    gaussian_best_log_ml: float = -math.inf

    @property
    def gaussian_preferred(self) -> bool:
        """True when Gaussian errors fit better; the direction is then unreliable."""
        return self.gaussian_best_log_ml > self.laplace_best_log_ml


def gaussianity_check(data: PairDataset, spec: GridSpec = GridSpec(), base_seed: int = 0) -> GaussianityCheck:
    lap = estimate_direction(data, replace(spec, error_family=ErrorFamily.LAPLACE), base_seed)
    gau = estimate_direction(data, replace(spec, error_family=ErrorFamily.GAUSSIAN), base_seed)
    return GaussianityCheck(lap, gau, lap.best_log_ml, gau.best_log_ml)


@dataclass(frozen=True)
class Ordering:
    """Variables ranked by number of pairs in which they were estimated upstream.

    This is a win-count heuristic; ``tied`` marks equal counts resolved
    alphabetically and ``cyclic`` marks pairwise results that admit no
    consistent ordering.
    """

    labels: list[str]
    wins: dict[str, int]
    tied: bool
    cyclic: bool


def aggregate_ordering(pair_results: Sequence[tuple[Sequence[str], DirectionEstimate]]) -> Ordering:
    names = sorted({lab for labels, _ in pair_results for lab in labels})
    seen = {}
    for labels, est in pair_results:
        a, b = labels
        _require(a != b, "a pair needs two distinct labels")
        key = frozenset((a, b))
        _require(key not in seen, f"pair {a},{b} given twice")
        seen[key] = (a, b, est)
    missing = [p for p in itertools.combinations(names, 2) if frozenset(p) not in seen]
    if missing:
        raise InvalidArgument(f"missing pairs: {missing}")

    wins = {name: 0 for name in names}
    graph = graphlib.TopologicalSorter()
    for name in names:
        graph.add(name)
    for a, b, est in seen.values():
        if not est.decided:
            continue
        up, down = (a, b) if est.winner is Direction.M1 else (b, a)
        wins[up] += 1
        graph.add(down, up)
    try:
        graph.prepare()
        cyclic = False
    except graphlib.CycleError:
        cyclic = True
    order = sorted(names, key=lambda v: (-wins[v], v))
    counts = list(wins.values())
    return Ordering(order, wins, len(set(counts)) < len(counts), cyclic)
