"""Prior Monte Carlo estimates of the log-marginal likelihood."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dists import RngStream, _require, log_mean_exp
from .model import Direction, HyperParams, PairDataset, batch_log_likelihood, sample_prior_batch

# Draws are generated and scored in blocks to bound memory at large S.
BLOCK = 4096


@dataclass(frozen=True)
class MarginalEstimate:
    log_ml: float
    mc_se: float
    samples: int
    seed: int
    model: Direction
    hyper: HyperParams
    max_loglik: float = -math.inf


def _weights_summary(ll: np.ndarray) -> tuple[float, float]:
    lml = log_mean_exp(ll)
    if not math.isfinite(lml):
        return -math.inf, math.inf
    S = ll.size
    if S < 2:
        return lml, math.inf
    w = np.exp(ll - ll.max())
    mean = w.mean()
    # delta method: sd(log mean w) ~= sd(w) / (sqrt(S) mean(w))
    se = float(w.std(ddof=1) / (math.sqrt(S) * mean))
    return lml, se


def log_likelihood_draws(data: PairDataset, model: Direction, hyper: HyperParams,
                         samples: int, rng: RngStream) -> np.ndarray:
    """Log-likelihood at each of ``samples`` prior draws."""
    _require(samples >= 1, "samples must be >= 1")
    gen = rng.generator()
    out = np.empty(samples)
    for start in range(0, samples, BLOCK):
        m = min(BLOCK, samples - start)
        batch = sample_prior_batch(hyper, model, data.n, gen, m)
        out[start:start + m] = batch_log_likelihood(data, model, batch, hyper.error_family)
    return out


def log_marginal(data: PairDataset, model: Direction, hyper: HyperParams, samples: int,
                 rng: RngStream) -> MarginalEstimate:
    """Average the likelihood over prior draws, in log space.

    The model prior and ``log p(D)`` are omitted; they are common to both
    directions under a uniform model prior.
    """
    model = Direction(model)
    ll = log_likelihood_draws(data, model, hyper, samples, rng)
    lml, se = _weights_summary(ll)
    return MarginalEstimate(lml, se, samples, rng.seed, model, hyper, float(ll.max()))


def cell_stream(base_seed: int, grid_index: int, model: Direction, crn: bool = False) -> RngStream:
    """Stream for one ``(model, eta)`` cell.

    With ``crn`` both models at the same grid point share a stream.
    """
    if crn:
        return RngStream(base_seed, (grid_index,))
    return RngStream(base_seed, (grid_index, 0 if model is Direction.M1 else 1))


class CellFailure(RuntimeError):
    def __init__(self, hyper: HyperParams, model: Direction, cause: Exception):
        super().__init__(f"cell {model.value} at {hyper} failed: {cause}")
        self.hyper = hyper
        self.model = model


def score_table(data: PairDataset, grid: Sequence[HyperParams], samples: int, base_seed: int,
                *, crn: bool = False, threads: Optional[int] = None) -> list[MarginalEstimate]:
    """Log-marginal estimates for both models at every grid point.

    Output order is ``[(eta_0, M1), (eta_0, M2), (eta_1, M1), ...]`` whatever
    the thread count.
    """
    _require(len(grid) > 0, "grid must be non-empty")
    cells = [(g, h, m) for g, h in enumerate(grid) for m in (Direction.M1, Direction.M2)]

    def run(cell):
        g, h, m = cell
        try:
            return log_marginal(data, m, h, samples, cell_stream(base_seed, g, m, crn))
        except Exception as exc:  # noqa: BLE001 - re-raised with the failing cell attached
            raise CellFailure(h, m, exc) from exc

    if threads is None or threads <= 1:
        return [run(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, cells))
