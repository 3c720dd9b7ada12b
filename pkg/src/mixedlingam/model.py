"""The two-variable mixed-LiNGAM model.

Each observation follows a LiNGAM with its own intercept shift::

    M1 (x1 -> x2):  x1 = mu1 + mt1 + e1,           x2 = mu2 + mt2 + b * x1 + e2
    M2 (x2 -> x1):  x1 = mu1 + mt1 + b * x2 + e1,  x2 = mu2 + mt2 + e2

``mt`` are the individual-specific effects (one pair per row), ``e_l`` are
i.i.d. with standard deviation ``|h_l|``.  Functions here work on a single
:class:`ParamDraw` or on a :class:`DrawBatch` of ``S`` prior draws at once;
the batch form is what the Monte Carlo estimator uses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dists import RngStream, _require, as_generator, sample_chisq

H_FLOOR = 1e-12
LOG_SQRT2 = 0.5 * math.log(2.0)
LOG_2PI = math.log(2.0 * math.pi)


class Direction(enum.Enum):
    M1 = "M1"  # x1 -> x2
    M2 = "M2"  # x2 -> x1

    def flipped(self) -> "Direction":
        return Direction.M2 if self is Direction.M1 else Direction.M1


class PriorFamily(enum.Enum):
    T = "t"
    GAUSSIAN = "gaussian"


class ErrorFamily(enum.Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True, eq=False)
class PairDataset:
    """``n x 2`` observations of one ordered variable pair.

    Any ``n >= 1`` is accepted so that likelihoods can be evaluated on tiny
    inputs; :meth:`require_analyzable` enforces what the hyperparameter search
    needs (``n >= 3``, non-constant columns).
    """

    x: np.ndarray
    labels: tuple[str, str] = ("x1", "x2")
    rejected_rows: int = 0

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        _require(x.ndim == 2 and x.shape[1] == 2, "data must be an n x 2 matrix")
        _require(x.shape[0] >= 1, "need at least one observation")
        _require(bool(np.all(np.isfinite(x))), "data must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "labels", (str(self.labels[0]), str(self.labels[1])))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def require_analyzable(self) -> None:
        _require(self.n >= 3, f"need at least 3 observations, got {self.n}")
        for j in (0, 1):
            _require(bool(np.ptp(self.x[:, j]) > 0), f"column {self.labels[j]!r} is constant")

    def variances(self) -> tuple[float, float]:
        v = self.x.var(axis=0, ddof=1)
        return float(v[0]), float(v[1])

    def swapped(self) -> "PairDataset":
        return PairDataset(self.x[:, ::-1], (self.labels[1], self.labels[0]), self.rejected_rows)


@dataclass(frozen=True)
class HyperParams:
    """One grid point of prior hyperparameters.

    ``tau_cmmn`` is ordered ``(mu1, mu2, b12, b21, h1, h2)``.  ``fracs``
    optionally records the grid fractions ``(f1, f2)`` with
    ``tau_indvdl_l = f_l**2 * var(x_l)``; it is reporting metadata only.
    """

    tau_cmmn: tuple[float, float, float, float, float, float]
    tau_indvdl1: float = 0.0
    tau_indvdl2: float = 0.0
    sigma12: float = 0.0
    prior_family: PriorFamily = PriorFamily.T
    nu: int = 6
    error_family: ErrorFamily = ErrorFamily.LAPLACE
    fracs: Optional[tuple[float, float]] = None

    def __post_init__(self):
        tc = tuple(float(t) for t in self.tau_cmmn)
        _require(len(tc) == 6, "tau_cmmn needs six entries")
        _require(all(math.isfinite(t) and t > 0 for t in tc), "tau_cmmn entries must be positive")
        object.__setattr__(self, "tau_cmmn", tc)
        _require(self.tau_indvdl1 >= 0 and self.tau_indvdl2 >= 0, "tau_indvdl must be non-negative")
        _require(abs(self.sigma12) < 1, "|sigma12| must be < 1")
        object.__setattr__(self, "prior_family", PriorFamily(self.prior_family))
        object.__setattr__(self, "error_family", ErrorFamily(self.error_family))
        if self.prior_family is PriorFamily.T:
            _require(int(self.nu) == self.nu and self.nu > 2, "nu must be an integer > 2")

    @property
    def has_individual_effects(self) -> bool:
        return self.tau_indvdl1 > 0 or self.tau_indvdl2 > 0

    def with_errors(self, family: ErrorFamily) -> "HyperParams":
        return replace(self, error_family=ErrorFamily(family))


@dataclass(frozen=True, eq=False)
class ParamDraw:
    mu1: float
    mu2: float
    b: float
    h1: float
    h2: float
    mu_tilde: np.ndarray

    def __post_init__(self):
        mt = np.asarray(self.mu_tilde, dtype=float)
        _require(mt.ndim == 2 and mt.shape[1] == 2, "mu_tilde must be n x 2")
        _require(bool(np.all(np.isfinite(mt))) and all(math.isfinite(v) for v in
                                                       (self.mu1, self.mu2, self.b, self.h1, self.h2)),
                 "draw entries must be finite")
        object.__setattr__(self, "mu_tilde", mt)

    def swapped(self) -> "ParamDraw":
        return ParamDraw(self.mu2, self.mu1, self.b, self.h2, self.h1, self.mu_tilde[:, ::-1])


@dataclass(frozen=True, eq=False)
class DrawBatch:
    """``S`` prior draws stored column-wise.

    ``mt1`` and ``mt2`` are the ``(S, n)`` individual effects of ``x1`` and
    ``x2``, or None when both effect variances are zero.
    """

    mu1: np.ndarray
    mu2: np.ndarray
    b: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    mt1: Optional[np.ndarray] = None
    mt2: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.mu1.shape[0]

    def draw(self, s: int, n: int) -> ParamDraw:
        if self.mt1 is None:
            mt = np.zeros((n, 2))
        else:
            mt = np.column_stack([self.mt1[s], self.mt2[s]])
        return ParamDraw(float(self.mu1[s]), float(self.mu2[s]), float(self.b[s]),
                         float(self.h1[s]), float(self.h2[s]), mt)


def _as_batch(draw: ParamDraw) -> DrawBatch:
    one = lambda v: np.array([float(v)])
    return DrawBatch(one(draw.mu1), one(draw.mu2), one(draw.b), one(draw.h1), one(draw.h2),
                     draw.mu_tilde[None, :, 0], draw.mu_tilde[None, :, 1])


def _batch_residual_columns(data: PairDataset, model: Direction, batch: DrawBatch):
    x1 = data.x[:, 0][None, :]
    x2 = data.x[:, 1][None, :]
    e1 = x1 - batch.mu1[:, None]
    e2 = x2 - batch.mu2[:, None]
    if model is Direction.M1:
        e2 -= batch.b[:, None] * x1
    else:
        e1 -= batch.b[:, None] * x2
    if batch.mt1 is not None:
        _require(batch.mt1.shape[1] == data.n, "mu_tilde row count must equal n")
        e1 -= batch.mt1
        e2 -= batch.mt2
    return e1, e2


def batch_residuals(data: PairDataset, model: Direction, batch: DrawBatch) -> np.ndarray:
    """Residuals for every draw, shape ``(S, n, 2)``."""
    return np.stack(_batch_residual_columns(data, Direction(model), batch), axis=-1)


def residuals(data: PairDataset, model: Direction, draw: ParamDraw) -> np.ndarray:
    """Implied error realizations ``(n, 2)`` under ``model``."""
    _require(draw.mu_tilde.shape[0] == data.n, "mu_tilde row count must equal n")
    return batch_residuals(data, Direction(model), _as_batch(draw))[0]


def _column_loglik(r: np.ndarray, h: np.ndarray, family: ErrorFamily) -> np.ndarray:
    # r: (S, n); h: (S,)
    a = np.abs(h)
    ok = a > H_FLOOR
    a = np.where(ok, a, 1.0)
    n = r.shape[1]
    if family is ErrorFamily.LAPLACE:
        # Laplace scale |h|/sqrt(2): log p = -log(sqrt(2)|h|) - sqrt(2)|r|/|h|
        out = -n * (LOG_SQRT2 + np.log(a)) - math.sqrt(2.0) * np.abs(r).sum(axis=1) / a
    else:
        out = -n * (0.5 * LOG_2PI + np.log(a)) - 0.5 * (r * r).sum(axis=1) / (a * a)
    return np.where(ok, out, -np.inf)


def batch_log_likelihood(data: PairDataset, model: Direction, batch: DrawBatch,
                         error_family: ErrorFamily = ErrorFamily.LAPLACE) -> np.ndarray:
    """Complete-data log-likelihood of every draw, shape ``(S,)``.

    Draws with ``|h_l|`` below ``H_FLOOR`` score ``-inf``.
    """
    e1, e2 = _batch_residual_columns(data, Direction(model), batch)
    fam = ErrorFamily(error_family)
    return _column_loglik(e1, batch.h1, fam) + _column_loglik(e2, batch.h2, fam)


def log_likelihood(data: PairDataset, model: Direction, draw: ParamDraw, hyper: HyperParams) -> float:
    _require(draw.mu_tilde.shape[0] == data.n, "mu_tilde row count must equal n")
    return float(batch_log_likelihood(data, model, _as_batch(draw), hyper.error_family)[0])


def default_tau_cmmn(data: PairDataset) -> tuple[float, float, float, float, float, float]:
    """Vague prior variances ``100 * var(x_l)`` in order ``(mu1, mu2, b12, b21, h1, h2)``.

    ``b12`` (the coefficient in the ``x1`` equation) follows ``var(x1)``,
    ``b21`` follows ``var(x2)``.
    """
    data.require_analyzable()
    v1, v2 = data.variances()
    _require(v1 > 0 and v2 > 0, "column variances must be positive")
    t1, t2 = 100.0 * v1, 100.0 * v2
    return (t1, t2, t1, t2, t1, t2)


def sample_individual_effects(hyper: HyperParams, n: int, gen: np.random.Generator,
                              draws: int) -> tuple[np.ndarray, np.ndarray]:
    """Individual-specific effects of ``x1`` and ``x2``, each ``(draws, n)``.

    Both prior families are scaled so that the effects of ``x_l`` have
    variance ``tau_indvdl_l`` and correlation ``sigma12``.
    """
    s12 = hyper.sigma12
    y = gen.standard_normal((2, draws, n))
    y1, y2 = y[0], y[1]
    if s12 != 0.0:
        y2 *= math.sqrt(1.0 - s12 * s12)
        y2 += s12 * y1
    c1, c2 = math.sqrt(hyper.tau_indvdl1), math.sqrt(hyper.tau_indvdl2)
    if hyper.prior_family is PriorFamily.T:
        nu = int(hyper.nu)
        v = sample_chisq(nu, gen, (draws, n))
        # u = y / sqrt(v/nu) has variance nu/(nu-2); C^{-1/2} = sqrt((nu-2)/nu)
        w = np.sqrt((nu - 2) / v)
        y1 *= w
        y2 *= w
    y1 *= c1
    y2 *= c2
    return y1, y2


def sample_prior_batch(hyper: HyperParams, model: Direction, n: int,
                       rng: RngStream | np.random.Generator, draws: int) -> DrawBatch:
    """``draws`` independent prior draws of all parameters.

    When both individual-effect variances are zero the effect stage is
    skipped, so the result (and the stream consumed) does not depend on
    ``sigma12`` or the prior family.
    """
    _require(n >= 1 and draws >= 1, "n and draws must be >= 1")
    gen = as_generator(rng)
    t_mu1, t_mu2, t_b12, t_b21, t_h1, t_h2 = hyper.tau_cmmn
    t_b = t_b21 if Direction(model) is Direction.M1 else t_b12
    z = gen.standard_normal((5, draws))
    sd = np.sqrt([t_mu1, t_mu2, t_b, t_h1, t_h2])[:, None]
    z *= sd
    mt1 = mt2 = None
    if hyper.has_individual_effects:
        mt1, mt2 = sample_individual_effects(hyper, n, gen, draws)
    return DrawBatch(z[0], z[1], z[2], z[3], z[4], mt1, mt2)


def sample_prior(hyper: HyperParams, model: Direction, n: int, rng: RngStream) -> ParamDraw:
    return sample_prior_batch(hyper, model, n, rng, 1).draw(0, n)
