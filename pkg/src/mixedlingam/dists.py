"""Elementary densities and samplers: Laplace, Gaussian, chi-squared,
bivariate Student t, plus a stable log-mean-exp.

Every sampler takes an :class:`RngStream` and builds its own generator from
it, so a call is a pure function of ``(params, seed, stream)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np


class InvalidArgument(ValueError):
    """Raised when an input violates a documented precondition."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidArgument(msg)


StreamKey = Union[int, Sequence[int]]


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream)``.

    ``stream`` may be a single non-negative integer or a tuple of them; the
    tuple form is produced by :meth:`child` to derive independent substreams
    (e.g. one per grid cell or per trial) without coordination.
    """

    seed: int
    stream: StreamKey = 0

    def key(self) -> tuple[int, ...]:
        if isinstance(self.stream, (int, np.integer)):
            return (int(self.stream),)
        return tuple(int(s) for s in self.stream)

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.key() + (int(index),))

    def generator(self) -> np.random.Generator:
        _require(self.seed >= 0, "seed must be non-negative")
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self.key())
        return np.random.Generator(np.random.PCG64(ss))

    def derive_seed(self) -> int:
        """A 63-bit integer seed derived from this stream."""
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self.key())
        return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


@dataclass(frozen=True)
class LaplaceParams:
    mean: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        _require(math.isfinite(self.mean), "Laplace mean must be finite")
        _require(math.isfinite(self.scale) and self.scale > 0, "Laplace scale must be positive")

    @classmethod
    def from_std(cls, h: float, mean: float = 0.0) -> "LaplaceParams":
        """Laplace law with standard deviation ``|h|``."""
        return cls(mean, abs(h) / math.sqrt(2.0))

    @property
    def variance(self) -> float:
        return 2.0 * self.scale**2


@dataclass(frozen=True)
class MvtParams:
    """Bivariate t with unit-diagonal scale matrix ``[[1, sigma12], [sigma12, 1]]``."""

    nu: int = 6
    sigma12: float = 0.0

    def __post_init__(self):
        _require(int(self.nu) == self.nu, "nu must be an integer")
        _require(self.nu > 2, "nu must exceed 2 for a finite variance")
        _require(abs(self.sigma12) < 1, "|sigma12| must be < 1")

    @property
    def sigma(self) -> np.ndarray:
        return np.array([[1.0, self.sigma12], [self.sigma12, 1.0]])


def laplace_logpdf(x, p: LaplaceParams):
    """Log density of a Laplace law, elementwise over ``x``."""
    x = np.asarray(x, dtype=float)
    _require(bool(np.all(np.isfinite(x))), "x must be finite")
    out = -math.log(2.0 * p.scale) - np.abs(x - p.mean) / p.scale
    return float(out) if out.ndim == 0 else out


def gaussian_logpdf(x, mean: float = 0.0, std: float = 1.0):
    x = np.asarray(x, dtype=float)
    _require(bool(np.all(np.isfinite(x))), "x must be finite")
    _require(std > 0, "std must be positive")
    out = -0.5 * math.log(2.0 * math.pi * std * std) - 0.5 * ((x - mean) / std) ** 2
    return float(out) if out.ndim == 0 else out


def sample_laplace(p: LaplaceParams, rng: RngStream | np.random.Generator, count: int) -> np.ndarray:
    _require(count >= 1, "count must be >= 1")
    return as_generator(rng).laplace(p.mean, p.scale, size=int(count))


def sample_chisq(nu: int, gen: np.random.Generator, size) -> np.ndarray:
    """Chi-squared draws with integer ``nu`` degrees of freedom."""
    _require(int(nu) == nu and nu >= 1, "nu must be a positive integer")
    return gen.chisquare(int(nu), size=size)


def _correlated_normals(sigma12: float, gen: np.random.Generator, size) -> np.ndarray:
    # First component is never mixed, so its law does not depend on sigma12.
    shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
    y = gen.standard_normal(shape + (2,))
    if sigma12 != 0.0:
        y[..., 1] = sigma12 * y[..., 0] + math.sqrt(1.0 - sigma12 * sigma12) * y[..., 1]
    return y


def sample_mvt(p: MvtParams, rng: RngStream | np.random.Generator, size=None) -> np.ndarray:
    """Bivariate t draws ``y / sqrt(v / nu)`` with ``y ~ N(0, Sigma)``, ``v ~ chi2(nu)``.

    Returns a 2-vector when ``size`` is None, else an array of shape
    ``size + (2,)``.
    """
    gen = as_generator(rng)
    n = 1 if size is None else size
    y = _correlated_normals(p.sigma12, gen, n)
    v = sample_chisq(p.nu, gen, n)
    u = y / np.sqrt(v / p.nu)[..., None]
    return u[0] if size is None else u


def sample_mvn(sigma, rng: RngStream | np.random.Generator, size=None) -> np.ndarray:
    """Zero-mean bivariate Gaussian draws with covariance ``sigma``."""
    sigma = np.asarray(sigma, dtype=float)
    _require(sigma.shape == (2, 2), "sigma must be 2x2")
    _require(bool(np.all(np.isfinite(sigma))), "sigma must be finite")
    _require(np.allclose(sigma, sigma.T), "sigma must be symmetric")
    w, v = np.linalg.eigh(sigma)
    tol = 1e-12 * max(1.0, float(np.abs(sigma).max()))
    _require(bool(w.min() >= -tol), "sigma must be positive semi-definite")
    root = v * np.sqrt(np.clip(w, 0.0, None))
    gen = as_generator(rng)
    n = 1 if size is None else size
    shape = (n,) if isinstance(n, (int, np.integer)) else tuple(n)
    z = gen.standard_normal(shape + (2,)) @ root.T
    return z[0] if size is None else z


def log_mean_exp(values, axis=None):
    """``log(mean(exp(values)))`` without overflow.

    Entries may be ``-inf``; all ``-inf`` input gives ``-inf``.
    """
    v = np.asarray(values, dtype=float)
    _require(v.size > 0, "log_mean_exp of an empty input")
    _require(not bool(np.any(np.isnan(v))), "log_mean_exp input contains NaN")
    _require(not bool(np.any(v == np.inf)), "log_mean_exp input contains +inf")
    m = np.max(v, axis=axis, keepdims=True)
    safe_m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.mean(np.exp(v - safe_m), axis=axis, keepdims=True)) + safe_m
    out = np.where(np.isfinite(m), out, -np.inf)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def excess_kurtosis(x) -> float:
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    return float(np.mean(d**4) / np.mean(d**2) ** 2 - 3.0)
