"""Skew-normal distribution: density, log-density, analytic moments, sampling.

The family is parameterized by location ``xi``, scale ``omega`` (> 0) and
shape ``lam``; ``lam = 0`` recovers the normal distribution and the sign of
``lam`` mirrors the density about the vertical axis.  All routines accept
scalars; the ``*_arr`` helpers broadcast over numpy arrays and are what the
mixture and posterior code build on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

_LOG2 = math.log(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class SkewNormalParams:
    """Parameter triple of one skew-normal component.

    Attributes
    ----------
    xi : float
        Location, in data units.
    omega : float
        Scale, in data units.  Strictly positive.  This is the scale itself,
        not its square; squared scales must be square-rooted on ingest.
    lam : float
        Shape (skewness direction/strength), dimensionless.
    """

    xi: float
    omega: float
    lam: float

    def __post_init__(self) -> None:
        for name in ("xi", "omega", "lam"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be > 0, got {self.omega!r}")

    @property
    def delta(self) -> float:
        """delta = lam / sqrt(1 + lam^2), always in (-1, 1)."""
        return self.lam / math.sqrt(1.0 + self.lam * self.lam)


def log_pdf_arr(y, xi, omega, lam):
    """Log skew-normal density, broadcasting over array arguments.

    Stable far into the tail: the Gaussian-CDF factor is evaluated through
    ``log_ndtr``, which switches to an asymptotic expansion for very negative
    arguments instead of underflowing to log(0).
    """
    y = np.asarray(y, dtype=float)
    u = (y - xi) / omega
    return _LOG2 - np.log(omega) - 0.5 * u * u - _HALF_LOG_2PI + log_ndtr(lam * u)


def pdf_arr(y, xi, omega, lam):
    """Skew-normal density (2/omega) * phi(u) * Phi(lam * u), u = (y - xi)/omega."""
    y = np.asarray(y, dtype=float)
    u = (y - xi) / omega
    phi = np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    return 2.0 / omega * phi * ndtr(lam * u)


def inverse_mills(x):
    """phi(x) / Phi(x), computed as exp(log phi - log Phi) to survive the tail.

    For x -> -inf the ratio grows like -x; the log-space form keeps full
    relative accuracy where the direct quotient would be 0/0.  May overflow
    to inf for absurd arguments (|x| ~ 1e154); callers treat non-finite
    gradients as divergent points.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(-0.5 * x * x - _HALF_LOG_2PI - log_ndtr(x))


def pdf(p: SkewNormalParams, y: float) -> float:
    """Density at a single point.  Raises ValueError on non-finite ``y``."""
    if not math.isfinite(y):
        raise ValueError(f"y must be finite, got {y!r}")
    return float(pdf_arr(y, p.xi, p.omega, p.lam))


def log_pdf(p: SkewNormalParams, y: float) -> float:
    """Log density at a single point; finite wherever ``y`` is finite."""
    if not math.isfinite(y):
        raise ValueError(f"y must be finite, got {y!r}")
    return float(log_pdf_arr(y, p.xi, p.omega, p.lam))


def moments(p: SkewNormalParams) -> tuple[float, float, float, float]:
    """Analytic (mean, variance, skewness, kurtosis).

    Kurtosis is the full fourth standardized moment (3 for the normal), not
    the excess.
    """
    d = p.delta
    lam2 = p.lam * p.lam
    mean = p.xi + _SQRT_2_OVER_PI * d * p.omega
    var = (1.0 - (2.0 / math.pi) * d * d) * p.omega ** 2
    denom = math.pi + (math.pi - 2.0) * lam2
    skew = math.sqrt(2.0) * (4.0 - math.pi) * p.lam ** 3 / denom ** 1.5
    kurt = 3.0 + 8.0 * (math.pi - 3.0) * lam2 * lam2 / denom ** 2
    return mean, var, skew, kurt


def sample(p: SkewNormalParams, rng: np.random.Generator, size=None):
    """Draw from the skew-normal via its two-normal stochastic representation.

    Y = xi + omega * (delta * |U0| + sqrt(1 - delta^2) * U1) with U0, U1
    independent standard normals.

    Returns a float when ``size`` is None, else an ndarray of that shape.
    """
    d = p.delta
    u0 = rng.standard_normal(size)
    u1 = rng.standard_normal(size)
    out = p.xi + p.omega * (d * np.abs(u0) + math.sqrt(1.0 - d * d) * u1)
    return float(out) if size is None else out
