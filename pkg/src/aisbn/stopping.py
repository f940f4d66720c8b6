"""Sample-size formulas for (eps_r, delta) relative approximation of a mean.

All scores are nonnegative and bounded by `b`. Every sample count is the
ceiling of its bound; the ``*_bound`` functions return the unrounded value.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

ZERO_ONE_LAMBDA = math.e - 2.0

# (delta, eps_r) -> delta_s; the published operating point.
PUBLISHED_DELTA_S = {(0.025, 0.025): 0.0223}


class StoppingRangeError(ValueError):
    pass


class DegenerateVarianceError(ValueError):
    pass


def _check_unit(name: str, x: float, closed_top: bool = False):
    ok = 0.0 < x <= 1.0 if closed_top else 0.0 < x < 1.0
    if not ok:
        raise StoppingRangeError(f"{name}={x!r} outside (0, 1{']' if closed_top else ')'}")


def alpha_prefactor(eps_r: float, delta_s: float) -> float:
    return math.log(2.0 / delta_s) / (eps_r * (1.0 - eps_r))


@dataclass(frozen=True)
class StoppingParams:
    eps_r: float
    delta: float
    delta_s: float

    def __post_init__(self):
        _check_unit("eps_r", self.eps_r)
        _check_unit("delta", self.delta)
        _check_unit("delta_s", self.delta_s, closed_top=True)

    @property
    def alpha(self) -> float:
        return alpha_prefactor(self.eps_r, self.delta_s)

    @classmethod
    def from_delta(cls, eps_r: float, delta: float,
                   table: Mapping[tuple[float, float], float] | None = None) -> StoppingParams:
        return cls(eps_r, delta, f_sigma_inv(delta, eps_r, table))


@dataclass(frozen=True)
class MomentEstimates:
    b: float
    mu: float
    sigma2: float


def _var_term(x: float) -> float:
    # (1 + 1/x) ln(1 + x) - 1 for x = b eps mu / sigma^2
    return (1.0 + 1.0 / x) * math.log1p(x) - 1.0


def mu_bound(b: float, mu: float, eps_r: float, delta: float) -> float:
    """Right-hand side of the variance-free bound, without range checks."""
    h = (1.0 + eps_r) * math.log1p(eps_r) - eps_r
    return (b / mu) / h * math.log(2.0 / delta)


def min_samples_mu(b: float, mu: float, eps_r: float, delta: float) -> int:
    """Samples sufficient when only the bound b and mean mu are known.

    Valid for 0 < eps_r < min(1, b/mu - 1).
    """
    if not (b > 0 and 0 < mu <= b):
        raise StoppingRangeError("need b > 0 and 0 < mu <= b")
    _check_unit("delta", delta)
    if not 0.0 < eps_r < min(1.0, b / mu - 1.0):
        raise StoppingRangeError("epsilon out of range for the variance-free bound")
    return math.ceil(mu_bound(b, mu, eps_r, delta))


def sigma_bound(b: float, mu: float, sigma2: float, eps_r: float, delta: float) -> float:
    x = b * eps_r * mu / sigma2
    return (b / mu) / (eps_r * _var_term(x)) * math.log(2.0 / delta)


def min_samples_sigma(b: float, mu: float, sigma2: float, eps_r: float, delta: float) -> int:
    """Samples sufficient when the variance sigma2 is also known."""
    _check_unit("eps_r", eps_r)
    _check_unit("delta", delta)
    if not (b > 0 and mu > 0):
        raise StoppingRangeError("need b > 0 and mu > 0")
    if sigma2 <= 0:
        raise DegenerateVarianceError("degenerate variance")
    return math.ceil(sigma_bound(b, mu, sigma2, eps_r, delta))


def staged_bound(alpha: float, eps_r: float, b: float, mu: float, sigma2: float) -> float:
    """alpha * b / [(mu + s2/(b eps)) ln(1 + b eps mu / s2) - mu]."""
    x = b * eps_r * mu / sigma2
    # algebraically identical to the printed form; factoring out mu keeps
    # the bracket well conditioned
    return alpha * (b / mu) / _var_term(x)


def staged_bound_array(alpha: float, eps_r: float, b, mu, sigma2):
    """Vectorized `staged_bound` for running estimates; NaN where b or mu is 0."""
    b, mu, sigma2 = (np.asarray(v, dtype=float) for v in (b, mu, sigma2))
    with np.errstate(divide="ignore", invalid="ignore"):
        x = b * eps_r * mu / sigma2
        term = (1.0 + 1.0 / x) * np.log1p(x) - 1.0
        return alpha * (b / mu) / term


def mu_bound_array(log_term: float, eps_r: float, b, mu):
    """Vectorized variance-free bound with a precomputed ln(2/delta)."""
    h = (1.0 + eps_r) * math.log1p(eps_r) - eps_r
    with np.errstate(divide="ignore", invalid="ignore"):
        return (np.asarray(b, dtype=float) / np.asarray(mu, dtype=float)) / h * log_term


def degenerate_sigma2(b: float, mu: float, eps_r: float) -> float:
    """Variance substituted when every observed score is equal."""
    return b * eps_r * mu


def required_samples(params: StoppingParams, est: MomentEstimates) -> tuple[int, bool]:
    """Estimated required sample count and whether the variance fallback fired."""
    if est.b <= 0:
        raise StoppingRangeError("no positive score observed")
    if est.mu <= 0:
        raise StoppingRangeError("need mu > 0")
    degenerate = est.sigma2 <= 0
    sigma2 = degenerate_sigma2(est.b, est.mu, params.eps_r) if degenerate else est.sigma2
    return math.ceil(staged_bound(params.alpha, params.eps_r, est.b, est.mu, sigma2)), degenerate


required_samples_fig1 = required_samples


def zero_one_bound(mu: float, sigma2: float, eps_r: float, delta: float) -> float:
    rho = max(sigma2, eps_r * mu)
    return 4.0 * ZERO_ONE_LAMBDA * rho / (mu * mu * eps_r * eps_r) * math.log(2.0 / delta)


def min_samples_zero_one(mu: float, sigma2: float, eps_r: float, delta: float) -> int:
    """Generalized zero-one estimator sample size; scores presumed in [0, 1]."""
    if mu <= 0:
        raise StoppingRangeError("need mu > 0")
    _check_unit("eps_r", eps_r)
    _check_unit("delta", delta)
    return math.ceil(zero_one_bound(mu, sigma2, eps_r, delta))


def variance_estimate(sum_z: float, sum_z2: float, n: int) -> float:
    """Unbiased sample variance from running sums, clamped at zero."""
    if n < 2:
        raise ValueError("variance needs at least two samples")
    mean = sum_z / n
    return max(0.0, (sum_z2 - n * mean * mean) / (n - 1))


class PosteriorBound(NamedTuple):
    lower: float
    upper: float
    confidence: float | None


def posterior_error_bounds(eps_r: float, delta: float | None = None) -> PosteriorBound:
    """Relative-error interval of a ratio of two (eps_r, delta) estimates.

    Holds with confidence at least 1 - 2*delta.
    """
    _check_unit("eps_r", eps_r)
    conf = None if delta is None else 1.0 - 2.0 * delta
    return PosteriorBound(-2.0 * eps_r / (1.0 + eps_r), 2.0 * eps_r / (1.0 - eps_r), conf)


def f_sigma_inv(delta: float, eps_r: float,
                table: Mapping[tuple[float, float], float] | None = None) -> float:
    """delta_s for a target failure probability; identity unless tabulated.

    `table` maps (delta, eps_r) to delta_s. Lookups match within 1e-12.
    """
    _check_unit("delta", delta)
    delta_s = delta
    for (d, e), ds in (table or {}).items():
        if math.isclose(d, delta, rel_tol=1e-12) and math.isclose(e, eps_r, rel_tol=1e-12):
            delta_s = ds
            break
    if eps_r <= 0.01 and abs(delta_s - delta) > 0.05 * delta:
        warnings.warn(
            f"delta_s={delta_s} differs from delta={delta} by more than 5% at eps_r={eps_r}",
            stacklevel=2,
        )
    return delta_s
