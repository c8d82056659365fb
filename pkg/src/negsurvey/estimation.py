"""Unbiased estimation of population proportions from a negative survey.

The observed selection frequencies ``lambda_hat = counts / n`` estimate
``lambda = P pi`` without bias, so ``pi_hat = P^{-1} lambda_hat`` is an
unbiased estimate of the category proportions.  Its covariance is estimated
by

    cov_hat = P^{-1} (diag(lambda_hat) - lambda_hat lambda_hat') P^{-T} / (n - 1)

Raw estimates may fall outside [0, 1]; ``project_to_simplex`` gives a
feasible (but biased) alternative on request.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .design import DesignMatrix, check_invertible
from .errors import (
    DimensionMismatchError,
    DistributionError,
    InsufficientSampleError,
    InvalidCategoryCountError,
    SingularDesignError,
    ValidationError,
)

DEFAULT_LEVEL = 0.95
DIST_TOL = 1e-9
SE_ROUNDING_TOL = 1e-12


@dataclass(frozen=True)
class ResponseTally:
    """Observed counts ``n_i`` of each option being selected."""

    counts: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.counts)
        if raw.ndim != 1 or raw.size == 0:
            raise ValidationError(f"counts must be a non-empty vector, got shape {raw.shape}")
        if raw.dtype.kind == "f":
            if not np.all(np.isfinite(raw)) or np.any(raw != np.round(raw)):
                raise ValidationError(f"counts must be integers, got {raw.tolist()}")
        elif raw.dtype.kind not in "iu":
            raise ValidationError(f"counts must be integers, got dtype {raw.dtype}")
        counts = raw.astype(np.int64)
        if np.any(counts < 0):
            raise ValidationError(f"counts must be non-negative, got {counts.tolist()}")
        if counts.sum() < 1:
            raise InsufficientSampleError("tally has no respondents")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def t(self) -> int:
        return self.counts.size

    @property
    def lambda_hat(self) -> np.ndarray:
        return self.counts / self.n


@dataclass(frozen=True)
class WaldInterval:
    raw: tuple[float, float]
    clipped: tuple[float, float]


@dataclass(frozen=True)
class ProportionEstimate:
    pi_hat: np.ndarray
    lambda_hat: np.ndarray
    n: int
    cov: Optional[np.ndarray] = None
    se: Optional[np.ndarray] = None
    level: float = DEFAULT_LEVEL
    intervals: Optional[list[WaldInterval]] = None
    # Simplex projection of pi_hat; biased, only filled when requested.
    projected_pi: Optional[np.ndarray] = None

    @property
    def t(self) -> int:
        return self.pi_hat.size

    @property
    def in_simplex(self) -> bool:
        return bool(np.all(self.pi_hat >= 0.0) and np.all(self.pi_hat <= 1.0))


def _as_tally(tally) -> ResponseTally:
    return tally if isinstance(tally, ResponseTally) else ResponseTally(np.asarray(tally))


def _check_dims(design: DesignMatrix, t: int, what: str) -> None:
    if design.t != t:
        raise DimensionMismatchError(f"{what} has {t} categories, design has t={design.t}")


def _factor(design: DesignMatrix):
    report = check_invertible(design)
    if report.singular:
        raise SingularDesignError(
            f"design matrix is singular: reciprocal condition estimate {report.rcond:.3e} "
            "is below 1e-12",
            rcond=report.rcond,
        )
    return linalg.lu_factor(design.p, check_finite=False)


def validate_distribution(pi, tol: float = DIST_TOL) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1:
        raise DistributionError(f"distribution must be a vector, got shape {pi.shape}")
    if not np.all(np.isfinite(pi)) or np.any(pi < 0):
        raise DistributionError(f"distribution has negative or non-finite entries: {pi.tolist()}")
    if abs(pi.sum() - 1.0) > tol:
        raise DistributionError(f"distribution sums to {pi.sum()!r}, expected 1")
    return pi


def forward_lambda(design: DesignMatrix, pi) -> np.ndarray:
    """Probability of each option being selected, ``lambda = P pi``."""
    pi = validate_distribution(pi)
    _check_dims(design, pi.size, "distribution")
    return design.p @ pi


def estimate_from_lambda(design: DesignMatrix, lam) -> np.ndarray:
    """Solve ``P pi = lam`` for ``pi``."""
    lam = np.asarray(lam, dtype=float)
    _check_dims(design, lam.size, "selection vector")
    return linalg.lu_solve(_factor(design), lam, check_finite=False)


def _covariance(lu, lam: np.ndarray, n: int) -> np.ndarray:
    middle = np.diag(lam) - np.outer(lam, lam)
    left = linalg.lu_solve(lu, middle, check_finite=False)  # P^{-1} M
    cov = linalg.lu_solve(lu, left.T, check_finite=False).T  # (P^{-1} M) P^{-T}
    cov /= n - 1
    return 0.5 * (cov + cov.T)


def covariance_hat(design: DesignMatrix, tally) -> np.ndarray:
    """Unbiased estimate of the covariance matrix of ``pi_hat``."""
    tally = _as_tally(tally)
    _check_dims(design, tally.t, "tally")
    if tally.n < 2:
        raise InsufficientSampleError(f"covariance needs n >= 2 respondents, got n={tally.n}")
    return _covariance(_factor(design), tally.lambda_hat, tally.n)


def _standard_errors(cov: np.ndarray) -> np.ndarray:
    d = np.diag(cov).copy()
    d[(d < 0) & (d >= -SE_ROUNDING_TOL)] = 0.0
    if np.any(d < 0):
        raise ValidationError(f"covariance has a negative variance: {d.tolist()}")
    return np.sqrt(d)


def _finish(pi_hat, lam, n, cov, level, project) -> ProportionEstimate:
    se = None if cov is None else _standard_errors(cov)
    est = ProportionEstimate(
        pi_hat=pi_hat,
        lambda_hat=lam,
        n=n,
        cov=cov,
        se=se,
        level=level,
        projected_pi=project_to_simplex(pi_hat) if project else None,
    )
    if cov is not None:
        est = replace(est, intervals=wald_intervals(est, level))
    return est


def estimate_pi(
    design: DesignMatrix, tally, level: float = DEFAULT_LEVEL, project: bool = False
) -> ProportionEstimate:
    """Estimate category proportions through the general matrix path.

    Covariance, standard errors and Wald intervals are filled in only when
    ``n >= 2``.

    Raises:
        SingularDesignError: ``design`` fails ``check_invertible``.
        DimensionMismatchError: tally length differs from ``design.t``.
    """
    tally = _as_tally(tally)
    _check_dims(design, tally.t, "tally")
    lu = _factor(design)
    lam = tally.lambda_hat
    pi_hat = linalg.lu_solve(lu, lam, check_finite=False)
    cov = _covariance(lu, lam, tally.n) if tally.n >= 2 else None
    return _finish(pi_hat, lam, tally.n, cov, level, project)


def estimate_pi_uniform(
    t: int, tally, level: float = DEFAULT_LEVEL, project: bool = False
) -> ProportionEstimate:
    """Closed-form estimates for the uniform design.

    ``pi_hat_i = 1 - (t-1) lambda_hat_i``, with variance
    ``(t-1)^2 lambda_hat_i (1 - lambda_hat_i) / (n-1)`` and covariance
    ``-(t-1)^2 lambda_hat_i lambda_hat_j / (n-1)``.
    """
    if int(t) != t or t < 2:
        raise InvalidCategoryCountError(f"need at least 2 categories, got t={t}")
    tally = _as_tally(tally)
    if tally.t != t:
        raise DimensionMismatchError(f"tally has {tally.t} categories, expected t={t}")
    lam = tally.lambda_hat
    pi_hat = 1.0 - (t - 1) * lam
    cov = None
    if tally.n >= 2:
        scale = (t - 1) ** 2 / (tally.n - 1)
        cov = -scale * np.outer(lam, lam)
        cov[np.diag_indices(t)] = scale * lam * (1.0 - lam)
    return _finish(pi_hat, lam, tally.n, cov, level, project)


def normal_quantile(level: float) -> float:
    """Two-sided standard normal critical value for a confidence level."""
    if not 0.0 < level < 1.0:
        raise ValidationError(f"confidence level must lie in (0, 1), got {level}")
    return NormalDist().inv_cdf(0.5 + level / 2.0)


def wald_intervals(estimate: ProportionEstimate, level: float = DEFAULT_LEVEL) -> list[WaldInterval]:
    """``pi_hat_i +/- z * se_i``, plus a copy clipped to [0, 1]."""
    if estimate.se is None:
        raise InsufficientSampleError("no covariance available (n < 2); cannot build intervals")
    z = normal_quantile(level)
    out = []
    for p, s in zip(estimate.pi_hat, estimate.se):
        lo, hi = float(p - z * s), float(p + z * s)
        out.append(WaldInterval(raw=(lo, hi), clipped=(min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0))))
    return out


def project_to_simplex(v: Sequence[float]) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-based threshold search: find the largest ``k`` such that the
    ``k`` biggest entries stay positive after subtracting a common shift.
    """
    v = np.asarray(v, dtype=float)
    if np.all(v >= 0) and abs(v.sum() - 1.0) <= DIST_TOL:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    k = ks[u - css / ks > 0][-1]
    shift = css[k - 1] / k
    return np.maximum(v - shift, 0.0)
