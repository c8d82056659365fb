"""Information surrendered by a single questionnaire, in bits.

A positive (direct response) questionnaire reveals the respondent's category
and so yields the full entropy of the prior.  A negative questionnaire only
rules out category ``s``; the information gained is the drop in entropy from
the prior to the prior conditioned on ``X_s`` being false.

The per-``s`` gain never exceeds the positive information, but it is not
always non-negative: eliminating a very likely category can leave the
remaining options *more* uncertain than before (e.g. ``p = (0.9, 0.05,
0.05)``, ``s = 0`` gives about -0.43 bits).  Under the uniform design the
gain averaged over the selected option is a mutual information, hence
non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import DesignMatrix
from .errors import DimensionMismatchError, ImpossibleConditioningError
from .estimation import forward_lambda, validate_distribution


def _prior(p) -> np.ndarray:
    return validate_distribution(p)


def entropy_bits(p) -> float:
    """Shannon entropy in bits with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def positive_info(prior) -> float:
    return entropy_bits(_prior(prior))


def conditional_prior(prior, s: int) -> np.ndarray:
    """Distribution of the true category once ``s`` is known to be false.

    Returns the ``t-1`` remaining probabilities (``s`` removed) renormalised
    by their own sum, which equals ``1 - p_s`` but keeps the result summing
    to one exactly up to rounding.
    """
    p = _prior(prior)
    if not 0 <= s < p.size:
        raise IndexError(f"category index {s} out of range for t={p.size}")
    rest = np.delete(p, s)
    total = rest.sum()
    if p[s] >= 1.0 or total <= 0.0:
        raise ImpossibleConditioningError(
            f"category {s} has probability 1; it cannot be eliminated"
        )
    return rest / total


def negative_info(prior, s: int) -> float:
    """Entropy of the prior minus entropy after eliminating ``s``."""
    p = _prior(prior)
    return entropy_bits(p) - entropy_bits(conditional_prior(p, s))


@dataclass(frozen=True)
class PrivacyReport:
    positive_bits: float
    # None where the category is certain (p_s = 1) and cannot be eliminated
    negative_bits_by_s: list[Optional[float]]
    expected_negative_bits: Optional[float] = None
    unit: str = "bits"


def privacy_report(
    prior, design: Optional[DesignMatrix] = None, pi=None
) -> PrivacyReport:
    """Collect positive and per-option negative information.

    With a design and population, also report the average gain weighted by
    how often each option is actually selected, ``lambda = P pi``.  That
    average is an extension beyond the per-option quantity.
    """
    p = _prior(prior)
    per_s: list[Optional[float]] = []
    for s in range(p.size):
        try:
            per_s.append(negative_info(p, s))
        except ImpossibleConditioningError:
            per_s.append(None)

    expected = None
    if design is not None:
        if pi is None:
            raise ValueError("a population distribution is required with a design")
        if design.t != p.size:
            raise DimensionMismatchError(f"prior has {p.size} categories, design has t={design.t}")
        lam = forward_lambda(design, pi)
        expected = float(sum(l * g for l, g in zip(lam, per_s) if l > 0 and g is not None))
    return PrivacyReport(entropy_bits(p), per_s, expected)
