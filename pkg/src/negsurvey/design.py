"""Design matrices for negative surveys.

A design matrix ``P`` is ``t x t``; entry ``P[i, j]`` is the probability
that a respondent whose true category is ``j`` selects option ``i`` as the
category they do *not* belong to.  Rows are selected options, columns are
true categories.  Columns therefore sum to one and the diagonal is zero.

All indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DesignValidationError,
    InvalidCategoryCountError,
    SchemeDegenerateError,
)

COLUMN_SUM_TOL = 1e-9
DIAGONAL_SNAP_TOL = 1e-12
RCOND_THRESHOLD = 1e-12
TIE_SUM_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _check_category_count(t: int, minimum: int = 2) -> int:
    if int(t) != t:
        raise InvalidCategoryCountError(f"category count must be an integer, got {t!r}")
    t = int(t)
    if t < minimum:
        if minimum == 3:
            raise SchemeDegenerateError(
                f"the two-option scheme needs t >= 3 categories, got t={t}: "
                "with two categories every presented pair contains the false option"
            )
        raise InvalidCategoryCountError(f"need at least {minimum} categories, got t={t}")
    return t


@dataclass(frozen=True)
class DesignMatrix:
    """Validated, immutable column-stochastic matrix with zero diagonal."""

    p: np.ndarray
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        _validate_matrix(p)
        object.__setattr__(self, "p", _frozen(p))
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != p.shape[0]:
                raise DesignValidationError(
                    f"got {len(labels)} labels for t={p.shape[0]} categories"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def t(self) -> int:
        return self.p.shape[0]

    def column(self, j: int) -> np.ndarray:
        return self.p[:, j]

    def __eq__(self, other):
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.p, other.p)

    __hash__ = None


def _validate_matrix(p: np.ndarray) -> None:
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DesignValidationError(f"design matrix must be square, got shape {p.shape}")
    t = p.shape[0]
    if t < 2:
        raise InvalidCategoryCountError(f"need at least 2 categories, got t={t}")
    if not np.all(np.isfinite(p)):
        i, j = np.argwhere(~np.isfinite(p))[0]
        raise DesignValidationError(f"entry ({i}, {j}) is not finite", (int(i), int(j)))
    for i in range(t):
        if p[i, i] != 0.0:
            raise DesignValidationError(
                f"diagonal entry ({i}, {i}) = {p[i, i]!r} must be 0: "
                "a respondent never eliminates their own category",
                (i, i),
            )
    bad = np.argwhere((p < 0.0) | (p > 1.0))
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise DesignValidationError(f"entry ({i}, {j}) = {p[i, j]!r} outside [0, 1]", (i, j))
    sums = p.sum(axis=0)
    for j in range(t):
        if abs(sums[j] - 1.0) > COLUMN_SUM_TOL:
            raise DesignValidationError(
                f"column {j} sums to {sums[j]!r}, expected 1 within {COLUMN_SUM_TOL}", j
            )


@dataclass(frozen=True)
class TieBreakModel:
    """Choice model for a presented pair of two true options.

    ``q[i, k]`` is the probability of choosing option ``i`` when the pair
    ``{i, k}`` is presented and both are true.  The diagonal is unused and
    stored as zero.
    """

    q: np.ndarray
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise DesignValidationError(f"tie-break table must be square, got shape {q.shape}")
        t = q.shape[0]
        np.fill_diagonal(q, 0.0)
        if not np.all(np.isfinite(q)):
            i, k = np.argwhere(~np.isfinite(q))[0]
            raise DesignValidationError(f"tie entry ({i}, {k}) is not finite", (int(i), int(k)))
        bad = np.argwhere((q < 0.0) | (q > 1.0))
        if bad.size:
            i, k = (int(x) for x in bad[0])
            raise DesignValidationError(f"tie entry ({i}, {k}) = {q[i, k]!r} outside [0, 1]", (i, k))
        for i in range(t):
            for k in range(i + 1, t):
                if abs(q[i, k] + q[k, i] - 1.0) > TIE_SUM_TOL:
                    raise DesignValidationError(
                        f"tie entries ({i}, {k}) and ({k}, {i}) sum to "
                        f"{q[i, k] + q[k, i]!r}, expected 1",
                        (i, k),
                    )
        object.__setattr__(self, "q", _frozen(q))

    @property
    def t(self) -> int:
        return self.q.shape[0]

    @classmethod
    def uniform(cls, t: int) -> "TieBreakModel":
        """Fair coin: each of two true options is chosen with probability 1/2."""
        t = _check_category_count(t)
        q = np.full((t, t), 0.5)
        return cls(q, name="uniform")

    @classmethod
    def first_index(cls, t: int) -> "TieBreakModel":
        """Always pick the option with the smaller index."""
        t = _check_category_count(t)
        q = np.triu(np.ones((t, t)), k=1)
        return cls(q, name="first_index")

    @classmethod
    def custom(cls, table) -> "TieBreakModel":
        return cls(np.asarray(table, dtype=float), name="custom")


@dataclass(frozen=True)
class SelectionBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(f"invalid bounds [{self.lower}, {self.upper}]")

    def contains(self, x, tol: float = 1e-12) -> bool:
        return bool(np.all((x >= self.lower - tol) & (x <= self.upper + tol)))


@dataclass(frozen=True)
class InvertibilityReport:
    singular: bool
    rcond: float
    condition_number: float

    @property
    def well_conditioned(self) -> bool:
        return not self.singular


def uniform_design(t: int, labels: Optional[Sequence[str]] = None) -> DesignMatrix:
    """Every true option is eliminated with probability 1/(t-1)."""
    t = _check_category_count(t)
    p = np.full((t, t), 1.0 / (t - 1))
    np.fill_diagonal(p, 0.0)
    return DesignMatrix(p, None if labels is None else tuple(labels))


def two_option_design(
    t: int, tie: Optional[TieBreakModel] = None, labels: Optional[Sequence[str]] = None
) -> DesignMatrix:
    """Selection probabilities of the coin-driven two-option scheme.

    Each respondent is shown one of the t(t-1)/2 unordered pairs uniformly at
    random.  Option ``i`` (true for a respondent whose false category is
    ``j``) is picked either because it was paired with ``j`` or because it
    won the tie-break against another true option ``k``::

        P[i, j] = c + c * sum_{k != i, j} q[i, k],   c = 2 / (t (t - 1))

    The sum excludes ``k = i``; including it would push column sums above 1.
    """
    t = _check_category_count(t, minimum=3)
    if tie is None:
        tie = TieBreakModel.uniform(t)
    if tie.t != t:
        raise DesignValidationError(f"tie-break table is {tie.t}x{tie.t}, design has t={t}")
    c = 2.0 / (t * (t - 1))
    q = tie.q
    row_total = q.sum(axis=1)  # diagonal of q is 0
    p = np.empty((t, t))
    for j in range(t):
        p[:, j] = c + c * (row_total - q[:, j])
        p[j, j] = 0.0
    return DesignMatrix(p, None if labels is None else tuple(labels))


def custom_design(matrix, labels: Optional[Sequence[str]] = None) -> DesignMatrix:
    """Validate an arbitrary table as a design matrix.

    Diagonal entries within 1e-12 of zero are snapped to exactly zero so that
    tables round-tripped through text still load.

    Raises:
        DesignValidationError: non-square table, nonzero diagonal, entry
            outside [0, 1], or a column not summing to 1.  The message and
            ``position`` attribute locate the problem.
    """
    try:
        p = np.array(matrix, dtype=float)
    except ValueError as exc:
        raise DesignValidationError(f"design matrix is not a rectangular table: {exc}") from exc
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DesignValidationError(f"design matrix must be square, got shape {p.shape}")
    d = np.diag(p)
    near = np.abs(d) <= DIAGONAL_SNAP_TOL
    p[np.diag_indices_from(p)] = np.where(near, 0.0, d)
    return DesignMatrix(p, None if labels is None else tuple(labels))


def check_invertible(design: DesignMatrix) -> InvertibilityReport:
    """Decide whether P is numerically invertible.

    The reciprocal 2-norm condition number (smallest over largest singular
    value) is compared against ``RCOND_THRESHOLD``.
    """
    s = np.linalg.svd(design.p, compute_uv=False)
    rcond = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    cond = float("inf") if rcond == 0.0 else 1.0 / rcond
    return InvertibilityReport(singular=rcond < RCOND_THRESHOLD, rcond=rcond, condition_number=cond)


def two_option_selection_bounds(t: int) -> SelectionBounds:
    """Attainable range of an off-diagonal entry of ``two_option_design``.

    Obtained by setting every tie-break probability to 0 (lower) or 1 (upper):
    ``[2/(t(t-1)), 2/t]``.  Note that ``2(t-2)/(t(t-1))`` is *not* an upper
    bound: the first-index tie model at t=3 attains 2/3.
    """
    t = _check_category_count(t, minimum=3)
    return SelectionBounds(lower=2.0 / (t * (t - 1)), upper=2.0 / t)
