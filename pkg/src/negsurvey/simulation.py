"""Synthetic negative-survey data.

Respondents are drawn with replacement from a ground-truth distribution and
then eliminate one category they do not belong to, following one of three
procedures:

``design``
    draw the eliminated option from the design-matrix column of the true
    category;
``die``
    roll a fair (t-1)-sided die and take the m-th true option from the top;
``two_option``
    present a random pair of categories; pick the true one, or break the tie
    with a coin when both are true.

Each replicate owns an independent random stream derived from
``(seed, stream)`` so results never depend on execution order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import lu_solve

from .design import DesignMatrix, TieBreakModel, two_option_design, uniform_design
from .errors import SchemeDegenerateError, ValidationError
from .estimation import (
    DEFAULT_LEVEL,
    ResponseTally,
    _covariance,
    _factor,
    normal_quantile,
    validate_distribution,
)

DEFAULT_SEED = 20240601
SCHEMES = ("design", "die", "two_option")


class RandomSource:
    """Seeded, counter-based random stream.

    ``RandomSource(seed, stream)`` always yields the same draws; different
    ``stream`` values give independent sequences (Philox keyed by a
    ``SeedSequence`` spawned from the seed).
    """

    def __init__(self, seed: int = DEFAULT_SEED, stream: int = 0):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative")
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream={self.stream})"


@dataclass(frozen=True)
class PopulationDistribution:
    pi: np.ndarray
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        pi = validate_distribution(self.pi).copy()
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)

    @property
    def t(self) -> int:
        return self.pi.size


@dataclass(frozen=True)
class RespondentTrace:
    true_category: int
    chosen: int
    presented: Optional[tuple[int, int]] = None
    coin: str = "unused"

    def __post_init__(self):
        if self.chosen == self.true_category:
            raise AssertionError(f"respondent selected their own category {self.chosen}")
        if self.presented is not None and self.chosen not in self.presented:
            raise AssertionError(f"chosen {self.chosen} was not presented {self.presented}")


@dataclass(frozen=True)
class Scheme:
    """How respondents pick the option they eliminate."""

    kind: str
    t: int
    # aggregate selection probabilities; always set by the constructors
    design: Optional[DesignMatrix] = None
    tie: Optional[TieBreakModel] = None

    @classmethod
    def from_design(cls, design: DesignMatrix) -> "Scheme":
        return cls("design", design.t, design=design)

    @classmethod
    def die(cls, t: int) -> "Scheme":
        return cls("die", t, design=uniform_design(t))

    @classmethod
    def two_option(cls, t: int, tie: Optional[TieBreakModel] = None) -> "Scheme":
        tie = tie or TieBreakModel.uniform(t)
        return cls("two_option", t, design=two_option_design(t, tie), tie=tie)

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.kind!r}; expected one of {SCHEMES}")


def _gen(rng) -> np.random.Generator:
    return rng.gen if isinstance(rng, RandomSource) else rng


# -- single respondents -------------------------------------------------------


def sample_true_category(pop: PopulationDistribution, rng: RandomSource) -> int:
    return int(_gen(rng).choice(pop.t, p=pop.pi))


def answer_general(true_cat: int, design: DesignMatrix, rng: RandomSource) -> int:
    """Eliminate option ``i`` with probability ``P[i, true_cat]``."""
    return int(_gen(rng).choice(design.t, p=design.column(true_cat)))


def _mth_true_option(true_cat, m):
    # m is 1-based among true options; skip the false category
    idx = m - 1
    return idx + (idx >= true_cat)


def answer_die_procedure(true_cat: int, t: int, rng: RandomSource) -> int:
    """Roll m uniform on 1..t-1 and return the m-th true option from the top."""
    if t < 2:
        raise ValidationError(f"need t >= 2, got {t}")
    m = int(_gen(rng).integers(1, t))
    return int(_mth_true_option(true_cat, m))


def answer_two_option(
    true_cat: int, t: int, tie: TieBreakModel, rng: RandomSource
) -> RespondentTrace:
    """Present a random pair and resolve it.

    The pair is uniform over unordered pairs and its display order is random.
    When both options are true the first displayed one is taken with
    probability ``q[first, second]``; the fair coin case is the uniform tie
    model, with heads meaning "first displayed".
    """
    if t < 3:
        raise SchemeDegenerateError(f"the two-option scheme needs t >= 3, got t={t}")
    g = _gen(rng)
    a = int(g.integers(t))
    b = int(g.integers(t - 1))
    b += b >= a
    if a == true_cat:
        return RespondentTrace(true_cat, b, (a, b))
    if b == true_cat:
        return RespondentTrace(true_cat, a, (a, b))
    heads = g.random() < tie.q[a, b]
    return RespondentTrace(true_cat, a if heads else b, (a, b), "heads" if heads else "tails")


# -- vectorised batches --------------------------------------------------------


def sample_true_categories(pop: PopulationDistribution, n: int, rng) -> np.ndarray:
    return _gen(rng).choice(pop.t, size=n, p=pop.pi)


def answer_general_many(true_cats: np.ndarray, design: DesignMatrix, rng) -> np.ndarray:
    """Inverse-CDF sampling of each respondent's column."""
    true_cats = np.asarray(true_cats)
    cdf = np.cumsum(design.p, axis=0)
    cdf[-1, :] = 1.0
    u = _gen(rng).random(true_cats.size)
    cols = cdf[:, true_cats]  # t x n
    chosen = (u[None, :] >= cols).sum(axis=0)
    return np.minimum(chosen, design.t - 1)


def answer_die_many(true_cats: np.ndarray, t: int, rng) -> np.ndarray:
    true_cats = np.asarray(true_cats)
    m = _gen(rng).integers(1, t, size=true_cats.size)
    return _mth_true_option(true_cats, m)


def answer_two_option_many(true_cats: np.ndarray, t: int, tie: TieBreakModel, rng):
    """Vectorised ``answer_two_option``.

    Returns ``(chosen, first, second, coin)`` where ``coin`` is 1 for heads,
    0 for tails and -1 when the coin was not needed.
    """
    if t < 3:
        raise SchemeDegenerateError(f"the two-option scheme needs t >= 3, got t={t}")
    true_cats = np.asarray(true_cats)
    g = _gen(rng)
    n = true_cats.size
    a = g.integers(t, size=n)
    b = g.integers(t - 1, size=n)
    b = b + (b >= a)
    u = g.random(n)
    heads = u < tie.q[a, b]
    chosen = np.where(heads, a, b)
    coin = heads.astype(np.int8)
    a_false = a == true_cats
    b_false = b == true_cats
    chosen = np.where(a_false, b, np.where(b_false, a, chosen))
    coin[a_false | b_false] = -1
    return chosen, a, b, coin


# -- surveys -------------------------------------------------------------------


@dataclass
class SurveyResult:
    tally: ResponseTally
    traces: Optional[list[RespondentTrace]] = None


def run_survey(
    pop: PopulationDistribution,
    scheme: Scheme,
    n: int,
    rng: RandomSource,
    trace: bool = False,
) -> SurveyResult:
    """Administer one negative survey to ``n`` respondents.

    Trace records are only built when ``trace=True``; every record is checked
    against the rule that nobody eliminates their own category.
    """
    if n < 1:
        raise ValidationError(f"need n >= 1 respondents, got {n}")
    if pop.t != scheme.t:
        raise ValidationError(f"population has {pop.t} categories, scheme has t={scheme.t}")
    true_cats = sample_true_categories(pop, n, rng)
    first = second = coin = None
    if scheme.kind == "design":
        chosen = answer_general_many(true_cats, scheme.design, rng)
    elif scheme.kind == "die":
        chosen = answer_die_many(true_cats, scheme.t, rng)
    else:
        chosen, first, second, coin = answer_two_option_many(true_cats, scheme.t, scheme.tie, rng)
    if np.any(chosen == true_cats):
        raise AssertionError("a simulated respondent eliminated their own category")
    tally = ResponseTally(np.bincount(chosen, minlength=scheme.t))
    traces = None
    if trace:
        coin_names = {1: "heads", 0: "tails", -1: "unused"}
        traces = []
        for k in range(n):
            traces.append(
                RespondentTrace(
                    true_category=int(true_cats[k]),
                    chosen=int(chosen[k]),
                    presented=None if first is None else (int(first[k]), int(second[k])),
                    coin="unused" if coin is None else coin_names[int(coin[k])],
                )
            )
    return SurveyResult(tally, traces)


@dataclass
class ExperimentSummary:
    pi: np.ndarray
    n: int
    replicates: int
    seed: int
    scheme: str
    level: float
    mean_pi_hat: np.ndarray
    var_pi_hat: np.ndarray
    se_of_mean: np.ndarray
    mean_var_hat: np.ndarray
    coverage: np.ndarray
    pi_hats: np.ndarray = field(repr=False)
    var_hats: np.ndarray = field(repr=False)


def _replicate(pop, scheme, n, seed, stream, lu, z):
    tally = run_survey(pop, scheme, n, RandomSource(seed, stream)).tally
    lam = tally.lambda_hat
    pi_hat = lu_solve(lu, lam, check_finite=False)
    var_hat = np.diag(_covariance(lu, lam, n)).copy()
    var_hat[(var_hat < 0) & (var_hat > -1e-12)] = 0.0
    half = z * np.sqrt(np.maximum(var_hat, 0.0))
    covered = (pi_hat - half <= pop.pi) & (pop.pi <= pi_hat + half)
    return pi_hat, var_hat, covered


def monte_carlo(
    pop: PopulationDistribution,
    scheme: Scheme,
    n: int,
    replicates: int,
    seed: int = DEFAULT_SEED,
    level: float = DEFAULT_LEVEL,
    workers: int = 1,
) -> ExperimentSummary:
    """Repeat a survey ``replicates`` times and summarise the estimator.

    Replicate ``r`` uses stream ``r`` of ``seed``, so the result is identical
    for any ``workers`` count.
    """
    if replicates < 2:
        raise ValidationError(f"need at least 2 replicates, got {replicates}")
    if n < 2:
        raise ValidationError(f"need n >= 2 respondents per replicate, got {n}")
    lu = _factor(scheme.design)
    z = normal_quantile(level)

    def job(r):
        return _replicate(pop, scheme, n, seed, r, lu, z)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(job, range(replicates)))
    else:
        results = [job(r) for r in range(replicates)]

    pi_hats = np.array([r[0] for r in results])
    var_hats = np.array([r[1] for r in results])
    covered = np.array([r[2] for r in results])
    var_emp = pi_hats.var(axis=0, ddof=1)
    return ExperimentSummary(
        pi=pop.pi,
        n=n,
        replicates=replicates,
        seed=seed,
        scheme=scheme.kind,
        level=level,
        mean_pi_hat=pi_hats.mean(axis=0),
        var_pi_hat=var_emp,
        se_of_mean=np.sqrt(var_emp / replicates),
        mean_var_hat=var_hats.mean(axis=0),
        coverage=covered.mean(axis=0),
        pi_hats=pi_hats,
        var_hats=var_hats,
    )


def make_scheme(kind: str, t: int, tie: Optional[TieBreakModel] = None,
                design: Optional[DesignMatrix] = None) -> Scheme:
    kind = kind.replace("-", "_")
    if kind in ("design", "uniform"):
        return Scheme.from_design(design if design is not None else uniform_design(t))
    if kind == "die":
        return Scheme.die(t)
    if kind == "two_option":
        return Scheme.two_option(t, tie)
    raise ValidationError(f"unknown scheme {kind!r}")
