"""File formats.

* Design JSON: ``{"t", "labels"?, "orientation", "matrix"}`` with
  ``matrix[i][j]`` the probability of selecting option ``i`` given true
  category ``j`` (rows = selected option, columns = true category).
* Tally CSV: header ``category,count``, one row per category in design order.
* Estimate, privacy report and experiment summary JSON.

Floats are written with Python's shortest round-trip repr (up to 17
significant digits), so a file re-read gives back the same doubles.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .design import DesignMatrix, TieBreakModel, custom_design
from .errors import DistributionError, ValidationError
from .estimation import ProportionEstimate, ResponseTally
from .privacy import PrivacyReport
from .simulation import DEFAULT_SEED, ExperimentSummary, RespondentTrace

ORIENTATION = "rows=selected option i, columns=true category j"
SHELL_DIST_TOL = 1e-6


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def category_names(t: int, labels=None) -> list[str]:
    return list(labels) if labels else [str(i + 1) for i in range(t)]


# -- design ------------------------------------------------------------------


def design_to_dict(design: DesignMatrix) -> dict:
    d = {"t": design.t}
    if design.labels is not None:
        d["labels"] = list(design.labels)
    d["orientation"] = ORIENTATION
    d["matrix"] = _floats(design.p)
    return d


def design_from_dict(d: dict) -> DesignMatrix:
    if "matrix" not in d:
        raise ValidationError("design JSON has no 'matrix' field")
    design = custom_design(d["matrix"], d.get("labels"))
    if "t" in d and int(d["t"]) != design.t:
        raise ValidationError(f"design JSON declares t={d['t']} but matrix is {design.t}x{design.t}")
    return design


def load_design(path) -> DesignMatrix:
    return design_from_dict(json.loads(Path(path).read_text()))


# -- tallies -----------------------------------------------------------------


def tally_to_csv(tally: ResponseTally, labels=None) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["category", "count"])
    for name, c in zip(category_names(tally.t, labels), tally.counts):
        w.writerow([name, int(c)])
    return buf.getvalue()


def tally_from_csv(text: str, design: Optional[DesignMatrix] = None) -> ResponseTally:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["category", "count"]:
        raise ValidationError("tally CSV must start with the header 'category,count'")
    body = [r for r in rows[1:] if r]
    names, counts = [], []
    for k, r in enumerate(body, start=2):
        if len(r) != 2:
            raise ValidationError(f"tally CSV line {k}: expected 2 fields, got {len(r)}")
        try:
            counts.append(int(r[1]))
        except ValueError as exc:
            raise ValidationError(f"tally CSV line {k}: count {r[1]!r} is not an integer") from exc
        names.append(r[0].strip())
    if design is not None:
        if len(counts) != design.t:
            raise ValidationError(f"tally has {len(counts)} rows, design has t={design.t}")
        expected = category_names(design.t, design.labels)
        if names != expected:
            raise ValidationError(f"tally categories {names} do not match design order {expected}")
    return ResponseTally(np.array(counts, dtype=np.int64))


# -- distributions -----------------------------------------------------------


def parse_distribution(text: str) -> np.ndarray:
    """Comma-separated probabilities summing to 1 within 1e-6, renormalised."""
    try:
        p = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise DistributionError(f"cannot parse distribution {text!r}") from exc
    if p.size == 0 or np.any(~np.isfinite(p)) or np.any(p < 0):
        raise DistributionError(f"invalid distribution {text!r}")
    if abs(p.sum() - 1.0) > SHELL_DIST_TOL:
        raise DistributionError(f"distribution {text!r} sums to {p.sum()!r}, expected 1")
    return p / p.sum()


# -- reports -----------------------------------------------------------------


def estimate_to_dict(est: ProportionEstimate) -> dict:
    d = {
        "pi_hat": _floats(est.pi_hat),
        "lambda_hat": _floats(est.lambda_hat),
        "cov": None if est.cov is None else _floats(est.cov),
        "se": None if est.se is None else _floats(est.se),
        "intervals": None
        if est.intervals is None
        else [{"raw": list(iv.raw), "clipped": list(iv.clipped)} for iv in est.intervals],
        "level": est.level,
        "n": est.n,
    }
    if est.projected_pi is not None:
        d["projected_pi"] = _floats(est.projected_pi)
        d["projected_pi_note"] = "Euclidean simplex projection of pi_hat; biased"
    if not est.in_simplex:
        d["warnings"] = ["pi_hat lies outside [0, 1]; raw unbiased values are reported as-is"]
    return d


def privacy_report_to_dict(report: PrivacyReport) -> dict:
    d = {"unit": report.unit, "positive": report.positive_bits, "per_s": report.negative_bits_by_s}
    if report.expected_negative_bits is not None:
        d["expected"] = report.expected_negative_bits
    return d


def summary_to_dict(s: ExperimentSummary) -> dict:
    return {
        "scheme": s.scheme,
        "pi": _floats(s.pi),
        "n": s.n,
        "replicates": s.replicates,
        "seed": s.seed,
        "level": s.level,
        "categories": [
            {
                "mean_pi_hat": float(s.mean_pi_hat[i]),
                "var_pi_hat": float(s.var_pi_hat[i]),
                "se_of_mean": float(s.se_of_mean[i]),
                "mean_var_hat": float(s.mean_var_hat[i]),
                "coverage": float(s.coverage[i]),
            }
            for i in range(s.pi.size)
        ],
    }


def traces_to_csv(traces: list[RespondentTrace], t: int, labels=None) -> str:
    """One row per respondent; categories named as in the tally CSV."""
    names = category_names(t, labels)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["respondent", "true_category", "presented_first", "presented_second", "coin", "chosen"])
    for k, tr in enumerate(traces, start=1):
        a, b = (names[x] for x in tr.presented) if tr.presented is not None else ("", "")
        w.writerow([k, names[tr.true_category], a, b, tr.coin, names[tr.chosen]])
    return buf.getvalue()


# -- experiment config -------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    pi: np.ndarray
    scheme: str
    t: int
    n: int
    replicates: int
    seed: int = DEFAULT_SEED
    tie: Optional[TieBreakModel] = None


def parse_tie(value, t: int) -> TieBreakModel:
    if value is None or value == "uniform":
        return TieBreakModel.uniform(t)
    if value in ("first_index", "first-index"):
        return TieBreakModel.first_index(t)
    if isinstance(value, dict) and "table" in value:
        return TieBreakModel.custom(value["table"])
    raise ValidationError(f"unknown tie model {value!r}")


def experiment_config_from_dict(d: dict) -> ExperimentConfig:
    missing = [k for k in ("pi", "scheme", "n", "replicates") if k not in d]
    if missing:
        raise ValidationError(f"experiment config missing fields: {missing}")
    pi = np.asarray(d["pi"], dtype=float)
    if abs(pi.sum() - 1.0) > SHELL_DIST_TOL or np.any(pi < 0):
        raise DistributionError(f"config pi {d['pi']} is not a distribution")
    pi = pi / pi.sum()
    t = int(d.get("t", pi.size))
    if t != pi.size:
        raise ValidationError(f"config t={t} but pi has {pi.size} entries")
    scheme = str(d["scheme"]).replace("-", "_")
    if scheme not in ("uniform", "die", "two_option"):
        raise ValidationError(f"unknown scheme {d['scheme']!r}")
    seed = int(d.get("seed", DEFAULT_SEED))
    if not 0 <= seed < 2**64:
        raise ValidationError(f"seed {seed} is not an unsigned 64-bit value")
    tie = parse_tie(d.get("tie"), t) if scheme == "two_option" else None
    return ExperimentConfig(pi, scheme, t, int(d["n"]), int(d["replicates"]), seed, tie)
