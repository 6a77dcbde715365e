"""Least squares, sign-pattern checks, and long-format export.

The interesting claim is a set of coefficient signs: total surprisal
should load positively on both component amplitudes, while each
amplitude, regressed on surprisal and the other amplitude, should take
surprisal positively and the rival amplitude negatively.  Plain OLS
with t statistics is enough to check signs; anything fancier (random
effects, REML) is left to external tooling fed by the long-format
export.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from surpdec.errors import JoinError, RankDeficient
from surpdec.experiment import ItemResult


@dataclass(frozen=True)
class RegressionResult:
    """OLS fit summary.

    `p_values` use a two-sided normal approximation to the t
    distribution; treat them as rough at small n.
    """

    names: tuple[str, ...]
    coefficients: tuple[float, ...]
    std_errors: tuple[float, ...]
    t_values: tuple[float, ...]
    p_values: tuple[float, ...]
    n: int
    r_squared: float

    def __post_init__(self):
        p = len(self.names)
        for attr in ("coefficients", "std_errors", "t_values", "p_values"):
            if len(getattr(self, attr)) != p:
                raise ValueError(f"{attr} length != {p}")
        if self.n <= p:
            raise ValueError(f"n={self.n} must exceed {p} predictors")


def ols_fit(y, X, names: Optional[Sequence[str]] = None) -> RegressionResult:
    """Least squares of y on the columns of X (intercept included by caller)."""
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"incompatible shapes y{y.shape} X{X.shape}")
    n, p = X.shape
    if n <= p:
        raise ValueError(f"need more rows than columns, got {n} x {p}")
    if names is None:
        names = tuple(f"x{i}" for i in range(p))
    names = tuple(names)
    if len(names) != p:
        raise ValueError(f"{len(names)} names for {p} columns")

    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < p:
        raise RankDeficient(f"design matrix rank {rank} < {p} columns")
    residuals = y - X @ beta
    rss = float(residuals @ residuals)
    sigma2 = rss / (n - p)
    cov = sigma2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))

    def t_of(coef: float, err: float) -> float:
        if err > 0:
            return coef / err
        return math.inf if coef > 0 else (-math.inf if coef < 0 else 0.0)

    t = [t_of(float(b), float(s)) for b, s in zip(beta, se)]
    pvals = [float(math.erfc(abs(tv) / math.sqrt(2.0))) for tv in t]
    tss = float(np.sum((y - y.mean()) ** 2))
    # a constant response is fit exactly by the intercept
    r2 = 1.0 if tss == 0 else 1.0 - rss / tss
    return RegressionResult(
        names=names,
        coefficients=tuple(float(b) for b in beta),
        std_errors=tuple(float(s) for s in se),
        t_values=tuple(t),
        p_values=tuple(pvals),
        n=n,
        r_squared=r2,
    )


@dataclass(frozen=True)
class SignCheck:
    """One regression of the pattern, with its two non-intercept signs."""

    response: str
    predictors: tuple[str, str]
    coefficients: tuple[float, float]
    t_values: tuple[float, float]
    expected_signs: tuple[int, int]
    matches: tuple[bool, bool]


@dataclass(frozen=True)
class SignReport:
    checks: tuple[SignCheck, ...]
    all_match: bool


def check_sign_predictions(n400, p600, surprisal) -> SignReport:
    """Fit the three cross-regressions and compare signs to the target pattern.

    surprisal ~ n400 + p600 expects (+, +); each amplitude regressed on
    surprisal and the other amplitude expects (+, -).
    """
    n400 = np.asarray(n400, dtype=np.float64)
    p600 = np.asarray(p600, dtype=np.float64)
    surprisal = np.asarray(surprisal, dtype=np.float64)
    if not (n400.shape == p600.shape == surprisal.shape) or n400.ndim != 1:
        raise ValueError("n400, p600, surprisal must be equal-length vectors")
    if n400.shape[0] < 10:
        raise ValueError(f"need at least 10 observations, got {n400.shape[0]}")

    series = {"n400": n400, "p600": p600, "surprisal": surprisal}
    plan = [
        ("surprisal", ("n400", "p600"), (1, 1)),
        ("n400", ("surprisal", "p600"), (1, -1)),
        ("p600", ("surprisal", "n400"), (1, -1)),
    ]
    ones = np.ones_like(n400)
    checks = []
    for response, predictors, expected in plan:
        X = np.column_stack([ones, series[predictors[0]], series[predictors[1]]])
        fit = ols_fit(series[response], X, names=("intercept", *predictors))
        coefs = fit.coefficients[1:]
        matches = tuple(
            (c > 0) if sign > 0 else (c < 0) for c, sign in zip(coefs, expected)
        )
        checks.append(
            SignCheck(
                response=response,
                predictors=predictors,
                coefficients=coefs,
                t_values=fit.t_values[1:],
                expected_signs=expected,
                matches=matches,
            )
        )
    return SignReport(
        checks=tuple(checks),
        all_match=all(all(c.matches) for c in checks),
    )


_MODEL_COLUMNS = ("shallow", "deep", "veridical", "lm_surprisal")
_AMP_COLUMNS = ("n400_amp", "p600_amp")


def _zscore(values: Sequence[float]) -> list[float]:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std())
    if std == 0.0:
        return [0.0] * len(values)
    mean = float(arr.mean())
    return [float((v - mean) / std) for v in arr]


def export_long_format(
    results: Sequence[ItemResult],
    erp_data: Optional[Sequence[Mapping]] = None,
) -> str:
    """CSV text, one row per item, or per (subject, item) when ERP rows join.

    Every numeric column is exported raw and z-scored (population
    standard deviation over the exported rows; constant columns z to 0).
    """
    by_id = {r.item_id: r for r in results}
    if erp_data is None:
        keyed = [((r.item_id,), r, None) for r in results]
        id_header = ["item_id"]
    else:
        missing = sorted({row["item_id"] for row in erp_data} - set(by_id))
        if missing:
            raise JoinError(f"erp rows reference unknown item ids: {', '.join(missing)}")
        keyed = [
            ((str(row["subject"]), row["item_id"]), by_id[row["item_id"]], row)
            for row in erp_data
        ]
        keyed.sort(key=lambda k: k[0])
        id_header = ["subject", "item_id"]

    columns = {
        name: [getattr(r.result, name) for _, r, _ in keyed] for name in _MODEL_COLUMNS
    }
    if erp_data is not None:
        for name in _AMP_COLUMNS:
            columns[name] = [float(row[name]) for _, _, row in keyed]
    names = list(columns)

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(id_header + ["condition"] + names + [f"z_{n}" for n in names])
    zscores = {name: _zscore(columns[name]) for name in names}
    for i, (key, result, _) in enumerate(keyed):
        row = list(key) + [result.condition]
        row += [repr(columns[name][i]) for name in names]
        row += [repr(zscores[name][i]) for name in names]
        writer.writerow(row)
    return out.getvalue()
