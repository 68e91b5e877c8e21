"""Discrete power-law fitting for degree sequences.

The exponent is the discrete maximum-likelihood estimate on the tail
``x >= x_min``; ``x_min`` is the candidate minimising the Kolmogorov-Smirnov
distance between the empirical and fitted tail CDFs. The fit is compared to a
discrete exponential on the same tail with a normalized log-likelihood ratio
and its two-sided normal p-value (Vuong's test).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfc, zeta

ALPHA_BOUNDS = (1.0 + 1e-6, 20.0)
_DENSE_KS_LIMIT = 200_000


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    sigma_alpha: float
    x_min: int
    loglik_ratio_R: float
    p_value: float
    n_tail: int
    ks_distance: float
    exp_rate: float

    def as_dict(self) -> dict:
        return asdict(self)


def _alpha_mle(tail: np.ndarray, x_min: int) -> float:
    n = tail.size
    sum_log = np.log(tail).sum()

    def nll(a):
        return n * np.log(zeta(a, x_min)) + a * sum_log

    res = minimize_scalar(nll, bounds=ALPHA_BOUNDS, method="bounded", options={"xatol": 1e-10})
    return float(res.x)


def _ks(tail: np.ndarray, x_min: int, alpha: float) -> float:
    x_max = int(tail.max())
    if x_max - x_min <= _DENSE_KS_LIMIT:
        grid = np.arange(x_min, x_max + 1)
    else:
        grid = np.unique(tail)
    emp = np.searchsorted(np.sort(tail), grid, side="right") / tail.size
    model = 1.0 - zeta(alpha, grid + 1) / zeta(alpha, x_min)
    return float(np.max(np.abs(emp - model)))


def _compare_exponential(tail: np.ndarray, x_min: int, alpha: float) -> tuple[float, float, float]:
    excess = tail - x_min
    lam = np.log1p(1.0 / excess.mean())
    ll_pl = -alpha * np.log(tail) - np.log(zeta(alpha, x_min))
    ll_exp = np.log(-np.expm1(-lam)) - lam * excess
    diff = ll_pl - ll_exp
    sd = diff.std()
    if sd == 0:
        return 0.0, 1.0, float(lam)
    R = diff.sum() / (sd * np.sqrt(diff.size))
    return float(R), float(erfc(abs(R) / np.sqrt(2))), float(lam)


def fit_power_law(degrees: Iterable[int], x_min: int | None = None, min_tail: int = 10) -> PowerLawFit:
    """Fit ``P(k) ~ k**-alpha`` to positive integer observations.

    Pass ``x_min`` to skip the cutoff search.
    """
    x = np.asarray(list(degrees), dtype=float)
    if x.size < 50:
        raise FitError(f"need at least 50 observations, got {x.size}")
    if np.any(x < 1) or np.any(x != np.round(x)):
        raise FitError("observations must be positive integers")
    values = np.unique(x)
    if values.size < 2:
        raise FitError("all observations are equal; the exponent diverges")

    if x_min is not None:
        candidates = [int(x_min)]
    else:
        candidates = []
        for v in values[:-1]:
            tail = x[x >= v]
            if tail.size < min_tail:
                break
            candidates.append(int(v))
        if not candidates:
            candidates = [int(values[0])]

    best = None
    for xm in candidates:
        tail = x[x >= xm]
        if np.unique(tail).size < 2:
            continue
        a = _alpha_mle(tail, xm)
        d = _ks(tail, xm, a)
        if best is None or d < best[0]:
            best = (d, xm, a, tail)
    if best is None:
        raise FitError("no usable x_min candidate")
    d, xm, a, tail = best
    R, p, lam = _compare_exponential(tail, xm, a)
    return PowerLawFit(
        alpha=a,
        sigma_alpha=float((a - 1.0) / np.sqrt(tail.size)),
        x_min=xm,
        loglik_ratio_R=R,
        p_value=p,
        n_tail=int(tail.size),
        ks_distance=d,
        exp_rate=lam,
    )


def ccdf_table(degrees: Iterable[int], fit: PowerLawFit) -> list[tuple[int, float, float]]:
    """Rows of ``(degree, empirical P(X>=k), fitted P(X>=k))`` over the observed degrees.

    The fitted column is scaled by the tail fraction and is NaN below ``x_min``.
    """
    x = np.sort(np.asarray(list(degrees), dtype=float))
    n = x.size
    frac = fit.n_tail / n
    rows = []
    norm = zeta(fit.alpha, fit.x_min)
    for k in np.unique(x):
        emp = (n - np.searchsorted(x, k, side="left")) / n
        fitted = frac * zeta(fit.alpha, k) / norm if k >= fit.x_min else float("nan")
        rows.append((int(k), float(emp), float(fitted)))
    return rows
