"""Paired statistical tests used by the experiment analysis.

The paired t-test gets its two-sided p-value from the regularized incomplete
beta function; the McNemar test uses the continuity-corrected chi-square with
the upper tail written via erfc, which reproduces the classic printed values
for small discordant counts exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc


@dataclass(frozen=True)
class StatResult:
    statistic: float
    df: float
    p_value: float
    test: str
    degenerate: bool = False


def student_t_sf(t: float, df: float) -> float:
    """Upper-tail probability P(T_df > t) of the Student t distribution."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    half = 0.5 * float(betainc(df / 2.0, 0.5, x))
    return half if t >= 0 else 1.0 - half


def paired_t(x, y) -> StatResult:
    """Two-sided paired t-test of x against y (aligned by participant)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two pairs")
    d = x - y
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return StatResult(0.0, df, 1.0, "paired-t")
        # All differences identical and nonzero: t diverges.
        return StatResult(math.copysign(math.inf, mean), df, 0.0, "paired-t", degenerate=True)
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * student_t_sf(abs(t), df)
    return StatResult(t, df, min(1.0, p), "paired-t")


def mcnemar(b: int, c: int) -> StatResult:
    """Continuity-corrected McNemar test on discordant pair counts b and c."""
    if b < 0 or c < 0:
        raise ValueError("counts must be non-negative")
    if b + c == 0:
        raise ValueError("test undefined with no discordant pairs")
    chi2 = max(abs(b - c) - 1, 0) ** 2 / (b + c)
    p = math.erfc(math.sqrt(chi2 / 2.0))
    return StatResult(chi2, 1.0, p, "mcnemar")
