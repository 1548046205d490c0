"""Method-comparison statistics.

Four ways of asking whether a new method reproduces a reference method,
from weakest to strongest: mean and standard deviation, Pearson
correlation, equivalence testing with two one-sided paired t-tests (TOST),
and Bland-Altman limits of agreement.

The Student t distribution is evaluated through the regularized incomplete
beta function (continued fraction, modified Lentz), so no statistics
package is needed.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InsufficientDataError, PairingError, UndefinedCorrelationError

LOA_Z = 1.96
DEFAULT_TOLERANCE = 0.05
DEFAULT_ALPHA = 0.05

_EPS = 1e-15
_TINY = 1e-300


def _as_series(x, name="x"):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def paired(a, b):
    a, b = _as_series(a, "a"), _as_series(b, "b")
    if a.size != b.size:
        raise PairingError(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        raise InsufficientDataError("paired series need at least 2 pairs")
    return a, b


def mean_sd(x: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (n - 1 denominator)."""
    x = _as_series(x)
    if x.size < 2:
        raise InsufficientDataError("need at least 2 values")
    m = float(x.mean())
    return m, float(math.sqrt(((x - m) ** 2).sum() / (x.size - 1)))


def pearson_r(a, b) -> float:
    a, b = paired(a, b)
    da, db = a - a.mean(), b - b.mean()
    saa, sbb = float(da @ da), float(db @ db)
    if saa == 0 or sbb == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant series")
    r = float(da @ db) / math.sqrt(saa * sbb)
    return max(-1.0, min(1.0, r))


# ---------------------------------------------------------------------------
# t distribution


def _betacf(a, b, x):
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """``P(T > t)`` for Student's t with ``df`` degrees of freedom."""
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * betainc_regularized(df / 2.0, 0.5, df / (df + t * t))
    return tail if t > 0 else 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    return 1.0 - t_sf(t, df)


class TTestResult(NamedTuple):
    t: float
    df: int
    p_greater: float
    p_less: float
    degenerate: bool = False


def paired_t(a, b, shift: float = 0.0) -> TTestResult:
    """Paired t statistic of ``mean(a - b) - shift``.

    ``p_greater`` tests H1: mean difference > shift; ``p_less`` tests
    H1: mean difference < shift.  When all differences are equal the test
    degenerates: the side the differences lie on gets p = 0 (the other 1),
    and differences exactly at ``shift`` give 0.5 on both sides.
    """
    a, b = paired(a, b)
    d = a - b
    n = d.size
    mean = float(d.mean())
    sd = float(math.sqrt(((d - mean) ** 2).sum() / (n - 1)))
    if sd == 0.0:
        if mean > shift:
            return TTestResult(math.inf, n - 1, 0.0, 1.0, True)
        if mean < shift:
            return TTestResult(-math.inf, n - 1, 1.0, 0.0, True)
        return TTestResult(math.nan, n - 1, 0.5, 0.5, True)
    t = (mean - shift) / (sd / math.sqrt(n))
    p_greater = t_sf(t, n - 1)
    return TTestResult(t, n - 1, p_greater, 1.0 - p_greater)


class TostResult(NamedTuple):
    passed: bool
    p: float
    bound_low: float
    bound_high: float
    lower: TTestResult
    upper: TTestResult


def tost(a, b, tolerance: float = DEFAULT_TOLERANCE, alpha: float = DEFAULT_ALPHA) -> TostResult:
    """Two one-sided paired t-tests for equivalence of ``b`` to reference ``a``.

    The equivalence margin is ``tolerance * |mean(a)|`` on either side of a
    zero mean difference.  Equivalence holds when both
    H1: mean(a - b) > -margin and H1: mean(a - b) < +margin are significant.
    """
    a, b = paired(a, b)
    margin = tolerance * abs(float(a.mean()))
    lower = paired_t(a, b, -margin)
    upper = paired_t(a, b, margin)
    p = max(lower.p_greater, upper.p_less)
    return TostResult(bool(lower.p_greater < alpha and upper.p_less < alpha), p, -margin, margin, lower, upper)


class BlandAltmanResult(NamedTuple):
    bias: float
    loa_low: float
    loa_high: float
    means: np.ndarray
    diffs: np.ndarray

    @property
    def pairs(self):
        return list(zip(self.means.tolist(), self.diffs.tolist()))


def bland_altman(a, b, z: float = LOA_Z) -> BlandAltmanResult:
    """Bias and limits of agreement ``bias +- z * sd(a - b)``."""
    a, b = paired(a, b)
    d = a - b
    bias, sd = mean_sd(d)
    return BlandAltmanResult(bias, bias - z * sd, bias + z * sd, (a + b) / 2, d)


# ---------------------------------------------------------------------------
# report


@dataclass
class ComparisonReport:
    field: str
    n: int
    mean_a: float
    sd_a: float
    mean_b: float
    sd_b: float
    pearson_r: float | None
    tost_pass: bool
    tost_p: float
    tolerance: float
    alpha: float
    bound_low: float
    bound_high: float
    paired_t: float
    paired_p_two_sided: float
    bias: float
    loa_low: float
    loa_high: float
    loa_multiplier: float = LOA_Z
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return None
            return v
        return json.dumps({k: clean(v) for k, v in self.to_dict().items()}, **kwargs)


def compare_series(a, b, field="value", tolerance=DEFAULT_TOLERANCE, alpha=DEFAULT_ALPHA) -> ComparisonReport:
    a, b = paired(a, b)
    notes = []
    ma, sa = mean_sd(a)
    mb, sb = mean_sd(b)
    try:
        r = pearson_r(a, b)
    except UndefinedCorrelationError:
        r = None
        notes.append("pearson correlation undefined: a series is constant")
    eq = tost(a, b, tolerance, alpha)
    t0 = paired_t(a, b, 0.0)
    if t0.degenerate:
        notes.append("all paired differences are equal; t-tests degenerate")
    ba = bland_altman(a, b)
    notes.append(f"limits of agreement use bias +- {LOA_Z} sd of differences")
    return ComparisonReport(
        field=field, n=int(a.size), mean_a=ma, sd_a=sa, mean_b=mb, sd_b=sb, pearson_r=r,
        tost_pass=eq.passed, tost_p=eq.p, tolerance=tolerance, alpha=alpha,
        bound_low=eq.bound_low, bound_high=eq.bound_high,
        paired_t=t0.t, paired_p_two_sided=min(1.0, 2 * min(t0.p_greater, t0.p_less)),
        bias=ba.bias, loa_low=ba.loa_low, loa_high=ba.loa_high, notes=notes,
    )


def compare_methods(rows_a, rows_b, field="mean", tolerance=DEFAULT_TOLERANCE, alpha=DEFAULT_ALPHA) -> ComparisonReport:
    """Compare one measurement column of two per-frame row lists.

    Rows may be :class:`~granops.measure.MeasurementRow` objects or mappings.
    """
    if len(rows_a) != len(rows_b):
        raise PairingError(f"frame counts differ: {len(rows_a)} vs {len(rows_b)}")

    def column(rows):
        return [float(r[field]) if isinstance(r, dict) else float(getattr(r, field)) for r in rows]

    return compare_series(column(rows_a), column(rows_b), field, tolerance, alpha)
