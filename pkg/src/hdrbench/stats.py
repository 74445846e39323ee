"""Aggregation, Welch t-tests and significance-linked method rankings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .scores import ScoreTable

# +inf scores (identical images) are capped to this many dB inside aggregation only
INF_CAP = 100.0
BETA_TOL = 1e-15
BETA_MAX_ITER = 10000


def capped(values) -> np.ndarray:
    return np.minimum(np.asarray(values, dtype=np.float64), INF_CAP)


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETA_TOL:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    return min(1.0, max(0.0, betainc_regularized(df / 2.0, 0.5, df / (df + t * t))))


def t_cdf(t: float, df: float) -> float:
    half = 0.5 * t_sf_two_sided(t, df)
    return 1.0 - half if t > 0 else half


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float


def welch_t_test(a, b) -> TTestResult:
    """Two-sided unequal-variance t-test.

    When both samples have zero variance: p = 1 if the means are equal, else p = 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0:
        if ma == mb:
            return TTestResult(0.0, math.nan, 1.0)
        return TTestResult(math.copysign(math.inf, ma - mb), math.nan, 0.0)
    t = (ma - mb) / math.sqrt(se2)
    df = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return TTestResult(float(t), float(df), t_sf_two_sided(t, df))


def paired_t_test(a, b) -> TTestResult:
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if d.size < 2:
        raise ValueError("paired test needs at least two pairs")
    sd = d.std(ddof=1)
    if sd == 0:
        if d.mean() == 0:
            return TTestResult(0.0, float(d.size - 1), 1.0)
        return TTestResult(math.copysign(math.inf, d.mean()), float(d.size - 1), 0.0)
    t = d.mean() / (sd / math.sqrt(d.size))
    df = float(d.size - 1)
    return TTestResult(float(t), df, t_sf_two_sided(t, df))


@dataclass(frozen=True)
class Summary:
    mean: float
    standard_error: float
    n: int


def summarize(values) -> Summary:
    v = capped(values)
    if v.size < 2:
        raise ValueError("aggregation needs at least two scores")
    return Summary(float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), int(v.size))


def aggregate(table: ScoreTable, metric: str) -> dict[str, Summary]:
    """Per-method mean and standard error over the scenes present for that method."""
    return {m: summarize(table.column(m, metric)[1]) for m in table.methods}


@dataclass
class RankingResult:
    metric: str
    order: list
    means: dict
    p_values: dict = field(default_factory=dict)
    links: set = field(default_factory=set)
    threshold: float = 0.05

    def p(self, a: str, b: str) -> float:
        return self.p_values[_pair(a, b)]

    def linked(self, a: str, b: str) -> bool:
        return _pair(a, b) in self.links


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


def ranking_groups(table: ScoreTable, metric: str, p_threshold: float = 0.05,
                   paired: bool = False) -> RankingResult:
    """Order methods by mean score and link every pair the t-test cannot separate."""
    if len(table.methods) < 2:
        raise ValueError("ranking needs at least two methods")
    means = {m: summarize(table.column(m, metric)[1]).mean for m in table.methods}
    order = sorted(table.methods, key=lambda m: (-means[m], m))
    test = paired_t_test if paired else welch_t_test
    result = RankingResult(metric, order, means, threshold=p_threshold)
    for a, b in combinations(sorted(table.methods), 2):
        xa, xb = table.paired(a, b, metric)
        p = test(capped(xa), capped(xb)).p
        result.p_values[(a, b)] = p
        if p > p_threshold:
            result.links.add((a, b))
    return result


@dataclass(frozen=True)
class EvDelta:
    method: str
    mean_ev5: float
    mean_ev10: float
    delta: float
    violates_expectation: bool


def ev_consistency(table_ev5: ScoreTable, table_ev10: ScoreTable, metric: str) -> list[EvDelta]:
    """Flag methods whose quality does not strictly drop from EV-5 to EV-10.

    A zero change counts as a violation.
    """
    missing = set(table_ev5.methods) ^ set(table_ev10.methods)
    if missing:
        raise ValueError(f"method sets differ between exposures: {sorted(missing)}")
    rows = []
    for m in table_ev5.methods:
        m5 = float(capped(table_ev5.column(m, metric)[1]).mean())
        m10 = float(capped(table_ev10.column(m, metric)[1]).mean())
        rows.append(EvDelta(m, m5, m10, m10 - m5, m10 >= m5))
    return rows
