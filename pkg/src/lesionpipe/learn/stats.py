"""Two-sample t-tests for comparing fold-accuracy distributions.

The default is Welch's unequal-variance, unpaired, two-sided test; a paired
mode is available for accuracies sharing the same folds.  The p-value comes
from the Student-t survival function evaluated through the regularized
incomplete beta (continued-fraction form), so no stats library is involved.
"""

import math
from dataclasses import dataclass

_MAX_CF_ITER = 300
_CF_EPS = 3e-15
_CF_TINY = 1e-300


@dataclass(frozen=True)
class TTestResult:
    t: float
    dof: float
    p: float


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    return h  # converged to machine noise for all practical (a, b, x)


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, dof: float) -> float:
    """P(|T| >= |t|) for Student t with the given degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))


def _mean_var(xs: list) -> tuple:
    n = len(xs)
    mean = math.fsum(xs) / n
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, var


def welch_t_test(a, b, paired: bool = False) -> TTestResult:
    """Two-sided t-test between two samples.

    Welch form: t = (mean_a - mean_b) / sqrt(va/na + vb/nb) with the
    Welch-Satterthwaite degrees of freedom.  Zero variance on both sides with
    equal means gives t = 0, p = 1; with different means the limit t = +-inf,
    p = 0 is returned.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least 2 values")
    if any(math.isnan(v) or math.isinf(v) for v in a + b):
        raise ValueError("samples must be finite")
    if paired:
        if len(a) != len(b):
            raise ValueError("paired test needs samples of equal length")
        d = [x - y for x, y in zip(a, b)]
        n = len(d)
        mean_d, var_d = _mean_var(d)
        dof = float(n - 1)
        if var_d == 0.0:
            if mean_d == 0.0:
                return TTestResult(t=0.0, dof=dof, p=1.0)
            return TTestResult(t=math.copysign(math.inf, mean_d), dof=dof, p=0.0)
        t = mean_d / math.sqrt(var_d / n)
        return TTestResult(t=t, dof=dof, p=t_two_sided_p(t, dof))

    na, nb = len(a), len(b)
    mean_a, va = _mean_var(a)
    mean_b, vb = _mean_var(b)
    se2 = va / na + vb / nb
    if se2 == 0.0:
        dof = float(na + nb - 2)
        if mean_a == mean_b:
            return TTestResult(t=0.0, dof=dof, p=1.0)
        return TTestResult(t=math.copysign(math.inf, mean_a - mean_b), dof=dof, p=0.0)
    t = (mean_a - mean_b) / math.sqrt(se2)
    dof = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return TTestResult(t=t, dof=dof, p=t_two_sided_p(t, dof))
