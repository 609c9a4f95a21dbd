"""Statistics used by the experiment harness."""

from __future__ import annotations

import math
from collections import Counter
from typing import Callable, Dict, Iterable, Sequence

import numpy as np

from ..analysis import wilson_interval

__all__ = [
    "ks_statistic",
    "frechet_cdf",
    "empirical_quantiles",
    "tv_distances",
    "log_log_slope",
    "wilson_interval",
]


def ks_statistic(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Exact two-sided Kolmogorov-Smirnov distance to a continuous CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.size
    if m == 0:
        raise ValueError("ks_statistic needs at least one sample")
    f = np.asarray([cdf(v) for v in x])
    i = np.arange(1, m + 1)
    d_plus = np.max(i / m - f)
    d_minus = np.max(f - (i - 1) / m)
    return float(max(d_plus, d_minus, 0.0))


def frechet_cdf(alpha: float) -> Callable[[float], float]:
    """F(x) = exp(-x^-alpha) on (0, inf), 0 elsewhere."""

    def cdf(x: float) -> float:
        if x <= 0:
            return 0.0
        return math.exp(-x ** (-alpha))

    return cdf


def empirical_quantiles(values: Sequence[float],
                        qs: Sequence[float] = (0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95),
                        ) -> Dict[str, float]:
    v = np.asarray(values, dtype=float)
    return {f"q{int(round(q * 100)):02d}": float(np.quantile(v, q)) for q in qs}


def tv_distances(sample_a: Iterable[tuple], sample_b: Iterable[tuple],
                 names: Sequence[str]) -> Dict[str, float]:
    """Total variation between two empirical samples of statistic tuples.

    Returns the TV of each marginal coordinate (named) plus the joint TV.
    The joint TV over fine bins is dominated by sampling noise of order
    sum_k sqrt(p_k / (pi N)), so acceptance checks gate on the marginals.
    """
    a = list(sample_a)
    b = list(sample_b)
    na, nb = len(a), len(b)
    if na == 0 or nb == 0:
        raise ValueError("need non-empty samples")
    out: Dict[str, float] = {}
    for j, name in enumerate(names):
        ca = Counter(t[j] for t in a)
        cb = Counter(t[j] for t in b)
        keys = set(ca) | set(cb)
        out[f"tv_{name}"] = 0.5 * sum(abs(ca[k] / na - cb[k] / nb) for k in keys)
    ca = Counter(a)
    cb = Counter(b)
    keys = set(ca) | set(cb)
    out["tv_joint"] = 0.5 * sum(abs(ca[k] / na - cb[k] / nb) for k in keys)
    out["tv_marginal_max"] = max(v for k, v in out.items() if k.startswith("tv_") and k != "tv_joint")
    return out


def log_log_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    lx = lx - lx.mean()
    return float((lx @ (ly - ly.mean())) / (lx @ lx))
