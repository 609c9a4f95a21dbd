"""Closed-form and numeric analysis around the total-progeny law.

Centerpiece is the fixed point g_V(s) = s g_Z(g_V(s)) of the total-progeny
generating function, evaluated by monotone iteration from 0 (which provably
converges to the smallest fixed point, the probabilistic one).  On top of it
sit the exact maximal-jump tail, the tail-bound right-hand sides, the
truncated-walk constant calibration, and the Tauberian cross-check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .heavytail import ScaleSpec, StepLaw
from .offspring import OffspringLaw

__all__ = [
    "NonConvergence",
    "GvEvaluator",
    "gv_tail_asymptotic",
    "estimate_lambda",
    "xmax_tail_exact",
    "prop1_rhs",
    "corollary_rhs",
    "calibrate_dds_constant",
    "CalibrationReport",
    "karamata_crosscheck",
    "KaramataReport",
    "wilson_interval",
]


class NonConvergence(RuntimeError):
    """The fixed-point iteration hit its iteration cap before converging."""


@dataclass(frozen=True)
class GvEvaluator:
    """Evaluator of the total-progeny generating function g_V.

    The iteration g <- s g_Z(g) from g = 0 is monotone increasing and
    bounded, so it converges to the smallest fixed point.  Near s = 1 the
    contraction degrades; callers needing s within ~tol of 1 should switch
    to ``gv_tail_asymptotic``.
    """

    law: OffspringLaw
    tol: float = 1e-13
    max_iter: int = 10 ** 6

    def __post_init__(self):
        if not (0.0 < self.tol <= 1e-6):
            raise ValueError("tol must lie in (0, 1e-6]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")

    def __call__(self, s: float) -> float:
        if not (0.0 <= s <= 1.0):
            raise ValueError("s must lie in [0, 1]")
        if s == 0.0:
            return 0.0
        if s == 1.0:
            return 1.0  # critical laws: V < infinity almost surely
        g = 0.0
        for _ in range(self.max_iter):
            g_next = s * self.law.gen_Z(g)
            if abs(g_next - g) < self.tol:
                return g_next
            g = g_next
        raise NonConvergence(
            f"g_V iteration did not converge at s={s} within {self.max_iter} steps")


def estimate_lambda(law: OffspringLaw, t: float = 1e-3) -> float:
    """Empirical stable coefficient: kappa_{Z-1}(t) / t^alpha_T at small t."""
    if law.alpha_T is None:
        raise ValueError("law has no stable index")
    if law.lambda_stable is not None:
        return law.lambda_stable
    return law.kappa_Zm1(t) / t ** law.alpha_T


def gv_tail_asymptotic(law: OffspringLaw, s: float) -> float:
    """Leading order of 1 - g_V(1 - s) as s -> 0: (s / lambda)^(1/alpha_T)."""
    if not (0.0 < s <= 0.1):
        raise ValueError("the asymptotic is for 0 < s <= 0.1")
    lam = estimate_lambda(law)
    return (s / lam) ** (1.0 / law.alpha_T)


def xmax_tail_exact(law: OffspringLaw, step: StepLaw, x: float,
                    mode: str = "pos", convention: str = "nonroot",
                    evaluator: Optional[GvEvaluator] = None) -> float:
    """Exact law of the maximal jump over a free GW tree: 1 - g(1 - tail(x)).

    convention = "root" uses g_V itself (jumps on all V vertices);
    "nonroot" uses g_{V-1}(s) = g_V(s)/s, matching walks that attach steps
    to non-root vertices only.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    if convention not in ("root", "nonroot"):
        raise ValueError("convention must be 'root' or 'nonroot'")
    ev = evaluator or GvEvaluator(law)
    p = float(step.tail(x, mode))
    s = 1.0 - p
    if convention == "root":
        return 1.0 - ev(s)
    if s == 0.0:
        return 1.0 - law.pmf(0)  # g_{V-1}(0) = P(V = 1) = p_0
    return 1.0 - ev(s) / s


def prop1_rhs(H: int, V: int, z: float, y: float, C: float, step: StepLaw) -> float:
    """(H V / 2) P(|X| > z)^2 + C V exp(-y / z)."""
    if H < 0 or V < 0:
        raise ValueError("H and V must be >= 0")
    if z <= 0 or y < 0 or C <= 0:
        raise ValueError("need z > 0, y >= 0, C > 0")
    return 0.5 * H * V * step.tail_abs(z) ** 2 + C * V * math.exp(-y / z)


def corollary_rhs(H: int, V: int, y: float, epsilon: float, C: float,
                  step: StepLaw) -> float:
    """C H V y^(-(2 - eps) alpha)."""
    if y <= 0 or not (0.0 < epsilon < 1.0):
        raise ValueError("need y > 0 and 0 < epsilon < 1")
    return C * H * V * y ** (-(2.0 - epsilon) * step.alpha)


# ----------------------------------------------------------------------
# truncated-walk constant calibration


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class CalibrationReport:
    c_hat: float
    c_hat_point: float
    cells: tuple

    def __repr__(self):
        return f"CalibrationReport(c_hat={self.c_hat:.4g}, cells={len(self.cells)})"

    def to_json(self) -> str:
        return json.dumps({
            "grid": [[c["n"], c["x"]] for c in self.cells],
            "estimates": [c["p_hat"] for c in self.cells],
            "confidence": [c["wilson_hi"] for c in self.cells],
            "convention": "c_hat = max exp(x/y) * Wilson upper; "
                          "cells with x >= n*y are impossible and zero",
            "c_hat": self.c_hat,
        }, sort_keys=True)


def calibrate_dds_constant(step: StepLaw, scale: ScaleSpec,
                           n_grid: Sequence[int], x_over_y: Sequence[float],
                           y_rule: Optional[Callable[[int], float]],
                           reps: int, rng: np.random.Generator,
                           ) -> CalibrationReport:
    """Monte Carlo upper estimate of the truncated-walk constant.

    For each walk length n, truncation level y = y_rule(n) (default: the
    natural scale b_n itself, the smallest admissible level) and threshold
    x = c y, estimates P(|S_n^(y)| > x) and returns the largest value of
    exp(x/y) times the Wilson upper bound.  Cells with x >= n y are
    structurally impossible (|S_n^(y)| <= n y) and contribute zero.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    rule = y_rule or (lambda n: scale.bn(n))
    cells = []
    c_wilson = 0.0
    c_point = 0.0
    for n in n_grid:
        y = float(rule(n))
        if y < scale.bn(n) - 1e-9 * scale.bn(n):
            raise ValueError(f"y_rule({n}) = {y} below the natural scale {scale.bn(n)}")
        xs = np.asarray([c * y for c in x_over_y], dtype=float)
        exceed = np.zeros(xs.size, dtype=np.int64)
        done = 0
        max_block = max(1, (1 << 22) // max(1, n))
        while done < reps:
            m = min(max_block, reps - done)
            draws = step.sample(rng, m * n).reshape(m, n)
            np.putmask(draws, np.abs(draws) > y, 0.0)
            s_abs = np.abs(draws.sum(axis=1))
            exceed += (s_abs[:, None] > xs[None, :]).sum(axis=0)
            done += m
        for c, x, k in zip(x_over_y, xs, exceed):
            if x >= n * y:
                cells.append({"n": int(n), "y": y, "x": float(x), "p_hat": 0.0,
                              "wilson_hi": 0.0, "weight": math.exp(c),
                              "impossible": True})
                continue
            _, hi = wilson_interval(int(k), reps)
            cells.append({"n": int(n), "y": y, "x": float(x),
                          "p_hat": k / reps, "wilson_hi": hi,
                          "weight": math.exp(c), "impossible": False})
            c_wilson = max(c_wilson, math.exp(c) * hi)
            c_point = max(c_point, math.exp(c) * k / reps)
    return CalibrationReport(c_hat=c_wilson, c_hat_point=c_point, cells=tuple(cells))


# ----------------------------------------------------------------------
# Tauberian cross-check


@dataclass(frozen=True)
class KaramataReport:
    beta: float
    grid: tuple
    empirical: tuple
    target: tuple
    rel_dev: tuple
    max_abs_rel_dev: float
    convention: str = "size_total"

    def to_json(self) -> str:
        return json.dumps({
            "grid": list(self.grid),
            "estimates": list(self.empirical),
            "confidence": list(self.rel_dev),
            "convention": self.convention,
            "beta": self.beta,
            "target": list(self.target),
        }, sort_keys=True)


def karamata_crosscheck(law: OffspringLaw, n_grid: Sequence[int],
                        sample_tail: Callable[[int], float],
                        evaluator: Optional[GvEvaluator] = None) -> KaramataReport:
    """Compare an empirical size tail against the Tauberian transform.

    The target at n is (1 - g_V(1 - 1/n)) / Gamma(1 - beta) with
    beta = 1/alpha_T, the tail that the generating-function behaviour at 1
    forces; for the geometric family this is 1/sqrt(pi n).
    """
    if law.alpha_T is None or not (law.alpha_T > 1.0):
        raise ValueError("law must carry a stable index > 1")
    beta = 1.0 / law.alpha_T
    ev = evaluator or GvEvaluator(law)
    grid, emp, tgt, dev = [], [], [], []
    for n in n_grid:
        target = (1.0 - ev(1.0 - 1.0 / n)) / math.gamma(1.0 - beta)
        e = float(sample_tail(int(n)))
        grid.append(int(n))
        emp.append(e)
        tgt.append(target)
        dev.append(e / target - 1.0)
    return KaramataReport(
        beta=beta,
        grid=tuple(grid),
        empirical=tuple(emp),
        target=tuple(tgt),
        rel_dev=tuple(dev),
        max_abs_rel_dev=max(abs(d) for d in dev),
    )
