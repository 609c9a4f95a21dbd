"""Heavy-tailed step distributions with exact power tails.

The step laws are Pareto families (one-sided or symmetric) whose survival
functions are exact powers, so every tail quantity used by the experiments
has a closed form.  An optional logarithmic slowly varying factor is
supported for tail evaluation and the Potter-bound checker only; it is
deliberately sampling-free so that samplers stay exact inverse-CDF maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "StepLaw",
    "ScaleSpec",
    "PotterReport",
    "potter_certify",
    "geometric_grid",
    "step_law_from_config",
]

_SHAPES = ("one_sided", "symmetric")

# Half the spacing of the 53-bit uniform grid; used to keep symmetric samples
# finite on the measure-2^-53 event rng.random() == 0.
_U_FLOOR = 2.0 ** -53


@dataclass(frozen=True)
class StepLaw:
    """A Pareto step law with tail index ``alpha`` and tail onset ``x_min``.

    shape:
        ``one_sided``  -- support [x_min, inf), P(X > x) = (x/x_min)^-alpha.
        ``symmetric``  -- X = sign * R with R Pareto(alpha, x_min) and an
        independent fair sign, so P(|X| > x) = (x/x_min)^-alpha.

    slow_power:
        if not None, multiplies both tails by (1 + ln(x/x_min))^slow_power.
        Such laws are evaluation-only: sampling and closed-form quantiles
        are disabled for them.
    """

    alpha: float
    shape: str = "symmetric"
    x_min: float = 1.0
    slow_power: Optional[float] = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.x_min <= 0:
            raise ValueError(f"x_min must be positive, got {self.x_min}")
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}, got {self.shape!r}")
        if self.slow_power is not None and self.slow_power > self.alpha:
            # keeps the modified tail monotone on [x_min, inf)
            raise ValueError("slow_power must not exceed alpha")

    # ------------------------------------------------------------------
    # classification

    @property
    def centered(self) -> bool:
        """True iff the law has a finite mean equal to zero.

        Symmetric laws with alpha > 1 are centered by symmetry; alpha <= 1
        has no mean and one-sided laws have a positive mean, so both are
        routed to the non-centered branch everywhere.
        """
        return self.shape == "symmetric" and self.alpha > 1.0

    @property
    def eta(self) -> float:
        """Exponent of the natural scale sequence b_n = n^(eta+eps)."""
        if self.centered:
            return 1.0 / min(2.0, self.alpha)
        return 1.0 / min(1.0, self.alpha)

    def d_crit(self) -> float:
        """Critical tree dimension below which the big-jump regime fails."""
        if self.centered:
            return max(1.0, self.alpha / 2.0)
        return max(1.0, self.alpha)

    # ------------------------------------------------------------------
    # tails

    def _slow(self, x):
        if self.slow_power is None:
            return 1.0 if np.isscalar(x) else np.ones_like(np.asarray(x, float))
        return (1.0 + np.log(np.asarray(x, float) / self.x_min)) ** self.slow_power

    def _power_tail(self, x):
        """(x/x_min)^-alpha * slow(x), valid for x >= x_min, clamped to [0,1]."""
        t = (np.asarray(x, float) / self.x_min) ** (-self.alpha) * self._slow(x)
        return np.clip(t, 0.0, 1.0)

    def tail_abs(self, x):
        """P(|X| > x) for x >= 0."""
        xa = np.asarray(x, float)
        if np.any(xa < 0):
            raise ValueError("tail_abs requires x >= 0")
        out = np.where(xa < self.x_min, 1.0, self._power_tail(np.maximum(xa, self.x_min)))
        return float(out) if np.isscalar(x) else out

    def tail_pos(self, x):
        """P(X > x) for real x (exact parametric CDF complement)."""
        xa = np.asarray(x, float)
        if self.shape == "one_sided":
            out = np.where(xa < self.x_min, 1.0, self._power_tail(np.maximum(xa, self.x_min)))
        else:
            hi = 0.5 * self._power_tail(np.maximum(np.abs(xa), self.x_min))
            out = np.where(
                xa >= self.x_min,
                hi,
                np.where(xa <= -self.x_min, 1.0 - hi, 0.5),
            )
        return float(out) if np.isscalar(x) else out

    def tail(self, x, mode: str):
        if mode == "pos":
            return self.tail_pos(x)
        if mode == "abs":
            return self.tail_abs(x)
        raise ValueError(f"mode must be 'pos' or 'abs', got {mode!r}")

    # ------------------------------------------------------------------
    # sampling (exact inverse survival function)

    def inverse_survival(self, u):
        """The x with P(X > x) = u, for u in (0, 1].

        This is the deterministic map used by ``sample``: a uniform draw u
        returns exactly this value.
        """
        self._require_sampler()
        ua = np.asarray(u, float)
        if np.any(ua <= 0) or np.any(ua > 1):
            raise ValueError("u must lie in (0, 1]")
        if self.shape == "one_sided":
            out = self.x_min * ua ** (-1.0 / self.alpha)
        else:
            with np.errstate(divide="ignore"):
                pos = self.x_min * (2.0 * ua) ** (-1.0 / self.alpha)
                neg = -self.x_min * (2.0 * (1.0 - ua)) ** (-1.0 / self.alpha)
            out = np.where(ua <= 0.5, pos, neg)
        return float(out) if np.isscalar(u) else out

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        """Draw steps via the inverse survival function.

        One uniform is consumed per sample, in order; the caller must own
        the stream exclusively.
        """
        self._require_sampler()
        if size is None:
            r = rng.random()
            if self.shape == "symmetric" and r == 0.0:
                r = _U_FLOOR
            return float(self.inverse_survival(1.0 - r))
        r = rng.random(size)
        if self.shape == "symmetric":
            np.maximum(r, _U_FLOOR, out=r)
        return self.inverse_survival(1.0 - r)

    def _require_sampler(self):
        if self.slow_power is not None:
            raise ValueError("laws with a slowly varying factor are evaluation-only")

    # ------------------------------------------------------------------
    # quantiles and scales

    def quantile_an(self, n, mode: str = "pos") -> float:
        """The a with tail(a) = 1/n (exact for the parametric family)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        target = 1.0 / float(n)
        if mode == "abs" or self.shape == "one_sided":
            max_tail = 1.0
        elif mode == "pos":
            max_tail = 0.5  # symmetric: largest solvable tail on [x_min, inf)
        else:
            raise ValueError(f"mode must be 'pos' or 'abs', got {mode!r}")
        if target > max_tail:
            raise ValueError(
                f"1/n = {target} exceeds the maximal tail value {max_tail} "
                f"for shape={self.shape!r}, mode={mode!r}"
            )
        scale = 1.0 if (mode == "abs" or self.shape == "one_sided") else 0.5
        if self.slow_power is None:
            return self.x_min * (scale * n) ** (1.0 / self.alpha)
        return self._quantile_bisect(target, mode)

    def _quantile_bisect(self, target: float, mode: str) -> float:
        tail = (lambda x: self.tail(x, mode))
        lo = self.x_min
        hi = self.x_min * 2.0
        while tail(hi) > target:
            hi *= 2.0
            if hi > 1e300:
                raise ValueError("quantile bracket expansion failed")
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            t = tail(mid)
            if abs(t - target) <= 1e-14 * target:
                return mid
            if t > target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * mid:
                break
        return math.sqrt(lo * hi)

    def natural_scale(self, epsilon: float, n) -> float:
        """b_n = n^(eta + epsilon), the natural scale sequence."""
        if epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if np.any(np.asarray(n) < 1):
            raise ValueError("n must be >= 1")
        return float(np.asarray(n, float) ** (self.eta + epsilon))


@dataclass(frozen=True)
class ScaleSpec:
    """A pinned natural-scale exponent pair (eta, epsilon)."""

    eta: float
    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    @classmethod
    def for_law(cls, law: StepLaw, epsilon: float) -> "ScaleSpec":
        return cls(eta=law.eta, epsilon=epsilon)

    def bn(self, n) -> float:
        return float(np.asarray(n, float) ** (self.eta + self.epsilon))


# ----------------------------------------------------------------------
# Potter-bound certification


@dataclass(frozen=True)
class PotterReport:
    holds: bool
    worst_ratio: float
    worst_pair: tuple


def geometric_grid(lo: float, hi: float, points: int) -> np.ndarray:
    if not (0 < lo < hi) or points < 2:
        raise ValueError("need 0 < lo < hi and points >= 2")
    return np.geomspace(lo, hi, points)


def potter_certify(
    tail: Callable[[np.ndarray], np.ndarray],
    lam: float,
    C: float,
    delta: float,
    x0: float,
    grid: Sequence[float],
) -> PotterReport:
    """Check f(y)/f(x) <= C * max((y/x)^(lam+delta), (y/x)^(lam-delta)).

    Evaluates the inequality on all ordered pairs of grid points >= x0 and
    reports the worst observed ratio of left side to right side; the bound
    holds when that ratio stays <= 1.
    """
    if C < 1:
        raise ValueError("Potter constant C must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    g = np.asarray(list(grid), dtype=float)
    g = g[g >= x0]
    if g.size < 2:
        raise ValueError("grid must contain at least two points >= x0")
    f = np.asarray([float(tail(x)) for x in g])
    if np.any(f <= 0):
        raise ValueError("tail must be positive on the grid")
    ratio_xy = g[None, :] / g[:, None]          # (x index, y index) -> y/x
    lhs = f[None, :] / f[:, None]               # f(y)/f(x)
    rhs = C * np.maximum(ratio_xy ** (lam + delta), ratio_xy ** (lam - delta))
    rel = lhs / rhs
    worst_flat = int(np.argmax(rel))
    i, j = divmod(worst_flat, g.size)
    worst = float(rel[i, j])
    return PotterReport(
        holds=bool(worst <= 1.0 + 1e-12),
        worst_ratio=worst,
        worst_pair=(float(g[i]), float(g[j])),
    )


# ----------------------------------------------------------------------
# config-string constructor
#
# Grammar (semicolon-separated key=value pairs):
#   kind=pareto;shape={one_sided|symmetric};alpha=FLOAT[;xmin=FLOAT][;slow=log_power:FLOAT]


def step_law_from_config(text: str) -> StepLaw:
    fields = {}
    for part in text.strip().split(";"):
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"malformed step-law field {part!r}")
        key, value = part.split("=", 1)
        key = key.strip()
        if key in fields:
            raise ValueError(f"duplicate step-law key {key!r}")
        fields[key] = value.strip()
    unknown = set(fields) - {"kind", "shape", "alpha", "xmin", "slow"}
    if unknown:
        raise ValueError(f"unknown step-law keys: {sorted(unknown)}")
    if fields.get("kind", "pareto") != "pareto":
        raise ValueError(f"unsupported step-law kind {fields.get('kind')!r}")
    if "alpha" not in fields:
        raise ValueError("step-law config requires alpha=")
    slow_power = None
    if "slow" in fields:
        spec = fields["slow"]
        if spec != "none":
            if not spec.startswith("log_power:"):
                raise ValueError(f"unsupported slow factor {spec!r}")
            slow_power = float(spec.split(":", 1)[1])
    return StepLaw(
        alpha=float(fields["alpha"]),
        shape=fields.get("shape", "symmetric"),
        x_min=float(fields.get("xmin", 1.0)),
        slow_power=slow_power,
    )
