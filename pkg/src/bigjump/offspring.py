"""Critical offspring distributions in a stable domain of attraction.

Two built-in families:

  geometric_half   p_k = 2^-(k+1);         stable index 2,   closed forms
  zeta_stable      p_k = k^-(1+a)/zeta(a)  for k >= 1, p_0 = 1 - zeta(1+a)/zeta(a),
                   stable index a in (1, 2)

Both are critical (mean offspring exactly 1).  A ``custom`` escape hatch
accepts an explicit finite pmf for degenerate tests; it is the only way to
build a non-critical law.

Riemann zeta values are computed by direct summation plus an Euler-Maclaurin
tail correction, keeping the module free of special-function dependencies.
"""

from __future__ import annotations

import functools
import math
from typing import Optional

import numpy as np

__all__ = [
    "OffspringLaw",
    "make_zeta_stable",
    "offspring_from_config",
    "zeta_value",
    "zeta_tail",
]

_ZETA_TERMS = 10 ** 6

# family codes shared with the numba kernels
FAMILY_GEOMETRIC = 0
FAMILY_ZETA = 1
FAMILY_TABLE = 2


def zeta_tail(K: float, s: float) -> float:
    """Euler-Maclaurin value of sum_{k > K} k^-s for s > 1, K >= 1."""
    return (
        K ** (1.0 - s) / (s - 1.0)
        - 0.5 * K ** (-s)
        + s * K ** (-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * K ** (-s - 3.0) / 720.0
    )


@functools.lru_cache(maxsize=None)
def zeta_value(s: float) -> float:
    """Riemann zeta(s) for s > 1 via summation to 10^6 plus tail correction."""
    if s <= 1.0:
        raise ValueError("zeta_value requires s > 1")
    k = np.arange(1, _ZETA_TERMS + 1, dtype=np.float64)
    return float(np.sum(k ** (-s)) + zeta_tail(float(_ZETA_TERMS), s))


class OffspringLaw:
    """Offspring distribution with pmf, generating function and samplers.

    Instances are immutable after construction; the sampling prefix table is
    precomputed, so sharing across threads is safe.  Sampling itself takes an
    exclusive random stream.
    """

    # table size for inverse-CDF sampling; beyond it the zeta family inverts
    # its analytic tail, which at these indices is exact to double precision
    _TABLE_SIZE = 1 << 16

    def __init__(self, family: str, alpha_T: Optional[float] = None,
                 probs: Optional[np.ndarray] = None):
        self.family = family
        if family == "geometric_half":
            self.alpha_T = 2.0
            self.lambda_stable = 1.0  # kappa(t)/t^2 -> sigma^2/2 = 1
            self._zeta_a = None
            self._p0 = 0.5
        elif family == "zeta_stable":
            if alpha_T is None or not (1.0 < alpha_T < 2.0):
                raise ValueError("zeta_stable requires alpha_T in (1, 2)")
            self.alpha_T = float(alpha_T)
            self.lambda_stable = None  # not analytic; estimate via kappa limit
            self._zeta_a = zeta_value(self.alpha_T)
            self._p0 = 1.0 - zeta_value(1.0 + self.alpha_T) / self._zeta_a
            if not (0.0 < self._p0 < 1.0):
                raise ValueError("zeta_stable p_0 left (0,1); alpha_T too extreme")
        elif family == "custom":
            if probs is None:
                raise ValueError("custom family requires an explicit pmf")
            probs = np.asarray(probs, dtype=float)
            if probs.ndim != 1 or probs.size == 0 or np.any(probs < 0):
                raise ValueError("custom pmf must be a non-negative vector")
            if abs(probs.sum() - 1.0) > 1e-9:
                raise ValueError("custom pmf must sum to 1")
            self.alpha_T = alpha_T
            self.lambda_stable = None
            self._zeta_a = None
            self._probs = probs / probs.sum()
            self._p0 = float(self._probs[0])
        else:
            raise ValueError(f"unknown offspring family {family!r}")
        self._height_q = [0.0]  # q_i = P(H < i), extended lazily
        self._build_tables()

    # ------------------------------------------------------------------
    # pmf and moments

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        if self.family == "geometric_half":
            return 2.0 ** (-(k + 1))
        if self.family == "zeta_stable":
            if k == 0:
                return self._p0
            return float(k) ** (-(1.0 + self.alpha_T)) / self._zeta_a
        return float(self._probs[k]) if k < self._probs.size else 0.0

    def mean(self) -> float:
        """Offspring mean, with analytic tail completion for zeta laws."""
        if self.family == "geometric_half":
            return 1.0
        if self.family == "zeta_stable":
            k = np.arange(1, _ZETA_TERMS + 1, dtype=np.float64)
            head = np.sum(k ** (-self.alpha_T)) / self._zeta_a
            return float(head + zeta_tail(float(_ZETA_TERMS), self.alpha_T) / self._zeta_a)
        return float(np.arange(self._probs.size) @ self._probs)

    @property
    def critical(self) -> bool:
        return abs(self.mean() - 1.0) <= 1e-12

    # ------------------------------------------------------------------
    # generating functions

    def _one_minus_gz(self, s: float) -> float:
        """1 - g_Z(s), summed as a positive series to avoid cancellation."""
        if not (0.0 <= s <= 1.0):
            raise ValueError("s must lie in [0, 1]")
        if s == 1.0:
            return 0.0
        if self.family == "geometric_half":
            return (1.0 - s) / (2.0 - s)
        if self.family == "custom":
            k = np.arange(self._probs.size, dtype=float)
            if s == 0.0:
                return float(1.0 - self._probs[0])
            return float(np.sum(self._probs * -np.expm1(k * math.log(s))))
        # zeta family: sum_{k<=K} p_k (1 - s^k) + P(Z > K), truncation chosen
        # so that the neglected sum_{k>K} p_k s^k stays below 1e-14
        if s == 0.0:
            return 1.0 - self._p0
        sigma = 1.0 + self.alpha_T
        ls = math.log(s)
        K = 64
        while True:
            bound = math.exp((K + 1) * ls) * zeta_tail(float(K), sigma) / self._zeta_a
            if bound < 1e-14:
                break
            if K >= (1 << 26):
                raise ValueError(f"gen_Z precision unattainable at s={s!r}")
            K *= 2
        total = 0.0
        block = 1 << 20
        lo = 1
        while lo <= K:
            hi = min(K, lo + block - 1)
            k = np.arange(lo, hi + 1, dtype=np.float64)
            total += float(np.sum(k ** (-sigma) * -np.expm1(k * ls)))
            lo = hi + 1
        return total / self._zeta_a + zeta_tail(float(K), sigma) / self._zeta_a

    def gen_Z(self, s: float) -> float:
        """Generating function E[s^Z] on [0, 1]."""
        if self.family == "geometric_half":
            if not (0.0 <= s <= 1.0):
                raise ValueError("s must lie in [0, 1]")
            return 1.0 / (2.0 - s)
        return 1.0 - self._one_minus_gz(s)

    def gen_BA(self, s: float) -> float:
        """Generating function of B - A, equal to (1 - g_Z(s)) / (1 - s)."""
        if not (0.0 <= s < 1.0):
            raise ValueError("s must lie in [0, 1)")
        return self._one_minus_gz(s) / (1.0 - s)

    def kappa_Zm1(self, t: float) -> float:
        """Log-Laplace transform log E[exp(-t (Z - 1))] for t >= 0."""
        if t < 0:
            raise ValueError("t must be >= 0")
        if t == 0.0:
            return 0.0
        return t + math.log1p(-self._one_minus_gz(math.exp(-t)))

    def kappa_inv(self, u: float) -> float:
        """Inverse of the strictly increasing kappa_Zm1 on [0, inf)."""
        if u < 0:
            raise ValueError("u must be >= 0")
        if u == 0.0:
            return 0.0
        hi = 1.0
        while self.kappa_Zm1(hi) < u:
            hi *= 2.0
            if hi > 1e12:
                raise ValueError("kappa bracket expansion failed")
        lo = 0.0
        tol = 1e-12 * max(1.0, u)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val = self.kappa_Zm1(mid)
            if abs(val - u) <= tol:
                return mid
            if val < u:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-17 * max(1.0, mid):
                break
        return 0.5 * (lo + hi)

    def height_cdf(self, i: int) -> float:
        """q_i = P(H < i) via the recursion q_0 = 0, q_i = g_Z(q_{i-1})."""
        if i < 0:
            raise ValueError("i must be >= 0")
        q = self._height_q
        while len(q) <= i:
            q.append(self.gen_Z(q[-1]))
        return q[i]

    # ------------------------------------------------------------------
    # sampling

    def _build_tables(self):
        if self.family == "geometric_half":
            self._cdf = np.empty(0, dtype=np.float64)
            return
        if self.family == "custom":
            self._cdf = np.cumsum(self._probs)
            return
        k = np.arange(1, self._TABLE_SIZE + 1, dtype=np.float64)
        body = k ** (-(1.0 + self.alpha_T)) / self._zeta_a
        self._cdf = np.concatenate(([self._p0], self._p0 + np.cumsum(body)))

    def survival(self, k: int) -> float:
        """P(Z > k); analytic tail for the zeta family beyond the table."""
        if k < 0:
            return 1.0
        if self.family == "geometric_half":
            return 2.0 ** (-(k + 1))
        if self.family == "custom":
            return float(1.0 - self._cdf[min(k, self._cdf.size - 1)])
        if k < self._cdf.size:
            return float(1.0 - self._cdf[k])
        return zeta_tail(float(k), 1.0 + self.alpha_T) / self._zeta_a

    def _tail_invert(self, u: float) -> int:
        """Smallest k with P(Z <= k) >= u, for u beyond the prefix table."""
        lo = self._cdf.size - 1          # known: cdf[lo] < u
        hi = 2 * lo
        while 1.0 - zeta_tail(float(hi), 1.0 + self.alpha_T) / self._zeta_a < u:
            lo = hi
            hi *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if 1.0 - zeta_tail(float(mid), 1.0 + self.alpha_T) / self._zeta_a >= u:
                hi = mid
            else:
                lo = mid
        return hi

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        """Draw offspring counts by inverse CDF (one uniform per draw)."""
        if size is None:
            return int(self.sample(rng, 1)[0])
        u = rng.random(size)
        if self.family == "geometric_half":
            # trailing-ones count of the 53-bit grid index; exact inverse CDF
            j = (u * 9007199254740992.0).astype(np.int64)
            b = (~j) & (j + 1)
            return (np.frexp(b.astype(np.float64))[1] - 1).astype(np.int64)
        z = np.searchsorted(self._cdf, u, side="right").astype(np.int64)
        if self.family == "zeta_stable":
            overflow = z >= self._cdf.size
            if np.any(overflow):
                z[overflow] = [self._tail_invert(float(v)) for v in u[overflow]]
        else:
            np.minimum(z, self._cdf.size - 1, out=z)
        return z

    # ------------------------------------------------------------------
    # kernel interface

    def kernel_spec(self):
        """(family_code, cdf_table, alpha_T, zeta(alpha_T)) for numba kernels."""
        if self.family == "geometric_half":
            return FAMILY_GEOMETRIC, self._cdf, 0.0, 1.0
        if self.family == "zeta_stable":
            return FAMILY_ZETA, self._cdf, self.alpha_T, self._zeta_a
        return FAMILY_TABLE, self._cdf, 0.0, 1.0

    def __repr__(self):
        if self.family == "zeta_stable":
            return f"OffspringLaw(zeta_stable, alpha_T={self.alpha_T})"
        return f"OffspringLaw({self.family})"


def make_zeta_stable(alpha_T: float) -> OffspringLaw:
    """The zeta-tailed critical law with stable index alpha_T in (1, 2)."""
    return OffspringLaw("zeta_stable", alpha_T=alpha_T)


GEOMETRIC_HALF = OffspringLaw("geometric_half")


# Grammar: family=geometric_half  or  family=zeta;alphaT=FLOAT
def offspring_from_config(text: str) -> OffspringLaw:
    fields = {}
    for part in text.strip().split(";"):
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"malformed offspring field {part!r}")
        key, value = part.split("=", 1)
        if key.strip() in fields:
            raise ValueError(f"duplicate offspring key {key.strip()!r}")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"family", "alphaT"}
    if unknown:
        raise ValueError(f"unknown offspring keys: {sorted(unknown)}")
    family = fields.get("family")
    if family == "geometric_half":
        if "alphaT" in fields:
            raise ValueError("geometric_half takes no alphaT")
        return OffspringLaw("geometric_half")
    if family == "zeta":
        if "alphaT" not in fields:
            raise ValueError("zeta family requires alphaT=")
        return make_zeta_stable(float(fields["alphaT"]))
    raise ValueError(f"unknown offspring family {family!r}")
