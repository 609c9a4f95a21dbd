"""Sampling of critical Galton-Watson trees.

Three samplers:

  sample_free                the plain GW tree, generated depth-first along
                             its Lukasiewicz path, with a vertex cap
  sample_size_conditioned    T | {V = n} by rejection of the offspring
                             bridge plus the cycle-lemma rotation
  sample_height_conditioned  T | {H >= k} by the spine construction, with
                             left-of-spine subtrees conditioned below the
                             remaining height and right-of-spine free copies

Trees are stored as two flat integer arrays (parent, depth) plus leaf flags;
vertex 0 is the root and vertices are numbered in depth-first preorder, so
``parent[v] < v`` and siblings are ordered by index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from . import _kernels
from ._kernels import _TRAIL_LUT, CAPPED, OK
from .offspring import OffspringLaw

__all__ = [
    "Tree",
    "LukPath",
    "CapExceeded",
    "CAP_EXCEEDED",
    "BudgetExceeded",
    "sample_free",
    "sample_free_sizes",
    "sample_size_conditioned",
    "sample_height_conditioned",
    "sample_height_rejection",
    "encode_luk",
    "decode_luk",
    "validate_tree",
]


class CapExceeded:
    """Sampler outcome for the event {V > cap}; a value, not an error."""

    __slots__ = ()

    def __repr__(self):
        return "CapExceeded()"


CAP_EXCEEDED = CapExceeded()


class BudgetExceeded(RuntimeError):
    """A rejection sampler ran out of attempts (law/parameter mismatch)."""


@dataclass(frozen=True)
class Tree:
    """Rooted ordered tree in parent-array form.

    ``size_total`` counts the root; ``nonroot`` is the number of walk steps
    a tree-indexed walk will attach.
    """

    parent: np.ndarray
    depth: np.ndarray
    leaf_flags: np.ndarray
    size_total: int = field(init=False)
    height: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "size_total", int(self.parent.shape[0]))
        object.__setattr__(self, "height", int(self.depth.max()) if self.size_total else 0)

    @property
    def nonroot(self) -> int:
        return self.size_total - 1

    @property
    def leaf_count(self) -> int:
        return int(self.leaf_flags.sum())

    def stats(self) -> dict:
        return {
            "size_total": self.size_total,
            "nonroot": self.nonroot,
            "height": self.height,
            "leaf_count": self.leaf_count,
        }

    @classmethod
    def from_parent(cls, parent) -> "Tree":
        parent = np.asarray(parent, dtype=np.int64)
        n = parent.shape[0]
        if n < 1 or parent[0] != -1:
            raise ValueError("vertex 0 must be the root (parent -1)")
        if n > 1 and (np.any(parent[1:] < 0) or np.any(parent[1:] >= np.arange(1, n))):
            raise ValueError("parents must precede children")
        depth = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            depth[i] = depth[parent[i]] + 1
        leaf = np.ones(n, dtype=np.bool_)
        if n > 1:
            leaf[parent[1:]] = False
        return cls(parent=parent, depth=depth, leaf_flags=leaf)

    # line format: first line size_total, second line parent indices (root -1)
    def to_lines(self) -> str:
        return f"{self.size_total}\n{' '.join(str(int(p)) for p in self.parent)}\n"

    @classmethod
    def from_lines(cls, text: str) -> "Tree":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if len(lines) != 2:
            raise ValueError("tree text must have a size line and a parent line")
        n = int(lines[0])
        parent = np.array([int(tok) for tok in lines[1].split()], dtype=np.int64)
        if parent.shape[0] != n:
            raise ValueError("size line disagrees with parent count")
        tree = cls.from_parent(parent)
        validate_tree(tree)
        return tree


@dataclass(frozen=True)
class LukPath:
    """Lukasiewicz increments (offspring minus one, depth-first order)."""

    increments: np.ndarray

    def to_text(self) -> str:
        return " ".join(str(int(e)) for e in self.increments)

    @classmethod
    def from_text(cls, text: str) -> "LukPath":
        return cls(increments=np.array([int(t) for t in text.split()], dtype=np.int64))


def validate_tree(tree: Tree) -> None:
    """Assert the parent/depth/leaf invariants; raises ValueError."""
    n = tree.size_total
    if n < 1:
        raise ValueError("tree must have at least the root")
    if tree.parent[0] != -1 or tree.depth[0] != 0:
        raise ValueError("vertex 0 must be the root")
    p = tree.parent[1:]
    if n > 1:
        idx = np.arange(1, n)
        if np.any(p < 0) or np.any(p >= idx):
            raise ValueError("parents must precede children")
        if np.any(tree.depth[1:] != tree.depth[p] + 1):
            raise ValueError("depth must increase by one along edges")
    leaf = np.ones(n, dtype=np.bool_)
    if n > 1:
        leaf[p] = False
    if np.any(leaf != tree.leaf_flags):
        raise ValueError("leaf flags disagree with the parent array")
    if tree.height != int(tree.depth.max()):
        raise ValueError("height must equal the maximal depth")


# ----------------------------------------------------------------------
# Lukasiewicz codec


def encode_luk(tree: Tree) -> LukPath:
    """Offspring-minus-one sequence along the tree's own depth-first order."""
    validate_tree(tree)
    n = tree.size_total
    zcount = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        zcount[tree.parent[i]] += 1
    children: List[List[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        children[tree.parent[i]].append(i)
    inc = np.empty(n, dtype=np.int64)
    stack = [0]
    pos = 0
    while stack:
        v = stack.pop()
        inc[pos] = zcount[v] - 1
        pos += 1
        stack.extend(reversed(children[v]))
    return LukPath(increments=inc)


def decode_luk(path: LukPath) -> Tree:
    """Inverse of ``encode_luk``; rejects paths violating the first-hit rule."""
    z = np.asarray(path.increments, dtype=np.int64) + 1
    if np.any(z < 0):
        raise ValueError("increments must be >= -1")
    parent, depth, leaf, ok = _kernels.decode_path(z)
    if not ok:
        raise ValueError("path must first hit -1 exactly at its end")
    return Tree(parent=parent, depth=depth, leaf_flags=leaf)


# ----------------------------------------------------------------------
# free sampler


def sample_free(law: OffspringLaw, rng: np.random.Generator,
                cap: int) -> Union[Tree, CapExceeded]:
    """One critical GW tree, or CAP_EXCEEDED on the event {V > cap}."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    code, cdf, alpha, zeta_a = law.kernel_spec()
    parent, depth, leaf, status = _kernels.gen_tree(
        rng, cap, -1, code, cdf, alpha, zeta_a, _TRAIL_LUT)
    if status == CAPPED:
        return CAP_EXCEEDED
    return Tree(parent=parent, depth=depth, leaf_flags=leaf)


def sample_free_sizes(law: OffspringLaw, rng: np.random.Generator,
                      cap: int, count: int) -> np.ndarray:
    """Sizes of ``count`` free trees (-1 for capped); no trees materialized.

    Distributionally identical to taking size_total of ``sample_free``
    outputs: the size is the first hitting time of -1 by the Lukasiewicz
    walk either way.
    """
    code, cdf, alpha, zeta_a = law.kernel_spec()
    return _kernels.free_sizes(rng, count, cap, code, cdf, alpha, zeta_a, _TRAIL_LUT)


# ----------------------------------------------------------------------
# size-conditioned sampler (bridge rejection + cycle lemma)


def _cycle_rotation_cut(z: np.ndarray) -> int:
    """Index after the first minimum of the increment partial sums."""
    w = np.cumsum(z - 1)
    return int(np.argmin(w)) + 1


def sample_size_conditioned(law: OffspringLaw, n: int, rng: np.random.Generator,
                            budget: int = 10 ** 5) -> Tree:
    """T | {V = n}, exactly.

    Draws n iid offspring counts, rejects until they sum to n - 1, then
    applies the unique cyclic rotation after which the Lukasiewicz path
    first hits -1 at step n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    code, cdf, alpha, zeta_a = law.kernel_spec()
    attempts, z = _kernels.bridge_reject(
        rng, n, budget, code, cdf, alpha, zeta_a, _TRAIL_LUT)
    if attempts < 0:
        raise BudgetExceeded(
            f"no offspring bridge of length {n} found in {budget} attempts")
    cut = _cycle_rotation_cut(z)
    zr = np.concatenate((z[cut:], z[:cut]))
    parent, depth, leaf, ok = _kernels.decode_path(zr)
    if not ok:
        raise AssertionError("cycle-lemma rotation failed the first-hit check")
    return Tree(parent=parent, depth=depth, leaf_flags=leaf)


# ----------------------------------------------------------------------
# height-conditioned sampler (spine construction)


class _SpinePairSampler:
    """Sampler for the spine pairs (A_i, B_i) at remaining height i.

    P(A_i = a, B_i = b) = c_i p_b q_{i-1}^{a-1} 1{1 <= a <= b}, with
    q_j = P(H < j) and c_i = (1 - q_{i-1}) / (1 - q_i).  B is drawn from its
    marginal via a prefix table (analytic zeta tail beyond it), then A | B
    by a truncated-geometric inverse CDF.
    """

    def __init__(self, law: OffspringLaw, i: int):
        self.law = law
        self.q_prev = law.height_cdf(i - 1)
        q_i = law.height_cdf(i)
        self.c_i = (1.0 - self.q_prev) / (1.0 - q_i)
        # marginal weight of b: c_i * p_b * (1 - q_prev^b) / (1 - q_prev),
        # which at q_prev = 0 degenerates to c_i * p_b for b >= 1
        if self.q_prev > 0:
            table_b = max(64, int(math.ceil(math.log(1e-16) / math.log(self.q_prev))))
        else:
            table_b = 64
        table_b = min(max(table_b, 64), 1 << 16)
        while True:
            b = np.arange(1, table_b + 1, dtype=np.float64)
            pb = np.array([law.pmf(int(k)) for k in range(1, table_b + 1)])
            if self.q_prev > 0:
                w = pb * (1.0 - self.q_prev ** b) / (1.0 - self.q_prev)
            else:
                w = pb
            cdf = np.cumsum(self.c_i * w)
            self._cdf = cdf
            # beyond the table the factor (1 - q_prev^b) is 1 to <= 1e-16,
            # so the conditional tail is proportional to the bare pmf tail
            self._tail_exact = law.family != "zeta_stable"
            if self._tail_exact:
                if cdf[-1] >= 1.0 - 1e-12 or table_b >= (1 << 20):
                    break
                table_b *= 2
            else:
                break

    def sample(self, rng: np.random.Generator) -> tuple:
        u = rng.random()
        if u < self._cdf[-1]:
            b = int(np.searchsorted(self._cdf, u, side="right")) + 1
        elif self._tail_exact:
            b = self._cdf.shape[0]  # geometric/custom: truncated-away mass < 1e-12
        else:
            b = self._invert_zeta_tail(u)
        q = self.q_prev
        if q == 0.0 or b == 1:
            return 1, b
        ub = rng.random()
        # truncated geometric: P(A <= a | B = b) = (1 - q^a) / (1 - q^b)
        target = ub * -math.expm1(b * math.log(q))
        a = int(math.ceil(math.log1p(-target) / math.log(q)))
        a = max(1, min(a, b))
        # float-edge correction against the exact CDF
        while a > 1 and -math.expm1((a - 1) * math.log(q)) >= target:
            a -= 1
        while -math.expm1(a * math.log(q)) < target:
            a += 1
        return min(a, b), b

    def _invert_zeta_tail(self, u: float) -> int:
        law = self.law
        scale = self.c_i / ((1.0 - self.q_prev) if self.q_prev > 0 else 1.0)
        target = (1.0 - u) / scale  # solve pmf-tail(b) <= target
        lo = self._cdf.shape[0]
        hi = 2 * lo
        while law.survival(hi) > target:
            lo = hi
            hi *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if law.survival(mid) <= target:
                hi = mid
            else:
                lo = mid
        return hi


def _gen_subtree(law, rng, cap, height_cap, budget):
    """Free subtree arrays, optionally rejected on {H >= height_cap}."""
    code, cdf, alpha, zeta_a = law.kernel_spec()
    for _ in range(budget):
        parent, depth, leaf, status = _kernels.gen_tree(
            rng, cap, height_cap, code, cdf, alpha, zeta_a, _TRAIL_LUT)
        if status == OK:
            return parent, depth
        if status == CAPPED:
            return None, None
        # HEIGHT_REJECT: redraw
    raise BudgetExceeded("subtree rejection budget exhausted")


def sample_height_conditioned(law: OffspringLaw, k: int, rng: np.random.Generator,
                              cap: int, subtree_budget: int = 10 ** 4
                              ) -> Union[Tree, CapExceeded]:
    """T | {H >= k} via the spine construction.

    The spine vertex at depth d (d < k) draws the pair indexed by the
    remaining height k - d; its A - 1 leftmost children carry subtrees
    conditioned on {H < k - d - 1}, the spine child comes next, and the
    remaining B - A children carry free copies.  The spine tip at depth k
    grows a free copy in place.  The result is numbered in depth-first
    preorder like every other sampler output.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if cap < k + 1:
        return CAP_EXCEEDED
    if k == 0:
        return sample_free(law, rng, cap)

    pair_samplers = {i: _SpinePairSampler(law, i) for i in range(1, k + 1)}

    # sampling pass: per spine depth, the conditioned left blocks and the
    # free right blocks; sizes are tracked so capping aborts early
    left_blocks: List[List[tuple]] = [[] for _ in range(k)]
    right_blocks: List[List[tuple]] = [[] for _ in range(k)]
    total = k + 1  # the spine itself, root and tip included
    for d in range(k):
        i = k - d
        a, b = pair_samplers[i].sample(rng)
        for _ in range(a - 1):
            sub_p, sub_d = _gen_subtree(law, rng, cap - total, i - 1, subtree_budget)
            if sub_p is None:
                return CAP_EXCEEDED
            left_blocks[d].append((sub_p, sub_d))
            total += sub_p.shape[0]
            if total > cap:
                return CAP_EXCEEDED
        for _ in range(b - a):
            sub_p, sub_d = _gen_subtree(law, rng, cap - total, -1, subtree_budget)
            if sub_p is None:
                return CAP_EXCEEDED
            right_blocks[d].append((sub_p, sub_d))
            total += sub_p.shape[0]
            if total > cap:
                return CAP_EXCEEDED
    tip_p, tip_d = _gen_subtree(law, rng, cap - total + 1, -1, subtree_budget)
    if tip_p is None:
        return CAP_EXCEEDED
    total += tip_p.shape[0] - 1  # tip vertex itself is already counted
    if total > cap:
        return CAP_EXCEEDED

    # emit pass, in preorder: spine vertex at depth d, then its left blocks,
    # then the next spine vertex's subtree; after the tip's free copy come
    # the right blocks, deepest spine vertex first
    parent = np.empty(total, dtype=np.int64)
    depth = np.empty(total, dtype=np.int64)
    pos = 0
    spine_at = np.empty(k + 1, dtype=np.int64)

    def put_block(sub_p, sub_d, attach_to, base_depth):
        nonlocal pos
        m = sub_p.shape[0]
        parent[pos] = attach_to
        if m > 1:
            parent[pos + 1:pos + m] = sub_p[1:] + pos
        depth[pos:pos + m] = sub_d + base_depth
        pos += m

    prev = -1
    for d in range(k + 1):
        parent[pos] = prev
        depth[pos] = d
        spine_at[d] = pos
        prev = pos
        pos += 1
        if d < k:
            for sub_p, sub_d in left_blocks[d]:
                put_block(sub_p, sub_d, spine_at[d], d + 1)
    if tip_p.shape[0] > 1:
        block = tip_p[1:].copy()
        root_children = block == 0
        block[root_children] = spine_at[k]
        block[~root_children] += pos - 1
        parent[pos:pos + block.shape[0]] = block
        depth[pos:pos + block.shape[0]] = tip_d[1:] + k
        pos += block.shape[0]
    for d in range(k - 1, -1, -1):
        for sub_p, sub_d in right_blocks[d]:
            put_block(sub_p, sub_d, spine_at[d], d + 1)
    if pos != total:
        raise AssertionError("spine assembly lost vertices")

    leaf = np.ones(total, dtype=np.bool_)
    leaf[parent[1:]] = False
    return Tree(parent=parent, depth=depth, leaf_flags=leaf)


def sample_height_rejection(law: OffspringLaw, k: int, rng: np.random.Generator,
                            cap: int, budget: int = 10 ** 6
                            ) -> Union[Tree, CapExceeded]:
    """Rejection oracle for T | {H >= k}: free draws kept when H >= k.

    Capped draws are returned as CAP_EXCEEDED so callers can apply the same
    {V <= cap} conditioning to both this oracle and the spine sampler.
    """
    for _ in range(budget):
        t = sample_free(law, rng, cap)
        if isinstance(t, CapExceeded):
            return CAP_EXCEEDED
        if t.height >= k:
            return t
    raise BudgetExceeded("height rejection budget exhausted")
