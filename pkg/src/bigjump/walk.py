"""Tree-indexed random walk evaluation.

Attaches one iid step to every non-root vertex, accumulates the path sums
S_v = S_parent + X_v in a single pass, and reports the six maxima together
with the big-jump discrepancy

    delta = max(|S_max - X_max|, |S^L_max - X_max|,
                |[S]_max - [X]_max|, |[S^L]_max - [X]_max|)

where [.] denotes the absolute-value maxima.  Maxima over all vertices
include the root (S_root = 0, the empty sum); leaf maxima run over leaves;
step maxima run over non-root vertices only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .heavytail import StepLaw
from .treegen import Tree

__all__ = [
    "WalkSummary",
    "BigJumpEvents",
    "IntegrityError",
    "run_walk",
    "run_walk_with_steps",
    "truncated_prefix_sums",
    "big_jump_events",
]


class IntegrityError(AssertionError):
    """A runtime check embedded in an experiment failed."""


@dataclass(frozen=True)
class WalkSummary:
    s_max: float
    sL_max: float
    sabs_max: float
    sLabs_max: float
    x_max: float
    xabs_max: float
    delta: float

    def __post_init__(self):
        if self.sL_max > self.s_max + 1e-12:
            raise IntegrityError("leaf maximum exceeded the vertex maximum")
        if self.sLabs_max > self.sabs_max + 1e-12:
            raise IntegrityError("leaf |S| maximum exceeded the vertex |S| maximum")
        if self.s_max < 0 or self.sabs_max < self.s_max - 1e-12:
            raise IntegrityError("root contribution S = 0 violated")

    @classmethod
    def from_maxima(cls, s_max, sL_max, sabs_max, sLabs_max, x_max, xabs_max):
        delta = max(
            abs(s_max - x_max),
            abs(sL_max - x_max),
            abs(sabs_max - xabs_max),
            abs(sLabs_max - xabs_max),
        )
        return cls(s_max, sL_max, sabs_max, sLabs_max, x_max, xabs_max, delta)

    def to_json(self) -> str:
        return json.dumps(
            {
                "s_max": self.s_max,
                "sL_max": self.sL_max,
                "sabs_max": self.sabs_max,
                "sLabs_max": self.sLabs_max,
                "x_max": self.x_max,
                "xabs_max": self.xabs_max,
                "delta": self.delta,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "WalkSummary":
        d = json.loads(text)
        return cls(**d)


@dataclass(frozen=True)
class BigJumpEvents:
    g1: bool
    g2: bool


def _check_steps(tree: Tree, steps) -> np.ndarray:
    steps = np.ascontiguousarray(steps, dtype=np.float64)
    if steps.shape != (tree.size_total - 1,):
        raise ValueError(
            f"need one step per non-root vertex: expected {tree.size_total - 1}, "
            f"got {steps.shape}")
    return steps


def run_walk_with_steps(tree: Tree, steps) -> WalkSummary:
    """Deterministic core: evaluate the walk for a given step vector.

    ``steps[i - 1]`` is the step of vertex i (vertex-index order).
    """
    if tree.size_total < 2:
        raise ValueError("walk maxima need at least one non-root vertex")
    steps = _check_steps(tree, steps)
    maxima = _kernels.walk_maxima(tree.parent, tree.leaf_flags, steps)
    return WalkSummary.from_maxima(*maxima)


def run_walk(tree: Tree, law: StepLaw, rng: np.random.Generator) -> WalkSummary:
    """Draw one step per non-root vertex (in vertex-index order) and evaluate."""
    if tree.size_total < 2:
        raise ValueError("walk maxima need at least one non-root vertex")
    steps = law.sample(rng, tree.size_total - 1)
    return run_walk_with_steps(tree, steps)


def truncated_prefix_sums(tree: Tree, steps, z: float) -> np.ndarray:
    """S_v^(z), the path sums over steps with |X| <= z; S_root^(z) = 0."""
    if z < 0:
        raise ValueError("z must be >= 0")
    steps = _check_steps(tree, steps)
    return _kernels.trunc_prefix_sums(tree.parent, steps, float(z))


def big_jump_events(tree: Tree, steps, z: float, y: float) -> BigJumpEvents:
    """The proof events: G1 (no two |X| > z on one branch), G2 (|S^(z)| <= y).

    When both hold, the implication delta <= y is asserted at runtime.
    """
    if z < 0 or y < 0:
        raise ValueError("z and y must be >= 0")
    steps = _check_steps(tree, steps)
    g1 = bool(_kernels.chain_exceed_ok(tree.parent, steps, float(z)))
    g2 = bool(_kernels.trunc_absmax(tree.parent, steps, float(z)) <= y)
    if g1 and g2 and tree.size_total >= 2:
        summary = run_walk_with_steps(tree, steps)
        if summary.delta > y:
            raise IntegrityError(
                f"delta = {summary.delta} exceeded y = {y} on G1 and G2")
    return BigJumpEvents(g1=g1, g2=g2)
