"""Scalar objectives over candidate images driving the planner.

The default cost is the mean absolute difference to a target image,
normalized by the element count H*W*3 so that a given threshold means the
same thing at any resolution. Costs are immutable once constructed and
must be deterministic; the planner checks this at startup.
"""

import numpy as np


def _check_same_shape(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def l1_cost(candidate, target):
    """Mean absolute per-element difference over all H*W*3 elements."""
    a, b = _check_same_shape(candidate, target)
    return float(np.abs(a - b).mean())


def l2_cost(candidate, target):
    """Mean squared per-element difference."""
    a, b = _check_same_shape(candidate, target)
    return float(((a - b) ** 2).mean())


def reward(prev_cost, new_cost):
    """Per-step reward: the reduction of the image cost."""
    return prev_cost - new_cost


class CostFn:
    """Callable scalar objective over images: cost(candidate) -> float >= 0."""

    name = "cost"

    def __call__(self, candidate):
        raise NotImplementedError


class TargetL1Cost(CostFn):
    name = "l1"

    def __init__(self, target):
        self.target = np.asarray(target, dtype=np.float64)

    def __call__(self, candidate):
        return l1_cost(candidate, self.target)


class TargetL2Cost(CostFn):
    name = "l2"

    def __init__(self, target):
        self.target = np.asarray(target, dtype=np.float64)

    def __call__(self, candidate):
        return l2_cost(candidate, self.target)


_REGISTRY = {
    "l1": TargetL1Cost,
    "l2": TargetL2Cost,
}


def register_cost(name, factory):
    """Register a cost plug-in: factory(target) -> CostFn."""
    _REGISTRY[name] = factory


def make_cost(name, target):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown cost {name!r}; registered: {sorted(_REGISTRY)}"
        ) from None
    return factory(target)
