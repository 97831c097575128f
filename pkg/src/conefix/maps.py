"""Builtin example maps available to the command line, by engine."""

from __future__ import annotations

import numpy as np

from .solvers import FiniteSetValuedMap, box_lattice


def affine_halfway(x):
    return (x + 2.0) / 2.0


def capped_increment(x):
    return np.minimum(x + 0.5, np.array([3.0, 2.0]))


def c_over_1px(c=2.0):
    c = float(c)

    def F(x):
        return c / (1.0 + x)
    return F


def designed_two_cycle(x):
    """``1/x`` with ``F(0) = 2``: the orbit of 0 is 0, 2, 1/2, 2, 1/2, ..."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 2.0, 1.0 / safe)


def zero_map(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def grid_step(size=3):
    """On {0..size-1}^2: stay, or step by one along either axis (capped at the top)."""
    top = float(size) - 1.0

    def rule(x):
        return [x, np.minimum(x + [1.0, 0.0], top), np.minimum(x + [0.0, 1.0], top)]
    return FiniteSetValuedMap.from_rule(box_lattice((size, size)), rule)


def grid_step_strict(size=3):
    """Like :func:`grid_step` without the option of staying put.

    Fixed points are exactly the points with a coordinate at the top.
    """
    top = float(size) - 1.0

    def rule(x):
        return [np.minimum(x + [1.0, 0.0], top), np.minimum(x + [0.0, 1.0], top)]
    return FiniteSetValuedMap.from_rule(box_lattice((size, size)), rule)


def identity_grid(size=3):
    return FiniteSetValuedMap.from_rule(box_lattice((size, size)), lambda x: [x])


# name -> (factory taking keyword parameters, dimension, default start)
INCREASING = {
    "affine_halfway": (lambda: affine_halfway, 1, [0.0]),
    "capped_increment": (lambda: capped_increment, 2, [0.0, 0.0]),
}

DECREASING = {
    "c_over_1px": (c_over_1px, 1),
    "designed_two_cycle": (lambda: designed_two_cycle, 1),
    "zero_map": (lambda: zero_map, 1),
}

SETVALUED = {
    "grid_step": grid_step,
    "grid_step_strict": grid_step_strict,
    "identity_grid": identity_grid,
}
