"""
Cone-induced partial orders on R^n.

A closed convex pointed cone K induces the order ``x <= y  iff  y - x in K``.
Orthant cones are lattices and have a closed-form normal constant of 1 for
the sup, euclidean and l1 norms; custom cones are opaque membership
predicates whose cone axioms can only be spot-checked on samples.

All comparisons are exact coordinate comparisons. Tolerances belong to the
convergence tests of the engines, never to the order predicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatchError, NotAChainError

NORMS = ("sup", "euclidean", "l1")


class ConeKind(str, Enum):
    ORTHANT = "orthant"
    WEIGHTED_ORTHANT = "weighted_orthant"
    CUSTOM = "custom"


def as_vector(x, dimension: Optional[int] = None) -> np.ndarray:
    """Return ``x`` as a read-only 1-D float array, checking its length."""
    v = np.array(x, dtype=float, ndmin=1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if dimension is not None and v.shape[0] != dimension:
        raise DimensionMismatchError(dimension, v.shape[0])
    # -0.0 and 0.0 compare equal but differ bitwise; keep a single zero
    v = v + 0.0
    v.flags.writeable = False
    return v


def row_norms(diffs, norm: str = "sup") -> np.ndarray:
    """Norm of every vector along the last axis of ``diffs``."""
    d = np.asarray(diffs, dtype=float)
    a = np.abs(d)
    if norm == "sup":
        return np.max(a, axis=-1)
    if norm == "l1":
        return np.sum(a, axis=-1)
    if norm == "euclidean":
        # plain sum of squares is monotone under rounding; rescale only where
        # it under- or overflows so that nonzero vectors never get norm 0
        with np.errstate(over="ignore", under="ignore"):
            s = np.sum(d * d, axis=-1)
        m = np.max(a, axis=-1)
        bad = ((s == 0.0) & (m > 0.0)) | (np.isinf(s) & np.isfinite(m))
        out = np.sqrt(s)
        if np.any(bad):
            scaled = d[bad] / m[bad][..., None]
            out[bad] = m[bad] * np.sqrt(np.sum(scaled * scaled, axis=-1))
        return out
    raise ValueError(f"unknown norm {norm!r}; expected one of {NORMS}")


def vector_norm(v, norm: str = "sup") -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(row_norms(v.reshape(1, -1), norm)[0])


@dataclass(frozen=True)
class ConeOrder:
    """Descriptor of a closed convex cone in R^dimension.

    Use the :meth:`orthant`, :meth:`weighted_orthant` and :meth:`custom`
    constructors rather than building instances by hand.
    """

    dimension: int
    kind: ConeKind = ConeKind.ORTHANT
    weights: Optional[tuple] = None
    predicate: Optional[Callable[[np.ndarray], bool]] = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise ValueError("cone dimension must be a positive integer")
        if self.kind is ConeKind.WEIGHTED_ORTHANT:
            if self.weights is None or len(self.weights) != self.dimension:
                raise ValueError("weighted orthant needs one weight per coordinate")
            if not all(w > 0 and np.isfinite(w) for w in self.weights):
                raise ValueError("orthant weights must be positive and finite")
        if self.kind is ConeKind.CUSTOM and self.predicate is None:
            raise ValueError("custom cone needs a membership predicate")

    @classmethod
    def orthant(cls, dimension: int) -> "ConeOrder":
        return cls(int(dimension), ConeKind.ORTHANT)

    @classmethod
    def weighted_orthant(cls, weights: Sequence[float]) -> "ConeOrder":
        w = tuple(float(v) for v in weights)
        return cls(len(w), ConeKind.WEIGHTED_ORTHANT, weights=w)

    @classmethod
    def custom(cls, dimension: int, predicate: Callable[[np.ndarray], bool]) -> "ConeOrder":
        return cls(int(dimension), ConeKind.CUSTOM, predicate=predicate)

    @classmethod
    def from_config(cls, config: dict) -> "ConeOrder":
        """Build an orthant-type cone from a config mapping.

        Custom cones cannot be expressed in a config file since their
        membership is an arbitrary callable.
        """
        kind = config.get("kind", "orthant")
        if kind == "orthant":
            return cls.orthant(config["dimension"])
        if kind == "weighted_orthant":
            cone = cls.weighted_orthant(config["weights"])
            if "dimension" in config and config["dimension"] != cone.dimension:
                raise DimensionMismatchError(config["dimension"], cone.dimension, "weights")
            return cone
        raise ValueError(f"cone kind {kind!r} cannot be built from a config file")

    @property
    def is_lattice(self) -> bool:
        return self.kind is not ConeKind.CUSTOM

    def contains(self, x) -> bool:
        """Membership of ``x`` in the cone."""
        v = as_vector(x, self.dimension)
        if self.kind is ConeKind.ORTHANT:
            return bool(np.all(v >= 0.0))
        if self.kind is ConeKind.WEIGHTED_ORTHANT:
            return bool(np.all(np.asarray(self.weights) * v >= 0.0))
        return bool(self.predicate(v))


def leq(x, y, cone: ConeOrder) -> bool:
    """``x <= y`` in the order induced by ``cone``, i.e. ``y - x`` is in the cone."""
    xv = as_vector(x, cone.dimension)
    yv = as_vector(y, cone.dimension)
    if cone.kind is not ConeKind.CUSTOM:
        # coordinatewise test avoids rounding in the subtraction
        return bool(np.all(xv <= yv))
    return cone.contains(yv - xv)


@dataclass(frozen=True)
class OrderInterval:
    lower: np.ndarray
    upper: np.ndarray
    cone: ConeOrder

    def __post_init__(self):
        lo = as_vector(self.lower, self.cone.dimension)
        hi = as_vector(self.upper, self.cone.dimension)
        if not leq(lo, hi, self.cone):
            raise ValueError("interval lower end is not below its upper end")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


def interval_contains(interval: OrderInterval, x) -> bool:
    return leq(interval.lower, x, interval.cone) and leq(x, interval.upper, interval.cone)


def chain_sup(chain, cone: ConeOrder) -> np.ndarray:
    """Supremum of a finite chain, which is its greatest element.

    Raises NotAChainError naming the first incomparable pair found.
    """
    points = [as_vector(p, cone.dimension) for p in chain]
    if not points:
        raise ValueError("chain must be nonempty")
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if not (leq(points[i], points[j], cone) or leq(points[j], points[i], cone)):
                raise NotAChainError(i, j)
    top = points[0]
    for p in points[1:]:
        if leq(top, p, cone):
            top = p
    return top


@dataclass(frozen=True)
class NormalityEstimate:
    lambda_lower_bound: float
    samples_used: int
    analytic_value: Optional[float] = None


def _sample_in_cone(cone: ConeOrder, rng: np.random.Generator, max_tries: int = 10_000) -> np.ndarray:
    if cone.kind is not ConeKind.CUSTOM:
        return rng.uniform(0.0, 1.0, cone.dimension) * rng.exponential(1.0)
    for _ in range(max_tries):
        v = rng.standard_normal(cone.dimension)
        if cone.contains(v):
            return v
    raise ValueError("could not draw a point of the custom cone by rejection sampling")


def estimate_normality_constant(cone: ConeOrder, norm: str = "sup", samples: int = 1000,
                                seed: int = 0) -> NormalityEstimate:
    """Lower bound on the normal constant from random pairs ``0 <= x <= y``.

    Pairs are drawn as ``x = a`` and ``y = a + b`` with ``a, b`` in the cone,
    so ``0 <= x <= y`` holds by construction.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        x = _sample_in_cone(cone, rng)
        y = x + _sample_in_cone(cone, rng)
        ny = vector_norm(y, norm)
        if ny > 0.0:
            best = max(best, vector_norm(x, norm) / ny)
    analytic = 1.0 if cone.kind is not ConeKind.CUSTOM else None
    return NormalityEstimate(best, samples, analytic)


def validate_cone_axioms(cone: ConeOrder, samples: int = 200, seed: int = 0) -> list:
    """Spot-check the cone axioms; returns a list of violation descriptions.

    Checks 0 in K, closure under addition and nonnegative scaling, and
    pointedness on random members.
    """
    rng = np.random.default_rng(seed)
    problems = []
    zero = np.zeros(cone.dimension)
    if not cone.contains(zero):
        problems.append("zero vector is not a member")
    for _ in range(samples):
        try:
            a = _sample_in_cone(cone, rng)
            b = _sample_in_cone(cone, rng)
        except ValueError as exc:
            problems.append(str(exc))
            break
        t = rng.exponential(2.0)
        if not cone.contains(a + b):
            problems.append(f"not closed under addition: {a!r} + {b!r}")
        if not cone.contains(t * a):
            problems.append(f"not closed under scaling by {t}: {a!r}")
        if np.any(a != 0.0) and cone.contains(-a):
            problems.append(f"not pointed: both {a!r} and its negative are members")
    return problems
