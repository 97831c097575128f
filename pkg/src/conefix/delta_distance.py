"""
The delta-distance between nonempty bounded sets and related residuals.

For finite point sets the closure of a set is the set itself, so delta is
the Hausdorff distance and is computed exactly by enumerating all pairs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .errors import DimensionMismatchError
from .order_core import NORMS, as_vector, row_norms


@dataclass(frozen=True, eq=False)
class PointSet:
    """A nonempty finite set of points in R^d paired with the norm used on it.

    ``points`` is stored as a read-only (k, d) array in the order given;
    duplicates are kept until :meth:`deduplicated` is called.
    """

    points: np.ndarray
    norm: str = "sup"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("a point set needs at least one point given as a (k, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}")
        pts = pts + 0.0  # fold -0.0 into 0.0 so bit equality matches value equality
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, x) -> bool:
        v = as_vector(x, self.dimension)
        return bool(np.any(np.all(self.points == v, axis=1)))

    def deduplicated(self) -> "PointSet":
        uniq = np.unique(self.points, axis=0)
        return PointSet(uniq, self.norm)

    def as_tuples(self) -> frozenset:
        return frozenset(tuple(p) for p in self.points.tolist())

    def union(self, other) -> "PointSet":
        other = _coerce(other, self.norm)
        _check_compatible(self, other)
        return PointSet(np.vstack([self.points, other.points]), self.norm)


def _coerce(S, norm="sup") -> PointSet:
    if isinstance(S, PointSet):
        return S
    return PointSet(np.asarray(S, dtype=float), norm)


def _check_compatible(A: PointSet, B: PointSet):
    if A.dimension != B.dimension:
        raise DimensionMismatchError(A.dimension, B.dimension, "point set")
    if A.norm != B.norm:
        raise ValueError(f"point sets use different norms: {A.norm!r} and {B.norm!r}")


def pairwise_distances(A: PointSet, B: PointSet) -> np.ndarray:
    """Matrix ``D[i, j] = ||a_i - b_j||``."""
    _check_compatible(A, B)
    diffs = A.points[:, None, :] - B.points[None, :, :]
    return row_norms(diffs, A.norm)


def directed_delta(A: PointSet, B: PointSet) -> float:
    """``sup_{a in A} inf_{b in B} ||a - b||``."""
    return float(np.max(np.min(pairwise_distances(A, B), axis=1)))


def delta(A: PointSet, B: PointSet) -> float:
    D = pairwise_distances(A, B)
    forward = np.max(np.min(D, axis=1))
    backward = np.max(np.min(D, axis=0))
    return float(max(forward, backward))


def membership_residual(x, S: PointSet) -> float:
    """Distance from ``x`` to the finite set ``S``; zero iff ``x`` is in ``S``."""
    S = _coerce(S)
    v = as_vector(x, S.dimension)
    return float(np.min(row_norms(S.points - v, S.norm)))


SetMap = Callable[[np.ndarray], Union[PointSet, np.ndarray]]


def delta_continuity_probe(T: SetMap, sequence, limit, tol: float = np.inf,
                           norm: str = "sup") -> list:
    """Values ``delta(T x_n, T x)`` along a sequence converging to ``x``.

    ``tol`` bounds the distance between the last element of ``sequence`` and
    ``limit``; it is only a sanity check on the caller's claim of convergence.
    """
    seq = [as_vector(s) for s in sequence]
    if not seq:
        raise ValueError("sequence must be nonempty")
    x = as_vector(limit, seq[0].shape[0])
    last = row_norms((seq[-1] - x)[None, :], norm)[0]
    if last > tol:
        raise ValueError(f"sequence does not approach the limit: last distance {last} > {tol}")
    Tx = _coerce(T(x), norm)
    return [delta(_coerce(T(s), norm), Tx) for s in seq]


def read_points_csv(path, norm: str = "sup") -> PointSet:
    """Read one point per row, coordinates as columns.

    Malformed cells raise ``ValueError`` naming the 1-based row and column.
    """
    rows = []
    with open(path, newline="") as fh:
        for r, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            values = []
            for c, cell in enumerate(row, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValueError(f"{path}: row {r}, column {c}: not a number: {cell!r}") from None
                if not np.isfinite(values[-1]):
                    raise ValueError(f"{path}: row {r}, column {c}: non-finite value")
            if rows and len(values) != len(rows[0]):
                raise ValueError(f"{path}: row {r} has {len(values)} columns, expected {len(rows[0])}")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no points")
    return PointSet(np.array(rows), norm)


def write_points_csv(S: PointSet, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for p in S.points:
            writer.writerow([repr(float(v)) for v in p])
