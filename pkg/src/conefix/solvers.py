"""
Monotone fixed-point engines on cone-ordered R^n.

Three engines are provided:

* :func:`iterate_increasing` for single-valued increasing maps started at a
  point below its image,
* :func:`iterate_setvalued` for isotone set-valued maps, choosing each
  successor among the values above the current iterate,
* :func:`iterate_decreasing` for decreasing self-maps of the cone, which
  builds the alternating orbit of the origin and certifies that the even
  iterates increase, the odd iterates decrease, and the two stay nested.

Monotonicity is certified along the computed orbit only. Supplied callables
must be pure: each engine run keeps all of its state local.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .delta_distance import PointSet, membership_residual, pairwise_distances
from .errors import ConeExitError, DomainNotClosedError, PreconditionError
from .order_core import ConeOrder, as_vector, leq, vector_norm

DEFAULT_TOL = 1e-10


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    ORDER_VIOLATION = "order_violation"
    H1_VIOLATION = "h1_violation"


class Selector(str, Enum):
    LEAST_UPPER_CANDIDATE = "least_upper_candidate"
    MIN_NORM_STEP = "min_norm_step"
    LEXICOGRAPHIC = "lexicographic"


@dataclass(frozen=True)
class IterationTrace:
    """Record of one engine run.

    ``residuals[k]`` and ``sandwich_widths[k]`` belong to the step producing
    ``iterates[k + 1]``; ``order_certified[k]`` certifies ``iterates[k]``
    against the iterates before it (the start point is certified by the
    engine's precondition check).
    """

    iterates: tuple
    residuals: tuple
    order_certified: tuple
    terminated_by: Termination
    tol: float
    sandwich_widths: Optional[tuple] = None
    violation_index: Optional[int] = None
    bound_checks: Optional[tuple] = None

    def __post_init__(self):
        if not self.iterates:
            raise ValueError("a trace holds at least one iterate")
        if len(self.residuals) != len(self.iterates) - 1:
            raise ValueError("one residual per step is required")

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    @property
    def converged(self) -> bool:
        return self.terminated_by is Termination.CONVERGED

    def to_csv(self, path) -> None:
        dim = len(self.iterates[0])
        header = ["iteration"] + [f"x{i}" for i in range(dim)] + ["residual", "order_certified", "sandwich_width"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for k, x in enumerate(self.iterates):
                residual = repr(self.residuals[k - 1]) if k else ""
                width = ""
                if self.sandwich_widths is not None and k:
                    width = repr(self.sandwich_widths[k - 1])
                w.writerow([k] + [repr(float(v)) for v in x] + [residual, str(self.order_certified[k]).lower(), width])


def _freeze(v):
    return tuple(float(c) for c in v)


@dataclass(frozen=True)
class FixedPointResult:
    point: np.ndarray
    trace: IterationTrace
    residual: float
    above_start: bool

    def to_json(self) -> dict:
        return {
            "point": list(_freeze(self.point)),
            "residual": self.residual,
            "terminated_by": self.trace.terminated_by.value,
            "iterations": self.trace.steps,
            "above_start": self.above_start,
            "violation_index": self.trace.violation_index,
        }


@dataclass(frozen=True)
class DecreasingResult:
    point: np.ndarray
    even_limit: np.ndarray
    odd_limit: np.ndarray
    h1_gap: float
    trace: IterationTrace
    residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "point": list(_freeze(self.point)),
            "even_limit": list(_freeze(self.even_limit)),
            "odd_limit": list(_freeze(self.odd_limit)),
            "h1_gap": self.h1_gap,
            "residual": self.residual,
            "terminated_by": self.trace.terminated_by.value,
            "iterations": self.trace.steps,
            "violation_index": self.trace.violation_index,
        }


def write_json(payload: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# single-valued increasing maps


def iterate_increasing(F: Callable, x0, cone: ConeOrder, tol: float = DEFAULT_TOL,
                       max_iter: int = 1000, norm: str = "sup") -> FixedPointResult:
    """Picard iteration ``x_{n+1} = F(x_n)`` for an increasing map.

    Requires ``x0 <= F(x0)``. Every step certifies ``x_n <= x_{n+1}``; the
    run converges once a step moves by at most ``tol`` and the last iterate
    also satisfies ``||F(x) - x|| <= tol``. The last iterate is returned, so
    it bounds every stored iterate from above.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    x = as_vector(x0, cone.dimension)
    fx = as_vector(F(x), cone.dimension)
    if not leq(x, fx, cone):
        raise PreconditionError("start point is not below its image: x0 <= F(x0) fails")

    iterates, residuals, certs = [x], [], [True]
    status, bad = Termination.MAX_ITER, None
    for n in range(max_iter):
        nxt = fx
        ok = leq(x, nxt, cone)
        step = vector_norm(nxt - x, norm)
        iterates.append(nxt)
        residuals.append(step)
        certs.append(ok)
        if not ok:
            # keep the last certified iterate as the answer
            status, bad = Termination.ORDER_VIOLATION, n + 1
            break
        x = nxt
        fx = as_vector(F(x), cone.dimension)
        if step <= tol and vector_norm(fx - x, norm) <= tol:
            status = Termination.CONVERGED
            break

    trace = IterationTrace(tuple(iterates), tuple(residuals), tuple(certs), status, tol,
                           violation_index=bad)
    return FixedPointResult(x, trace, vector_norm(fx - x, norm), leq(iterates[0], x, cone))


# ---------------------------------------------------------------------------
# set-valued isotone maps


def _lex_key(w):
    return tuple(float(c) for c in w)


def _select(candidates: list, x: np.ndarray, selector: Selector, cone: ConeOrder, norm: str):
    if selector is Selector.LEXICOGRAPHIC:
        return min(candidates, key=_lex_key)
    if selector is Selector.MIN_NORM_STEP:
        return min(candidates, key=lambda w: (vector_norm(w - x, norm), _lex_key(w)))
    minimal = [w for w in candidates
               if not any(leq(u, w, cone) and np.any(u != w) for u in candidates)]
    return min(minimal, key=_lex_key)


def _upper_candidates(x, S: PointSet, cone):
    return [as_vector(w) for w in S.points if leq(x, w, cone)]


def iterate_setvalued(T: Callable, x0, cone: ConeOrder, tol: float = DEFAULT_TOL,
                      max_iter: int = 1000, selector: Union[str, Selector] = Selector.LEXICOGRAPHIC,
                      norm: str = "sup") -> FixedPointResult:
    """Build ``x_{n+1} in T(x_n)`` with ``x_n <= x_{n+1}`` until ``x_n`` is (nearly) in ``T(x_n)``.

    ``T`` may be a :class:`FiniteSetValuedMap` or any callable returning a
    :class:`PointSet` or a (k, d) array. Each residual is the distance from
    the new iterate to its own value set. ``tol=0`` asks for exact
    membership, which is the right choice on integer grids.
    """
    selector = Selector(selector)
    if tol < 0 or max_iter < 1:
        raise ValueError("tol must be nonnegative and max_iter at least 1")

    def values(p):
        S = T(p)
        return S if isinstance(S, PointSet) else PointSet(np.asarray(S, dtype=float), norm)

    x = as_vector(x0, cone.dimension)
    S = values(x)
    if not _upper_candidates(x, S, cone):
        raise PreconditionError("no value above the start point: need x1 in T(x0) with x0 <= x1")

    iterates, residuals, certs = [x], [], [True]
    res = membership_residual(x, S)
    status, bad = (Termination.CONVERGED if res <= tol else Termination.MAX_ITER), None
    if status is not Termination.CONVERGED:
        for n in range(max_iter):
            ups = _upper_candidates(x, S, cone)
            if not ups:
                status, bad = Termination.ORDER_VIOLATION, n
                break
            x = _select(ups, x, selector, cone, S.norm)
            S = values(x)
            res = membership_residual(x, S)
            iterates.append(x)
            residuals.append(res)
            certs.append(True)
            if res <= tol:
                status = Termination.CONVERGED
                break

    trace = IterationTrace(tuple(iterates), tuple(residuals), tuple(certs), status, tol,
                           violation_index=bad)
    return FixedPointResult(x, trace, res, leq(iterates[0], x, cone))


# ---------------------------------------------------------------------------
# decreasing self-maps of the cone


def _cone_map(F, cone):
    def ev(x, index):
        y = as_vector(F(x), cone.dimension)
        if not cone.contains(y):
            raise ConeExitError(index, y)
        return y
    return ev


def _sandwich_ok(xs: list, k: int, cone: ConeOrder) -> bool:
    """Certify the newest iterate ``xs[k]`` against the two before it."""
    if k < 2:
        return True
    if k % 2 == 0:
        return leq(xs[k - 2], xs[k], cone) and leq(xs[k], xs[k - 1], cone)
    return leq(xs[k], xs[k - 2], cone) and leq(xs[k - 1], xs[k], cone)


def iterate_decreasing(F: Callable, cone: ConeOrder, tol: float = DEFAULT_TOL,
                       max_iter: int = 10_000, norm: str = "sup") -> DecreasingResult:
    """Alternating orbit ``x_n = F^n(0)`` of a decreasing map ``F: K -> K``.

    Stops when the gap between the newest even and odd iterates is at most
    ``tol``; the newest even iterate is returned as the fixed point. If the
    gap never closes the run ends with ``h1_violation``: the even and odd
    subsequences approach a genuine 2-cycle of ``F``.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    ev = _cone_map(F, cone)
    theta = as_vector(np.zeros(cone.dimension))
    x1 = ev(theta, 1)
    xs = [theta, x1]
    certs = [True, True]
    widths = [vector_norm(x1 - theta, norm)]
    status, bad = Termination.MAX_ITER, None

    if np.all(x1 == theta):
        # F(0) = 0 forces F(K) = {0}
        status = Termination.CONVERGED
    elif widths[0] <= tol:
        status = Termination.CONVERGED
    else:
        for k in range(2, max_iter + 1):
            xk = ev(xs[-1], k)
            xs.append(xk)
            ok = _sandwich_ok(xs, k, cone)
            certs.append(ok)
            widths.append(vector_norm(xk - xs[k - 1], norm))
            if not ok:
                status, bad = Termination.ORDER_VIOLATION, k
                break
            if widths[-1] <= tol:
                status = Termination.CONVERGED
                break
            if k >= 3 and np.all(xk == xs[k - 2]) and np.all(xs[k - 1] == xs[k - 3]):
                # orbit is exactly periodic with distinct even and odd limits
                status = Termination.H1_VIOLATION
                break
        else:
            status = Termination.H1_VIOLATION

    good = len(xs) if bad is None else bad
    last = good - 1
    even = xs[last] if last % 2 == 0 else xs[last - 1]
    odd = xs[last] if last % 2 == 1 else xs[last - 1]
    trace = IterationTrace(tuple(xs), tuple(widths), tuple(certs), status, tol,
                           sandwich_widths=tuple(widths), violation_index=bad)
    residual = vector_norm(as_vector(F(even), cone.dimension) - even, norm)
    return DecreasingResult(even, even, odd, vector_norm(odd - even, norm), trace, residual)


def sandwich_violations(trace: IterationTrace, cone: ConeOrder) -> list:
    """Every ``n`` for which ``x_2n <= x_2n+2 <= x_2n+3 <= x_2n+1`` fails on stored iterates."""
    xs = trace.iterates
    bad = []
    n = 0
    while 2 * n + 3 < len(xs):
        a, b, c, d = xs[2 * n], xs[2 * n + 2], xs[2 * n + 3], xs[2 * n + 1]
        if not (leq(a, b, cone) and leq(b, c, cone) and leq(c, d, cone)):
            bad.append(n)
        n += 1
    # a trailing x_2n+2 without its odd partner still has to sit in [x_2n, x_2n+1]
    if len(xs) >= 3 and len(xs) % 2 == 1:
        k = len(xs) - 1
        if not (leq(xs[k - 2], xs[k], cone) and leq(xs[k], xs[k - 1], cone)):
            bad.append((k - 2) // 2)
    return bad


def track_arbitrary_start(F: Callable, z, reference: DecreasingResult, cone: ConeOrder,
                          lam: float = 1.0, tol: float = DEFAULT_TOL, max_iter: int = 10_000,
                          norm: str = "sup") -> IterationTrace:
    """Follow ``y_n = F^{n+1}(z)`` against the reference orbit of the origin.

    Each ``y_n`` must interlace the reference orbit (even ``n``:
    ``x_n <= y_n <= x_{n+1}``; odd ``n``: ``x_{n+1} <= y_n <= x_n``), and
    ``bound_checks[n]`` records the normality bound
    ``||y_n - lower|| <= lam * ||upper - lower||`` on that bracket.
    The trace runs as long as the reference orbit does (capped by
    ``max_iter``) and is marked converged when its last iterate lies within
    ``lam * final width + tol`` of ``reference.point``.
    """
    if lam < 1.0:
        raise ValueError("a normal constant is at least 1")
    if not reference.trace.converged:
        raise PreconditionError("reference run did not converge")
    y = as_vector(z, cone.dimension)
    if not cone.contains(y):
        raise ConeExitError(0, y)
    ev = _cone_map(F, cone)
    xs = reference.trace.iterates
    steps = min(max_iter, len(xs) - 1)

    ys, certs, bounds = [], [], []
    status, bad = Termination.MAX_ITER, None
    for n in range(steps):
        y = ev(y, n + 1)
        lower, upper = (xs[n], xs[n + 1]) if n % 2 == 0 else (xs[n + 1], xs[n])
        ok = leq(lower, y, cone) and leq(y, upper, cone)
        ys.append(y)
        certs.append(ok)
        bounds.append(vector_norm(y - lower, norm) <= lam * vector_norm(upper - lower, norm))
        if not ok:
            status, bad = Termination.ORDER_VIOLATION, n
            break
    else:
        final_width = reference.trace.residuals[-1] if reference.trace.residuals else 0.0
        if vector_norm(ys[-1] - reference.point, norm) <= lam * final_width + tol:
            status = Termination.CONVERGED

    residuals = tuple(vector_norm(ys[k + 1] - ys[k], norm) for k in range(len(ys) - 1))
    return IterationTrace(tuple(ys), residuals, tuple(certs), status, tol,
                          violation_index=bad, bound_checks=tuple(bounds))


# ---------------------------------------------------------------------------
# 2-cycle conditions


@dataclass(frozen=True)
class H1Check:
    holds: bool
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.holds


def check_h1(F: Callable, candidates, tol: float = DEFAULT_TOL,
             cone: Optional[ConeOrder] = None) -> H1Check:
    """Search ``candidates`` for a pair with ``F(u) = v``, ``F(v) = u`` and ``u != v`` (all up to ``tol``)."""
    C = candidates if isinstance(candidates, PointSet) else PointSet(np.asarray(candidates, dtype=float))
    if cone is not None:
        for p in C.points:
            if not cone.contains(p):
                raise ConeExitError(-1, p)
    images = PointSet(np.array([as_vector(F(p), C.dimension) for p in C.points]), C.norm)
    D = pairwise_distances(images, C)  # D[i, j] = ||F(u_i) - u_j||
    close = D <= tol
    mutual = np.argwhere(close & close.T)
    spread = pairwise_distances(C, C)
    for i, j in mutual:
        if spread[i, j] > tol:
            return H1Check(False, (C.points[i].copy(), C.points[j].copy()))
    return H1Check(True)


@dataclass(frozen=True)
class H2Report:
    fixed: frozenset
    fixed_of_square: frozenset
    two_cycles: tuple
    h1_holds: bool
    h2_holds: bool

    @property
    def equivalent(self) -> bool:
        return self.h1_holds == self.h2_holds


def check_h2_equivalence(domain: Iterable[Hashable], F: Union[Mapping, Callable]) -> H2Report:
    """Exact comparison of Fix(F) with Fix(F o F) on a finite domain, together with all 2-cycles."""
    elems = list(dict.fromkeys(domain))
    f = F.__getitem__ if isinstance(F, Mapping) else F
    image = {}
    members = set(elems)
    for a in elems:
        b = f(a)
        if b not in members:
            raise DomainNotClosedError(a, b)
        image[a] = b
    fixed = frozenset(a for a in elems if image[a] == a)
    fixed_sq = frozenset(a for a in elems if image[image[a]] == a)
    order = {a: i for i, a in enumerate(elems)}
    cycles = tuple((a, image[a]) for a in elems
                   if image[a] != a and image[image[a]] == a and order[a] < order[image[a]])
    return H2Report(fixed, fixed_sq, cycles, h1_holds=not cycles, h2_holds=fixed == fixed_sq)


# ---------------------------------------------------------------------------
# finite set-valued maps on box lattices


def box_lattice(shape: Sequence[int]) -> np.ndarray:
    """Integer grid points ``{0..s_1-1} x ... x {0..s_d-1}`` in lexicographic order."""
    return np.array(list(product(*(range(int(s)) for s in shape))), dtype=float)


class FiniteSetValuedMap:
    """A set-valued map on an explicit finite domain of points.

    ``values`` maps each domain point (as a tuple of floats) to a nonempty
    PointSet contained in the domain.
    """

    def __init__(self, domain, values: Mapping, norm: str = "sup"):
        dom = np.array(domain, dtype=float)
        if dom.ndim == 1:
            dom = dom.reshape(-1, 1)
        self.domain = dom + 0.0
        self.domain.flags.writeable = False
        self.norm = norm
        keys = [_freeze(p) for p in self.domain]
        if len(set(keys)) != len(keys):
            raise ValueError("domain points must be distinct")
        members = set(keys)
        self._values = {}
        given = {_freeze(np.atleast_1d(np.asarray(k, dtype=float))): v for k, v in values.items()}
        for key in keys:
            if key not in given:
                raise ValueError(f"no value given for domain point {key}")
            S = given[key]
            S = S if isinstance(S, PointSet) else PointSet(np.asarray(S, dtype=float).reshape(-1, dom.shape[1]), norm)
            for p in S.points:
                if _freeze(p) not in members:
                    raise DomainNotClosedError(key, _freeze(p))
            self._values[key] = S

    @classmethod
    def from_rule(cls, domain, rule: Callable, norm: str = "sup") -> "FiniteSetValuedMap":
        dom = np.array(domain, dtype=float)
        if dom.ndim == 1:
            dom = dom.reshape(-1, 1)
        return cls(dom, {_freeze(p): rule(p.copy()) for p in dom}, norm)

    @property
    def dimension(self) -> int:
        return self.domain.shape[1]

    def __call__(self, x) -> PointSet:
        return self._values[_freeze(as_vector(x, self.dimension))]

    def items(self):
        for p in self.domain:
            yield p, self._values[_freeze(p)]

    def is_isotone(self, cone: ConeOrder) -> bool:
        """Brute-force check that ``x <= y`` gives every value at ``x`` a value above it at ``y``."""
        for x, Sx in self.items():
            for y, Sy in self.items():
                if not leq(x, y, cone):
                    continue
                for z in Sx.points:
                    if not any(leq(z, w, cone) for w in Sy.points):
                        return False
        return True

    def to_json(self) -> dict:
        return {
            "domain": [list(_freeze(p)) for p in self.domain],
            "values": [[list(_freeze(q)) for q in self._values[_freeze(p)].points] for p in self.domain],
            "norm": self.norm,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "FiniteSetValuedMap":
        dom = payload["domain"]
        vals = payload["values"]
        if len(dom) != len(vals):
            raise ValueError("domain and values lists differ in length")
        return cls(dom, {tuple(map(float, np.atleast_1d(p))): v for p, v in zip(dom, vals)},
                   payload.get("norm", "sup"))


@dataclass(frozen=True)
class PosetAnalysis:
    """Fixed points of a finite map with their maximal and minimal elements.

    The point collections are (k, d) arrays; k is 0 when there is no fixed
    point, which a PointSet cannot represent.
    """

    fixed_points: np.ndarray
    maximal: np.ndarray
    minimal: np.ndarray

    @property
    def is_nonempty(self) -> bool:
        return self.fixed_points.shape[0] > 0

    def to_json(self) -> dict:
        return {
            "fixed_points": [list(_freeze(p)) for p in self.fixed_points],
            "maximal": [list(_freeze(p)) for p in self.maximal],
            "minimal": [list(_freeze(p)) for p in self.minimal],
            "is_nonempty": self.is_nonempty,
        }


def enumerate_fixed_points(T: FiniteSetValuedMap, cone: ConeOrder) -> PosetAnalysis:
    fixed = [p for p, S in T.items() if p in S]

    def strictly_below(p, q):
        return leq(p, q, cone) and np.any(p != q)

    maximal = [p for p in fixed if not any(strictly_below(p, q) for q in fixed)]
    minimal = [p for p in fixed if not any(strictly_below(q, p) for q in fixed)]
    d = T.dimension

    def pack(rows):
        return np.array(rows, dtype=float).reshape(-1, d)

    return PosetAnalysis(pack(fixed), pack(maximal), pack(minimal))
