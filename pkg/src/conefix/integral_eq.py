"""
Singular nonlinear integral equation on [0, 1].

The equation

    1 = Psi(x) + Psi(x) * int_0^1 R(x, y) / (x^2 - y^2) * Psi(x) dy

is rewritten with ``psi = 1/Psi - 1`` as the fixed-point problem
``psi = F(psi)``, where

    (F psi)(x) = g(x) / (1 + psi(x)),   g(x) = int_0^1 R(x, y) / (x^2 - y^2) dy.

Under the sign condition on R (R >= 0 below the diagonal, R <= 0 above) g is
nonnegative, F maps the nonnegative cone into itself and reverses the
pointwise order, so the decreasing engine applies. Because psi enters only
through psi(x), the fixed point solves psi (1 + psi) = g pointwise, which
gives a closed-form check on every solution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import KernelValidationError, NegativeCoordinateError, QuadratureError
from .order_core import ConeOrder
from .solvers import DEFAULT_TOL, DecreasingResult, Termination, iterate_decreasing


class Quadrature(str, Enum):
    MIDPOINT_DIAGONAL_SKIP = "midpoint_diagonal_skip"
    DIAGONAL_LIMIT_SUBSTITUTION = "diagonal_limit_substitution"


@dataclass(frozen=True)
class GridFunction:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        vals = np.array(self.values, dtype=float)
        if grid.shape != vals.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        grid.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)


def uniform_grid(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


@dataclass(frozen=True)
class IntegralProblem:
    """Kernel ``R(x, y)`` with its growth data and the discretization.

    ``kernel`` is called with broadcastable numpy arrays. ``diagonal_limit``
    gives ``lim_{y -> x} R(x, y) / (x^2 - y^2)`` and is required by the
    ``diagonal_limit_substitution`` rule. ``s_bound`` optionally declares a
    bound on the function S of the growth condition.
    """

    kernel: Callable
    nu: float
    M: float
    grid_size: int = 257
    quadrature: Quadrature = Quadrature.MIDPOINT_DIAGONAL_SKIP
    diagonal_limit: Optional[Callable] = field(default=None, compare=False)
    s_bound: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        if int(self.grid_size) < 3:
            raise ValueError("grid_size must be at least 3")
        if not (self.nu > 0 and self.M > 0):
            raise ValueError("nu and M must be positive")
        object.__setattr__(self, "quadrature", Quadrature(self.quadrature))
        if self.quadrature is Quadrature.DIAGONAL_LIMIT_SUBSTITUTION and self.diagonal_limit is None:
            raise ValueError("diagonal_limit_substitution needs a diagonal_limit callable")

    @property
    def grid(self) -> np.ndarray:
        return uniform_grid(self.grid_size)


def _eval_kernel(kernel, X, Y):
    R = np.asarray(kernel(X, Y), dtype=float)
    return np.broadcast_to(R, np.broadcast(X, Y).shape)


# ---------------------------------------------------------------------------
# kernel conditions

GROWTH_BLOWUP = 1e3


@dataclass(frozen=True)
class KernelReport:
    sign_violations: list
    growth_violations: list
    s_bound: float
    samples: int

    @property
    def ok(self) -> bool:
        return not self.sign_violations and not self.growth_violations


def _blows_up(values) -> bool:
    v = np.abs(np.asarray(values, dtype=float))
    if not np.all(np.isfinite(v)):
        return True
    coarse = v[: max(1, len(v) // 4)].max()
    return v[-1] > GROWTH_BLOWUP * max(coarse, 1.0)


def validate_kernel(problem: IntegralProblem, samples: int = 2000, seed: int = 0) -> KernelReport:
    """Check the sign and growth conditions of the kernel on random samples.

    Sign: ``R(x, y) >= 0`` for ``x >= y`` and ``R(x, y) <= 0`` for ``x < y``.

    Growth: the ratio ``|R| / (M |x - y|^nu)`` estimates S. It must not exceed
    ``problem.s_bound`` when one is declared. Without a declared bound, S has
    to stay bounded: the ratio is followed towards the diagonal at a few
    sample abscissae, and ``R / (x + y)`` towards the origin. Ratios that grow
    by more than ``GROWTH_BLOWUP`` over the approach are reported.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, samples)
    y = rng.uniform(0.0, 1.0, samples)
    R = _eval_kernel(problem.kernel, x, y)

    sign_bad = ((x >= y) & (R < 0)) | ((x < y) & (R > 0))
    sign_violations = [(float(a), float(b), float(r)) for a, b, r in zip(x[sign_bad], y[sign_bad], R[sign_bad])]

    growth = []
    dist = np.abs(x - y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(R) / (problem.M * dist ** problem.nu)
    ratio = np.where((dist == 0) & (R == 0), 0.0, ratio)
    for a, b, r in zip(x[~np.isfinite(ratio)], y[~np.isfinite(ratio)], ratio[~np.isfinite(ratio)]):
        growth.append({"x": float(a), "y": float(b), "ratio": float(r), "reason": "nonzero on the diagonal"})
    finite = ratio[np.isfinite(ratio)]
    s_bound = float(finite.max()) if finite.size else 0.0

    if problem.s_bound is not None:
        over = np.isfinite(ratio) & (ratio > problem.s_bound)
        for a, b, r in zip(x[over], y[over], ratio[over]):
            growth.append({"x": float(a), "y": float(b), "ratio": float(r), "reason": "exceeds declared S bound"})

    steps = 2.0 ** -np.arange(4, 44, 4)
    for x0 in x[: min(samples, 16)]:
        sgn = 1.0 if x0 < 0.5 else -1.0
        ys = x0 + sgn * steps
        Rd = _eval_kernel(problem.kernel, np.full_like(ys, x0), ys)
        rd = np.abs(Rd) / (problem.M * steps ** problem.nu)
        if _blows_up(rd):
            growth.append({"x": float(x0), "y": float(ys[-1]), "ratio": float(rd[-1]),
                           "reason": "unbounded towards the diagonal"})
    t = steps
    for a, b in ((t, 0.5 * t), (0.5 * t, t)):
        r0 = _eval_kernel(problem.kernel, a, b) / (a + b)
        if _blows_up(r0):
            growth.append({"x": float(a[-1]), "y": float(b[-1]), "ratio": float(r0[-1]),
                           "reason": "R/(x+y) unbounded at the origin"})

    return KernelReport(sign_violations, growth, s_bound, samples)


# ---------------------------------------------------------------------------
# quadrature and operator


def _cell_weights(n: int) -> np.ndarray:
    h = 1.0 / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def compute_g(problem: IntegralProblem, tol: float = DEFAULT_TOL) -> GridFunction:
    """``g(x_i) = int_0^1 R(x_i, y) / (x_i^2 - y^2) dy`` on the uniform grid.

    Every node owns a cell (width h, h/2 at the ends) and contributes its
    integrand value times the cell width. The diagonal node y = x_i, which
    for x_i = 0 is also the origin, is singular. With the default rule its
    cell is integrated under the local model ``f(y) ~ a |x_i - y|^(nu - 1)``,
    with ``a`` fitted to the neighbouring nodes. With
    ``diagonal_limit_substitution`` the supplied limit value replaces it.

    Values in (-tol, 0) are rounding noise and are set to 0. Anything more
    negative contradicts the sign condition and raises QuadratureError.
    """
    x = problem.grid
    n = x.size
    h = 1.0 / (n - 1)
    X, Y = np.meshgrid(x, x, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        f = _eval_kernel(problem.kernel, X, Y) / (X * X - Y * Y)
    diag = np.eye(n, dtype=bool)
    bad = ~np.isfinite(f) & ~diag
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise QuadratureError(f"non-finite integrand at node x={x[i]!r}, y={x[j]!r}", node=(float(x[i]), float(x[j])))

    w = _cell_weights(n)
    off = np.where(diag, 0.0, f)
    g = off @ w

    if problem.quadrature is Quadrature.DIAGONAL_LIMIT_SUBSTITUTION:
        lim = np.broadcast_to(np.asarray(problem.diagonal_limit(x), dtype=float), x.shape)
        if not np.all(np.isfinite(lim)):
            raise QuadratureError("diagonal limit is not finite")
        g = g + w * lim
    else:
        nu = problem.nu
        half = (0.5 * h) ** nu / nu
        for i in range(n):
            nbrs = [j for j in (i - 1, i + 1) if 0 <= j < n]
            a = np.mean([f[i, j] * h ** (1.0 - nu) for j in nbrs])
            g[i] += a * half * len(nbrs)

    if np.any(g < -tol):
        i = int(np.argmin(g))
        raise QuadratureError(f"g is negative at x={x[i]!r} ({g[i]!r}); the kernel breaks the sign condition",
                              node=(float(x[i]),))
    g = np.where(g < 0.0, 0.0, g)
    return GridFunction(x, g)


def apply_operator(psi: GridFunction, g: GridFunction) -> GridFunction:
    """``(F psi)(x) = g(x) / (1 + psi(x))``; reverses the pointwise order."""
    if psi.grid.shape != g.grid.shape or np.any(psi.grid != g.grid):
        raise ValueError("psi and g live on different grids")
    neg = np.flatnonzero(psi.values < 0)
    if neg.size:
        raise NegativeCoordinateError(int(neg[0]), float(psi.values[neg[0]]))
    return GridFunction(g.grid, g.values / (1.0 + psi.values))


def operator(g: GridFunction) -> Callable[[np.ndarray], np.ndarray]:
    """The fixed-point map on raw value vectors, as consumed by the engines."""
    def F(values):
        return apply_operator(GridFunction(g.grid, values), g).values
    return F


def closed_form_root(g) -> np.ndarray:
    """Nonnegative root of ``psi (1 + psi) = g``, written without cancellation."""
    g = np.asarray(g, dtype=float)
    return 2.0 * g / (1.0 + np.sqrt(1.0 + 4.0 * g))


@dataclass(frozen=True)
class IntegralSolution:
    psi: GridFunction
    Psi: GridFunction
    g: GridFunction
    residual: float
    analytic_gap: float
    result: DecreasingResult

    @property
    def iterations(self) -> int:
        return self.result.trace.steps

    @property
    def terminated_by(self) -> Termination:
        return self.result.trace.terminated_by

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "psi", "Psi", "g"])
            for row in zip(self.psi.grid, self.psi.values, self.Psi.values, self.g.values):
                w.writerow([repr(float(v)) for v in row])

    def summary(self) -> dict:
        return {
            "residual": self.residual,
            "analytic_gap": self.analytic_gap,
            "iterations": self.iterations,
            "terminated_by": self.terminated_by.value,
            "h1_gap": self.result.h1_gap,
            "grid_size": int(self.psi.grid.size),
        }


def solve(problem: IntegralProblem, tol: float = DEFAULT_TOL, max_iter: int = 10_000,
          validate: bool = True, samples: int = 2000, seed: int = 0) -> IntegralSolution:
    if validate:
        report = validate_kernel(problem, samples, seed)
        if not report.ok:
            raise KernelValidationError(report)
    g = compute_g(problem, tol)
    F = operator(g)
    res = iterate_decreasing(F, ConeOrder.orthant(g.grid.size), tol=tol, max_iter=max_iter)
    psi = res.point
    residual = float(np.max(np.abs(F(psi) - psi)))
    gap = float(np.max(np.abs(psi - closed_form_root(g.values))))
    return IntegralSolution(GridFunction(g.grid, psi), GridFunction(g.grid, 1.0 / (1.0 + psi)), g,
                            residual, gap, res)


# ---------------------------------------------------------------------------
# kernels


def _zero(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def _unit(x, y):
    return (x - y) * (x + y)


def _linear(x, y):
    return x * (x - y) * (x + y)


def _constant(x, y):
    return np.ones(np.broadcast(x, y).shape)


BUILTIN_KERNELS = {
    # name: (kernel, nu, M, diagonal limit of R/(x^2-y^2))
    "zero": (_zero, 1.0, 1.0, lambda x: np.zeros_like(x)),
    "separable_unit": (_unit, 1.0, 2.0, lambda x: np.ones_like(x)),
    "separable_linear": (_linear, 1.0, 2.0, lambda x: np.asarray(x, dtype=float)),
    "constant": (_constant, 1.0, 1.0, None),
}


def builtin_problem(name: str, grid_size: int = 257,
                    quadrature: Quadrature = Quadrature.MIDPOINT_DIAGONAL_SKIP) -> IntegralProblem:
    if name not in BUILTIN_KERNELS:
        raise KeyError(f"unknown kernel {name!r}; builtins are {sorted(BUILTIN_KERNELS)}")
    R, nu, M, lim = BUILTIN_KERNELS[name]
    return IntegralProblem(R, nu, M, grid_size, quadrature, diagonal_limit=lim, name=name)


class TabulatedKernel:
    """Kernel given by values on a rectangular (x, y) grid, bilinear in between."""

    def __init__(self, xs, ys, values):
        from scipy.interpolate import RegularGridInterpolator

        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (self.xs.size, self.ys.size):
            raise ValueError("table shape does not match its x and y grids")
        self._interp = RegularGridInterpolator((self.xs, self.ys), self.values)

    def __call__(self, x, y):
        X, Y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
        return self._interp(pts).reshape(X.shape)

    @classmethod
    def from_csv(cls, path) -> "TabulatedKernel":
        """Header row holds the y grid (after one leading cell); each row starts with its x."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        if len(rows) < 2:
            raise ValueError(f"{path}: need a header row and at least one data row")
        try:
            ys = [float(c) for c in rows[0][1:]]
        except ValueError as exc:
            raise ValueError(f"{path}: row 1: bad y grid value ({exc})") from None
        xs, table = [], []
        for r, row in enumerate(rows[1:], start=2):
            if len(row) != len(ys) + 1:
                raise ValueError(f"{path}: row {r} has {len(row)} columns, expected {len(ys) + 1}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                c = next(i for i, cell in enumerate(row, start=1) if not _is_float(cell))
                raise ValueError(f"{path}: row {r}, column {c}: not a number: {row[c - 1]!r}") from None
            xs.append(vals[0])
            table.append(vals[1:])
        return cls(xs, ys, table)


def _is_float(s) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False
