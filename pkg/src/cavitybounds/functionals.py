"""Lift/drag functionals of a wetted-arc velocity distribution.

A velocity distribution is the dimensionless speed ratio ``u(sigma) = v / v0``
along one arc of the wetted surface, ``sigma`` running over [0, 1] from the
stagnation point. Two nonlinear functionals of ``u`` determine the forces::

    I[u] = -int_0^1 u log u dsigma
    J[u] = -int_0^1 u log u / sqrt(P(sigma)) dsigma,   P(sigma) = int_0^sigma u

and, with ``eps`` the fraction of the arc ahead of the stagnation point,

    C_L = 2 ((1 - eps) I[u2] - eps I[u1])
    C_D = (sqrt(1 - eps) J[u2] + sqrt(eps) J[u1])**2 / (2 pi)

The same functionals in terms of ``lam(sigma) = sqrt(2 P(sigma))`` read::

    I = -int lam lam' log(lam lam'),   J = -sqrt(2) int lam' log(lam lam')

Near ``sigma = 0`` the divisor of ``J`` behaves like ``sqrt(u(0) sigma)``, so
the ``J`` integrals are taken in ``t`` with ``sigma = t**2``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import (
    BrillouinViolationError,
    DegenerateDistributionError,
    DomainError,
    InvalidDistributionError,
)

SQRT2 = math.sqrt(2.0)
MIN_TABULATED_POINTS = 8
CSV_HEADER = ("sigma", "u")

# probe for an initial interval on which u vanishes
_DEGENERACY_PROBE = 1e-10


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for functional evaluation.

    ``tol_I`` and ``tol_J`` are the absolute accuracies requested from the
    adaptive quadrature; ``brillouin_tol`` is the slack above ``u = 1`` still
    treated as boundary contact.
    """

    tol_I: float = 1e-10
    tol_J: float = 1e-8
    brillouin_tol: float = 1e-12
    limit: int = 500


DEFAULT_CONFIG = QuadratureConfig()


def xlogx(u):
    """``u log u`` with the continuous extension 0 at ``u = 0``."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)
    return out if out.ndim else float(out)


def _check_grid(sigma, values, name):
    sigma = np.asarray(sigma, dtype=float)
    values = np.asarray(values, dtype=float)
    if sigma.ndim != 1 or sigma.shape != values.shape:
        raise InvalidDistributionError(f"{name}: sigma and values must be 1-D arrays of equal length")
    if sigma.size < MIN_TABULATED_POINTS:
        raise InvalidDistributionError(
            f"{name}: need at least {MIN_TABULATED_POINTS} grid points, got {sigma.size}"
        )
    if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(values))):
        raise InvalidDistributionError(f"{name}: non-finite samples")
    if sigma[0] != 0.0 or sigma[-1] != 1.0:
        raise InvalidDistributionError(f"{name}: grid must start at sigma=0 and end at sigma=1")
    if np.any(np.diff(sigma) <= 0):
        raise InvalidDistributionError(f"{name}: sigma must be strictly increasing")
    return sigma, values


def _interior(points):
    return tuple(float(p) for p in sorted(set(points)) if 0.0 < p < 1.0)


def _probe_grid(breakpoints=(), knots=None):
    grid = np.linspace(0.0, 1.0, 2049)
    extra = list(breakpoints)
    if knots is not None:
        extra.extend(knots)
    if extra:
        grid = np.union1d(grid, np.asarray(extra, dtype=float))
    return grid


@dataclass(frozen=True, eq=False)
class VelocityDistribution:
    """Speed ratio ``u(sigma)`` on [0, 1].

    Either a closed form (``func`` plus, when known, its running integral
    ``primitive``) or a tabulated grid interpolated by a monotone piecewise
    cubic. ``breakpoints`` lists interior points where ``u`` is not smooth;
    they are handed to the quadrature.
    """

    func: Callable[[np.ndarray], np.ndarray]
    primitive: Callable[[np.ndarray], np.ndarray] | None = None
    breakpoints: tuple[float, ...] = ()
    sigma: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, s):
        return self.func(np.asarray(s, dtype=float))

    @property
    def is_tabulated(self):
        return self.sigma is not None

    def running_integral(self, s):
        """``P(sigma) = int_0^sigma u``."""
        if self.primitive is not None:
            return self.primitive(np.asarray(s, dtype=float))
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s_arr)
        for i, upper in enumerate(s_arr):
            pts = [p for p in self.breakpoints if 0.0 < p < upper]
            out[i] = integrate.quad(
                lambda x: float(self.func(np.asarray(x))),
                0.0,
                upper,
                points=pts or None,
                epsabs=1e-14,
                epsrel=1e-13,
                limit=200,
            )[0]
        return out if np.ndim(s) else float(out[0])

    @classmethod
    def constant(cls, value):
        value = float(value)
        return cls(
            func=lambda s: np.full_like(np.asarray(s, dtype=float), value),
            primitive=lambda s: value * np.asarray(s, dtype=float),
        )

    @classmethod
    def from_function(cls, func, primitive=None, breakpoints=()):
        return cls(func=func, primitive=primitive, breakpoints=_interior(breakpoints))

    @classmethod
    def tabulated(cls, sigma, u):
        sigma, u = _check_grid(sigma, u, "velocity distribution")
        if np.any(u < 0):
            raise InvalidDistributionError("velocity distribution: negative samples")
        interp = PchipInterpolator(sigma, u, extrapolate=False)
        antider = interp.antiderivative()
        return cls(
            func=lambda s: interp(np.clip(s, 0.0, 1.0)),
            primitive=lambda s: antider(np.clip(s, 0.0, 1.0)),
            breakpoints=_interior(sigma),
            sigma=sigma,
            values=u,
        )

    def sample(self, n=2001):
        """Values on ``n`` uniform points plus the breakpoints, for export."""
        grid = np.union1d(np.linspace(0.0, 1.0, n), self.breakpoints)
        return grid, np.asarray(self(grid), dtype=float)


@dataclass(frozen=True, eq=False)
class LambdaFunction:
    """Monotone ``lam(sigma)`` with ``lam(0) = 0`` and its derivative."""

    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()
    sigma: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, s):
        return self.func(np.asarray(s, dtype=float))

    def derivative(self, s):
        return self.deriv(np.asarray(s, dtype=float))

    @classmethod
    def from_functions(cls, func, deriv, breakpoints=()):
        return cls(func=func, deriv=deriv, breakpoints=_interior(breakpoints))

    @classmethod
    def tabulated(cls, sigma, lam):
        sigma, lam = _check_grid(sigma, lam, "lambda function")
        if np.any(np.diff(lam) < 0):
            raise InvalidDistributionError("lambda function: values must be non-decreasing")
        interp = PchipInterpolator(sigma, lam, extrapolate=False)
        d_interp = interp.derivative()
        return cls(
            func=lambda s: interp(np.clip(s, 0.0, 1.0)),
            deriv=lambda s: d_interp(np.clip(s, 0.0, 1.0)),
            breakpoints=_interior(sigma),
            sigma=sigma,
            values=lam,
        )


def _validate_u(u: VelocityDistribution):
    grid = _probe_grid(u.breakpoints, u.sigma)
    vals = np.asarray(u(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InvalidDistributionError("velocity distribution: non-finite samples")
    if np.any(vals < -1e-14):
        raise InvalidDistributionError("velocity distribution: negative samples")


def _validate_lambda(lam: LambdaFunction, tol=1e-12):
    grid = _probe_grid(lam.breakpoints, lam.sigma)
    vals = np.asarray(lam(grid), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        dvals = np.asarray(lam.derivative(grid[1:]), dtype=float)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(dvals))):
        raise InvalidDistributionError("lambda function: non-finite samples")
    if abs(vals[0]) > tol:
        raise InvalidDistributionError(f"lambda function: lam(0) = {vals[0]!r}, expected 0")
    if np.any(dvals < -tol) or np.any(np.diff(vals) < -tol):
        raise InvalidDistributionError("lambda function: not monotone (lam' < 0 somewhere)")


def _quad(f, a, b, points, tol, config):
    pts = [p for p in points if a < p < b]
    limit = max(config.limit, 4 * len(pts) + 50)
    val, err = integrate.quad(
        f, a, b, points=pts or None, epsabs=tol * 1e-2, epsrel=1e-12, limit=limit
    )
    if not math.isfinite(val):
        raise InvalidDistributionError("quadrature produced a non-finite value")
    return val


def eval_I(u: VelocityDistribution, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``I[u] = -int_0^1 u log u dsigma``."""
    _validate_u(u)
    return -_quad(lambda s: xlogx(u(s)), 0.0, 1.0, u.breakpoints, config.tol_I, config)


def _check_nondegenerate(u: VelocityDistribution):
    if not u.running_integral(_DEGENERACY_PROBE) > 0.0:
        raise DegenerateDistributionError(
            "degenerate distribution: u vanishes on an initial interval, "
            "so sqrt(int_0^sigma u) is zero there"
        )


def eval_J(u: VelocityDistribution, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``J[u]``, integrated in ``t = sqrt(sigma)`` to absorb the endpoint singularity."""
    _validate_u(u)
    _check_nondegenerate(u)

    def integrand(t):
        s = t * t
        num = xlogx(u(s))
        if num == 0.0:
            return 0.0
        p = float(u.running_integral(s))
        if p <= 0.0:
            raise DegenerateDistributionError(f"degenerate distribution: zero running integral at sigma={s:g}")
        return -num / math.sqrt(p) * 2.0 * t

    tpoints = [math.sqrt(p) for p in u.breakpoints]
    return _quad(integrand, 0.0, 1.0, tpoints, config.tol_J, config)


def eval_I_lambda(lam: LambdaFunction, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    _validate_lambda(lam)

    def integrand(s):
        return xlogx(float(lam(s)) * float(lam.derivative(s)))

    return -_quad(integrand, 0.0, 1.0, lam.breakpoints, config.tol_I, config)


def eval_J_lambda(lam: LambdaFunction, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    _validate_lambda(lam)

    def integrand(t):
        s = t * t
        dl = float(lam.derivative(s))
        w = float(lam(s)) * dl
        if w <= 0.0:
            return 0.0
        # lam'(t^2) * 2t stays bounded where lam ~ sqrt(sigma)
        return dl * 2.0 * t * math.log(w)

    tpoints = [math.sqrt(p) for p in lam.breakpoints]
    return -SQRT2 * _quad(integrand, 0.0, 1.0, tpoints, config.tol_J, config)


def lambda_from_u(u: VelocityDistribution) -> LambdaFunction:
    """``lam = sqrt(2 int_0^sigma u)``, ``lam' = u / lam``."""
    _validate_u(u)

    def func(s):
        return np.sqrt(2.0 * np.maximum(u.running_integral(s), 0.0))

    def deriv(s):
        lam = func(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(lam > 0, u(s) / np.where(lam > 0, lam, 1.0), np.inf)

    return LambdaFunction(func=func, deriv=deriv, breakpoints=u.breakpoints)


def u_from_lambda(lam: LambdaFunction) -> VelocityDistribution:
    """``u = lam lam'``; the running integral is ``lam**2 / 2`` exactly."""
    _validate_lambda(lam)

    def func(s):
        s = np.asarray(s, dtype=float)
        lv = lam(s)
        with np.errstate(invalid="ignore"):
            out = lv * lam.derivative(s)
        # lam' may be infinite at sigma = 0 while lam = 0
        return np.where(lv == 0, np.where(np.isfinite(out), out, 0.0), out)

    def primitive(s):
        return 0.5 * np.asarray(lam(s), dtype=float) ** 2

    return VelocityDistribution(func=func, primitive=primitive, breakpoints=lam.breakpoints)


@dataclass(frozen=True)
class BrillouinReport:
    admissible: bool
    max_u: float
    sigma_at_max: float
    first_violation: float | None = None
    tolerance: float = DEFAULT_CONFIG.brillouin_tol

    def __str__(self):
        if self.admissible:
            return f"admissible (max u = {self.max_u:.10g} at sigma = {self.sigma_at_max:.10g})"
        return (
            f"violation: u > 1 from sigma = {self.first_violation:.10g} "
            f"(max u = {self.max_u:.10g} at sigma = {self.sigma_at_max:.10g})"
        )


def validate_brillouin(u: VelocityDistribution, config: QuadratureConfig = DEFAULT_CONFIG) -> BrillouinReport:
    """Check ``u <= 1`` on a dense probe grid (plus knots and breakpoints)."""
    grid = _probe_grid(u.breakpoints, u.sigma)
    vals = np.asarray(u(grid), dtype=float)
    imax = int(np.argmax(vals))
    bad = np.nonzero(vals > 1.0 + config.brillouin_tol)[0]
    return BrillouinReport(
        admissible=bad.size == 0,
        max_u=float(vals[imax]),
        sigma_at_max=float(grid[imax]),
        first_violation=float(grid[bad[0]]) if bad.size else None,
        tolerance=config.brillouin_tol,
    )


class Coefficients(NamedTuple):
    c_l: float
    c_d: float

    @property
    def kappa(self):
        if self.c_d == 0.0:
            return math.inf if self.c_l > 0 else (0.0 if self.c_l == 0 else -math.inf)
        return self.c_l / self.c_d


def coefficients_from_values(epsilon, i1, j1, i2, j2) -> Coefficients:
    """Lift and drag coefficients from the per-arc functional values."""
    c_l = 2.0 * ((1.0 - epsilon) * i2 - epsilon * i1)
    c_d = (math.sqrt(1.0 - epsilon) * j2 + math.sqrt(epsilon) * j1) ** 2 / (2.0 * math.pi)
    return Coefficients(c_l, c_d)


def assemble_coefficients(
    epsilon: float,
    u1: VelocityDistribution | None,
    u2: VelocityDistribution,
    config: QuadratureConfig = DEFAULT_CONFIG,
    check_brillouin: bool = True,
) -> Coefficients:
    """Assemble ``(C_L, C_D)`` from the two arc distributions.

    ``u1`` lives on the arc between the trailing edge A and the stagnation
    point O (fraction ``epsilon`` of the wetted length) and may be ``None``
    when ``epsilon == 0``.
    """
    if not (0.0 <= epsilon < 1.0) or not math.isfinite(epsilon):
        raise DomainError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    if u1 is None and epsilon > 0:
        raise DomainError("u1 is required when epsilon > 0")
    arcs = [("u2", u2)] + ([("u1", u1)] if u1 is not None else [])
    if check_brillouin:
        for name, dist in arcs:
            report = validate_brillouin(dist, config)
            if not report.admissible:
                raise BrillouinViolationError(f"{name}: {report}", report)
    i2, j2 = eval_I(u2, config), eval_J(u2, config)
    if u1 is None or epsilon == 0.0:
        i1 = j1 = 0.0
    else:
        i1, j1 = eval_I(u1, config), eval_J(u1, config)
    return coefficients_from_values(epsilon, i1, j1, i2, j2)


def read_distribution_csv(path) -> VelocityDistribution:
    """Read a ``sigma,u`` CSV into a tabulated distribution."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
        raise InvalidDistributionError(f"{path}: expected header 'sigma,u'")
    try:
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:]], dtype=float)
    except (ValueError, IndexError) as exc:
        raise InvalidDistributionError(f"{path}: malformed row ({exc})") from None
    if any(len(r) != 2 for r in rows[1:]):
        raise InvalidDistributionError(f"{path}: every row must have exactly two columns")
    if data.size == 0:
        raise InvalidDistributionError(f"{path}: no data rows")
    return VelocityDistribution.tabulated(data[:, 0], data[:, 1])


def format_number(x):
    return f"{x + 0.0:.10g}"


def distribution_csv_text(sigma, u) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s, v in zip(np.asarray(sigma, dtype=float), np.asarray(u, dtype=float)):
        writer.writerow((format_number(s), format_number(v)))
    return buf.getvalue()


def write_distribution_csv(path, sigma, u):
    Path(path).write_text(distribution_csv_text(sigma, u), encoding="utf-8", newline="\n")
