"""Drag and lift-to-drag bounds at a prescribed lift coefficient.

The lower drag bound is analytic: all of the wetted arc lies behind the
stagnation point and carries the J-minimising distribution, so
``C_Dmin = J_min(C_L/2)**2 / (2 pi)``.

The upper bound needs a split of the arc::

    C_Dmax = max (sqrt(1-eps) J_max(q2) + sqrt(eps) J_max(q1))**2 / (2 pi)
    s.t.     (1-eps) q2 - eps q1 = C_L / 2,  0 <= q1, q2 <= 1/e,  0 <= eps < 1

``q2`` is eliminated through the equality, leaving a 2-D region in
``(eps, q1)``. It is scanned on a grid (with ``J_max`` read off a dense
table) and the best cells are refined by Nelder-Mead on the exact
objective. Refinement works in unit-square coordinates ``(t1, t2)``::

    eps = t1 * eps_hi,   q1 = t2 * q1_hi(eps)

which maps the square onto the feasible region.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, DomainError
from .extremals import (
    B_LINEAR,
    B_MAX_HI,
    Q_MAX,
    J_max_curve,
    J_min_curve,
    j_max_of_b,
    q_max_branch,
)
from .functionals import format_number

C_L_MAX = 2.0 / math.e
C_D_AT_C_L_MAX = 2.0 / (math.pi * math.e)
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SplitSpec:
    """Arc split ``eps = l1/l`` and the values of I on the two arcs."""

    epsilon: float
    q1: float
    q2: float

    def lift(self):
        return 2.0 * ((1.0 - self.epsilon) * self.q2 - self.epsilon * self.q1)

    def constraint_residual(self, c_l):
        return abs((1.0 - self.epsilon) * self.q2 - self.epsilon * self.q1 - 0.5 * c_l)

    def is_feasible(self, c_l, tol=1e-10):
        return (
            0.0 <= self.epsilon < 1.0
            and -tol <= self.q1 <= Q_MAX + tol
            and -tol <= self.q2 <= Q_MAX + tol
            and self.constraint_residual(c_l) <= tol
        )


@dataclass(frozen=True)
class BoundPoint:
    c_l: float
    c_d_min: float
    c_d_max: float
    kappa_max: float
    kappa_min: float
    split: SplitSpec


@dataclass(frozen=True)
class FlatPlatePoint:
    alpha: float
    c_l: float
    c_d: float
    kappa: float


@dataclass(frozen=True)
class DragMaxConfig:
    """Settings of the C_Dmax search."""

    grid: int = 200
    n_starts: int = 5
    eps_cap: float = 1.0 - 1e-6
    xatol: float = 1e-10
    fatol: float = 1e-14
    maxiter: int = 4000


DEFAULT_DRAG_MAX = DragMaxConfig()


def _check_c_l(c_l):
    if not math.isfinite(c_l) or not (0.0 < c_l <= C_L_MAX * (1 + 4e-16)):
        raise DomainError(f"C_L must lie in (0, 2/e], got {c_l!r}; the maximum lift coefficient is 2/e")


def _is_max_lift(c_l):
    return math.isclose(c_l, C_L_MAX, rel_tol=4e-16, abs_tol=0.0)


def c_d_min(c_l: float) -> float:
    _check_c_l(c_l)
    if _is_max_lift(c_l):
        return C_D_AT_C_L_MAX
    return J_min_curve(0.5 * c_l) ** 2 / TWO_PI


def kappa_max(c_l: float) -> float:
    return c_l / c_d_min(c_l)


# ---------------------------------------------------------------------------
# C_Dmax
# ---------------------------------------------------------------------------


def _j_max_ext(q):
    """J_max extended by its limit 0 at q = 0 (u = 1 on the arc)."""
    if q <= 0.0:
        return 0.0
    return J_max_curve(min(q, Q_MAX))


@lru_cache(maxsize=1)
def _j_max_table():
    lower = np.geomspace(1e-12, B_LINEAR, 4000, endpoint=False)
    upper = np.linspace(B_LINEAR, B_MAX_HI, 4000)
    bs = np.concatenate([lower, upper])
    qs = np.array([q_max_branch(b) for b in bs])
    js = np.array([j_max_of_b(b) for b in bs])
    return np.concatenate([[0.0], qs]), np.concatenate([[0.0], js])


def _j_max_fast(q):
    qs, js = _j_max_table()
    return np.interp(q, qs, js)


def drag_objective(c_l, epsilon, q1):
    """``(sqrt(1-eps) J_max(q2) + sqrt(eps) J_max(q1))**2 / (2 pi)`` with q2 from the constraint."""
    q2 = (0.5 * c_l + epsilon * q1) / (1.0 - epsilon)
    val = math.sqrt(1.0 - epsilon) * _j_max_ext(q2) + math.sqrt(epsilon) * _j_max_ext(q1)
    return val * val / TWO_PI


def _eps_hi(c_l, cfg):
    return min(cfg.eps_cap, 1.0 - 0.5 * math.e * c_l)


def _q1_hi(c_l, eps):
    if eps <= 0.0:
        return Q_MAX
    return max(0.0, min(Q_MAX, ((1.0 - eps) / math.e - 0.5 * c_l) / eps))


def _to_split(c_l, t, cfg):
    t1, t2 = np.clip(t, 0.0, 1.0)
    eps = float(t1) * _eps_hi(c_l, cfg)
    q1 = float(t2) * _q1_hi(c_l, eps)
    q2 = min(Q_MAX, (0.5 * c_l + eps * q1) / (1.0 - eps))
    return SplitSpec(eps, q1, q2)


def _to_unit(c_l, epsilon, q1, cfg):
    hi = _eps_hi(c_l, cfg)
    t1 = epsilon / hi if hi > 0 else 0.0
    q1h = _q1_hi(c_l, epsilon)
    t2 = q1 / q1h if q1h > 0 else 0.0
    return np.clip([t1, t2], 0.0, 1.0)


def _grid_starts(c_l, cfg):
    eps = np.linspace(0.0, cfg.eps_cap, cfg.grid)[:, None]
    q1 = np.linspace(0.0, Q_MAX, cfg.grid)[None, :]
    q2 = (0.5 * c_l + eps * q1) / (1.0 - eps)
    feasible = q2 <= Q_MAX
    val = np.sqrt(1.0 - eps) * _j_max_fast(np.minimum(q2, Q_MAX)) + np.sqrt(eps) * _j_max_fast(q1)
    val = np.where(feasible, val, -np.inf)
    order = np.argsort(val, axis=None)[::-1]
    starts = []
    for flat in order[: cfg.n_starts]:
        i, j = np.unravel_index(flat, val.shape)
        if not np.isfinite(val[i, j]):
            break
        starts.append((float(eps[i, 0]), float(q1[0, j])))
    return starts


def _refine(c_l, start, cfg):
    def neg(t):
        sp = _to_split(c_l, t, cfg)
        outside = float(np.sum((np.clip(t, 0.0, 1.0) - t) ** 2))
        return -drag_objective(c_l, sp.epsilon, sp.q1) + outside

    t0 = _to_unit(c_l, *start, cfg)
    res = optimize.minimize(
        neg,
        t0,
        method="Nelder-Mead",
        options={"xatol": cfg.xatol, "fatol": cfg.fatol, "maxiter": cfg.maxiter},
    )
    split = _to_split(c_l, res.x, cfg)
    return drag_objective(c_l, split.epsilon, split.q1), split, res


def c_d_max(
    c_l: float, config: DragMaxConfig = DEFAULT_DRAG_MAX, start: tuple[float, float] | None = None
) -> tuple[float, SplitSpec]:
    """Largest drag coefficient at lift ``c_l`` and the split achieving it.

    With ``start = (eps, q1)`` the grid scan is skipped and a single local
    refinement runs from that point.
    """
    _check_c_l(c_l)
    return _c_d_max(c_l, config, start)


def _c_d_max(c_l, config, start=None):
    if _is_max_lift(c_l):
        return C_D_AT_C_L_MAX, SplitSpec(0.0, 0.0, Q_MAX)
    starts = [start] if start is not None else _grid_starts(c_l, config)
    if not starts:
        raise ConvergenceError(f"C_Dmax: no feasible grid cell at C_L={c_l!r}", {"grid": config.grid})
    runs = [_refine(c_l, s, config) for s in starts]
    best = max(runs, key=lambda r: r[0])
    if not any(r[2].success for r in runs):
        raise ConvergenceError(
            f"C_Dmax: Nelder-Mead did not converge at C_L={c_l!r}",
            {"messages": [r[2].message for r in runs], "best": best[0], "split": best[1]},
        )
    return best[0], best[1]


def random_feasible_start(c_l: float, rng: np.random.Generator, config: DragMaxConfig = DEFAULT_DRAG_MAX):
    """A uniformly drawn point of the unit square mapped into the feasible (eps, q1) region."""
    sp = _to_split(c_l, rng.uniform(0.0, 1.0, 2), config)
    return sp.epsilon, sp.q1


def kappa_min(c_l: float, config: DragMaxConfig = DEFAULT_DRAG_MAX) -> float:
    return c_l / c_d_max(c_l, config)[0]


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


def bound_point(c_l: float, config: DragMaxConfig = DEFAULT_DRAG_MAX) -> BoundPoint:
    lo = c_d_min(c_l)
    hi, split = c_d_max(c_l, config)
    return BoundPoint(c_l, lo, hi, c_l / lo, c_l / hi, split)


def bound_points(c_l_values, config: DragMaxConfig = DEFAULT_DRAG_MAX, workers: int = 1) -> list[BoundPoint]:
    """Rows for the given lift coefficients, in input order."""
    values = [float(c) for c in c_l_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(bound_point, values, [config] * len(values)))
    return [bound_point(c, config) for c in values]


def bound_curve(n: int, config: DragMaxConfig = DEFAULT_DRAG_MAX, workers: int = 1) -> list[BoundPoint]:
    """``n`` rows at ``C_L = (2/e) i / n``, ``i = 1..n``."""
    if n < 2:
        raise DomainError(f"need n >= 2 curve points, got {n}")
    return bound_points([C_L_MAX * i / n for i in range(1, n + 1)], config, workers)


BOUNDS_CSV_HEADER = ("c_l", "c_d_min", "c_d_max", "kappa_max", "kappa_min", "epsilon", "q1", "q2")
FLAT_PLATE_CSV_HEADER = ("alpha", "c_l", "c_d", "kappa")


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(x) for x in row])
    return buf.getvalue()


def bounds_csv_text(points) -> str:
    return _csv_text(
        BOUNDS_CSV_HEADER,
        (
            (p.c_l, p.c_d_min, p.c_d_max, p.kappa_max, p.kappa_min, p.split.epsilon, p.split.q1, p.split.q2)
            for p in points
        ),
    )


def flat_plate_csv_text(points) -> str:
    return _csv_text(FLAT_PLATE_CSV_HEADER, ((p.alpha, p.c_l, p.c_d, p.kappa) for p in points))


# ---------------------------------------------------------------------------
# Rayleigh flat plate
# ---------------------------------------------------------------------------


def flat_plate(alpha: float) -> FlatPlatePoint:
    """Rayleigh's infinite-cavity coefficients for a plate at incidence ``alpha`` (radians)."""
    if not math.isfinite(alpha) or not (0.0 < alpha <= 0.5 * math.pi):
        raise DomainError(f"alpha must lie in (0, pi/2], got {alpha!r}")
    sa = math.sin(alpha)
    denom = 4.0 + math.pi * sa
    c_d = TWO_PI * sa * sa / denom
    if alpha == 0.5 * math.pi:
        c_l, kappa = 0.0, 0.0
    else:
        c_l = math.pi * math.sin(2.0 * alpha) / denom
        kappa = 1.0 / math.tan(alpha)
    return FlatPlatePoint(alpha, c_l, c_d, kappa)


def flat_plate_curve(n: int) -> list[FlatPlatePoint]:
    """``n`` points at ``alpha = (pi/2) i / n``, ``i = 1..n``."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    return [flat_plate(0.5 * math.pi * i / n) for i in range(1, n + 1)]


class Band(str, enum.Enum):
    BELOW_MIN = "below_min"
    BETWEEN = "between"
    ABOVE_MAX = "above_max"


def classify_point(c_l: float, c_d: float, tol: float = 1e-9, config: DragMaxConfig = DEFAULT_DRAG_MAX) -> Band:
    """Position of ``(c_l, c_d)`` relative to the drag band at ``c_l``.

    ``c_l = 0`` (a plate broadside to the stream) is compared with the band's
    zero-lift limit: ``C_Dmin -> 0`` and ``C_Dmax`` from the same maximisation
    with the constraint ``(1-eps) q2 = eps q1``.
    """
    if c_l == 0.0:
        lo = 0.0
    else:
        lo = c_d_min(c_l)
    if c_d < lo - tol:
        return Band.BELOW_MIN
    hi, _ = _c_d_max(c_l, config) if c_l == 0.0 else c_d_max(c_l, config)
    if c_d > hi + tol:
        return Band.ABOVE_MAX
    return Band.BETWEEN
