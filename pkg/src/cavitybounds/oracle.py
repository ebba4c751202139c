"""Brute-force check of the extremal curves on a discretised problem.

``u`` is piecewise constant on ``N`` equal cells of [0, 1]. For that
interpolant both functionals are exact finite sums: ``I`` is the midpoint
rule, and since ``P(sigma)`` is linear on each cell with slope ``u_i``,

    J = -2 sum_i log(u_i) (sqrt(P_i) - sqrt(P_{i-1}))

The search works on ``u`` directly, where the constraint ``0 <= u <= 1`` is a
box. Each candidate move is pulled back onto ``I = q`` by sliding along the
segment towards ``u = 1/e`` (raises I) or ``u = 1`` (lowers I); ``I`` is
concave along either segment, so the crossing is unique.

Nothing here uses the closed-form extremals except as one of the starting
points.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConvergenceError, DomainError, InvalidDistributionError
from .extremals import Q_MAX, J_max_curve, J_min_curve, build_max_extremal, build_min_extremal
from .functionals import format_number

PENALTY = 1e3
INV_E = 1.0 / math.e


def tolerance(n: int) -> float:
    """Discretisation allowance ``5 / N`` when comparing with the continuous bounds."""
    return 5.0 / n


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise InvalidDistributionError("discrete distribution must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise InvalidDistributionError("discrete distribution: non-finite samples")
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise InvalidDistributionError("discrete distribution: samples must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def N(self):
        return self.values.size

    @property
    def sigma(self):
        return (np.arange(self.N) + 0.5) / self.N


def _batch_I(U):
    # 0 * log(tiny) = 0 reproduces the continuous extension of u log u
    return -np.mean(U * np.log(np.maximum(U, 1e-300)), axis=-1)


def _batch_J(U):
    n = U.shape[-1]
    P = np.cumsum(U, axis=-1) / n
    root = np.sqrt(np.concatenate([np.zeros(U.shape[:-1] + (1,)), P], axis=-1))
    logs = np.log(np.maximum(U, 1e-300))
    # a zero cell adds nothing to P, so its log never meets a nonzero increment
    return -2.0 * np.sum(logs * np.diff(root, axis=-1), axis=-1)


def discrete_I(d: DiscreteDistribution) -> float:
    return float(_batch_I(d.values))


def discrete_J(d: DiscreteDistribution) -> float:
    return float(_batch_J(d.values))


def _mix_root(U, q, target, g0, iters, ftol):
    """Illinois regula falsi for ``t`` with ``I((1-t) U + t target) = q``, row-wise."""

    def g(t):
        return _batch_I((1.0 - t)[:, None] * U + t[:, None] * target) - q

    lo, hi = np.zeros(len(U)), np.ones(len(U))
    glo, ghi = g0.copy(), g(hi)
    best_t, best_g = lo.copy(), g0.copy()
    side = np.zeros(len(U))
    for _ in range(iters):
        if np.all(np.abs(best_g) <= ftol):
            break
        denom = ghi - glo
        t = np.where(denom != 0, lo - glo * (hi - lo) / np.where(denom != 0, denom, 1.0), 0.5 * (lo + hi))
        t = np.clip(t, lo, hi)
        gt = g(t)
        closer = np.abs(gt) < np.abs(best_g)
        best_t, best_g = np.where(closer, t, best_t), np.where(closer, gt, best_g)
        same = np.sign(gt) == np.sign(glo)
        lo, glo = np.where(same, t, lo), np.where(same, gt, glo)
        hi, ghi = np.where(same, hi, t), np.where(same, ghi, gt)
        # Illinois: halve the stale endpoint value when the same side repeats
        ghi = np.where(same & (side == 1), 0.5 * ghi, ghi)
        glo = np.where(~same & (side == -1), 0.5 * glo, glo)
        side = np.where(same, 1, -1)
    return np.clip((1.0 - best_t)[:, None] * U + best_t[:, None] * target, 0.0, 1.0)


def _project(U, q, iters=60, ftol=1e-14):
    """Move every row of ``U`` onto ``I = q`` along a straight segment.

    Rows with ``I < q`` slide toward the constant 1/e (the maximiser of I).
    Rows with ``I > q`` slide toward 1 or toward 0 (both have I = 0),
    whichever needs the smaller sup-norm change.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    g0 = _batch_I(U) - q
    up = _mix_root(U, q, np.full((len(U), 1), INV_E), g0, iters, ftol)
    to_one = _mix_root(U, q, np.ones((len(U), 1)), g0, iters, ftol)
    to_zero = _mix_root(U, q, np.zeros((len(U), 1)), g0, iters, ftol)
    zero_closer = np.max(np.abs(to_zero - U), axis=1) < np.max(np.abs(to_one - U), axis=1)
    down = np.where(zero_closer[:, None], to_zero, to_one)
    return np.where((g0 < 0)[:, None], up, down)


@njit(cache=True)
def _row_I(u):
    acc = 0.0
    for x in u:
        if x > 0.0:
            acc -= x * math.log(x)
    return acc / u.size


@njit(cache=True)
def _row_J(u):
    n = u.size
    p = 0.0
    prev = 0.0
    acc = 0.0
    for x in u:
        p += x / n
        r = math.sqrt(p)
        if x > 0.0:
            acc += math.log(x) * (r - prev)
        prev = r
    return -2.0 * acc


@njit(cache=True)
def _row_mix_I(u, t, target):
    acc = 0.0
    for x in u:
        y = (1.0 - t) * x + t * target
        if y > 0.0:
            acc -= y * math.log(y)
    return acc / u.size


@njit(cache=True)
def _row_mix_root(u, q, target, g0, out, ftol, iters):
    lo, hi = 0.0, 1.0
    glo, ghi = g0, _row_mix_I(u, 1.0, target) - q
    best_t, best_g = 0.0, g0
    side = 0
    for _ in range(iters):
        if abs(best_g) <= ftol:
            break
        denom = ghi - glo
        t = lo - glo * (hi - lo) / denom if denom != 0.0 else 0.5 * (lo + hi)
        t = min(max(t, lo), hi)
        gt = _row_mix_I(u, t, target) - q
        if abs(gt) < abs(best_g):
            best_t, best_g = t, gt
        if (gt > 0.0) == (glo > 0.0):
            lo, glo = t, gt
            if side == 1:
                ghi *= 0.5
            side = 1
        else:
            hi, ghi = t, gt
            if side == -1:
                glo *= 0.5
            side = -1
    change = 0.0
    for i in range(u.size):
        out[i] = min(max((1.0 - best_t) * u[i] + best_t * target, 0.0), 1.0)
        change = max(change, abs(out[i] - u[i]))
    return change


@njit(cache=True)
def _row_project(u, q, out, ftol=1e-14, iters=60):
    """Scalar twin of ``_project`` for one row, written into ``out``."""
    g0 = _row_I(u) - q
    if g0 < 0.0:
        _row_mix_root(u, q, INV_E, g0, out, ftol, iters)
        return
    alt = np.empty(u.size)
    c_one = _row_mix_root(u, q, 1.0, g0, out, ftol, iters)
    c_zero = _row_mix_root(u, q, 0.0, g0, alt, ftol, iters)
    if c_zero < c_one:
        out[:] = alt


@njit(cache=True)
def _row_search(u0, q, sense, penalty, steps, perms):
    n = u0.size
    u = np.empty(n)
    cand = np.empty(n)
    trial = np.empty(n)
    _row_project(u0, q, u)
    f = sense * _row_J(u) + penalty * abs(_row_I(u) - q)
    for level in range(steps.size):
        factor_up = math.exp(steps[level])
        for sweep in range(perms.shape[1]):
            moved = False
            for i in perms[level, sweep]:
                for factor in (factor_up, 1.0 / factor_up):
                    trial[:] = u
                    trial[i] = min(max(trial[i] * factor, 0.0), 1.0)
                    _row_project(trial, q, cand)
                    fc = sense * _row_J(cand) + penalty * abs(_row_I(cand) - q)
                    if fc < f - 1e-15:
                        u[:] = cand
                        f = fc
                        moved = True
            # a sweep without any move is a fixed point for this step size
            if not moved:
                break
    return u


@dataclass
class OracleResult:
    j: float
    distribution: DiscreteDistribution
    i_value: float
    restart_values: np.ndarray = field(repr=False)
    best_restart: int = 0
    converged: bool = True


def _check_q(q):
    if not (0.0 < q < Q_MAX) or not math.isfinite(q):
        raise DomainError(f"oracle target q must lie in (0, 1/e), got {q!r}")


def _starts(q, n, mode, restarts, seed):
    """Restart ``r`` draws from its own stream, so adding restarts never changes earlier ones."""
    sigma = (np.arange(n) + 0.5) / n
    rows = []
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        if r == 0:
            rows.append(np.full(n, INV_E))
        elif r == 1:
            build = build_min_extremal if mode == "min" else build_max_extremal
            desc, _ = build(q)
            u = np.asarray(desc.velocity()(sigma), dtype=float)
            rows.append(np.clip(u * np.exp(rng.normal(0.0, 0.05, n)), 0.0, 1.0))
        else:
            rows.append(rng.uniform(0.0, 1.0, n))
    return np.array(rows)


def _schedule(n, seed, step0, step_min, max_sweeps):
    steps = []
    step = step0
    while step >= step_min:
        steps.append(step)
        step *= 0.5
    perms = np.array(
        [
            [np.random.default_rng([seed, 1 + level, sweep]).permutation(n) for sweep in range(max_sweeps)]
            for level in range(len(steps))
        ],
        dtype=np.int64,
    )
    return np.array(steps), perms


def optimize(
    q: float,
    N: int = 50,
    mode: str = "min",
    restarts: int = 20,
    seed: int = 0,
    step0: float = 1.0,
    step_min: float = 1e-3,
    max_sweeps: int = 8,
) -> OracleResult:
    """Minimise or maximise the discrete J subject to discrete I = q and 0 <= u <= 1.

    Coordinate-wise compass search on ``log u`` (moves ``u_i -> u_i e^{+-step}``)
    with a halving step, each move pulled back onto ``I = q``, run from
    ``restarts`` independent starting points. Small values near ``sigma = 0``
    matter for the maximum, hence the multiplicative moves. Deterministic for a
    given ``seed``.
    """
    _check_q(q)
    if N < 20:
        raise DomainError(f"N must be >= 20, got {N}")
    if restarts < 1:
        raise DomainError(f"restarts must be >= 1, got {restarts}")
    if mode not in ("min", "max"):
        raise DomainError(f"mode must be 'min' or 'max', got {mode!r}")
    sense = 1.0 if mode == "min" else -1.0
    steps, perms = _schedule(N, seed, step0, step_min, max_sweeps)
    starts = _starts(q, N, mode, restarts, seed)
    U = np.array([_row_search(row, q, sense, PENALTY, steps, perms) for row in starts])

    J = _batch_J(U)
    I = _batch_I(U)
    feasible = np.abs(I - q) < 1e-9
    score = np.where(feasible, sense * J, np.inf)
    best = int(np.argmin(score))
    if not np.isfinite(score[best]):
        raise ConvergenceError(
            f"oracle: no restart reached I = {q!r}", {"min |I - q|": float(np.min(np.abs(I - q)))}
        )
    return OracleResult(
        j=float(J[best]),
        distribution=DiscreteDistribution(U[best]),
        i_value=float(I[best]),
        restart_values=J,
        best_restart=best,
        converged=bool(feasible[best]),
    )


def default_q_grid(n: int = 10) -> list[float]:
    return [Q_MAX * i / (n + 1) for i in range(1, n + 1)]


@dataclass(frozen=True)
class ComparisonRow:
    q: float
    mode: str
    j_analytic: float
    j_oracle: float

    @property
    def gap(self):
        return self.j_oracle - self.j_analytic

    def violates(self, tol):
        if self.mode == "min":
            return self.j_oracle < self.j_analytic - tol
        return self.j_oracle > self.j_analytic + tol


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    N: int
    tol: float

    @property
    def violations(self):
        return [r for r in self.rows if r.violates(self.tol)]

    @property
    def ok(self):
        return not self.violations

    def csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("q", "mode", "j_analytic", "j_oracle", "gap"))
        for r in self.rows:
            writer.writerow(
                (format_number(r.q), r.mode, format_number(r.j_analytic), format_number(r.j_oracle), format_number(r.gap))
            )
        return buf.getvalue()

    def summary(self):
        lines = [f"oracle check: N={self.N}, tol={self.tol:.4g}, {len(self.rows)} comparisons"]
        for r in self.rows:
            flag = "VIOLATION" if r.violates(self.tol) else "ok"
            lines.append(
                f"  q={r.q:.6f} {r.mode}: analytic={r.j_analytic:.8f} oracle={r.j_oracle:.8f} gap={r.gap:+.3e} {flag}"
            )
        lines.append("no bound violations" if self.ok else f"{len(self.violations)} bound violation(s)")
        return "\n".join(lines)


def compare_report(
    q_grid, N: int = 50, restarts: int = 20, seed: int = 0, tol: float | None = None
) -> ComparisonReport:
    """Oracle optimum against the closed-form curve for every q, in both modes.

    ``tol`` overrides the calibrated ``tolerance(N)``.
    """
    rows = []
    for q in q_grid:
        for mode, curve in (("min", J_min_curve), ("max", J_max_curve)):
            res = optimize(q, N=N, mode=mode, restarts=restarts, seed=seed)
            rows.append(ComparisonRow(float(q), mode, curve(q), res.j))
    return ComparisonReport(tuple(rows), N, tolerance(N) if tol is None else float(tol))
