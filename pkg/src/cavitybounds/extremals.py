"""Closed-form extremals of J at fixed I = q.

Both extremal families are parametrised by ``b = lam(1)``. Writing
``s = b**2 e`` keeps every formula free of cancellation:

* minimum branch, ``b in (sqrt(2/e), sqrt(2))``::

      k = -(e-1) b (s-2) / (2 + (e-2) s),   a = (s-2) / ((e-1) b)
      c = (2 - b**2) / (2 + (e-2) s),        gamma = a**2 / 2
      q = (b**2 - k**2 + k (b-a) - k**2 log(b/a)) / 2
      J = sqrt(2) (k log(b/a) + b + k)

  with ``lam = sqrt(2 sigma)`` (``u = 1``) up to ``gamma`` and
  ``lam = -k + sqrt(2 c (sigma-gamma) + (a+k)**2)`` afterwards. ``gamma`` is
  fixed by continuity of ``lam`` at the junction: ``sqrt(2 gamma) = a``.

* maximum branch, ``b in (0, sqrt(2/e)]``::

      k = -b (s-2) / (2 (s-1)),   c = b**2 / (2 (s-1))
      lam = -k -/+ sqrt(2 c sigma + k**2)   (sign of k)

  Since ``(b+k)/k = s/(2-s)`` the log term is ``log(s/(2-s)) = 2 atanh(s-1)``,
  which gives::

      J = sqrt(2) b (1 + (2-s) atanh(d)/d),          d = s - 1
      q = b**2/4 (3 - d - d (1-d)**2 h(d)),         h(d) = (atanh d - d)/d**3

  At ``s = 1`` (``b = 1/sqrt(e)``) k and c diverge but ``lam`` tends to the
  straight line ``sigma / sqrt(e)``, for which ``q = 3/(4e)`` and
  ``J = 2 sqrt(2/e)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, DomainError
from .functionals import LambdaFunction, VelocityDistribution

E = math.e
SQRT2 = math.sqrt(2.0)
Q_MAX = 1.0 / E
Q_STAR = 3.0 / (4.0 * E)
J_AT_Q_MAX = 2.0 / math.sqrt(E)
J_AT_Q_STAR = 2.0 * SQRT2 / math.sqrt(E)

B_MIN_LO = math.sqrt(2.0 / E)
B_MIN_HI = SQRT2
B_LINEAR = math.sqrt(1.0 / E)
B_MAX_HI = math.sqrt(2.0 / E)

# half-width in s = b^2 e of the window served by the straight-line extremal
LINEAR_WINDOW = 1e-8
# smallest b handed to the lower max-branch bracket (s = b^2 e must not underflow)
_B_TINY = 1e-100
_B_XTOL = 1e-15


def q_star() -> float:
    """I of the straight-line extremal ``lam = sigma/sqrt(e)``: ``3/(4e)``."""
    return Q_STAR


def q_max_const() -> float:
    """Largest attainable I under ``u <= 1``: ``1/e``."""
    return Q_MAX


# ---------------------------------------------------------------------------
# minimum branch
# ---------------------------------------------------------------------------


def _check_min_b(b):
    if not (B_MIN_LO < b < B_MIN_HI):
        # the closed right end b = sqrt(2) (u = 1, q = 0) is harmless
        if b != B_MIN_HI:
            raise DomainError(f"b must lie in (sqrt(2/e), sqrt(2)), got {b!r}")


def K(b: float) -> float:
    _check_min_b(b)
    s = b * b * E
    return -(E - 1.0) * b * (s - 2.0) / (2.0 + (E - 2.0) * s)


def a_of_b(b: float) -> float:
    _check_min_b(b)
    return (b * b * E - 2.0) / ((E - 1.0) * b)


def c_min_of_b(b: float) -> float:
    _check_min_b(b)
    return (2.0 - b * b) / (2.0 + (E - 2.0) * b * b * E)


def q_min_branch(b: float) -> float:
    k, a = K(b), a_of_b(b)
    return 0.5 * (b * b - k * k + k * (b - a) - k * k * math.log(b / a))


def j_min_of_b(b: float) -> float:
    k, a = K(b), a_of_b(b)
    return SQRT2 * (k * math.log(b / a) + b + k)


# ---------------------------------------------------------------------------
# maximum branch
# ---------------------------------------------------------------------------


def _s_of_max_b(b):
    if not (0.0 < b <= B_MAX_HI * (1 + 1e-15)):
        raise DomainError(f"b must lie in (0, sqrt(2/e)], got {b!r}")
    return min(b * b * E, 2.0)


def _atanh_ratio(s):
    """``atanh(d)/d`` with ``d = s - 1``, evaluated from s to keep precision near s = 0."""
    d = s - 1.0
    if abs(d) < 1e-3:
        d2 = d * d
        return 1.0 + d2 * (1.0 / 3 + d2 * (1.0 / 5 + d2 * (1.0 / 7 + d2 / 9)))
    return math.log(s / (2.0 - s)) / (2.0 * d)


def _atanh_tail(d):
    """``(atanh d - d) / d**3``."""
    if abs(d) < 0.1:
        d2 = d * d
        total, term = 0.0, 1.0
        for n in range(20):
            total += term / (2 * n + 3)
            term *= d2
        return total
    return (math.atanh(d) - d) / d**3


def K1(b: float) -> float:
    s = _s_of_max_b(b)
    if abs(s - 1.0) < LINEAR_WINDOW:
        raise DomainError("K1 diverges at b = 1/sqrt(e); use the straight-line extremal")
    return -b * (s - 2.0) / (2.0 * (s - 1.0))


def c_max_of_b(b: float) -> float:
    s = _s_of_max_b(b)
    if abs(s - 1.0) < LINEAR_WINDOW:
        raise DomainError("c diverges at b = 1/sqrt(e); use the straight-line extremal")
    return b * b / (2.0 * (s - 1.0))


def q_max_branch(b: float) -> float:
    s = _s_of_max_b(b)
    if s == 2.0:
        return Q_MAX
    d = s - 1.0
    if abs(d) < 0.1:
        g = 3.0 - d - d * (1.0 - d) ** 2 * _atanh_tail(d)
    else:
        g = (d * (1.0 + d) - (1.0 - d) ** 2 * 0.5 * math.log(s / (2.0 - s))) / (d * d)
    return s / E / 4.0 * g


def j_max_of_b(b: float) -> float:
    s = _s_of_max_b(b)
    if s == 2.0:
        return SQRT2 * b
    return SQRT2 * b * (1.0 + (2.0 - s) * _atanh_ratio(s))


# ---------------------------------------------------------------------------
# inversion q -> b
# ---------------------------------------------------------------------------


def _check_q(q):
    if not (0.0 < q <= Q_MAX) or not math.isfinite(q):
        raise DomainError(f"q must lie in (0, 1/e], got {q!r}")


def _solve(f, lo, hi, what):
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ConvergenceError(
            f"{what}: root not bracketed", {"lo": lo, "hi": hi, "f_lo": flo, "f_hi": fhi}
        )
    b, info = optimize.brentq(f, lo, hi, xtol=_B_XTOL, rtol=4 * np.finfo(float).eps, full_output=True)
    if not info.converged:
        raise ConvergenceError(f"{what}: root finder did not converge", {"iterations": info.iterations})
    return b


def invert_q_min(q: float) -> float:
    """``b`` on the minimum branch with ``q_min_branch(b) = q``.

    ``q = 1/e`` maps to the open endpoint ``sqrt(2/e)`` itself.
    """
    _check_q(q)
    if q == Q_MAX:
        return B_MIN_LO
    # q_min_branch decreases from 1/e to 0 across the bracket
    lo = B_MIN_LO * (1.0 + 1e-15)
    return _solve(lambda b: q_min_branch(b) - q, lo, B_MIN_HI, "invert_q_min")


def invert_q_max(q: float) -> float:
    """``b`` on the maximum branch; the lower sub-branch serves ``q < q_*``."""
    _check_q(q)
    if q == Q_MAX:
        return B_MAX_HI
    if q == Q_STAR:
        return B_LINEAR
    f = lambda b: q_max_branch(b) - q  # noqa: E731
    if q < Q_STAR:
        return _solve(f, _B_TINY, B_LINEAR, "invert_q_max (lower)")
    return _solve(f, B_LINEAR, B_MAX_HI, "invert_q_max (upper)")


def J_min_curve(q: float) -> float:
    _check_q(q)
    if q == Q_MAX:
        return J_AT_Q_MAX
    return j_min_of_b(invert_q_min(q))


def J_max_curve(q: float) -> float:
    _check_q(q)
    return j_max_of_b(invert_q_max(q))


# ---------------------------------------------------------------------------
# extremal functions
# ---------------------------------------------------------------------------


class Branch(str, enum.Enum):
    MIN_PIECEWISE = "MIN_PIECEWISE"
    MAX_LOWER = "MAX_LOWER"
    MAX_LINEAR = "MAX_LINEAR"
    MAX_UPPER = "MAX_UPPER"


_FIELDS = ("branch", "b", "k", "a", "c", "gamma")


@dataclass(frozen=True)
class ExtremalDescriptor:
    """Branch tag and constants of a closed-form extremal ``lam``.

    ``a`` and ``gamma`` are only meaningful on ``MIN_PIECEWISE``; ``k`` and
    ``c`` are ``nan`` on ``MAX_LINEAR``.
    """

    branch: Branch
    b: float
    k: float
    c: float
    a: float = math.nan
    gamma: float = math.nan

    def lam(self, sigma):
        """``lam(sigma)``; accepts complex ``sigma`` so derivatives can be taken by complex step."""
        s = np.asarray(sigma)
        if self.branch is Branch.MAX_LINEAR:
            return s / math.sqrt(E)
        if self.branch is Branch.MIN_PIECEWISE:
            first = np.real(s) < self.gamma
            with np.errstate(invalid="ignore"):
                root = np.sqrt(2.0 * self.c * (s - self.gamma) + (self.a + self.k) ** 2)
            return np.where(first, np.sqrt(2.0 * s), -self.k + root)
        root = np.sqrt(self.k**2 + 2.0 * self.c * s)
        if self.k == 0.0:
            return root
        # -k -/+ sqrt(k^2 + 2 c s) rewritten without cancellation
        return 2.0 * self.c * s / (self.k + math.copysign(1.0, self.k) * root)

    def dlam(self, sigma):
        s = np.asarray(sigma, dtype=float)
        if self.branch is Branch.MAX_LINEAR:
            return np.full_like(s, 1.0 / math.sqrt(E))
        if self.branch is Branch.MIN_PIECEWISE:
            with np.errstate(divide="ignore"):
                first = 1.0 / np.sqrt(2.0 * s)
            root = np.sqrt(np.maximum(2.0 * self.c * (s - self.gamma) + (self.a + self.k) ** 2, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                second = self.c / root
            return np.where(s < self.gamma, first, second)
        return abs(self.c) / np.sqrt(self.k**2 + 2.0 * self.c * s)

    def u(self, sigma):
        """``u = lam lam'`` in closed form, finite at ``sigma = 0``."""
        s = np.asarray(sigma, dtype=float)
        if self.branch is Branch.MAX_LINEAR:
            return s / E
        if self.branch is Branch.MIN_PIECEWISE:
            if self.k == 0.0:
                return np.where(s < self.gamma, 1.0, np.full_like(s, self.c))
            root = np.sqrt(np.maximum(2.0 * self.c * (s - self.gamma) + (self.a + self.k) ** 2, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                second = self.c * (1.0 - self.k / root)
            return np.where(s < self.gamma, 1.0, second)
        if self.k == 0.0:
            return np.full_like(s, self.c)
        return np.real(self.lam(s)) * abs(self.c) / np.sqrt(self.k**2 + 2.0 * self.c * s)

    @property
    def breakpoints(self):
        if self.branch is Branch.MIN_PIECEWISE and 0.0 < self.gamma < 1.0:
            return (self.gamma,)
        return ()

    def to_lambda(self) -> LambdaFunction:
        return LambdaFunction.from_functions(
            lambda s: np.real(self.lam(np.asarray(s, dtype=float))),
            self.dlam,
            self.breakpoints,
        )

    def velocity(self) -> VelocityDistribution:
        return VelocityDistribution.from_function(
            self.u,
            primitive=lambda s: 0.5 * np.real(self.lam(np.asarray(s, dtype=float))) ** 2,
            breakpoints=self.breakpoints,
        )

    def sample(self, n=2001):
        """``(sigma, u)`` on ``n`` uniform points plus the junction, for CSV export."""
        grid = np.union1d(np.linspace(0.0, 1.0, n), self.breakpoints)
        return grid, np.asarray(self.u(grid), dtype=float)

    def to_text(self) -> str:
        lines = [f"branch={self.branch.value}"]
        for name in _FIELDS[1:]:
            lines.append(f"{name}={float(getattr(self, name))!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExtremalDescriptor":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        missing = [f for f in _FIELDS if f not in kv]
        if missing:
            raise ValueError(f"descriptor text is missing {missing}")
        return cls(
            branch=Branch(kv["branch"]),
            **{f: float(kv[f]) for f in _FIELDS[1:]},
        )


def min_descriptor(b: float) -> ExtremalDescriptor:
    if b == B_MIN_LO:
        # u = 1/e everywhere: the limit a -> 0, k -> 0, c -> 1/e
        return ExtremalDescriptor(Branch.MIN_PIECEWISE, b, 0.0, 1.0 / E, 0.0, 0.0)
    a = a_of_b(b)
    return ExtremalDescriptor(Branch.MIN_PIECEWISE, b, K(b), c_min_of_b(b), a, 0.5 * a * a)


def max_descriptor(b: float) -> ExtremalDescriptor:
    s = _s_of_max_b(b)
    if abs(s - 1.0) < LINEAR_WINDOW:
        return ExtremalDescriptor(Branch.MAX_LINEAR, B_LINEAR, math.nan, math.nan)
    branch = Branch.MAX_LOWER if s < 1.0 else Branch.MAX_UPPER
    if b >= B_MAX_HI:
        # u = 1/e everywhere; K1 would leave a rounding residue of order 1e-16
        return ExtremalDescriptor(branch, b, 0.0, c_max_of_b(b))
    return ExtremalDescriptor(branch, b, K1(b), c_max_of_b(b))


def build_min_extremal(q: float) -> tuple[ExtremalDescriptor, LambdaFunction]:
    desc = min_descriptor(invert_q_min(q))
    return desc, desc.to_lambda()


def build_max_extremal(q: float) -> tuple[ExtremalDescriptor, LambdaFunction]:
    desc = max_descriptor(invert_q_max(q))
    return desc, desc.to_lambda()


def _complex_step(f, s, h=1e-30):
    return np.imag(f(np.asarray(s, dtype=float) + 1j * h)) / h


def transversality_residual(desc: ExtremalDescriptor, lam=None) -> float:
    """``|lam(1) lam'(1) - 1/e|`` with ``lam'`` taken by complex step."""
    lam = lam or desc.lam
    value = float(np.real(lam(np.array(1.0 + 0j))))
    return abs(value * float(_complex_step(lam, 1.0)) - 1.0 / E)


def euler_integral_residual(desc: ExtremalDescriptor, sigma, lam=None) -> float:
    """Max of ``|lam'(lam + k) - c|`` over the smooth segment of the grid.

    ``lam`` defaults to the descriptor's own closed form; passing another
    callable checks that function against the descriptor's constants. The
    straight line is the ``k -> inf`` limit, checked as ``lam' = 1/sqrt(e)``.
    """
    lam = lam or desc.lam
    s = np.asarray(sigma, dtype=float)
    if desc.branch is Branch.MIN_PIECEWISE:
        s = s[s >= desc.gamma]
    s = s[s > 0]
    if s.size == 0:
        return 0.0
    dl = _complex_step(lam, s)
    if desc.branch is Branch.MAX_LINEAR:
        return float(np.max(np.abs(dl - 1.0 / math.sqrt(E))))
    lv = np.real(lam(s.astype(complex)))
    res = np.abs(dl * (lv + desc.k) - desc.c)
    # relative on the near-linear windows where c and k are huge
    return float(np.max(res / max(1.0, abs(desc.c))))


def euler_residual(desc: ExtremalDescriptor, sigma, lam=None) -> float:
    """Euler-integral residual on the smooth segment plus the transversality residual."""
    return euler_integral_residual(desc, sigma, lam) + transversality_residual(desc, lam)
