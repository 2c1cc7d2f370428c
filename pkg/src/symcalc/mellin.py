"""Mellin pole bookkeeping and the reduced cusp model.

For angular degree ``l`` the parametrix contributes poles at ``3+m+l`` and
``2+m-l`` (``m >= 0``) while the right-hand side contributes poles at
``1-l-n`` (``n >= 0``).  Coinciding poles would generate logarithms; the two
families never meet because that would need ``m + n = -1``.

The cusp model solves the s-wave radial problem
``(-d^2/ds^2 - (2/s) d/ds + kappa^2) tau = -psi0 / s`` and extracts
``tau'(0+) / psi0``, which tends to 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, NumericError

MAX_L = 64


@dataclass(frozen=True)
class MellinPoleSet:
    l: int
    parametrix_poles: frozenset[int]
    rhs_poles: frozenset[int]

    @property
    def coalescing(self) -> frozenset[int]:
        return self.parametrix_poles & self.rhs_poles

    @property
    def gap(self) -> int:
        """Smallest distance between a parametrix pole and a right-hand-side pole."""
        return min(abs(a - b) for a in self.parametrix_poles for b in self.rhs_poles)


def pole_sets(l: int, m_max: int, n_max: int, rhs_shift: int = 0) -> MellinPoleSet:
    """Enumerate both pole families; ``rhs_shift`` moves the right-hand side (test hook)."""
    if l < 0 or m_max < 0 or n_max < 0:
        raise DomainError("l, m_max and n_max must be non-negative")
    parametrix = frozenset({3 + m + l for m in range(m_max + 1)} | {2 + m - l for m in range(m_max + 1)})
    rhs = frozenset(1 - l - n + rhs_shift for n in range(n_max + 1))
    return MellinPoleSet(l, parametrix, rhs)


@dataclass(frozen=True)
class PoleWitness:
    l: int
    w: int


@dataclass(frozen=True)
class LogFreeVerdict:
    log_free: bool
    gaps: dict[int, int] = field(default_factory=dict)
    witnesses: tuple[PoleWitness, ...] = ()


def log_free_verdict(l_max: int, m_max: int = MAX_L, n_max: int = MAX_L,
                     rhs_shift: int = 0) -> LogFreeVerdict:
    """True when no parametrix pole meets a right-hand-side pole for any ``l <= l_max``."""
    if not 0 <= l_max <= MAX_L:
        raise DomainError(f"l_max must lie in [0, {MAX_L}]")
    gaps, witnesses = {}, []
    for l in range(l_max + 1):
        poles = pole_sets(l, m_max, n_max, rhs_shift)
        gaps[l] = poles.gap
        witnesses.extend(PoleWitness(l, w) for w in sorted(poles.coalescing))
    return LogFreeVerdict(not witnesses, gaps, tuple(witnesses))


# ------------------------------------------------------------ cusp model

@dataclass(frozen=True)
class CuspModel:
    kappa: float = 1.0
    psi0: float = 1.0
    h_min: float = 1e-4
    levels: int = 5

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        if not 0 < self.h_min <= 1e-4:
            raise DomainError("the finest grid must resolve s down to 1e-4")

    @property
    def s_max(self) -> float:
        return 20.0 / self.kappa


def solve_radial(model: CuspModel, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Second-order finite differences for ``u = s tau``: ``-u'' + kappa^2 u = -psi0``.

    ``u(0) = 0``; at ``s_max`` the Robin condition ``u' + kappa (u + psi0/kappa^2) = 0``
    keeps only the decaying homogeneous solution.  Returns ``(s, tau)``.
    """
    n = int(round(model.s_max / h))
    s = h * np.arange(1, n + 1)
    k2 = model.kappa**2
    diag = np.full(n, 2.0 + k2 * h * h)
    upper = np.full(n, -1.0)
    lower = np.full(n, -1.0)
    rhs = np.full(n, -model.psi0 * h * h)
    # ghost node u_{n+1} = u_{n-1} - 2h kappa (u_n + psi0/kappa^2)
    lower[n - 2] = -2.0
    diag[n - 1] += 2.0 * h * model.kappa
    rhs[n - 1] -= 2.0 * h * model.kappa * model.psi0 / k2
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[:-1]
    u = solve_banded((1, 1), ab, rhs)
    if not np.all(np.isfinite(u)):
        raise NumericError("radial solve produced non-finite values")
    return s, u / s


def slope_at_origin(model: CuspModel, h: float) -> float:
    """``tau'(0+)`` from the quadratic through the first three interior nodes."""
    _, tau = solve_radial(model, h)
    return float((-5.0 * tau[0] + 8.0 * tau[1] - 3.0 * tau[2]) / (2.0 * h))


@dataclass(frozen=True)
class CuspResult:
    ratio: float
    zero_source: bool
    steps: tuple[float, ...] = ()
    raw: tuple[float, ...] = ()
    extrapolated: tuple[float, ...] = ()
    observed_order: float = math.nan


def cusp_coefficient(model: CuspModel, tol: float = 1e-2) -> CuspResult:
    """Extract ``tau'(0+)/psi0`` on grids ``h_min * 2^k`` and Richardson-extrapolate."""
    if model.psi0 == 0:
        return CuspResult(0.0, True)
    steps = tuple(model.h_min * 2.0 ** k for k in range(model.levels - 1, -1, -1))
    raw = tuple(slope_at_origin(model, h) / model.psi0 for h in steps)
    extrap = tuple((4.0 * fine - coarse) / 3.0 for coarse, fine in zip(raw[:-1], raw[1:]))
    errs = [abs(r - 0.5) for r in raw]
    orders = [math.log2(a / b) for a, b in zip(errs[:-1], errs[1:]) if a > 0 and b > 0]
    order = orders[-1] if orders else math.inf
    if len(extrap) >= 2 and abs(extrap[-1] - extrap[-2]) > tol:
        raise NumericError("Richardson extrapolation did not settle",
                           achieved=abs(extrap[-1] - extrap[-2]))
    return CuspResult(extrap[-1], False, steps, raw, extrap, order)
