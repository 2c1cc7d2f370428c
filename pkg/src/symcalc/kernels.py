"""Kernel-to-symbol dictionary for singular expansions at coalescence.

Kernel terms ``omega(|z|) |z|^j [log |z|] sum_lm c_lm Y_lm(z_hat)`` are mapped
to homogeneous symbol terms by closed forms built from the integer table
:func:`a_coeff`.  :func:`kernel_from_symbol` inverts the map modulo smooth
kernels, and :func:`oscillatory_oracle` evaluates the Fourier integral
``sigma(eta) = int exp(-i z.eta) k(z) dz`` numerically.

Transform convention: ``exp(-i z.eta) = 4 pi sum (-i)^l j_l(|eta| s) conj(Y_lm(z_hat)) Y_lm(eta_hat)``,
so a kernel component of angular degree ``l`` picks up the phase ``(-i)^l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy
from scipy.special import sph_harm_y

from .angular import AngularExpansion, AngularIndex, Parity, as_index, sphere_grid, _harmonic_table
from .errors import ConstraintError, DomainError, NumericError
from .symbols import HomogeneousTerm, XFunction, _as_xfunction

KERNEL_FORMAT = "symcalc-kernel/1"
FOUR_PI = 4.0 * math.pi


def a_coeff(l: int, j: int) -> int:
    """``a_lj = prod_{n=0}^{l-1} (j + l + 1 - 2n)``, with ``a_0j = 1``."""
    if l < 0:
        raise DomainError("l must be non-negative")
    out = 1
    for n in range(l):
        out *= j + l + 1 - 2 * n
    return out


def fourier_radial_constant(l: int, a: float) -> float:
    """``K`` with ``int_0^inf j_l(eta s) s^a ds = K * eta^(-a-1)`` (Abel-regularised).

    ``K = sqrt(pi) 2^(a-1) Gamma((l+a+1)/2) / Gamma((l-a)/2 + 1)``; zero where
    the denominator has a pole.
    """
    top = (l + a + 1) / 2
    bottom = (l - a) / 2 + 1
    if bottom <= 0 and float(bottom).is_integer():
        return 0.0
    if top <= 0 and float(top).is_integer():
        raise DomainError(f"radial transform of s^{a} with l={l} has a pole")
    return math.sqrt(math.pi) * 2.0 ** (a - 1) * math.gamma(top) / math.gamma(bottom)


def recurrence_coefficient(l: int, power: int) -> tuple[sympy.Expr, int]:
    """Reduce ``int j_l(eta s) s^power ds`` to ``c * int j_0(eta s) s^(power-l) ds`` symbolically.

    Each step substitutes ``j_k(x) = -d/dx j_(k-1)(x) + (k-1)/x j_(k-1)(x)``
    (with ``x = eta s``) and integrates the derivative by parts, dropping
    boundary terms.  Returns ``(c, power - l)``; ``c`` carries ``eta^-l``.
    """
    s, eta = sympy.symbols("s eta", positive=True)
    coef: sympy.Expr = sympy.Integer(1)
    mu = power
    for k in range(l, 0, -1):
        # lower(s) stands for j_(k-1)(eta s)
        lower = sympy.Function(f"j{k - 1}")(s)
        replaced = -sympy.diff(lower, s) / eta + (k - 1) / (eta * s) * lower
        integrand = sympy.expand(coef * replaced * s**mu)
        result = sympy.Integer(0)
        for part in sympy.Add.make_args(integrand):
            derivs = part.atoms(sympy.Derivative)
            if derivs:
                (d,) = derivs
                rest = part / d
                result += -sympy.diff(rest, s) * lower
            else:
                result += part
        result = sympy.expand(result)
        coef = sympy.simplify(result / (lower * s ** (mu - 1)))
        if coef.has(s):
            raise DomainError("recurrence left a non-monomial remainder")
        mu -= 1
    return sympy.simplify(coef), mu


def a_coeff_by_recurrence(l: int, j: int) -> int:
    """``a_lj`` read off the reduction of ``int j_l(eta s) s^(j+2) ds`` (kernel power ``j`` times ``s^2``)."""
    coef, mu = recurrence_coefficient(l, j + 2)
    if mu != j + 2 - l:
        raise DomainError("unexpected reduced power")
    value = sympy.nsimplify(coef * sympy.Symbol("eta", positive=True) ** l)
    if not value.is_Integer:
        raise DomainError(f"non-integer recurrence coefficient {value}")
    return int(value)


# ---------------------------------------------------------------- cutoff

def _bump(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(96)


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    edges = np.linspace(-1, 1, 65)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
        total += 0.5 * (b - a) * float(np.sum(_GL_W * _bump(x)))
    return total


@dataclass(frozen=True)
class Cutoff:
    """Radial cutoff: 1 on ``[0, inner]``, 0 on ``[outer, inf)``, C-infinity and monotone.

    The transition is one minus the normalised running integral of the bump
    ``exp(1 - 1/(1 - t^2))`` stretched over ``[inner, outer]``.
    """

    inner_radius: float = 0.5
    outer_radius: float = 1.0

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        out = np.where(flat <= self.inner_radius, 1.0, 0.0)
        mid = (flat > self.inner_radius) & (flat < self.outer_radius)
        if np.any(mid):
            u = (flat[mid] - self.inner_radius) / (self.outer_radius - self.inner_radius)
            # running integral of the bump over t in [-1, 2u-1], i.e. half-width u
            partial = np.empty_like(u)
            for lo in range(0, u.size, 1 << 15):
                half = u[lo: lo + (1 << 15)]
                nodes = half[:, None] * (_GL_X[None, :] + 1.0) - 1.0
                partial[lo: lo + half.size] = half * np.sum(_GL_W[None, :] * _bump(nodes), axis=1)
            out[mid] = 1.0 - partial / _bump_mass()
        return out.reshape(s.shape)


CUTOFF = Cutoff()


# ------------------------------------------------------- spherical Bessel

def spherical_jn(l: int, x) -> np.ndarray:
    """Spherical Bessel function ``j_l(x)`` for real ``x >= 0``.

    Upward recurrence where ``x > l``; downward recurrence with Miller
    normalisation through ``sum (2k+1) j_k^2 = 1`` elsewhere.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty_like(flat)
    up = flat > max(l, 1)
    if np.any(up):
        xu = flat[up]
        j0 = np.sin(xu) / xu
        if l == 0:
            out[up] = j0
        else:
            j1 = np.sin(xu) / xu**2 - np.cos(xu) / xu
            prev, cur = j0, j1
            for k in range(1, l):
                prev, cur = cur, (2 * k + 1) / xu * cur - prev
            out[up] = cur
    low = ~up
    if np.any(low):
        out[low] = _miller(l, flat[low])
    return out.reshape(x.shape)


def _miller(l: int, x: np.ndarray) -> np.ndarray:
    res = np.empty_like(x)
    tiny = x < 1e-8
    if np.any(tiny):
        double_fact = math.prod(range(1, 2 * l + 2, 2))
        res[tiny] = x[tiny] ** l / double_fact
    xs = x[~tiny]
    if xs.size == 0:
        return res
    start = l + 20 + int(math.sqrt(40 * (l + 1)))
    nxt = np.zeros_like(xs)
    cur = np.full_like(xs, 1e-30)
    wanted = np.zeros_like(xs)
    norm = (2 * start + 1) * cur**2
    for k in range(start, 0, -1):
        nxt, cur = cur, (2 * k + 1) / xs * cur - nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            scale = np.where(big, 1e-100, 1.0)
            cur, nxt, wanted = cur * scale, nxt * scale, wanted * scale
            norm = norm * scale**2
        if k - 1 == l:
            wanted = cur.copy()
        norm = norm + (2 * k - 1) * cur**2
    res[~tiny] = wanted / np.sqrt(norm)
    return res


def hankel1_series(l: int, x) -> np.ndarray:
    """Spherical Hankel ``h_l^(1)(x)`` from its terminating series (complex ``x``)."""
    x = np.asarray(x, dtype=complex)
    total = np.zeros_like(x)
    for k in range(l + 1):
        c = math.factorial(l + k) / (math.factorial(k) * math.factorial(l - k))
        total = total + c * (1j / (2 * x)) ** k
    return (-1j) ** (l + 1) * np.exp(1j * x) / x * total


def hankel2_series(l: int, x) -> np.ndarray:
    """Spherical Hankel ``h_l^(2)(x)`` from its terminating series (complex ``x``)."""
    x = np.asarray(x, dtype=complex)
    total = np.zeros_like(x)
    for k in range(l + 1):
        c = math.factorial(l + k) / (math.factorial(k) * math.factorial(l - k))
        total = total + c * (-1j / (2 * x)) ** k
    return (1j) ** (l + 1) * np.exp(-1j * x) / x * total


# ------------------------------------------------------------ data types

@dataclass(frozen=True)
class KernelTerm:
    """``omega(|z|) |z|^power [log |z|] sum_lm X_lm(x) Y_lm(z_hat)``."""

    power: int
    angular: AngularExpansion
    has_log: bool = False
    cutoff: Cutoff = CUTOFF

    def __post_init__(self) -> None:
        if self.power < -1:
            raise DomainError(f"kernel power {self.power} below -1 is not supported")
        if self.has_log and self.power < 1:
            raise DomainError("logarithmic terms need power >= 1")

    @classmethod
    def separable(cls, power: int, angular: Mapping, xcoef: XFunction | complex = 1.0,
                  has_log: bool = False) -> "KernelTerm":
        """Term whose angular weights share one x-coefficient."""
        x = _as_xfunction(xcoef)
        return cls(power, AngularExpansion({k: x * c for k, c in angular.items()}), has_log)

    def radial(self, s):
        s = np.asarray(s)
        out = s ** self.power
        if self.has_log:
            out = out * np.log(s)
        return out

    def sample(self, x) -> Callable:
        """Kernel profile at fixed ``x`` as a callable ``(s, theta, phi)``, without cutoff."""
        weights = {idx: complex(c.evaluate(x)) for idx, c in self.angular.items()}
        ang = AngularExpansion(weights)

        def k(s, theta, phi):
            return self.radial(s) * ang.evaluate(theta, phi)

        return k


@dataclass(frozen=True)
class KernelExpansion:
    """Singular part of a kernel: a list of :class:`KernelTerm`."""

    terms: tuple[KernelTerm, ...] = field(default_factory=tuple)
    symbol_order: int | None = None

    @property
    def log_terms(self) -> tuple[KernelTerm, ...]:
        return tuple(t for t in self.terms if t.has_log)

    @property
    def nonlog_terms(self) -> tuple[KernelTerm, ...]:
        return tuple(t for t in self.terms if not t.has_log)

    @property
    def has_log(self) -> bool:
        return bool(self.log_terms)

    @property
    def leading_exponent(self) -> int | None:
        return min((t.power for t in self.terms), default=None)

    def __add__(self, other: "KernelExpansion") -> "KernelExpansion":
        order = self.symbol_order if self.symbol_order == other.symbol_order else None
        return KernelExpansion(self.terms + other.terms, order)


# ------------------------------------------------------------ forward maps

def _amplitude_weight(l: int, j: int) -> complex:
    # j - l odd: (-1)^((j-l+1)/2) (j-l+1)! a_lj
    return FOUR_PI * (-1j) ** l * (-1) ** ((j - l + 1) // 2) * math.factorial(j - l + 1) * a_coeff(l, j)


def _log_weight(l: int, j: int) -> complex:
    # j - l even: (-1)^(n+1) (pi/2) a_lj (j-l+1)!, n = (j-l)/2
    n = (j - l) // 2
    return (FOUR_PI * (-1j) ** l * (-1) ** (n + 1) * (math.pi / 2)
            * a_coeff(l, j) * math.factorial(j - l + 1))


def _potential_weight(l: int, j: int) -> complex:
    # j - l even: (-1)^((j-l)/2) (j-l)! a_{l,j-1}
    return (FOUR_PI * (-1j) ** l * (-1) ** ((j - l) // 2)
            * math.factorial(j - l) * a_coeff(l, j - 1))


def symbol_from_kernel_term(t: KernelTerm) -> HomogeneousTerm | None:
    """Homogeneous symbol of an amplitude kernel term; ``None`` means smoothing.

    A non-log term of power ``j`` gives degree ``-3-j`` with only the
    ``j - l`` odd components surviving; ``j = 0`` is smoothing.  A log term
    needs ``j - l`` even and also gives degree ``-3-j``.
    """
    j = t.power
    if j < 0:
        raise DomainError("amplitude kernel terms have power >= 0; use potential_symbol")
    for idx in t.angular:
        if idx.l > j:
            raise ConstraintError(f"component (l={idx.l}, m={idx.m}) exceeds l <= {j}",
                                  offending=(idx.l, idx.m))
        if t.has_log and (j - idx.l) % 2:
            raise ConstraintError(
                f"log component (l={idx.l}, m={idx.m}) needs j - l even (j={j})",
                offending=(idx.l, idx.m))
    if t.has_log:
        coeffs = {idx: c * _log_weight(idx.l, j) for idx, c in t.angular.items()}
        return HomogeneousTerm(-3 - j, AngularExpansion(coeffs, Parity(j)))
    coeffs = {idx: c * _amplitude_weight(idx.l, j)
              for idx, c in t.angular.items() if (j - idx.l) % 2 == 1}
    if not coeffs:
        return None
    return HomogeneousTerm(-3 - j, AngularExpansion(coeffs, Parity(j - 1)))


def potential_symbol(j: int, v_coeffs: Mapping) -> HomogeneousTerm:
    """Symbol of the potential term ``omega(s) s^(j-1) sum_lm v_lm(x) Y_lm``, degree ``-2-j``."""
    if j < 0:
        raise DomainError("potential index j must be non-negative")
    coeffs = {}
    for key, v in v_coeffs.items():
        idx = as_index(key)
        if idx.l > j or (j - idx.l) % 2:
            raise ConstraintError(
                f"potential component (l={idx.l}, m={idx.m}) needs l <= {j} and j - l even",
                offending=(idx.l, idx.m))
        coeffs[idx] = _as_xfunction(v) * _potential_weight(idx.l, j)
    return HomogeneousTerm(-2 - j, AngularExpansion(coeffs, Parity(j)))


# ------------------------------------------------------------ inverse map

def _log_residue(l: int, e: int) -> float:
    # residue in a of K(l, a) at a = -e-1, where Gamma((l+a+1)/2) has its pole
    n = (e - l) // 2
    a0 = -e - 1
    return (math.sqrt(math.pi) * 2.0 ** (a0 - 1) * 2 * (-1) ** n / math.factorial(n)
            / math.gamma((l + e + 3) / 2))


def kernel_from_symbol(t: HomogeneousTerm) -> KernelExpansion:
    """Singular kernel terms of a homogeneous symbol of degree ``< -3``, modulo smooth kernels.

    With ``e = -3 - degree``, components with ``e - l`` odd or ``l > e`` give
    ``|z|^e Y_lm`` terms, the others give ``|z|^e log |z| Y_lm`` terms.
    """
    D = t.degree
    if D >= -3:
        raise DomainError(f"symbol degree {D} must be below -3")
    e = -3 - D
    plain, logs = {}, {}
    norm = (2 * math.pi) ** -3 * FOUR_PI
    for idx, c in t.angular.items():
        l = idx.l
        if (e - l) % 2 or l > e:
            plain[idx] = c * (norm * 1j ** l * fourier_radial_constant(l, -e - 1))
        else:
            logs[idx] = c * (-norm * 1j ** l * _log_residue(l, e))
    terms = []
    if plain:
        terms.append(KernelTerm(e, AngularExpansion(plain)))
    if logs:
        terms.append(KernelTerm(e, AngularExpansion(logs), has_log=True))
    order = None if t.reference is None else D + t.reference
    return KernelExpansion(tuple(terms), order)


def kernel_expansion(symbol) -> KernelExpansion:
    """Kernel expansion of every stored term of a classical symbol."""
    out = KernelExpansion((), symbol.leading_order)
    for term in symbol.terms:
        if term.is_empty():
            continue
        part = kernel_from_symbol(term)
        out = KernelExpansion(out.terms + part.terms, symbol.leading_order)
    return out


# ------------------------------------------------------------ oracle

def _panels(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    return ((b - a) / 2 * x + (a + b) / 2).ravel(), ((b - a) / 2 * w).ravel()


def _project_radial(kernel: Callable, s: np.ndarray, lmax: int) -> dict[AngularIndex, np.ndarray]:
    theta, phi, w = sphere_grid(lmax)
    vals = np.asarray(kernel(s[:, None], theta[None, :], phi[None, :]), dtype=complex)
    vals = np.broadcast_to(vals, (s.size, theta.size))
    table = _harmonic_table(lmax, lmax)
    return {idx: vals @ (w * np.conj(y)) for idx, y in table.items()}


def _cutoff_integrals(kernel, eta, lmax, panels, nodes, cutoff):
    edges = np.concatenate([[0.0], cutoff.inner_radius * 2.0 ** -np.arange(12, 0, -1),
                            np.linspace(cutoff.inner_radius, cutoff.outer_radius, panels + 1)])
    # uniform panels over the inner ball too, so oscillations are resolved everywhere
    inner = np.linspace(0, cutoff.inner_radius, panels + 1)
    edges = np.unique(np.concatenate([edges, inner]))
    s, w = _panels(edges, nodes)
    proj = _project_radial(kernel, s, lmax)
    weight = w * cutoff(s) * s**2
    return {idx: np.sum(weight * spherical_jn(idx.l, eta * s) * f) for idx, f in proj.items()}


def _regularized_integrals(kernel, eta, lmax, panels, nodes):
    edges = np.concatenate([[0.0], np.geomspace(1e-14, 90.0, panels)])
    u, w = _panels(edges, nodes)
    t, wt = u / eta, w / eta
    s_up, s_dn = 1j * t, -1j * t
    proj_up = _project_radial(kernel, s_up, lmax)
    proj_dn = _project_radial(kernel, s_dn, lmax)
    out = {}
    for idx in proj_up:
        l = idx.l
        up = hankel1_series(l, eta * s_up) * proj_up[idx] * s_up**2 * 1j
        dn = hankel2_series(l, eta * s_dn) * proj_dn[idx] * s_dn**2 * (-1j)
        out[idx] = 0.5 * np.sum(wt * (up + dn))
    return out


def oscillatory_oracle(kernel: Callable, eta: Sequence[float], lmax: int = 6,
                       mode: str = "regularized", rtol: float = 1e-10,
                       atol: float = 1e-300, cutoff: Cutoff = CUTOFF,
                       max_refinements: int = 7) -> complex:
    """Fourier integral ``int exp(-i z.eta) k(z) dz`` by harmonic projection and radial quadrature.

    ``kernel(s, theta, phi)`` is the radial-angular profile without cutoff.

    ``mode="cutoff"`` integrates ``cutoff(s) * k`` over ``s <= outer_radius``
    on real Gauss-Legendre panels, doubling them until converged.
    ``mode="regularized"`` evaluates the Abel-regularised integral over
    ``(0, inf)``: ``j_l`` is split into Hankel functions and each half is
    rotated onto the imaginary axis, where it decays like ``exp(-|eta| t)``.
    This drops exactly the smoothing contribution of the cutoff.  The kernel
    must then accept complex ``s`` and behave like ``s^a`` with ``a > l - 2``
    near the origin.
    """
    eta = np.asarray(eta, dtype=float)
    r = float(np.linalg.norm(eta))
    if r <= 0:
        raise DomainError("eta must be non-zero")
    theta = math.acos(max(-1.0, min(1.0, eta[2] / r)))
    phi = math.atan2(eta[1], eta[0])

    def assemble(integrals):
        total = 0j
        for idx, val in integrals.items():
            y = complex(sph_harm_y(idx.l, idx.m, theta, phi))
            total += FOUR_PI * (-1j) ** idx.l * y * val
        return total

    if mode == "cutoff":
        def run(level):
            return assemble(_cutoff_integrals(kernel, r, lmax, 8 * 2**level, 24, cutoff))
    elif mode == "regularized":
        def run(level):
            return assemble(_regularized_integrals(kernel, r, lmax, 40 * 2**level, 16))
    else:
        raise DomainError(f"unknown oracle mode {mode!r}")

    prev = run(0)
    for level in range(1, max_refinements + 1):
        cur = run(level)
        diff = abs(cur - prev)
        if diff <= rtol * abs(cur) + atol:
            return cur
        prev = cur
    raise NumericError(f"oracle did not converge at |eta|={r:g}; last change {diff:.3e}",
                       achieved=diff / max(abs(cur), 1e-300))


@dataclass(frozen=True)
class ClosedFormCheck:
    case: str
    eta: float
    closed: complex
    oracle: complex

    @property
    def rel_error(self) -> float:
        return abs(self.closed - self.oracle) / abs(self.oracle)


def _battery_weights(j: int, keep: Callable[[int], bool]) -> dict[AngularIndex, complex]:
    # fixed, generic weights on every admissible (l, m)
    return {AngularIndex(l, m): complex(1.0 / (1 + l + abs(m)), 0.1 * m)
            for l in range(j + 1) if keep(l) for m in range(-l, l + 1)}


def closed_form_cases() -> list[tuple[str, KernelTerm, HomogeneousTerm]]:
    """Amplitude ``j = 1, 2, 3``, the log term ``j = 1`` and potentials ``j = 0, 1, 2``."""
    cases = []
    for j in (1, 2, 3):
        t = KernelTerm.separable(j, _battery_weights(j, lambda l, j=j: (j - l) % 2 == 1))
        cases.append((f"amplitude_j{j}", t, symbol_from_kernel_term(t)))
    t = KernelTerm.separable(1, _battery_weights(1, lambda l: (1 - l) % 2 == 0), has_log=True)
    cases.append(("log_j1", t, symbol_from_kernel_term(t)))
    for j in (0, 1, 2):
        v = _battery_weights(j, lambda l, j=j: (j - l) % 2 == 0)
        cases.append((f"potential_j{j}", KernelTerm.separable(j - 1, v), potential_symbol(j, v)))
    return cases


def verify_closed_forms(etas: Sequence[float] = (20.0, 50.0, 100.0),
                        direction: Sequence[float] = (1.0, 2.0, 2.0),
                        x: Sequence[float] = (0.1, -0.2, 0.3)) -> list[ClosedFormCheck]:
    """Compare each closed-form symbol with the regularized oscillatory oracle."""
    unit = np.asarray(direction, dtype=float)
    unit = unit / np.linalg.norm(unit)
    x = np.asarray(x, dtype=float)
    out = []
    for name, kernel_term, symbol_term in closed_form_cases():
        lmax = max(i.l for i in kernel_term.angular)
        for r in etas:
            eta = r * unit
            oracle = oscillatory_oracle(kernel_term.sample(x), eta, lmax=lmax)
            out.append(ClosedFormCheck(name, float(r), symbol_term.eval(x, eta), oracle))
    return out


# ------------------------------------------------------------ smoothness

@dataclass(frozen=True)
class SmoothnessPrediction:
    bounded: bool
    exponent: int | None


def smoothness_exponent(p: int, alpha: int, N: int = 0) -> SmoothnessPrediction:
    """Predicted growth exponent ``-3-p-|alpha|-N`` of ``d_z^alpha k``; flagged bounded when ``>= 0``."""
    value = -3 - p - alpha - N
    if value >= 0:
        return SmoothnessPrediction(True, None)
    return SmoothnessPrediction(False, value)


@lru_cache(maxsize=32)
def _cusp_derivative(e: int, alpha: tuple[int, int, int]) -> Callable:
    z = sympy.symbols("z1 z2 z3", real=True)
    expr = (z[0] ** 2 + z[1] ** 2 + z[2] ** 2) ** sympy.Rational(e, 2)
    for axis, count in enumerate(alpha):
        if count:
            expr = sympy.diff(expr, z[axis], count)
    return sympy.lambdify(z, expr, "numpy")


def fit_smoothness_slope(p: int, alpha: tuple[int, int, int], shells: Sequence[int] = range(4, 14),
                         directions: int = 64, seed: int = 0) -> float:
    """Log-log slope of ``max |d_z^alpha |z|^(-3-p)|`` over dyadic shells ``|z| = 2^-i``."""
    func = _cusp_derivative(-3 - p, tuple(alpha))
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(directions, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    logs_r, logs_v = [], []
    for i in shells:
        radius = 2.0 ** -i
        pts = dirs * radius
        vals = np.abs(np.asarray(func(pts[:, 0], pts[:, 1], pts[:, 2]), dtype=float))
        logs_r.append(math.log(radius))
        logs_v.append(math.log(float(np.max(np.broadcast_to(vals, (directions,))))))
    slope, _ = np.polyfit(logs_r, logs_v, 1)
    return float(slope)


# ------------------------------------------------------------ serialisation

def kernel_to_json(expansion: KernelExpansion) -> dict:
    terms = sorted(expansion.terms, key=lambda t: (t.power, t.has_log))
    return {
        "format": KERNEL_FORMAT,
        "symbol_order": expansion.symbol_order,
        "terms": [{"power": t.power, "log": t.has_log,
                   "angular": [{"l": i.l, "m": i.m, "x": c.to_json()} for i, c in t.angular.items()]}
                  for t in terms],
    }


def kernel_from_json(data: Mapping) -> KernelExpansion:
    if data.get("format") != KERNEL_FORMAT:
        raise DomainError(f"expected format {KERNEL_FORMAT!r}, got {data.get('format')!r}")
    terms = []
    for t in data["terms"]:
        ang = AngularExpansion({(e["l"], e["m"]): XFunction.from_json(e["x"]) for e in t["angular"]})
        terms.append(KernelTerm(t["power"], ang, bool(t["log"])))
    return KernelExpansion(tuple(terms), data["symbol_order"])
