"""Classical symbols: homogeneous terms, derivatives and the Leibniz product.

A classical symbol of order ``p`` is stored as a truncated list of
homogeneous terms of degrees ``p, p-1, ..., p-N+1``.  Each term is
``|eta|^d * sum_lm X_lm(x) Y_lm(eta/|eta|)`` with x-coefficients drawn from
the polynomial-times-Gaussian family :class:`XFunction`.  The smoothing
ideal is represented by the empty symbol.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .angular import (
    AngularExpansion,
    AngularIndex,
    Parity,
    eval_sph_harm,
    project,
    unit_vector_product,
)
from .errors import DomainError, TruncationError

DEFAULT_TRUNCATION = 6
ETA_CUTOFF = 1.0
SYMBOL_FORMAT = "symcalc-symbol/1"

Triple = tuple[int, int, int]
Point = tuple[float, float, float]
_ORIGIN: Point = (0.0, 0.0, 0.0)


def _unit(axis: int) -> Triple:
    if axis not in (1, 2, 3):
        raise DomainError("axis must be 1, 2 or 3")
    return tuple(int(i == axis - 1) for i in range(3))  # type: ignore[return-value]


class XFunction:
    """Finite sum of ``coef * x**nu * exp(-width * |x - center|**2)`` on R^3.

    ``width`` is positive except for pure constants (``nu == (0,0,0)``,
    ``width == 0``), so every member and all its derivatives are bounded.
    The family is closed under partial derivatives and products.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple[Triple, float, Point, complex]] = ()):
        acc: dict[tuple[Triple, float, Point], complex] = {}
        for nu, width, center, coef in terms:
            nu = tuple(int(n) for n in nu)
            width = float(width)
            if len(nu) != 3 or min(nu) < 0:
                raise DomainError(f"invalid monomial exponent {nu}")
            if width < 0 or (width == 0 and any(nu)):
                raise DomainError("non-constant terms need a positive Gaussian width")
            center = _ORIGIN if width == 0 else tuple(float(c) for c in center)
            key = (nu, width, center)
            acc[key] = acc.get(key, 0.0) + complex(coef)
        self._terms = {k: c for k, c in sorted(acc.items()) if c != 0}

    @classmethod
    def constant(cls, value: complex) -> "XFunction":
        return cls([((0, 0, 0), 0.0, _ORIGIN, value)])

    @classmethod
    def gaussian(cls, width: float = 1.0, center: Sequence[float] = _ORIGIN,
                 coef: complex = 1.0, nu: Triple = (0, 0, 0)) -> "XFunction":
        return cls([(nu, width, tuple(center), coef)])

    @property
    def terms(self) -> list[tuple[Triple, float, Point, complex]]:
        return [(nu, w, c, coef) for (nu, w, c), coef in self._terms.items()]

    def __repr__(self) -> str:
        return f"XFunction({self.terms!r})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float, complex)):
            other = XFunction.constant(other)
        if not isinstance(other, XFunction):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def is_negligible(self, tol: float) -> bool:
        return all(abs(c) < tol for c in self._terms.values())

    def is_zero(self) -> bool:
        return not self._terms

    def max_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def __call__(self, x) -> np.ndarray | complex:
        return self.evaluate(x)

    def evaluate(self, x) -> np.ndarray | complex:
        """Evaluate at points ``x`` of shape ``(..., 3)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1], dtype=complex)
        for (nu, w, c), coef in self._terms.items():
            mono = x[..., 0] ** nu[0] * x[..., 1] ** nu[1] * x[..., 2] ** nu[2]
            if w:
                d2 = np.sum((x - np.asarray(c)) ** 2, axis=-1)
                mono = mono * np.exp(-w * d2)
            out = out + coef * mono
        return out[()] if out.ndim == 0 else out

    def _scaled(self, factor: complex) -> "XFunction":
        return XFunction((nu, w, c, coef * factor) for (nu, w, c), coef in self._terms.items())

    def __add__(self, other: Any) -> "XFunction":
        if isinstance(other, (int, float, complex)):
            other = XFunction.constant(other)
        if not isinstance(other, XFunction):
            return NotImplemented
        return XFunction(itertools.chain(self.terms, other.terms))

    __radd__ = __add__

    def __neg__(self) -> "XFunction":
        return self._scaled(-1)

    def __sub__(self, other: Any) -> "XFunction":
        return self + (-other)

    def __mul__(self, other: Any) -> "XFunction":
        if isinstance(other, (int, float, complex, np.number)):
            return self._scaled(complex(other))
        if not isinstance(other, XFunction):
            return NotImplemented
        out = []
        for (nu1, w1, c1), a in self._terms.items():
            for (nu2, w2, c2), b in other._terms.items():
                nu = (nu1[0] + nu2[0], nu1[1] + nu2[1], nu1[2] + nu2[2])
                if w1 == 0:
                    out.append((nu, w2, c2, a * b))
                elif w2 == 0:
                    out.append((nu, w1, c1, a * b))
                else:
                    w = w1 + w2
                    center = tuple((w1 * p + w2 * q) / w for p, q in zip(c1, c2))
                    gap = sum((p - q) ** 2 for p, q in zip(c1, c2))
                    out.append((nu, w, center, a * b * math.exp(-w1 * w2 / w * gap)))
        return XFunction(out)

    __rmul__ = __mul__

    def derivative(self, axis: int) -> "XFunction":
        """Partial derivative along coordinate ``axis`` (1, 2 or 3)."""
        i = axis - 1
        e = _unit(axis)
        out = []
        for (nu, w, c), coef in self._terms.items():
            if nu[i]:
                lowered = tuple(n - k for n, k in zip(nu, e))
                out.append((lowered, w, c, coef * nu[i]))
            if w:
                raised = tuple(n + k for n, k in zip(nu, e))
                out.append((raised, w, c, -2.0 * w * coef))
                if c[i]:
                    out.append((nu, w, c, 2.0 * w * c[i] * coef))
        return XFunction(out)

    def to_json(self) -> list[dict]:
        return [{"nu": list(nu), "width": w, "center": list(c),
                 "coef": [coef.real, coef.imag]} for nu, w, c, coef in self.terms]

    @classmethod
    def from_json(cls, data: list[dict]) -> "XFunction":
        return cls((tuple(t["nu"]), t["width"], tuple(t["center"]),
                    complex(t["coef"][0], t["coef"][1])) for t in data)


def _as_xfunction(c: Any) -> XFunction:
    return c if isinstance(c, XFunction) else XFunction.constant(c)


@dataclass(frozen=True)
class HomogeneousTerm:
    """One homogeneous order ``|eta|^degree * sum_lm X_lm(x) Y_lm(eta_hat)``.

    The angular expansion carries the parity tag: its reference degree is
    the term's nominal index within the symbol.
    """

    degree: int
    angular: AngularExpansion

    @classmethod
    def build(cls, degree: int, coefficients: Mapping, reference: int | None = None,
              odd: bool = False) -> "HomogeneousTerm":
        parity = None if reference is None else Parity(reference, odd)
        coeffs = {k: _as_xfunction(c) for k, c in coefficients.items()}
        return cls(degree, AngularExpansion(coeffs, parity))

    @classmethod
    def empty(cls, degree: int, reference: int | None = None, odd: bool = False) -> "HomogeneousTerm":
        return cls.build(degree, {}, reference, odd)

    @property
    def parity(self) -> Parity | None:
        return self.angular.parity

    @property
    def reference(self) -> int | None:
        return None if self.parity is None else self.parity.reference

    def is_empty(self) -> bool:
        return len(self.angular) == 0

    def retagged(self, parity: Parity | None) -> "HomogeneousTerm":
        return HomogeneousTerm(self.degree, self.angular.with_parity(parity))

    def scale(self, factor: complex) -> "HomogeneousTerm":
        return HomogeneousTerm(self.degree, self.angular.scale(factor))

    def __add__(self, other: "HomogeneousTerm") -> "HomogeneousTerm":
        if self.degree != other.degree:
            raise DomainError("cannot add homogeneous terms of different degree")
        return HomogeneousTerm(self.degree, self.angular + other.angular)

    def eval(self, x, eta) -> complex:
        eta = np.asarray(eta, dtype=float)
        r = float(np.linalg.norm(eta))
        if r < ETA_CUTOFF:
            raise DomainError(f"|eta|={r:g} is below the homogeneity cutoff {ETA_CUTOFF:g}")
        theta = math.acos(max(-1.0, min(1.0, eta[2] / r)))
        phi = math.atan2(eta[1], eta[0])
        total = 0j
        for idx, coef in self.angular.items():
            total += complex(coef.evaluate(x)) * complex(eval_sph_harm(idx, theta, phi))
        return total * r ** self.degree


def d_eta(t: HomogeneousTerm, axis: int) -> HomogeneousTerm:
    """Derivative in ``eta_axis``; the degree drops by one and the reference rises by one.

    For ``|eta|^d Y_lm`` the degree ``l+1`` components pick up ``(d-l)`` and
    the degree ``l-1`` components pick up ``(d+l+1)``.
    """
    d = t.degree
    out: dict[AngularIndex, XFunction] = {}
    for idx, coef in t.angular.items():
        for k, c in unit_vector_product(axis, idx).items():
            factor = (d - idx.l) * c if k.l == idx.l + 1 else (d + idx.l + 1) * c
            if factor == 0:
                continue
            term = coef * factor
            out[k] = out[k] + term if k in out else term
    parity = None if t.parity is None else t.parity.shifted(1)
    return HomogeneousTerm(d - 1, AngularExpansion(out, parity))


def d_x(t: HomogeneousTerm, axis: int) -> HomogeneousTerm:
    """Derivative of the x-coefficients; degree and parity are unchanged."""
    return HomogeneousTerm(t.degree, t.angular.map(lambda c: c.derivative(axis), t.parity))


@dataclass(frozen=True)
class ClassicalSymbol:
    """Truncated classical symbol with terms of degrees ``p, p-1, ..., p-N+1``.

    ``leading_order=None`` with no terms is the smoothing (empty) symbol.
    """

    leading_order: int | None
    terms: tuple[HomogeneousTerm, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.leading_order is None:
            if self.terms:
                raise DomainError("the smoothing symbol carries no terms")
            return
        if self.leading_order > -2:
            raise DomainError(f"symbol order {self.leading_order} above -2 is not supported")
        for k, term in enumerate(self.terms):
            if term.degree != self.leading_order - k:
                raise DomainError(
                    f"term {k} has degree {term.degree}, expected {self.leading_order - k}")

    @classmethod
    def smoothing(cls) -> "ClassicalSymbol":
        return cls(None, ())

    @classmethod
    def from_terms(cls, leading_order: int, coefficients: Sequence[Mapping],
                   odd: bool = False) -> "ClassicalSymbol":
        """Build from one ``{(l, m): coef}`` map per order, tagging reference ``k``."""
        terms = tuple(HomogeneousTerm.build(leading_order - k, c, k, odd)
                      for k, c in enumerate(coefficients))
        return cls(leading_order, terms)

    @property
    def truncation_order(self) -> int | float:
        return math.inf if self.is_smoothing() else len(self.terms)

    def is_smoothing(self) -> bool:
        return self.leading_order is None

    def is_empty(self) -> bool:
        return all(t.is_empty() for t in self.terms)

    def term(self, degree: int) -> HomogeneousTerm:
        return self.terms[self.leading_order - degree]

    def scale(self, factor: complex) -> "ClassicalSymbol":
        return ClassicalSymbol(self.leading_order, tuple(t.scale(factor) for t in self.terms))

    def __neg__(self) -> "ClassicalSymbol":
        return self.scale(-1)

    def __add__(self, other: "ClassicalSymbol") -> "ClassicalSymbol":
        return add(self, other)

    def eval(self, x, eta) -> complex:
        return eval_symbol(self, x, eta)


def _retag_for(term: HomogeneousTerm, own_order: int, new_order: int) -> HomogeneousTerm:
    if term.parity is None:
        return term
    shift = new_order - own_order
    return term.retagged(Parity(term.parity.reference + shift, term.parity.odd != bool(shift % 2)))


def add(a: ClassicalSymbol, b: ClassicalSymbol) -> ClassicalSymbol:
    """Termwise sum; the result covers the orders both inputs cover."""
    if a.is_smoothing():
        return b
    if b.is_smoothing():
        return a
    p = max(a.leading_order, b.leading_order)
    floor = max(a.leading_order - len(a.terms), b.leading_order - len(b.terms))
    terms = []
    for deg in range(p, floor, -1):
        parts = [_retag_for(s.term(deg), s.leading_order, p)
                 for s in (a, b) if deg <= s.leading_order]
        total = parts[0]
        for extra in parts[1:]:
            total = total + extra
        terms.append(total)
    return ClassicalSymbol(p, tuple(terms))


def _multi_indices(order: int) -> list[Triple]:
    return [(i, j, order - i - j) for i in range(order + 1) for j in range(order - i + 1)]


LEIBNIZ_FACTORS = {
    # (2 pi i)^{-1} per derivative, the normalisation used in the product formula
    "two_pi_i": 1.0 / (2j * math.pi),
    # -i per derivative, the factor belonging to the exp(-i z.eta) transform
    "fourier": -1j,
}


def leibniz_product(a: ClassicalSymbol, b: ClassicalSymbol, N: int | None = None,
                    convention: str = "two_pi_i") -> ClassicalSymbol:
    """Asymptotic composition ``sum_alpha c^|alpha| / alpha! d_eta^alpha a * d_x^alpha b``.

    ``c`` is ``1/(2 pi i)`` by default; ``convention="fourier"`` uses ``-i``.
    Output order ``k`` collects every ``(i, i', alpha)`` with
    ``i + i' + |alpha| = k``.
    """
    if convention not in LEIBNIZ_FACTORS:
        raise DomainError(f"unknown Leibniz convention {convention!r}")
    if a.is_smoothing() or b.is_smoothing():
        return ClassicalSymbol.smoothing()
    available = min(len(a.terms), len(b.terms))
    if N is None:
        N = available
    if N > available:
        raise TruncationError(f"requested {N} orders but inputs carry only {available}")
    c = LEIBNIZ_FACTORS[convention]

    eta_cache: dict[tuple[int, Triple], HomogeneousTerm] = {}

    def eta_deriv(i: int, alpha: Triple) -> HomogeneousTerm:
        key = (i, alpha)
        if key not in eta_cache:
            if alpha == (0, 0, 0):
                eta_cache[key] = a.terms[i]
            else:
                ax = next(n for n in range(3) if alpha[n])
                lower = tuple(v - (n == ax) for n, v in enumerate(alpha))
                eta_cache[key] = d_eta(eta_deriv(i, lower), ax + 1)
        return eta_cache[key]

    x_cache: dict[tuple[int, Triple], HomogeneousTerm] = {}

    def x_deriv(i: int, alpha: Triple) -> HomogeneousTerm:
        key = (i, alpha)
        if key not in x_cache:
            if alpha == (0, 0, 0):
                x_cache[key] = b.terms[i]
            else:
                ax = next(n for n in range(3) if alpha[n])
                lower = tuple(v - (n == ax) for n, v in enumerate(alpha))
                x_cache[key] = d_x(x_deriv(i, lower), ax + 1)
        return x_cache[key]

    p = a.leading_order + b.leading_order
    out_terms = []
    for k in range(N):
        total: AngularExpansion | None = None
        for order in range(k + 1):
            for alpha in _multi_indices(order):
                weight = c ** order / math.prod(math.factorial(v) for v in alpha)
                for i in range(k - order + 1):
                    ip = k - order - i
                    left = eta_deriv(i, alpha)
                    right = x_deriv(ip, alpha)
                    if left.is_empty() or right.is_empty():
                        continue
                    piece = (left.angular * right.angular).scale(weight)
                    total = piece if total is None else total + piece
        if total is None:
            pa = a.terms[0].parity
            pb = b.terms[0].parity
            parity = Parity(k, pa.odd != pb.odd) if pa and pb else None
            total = AngularExpansion({}, parity)
        out_terms.append(HomogeneousTerm(p - k, total))
    return ClassicalSymbol(p, tuple(out_terms))


@dataclass(frozen=True)
class TermParity:
    degree: int
    index: int
    structural_ok: bool
    max_violation: float
    offending: tuple[tuple[int, int], ...]

    @property
    def passed(self) -> bool:
        return self.structural_ok and self.max_violation < 1e-10


@dataclass(frozen=True)
class ParityReport:
    entries: tuple[TermParity, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def check_parity(s: ClassicalSymbol, samples: int = 3, seed: int = 0, odd: bool = False) -> ParityReport:
    """Check that each term of index ``n`` has no components with ``l > n`` or ``n - l`` odd.

    ``odd=True`` checks the complementary constraint (``n - l`` odd) instead.

    The structural check inspects the stored indices; the numeric check
    re-projects the evaluated term onto ``Y_lm`` at a few sampled ``x``.
    """
    if s.is_smoothing():
        return ParityReport(())
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=(samples, 3)) * 0.5
    entries = []
    for n, term in enumerate(s.terms):
        allowed = Parity(n, odd)
        bad = tuple((i.l, i.m) for i in term.angular if not allowed.allows(i.l))
        lmax = max([i.l for i in term.angular] + [n]) + 1
        worst = 0.0
        for x in xs:
            xvals = {idx: complex(coef.evaluate(x)) for idx, coef in term.angular.items()}
            expansion = AngularExpansion(xvals)
            coeffs = project(expansion.evaluate, lmax)
            for idx, val in coeffs.items():
                if not allowed.allows(idx.l):
                    worst = max(worst, abs(val))
        entries.append(TermParity(term.degree, n, not bad, worst, bad))
    return ParityReport(tuple(entries))


def model_symbol(order: int, truncation: int = DEFAULT_TRUNCATION, odd: bool = False,
                 seed: int = 0) -> ClassicalSymbol:
    """Parity-valid test symbol with Gaussian x-coefficients on every admissible ``(l, m)``.

    Widths, centres and weights are drawn from ``seed``; equal seeds give
    identical symbols.
    """
    rng = np.random.default_rng(seed)
    maps = []
    for k in range(truncation):
        allowed = Parity(k, odd)
        coeffs = {}
        for l in range(k + 1):
            if not allowed.allows(l):
                continue
            for m in range(-l, l + 1):
                coeffs[(l, m)] = XFunction.gaussian(
                    width=float(rng.uniform(0.5, 1.5)), center=tuple(rng.normal(size=3) * 0.3),
                    coef=complex(rng.normal(), rng.normal()))
        maps.append(coeffs)
    return ClassicalSymbol.from_terms(order, maps, odd)


def eval_symbol(s: ClassicalSymbol, x, eta) -> complex:
    """Sum of the stored homogeneous terms at ``(x, eta)``."""
    if s.is_smoothing():
        return 0j
    return sum((t.eval(x, eta) for t in s.terms), 0j)


def symbol_to_json(s: ClassicalSymbol) -> dict:
    terms = []
    for t in s.terms:
        terms.append({
            "degree": t.degree,
            "reference": t.reference,
            "odd": bool(t.parity.odd) if t.parity else None,
            "angular": [{"l": i.l, "m": i.m, "x": c.to_json()} for i, c in t.angular.items()],
        })
    return {"format": SYMBOL_FORMAT, "leading_order": s.leading_order, "terms": terms}


def symbol_from_json(data: Mapping) -> ClassicalSymbol:
    if data.get("format") != SYMBOL_FORMAT:
        raise DomainError(f"expected format {SYMBOL_FORMAT!r}, got {data.get('format')!r}")
    if data["leading_order"] is None:
        return ClassicalSymbol.smoothing()
    terms = []
    for t in sorted(data["terms"], key=lambda t: -t["degree"]):
        coeffs = {(e["l"], e["m"]): XFunction.from_json(e["x"]) for e in t["angular"]}
        terms.append(HomogeneousTerm.build(t["degree"], coeffs, t["reference"], bool(t["odd"])))
    return ClassicalSymbol(data["leading_order"], tuple(terms))
