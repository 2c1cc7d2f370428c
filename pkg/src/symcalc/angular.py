"""Spherical-harmonic index algebra.

Complex harmonics with the Condon-Shortley phase, Gaunt products computed by
product-Gauss quadrature on the sphere, and the parity bookkeeping used by
every orthogonality constraint in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Iterator, Mapping, NamedTuple

import numpy as np
from scipy.special import sph_harm_y

from .errors import ConstraintError, DomainError

L_MAX = 24
ZERO_TOL = 1e-13


class _IndexBase(NamedTuple):
    l: int
    m: int


class AngularIndex(_IndexBase):
    """Degree and order ``(l, m)`` of a spherical harmonic, with ``|m| <= l``."""

    __slots__ = ()

    def __new__(cls, l: int, m: int) -> "AngularIndex":
        l, m = int(l), int(m)
        if l < 0 or abs(m) > l:
            raise DomainError(f"invalid angular index (l={l}, m={m})")
        if l > L_MAX:
            raise DomainError(f"angular degree {l} exceeds l_max={L_MAX}")
        return super().__new__(cls, l, m)


def as_index(key: Any) -> AngularIndex:
    if isinstance(key, AngularIndex):
        return key
    l, m = key
    return AngularIndex(l, m)


@dataclass(frozen=True)
class Parity:
    """Orthogonality constraint tied to a reference degree.

    An index ``l`` is admissible when ``l <= reference`` and
    ``reference - l`` is even (``odd=False``) or odd (``odd=True``).
    """

    reference: int
    odd: bool = False

    def allows(self, l: int) -> bool:
        return l <= self.reference and (self.reference - l) % 2 == int(self.odd)

    def shifted(self, by: int) -> "Parity":
        return Parity(self.reference + by, self.odd)

    def combine(self, other: "Parity") -> "Parity":
        return Parity(self.reference + other.reference, self.odd != other.odd)

    def describe(self) -> str:
        kind = "odd" if self.odd else "even"
        return f"{kind}-with-{self.reference}"


def is_negligible(coef: Any, tol: float = ZERO_TOL) -> bool:
    if hasattr(coef, "is_negligible"):
        return coef.is_negligible(tol)
    return abs(coef) < tol


class AngularExpansion(Mapping):
    """Finite sum ``sum_lm c_lm Y_lm`` kept in normal form.

    Coefficients may be numbers or any ring-like object exposing
    ``is_negligible`` (for example :class:`symcalc.symbols.XFunction`).
    Coefficients below ``ZERO_TOL`` are dropped on construction, so that
    parity checks stay structural.
    """

    __slots__ = ("_terms", "parity")

    def __init__(self, terms: Mapping | None = None, parity: Parity | None = None):
        clean: dict[AngularIndex, Any] = {}
        for key, coef in (terms or {}).items():
            idx = as_index(key)
            if is_negligible(coef):
                continue
            clean[idx] = coef
        if parity is not None:
            for idx in clean:
                if not parity.allows(idx.l):
                    raise ConstraintError(
                        f"component (l={idx.l}, m={idx.m}) violates the "
                        f"{parity.describe()} constraint",
                        offending=(idx.l, idx.m),
                    )
        self._terms = dict(sorted(clean.items()))
        self.parity = parity

    def __getitem__(self, key) -> Any:
        return self._terms[as_index(key)]

    def __iter__(self) -> Iterator[AngularIndex]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        body = ", ".join(f"({i.l},{i.m}): {c!r}" for i, c in self._terms.items())
        tag = f", parity={self.parity.describe()}" if self.parity else ""
        return f"AngularExpansion({{{body}}}{tag})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AngularExpansion):
            return NotImplemented
        return self._terms == other._terms and self.parity == other.parity

    __hash__ = None  # type: ignore[assignment]

    @property
    def degrees(self) -> set[int]:
        return {idx.l for idx in self._terms}

    def with_parity(self, parity: Parity | None) -> "AngularExpansion":
        return AngularExpansion(self._terms, parity)

    def map(self, func: Callable[[Any], Any], parity: Parity | None = None) -> "AngularExpansion":
        """Apply ``func`` to every coefficient."""
        return AngularExpansion({k: func(c) for k, c in self._terms.items()}, parity)

    def scale(self, factor: Any) -> "AngularExpansion":
        return AngularExpansion({k: c * factor for k, c in self._terms.items()}, self.parity)

    def __neg__(self) -> "AngularExpansion":
        return self.scale(-1)

    def __add__(self, other: "AngularExpansion") -> "AngularExpansion":
        out = dict(self._terms)
        for k, c in other.items():
            out[k] = out[k] + c if k in out else c
        parity = self.parity if self.parity == other.parity else None
        return AngularExpansion(out, parity)

    def __sub__(self, other: "AngularExpansion") -> "AngularExpansion":
        return self + (-other)

    def __mul__(self, other: "AngularExpansion") -> "AngularExpansion":
        """Pointwise product on the sphere, re-expanded with Gaunt coefficients."""
        out: dict[AngularIndex, Any] = {}
        for ka, ca in self._terms.items():
            for kb, cb in other.items():
                prod = ca * cb
                for kc, g in gaunt_expand(ka, kb).items():
                    term = prod * g
                    out[kc] = out[kc] + term if kc in out else term
        parity = None
        if self.parity is not None and other.parity is not None:
            parity = self.parity.combine(other.parity)
        return AngularExpansion(out, parity)

    def evaluate(self, theta, phi) -> np.ndarray:
        """Evaluate a numeric expansion at polar angle ``theta`` and azimuth ``phi``."""
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        total = np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
        for idx, c in self._terms.items():
            total = total + complex(c) * eval_sph_harm(idx, theta, phi)
        return total


def eval_sph_harm(idx, theta, phi):
    """Return ``Y_lm(theta, phi)`` with the Condon-Shortley phase.

    ``theta`` is the polar angle in ``[0, pi]``.
    """
    idx = as_index(idx)
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr < -1e-15) or np.any(theta_arr > math.pi + 1e-15):
        raise DomainError("polar angle must lie in [0, pi]")
    return sph_harm_y(idx.l, idx.m, theta_arr, np.asarray(phi, dtype=float))


@lru_cache(maxsize=64)
def sphere_grid(lmax: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Product-Gauss grid exact for band-limited integrands of degree ``<= 4*lmax + 3``.

    Returns flattened ``(theta, phi, weight)`` arrays.
    """
    n_theta = 2 * lmax + 2
    n_phi = 4 * lmax + 4
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.repeat(w, n_phi) * (2.0 * math.pi / n_phi)
    return tt.ravel(), pp.ravel(), ww


@lru_cache(maxsize=64)
def _harmonic_table(lmax: int, grid_lmax: int) -> dict[AngularIndex, np.ndarray]:
    theta, phi, _ = sphere_grid(grid_lmax)
    return {
        AngularIndex(l, m): sph_harm_y(l, m, theta, phi)
        for l in range(lmax + 1)
        for m in range(-l, l + 1)
    }


def sphere_integral(values: np.ndarray, lmax: int) -> complex:
    """Integrate samples taken on ``sphere_grid(lmax)``."""
    _, _, w = sphere_grid(lmax)
    return complex(np.sum(w * values))


def project(func: Callable[[np.ndarray, np.ndarray], np.ndarray], lmax: int,
            grid_lmax: int | None = None) -> dict[AngularIndex, complex]:
    """Coefficients ``<func, Y_lm>`` for all ``l <= lmax`` by sphere quadrature."""
    grid_lmax = max(lmax, grid_lmax or 0)
    theta, phi, w = sphere_grid(grid_lmax)
    vals = np.asarray(func(theta, phi), dtype=complex)
    table = _harmonic_table(lmax, grid_lmax)
    return {idx: complex(np.sum(w * vals * np.conj(y))) for idx, y in table.items()}


@lru_cache(maxsize=200_000)
def gaunt_coefficient(a: AngularIndex, b: AngularIndex, c: AngularIndex) -> float:
    """``integral Y_a Y_b conj(Y_c) dOmega``, computed by quadrature.

    Selection rules are applied first so forbidden entries are exact zeros.
    """
    if c.m != a.m + b.m:
        return 0.0
    if not abs(a.l - b.l) <= c.l <= a.l + b.l or (a.l + b.l + c.l) % 2:
        return 0.0
    lmax = max(a.l, b.l, c.l)
    theta, phi, w = sphere_grid(lmax)
    integrand = (sph_harm_y(a.l, a.m, theta, phi) * sph_harm_y(b.l, b.m, theta, phi)
                 * np.conj(sph_harm_y(c.l, c.m, theta, phi)))
    # the product of real associated Legendre parts is real; drop the phase noise
    return float(np.real(np.sum(w * integrand)))


@lru_cache(maxsize=50_000)
def _gaunt_table(a: AngularIndex, b: AngularIndex) -> tuple[tuple[AngularIndex, float], ...]:
    M = a.m + b.m
    out = []
    for L in range(abs(a.l - b.l), a.l + b.l + 1, 2):
        if abs(M) > L or L > L_MAX:
            continue
        g = gaunt_coefficient(a, b, AngularIndex(L, M))
        if abs(g) >= ZERO_TOL:
            out.append((AngularIndex(L, M), g))
    return tuple(out)


def gaunt_expand(a, b) -> AngularExpansion:
    """Expand ``Y_a * Y_b`` as ``sum C_LM Y_LM``."""
    return AngularExpansion(dict(_gaunt_table(as_index(a), as_index(b))))


_SQ43 = math.sqrt(4.0 * math.pi / 3.0)
_SQ23 = math.sqrt(2.0 * math.pi / 3.0)

# unit-vector components as degree-1 expansions, axis 1..3 = (x, y, z)
UNIT_VECTOR = {
    1: {AngularIndex(1, -1): _SQ23, AngularIndex(1, 1): -_SQ23},
    2: {AngularIndex(1, -1): 1j * _SQ23, AngularIndex(1, 1): 1j * _SQ23},
    3: {AngularIndex(1, 0): _SQ43},
}


class SolidComponent(NamedTuple):
    """``coefficient * |eta|**radial_power * Z_index`` with ``Z_lm = |eta|^l Y_lm``."""

    index: AngularIndex
    coefficient: complex
    radial_power: int


@lru_cache(maxsize=4096)
def _unit_times(axis: int, idx: AngularIndex) -> tuple[tuple[AngularIndex, complex], ...]:
    acc: dict[AngularIndex, complex] = {}
    for k, u in UNIT_VECTOR[axis].items():
        for kc, g in _gaunt_table(k, idx):
            acc[kc] = acc.get(kc, 0.0) + u * g
    return tuple((k, c) for k, c in sorted(acc.items()) if abs(c) >= ZERO_TOL)


def unit_vector_product(axis: int, idx) -> dict[AngularIndex, complex]:
    """Expansion of ``(eta_axis / |eta|) * Y_idx`` over degrees ``l +- 1``."""
    if axis not in (1, 2, 3):
        raise DomainError("axis must be 1, 2 or 3")
    return dict(_unit_times(axis, as_index(idx)))


def solid_harmonic_decompose(kind: str, axis: int, idx) -> tuple[SolidComponent, ...]:
    """Decompose ``eta_axis * Z_lm`` or ``d/d eta_axis Z_lm`` into solid harmonics.

    ``kind`` is ``"multiply_by_component"`` or ``"differentiate_component"``.
    The multiply case yields degree ``l+1`` terms with radial power 0 and
    degree ``l-1`` terms with radial power 2; the derivative is a pure
    harmonic polynomial of degree ``l-1``.
    """
    idx = as_index(idx)
    parts = unit_vector_product(axis, idx)
    if kind == "multiply_by_component":
        return tuple(SolidComponent(k, c, idx.l + 1 - k.l) for k, c in parts.items())
    if kind == "differentiate_component":
        # eta_a Z_lm = H_{l+1} + |eta|^2 (d_a Z_lm) / (2l+1)
        return tuple(SolidComponent(k, (2 * idx.l + 1) * c, 0)
                     for k, c in parts.items() if k.l == idx.l - 1)
    raise DomainError(f"unknown decomposition kind {kind!r}")
