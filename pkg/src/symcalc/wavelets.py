"""Hyperbolic wavelet analysis of model singular kernels.

Kernels ``f(x, y)`` on the unit box pair are expanded in tensor products
``gamma_{j1}(x) gamma_{j2}(y)`` with independent levels per particle group.
The univariate family is Daubechies' orthonormal wavelet with four vanishing
moments.  Coefficients come from a filter bank on l2(Z) with zero extension,
so the transform is exactly orthonormal; the finest scaling coefficients are
obtained from point samples with a moment-matching quadrature rule.

A second, independent route (:func:`dense_coefficients`) integrates the
kernel directly against tabulated wavelets and is used as a regression oracle.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import pywt
from scipy.stats import qmc

from .errors import DomainError, ResourceError
from .kernels import Cutoff

WAVELET = "db4"
J0 = 2
MAX_LEVEL_1D = 10
MAX_LEVEL_3D = 4
MAX_FINE_LEVEL = 12
MAX_SAMPLES = 60_000_000

_OMEGA = Cutoff()
_BOX = Cutoff(inner_radius=0.3, outer_radius=0.48)


# ------------------------------------------------------------ Besov formula

def besov_threshold(p: float) -> tuple[float, float]:
    """``q_min = -3/(1+p)`` and ``alpha_max = 3/q_min - 3/2`` for symbol order ``p``."""
    if p >= -1:
        raise DomainError("the threshold formula needs p < -1")
    if p > -4:
        raise DomainError("kernel orders arising here satisfy p <= -4")
    q_min = -3.0 / (1.0 + p)
    return q_min, 3.0 / q_min - 1.5


# ------------------------------------------------------------ model kernels

def box_cutoff(t: np.ndarray) -> np.ndarray:
    """Smooth 0-1 window: 1 on ``[0.2, 0.8]``, 0 outside ``[0.02, 0.98]``."""
    return _BOX(np.abs(np.asarray(t, dtype=float) - 0.5))


@dataclass(frozen=True)
class CuspKernel:
    """``omega(|x-y|) |x-y|^(-3-p) g(x) b(x) b(y)`` with a smooth Gaussian ``g``.

    ``smooth=True`` replaces the cusp factor by ``exp(-|x-y|^2 / 0.1)``.
    Points are scalars (1+1) or 3-vectors in the last axis (3+3).
    """

    p: int
    smooth: bool = False

    @property
    def exponent(self) -> int:
        return -3 - self.p

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self._evaluate(np.asarray(x, dtype=float), np.asarray(y, dtype=float), vector=False)

    def _evaluate(self, x, y, vector: bool) -> np.ndarray:
        if vector:
            r = np.sqrt(np.sum((x - y) ** 2, axis=-1))
            bx = np.prod(box_cutoff(x), axis=-1)
            by = np.prod(box_cutoff(y), axis=-1)
            g = np.exp(-np.sum((x - 0.5) ** 2, axis=-1))
        else:
            r = np.abs(x - y)
            bx, by = box_cutoff(x), box_cutoff(y)
            g = np.exp(-((x - 0.5) ** 2))
        if self.smooth:
            core = np.exp(-(r**2) / 0.1)
        else:
            core = _OMEGA(r) * r ** self.exponent
        return core * g * bx * by

    def vector(self) -> Callable:
        return lambda x, y: self._evaluate(x, y, vector=True)


@dataclass(frozen=True)
class PolynomialKernel:
    """Polynomial ``sum c_ab x^a y^b`` on the closed box, zero outside."""

    coefficients: tuple[tuple[int, int, float], ...]

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast(x, y).shape)
        for a, b, c in self.coefficients:
            total = total + c * x**a * y**b
        inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
        return np.where(inside, total, 0.0)


def expansion_kernel(expansion, x_point=(0.0, 0.0, 0.0), dims: str = "1+1") -> Callable:
    """Model kernel from a :class:`~symcalc.kernels.KernelExpansion`.

    The singular terms are summed in ``z = x - y`` with their x-coefficients
    frozen at ``x_point`` and multiplied by the box windows.  For ``1+1`` the
    relative coordinate is placed on the third axis.
    """
    from .angular import AngularExpansion

    parts = []
    for term in expansion.terms:
        weights = {idx: complex(c.evaluate(np.asarray(x_point))) for idx, c in term.angular.items()}
        parts.append((term, AngularExpansion(weights)))

    def radial_angular(z: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(z**2, axis=-1))
        safe = np.where(r > 0, r, 1.0)
        theta = np.arccos(np.clip(z[..., 2] / safe, -1.0, 1.0))
        phi = np.arctan2(z[..., 1], z[..., 0])
        total = np.zeros(r.shape, dtype=complex)
        for term, ang in parts:
            radial = np.where(r > 0, safe ** term.power * (np.log(safe) if term.has_log else 1.0), 0.0)
            total = total + radial * ang.evaluate(theta, phi)
        return np.real(total) * _OMEGA(r)

    if dims == "1+1":
        def f(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            z = np.zeros(np.broadcast(x, y).shape + (3,))
            z[..., 2] = x - y
            return radial_angular(z) * box_cutoff(x) * box_cutoff(y)
        return f

    def f3(x, y):
        return (radial_angular(np.asarray(x) - np.asarray(y))
                * np.prod(box_cutoff(x), axis=-1) * np.prod(box_cutoff(y), axis=-1))
    return f3


# ------------------------------------------------------------ filters

@dataclass(frozen=True)
class FilterBank:
    lowpass: np.ndarray
    highpass: np.ndarray
    quadrature: np.ndarray

    @property
    def length(self) -> int:
        return len(self.lowpass)


@lru_cache(maxsize=4)
def filter_bank(name: str = WAVELET) -> FilterBank:
    """Refinement filters and the integer-node quadrature rule for ``phi``.

    The rule ``sum_n w_n p(n) = int phi(t) p(t) dt`` is exact for
    polynomials of degree below the filter length.
    """
    h = np.array(pywt.Wavelet(name).rec_lo)
    L = len(h)
    g = np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])
    n = np.arange(L, dtype=float)
    moments = [1.0]
    for q in range(1, L):
        acc = 0.0
        for r in range(q):
            acc += math.comb(q, r) * moments[r] * float(np.sum(h * n ** (q - r)))
        moments.append(math.sqrt(2.0) / 2 ** (q + 1) * acc / (1.0 - 2.0**-q))
    vander = np.vander(n, L, increasing=True).T
    weights = np.linalg.solve(vander, np.array(moments))
    return FilterBank(h, g, weights)


# ------------------------------------------------------------ l2(Z) filter bank

def _correlate_down(x: np.ndarray, offset: int, filt: np.ndarray, axis: int) -> tuple[np.ndarray, int]:
    """``y[k] = sum_n filt[n - 2k] x[n]`` on l2(Z); ``x[0]`` sits at index ``offset``."""
    L = len(filt)
    N = x.shape[axis]
    kmin = -((L - 1 - offset) // 2)  # ceil((offset - L + 1) / 2)
    kmax = (offset + N - 1) // 2
    M = kmax - kmin + 1
    start = 2 * kmin
    total_len = 2 * (M - 1) + L
    pad_before = offset - start
    pad_after = total_len - pad_before - N
    pad = [(0, 0)] * x.ndim
    pad[axis] = (pad_before, pad_after)
    xp = np.pad(np.moveaxis(x, axis, 0), [pad[axis]] + [(0, 0)] * (x.ndim - 1))
    out = np.zeros((M,) + xp.shape[1:])
    for i in range(L):
        out += filt[i] * xp[i: i + 2 * M - 1: 2]
    return np.moveaxis(out, 0, axis), kmin


def analysis_step(x: np.ndarray, offset: int, axis: int, bank: FilterBank) -> tuple[np.ndarray, np.ndarray, int]:
    approx, k0 = _correlate_down(x, offset, bank.lowpass, axis)
    detail, _ = _correlate_down(x, offset, bank.highpass, axis)
    return approx, detail, k0


def fine_scaling_coefficients(samples: np.ndarray, level: int, axes: Sequence[int],
                              bank: FilterBank) -> tuple[np.ndarray, int]:
    """``<f, phi_{J,k}>`` along ``axes`` from samples at ``i 2^-J``, ``i = 0..2^J``.

    Returns the array and the common first translation index ``-(L-1)``.
    """
    w = bank.quadrature
    L = len(w)
    out = samples
    for axis in axes:
        n = out.shape[axis]
        moved = np.moveaxis(out, axis, 0)
        padded = np.concatenate([np.zeros((L - 1,) + moved.shape[1:]), moved,
                                 np.zeros((L - 1,) + moved.shape[1:])])
        M = n + L - 1
        acc = np.zeros((M,) + moved.shape[1:])
        for i in range(L):
            acc += w[i] * padded[i: i + M]
        out = np.moveaxis(acc * 2.0 ** (-level / 2), 0, axis)
    return out, -(L - 1)


# ------------------------------------------------------------ coefficient table

@dataclass
class CoefficientTable:
    """Flat table of hyperbolic wavelet coefficients.

    Index columns: ``level1, type1, trans1`` and ``level2, type2, trans2``.
    ``type`` is 0 for a pure scaling factor (only at the coarsest level) and
    a positive bit pattern for wavelet factors (in 3D, bit ``i`` marks a
    wavelet along axis ``i``).  Translations have one column per axis.
    """

    dims: str
    j0: int
    j_max: int
    values: np.ndarray
    level1: np.ndarray
    type1: np.ndarray
    trans1: np.ndarray
    level2: np.ndarray
    type2: np.ndarray
    trans2: np.ndarray
    l2_norm_sq: float
    p: int | None = None
    kernel: Callable | None = field(default=None, repr=False)
    filter_length: int = 8

    def __len__(self) -> int:
        return self.values.size

    def energy(self) -> float:
        return float(np.sum(self.values**2))

    def index_tuple(self, i: int) -> tuple:
        return (int(self.level1[i]), int(self.type1[i]), tuple(int(t) for t in self.trans1[i]),
                int(self.level2[i]), int(self.type2[i]), tuple(int(t) for t in self.trans2[i]))

    def support(self, group: int) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper support corners per entry for particle group 1 or 2."""
        level = self.level1 if group == 1 else self.level2
        trans = self.trans1 if group == 1 else self.trans2
        scale = 2.0 ** -level[:, None].astype(float)
        return trans * scale, (trans + self.filter_length - 1) * scale

    def wavelet_mask(self) -> np.ndarray:
        return (self.type1 > 0) & (self.type2 > 0)


def _dwt_blocks_1d(arr: np.ndarray, offset: int, top: int, j0: int, axis: int, bank: FilterBank):
    """Full Mallat decomposition along one axis from level ``top`` to ``j0``."""
    blocks = []
    approx, off = arr, offset
    for level in range(top - 1, j0 - 1, -1):
        approx, detail, k0 = analysis_step(approx, off, axis, bank)
        blocks.append((level, 1, detail, (k0,)))
        off = k0
    blocks.append((j0, 0, approx, (off,)))
    return blocks


def periodic_step(x: np.ndarray, axis: int, bank: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    """One analysis step of the periodized transform on ``[0, 1)`` along ``axis``."""
    moved = np.moveaxis(x, axis, 0)
    N = moved.shape[0]
    idx = (2 * np.arange(N // 2)[:, None] + np.arange(bank.length)[None, :]) % N
    gathered = moved[idx]
    approx = np.tensordot(bank.lowpass, np.moveaxis(gathered, 1, 0), axes=1)
    detail = np.tensordot(bank.highpass, np.moveaxis(gathered, 1, 0), axes=1)
    return np.moveaxis(approx, 0, axis), np.moveaxis(detail, 0, axis)


def _dwt_blocks_3d(arr: np.ndarray, top: int, j0: int, axes: Sequence[int], bank: FilterBank):
    """Isotropic periodized 3D Mallat decomposition over ``axes``; 7 wavelet types per level."""
    blocks = []
    approx = arr
    for level in range(top - 1, j0 - 1, -1):
        parts = {0: approx}
        for bit, axis in enumerate(axes):
            nxt = {}
            for code, a in parts.items():
                nxt[code], nxt[code | (1 << bit)] = periodic_step(a, axis, bank)
            parts = nxt
        blocks.extend((level, code, parts[code]) for code in range(1, 8))
        approx = parts[0]
    blocks.append((j0, 0, approx))
    return blocks


def _translations(shape: Sequence[int], offsets: Sequence[int]) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(n, dtype=np.int16) + o for n, o in zip(shape, offsets)], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def l2_norm_sq(kernel: Callable, dims: str = "1+1", panels: int = 256, nodes: int = 6,
               samples: int = 2**18, seed: int = 0) -> float:
    """Reference ``||f||^2`` by tensor Gauss-Legendre (1+1) or scrambled Sobol points (3+3)."""
    if dims == "1+1":
        x, w = np.polynomial.legendre.leggauss(nodes)
        edges = np.linspace(0, 1, panels + 1)
        pts = ((edges[1:, None] - edges[:-1, None]) / 2 * x + (edges[1:, None] + edges[:-1, None]) / 2).ravel()
        wts = np.tile(w / (2 * panels), panels)
        total = 0.0
        for chunk in np.array_split(np.arange(pts.size), 16):
            vals = kernel(pts[chunk, None], pts[None, :])
            total += float(np.sum(wts[chunk, None] * wts[None, :] * vals**2))
        return total
    pts = qmc.Sobol(6, scramble=True, seed=seed).random(samples)
    vals = kernel(pts[:, :3], pts[:, 3:])
    return float(np.mean(vals**2))


def analyze(kernel: Callable, j_max: int, dims: str = "1+1", j0: int | None = None,
            oversample: int = 3, p: int | None = None, name: str = WAVELET) -> CoefficientTable:
    """All hyperbolic coefficients with levels ``j0..j_max`` per particle group.

    1+1: the fine grid uses ``J = min(j_max + oversample, 12)`` and is low-passed
    to ``j_max + 1`` before the decomposition.  3+3 is a coarse smoke test
    with ``J = j_max + 1``, coarsest level 1 unless ``j0`` is given, and the
    periodized transform, which coincides with zero extension for kernels
    vanishing near the box faces.
    """
    bank = filter_bank(name)
    L = bank.length
    if p is None:
        p = getattr(kernel, "p", None)
    if j0 is None:
        j0 = J0 if dims == "1+1" else 1
    if dims == "1+1":
        if not j0 <= j_max <= MAX_LEVEL_1D:
            raise DomainError(f"1+1 analysis needs {j0} <= j_max <= {MAX_LEVEL_1D}")
        J = min(j_max + oversample, MAX_FINE_LEVEL)
        J = max(J, j_max + 1)
        n = 2**J + 1
        if n * n > MAX_SAMPLES:
            raise ResourceError("fine grid too large", projected=n * n)
        t = np.arange(n) / 2**J
        samples = kernel(t[:, None], t[None, :])
        coeffs, off = fine_scaling_coefficients(samples, J, (0, 1), bank)
        offs = [off, off]
        for _ in range(J - (j_max + 1)):
            for axis in (0, 1):
                coeffs, _, offs[axis] = analysis_step(coeffs, offs[axis], axis, bank)
        rows = []
        for lev1, typ1, block, o1 in _dwt_blocks_1d(coeffs, offs[0], j_max + 1, j0, 0, bank):
            for lev2, typ2, sub, o2 in _dwt_blocks_1d(block, offs[1], j_max + 1, j0, 1, bank):
                tr = _translations(sub.shape, o1 + o2)
                rows.append((sub.ravel(), lev1, typ1, tr[:, :1], lev2, typ2, tr[:, 1:]))
        norm = l2_norm_sq(kernel, "1+1")
    elif dims == "3+3":
        if not j0 <= j_max <= MAX_LEVEL_3D:
            raise DomainError(f"3+3 analysis needs {j0} <= j_max <= {MAX_LEVEL_3D}")
        J = j_max + 1
        n = 2**J
        if n**6 > MAX_SAMPLES:
            raise ResourceError(f"3+3 analysis at J={J} needs {n ** 6} fine coefficients", projected=n**6)
        vec = kernel.vector() if hasattr(kernel, "vector") else kernel
        t = np.arange(n) / n
        grid = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1)
        samples = np.empty((n,) * 6)
        for i in range(n):
            samples[i] = vec(grid[i, :, :, None, None, None, :], grid[None, None, None, :, :, :, :])
        # periodized quadrature rule; the box window makes the kernel vanish near the faces
        w = filter_bank(name).quadrature
        coeffs = samples
        for axis in range(6):
            coeffs = sum(wn * np.roll(coeffs, -k, axis=axis) for k, wn in enumerate(w)) * 2.0 ** (-J / 2)
        del samples, grid
        rows = []
        for lev1, typ1, block in _dwt_blocks_3d(coeffs, J, j0, (0, 1, 2), bank):
            for lev2, typ2, sub in _dwt_blocks_3d(block, J, j0, (3, 4, 5), bank):
                tr = _translations(sub.shape, (0,) * 6)
                rows.append((sub.ravel(), lev1, typ1, tr[:, :3], lev2, typ2, tr[:, 3:]))
        norm = l2_norm_sq(vec, "3+3")
    else:
        raise DomainError(f"unknown dimension setting {dims!r}")

    values = np.concatenate([r[0] for r in rows])
    sizes = [r[0].size for r in rows]
    expand = lambda col: np.concatenate([np.full(s, r[col], dtype=np.int8) for s, r in zip(sizes, rows)])
    return CoefficientTable(
        dims=dims, j0=j0, j_max=j_max, values=values,
        level1=expand(1), type1=expand(2), trans1=np.concatenate([r[3] for r in rows]),
        level2=expand(4), type2=expand(5), trans2=np.concatenate([r[6] for r in rows]),
        l2_norm_sq=norm, p=p, kernel=kernel, filter_length=L,
    )


# ------------------------------------------------------------ best N-term

@dataclass(frozen=True)
class ApproxRateReport:
    N: tuple[int, ...]
    sigma: tuple[float, ...]
    slope: float
    floor: float
    q_min: float | None
    alpha_max: float | None
    mode: str
    warning: str | None = None


def _ranking(table: CoefficientTable, weights: np.ndarray) -> np.ndarray:
    # ties broken by the lexicographic index (level1, type1, trans1, level2, type2, trans2)
    keys = [table.trans2[:, i] for i in range(table.trans2.shape[1] - 1, -1, -1)]
    keys += [table.type2, table.level2]
    keys += [table.trans1[:, i] for i in range(table.trans1.shape[1] - 1, -1, -1)]
    keys += [table.type1, table.level1, -np.abs(weights)]
    return np.lexsort(keys)


def best_n_term(table: CoefficientTable, N_list: Sequence[int] | None = None,
                mode: str = "l2") -> ApproxRateReport:
    """Errors ``sigma_N`` of greedy N-term approximations in the weighted l2 norm.

    ``mode="h1"`` weights each coefficient by ``2^max(j1, j2)``.  The tail
    beyond ``j_max`` enters as a constant floor.
    """
    if mode == "l2":
        weights = table.values.copy()
    elif mode == "h1":
        weights = table.values * 2.0 ** np.maximum(table.level1, table.level2)
    else:
        raise DomainError(f"unknown norm mode {mode!r}")
    if N_list is None:
        N_list = [2**k for k in range(15)]
    warning = None
    size = len(table)
    if max(N_list) > size:
        warning = f"N values above the table size {size} were dropped"
        warnings.warn(warning, stacklevel=2)
        N_list = [n for n in N_list if n <= size]
    order = _ranking(table, weights)
    sq = weights[order] ** 2
    # tail[n] = sum of squares beyond the first n entries
    tail = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    floor_sq = max(table.l2_norm_sq - table.energy(), 0.0) if mode == "l2" else 0.0
    sigma = tuple(float(math.sqrt(tail[n] + floor_sq)) for n in N_list)
    slope = _decade_slope(N_list, sigma)
    q_min = alpha = None
    if table.p is not None and table.p <= -4:
        q_min, alpha = besov_threshold(table.p)
    return ApproxRateReport(tuple(N_list), sigma, slope, math.sqrt(floor_sq), q_min, alpha, mode, warning)


def _decade_slope(N_list: Sequence[int], sigma: Sequence[float]) -> float:
    N = np.asarray(N_list, dtype=float)
    s = np.asarray(sigma)
    top = N.max()
    sel = (N >= top / 10) & (s > 0)
    if sel.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(N[sel]), np.log(s[sel]), 1)
    return float(-slope)


# ------------------------------------------------------------ dense oracle

@lru_cache(maxsize=16)
def _wavefun(level: int, name: str = WAVELET) -> tuple[np.ndarray, np.ndarray]:
    _, psi, x = pywt.Wavelet(name).wavefun(level=level)
    return psi, x


def _shifted_table(psi: np.ndarray, ks: Sequence[int], stride: int) -> tuple[np.ndarray, int]:
    """Columns ``psi`` shifted by ``k * stride`` on a common grid starting at ``min(ks) * stride``."""
    base = min(ks) * stride
    rows = (max(ks) - min(ks)) * stride + psi.size
    table = np.zeros((rows, len(ks)))
    for col, k in enumerate(ks):
        start = k * stride - base
        table[start: start + psi.size, col] = psi
    return table, base


def dense_coefficients(kernel: Callable, j1: int, k1: Sequence[int], j2: int, k2: Sequence[int],
                       resolution: int = 5, name: str = WAVELET) -> np.ndarray:
    """``<f, psi_{j1,k1} psi_{j2,k2}>`` by direct Riemann sums on tabulated wavelets (1+1).

    Both factors are tabulated on the grid of spacing ``2^-(max(j1, j2) + resolution)``,
    the kernel is sampled once on the union of the supports.
    """
    fine = max(j1, j2) + resolution
    h = 2.0 ** -fine
    psi1, _ = _wavefun(fine - j1, name)
    psi2, _ = _wavefun(fine - j2, name)
    # wavefun tables carry one extra end point beyond 7 * 2^level
    t1, base1 = _shifted_table(psi1, k1, 2 ** (fine - j1))
    t2, base2 = _shifted_table(psi2, k2, 2 ** (fine - j2))
    x = h * (base1 + np.arange(t1.shape[0]))
    y = h * (base2 + np.arange(t2.shape[0]))
    acc = np.zeros((len(k1), len(k2)))
    step = max(1, 2_000_000 // y.size)
    for lo in range(0, x.size, step):
        vals = kernel(x[lo: lo + step, None], y[None, :])
        acc += t1[lo: lo + step].T @ (vals @ t2)
    return 2.0 ** ((j1 + j2) / 2) * h * h * acc


def window_translations(level: int, point: float = 0.5, length: int = 8) -> list[int]:
    """Translations whose support ``2^-j [k, k+L-1]`` contains ``point``."""
    top = math.floor(point * 2**level)
    return list(range(top - (length - 1), top + 1))


def _table_window_max(table: CoefficientTable, j1: int, j2: int, point: float) -> float:
    ks1 = set(window_translations(j1, point, table.filter_length))
    ks2 = set(window_translations(j2, point, table.filter_length))
    sel = ((table.level1 == j1) & (table.level2 == j2) & (table.type1 > 0) & (table.type2 > 0))
    idx = np.nonzero(sel)[0]
    keep = [i for i in idx if table.trans1[i, 0] in ks1 and table.trans2[i, 0] in ks2]
    return float(np.max(np.abs(table.values[keep]))) if keep else 0.0


def level_pairs(j_max: int, low: int = 3, span: int = 4) -> list[tuple[int, int]]:
    return [(j1, j2) for j2 in range(low, j_max + 1) for j1 in range(j2, min(j_max, j2 + span) + 1)]


def fit_exponents(pairs: Sequence[tuple[int, int]], maxima: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit ``log2 c = C - beta1 j1 + beta2 j2``."""
    A = np.array([[1.0, -j1, j2] for j1, j2 in pairs])
    b = np.log2(np.asarray(maxima))
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(sol[1]), float(sol[2])


def oracle_exponents(kernel: Callable, pairs: Sequence[tuple[int, int]], point: float = 0.5,
                     resolution: int = 5, threads: int | None = None) -> tuple[tuple[float, float], list[float]]:
    """Exponents from dense-oracle window maxima over the given level pairs."""
    def one(pair):
        j1, j2 = pair
        block = dense_coefficients(kernel, j1, window_translations(j1, point),
                                   j2, window_translations(j2, point), resolution)
        return float(np.max(np.abs(block)))

    with ThreadPoolExecutor(max_workers=threads or 1) as pool:
        maxima = list(pool.map(one, pairs))
    return fit_exponents(pairs, maxima), maxima


@dataclass(frozen=True)
class BoundReport:
    pairs: tuple[tuple[int, int], ...]
    table_maxima: tuple[float, ...]
    fitted: tuple[float, float] | None
    oracle: tuple[float, float] | None
    tolerance: float
    inconclusive: bool

    @property
    def passed(self) -> bool:
        if self.inconclusive or self.fitted is None or self.oracle is None:
            return False
        return all(abs(f - o) <= self.tolerance * abs(o) for f, o in zip(self.fitted, self.oracle))


def coefficient_bound_check(table: CoefficientTable, p: int | None = None, point: float = 0.5,
                            low: int = 3, span: int = 4, tolerance: float = 0.15,
                            oracle: bool = True, threads: int | None = None) -> BoundReport:
    """Fit ``max |c| ~ 2^(-beta1 j1) 2^(beta2 j2)`` over touching windows and compare with the dense oracle.

    Only 1+1 tables are supported; fewer than four levels is inconclusive.
    """
    if table.dims != "1+1":
        raise DomainError("coefficient bounds are checked in the 1+1 testbed")
    pairs = level_pairs(table.j_max, low, span)
    if table.j_max - low + 1 < 4:
        return BoundReport(tuple(pairs), (), None, None, tolerance, True)
    maxima = [_table_window_max(table, j1, j2, point) for j1, j2 in pairs]
    fitted = fit_exponents(pairs, maxima)
    ref = None
    if oracle and table.kernel is not None:
        ref, _ = oracle_exponents(table.kernel, pairs, point, threads=threads)
    return BoundReport(tuple(pairs), tuple(maxima), fitted, ref, tolerance, False)


def touching_table(table: CoefficientTable) -> list[tuple[int, int, float]]:
    """``(j1, j2, max |c|)`` over wavelet entries whose support meets the diagonal."""
    lo1, hi1 = table.support(1)
    lo2, hi2 = table.support(2)
    touching = np.all((lo1 <= hi2) & (lo2 <= hi1), axis=1) & table.wavelet_mask()
    out = []
    for j1 in range(table.j0, table.j_max + 1):
        for j2 in range(table.j0, table.j_max + 1):
            sel = touching & (table.level1 == j1) & (table.level2 == j2)
            if np.any(sel):
                out.append((j1, j2, float(np.max(np.abs(table.values[sel])))))
    return out


def interior_mask(table: CoefficientTable) -> np.ndarray:
    """Entries whose wavelet factors are supported inside the unit box, with at least one wavelet factor."""
    lo1, hi1 = table.support(1)
    lo2, hi2 = table.support(2)
    in1 = np.all((lo1 >= 0) & (hi1 <= 1), axis=1)
    in2 = np.all((lo2 >= 0) & (hi2 <= 1), axis=1)
    w1 = table.type1 > 0
    w2 = table.type2 > 0
    return (w1 & in1) | (w2 & in2)


def separated_mask(table: CoefficientTable) -> np.ndarray:
    """Wavelet entries whose supports are further apart than the coarser support length."""
    lo1, hi1 = table.support(1)
    lo2, hi2 = table.support(2)
    gap = np.maximum(lo1 - hi2, lo2 - hi1).max(axis=1)
    reach = (table.filter_length - 1) * 2.0 ** -np.minimum(table.level1, table.level2)
    return (gap > reach) & table.wavelet_mask()
