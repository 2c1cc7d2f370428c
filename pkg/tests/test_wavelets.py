import dataclasses
import math

import numpy as np
import pytest
import pywt
from hypothesis import given
from hypothesis import strategies as st

from symcalc import wavelets as wv
from symcalc.errors import DomainError, ResourceError
from symcalc.kernels import kernel_from_symbol
from symcalc.symbols import HomogeneousTerm


@pytest.fixture(scope="module")
def cusp4():
    return wv.analyze(wv.CuspKernel(-4), 7)


@pytest.fixture(scope="module")
def cusp6():
    return wv.analyze(wv.CuspKernel(-6), 7)


# ------------------------------------------------------------ Besov formula

def test_besov_p4():
    q, a = wv.besov_threshold(-4)
    assert abs(q - 1.0) <= 1e-12 and abs(a - 1.5) <= 1e-12


def test_besov_p6():
    q, a = wv.besov_threshold(-6)
    assert abs(q - 0.6) <= 1e-12 and abs(a - 3.5) <= 1e-12


@given(st.integers(-60, -5))
def test_besov_alpha_grows_as_order_drops(p):
    assert wv.besov_threshold(p - 1)[1] > wv.besov_threshold(p)[1]
    assert wv.besov_threshold(p)[1] == pytest.approx(-(p + 1) - 1.5)


@pytest.mark.parametrize("p", [-1, 0, -3])
def test_besov_domain(p):
    with pytest.raises(DomainError):
        wv.besov_threshold(p)


# ------------------------------------------------------------ filters and transforms

def test_filter_bank_is_orthonormal():
    bank = wv.filter_bank()
    h, g = bank.lowpass, bank.highpass
    assert np.sum(h) == pytest.approx(math.sqrt(2))
    for shift in range(0, 8, 2):
        assert np.dot(h[shift:], h[: len(h) - shift]) == pytest.approx(float(shift == 0), abs=1e-14)
        assert np.dot(h[shift:], g[: len(g) - shift]) == pytest.approx(0.0, abs=1e-14)


def test_highpass_has_four_vanishing_moments():
    g = wv.filter_bank().highpass
    k = np.arange(len(g))
    for m in range(4):
        assert abs(np.sum(g * k**m)) < 1e-10


def test_quadrature_weights_reproduce_scaling_moments():
    # independent reference: cascade-algorithm tables of phi
    phi, _, x = pywt.Wavelet("db4").wavefun(level=14)
    dx = x[1] - x[0]
    w = wv.filter_bank().quadrature
    n = np.arange(len(w))
    for q in range(len(w)):
        exact = np.sum(phi * x**q) * dx
        assert np.sum(w * n**q) == pytest.approx(exact, rel=1e-5, abs=1e-6)


def test_analysis_step_preserves_energy():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(37, 5))
    a, d, _ = wv.analysis_step(x, 3, 0, wv.filter_bank())
    assert np.sum(a**2) + np.sum(d**2) == pytest.approx(np.sum(x**2), rel=1e-13)


def test_periodic_step_preserves_energy():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(4, 32))
    a, d = wv.periodic_step(x, 1, wv.filter_bank())
    assert np.sum(a**2) + np.sum(d**2) == pytest.approx(np.sum(x**2), rel=1e-13)


# ------------------------------------------------------------ coefficient tables

def test_vanishing_moments_on_cubic_polynomial():
    poly = wv.PolynomialKernel(((0, 0, 1.0), (1, 2, 0.7), (3, 0, -0.3), (3, 3, 0.1)))
    table = wv.analyze(poly, 5)
    assert np.max(np.abs(table.values[wv.interior_mask(table)])) <= 1e-12


def test_pure_scaling_only_on_coarsest_level(cusp4):
    assert np.all(cusp4.level1[cusp4.type1 == 0] == cusp4.j0)
    assert np.all(cusp4.level2[cusp4.type2 == 0] == cusp4.j0)
    assert np.all(np.isfinite(cusp4.values))


def test_parseval(cusp4):
    assert abs(cusp4.energy() / cusp4.l2_norm_sq - 1.0) <= 0.01


def test_analysis_is_deterministic(cusp4):
    again = wv.analyze(wv.CuspKernel(-4), 7)
    assert np.array_equal(again.values, cusp4.values)


def test_table_agrees_with_dense_oracle():
    kernel = wv.CuspKernel(-4)
    table = wv.analyze(kernel, 6)
    for j1, j2 in [(4, 4), (6, 3), (5, 6)]:
        ks1, ks2 = wv.window_translations(j1), wv.window_translations(j2)
        dense = wv.dense_coefficients(kernel, j1, ks1, j2, ks2)
        sel = (table.level1 == j1) & (table.level2 == j2) & table.wavelet_mask()
        lookup = {(int(a), int(b)): v for a, b, v in
                  zip(table.trans1[sel, 0], table.trans2[sel, 0], table.values[sel])}
        fast = np.array([[lookup[(a, b)] for b in ks2] for a in ks1])
        assert np.max(np.abs(fast - dense)) <= 1e-4 * np.max(np.abs(dense))


def test_level_bounds():
    with pytest.raises(DomainError):
        wv.analyze(wv.CuspKernel(-4), 11)
    with pytest.raises(DomainError):
        wv.analyze(wv.CuspKernel(-4), 5, dims="3+3")
    with pytest.raises(DomainError):
        wv.analyze(wv.CuspKernel(-4), 3, dims="2+2")


def test_3d_beyond_memory_budget_is_resource_error():
    with pytest.raises(ResourceError) as info:
        wv.analyze(wv.CuspKernel(-4), 4, dims="3+3")
    assert info.value.projected == 2**30


def test_3d_smoke():
    table = wv.analyze(wv.CuspKernel(-4), 2, dims="3+3")
    assert len(table) == 8**6
    assert table.trans1.shape == (8**6, 3)
    assert np.all(np.isfinite(table.values))
    # coarse grid: energy is captured only roughly
    assert 0.7 < table.energy() / table.l2_norm_sq < 1.3


def test_expansion_kernel_matches_cusp_profile():
    exp = kernel_from_symbol(HomogeneousTerm.build(-4, {(0, 0): 1.0}, 0))
    f = wv.expansion_kernel(exp)
    (term,) = exp.terms
    weight = complex(term.angular[(0, 0)].evaluate(np.zeros(3))).real / math.sqrt(4 * math.pi)
    x, y = np.array([0.45, 0.5]), np.array([0.5, 0.6])
    expected = weight * np.abs(x - y) * wv.box_cutoff(x) * wv.box_cutoff(y)
    assert np.allclose(f(x, y), expected, rtol=1e-12)


# ------------------------------------------------------------ best N-term

def test_sigma_is_monotone(cusp4):
    report = wv.best_n_term(cusp4)
    assert report.N == tuple(2**k for k in range(15))
    assert all(a >= b for a, b in zip(report.sigma, report.sigma[1:]))
    assert (report.q_min, report.alpha_max) == wv.besov_threshold(-4)


def test_sigma_at_table_size_is_floor(cusp4):
    report = wv.best_n_term(cusp4, [len(cusp4)])
    assert report.sigma[0] == pytest.approx(report.floor, rel=1e-12, abs=1e-15)


def test_large_n_is_truncated_with_warning():
    table = wv.analyze(wv.CuspKernel(-4), 3)
    with pytest.warns(UserWarning):
        report = wv.best_n_term(table, [1, 2, 10**6])
    assert report.N == (1, 2) and report.warning


def test_h1_mode_is_monotone(cusp4):
    report = wv.best_n_term(cusp4, mode="h1")
    assert report.mode == "h1"
    assert all(a >= b for a, b in zip(report.sigma, report.sigma[1:]))


def test_unknown_norm_mode(cusp4):
    with pytest.raises(DomainError):
        wv.best_n_term(cusp4, mode="h2")


def test_smoother_kernel_approximates_better(cusp4, cusp6):
    a, b = wv.best_n_term(cusp4), wv.best_n_term(cusp6)
    for n, s4, s6 in zip(a.N, a.sigma, b.sigma):
        if n >= 64:
            assert s6 <= s4


def permuted(table, perm):
    cols = {f.name: getattr(table, f.name) for f in dataclasses.fields(table)}
    for name in ("values", "level1", "type1", "trans1", "level2", "type2", "trans2"):
        cols[name] = cols[name][perm]
    return wv.CoefficientTable(**cols)


@given(st.integers(0, 2**32 - 1))
def test_greedy_selection_ignores_storage_order_under_ties(seed):
    base = wv.analyze(wv.PolynomialKernel(((0, 0, 1.0),)), 3)
    rng = np.random.default_rng(seed)
    tied = dataclasses.replace(base, values=np.round(rng.normal(size=len(base)), 1))
    perm = rng.permutation(len(base))
    other = permuted(tied, perm)
    r1, r2 = wv._ranking(tied, tied.values), wv._ranking(other, other.values)
    picked1 = [tied.index_tuple(i) for i in r1[:50]]
    picked2 = [other.index_tuple(i) for i in r2[:50]]
    assert picked1 == picked2
    assert wv.best_n_term(tied, [1, 7, 50]).sigma == wv.best_n_term(other, [1, 7, 50]).sigma


# ------------------------------------------------------------ coefficient bounds

def test_bound_fit_matches_dense_oracle(cusp4):
    report = wv.coefficient_bound_check(cusp4, -4)
    assert not report.inconclusive
    assert report.passed, (report.fitted, report.oracle)


def test_smooth_kernel_decays_by_vanishing_moments():
    table = wv.analyze(wv.CuspKernel(-4, smooth=True), 7)
    report = wv.coefficient_bound_check(table, oracle=False)
    assert report.fitted[0] >= 4.5
    assert not report.passed  # no oracle, no verdict


def test_separated_supports_are_smaller_than_touching(cusp4):
    touching = {(a, b): m for a, b, m in wv.touching_table(cusp4)}
    sep = wv.separated_mask(cusp4)
    for j in range(4, 8):
        sel = sep & (cusp4.level1 == j) & (cusp4.level2 == j)
        assert np.max(np.abs(cusp4.values[sel])) < touching[(j, j)]


def test_largest_equal_level_coefficients_sit_on_the_diagonal(cusp4):
    for j in range(3, 8):
        sel = np.nonzero((cusp4.level1 == j) & (cusp4.level2 == j) & cusp4.wavelet_mask())[0]
        top = sel[np.argmax(np.abs(cusp4.values[sel]))]
        assert cusp4.trans1[top, 0] == cusp4.trans2[top, 0]


def test_too_few_levels_is_inconclusive():
    report = wv.coefficient_bound_check(wv.analyze(wv.CuspKernel(-4), 5), -4)
    assert report.inconclusive and not report.passed


def test_bounds_need_the_1d_testbed():
    table = wv.analyze(wv.CuspKernel(-4), 2, dims="3+3")
    with pytest.raises(DomainError):
        wv.coefficient_bound_check(table)


def test_fit_exponents_recovers_planted_law():
    pairs = wv.level_pairs(9)
    maxima = [2.0 ** (1.5 - 3.2 * j1 + 1.1 * j2) for j1, j2 in pairs]
    b1, b2 = wv.fit_exponents(pairs, maxima)
    assert b1 == pytest.approx(3.2) and b2 == pytest.approx(1.1)
