import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symcalc.angular import AngularExpansion, Parity
from symcalc.errors import ConstraintError, DomainError, TruncationError
from symcalc.kernels import KernelTerm, oscillatory_oracle, symbol_from_kernel_term
from symcalc.symbols import (
    ClassicalSymbol,
    HomogeneousTerm,
    XFunction,
    add,
    check_parity,
    d_eta,
    d_x,
    eval_symbol,
    leibniz_product,
    model_symbol,
    symbol_from_json,
    symbol_to_json,
)

INV_SQRT_4PI = 0.28209479177387814
# -2 / e, the x_1 derivative of exp(-|x|^2) at (1, 0, 0)
GAUSS_DERIVATIVE_AT_E1 = -0.73575888234288464


def unit_term(degree=-4):
    return HomogeneousTerm.build(degree, {(0, 0): 1.0}, 0)


def random_points(n, seed):
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=(n, 3)) * 0.6
    etas = rng.normal(size=(n, 3))
    etas *= (rng.uniform(5, 40, size=n) / np.linalg.norm(etas, axis=1))[:, None]
    return xs, etas


# ------------------------------------------------------------ XFunction

def test_xfunction_product_and_derivative_closure():
    f = XFunction.gaussian(1.0, (0.1, 0, 0), 2.0, (1, 0, 0))
    g = XFunction.gaussian(0.5, (0, 0.2, 0), -1.0)
    x = np.array([0.3, -0.4, 0.2])
    assert (f * g).evaluate(x) == pytest.approx(f.evaluate(x) * g.evaluate(x), rel=1e-13)
    h = 1e-6
    for axis in (1, 2, 3):
        e = np.zeros(3)
        e[axis - 1] = h
        fd = ((f * g).evaluate(x + e) - (f * g).evaluate(x - e)) / (2 * h)
        assert (f * g).derivative(axis).evaluate(x) == pytest.approx(fd, rel=1e-7, abs=1e-10)


def test_xfunction_rejects_unbounded_terms():
    with pytest.raises(DomainError):
        XFunction([((1, 0, 0), 0.0, (0, 0, 0), 1.0)])


def test_xfunction_json_roundtrip():
    f = XFunction.gaussian(0.7, (0.1, 0.2, 0.3), 1.5 - 0.5j, (2, 0, 1)) + XFunction.constant(3.0)
    assert XFunction.from_json(json.loads(json.dumps(f.to_json()))).terms == f.terms


# ------------------------------------------------------------ add

def test_add_zero_symbol_is_identity():
    a = model_symbol(-4, 3)
    zero = ClassicalSymbol.from_terms(-4, [{}, {}, {}])
    total = add(a, zero)
    x, eta = np.array([0.1, 0.2, 0.3]), np.array([3.0, 4.0, 12.0])
    assert eval_symbol(total, x, eta) == pytest.approx(eval_symbol(a, x, eta), rel=1e-14)


def test_add_takes_the_larger_order():
    assert add(model_symbol(-4, 3), model_symbol(-6, 3)).leading_order == -4


def test_add_inverse_gives_empty_terms():
    a = model_symbol(-4, 3)
    assert (a + (-a)).is_empty()


def test_symbols_above_minus_two_are_rejected():
    with pytest.raises(DomainError):
        ClassicalSymbol.from_terms(-1, [{(0, 0): 1.0}])


# ------------------------------------------------------------ derivatives

def test_d_eta_of_constant_angular_part():
    out = d_eta(unit_term(), 3)
    assert out.degree == -5
    assert out.angular.degrees <= {1}


def test_d_eta_twice_lowers_degree_by_two():
    assert d_eta(d_eta(unit_term(), 1), 2).degree == -6


def test_d_eta_matches_central_difference():
    t = model_symbol(-4, 3, seed=5).terms[2]
    x = np.array([0.2, -0.1, 0.3])
    eta = np.array([0.0, 0.0, 40.0])
    h = 1e-3
    for axis in (1, 2, 3):
        e = np.zeros(3)
        e[axis - 1] = h
        fd = (t.eval(x, eta + e) - t.eval(x, eta - e)) / (2 * h)
        assert d_eta(t, axis).eval(x, eta) == pytest.approx(fd, rel=1e-5)


def test_d_x_constant_coefficient_vanishes():
    assert d_x(unit_term(), 1).is_empty()


def test_d_x_gaussian_coefficient():
    t = HomogeneousTerm.build(-4, {(0, 0): XFunction.gaussian(1.0)}, 0)
    x, eta = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 10.0])
    expected = GAUSS_DERIVATIVE_AT_E1 * INV_SQRT_4PI * 10.0**-4
    assert d_x(t, 1).eval(x, eta) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_d_x_preserves_degree(seed):
    t = model_symbol(-6, 3, seed=seed).terms[seed % 3]
    assert d_x(t, 1 + seed % 3).degree == t.degree


def test_derivatives_agree_with_finite_differences_on_samples():
    s = model_symbol(-4, 3, seed=11)
    xs, etas = random_points(20, 2)
    h = 1e-5
    for x, eta in zip(xs, etas):
        for k, t in enumerate(s.terms):
            axis = 1 + k
            e = np.zeros(3)
            e[axis - 1] = h
            fd_eta = (t.eval(x, eta + e) - t.eval(x, eta - e)) / (2 * h)
            fd_x = (t.eval(x + e, eta) - t.eval(x - e, eta)) / (2 * h)
            assert d_eta(t, axis).eval(x, eta) == pytest.approx(fd_eta, rel=1e-5, abs=1e-14)
            assert d_x(t, axis).eval(x, eta) == pytest.approx(fd_x, rel=1e-5, abs=1e-14)


# ------------------------------------------------------------ evaluation

def test_eval_single_unit_term():
    s = ClassicalSymbol(-4, (unit_term(),))
    eta = np.array([1.0, 2.0, 2.0])
    assert s.eval(np.zeros(3), eta) == pytest.approx(INV_SQRT_4PI * 3.0**-4, rel=1e-14)


def test_eval_below_cutoff_is_domain_error():
    with pytest.raises(DomainError):
        ClassicalSymbol(-4, (unit_term(),)).eval(np.zeros(3), np.array([0.1, 0.0, 0.0]))


@pytest.mark.parametrize("lam", [2.0, 5.0])
def test_homogeneity_of_terms(lam):
    s = model_symbol(-4, 4, seed=3)
    xs, etas = random_points(5, 7)
    for t in s.terms:
        for x, eta in zip(xs, etas):
            assert t.eval(x, lam * eta) == pytest.approx(lam**t.degree * t.eval(x, eta), rel=1e-12)


def test_truncated_symbol_matches_oracle_of_model_kernel():
    kernel = KernelTerm.separable(1, {(0, 0): 1.0, (1, 0): 0.4j, (1, 1): 0.2})
    s = ClassicalSymbol(-4, (symbol_from_kernel_term(kernel),))
    x = np.array([0.1, 0.0, 0.2])
    eta = 50.0 * np.array([0.6, 0.0, 0.8])
    oracle = oscillatory_oracle(kernel.sample(x), eta, lmax=2)
    assert abs(s.eval(x, eta) - oracle) < 1e-3 * abs(oracle)


# ------------------------------------------------------------ Leibniz product

def test_product_order_minus_four_times_minus_two():
    assert leibniz_product(model_symbol(-4, 3), model_symbol(-2, 3)).leading_order == -6


def test_product_with_smoothing_symbol_is_smoothing():
    assert leibniz_product(model_symbol(-4, 3), ClassicalSymbol.smoothing()).is_smoothing()


def test_product_truncation_error():
    with pytest.raises(TruncationError):
        leibniz_product(model_symbol(-4, 2), model_symbol(-2, 3), N=3)


@pytest.mark.parametrize("convention", ["two_pi_i", "fourier"])
def test_product_is_associative(convention):
    a, b, c = (model_symbol(p, 3, seed=s) for p, s in ((-4, 1), (-2, 2), (-4, 3)))
    left = leibniz_product(leibniz_product(a, b, convention=convention), c, convention=convention)
    right = leibniz_product(a, leibniz_product(b, c, convention=convention), convention=convention)
    xs, etas = random_points(4, 9)
    for tl, tr in zip(left.terms, right.terms):
        for x, eta in zip(xs, etas):
            vl, vr = tl.eval(x, eta), tr.eval(x, eta)
            assert abs(vl - vr) <= 1e-10 * max(abs(vl), 1e-30)


def test_leading_term_is_pointwise_product():
    a, b = model_symbol(-4, 2, seed=1), model_symbol(-2, 2, seed=2)
    prod = leibniz_product(a, b)
    x, eta = np.array([0.1, 0.2, -0.1]), np.array([5.0, -3.0, 9.0])
    expected = a.terms[0].eval(x, eta) * b.terms[0].eval(x, eta)
    assert prod.terms[0].eval(x, eta) == pytest.approx(expected, rel=1e-12)


@given(st.integers(-8, -2), st.integers(-8, -2), st.integers(0, 50))
def test_order_additivity(p, q, seed):
    prod = leibniz_product(model_symbol(p, 2, seed=seed), model_symbol(q, 2, seed=seed + 1))
    assert prod.leading_order == p + q


# ------------------------------------------------------------ parity

def test_parity_check_flags_injected_component():
    bad = ClassicalSymbol(-4, (HomogeneousTerm.build(-4, {(1, 0): 1.0}),))
    report = check_parity(bad)
    assert not report.passed
    assert report.entries[0].offending == ((1, 0),)
    assert report.entries[0].max_violation > 0.1


def test_parity_check_on_product_of_valid_symbols():
    prod = leibniz_product(model_symbol(-4, 4, seed=1), model_symbol(-2, 4, seed=2))
    report = check_parity(prod)
    assert report.passed
    assert all(e.max_violation < 1e-12 for e in report.entries)


def test_parity_check_on_empty_symbol():
    assert check_parity(ClassicalSymbol.smoothing()).passed


@pytest.mark.parametrize("odd_a,odd_b", [(False, False), (False, True), (True, False), (True, True)])
def test_table_rows_structural_zeros(odd_a, odd_b):
    prod = leibniz_product(model_symbol(-4, 4, odd_a, 1), model_symbol(-2, 4, odd_b, 2))
    expected_odd = odd_a != odd_b
    for n, term in enumerate(prod.terms):
        assert term.parity == Parity(n, expected_odd)
        for idx in term.angular:
            assert idx.l <= n and (n - idx.l) % 2 == int(expected_odd)


def test_wrong_parity_tag_is_rejected():
    with pytest.raises(ConstraintError):
        ClassicalSymbol.from_terms(-4, [{(0, 0): 1.0}, {(0, 0): 1.0}])


# ------------------------------------------------------------ JSON

def test_symbol_json_roundtrip_is_canonical():
    s = model_symbol(-4, 3, seed=4)
    doc = symbol_to_json(s)
    assert doc["format"] == "symcalc-symbol/1"
    back = symbol_from_json(json.loads(json.dumps(doc)))
    assert json.dumps(symbol_to_json(back)) == json.dumps(doc)
    for t in doc["terms"]:
        keys = [(e["l"], e["m"]) for e in t["angular"]]
        assert keys == sorted(keys)


def test_symbol_json_rejects_other_formats():
    with pytest.raises(DomainError):
        symbol_from_json({"format": "other/1"})


def test_model_symbol_is_reproducible():
    assert json.dumps(symbol_to_json(model_symbol(-4, 3, seed=8))) == \
        json.dumps(symbol_to_json(model_symbol(-4, 3, seed=8)))


@pytest.mark.parametrize("convention,factor", [("two_pi_i", 1 / (2j * math.pi)), ("fourier", -1j)])
def test_first_correction_uses_convention_factor(convention, factor):
    a = ClassicalSymbol(-2, (HomogeneousTerm.build(-2, {(0, 0): 1.0}, 0), HomogeneousTerm.empty(-3, 1)))
    b = ClassicalSymbol(-2, (HomogeneousTerm.build(-2, {(0, 0): XFunction.gaussian(1.0)}, 0),
                             HomogeneousTerm.empty(-3, 1)))
    prod = leibniz_product(a, b, convention=convention)
    x, eta = np.array([0.3, -0.2, 0.1]), np.array([2.0, 3.0, 7.0])
    expected = factor * sum(d_eta(a.terms[0], k).eval(x, eta) * d_x(b.terms[0], k).eval(x, eta)
                            for k in (1, 2, 3))
    assert prod.terms[1].eval(x, eta) == pytest.approx(expected, rel=1e-12)
