"""Named end-to-end checks used by ``symcalc verify-all``.

Each check returns a :class:`CheckResult`; none of them raises on a failed
comparison, so a report always covers every check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import diagrams, kernels, mellin, symbols, wavelets


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _timed(name: str, func: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail = func()
    except Exception as exc:  # a crash is reported as a failed check
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, passed, detail, time.perf_counter() - start)


def check_multi_ladder() -> tuple[bool, str]:
    order = diagrams.classify(diagrams.multi_ladder_diagram()).symbol_order
    return order == -16, f"order {order}"


def check_dual_rule(steps: int = 3, max_nodes: int = 9) -> tuple[bool, str]:
    state = diagrams.iterate(steps, "standard_rpa")
    pool = list(state.diagrams) + list(diagrams.all_trees(max_nodes))
    bad = [d for d in pool
           if diagrams.classify(d).symbol_order != diagrams.classify_by_symbol_propagation(d)]
    return not bad, f"{len(pool)} diagrams, {len(bad)} disagreements"


def check_filtration(steps: int = 3) -> tuple[bool, str]:
    reports = [diagrams.filtration_report(diagrams.iterate(n, "standard_rpa")) for n in range(1, steps + 1)]
    failed = [r.mismatch() for r in reports if not r.passed]
    return not failed, "; ".join(failed) or "endpoints match for n = 1..%d" % steps


def check_closed_forms(tolerance: float = 1e-3) -> tuple[bool, str]:
    results = kernels.verify_closed_forms()
    worst = max(r.rel_error for r in results)
    return worst < tolerance, f"{len(results)} comparisons, worst relative error {worst:.2e}"


def check_recurrence_table(j_max: int = 8) -> tuple[bool, str]:
    bad = [(l, j) for j in range(j_max + 1) for l in range(j + 1)
           if kernels.a_coeff_by_recurrence(l, j) != kernels.a_coeff(l, j)]
    return not bad, f"mismatches at {bad}" if bad else f"all l <= j <= {j_max} agree"


def check_log_free(seed: int = 0, truncation: int = 4) -> tuple[bool, str]:
    amplitude = symbols.model_symbol(-4, truncation, seed=seed)
    potential = symbols.model_symbol(-2, truncation, seed=seed + 1)
    products = [symbols.leibniz_product(amplitude, potential),
                symbols.leibniz_product(potential, amplitude),
                symbols.leibniz_product(amplitude, amplitude)]
    products.append(symbols.leibniz_product(products[0], potential))
    logs = [p.leading_order for p in products if kernels.kernel_expansion(p).has_log]
    return not logs, f"{len(products)} composites, log branches at orders {logs}"


def check_mellin(l_max: int = 64) -> tuple[bool, str]:
    verdict = mellin.log_free_verdict(l_max)
    return verdict.log_free, f"minimum gap {min(verdict.gaps.values())}"


def check_cusp() -> tuple[bool, str]:
    result = mellin.cusp_coefficient(mellin.CuspModel())
    ok = abs(result.ratio - 0.5) <= 0.01 and result.observed_order >= 1.8
    return ok, f"ratio {result.ratio:.6f}, observed order {result.observed_order:.3f}"


def check_besov() -> tuple[bool, str]:
    got = [wavelets.besov_threshold(-4), wavelets.besov_threshold(-6)]
    want = [(1.0, 1.5), (0.6, 3.5)]
    ok = all(abs(a - b) <= 1e-12 for g, w in zip(got, want) for a, b in zip(g, w))
    return ok, f"{got}"


def check_wavelets(quick: bool = False, threads: int | None = None) -> tuple[bool, str]:
    notes, ok = [], True
    poly = wavelets.PolynomialKernel(((0, 0, 1.0), (1, 2, 0.7), (3, 0, -0.3), (3, 3, 0.1)))
    table = wavelets.analyze(poly, 5 if quick else 6)
    vm = float(np.max(np.abs(table.values[wavelets.interior_mask(table)])))
    ok &= vm <= 1e-12
    notes.append(f"moments {vm:.1e}")

    level = 7 if quick else 8
    table = wavelets.analyze(wavelets.CuspKernel(-4), level)
    parseval = abs(table.energy() / table.l2_norm_sq - 1.0)
    ok &= parseval <= 0.01
    notes.append(f"parseval {parseval:.1e}")

    report = wavelets.best_n_term(table)
    monotone = all(a >= b for a, b in zip(report.sigma, report.sigma[1:]))
    ok &= monotone
    notes.append(f"monotone {monotone}")

    bounds = wavelets.coefficient_bound_check(table, -4, threads=threads)
    ok &= bounds.passed
    notes.append(f"beta {bounds.fitted} vs oracle {bounds.oracle}")

    slopes = []
    for p in (-4, -6, -8):
        rate = wavelets.best_n_term(wavelets.analyze(wavelets.CuspKernel(p), 8 if quick else 9))
        slopes.append(rate.slope)
    ordered = slopes[0] <= slopes[1] <= slopes[2]
    ok &= ordered
    notes.append("slopes " + ", ".join(f"{s:.3f}" for s in slopes))
    return bool(ok), "; ".join(notes)


def check_parity_table(seed: int = 0) -> tuple[bool, str]:
    rows = []
    for odd_a in (False, True):
        for odd_b in (False, True):
            a = symbols.model_symbol(-4, 4, odd_a, seed)
            b = symbols.model_symbol(-2, 4, odd_b, seed + 1)
            product = symbols.leibniz_product(a, b)
            rows.append(symbols.check_parity(product, odd=odd_a != odd_b, seed=seed).passed)
    return all(rows), f"rows {rows}"


CHECKS: dict[str, Callable[..., tuple[bool, str]]] = {
    "multi_ladder_classification": check_multi_ladder,
    "dual_rule": check_dual_rule,
    "filtration": check_filtration,
    "closed_forms": check_closed_forms,
    "recurrence_table": check_recurrence_table,
    "log_free_composites": check_log_free,
    "mellin_poles": check_mellin,
    "cusp_coefficient": check_cusp,
    "besov_threshold": check_besov,
    "wavelet_properties": check_wavelets,
    "parity_table": check_parity_table,
}


def run_all(quick: bool = False, seed: int = 0, threads: int | None = None) -> list[CheckResult]:
    options: dict[str, dict] = {
        "dual_rule": {"max_nodes": 7 if quick else 9},
        "log_free_composites": {"seed": seed},
        "wavelet_properties": {"quick": quick, "threads": threads},
        "parity_table": {"seed": seed},
    }
    return [_timed(name, lambda f=func, kw=options.get(name, {}): f(**kw)) for name, func in CHECKS.items()]


def summary_line(result: CheckResult) -> str:
    status = "PASS" if result.passed else "FAIL"
    return f"{status} {result.name}: {result.detail} ({result.seconds:.2f} s)"


__all__ = ["CheckResult", "CHECKS", "run_all", "summary_line"]
