"""Command-line front end.

Exit status: 0 on success, 1 when a verification fails, 2 on usage or
input errors.  Tabular output is CSV (default) or JSON lines; symbol and
kernel documents are always JSON.  Output files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__, diagrams, kernels, mellin, symbols, verification, wavelets
from .errors import DiagramSyntaxError, ResourceError, SymcalcError

log = logging.getLogger("symcalc")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    pass


# ------------------------------------------------------------ output helpers

def write_atomic(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(value: Any) -> Any:
    return value.item() if hasattr(value, "item") and not isinstance(value, (str, bytes)) else value


def _cell(value: Any) -> Any:
    value = _plain(value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return value


def render_rows(rows: Sequence[dict], fields: Sequence[str], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row[k]) for k in fields})
    else:
        for row in rows:
            buf.write(json.dumps({k: _plain(row[k]) for k in fields}) + "\n")
    return buf.getvalue()


def render_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load_symbol(source: str, truncation: int, seed: int) -> symbols.ClassicalSymbol:
    """``model:ORDER[:odd]`` builds a seeded test symbol; anything else is a JSON path."""
    if source.startswith("model:"):
        parts = source.split(":")[1:]
        try:
            order = int(parts[0])
        except (IndexError, ValueError) as exc:
            raise UsageError(f"bad model symbol spec {source!r}") from exc
        odd = len(parts) > 1 and parts[1] == "odd"
        return symbols.model_symbol(order, truncation, odd, seed)
    try:
        data = json.loads(_read_text(source))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{source}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    try:
        return symbols.symbol_from_json(data)
    except (KeyError, TypeError, IndexError) as exc:
        raise UsageError(f"{source}: malformed symbol document ({type(exc).__name__}: {exc})") from exc


# ------------------------------------------------------------ commands

def cmd_classify(args) -> None:
    text = _read_text(args.file)
    try:
        items = diagrams.read_diagram_file(text)
    except DiagramSyntaxError as exc:
        raise UsageError(f"{args.file}: {exc}") from exc
    rows, mismatches = [], []
    for k, d in enumerate(items, start=1):
        result = diagrams.classify(d)
        if diagrams.classify_by_symbol_propagation(d) != result.symbol_order:
            mismatches.append(k)
        rows.append({"diagram_id": k, "n": result.interaction_count,
                     "order": result.symbol_order, "log_free": result.log_free})
    write_atomic(args.out, render_rows(rows, ["diagram_id", "n", "order", "log_free"], args.format))
    if mismatches:
        raise VerificationFailed(f"rule disagreement for diagrams {mismatches}")


def cmd_iterate(args) -> None:
    model = {"standard": "standard_rpa"}.get(args.model, args.model)
    state = diagrams.iterate(args.steps, model, include_exchange=not args.no_exchange,
                             max_diagrams=args.max_diagrams)
    rows, failed = [], []
    for step in range(1, args.steps + 1):
        partial = diagrams.IterationState(step, state.history[step],
                                          state.history[step] - state.history[step - 1])
        report = diagrams.filtration_report(partial)
        rows.append({"step": step, "diagrams": sum(partial.diagrams.values()),
                     "new_diagrams": sum(partial.progression.values()),
                     "max_order": report.orders[0] if report.orders else "",
                     "min_order": report.orders[-1] if report.orders else "",
                     "expected_max": report.expected_max, "expected_min": report.expected_min,
                     "passed": report.passed})
        if not report.passed:
            failed.append(report.mismatch())
    fields = ["step", "diagrams", "new_diagrams", "max_order", "min_order",
              "expected_max", "expected_min", "passed"]
    write_atomic(args.out, render_rows(rows, fields, args.format))
    if failed:
        raise VerificationFailed("; ".join(failed))


def cmd_symbol_compose(args) -> None:
    a = _load_symbol(args.left, args.truncation, args.seed)
    b = _load_symbol(args.right, args.truncation, args.seed + 1)
    product = symbols.leibniz_product(a, b, convention=args.convention)
    write_atomic(args.out, render_document(symbols.symbol_to_json(product)))
    if not product.is_smoothing() and product.terms[0].parity is not None:
        report = symbols.check_parity(product, seed=args.seed, odd=product.terms[0].parity.odd)
        if not report.passed:
            bad = [e.degree for e in report.entries if not e.passed]
            raise VerificationFailed(f"parity violated at degrees {bad}")


def cmd_kernel_expand(args) -> None:
    sym = _load_symbol(args.symbol, args.truncation, args.seed)
    expansion = kernels.kernel_expansion(sym)
    write_atomic(args.out, render_document(kernels.kernel_to_json(expansion)))
    if args.require_log_free and expansion.has_log:
        raise VerificationFailed("the kernel expansion carries logarithmic terms")


def cmd_kernel_oracle(args) -> None:
    results = kernels.verify_closed_forms(args.eta)
    rows = [{"case": r.case, "eta": r.eta,
             "closed_re": r.closed.real, "closed_im": r.closed.imag,
             "oracle_re": r.oracle.real, "oracle_im": r.oracle.imag,
             "rel_error": r.rel_error, "passed": r.rel_error < args.tolerance} for r in results]
    fields = ["case", "eta", "closed_re", "closed_im", "oracle_re", "oracle_im", "rel_error", "passed"]
    write_atomic(args.out, render_rows(rows, fields, args.format))
    failed = [f"{r['case']}@{r['eta']:g}" for r in rows if not r["passed"]]
    if failed:
        raise VerificationFailed(f"closed forms off the oracle: {failed}")


def cmd_mellin_poles(args) -> None:
    if not 0 <= args.l <= mellin.MAX_L or not 0 <= args.max <= mellin.MAX_L:
        raise UsageError(f"--l and --max must lie in [0, {mellin.MAX_L}]")
    rows = []
    for l in range(args.l + 1):
        poles = mellin.pole_sets(l, args.max, args.max, args.rhs_shift)
        for k in range(args.max + 1):
            for family, value in (("parametrix_plus", 3 + k + l), ("parametrix_minus", 2 + k - l),
                                  ("rhs", 1 - l - k + args.rhs_shift)):
                rows.append({"l": l, "family": family, "index": k, "pole": value,
                             "coalescing": value in poles.coalescing})
    write_atomic(args.out, render_rows(rows, ["l", "family", "index", "pole", "coalescing"], args.format))
    verdict = mellin.log_free_verdict(args.l, args.max, args.max, args.rhs_shift)
    if not verdict.log_free:
        raise VerificationFailed(
            "coalescing poles at " + ", ".join(f"(l={w.l}, w={w.w})" for w in verdict.witnesses))


def cmd_cusp_check(args) -> None:
    model = mellin.CuspModel(args.kappa, args.psi0, args.h_min, args.levels)
    result = mellin.cusp_coefficient(model)
    if result.zero_source:
        rows = [{"h": "", "ratio": 0.0, "extrapolated": "", "observed_order": ""}]
    else:
        rows = []
        for k, (h, raw) in enumerate(zip(result.steps, result.raw)):
            rows.append({"h": h, "ratio": raw,
                         "extrapolated": result.extrapolated[k - 1] if k else "",
                         "observed_order": result.observed_order if k == len(result.steps) - 1 else ""})
    write_atomic(args.out, render_rows(rows, ["h", "ratio", "extrapolated", "observed_order"], args.format))
    if result.zero_source:
        log.info("zero source: the cusp ratio is undefined and reported as 0")
        return
    log.info("ratio %.6f, observed order %.3f", result.ratio, result.observed_order)
    if abs(result.ratio - 0.5) > args.tolerance or result.observed_order < 1.8:
        raise VerificationFailed(
            f"cusp ratio {result.ratio:.6f} (order {result.observed_order:.2f}) misses 1/2")


def _cusp_kernel(p: int) -> wavelets.CuspKernel:
    if p > -4:
        raise UsageError("--p must be at most -4")
    return wavelets.CuspKernel(p)


def cmd_wavelet_rate(args) -> None:
    table = wavelets.analyze(_cusp_kernel(args.p), args.levels, dims=args.dims)
    N_list = [2**k for k in range(int(math.log2(args.n_max)) + 1)]
    report = wavelets.best_n_term(table, N_list, mode=args.norm)
    rows = [{"N": n, "sigma_N": s, "slope": report.slope, "q_min": report.q_min,
             "alpha_max": report.alpha_max, "floor": report.floor}
            for n, s in zip(report.N, report.sigma)]
    write_atomic(args.out, render_rows(rows, ["N", "sigma_N", "slope", "q_min", "alpha_max", "floor"],
                                       args.format))
    if any(a < b for a, b in zip(report.sigma, report.sigma[1:])):
        raise VerificationFailed("sigma_N is not monotone")


def cmd_wavelet_bounds(args) -> None:
    table = wavelets.analyze(_cusp_kernel(args.p), args.levels)
    rows = [{"j1": j1, "j2": j2, "max_abs_coef": c} for j1, j2, c in wavelets.touching_table(table)]
    write_atomic(args.out, render_rows(rows, ["j1", "j2", "max_abs_coef"], args.format))
    report = wavelets.coefficient_bound_check(table, args.p, oracle=not args.no_oracle,
                                              threads=args.threads)
    if report.inconclusive:
        log.warning("fewer than four levels: the exponent fit is inconclusive")
        return
    log.info("fitted (beta1, beta2) = %s, oracle %s", report.fitted, report.oracle)
    if report.oracle is not None and not report.passed:
        raise VerificationFailed(f"fitted exponents {report.fitted} differ from oracle {report.oracle}")


def cmd_verify_all(args) -> None:
    results = verification.run_all(quick=args.quick, seed=args.seed, threads=args.threads)
    rows = [{"check": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    write_atomic(args.out, render_rows(rows, ["check", "passed", "detail"], args.format))
    for r in results:
        log.info(verification.summary_line(r))
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise VerificationFailed(f"failed checks: {', '.join(failed)}")


# ------------------------------------------------------------ parser

def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json-lines"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="symcalc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"symcalc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify diagrams, one per line")
    p.add_argument("file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("iterate", parents=[common], help="run the iteration and check filtration endpoints")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--model", choices=("standard", "standard_rpa", "with_ladders"), default="standard_rpa")
    p.add_argument("--no-exchange", action="store_true")
    p.add_argument("--max-diagrams", type=int, default=diagrams.DEFAULT_MAX_DIAGRAMS)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("symbol", help="symbol algebra")
    ssub = p.add_subparsers(dest="action", required=True)
    q = ssub.add_parser("compose", parents=[common], help="asymptotic Leibniz product of two symbols")
    q.add_argument("left", help="symbol JSON path or model:ORDER[:odd]")
    q.add_argument("right", help="symbol JSON path or model:ORDER[:odd]")
    q.add_argument("--truncation", type=int, default=symbols.DEFAULT_TRUNCATION)
    q.add_argument("--convention", choices=sorted(symbols.LEIBNIZ_FACTORS), default="two_pi_i")
    q.set_defaults(func=cmd_symbol_compose)

    p = sub.add_parser("kernel", help="kernel expansions")
    ksub = p.add_subparsers(dest="action", required=True)
    q = ksub.add_parser("expand", parents=[common], help="singular kernel of a symbol")
    q.add_argument("symbol", help="symbol JSON path or model:ORDER[:odd]")
    q.add_argument("--truncation", type=int, default=symbols.DEFAULT_TRUNCATION)
    q.add_argument("--require-log-free", action="store_true")
    q.set_defaults(func=cmd_kernel_expand)
    q = ksub.add_parser("oracle", parents=[common], help="closed forms against the oscillatory oracle")
    q.add_argument("--eta", type=float, nargs="+", default=[20.0, 50.0, 100.0])
    q.add_argument("--tolerance", type=float, default=1e-3)
    q.set_defaults(func=cmd_kernel_oracle)

    p = sub.add_parser("mellin", help="Mellin pole analysis")
    msub = p.add_subparsers(dest="action", required=True)
    q = msub.add_parser("poles", parents=[common], help="pole table and coalescence check")
    q.add_argument("--l", type=int, default=8)
    q.add_argument("--max", type=int, default=16)
    q.add_argument("--rhs-shift", type=int, default=0, help=argparse.SUPPRESS)
    q.set_defaults(func=cmd_mellin_poles)

    p = sub.add_parser("cusp", help="reduced cusp model")
    csub = p.add_subparsers(dest="action", required=True)
    q = csub.add_parser("check", parents=[common], help="cusp ratio against grid size")
    q.add_argument("--kappa", type=float, default=1.0)
    q.add_argument("--psi0", type=float, default=1.0)
    q.add_argument("--h-min", type=float, default=1e-4)
    q.add_argument("--levels", type=int, default=5)
    q.add_argument("--tolerance", type=float, default=0.01)
    q.set_defaults(func=cmd_cusp_check)

    p = sub.add_parser("wavelet", help="hyperbolic wavelet experiments")
    wsub = p.add_subparsers(dest="action", required=True)
    q = wsub.add_parser("rate", parents=[common], help="best N-term errors of a cusp kernel")
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--levels", type=int, default=8)
    q.add_argument("--dims", choices=("1+1", "3+3"), default="1+1")
    q.add_argument("--norm", choices=("l2", "h1"), default="l2")
    q.add_argument("--n-max", type=int, default=2**14)
    q.set_defaults(func=cmd_wavelet_rate)
    q = wsub.add_parser("bounds", parents=[common], help="touching-coefficient table and exponent fit")
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--levels", type=int, default=8)
    q.add_argument("--no-oracle", action="store_true")
    q.set_defaults(func=cmd_wavelet_bounds)

    p = sub.add_parser("verify-all", parents=[common], help="run every end-to-end check")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_verify_all)
    return parser


def configure_logging() -> None:
    level = os.environ.get("SYMCALC_LOG", "error").lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"SYMCALC_LOG must be one of {sorted(LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(None if argv is None else list(argv))
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        configure_logging()
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be positive")
        args.func(args)
    except VerificationFailed as exc:
        print(f"symcalc: verification failed: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"symcalc: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"symcalc: resource bound exceeded: {exc}", file=sys.stderr)
        return 2
    except SymcalcError as exc:
        print(f"symcalc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"symcalc: invalid parameter: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
