"""Goldstone diagram trees, the fixed-point iteration generator and order classification.

Diagrams are expression trees over eight node kinds.  The order of a diagram is
read off in two independent ways: by stripping ladder insertions and counting
the remaining interaction lines, and by propagating symbol orders bottom-up.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Iterator

from .errors import ArityError, DiagramSyntaxError, ResourceError

SOURCE = "source"
LADDER_KINDS = ("ladder_particle", "ladder_hole", "ladder_particle_hole")
LINEAR_KINDS = ("linear_rpa_direct", "linear_rpa_exchange")
NONLINEAR_KINDS = ("nonlinear_rpa_direct", "nonlinear_rpa_exchange")
KINDS = (SOURCE,) + LADDER_KINDS + LINEAR_KINDS + NONLINEAR_KINDS
ARITY = {SOURCE: 0, **{k: 1 for k in LADDER_KINDS + LINEAR_KINDS}, **{k: 2 for k in NONLINEAR_KINDS}}

SOURCE_ORDER = -4
POTENTIAL_ORDER = -2
PARAMETRIX_SHIFT = -2
DEFAULT_MAX_DIAGRAMS = 2_000_000
DEFAULT_MAX_STEPS = 4


class Diagram:
    """Immutable diagram tree with structural equality and a cached hash."""

    __slots__ = ("kind", "children", "_hash", "size")

    def __init__(self, kind: str, children: tuple["Diagram", ...] = ()):
        if kind not in ARITY:
            raise ArityError(f"unknown diagram kind {kind!r}")
        if len(children) != ARITY[kind]:
            raise ArityError(f"{kind} takes {ARITY[kind]} children, got {len(children)}")
        self.kind = kind
        self.children = tuple(children)
        self._hash = hash((kind, self.children))
        self.size = 1 + sum(c.size for c in self.children)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Diagram):
            return NotImplemented
        return (self._hash == other._hash and self.kind == other.kind
                and self.children == other.children)

    def __repr__(self) -> str:
        return f"Diagram({self.to_text()})"

    def to_text(self) -> str:
        if not self.children:
            return f"({self.kind})"
        return f"({self.kind} " + " ".join(c.to_text() for c in self.children) + ")"


SOURCE_DIAGRAM = Diagram(SOURCE)


def make(kind: str, *children: Diagram) -> Diagram:
    return Diagram(kind, tuple(children))


# ------------------------------------------------------------ parsing

def _tokens(text: str) -> Iterator[tuple[str, int, int]]:
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "()":
            yield ch, line, col
            i += 1
            col += 1
        elif ch.isspace():
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
            i += 1
        else:
            start_col = col
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], line, start_col
            col += j - i
            i = j


def parse_diagram(text: str) -> Diagram:
    """Parse ``(kind child*)``; whitespace-insensitive.

    >>> parse_diagram("(linear_rpa_direct (source))").to_text()
    '(linear_rpa_direct (source))'
    """
    toks = list(_tokens(text))
    if not toks:
        raise DiagramSyntaxError("empty diagram", 1, 1)
    pos = 0

    def parse() -> Diagram:
        nonlocal pos
        if pos >= len(toks):
            last = toks[-1]
            raise DiagramSyntaxError("unexpected end of input", last[1], last[2] + 1)
        tok, line, col = toks[pos]
        if tok != "(":
            raise DiagramSyntaxError(f"expected '(' but found {tok!r}", line, col)
        pos += 1
        if pos >= len(toks):
            raise DiagramSyntaxError("unexpected end of input after '('", line, col + 1)
        kind, kline, kcol = toks[pos]
        if kind in "()":
            raise DiagramSyntaxError("expected a node kind", kline, kcol)
        if kind not in ARITY:
            raise DiagramSyntaxError(f"unknown node kind {kind!r}", kline, kcol)
        pos += 1
        children = []
        while pos < len(toks) and toks[pos][0] == "(":
            children.append(parse())
        if pos >= len(toks):
            raise DiagramSyntaxError("missing ')'", toks[-1][1], toks[-1][2] + 1)
        tok, cline, ccol = toks[pos]
        if tok != ")":
            raise DiagramSyntaxError(f"expected ')' but found {tok!r}", cline, ccol)
        pos += 1
        if len(children) != ARITY[kind]:
            raise ArityError(f"{kind} takes {ARITY[kind]} children, got {len(children)} "
                             f"(line {kline}, column {kcol})")
        return Diagram(kind, tuple(children))

    tree = parse()
    if pos != len(toks):
        tok, line, col = toks[pos]
        raise DiagramSyntaxError(f"trailing input {tok!r}", line, col)
    return tree


def read_diagram_file(text: str) -> list[Diagram]:
    """One diagram per non-blank line; ``#`` starts a comment line."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            out.append(parse_diagram(raw))
        except DiagramSyntaxError as exc:
            raise DiagramSyntaxError(str(exc).rsplit(" (line", 1)[0], lineno, exc.column) from None
    return out


def multi_ladder_diagram() -> Diagram:
    """The multi-ladder example diagram shipped with the package."""
    text = resources.files("symcalc.data").joinpath("multi_ladder.gd").read_text()
    (d,) = read_diagram_file(text)
    return d


# ------------------------------------------------------------ classification

@dataclass(frozen=True)
class DiagramClassification:
    interaction_count: int
    symbol_order: int
    log_free: bool = True


@lru_cache(maxsize=1 << 20)
def strip_ladders(d: Diagram) -> Diagram:
    """Splice out every ladder node, replacing it by its child."""
    if d.kind in LADDER_KINDS:
        return strip_ladders(d.children[0])
    if not d.children:
        return d
    return Diagram(d.kind, tuple(strip_ladders(c) for c in d.children))


@lru_cache(maxsize=1 << 20)
def _interaction_lines(d: Diagram) -> int:
    # counted on a ladder-free tree
    if d.kind == SOURCE:
        return 1
    if d.kind in LINEAR_KINDS:
        return 1 + _interaction_lines(d.children[0])
    if d.kind in NONLINEAR_KINDS:
        return 1 + _interaction_lines(d.children[0]) + _interaction_lines(d.children[1])
    raise ArityError(f"unexpected ladder node {d.kind} in a stripped diagram")


def classify(d: Diagram) -> DiagramClassification:
    """Strip ladders, count interaction lines ``n``; the order is ``-4n``."""
    n = _interaction_lines(strip_ladders(d))
    return DiagramClassification(n, -4 * n, True)


@lru_cache(maxsize=1 << 20)
def classify_by_symbol_propagation(d: Diagram) -> int:
    """Order by composing child orders with the potential and the parametrix."""
    if d.kind == SOURCE:
        return SOURCE_ORDER
    if d.kind in LADDER_KINDS:
        return classify_by_symbol_propagation(d.children[0])
    if d.kind in LINEAR_KINDS:
        return classify_by_symbol_propagation(d.children[0]) + POTENTIAL_ORDER + PARAMETRIX_SHIFT
    left, right = (classify_by_symbol_propagation(c) for c in d.children)
    return left + right + POTENTIAL_ORDER + PARAMETRIX_SHIFT


# ------------------------------------------------------------ iteration

MODELS = {
    "standard_rpa": (LINEAR_KINDS, NONLINEAR_KINDS),
    "with_ladders": (LADDER_KINDS + LINEAR_KINDS, NONLINEAR_KINDS),
}


def _enabled(model: str, include_exchange: bool) -> tuple[tuple[str, ...], tuple[str, ...]]:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    unary, binary = MODELS[model]
    if not include_exchange:
        unary = tuple(k for k in unary if not k.endswith("_exchange"))
        binary = tuple(k for k in binary if not k.endswith("_exchange"))
    return unary, binary


@dataclass(frozen=True)
class IterationState:
    step: int
    diagrams: Counter
    progression: Counter
    history: tuple[Counter, ...] = ()


def projected_count(size: int, unary: int, binary: int) -> int:
    return 1 + unary * size + binary * size * size


def iterate(n: int, model: str = "standard_rpa", include_exchange: bool = True,
            max_diagrams: int = DEFAULT_MAX_DIAGRAMS, max_steps: int = DEFAULT_MAX_STEPS) -> IterationState:
    """Run ``n`` steps of ``tau_{k+1} = {source} + L(tau_k) + N(tau_k, tau_k)``."""
    if n < 0:
        raise ValueError("steps must be non-negative")
    if n > max_steps:
        raise ResourceError(f"{n} steps exceed the configured bound {max_steps}")
    unary, binary = _enabled(model, include_exchange)
    tau = Counter({SOURCE_DIAGRAM: 1})
    history = [tau]
    prev = Counter()
    for step in range(n):
        size = sum(tau.values())
        projected = projected_count(size, len(unary), len(binary))
        if projected > max_diagrams:
            raise ResourceError(
                f"step {step + 1} would hold {projected} diagrams (bound {max_diagrams})",
                projected=projected)
        members = list(tau.elements())
        nxt = Counter({SOURCE_DIAGRAM: 1})
        for d in members:
            for kind in unary:
                nxt[Diagram(kind, (d,))] += 1
        for kind in binary:
            for d1 in members:
                for d2 in members:
                    nxt[Diagram(kind, (d1, d2))] += 1
        prev, tau = tau, nxt
        history.append(tau)
    progression = tau - prev if n else Counter(tau)
    return IterationState(n, tau, progression, tuple(history))


@dataclass(frozen=True)
class FiltrationReport:
    step: int
    orders: tuple[int, ...]
    expected_max: int
    expected_min: int

    @property
    def passed(self) -> bool:
        return bool(self.orders) and self.orders[0] == self.expected_max and self.orders[-1] == self.expected_min

    def mismatch(self) -> str:
        if self.passed:
            return ""
        got = (self.orders[0], self.orders[-1]) if self.orders else None
        return (f"step {self.step}: endpoints {got} differ from "
                f"({self.expected_max}, {self.expected_min})")


def filtration_endpoints(n: int) -> tuple[int, int]:
    return -4 * (n + 1), -4 * (2 ** (n + 1) - 1)


def filtration_report(state: IterationState) -> FiltrationReport:
    """Distinct orders of the progression ``P_n``, sorted descending, with expected endpoints."""
    orders = sorted({classify(d).symbol_order for d in state.progression}, reverse=True)
    hi, lo = filtration_endpoints(state.step)
    return FiltrationReport(state.step, tuple(orders), hi, lo)


# ------------------------------------------------------------ exhaustive trees

def trees_by_size(max_nodes: int, kinds: Iterable[str] = KINDS) -> list[list[Diagram]]:
    """All trees over ``kinds`` grouped by node count (index = size)."""
    kinds = tuple(kinds)
    leaves = [k for k in kinds if ARITY[k] == 0]
    unary = [k for k in kinds if ARITY[k] == 1]
    binary = [k for k in kinds if ARITY[k] == 2]
    by_size: list[list[Diagram]] = [[] for _ in range(max_nodes + 1)]
    if max_nodes >= 1:
        by_size[1] = [Diagram(k) for k in leaves]
    for size in range(2, max_nodes + 1):
        out = by_size[size]
        for k in unary:
            out.extend(Diagram(k, (c,)) for c in by_size[size - 1])
        for left_size in range(1, size - 1):
            right_size = size - 1 - left_size
            for k in binary:
                for a in by_size[left_size]:
                    for b in by_size[right_size]:
                        out.append(Diagram(k, (a, b)))
    return by_size


def all_trees(max_nodes: int, kinds: Iterable[str] = KINDS) -> Iterator[Diagram]:
    for group in trees_by_size(max_nodes, kinds):
        yield from group
