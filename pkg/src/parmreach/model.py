"""Parametric DTMC data model, text format parser, and graph utilities.

A :class:`Pdtmc` is a finite state set with a parametric initial
distribution and a parametric transition matrix whose entries are exact
:class:`~parmreach.ratfun.RationalFunction`\\ s.  Models are immutable
after construction and all iteration orders are fixed by state
declaration order, so every downstream computation is deterministic.

The text format is line-oriented (``#`` starts a comment)::

    @params p q
    @state s1          # one state per line; order fixes indices
    @init s1 : 1
    @trans s1 -> s2 : 0.4
    @target s5 s9

Expressions support ``+ - * / ^`` with integer and decimal literals
(decimals are exact: ``0.4`` is 2/5) and declared parameter names.
Every state's outgoing row must sum to one *symbolically*; so must the
initial distribution.  Targets must already be absorbing in the file --
:func:`preprocess` is the programmatic way to absorb them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ParmreachError
from .polycore import MissingAssignment, Variable, variable
from .ratfun import (
    DivisionByZeroFunction,
    EvalDenominatorZero,
    RationalFunction,
    rf_add,
    rf_const,
    rf_div,
    rf_eval,
    rf_mul,
    rf_neg,
    rf_of_variable,
    rf_one,
    rf_pow,
    rf_sub,
    rf_sum,
    rf_zero,
)

__all__ = [
    "ModelSyntaxError",
    "UnknownState",
    "RowSumNotOne",
    "TargetNotAbsorbing",
    "NotWellDefined",
    "Pdtmc",
    "Dtmc",
    "Evaluation",
    "SccNode",
    "SccTree",
    "parse_model",
    "parse_expression",
    "evaluate",
    "is_graph_preserving",
    "inp",
    "out",
    "tarjan_sccs",
    "build_scc_tree",
    "preprocess",
]


class ModelSyntaxError(ParmreachError):
    """Malformed model source; message carries line (and column) info."""


class UnknownState(ParmreachError):
    """A directive references a state that has not been declared."""


class RowSumNotOne(ParmreachError):
    """A transition row (or the initial distribution) does not sum to one.

    Attributes
    ----------
    state:
        The offending state, or ``"@init"`` for the initial distribution.
    residual:
        ``1 - (row sum)`` as a rational function.
    """

    def __init__(self, state: str, residual: RationalFunction):
        self.state = state
        self.residual = residual
        super().__init__(f"probabilities leaving {state!r} sum to 1 - ({residual}), not 1")


class TargetNotAbsorbing(ParmreachError):
    """A declared target state has transitions other than a self-loop 1."""


class NotWellDefined(ParmreachError):
    """Evaluation does not yield a DTMC; lists every violated condition."""

    def __init__(self, violations: Sequence[str]):
        self.violations = tuple(violations)
        super().__init__("; ".join(violations))


# ---------------------------------------------------------------------------
# Core types
# ---------------------------------------------------------------------------


class Pdtmc:
    """An immutable parametric DTMC.

    ``init`` and ``trans`` store only nonzero entries; iteration over
    states, rows, and row entries always follows state declaration
    order.  The constructor normalizes ordering and drops zero entries
    but performs no stochasticity checks -- the parser (and internal
    constructions, by design) establish those.
    """

    __slots__ = ("states", "params", "init", "trans", "targets", "_index", "_preds")

    def __init__(
        self,
        states: Sequence[str],
        params: Sequence[Variable],
        init: Mapping[str, RationalFunction],
        trans: Mapping[str, Mapping[str, RationalFunction]],
        targets: Iterable[str] = (),
    ):
        sts = tuple(states)
        if len(set(sts)) != len(sts):
            raise ValueError("duplicate state labels")
        index = {s: i for i, s in enumerate(sts)}
        for s in init:
            if s not in index:
                raise ValueError(f"init references unknown state {s!r}")
        for s, row in trans.items():
            if s not in index:
                raise ValueError(f"transition source {s!r} is not a state")
            for t in row:
                if t not in index:
                    raise ValueError(f"transition destination {t!r} is not a state")
        tgt = tuple(sorted(set(targets), key=index.__getitem__))
        for t in tgt:
            if t not in index:
                raise ValueError(f"target {t!r} is not a state")

        object.__setattr__(self, "states", sts)
        object.__setattr__(self, "params", tuple(dict.fromkeys(params)))
        object.__setattr__(
            self,
            "init",
            {s: init[s] for s in sts if s in init and not init[s].is_zero},
        )
        norm_trans: dict[str, dict[str, RationalFunction]] = {}
        for s in sts:
            row = trans.get(s)
            if not row:
                continue
            entries = {t: row[t] for t in sorted(row, key=index.__getitem__) if not row[t].is_zero}
            if entries:
                norm_trans[s] = entries
        object.__setattr__(self, "trans", norm_trans)
        object.__setattr__(self, "targets", tgt)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_preds", None)

    def __setattr__(self, key, value):  # pragma: no cover - guard only
        raise AttributeError("Pdtmc is immutable")

    # -- queries ---------------------------------------------------------

    def index(self, s: str) -> int:
        return self._index[s]

    def has_state(self, s: str) -> bool:
        return s in self._index

    def row(self, s: str) -> Mapping[str, RationalFunction]:
        return self.trans.get(s, {})

    def prob(self, s: str, t: str) -> RationalFunction:
        return self.trans.get(s, {}).get(t, rf_zero())

    def successors(self, s: str) -> tuple[str, ...]:
        return tuple(self.trans.get(s, {}))

    def predecessors(self, s: str) -> tuple[str, ...]:
        preds = self._preds
        if preds is None:
            preds = {t: [] for t in self.states}
            for u in self.states:
                for v in self.trans.get(u, {}):
                    preds[v].append(u)
            preds = {t: tuple(us) for t, us in preds.items()}
            object.__setattr__(self, "_preds", preds)
        return preds[s]

    @property
    def initial_states(self) -> tuple[str, ...]:
        return tuple(self.init)

    def is_absorbing(self, s: str) -> bool:
        row = self.trans.get(s, {})
        return len(row) == 1 and s in row and row[s].is_one

    @property
    def absorbing_states(self) -> tuple[str, ...]:
        return tuple(s for s in self.states if self.is_absorbing(s))

    def sort_states(self, it: Iterable[str]) -> tuple[str, ...]:
        """Deterministic order: by declaration index."""
        return tuple(sorted(it, key=self._index.__getitem__))

    def __repr__(self) -> str:
        return (
            f"Pdtmc({len(self.states)} states, {len(self.params)} params, "
            f"{sum(len(r) for r in self.trans.values())} transitions, "
            f"targets={list(self.targets)})"
        )


@dataclass(frozen=True)
class Dtmc:
    """A concrete (parameter-free) DTMC produced by :func:`evaluate`."""

    states: tuple[str, ...]
    init: Mapping[str, Fraction]
    trans: Mapping[str, Mapping[str, Fraction]]
    targets: tuple[str, ...] = ()


class Evaluation:
    """A total assignment of rational values to the model parameters."""

    __slots__ = ("assignment",)

    def __init__(self, assignment: Mapping[Variable, Fraction | int]):
        object.__setattr__(
            self, "assignment", {v: Fraction(x) for v, x in assignment.items()}
        )

    def __setattr__(self, key, value):  # pragma: no cover - guard only
        raise AttributeError("Evaluation is immutable")

    def require_total(self, params: Iterable[Variable]) -> None:
        missing = [v.name for v in params if v not in self.assignment]
        if missing:
            raise MissingAssignment(f"no value for parameter(s): {', '.join(missing)}")

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.name}={x}" for v, x in self.assignment.items())
        return f"Evaluation({inner})"


# ---------------------------------------------------------------------------
# Expression parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class _ExprParser:
    """Recursive-descent parser producing a RationalFunction.

    Grammar::

        expr   := term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := '-'? atom ('^' uint)?
        atom   := uint | decimal | ident | '(' expr ')'
    """

    def __init__(self, text: str, params: Mapping[str, Variable], where: str):
        self.text = text
        self.params = params
        self.where = where
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip():
                    self._fail(pos, f"unexpected character {text[pos:].strip()[0]!r}")
                break
            kind = m.lastgroup
            assert kind is not None
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _fail(self, col: int, msg: str) -> None:
        raise ModelSyntaxError(f"{self.where}, column {col + 1}: {msg}")

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self) -> tuple[str, str, int]:
        tok = self._peek()
        if tok is None:
            self._fail(len(self.text), "unexpected end of expression")
        self.i += 1
        return tok

    def parse(self) -> RationalFunction:
        value = self._expr()
        tok = self._peek()
        if tok is not None:
            self._fail(tok[2], f"unexpected {tok[1]!r}")
        return value

    def _expr(self) -> RationalFunction:
        value = self._term()
        while (tok := self._peek()) is not None and tok[1] in "+-":
            self.i += 1
            rhs = self._term()
            value = rf_add(value, rhs) if tok[1] == "+" else rf_sub(value, rhs)
        return value

    def _term(self) -> RationalFunction:
        value = self._factor()
        while (tok := self._peek()) is not None and tok[1] in "*/":
            self.i += 1
            rhs = self._factor()
            if tok[1] == "*":
                value = rf_mul(value, rhs)
            else:
                try:
                    value = rf_div(value, rhs)
                except DivisionByZeroFunction:
                    self._fail(tok[2], "division by an identically zero expression")
        return value

    def _factor(self) -> RationalFunction:
        negate = False
        tok = self._peek()
        if tok is not None and tok[1] == "-":
            self.i += 1
            negate = True
        value = self._atom()
        tok = self._peek()
        if tok is not None and tok[1] == "^":
            self.i += 1
            kind, text, col = self._next()
            if kind != "num" or "." in text:
                self._fail(col, "exponent must be a non-negative integer")
            value = rf_pow(value, int(text))
        return rf_neg(value) if negate else value

    def _atom(self) -> RationalFunction:
        kind, text, col = self._next()
        if kind == "num":
            return rf_const(Fraction(text))
        if kind == "ident":
            v = self.params.get(text)
            if v is None:
                self._fail(col, f"unknown parameter {text!r} (declare it with @params)")
            return rf_of_variable(v)
        if text == "(":
            value = self._expr()
            tok = self._next()
            if tok[1] != ")":
                self._fail(tok[2], "expected ')'")
            return value
        self._fail(col, f"unexpected {text!r}")
        raise AssertionError("unreachable")


def parse_expression(
    text: str, params: Mapping[str, Variable], where: str = "expression"
) -> RationalFunction:
    """Parse a single expression against a parameter table."""
    return _ExprParser(text, params, where).parse()


# ---------------------------------------------------------------------------
# Model parsing
# ---------------------------------------------------------------------------


def parse_model(text: str) -> Pdtmc:
    """Parse model source text into a validated :class:`Pdtmc`.

    Raises :class:`ModelSyntaxError`, :class:`UnknownState`,
    :class:`RowSumNotOne`, or :class:`TargetNotAbsorbing`.
    """
    params: dict[str, Variable] = {}
    states: list[str] = []
    state_set: set[str] = set()
    init: dict[str, RationalFunction] = {}
    trans: dict[str, dict[str, RationalFunction]] = {}
    targets: list[str] = []

    def known(name: str, lineno: int) -> str:
        if name not in state_set:
            raise UnknownState(f"line {lineno}: state {name!r} has not been declared")
        return name

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        bits = line.split(None, 1)
        head = bits[0]
        rest = bits[1].strip() if len(bits) > 1 else ""
        where = f"line {lineno}"
        if head == "@params":
            names = rest.split()
            if not names:
                raise ModelSyntaxError(f"{where}: @params needs at least one name")
            for name in names:
                if not re.fullmatch(r"[A-Za-z_]\w*", name):
                    raise ModelSyntaxError(f"{where}: invalid parameter name {name!r}")
                params.setdefault(name, variable(name))
        elif head == "@state":
            name = rest
            if not re.fullmatch(r"[A-Za-z_]\w*", name):
                raise ModelSyntaxError(f"{where}: @state takes exactly one identifier")
            if name in state_set:
                raise ModelSyntaxError(f"{where}: duplicate state {name!r}")
            states.append(name)
            state_set.add(name)
        elif head == "@init":
            lhs, sep, expr = rest.partition(":")
            if not sep:
                raise ModelSyntaxError(f"{where}: expected '@init <state> : <expr>'")
            s = known(lhs.strip(), lineno)
            if s in init:
                raise ModelSyntaxError(f"{where}: duplicate @init for {s!r}")
            f = parse_expression(expr, params, where)
            if not f.is_zero:
                init[s] = f
        elif head == "@trans":
            lhs, sep, expr = rest.partition(":")
            if not sep or "->" not in lhs:
                raise ModelSyntaxError(f"{where}: expected '@trans <state> -> <state> : <expr>'")
            src_txt, _, dst_txt = lhs.partition("->")
            s = known(src_txt.strip(), lineno)
            t = known(dst_txt.strip(), lineno)
            row = trans.setdefault(s, {})
            if t in row:
                raise ModelSyntaxError(f"{where}: duplicate transition {s!r} -> {t!r}")
            f = parse_expression(expr, params, where)
            if not f.is_zero:
                row[t] = f
        elif head == "@target":
            names = rest.split()
            if not names:
                raise ModelSyntaxError(f"{where}: @target needs at least one state")
            for name in names:
                s = known(name, lineno)
                if s not in targets:
                    targets.append(s)
        else:
            raise ModelSyntaxError(f"{where}: unknown directive {head!r}")

    if not states:
        raise ModelSyntaxError("model declares no states")
    if not init:
        raise ModelSyntaxError("model declares no initial distribution (@init)")

    one = rf_one()
    residual = rf_sub(one, rf_sum(init.values()))
    if not residual.is_zero:
        raise RowSumNotOne("@init", residual)
    for s in states:
        residual = rf_sub(one, rf_sum(trans.get(s, {}).values()))
        if not residual.is_zero:
            raise RowSumNotOne(s, residual)
    for t in targets:
        row = trans.get(t, {})
        if not (len(row) == 1 and t in row and row[t].is_one):
            raise TargetNotAbsorbing(
                f"target {t!r} must carry exactly a self-loop with probability 1"
            )

    return Pdtmc(states, tuple(params.values()), init, trans, targets)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _coerce(u: "Evaluation | Mapping[Variable, Fraction | int]") -> Evaluation:
    return u if isinstance(u, Evaluation) else Evaluation(u)


def evaluate(m: Pdtmc, u: "Evaluation | Mapping[Variable, Fraction | int]") -> Dtmc:
    """Instantiate the parameters, checking the result is a DTMC.

    Entries whose denominator vanishes at *u* count as 0 (they are
    dropped from the sparse matrix); if that or a range violation breaks
    stochasticity, :class:`NotWellDefined` reports every violated
    condition at once.
    """
    ev = _coerce(u)
    ev.require_total(m.params)
    a = ev.assignment
    violations: list[str] = []

    def num(f: RationalFunction, what: str) -> Fraction | None:
        try:
            val = rf_eval(f, a)
        except EvalDenominatorZero:
            violations.append(f"{what}: denominator of ({f}) vanishes (entry treated as 0)")
            return None
        if val < 0 or val > 1:
            violations.append(f"{what}: value {val} outside [0, 1]")
            return None
        return val

    init: dict[str, Fraction] = {}
    for s, f in m.init.items():
        val = num(f, f"initial probability of {s!r}")
        if val:
            init[s] = val
    if sum(init.values()) != 1:
        violations.append(f"initial distribution sums to {sum(init.values())}, not 1")

    trans: dict[str, dict[str, Fraction]] = {}
    for s, row in m.trans.items():
        ev_row: dict[str, Fraction] = {}
        for t, f in row.items():
            val = num(f, f"transition {s!r} -> {t!r}")
            if val:
                ev_row[t] = val
        if sum(ev_row.values()) != 1:
            violations.append(f"row of {s!r} sums to {sum(ev_row.values())}, not 1")
        if ev_row:
            trans[s] = ev_row

    if violations:
        raise NotWellDefined(violations)
    return Dtmc(m.states, init, trans, m.targets)


def is_graph_preserving(
    m: Pdtmc, u: "Evaluation | Mapping[Variable, Fraction | int]"
) -> bool:
    """True iff *u* yields a DTMC and keeps every nonzero edge positive."""
    ev = _coerce(u)
    ev.require_total(m.params)
    a = ev.assignment
    for row in m.trans.values():
        for f in row.values():
            try:
                if rf_eval(f, a) <= 0:
                    return False
            except EvalDenominatorZero:
                return False
    try:
        evaluate(m, ev)
    except NotWellDefined:
        return False
    return True


# ---------------------------------------------------------------------------
# Graph utilities
# ---------------------------------------------------------------------------


def inp(m: Pdtmc, K: Iterable[str]) -> tuple[str, ...]:
    """Input states of K: initial probability mass or an edge from outside."""
    ks = set(K)
    result = []
    for s in m.sort_states(ks):
        if s in m.init or any(p not in ks for p in m.predecessors(s)):
            result.append(s)
    return tuple(result)


def out(m: Pdtmc, K: Iterable[str]) -> tuple[str, ...]:
    """Output states of K: outside states fed by an edge from inside K."""
    ks = set(K)
    result: set[str] = set()
    for s in ks:
        for t in m.trans.get(s, {}):
            if t not in ks:
                result.add(t)
    return m.sort_states(result)


def tarjan_sccs(m: Pdtmc, restriction: Iterable[str] | None = None) -> list[tuple[str, ...]]:
    """Strongly connected components of the subgraph induced by *restriction*.

    Returns a partition (singletons included) in reverse topological
    order of the condensation: a component is emitted only after every
    component reachable from it.  Iteration follows declaration order,
    so the output is deterministic.  Iterative implementation; immune to
    recursion limits on long chains.
    """
    allowed = set(m.states if restriction is None else restriction)
    order = [s for s in m.states if s in allowed]
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[tuple[str, ...]] = []
    counter = 0

    for root in order:
        if root in index:
            continue
        # explicit DFS stack of (state, iterator over its successors)
        work = [(root, iter([t for t in m.trans.get(root, {}) if t in allowed]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            s, it = work[-1]
            advanced = False
            for t in it:
                if t not in index:
                    index[t] = low[t] = counter
                    counter += 1
                    stack.append(t)
                    on_stack.add(t)
                    work.append((t, iter([u for u in m.trans.get(t, {}) if u in allowed])))
                    advanced = True
                    break
                if t in on_stack:
                    low[s] = min(low[s], index[t])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[s])
            if low[s] == index[s]:
                comp = []
                while True:
                    t = stack.pop()
                    on_stack.discard(t)
                    comp.append(t)
                    if t == s:
                        break
                sccs.append(m.sort_states(comp))
    return sccs


def _nontrivial(m: Pdtmc, scc: tuple[str, ...]) -> bool:
    """A component matters if it can loop: several states, or a self-loop."""
    return len(scc) > 1 or scc[0] in m.trans.get(scc[0], {})


@dataclass(frozen=True)
class SccNode:
    """One component in the hierarchical decomposition."""

    states: tuple[str, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    children: tuple["SccNode", ...]


@dataclass(frozen=True)
class SccTree:
    """Nested loop structure: top-level components of the whole graph,
    each decomposed again after removing its own input states."""

    roots: tuple[SccNode, ...]

    def __iter__(self):
        def walk(nodes):
            for n in nodes:
                yield n
                yield from walk(n.children)

        return walk(self.roots)


def build_scc_tree(m: Pdtmc) -> SccTree:
    """Hierarchical decomposition: each node's children are the looping
    components of the node's states minus its input states."""

    def decompose(region: tuple[str, ...]) -> tuple[SccNode, ...]:
        nodes = []
        for scc in tarjan_sccs(m, region):
            if not _nontrivial(m, scc) or not out(m, scc):
                continue  # acyclic pieces and bottom components: nothing to abstract
            inputs = inp(m, scc)
            remainder = tuple(s for s in scc if s not in set(inputs))
            nodes.append(
                SccNode(
                    states=scc,
                    inputs=inputs,
                    outputs=out(m, scc),
                    children=decompose(remainder) if remainder else (),
                )
            )
        return tuple(nodes)

    return SccTree(decompose(m.states))


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------


def preprocess(m: Pdtmc) -> Pdtmc:
    """Normalize a model for reachability analysis.

    Target states are made absorbing; input states of every multi-state
    bottom component become absorbing (no target can sit inside one, so
    reachability values are preserved); states unreachable from the
    initial distribution are dropped, except targets, which are kept as
    isolated absorbing states so result tables stay total.
    """
    one = rf_one()
    trans: dict[str, dict[str, RationalFunction]] = {
        s: dict(row) for s, row in m.trans.items()
    }
    for t in m.targets:
        trans[t] = {t: one}

    tmp = Pdtmc(m.states, m.params, m.init, trans, m.targets)
    for scc in tarjan_sccs(tmp):
        if len(scc) < 2:
            continue
        if out(tmp, scc):
            continue
        for s in inp(tmp, scc):
            trans[s] = {s: one}

    tmp = Pdtmc(m.states, m.params, m.init, trans, m.targets)
    reachable: set[str] = set()
    frontier = list(tmp.init)
    while frontier:
        s = frontier.pop()
        if s in reachable:
            continue
        reachable.add(s)
        frontier.extend(tmp.trans.get(s, {}))
    keep = [s for s in m.states if s in reachable or s in set(m.targets)]
    keep_set = set(keep)
    final_trans = {
        s: {t: f for t, f in trans.get(s, {}).items() if t in keep_set}
        for s in keep
        if s in trans
    }
    return Pdtmc(keep, m.params, m.init, final_trans, m.targets)
