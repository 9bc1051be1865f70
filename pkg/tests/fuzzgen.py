"""Random model generation for property tests.

Rows are built by repeatedly splitting a unit of probability mass with
factors that lie strictly between 0 and 1 on the open unit box, so the
symbolic row sums are exactly 1 by construction and *every* point with
all parameters in (0, 1) is graph-preserving.  Numerator and
denominator degrees of every edge stay at most 2.
"""

from __future__ import annotations

import random
from fractions import Fraction

from parmreach.model import Pdtmc, preprocess
from parmreach.polycore import Variable, variable
from parmreach.ratfun import (
    RationalFunction,
    rf_add,
    rf_const,
    rf_div,
    rf_mul,
    rf_of_variable,
    rf_one,
    rf_sub,
    rf_sum,
)

_CONSTS = [
    Fraction(1, 2),
    Fraction(1, 3),
    Fraction(2, 5),
    Fraction(3, 10),
    Fraction(7, 10),
]


def _pick_factor(
    rng: random.Random, params: list[Variable], dn: int, dd: int
) -> tuple[RationalFunction, int, int]:
    """A factor g with 0 < g < 1 on the unit box, plus the degree cost
    that multiplying by g (or 1 - g) adds to a weight."""
    kinds = ["const"]
    if params:
        if dn + 1 <= 2:
            kinds += ["lin", "lin"]
        if dn + 2 <= 2:
            kinds.append("quad")
        if dn + 1 <= 2 and dd + 1 <= 2:
            kinds.append("inv")
    kind = rng.choice(kinds)
    if kind == "const":
        return rf_const(rng.choice(_CONSTS)), 0, 0
    if kind == "lin":
        return rf_of_variable(rng.choice(params)), 1, 0
    if kind == "quad":
        v, w = rng.choice(params), rng.choice(params)
        return rf_mul(rf_of_variable(v), rf_of_variable(w)), 2, 0
    v = rf_of_variable(rng.choice(params))
    return rf_div(rf_one(), rf_add(rf_one(), v)), 1, 1


def split_unit(
    rng: random.Random, k: int, params: list[Variable]
) -> list[RationalFunction]:
    """``k`` positive functions summing to exactly 1 symbolically."""
    weights = [(rf_one(), 0, 0)]
    while len(weights) < k:
        i = rng.randrange(len(weights))
        w, dn, dd = weights.pop(i)
        g, cn, cd = _pick_factor(rng, params, dn, dd)
        weights.append((rf_mul(w, g), dn + cn, dd + cd))
        weights.append((rf_mul(w, rf_sub(rf_one(), g)), dn + cn, dd + cd))
    return [w for w, _, _ in weights]


def random_pdtmc(
    rng: random.Random,
    min_states: int = 4,
    max_states: int = 25,
    max_params: int = 3,
) -> Pdtmc:
    """A random model: 1-2 absorbing targets, 1-3 initial states, edges
    of degree <= 2, symbolic row sums exactly 1, cycles allowed."""
    n = rng.randint(min_states, max_states)
    k = rng.randint(1, max_params)
    names = [f"n{i}" for i in range(n)]
    params = [variable(ch) for ch in "abc"[:k]]
    targets = rng.sample(names, rng.randint(1, 2))

    trans: dict[str, dict[str, RationalFunction]] = {}
    for s in names:
        if s in targets:
            trans[s] = {s: rf_one()}
            continue
        succs = rng.sample(names, rng.randint(1, min(4, n)))
        parts = split_unit(rng, len(succs), params)
        trans[s] = dict(zip(succs, parts))
        assert rf_sum(trans[s].values()) == rf_one()

    initial = rng.sample(names, rng.randint(1, 3))
    init_params = params if rng.random() < 0.3 else []
    init = dict(zip(initial, split_unit(rng, len(initial), init_params)))
    return Pdtmc(
        states=tuple(names),
        params=tuple(params),
        init=init,
        trans=trans,
        targets=tuple(targets),
    )


def random_preprocessed(rng: random.Random, **kwargs) -> Pdtmc:
    return preprocess(random_pdtmc(rng, **kwargs))


def graph_preserving_point(
    rng: random.Random, m: Pdtmc
) -> dict[Variable, Fraction]:
    """Any point in the open unit box preserves the graph by construction."""
    return {v: Fraction(rng.randint(1, 19), 20) for v in m.params}
