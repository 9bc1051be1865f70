"""Exact multivariate polynomial arithmetic over integer coefficients.

This module is the arithmetic bedrock of the package: interned variables,
normalized sparse monomials/polynomials, exact division, and a recursive
primitive-PRS multivariate GCD.  Everything is deterministic: variables
carry session-unique indices, monomials are compared reverse
lexicographically on their exponent vectors (higher variable index is
more significant, the constant monomial is least), and polynomial terms
are stored leading-first under that order.

Coefficients are plain Python ints; scalar results are
:class:`fractions.Fraction`.  Decimal inputs are expected to have been
cleared into integer-coefficient numerator/denominator pairs by the
caller (the model parser does this), so no floats appear here.
"""

from __future__ import annotations

import heapq
import math
import threading
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import ParmreachError

Rational = Fraction

__all__ = [
    "Rational",
    "Variable",
    "variable",
    "variables",
    "reset_variables",
    "session_variables",
    "Monomial",
    "Polynomial",
    "Irreducibility",
    "MissingAssignment",
    "NotDivisible",
    "poly_add",
    "poly_mul",
    "poly_eval",
    "poly_divide_exact",
    "poly_gcd",
    "is_irreducible_heuristic",
]


class MissingAssignment(ParmreachError):
    """An evaluation point does not assign every variable that occurs."""


class NotDivisible(ParmreachError):
    """Exact polynomial division was requested but leaves a remainder."""


# ---------------------------------------------------------------------------
# Variables
# ---------------------------------------------------------------------------


class Variable:
    """An interned symbol with a session-unique index.

    Instances are only created through :func:`variable`; identity,
    equality and ordering all reduce to the interned index, which is
    fixed for the lifetime of the session.
    """

    __slots__ = ("id", "name")

    def __init__(self, vid: int, name: str):
        object.__setattr__(self, "id", vid)
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):  # pragma: no cover - guard only
        raise AttributeError("Variable is immutable")

    def __repr__(self) -> str:
        return f"Variable({self.name!r})"

    def __str__(self) -> str:
        return self.name

    def __hash__(self) -> int:
        return self.id

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, Variable) and other.id == self.id)

    def __lt__(self, other: "Variable") -> bool:
        return self.id < other.id


_var_lock = threading.Lock()
_var_by_name: dict[str, Variable] = {}
_var_list: list[Variable] = []


def variable(name: str) -> Variable:
    """Return the session variable called *name*, interning it on first use.

    Interning is atomic and idempotent; the index order of variables is
    their order of first appearance in the session.
    """
    v = _var_by_name.get(name)
    if v is not None:
        return v
    with _var_lock:
        v = _var_by_name.get(name)
        if v is None:
            v = Variable(len(_var_list), name)
            _var_list.append(v)
            _var_by_name[name] = v
        return v


def variables(*names: str) -> tuple[Variable, ...]:
    """Intern several variables at once, in the given order."""
    return tuple(variable(n) for n in names)


def session_variables() -> tuple[Variable, ...]:
    """All variables interned so far, in index order."""
    return tuple(_var_list)


def reset_variables() -> None:
    """Forget every interned variable.

    Polynomials created before the reset must not be mixed with ones
    created after it; this exists for test isolation and fresh sessions.
    """
    with _var_lock:
        _var_by_name.clear()
        _var_list.clear()


# ---------------------------------------------------------------------------
# Monomials
# ---------------------------------------------------------------------------


class Monomial:
    """A sparse power product ``prod v_i^e_i`` with positive exponents.

    Stored as a tuple of ``(variable_id, exponent)`` pairs sorted by
    variable id.  The total order used throughout the package is reverse
    lexicographic on exponent vectors: the highest variable id at which
    two monomials differ decides, larger exponent there wins.  The
    constant monomial is the minimum, so the order is compatible with
    multiplication and exact division terminates.
    """

    __slots__ = ("exps", "_hash")

    def __init__(self, exps: tuple[tuple[int, int], ...]):
        object.__setattr__(self, "exps", exps)
        object.__setattr__(self, "_hash", hash(exps))

    def __setattr__(self, key, value):  # pragma: no cover - guard only
        raise AttributeError("Monomial is immutable")

    @classmethod
    def of(cls, items: Mapping[Variable, int] | Iterable[tuple[Variable, int]]) -> "Monomial":
        if isinstance(items, Mapping):
            items = items.items()
        pairs = tuple(sorted((v.id, e) for v, e in items if e != 0))
        for _, e in pairs:
            if e < 0:
                raise ValueError("monomial exponents must be non-negative")
        return cls(pairs)

    @classmethod
    def of_variable(cls, v: Variable, exp: int = 1) -> "Monomial":
        if exp < 0:
            raise ValueError("monomial exponents must be non-negative")
        return cls(()) if exp == 0 else cls(((v.id, exp),))

    @property
    def is_one(self) -> bool:
        return not self.exps

    def degree(self) -> int:
        return sum(e for _, e in self.exps)

    def degree_in(self, v: Variable) -> int:
        for vid, e in self.exps:
            if vid == v.id:
                return e
        return 0

    def variable_ids(self) -> tuple[int, ...]:
        return tuple(vid for vid, _ in self.exps)

    def mul(self, other: "Monomial") -> "Monomial":
        return Monomial(_merge_exps(self.exps, other.exps, 1))

    def divides(self, other: "Monomial") -> bool:
        """True if every exponent of self is <= the matching one in other."""
        it = dict(other.exps)
        return all(it.get(vid, 0) >= e for vid, e in self.exps)

    def div(self, other: "Monomial") -> "Monomial | None":
        """Exact quotient self / other, or None when not divisible."""
        out = _merge_exps(self.exps, other.exps, -1)
        if any(e < 0 for _, e in out):
            return None
        return Monomial(out)

    def gcd(self, other: "Monomial") -> "Monomial":
        mine = dict(self.exps)
        pairs = tuple(
            (vid, min(e, mine[vid])) for vid, e in other.exps if vid in mine and min(e, mine[vid]) > 0
        )
        return Monomial(pairs)

    def without(self, v: Variable) -> "Monomial":
        return Monomial(tuple((vid, e) for vid, e in self.exps if vid != v.id))

    def eval(self, assignment: Mapping[Variable, Fraction]) -> Fraction:
        by_id = {var.id: val for var, val in assignment.items()}
        out = Fraction(1)
        for vid, e in self.exps:
            if vid not in by_id:
                raise MissingAssignment(f"no value for variable id {vid}")
            out *= by_id[vid] ** e
        return out

    def compare(self, other: "Monomial") -> int:
        """Reverse-lexicographic comparison; -1, 0 or 1."""
        a, b = self.exps, other.exps
        i, j = len(a) - 1, len(b) - 1
        while i >= 0 or j >= 0:
            va, ea = a[i] if i >= 0 else (-1, 0)
            vb, eb = b[j] if j >= 0 else (-1, 0)
            if va != vb:
                return 1 if va > vb else -1
            if ea != eb:
                return 1 if ea > eb else -1
            i -= 1
            j -= 1
        return 0

    def __mul__(self, other: "Monomial") -> "Monomial":
        return self.mul(other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self.exps == other.exps

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Monomial") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "Monomial") -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other: "Monomial") -> bool:
        return self.compare(other) > 0

    def __ge__(self, other: "Monomial") -> bool:
        return self.compare(other) >= 0

    def __str__(self) -> str:
        if not self.exps:
            return "1"
        names = {v.id: v.name for v in _var_list}
        parts = []
        for vid, e in self.exps:
            name = names.get(vid, f"_v{vid}")
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"Monomial({self})"


MONOMIAL_ONE = Monomial(())


def _merge_exps(
    a: tuple[tuple[int, int], ...], b: tuple[tuple[int, int], ...], sign: int
) -> tuple[tuple[int, int], ...]:
    """Merge two sparse exponent tuples, adding sign * b's exponents."""
    out: list[tuple[int, int]] = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na or j < nb:
        va = a[i][0] if i < na else None
        vb = b[j][0] if j < nb else None
        if vb is None or (va is not None and va < vb):
            out.append(a[i])
            i += 1
        elif va is None or vb < va:
            out.append((b[j][0], sign * b[j][1]))
            j += 1
        else:
            e = a[i][1] + sign * b[j][1]
            if e != 0:
                out.append((va, e))
            i += 1
            j += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Polynomial:
    """A normalized sparse polynomial with integer coefficients.

    Terms are stored as a tuple of ``(Monomial, coefficient)`` pairs in
    strictly descending monomial order with no zero coefficients, so
    structural equality coincides with mathematical equality.

    Examples
    --------
    >>> x, y = variables("x", "y")
    >>> p = Polynomial.of_variable(x) + Polynomial.const(1)
    >>> str(p * p)
    'x^2 + 2*x + 1'
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: tuple[tuple[Monomial, int], ...]):
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, key, value):  # pragma: no cover - guard only
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "Polynomial":
        return _ZERO

    @classmethod
    def one(cls) -> "Polynomial":
        return _ONE

    @classmethod
    def const(cls, c: int) -> "Polynomial":
        if c == 0:
            return _ZERO
        return cls(((MONOMIAL_ONE, c),))

    @classmethod
    def of_variable(cls, v: Variable) -> "Polynomial":
        return cls(((Monomial.of_variable(v), 1),))

    @classmethod
    def from_dict(cls, d: Mapping[Monomial, int]) -> "Polynomial":
        terms = [(m, c) for m, c in d.items() if c != 0]
        terms.sort(key=_SortKey, reverse=True)
        return cls(tuple(terms))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Monomial, int]]) -> "Polynomial":
        acc: dict[Monomial, int] = {}
        for m, c in terms:
            acc[m] = acc.get(m, 0) + c
        return cls.from_dict(acc)

    # -- inspection ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms[0][1] == 1 and self.terms[0][0].is_one

    @property
    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_one)

    def constant_value(self) -> int:
        if not self.terms:
            return 0
        if not self.is_constant:
            raise ValueError("polynomial is not constant")
        return self.terms[0][1]

    @property
    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        return self.terms[0][0]

    @property
    def leading_coefficient(self) -> int:
        if not self.terms:
            return 0
        return self.terms[0][1]

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(m.degree() for m, _ in self.terms)

    def degree_in(self, v: Variable) -> int:
        if not self.terms:
            return 0
        return max(m.degree_in(v) for m, _ in self.terms)

    def variable_ids(self) -> tuple[int, ...]:
        seen: set[int] = set()
        for m, _ in self.terms:
            seen.update(m.variable_ids())
        return tuple(sorted(seen))

    def integer_content(self) -> int:
        """gcd of all coefficients, as a positive integer (0 for the zero polynomial)."""
        g = 0
        for _, c in self.terms:
            g = math.gcd(g, c)
            if g == 1:
                break
        return g

    def split_content(self) -> tuple[int, "Polynomial"]:
        """Return ``(content, primitive)`` with content > 0 and self == content * primitive.

        The primitive part keeps the sign of self's leading coefficient.
        """
        if not self.terms:
            return 1, self
        g = self.integer_content()
        if g == 1:
            return 1, self
        return g, Polynomial(tuple((m, c // g) for m, c in self.terms))

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return poly_add(self, other)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return poly_add(self, other.__neg__())

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple((m, -c) for m, c in self.terms))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return poly_mul(self, other)

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative polynomial power")
        out = _ONE
        base = self
        while k:
            if k & 1:
                out = poly_mul(out, base)
            base = poly_mul(base, base) if k > 1 else base
            k >>= 1
        return out

    def scale(self, c: int) -> "Polynomial":
        if c == 0:
            return _ZERO
        if c == 1:
            return self
        return Polynomial(tuple((m, coef * c) for m, coef in self.terms))

    def mul_term(self, mono: Monomial, coeff: int) -> "Polynomial":
        """Multiply by a single term; preserves term order."""
        if coeff == 0:
            return _ZERO
        if mono.is_one:
            return self.scale(coeff)
        return Polynomial(tuple((m.mul(mono), c * coeff) for m, c in self.terms))

    # -- protocol ------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(self.terms)
            object.__setattr__(self, "_hash", h)
        return h

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts: list[str] = []
        for i, (m, c) in enumerate(self.terms):
            mag = abs(c)
            if m.is_one:
                body = str(mag)
            elif mag == 1:
                body = str(m)
            else:
                body = f"{mag}*{m}"
            if i == 0:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


class _SortKey:
    """functools.cmp_to_key without the per-sort closure allocation."""

    __slots__ = ("term",)

    def __init__(self, term: tuple[Monomial, int]):
        self.term = term

    def __lt__(self, other: "_SortKey") -> bool:
        return self.term[0].compare(other.term[0]) < 0


_ZERO = Polynomial(())
_ONE = Polynomial(((MONOMIAL_ONE, 1),))


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    """Sum of two normalized polynomials (ordered merge, no re-sort)."""
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    ta, tb = a.terms, b.terms
    out: list[tuple[Monomial, int]] = []
    i = j = 0
    na, nb = len(ta), len(tb)
    while i < na and j < nb:
        cmp = ta[i][0].compare(tb[j][0])
        if cmp > 0:
            out.append(ta[i])
            i += 1
        elif cmp < 0:
            out.append(tb[j])
            j += 1
        else:
            c = ta[i][1] + tb[j][1]
            if c != 0:
                out.append((ta[i][0], c))
            i += 1
            j += 1
    out.extend(ta[i:])
    out.extend(tb[j:])
    return Polynomial(tuple(out))


_PACK_MASK = 0xFFFFFFFF


def _pack(m: Monomial) -> int:
    """Exponent vector as one integer, 32 bits per variable id.

    Packed keys add like monomials multiply, and integer comparison
    reproduces the monomial order (higher variable ids sit in more
    significant fields).  Degrees stay far below 2**32, so fields never
    carry into each other.
    """
    k = 0
    for vid, e in m.exps:
        k += e << (vid << 5)
    return k


def _unpack(k: int) -> Monomial:
    exps = []
    vid = 0
    while k:
        e = k & _PACK_MASK
        if e:
            exps.append((vid, e))
        k >>= 32
        vid += 1
    return Monomial(tuple(exps))


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product of two normalized polynomials."""
    if a.is_zero or b.is_zero:
        return _ZERO
    if a.is_one:
        return b
    if b.is_one:
        return a
    if len(a.terms) > len(b.terms):
        a, b = b, a
    if len(a.terms) == 1:
        m, c = a.terms[0]
        return b.mul_term(m, c)
    pa = [(_pack(m), c) for m, c in a.terms]
    pb = [(_pack(m), c) for m, c in b.terms]
    acc: dict[int, int] = {}
    get = acc.get
    for ka, ca in pa:
        for kb, cb in pb:
            k = ka + kb
            acc[k] = get(k, 0) + ca * cb
    items = [(k, c) for k, c in acc.items() if c]
    items.sort(reverse=True)
    return Polynomial(tuple((_unpack(k), c) for k, c in items))


def poly_eval(p: Polynomial, assignment: Mapping[Variable, Fraction]) -> Fraction:
    """Evaluate at a point; exact rational result.

    Raises :class:`MissingAssignment` if a variable occurring in *p*
    has no value.
    """
    total = Fraction(0)
    for m, c in p.terms:
        total += c * m.eval(assignment)
    return total


def poly_divide_exact(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact quotient a / b; raises :class:`NotDivisible` on any remainder."""
    if b.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero:
        return _ZERO
    if b.is_one:
        return a
    if b.is_constant:
        c = b.constant_value()
        terms = []
        for m, coef in a.terms:
            q, r = divmod(coef, c)
            if r != 0:
                raise NotDivisible(f"({a}) is not divisible by ({b})")
            terms.append((m, q))
        return Polynomial(tuple(terms))
    lead_m, lead_c = b.terms[0]
    k_lead = _pack(lead_m)
    lead_fields = lead_m.exps
    tail = [(_pack(bm), bc) for bm, bc in b.terms[1:]]
    # sparse long division on a dict remainder keyed by packed exponent
    # vectors; the negated-int heap hands out candidate leading monomials
    # largest-first with lazy deletion
    rem = {_pack(m): c for m, c in a.terms}
    heap = [-k for k in rem]
    heapq.heapify(heap)
    q_terms: list[tuple[int, int]] = []
    while heap:
        k = -heapq.heappop(heap)
        c = rem.pop(k, 0)
        if c == 0:
            continue
        for vid, e in lead_fields:
            if ((k >> (vid << 5)) & _PACK_MASK) < e:
                raise NotDivisible(f"({a}) is not divisible by ({b})")
        qk = k - k_lead
        qc, srem = divmod(c, lead_c)
        if srem != 0:
            raise NotDivisible(f"({a}) is not divisible by ({b})")
        q_terms.append((qk, qc))
        for kb, bc in tail:
            nk = kb + qk
            old = rem.get(nk)
            if old is None:
                rem[nk] = -qc * bc
                heapq.heappush(heap, -nk)
            else:
                new = old - qc * bc
                if new:
                    rem[nk] = new
                else:
                    del rem[nk]
    # quotient monomials were produced in strictly descending order
    return Polynomial(tuple((_unpack(k), qc) for k, qc in q_terms))


# ---------------------------------------------------------------------------
# GCD: recursive primitive pseudo-remainder sequences
# ---------------------------------------------------------------------------


def _make_positive(p: Polynomial) -> Polynomial:
    return -p if p.leading_coefficient < 0 else p


def _main_variable(a: Polynomial, b: Polynomial) -> Variable:
    vid = max(max(a.variable_ids(), default=-1), max(b.variable_ids(), default=-1))
    return _var_list[vid]


def _univariate(p: Polynomial, v: Variable) -> dict[int, Polynomial]:
    """View p as a univariate polynomial in v with polynomial coefficients."""
    coeffs: dict[int, dict[Monomial, int]] = {}
    for m, c in p.terms:
        e = m.degree_in(v)
        rest = m.without(v) if e else m
        bucket = coeffs.setdefault(e, {})
        bucket[rest] = bucket.get(rest, 0) + c
    return {e: Polynomial.from_dict(d) for e, d in coeffs.items()}


def _recompose(coeffs: Mapping[int, Polynomial], v: Variable) -> Polynomial:
    out = _ZERO
    for e, p in coeffs.items():
        out = poly_add(out, p.mul_term(Monomial.of_variable(v, e), 1))
    return out


def _coeff_gcd(polys: Iterable[Polynomial]) -> Polynomial:
    acc: Polynomial | None = None
    for p in polys:
        acc = p if acc is None else _gcd_nonzero(acc, p)
        if acc.is_one:
            return acc
    assert acc is not None
    return _make_positive(acc)


def _prem(f: Polynomial, g: Polynomial, v: Variable) -> Polynomial:
    """Pseudo-remainder of f by g with respect to v."""
    gu = _univariate(g, v)
    dg = max(gu)
    lg = gu[dg]
    r = f
    while not r.is_zero:
        ru = _univariate(r, v)
        dr = max(ru)
        if dr < dg:
            break
        lr = ru[dr]
        shifted = poly_mul(lr, g).mul_term(Monomial.of_variable(v, dr - dg), 1)
        r = poly_add(poly_mul(lg, r), -shifted)
    return r


_FILTER_PRIME = (1 << 61) - 1


def _filter_point(vid: int, attempt: int) -> int:
    """Deterministic well-spread evaluation point for variable vid.

    Small structured points (2, 3, 5, ...) collide far too often with
    the small-prime coefficient structure of probability models, so the
    points are drawn from the whole field via an integer hash.
    """
    x = (
        vid * 0x9E3779B97F4A7C15 + attempt * 0xBF58476D1CE4E5B9 + 0x94D049BB133111EB
    ) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 31
    return 2 + x % (_FILTER_PRIME - 3)


def _power_tables(
    assign: dict[int, int], polys: tuple[Polynomial, ...], skip_vid: int
) -> dict[int, list[int]]:
    """Per-variable tables of assign[vid]**k mod the filter prime."""
    degs = {vid: 0 for vid in assign}
    for p in polys:
        for m, _ in p.terms:
            for vid, e in m.exps:
                if vid != skip_vid and e > degs[vid]:
                    degs[vid] = e
    tables: dict[int, list[int]] = {}
    for vid, a in assign.items():
        t = [1] * (degs[vid] + 1)
        for k in range(1, degs[vid] + 1):
            t[k] = t[k - 1] * a % _FILTER_PRIME
        tables[vid] = t
    return tables


def _image_mod_prime(
    p: Polynomial, v: Variable, tables: dict[int, list[int]]
) -> dict[int, int]:
    """Evaluate every variable except v via the power tables, mod a prime.

    Returns the resulting univariate polynomial in v as a sparse
    degree -> coefficient map with zero coefficients dropped.
    """
    img: dict[int, int] = {}
    vid0 = v.id
    for m, c in p.terms:
        e = 0
        val = c % _FILTER_PRIME
        for vid, exp in m.exps:
            if vid == vid0:
                e = exp
            else:
                val = val * tables[vid][exp] % _FILTER_PRIME
        img[e] = (img.get(e, 0) + val) % _FILTER_PRIME
    return {e: c for e, c in img.items() if c}


def _gf_poly_mod(a: list[int], b: list[int]) -> list[int]:
    """Remainder of dense univariate a by nonzero b over GF(_FILTER_PRIME)."""
    p = _FILTER_PRIME
    inv = pow(b[-1], p - 2, p)
    a = a[:]
    db = len(b) - 1
    while a and len(a) - 1 >= db:
        q = a[-1] * inv % p
        if q:
            off = len(a) - len(b)
            for i in range(len(b) - 1):
                a[off + i] = (a[off + i] - q * b[i]) % p
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return a


def _gf_gcd_degree(fd: dict[int, int], gd: dict[int, int]) -> int:
    """Degree of the gcd of two nonzero sparse univariate images."""

    def dense(d: dict[int, int]) -> list[int]:
        out = [0] * (max(d) + 1)
        for e, c in d.items():
            out[e] = c
        return out

    a, b = dense(fd), dense(gd)
    while b:
        a, b = b, _gf_poly_mod(a, b)
    return len(a) - 1


def _image_gcd_vdegree(fa: Polynomial, fb: Polynomial, v: Variable) -> int | None:
    """Sound upper bound on the v-degree of gcd(fa, fb), or None.

    Evaluating all other variables at a fixed point and reducing mod a
    large prime maps any common divisor to a common divisor of the
    images; if the leading v-coefficient of fa survives the evaluation,
    the image of the true gcd keeps its full v-degree, so the degree of
    the image gcd bounds the v-degree of the true gcd from above.  In
    particular a bound of 0 certifies that two v-primitive polynomials
    are coprime.  Returns None when no tried evaluation point is
    conclusive; the caller then falls back to exact methods.
    """
    da = fa.degree_in(v)
    others = sorted((set(fa.variable_ids()) | set(fb.variable_ids())) - {v.id})
    for attempt in range(3):
        assign = {vid: _filter_point(vid, attempt) for vid in others}
        tables = _power_tables(assign, (fa, fb), v.id)
        fimg = _image_mod_prime(fa, v, tables)
        if fimg.get(da, 0) == 0:
            if not others:
                return None
            continue
        gimg = _image_mod_prime(fb, v, tables)
        if not gimg:
            if not others:
                return None
            continue
        return _gf_gcd_degree(fimg, gimg)
    return None


def _line_image(p: Polynomial, tables: dict[int, list[int]]) -> dict[int, int]:
    """Image of p under x_i -> a_i * t, as a sparse map in powers of t."""
    img: dict[int, int] = {}
    for m, c in p.terms:
        td = 0
        val = c % _FILTER_PRIME
        for vid, e in m.exps:
            td += e
            val = val * tables[vid][e] % _FILTER_PRIME
        img[td] = (img.get(td, 0) + val) % _FILTER_PRIME
    return {e: c for e, c in img.items() if c}


def _certified_coprime(pa: Polynomial, pb: Polynomial) -> bool:
    """True when one projective line image proves gcd(pa, pb) is constant.

    Substituting x_i -> a_i * t is a ring homomorphism, so a common
    divisor maps to a common divisor of the images.  Total degree can
    only drop under the substitution and adds over products, so as soon
    as one operand's image keeps that operand's full total degree, the
    image of the gcd keeps its full total degree too; an image gcd of
    degree 0 then certifies a constant gcd.  False means inconclusive,
    never "not coprime".
    """
    vids = sorted(set(pa.variable_ids()) | set(pb.variable_ids()))
    tda = max(sum(e for _, e in m.exps) for m, _ in pa.terms)
    tdb = max(sum(e for _, e in m.exps) for m, _ in pb.terms)
    for attempt in range(3):
        assign = {vid: _filter_point(vid, attempt) for vid in vids}
        tables = _power_tables(assign, (pa, pb), -1)
        fimg = _line_image(pa, tables)
        gimg = _line_image(pb, tables)
        if not fimg or not gimg:
            continue
        if fimg.get(tda, 0) == 0 and gimg.get(tdb, 0) == 0:
            continue
        return _gf_gcd_degree(fimg, gimg) == 0
    return False


def _try_divide(a: Polynomial, b: Polynomial) -> Polynomial | None:
    try:
        return poly_divide_exact(a, b)
    except NotDivisible:
        return None


def _max_norm(p: Polynomial) -> int:
    return max(abs(c) for _, c in p.terms)


def _eval_var_big(p: Polynomial, v: Variable, xi: int) -> Polynomial:
    """Substitute the plain integer xi for v, keeping the other variables."""
    dmax = p.degree_in(v)
    pows = [1] * (dmax + 1)
    for k in range(1, dmax + 1):
        pows[k] = pows[k - 1] * xi
    acc: dict[Monomial, int] = {}
    vid0 = v.id
    for m, c in p.terms:
        e = m.degree_in(v)
        rest = m.without(v) if e else m
        acc[rest] = acc.get(rest, 0) + c * pows[e]
    return Polynomial.from_dict(acc)


def _interpolate_digits(
    h: Polynomial, v: Variable, xi: int, max_degree: int
) -> Polynomial | None:
    """Invert :func:`_eval_var_big`: read the v-coefficients of a candidate
    polynomial off h as balanced base-xi digits.  None if more than
    max_degree + 1 digits appear, which no valid candidate can produce.
    """
    half = xi // 2
    out: dict[Monomial, int] = {}
    cur = h
    i = 0
    while not cur.is_zero:
        if i > max_degree:
            return None
        nxt: dict[Monomial, int] = {}
        vm = Monomial.of_variable(v, i) if i else None
        for m, c in cur.terms:
            r = c % xi
            if r > half:
                r -= xi
            q = (c - r) // xi
            if r:
                out[m.mul(vm) if vm is not None else m] = r
            if q:
                nxt[m] = q
        cur = Polynomial.from_dict(nxt)
        i += 1
    return Polynomial.from_dict(out)


_HEU_MAX_TRIES = 6


def _heu_gcd(
    f: Polynomial, g: Polynomial, want_var: Variable | None = None
) -> Polynomial | None:
    """Heuristic gcd of two nonzero polynomials by big-integer evaluation.

    Substitutes a single large integer for one variable at a time,
    takes the gcd of the images (plain integer gcd at the bottom), and
    reconstructs a candidate from balanced base-xi digits.  Every
    returned polynomial is verified by exact division, so a non-None
    result is always a genuine common divisor; it is not guaranteed
    maximal, which the caller certifies separately.

    A trivial candidate passes division vacuously, so when the caller
    already knows the gcd involves want_var, candidates constant in it
    are treated like failures and the evaluation point is regrown.
    Returns None when the tried points stay inconclusive.
    """
    vids = set(f.variable_ids()) | set(g.variable_ids())
    if not vids:
        return Polynomial.const(math.gcd(f.constant_value(), g.constant_value()))
    # the integer content must ride along through the recursion: one
    # level up it encodes the evaluated variable's share of the gcd
    fc, fp = f.split_content()
    gc, gp = g.split_content()
    c = math.gcd(fc, gc)
    v = _var_list[max(vids)]
    dmax = min(fp.degree_in(v), gp.degree_in(v))
    xi = 2 * min(_max_norm(fp), _max_norm(gp)) + 29
    for _ in range(_HEU_MAX_TRIES):
        ff = _eval_var_big(fp, v, xi)
        gg = _eval_var_big(gp, v, xi)
        if not ff.is_zero and not gg.is_zero:
            sub = _heu_gcd(ff, gg)
            if sub is not None:
                cand = _interpolate_digits(sub, v, xi, dmax)
                if cand is not None and not cand.is_zero:
                    cand = _make_positive(cand.split_content()[1])
                    if (want_var is None or cand.degree_in(want_var) > 0) and (
                        _try_divide(fp, cand) is not None
                        and _try_divide(gp, cand) is not None
                    ):
                        return cand.scale(c)
        xi = 73794 * xi // 27011
    return None


def _v_part_gcd(fa: Polynomial, fb: Polynomial, v: Variable) -> Polynomial:
    """gcd of two v-primitive polynomials.

    Tries, in order: the modular-image degree certificate (degree 0
    means coprime; degree min(da, db) suggests the smaller side divides
    the larger, settled by one exact division), then the heuristic
    evaluation gcd accepted only when its v-degree meets the certified
    bound — a division-verified common divisor whose v-degree equals an
    upper bound on the true gcd's v-degree must be that gcd, because
    the leftover cofactor would be constant in v and so divide the
    v-coefficient content 1.  Falls back to the exact primitive
    remainder sequence when nothing conclusive happens.
    """
    da, db = fa.degree_in(v), fb.degree_in(v)
    if da == 0 or db == 0:
        return _ONE
    d = _image_gcd_vdegree(fa, fb, v)
    if d == 0:
        return _ONE
    if d == min(da, db):
        small, big = (fa, fb) if da <= db else (fb, fa)
        if _try_divide(big, small) is not None:
            return _make_positive(small)
        if da == db and _try_divide(small, big) is not None:
            return _make_positive(big)
    h = _heu_gcd(fa, fb, want_var=v if d is not None else None)
    if h is not None:
        dh = h.degree_in(v)
        if dh == d:
            return _make_positive(h)
        # gcd(fa, fb) = h * gcd(fa/h, fb/h); the cofactors inherit
        # v-primitivity, so an image certificate settles the rest, and
        # otherwise the strictly smaller cofactor pair is recursed on.
        cf = poly_divide_exact(fa, h)
        cg = poly_divide_exact(fb, h)
        if _image_gcd_vdegree(cf, cg, v) == 0:
            return _make_positive(h)
        if dh > 0:
            return _make_positive(poly_mul(h, _v_part_gcd(cf, cg, v)))
    return _primitive_prs_gcd(fa, fb, v)


_GCD_MEMO: dict[tuple[Polynomial, Polynomial], Polynomial] = {}
_GCD_MEMO_CAP = 65536


def _gcd_nonzero(a: Polynomial, b: Polynomial) -> Polynomial:
    """gcd of two nonzero polynomials, leading coefficient made positive.

    Results are memoized by operand value: the surrounding refinement
    machinery asks for the same factor pairs over and over, and the
    answer depends on nothing but the operands.
    """
    key = (a, b)
    g = _GCD_MEMO.get(key)
    if g is None:
        g = _GCD_MEMO.get((b, a))
    if g is None:
        g = _gcd_nonzero_impl(a, b)
        if len(_GCD_MEMO) >= _GCD_MEMO_CAP:
            _GCD_MEMO.clear()
        _GCD_MEMO[key] = g
    return g


def _monomial_content(p: Polynomial) -> Monomial:
    """Termwise monomial gcd: the largest monomial dividing every term."""
    terms = p.terms
    # terms are sorted descending, so a constant term sits at the end
    # and immediately forces a trivial content
    if not terms[-1][0].exps:
        return MONOMIAL_ONE
    acc = terms[0][0]
    for m, _ in terms[1:]:
        if not acc.exps:
            break
        acc = acc.gcd(m)
    return acc


def _strip_monomial(p: Polynomial, m: Monomial) -> Polynomial:
    return Polynomial.from_dict({t.div(m): c for t, c in p.terms})


def _gcd_nonzero_impl(a: Polynomial, b: Polynomial) -> Polynomial:
    ca, pa = a.split_content()
    cb, pb = b.split_content()
    c = math.gcd(ca, cb)
    # a monomial divides a polynomial exactly when it divides the
    # termwise monomial content, so that content splits off cheaply and
    # independently of the rest of the gcd
    ma = _monomial_content(pa)
    mb = _monomial_content(pb)
    mg = ma.gcd(mb)
    if ma.exps:
        pa = _strip_monomial(pa, ma)
    if mb.exps:
        pb = _strip_monomial(pb, mb)

    def finish(g0: Polynomial) -> Polynomial:
        out = g0.scale(c)
        if mg.exps:
            out = out.mul_term(mg, 1)
        return _make_positive(out)

    if pa == pb or pa == -pb:
        return finish(pa)
    if pa.is_constant or pb.is_constant:
        # primitive monomial-free constants are +-1
        return finish(_ONE)
    if _certified_coprime(pa, pb):
        return finish(_ONE)
    v = _main_variable(pa, pb)
    ua = _univariate(pa, v)
    ub = _univariate(pb, v)
    cont_a = _coeff_gcd(ua.values())
    cont_b = _coeff_gcd(ub.values())
    cont = _gcd_nonzero(cont_a, cont_b)
    fa = poly_divide_exact(pa, cont_a)
    fb = poly_divide_exact(pb, cont_b)
    part = _v_part_gcd(fa, fb, v)
    return finish(poly_mul(part, cont))


def _primitive_prs_gcd(f: Polynomial, g: Polynomial, v: Variable) -> Polynomial:
    """gcd of two v-primitive polynomials via a primitive PRS in v."""
    if f.degree_in(v) == 0 or g.degree_in(v) == 0:
        # one side lost v entirely after content removal; the caller has
        # already accounted for contents, so the v-parts are coprime.
        return _ONE
    if f.degree_in(v) < g.degree_in(v):
        f, g = g, f
    while True:
        r = _prem(f, g, v)
        if r.is_zero:
            return g
        if r.degree_in(v) == 0:
            return _ONE
        cont = _coeff_gcd(_univariate(r, v).values())
        r = poly_divide_exact(r, cont)
        f, g = g, r


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Greatest common divisor over the integers.

    The result is canonical: its leading coefficient under the monomial
    order is positive, and its integer content is the gcd of the
    operands' contents.  At least one operand must be nonzero.

    Examples
    --------
    >>> x = variable("x")
    >>> one, X = Polynomial.one(), Polynomial.of_variable(x)
    >>> str(poly_gcd(X * X - one, X * X + X + X + one))
    'x + 1'
    """
    if a.is_zero and b.is_zero:
        raise ValueError("gcd(0, 0) is undefined")
    if a.is_zero:
        return _make_positive(b)
    if b.is_zero:
        return _make_positive(a)
    return _gcd_nonzero(a, b)


# ---------------------------------------------------------------------------
# Irreducibility heuristic
# ---------------------------------------------------------------------------


class Irreducibility(Enum):
    """Outcome of the cheap irreducibility screen."""

    IRREDUCIBLE = "irreducible"
    UNKNOWN = "unknown"


def is_irreducible_heuristic(g: Polynomial) -> Irreducibility:
    """Cheap, sound-when-positive irreducibility screen.

    Returns IRREDUCIBLE only for certificates that need no factoring
    attempt: constants, bare variables, and content-free polynomials of
    total degree one.  Everything else is UNKNOWN, which callers must
    treat as potentially reducible.
    """
    if g.is_zero:
        raise ValueError("irreducibility of the zero polynomial is undefined")
    if g.is_constant:
        return Irreducibility.IRREDUCIBLE
    if len(g.terms) == 1:
        m, c = g.terms[0]
        if abs(c) == 1 and m.degree() == 1:
            return Irreducibility.IRREDUCIBLE
        return Irreducibility.UNKNOWN
    if g.total_degree() == 1 and g.integer_content() == 1:
        return Irreducibility.IRREDUCIBLE
    return Irreducibility.UNKNOWN
