"""Integer-polynomial layer: arithmetic, evaluation, division, gcd."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from parmreach.polycore import (
    Irreducibility,
    MissingAssignment,
    Monomial,
    NotDivisible,
    Polynomial,
    is_irreducible_heuristic,
    poly_add,
    poly_divide_exact,
    poly_eval,
    poly_gcd,
    poly_mul,
    variable,
    variables,
)


def _xyz():
    x, y, z = variables("x", "y", "z")
    return (
        Polynomial.of_variable(x),
        Polynomial.of_variable(y),
        Polynomial.of_variable(z),
    )


# ---------------------------------------------------------------------------
# construction and normal form
# ---------------------------------------------------------------------------


def test_zero_and_one_are_normalized():
    assert Polynomial.zero().is_zero
    assert Polynomial.one().is_one
    assert Polynomial.const(0) == Polynomial.zero()
    assert Polynomial.const(1) == Polynomial.one()


def test_terms_are_descending_and_nonzero():
    X, Y, _ = _xyz()
    p = (X + Y) * (X + Polynomial.const(3))
    monomials = [m for m, _ in p.terms]
    assert all(a.compare(b) > 0 for a, b in zip(monomials, monomials[1:]))
    assert all(c != 0 for _, c in p.terms)


def test_structural_equality_is_mathematical_equality():
    X, Y, _ = _xyz()
    assert (X + Y) * (X - Y) == X * X - Y * Y


# ---------------------------------------------------------------------------
# addition
# ---------------------------------------------------------------------------


def test_add_cancels_to_constant():
    (X, _, _) = _xyz()
    one = Polynomial.one()
    assert poly_add(X + one, -X) == one


def test_add_zero_is_identity():
    X, Y, _ = _xyz()
    g = X * Y + Polynomial.const(7)
    assert poly_add(Polynomial.zero(), g) == g
    assert poly_add(g, Polynomial.zero()) == g


def test_add_merges_coefficients():
    (X, _, _) = _xyz()
    assert X.scale(2) + X.scale(3) == X.scale(5)


# ---------------------------------------------------------------------------
# multiplication
# ---------------------------------------------------------------------------


def test_mul_associates_structurally():
    X, Y, Z = _xyz()
    assert (X * Y) * Z == X * (Y * Z)


def test_mul_one_is_identity():
    X, Y, _ = _xyz()
    g = X * X - Y.scale(4) + Polynomial.const(2)
    assert g * Polynomial.one() == g


def test_difference_of_squares():
    (X, _, _) = _xyz()
    one = Polynomial.one()
    assert (X + one) * (X - one) == X * X - one


def test_pow_matches_repeated_mul():
    X, Y, _ = _xyz()
    g = X + Y + Polynomial.one()
    assert g**0 == Polynomial.one()
    assert g**1 == g
    assert g**3 == g * g * g
    with pytest.raises(ValueError):
        g ** (-1)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_eval_linear():
    p = variable("p")
    ten_minus = Polynomial.const(10) - Polynomial.of_variable(p).scale(3)
    assert poly_eval(ten_minus, {p: Fraction(1, 2)}) == Fraction(17, 2)


def test_eval_zero_polynomial():
    p = variable("p")
    assert poly_eval(Polynomial.zero(), {p: Fraction(9, 7)}) == 0


def test_eval_product_monomial():
    x, y, z = variables("x", "y", "z")
    X, Y, Z = (Polynomial.of_variable(v) for v in (x, y, z))
    assert poly_eval(X * Y * Z, {x: Fraction(1), y: Fraction(2), z: Fraction(3)}) == 6


def test_eval_missing_assignment():
    x, y = variables("x", "y")
    with pytest.raises(MissingAssignment):
        poly_eval(Polynomial.of_variable(x) * Polynomial.of_variable(y), {x: Fraction(1)})


# ---------------------------------------------------------------------------
# exact division
# ---------------------------------------------------------------------------


def test_divide_by_one():
    X, Y, _ = _xyz()
    g = X * Y - Y + Polynomial.const(5)
    assert poly_divide_exact(g, Polynomial.one()) == g


def test_divide_difference_of_squares():
    (X, _, _) = _xyz()
    one = Polynomial.one()
    assert poly_divide_exact(X * X - one, X + one) == X - one


def test_divide_rejects_remainder():
    (X, _, _) = _xyz()
    with pytest.raises(NotDivisible):
        poly_divide_exact(X * X + Polynomial.one(), X + Polynomial.one())


def test_divide_by_zero_raises():
    (X, _, _) = _xyz()
    with pytest.raises(ZeroDivisionError):
        poly_divide_exact(X, Polynomial.zero())


# ---------------------------------------------------------------------------
# gcd
# ---------------------------------------------------------------------------


def test_gcd_idempotent_and_canonical():
    (X, _, _) = _xyz()
    g = -(X + Polynomial.one()).scale(2)
    h = poly_gcd(g, g)
    assert h == (X + Polynomial.one()).scale(2)  # positive leading coefficient
    assert h.leading_coefficient > 0


def test_gcd_shared_linear_factor():
    (X, _, _) = _xyz()
    one = Polynomial.one()
    a = X * X - one
    b = X * X + X.scale(2) + one
    assert poly_gcd(a, b) == X + one


def test_gcd_of_integers():
    assert poly_gcd(Polynomial.const(4), Polynomial.const(6)) == Polynomial.const(2)


def test_gcd_with_zero():
    (X, _, _) = _xyz()
    assert poly_gcd(Polynomial.zero(), X) == X
    assert poly_gcd(X, Polynomial.zero()) == X


# ---------------------------------------------------------------------------
# irreducibility screen
# ---------------------------------------------------------------------------


def test_irreducible_certificates():
    p = variable("p")
    P = Polynomial.of_variable(p)
    assert is_irreducible_heuristic(P) is Irreducibility.IRREDUCIBLE
    assert is_irreducible_heuristic(Polynomial.one() - P) is Irreducibility.IRREDUCIBLE
    assert is_irreducible_heuristic(Polynomial.const(7)) is Irreducibility.IRREDUCIBLE


def test_reducible_is_unknown():
    (X, _, _) = _xyz()
    assert is_irreducible_heuristic(X * X - Polynomial.one()) is Irreducibility.UNKNOWN


def test_irreducibility_of_zero_rejected():
    with pytest.raises(ValueError):
        is_irreducible_heuristic(Polynomial.zero())


# ---------------------------------------------------------------------------
# property tests
# ---------------------------------------------------------------------------


@st.composite
def polys(draw, max_terms=5, max_exp=3, coeff=8):
    xs = variables("x", "y", "z")
    n = draw(st.integers(0, max_terms))
    acc = {}
    for _ in range(n):
        exps = {}
        for v in xs:
            e = draw(st.integers(0, max_exp))
            if e:
                exps[v] = e
        acc[Monomial.of(exps)] = draw(
            st.integers(-coeff, coeff).filter(lambda c: c != 0)
        )
    return Polynomial.from_dict(acc)


@st.composite
def points(draw):
    xs = variables("x", "y", "z")
    return {
        v: Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 5))) for v in xs
    }


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_commutativity(a, b):
    assert poly_add(a, b) == poly_add(b, a)
    assert poly_mul(a, b) == poly_mul(b, a)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_distributivity(a, b, c):
    assert poly_mul(a, poly_add(b, c)) == poly_add(poly_mul(a, b), poly_mul(a, c))


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), points())
def test_eval_is_a_homomorphism(a, b, pt):
    assert poly_eval(poly_add(a, b), pt) == poly_eval(a, pt) + poly_eval(b, pt)
    assert poly_eval(poly_mul(a, b), pt) == poly_eval(a, pt) * poly_eval(b, pt)


@settings(max_examples=60, deadline=None)
@given(polys(max_terms=4), polys(max_terms=4))
def test_gcd_contract(a, b):
    if a.is_zero and b.is_zero:
        return
    g = poly_gcd(a, b)
    assert g.leading_coefficient > 0
    qa = poly_divide_exact(a, g)  # must not raise
    qb = poly_divide_exact(b, g)
    assert poly_mul(qa, g) == a
    assert poly_mul(qb, g) == b
    if not a.is_zero and not b.is_zero:
        assert poly_gcd(qa, qb).is_one  # g was maximal


@settings(max_examples=40, deadline=None)
@given(polys(max_terms=3), polys(max_terms=3), polys(max_terms=3))
def test_gcd_detects_planted_factor(a, b, g):
    if a.is_zero or b.is_zero or g.is_zero:
        return
    h = poly_gcd(poly_mul(a, g), poly_mul(b, g))
    q = poly_divide_exact(h, g)  # the planted factor divides the gcd
    assert poly_mul(q, g) == h


@settings(max_examples=60, deadline=None)
@given(polys(max_terms=4), polys(max_terms=4).filter(lambda p: not p.is_zero))
def test_exact_division_roundtrip(a, b):
    assert poly_divide_exact(poly_mul(a, b), b) == a


@settings(max_examples=60, deadline=None)
@given(polys(max_terms=3), polys(max_terms=3), polys(max_terms=3))
def test_monomial_order_compatible_with_multiplication(a, b, c):
    if a.is_zero or b.is_zero or c.is_zero:
        return
    la, lb, lc = a.leading_monomial, b.leading_monomial, c.leading_monomial
    if la.compare(lb) < 0:
        assert la.mul(lc).compare(lb.mul(lc)) < 0
