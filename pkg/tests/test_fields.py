import random
from fractions import Fraction

import pytest

from mmlab.errors import DivisionByZero, DomainMismatch, NoSuchRoot
from mmlab.fields import (
    ExtensionField,
    LaurentPoly,
    PrimeField,
    Rationals,
    field_from_descriptor,
    multiplicative_order,
    poly_str,
    prime_factors,
    roots_of_unity,
)

QQ = Rationals()
F101 = PrimeField(101)


def test_rationals_basics():
    assert QQ.add(Fraction(1, 2), Fraction(1, 3)) == Fraction(5, 6)
    assert QQ.inv(Fraction(-3, 7)) == Fraction(-7, 3)
    assert QQ.is_pm_one(Fraction(-1)) and not QQ.is_pm_one(Fraction(2))
    assert QQ.parse("3/7") == Fraction(3, 7)
    assert QQ.show(Fraction(3, 7)) == "3/7"
    with pytest.raises(DivisionByZero):
        QQ.inv(Fraction(0))


def test_prime_field_matches_int_arithmetic():
    rng = random.Random(7)
    for _ in range(200):
        a, b = rng.randrange(101), rng.randrange(101)
        assert F101.add(a, b) == (a + b) % 101
        assert F101.mul(a, b) == (a * b) % 101
        assert F101.sub(a, b) == (a - b) % 101
    for a in range(1, 101):
        assert F101.mul(a, F101.inv(a)) == 1


def test_prime_field_parse_and_show():
    assert F101.parse("12 mod 101") == 12
    assert F101.parse("-1") == 100
    assert F101.show(12) == "12 mod 101"
    with pytest.raises(DomainMismatch):
        F101.parse("12 mod 103")
    with pytest.raises(ValueError):
        PrimeField(100)


def test_extension_field_canonical_modulus():
    # Lexicographically first monic irreducibles, constant coeff fastest.
    assert ExtensionField(2, 2).modulus == (1, 1, 1)      # x^2+x+1
    assert ExtensionField(2, 3).modulus == (1, 1, 0, 1)   # x^3+x+1
    assert ExtensionField(3, 2).modulus == (1, 0, 1)      # x^2+1
    assert poly_str((1, 1, 0, 1)) == "x^3+x+1"


def test_extension_field_inverses_exhaustive():
    for field in (ExtensionField(2, 2), ExtensionField(2, 3), ExtensionField(3, 2)):
        seen = set()
        for a in field.elements():
            seen.add(a)
            if field.is_zero(a):
                with pytest.raises(DivisionByZero):
                    field.inv(a)
                continue
            assert field.mul(a, field.inv(a)) == field.one
        assert len(seen) == field.order


def test_extension_field_parse_show_roundtrip():
    f9 = ExtensionField(3, 2)
    a = (2, 1)
    assert f9.parse(f9.show(a)) == a
    assert f9.show(a) == "[2,1] mod 3 / x^2+1"
    f125 = ExtensionField(5, 3)
    assert f125.parse("[2,0,1] mod 5 / " + poly_str(f125.modulus)) == (2, 0, 1)
    with pytest.raises(ValueError):
        ExtensionField(2, 2, modulus=(0, 0, 1))  # x^2 is reducible


def test_multiplicative_order():
    f4 = ExtensionField(2, 2)
    assert multiplicative_order(f4, f4.gen()) == 3
    assert multiplicative_order(F101, 1) == 1
    # 2 generates a subgroup of order 100/gcd structure; brute-check.
    ord2 = multiplicative_order(F101, 2)
    assert pow(2, ord2, 101) == 1
    assert all(pow(2, e, 101) != 1 for e in range(1, ord2))


def test_prime_factors():
    assert prime_factors(1) == []
    assert prime_factors(12) == [2, 3]
    assert prime_factors(97) == [97]


def test_roots_of_unity_rationals():
    f2, pts = roots_of_unity(4, QQ)
    assert f2 == QQ and pts == [Fraction(1), Fraction(2), Fraction(3), Fraction(4)]


def test_roots_of_unity_prime_order():
    f2, pts = roots_of_unity(3, PrimeField(7))
    assert f2 == PrimeField(7)
    assert sorted(pts) == [1, 2, 4]  # the cube roots of unity in F_7
    assert len(set(pts)) == 3


def test_roots_of_unity_composite_order():
    # Composite p: the generator must have order exactly p, not a divisor.
    for p, field in ((4, PrimeField(5)), (6, PrimeField(7)), (8, PrimeField(17))):
        f2, pts = roots_of_unity(p, field)
        assert len(set(pts)) == p
        w = pts[0]
        assert f2.pow(w, p) == f2.one
        assert all(f2.pow(w, p // ell) != f2.one for ell in prime_factors(p))


def test_roots_of_unity_builds_extension():
    # 3 divides 2^2 - 1, so roots of x^3=1 over F_2 live in F_4.
    f2, pts = roots_of_unity(3, PrimeField(2))
    assert f2.order == 4
    assert len(set(pts)) == 3
    # Over F_4 itself no extension is needed.
    f4 = ExtensionField(2, 2)
    f2b, _ = roots_of_unity(3, f4)
    assert f2b == f4


def test_roots_of_unity_char_divides():
    with pytest.raises(NoSuchRoot):
        roots_of_unity(5, PrimeField(5))


def test_field_descriptor_roundtrip():
    for field in (QQ, F101, ExtensionField(2, 3), ExtensionField(5, 2)):
        assert field_from_descriptor(field.descriptor) == field
    with pytest.raises(ValueError):
        field_from_descriptor("f:banana")


def test_laurent_poly_arithmetic():
    x = LaurentPoly.lam(QQ)  # λ
    p = (x + LaurentPoly.const(QQ, Fraction(1))) * (x - LaurentPoly.const(QQ, Fraction(1)))
    assert p.coeff(2) == 1 and p.coeff(0) == -1 and p.coeff(1) == 0
    inv2 = LaurentPoly.lam(QQ, -2, Fraction(3))
    q = inv2 * x
    assert q.coeff(-1) == 3
    assert q.min_degree == -1 and q.max_degree == -1
    assert q.eval_at(Fraction(2)) == Fraction(3, 2)


def test_laurent_poly_eval_over_prime_field():
    f = PrimeField(7)
    p = LaurentPoly(f, {-1: 3, 0: 1, 2: 5})
    x0 = 2
    expected = (3 * pow(2, 5, 7) + 1 + 5 * 4) % 7  # 2^-1 = 4 in F_7
    assert p.eval_at(x0) == expected
