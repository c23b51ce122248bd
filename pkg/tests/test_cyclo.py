import math
import random
from fractions import Fraction

import pytest

from germforge.cyclo import (
    CoefficientParseError,
    EmbeddingError,
    FieldMismatchError,
    cyclotomic_polynomial,
    embed_to_conductor,
    field,
    format_coefficient,
    parse_coefficient,
    root_of_unity_order,
    to_complex,
)

CONDUCTORS = (1, 2, 3, 4, 5, 8, 12)


def random_element(rng, fld, size=6):
    return fld.element([Fraction(rng.randint(-size, size), rng.randint(1, size)) for _ in range(fld.degree)])


# --- field construction -----------------------------------------------------


def test_field_degree_one_is_q():
    f = field(1)
    assert f.degree == 1
    assert f.modulus == (-1, 1)


def test_phi_3():
    assert field(3).modulus == (1, 1, 1)


def test_phi_12():
    # independent route: divide x^12 - 1 by Phi_1 Phi_2 Phi_3 Phi_4 Phi_6 over Q
    def poly_mul(a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return out

    def poly_div(num, den):
        num = list(num)
        q = [0] * (len(num) - len(den) + 1)
        for k in range(len(q) - 1, -1, -1):
            c = num[k + len(den) - 1]
            q[k] = c
            for i, d in enumerate(den):
                num[k + i] -= c * d
        assert all(c == 0 for c in num)
        return q

    prod = [1]
    for d in (1, 2, 3, 4, 6):
        prod = poly_mul(prod, list(cyclotomic_polynomial(d)))
    x12 = [-1] + [0] * 11 + [1]
    assert tuple(poly_div(x12, prod)) == (1, 0, -1, 0, 1)
    assert field(12).modulus == (1, 0, -1, 0, 1)


@pytest.mark.parametrize("n", CONDUCTORS)
def test_zeta_satisfies_modulus_and_unity(n):
    f = field(n)
    z = f.zeta()
    acc = f.zero()
    for i, c in enumerate(f.modulus):
        acc = acc + z ** i * c
    assert acc.is_zero()
    assert (z ** n).is_one()


# --- arithmetic ---------------------------------------------------------------


def test_paper_zeta3_relations():
    lam = field(3).zeta()
    assert (lam * lam ** 2).is_one()
    assert lam + lam ** 2 == -1


def test_additive_identity():
    f = field(5)
    a = f.element([1, 2, 3, 4])
    assert a + f.zero() == a


def test_field_axioms_random():
    rng = random.Random(7)
    for n in CONDUCTORS:
        f = field(n)
        for _ in range(25):
            a, b, c = (random_element(rng, f) for _ in range(3))
            assert (a + b) + c == a + (b + c)
            assert a * b == b * a
            assert a * (b + c) == a * b + a * c
            assert (a * b) * c == a * (b * c)
            if not a.is_zero():
                assert (a * a.inverse()).is_one()


def test_inverse_examples():
    assert field(1).one().inverse().is_one()
    lam = field(3).zeta()
    assert lam.inverse() == lam ** 2
    i = field(4).zeta()
    assert i.inverse() == -i


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        field(3).zero().inverse()


def test_conductor_mismatch_raises():
    with pytest.raises(FieldMismatchError):
        field(3).zeta() + field(4).zeta()


# --- root of unity orders -------------------------------------------------------


def test_order_examples():
    assert root_of_unity_order(field(3).one()) == 1
    assert root_of_unity_order(field(12).zeta(8)) == 3
    assert root_of_unity_order(field(3).from_rational(2)) is None
    # 1 + zeta_3 = -zeta_3^2 has order 6
    assert root_of_unity_order(1 + field(3).zeta()) == 6


@pytest.mark.parametrize("n", (2, 3, 4, 5, 8, 12))
def test_order_of_zeta_powers(n):
    f = field(n)
    for k in range(1, n):
        assert root_of_unity_order(f.zeta(k)) == n // math.gcd(n, k)


# --- embeddings ------------------------------------------------------------------


def test_embed_minus_one():
    a = field(2).zeta()  # -1
    img = embed_to_conductor(a, 6)
    assert img == field(6).from_rational(-1)
    assert img == field(6).zeta(3)


def test_embed_zeta3_into_12():
    assert embed_to_conductor(field(3).zeta(), 12) == field(12).zeta(4)


def test_embed_rational_fixed():
    q = field(1).from_rational(Fraction(7, 3))
    assert embed_to_conductor(q, 12).as_rational() == Fraction(7, 3)


def test_embed_requires_divisibility():
    with pytest.raises(EmbeddingError):
        embed_to_conductor(field(3).zeta(), 4)


def test_embed_is_ring_homomorphism():
    rng = random.Random(11)
    f = field(4)
    for _ in range(20):
        a, b = random_element(rng, f), random_element(rng, f)
        assert embed_to_conductor(a + b, 12) == embed_to_conductor(a, 12) + embed_to_conductor(b, 12)
        assert embed_to_conductor(a * b, 12) == embed_to_conductor(a, 12) * embed_to_conductor(b, 12)


def test_embed_round_trips_numerically():
    a = field(3).zeta() * Fraction(2, 7) + 1
    b = embed_to_conductor(a, 12)
    assert abs(to_complex(a, 20) - to_complex(b, 20)) < 1e-15


# --- numeric evaluation -----------------------------------------------------------


def test_to_complex_examples():
    assert to_complex(field(1).one()) == 1
    assert abs(to_complex(field(4).zeta()) - 1j) < 1e-14
    v = to_complex(field(3).zeta(), 12)
    assert abs(v - complex(-0.5, 0.8660254037844386)) < 1e-12


def test_to_complex_multiplicative():
    rng = random.Random(3)
    digits = 12
    for n in (3, 5, 12):
        f = field(n)
        for _ in range(10):
            a, b = random_element(rng, f, 4), random_element(rng, f, 4)
            lhs = to_complex(a * b, digits)
            rhs = to_complex(a, digits) * to_complex(b, digits)
            assert abs(lhs - rhs) < 10 ** (-digits + 2)


# --- coefficient grammar ------------------------------------------------------------


def test_parse_examples():
    f3 = field(3)
    assert parse_coefficient("-1", f3) == -1
    assert parse_coefficient("3/2*z^2 - 1", f3) == f3.zeta(2) * Fraction(3, 2) - 1
    assert parse_coefficient("z^4", f3) == f3.zeta()  # z^4 = z in Q(zeta_3)
    assert parse_coefficient("-z", f3) == -f3.zeta()
    assert parse_coefficient(" 1/2 + z ", f3) == f3.zeta() + Fraction(1, 2)


def test_parse_errors():
    f = field(3)
    for bad in ("", "z^", "1//2", "q", "1 +", "1/0"):
        with pytest.raises(CoefficientParseError):
            parse_coefficient(bad, f)


def test_format_round_trip_random():
    rng = random.Random(5)
    for n in CONDUCTORS:
        f = field(n)
        for _ in range(25):
            a = random_element(rng, f)
            assert parse_coefficient(format_coefficient(a), f) == a
    assert format_coefficient(field(3).zero()) == "0"
