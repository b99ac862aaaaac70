import doctest
import math
from fractions import Fraction

import pytest

import escmass.qfield as qfield
from escmass.qfield import (
    QuadNum,
    qmat,
    qmat_identity,
    qmat_mul,
    qmat_unipotent_inverse,
)


def test_doctests():
    results = doctest.testmod(qfield)
    assert results.failed == 0


def test_golden_ratio_satisfies_its_law():
    g = QuadNum.tau(1, 1)
    assert g * g == g + 1
    assert (g ** 4).is_rational() is False
    # phi^2 - phi - 1 = 0 exactly
    assert (g * g - g - 1).is_zero()


def test_sqrt2_float_and_sign_agree():
    r = QuadNum.tau(0, 2)
    assert abs(float(r) - math.sqrt(2)) < 1e-15
    assert (r - Fraction(141421356, 100000000)).sign() == 1
    assert (r - Fraction(141421357, 100000000)).sign() == -1
    assert r.sign() == 1
    assert (-r).sign() == -1


def test_rational_tau_rejected():
    # x^2 = 2x + 3 has the rational root 3 (disc = 16 is a square)
    with pytest.raises(ValueError):
        QuadNum.tau(2, 3)


def test_inverse_of_generic_element():
    t = QuadNum.tau(1, 3)
    x = t * 2 - Fraction(5, 7)
    assert (x * x.inverse()).as_fraction() == 1
    assert (1 / x) * x == 1


def test_rationals_from_different_contexts_mix():
    a = QuadNum.tau(0, 2) * 0 + 3  # rational 3, built in the sqrt2 context
    b = QuadNum.rational(3)
    assert a == b
    assert hash(a) == hash(b)


def test_incompatible_fields_refuse_to_mix():
    with pytest.raises(ValueError):
        QuadNum.tau(0, 2) + QuadNum.tau(1, 1)


def test_comparison_operators():
    r = QuadNum.tau(0, 2)
    assert r > 1
    assert r < Fraction(3, 2)
    assert not r <= 1
    assert r >= r


def test_unipotent_matrix_inverse_lower_triangular_too():
    m = qmat([[1, 0, 0], [5, 1, 0], [7, -2, 1]])
    assert qmat_mul(m, qmat_unipotent_inverse(m)) == qmat_identity(3)


def test_unipotent_inverse_with_irrational_entries():
    t = QuadNum.tau(0, 2)
    m = qmat([[1, t, Fraction(1, 2)], [0, 1, t * 3], [0, 0, 1]])
    assert qmat_mul(qmat_unipotent_inverse(m), m) == qmat_identity(3)
