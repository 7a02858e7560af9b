import math

import numpy as np
import pytest

from soslyap.poly import (ParseError, Polynomial, PolyMatrix3, basis_size,
                          coefficient_vector, extrema_on_box,
                          format_polynomial, from_coefficient_vector,
                          monomial_basis, parse_polynomial)


def P(text):
    return parse_polynomial(text)


class TestParser:
    def test_zero(self):
        assert P("0").is_zero()

    def test_expansion(self):
        assert P("x1*(1-x1)") == P("x1 - x1^2")

    def test_nested_and_signs(self):
        assert P("-(17*x1^4-30*x2-25*x1^2-8*x2^3-50*x2^4)") == \
            P("-17*x1^4 + 30*x2 + 25*x1^2 + 8*x2^3 + 50*x2^4")

    def test_power(self):
        assert P("(1+x1)^2") == P("1 + 2*x1 + x1^2")

    def test_leading_sign(self):
        assert P("-x1") == P("0 - x1")
        assert P("+x2") == P("x2")

    def test_bump(self):
        # trailing factor chains must consume the whole input
        p = P("x1*x2*(1-x1)*(1-x2)")
        assert p(0.5, 0.5) == pytest.approx(0.0625)

    def test_errors(self):
        for bad in ("x3", "x1 +", "(x1", "x1^^2", "1..2"):
            with pytest.raises(ParseError):
                P(bad)

    def test_roundtrip_format(self):
        for text in ("0", "1", "x1*(1-x1)", "5*x1^2-15*x1*x2+13*x2^2",
                     "-17*x1^4+30*x2"):
            p = P(text)
            assert P(format_polynomial(p)) == p


class TestArithmetic:
    def test_additive_inverse(self):
        assert (P("x1") + (-P("x1"))).is_zero()

    def test_mul_expansion(self):
        assert P("x1") * P("1-x1") == P("x1 - x1^2")

    def test_scale_linearity(self):
        assert P("x1^2+x2") * 2.0 == P("2*x1^2 + 2*x2")

    def test_degree(self):
        assert P("0").degree() == -1
        assert P("7").degree() == 0
        assert P("x1^2*x2^3").degree() == 5


class TestCalculus:
    def test_power_rule(self):
        assert P("x1^2*x2").diff(1) == P("2*x1*x2")

    def test_constant(self):
        assert P("7").diff(2).is_zero()

    def test_product(self):
        assert P("x1*(1-x1)").diff(1) == P("1 - 2*x1")

    def test_integral_on_box(self):
        assert P("1").integral_on_box() == pytest.approx(1.0)
        assert P("x1*x2").integral_on_box() == pytest.approx(0.25)


class TestEvaluation:
    def test_zero_everywhere(self):
        assert P("0")(0.3, 0.7) == 0.0

    def test_direct_substitution(self):
        assert P("5*x1^2-15*x1*x2+13*x2^2")(1.0, 1.0) == pytest.approx(3.0)
        assert P("x1*(1-x1)*x2*(1-x2)")(0.5, 0.5) == pytest.approx(0.0625)

    def test_vectorized(self):
        xs = np.linspace(0, 1, 11)
        vals = P("x1+2*x2")(xs[:, None], xs[None, :])
        assert vals.shape == (11, 11)
        assert vals[3, 5] == pytest.approx(xs[3] + 2 * xs[5])


class TestBasis:
    def test_counts(self):
        assert len(monomial_basis(1)) == 3
        assert len(monomial_basis(2)) == 6
        assert basis_size(4) == 15

    def test_coefficient_vector_zero(self):
        basis = monomial_basis(2)
        assert not coefficient_vector(P("0"), basis).any()

    def test_coefficient_vector_graded(self):
        basis = monomial_basis(1)  # 1, x1, x2 in graded-lex order
        np.testing.assert_allclose(coefficient_vector(P("1+x2"), basis),
                                   [1.0, 0.0, 1.0])

    def test_unit_vector_slot(self):
        basis = monomial_basis(2)
        v = coefficient_vector(P("x1*x2"), basis)
        assert np.count_nonzero(v) == 1
        assert v.sum() == pytest.approx(1.0)

    def test_roundtrip(self):
        basis = monomial_basis(3)
        p = P("1 - 2*x1*x2 + 0.5*x2^3")
        assert from_coefficient_vector(coefficient_vector(p, basis),
                                       basis) == p


class TestExtrema:
    def test_constant(self):
        lo, hi = extrema_on_box(P("1"))
        assert (lo, hi) == (pytest.approx(1.0), pytest.approx(1.0))

    def test_monotone_corners(self):
        lo, hi = extrema_on_box(P("1+x1*x2"))
        assert lo == pytest.approx(1.0, abs=1e-9)
        assert hi == pytest.approx(2.0, abs=1e-9)

    def test_interior_max(self):
        ext = extrema_on_box(P("1 + x1*(1-x1)"))
        assert ext.lower == pytest.approx(1.0, abs=ext.resolution_error)
        assert ext.upper == pytest.approx(1.25, abs=max(1e-9,
                                                        ext.resolution_error))


class TestPolyMatrix:
    def test_symmetric_storage(self):
        m = PolyMatrix3()
        m.set(2, 0, P("x1"))
        assert m.get(0, 2) == P("x1")

    def test_arithmetic(self):
        m = PolyMatrix3({(0, 0): P("x1")})
        two = m + m
        assert two.get(0, 0) == P("2*x1")
        assert (2.0 * m).get(0, 0) == P("2*x1")
        assert (m - m).is_zero()
