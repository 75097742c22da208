import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from troplat.errors import (IndeterminateValuation, ParseError,
                            PrecisionExhausted)
from troplat.series import (DEFAULT_PRIME, FieldConfig, Series, format_series,
                            invert_unit, parse_series, precision,
                            with_escalating_precision, working_window)

FP = FieldConfig.prime()
QQ = FieldConfig.rationals()


def s(text, field=FP, horizon=None):
    return parse_series(text, field, horizon)


class TestParse:
    def test_basic(self):
        x = s("t^2 + t^3", horizon=64)
        assert x.lead == 2
        assert x.coeffs == (1, 1)
        assert x.poly

    def test_zero(self):
        x = s("0", horizon=64)
        assert x.is_exact_zero
        assert x.valuation() == math.inf

    def test_rational_coeffs(self):
        x = s("3/2*t^-1 + 1", QQ, horizon=64)
        assert x.lead == -1
        assert x.coeffs == (Fraction(3, 2), Fraction(1))

    def test_whitespace_insensitive(self):
        assert s(" t^2+ t ^3 ") == s("t^2+t^3")

    def test_leading_minus(self):
        x = s("-2 + t", QQ)
        assert x.coeff(0) == -2

    def test_merges_repeated_exponents(self):
        assert s("t + t") == s("2*t^1")

    def test_syntax_error_position(self):
        with pytest.raises(ParseError):
            s("t^2 + ^3")
        with pytest.raises(ParseError):
            s("")
        with pytest.raises(ParseError):
            s("1 +")

    def test_coefficient_not_in_field(self):
        small = FieldConfig.prime(5)
        with pytest.raises(ParseError):
            s("1/5", small)

    def test_horizon_must_exceed_max_exponent(self):
        with pytest.raises(ParseError):
            s("t^100", horizon=50)

    def test_print_parse_fixed_point(self):
        for text in ["t^2 + t^3", "0", "5", "3/2*t^-1 + 1", "t^-4 + 2*t^9"]:
            x = s(text, QQ)
            assert parse_series(format_series(x), QQ) == \
                parse_series(format_series(parse_series(format_series(x), QQ)), QQ)

    def test_compact_format_roundtrip(self):
        x = s("1 - 2*t^3 + 1/2*t^5", QQ)
        compact = format_series(x, compact=True)
        assert " " not in compact
        assert parse_series(compact, QQ).coeffs == x.coeffs


class TestValuation:
    def test_examples(self):
        assert s("t^2 + t^3").valuation() == 2
        assert s("0").valuation() == math.inf

    def test_indeterminate_on_truncated_zero(self):
        # all stored coefficients zero, nonzero truncated tail unknown
        x = Series(FP, 0, (), horizon=8, poly=False)
        with pytest.raises(IndeterminateValuation):
            x.valuation()
        assert x.val_lower_bound() == 8


class TestArithmetic:
    def test_add_cancel_to_monomial(self):
        assert (s("1 + t") + s("-1", QQ if False else FP)).coeffs == (1,)
        x = s("1 + t") + (-s("1"))
        assert x.lead == 1 and x.coeffs == (1,)

    def test_shift_multiply(self):
        x = s("t^-1") * s("t^3 + t^4")
        assert x.lead == 2 and x.coeffs == (1, 1)

    def test_exact_cancellation_records_horizon(self):
        a = s("1 + t", horizon=64)
        x = a - a
        assert x.is_exact_zero
        assert x.horizon == 64
        assert x.valuation() == math.inf

    def test_mul_horizon_rule(self):
        a = Series(FP, 1, (1, 1), horizon=10, poly=False)
        b = Series(FP, 2, (1,), horizon=7, poly=False)
        c = a * b
        assert c.horizon == min(1 + 7, 2 + 10)
        assert c.lead == 3

    def test_scalar_scale(self):
        x = s("t + t^2", QQ).scale(Fraction(3))
        assert x.coeffs == (3, 3)


@st.composite
def poly_series(draw):
    terms = draw(st.dictionaries(st.integers(-6, 6),
                                 st.integers(0, DEFAULT_PRIME - 1),
                                 max_size=5))
    return Series.from_terms(FP, {e: c for e, c in terms.items() if c},
                             horizon=64)


class TestRingAxioms:
    @settings(max_examples=60, deadline=None)
    @given(poly_series(), poly_series(), poly_series())
    def test_associativity_and_distributivity(self, a, b, c):
        assert ((a + b) + c).agrees(a + (b + c))
        assert (a * (b + c)).agrees(a * b + a * c)
        assert (a * b).agrees(b * a)

    @settings(max_examples=60, deadline=None)
    @given(poly_series(), poly_series())
    def test_valuation_multiplicative(self, a, b):
        if a and b:
            assert (a * b).valuation() == a.valuation() + b.valuation()


class TestInvertUnit:
    def test_geometric_series(self):
        x = invert_unit(s("1 + t"), window=6)
        p = FP.p
        assert x.coeffs == (1, p - 1, 1, p - 1, 1, p - 1)
        assert x.lead == 0

    def test_monomial_exact(self):
        x = invert_unit(s("t^2"))
        assert x.poly and x.lead == -2 and x.coeffs == (1,)

    def test_rational_constant(self):
        x = invert_unit(parse_series("2", QQ))
        assert x.coeffs == (Fraction(1, 2),)

    def test_product_is_one_up_to_window(self):
        a = s("1 + t + 3*t^2")
        prod = a * invert_unit(a, window=20)
        assert prod.coeff(0) == 1
        for e in range(1, 18):
            assert prod.coeff(e) == 0

    def test_involution_on_window(self):
        a = s("2 + t + t^3", QQ)
        back = invert_unit(invert_unit(a, window=24), window=24)
        for e in range(0, 10):
            assert back.coeff(e) == a.coeff(e)

    def test_valuation_negates(self):
        a = s("t^3 + t^5")
        assert invert_unit(a).valuation() == -3

    def test_indeterminate_propagates(self):
        x = Series(FP, 0, (), horizon=8, poly=False)
        with pytest.raises(IndeterminateValuation):
            invert_unit(x)


class TestPrecisionProtocol:
    def test_context_restores(self):
        w0 = working_window()
        with precision(128):
            assert working_window() == 128
        assert working_window() == w0

    def test_escalation_runs_and_caps(self):
        seen = []

        def compute():
            seen.append(working_window())
            if working_window() < 256:
                raise IndeterminateValuation("need more")
            return "ok"

        assert with_escalating_precision(compute) == "ok"
        assert seen == [64, 128, 256]

    def test_precision_exhausted_is_hard(self):
        def compute():
            raise IndeterminateValuation("never enough")

        with pytest.raises(PrecisionExhausted):
            with_escalating_precision(compute)
