import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bisect_root, moran_dimension

from overlap_lab.algebraic import AlgebraicParameter
from overlap_lab.errors import ContractError, NumericalWarning
from overlap_lab.ifs import AffineContraction, AffineSystem, bernoulli_convolution
from overlap_lab.measures import BernoulliWeights
from overlap_lab.dimension import (
    box_dimension_bound,
    cor_o1_bound,
    dimension_report,
    empirical_box_dimension,
    pressure,
    pressure_zero,
)

Q = AlgebraicParameter.rational_field()
SQRT2 = AlgebraicParameter([-1, 0, 2], ("1/2", "1"))


def q(x):
    return Q.const(Fraction(x))


def system(*ratios):
    return AffineSystem([AffineContraction(q(r), q(i)) for i, r in enumerate(ratios)], Q)


def test_pressure_zero_moran():
    s = system("1/3", "1/3", "1/3", "1/3")
    assert pressure_zero(s, 0.0) == pytest.approx(math.log(4) / math.log(3), abs=1e-12)
    assert pressure_zero(s, math.log(2)) == pytest.approx(math.log(2) / math.log(3), abs=1e-12)


def test_pressure_zero_unequal_ratios():
    s = system("1/2", "1/3")
    want = moran_dimension([0.5, 1 / 3], 0.0)
    assert want == pytest.approx(0.787884911, abs=1e-8)
    assert pressure_zero(s, 0.0) == pytest.approx(want, abs=1e-10)
    assert abs(pressure(s, want, 0.0)) < 1e-10


def test_pressure_zero_sqrt2_with_closed_form_log_o():
    s = bernoulli_convolution(SQRT2)
    assert pressure_zero(s, math.log(2) / 2) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.fractions(Fraction(1, 20), Fraction(9, 10), max_denominator=20), min_size=2, max_size=4),
       st.floats(0, 0.99))
def test_pressure_zero_matches_bisection_oracle(ratios, frac):
    s = AffineSystem([AffineContraction(Q.const(r), Q.const(i)) for i, r in enumerate(ratios)], Q)
    log_o = frac * math.log(len(ratios))
    want = bisect_root(lambda t: math.log(sum(float(r) ** t for r in ratios)) - log_o, 0.0, 200.0)
    assert pressure_zero(s, log_o) == pytest.approx(want, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.69), st.floats(0, 0.69))
def test_pressure_zero_decreasing_in_log_o(a, b):
    a, b = sorted((a, b))
    s = system("1/2", "1/3", "2/5")
    assert pressure_zero(s, a) >= pressure_zero(s, b)


def test_pressure_zero_clamps_with_warning():
    s = system("1/2", "1/2")
    with pytest.warns(NumericalWarning):
        assert pressure_zero(s, 1.0) == 0.0
    assert pressure_zero(s, math.log(2)) == 0.0
    with pytest.raises(ContractError):
        pressure_zero(s, -0.1)


def test_box_bound_examples():
    assert box_dimension_bound(math.log(2), 0.0, math.log(2) / 2) == pytest.approx(2.0, abs=1e-12)
    b = box_dimension_bound(math.log(3), 2 / 3 * math.log(2), math.log(10 / 3))
    assert b == pytest.approx((math.log(3) - 2 / 3 * math.log(2)) / math.log(10 / 3), abs=1e-12)
    assert b == pytest.approx(0.5286782, abs=1e-6)
    with pytest.warns(NumericalWarning):
        assert box_dimension_bound(math.log(2), 1.0, 0.5) == 0.0
    with pytest.raises(ContractError):
        box_dimension_bound(math.log(2), 0.0, 0.0)


def test_cor_o1_examples():
    # one exact pair at level 1 in the three-map block system
    got = cor_o1_bound(3, 1, 2, math.log(3), math.log(10 / 3))
    assert got == pytest.approx(box_dimension_bound(math.log(3), 2 / 3 * math.log(2), math.log(10 / 3)), abs=1e-12)
    mixed = cor_o1_bound(2, 3, [(2, 0), (2, 1), (2, 1)], math.log(2), math.log(2) / 2)
    assert mixed == pytest.approx((3 * math.log(2) - math.log(2) / 2) / (1.5 * math.log(2)), abs=1e-12)
    with pytest.raises(ContractError):
        cor_o1_bound(2, 2, 5, math.log(2), 1.0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cor_o1_without_overlaps_is_similarity_ratio(n):
    chi = math.log(2) / 2
    assert abs(cor_o1_bound(2, n, 1, math.log(2), chi) - math.log(2) / chi) < 1e-12


def test_dimension_report_collects_warnings():
    s = bernoulli_convolution(SQRT2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalWarning)
        r = dimension_report(s, BernoulliWeights.uniform(2), 1.0, "given")
    assert r.box_bound == 0.0 and r.hd_bound_t == 0.0
    assert len(r.warnings) == 2
    ok = dimension_report(s, BernoulliWeights.uniform(2), math.log(2) / 2, "closed form")
    assert ok.box_bound == pytest.approx(1.0, abs=1e-12) and ok.warnings == []


def test_empirical_single_map_is_zero():
    s = AffineSystem([AffineContraction(q("1/2"), q(1))], Q)
    e = empirical_box_dimension(s, None, 1000, range(4, 13), seed=1, fit=(6, 11))
    assert e.slope == pytest.approx(0.0, abs=1e-12)


def test_empirical_osc_slope():
    s = bernoulli_convolution(AlgebraicParameter.rational(Fraction(2, 5)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalWarning)
        e = empirical_box_dimension(s, None, 400_000, range(4, 13), seed=1, fit=(6, 11))
    assert abs(e.slope - math.log(2) / math.log(2.5)) < 0.03
    assert all(a <= b for a, b in zip(e.box_counts, e.box_counts[1:]))


def test_empirical_contracts():
    s = bernoulli_convolution(SQRT2)
    with pytest.raises(ContractError):
        empirical_box_dimension(s, None, 100, range(4, 8), mass_fraction=0.3)
    with pytest.raises(ContractError):
        empirical_box_dimension(s, None, 100, [6, 5, 7])
    with pytest.raises(ContractError):
        empirical_box_dimension(s, None, 100, range(4, 8), fit=(7, 7))


def test_empirical_garsia_slope_is_full():
    s = bernoulli_convolution(SQRT2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalWarning)
        e = empirical_box_dimension(s, None, 2_000_000, seed=7)
    assert abs(e.slope - 1.0) < 0.05
