import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import Surd, exact_cylinders
from systems import PARAMS, build, random_spec, surd_of

from overlap_lab.algebraic import AlgebraicParameter, FloatParameter
from overlap_lab.errors import ContractError
from overlap_lab.ifs import (
    AffineContraction,
    AffineSystem,
    Interval,
    attractor_hull,
    bernoulli_convolution,
    compose,
    contains,
    cylinder_interval,
    image,
    project_point,
)

Q = AlgebraicParameter.rational_field()
HALF = AlgebraicParameter.rational(Fraction(1, 2))


def q(x):
    return Q.const(Fraction(x))


def test_compose_half_word_11():
    s = bernoulli_convolution(HALF)
    f = compose(s, [1, 1])
    assert f.ratio == HALF.const(Fraction(1, 4))
    assert f.offset == HALF.const(Fraction(3, 2))


def test_compose_single_symbol_and_empty_word():
    s = bernoulli_convolution(HALF)
    assert compose(s, [0]) == s.maps[0]
    with pytest.raises(ContractError):
        compose(s, [])
    with pytest.raises(ContractError):
        compose(s, [2])


def test_compose_order_is_outer_first():
    # phi_0(phi_1(x)) with phi_0 = x/2, phi_1 = x/3 + 1  ->  x/6 + 1/2
    s = AffineSystem([AffineContraction(q("1/2"), q(0)), AffineContraction(q("1/3"), q(1))], Q)
    f = compose(s, [0, 1])
    assert f.ratio == q("1/6") and f.offset == q("1/2")
    g = compose(s, [1, 0])
    assert g.ratio == q("1/6") and g.offset == q(1)


def test_constant_ratio_power():
    p = AlgebraicParameter([-1, 1, 1], ("1/2", "1"))
    s = bernoulli_convolution(p)
    lam = p.generator()
    for w in [(0, 1, 1), (1, 0, 1, 0, 0)]:
        assert compose(s, w).ratio == lam ** len(w)


def test_hull_of_half_convolution():
    s = bernoulli_convolution(HALF)
    assert s.hull == Interval(HALF.const(-2), HALF.const(2))


def test_hull_of_single_map_is_fixed_point():
    h = attractor_hull([AffineContraction(q("1/2"), q(0))], Q)
    assert h.lo == q(0) and h.hi == q(0)


def test_hull_of_sqrt2_convolution():
    p = AlgebraicParameter([-1, 0, 2], ("1/2", "1"))
    s = bernoulli_convolution(p)
    lo, hi = s.hull.to_floats(p)
    assert lo == pytest.approx(-3.414213562373095, abs=1e-12)
    assert hi == pytest.approx(3.414213562373095, abs=1e-12)
    # exactly 1/(1 - lambda)
    assert s.hull.hi * (p.one() - p.generator()) == p.one()


def test_cylinder_examples():
    s = bernoulli_convolution(HALF)
    c = cylinder_interval(s, [1])
    assert c == Interval(HALF.const(0), HALF.const(2))


def test_negative_ratio_swaps_endpoints():
    s = AffineSystem([AffineContraction(q("-1/2"), q(0)), AffineContraction(q("1/3"), q(1))], Q)
    c = cylinder_interval(s, [0])
    assert Q.compare(c.lo, c.hi) <= 0
    f = s.maps[0]
    assert {c.lo, c.hi} == {f(s.hull.lo), f(s.hull.hi)}


def test_contraction_contracts():
    with pytest.raises(ContractError):
        AffineSystem([AffineContraction(q(0), q(1))], Q)
    with pytest.raises(ContractError):
        AffineSystem([AffineContraction(q(1), q(0))], Q)
    with pytest.raises(ContractError):
        AffineSystem([AffineContraction(q(-1), q(0))], Q)
    with pytest.raises(ContractError):
        AffineSystem([], Q)


def test_project_point_width_and_fixed_point():
    p = AlgebraicParameter([-1, 1, 1], ("1/2", "1"))
    s = bernoulli_convolution(p)
    lam = p.generator()
    iv = project_point(s, (0, 1, 1, 0, 1))
    assert iv.length() == (s.hull.hi - s.hull.lo) * lam**5
    half = bernoulli_convolution(HALF)
    iv = project_point(half, (1,) * 30)
    assert HALF.compare(iv.lo, HALF.const(2)) <= 0 <= HALF.compare(iv.hi, HALF.const(2))
    assert HALF.to_float(iv.length()) < 1e-8


def test_float_mode_system():
    p = FloatParameter(0.4)
    s = bernoulli_convolution(p)
    lo, hi = s.hull.to_floats(p)
    assert (lo, hi) == pytest.approx((-1 / 0.6, 1 / 0.6))
    assert not s.exact


# -- properties over random systems -------------------------------------------

seeds = st.integers(min_value=0, max_value=10**6)


def _lam(spec):
    name = spec[0]
    return Surd(0) if name == "rational" else PARAMS[name][2]


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_hull_invariant_and_tight(seed):
    s, _, _ = build(random_spec(random.Random(seed)))
    p = s.param
    imgs = [image(p, f, s.hull) for f in s.maps]
    assert all(contains(p, s.hull, im) for im in imgs)
    # smallest: both endpoints are attained by some image
    assert any(im.lo == s.hull.lo for im in imgs)
    assert any(im.hi == s.hull.hi for im in imgs)


@settings(max_examples=40, deadline=None)
@given(seeds, st.lists(st.integers(0, 2), min_size=1, max_size=16), st.lists(st.integers(0, 2), max_size=6))
def test_cylinder_nesting(seed, w, ext):
    s, _, _ = build(random_spec(random.Random(seed)))
    w = [x % s.m for x in w]
    ext = [x % s.m for x in ext]
    outer = cylinder_interval(s, w)
    inner = cylinder_interval(s, w + ext)
    assert contains(s.param, outer, inner)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 4))
def test_cylinders_match_surd_oracle(seed, n):
    spec = random_spec(random.Random(seed))
    s, ratios, offsets = build(spec)
    lam = _lam(spec)
    hull = (surd_of(s.hull.lo.coeffs, lam), surd_of(s.hull.hi.coeffs, lam))
    for w, a, b in exact_cylinders(ratios, offsets, hull, n):
        c = cylinder_interval(s, w)
        assert surd_of(c.lo.coeffs, lam) == a
        assert surd_of(c.hi.coeffs, lam) == b
        f = compose(s, w)
        ends = {f(s.hull.lo), f(s.hull.hi)}
        assert ends == {c.lo, c.hi}
