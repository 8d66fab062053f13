"""Test systems described once and built twice: in the package and as oracle surds."""

from __future__ import annotations

import random
from fractions import Fraction

from oracles import Surd

from overlap_lab.algebraic import AlgebraicParameter, FloatParameter
from overlap_lab.ifs import AffineContraction, AffineSystem

# minimal polynomial, isolating interval, lambda as a surd
PARAMS = {
    "sqrt2": ([-1, 0, 2], ("1/2", "1"), Surd(0, Fraction(1, 2), 2)),
    "golden": ([-1, 1, 1], ("1/2", "1"), Surd(Fraction(-1, 2), Fraction(1, 2), 5)),
    "sqrt3": ([-1, 0, 3], ("1/2", "1"), Surd(0, Fraction(1, 3), 3)),
    "silver": ([-1, 2, 1], ("1/4", "1/2"), Surd(-1, 1, 2)),
    "sqrt5": ([-1, 0, 5], ("1/4", "1/2"), Surd(0, Fraction(1, 5), 5)),
}


def exact_param(name):
    if name == "rational":
        return AlgebraicParameter.rational_field(), Surd(0)
    poly, iv, lam = PARAMS[name]
    return AlgebraicParameter(poly, iv), lam


def surd_of(coeffs, lam):
    v = Surd(0, 0, lam.D)
    p = Surd(1, 0, lam.D)
    for c in coeffs:
        v = v + p * Fraction(c)
        p = p * lam
    return v


def build(spec, mode="exact"):
    """``spec = (param_name, [(ratio_coeffs, offset_coeffs), ...])``.

    Returns ``(system, oracle_ratios, oracle_offsets)``; float mode uses a
    :class:`FloatParameter` at the same lambda.
    """
    name, maps = spec
    param, lam = exact_param(name)
    ratios = [surd_of(r, lam) for r, _ in maps]
    offsets = [surd_of(b, lam) for _, b in maps]
    if mode == "float":
        param = FloatParameter(float(lam))
    fs = [
        AffineContraction(param.element([Fraction(c) for c in r]), param.element([Fraction(c) for c in b]))
        for r, b in maps
    ]
    return AffineSystem(fs, param), ratios, offsets


def random_spec(rng: random.Random):
    """A random small system over one of the test parameters."""
    name = rng.choice(["rational", "sqrt2", "golden", "sqrt3", "silver", "sqrt5"])
    m = rng.choice([2, 2, 2, 3])
    maps = []
    for _ in range(m):
        sign = rng.choice([1, 1, 1, -1])
        if name == "rational" or rng.random() < 0.3:
            ratio = [Fraction(sign * rng.randint(2, 8), 10)]
        elif rng.random() < 0.7:
            ratio = [0, sign]
        else:
            ratio = [0, 0, sign]
        offset = [Fraction(rng.randint(-6, 6), 4)]
        if name != "rational" and rng.random() < 0.4:
            offset.append(Fraction(rng.randint(-3, 3), 2))
        maps.append((ratio, offset))
    return name, maps
