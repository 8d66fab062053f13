"""Affine contraction systems on the line: words, compositions, cylinders and the
attractor hull.

Numbers are either exact :class:`~overlap_lab.algebraic.RingElement` values or
plain floats, according to the system's parameter.  All comparisons go
through ``system.param.compare``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``."""

    lo: object
    hi: object

    def length(self):
        return self.hi - self.lo

    def to_floats(self, param) -> tuple[float, float]:
        return param.to_float(self.lo), param.to_float(self.hi)


def contains(param, outer: Interval, inner: Interval) -> bool:
    """Closed containment ``inner`` within ``outer``."""
    return param.compare(outer.lo, inner.lo) <= 0 and param.compare(inner.hi, outer.hi) <= 0


def disjoint(param, a: Interval, b: Interval) -> bool:
    return param.compare(a.hi, b.lo) < 0 or param.compare(b.hi, a.lo) < 0


def intersection(param, a: Interval, b: Interval) -> Interval | None:
    lo = a.lo if param.compare(a.lo, b.lo) >= 0 else b.lo
    hi = a.hi if param.compare(a.hi, b.hi) <= 0 else b.hi
    if param.compare(lo, hi) > 0:
        return None
    return Interval(lo, hi)


@dataclass(frozen=True)
class AffineContraction:
    """The map ``x -> ratio * x + offset``."""

    ratio: object
    offset: object

    def __call__(self, x):
        return self.ratio * x + self.offset

    def after(self, inner: "AffineContraction") -> "AffineContraction":
        """Composition ``self o inner``."""
        return AffineContraction(self.ratio * inner.ratio, self.ratio * inner.offset + self.offset)


class AffineSystem:
    """A finite ordered list of injective affine contractions with its hull.

    The alphabet is ``0 .. m-1`` in the order the maps are given.
    """

    def __init__(self, maps: Sequence[AffineContraction], param):
        if not maps:
            raise ContractError("an affine system needs at least one map")
        maps = [AffineContraction(param.coerce(f.ratio), param.coerce(f.offset)) for f in maps]
        one = param.one()
        for f in maps:
            if param.compare(f.ratio, param.zero()) == 0:
                raise ContractError("contraction ratio must be nonzero")
            if param.compare(f.ratio, one) >= 0 or param.compare(f.ratio, -one) <= 0:
                raise ContractError("contraction ratio must satisfy |ratio| < 1")
        self.maps = tuple(maps)
        self.param = param
        self.hull = attractor_hull(self.maps, param)
        self._float_cache = None

    @property
    def m(self) -> int:
        return len(self.maps)

    @property
    def exact(self) -> bool:
        return self.param.exact

    def __repr__(self):
        return f"AffineSystem(m={self.m}, param={self.param!r})"

    def float_arrays(self):
        """``(ratios, offsets, hull_lo, hull_hi)`` as float64 values."""
        if self._float_cache is None:
            p = self.param
            ratios = np.array([p.to_float(f.ratio) for f in self.maps], dtype=np.float64)
            offsets = np.array([p.to_float(f.offset) for f in self.maps], dtype=np.float64)
            lo, hi = self.hull.to_floats(p)
            self._float_cache = (ratios, offsets, lo, hi)
        return self._float_cache

    def constant_ratio(self) -> bool:
        r0 = self.maps[0].ratio
        return all(self.param.compare(f.ratio, r0) == 0 for f in self.maps[1:])

    def max_abs_ratio(self) -> float:
        ratios, _, _, _ = self.float_arrays()
        return float(np.max(np.abs(ratios)))

    def words(self, n: int):
        """All words of length ``n`` in lexicographic order."""
        return product(range(self.m), repeat=n)


def bernoulli_convolution(param) -> AffineSystem:
    """The system ``{lambda x - 1, lambda x + 1}`` for the given parameter."""
    lam = param.generator()
    return AffineSystem(
        [AffineContraction(lam, param.const(-1)), AffineContraction(lam, param.const(1))], param
    )


def _check_word(system: AffineSystem, w) -> tuple[int, ...]:
    w = tuple(int(s) for s in w)
    if not w:
        raise ContractError("word must be nonempty")
    if any(s < 0 or s >= system.m for s in w):
        raise ContractError(f"word symbols must lie in 0..{system.m - 1}")
    return w


def compose(system: AffineSystem, w) -> AffineContraction:
    """The map ``phi_{w1} o phi_{w2} o ... o phi_{wn}``."""
    w = _check_word(system, w)
    ratio = system.param.one()
    offset = system.param.zero()
    for s in w:
        f = system.maps[s]
        offset = offset + ratio * f.offset
        ratio = ratio * f.ratio
    return AffineContraction(ratio, offset)


def image(param, f: AffineContraction, iv: Interval) -> Interval:
    a, b = f(iv.lo), f(iv.hi)
    if param.compare(a, b) > 0:
        a, b = b, a
    return Interval(a, b)


def cylinder_interval(system: AffineSystem, w) -> Interval:
    """``phi_w(hull)`` as a closed interval."""
    return image(system.param, compose(system, w), system.hull)


def project_point(system: AffineSystem, prefix) -> Interval:
    """Interval containing ``pi(omega)`` for every extension ``omega`` of ``prefix``."""
    return cylinder_interval(system, prefix)


def attractor_hull(maps: Sequence[AffineContraction], param) -> Interval:
    """Smallest closed interval mapped into itself by every map.

    Each candidate pair (left-extremal map, right-extremal map) gives a 2x2
    linear system for the endpoints; the unique candidate that is invariant
    and attains both endpoints is the hull.
    """
    if not maps:
        raise ContractError("attractor_hull needs at least one map")
    one = param.one()
    zero = param.zero()
    for i, fi in enumerate(maps):
        for fj in maps:
            cand = _solve_endpoints(param, fi, fj, one, zero)
            if cand is None:
                continue
            a, b = cand
            if param.compare(a, b) > 0:
                continue
            hull = Interval(a, b)
            imgs = [image(param, f, hull) for f in maps]
            if not all(contains(param, hull, im) for im in imgs):
                continue
            if min(param.compare(im.lo, a) for im in imgs) != 0:
                continue
            if min(param.compare(b, im.hi) for im in imgs) != 0:
                continue
            return hull
    raise ContractError("no invariant hull found")  # unreachable for contractions


def _solve_endpoints(param, fl, fr, one, zero):
    # a = fl(a or b), b = fr(b or a), chosen by the sign of each ratio
    rl, bl, rr, br = fl.ratio, fl.offset, fr.ratio, fr.offset
    l_pos = param.compare(rl, zero) > 0
    r_pos = param.compare(rr, zero) > 0
    try:
        if l_pos and r_pos:
            return bl / (one - rl), br / (one - rr)
        if l_pos and not r_pos:
            a = bl / (one - rl)
            return a, rr * a + br
        if not l_pos and r_pos:
            b = br / (one - rr)
            return rl * b + bl, b
        # a = rl*b + bl, b = rr*a + br
        det = one - rl * rr
        a = (rl * br + bl) / det
        return a, rr * a + br
    except ZeroDivisionError:
        return None
