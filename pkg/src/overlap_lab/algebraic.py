"""Exact arithmetic in Q(lambda) for a real algebraic parameter lambda.

Elements of the ring are residue classes of Q[x] modulo the minimal
polynomial of lambda, stored as tuples of :class:`fractions.Fraction`.
Equality is decided on the canonical form; order is decided by evaluating
the element on a shrinking isolating interval for lambda until the sign
is certain.

A float-only mode (:class:`FloatParameter`) exposes the same surface for
parameters that are not given algebraically.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError

_EPS = 2.0 ** -52
# width of the k-th canonical refinement level is initial_width * 2**(-64 k)
_LEVEL_BITS = 64


# --------------------------------------------------------------------------
# dense polynomial helpers, coefficients low -> high, over Fraction


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _peval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _pderiv(p):
    return _trim([i * c for i, c in enumerate(p)][1:])


def _pdivmod(a, b):
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / lead
        q[shift] = f
        for i, c in enumerate(b):
            r[shift + i] -= f * c
        r = _trim(r)
    return _trim(q), r


def _psub(a, b):
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] -= c
    return _trim(out)


def _pmul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _pgcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return a


def _sturm_sequence(p):
    seq = [_trim(p), _pderiv(p)]
    while seq[-1]:
        _, r = _pdivmod(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_changes(seq, x):
    signs = [s for s in (_sgn(_peval(q, x)) for q in seq) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def _sgn(x):
    return (x > 0) - (x < 0)


def count_real_roots(poly: Sequence, lo, hi) -> int:
    """Number of distinct real roots of ``poly`` in the half-open ``(lo, hi]``."""
    p = _trim(Fraction(c) for c in poly)
    seq = _sturm_sequence(p)
    return _sign_changes(seq, Fraction(lo)) - _sign_changes(seq, Fraction(hi))


def _divisors(n):
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _rational_roots(coeffs):
    c0, cd = coeffs[0], coeffs[-1]
    if c0 == 0:
        return [Fraction(0)]
    roots = []
    for num in _divisors(c0):
        for den in _divisors(cd):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if _peval([Fraction(c) for c in coeffs], cand) == 0:
                    roots.append(cand)
    return roots


def _interval_mul(a, b):
    prods = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(prods), max(prods)


def _enclose(coeffs, lo, hi):
    """Interval enclosure of sum c_i x^i over x in [lo, hi] (Horner)."""
    acc = (coeffs[-1], coeffs[-1])
    for c in reversed(coeffs[:-1]):
        a, b = _interval_mul(acc, (lo, hi))
        acc = (a + c, b + c)
    return acc


# --------------------------------------------------------------------------


class AlgebraicParameter:
    """A real algebraic number given by its minimal polynomial and an
    isolating interval.

    Parameters
    ----------
    minpoly : sequence of int
        Coefficients ``c0, c1, ..., cd`` of an irreducible integer polynomial.
    root_interval : pair of rationals
        ``(lo, hi)`` with exactly one root of ``minpoly`` strictly inside.
    """

    exact = True

    def __init__(self, minpoly: Sequence[int], root_interval):
        coeffs = [int(c) for c in minpoly]
        if any(Fraction(c) != Fraction(orig) for c, orig in zip(coeffs, minpoly)):
            raise ContractError("minimal polynomial must have integer coefficients")
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            raise ContractError("minimal polynomial must have degree >= 1")
        lo, hi = (Fraction(v) for v in root_interval)
        if not lo < hi:
            raise ContractError("isolating interval must satisfy lo < hi")
        poly = [Fraction(c) for c in coeffs]
        d = len(coeffs) - 1
        if len(_pgcd(poly, _pderiv(poly))) > 1:
            raise ContractError("minimal polynomial is not square-free")
        if d > 1 and _rational_roots(coeffs):
            raise ContractError("minimal polynomial has a rational root, so it is reducible")
        plo, phi = _peval(poly, lo), _peval(poly, hi)
        if plo == 0 or phi == 0 or _sgn(plo) == _sgn(phi):
            raise ContractError("minimal polynomial must change sign strictly inside the interval")
        if count_real_roots(poly, lo, hi) != 1:
            raise ContractError("isolating interval contains more than one root")

        self.minpoly = tuple(coeffs)
        self.root_interval = (lo, hi)
        self.degree = d
        self._poly = poly
        self._monic = [c / poly[-1] for c in poly]
        # x^k mod minpoly for k = d .. 2d-2
        self._xpow = []
        cur = [-c for c in self._monic[:-1]]
        for _ in range(max(d - 1, 0)):
            self._xpow.append(cur)
            nxt = [Fraction(0)] + cur[:-1]
            top = cur[-1]
            nxt = [a - top * m for a, m in zip(nxt, self._monic[:-1])]
            cur = nxt
        self._lock = threading.Lock()
        self._width0 = hi - lo
        self._levels = {0: (lo, hi)}
        self._lo_sign = _sgn(plo)
        if d == 1:
            root = -poly[0] / poly[1]
            self._levels = {0: (root, root)}
        self._float = self._root_float()

    # -- identity ---------------------------------------------------------

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, AlgebraicParameter):
            return NotImplemented
        return self.minpoly == other.minpoly and self.root_interval == other.root_interval

    def __hash__(self):
        return hash((self.minpoly, self.root_interval))

    def __repr__(self):
        lo, hi = self.root_interval
        return f"AlgebraicParameter(minpoly={list(self.minpoly)}, root_interval=({lo}, {hi}))"

    @classmethod
    def rational_field(cls) -> "AlgebraicParameter":
        """The trivial parameter whose ring is Q itself (minimal polynomial x)."""
        return cls([0, 1], (Fraction(-1, 2), Fraction(1, 2)))

    @classmethod
    def rational(cls, value) -> "AlgebraicParameter":
        """Parameter equal to a given rational number (degree-one polynomial)."""
        q = Fraction(value)
        return cls([-q.numerator, q.denominator], (q - 1, q + 1))

    # -- isolating-interval refinement -------------------------------------

    def interval(self, level: int):
        """Isolating interval after ``level`` canonical refinement steps.

        Level ``k`` has width at most ``initial_width * 2**(-64 k)``. The
        interval at a level depends only on the level, never on call order.
        """
        with self._lock:
            if level in self._levels:
                return self._levels[level]
            base = max(k for k in self._levels if k < level)
            lo, hi = self._levels[base]
            for k in range(base + 1, level + 1):
                target = self._width0 / (Fraction(2) ** (_LEVEL_BITS * k))
                while hi - lo > target:
                    mid = (lo + hi) / 2
                    s = _sgn(_peval(self._poly, mid))
                    if s == 0:
                        lo = hi = mid
                    elif s == self._lo_sign:
                        lo = mid
                    else:
                        hi = mid
                self._levels[k] = (lo, hi)
            return lo, hi

    def _root_float(self):
        level = 1
        while True:
            lo, hi = self.interval(level)
            if lo == hi or (lo > 0 or hi < 0) and hi - lo <= min(abs(lo), abs(hi)) * Fraction(2) ** -60:
                return float((lo + hi) / 2)
            level += 1

    # -- element construction ----------------------------------------------

    def element(self, coeffs: Iterable) -> "RingElement":
        return RingElement(self, coeffs)

    def const(self, q) -> "RingElement":
        return RingElement(self, [q])

    def generator(self) -> "RingElement":
        """The residue class of x, i.e. lambda itself."""
        return RingElement(self, [0, 1])

    def zero(self):
        return self.const(0)

    def one(self):
        return self.const(1)

    def coerce(self, value) -> "RingElement":
        if isinstance(value, RingElement):
            _check_same(value.param, self)
            return value
        if isinstance(value, (int, Fraction)):
            return self.const(value)
        raise TypeError(f"cannot coerce {type(value).__name__} into an exact ring element")

    # -- reduction ---------------------------------------------------------

    def _reduce(self, coeffs):
        d = self.degree
        coeffs = list(coeffs)
        if len(coeffs) <= d:
            return tuple(coeffs + [Fraction(0)] * (d - len(coeffs)))
        if len(coeffs) <= 2 * d - 1:
            out = coeffs[:d]
            for k, c in enumerate(coeffs[d:]):
                if c:
                    row = self._xpow[k]
                    for i in range(d):
                        out[i] += c * row[i]
            return tuple(out)
        _, r = _pdivmod(coeffs, self._poly)
        return tuple(r + [Fraction(0)] * (d - len(r)))

    # -- evaluation --------------------------------------------------------

    def sign(self, coeffs) -> int:
        """Sign of the element with the given canonical coefficients."""
        nz = [i for i, c in enumerate(coeffs) if c]
        if not nz:
            return 0
        if nz == [0]:
            return _sgn(coeffs[0])
        try:
            approx, err = self._approx(coeffs)
        except OverflowError:
            approx, err = 0.0, math.inf
        if abs(approx) > err:
            return 1 if approx > 0 else -1
        level = 1
        while True:
            lo, hi = self.interval(level)
            a, b = _enclose(list(coeffs), lo, hi)
            if a > 0:
                return 1
            if b < 0:
                return -1
            level += 1

    def _approx(self, coeffs):
        x = self._float
        ax = abs(x)
        acc = 0.0
        mag = 0.0
        for c in reversed(coeffs):
            fc = float(c)
            acc = acc * x + fc
            mag = mag * ax + abs(fc)
        if not math.isfinite(acc) or not math.isfinite(mag):
            raise OverflowError
        return acc, 32 * (self.degree + 2) * _EPS * mag + 1e-300 * (self.degree + 1)

    def compare(self, a, b) -> int:
        a = self.coerce(a)
        b = self.coerce(b)
        if a.coeffs == b.coeffs:
            return 0
        return self.sign(tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def to_float(self, a, abs_tol: float = 1e-15) -> float:
        a = self.coerce(a)
        if abs_tol <= 0:
            raise ContractError("abs_tol must be positive")
        coeffs = list(a.coeffs)
        if not any(coeffs[1:]):
            return float(coeffs[0])
        tol = Fraction(abs_tol) / 2
        level = 1
        while True:
            lo, hi = self.interval(level)
            u, v = _enclose(coeffs, lo, hi)
            if v - u <= tol:
                return float((u + v) / 2)
            level += 1

    def __float__(self):
        return self._float


class RingElement:
    """Immutable element of Q[x] / (minpoly) in canonical form."""

    __slots__ = ("param", "coeffs", "_hash")

    def __init__(self, param: AlgebraicParameter, coeffs: Iterable):
        self.param = param
        self.coeffs = param._reduce([Fraction(c) for c in coeffs])
        self._hash = None

    def _other(self, other):
        if isinstance(other, RingElement):
            _check_same(self.param, other.param)
            return other
        if isinstance(other, (int, Fraction)):
            return RingElement(self.param, [other])
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return RingElement(self.param, [x + y for x, y in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.param, [-x for x in self.coeffs])

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return RingElement(self.param, [x - y for x, y in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.param.degree == 1:
            return RingElement(self.param, [self.coeffs[0] * o.coeffs[0]])
        return RingElement(self.param, _pmul(list(self.coeffs), list(o.coeffs)) or [0])

    __rmul__ = __mul__

    def inverse(self) -> "RingElement":
        """Multiplicative inverse via the extended Euclidean algorithm."""
        a = _trim(self.coeffs)
        if not a:
            raise ZeroDivisionError("inverse of zero ring element")
        # invariant: s * a == r  (mod minpoly)
        r0, r1 = list(self.param._poly), a
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, r = _pdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _psub(s0, _pmul(q, s1))
        if not r1:
            raise ContractError("element is not invertible; minimal polynomial is reducible")
        c = r1[0]
        return RingElement(self.param, [x / c for x in s1] or [0])

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = RingElement(self.param, [1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._other(other) if not isinstance(other, float) else None
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __lt__(self, other):
        return self.param.compare(self, other) < 0

    def __le__(self, other):
        return self.param.compare(self, other) <= 0

    def __gt__(self, other):
        return self.param.compare(self, other) > 0

    def __ge__(self, other):
        return self.param.compare(self, other) >= 0

    def __float__(self):
        return self.param.to_float(self, 1e-16 * max(1.0, abs(self._rough())))

    def _rough(self):
        try:
            return self.param._approx(self.coeffs)[0]
        except OverflowError:
            return 1e300

    def sign(self) -> int:
        return self.param.sign(self.coeffs)

    def __repr__(self):
        terms = ", ".join(str(c) for c in self.coeffs)
        return f"RingElement([{terms}])"


def _check_same(p, q):
    if p is not q and p != q:
        raise ContractError("ring elements belong to different parameters")


def ring_add(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a.param, b.param)
    return a + b


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a.param, b.param)
    return a * b


def compare(a: RingElement, b: RingElement) -> int:
    """Return -1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    _check_same(a.param, b.param)
    return a.param.compare(a, b)


def to_float(a: RingElement, abs_tol: float = 1e-15) -> float:
    return a.param.to_float(a, abs_tol)


# --------------------------------------------------------------------------


class FloatParameter:
    """Float-only stand-in for a parameter that is not given algebraically.

    Numbers are plain floats and two values closer than ``collision_eps``
    are treated as equal.
    """

    exact = False

    def __init__(self, value: float, collision_eps: float = 1e-9):
        if collision_eps <= 0:
            raise ContractError("collision_eps must be positive")
        self.value = float(value)
        self.collision_eps = float(collision_eps)

    def __repr__(self):
        return f"FloatParameter({self.value!r}, collision_eps={self.collision_eps!r})"

    def __float__(self):
        return self.value

    def element(self, coeffs):
        acc = 0.0
        for c in reversed(list(coeffs)):
            acc = acc * self.value + float(c)
        return acc

    def const(self, q):
        return float(q)

    def generator(self):
        return self.value

    def zero(self):
        return 0.0

    def one(self):
        return 1.0

    def coerce(self, value):
        return float(value)

    def compare(self, a, b) -> int:
        d = float(a) - float(b)
        if abs(d) < self.collision_eps:
            return 0
        return 1 if d > 0 else -1

    def sign(self, value) -> int:
        return self.compare(value, 0.0)

    def to_float(self, a, abs_tol: float = 1e-15) -> float:
        return float(a)


def classify_reciprocal(param) -> str | None:
    """Name the class of ``1/lambda``: ``"garsia"``, ``"pisot"`` or ``None``.

    Conjugates are located with floating-point root finding; this is a
    reporting aid, not a proof.
    """
    if not isinstance(param, AlgebraicParameter):
        return None
    lam = float(param)
    if not 0 < lam < 1:
        return None
    g = math.gcd(*param.minpoly)
    coeffs = [c // g for c in param.minpoly]
    rev = list(reversed(coeffs))  # coefficients of the reciprocal's minimal polynomial
    if abs(rev[-1]) != 1:
        return None  # 1/lambda is not an algebraic integer
    gamma = 1.0 / lam
    roots = np.roots(list(reversed(rev)))
    others = sorted(roots, key=lambda z: abs(z - gamma))[1:]
    if abs(rev[0]) == 2 and 1 < gamma < 2 and all(abs(z) > 1 + 1e-9 for z in others):
        return "garsia"
    if gamma > 1 and all(abs(z) < 1 - 1e-9 for z in others):
        return "pisot"
    return None
