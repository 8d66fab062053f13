"""Bernoulli measures on the symbol space and seeded sampling of projected points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ContractError
from .ifs import AffineSystem, Interval, project_point

# stream tags keep sample words and box-counting chunks on disjoint key spaces
_WORD_STREAM = 0
_CHUNK_STREAM = 1


@dataclass(frozen=True)
class BernoulliWeights:
    """Probability vector ``p`` of a Bernoulli measure on ``m`` symbols."""

    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        object.__setattr__(self, "p", p)
        if not p:
            raise ContractError("weights must be nonempty")
        if any(not (x > 0) for x in p):
            raise ContractError("all weights must be strictly positive")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ContractError("weights must sum to 1")

    @classmethod
    def uniform(cls, m: int) -> "BernoulliWeights":
        return cls(tuple([1.0 / m] * m))

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def is_uniform(self) -> bool:
        """The maximal-entropy flag."""
        return max(self.p) - min(self.p) <= 1e-15

    def log_p(self) -> np.ndarray:
        return np.log(np.array(self.p, dtype=np.float64))


def entropy(w: BernoulliWeights) -> float:
    """Shannon entropy ``-sum p_i log p_i`` in nats."""
    if w.is_uniform:
        return math.log(w.m)
    return -math.fsum(x * math.log(x) for x in w.p)


def lyapunov(system: AffineSystem, w: BernoulliWeights) -> float:
    """Absolute Lyapunov exponent ``sum p_i * (-log|ratio_i|)``.

    The signed exponent used in the literature is the negative of this value.
    """
    if w.m != system.m:
        raise ContractError("weights and system have different alphabet sizes")
    ratios, _, _, _ = system.float_arrays()
    return math.fsum(p * -math.log(abs(r)) for p, r in zip(w.p, ratios))


def birkhoff_potential_average(w: BernoulliWeights, word: Sequence[int]) -> float:
    """``(1/n) sum_k log p_{word_k}`` for the potential ``log p_{omega_1}``."""
    n = len(word)
    if n < 1:
        raise ContractError("word must be nonempty")
    if w.is_uniform:
        return -math.log(w.m)
    return math.fsum(math.log(w.p[s]) for s in word) / n


def default_extra_depth(system: AffineSystem) -> int:
    """Symbols appended past the counting depth so the point bracket is tiny."""
    return math.ceil(40.0 / abs(math.log(system.max_abs_ratio())))


def symbol_stream(w: BernoulliWeights, length: int, key: Sequence[int]) -> np.ndarray:
    """``length`` i.i.d. symbols drawn per ``w`` from a Philox stream keyed by ``key``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))
    u = rng.random(length)
    cum = np.cumsum(w.p)
    return np.minimum(np.searchsorted(cum, u, side="right"), w.m - 1).astype(np.intp)


@dataclass
class SampledOrbit:
    """A sampled symbol sequence, truncated, with its projected point bracket.

    ``symbols`` holds the truncated word plus a reserve used when the point
    bracket must be refined.
    """

    system: AffineSystem = field(repr=False)
    symbols: np.ndarray = field(repr=False)
    depth: int
    trunc: int
    seed_id: int

    @property
    def word(self) -> tuple[int, ...]:
        return tuple(int(s) for s in self.symbols[: self.depth])

    @cached_property
    def point(self) -> float:
        """Float approximation of ``pi(omega)`` at the truncation depth."""
        ratios, offsets, lo, hi = self.system.float_arrays()
        x = 0.5 * (lo + hi)
        for s in self.symbols[: self.trunc][::-1]:
            x = ratios[s] * x + offsets[s]
        return float(x)

    def bracket(self, extra: int = 0) -> Interval:
        """Prefix cylinder at depth ``trunc + extra`` (exact in exact mode)."""
        k = min(self.trunc + extra, len(self.symbols))
        return project_point(self.system, self.symbols[:k])

    @cached_property
    def point_interval(self) -> Interval:
        return self.bracket()


def sample_words(
    system: AffineSystem,
    w: BernoulliWeights,
    n: int,
    count: int,
    seed: int,
    trunc: int | None = None,
    reserve: int | None = None,
    start: int = 0,
) -> list[SampledOrbit]:
    """Draw ``count`` i.i.d. words per ``w`` and bracket their projections.

    Sample ``i`` depends only on ``(seed, start + i)``.
    """
    if n < 1 or count < 1:
        raise ContractError("need n >= 1 and count >= 1")
    if w.m != system.m:
        raise ContractError("weights and system have different alphabet sizes")
    extra = default_extra_depth(system)
    if trunc is None:
        trunc = n + extra
    if reserve is None:
        reserve = 3 * extra
    out = []
    for i in range(start, start + count):
        syms = symbol_stream(w, trunc + reserve, (seed, _WORD_STREAM, i))
        out.append(SampledOrbit(system, syms, n, trunc, i))
    return out


def sample_points(
    system: AffineSystem, w: BernoulliWeights, count: int, seed: int, chunk: int = 1 << 16
) -> np.ndarray:
    """``count`` float samples of the projected measure ``pi_* mu_p``.

    Points are produced in fixed-size chunks keyed by ``(seed, chunk index)``
    so the output does not depend on how the work is scheduled.
    """
    ratios, offsets, lo, hi = system.float_arrays()
    depth = default_extra_depth(system) + 8
    out = np.empty(count, dtype=np.float64)
    for c, start in enumerate(range(0, count, chunk)):
        size = min(chunk, count - start)
        syms = symbol_stream(w, size * depth, (seed, _CHUNK_STREAM, c)).reshape(size, depth)
        x = np.full(size, 0.5 * (lo + hi))
        for j in range(depth - 1, -1, -1):
            col = syms[:, j]
            x = ratios[col] * x + offsets[col]
        out[start : start + size] = x
    return out
