"""Covering-word counts, Monte Carlo overlap numbers and value spectra.

For a point ``x`` of the attractor, ``beta_n(x)`` is the number of depth-``n``
words whose cylinder contains ``x``; the overlap number is
``exp(lim (1/n) E[log beta_n(pi omega)])``.  Counts are computed by a
depth-first descent of the word tree that prunes every node whose cylinder
misses the point bracket.  The descent runs in float64 with a safety margin;
when some cylinder endpoint falls inside the margin the sample is recounted
in exact arithmetic (exact mode) or reported as ambiguous (float mode).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ContractError, NumericalWarning, ResourceBudgetError
from .ifs import AffineContraction, AffineSystem, Interval, contains, disjoint, image
from .measures import BernoulliWeights, default_extra_depth, entropy, sample_words

DEFAULT_NODE_BUDGET = 2**26
DEFAULT_TAU = 0.05
AMBIGUOUS_WARN_FRACTION = 0.01
MAX_REFINEMENTS = 3


@dataclass(frozen=True)
class CoverCount:
    point_bracket: Interval
    depth: int
    beta: int
    filtered: int
    tau: float
    ambiguous: bool


@dataclass
class Profile:
    """Counts for every depth ``0..n`` from one descent."""

    beta: np.ndarray
    filtered: np.ndarray
    ambiguous: np.ndarray
    visits: int
    exact_fallback: bool = False


def float_margin(system: AffineSystem) -> float:
    """Absolute slack covering float64 rounding in cylinder endpoints and points.

    Both are affine recursions ``y -> r y + b`` whose rounding errors are damped
    by the contraction, so the accumulated error is a few ulps of the attractor
    reach times ``1 / (1 - max|r|)``; the factor 32 leaves headroom.
    """
    ratios, offsets, lo, hi = system.float_arrays()
    rmax = float(np.max(np.abs(ratios)))
    reach = float(np.max(np.abs(offsets))) / (1.0 - rmax)
    scale = max(1.0, abs(lo), abs(hi), reach)
    return 32.0 * np.finfo(np.float64).eps * scale / (1.0 - rmax)


def _filter_args(weights: BernoulliWeights, tau: float):
    logp = weights.log_p()
    target = -entropy(weights)
    if weights.is_uniform:
        tau = math.inf
    return logp, target, tau


def _exact_profile(system, bracket, n, logp, target, tau) -> Profile:
    """Level-by-level descent with every node decided exactly.

    Words with identical composed maps (and, when filtering, identical symbol
    counts) have identical subtrees, so they are merged with a multiplicity.
    A float shadow of each cylinder settles the clear cases; the ring is only
    consulted for cylinders within the float margin of the bracket.
    """
    param = system.param
    hull = system.hull
    maps = system.maps
    m = len(maps)
    ratios, offsets, hlo, hhi = system.float_arrays()
    r = [float(x) for x in ratios]
    b = [float(x) for x in offsets]
    margin = float_margin(system)
    blo, bhi = bracket.to_floats(param)
    lo_out, hi_out = blo - margin, bhi + margin
    lp = [float(x) for x in logp]
    track = not math.isinf(tau)
    beta = np.zeros(n + 1, dtype=np.int64)
    filt = np.zeros(n + 1, dtype=np.int64)
    amb = np.zeros(n + 1, dtype=np.int64)
    beta[0] = filt[0] = 1
    visits = 0
    zero_counts = (0,) * m
    level = {(param.one(), param.zero(), zero_counts): [1, 1.0, 0.0]}
    for k1 in range(1, n + 1):
        nxt: dict = {}
        for (R, B, counts), (mult, fR, fB) in level.items():
            for j in range(m):
                fR2 = fR * r[j]
                fB2 = fR * b[j] + fB
                lo = fR2 * hlo + fB2
                hi = fR2 * hhi + fB2
                if lo > hi:
                    lo, hi = hi, lo
                visits += 1
                if hi < lo_out or lo > hi_out:
                    continue
                f = maps[j]
                R2 = R * f.ratio
                B2 = R * f.offset + B
                if lo <= lo_out and hi >= hi_out:
                    inside = True
                else:
                    cyl = image(param, AffineContraction(R2, B2), hull)
                    if disjoint(param, cyl, bracket):
                        continue
                    inside = contains(param, cyl, bracket)
                c2 = counts
                if track:
                    c2 = counts[:j] + (counts[j] + 1,) + counts[j + 1 :]
                beta[k1] += mult
                if not inside:
                    amb[k1] += mult
                if track:
                    S = math.fsum(c * v for c, v in zip(c2, lp))
                    if abs(S / k1 - target) < tau:
                        filt[k1] += mult
                else:
                    filt[k1] += mult
                if k1 < n:
                    key = (R2, B2, c2)
                    if key in nxt:
                        nxt[key][0] += mult
                    else:
                        nxt[key] = [mult, fR2, fB2]
        level = nxt
    return Profile(beta, filt, amb, visits, exact_fallback=True)


def _profile(system, n, logp, target, tau, float_bracket, exact_brackets=()) -> Profile:
    ratios, offsets, lo, hi = system.float_arrays()
    plo, phi = float_bracket
    beta, filt, amb, visits = kernels.cover_profile(
        ratios, offsets, lo, hi, plo, phi, float_margin(system), n, logp, target, tau
    )
    prof = Profile(beta, filt, amb, visits)
    if not amb.any() or not system.exact:
        return prof
    for bracket in exact_brackets:
        prof = _exact_profile(system, bracket, n, logp, target, tau)
        if not prof.ambiguous.any():
            break
    return prof


def count_covering_words(
    system: AffineSystem,
    point_bracket: Interval,
    n: int,
    weights: BernoulliWeights | None = None,
    tau: float = math.inf,
) -> CoverCount:
    """Count depth-``n`` words whose cylinder contains ``point_bracket``.

    ``filtered`` keeps only words whose average potential ``log p`` is
    within ``tau`` of ``-entropy(weights)``.  If a cylinder meets the bracket
    without containing it the count is inclusive and ``ambiguous`` is set.
    """
    if n < 1:
        raise ContractError("depth must be >= 1")
    if not (tau > 0):
        raise ContractError("tau must be positive (math.inf for the plain count)")
    if weights is None:
        weights = BernoulliWeights.uniform(system.m)
    param = system.param
    point_bracket = Interval(param.coerce(point_bracket.lo), param.coerce(point_bracket.hi))
    if param.compare(point_bracket.lo, point_bracket.hi) > 0:
        raise ContractError("bracket must satisfy lo <= hi")
    if not contains(param, system.hull, point_bracket):
        raise ContractError("point bracket must lie inside the attractor hull")
    logp, target, tau_eff = _filter_args(weights, tau)
    fb = point_bracket.to_floats(param)
    prof = _profile(system, n, logp, target, tau_eff, fb, [point_bracket])
    return CoverCount(
        point_bracket, n, int(prof.beta[n]), int(prof.filtered[n]), tau, bool(prof.ambiguous[n])
    )


def orbit_profile(system, orbit, n, logp, target, tau) -> Profile:
    """Counts for a sampled orbit, refining its bracket when ambiguous."""
    x = orbit.point
    extra = default_extra_depth(system)
    brackets = (orbit.bracket(i * extra) for i in range(MAX_REFINEMENTS + 1))
    return _profile(system, n, logp, target, tau, (x, x), brackets)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DepthRow:
    depth: int
    mean_log_count: float
    stderr: float
    exp_mean_over_n: float
    ambiguous_fraction: float


@dataclass
class OverlapEstimate:
    """Per-depth Monte Carlo table plus extrapolated overlap number.

    ``log_o`` is the regression slope of mean log count on depth over the
    upper half of the depths; ``o_last`` is ``exp(mean/n)`` at the deepest
    level.
    """

    rows: list[DepthRow]
    log_o: float
    log_o_stderr: float
    o_last: float
    fit_depths: tuple[int, ...]
    samples: int
    seed: int
    tau: float
    count_kind: str
    mean_visits: float
    exact_fallbacks: int
    status: str = "ok"
    method: str = "slope"
    warnings: list[str] = field(default_factory=list)

    @property
    def o(self) -> float:
        return math.exp(self.log_o)

    @property
    def o_stderr(self) -> float:
        return self.o * self.log_o_stderr

    def row(self, depth: int) -> DepthRow:
        for r in self.rows:
            if r.depth == depth:
                return r
        raise KeyError(depth)


def _mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def fit_depths(depths: Sequence[int]) -> tuple[int, ...]:
    """Upper half of the depth list, used for the slope fit."""
    depths = tuple(depths)
    if len(depths) < 2:
        return depths
    return depths[len(depths) // 2 :]


def _map_ordered(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def estimate_overlap_number(
    system: AffineSystem,
    weights: BernoulliWeights | None = None,
    depths: Sequence[int] = (4, 8, 12, 16),
    samples: int = 1000,
    tau: float | None = None,
    seed: int = 0,
    threads: int = 1,
) -> OverlapEstimate:
    """Monte Carlo estimate of ``o(S, mu_p)`` from sampled covering counts.

    With ``tau = inf`` (or uniform weights) the plain count ``beta_n`` is
    used; otherwise the Birkhoff-filtered count ``b_n``.
    """
    depths = tuple(int(d) for d in depths)
    if not depths or any(d < 1 for d in depths):
        raise ContractError("depths must be positive")
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise ContractError("depths must be strictly increasing")
    if samples < 1:
        raise ContractError("samples must be >= 1")
    if weights is None:
        weights = BernoulliWeights.uniform(system.m)
    if weights.m != system.m:
        raise ContractError("weights and system have different alphabet sizes")
    if tau is None:
        tau = math.inf if weights.is_uniform else DEFAULT_TAU
    if not (tau > 0):
        raise ContractError("tau must be positive")
    logp, target, tau_eff = _filter_args(weights, tau)
    n_max = depths[-1]
    orbits = sample_words(system, weights, n_max, samples, seed)
    idx = np.array(depths)

    def work(orbit):
        prof = orbit_profile(system, orbit, n_max, logp, target, tau_eff)
        counts = prof.filtered[idx]
        logs = np.log(np.maximum(counts, 1)).astype(np.float64)
        return logs, prof.ambiguous[idx] > 0, prof.visits, prof.exact_fallback

    results = _map_ordered(work, orbits, threads)
    logs = np.array([r[0] for r in results])
    amb = np.array([r[1] for r in results])
    mean_visits = math.fsum(float(r[2]) for r in results) / samples
    fallbacks = sum(1 for r in results if r[3])

    rows = []
    for c, n in enumerate(depths):
        mean, se = _mean_stderr(logs[:, c].tolist())
        frac = float(amb[:, c].sum()) / samples
        rows.append(DepthRow(n, mean, se, math.exp(mean / n), frac))

    fd = fit_depths(depths)
    cols = [depths.index(d) for d in fd]
    if len(fd) >= 2:
        x = np.array(fd, dtype=np.float64)
        xc = x - x.mean()
        wts = xc / float(np.dot(xc, xc))
        per_sample = [math.fsum((wts * logs[i, cols]).tolist()) for i in range(samples)]
    else:
        per_sample = (logs[:, cols[0]] / fd[0]).tolist()
    log_o, log_o_se = _mean_stderr(per_sample)

    est = OverlapEstimate(
        rows=rows,
        log_o=log_o,
        log_o_stderr=log_o_se,
        o_last=rows[-1].exp_mean_over_n,
        fit_depths=fd,
        samples=samples,
        seed=seed,
        tau=tau,
        count_kind="beta" if math.isinf(tau_eff) else "filtered",
        mean_visits=mean_visits,
        exact_fallbacks=fallbacks,
    )
    bad = [r.depth for r in rows if r.ambiguous_fraction > AMBIGUOUS_WARN_FRACTION]
    if bad:
        msg = f"ambiguous counts above {AMBIGUOUS_WARN_FRACTION:.0%} of samples at depths {bad}"
        est.status = "warning"
        est.warnings.append(msg)
        warnings.warn(msg, NumericalWarning, stacklevel=2)
    return est


# --------------------------------------------------------------------------


@dataclass
class ValueSpectrum:
    """Distinct depth-``n`` composed maps with multiplicities.

    ``values`` are the offsets ``phi_w(0)`` (exact), sorted increasingly;
    for systems with a common ratio they are pairwise distinct.
    """

    depth: int
    m: int
    values: list
    ratios: list
    multiplicities: list[int]
    min_gap: float | None

    @property
    def q_n(self) -> int:
        return len(self.values)

    def value_floats(self, param) -> list[float]:
        return [param.to_float(v) for v in self.values]


def enumerate_maps(system: AffineSystem, n: int, budget: int = DEFAULT_NODE_BUDGET) -> dict:
    """Distinct depth-``n`` composed maps ``(ratio, offset) -> multiplicity``.

    Deduplicates level by level: words giving the same map at depth ``k``
    give the same maps after any common extension.
    """
    if not system.exact:
        raise ContractError("exact deduplication needs an exact-mode system")
    if n < 1:
        raise ContractError("depth must be >= 1")
    if system.m**n > budget:
        raise ResourceBudgetError(system.m**n, budget, f"depth-{n} word enumeration")
    param = system.param
    level = {(param.one(), param.zero()): 1}
    for _ in range(n):
        nxt: dict = {}
        for (R, B), mult in level.items():
            for f in system.maps:
                key = (R * f.ratio, R * f.offset + B)
                nxt[key] = nxt.get(key, 0) + mult
        level = nxt
    return level


def value_spectrum(system: AffineSystem, n: int, budget: int = DEFAULT_NODE_BUDGET) -> ValueSpectrum:
    """Sorted distinct values of depth-``n`` compositions with multiplicities."""
    level = enumerate_maps(system, n, budget)
    param = system.param

    def cmp(a, b):
        return param.compare(a[0][1], b[0][1]) or param.compare(a[0][0], b[0][0])

    items = sorted(level.items(), key=cmp_to_key(cmp))
    values = [k[1] for k, _ in items]
    ratios = [k[0] for k, _ in items]
    mult = [v for _, v in items]
    gaps = [float(b - a) for a, b in zip(values, values[1:]) if param.compare(a, b) != 0]
    return ValueSpectrum(n, system.m, values, ratios, mult, min(gaps) if gaps else None)


def multiplicity_entropy_bound(spec: ValueSpectrum) -> float:
    """``(1/n) [n log m + sum_j (N_j/m^n) log(N_j/m^n)]``, a lower-bound
    estimator for ``log o`` that drops the ``log C/n`` constant."""
    n = spec.depth
    total = spec.m**n
    s = math.fsum((N / total) * math.log(N / total) for N in spec.multiplicities)
    return (n * math.log(spec.m) + s) / n
