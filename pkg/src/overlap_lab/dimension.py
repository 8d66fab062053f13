"""Dimension bounds from overlap numbers and an empirical box-counting check."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError, NumericalWarning
from .ifs import AffineSystem
from .measures import BernoulliWeights, entropy, lyapunov, sample_points

PRESSURE_TOL = 1e-12
DEFAULT_LEVELS = tuple(range(4, 15))
DEFAULT_FIT = (7, 12)
DEFAULT_MASS = 0.95


def _log_sum_pow(log_ratios: np.ndarray, t: float) -> float:
    x = t * log_ratios
    top = float(np.max(x))
    return top + math.log(math.fsum(np.exp(x - top).tolist()))


def pressure(system: AffineSystem, t: float, log_o: float) -> float:
    """``log(sum_i |ratio_i|^t) - log_o``."""
    ratios, _, _, _ = system.float_arrays()
    return _log_sum_pow(np.log(np.abs(ratios)), t) - log_o


def pressure_zero(system: AffineSystem, log_o: float) -> float:
    """Unique ``t >= 0`` with ``log(sum |ratio_i|^t) = log_o``.

    Found by bisection; for a common ratio the closed form
    ``(log m - log_o) / -log(ratio)`` is returned after a cross-check.
    """
    if log_o < 0:
        raise ContractError("log_o must be >= 0")
    m = system.m
    p0 = math.log(m) - log_o
    if p0 < 0:
        warnings.warn(
            "log_o exceeds log m, the pressure has no zero in [0, inf); returning 0",
            NumericalWarning,
            stacklevel=2,
        )
        return 0.0
    if p0 == 0:
        return 0.0
    ratios, _, _, _ = system.float_arrays()
    lr = np.log(np.abs(ratios))
    lo, hi = 0.0, 1.0
    while _log_sum_pow(lr, hi) - log_o > 0:
        lo, hi = hi, 2 * hi
    while hi - lo > PRESSURE_TOL:
        mid = 0.5 * (lo + hi)
        if _log_sum_pow(lr, mid) - log_o > 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    if np.all(np.abs(ratios) == abs(ratios[0])):
        closed = p0 / -float(lr[0])
        if abs(closed - t) > 1e-9:
            warnings.warn(
                f"closed-form pressure zero {closed} disagrees with bisection {t}",
                NumericalWarning,
                stacklevel=2,
            )
        return closed
    return t


def box_dimension_bound(h: float, log_o: float, chi_abs: float) -> float:
    """``(h - log_o) / |chi|``, clamped at 0."""
    if not chi_abs > 0:
        raise ContractError("the Lyapunov exponent must be nonzero")
    if h < 0 or log_o < 0:
        raise ContractError("entropy and log_o must be nonnegative")
    b = (h - log_o) / chi_abs
    if b < 0:
        warnings.warn(
            f"log_o={log_o} exceeds the entropy {h}; clamping the bound at 0",
            NumericalWarning,
            stacklevel=2,
        )
        return 0.0
    return b


def cor_o1_bound(m: int, p: int, families, h_uniform: float, chi_abs: float) -> float:
    """Box-dimension bound from overlap families at level ``p``.

    ``families`` is either a single family size ``N`` (exact overlaps) or a
    sequence of ``(N_j, k_j)`` pairs; each contributes
    ``N_j log N_j / m^(p + k_j)`` to the subtracted term.
    """
    if isinstance(families, int):
        families = [(families, 0)]
    parts = []
    for N, k in families:
        if N < 1 or N > m**p:
            raise ContractError("a family size must lie in 1 .. m^p")
        parts.append(N * math.log(N) / m ** (p + k))
    term = math.fsum(parts)
    if not chi_abs > 0:
        raise ContractError("the Lyapunov exponent must be nonzero")
    return (p * h_uniform - term) / (p * chi_abs)


@dataclass
class EmpiricalDimension:
    levels: list[int]
    deltas: list[float]
    box_counts: list[int]
    fit_levels: tuple[int, int]
    slope: float
    mass_fraction: float
    samples: int
    undersampled: bool


def empirical_box_dimension(
    system: AffineSystem,
    weights: BernoulliWeights | None = None,
    samples: int = 2_000_000,
    levels: Sequence[int] = DEFAULT_LEVELS,
    mass_fraction: float = DEFAULT_MASS,
    seed: int = 0,
    fit: tuple[int, int] = DEFAULT_FIT,
) -> EmpiricalDimension:
    """Box-counting slope of the projected Bernoulli measure.

    At scale ``delta_k = |hull| 2^-k`` the densest boxes are kept until they
    hold ``mass_fraction`` of the samples; the slope of log(box count) on
    ``log(1/delta)`` over the ``fit`` levels is the estimate.
    """
    if not 0.5 < mass_fraction < 1:
        raise ContractError("mass_fraction must lie in (0.5, 1)")
    levels = [int(k) for k in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ContractError("levels must be increasing (scales decreasing)")
    if weights is None:
        weights = BernoulliWeights.uniform(system.m)
    fit_levels = [k for k in levels if fit[0] <= k <= fit[1]]
    if len(fit_levels) < 2:
        raise ContractError("need at least two levels inside the fit window")
    x = sample_points(system, weights, samples, seed)
    _, _, lo, hi = system.float_arrays()
    length = hi - lo if hi > lo else 1.0
    deltas, counts = [], []
    for k in levels:
        nbox = 1 << k
        idx = np.clip(np.floor((x - lo) / length * nbox).astype(np.int64), 0, nbox - 1)
        occ = np.sort(np.bincount(idx, minlength=nbox))[::-1]
        cum = np.cumsum(occ)
        counts.append(int(np.searchsorted(cum, mass_fraction * samples) + 1))
        deltas.append(length / nbox)
    sel = [levels.index(k) for k in fit_levels]
    lx = np.log(1.0 / np.array([deltas[i] for i in sel]))
    ly = np.log(np.array([counts[i] for i in sel], dtype=np.float64))
    slope = float(np.polyfit(lx, ly, 1)[0])
    under = samples / counts[-1] < 100
    if under:
        warnings.warn(
            f"undersampled: {samples / counts[-1]:.0f} samples per box at the finest scale",
            NumericalWarning,
            stacklevel=2,
        )
    return EmpiricalDimension(
        levels, deltas, counts, (fit[0], fit[1]), slope, mass_fraction, samples, under
    )


@dataclass
class DimensionReport:
    hd_bound_t: float
    box_bound: float
    h: float
    log_o: float
    log_o_source: str
    chi_abs: float
    empirical: EmpiricalDimension | None = None
    warnings: list[str] = field(default_factory=list)


def dimension_report(
    system: AffineSystem,
    weights: BernoulliWeights,
    log_o: float,
    log_o_source: str,
    empirical: EmpiricalDimension | None = None,
) -> DimensionReport:
    """Both bounds for one value of ``log o``, with ``h`` and ``|chi|`` from the measure."""
    h = entropy(weights)
    chi = lyapunov(system, weights)
    caught = []
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always", NumericalWarning)
        t = pressure_zero(system, log_o)
        b = box_dimension_bound(h, log_o, chi)
    for w in rec:
        caught.append(str(w.message))
        warnings.warn(str(w.message), NumericalWarning, stacklevel=2)
    return DimensionReport(t, b, h, log_o, log_o_source, chi, empirical, caught)
