"""Command implementations that turn a RunConfig into report records.

Every number in a report carries a ``provenance`` tag naming the formula or
estimator it came from.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import __version__
from .algebraic import AlgebraicParameter, FloatParameter, classify_reciprocal
from .config import RunConfig, config_from_dict
from .dimension import dimension_report, empirical_box_dimension
from .errors import ContractError, OverlapLabError, UnsupportedStructureError
from .ifs import AffineSystem, bernoulli_convolution
from .measures import BernoulliWeights
from .overlap import estimate_overlap_number, multiplicity_entropy_bound, value_spectrum
from .structure import (
    block_overlap_number,
    detect_blocks,
    family_lower_bounds,
    fiber_weights_block,
    level_family_bound,
    search_overlap_families,
    select_disjoint_families,
    verify_family,
)

OVERLAP_COLUMNS = ["depth", "mean_log_count", "stderr", "exp_mean_over_n", "ambiguous_fraction"]
SPECTRUM_COLUMNS = ["value_float", "multiplicity"]
EMPDIM_COLUMNS = ["level", "delta", "box_count", "in_fit"]
SWEEP_COLUMNS = [
    "lambda",
    "mode",
    "o_estimate",
    "o_stderr",
    "o_closed_form",
    "log_o_used",
    "log_o_source",
    "box_bound",
    "hd_bound",
    "status",
]

PROV_SLOPE = "estimate: slope of mean log covering count vs depth"
PROV_BLOCKS = "closed form: exp(sum_B |B| log|B| / m) over exact-overlap blocks"
PROV_FOLDING = "closed form: exp(folding entropy) from block fiber weights"
PROV_GARSIA = "closed form: o = 2*lambda for a Garsia reciprocal"
PROV_PISOT = "lower bound: o >= 2*lambda for a Pisot reciprocal"
PROV_FAMILIES = "lower bound: exp(sum N log N / m^(p+k) / p) over disjoint overlap families"
PROV_MULT = "lower-bound estimator: n log m + sum (N_j/m^n) log(N_j/m^n), per depth"
PROV_BOX = "box-dimension bound (h - log o)/|chi|"
PROV_HD = "pressure zero of t log|ratio| - log o"


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def envelope(command: str, cfg: RunConfig, results: dict, timestamp: str | None) -> dict:
    rep = {
        "command": command,
        "tool_version": __version__,
        "config": cfg.echo(),
        "results": results,
    }
    if timestamp is not None:
        rep["generated_at"] = timestamp
    return rep


def to_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _clean(x):
    """JSON cannot hold inf/nan; encode them as strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


# --------------------------------------------------------------------------


def run_overlap(cfg: RunConfig):
    est = estimate_overlap_number(
        cfg.system,
        cfg.weights,
        cfg.depths,
        cfg.samples,
        cfg.effective_tau(),
        cfg.seed,
        cfg.threads,
    )
    rows = [
        {
            "depth": r.depth,
            "mean_log_count": r.mean_log_count,
            "stderr": r.stderr,
            "exp_mean_over_n": r.exp_mean_over_n,
            "ambiguous_fraction": r.ambiguous_fraction,
        }
        for r in est.rows
    ]
    summary = {
        "o_estimate": {
            "value": est.o,
            "stderr": est.o_stderr,
            "log_o": est.log_o,
            "log_o_stderr": est.log_o_stderr,
            "fit_depths": list(est.fit_depths),
            "provenance": PROV_SLOPE,
        },
        "o_last_depth": {"value": est.o_last, "depth": est.rows[-1].depth,
                         "provenance": "estimate: exp(mean log count / n) at the deepest level"},
        "count_kind": est.count_kind,
        "mean_node_visits": est.mean_visits,
        "exact_fallbacks": est.exact_fallbacks,
        "status": est.status,
        "warnings": est.warnings,
    }
    return est, rows, summary


def run_spectrum(cfg: RunConfig, depth: int | None = None):
    n = depth or cfg.spectrum_depth
    spec = value_spectrum(cfg.system, n, cfg.budget)
    floats = spec.value_floats(cfg.param)
    rows = [{"value_float": v, "multiplicity": N} for v, N in zip(floats, spec.multiplicities)]
    bound = multiplicity_entropy_bound(spec)
    summary = {
        "depth": n,
        "q_n": spec.q_n,
        "words": cfg.system.m**n,
        "min_gap": spec.min_gap,
        "min_gap_times_m_pow_n": None if spec.min_gap is None else spec.min_gap * cfg.system.m**n,
        "multiplicity_bound": {"log_o": bound, "o": math.exp(bound), "provenance": PROV_MULT},
    }
    return spec, rows, summary


def structure_results(cfg: RunConfig, p: int | None = None, kmax: int | None = None) -> dict:
    system = cfg.system
    p = p or cfg.structure_p
    kmax = cfg.structure_kmax if kmax is None else kmax
    bs = detect_blocks(system)
    out = {
        "blocks": {
            "groups": [list(b) for b in bs.blocks],
            "sizes": list(bs.sizes),
            "osc_between_blocks": bs.osc_between_blocks,
        }
    }
    if bs.osc_between_blocks:
        o = block_overlap_number(bs)
        fw = fiber_weights_block(bs, cfg.weights, bs.blocks[0][0])
        out["block_overlap_number"] = {"value": o, "log_o": math.log(o), "provenance": PROV_BLOCKS}
        out["folding_entropy"] = {
            "value": fw.folding_entropy,
            "exp": fw.overlap_number,
            "weights": "uniform" if cfg.weights.is_uniform else list(cfg.weights.p),
            "provenance": PROV_FOLDING,
        }
    fams = search_overlap_families(system, p, kmax, cfg.threshold, cfg.budget)
    chosen = select_disjoint_families(fams, system.m)
    out["families"] = [
        {
            "p": f.p,
            "k": f.k,
            "size": f.size,
            "members": [list(w) for w in f.members],
            "witnesses": [list(e) for e in f.witnesses],
            "exact": f.exact,
            "verified": verify_family(system, f),
            "selected": f in chosen,
            "contribution": f.contribution(system.m),
        }
        for f in fams
    ]
    fb = family_lower_bounds(fams, system.m, p)
    out["family_lower_bound"] = {
        "value": fb,
        "log_o": math.log(fb),
        "level_p_value": level_family_bound(fams, system.m, p),
        "p": p,
        "kmax": kmax,
        "threshold": cfg.threshold,
        "provenance": PROV_FAMILIES,
    }
    return out


def _is_bernoulli_convolution(system: AffineSystem) -> bool:
    if system.m != 2 or not isinstance(system.param, AlgebraicParameter):
        return False
    p = system.param
    lam = p.generator()
    offs = sorted(p.to_float(f.offset) for f in system.maps)
    return all(f.ratio == lam for f in system.maps) and offs == [-1.0, 1.0]


def closed_forms(cfg: RunConfig) -> dict:
    """Every closed form or rigorous lower bound that applies to the system."""
    out = {}
    system = cfg.system
    if system.exact and cfg.weights.is_uniform:
        bs = detect_blocks(system)
        if bs.osc_between_blocks:
            o = block_overlap_number(bs)
            out["blocks"] = {"value": o, "log_o": math.log(o), "kind": "exact", "provenance": PROV_BLOCKS}
    if _is_bernoulli_convolution(system):
        lam = system.param.to_float(system.param.generator(), 1e-15)
        cls = classify_reciprocal(system.param)
        if 0.5 < lam < 1 and cls == "garsia":
            out["garsia"] = {"value": 2 * lam, "log_o": math.log(2 * lam), "kind": "exact",
                             "provenance": PROV_GARSIA}
        elif 0.5 < lam < 1 and cls == "pisot":
            out["pisot"] = {"value": 2 * lam, "log_o": math.log(2 * lam), "kind": "lower-bound",
                            "provenance": PROV_PISOT}
    return out


def resolve_log_o(cfg: RunConfig, how: str, estimate=None) -> tuple[float, str]:
    """``from:estimate``, ``from:blocks``, ``from:closed-form`` or a number."""
    if how == "from:estimate":
        est = estimate or run_overlap(cfg)[0]
        return max(est.log_o, 0.0), PROV_SLOPE
    if how == "from:blocks":
        bs = detect_blocks(cfg.system)
        return math.log(block_overlap_number(bs)), PROV_BLOCKS
    if how == "from:closed-form":
        cf = {k: v for k, v in closed_forms(cfg).items() if v["kind"] == "exact"}
        if not cf:
            raise UnsupportedStructureError("no closed form applies to this system")
        name = sorted(cf)[0]
        return cf[name]["log_o"], cf[name]["provenance"]
    try:
        v = float(how)
    except ValueError as exc:
        raise ContractError(f"bad --log-o value {how!r}") from exc
    return v, "user-supplied value"


def bound_results(cfg: RunConfig, log_o: float, source: str) -> dict:
    rep = dimension_report(cfg.system, cfg.weights, log_o, source)
    return {
        "entropy": {"value": rep.h, "provenance": "-sum p_i log p_i"},
        "lyapunov_abs": {"value": rep.chi_abs, "provenance": "sum p_i (-log|ratio_i|)"},
        "log_o": {"value": rep.log_o, "provenance": rep.log_o_source},
        "box_bound": {"value": rep.box_bound, "provenance": PROV_BOX},
        "hd_bound": {"value": rep.hd_bound_t, "provenance": PROV_HD},
        "warnings": rep.warnings,
    }


def run_empdim(cfg: RunConfig):
    emp = empirical_box_dimension(
        cfg.system, cfg.weights, cfg.empdim_samples, cfg.empdim_levels, cfg.mass, cfg.seed, cfg.empdim_fit
    )
    lo, hi = emp.fit_levels
    rows = [
        {"level": k, "delta": d, "box_count": c, "in_fit": int(lo <= k <= hi)}
        for k, d, c in zip(emp.levels, emp.deltas, emp.box_counts)
    ]
    summary = {
        "slope": emp.slope,
        "fit_levels": [lo, hi],
        "mass_fraction": emp.mass_fraction,
        "samples": emp.samples,
        "undersampled": emp.undersampled,
        "provenance": "estimate: densest-box mass truncation, log count vs log(1/delta)",
    }
    return emp, rows, summary


def run_analyze(cfg: RunConfig) -> dict:
    est, rows, summary = run_overlap(cfg)
    res = {"overlap": summary, "per_depth": rows}
    param = cfg.param
    res["parameter_class"] = classify_reciprocal(param) if isinstance(param, AlgebraicParameter) else None
    cf = closed_forms(cfg)
    res["closed_forms"] = cf
    if cfg.system.exact:
        try:
            res["structure"] = structure_results(cfg)
        except OverlapLabError as exc:
            res["structure"] = {"error": str(exc)}
    exact_cf = [k for k in ("blocks", "garsia") if k in cf]
    if exact_cf:
        log_o, source = cf[exact_cf[0]]["log_o"], cf[exact_cf[0]]["provenance"]
    else:
        log_o, source = max(est.log_o, 0.0), PROV_SLOPE
    bounds = bound_results(cfg, log_o, source)
    res["dimension"] = bounds
    est_bounds = bound_results(cfg, max(est.log_o, 0.0), PROV_SLOPE)
    res["dimension_from_estimate"] = est_bounds
    res["o_estimate"] = est.o
    res["o_estimate_stderr"] = est.o_stderr
    res["box_bound"] = bounds["box_bound"]["value"]
    res["hd_bound"] = bounds["hd_bound"]["value"]
    res["log_o_source"] = source
    return res


# --------------------------------------------------------------------------


def _sweep_point(cfg: RunConfig, param) -> dict:
    row = {c: "" for c in SWEEP_COLUMNS}
    row["mode"] = "exact" if param.exact else "float"
    try:
        system = bernoulli_convolution(param)
        lam = param.to_float(param.generator(), 1e-15)
        row["lambda"] = lam
        sub = replace(cfg, param=param, system=system, weights=BernoulliWeights.uniform(2))
        est = estimate_overlap_number(
            system, sub.weights, cfg.depths, cfg.samples, math.inf, cfg.seed, 1
        )
        row["o_estimate"] = est.o
        row["o_stderr"] = est.o_stderr
        cf = closed_forms(sub)
        if "garsia" in cf:
            row["o_closed_form"] = cf["garsia"]["value"]
            log_o, src = cf["garsia"]["log_o"], "closed-form"
        else:
            log_o, src = max(est.log_o, 0.0), "estimate"
        row["log_o_used"] = log_o
        row["log_o_source"] = src
        rep = dimension_report(system, sub.weights, log_o, src)
        row["box_bound"] = rep.box_bound
        row["hd_bound"] = rep.hd_bound_t
        row["status"] = est.status if not rep.warnings else "warning"
    except OverlapLabError as exc:
        row["status"] = f"error: {exc}"
    return row


def sweep_parameters(cfg: RunConfig, lambdas=None, minpolys=None) -> list:
    """Float-mode parameters for a lambda grid, exact ones for given polynomials.

    Duplicate grid points are dropped with a warning.
    """
    lambdas = cfg.sweep_lambdas if lambdas is None else lambdas
    minpolys = cfg.sweep_minpolys if minpolys is None else minpolys
    params = []
    seen = set()
    for lam in lambdas:
        key = round(float(lam), 12)
        if key in seen:
            warnings.warn(f"duplicate sweep point lambda={lam} dropped", UserWarning, stacklevel=2)
            continue
        seen.add(key)
        params.append(FloatParameter(float(lam)))
    for spec in minpolys:
        p = config_from_dict({"parameter": spec, "system": {"bernoulli_convolution": True}}).param
        key = ("exact", tuple(p.minpoly), p.root_interval)
        if key in seen:
            warnings.warn(f"duplicate sweep polynomial {spec} dropped", UserWarning, stacklevel=2)
            continue
        seen.add(key)
        params.append(p)
    return params


def run_sweep(cfg: RunConfig, lambdas=None, minpolys=None) -> list[dict]:
    params = sweep_parameters(cfg, lambdas, minpolys)
    if not params:
        raise ContractError("sweep grid is empty")
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(lambda p: _sweep_point(cfg, p), params))
    return [_sweep_point(cfg, p) for p in params]

