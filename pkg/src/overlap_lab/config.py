"""TOML run configuration: parameter, system, measure and per-command settings.

Example::

    [parameter]
    minpoly = [-1, 0, 2]          # c0 + c1 x + c2 x^2
    root_interval = ["1/2", "1"]  # rationals as strings
    # value = 0.70710678          # float mode instead

    [system]
    bernoulli_convolution = true
    # maps = [{ratio = "3/10", offset = 0}, {ratio = ["0", "1"], offset = -1}]

    [measure]
    weights = "uniform"
    seed = 7

    [overlap]
    depths = "12:24:2"
    samples = 2000
    tau = "inf"
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .algebraic import AlgebraicParameter, FloatParameter
from .errors import ConfigError, ContractError
from .ifs import AffineContraction, AffineSystem, bernoulli_convolution
from .measures import BernoulliWeights
from .overlap import DEFAULT_NODE_BUDGET


def parse_range(text, kind=int) -> list:
    """``"a:b:s"`` (inclusive), ``"a:b"`` (step 1) or a list."""
    if isinstance(text, list):
        return [kind(v) for v in text]
    if isinstance(text, (int, float)):
        return [kind(text)]
    parts = str(text).split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"bad range {text!r}; expected start:stop[:step]")
    if kind is int:
        a, b = int(parts[0]), int(parts[1])
        s = int(parts[2]) if len(parts) == 3 else 1
        if s <= 0:
            raise ConfigError("range step must be positive")
        return list(range(a, b + 1, s))
    a, b = Fraction(parts[0]), Fraction(parts[1])
    s = Fraction(parts[2]) if len(parts) == 3 else Fraction(1)
    if s <= 0:
        raise ConfigError("range step must be positive")
    out = []
    k = 0
    while a + k * s <= b:
        out.append(float(a + k * s))
        k += 1
    return out


def parse_tau(value) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        tau = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad tau {value!r}") from exc
    if not tau > 0:
        raise ConfigError("tau must be positive")
    return tau


def _rational(v) -> Fraction:
    if isinstance(v, bool):
        raise ConfigError("booleans are not numbers")
    if isinstance(v, float):
        return Fraction(repr(v))
    try:
        return Fraction(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read {v!r} as a rational") from exc


def build_parameter(table: dict | None):
    """Parameter from a ``[parameter]`` table; ``None`` gives exact rationals."""
    if not table:
        return AlgebraicParameter.rational_field()
    if "value" in table:
        if "minpoly" in table:
            raise ConfigError("give either minpoly/root_interval or value, not both")
        return FloatParameter(float(table["value"]), float(table.get("collision_eps", 1e-9)))
    if "minpoly" not in table or "root_interval" not in table:
        raise ConfigError("exact parameter needs minpoly and root_interval")
    ri = table["root_interval"]
    if not isinstance(ri, list) or len(ri) != 2:
        raise ConfigError("root_interval must be a pair")
    try:
        return AlgebraicParameter(table["minpoly"], (_rational(ri[0]), _rational(ri[1])))
    except ContractError as exc:
        raise ConfigError(f"invalid parameter: {exc}") from exc


def ring_value(param, spec):
    """A scalar or a coefficient list in powers of the parameter."""
    coeffs = spec if isinstance(spec, list) else [spec]
    if not coeffs:
        raise ConfigError("empty coefficient list")
    if param.exact:
        return param.element([_rational(c) for c in coeffs])
    return param.element([float(_rational(c)) if isinstance(c, str) else float(c) for c in coeffs])


def build_system(table: dict | None, param) -> AffineSystem:
    if not table:
        raise ConfigError("missing [system] table")
    try:
        if table.get("bernoulli_convolution"):
            if "maps" in table:
                raise ConfigError("give either bernoulli_convolution or maps, not both")
            return bernoulli_convolution(param)
        maps = table.get("maps")
        if not maps:
            raise ConfigError("system needs a nonempty maps list")
        out = []
        for i, entry in enumerate(maps):
            if not isinstance(entry, dict) or "ratio" not in entry or "offset" not in entry:
                raise ConfigError(f"map {i} needs ratio and offset")
            out.append(
                AffineContraction(ring_value(param, entry["ratio"]), ring_value(param, entry["offset"]))
            )
        return AffineSystem(out, param)
    except ContractError as exc:
        raise ConfigError(f"invalid system: {exc}") from exc


def build_weights(spec, m: int) -> BernoulliWeights:
    if spec is None or spec == "uniform":
        return BernoulliWeights.uniform(m)
    if not isinstance(spec, list) or len(spec) != m:
        raise ConfigError(f"weights must be 'uniform' or a list of {m} probabilities")
    try:
        return BernoulliWeights(tuple(float(_rational(v)) for v in spec))
    except ContractError as exc:
        raise ConfigError(f"invalid weights: {exc}") from exc


@dataclass
class RunConfig:
    """Fully resolved run settings; ``echo()`` lists every value that was used."""

    source: str
    raw: dict = field(repr=False)
    param: object = field(repr=False)
    system: AffineSystem = field(repr=False)
    weights: BernoulliWeights
    seed: int = 0
    depths: list[int] = field(default_factory=lambda: list(range(4, 17, 2)))
    samples: int = 1000
    tau: float | None = None
    spectrum_depth: int = 12
    budget: int = DEFAULT_NODE_BUDGET
    structure_p: int = 1
    structure_kmax: int = 2
    threshold: float = 0.10
    empdim_samples: int = 2_000_000
    empdim_levels: list[int] = field(default_factory=lambda: list(range(4, 15)))
    empdim_fit: tuple[int, int] = (7, 12)
    mass: float = 0.95
    threads: int = 1
    sweep_lambdas: list[float] = field(default_factory=list)
    sweep_minpolys: list[dict] = field(default_factory=list)

    def echo(self) -> dict:
        skip = ("raw", "param", "system", "weights")
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in skip}
        d = {k: list(v) if isinstance(v, (list, tuple)) else v for k, v in d.items()}
        d["tau"] = _tau_str(self.effective_tau())
        d["weights"] = list(self.weights.p)
        d["parameter"] = describe_parameter(self.param)
        d["maps"] = describe_maps(self.system)
        d["hull"] = [self.param.to_float(self.system.hull.lo), self.param.to_float(self.system.hull.hi)]
        d["empdim_fit"] = list(self.empdim_fit)
        return d

    def effective_tau(self) -> float:
        if self.tau is not None:
            return self.tau
        return math.inf if self.weights.is_uniform else 0.05


def _tau_str(tau):
    return "inf" if math.isinf(tau) else tau


def describe_parameter(param) -> dict:
    if isinstance(param, FloatParameter):
        return {"mode": "float", "value": param.value, "collision_eps": param.collision_eps}
    lo, hi = param.root_interval
    return {
        "mode": "exact",
        "minpoly": list(param.minpoly),
        "root_interval": [str(lo), str(hi)],
        "value": param.to_float(param.generator(), 1e-15),
    }


def describe_maps(system: AffineSystem) -> list[dict]:
    p = system.param
    out = []
    for f in system.maps:
        entry = {"ratio": p.to_float(f.ratio), "offset": p.to_float(f.offset)}
        if p.exact:
            entry["ratio_coeffs"] = [str(c) for c in f.ratio.coeffs]
            entry["offset_coeffs"] = [str(c) for c in f.offset.coeffs]
        out.append(entry)
    return out


def _pos_int(v, name):
    try:
        iv = int(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be an integer") from exc
    if iv < 1:
        raise ConfigError(f"{name} must be >= 1")
    return iv


def config_from_dict(raw: dict, source: str = "<dict>") -> RunConfig:
    param = build_parameter(raw.get("parameter"))
    system = build_system(raw.get("system"), param)
    meas = raw.get("measure", {})
    weights = build_weights(meas.get("weights", "uniform"), system.m)
    ov = raw.get("overlap", {})
    sp = raw.get("spectrum", {})
    st = raw.get("structure", {})
    ed = raw.get("empdim", {})
    sw = raw.get("sweep", {})
    cfg = RunConfig(source=source, raw=raw, param=param, system=system, weights=weights)
    cfg.seed = int(meas.get("seed", 0))
    if "depths" in ov:
        cfg.depths = parse_range(ov["depths"])
    if "samples" in ov:
        cfg.samples = _pos_int(ov["samples"], "samples")
    if "tau" in ov:
        cfg.tau = parse_tau(ov["tau"])
    cfg.spectrum_depth = _pos_int(sp.get("depth", cfg.spectrum_depth), "spectrum depth")
    cfg.budget = _pos_int(sp.get("budget", cfg.budget), "budget")
    cfg.structure_p = _pos_int(st.get("p", cfg.structure_p), "structure p")
    cfg.structure_kmax = int(st.get("kmax", cfg.structure_kmax))
    cfg.threshold = float(st.get("threshold", cfg.threshold))
    cfg.empdim_samples = _pos_int(ed.get("samples", cfg.empdim_samples), "empdim samples")
    if "scales" in ed:
        cfg.empdim_levels = parse_range(ed["scales"])
    if "fit" in ed:
        cfg.empdim_fit = tuple(int(v) for v in ed["fit"])
    cfg.mass = float(ed.get("mass", cfg.mass))
    if "lambdas" in sw:
        cfg.sweep_lambdas = parse_range(sw["lambdas"], float)
    cfg.sweep_minpolys = list(sw.get("minpolys", []))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Range checks run before any computation starts."""
    if not cfg.depths or any(d < 1 for d in cfg.depths):
        raise ConfigError("depths must be positive")
    if any(b <= a for a, b in zip(cfg.depths, cfg.depths[1:])):
        raise ConfigError("depths must be strictly increasing")
    if cfg.structure_kmax < 0:
        raise ConfigError("kmax must be >= 0")
    if not 0 < cfg.threshold <= 1:
        raise ConfigError("threshold must lie in (0, 1]")
    if not 0.5 < cfg.mass < 1:
        raise ConfigError("mass must lie in (0.5, 1)")
    if any(b <= a for a, b in zip(cfg.empdim_levels, cfg.empdim_levels[1:])):
        raise ConfigError("empdim scales must be increasing levels")
    if len(cfg.empdim_fit) != 2 or cfg.empdim_fit[0] >= cfg.empdim_fit[1]:
        raise ConfigError("empdim fit must be [first, last] with first < last")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return config_from_dict(raw, str(path))
