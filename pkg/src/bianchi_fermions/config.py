"""Run configuration: INI-style ``key = value`` text with sections.

Example::

    [background]
    model = power_law
    p = 2/3, 2/3, -1/3

    [physics]
    mass = 1

    [time]
    t0 = 1
    t1 = 5
    n_out = 16

    [grid]
    k_min = 0.1
    k_max = 10
    n_k = 8
    n_theta = 4
    n_phi = 4

Numbers accept fractions such as ``2/3``.  Omitted optional keys take the
defaults listed in :data:`SCHEMA`.  The canonical serialization lists every
section and key in a fixed order with round-trip float formatting; its
SHA-256 is the config digest, so reordering keys or rewriting ``2/3`` as
``0.6666666666666666`` leaves the digest unchanged.  The ``[run]`` keys
``out_dir`` and ``threads`` describe where and how a run executes, not what
it computes, and are left out of the digest.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .background import (
    Exponential,
    Isotropic,
    PowerLaw,
    Static,
    Tabulated,
    validate_model,
)
from .errors import ConfigError, DomainError
from .integrators import IntegratorConfig
from .kinematics import NAMED_STRATEGIES
from .observables import MomentumGrid

__all__ = [
    "SimulationConfig",
    "BackgroundSpec",
    "GridSpec",
    "parse_config",
    "load_config",
    "serialize_config",
    "config_digest",
    "SCHEMA",
]

REQUIRED = object()
MODELS = ("static", "power_law", "exponential", "tabulated")
FORMULATIONS = ("suv", "complex", "dirac")

# section -> key -> (type, default)
SCHEMA = {
    "background": {
        "model": ("str", REQUIRED),
        "a0": ("triple", (1.0, 1.0, 1.0)),
        "p": ("triple", None),
        "rates": ("triple", None),
        "t_ref": ("float", None),
        "table": ("str", None),
        "isotropic": ("bool", False),
    },
    "physics": {"mass": ("float", REQUIRED)},
    "time": {
        "t0": ("float", REQUIRED),
        "t1": ("float", REQUIRED),
        "n_out": ("int", 16),
        "times": ("floats", None),
    },
    "grid": {
        "k_min": ("float", REQUIRED),
        "k_max": ("float", REQUIRED),
        "n_k": ("int", REQUIRED),
        "n_theta": ("int", REQUIRED),
        "n_phi": ("int", REQUIRED),
    },
    "integrator": {
        "method": ("str", "dopri5"),
        "rtol": ("float", 1e-10),
        "atol": ("float", 1e-10),
        "max_step": ("float", None),
    },
    "run": {
        "formulation": ("str", "suv"),
        "strategy": ("str", "literal"),
        "t23_z_sign": ("float", -1.0),
        "out_dir": ("str", "out"),
        "threads": ("int", 0),
    },
}
NOT_DIGESTED = {("run", "out_dir"), ("run", "threads")}


@dataclass(frozen=True)
class BackgroundSpec:
    model: str
    a0: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    p: Optional[Tuple[float, float, float]] = None
    rates: Optional[Tuple[float, float, float]] = None
    t_ref: Optional[float] = None
    table: Optional[str] = None
    isotropic: bool = False

    def build(self):
        if self.model == "static":
            m = Static(self.a0)
        elif self.model == "power_law":
            m = PowerLaw(self.a0, self.p, t_ref=1.0 if self.t_ref is None else self.t_ref)
        elif self.model == "exponential":
            m = Exponential(self.a0, self.rates, t_ref=0.0 if self.t_ref is None else self.t_ref)
        else:
            data = np.loadtxt(self.table, delimiter=",", ndmin=2, comments="#")
            if data.ndim != 2 or data.shape[1] != 4:
                raise DomainError("table must have 4 columns: t, A1, A2, A3")
            m = Tabulated(data[:, 0], data[:, 1:].T)
        return Isotropic(m) if self.isotropic else m


@dataclass(frozen=True)
class GridSpec:
    k_min: float
    k_max: float
    n_k: int
    n_theta: int
    n_phi: int

    def build(self) -> MomentumGrid:
        return MomentumGrid(self.k_min, self.k_max, self.n_k, self.n_theta, self.n_phi)


@dataclass(frozen=True)
class SimulationConfig:
    background: BackgroundSpec
    mass: float
    t0: float
    t1: float
    output_times: Tuple[float, ...]
    grid: GridSpec
    integrator: IntegratorConfig
    formulation: str = "suv"
    strategy: str = "literal"
    t23_z_sign: float = -1.0
    out_dir: str = "out"
    threads: int = 0
    # explicit times as given, kept for serialization
    times: Optional[Tuple[float, ...]] = None
    n_out: int = 16

    def replace(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)


def _line_index(text):
    lines = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            lines.setdefault((section, None), n)
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), n)
    return lines


def _number(raw):
    return float(Fraction(raw.strip()))


def _convert(kind, raw, key, line):
    try:
        if kind == "str":
            if not raw:
                raise ValueError
            return raw
        if kind == "float":
            return _number(raw)
        if kind == "int":
            v = Fraction(raw.strip())
            if v.denominator != 1:
                raise ValueError
            return int(v)
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError
        if kind in ("triple", "floats"):
            vals = tuple(_number(x) for x in raw.split(",") if x.strip())
            if kind == "triple" and len(vals) != 3:
                raise ValueError
            if not vals:
                raise ValueError
            return vals
    except (ValueError, ZeroDivisionError):
        pass
    raise ConfigError(f"expected {kind}, got {raw!r}", key, line)


def parse_config(text: str) -> SimulationConfig:
    """Parse and validate a configuration document.

    Raises
    ------
    ConfigError
        Unknown section or key, malformed value, missing required key, or an
        invariant violation; the message names the key and line.
    """
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), default_section="\0none"
    )
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", f"{exc.section}.{exc.option}", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", exc.section, exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", None, exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", None, line) from None

    lines = _line_index(text)
    values = {}
    for section in cp.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            raise ConfigError("unknown section", sec, lines.get((sec, None)))
        for key, raw in cp.items(section):
            full = f"{sec}.{key}"
            line = lines.get((sec, key))
            if key not in SCHEMA[sec]:
                raise ConfigError("unknown key", full, line)
            values[(sec, key)] = _convert(SCHEMA[sec][key][0], raw, full, line)

    def get(sec, key):
        if (sec, key) in values:
            return values[(sec, key)]
        default = SCHEMA[sec][key][1]
        if default is REQUIRED:
            raise ConfigError("missing required key", f"{sec}.{key}", lines.get((sec, None)))
        return default

    def fail(msg, sec, key):
        raise ConfigError(msg, f"{sec}.{key}", lines.get((sec, key), lines.get((sec, None))))

    # background
    model = get("background", "model").lower()
    if model not in MODELS:
        fail(f"model must be one of {', '.join(MODELS)}", "background", "model")
    needs = {"power_law": "p", "exponential": "rates", "tabulated": "table"}.get(model)
    if needs and get("background", needs) is None:
        fail(f"{model} background needs '{needs}'", "background", needs)
    bspec = BackgroundSpec(
        model=model,
        a0=get("background", "a0"),
        p=get("background", "p"),
        rates=get("background", "rates"),
        t_ref=get("background", "t_ref"),
        table=get("background", "table"),
        isotropic=get("background", "isotropic"),
    )
    if min(bspec.a0) <= 0:
        fail("scale factors must be positive", "background", "a0")

    mass = get("physics", "mass")
    if not mass >= 0 or not math.isfinite(mass):
        fail("mass must be non-negative", "physics", "mass")

    t0, t1 = get("time", "t0"), get("time", "t1")
    if not t1 > t0:
        fail("t1 must exceed t0", "time", "t1")
    n_out = get("time", "n_out")
    times = get("time", "times")
    if times is not None:
        if any(b <= a for a, b in zip(times, times[1:])):
            fail("times must be strictly increasing", "time", "times")
        if times[0] < t0 or times[-1] > t1:
            fail("times must lie in [t0, t1]", "time", "times")
        output_times = tuple(times)
    else:
        if n_out < 1:
            fail("n_out must be at least 1", "time", "n_out")
        output_times = output_grid(t0, t1, n_out)

    g = {k: get("grid", k) for k in ("k_min", "k_max", "n_k", "n_theta", "n_phi")}
    if not g["k_min"] > 0:
        fail("k_min must be positive", "grid", "k_min")
    if not g["k_max"] > g["k_min"]:
        fail("k_max must exceed k_min", "grid", "k_max")
    for k in ("n_k", "n_theta", "n_phi"):
        if g[k] < 2:
            fail(f"{k} must be at least 2", "grid", k)
    if g["n_theta"] % 2:
        fail("n_theta must be even", "grid", "n_theta")

    try:
        icfg = IntegratorConfig(
            method=get("integrator", "method").lower(),
            rtol=get("integrator", "rtol"),
            atol=get("integrator", "atol"),
            max_step=get("integrator", "max_step"),
        )
    except DomainError as exc:
        key = "method" if "method" in str(exc) else ("max_step" if "max_step" in str(exc) else "rtol")
        fail(str(exc), "integrator", key)
    if icfg.method == "rk4" and icfg.max_step is None:
        fail("rk4 needs max_step", "integrator", "max_step")

    formulation = get("run", "formulation").lower()
    if formulation not in FORMULATIONS:
        fail(f"formulation must be one of {', '.join(FORMULATIONS)}", "run", "formulation")
    strategy = get("run", "strategy").lower()
    if strategy not in NAMED_STRATEGIES:
        fail(f"strategy must be one of {', '.join(sorted(NAMED_STRATEGIES))}", "run", "strategy")
    zsign = get("run", "t23_z_sign")
    if zsign not in (1.0, -1.0):
        fail("t23_z_sign must be +1 or -1", "run", "t23_z_sign")
    threads = get("run", "threads")
    if threads < 0:
        fail("threads must be >= 0 (0 = all cores)", "run", "threads")

    cfg = SimulationConfig(
        background=bspec,
        mass=mass,
        t0=t0,
        t1=t1,
        output_times=output_times,
        grid=GridSpec(**g),
        integrator=icfg,
        formulation=formulation,
        strategy=strategy,
        t23_z_sign=zsign,
        out_dir=get("run", "out_dir"),
        threads=threads,
        times=times,
        n_out=n_out,
    )
    if model != "tabulated":
        diag = validate_model(bspec.build(), (t0, t1))
        if diag.violations:
            raise ConfigError("; ".join(diag.violations), "time.t0", lines.get(("time", "t0")))
    return cfg


def output_grid(t0, t1, n):
    """``n`` evenly spaced output times in ``(t0, t1]``, the last exactly ``t1``."""
    ts = [t0 + (t1 - t0) * (j + 1) / n for j in range(n)]
    ts[-1] = t1
    return tuple(ts)


def load_config(path) -> SimulationConfig:
    return parse_config(Path(path).read_text())


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _items(cfg: SimulationConfig):
    b = cfg.background
    return {
        "background": {
            "model": b.model, "a0": b.a0, "p": b.p, "rates": b.rates,
            "t_ref": b.t_ref, "table": b.table, "isotropic": b.isotropic,
        },
        "physics": {"mass": cfg.mass},
        "time": {"t0": cfg.t0, "t1": cfg.t1, "n_out": cfg.n_out, "times": cfg.times},
        "grid": {
            "k_min": cfg.grid.k_min, "k_max": cfg.grid.k_max, "n_k": cfg.grid.n_k,
            "n_theta": cfg.grid.n_theta, "n_phi": cfg.grid.n_phi,
        },
        "integrator": {
            "method": cfg.integrator.method, "rtol": cfg.integrator.rtol,
            "atol": cfg.integrator.atol, "max_step": cfg.integrator.max_step,
        },
        "run": {
            "formulation": cfg.formulation, "strategy": cfg.strategy,
            "t23_z_sign": cfg.t23_z_sign, "out_dir": cfg.out_dir, "threads": cfg.threads,
        },
    }


def serialize_config(cfg: SimulationConfig, digest_only: bool = False) -> str:
    """Canonical text form; ``parse_config`` of it gives back ``cfg``."""
    out = []
    for sec in SCHEMA:
        out.append(f"[{sec}]")
        items = _items(cfg)[sec]
        for key in sorted(items):
            if digest_only and (sec, key) in NOT_DIGESTED:
                continue
            if items[key] is not None:
                out.append(f"{key} = {_fmt(items[key])}")
        out.append("")
    return "\n".join(out)


def config_digest(cfg: SimulationConfig) -> str:
    return hashlib.sha256(serialize_config(cfg, digest_only=True).encode()).hexdigest()
