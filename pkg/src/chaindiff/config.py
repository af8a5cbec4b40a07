"""Scenario configuration files.

Plain INI syntax (``configparser``): ``[section]`` headers, ``key = value``
lines, ``#`` comments, lists as comma-separated numbers. Which sections a
file needs depends on ``[scenario] kind``; see README for the full grammar.
Errors carry ``path:line`` context.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .control import ClosedLoopConfig, ControllerSpec, PlantSpec
from .diffcore import DifferentiatorSpec, Variant
from .errors import ValidationError
from .odesim import SimConfig
from .signals import Constant, NoiseSpec, Polynomial, Sinusoid, SumSignal

SCENARIO_KINDS = {
    "estimate": "open-loop differentiator run against an analytic signal",
    "equivalence": "high-gain vs integral-chain trajectory equivalence check",
    "epsilon-sweep": "steady error versus epsilon with log-log order fit",
    "convergence-race": "settling times of linear, nonlinear and hybrid error systems",
    "closed-loop": "sliding-mode tracking with differentiator feedback",
    "closed-loop-compare": "closed loop with two estimators under identical noise",
}

_REQUIRED = object()
_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^#;=:\s][^=:]*?)\s*[=:]")


class ConfigParseError(Exception):
    """The file is not syntactically valid or a value has the wrong type."""


class ConfigValidationError(ValidationError):
    """The file parses but a value violates an invariant."""


@dataclass
class Scenario:
    kind: str
    name: str
    path: str
    sim: SimConfig
    differentiator: Optional[DifferentiatorSpec] = None
    signal: Any = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    init: Optional[np.ndarray] = None
    threshold: float = 1e-3
    equivalence: dict = field(default_factory=dict)
    sweep: Optional[np.ndarray] = None
    race: dict = field(default_factory=dict)
    closed_loop: Optional[ClosedLoopConfig] = None


def _line_index(text: str) -> dict:
    """Map ``(section, key)`` and ``(section, None)`` to 1-based line numbers."""
    index, section = {}, None
    for no, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            index.setdefault((section, None), no)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip().lower()), no)
    return index


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, path: str, lines: dict):
        self.p, self.path, self.lines = parser, path, lines

    def where(self, section: str, key: Optional[str] = None) -> str:
        no = self.lines.get((section, key)) or self.lines.get((section, None))
        loc = f"{self.path}:{no}" if no else self.path
        return f"{loc}: [{section}]" + (f" {key}" if key else "")

    def invalid(self, section, key, msg) -> ConfigValidationError:
        return ConfigValidationError(f"{self.where(section, key)}: {msg}")

    def has(self, section: str, key: Optional[str] = None) -> bool:
        if key is None:
            return self.p.has_section(section)
        return self.p.has_option(section, key)

    def raw(self, section, key, default=_REQUIRED):
        if self.p.has_option(section, key):
            return self.p.get(section, key).strip()
        if default is _REQUIRED:
            if not self.p.has_section(section):
                raise ConfigValidationError(f"{self.path}: missing required section [{section}]")
            raise self.invalid(section, None, f"missing required key {key!r}")
        return default

    def str(self, section, key, default=_REQUIRED):
        return self.raw(section, key, default)

    def float(self, section, key, default=_REQUIRED):
        v = self.raw(section, key, default)
        if v is default and default is not _REQUIRED:
            return v
        try:
            return float(v)
        except ValueError:
            raise ConfigParseError(f"{self.where(section, key)}: expected a number, got {v!r}") from None

    def int(self, section, key, default=_REQUIRED):
        v = self.raw(section, key, default)
        if v is default and default is not _REQUIRED:
            return v
        try:
            return int(v)
        except ValueError:
            raise ConfigParseError(f"{self.where(section, key)}: expected an integer, got {v!r}") from None

    def floats(self, section, key, default=_REQUIRED):
        v = self.raw(section, key, default)
        if v is default and default is not _REQUIRED:
            return v
        try:
            return [float(x) for x in v.split(",") if x.strip()]
        except ValueError:
            raise ConfigParseError(f"{self.where(section, key)}: expected comma-separated numbers, got {v!r}") from None

    def bool(self, section, key, default=_REQUIRED):
        v = self.raw(section, key, default)
        if isinstance(v, bool):
            return v
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigParseError(f"{self.where(section, key)}: expected a boolean, got {v!r}")


def _signal(r: _Reader, section: str):
    kind = r.str(section, "kind")
    try:
        if kind == "sinusoid":
            return Sinusoid(r.float(section, "amplitude", 1.0), r.float(section, "frequency", 1.0),
                            r.float(section, "phase", 0.0))
        if kind == "polynomial":
            return Polynomial(tuple(r.floats(section, "coefficients")))
        if kind == "constant":
            return Constant(r.float(section, "level", 0.0))
        if kind == "sum":
            names = [s.strip() for s in r.str(section, "components").split(",") if s.strip()]
            return SumSignal(tuple(_signal(r, f"{section}.{name}") for name in names))
    except ValidationError as exc:
        if isinstance(exc, ConfigValidationError):
            raise
        raise r.invalid(section, None, str(exc)) from None
    raise r.invalid(section, "kind", f"unknown signal kind {kind!r}")


def _differentiator(r: _Reader, section: str) -> DifferentiatorSpec:
    gains = r.floats(section, "gains")
    n = r.int(section, "n", len(gains))
    variant = r.str(section, "variant", Variant.CHAIN_LINEAR.value)
    try:
        variant = Variant(variant)
    except ValueError:
        raise r.invalid(section, "variant", f"unknown variant {variant!r}; expected one of "
                        f"{[v.value for v in Variant]}") from None
    hybrid = r.floats(section, "hybrid_gains", None)
    try:
        return DifferentiatorSpec(n, tuple(gains), r.float(section, "epsilon"), variant,
                                  r.float(section, "alpha1", None),
                                  tuple(hybrid) if hybrid is not None else None)
    except ValidationError as exc:
        key = "gains" if "Hurwitz" in str(exc) and "hybrid" not in str(exc) else None
        raise r.invalid(section, key, str(exc)) from None


def _noise(r: _Reader, seed: Optional[int]) -> NoiseSpec:
    if not r.has("noise"):
        return NoiseSpec()
    try:
        spec = NoiseSpec(r.str("noise", "kind", "none"), r.float("noise", "half_width", 0.0),
                         r.float("noise", "sigma", 0.0),
                         seed if seed is not None else r.int("noise", "seed", 0))
    except ValidationError as exc:
        raise r.invalid("noise", None, str(exc)) from None
    return spec


def _sim(r: _Reader, section: str = "sim") -> SimConfig:
    try:
        return SimConfig(r.float(section, "t_end"), r.float(section, "h", 1e-4),
                         r.str(section, "method", "rk4"), r.int(section, "record_stride", 1))
    except ValidationError as exc:
        raise r.invalid(section, None, str(exc)) from None


def _closed_loop(r: _Reader, sim: SimConfig, noise: NoiseSpec, compare: bool) -> ClosedLoopConfig:
    f_signal = _signal(r, "plant.f_signal") if r.has("plant.f_signal") else Constant(0.0)
    try:
        plant = PlantSpec(r.float("plant", "b"), r.float("plant", "damping", 0.0), f_signal)
    except ValidationError as exc:
        raise r.invalid("plant", "b", str(exc)) from None
    estimator = _differentiator(r, "estimator")
    comparison = _differentiator(r, "comparison_estimator") if compare else None
    c = "controller"
    try:
        ctrl = ControllerSpec(r.float(c, "k_u"), r.float(c, "l"), _signal(r, "reference"),
                              estimator, r.str(c, "mode", "estimated"),
                              r.float(c, "boundary_layer", 0.0), r.str(c, "s_source", "estimate"),
                              r.str(c, "f_hat_input", "filtered"), comparison)
    except ValidationError as exc:
        if isinstance(exc, ConfigValidationError):
            raise
        raise r.invalid(c, None, str(exc)) from None
    init = r.floats(c, "estimator_init", None)
    return ClosedLoopConfig(plant, ctrl, noise, sim, r.float(c, "theta0", 0.0),
                            r.float(c, "omega0", 0.0), tuple(init) if init else None,
                            r.float(c, "u0", 0.0))


def parse_text(text: str, path: str = "<string>", seed: Optional[int] = None) -> Scenario:
    """Parse and validate scenario text; ``seed`` overrides any noise seed."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        loc = f"{path}:{lineno}" if lineno else path
        msg = str(exc).splitlines()[0]
        raise ConfigParseError(f"{loc}: {msg}") from None
    r = _Reader(parser, path, _line_index(text))
    kind = r.str("scenario", "kind")
    if kind not in SCENARIO_KINDS:
        raise r.invalid("scenario", "kind", f"unknown scenario kind {kind!r}; expected one of "
                        f"{sorted(SCENARIO_KINDS)}")
    sc = Scenario(kind=kind, name=r.str("scenario", "name", kind), path=path, sim=_sim(r))
    sc.noise = _noise(r, seed)

    if kind in ("estimate", "epsilon-sweep"):
        sc.differentiator = _differentiator(r, "differentiator")
        sc.signal = _signal(r, "signal")
        init = r.floats("differentiator", "init", None)
        if init is not None:
            if len(init) != sc.differentiator.n:
                raise r.invalid("differentiator", "init", f"expected {sc.differentiator.n} values")
            sc.init = np.array(init)
        sc.threshold = r.float("scenario", "threshold", 1e-3)
        if sc.threshold <= 0:
            raise r.invalid("scenario", "threshold", "must be > 0")
    if kind == "epsilon-sweep":
        eps = r.floats("sweep", "epsilons")
        if len(eps) < 3 or any(e <= 0 for e in eps) or len(set(eps)) != len(eps):
            raise r.invalid("sweep", "epsilons", "need at least 3 distinct positive values")
        sc.sweep = np.array(sorted(eps, reverse=True))
    if kind == "equivalence":
        s = "equivalence"
        gains = r.floats(s, "gains")
        eps = r.float(s, "epsilon")
        if len(gains) < 2 or any(g == 0 for g in gains):
            raise r.invalid(s, "gains", "need at least two nonzero gains")
        if eps <= 0:
            raise r.invalid(s, "epsilon", "must be > 0")
        init_w = r.floats(s, "init_w", None)
        if init_w is not None and len(init_w) != len(gains):
            raise r.invalid(s, "init_w", f"expected {len(gains)} values")
        sc.signal = _signal(r, "signal")
        sc.equivalence = {"gains": np.array(gains), "epsilon": eps,
                          "tolerance": r.float(s, "tolerance", 1e-8),
                          "init_w": None if init_w is None else np.array(init_w)}
    if kind == "convergence-race":
        s = "race"
        gains = r.floats(s, "gains")
        hybrid = r.floats(s, "hybrid_gains", gains)
        alpha1 = r.float(s, "alpha1")
        try:
            DifferentiatorSpec(len(gains), tuple(gains), 1.0, Variant.HYBRID, alpha1, tuple(hybrid))
        except ValidationError as exc:
            raise r.invalid(s, None, str(exc)) from None
        count = r.int(s, "offset_count", 50)
        lo, hi = r.float(s, "offset_min", 0.1), r.float(s, "offset_max", 2.0)
        if count < 1 or not 0 < lo <= hi:
            raise r.invalid(s, None, "need offset_count >= 1 and 0 < offset_min <= offset_max")
        sc.race = {"gains": np.array(gains), "hybrid_gains": np.array(hybrid), "alpha1": alpha1,
                   "threshold": r.float(s, "threshold", 1e-4),
                   "offsets": np.linspace(lo, hi, count),
                   "trace_offset": r.float(s, "trace_offset", 1.0)}
    if kind in ("closed-loop", "closed-loop-compare"):
        sc.closed_loop = _closed_loop(r, sc.sim, sc.noise, compare=kind == "closed-loop-compare")
    return sc


def load_scenario(path, seed: Optional[int] = None) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_text(text, str(path), seed)
