"""Analytic input signals with closed-form derivatives, and measurement noise."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ValidationError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(frequency * t + phase)``; frequency in rad/s."""

    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0

    def eval(self, t: ArrayLike, k: int = 0) -> ArrayLike:
        arg = self.frequency * np.asarray(t, dtype=float) + self.phase
        scale = self.amplitude * self.frequency**k
        # k mod 4 keeps e.g. the 4th derivative of sin at 0 exactly zero
        q = k % 4
        if q == 0:
            out = scale * np.sin(arg)
        elif q == 1:
            out = scale * np.cos(arg)
        elif q == 2:
            out = -scale * np.sin(arg)
        else:
            out = -scale * np.cos(arg)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with coefficients in ascending degree."""

    coefficients: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not self.coefficients:
            raise ValidationError("polynomial needs at least one coefficient")

    def eval(self, t: ArrayLike, k: int = 0) -> ArrayLike:
        c = np.asarray(self.coefficients, dtype=float)
        if k >= len(c):
            out = np.zeros_like(np.asarray(t, dtype=float))
        else:
            out = P.polyval(np.asarray(t, dtype=float), P.polyder(c, k) if k else c)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class Constant:
    level: float = 0.0

    def eval(self, t: ArrayLike, k: int = 0) -> ArrayLike:
        value = self.level if k == 0 else 0.0
        if np.ndim(t):
            return np.full(np.shape(t), value, dtype=float)
        return float(value)


@dataclass(frozen=True)
class SumSignal:
    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def eval(self, t: ArrayLike, k: int = 0) -> ArrayLike:
        total = 0.0 * np.asarray(t, dtype=float)
        for comp in self.components:
            total = total + comp.eval(t, k)
        return total if np.ndim(total) else float(total)


AnalyticSignal = Union[Sinusoid, Polynomial, Constant, SumSignal]


def eval_signal(signal: AnalyticSignal, t: ArrayLike, k: int = 0) -> ArrayLike:
    """Exact ``k``-th time derivative of ``signal`` at ``t`` (scalar or array)."""
    if k < 0:
        raise ValidationError(f"derivative order must be >= 0, got {k}")
    return signal.eval(t, k)


NOISE_KINDS = ("none", "uniform", "gaussian")


@dataclass(frozen=True)
class NoiseSpec:
    """Measurement noise description.

    ``kind`` is ``"none"``, ``"uniform"`` (bounded, ``|delta| <= half_width``)
    or ``"gaussian"`` (standard deviation ``sigma``).
    """

    kind: str = "none"
    half_width: float = 0.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if self.kind == "uniform" and not self.half_width >= 0.0:
            raise ValidationError("uniform noise half_width must be >= 0")
        if self.kind == "gaussian" and not self.sigma >= 0.0:
            raise ValidationError("gaussian noise sigma must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("noise seed must fit in an unsigned 64-bit integer")


@dataclass
class NoiseStream:
    """Single-owner sample stream for a :class:`NoiseSpec`.

    Bulk and one-at-a-time draws consume the same underlying sequence.
    """

    spec: NoiseSpec
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.rng = np.random.default_rng(int(self.spec.seed))

    def draw(self, size: int) -> np.ndarray:
        spec = self.spec
        if spec.kind == "uniform":
            return self.rng.uniform(-spec.half_width, spec.half_width, size)
        if spec.kind == "gaussian":
            return self.rng.normal(0.0, spec.sigma, size)
        return np.zeros(size)

    def next(self) -> float:
        return float(self.draw(1)[0])


def sample_noise(spec: NoiseSpec, stream: NoiseStream | None = None) -> tuple[float, NoiseStream]:
    """Draw one sample; a fresh stream is seeded from ``spec`` when none is given."""
    if stream is None:
        stream = NoiseStream(spec)
    return stream.next(), stream


def signal_from_dict(d: dict) -> AnalyticSignal:
    """Build a signal from a plain mapping (``kind`` plus parameters)."""
    kind = d.get("kind")
    if kind == "sinusoid":
        return Sinusoid(float(d.get("amplitude", 1.0)), float(d.get("frequency", 1.0)),
                        float(d.get("phase", 0.0)))
    if kind == "polynomial":
        return Polynomial(tuple(d["coefficients"]))
    if kind == "constant":
        return Constant(float(d.get("level", 0.0)))
    if kind == "sum":
        return SumSignal(tuple(signal_from_dict(c) for c in d["components"]))
    raise ValidationError(f"unknown signal kind {kind!r}")


def describe(signal: AnalyticSignal) -> str:
    if isinstance(signal, Sinusoid):
        return f"{signal.amplitude:g}*sin({signal.frequency:g}t+{signal.phase:g})"
    if isinstance(signal, Polynomial):
        return "poly(" + ", ".join(f"{c:g}" for c in signal.coefficients) + ")"
    if isinstance(signal, Constant):
        return f"const({signal.level:g})"
    return " + ".join(describe(c) for c in signal.components)

