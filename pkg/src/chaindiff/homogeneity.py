"""Dilation weights, homogeneity checks and empirical finite-time convergence.

The error system studied here is the integrator chain
``z_i' = z_{i+1}`` (i < n), ``z_n' = -sum_i a_i sig(z_i)^alpha_i``, i.e. the
nonlinear integral-chain differentiator with ``epsilon = 1`` and zero input.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .diffcore import Variant, alpha_schedule, kernel_params
from .errors import ValidationError
from .odesim import SimConfig, TimeSeries, run_estimator


@dataclass(frozen=True)
class DilationWeights:
    """Weights ``r_1..r_n`` of the dilation ``z_i -> rho**r_i z_i`` and degree ``k``."""

    r: np.ndarray
    k: float

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        object.__setattr__(self, "r", r)
        if r.ndim != 1 or r.size < 1 or np.any(r <= 0):
            raise ValidationError(f"dilation weights must be positive, got {r}")

    @property
    def finite_time(self) -> bool:
        """Negative degree: asymptotic stability then implies finite-time stability."""
        return self.k < 0

    def chain_residual(self) -> float:
        """``max |r_i - (k + r_{i-1})|``."""
        return float(np.max(np.abs(self.r[1:] - (self.k + self.r[:-1]))))

    def exponent_residual(self, alphas) -> float:
        """``max |r_i alpha_i - (k + r_n)|``."""
        return float(np.max(np.abs(self.r * np.asarray(alphas) - (self.k + self.r[-1]))))


def dilation_weights(n: int, alpha1: float) -> DilationWeights:
    """Weights making the error system homogeneous, normalised to ``k = alpha1 - 1``.

    With that choice ``r_1 = n`` and ``r_i = (i-1)(alpha1-1) + n``.
    """
    if not 0.0 < alpha1 < 1.0:
        raise ValidationError(f"alpha1 must lie in (0, 1), got {alpha1}")
    if n < 2:
        raise ValidationError(f"order must be >= 2, got {n}")
    k = alpha1 - 1.0
    r = (np.arange(n) * k) + n
    return DilationWeights(r, k)


def error_field(z, gains, alphas) -> np.ndarray:
    """Vector field of the error system, vectorised over leading axes of ``z``."""
    z = np.asarray(z, dtype=float)
    a = np.asarray(gains, dtype=float)
    out = np.empty_like(z)
    out[..., :-1] = z[..., 1:]
    powers = np.sign(z) * np.abs(z) ** np.asarray(alphas, dtype=float)
    out[..., -1] = -np.sum(a * powers, axis=-1)
    return out


def homogeneity_residual(n: int, gains, alpha1: float, sample_count: int = 10_000,
                         seed: int = 0, weights: Optional[DilationWeights] = None,
                         alphas: Optional[Sequence[float]] = None) -> float:
    """Largest relative violation of ``f_i(delta_rho z) = rho**(k + r_i) f_i(z)``.

    States are drawn uniformly from ``[-2, 2]^n`` and ``rho`` from
    ``[0.1, 10]``. ``weights`` defaults to :func:`dilation_weights` and
    ``alphas`` to :func:`alpha_schedule`; passing either lets callers probe
    wrong weights or the linear (all-ones) field.
    """
    if alphas is None:
        alphas = alpha_schedule(alpha1, n)
    if weights is None:
        weights = dilation_weights(n, alpha1)
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size != n or weights.r.size != n or np.asarray(gains).size != n:
        raise ValidationError("gains, exponents and weights must all have length n")
    rng = np.random.default_rng(seed)
    z = rng.uniform(-2.0, 2.0, (sample_count, n))
    rho = rng.uniform(0.1, 10.0, (sample_count, 1))
    lhs = error_field(rho ** weights.r * z, gains, alphas)
    rhs = rho ** (weights.k + weights.r) * error_field(z, gains, alphas)
    return float(np.max(np.abs(lhs - rhs) / (np.abs(rhs) + 1e-12)))


def settling_time(series: TimeSeries, column: str, threshold: float) -> Optional[float]:
    """Earliest recorded time after which ``|column| <= threshold`` to the end.

    Returns ``None`` when the final sample is still above the threshold.
    """
    if not threshold > 0:
        raise ValidationError(f"threshold must be > 0, got {threshold}")
    err = np.abs(series[column])
    above = np.flatnonzero(err > threshold)
    if above.size == 0:
        return float(series.t[0])
    last = above[-1]
    if last == len(series) - 1:
        return None
    return float(series.t[last + 1])


def simulate_error_system(variant, gains, offset: float, cfg: SimConfig,
                          alpha1: Optional[float] = None, hybrid_gains=None,
                          backend=None) -> TimeSeries:
    """Error system from ``z(0) = (offset, 0, ..., 0)``.

    Columns are ``t``, ``z1..zn`` and ``zmax = max_i |z_i|``.
    """
    variant = Variant(variant)
    a = np.asarray(gains, dtype=float)
    n = a.size
    alphas = alpha_schedule(alpha1, n) if variant.nonlinear else np.ones(n)
    params = kernel_params(variant, a, 1.0, alphas, hybrid_gains)
    z0 = np.zeros(n)
    z0[0] = offset
    z = run_estimator(params, z0, np.zeros(cfg.nsteps), cfg, backend)
    data = np.column_stack([cfg.record_times(), z, np.max(np.abs(z), axis=1)])
    return TimeSeries(["t"] + [f"z{i}" for i in range(1, n + 1)] + ["zmax"], data)


@dataclass
class RaceResult:
    offsets: np.ndarray
    linear: np.ndarray
    nonlinear: np.ndarray
    hybrid: np.ndarray
    threshold: float

    def hybrid_win_fraction(self) -> float:
        """Share of offsets where hybrid settles no later than both others."""
        best_other = np.fmin(self.linear, self.nonlinear)
        return float(np.mean(self.hybrid <= best_other))

    def nonlinear_win_fraction(self) -> float:
        return float(np.mean(self.nonlinear < self.linear))

    def to_series(self) -> TimeSeries:
        # offsets play the role of the increasing abscissa
        return TimeSeries(["offset", "t_linear", "t_nonlinear", "t_hybrid"],
                          np.column_stack([self.offsets, self.linear, self.nonlinear, self.hybrid]))


def convergence_race(gains, alpha1: float, hybrid_gains, offsets, threshold: float,
                     cfg: SimConfig, backend=None) -> RaceResult:
    """Settling times of the linear, nonlinear and hybrid error systems.

    A run that never settles records ``inf``.
    """
    offsets = np.asarray(offsets, dtype=float)
    times = {}
    for variant in (Variant.CHAIN_LINEAR, Variant.CHAIN_NONLINEAR, Variant.HYBRID):
        row = []
        for z0 in offsets:
            ts = simulate_error_system(variant, gains, z0, cfg, alpha1, hybrid_gains, backend)
            t = settling_time(ts, "zmax", threshold)
            row.append(np.inf if t is None else t)
        times[variant] = np.array(row)
    return RaceResult(offsets, times[Variant.CHAIN_LINEAR], times[Variant.CHAIN_NONLINEAR],
                      times[Variant.HYBRID], threshold)
