"""Error metrics and the empirical epsilon-order fit."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .diffcore import DifferentiatorSpec
from .errors import ValidationError
from .odesim import SimConfig, TimeSeries, simulate_estimator
from .signals import AnalyticSignal

STEADY_FRACTION = 0.2
MIN_HORIZON_EPS = 200.0


def rmse_after(series: TimeSeries, col_a: str, col_b: str, t_start: float = 0.0) -> float:
    """Root-mean-square of ``col_a - col_b`` over records with ``t >= t_start``."""
    a, b = series[col_a], series[col_b]
    mask = series.t >= t_start
    if not mask.any():
        raise ValidationError(f"no records at or after t={t_start}")
    d = a[mask] - b[mask]
    return float(np.sqrt(np.mean(d * d)))


def steady_max_error(series: TimeSeries, column: str, fraction: float = STEADY_FRACTION) -> float:
    """``max |column|`` over the final ``fraction`` of the recorded horizon."""
    t = series.t
    start = t[-1] - fraction * (t[-1] - t[0])
    return float(np.max(np.abs(series[column][t >= start])))


@dataclass(frozen=True)
class OrderFit:
    """Least-squares fit of ``log(error) = slope * log(eps) + intercept``."""

    epsilons: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    residual: float

    def csv_row(self) -> str:
        return f"{self.slope:.17g},{self.intercept:.17g},{self.residual:.17g}"

    def summary(self) -> str:
        pts = " ".join(f"({e:g}, {r:.3e})" for e, r in zip(self.epsilons, self.errors))
        return f"slope={self.slope:.4f} intercept={self.intercept:.4f} residual={self.residual:.2e} points={pts}"


def convergence_order(sweep: Iterable[tuple[float, float]]) -> OrderFit:
    """Fit the error exponent from ``(epsilon, steady_error)`` pairs.

    Points are sorted by decreasing epsilon; at least three are needed and
    all values must be positive.
    """
    pts = sorted(((float(e), float(r)) for e, r in sweep), key=lambda p: -p[0])
    if len(pts) < 3:
        raise ValidationError("convergence_order needs at least 3 points")
    eps = np.array([p[0] for p in pts])
    err = np.array([p[1] for p in pts])
    if np.any(eps <= 0) or np.any(err <= 0):
        raise ValidationError("epsilons and errors must be positive")
    if np.any(np.diff(eps) >= 0):
        raise ValidationError("epsilons must be distinct")
    x, y = np.log(eps), np.log(err)
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    return OrderFit(eps, err, float(slope), float(intercept), float(res[0]) if res.size else 0.0)


@dataclass
class EpsilonSweep:
    epsilons: np.ndarray
    errors: np.ndarray  # shape (len(epsilons), n): steady max error per component
    horizons: np.ndarray

    def fit(self, component: int) -> OrderFit:
        """Order fit for ``x_{component}`` (1-based)."""
        return convergence_order(zip(self.epsilons, self.errors[:, component - 1]))


def epsilon_sweep(spec: DifferentiatorSpec, epsilons: Sequence[float], signal: AnalyticSignal,
                  cfg: SimConfig, init=None, backend=None) -> EpsilonSweep:
    """Noise-free runs of ``spec`` at each epsilon, scored on the final 20% of the horizon.

    The horizon is stretched to at least ``200 * epsilon`` when ``cfg.t_end``
    is shorter, so the initial transient is excluded from the steady window.
    """
    errors, horizons = [], []
    for eps in epsilons:
        t_end = max(cfg.t_end, MIN_HORIZON_EPS * eps)
        run_cfg = SimConfig(t_end, cfg.h, cfg.method, cfg.record_stride)
        ts = simulate_estimator(spec.replace(epsilon=eps), signal, None, init, run_cfg, backend)
        errors.append([steady_max_error(ts, f"err{i}") for i in range(1, spec.n + 1)])
        horizons.append(t_end)
    return EpsilonSweep(np.asarray(epsilons, dtype=float), np.array(errors), np.array(horizons))
