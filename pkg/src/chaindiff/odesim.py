"""Fixed-step integration and recorded trajectories."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _backend
from .diffcore import DifferentiatorSpec, spec_params
from .errors import IntegrationError, ValidationError
from .signals import AnalyticSignal, NoiseSpec, NoiseStream

METHODS = {"euler": _backend.EULER, "rk4": _backend.RK4}


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    h: float = 1e-4
    method: str = "rk4"
    record_stride: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValidationError(f"step h must be > 0, got {self.h}")
        if not self.t_end >= 0:
            raise ValidationError(f"t_end must be >= 0, got {self.t_end}")
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {sorted(METHODS)}, got {self.method!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValidationError(f"record_stride must be a positive integer, got {self.record_stride}")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.h))

    @property
    def nrecords(self) -> int:
        return self.nsteps // self.record_stride + 1

    def step_times(self) -> np.ndarray:
        """Times ``j*h`` for j = 0..nsteps (computed by product, not accumulation)."""
        return np.arange(self.nsteps + 1) * self.h

    def record_times(self) -> np.ndarray:
        return np.arange(self.nrecords) * self.record_stride * self.h


class TimeSeries:
    """Named columns sampled at strictly increasing times; column 0 is ``t``."""

    def __init__(self, columns: Sequence[str], data: np.ndarray):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(columns):
            raise ValidationError(f"data shape {data.shape} does not match {len(columns)} columns")
        if len(set(columns)) != len(columns):
            raise ValidationError("column names must be unique")
        if data.shape[0] > 1 and not np.all(np.diff(data[:, 0]) > 0):
            raise ValidationError("time column must be strictly increasing")
        self.columns = list(columns)
        self.data = data
        self._index = {c: i for i, c in enumerate(self.columns)}

    def __len__(self) -> int:
        return self.data.shape[0]

    def __contains__(self, name) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self._index[name]]
        except KeyError:
            raise KeyError(f"unknown column {name!r}; have {self.columns}") from None

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    def select(self, names: Sequence[str]) -> "TimeSeries":
        return TimeSeries(list(names), np.column_stack([self[c] for c in names]))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        np.savetxt(buf, self.data, fmt="%.17g", delimiter=",")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(header, data.reshape(-1, len(header)))


def step(rhs: Callable, state, t: float, h: float, method: str = "rk4") -> np.ndarray:
    """One explicit Euler or classical RK4 step of ``x' = rhs(t, x)``.

    Raises :class:`IntegrationError` if the new state is not finite.
    """
    if not h > 0:
        raise ValidationError(f"step h must be > 0, got {h}")
    x = np.asarray(state, dtype=float)
    k1 = np.asarray(rhs(t, x), dtype=float)
    if method == "euler":
        out = x + h * k1
    elif method == "rk4":
        half = 0.5 * h
        k2 = np.asarray(rhs(t + half, x + half * k1), dtype=float)
        k3 = np.asarray(rhs(t + half, x + half * k2), dtype=float)
        k4 = np.asarray(rhs(t + h, x + h * k3), dtype=float)
        out = x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    else:
        raise ValidationError(f"unknown method {method!r}")
    if not np.all(np.isfinite(out)):
        raise IntegrationError(t + h)
    return out


def integrate(rhs: Callable, x0, cfg: SimConfig) -> TimeSeries:
    """Generic (pure-Python) fixed-step integration of ``x' = rhs(t, x)``."""
    x = np.asarray(x0, dtype=float)
    rows = []
    for j in range(cfg.nsteps + 1):
        t = j * cfg.h
        if j % cfg.record_stride == 0:
            rows.append(np.concatenate(([t], x)))
        if j < cfg.nsteps:
            x = step(rhs, x, t, cfg.h, cfg.method)
    return TimeSeries(["t"] + [f"x{i + 1}" for i in range(x.size)], np.array(rows))


def measurement(signal: AnalyticSignal, noise: Optional[NoiseSpec], cfg: SimConfig) -> np.ndarray:
    """Held input sample for each step: ``v(j*h) + delta_j`` for j = 0..nsteps-1."""
    t = cfg.step_times()[:-1]
    meas = np.asarray(signal.eval(t, 0), dtype=float) * np.ones_like(t)
    if noise is not None and noise.kind != "none":
        meas = meas + NoiseStream(noise).draw(t.size)
    return np.ascontiguousarray(meas)


def run_estimator(params: tuple, x0, meas: np.ndarray, cfg: SimConfig, backend=None) -> np.ndarray:
    """Integrate a differentiator on a precomputed measurement sequence.

    Returns the recorded states, shape ``(cfg.nrecords, n)``.
    """
    x0 = np.ascontiguousarray(x0, dtype=float)
    rec = np.zeros((cfg.nrecords, x0.size))
    # overflow is detected by the kernel and reported through the status
    with np.errstate(over="ignore", invalid="ignore"):
        status = _backend.get_kernels(backend).integrate_estimator(
            *params, x0, np.ascontiguousarray(meas, dtype=float), float(cfg.h), cfg.nsteps,
            int(cfg.record_stride), METHODS[cfg.method], rec)
    if status >= 0:
        raise IntegrationError(status * cfg.h)
    return rec


def estimator_columns(n: int) -> list[str]:
    truth = ["v"] + [f"v_d{k}" for k in range(1, n)]
    return ["t"] + truth + [f"x{i}" for i in range(1, n + 1)] + [f"err{i}" for i in range(1, n + 1)]


def simulate_estimator(spec: DifferentiatorSpec, signal: AnalyticSignal,
                       noise: Optional[NoiseSpec] = None, init=None,
                       cfg: SimConfig = SimConfig(10.0), backend=None) -> TimeSeries:
    """Run a differentiator against an analytic signal and record errors.

    The measurement (signal plus one noise draw) is held constant over each
    step, RK4 stages included. Columns: ``t``, ``v``, ``v_d1..v_d{n-1}``,
    ``x1..xn`` and ``err1..errn`` with ``err_i = x_i - v^(i-1)``.
    """
    n = spec.n
    x0 = np.zeros(n) if init is None else np.asarray(init, dtype=float)
    if x0.shape != (n,) or not np.all(np.isfinite(x0)):
        raise ValidationError(f"initial state must be {n} finite values")
    meas = measurement(signal, noise, cfg)
    states = run_estimator(spec_params(spec), x0, meas, cfg, backend)
    t = cfg.record_times()
    truth = np.column_stack([np.broadcast_to(signal.eval(t, k), t.shape) for k in range(n)])
    data = np.column_stack([t, truth, states, states - truth])
    return TimeSeries(estimator_columns(n), data)
