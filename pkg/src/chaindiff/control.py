"""Sliding-mode tracking of an uncertain double integrator with differentiator feedback.

Plant: ``theta' = omega``, ``omega' = f(t, omega) + b*u``, measured output
``theta + delta``. The controller drives ``s = e2 + k_u*e1`` to zero, either
with the true states and a known bound on ``f`` or with a third-order
differentiator supplying position, velocity and acceleration estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .diffcore import DifferentiatorSpec, spec_params
from .errors import IntegrationError, ValidationError
from .odesim import METHODS, SimConfig, TimeSeries
from .signals import AnalyticSignal, Constant, NoiseSpec, NoiseStream

MODES = {"known-bound": _backend.KNOWN_BOUND, "estimated": _backend.ESTIMATED}
F_HAT_INPUTS = {"delayed": _backend.DELAYED, "filtered": _backend.FILTERED}
S_SOURCES = ("estimate", "measurement")

LOOP_COLUMNS = ["t", "theta_d", "theta", "omega", "theta_hat", "omega_hat", "omega_hat_dot",
                "f", "f_hat", "u", "e1", "s"]


@dataclass(frozen=True)
class PlantSpec:
    """``f = -damping*omega + f_signal(t)``."""

    b: float
    damping: float = 0.0
    f_signal: AnalyticSignal = field(default_factory=Constant)

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b != 0):
            raise ValidationError(f"plant gain b must be finite and nonzero, got {self.b}")

    def f(self, t, theta, omega):
        return -self.damping * omega + self.f_signal.eval(t, 0)


@dataclass(frozen=True)
class ControllerSpec:
    """Sliding-mode controller settings.

    Parameters
    ----------
    k_u, l : float
        Sliding-surface and switching gains, both > 0.
    reference : AnalyticSignal
        Desired trajectory ``theta_d``.
    estimator : DifferentiatorSpec
        Third-order differentiator driven by the noisy measurement.
    mode : {"estimated", "known-bound"}
    boundary_layer : float
        Width of a saturation replacing ``sgn(s)``; 0 keeps the pure sign.
    s_source : {"estimate", "measurement"}
        Position used inside ``s`` in estimated mode.
    f_hat_input : {"filtered", "delayed"}
        How the control term is removed from the acceleration estimate:
        ``"filtered"`` passes ``b*u`` through the estimator's own linear
        dynamics, ``"delayed"`` subtracts the previous step's ``b*u``.
    comparison : DifferentiatorSpec, optional
        Second estimator for side-by-side runs under the same noise.
    """

    k_u: float
    l: float
    reference: AnalyticSignal
    estimator: DifferentiatorSpec
    mode: str = "estimated"
    boundary_layer: float = 0.0
    s_source: str = "estimate"
    f_hat_input: str = "filtered"
    comparison: Optional[DifferentiatorSpec] = None

    def __post_init__(self):
        if not self.k_u > 0:
            raise ValidationError(f"k_u must be > 0, got {self.k_u}")
        if not self.l > 0:
            raise ValidationError(f"l must be > 0, got {self.l}")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {sorted(MODES)}, got {self.mode!r}")
        if self.s_source not in S_SOURCES:
            raise ValidationError(f"s_source must be one of {S_SOURCES}, got {self.s_source!r}")
        if self.f_hat_input not in F_HAT_INPUTS:
            raise ValidationError(f"f_hat_input must be one of {sorted(F_HAT_INPUTS)}")
        if not self.boundary_layer >= 0:
            raise ValidationError("boundary_layer must be >= 0")
        for est in (self.estimator, self.comparison):
            if est is not None and est.n != 3:
                raise ValidationError(f"controller estimators must be order 3, got n={est.n}")


@dataclass(frozen=True)
class ClosedLoopConfig:
    plant: PlantSpec
    controller: ControllerSpec
    noise: NoiseSpec
    sim: SimConfig
    theta0: float = 0.0
    omega0: float = 0.0
    estimator_init: Optional[tuple] = None
    u0: float = 0.0

    def with_estimator(self, estimator: DifferentiatorSpec) -> "ClosedLoopConfig":
        c = self.controller
        ctrl = ControllerSpec(c.k_u, c.l, c.reference, estimator, c.mode, c.boundary_layer,
                              c.s_source, c.f_hat_input, None)
        return ClosedLoopConfig(self.plant, ctrl, self.noise, self.sim, self.theta0,
                                self.omega0, self.estimator_init, self.u0)


def _sgn(s: float) -> float:
    return 0.0 if s == 0 else math.copysign(1.0, s)


def plant_rhs(plant: PlantSpec, state, u: float, t: float) -> np.ndarray:
    theta, omega = state
    return np.array([omega, plant.f(t, theta, omega) + plant.b * u])


def control_known_bound(e1: float, e2: float, theta_dd_d: float, spec: ControllerSpec,
                        plant_b: float) -> float:
    """``u = (-k_u e2 + theta_d'' - l sgn(s)) / b`` with ``s = e2 + k_u e1`` and ``sgn(0) = 0``."""
    s = e2 + spec.k_u * e1
    return (-spec.k_u * e2 + theta_dd_d - spec.l * _sgn(s)) / plant_b


def estimate_f(omega_hat_dot: float, b: float, u: float) -> float:
    return omega_hat_dot - b * u


def control_estimated(estimator_state, t: float, spec: ControllerSpec, plant_b: float,
                      u_prev: float = 0.0, f_hat: Optional[float] = None,
                      theta_meas: Optional[float] = None) -> float:
    """Control from estimates ``(theta_hat, omega_hat, omega_hat_dot)``.

    ``f_hat`` defaults to ``omega_hat_dot - b*u_prev``. ``theta_meas`` is used
    in ``s`` instead of ``theta_hat`` when ``spec.s_source == "measurement"``.
    """
    theta_hat, omega_hat, omega_hat_dot = estimator_state
    if f_hat is None:
        f_hat = estimate_f(omega_hat_dot, plant_b, u_prev)
    ref = spec.reference
    pos = theta_meas if spec.s_source == "measurement" else theta_hat
    e2 = omega_hat - ref.eval(t, 1)
    s = e2 + spec.k_u * (pos - ref.eval(t, 0))
    return (-spec.k_u * e2 + ref.eval(t, 2) - spec.l * _sgn(s) - f_hat) / plant_b


def closed_loop_simulate(cfg: ClosedLoopConfig, backend=None) -> TimeSeries:
    """Integrate plant, estimator and controller together.

    Control and measurement are computed once per step and held over the RK4
    stages. Columns are listed in ``LOOP_COLUMNS``.
    """
    plant, ctrl, sim = cfg.plant, cfg.controller, cfg.sim
    est = ctrl.estimator
    n, N, h = est.n, sim.nsteps, sim.h
    t = sim.step_times()
    delta = NoiseStream(cfg.noise).draw(N + 1) if cfg.noise.kind != "none" else np.zeros(N + 1)
    ref = [np.ascontiguousarray(np.broadcast_to(ctrl.reference.eval(t, k), t.shape), dtype=float)
           for k in range(3)]
    t_half = np.arange(2 * N + 1) * (0.5 * h)
    g_half = np.ascontiguousarray(np.broadcast_to(plant.f_signal.eval(t_half, 0), t_half.shape),
                                  dtype=float)
    if cfg.estimator_init is None:
        x0 = np.zeros(n)
        x0[0] = cfg.theta0 + delta[0]
    else:
        x0 = np.asarray(cfg.estimator_init, dtype=float)
        if x0.shape != (n,):
            raise ValidationError(f"estimator_init must have {n} entries")
    comp = F_HAT_INPUTS[ctrl.f_hat_input]
    extra = np.zeros(n) if comp == _backend.FILTERED else np.zeros(0)
    y0 = np.concatenate(([cfg.theta0, cfg.omega0], x0, extra))
    m = y0.size
    rec = np.zeros((sim.nrecords, m + 4))
    with np.errstate(over="ignore", invalid="ignore"):
        status = _backend.get_kernels(backend).integrate_closed_loop(
            float(plant.b), float(plant.damping), g_half, float(ctrl.k_u), float(ctrl.l),
            MODES[ctrl.mode], float(ctrl.boundary_layer), ctrl.s_source == "measurement", comp,
            ref[0], ref[1], ref[2], np.ascontiguousarray(delta), *spec_params(est), y0,
            float(cfg.u0), float(h), N, int(sim.record_stride), METHODS[sim.method], rec)
    if status >= 0:
        raise IntegrationError(status * h)
    tr = sim.record_times()
    idx = np.arange(sim.nrecords) * sim.record_stride
    theta_d = ref[0][idx]
    data = np.column_stack([tr, theta_d, rec[:, 0], rec[:, 1], rec[:, 2], rec[:, 3], rec[:, 4],
                            rec[:, m], rec[:, m + 1], rec[:, m + 2], rec[:, 0] - theta_d,
                            rec[:, m + 3]])
    return TimeSeries(LOOP_COLUMNS, data)


def compare_estimators(cfg: ClosedLoopConfig, backend=None) -> dict:
    """Run the primary and comparison estimators under the same noise seed.

    Returns ``{variant value: TimeSeries}``; only the estimator differs between runs.
    """
    ctrl = cfg.controller
    if ctrl.comparison is None:
        raise ValidationError("controller has no comparison estimator")
    runs = {}
    for est in (ctrl.estimator, ctrl.comparison):
        runs[est.variant.value] = closed_loop_simulate(cfg.with_estimator(est), backend)
    return runs


def loop_metrics(series: TimeSeries, t_start: float = 2.0) -> dict:
    """Summary figures for one closed-loop run."""
    from .metrics import rmse_after

    half = series.t >= 0.5 * series.t[-1]
    e1 = series["e1"][series.t >= t_start]
    return {
        "rms_omega_err": rmse_after(series, "omega_hat", "omega", t_start),
        "rms_f_err": rmse_after(series, "f_hat", "f", t_start),
        "rms_e1": float(np.sqrt(np.mean(e1 * e1))),
        "max_abs_e1_final_half": float(np.max(np.abs(series["e1"][half]))),
        "max_abs_u": float(np.max(np.abs(series["u"]))),
    }
