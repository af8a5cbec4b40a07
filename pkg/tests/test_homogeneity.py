import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaindiff.diffcore import alpha_schedule
from chaindiff.errors import ValidationError
from chaindiff.homogeneity import (DilationWeights, convergence_race, dilation_weights, error_field,
                                   homogeneity_residual, settling_time, simulate_error_system)
from chaindiff.odesim import SimConfig, TimeSeries


def test_dilation_weights_example():
    w = dilation_weights(3, 0.5)
    assert w.k == -0.5
    np.testing.assert_allclose(w.r, [3, 2.5, 2])
    assert w.finite_time


def test_dilation_weights_limit():
    w = dilation_weights(4, 1 - 1e-12)
    assert -1e-11 < w.k < 0
    np.testing.assert_allclose(w.r, 4.0, atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 8), alpha1=st.floats(0.05, 0.95))
def test_weights_satisfy_chain_and_exponent_relations(n, alpha1):
    w = dilation_weights(n, alpha1)
    assert np.all(w.r > 0)
    assert w.chain_residual() < 1e-12
    assert w.exponent_residual(alpha_schedule(alpha1, n)) < 1e-12


def test_weights_validation():
    with pytest.raises(ValidationError):
        DilationWeights(np.array([1.0, -1.0]), -0.5)
    with pytest.raises(ValidationError):
        dilation_weights(3, 1.0)
    with pytest.raises(ValidationError):
        dilation_weights(1, 0.5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_homogeneity_residual_small_for_correct_weights(n):
    assert homogeneity_residual(n, np.arange(1.0, n + 1), 0.6) < 1e-10


def test_perturbed_weights_break_homogeneity():
    good = dilation_weights(3, 0.5)
    bad = DilationWeights(good.r + np.array([0.1, 0, 0]), good.k)
    assert homogeneity_residual(3, [1, 3, 3], 0.5, weights=bad) > 1e-2


def test_perturbed_weights_single_point_oracle():
    # one hand-checked point: z = (1, 0, 0), rho = 2, only the sig(z1) term survives
    alphas = alpha_schedule(0.5, 3)
    w = dilation_weights(3, 0.5)
    z = np.array([1.0, 0.0, 0.0])
    rho = 2.0
    lhs = error_field(rho ** (w.r + [0.1, 0, 0]) * z, [1, 3, 3], alphas)[2]
    rhs = rho ** (w.k + w.r[2]) * error_field(z, [1, 3, 3], alphas)[2]
    assert lhs == pytest.approx(-(2.0 ** 3.1) ** 0.5)
    assert rhs == pytest.approx(-(2.0 ** 1.5))
    assert abs(lhs - rhs) / abs(rhs) > 1e-2


def test_linear_field_is_degree_zero_with_equal_weights():
    w = DilationWeights(np.full(3, 2.0), 0.0)
    assert homogeneity_residual(3, [1, 3, 3], 0.5, weights=w, alphas=np.ones(3)) < 1e-10


def _series(values, dt=0.01):
    values = np.asarray(values, dtype=float)
    return TimeSeries(["t", "e"], np.column_stack([np.arange(values.size) * dt, values]))


def test_settling_time_examples():
    assert settling_time(_series(np.zeros(10)), "e", 1e-3) == 0.0
    assert settling_time(_series(np.ones(10)), "e", 0.5) is None
    t = np.arange(1000) * 0.01
    assert settling_time(_series(np.exp(-t)), "e", 1e-3) == pytest.approx(math.log(1000), abs=0.01)
    with pytest.raises(ValidationError):
        settling_time(_series(np.zeros(3)), "e", 0.0)


def test_error_system_settles_in_finite_time():
    cfg = SimConfig(20.0, 1e-3, record_stride=10)
    ts = simulate_error_system("integral-chain-nonlinear", [2, 2], 1.0, cfg, alpha1=0.5)
    assert ts["zmax"][-1] < 1e-8
    assert ts.columns == ["t", "z1", "z2", "zmax"]


def test_nonlinear_beats_linear_near_equilibrium():
    cfg = SimConfig(30.0, 1e-3)
    res = convergence_race([2, 2], 0.5, [2, 2], [0.1, 0.5, 1.0], 1e-3, cfg)
    assert np.all(res.nonlinear <= res.linear)
    assert res.to_series().columns == ["offset", "t_linear", "t_nonlinear", "t_hybrid"]


@pytest.mark.parametrize("gains, alpha1", [([2, 2], 0.5), ([6, 11, 6], 0.7)])
def test_nonlinear_settles_first_at_tight_threshold(gains, alpha1):
    offsets = np.linspace(0.1, 2.0, 20)
    res = convergence_race(gains, alpha1, gains, offsets, 1e-6, SimConfig(60.0, 1e-3))
    assert np.all(np.isfinite(res.nonlinear))
    assert res.nonlinear_win_fraction() >= 0.9
