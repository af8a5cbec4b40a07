"""Differentiator vector fields: high-gain, integral-chain, nonlinear and hybrid.

All four share the gain vector ``a_1..a_n`` (ascending, so the characteristic
polynomial is ``s^n + a_n s^(n-1) + ... + a_2 s + a_1``) and the small
parameter ``epsilon``. The integral-chain forms keep the first ``n-1`` state
equations as pure integrators and put every correction in the last one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .errors import ValidationError


class Variant(str, enum.Enum):
    HIGH_GAIN = "high-gain-linear"
    CHAIN_LINEAR = "integral-chain-linear"
    CHAIN_NONLINEAR = "integral-chain-nonlinear"
    HYBRID = "hybrid"

    @property
    def code(self) -> int:
        return _CODES[self]

    @property
    def nonlinear(self) -> bool:
        return self in (Variant.CHAIN_NONLINEAR, Variant.HYBRID)


_CODES = {
    Variant.HIGH_GAIN: _backend.HIGH_GAIN,
    Variant.CHAIN_LINEAR: _backend.CHAIN_LINEAR,
    Variant.CHAIN_NONLINEAR: _backend.CHAIN_NONLINEAR,
    Variant.HYBRID: _backend.HYBRID,
}


def sig(y, alpha):
    """Signed power ``|y|**alpha * sign(y)``; works elementwise on arrays."""
    if alpha <= 0:
        raise ValidationError(f"sig exponent must be > 0, got {alpha}")
    y = np.asarray(y, dtype=float)
    out = np.sign(y) * np.abs(y) ** alpha
    return out if out.ndim else float(out)


def alpha_schedule(alpha1: float, n: int) -> np.ndarray:
    """Exponents ``alpha_i = n*alpha1 / ((i-1)*alpha1 + (n-i+1))`` for i = 1..n.

    The result is strictly increasing and stays in (0, 1); entries tend to 1
    as ``alpha1`` does.
    """
    if not 0.0 < alpha1 < 1.0:
        raise ValidationError(f"alpha1 must lie in (0, 1), got {alpha1}")
    if n < 2:
        raise ValidationError(f"order must be >= 2, got {n}")
    i = np.arange(1, n + 1, dtype=float)
    out = n * alpha1 / ((i - 1.0) * alpha1 + (n - i + 1.0))
    out[0] = alpha1
    return out


def is_hurwitz(coeffs: Sequence[float]) -> bool:
    """True iff ``s^n + a_n s^(n-1) + ... + a_1`` has all roots in Re(s) < 0.

    ``coeffs`` is ``[a_1, ..., a_n]``. Uses the Routh table in exact
    rational arithmetic (floats convert to ``Fraction`` without rounding),
    so a vanishing first-column entry is detected exactly and reported as
    not Hurwitz.
    """
    coeffs = list(coeffs)
    if not coeffs:
        raise ValidationError("is_hurwitz needs at least one coefficient")
    if not all(math.isfinite(c) for c in coeffs):
        return False
    desc = [Fraction(1)] + [Fraction(c) for c in reversed(coeffs)]
    if any(c <= 0 for c in desc):
        return False
    prev = desc[0::2]
    cur = desc[1::2]
    for _ in range(len(desc) - 2):
        width = max(len(prev), len(cur))
        prev = prev + [Fraction(0)] * (width - len(prev))
        cur = cur + [Fraction(0)] * (width - len(cur))
        if cur[0] <= 0:
            return False
        nxt = [(cur[0] * prev[j + 1] - prev[0] * cur[j + 1]) / cur[0] for j in range(width - 1)]
        prev, cur = cur, nxt or [Fraction(0)]
    return cur[0] > 0


def geometric_gains(a1: float, ratio: float, n: int) -> np.ndarray:
    """``a_i = a1 * ratio**(i-1)``, which satisfies ``a_{i+1}^2 = a_i a_{i+2}``."""
    if a1 <= 0 or ratio <= 0:
        raise ValidationError("geometric gains need a1 > 0 and ratio > 0")
    return a1 * ratio ** np.arange(n, dtype=float)


@dataclass(frozen=True)
class DifferentiatorSpec:
    """Parameters of one differentiator.

    Parameters
    ----------
    n : int
        Number of chained states; ``x_i`` estimates the (i-1)-th derivative.
    gains : sequence of float
        ``a_1..a_n``; the characteristic polynomial must be Hurwitz.
    epsilon : float
        Perturbation parameter, > 0.
    variant : Variant or str
    alpha1 : float, optional
        First exponent, required in (0, 1) for the nonlinear and hybrid forms.
    hybrid_gains : sequence of float, optional
        ``b_1..b_n`` weighting the nonlinear terms of the hybrid form.
    """

    n: int
    gains: tuple
    epsilon: float
    variant: Variant = Variant.CHAIN_LINEAR
    alpha1: Optional[float] = None
    hybrid_gains: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        if self.hybrid_gains is not None:
            object.__setattr__(self, "hybrid_gains", tuple(float(g) for g in self.hybrid_gains))
        if self.n < 2:
            raise ValidationError(f"order n must be >= 2, got {self.n}")
        if len(self.gains) != self.n:
            raise ValidationError(f"expected {self.n} gains, got {len(self.gains)}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if not is_hurwitz(self.gains):
            raise ValidationError(
                f"Hurwitz invariant violated: gains {list(self.gains)} give a "
                "characteristic polynomial with a root in Re(s) >= 0")
        if self.variant.nonlinear:
            if self.alpha1 is None or not 0.0 < self.alpha1 < 1.0:
                raise ValidationError(f"{self.variant.value} needs 0 < alpha1 < 1, got {self.alpha1}")
        if self.variant is Variant.HYBRID:
            if self.hybrid_gains is None or len(self.hybrid_gains) != self.n:
                raise ValidationError(f"hybrid variant needs {self.n} hybrid_gains")
            if not is_hurwitz(self.hybrid_gains):
                raise ValidationError(
                    f"Hurwitz invariant violated: hybrid_gains {list(self.hybrid_gains)}")

    @property
    def alphas(self) -> np.ndarray:
        if self.variant.nonlinear:
            return alpha_schedule(self.alpha1, self.n)
        return np.ones(self.n)

    def replace(self, **changes) -> "DifferentiatorSpec":
        fields = dict(n=self.n, gains=self.gains, epsilon=self.epsilon, variant=self.variant,
                      alpha1=self.alpha1, hybrid_gains=self.hybrid_gains)
        fields.update(changes)
        return DifferentiatorSpec(**fields)


def kernel_params(variant, gains, epsilon, alphas=None, hybrid_gains=None) -> tuple:
    """Flatten a differentiator into the argument tuple the kernels expect.

    Returns ``(code, a, b, alpha, epow, hg, inv_epsn)`` where ``epow[i]`` is
    ``epsilon**i`` and ``hg[i]`` is the high-gain correction ``a_{n-i}/epsilon**(i+1)``.
    No validation is done here, so analysis code can pass non-Hurwitz gains.
    """
    variant = Variant(variant)
    a = np.ascontiguousarray(gains, dtype=float)
    n = a.size
    b = a.copy() if hybrid_gains is None else np.ascontiguousarray(hybrid_gains, dtype=float)
    alpha = np.ones(n) if alphas is None else np.ascontiguousarray(alphas, dtype=float)
    epow = np.array([epsilon**i for i in range(n + 1)])
    hg = np.array([a[n - 1 - i] / epsilon ** (i + 1) for i in range(n)])
    return variant.code, a, b, alpha, epow, hg, 1.0 / epsilon**n


def spec_params(spec: DifferentiatorSpec) -> tuple:
    return kernel_params(spec.variant, spec.gains, spec.epsilon, spec.alphas, spec.hybrid_gains)


def differentiator_rhs(spec: DifferentiatorSpec, state, v_meas: float, *, exponents=None,
                       backend=None) -> np.ndarray:
    """Time derivative of the estimator state for input sample ``v_meas``.

    Parameters
    ----------
    exponents : sequence of float, optional
        Overrides the exponent schedule of the nonlinear terms (for instance
        all ones, which turns the nonlinear form into the linear one).
    backend : {"cython", "python"}, optional
        Kernel backend; defaults to the one selected at import.
    """
    x = np.ascontiguousarray(state, dtype=float)
    if x.shape != (spec.n,):
        raise ValidationError(f"state must have length {spec.n}, got shape {x.shape}")
    if not math.isfinite(v_meas):
        raise ValidationError(f"input sample must be finite, got {v_meas}")
    alphas = spec.alphas if exponents is None else exponents
    params = kernel_params(spec.variant, spec.gains, spec.epsilon, alphas, spec.hybrid_gains)
    out = np.empty(spec.n)
    _backend.get_kernels(backend).estimator_rhs(*params, x, float(v_meas), out)
    return out
