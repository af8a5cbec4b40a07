"""Pure-Python fallback for the integration kernels.

Mirrors ``_ckernels.pyx`` operation for operation so both backends agree to
the last bit on platforms without FMA contraction. Arrays are accepted as
anything indexable (numpy arrays in practice); outputs are written in place.
"""
import math

HIGH_GAIN = 0
CHAIN_LINEAR = 1
CHAIN_NONLINEAR = 2
HYBRID = 3

EULER = 0
RK4 = 1

KNOWN_BOUND = 0
ESTIMATED = 1

DELAYED = 0
FILTERED = 1


def _sig(y, alpha):
    if y > 0.0:
        return math.pow(y, alpha)
    if y < 0.0:
        return -math.pow(-y, alpha)
    return 0.0


def _switch(s, width):
    if width > 0.0:
        r = s / width
        if r > 1.0:
            return 1.0
        if r < -1.0:
            return -1.0
        return r
    if s > 0.0:
        return 1.0
    if s < 0.0:
        return -1.0
    return 0.0


def _est_rhs(variant, n, a, b, alpha, epow, hg, inv_epsn, x, off, v, out, ooff):
    """Estimator vector field; state read from x[off:off+n], written to out[ooff:]."""
    if variant == HIGH_GAIN:
        e = x[off] - v
        for i in range(n - 1):
            out[ooff + i] = x[off + i + 1] - hg[i] * e
        out[ooff + n - 1] = -hg[n - 1] * e
        return
    for i in range(n - 1):
        out[ooff + i] = x[off + i + 1]
    e = x[off] - v
    acc = 0.0
    if variant == CHAIN_LINEAR or variant == HYBRID:
        acc = a[0] * e
        for i in range(1, n):
            acc += a[i] * (epow[i] * x[off + i])
    if variant == CHAIN_NONLINEAR or variant == HYBRID:
        g = a if variant == CHAIN_NONLINEAR else b
        nl = g[0] * _sig(e, alpha[0])
        for i in range(1, n):
            nl += g[i] * _sig(epow[i] * x[off + i], alpha[i])
        acc += nl
    out[ooff + n - 1] = -inv_epsn * acc


def estimator_rhs(variant, a, b, alpha, epow, hg, inv_epsn, x, v, out):
    _est_rhs(variant, len(x), a, b, alpha, epow, hg, inv_epsn, x, 0, v, out, 0)


def integrate_estimator(variant, a, b, alpha, epow, hg, inv_epsn,
                        x0, meas, h, nsteps, stride, method, rec):
    """Fixed-step integration with the measurement held over each step.

    Returns -1 on success, otherwise the step index at which the state
    first became non-finite.
    """
    n = len(x0)
    y = [float(v) for v in x0]
    k1 = [0.0] * n
    k2 = [0.0] * n
    k3 = [0.0] * n
    k4 = [0.0] * n
    tmp = [0.0] * n
    r = 0
    half = 0.5 * h
    for k in range(nsteps + 1):
        if k % stride == 0:
            for i in range(n):
                rec[r, i] = y[i]
            r += 1
        if k == nsteps:
            break
        v = meas[k]
        _est_rhs(variant, n, a, b, alpha, epow, hg, inv_epsn, y, 0, v, k1, 0)
        if method == EULER:
            for i in range(n):
                y[i] = y[i] + h * k1[i]
        else:
            for i in range(n):
                tmp[i] = y[i] + half * k1[i]
            _est_rhs(variant, n, a, b, alpha, epow, hg, inv_epsn, tmp, 0, v, k2, 0)
            for i in range(n):
                tmp[i] = y[i] + half * k2[i]
            _est_rhs(variant, n, a, b, alpha, epow, hg, inv_epsn, tmp, 0, v, k3, 0)
            for i in range(n):
                tmp[i] = y[i] + h * k3[i]
            _est_rhs(variant, n, a, b, alpha, epow, hg, inv_epsn, tmp, 0, v, k4, 0)
            for i in range(n):
                y[i] = y[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
        for i in range(n):
            if not math.isfinite(y[i]):
                return k + 1
    return -1


def _loop_rhs(n, comp, pb, damping, g, u, variant, a, b, alpha, epow, hg,
              inv_epsn, y, meas, out):
    out[0] = y[1]
    out[1] = (-damping * y[1] + g) + pb * u
    _est_rhs(variant, n, a, b, alpha, epow, hg, inv_epsn, y, 2, meas, out, 2)
    if comp == FILTERED:
        _est_rhs(CHAIN_LINEAR, n, a, b, alpha, epow, hg, inv_epsn, y, 2 + n,
                 pb * u, out, 2 + n)


def integrate_closed_loop(pb, damping, g_half, k_u, l, mode, width, s_from_meas,
                          comp, ref, ref_d, ref_dd, delta,
                          variant, a, b, alpha, epow, hg, inv_epsn,
                          y0, u0, h, nsteps, stride, method, rec):
    """Plant, estimator and sliding-mode controller advanced together.

    State layout is theta, omega, x_1..x_n and, when ``comp == FILTERED``,
    n more states of a linear integral-chain filter driven by ``b*u`` whose
    first state is the control contribution seen through the estimator.
    ``g_half`` holds the time-only part of the uncertainty on the half-step
    grid (length ``2*nsteps + 1``). ``rec`` rows receive the state followed
    by f, f_hat, u, s.
    """
    m = len(y0)
    n = m - 2 if comp == DELAYED else (m - 2) // 2
    y = [float(v) for v in y0]
    k1 = [0.0] * m
    k2 = [0.0] * m
    k3 = [0.0] * m
    k4 = [0.0] * m
    tmp = [0.0] * m
    u_prev = u0
    r = 0
    half = 0.5 * h
    for k in range(nsteps + 1):
        meas = y[0] + delta[k]
        if n < 3:
            f_hat = 0.0
        elif comp == FILTERED:
            f_hat = y[4] - y[2 + n]
        else:
            f_hat = y[4] - pb * u_prev
        if mode == ESTIMATED:
            pos = meas if s_from_meas else y[2]
            e1 = pos - ref[k]
            e2 = y[3] - ref_d[k]
            s = e2 + k_u * e1
            u = (-k_u * e2 + ref_dd[k] - l * _switch(s, width) - f_hat) / pb
        else:
            e1 = y[0] - ref[k]
            e2 = y[1] - ref_d[k]
            s = e2 + k_u * e1
            u = (-k_u * e2 + ref_dd[k] - l * _switch(s, width)) / pb
        if k % stride == 0:
            for i in range(m):
                rec[r, i] = y[i]
            rec[r, m] = -damping * y[1] + g_half[2 * k]
            rec[r, m + 1] = f_hat
            rec[r, m + 2] = u
            rec[r, m + 3] = s
            r += 1
        if k == nsteps:
            break
        _loop_rhs(n, comp, pb, damping, g_half[2 * k], u, variant, a, b, alpha,
                  epow, hg, inv_epsn, y, meas, k1)
        if method == EULER:
            for i in range(m):
                y[i] = y[i] + h * k1[i]
        else:
            for i in range(m):
                tmp[i] = y[i] + half * k1[i]
            _loop_rhs(n, comp, pb, damping, g_half[2 * k + 1], u, variant, a, b,
                      alpha, epow, hg, inv_epsn, tmp, meas, k2)
            for i in range(m):
                tmp[i] = y[i] + half * k2[i]
            _loop_rhs(n, comp, pb, damping, g_half[2 * k + 1], u, variant, a, b,
                      alpha, epow, hg, inv_epsn, tmp, meas, k3)
            for i in range(m):
                tmp[i] = y[i] + h * k3[i]
            _loop_rhs(n, comp, pb, damping, g_half[2 * k + 2], u, variant, a, b,
                      alpha, epow, hg, inv_epsn, tmp, meas, k4)
            for i in range(m):
                y[i] = y[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
        for i in range(m):
            if not math.isfinite(y[i]):
                return k + 1
        u_prev = u
    return -1
