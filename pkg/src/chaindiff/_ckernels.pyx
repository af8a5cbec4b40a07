# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernels; see ``_pykernels`` for the reference version."""
from libc.math cimport pow, isfinite
from libc.stdlib cimport malloc, free

cdef enum:
    HIGH_GAIN = 0
    CHAIN_LINEAR = 1
    CHAIN_NONLINEAR = 2
    HYBRID = 3

cdef enum:
    EULER = 0
    RK4 = 1

cdef enum:
    KNOWN_BOUND = 0
    ESTIMATED = 1

cdef enum:
    DELAYED = 0
    FILTERED = 1


cdef inline double _sig(double y, double alpha) noexcept nogil:
    if y > 0.0:
        return pow(y, alpha)
    if y < 0.0:
        return -pow(-y, alpha)
    return 0.0


cdef inline double _switch(double s, double width) noexcept nogil:
    cdef double r
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


cdef void _est_rhs(int variant, Py_ssize_t n, const double* a, const double* b,
                   const double* alpha, const double* epow, const double* hg,
                   double inv_epsn, const double* x, double v,
                   double* out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double e = x[0] - v
    cdef double acc = 0.0
    cdef double nl
    cdef const double* g
    if variant == HIGH_GAIN:
        for i in range(n - 1):
            out[i] = x[i + 1] - hg[i] * e
        out[n - 1] = -hg[n - 1] * e
        return
    for i in range(n - 1):
        out[i] = x[i + 1]
    if variant == CHAIN_LINEAR or variant == HYBRID:
        acc = a[0] * e
        for i in range(1, n):
            acc += a[i] * (epow[i] * x[i])
    if variant == CHAIN_NONLINEAR or variant == HYBRID:
        g = a if variant == CHAIN_NONLINEAR else b
        nl = g[0] * _sig(e, alpha[0])
        for i in range(1, n):
            nl += g[i] * _sig(epow[i] * x[i], alpha[i])
        acc += nl
    out[n - 1] = -inv_epsn * acc


def estimator_rhs(int variant, const double[::1] a, const double[::1] b,
                  const double[::1] alpha, const double[::1] epow,
                  const double[::1] hg, double inv_epsn, const double[::1] x,
                  double v, double[::1] out):
    _est_rhs(variant, x.shape[0], &a[0], &b[0], &alpha[0], &epow[0], &hg[0],
             inv_epsn, &x[0], v, &out[0])


def integrate_estimator(int variant, const double[::1] a, const double[::1] b,
                        const double[::1] alpha, const double[::1] epow,
                        const double[::1] hg, double inv_epsn,
                        const double[::1] x0, const double[::1] meas, double h,
                        Py_ssize_t nsteps, Py_ssize_t stride, int method,
                        double[:, ::1] rec):
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t i, k, r = 0
    cdef Py_ssize_t status = -1
    cdef double v
    cdef double half = 0.5 * h
    cdef double* buf = <double*> malloc(6 * n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* y = buf
    cdef double* k1 = buf + n
    cdef double* k2 = buf + 2 * n
    cdef double* k3 = buf + 3 * n
    cdef double* k4 = buf + 4 * n
    cdef double* tmp = buf + 5 * n
    cdef const double* pa = &a[0]
    cdef const double* pb = &b[0]
    cdef const double* pal = &alpha[0]
    cdef const double* pe = &epow[0]
    cdef const double* ph = &hg[0]
    try:
        for i in range(n):
            y[i] = x0[i]
        with nogil:
            for k in range(nsteps + 1):
                if k % stride == 0:
                    for i in range(n):
                        rec[r, i] = y[i]
                    r += 1
                if k == nsteps:
                    break
                v = meas[k]
                _est_rhs(variant, n, pa, pb, pal, pe, ph, inv_epsn, y, v, k1)
                if method == EULER:
                    for i in range(n):
                        y[i] = y[i] + h * k1[i]
                else:
                    for i in range(n):
                        tmp[i] = y[i] + half * k1[i]
                    _est_rhs(variant, n, pa, pb, pal, pe, ph, inv_epsn, tmp, v, k2)
                    for i in range(n):
                        tmp[i] = y[i] + half * k2[i]
                    _est_rhs(variant, n, pa, pb, pal, pe, ph, inv_epsn, tmp, v, k3)
                    for i in range(n):
                        tmp[i] = y[i] + h * k3[i]
                    _est_rhs(variant, n, pa, pb, pal, pe, ph, inv_epsn, tmp, v, k4)
                    for i in range(n):
                        y[i] = y[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
                for i in range(n):
                    if not isfinite(y[i]):
                        status = k + 1
                if status >= 0:
                    break
    finally:
        free(buf)
    return status


cdef inline void _loop_rhs(Py_ssize_t n, int comp, double pgain, double damping,
                           double g, double u, int variant, const double* a,
                           const double* b, const double* alpha,
                           const double* epow, const double* hg,
                           double inv_epsn, const double* y, double meas,
                           double* out) noexcept nogil:
    out[0] = y[1]
    out[1] = (-damping * y[1] + g) + pgain * u
    _est_rhs(variant, n, a, b, alpha, epow, hg, inv_epsn, y + 2, meas, out + 2)
    if comp == FILTERED:
        _est_rhs(CHAIN_LINEAR, n, a, b, alpha, epow, hg, inv_epsn, y + 2 + n,
                 pgain * u, out + 2 + n)


def integrate_closed_loop(double pgain, double damping, const double[::1] g_half,
                          double k_u, double l, int mode, double width,
                          bint s_from_meas, int comp, const double[::1] ref,
                          const double[::1] ref_d, const double[::1] ref_dd,
                          const double[::1] delta, int variant,
                          const double[::1] a, const double[::1] b,
                          const double[::1] alpha, const double[::1] epow,
                          const double[::1] hg, double inv_epsn,
                          const double[::1] y0, double u0, double h,
                          Py_ssize_t nsteps, Py_ssize_t stride, int method,
                          double[:, ::1] rec):
    cdef Py_ssize_t m = y0.shape[0]
    cdef Py_ssize_t n = m - 2 if comp == DELAYED else (m - 2) // 2
    cdef Py_ssize_t i, k, r = 0
    cdef Py_ssize_t status = -1
    cdef double meas, f_hat, pos, e1, e2, s, u
    cdef double u_prev = u0
    cdef double half = 0.5 * h
    cdef double* buf = <double*> malloc(6 * m * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* y = buf
    cdef double* k1 = buf + m
    cdef double* k2 = buf + 2 * m
    cdef double* k3 = buf + 3 * m
    cdef double* k4 = buf + 4 * m
    cdef double* tmp = buf + 5 * m
    cdef const double* pa = &a[0]
    cdef const double* pb = &b[0]
    cdef const double* pal = &alpha[0]
    cdef const double* pe = &epow[0]
    cdef const double* ph = &hg[0]
    try:
        for i in range(m):
            y[i] = y0[i]
        with nogil:
            for k in range(nsteps + 1):
                meas = y[0] + delta[k]
                if n < 3:
                    f_hat = 0.0
                elif comp == FILTERED:
                    f_hat = y[4] - y[2 + n]
                else:
                    f_hat = y[4] - pgain * u_prev
                if mode == ESTIMATED:
                    pos = meas if s_from_meas else y[2]
                    e1 = pos - ref[k]
                    e2 = y[3] - ref_d[k]
                    s = e2 + k_u * e1
                    u = (-k_u * e2 + ref_dd[k] - l * _switch(s, width) - f_hat) / pgain
                else:
                    e1 = y[0] - ref[k]
                    e2 = y[1] - ref_d[k]
                    s = e2 + k_u * e1
                    u = (-k_u * e2 + ref_dd[k] - l * _switch(s, width)) / pgain
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
                _loop_rhs(n, comp, pgain, damping, g_half[2 * k], u, variant, pa,
                          pb, pal, pe, ph, inv_epsn, y, meas, k1)
                if method == EULER:
                    for i in range(m):
                        y[i] = y[i] + h * k1[i]
                else:
                    for i in range(m):
                        tmp[i] = y[i] + half * k1[i]
                    _loop_rhs(n, comp, pgain, damping, g_half[2 * k + 1], u,
                              variant, pa, pb, pal, pe, ph, inv_epsn, tmp, meas, k2)
                    for i in range(m):
                        tmp[i] = y[i] + half * k2[i]
                    _loop_rhs(n, comp, pgain, damping, g_half[2 * k + 1], u,
                              variant, pa, pb, pal, pe, ph, inv_epsn, tmp, meas, k3)
                    for i in range(m):
                        tmp[i] = y[i] + h * k3[i]
                    _loop_rhs(n, comp, pgain, damping, g_half[2 * k + 2], u,
                              variant, pa, pb, pal, pe, ph, inv_epsn, tmp, meas, k4)
                    for i in range(m):
                        y[i] = y[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
                for i in range(m):
                    if not isfinite(y[i]):
                        status = k + 1
                if status >= 0:
                    break
                u_prev = u
    finally:
        free(buf)
    return status
