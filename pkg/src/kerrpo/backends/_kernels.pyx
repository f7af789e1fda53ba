# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

C implementations of the operations in ``kerrpo.backends.pure``: the
Dormand-Prince 5(4) propagation of the interaction-picture Schrodinger
equation and the autocorrelation double series.  Semantics (stepper
constants, error norm, output clipping) match the pure backend exactly.
"""

import numpy as np

from libc.math cimport cos, sin, sqrt, fabs, pow

NAME = "compiled"

DEF ST_OK = 0
DEF ST_MAX_STEPS = 1
DEF ST_STEP_UNDERFLOW = 2

STATUS_OK = ST_OK
STATUS_MAX_STEPS = ST_MAX_STEPS
STATUS_STEP_UNDERFLOW = ST_STEP_UNDERFLOW

DEF MIN_FACTOR = 0.2
DEF MAX_FACTOR = 10.0
DEF SAFETY = 0.9


cdef inline double _g(double t, double omega0, double kappa) noexcept nogil:
    cdef double c = cos(2.0 * omega0 * t)
    return omega0 * kappa * c * (1.0 + kappa * c)


cdef void _rhs(double t, double complex[::1] y, double complex[::1] out,
               double[::1] s, double[::1] w, double[::1] d,
               double omega0, double kappa, Py_ssize_t n) noexcept nogil:
    """out = -i H_I(t) y for the pair-coupling pump Hamiltonian."""
    cdef Py_ssize_t i
    cdef double g = _g(t, omega0, kappa)
    cdef double th, c, sn
    for i in range(n):
        out[i] = d[i] * y[i]
    for i in range(n - 2):
        th = w[i] * t
        c = cos(th)
        sn = sin(th)
        out[i] = out[i] + (c - 1j * sn) * s[i] * y[i + 2]
        out[i + 2] = out[i + 2] + (c + 1j * sn) * s[i] * y[i]
    for i in range(n):
        out[i] = -1j * g * out[i]


cdef inline double _norm(double complex[::1] y, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(n):
        acc += y[i].real * y[i].real + y[i].imag * y[i].imag
    return sqrt(acc)


cdef inline double _cabs(double complex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def _build_arrays(Py_ssize_t n_basis, double omega0, double chi):
    n = np.arange(n_basis, dtype=float)
    s = np.zeros(n_basis)
    s[:n_basis - 2] = np.sqrt((n[:n_basis - 2] + 1.0) * (n[:n_basis - 2] + 2.0))
    w = 2.0 * (omega0 + 2.0 * chi * (1.0 + n))
    d = 2.0 * n + 1.0
    return s, w, d


def apply_hi(psi, double t, double omega0, double kappa, double chi):
    """Apply the exact interaction-picture Hamiltonian H_I(t) to a state."""
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef Py_ssize_t n = psi.shape[0]
    s_np, w_np, d_np = _build_arrays(n, omega0, chi)
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] yv = psi
    cdef double complex[::1] ov = out
    cdef double[::1] sv = s_np
    cdef double[::1] wv = w_np
    cdef double[::1] dv = d_np
    cdef Py_ssize_t i
    with nogil:
        _rhs(t, yv, ov, sv, wv, dv, omega0, kappa, n)
        # undo the -i factor so the result is H psi itself
        for i in range(n):
            ov[i] = 1j * ov[i]
    return out


def propagate_pump_kerr(psi0, t_out, double omega0, double kappa, double chi,
                        double rtol, double atol, long max_steps=20_000_000):
    """Integrate i dpsi/dt = H_I(t) psi, sampling at the times ``t_out``.

    Same contract as ``kerrpo.backends.pure.propagate_pump_kerr``.
    """
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    t_np = np.ascontiguousarray(t_out, dtype=float)
    cdef Py_ssize_t n = psi0.shape[0]
    cdef Py_ssize_t n_out = t_np.shape[0]
    s_np, w_np, d_np = _build_arrays(n, omega0, chi)

    states = np.empty((n_out, n), dtype=np.complex128)
    states[0] = psi0

    cdef double complex[:, ::1] out_v = states
    cdef double[::1] t_v = t_np
    cdef double[::1] sv = s_np
    cdef double[::1] wv = w_np
    cdef double[::1] dv = d_np

    y_np = psi0.copy()
    k_np = np.empty((7, n), dtype=np.complex128)
    ystage_np = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] y = y_np
    cdef double complex[:, ::1] k = k_np
    cdef double complex[::1] ys = ystage_np

    cdef double drift = fabs(_norm(y, n) - 1.0)
    cdef long n_accepted = 0, n_rejected = 0
    if n_out == 1:
        return states, drift, n_accepted, n_rejected, STATUS_OK

    cdef double t = t_v[0]
    cdef double t_end = t_v[n_out - 1]
    cdef Py_ssize_t i_out = 1
    cdef bint rejected_last = False
    cdef bint clipped
    cdef Py_ssize_t i
    cdef double h, h_prop, err_norm, sc, e2, factor, d0, d1, d2, h0, h1
    cdef double complex ei
    cdef int status = ST_OK

    with nogil:
        # --- initial step selection (same heuristic as the pure backend) ---
        _rhs(t, y, k[0], sv, wv, dv, omega0, kappa, n)
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = atol + rtol * _cabs(y[i])
            d0 += (_cabs(y[i]) / sc) ** 2
            d1 += (_cabs(k[0, i]) / sc) ** 2
        d0 = sqrt(d0 / n)
        d1 = sqrt(d1 / n)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        if h0 > t_end - t:
            h0 = t_end - t
        for i in range(n):
            ys[i] = y[i] + h0 * k[0, i]
        _rhs(t + h0, ys, k[1], sv, wv, dv, omega0, kappa, n)
        d2 = 0.0
        for i in range(n):
            sc = atol + rtol * _cabs(y[i])
            d2 += (_cabs(k[1, i] - k[0, i]) / sc) ** 2
        d2 = sqrt(d2 / n) / h0
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = 1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3
        else:
            h1 = pow(0.01 / (d1 if d1 > d2 else d2), 0.2)
        h_prop = 100.0 * h0
        if h1 < h_prop:
            h_prop = h1
        if t_end - t < h_prop:
            h_prop = t_end - t

        # --- main loop; k[0] always holds f(t, y) (FSAL) ---
        while i_out < n_out:
            if n_accepted + n_rejected >= max_steps:
                status = ST_MAX_STEPS
                break
            if h_prop < 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                status = ST_STEP_UNDERFLOW
                break
            h = h_prop
            clipped = False
            if t_v[i_out] - t < h:
                h = t_v[i_out] - t
                clipped = True

            for i in range(n):
                ys[i] = y[i] + h * (0.2 * k[0, i])
            _rhs(t + h / 5.0, ys, k[1], sv, wv, dv, omega0, kappa, n)
            for i in range(n):
                ys[i] = y[i] + h * (3.0 / 40.0 * k[0, i] + 9.0 / 40.0 * k[1, i])
            _rhs(t + 3.0 * h / 10.0, ys, k[2], sv, wv, dv, omega0, kappa, n)
            for i in range(n):
                ys[i] = y[i] + h * (44.0 / 45.0 * k[0, i] - 56.0 / 15.0 * k[1, i]
                                    + 32.0 / 9.0 * k[2, i])
            _rhs(t + 4.0 * h / 5.0, ys, k[3], sv, wv, dv, omega0, kappa, n)
            for i in range(n):
                ys[i] = y[i] + h * (19372.0 / 6561.0 * k[0, i] - 25360.0 / 2187.0 * k[1, i]
                                    + 64448.0 / 6561.0 * k[2, i] - 212.0 / 729.0 * k[3, i])
            _rhs(t + 8.0 * h / 9.0, ys, k[4], sv, wv, dv, omega0, kappa, n)
            for i in range(n):
                ys[i] = y[i] + h * (9017.0 / 3168.0 * k[0, i] - 355.0 / 33.0 * k[1, i]
                                    + 46732.0 / 5247.0 * k[2, i] + 49.0 / 176.0 * k[3, i]
                                    - 5103.0 / 18656.0 * k[4, i])
            _rhs(t + h, ys, k[5], sv, wv, dv, omega0, kappa, n)
            # 5th-order solution, written into ys
            for i in range(n):
                ys[i] = y[i] + h * (35.0 / 384.0 * k[0, i] + 500.0 / 1113.0 * k[2, i]
                                    + 125.0 / 192.0 * k[3, i] - 2187.0 / 6784.0 * k[4, i]
                                    + 11.0 / 84.0 * k[5, i])
            _rhs(t + h, ys, k[6], sv, wv, dv, omega0, kappa, n)

            err_norm = 0.0
            for i in range(n):
                ei = h * (71.0 / 57600.0 * k[0, i] - 71.0 / 16695.0 * k[2, i]
                          + 71.0 / 1920.0 * k[3, i] - 17253.0 / 339200.0 * k[4, i]
                          + 22.0 / 525.0 * k[5, i] - 1.0 / 40.0 * k[6, i])
                e2 = _cabs(y[i])
                sc = _cabs(ys[i])
                if e2 > sc:
                    sc = e2
                sc = atol + rtol * sc
                err_norm += (_cabs(ei) / sc) ** 2
            err_norm = sqrt(err_norm / n)

            if err_norm <= 1.0:
                t = t + h
                for i in range(n):
                    y[i] = ys[i]
                    k[0, i] = k[6, i]
                n_accepted += 1
                e2 = fabs(_norm(y, n) - 1.0)
                if e2 > drift:
                    drift = e2
                while i_out < n_out and t >= t_v[i_out] - 1e-12 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                    for i in range(n):
                        out_v[i_out, i] = y[i]
                    i_out += 1
                if not clipped:
                    if err_norm == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = SAFETY * pow(err_norm, -0.2)
                        if factor > MAX_FACTOR:
                            factor = MAX_FACTOR
                    if rejected_last and factor > 1.0:
                        factor = 1.0
                    h_prop = h * factor
                rejected_last = False
            else:
                n_rejected += 1
                factor = SAFETY * pow(err_norm, -0.2)
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                h_prop = h * factor
                rejected_last = True

    return states, drift, n_accepted, n_rejected, status


def autocorr_sum(double complex a_term, double complex b_term, double kerr_phase,
                 Py_ssize_t n_k, Py_ssize_t n_l):
    """Truncated double series sum_{k<n_k, l<n_l} A^k/k! B^l/l! e^{-i c (k+2l)^2}."""
    cdef double complex pk = 1.0, pl, total = 0.0
    cdef Py_ssize_t ik, il
    cdef double idx, th
    with nogil:
        for ik in range(n_k):
            if ik > 0:
                pk = pk * a_term / ik
            pl = 1.0
            for il in range(n_l):
                if il > 0:
                    pl = pl * b_term / il
                idx = <double> (ik + 2 * il)
                th = kerr_phase * idx * idx
                total = total + pk * pl * (cos(th) - 1j * sin(th))
    return complex(total)
