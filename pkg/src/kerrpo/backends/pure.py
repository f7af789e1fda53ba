"""NumPy fallback for the hot kernels.

Implements exactly the same operations as the compiled extension
(``kerrpo.backends._kernels``): an embedded Dormand-Prince 5(4) stepper for
the interaction-picture Schrodinger equation with the pair-coupling pump
Hamiltonian, and the truncated double series of the autocorrelation
overlap.  The stepper logic (initial step choice, error norm, step-size
controller, output clipping) is kept equivalent to the compiled version so
the two backends are interchangeable and benchmarkable against each other.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_STEP_UNDERFLOW = 2

# Dormand-Prince 5(4) tableau; row 7 of A holds the 5th-order weights b,
# so stage 7 is evaluated at the accepted solution (FSAL).  E = b - b_hat.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_SAFETY = 0.9


def _coupling_g(t, omega0, kappa):
    c = np.cos(2.0 * omega0 * t)
    return omega0 * kappa * c * (1.0 + kappa * c)


def _hamiltonian_arrays(n_basis, omega0, chi):
    n = np.arange(n_basis, dtype=float)
    s = np.zeros(n_basis)
    s[: n_basis - 2] = np.sqrt((n[: n_basis - 2] + 1.0) * (n[: n_basis - 2] + 2.0))
    w = 2.0 * (omega0 + 2.0 * chi * (1.0 + n))
    d = 2.0 * n + 1.0
    return s, w, d


def apply_hi(psi, t, omega0, kappa, chi):
    """Apply the exact interaction-picture Hamiltonian H_I(t) to a state."""
    psi = np.asarray(psi, dtype=np.complex128)
    n_basis = psi.shape[0]
    s, w, d = _hamiltonian_arrays(n_basis, omega0, chi)
    g = _coupling_g(t, omega0, kappa)
    m = n_basis - 2
    phase = np.exp(-1j * w[:m] * t)
    out = d * psi
    out[:m] += phase * s[:m] * psi[2:]
    out[2:] += np.conj(phase) * s[:m] * psi[:m]
    return g * out


def _rms(x):
    return float(np.sqrt(np.mean(np.abs(x) ** 2)))


def _initial_step(rhs, t0, y0, f0, t_span, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_span)
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t_span)


def propagate_pump_kerr(psi0, t_out, omega0, kappa, chi, rtol, atol, max_steps=20_000_000):
    """Integrate i dpsi/dt = H_I(t) psi, sampling at the times ``t_out``.

    ``t_out`` must be strictly increasing with ``psi0`` given at ``t_out[0]``.
    Steps are clipped so every output time is hit exactly; the step-size
    proposal survives clipping so dense output grids cost no accuracy.

    Returns
    -------
    (states, drift, n_accepted, n_rejected, status)
        ``states`` has shape (len(t_out), len(psi0)); ``drift`` is the
        largest deviation of the state norm from 1 seen at any accepted
        step; ``status`` is one of the STATUS_* codes.  On a non-zero
        status the tail rows of ``states`` are unfilled.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    t_out = np.asarray(t_out, dtype=float)
    n_basis = psi0.shape[0]
    n_out = t_out.shape[0]
    s, w, d = _hamiltonian_arrays(n_basis, omega0, chi)
    m = n_basis - 2

    def rhs(t, y):
        phase = np.exp(-1j * w[:m] * t)
        out = d * y
        out[:m] += phase * s[:m] * y[2:]
        out[2:] += np.conj(phase) * s[:m] * y[:m]
        return -1j * _coupling_g(t, omega0, kappa) * out

    states = np.empty((n_out, n_basis), dtype=np.complex128)
    states[0] = psi0
    drift = abs(float(np.linalg.norm(psi0)) - 1.0)
    if n_out == 1:
        return states, drift, 0, 0, STATUS_OK

    t = float(t_out[0])
    y = psi0.copy()
    f = rhs(t, y)
    h_prop = _initial_step(rhs, t, y, f, float(t_out[-1]) - t, rtol, atol)

    k = np.empty((7, n_basis), dtype=np.complex128)
    i_out = 1
    n_accepted = 0
    n_rejected = 0
    rejected_last = False

    while i_out < n_out:
        if n_accepted + n_rejected >= max_steps:
            return states, drift, n_accepted, n_rejected, STATUS_MAX_STEPS
        if h_prop < 1e-14 * max(1.0, abs(t)):
            return states, drift, n_accepted, n_rejected, STATUS_STEP_UNDERFLOW
        h = min(h_prop, t_out[i_out] - t)
        clipped = h < h_prop

        k[0] = f
        for i in range(1, 7):
            y_stage = y + h * (_A[i] @ k[:i])
            k[i] = rhs(t + _C[i] * h, y_stage)
        y_new = y_stage  # stage 7 input is the 5th-order solution (FSAL)
        f_new = k[6]

        err = h * (_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = _rms(err / scale)

        if err_norm <= 1.0:
            t = t + h
            y = y_new
            f = f_new
            n_accepted += 1
            drift = max(drift, abs(float(np.linalg.norm(y)) - 1.0))
            while i_out < n_out and t >= t_out[i_out] - 1e-12 * max(1.0, abs(t)):
                states[i_out] = y
                i_out += 1
            if not clipped:
                factor = _MAX_FACTOR if err_norm == 0.0 else min(
                    _MAX_FACTOR, _SAFETY * err_norm ** -0.2
                )
                if rejected_last:
                    factor = min(1.0, factor)
                h_prop = h * factor
            rejected_last = False
        else:
            n_rejected += 1
            h_prop = h * max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2)
            rejected_last = True

    return states, drift, n_accepted, n_rejected, STATUS_OK


def autocorr_sum(a_term, b_term, kerr_phase, n_k, n_l):
    """Truncated double series sum_{k<n_k, l<n_l} A^k/k! B^l/l! e^{-i c (k+2l)^2}.

    ``kerr_phase`` is the scalar c = chi*t multiplying the squared index.
    """
    ks = np.arange(n_k)
    ls = np.arange(n_l)
    pk = np.ones(n_k, dtype=np.complex128)
    if n_k > 1:
        np.cumprod(a_term / ks[1:], out=pk[1:])
    pl = np.ones(n_l, dtype=np.complex128)
    if n_l > 1:
        np.cumprod(b_term / ls[1:], out=pl[1:])
    idx = ks[:, None] + 2 * ls[None, :]
    phases = np.exp(-1j * kerr_phase * idx.astype(float) ** 2)
    return complex(np.sum(pk[:, None] * pl[None, :] * phases))
