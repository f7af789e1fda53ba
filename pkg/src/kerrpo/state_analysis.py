"""Observables of the evolved coherent state.

The time-evolution operator factorises into the diagonal Kerr-oscillator
part and an ordered product of squeeze-algebra exponentials with
coefficients ``(a1, a2, a3, a4)`` (see :mod:`kerrpo.wei_norman`).  Acting on
a coherent state ``|z>`` this yields closed series expressions for the Fock
amplitudes, the photon-number distribution and the autocorrelation overlap
``F(t) = <psi(0)|psi(t)>``, all evaluated here.  Factorials are accumulated
in log space; direct factorials overflow beyond n ~ 170.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import backends
from .errors import DomainError, SeriesDivergence, TruncationTooSmall
from .params import ModelParams
from .wei_norman import WNState, WNTrajectory

__all__ = [
    "FockVector",
    "Distribution",
    "TimeSeries",
    "evolved_coefficients",
    "probability_k",
    "number_distribution",
    "autocorrelation",
    "autocorrelation_series",
    "autocorrelation_chi0",
    "reference_coherent_autocorr",
    "revival_time",
    "detect_revivals",
    "abs2_series",
]

DEFAULT_TAIL_TOL = 1e-12     # tail probability left outside the Fock cutoff
DEFAULT_SERIES_TOL = 1e-14   # term-magnitude cutoff of the overlap series
MAX_BASIS = 4096
MAX_SERIES_TERMS = 100_000
SERIES_MARGIN = 10           # extra terms kept past the cutoff bound


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes over the truncated number basis |0> .. |N-1>."""

    amplitudes: np.ndarray
    basis_size: int

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class Distribution:
    """Photon-number probabilities P_0 .. P_{N-1} at one time."""

    probabilities: np.ndarray
    time: float

    def mean(self) -> float:
        return float(np.sum(np.arange(len(self.probabilities)) * self.probabilities))

    def argmax(self) -> int:
        return int(np.argmax(self.probabilities))

    def total(self) -> float:
        return float(np.sum(self.probabilities))


@dataclass(frozen=True)
class TimeSeries:
    """Sampled observable over a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def abs2_series(series: TimeSeries) -> TimeSeries:
    """|F(t)|^2 of a complex overlap series."""
    return TimeSeries(series.times, np.abs(series.values) ** 2)


def _log_complex(z: complex) -> complex:
    # principal log with -inf magnitude for zero; callers mask those terms
    if z == 0:
        return complex("-inf")
    return math.log(abs(z)) + 1j * cmath.phase(z)


def _squeeze_sum(n: int, log_a1: complex, log_w: complex, a1_zero: bool, w_zero: bool) -> complex:
    """Inner sum over pair insertions for Fock level n, in log space.

    sum_m sqrt(n!) a1^m w^(n-2m) / (m! (n-2m)!)  with w = z*exp(a2).
    """
    acc = 0j
    half_lgn = 0.5 * math.lgamma(n + 1)
    for m in range(n // 2 + 1):
        rem = n - 2 * m
        if m > 0 and a1_zero:
            break
        if rem > 0 and w_zero:
            continue
        log_term = half_lgn - math.lgamma(m + 1) - math.lgamma(rem + 1)
        if m > 0:
            log_term += m * log_a1
        if rem > 0:
            log_term += rem * log_w
        acc += cmath.exp(log_term)
    return acc


def _check_squeeze(s: WNState):
    if abs(s.a1) >= 0.5:
        raise SeriesDivergence(
            f"Fock expansion diverges: |a1| = {abs(s.a1):.6f} >= 0.5"
        )


def _coefficients_fixed(p: ModelParams, s: WNState, t: float, n_basis: int) -> np.ndarray:
    z = p.z
    prefactor = cmath.exp(
        -1j * p.omega0 * t / 2 + s.a4 + z * z * s.a3 - abs(z) ** 2 / 2
    )
    w = z * cmath.exp(s.a2)
    log_a1 = _log_complex(s.a1)
    log_w = _log_complex(w)
    a1_zero = s.a1 == 0
    w_zero = w == 0
    out = np.empty(n_basis, dtype=np.complex128)
    for n in range(n_basis):
        inner = _squeeze_sum(n, log_a1, log_w, a1_zero, w_zero)
        out[n] = (
            prefactor
            * cmath.exp(-1j * p.chi * t * n * n)
            * cmath.exp(-1j * p.omega0 * t * n)
            * inner
        )
    return out


def evolved_coefficients(
    p: ModelParams,
    s: WNState,
    t: float,
    n_basis: int | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> FockVector:
    """Fock amplitudes of the evolved state at time ``t``.

    With ``n_basis=None`` the cutoff starts at ``ceil(|z|^2 + 8|z| + 20)``
    and doubles until the probability added by the last doubling falls
    below ``tail_tol``.  An explicit ``n_basis`` is honoured but validated
    against the same tail bound.

    Raises
    ------
    SeriesDivergence
        If ``|a1| >= 1/2`` (squeeze expansion no longer summable).
    TruncationTooSmall
        If the requested or maximum basis leaves more than ``tail_tol``
        in the tail.
    """
    _check_squeeze(s)
    if n_basis is not None:
        if n_basis < 1:
            raise ValueError("n_basis must be positive")
        coeffs = _coefficients_fixed(p, s, t, 2 * n_basis)
        tail = float(np.sum(np.abs(coeffs[n_basis:]) ** 2))
        if tail >= tail_tol:
            raise TruncationTooSmall(
                f"tail probability {tail:.3e} beyond N={n_basis} exceeds {tail_tol:.3e}"
            )
        return FockVector(coeffs[:n_basis], n_basis)

    n = int(math.ceil(abs(p.z) ** 2 + 8 * abs(p.z) + 20))
    while True:
        if 2 * n > MAX_BASIS:
            raise TruncationTooSmall(
                f"basis cap {MAX_BASIS} reached with tail above {tail_tol:.3e}"
            )
        doubled = _coefficients_fixed(p, s, t, 2 * n)
        appended = float(np.sum(np.abs(doubled[n:]) ** 2))
        if appended < tail_tol:
            return FockVector(doubled, 2 * n)
        n *= 2


def probability_k(k: int, p: ModelParams, s: WNState, t: float) -> float:
    """Probability of the k-th number state in the evolved distribution.

    Independent evaluation of the modulus-squared amplitude (the pure
    oscillator and Kerr phases cancel); agrees with
    ``|evolved_coefficients(...)[k]|^2`` to rounding.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _check_squeeze(s)
    z = p.z
    # |N_alpha|^2, the phase-free part of the prefactor
    mod2 = math.exp(2 * s.a4.real + 2 * (z * z * s.a3).real - abs(z) ** 2)
    w = z * cmath.exp(s.a2)
    inner = _squeeze_sum(
        k, _log_complex(s.a1), _log_complex(w), s.a1 == 0, w == 0
    )
    return mod2 * abs(inner) ** 2


def number_distribution(
    p: ModelParams,
    s: WNState,
    t: float,
    n_basis: int | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> Distribution:
    """Photon-number distribution P_k at time ``t`` (adaptive cutoff by default)."""
    vec = evolved_coefficients(p, s, t, n_basis=n_basis, tail_tol=tail_tol)
    return Distribution(np.abs(vec.amplitudes) ** 2, t)


def _series_cutoff(x: float, tol: float, max_terms: int) -> int:
    """Smallest K past the term-magnitude peak with x^K/K! < tol, plus margin."""
    if x == 0.0:
        return 1
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= x / k
        if k > x and term < tol:
            return k + SERIES_MARGIN
        if k >= max_terms:
            raise TruncationTooSmall(
                f"series bound {tol:.1e} not reached within {max_terms} terms"
            )


def autocorrelation(
    p: ModelParams,
    s: WNState,
    t: float,
    series_tol: float = DEFAULT_SERIES_TOL,
    max_terms: int = MAX_SERIES_TERMS,
    backend=None,
) -> complex:
    """Overlap F(t) = <psi(0)|psi(t)> from the truncated double series.

    Truncation keeps all terms until the bounding magnitude
    ``|A|^k/k! * |B|^l/l!`` drops below ``series_tol``, plus a safety
    margin of ten terms on each index.
    """
    if series_tol <= 0:
        raise ValueError("series_tol must be positive")
    kern = backends.get_backend() if backend is None else backend
    z = p.z
    a_term = abs(z) ** 2 * cmath.exp(s.a2 - 1j * p.omega0 * t)
    b_term = z.conjugate() ** 2 * s.a1 * cmath.exp(-2j * p.omega0 * t)
    prefactor = cmath.exp(
        -1j * p.omega0 * t / 2 + s.a4 + z * z * s.a3 - abs(z) ** 2
    )
    n_k = _series_cutoff(abs(a_term), series_tol, max_terms)
    n_l = _series_cutoff(abs(b_term), series_tol, max_terms)
    return prefactor * kern.autocorr_sum(a_term, b_term, p.chi * t, n_k, n_l)


def autocorrelation_series(
    p: ModelParams,
    traj: WNTrajectory,
    series_tol: float = DEFAULT_SERIES_TOL,
    backend=None,
) -> TimeSeries:
    """Complex F(t) sampled on a coefficient trajectory's grid."""
    kern = backends.get_backend() if backend is None else backend
    values = np.empty(len(traj.times), dtype=np.complex128)
    for i, (t, s) in enumerate(zip(traj.times, traj.states)):
        values[i] = autocorrelation(p, s, float(t), series_tol=series_tol, backend=kern)
    return TimeSeries(np.asarray(traj.times, dtype=float), values)


def autocorrelation_chi0(p: ModelParams, s: WNState, t: float) -> complex:
    """Closed exponential form of F(t), valid only when the Kerr term vanishes."""
    if p.chi != 0:
        raise DomainError(f"closed form requires chi = 0, got chi = {p.chi}")
    z = p.z
    return cmath.exp(
        -1j * p.omega0 * t / 2
        + s.a4
        + z * z * s.a3
        - abs(z) ** 2
        + z.conjugate() ** 2 * s.a1 * cmath.exp(-2j * p.omega0 * t)
        + abs(z) ** 2 * cmath.exp(s.a2 - 1j * p.omega0 * t)
    )


def reference_coherent_autocorr(z: complex, omega0: float, t) -> complex:
    """F(t) of a freely rotating coherent state |z e^{-i omega0 t}>.

    ``|F|^2 = exp(-2|z|^2 (1 - cos(omega0 t)))``; the reference curve of the
    autocorrelation plots.
    """
    z = complex(z)
    return np.exp(-1j * omega0 * t / 2) * np.exp(
        abs(z) ** 2 * (np.exp(-1j * omega0 * np.asarray(t, dtype=float)) - 1.0)
    )


def revival_time(p: ModelParams) -> float:
    """Complete-revival period 2*pi/chi of the quadratic (Kerr) spectrum.

    The level spacing curvature of E(n) = omega0*(n + 1/2) + chi*n^2 is
    2*chi, giving T_rev = 4*pi/|E''| = 2*pi/chi.
    """
    if p.chi == 0:
        raise DomainError("revival time undefined for chi = 0 (linear spectrum)")
    return 2.0 * math.pi / p.chi


def detect_revivals(series: TimeSeries, threshold: float = 0.5) -> list[tuple[float, float]]:
    """Local maxima of a real |F|^2 series above ``threshold``.

    Interior peaks are refined by a parabola through the three bracketing
    samples.  The first sample (the trivial t=0 overlap) is never reported;
    a rising final sample is reported unrefined so a revival sitting on the
    grid end is not lost.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    t = np.asarray(series.times, dtype=float)
    v = np.asarray(series.values, dtype=float)
    peaks: list[tuple[float, float]] = []
    for i in range(1, len(v) - 1):
        if v[i] > v[i - 1] and v[i] >= v[i + 1] and v[i] > threshold:
            denom = v[i - 1] - 2.0 * v[i] + v[i + 1]
            if denom < 0:
                delta = 0.5 * (v[i - 1] - v[i + 1]) / denom
                dt_l = t[i] - t[i - 1]
                peaks.append(
                    (t[i] + delta * dt_l, v[i] - 0.25 * (v[i - 1] - v[i + 1]) * delta)
                )
            else:
                peaks.append((float(t[i]), float(v[i])))
    if len(v) >= 2 and v[-1] > v[-2] and v[-1] > threshold:
        peaks.append((float(t[-1]), float(v[-1])))
    return peaks
