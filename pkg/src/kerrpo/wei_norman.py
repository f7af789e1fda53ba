"""Coefficient ODEs of the product-form propagator.

Writing the averaged interaction Hamiltonian on the ordered generators
``(adag^2, n, a^2, 1)``, the propagator factorises exactly into
``exp(a1 adag^2) exp(a2 n) exp(a3 a^2) exp(a4)`` with complex coefficients
obeying a closed nonlinear ODE system (the a1 equation is a Riccati
equation) and ``a_i(0) = 0``.  Unitarity of the exact flow pins three
relations among the coefficients,

    exp(2 Re a2) + 4|a1|^2 = 1,    |a1| = |a3|,    2 Re a4 = Re a2,

which are monitored along every trajectory as the integration's primary
correctness check.  ``|a1|`` equals ``tanh(r)/2`` for squeeze parameter r
and must stay strictly below 1/2 for the state expansion to converge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import IntegrationFailure, SqueezeOverflow, UnitarityBreach
from .params import ModelParams, interaction_coeffs

__all__ = ["WNState", "WNTrajectory", "wn_rhs", "integrate_wn", "wn_unitary_matrix"]

DEFAULT_ODE_TOL = 1e-10
SQUEEZE_LIMIT = 0.499       # fail-fast margin below the |a1| = 1/2 divergence
BREACH_FACTOR = 100.0       # unitarity residual allowance, in units of tol


@dataclass(frozen=True)
class WNState:
    """The four propagator coefficients at one instant."""

    a1: complex = 0j
    a2: complex = 0j
    a3: complex = 0j
    a4: complex = 0j

    @classmethod
    def zero(cls) -> "WNState":
        return cls()

    def unitarity_residuals(self) -> tuple[float, float, float]:
        """Absolute defects of the three unitarity relations."""
        r1 = abs(np.exp(2.0 * self.a2.real) + 4.0 * abs(self.a1) ** 2 - 1.0)
        r2 = abs(abs(self.a1) - abs(self.a3))
        r3 = abs(2.0 * self.a4.real - self.a2.real)
        return r1, r2, r3

    def max_residual(self) -> float:
        return max(self.unitarity_residuals())


@dataclass(frozen=True)
class WNTrajectory:
    """Sampled coefficient history with per-sample unitarity residuals."""

    times: np.ndarray
    states: tuple[WNState, ...]
    residuals: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, t: float, atol: float = 1e-9) -> WNState:
        """State at a grid time (exact sample lookup, no interpolation)."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol:
            raise KeyError(f"t = {t} is not on the sample grid")
        return self.states[i]


def wn_rhs(t: float, s: WNState, p: ModelParams) -> WNState:
    """Time derivative of the coefficient vector at (t, s)."""
    f1, f2, f3, f4 = interaction_coeffs(t, p)
    return WNState(
        a1=-1j * (f1 + 2.0 * s.a1 * f2 + 4.0 * s.a1 * s.a1 * f3),
        a2=-1j * (f2 + 4.0 * s.a1 * f3),
        a3=-1j * f3 * np.exp(2.0 * s.a2),
        a4=-1j * (f4 + 2.0 * s.a1 * f3),
    )


def _rhs_vector(t, y, p: ModelParams):
    d = wn_rhs(t, WNState(*y), p)
    return [d.a1, d.a2, d.a3, d.a4]


def integrate_wn(
    p: ModelParams,
    t_end: float,
    sample_dt: float,
    tol: float = DEFAULT_ODE_TOL,
) -> WNTrajectory:
    """Integrate the coefficient ODEs from the zero state over [0, t_end].

    Samples fall on the uniform grid ``linspace(0, t_end, round(t_end/sample_dt)+1)``.
    Integration is adaptive embedded Runge-Kutta 4(5) with ``rtol = atol = tol``.

    Raises
    ------
    SqueezeOverflow
        When ``|a1|`` reaches ``0.499`` (state expansion about to diverge).
    IntegrationFailure
        When the stepper cannot proceed.
    UnitarityBreach
        When any sampled unitarity residual exceeds ``100 * tol``.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if sample_dt <= 0:
        raise ValueError("sample_dt must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")

    n_samples = max(1, round(t_end / sample_dt))
    times = np.linspace(0.0, t_end, n_samples + 1)

    def squeeze_guard(t, y, _p):
        return SQUEEZE_LIMIT - abs(y[0])

    squeeze_guard.terminal = True
    squeeze_guard.direction = -1

    sol = solve_ivp(
        _rhs_vector,
        (0.0, t_end),
        np.zeros(4, dtype=np.complex128),
        t_eval=times,
        args=(p,),
        method="RK45",
        rtol=tol,
        atol=tol,
        events=squeeze_guard,
    )
    if sol.status == 1:
        t_hit = float(sol.t_events[0][0])
        raise SqueezeOverflow(
            f"|a1| reached {SQUEEZE_LIMIT} at t = {t_hit:.6g}; "
            "the factorized-state series would diverge"
        )
    if not sol.success:
        raise IntegrationFailure(f"coefficient integration failed: {sol.message}")

    states = tuple(WNState(*col) for col in sol.y.T)
    residuals = np.array([s.max_residual() for s in states])
    worst = float(residuals.max())
    if worst > BREACH_FACTOR * tol:
        raise UnitarityBreach(
            f"unitarity residual {worst:.3e} exceeds {BREACH_FACTOR * tol:.3e}"
        )
    return WNTrajectory(times=times, states=states, residuals=residuals)


def wn_unitary_matrix(s: WNState, n_basis: int) -> np.ndarray:
    """Product-form propagator realised on a truncated number basis.

    Returns ``exp(a1 Adag^2) exp(a2 N) exp(a3 A^2) exp(a4)`` as a dense
    ``n_basis x n_basis`` matrix.  Truncation corrupts the rows and columns
    near the cutoff (pair creation walks amplitude past the edge), so
    comparisons against propagated matrices must use an interior block and
    a basis comfortably larger than the squeeze spread.
    """
    if n_basis < 2:
        raise ValueError("n_basis must be at least 2")
    n = np.arange(n_basis)
    lower2 = np.zeros((n_basis, n_basis))
    lower2[n[: n_basis - 2], n[: n_basis - 2] + 2] = np.sqrt(
        (n[: n_basis - 2] + 1.0) * (n[: n_basis - 2] + 2.0)
    )
    raise2 = lower2.T.copy()
    u = expm(s.a1 * raise2) @ np.diag(np.exp(s.a2 * n)) @ expm(s.a3 * lower2)
    return u * np.exp(s.a4)
