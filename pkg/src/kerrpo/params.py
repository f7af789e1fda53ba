"""Model parameters and the scalar coefficient functions of the Hamiltonian.

The model is a single field mode with pump-modulated frequency
``W(t) = omega0*(1 + 2*kappa*cos(2*omega0*t))`` inside a Kerr medium
``chi*n^2`` (hbar = 1 throughout).  In the interaction picture, after the
number-operator exponentials are replaced by their coherent-state average,
the residual Hamiltonian is a combination of the four generators
``{adag^2, n, a^2, 1}`` with the scalar coefficients computed here.

All functions are pure and O(1); they accept scalar or ndarray ``t``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "ModelParams",
    "CoeffVector",
    "pump_frequency",
    "coupling_g",
    "kerr_average",
    "interaction_coeffs",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of one run.

    Attributes
    ----------
    omega0 : float
        Unmodulated oscillator frequency (must be > 0).
    kappa : float
        Dimensionless pump-modulation amplitude (>= 0).
    chi : float
        Kerr coefficient, same units as omega0 (>= 0).
    z : complex
        Initial coherent amplitude of the field state.
    alpha0 : complex
        Amplitude of the coherent state used for the number-operator
        average; defaults to ``|z|`` (real) when not given.
    """

    omega0: float = 1.0
    kappa: float = 0.0
    chi: float = 0.0
    z: complex = 0j
    alpha0: complex = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if self.chi < 0:
            raise ValueError(f"chi must be non-negative, got {self.chi}")
        object.__setattr__(self, "z", complex(self.z))
        if self.alpha0 is None:
            object.__setattr__(self, "alpha0", complex(abs(self.z)))
        else:
            object.__setattr__(self, "alpha0", complex(self.alpha0))


class CoeffVector(NamedTuple):
    """Coefficients of the generator ordering (adag^2, n, a^2, 1).

    Hermiticity of the averaged Hamiltonian forces ``f3 == conj(f1)`` and
    real ``f2 == 2*f4`` at all times.
    """

    f1: complex
    f2: float
    f3: complex
    f4: float


def pump_frequency(t, p: ModelParams):
    """Instantaneous oscillator frequency omega0*(1 + 2*kappa*cos(2*omega0*t))."""
    return p.omega0 * (1.0 + 2.0 * p.kappa * np.cos(2.0 * p.omega0 * t))


def coupling_g(t, p: ModelParams):
    """Pump coupling g(t) = omega0*kappa*cos(2*omega0*t)*(1 + kappa*cos(2*omega0*t)).

    This is the scalar multiplying ``(a^2 + adag^2 + 2n + 1)`` when the
    quadratic Hamiltonian is normal-ordered at the unmodulated frequency.
    """
    c = np.cos(2.0 * p.omega0 * t)
    return p.omega0 * p.kappa * c * (1.0 + p.kappa * c)


def kerr_average(t, p: ModelParams, sign: int = +1):
    """Coherent-state average of the Kerr phase operator.

    Returns ``exp(|alpha0|^2 * (exp(sign*4i*chi*t) - 1))``, the expectation
    of ``exp(sign*4i*chi*t*n)`` in the coherent state ``|alpha0>``.  The
    accompanying ``exp(±2i*(omega0+2chi)*t)`` phase is *not* included here;
    :func:`interaction_coeffs` applies it.  The modulus never exceeds 1 and
    equals 1 exactly when ``4*chi*t`` is a multiple of ``2*pi``.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    a2 = abs(p.alpha0) ** 2
    return np.exp(a2 * (np.exp(sign * 4j * p.chi * t) - 1.0))


def interaction_coeffs(t: float, p: ModelParams) -> CoeffVector:
    """Scalar coefficients (f1, f2, f3, f4) of the averaged interaction Hamiltonian.

    ``f1`` multiplies ``adag^2``, ``f2 = 2g`` multiplies ``n``, ``f3 = conj(f1)``
    multiplies ``a^2`` and ``f4 = g`` the identity.
    """
    g = float(coupling_g(t, p))
    shift = 2.0 * (p.omega0 + 2.0 * p.chi) * t
    f1 = g * cmath.exp(1j * shift) * complex(kerr_average(t, p, +1))
    f3 = g * cmath.exp(-1j * shift) * complex(kerr_average(t, p, -1))
    return CoeffVector(f1=f1, f2=2.0 * g, f3=f3, f4=g)


def pump_period(p: ModelParams) -> float:
    """Period of the pump modulation, pi/omega0."""
    return math.pi / p.omega0
