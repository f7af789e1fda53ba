"""Coefficient functions: quoted values, conjugation structure, periodicity."""

import cmath
import math

import numpy as np
import pytest

from kerrpo import (
    ModelParams,
    coupling_g,
    interaction_coeffs,
    kerr_average,
    pump_frequency,
)

PI = math.pi


class TestModelParams:
    def test_defaults_alpha0_is_abs_z(self):
        p = ModelParams(z=3 + 4j)
        assert p.alpha0 == 5.0 + 0j

    def test_explicit_alpha0_kept(self):
        p = ModelParams(z=2.0, alpha0=1 + 1j)
        assert p.alpha0 == 1 + 1j

    @pytest.mark.parametrize(
        "kwargs", [{"omega0": 0.0}, {"omega0": -1.0}, {"kappa": -0.1}, {"chi": -0.2}]
    )
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)


class TestPumpFrequency:
    def test_at_zero(self):
        p = ModelParams(omega0=1.0, kappa=0.05)
        assert pump_frequency(0.0, p) == pytest.approx(1.10, abs=1e-15)

    def test_modulation_off(self):
        p = ModelParams(omega0=1.7, kappa=0.0)
        for t in (0.0, 0.3, 2.0, 17.9):
            assert pump_frequency(t, p) == 1.7

    def test_half_period(self):
        p = ModelParams(omega0=1.0, kappa=0.05)
        assert pump_frequency(PI / 2, p) == pytest.approx(0.90, abs=1e-12)


class TestCouplingG:
    def test_at_zero(self):
        p = ModelParams(omega0=1.0, kappa=0.05)
        assert coupling_g(0.0, p) == pytest.approx(0.0525, abs=1e-15)

    def test_modulation_off(self):
        p = ModelParams(omega0=2.0, kappa=0.0)
        assert np.all(coupling_g(np.linspace(0, 10, 50), p) == 0.0)

    def test_half_period(self):
        p = ModelParams(omega0=1.0, kappa=0.05)
        assert coupling_g(PI / 2, p) == pytest.approx(-0.0475, abs=1e-12)

    def test_periodicity(self):
        p = ModelParams(omega0=1.3, kappa=0.21)
        ts = np.linspace(0.0, 9.0, 400)
        assert np.allclose(
            coupling_g(ts + PI / p.omega0, p), coupling_g(ts, p), atol=1e-12
        )


class TestKerrAverage:
    def test_unit_at_t0_and_chi0(self):
        p = ModelParams(chi=0.25, z=2.0)
        assert kerr_average(0.0, p, +1) == pytest.approx(1.0)
        p0 = ModelParams(chi=0.0, z=2.0)
        for t in (0.1, 3.0, 40.0):
            assert kerr_average(t, p0, -1) == pytest.approx(1.0)

    def test_unit_at_full_kerr_period(self):
        # 4*chi*t multiple of 2*pi -> average returns to 1
        p = ModelParams(chi=0.25, z=1.3 + 0.4j)
        for m in (1, 2, 5):
            t = PI * m / (2 * p.chi)
            for sign in (+1, -1):
                assert abs(kerr_average(t, p, sign) - 1.0) < 1e-10

    def test_poisson_sum_oracle(self):
        # brute-force sum_n e^{-|a0|^2} |a0|^{2n}/n! e^{i 4 chi t n}, n = 0..200
        p = ModelParams(chi=0.25, z=2.0, alpha0=2.0)
        t = 1.0
        mean = abs(p.alpha0) ** 2
        term = math.exp(-mean)
        acc = 0j
        for n in range(201):
            acc += term * cmath.exp(1j * 4 * p.chi * t * n)
            term *= mean / (n + 1)
        assert kerr_average(t, p, +1) == pytest.approx(acc, abs=1e-13)

    def test_modulus_bounded_by_one(self):
        rng = np.random.default_rng(7)
        p = ModelParams(chi=0.31, z=1 + 2j, alpha0=1.7)
        ts = rng.uniform(0, 100, 2000)
        assert np.all(np.abs(kerr_average(ts, p, +1)) <= 1.0 + 1e-12)
        assert np.all(np.abs(kerr_average(ts, p, -1)) <= 1.0 + 1e-12)


class TestInteractionCoeffs:
    def test_zero_when_pump_off(self):
        p = ModelParams(omega0=1.0, kappa=0.0, chi=0.25, z=2.0)
        f = interaction_coeffs(1.234, p)
        assert f == (0, 0, 0, 0)

    def test_at_t0(self):
        p = ModelParams(omega0=1.0, kappa=0.05, chi=0.25, z=2.0)
        g0 = p.omega0 * p.kappa * (1 + p.kappa)
        f = interaction_coeffs(0.0, p)
        assert f.f1 == pytest.approx(g0)
        assert f.f2 == pytest.approx(2 * g0)
        assert f.f3 == pytest.approx(g0)
        assert f.f4 == pytest.approx(g0)

    def test_hermiticity_sweep(self):
        # 1e4 random (t, params): f3 = conj(f1) and f2, f4 real with f2 = 2 f4
        rng = np.random.default_rng(42)
        for _ in range(20):
            p = ModelParams(
                omega0=rng.uniform(0.5, 3.0),
                kappa=rng.uniform(0.0, 0.3),
                chi=rng.uniform(0.0, 0.5),
                z=complex(rng.normal(), rng.normal()),
                alpha0=complex(rng.normal(), rng.normal()),
            )
            for t in rng.uniform(0.0, 50.0, 500):
                f = interaction_coeffs(float(t), p)
                assert abs(f.f3 - f.f1.conjugate()) < 1e-14
                assert isinstance(f.f2, float) and isinstance(f.f4, float)
                assert f.f2 == 2.0 * f.f4
