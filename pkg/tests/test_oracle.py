"""Reference propagator: operator algebra, unitarity, convergence, pictures."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import poisson_pmf
from kerrpo import (
    ModelParams,
    apply_u0,
    autocorrelation_chi0,
    build_operators,
    coherent_state,
    converge_truncation,
    exact_hi_matrix,
    oracle_autocorrelation,
    propagate_exact,
    run_convergence,
)
from kerrpo.backends import get_backend
from kerrpo.errors import NoConvergence, NormDrift, TruncationTooSmall
from test_wei_norman import htilde_matrix

PI = math.pi


class TestOperators:
    def test_ladder_actions(self):
        ops = build_operators(8)
        e2 = np.zeros(8)
        e2[2] = 1.0
        out = ops.lower2 @ e2
        assert out[0] == pytest.approx(math.sqrt(2.0))
        assert np.count_nonzero(out) == 1
        e5 = np.zeros(8)
        e5[5] = 1.0
        assert np.allclose(ops.number @ e5, 5.0 * e5)

    def test_raise_is_adjoint(self):
        ops = build_operators(12)
        assert (abs(ops.raise2 - ops.lower2.conj().T) > 0).nnz == 0

    def test_small_basis_rejected(self):
        with pytest.raises(ValueError):
            build_operators(2)


class TestExactHiMatrix:
    def test_hermitian(self, fig3_params):
        ops = build_operators(24)
        for t in (0.0, 0.7, 3.1):
            h = exact_hi_matrix(t, fig3_params, ops).toarray()
            assert np.max(np.abs(h - h.conj().T)) < 1e-13

    def test_zero_when_pump_off(self, fig2b_params):
        ops = build_operators(16)
        assert abs(exact_hi_matrix(1.3, fig2b_params, ops)).max() == 0.0

    def test_reduces_to_averaged_form_at_chi0(self, fig2a_params):
        # chi = 0 removes the number dependence and the averaging factor is
        # exactly 1, so the exact and averaged Hamiltonians coincide
        ops = build_operators(20)
        for t in (0.4, 2.0):
            exact = exact_hi_matrix(t, fig2a_params, ops).toarray()
            averaged = htilde_matrix(t, fig2a_params, 20)
            assert np.max(np.abs(exact - averaged)) < 1e-13

    def test_matches_backend_matvec(self, fig3_params):
        rng = np.random.default_rng(3)
        psi = rng.normal(size=30) + 1j * rng.normal(size=30)
        ops = build_operators(30)
        t = 1.234
        expected = exact_hi_matrix(t, fig3_params, ops) @ psi
        for name in ("python",) + (("compiled",) if "compiled" in __import__("kerrpo").available_backends() else ()):
            kern = get_backend(name)
            got = kern.apply_hi(psi, t, fig3_params.omega0, fig3_params.kappa, fig3_params.chi)
            assert np.max(np.abs(got - expected)) < 1e-12


class TestCoherentState:
    def test_poisson_weights_and_tail(self):
        vec, tail = coherent_state(2.0, 40)
        pmf = poisson_pmf(4.0, 40)
        assert np.max(np.abs(np.abs(vec) ** 2 - pmf)) < 1e-15
        assert tail == pytest.approx(1.0 - pmf.sum(), abs=1e-12)

    def test_vacuum(self):
        vec, tail = coherent_state(0.0, 5)
        assert vec[0] == 1.0 and np.all(vec[1:] == 0.0) and tail == 0.0


class TestPropagateExact:
    def test_norm_preserved(self, fig3_params):
        grid = np.linspace(0.0, 2 * PI, 101)
        res = propagate_exact(fig3_params, grid, 64)
        norms = np.linalg.norm(res.states, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-9

    def test_pump_off_state_constant(self, fig2b_params):
        grid = np.linspace(0.0, 8 * PI, 41)
        res = propagate_exact(fig2b_params, grid, 48)
        assert np.max(np.abs(res.states - res.states[0])) < 1e-12

    def test_pump_off_autocorr_is_kerr_sum(self, fig2b_params):
        # analytic: F(t) = e^{-i w t/2} e^{-|z|^2} sum |z|^{2n}/n! e^{-i(w n + chi n^2) t}
        grid = np.linspace(0.0, 8 * PI, 81)
        res = propagate_exact(fig2b_params, grid, 48)
        series = oracle_autocorrelation(res, fig2b_params)
        pmf = poisson_pmf(4.0, 48)
        n = np.arange(48)
        for t, f in zip(series.times, series.values):
            expected = np.exp(-1j * t / 2) * np.sum(
                pmf * np.exp(-1j * (n + 0.25 * n.astype(float) ** 2) * t)
            )
            assert abs(f - expected) < 1e-9

    def test_initial_tail_guard(self):
        p = ModelParams(omega0=1.0, kappa=0.1, chi=0.0, z=3 + 3j)
        with pytest.raises(TruncationTooSmall):
            propagate_exact(p, np.linspace(0, 1, 5), 20)

    def test_grid_validation(self, fig3_params):
        with pytest.raises(ValueError):
            propagate_exact(fig3_params, np.array([1.0, 2.0]), 32)
        with pytest.raises(ValueError):
            propagate_exact(fig3_params, np.array([0.0, 0.5, 0.5]), 32)

    def test_loose_tolerance_trips_norm_guard(self, fig3_params):
        grid = np.linspace(0.0, 8 * PI, 51)
        with pytest.raises(NormDrift):
            propagate_exact(fig3_params, grid, 64, tol=1e-5)


class TestApplyU0:
    def test_identity_at_t0(self, fig3_params):
        v = np.array([0.5, 0.5j, -0.5, 0.1])
        assert np.all(apply_u0(v, fig3_params, 0.0) == v)

    def test_pure_phases(self, fig3_params):
        rng = np.random.default_rng(11)
        v = rng.normal(size=20) + 1j * rng.normal(size=20)
        out = apply_u0(v, fig3_params, 2.7)
        assert np.max(np.abs(np.abs(out) - np.abs(v))) < 1e-15

    def test_coherent_rotation_at_chi0(self):
        p = ModelParams(omega0=1.0, kappa=0.0, chi=0.0, z=1.2)
        v, _ = coherent_state(p.z, 32)
        t = 1.9
        rotated, _ = coherent_state(p.z * np.exp(-1j * p.omega0 * t), 32)
        expected = np.exp(-1j * p.omega0 * t / 2) * rotated
        assert np.max(np.abs(apply_u0(v, p, t) - expected)) < 1e-13


class TestConvergence:
    def test_stable_under_extra_doubling(self, fig3_params):
        grid = np.linspace(0.0, 4 * PI, 201)
        report = run_convergence(fig3_params, grid, conv_tol=1e-6)
        assert report.n_tried[-1] == 2 * report.n_final
        assert report.sup_deltas[-1] < 1e-6
        # one more doubling moves the curve by less than the declared bound
        bigger = propagate_exact(fig3_params, grid, 2 * report.n_tried[-1])
        f_big = np.abs(oracle_autocorrelation(bigger, fig3_params).values) ** 2
        assert np.max(np.abs(f_big - report.abs2)) < 1e-6

    def test_pump_off_converges_immediately(self, fig2b_params):
        n = converge_truncation(fig2b_params, 8 * PI, tol=1e-6, n_grid=100)
        assert n == 36  # starting basis already resolves the Poisson tail

    def test_larger_amplitude_needs_larger_basis(self, fig1_params, fig2a_params):
        n_small = converge_truncation(fig2a_params, 2 * PI, tol=1e-6, n_grid=50)
        n_large = converge_truncation(fig1_params, 2 * PI, tol=1e-6, n_grid=50)
        assert n_large > n_small

    def test_cap_raises(self, fig3_params):
        with pytest.raises(NoConvergence):
            run_convergence(
                fig3_params, np.linspace(0, PI, 11), conv_tol=1e-6, cap=16
            )


class TestOracleAutocorr:
    def test_unity_at_t0(self, fig3_params):
        res = propagate_exact(fig3_params, np.array([0.0, 0.5]), 48)
        series = oracle_autocorrelation(res, fig3_params)
        assert series.values[0] == pytest.approx(1.0, abs=1e-10)

    def test_complete_revival(self, fig2b_params):
        grid = np.linspace(0.0, 8 * PI, 11)
        res = propagate_exact(fig2b_params, grid, 48)
        f = oracle_autocorrelation(res, fig2b_params).values[-1]
        assert abs(f) ** 2 == pytest.approx(1.0, abs=1e-6)

    def test_matches_product_form_at_chi0(self, fig2a_params, fig2a_traj):
        # chi = 0 removes the averaging approximation entirely, so the two
        # routes agree to integration accuracy (well inside 5e-3)
        grid = np.asarray(fig2a_traj.times[::100], dtype=float)
        res = propagate_exact(fig2a_params, grid, 96)
        f_oracle = oracle_autocorrelation(res, fig2a_params).values
        f_wn = np.array(
            [
                autocorrelation_chi0(fig2a_params, fig2a_traj.states[i], float(t))
                for i, t in zip(range(0, len(fig2a_traj), 100), grid)
            ]
        )
        sup = np.max(np.abs(f_oracle - f_wn))
        assert sup < 5e-3
        assert sup < 1e-6


class TestSchrodingerPictureConsistency:
    def test_interaction_picture_matches_direct_hamiltonian(self, fig3_params):
        # test-only independent formulation: propagate the full Hamiltonian
        # (oscillator + Kerr + pump) directly and compare the overlap
        p = fig3_params
        n_basis = 48
        t_end = PI
        grid = np.linspace(0.0, t_end, 9)
        n = np.arange(n_basis, dtype=float)
        lower2 = np.zeros((n_basis, n_basis), dtype=complex)
        idx = np.arange(n_basis - 2)
        lower2[idx, idx + 2] = np.sqrt((idx + 1.0) * (idx + 2.0))
        raise2 = lower2.conj().T
        h_static = np.diag(p.omega0 * (n + 0.5) + p.chi * n**2)
        v_pump = lower2 + raise2 + np.diag(2 * n + 1.0)

        def rhs(t, y):
            c = math.cos(2 * p.omega0 * t)
            g = p.omega0 * p.kappa * c * (1 + p.kappa * c)
            return -1j * ((h_static + g * v_pump) @ y)

        psi0, _ = coherent_state(p.z, n_basis)
        sol = solve_ivp(rhs, (0, t_end), psi0, t_eval=grid, method="RK45",
                        rtol=1e-12, atol=1e-12)
        assert sol.success
        f_direct = np.array([np.vdot(psi0, sol.y[:, j]) for j in range(len(grid))])

        res = propagate_exact(p, grid, n_basis, tol=1e-12)
        f_int = oracle_autocorrelation(res, p).values
        assert np.max(np.abs(f_direct - f_int)) < 1e-8
