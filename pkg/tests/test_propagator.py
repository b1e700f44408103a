import numpy as np
import pytest

from carroll_lab.core import (BoundaryLeak, Field, PhysParams, TemporalGrid,
                              field_from_function, l2_norm)
from carroll_lab.kernels import GaussianSolution
from carroll_lab.propagator import (CsProblem, OscillatorSpectrum,
                                    QuarticEigenproblem, UnstableModel,
                                    collective_factor, gauge_equivalence_check,
                                    oscillator_eigenstate, oscillator_spectrum,
                                    propagate, quartic_eigensolve,
                                    quartic_shooting, step, v_t_oscillator)

P = PhysParams()


def boundary_gaussian(params=P):
    return lambda t: (2*np.pi*params.sigma**2)**(-0.25) \
        * np.exp(-(t - params.t0)**2 / (4*params.sigma**2))


class TestStep:
    def test_norm_preserved_per_step(self):
        g = TemporalGrid(-30.0, 30.0, 1024)
        problem = CsProblem(P, (g,), v_t=v_t_oscillator(P, 1))
        f = field_from_function(g, boundary_gaussian())
        out = step(problem, f, 0.0, 1e-3)
        assert abs(l2_norm(out) - l2_norm(f)) < 1e-13

    def test_free_spread_matches_closed_form(self):
        # oracle: the N=1, omega=0 closed form (free dispersion)
        p0 = P.replace(omega=0.0)
        sol = GaussianSolution(p0, 1)
        g = TemporalGrid(-30.0, 30.0, 1024)
        problem = CsProblem(p0, (g,))
        f0 = field_from_function(g, boundary_gaussian(p0))
        x1 = 1.5
        out = propagate(problem, f0, 0.0, x1, dx=2e-3)
        exact = sol.field_collective(x1, (), g.points())
        assert np.max(np.abs(out.values - exact)) < 1e-6

    def test_two_body_reduced_drive_matches_gaussian_field(self):
        # drive c (t-t0) k_eff x, V frozen; oracle is the closed form along U
        sol = GaussianSolution(P, 2, f_rel=lambda r: 1.0)
        k_eff = 2 * P.m * P.omega**2
        g = TemporalGrid(-30.0, 30.0, 1024)
        problem = CsProblem(
            P, (g,), drive=lambda x, t: P.c * (t - P.t0) * k_eff * x)
        f0 = field_from_function(g, boundary_gaussian())
        for u_final in (0.5, 1.0, 2.0):
            out = propagate(problem, f0, 0.0, u_final / 2, dx=1e-3)
            exact = sol.field_collective(u_final, (0.0,), g.points())
            err = np.max(np.abs(out.values - exact)) / np.max(np.abs(exact))
            assert err < 1e-5

    def test_strang_second_order(self):
        sol = GaussianSolution(P, 2, f_rel=lambda r: 1.0)
        k_eff = 2 * P.m * P.omega**2
        g = TemporalGrid(-30.0, 30.0, 512)
        problem = CsProblem(
            P, (g,), drive=lambda x, t: P.c * (t - P.t0) * k_eff * x)
        f0 = field_from_function(g, boundary_gaussian())
        exact = sol.field_collective(2.0, (0.0,), g.points())
        errs = []
        for dx in (4e-2, 2e-2):
            out = propagate(problem, f0, 0.0, 1.0, dx=dx)
            errs.append(np.max(np.abs(out.values - exact)))
        assert 3.0 < errs[0] / errs[1] < 5.0

    def test_boundary_leak_detected(self):
        g = TemporalGrid(-3.0, 3.0, 64)
        problem = CsProblem(P, (g,))
        f0 = field_from_function(g, lambda t: np.exp(-t**2/4))
        with pytest.raises(BoundaryLeak):
            step(problem, f0, 0.0, 1e-2)


class TestPropagate:
    def test_forward_backward_round_trip(self):
        g = TemporalGrid(-30.0, 30.0, 512)
        problem = CsProblem(P, (g,), v_t=v_t_oscillator(P, 1))
        f0 = field_from_function(g, boundary_gaussian())
        fwd = propagate(problem, f0, 0.0, 0.8, dx=1e-3)
        back = propagate(problem, fwd, 0.8, 0.0, dx=-1e-3)
        assert np.max(np.abs(back.values - f0.values)) < 1e-10

    def test_norm_drift_over_many_steps(self):
        g = TemporalGrid(-30.0, 30.0, 256)
        problem = CsProblem(P, (g,), v_t=v_t_oscillator(P, 1))
        f = field_from_function(g, boundary_gaussian())
        n0 = l2_norm(f)
        for i in range(10_000):
            f = step(problem, f, i * 1e-4, 1e-4)
        assert abs(l2_norm(f) - n0) < 1e-10

    def test_observer_snapshots(self):
        g = TemporalGrid(-30.0, 30.0, 256)
        problem = CsProblem(P, (g,))
        f0 = field_from_function(g, boundary_gaussian())
        seen = []
        propagate(problem, f0, 0.0, 0.1, dx=0.01,
                  observer=lambda x, fld: seen.append(x))
        assert len(seen) == 11
        assert seen[0] == 0.0 and seen[-1] == pytest.approx(0.1)


class TestOscillatorSpectrum:
    def test_single_uncoupled_mode(self):
        p = P.replace(k_t=0.0)
        spec = oscillator_spectrum(p, 1)
        assert spec.frequencies[0] == pytest.approx(p.omega_t, abs=1e-14)

    def test_two_body_modes(self):
        spec = oscillator_spectrum(P, 2)
        expected = sorted([P.omega_t, np.sqrt(P.omega_t**2 + 2*P.k_t/P.m)])
        assert np.allclose(spec.frequencies, expected, atol=1e-12)

    def test_three_body_all_to_all(self):
        spec = oscillator_spectrum(P, 3)
        w_deg = np.sqrt(P.omega_t**2 + 3*P.k_t/P.m)
        assert spec.frequencies[0] == pytest.approx(P.omega_t, abs=1e-12)
        assert np.allclose(spec.frequencies[1:], w_deg, atol=1e-12)

    def test_modes_orthonormal(self):
        spec = oscillator_spectrum(P, 4)
        gram = spec.modes.T @ spec.modes
        assert np.max(np.abs(gram - np.eye(4))) < 1e-12

    def test_indefinite_form_rejected(self):
        with pytest.raises(UnstableModel):
            oscillator_spectrum(P.replace(omega_t=0.1, k_t=-1.0), 3)

    def test_wavenumber_ladder(self):
        spec = oscillator_spectrum(P, 2)
        w = spec.frequencies
        got = spec.wavenumber((2, 1))
        expected = P.hbar*(w[0]/P.c)*2.5 + P.hbar*(w[1]/P.c)*1.5
        assert got == pytest.approx(expected, rel=1e-14)


def _phase_rate(problem, state, x_final, dx):
    """Richardson-extrapolated overlap phase rate of a propagated eigenstate."""
    dv = state.cell_volume

    def run(step_size):
        out = propagate(problem, state, 0.0, x_final, dx=step_size)
        z = np.sum(np.conj(state.values) * out.values) * dv
        return np.angle(z), abs(z)

    ph1, mag1 = run(dx)
    ph2, mag2 = run(dx / 2)
    return (4*ph2 - ph1) / 3 / x_final, min(mag1, mag2)


class TestEigenstatePropagation:
    def test_single_mode_pure_phase(self):
        p = P.replace(k_t=0.0)
        g = TemporalGrid(-24.0, 24.0, 512)
        spec = oscillator_spectrum(p, 1)
        state = oscillator_eigenstate(spec, (0,), (g,))
        problem = CsProblem(p, (g,), v_t=v_t_oscillator(p, 1))
        out = propagate(problem, state, 0.0, 0.5, dx=1e-3)
        # density unchanged
        assert np.max(np.abs(np.abs(out.values)**2 - np.abs(state.values)**2)) \
            < 1e-8
        rate, mag = _phase_rate(problem, state, 0.5, 1e-3)
        eps = spec.wavenumber((0,))
        assert mag == pytest.approx(1.0, abs=1e-8)
        assert rate == pytest.approx(-eps/(p.hbar*p.c), rel=1e-6)

    def test_two_mode_eigenstate_rate(self):
        g = TemporalGrid(-14.0, 14.0, 128)
        spec = oscillator_spectrum(P, 2)
        state = oscillator_eigenstate(spec, (1, 0), (g, g))
        problem = CsProblem(P, (g, g), v_t=v_t_oscillator(P, 2))
        rate, mag = _phase_rate(problem, state, 0.2, 1e-3)
        eps = spec.wavenumber((1, 0))
        assert mag == pytest.approx(1.0, abs=1e-7)
        assert rate == pytest.approx(-eps/(P.hbar*P.c), rel=1e-6)


class TestGaugeEquivalence:
    def test_zero_distance_zero_discrepancy(self):
        g = TemporalGrid(-24.0, 24.0, 256)
        f0 = field_from_function(g, boundary_gaussian())
        d = gauge_equivalence_check(P, v_t_oscillator(P, 1), 0.0, (g,), f0)
        assert d == 0.0

    def test_constant_potential_densities_identical(self):
        g = TemporalGrid(-24.0, 24.0, 256)
        f0 = field_from_function(g, boundary_gaussian())
        const = lambda t: 0.7 * np.ones_like(t)
        # A_i = 0: inside arm is free; outside arm differs by the S phase only
        d = gauge_equivalence_check(P, const, 1.0, (g,), f0, dx=1e-3)
        assert d < 1e-12

    def test_oscillator_coupling_converges_second_order(self):
        g = TemporalGrid(-24.0, 24.0, 256)
        f0 = field_from_function(g, boundary_gaussian())
        d1 = gauge_equivalence_check(P, v_t_oscillator(P, 1), 1.0, (g,), f0,
                                     dx=4e-3)
        d2 = gauge_equivalence_check(P, v_t_oscillator(P, 1), 1.0, (g,), f0,
                                     dx=2e-3)
        assert d2 < 1e-4
        assert 2.5 < d1/d2 < 5.5


class TestQuarticWell:
    def grid(self):
        return TemporalGrid(-8.0, 8.0, 1024)

    def test_pure_quartic_ground_state_even_nodeless(self):
        qp = QuarticEigenproblem(P, lam=0.0, grid=self.grid())
        evals, states = quartic_eigensolve(qp, 3)
        ground = states[0]
        tau = qp.grid.points()
        # even: symmetric under tau -> -tau (grid reflection)
        refl = np.roll(ground[::-1], 1)
        sym = min(np.max(np.abs(ground - refl)), np.max(np.abs(ground + refl)))
        anti = np.max(np.abs(ground - refl))
        assert sym < 1e-8 and anti < 1e-8    # even sector
        # nodeless: no sign change where amplitude is significant
        sig = ground[np.abs(ground) > 1e-6 * np.max(np.abs(ground))]
        assert np.all(sig > 0) or np.all(sig < 0)
        assert np.all(evals > 0)

    def test_double_well_positive_spectrum_discrete(self):
        qp = QuarticEigenproblem(P, lam=1.0, grid=self.grid())
        tau_min = np.sqrt(2 * qp.lam / P.k_t)
        assert qp.effective_potential(tau_min) == pytest.approx(0.0, abs=1e-14)
        assert qp.effective_potential(0.0) == pytest.approx(
            qp.lam**2 / (4*P.m*P.c**2))
        evals, _ = quartic_eigensolve(qp, 5)
        assert np.all(evals > 0)
        assert np.all(np.diff(evals) > 1e-6)

    def test_fd_vs_spectral_discretizations(self):
        for lam in (0.0, 1.0):
            qp = QuarticEigenproblem(P, lam=lam, grid=self.grid())
            e_fd, _ = quartic_eigensolve(qp, 5, discretization="fd8")
            e_sp, _ = quartic_eigensolve(qp, 5, discretization="spectral")
            assert np.max(np.abs(e_fd - e_sp)) < 1e-6

    def test_dense_vs_shooting(self):
        for lam in (0.0, 1.0):
            qp = QuarticEigenproblem(P, lam=lam, grid=self.grid())
            dense, _ = quartic_eigensolve(qp, 5, discretization="spectral")
            shoot = quartic_shooting(qp, 5)
            assert np.max(np.abs(dense - shoot)) < 1e-6

    def test_orthonormal_eigenfunctions(self):
        qp = QuarticEigenproblem(P, lam=0.5, grid=self.grid())
        _, states = quartic_eigensolve(qp, 4)
        dt = qp.grid.dt
        for i, si in enumerate(states):
            for j, sj in enumerate(states):
                ov = np.vdot(si, sj) * dt
                assert ov == pytest.approx(1.0 if i == j else 0.0, abs=1e-10)

    def test_boundary_leak_on_narrow_grid(self):
        qp = QuarticEigenproblem(P, lam=0.0,
                                 grid=TemporalGrid(-2.5, 2.5, 256))
        with pytest.raises(BoundaryLeak):
            quartic_eigensolve(qp, 5)


class TestCollectiveFactor:
    def test_at_origin(self):
        assert collective_factor(P, 0.7, 0.0) == 1.0

    def test_unit_modulus(self):
        ts = np.linspace(-5, 5, 101)
        assert np.allclose(np.abs(collective_factor(P, 1.3, ts)), 1.0,
                           atol=1e-13)

    def test_eigenrelation_spectral(self):
        # (-i hbar d_T - m omega_t^2 T^2) f_lam = lam f_lam
        lam = 0.6
        g = TemporalGrid(-4.0, 4.0, 4096)
        ts = g.points()
        f = collective_factor(P, lam, ts)

        # C-infinity window, exactly 1 on |T| <= 1.5, 0 beyond |T| >= 3.5
        def bump(u):
            out = np.zeros_like(u)
            out[u <= 0] = 1.0
            mid = (u > 0) & (u < 1)
            gm = np.exp(-1.0/np.clip(u[mid], 1e-12, None))
            gp = np.exp(-1.0/np.clip(1 - u[mid], 1e-12, None))
            out[mid] = gp / (gm + gp)
            return out

        window = bump((np.abs(ts) - 1.5) / 2.0)
        fw = f * window
        k = g.angular_frequencies()
        df = np.fft.ifft(1j*k*np.fft.fft(fw))
        lhs = -1j*P.hbar*df - P.m*P.omega_t**2*ts**2*fw
        inner = np.abs(ts) < 1.5
        assert np.max(np.abs(lhs[inner] - lam*fw[inner])) < 1e-6
