import numpy as np
import pytest

from carroll_lab.core import BoundaryLeak, PhysParams
from carroll_lab.kernels import (CollectiveCoords, GaussianSolution,
                                 SingularKernel, TwoBodySolution, c_of_r,
                                 current_n, density_n, gaussian_field,
                                 kernel_n, one_body_marginals,
                                 propagate_boundary_data, u_rel)

P = PhysParams()


class TestCollectiveCoords:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for n in (2, 3, 5):
            x = rng.normal(size=n)
            cc = CollectiveCoords.from_cartesian(x)
            assert np.allclose(cc.to_cartesian(), x, atol=1e-14)

    def test_two_body_relative_is_v(self):
        cc = CollectiveCoords.from_cartesian([1.3, 0.4])
        assert cc.r == (1.3 - 0.4,)
        assert cc.U == pytest.approx(1.7)


class TestCOfR:
    def test_two_body_origin(self):
        assert c_of_r(P, [0.0]) == 0.0

    def test_two_body_value(self):
        # (m omega^2/4 + k_c/2) V^2 / hbar at V=2: (0.49/4 + 0.5)*4 = 2.49
        assert c_of_r(P, [2.0]) == pytest.approx(2.49, abs=1e-14)

    def test_three_body_coincidence(self):
        assert c_of_r(P, [0.0, 0.0]) == 0.0

    def test_nonnegative_for_chain(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            r = rng.normal(size=rng.integers(1, 5))
            assert c_of_r(P, r) >= 0.0

    def test_matches_total_minus_collective(self):
        # U_tot(x) - m omega^2 U^2/(2N) must equal U_rel(r)
        rng = np.random.default_rng(8)
        for n in (2, 3, 4):
            x = rng.normal(size=n)
            cc = CollectiveCoords.from_cartesian(x)
            u_tot = (0.5 * P.m * P.omega**2 * np.sum(x**2)
                     + 0.5 * P.k_c * np.sum(np.diff(x)**2))
            u_coll = P.m * P.omega**2 * cc.U**2 / (2 * n)
            assert u_rel(P, cc.r) == pytest.approx(u_tot - u_coll, abs=1e-12)


class TestKernel:
    def test_modulus_is_prefactor(self):
        sol = GaussianSolution(P, 3)
        for u in (0.4, 1.7, -2.2):
            for (t, tp) in ((0.1, -0.4), (1.2, 0.8)):
                expected = np.sqrt(P.m * P.c**3 * 3 / (2*np.pi*P.hbar*abs(u)))
                assert abs(sol.kernel(u, (0.2, -0.1), t, tp)) == pytest.approx(
                    expected, rel=1e-12)

    def test_singular_at_zero(self):
        with pytest.raises(SingularKernel):
            kernel_n(P, 2, 0.0, (0.3,), 0.1, 0.0)

    def test_two_body_codepaths_agree(self):
        # dedicated k_eff expressions vs the N-body formula at N=2
        two = TwoBodySolution(P)
        nbody = GaussianSolution(P, 2)
        rng = np.random.default_rng(11)
        for _ in range(40):
            u, v, t, tp = rng.uniform(-2.5, 2.5, 4)
            if abs(u) < 0.05:
                continue
            k2 = two.kernel(u, v, t, tp)
            kn = nbody.kernel(u, (v,), t, tp)
            assert abs(k2 - kn) <= 1e-12 * abs(k2)

    def test_kernel_satisfies_reduced_pde(self):
        # i hbar c N dK/dU + hbar^2/(2mc^2) d2K/dt2 - c(t-t0) k_N (U/N) K = 0
        sol = GaussianSolution(P, 2)
        hu, ht = 1e-4, 1e-4
        rng = np.random.default_rng(13)
        for _ in range(10):
            u = rng.uniform(0.5, 2.0)
            t, tp = rng.uniform(-1.5, 1.5, 2)
            k = lambda uu, tt: sol.kernel(uu, (0.0,), tt, tp)
            du = (k(u-2*hu, t) - 8*k(u-hu, t) + 8*k(u+hu, t) - k(u+2*hu, t)) / (12*hu)
            dtt = (-k(u, t-2*ht) + 16*k(u, t-ht) - 30*k(u, t) + 16*k(u, t+ht)
                   - k(u, t+2*ht)) / (12*ht**2)
            resid = (1j*P.hbar*P.c*2*du + P.hbar**2/(2*P.m*P.c**2)*dtt
                     - P.c*(t - P.t0)*sol.k_n*(u/2)*k(u, t))
            assert abs(resid) / abs(k(u, t)) < 1e-6


class TestGaussianField:
    def test_boundary_data_recovered_at_u_zero(self):
        sol = GaussianSolution(P, 2)
        ts = np.linspace(-4, 4, 41)
        v = 0.8
        x = (v/2, -v/2)   # U = 0, V = v
        expected = (abs(sol.f_rel(np.array([v])))
                    * (2*np.pi*P.sigma**2)**(-0.25)
                    * np.exp(-(ts - P.t0)**2/(4*P.sigma**2)))
        assert np.allclose(np.abs(sol.field(x, ts)), expected, atol=1e-13)

    def test_sigma_reduces_to_boundary_width(self):
        for n in (1, 2, 3, 5):
            sol = GaussianSolution(P, n)
            assert sol.sigma_n(0.0) == P.sigma
            assert sol.t_c(0.0) == 0.0

    def test_t_marginal_preserved_along_u(self):
        # int |Phi(x, .)|^2 dt = |f(r)|^2 for any U
        sol = GaussianSolution(P, 2)
        ts = np.linspace(-60, 60, 2**14)
        dt = ts[1] - ts[0]
        for u in (0.0, 0.7, 2.5, -1.8):
            x = (u/2 + 0.3, u/2 - 0.3)
            got = np.sum(np.abs(sol.field(x, ts))**2) * dt
            f_val = abs(sol.f_rel(np.array([0.6])))**2
            assert got == pytest.approx(f_val, rel=1e-10)

    def test_peak_sits_at_t_c(self):
        sol = GaussianSolution(P, 2)
        ts = np.linspace(-5, 5, 20001)
        for u in (0.9, 1.7, -1.3):
            x = (u/2 + 0.2, u/2 - 0.2)
            dens = np.abs(sol.field(x, ts))**2
            t_peak = ts[np.argmax(dens)]
            assert t_peak == pytest.approx(P.t0 + sol.t_c(u), abs=2*(ts[1]-ts[0]))

    def test_two_body_codepaths_agree(self):
        two = TwoBodySolution(P)
        nbody = GaussianSolution(P, 2)
        rng = np.random.default_rng(17)
        for _ in range(40):
            x1, x2, t = rng.uniform(-2, 2, 3)
            a = two.field(x1, x2, t)
            b = nbody.field((x1, x2), t)
            assert abs(a - b) <= 1e-12 * max(abs(a), 1e-30)

    def test_pde_residual(self):
        # closed form satisfies the reduced equation (FD in x, here exact-dense t)
        for n in (1, 2, 3):
            sol = GaussianSolution(P, n)
            hu, ht = 1e-4, 1e-4
            rng = np.random.default_rng(19 + n)
            for _ in range(8):
                u = rng.uniform(-2, 2)
                t = rng.uniform(-2, 2)
                r = tuple(rng.uniform(-1, 1, n - 1))
                f = lambda uu, tt: sol.field_collective(uu, r, tt)
                du = (f(u-2*hu, t) - 8*f(u-hu, t) + 8*f(u+hu, t)
                      - f(u+2*hu, t)) / (12*hu)
                dtt = (-f(u, t-2*ht) + 16*f(u, t-ht) - 30*f(u, t)
                       + 16*f(u, t+ht) - f(u, t+2*ht)) / (12*ht**2)
                resid = (1j*P.hbar*P.c*n*du + P.hbar**2/(2*P.m*P.c**2)*dtt
                         - P.c*(t - P.t0)*sol.k_n*(u/n)*f(u, t))
                assert abs(resid) < 1e-6

    def test_gauge_invariance_of_density(self):
        # |Psi|^2 = |Phi|^2
        sol = GaussianSolution(P, 3)
        rng = np.random.default_rng(23)
        for _ in range(20):
            x = rng.uniform(-1.5, 1.5, 3)
            t = rng.uniform(-2, 2)
            assert abs(sol.original_field(x, t))**2 == pytest.approx(
                abs(sol.field(x, t))**2, rel=1e-13)


class TestKernelPropagation:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_convolution_reproduces_field(self, n):
        # quadrature oracle: int K_N Phi0 dt' = gaussian_field, |U| in [0.1, 5]
        sol = GaussianSolution(P, n)
        r = tuple(0.3 for _ in range(n - 1))

        def boundary(tp):
            return (2*np.pi*P.sigma**2)**(-0.25) \
                * np.exp(-(tp - P.t0)**2/(4*P.sigma**2))

        f_r = sol.f_rel(np.array(r)) if n > 1 else sol.f_rel(np.array([]))
        for u in (0.1, 0.9, 2.4, 5.0, -1.2):
            for t in (-0.7, 0.4):
                conv = f_r * propagate_boundary_data(sol, u, r, t, boundary)
                direct = sol.field_collective(u, r, t)
                assert abs(conv - direct) < 1e-8

    def test_density_current_reduce_to_two_body(self):
        rng = np.random.default_rng(29)
        two = TwoBodySolution(P)
        for _ in range(30):
            x1, x2, t = rng.uniform(-2, 2, 3)
            assert density_n(P, 2, (x1, x2), t) == pytest.approx(
                two.density(x1, x2, t), rel=1e-12, abs=1e-250)
            assert current_n(P, 2, (x1, x2), t) == pytest.approx(
                two.current(x1, x2, t), rel=1e-12, abs=1e-250)


class TestDensityCurrent:
    def test_density_nonnegative(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            x = rng.uniform(-3, 3, 2)
            t = rng.uniform(-3, 3)
            assert density_n(P, 2, x, t) >= 0.0

    def test_density_peak_value_at_origin(self):
        # at U=0, r=0, t=t0: rho = |f(0)|^2 / (sqrt(2 pi) sigma)
        sol = GaussianSolution(P, 2)
        f0 = abs(sol.f_rel(np.array([0.0])))**2
        assert sol.density((0.0, 0.0), P.t0) == pytest.approx(
            f0 / (np.sqrt(2*np.pi)*P.sigma), rel=1e-13)

    def test_current_drift_term_vanishes_at_t_c(self):
        # at t - t0 = t_c: J = rho * hbar C(r) / (m c^3)
        sol = GaussianSolution(P, 2)
        for u, v in ((1.1, 0.5), (-0.8, 1.3)):
            x = ((u + v)/2, (u - v)/2)
            t = P.t0 + float(sol.t_c(u))
            rho = sol.density(x, t)
            expected = rho * P.hbar * c_of_r(P, (v,)) / (P.m * P.c**3)
            assert sol.current(x, t) == pytest.approx(expected, rel=1e-12)

    def test_current_matches_numeric_derivative_of_psi(self):
        # J = (hbar/mc^3) Im[Psi* dPsi/dt] with Psi the gauged field
        sol = GaussianSolution(P, 2)
        ht = 1e-5
        rng = np.random.default_rng(37)
        for _ in range(20):
            x = rng.uniform(-1.5, 1.5, 2)
            t = rng.uniform(-1.5, 1.5)
            psi = lambda tt: sol.original_field(x, tt)
            dpsi = (psi(t-2*ht) - 8*psi(t-ht) + 8*psi(t+ht)
                    - psi(t+2*ht)) / (12*ht)
            j_num = P.hbar/(P.m*P.c**3) * np.imag(np.conj(psi(t)) * dpsi)
            assert sol.current(x, t) == pytest.approx(j_num, abs=1e-10)

    def test_reduced_current_satisfies_continuity(self):
        # d_x rho + d_t J_red = 0 for the reduced-field current
        sol = GaussianSolution(P, 2)
        hu, ht = 1e-4, 1e-5
        rng = np.random.default_rng(41)
        for _ in range(15):
            u, v, t = rng.uniform(-1.5, 1.5, 3)
            x_of = lambda uu: ((uu + v)/2, (uu - v)/2)
            rho = lambda uu, tt: sol.density(x_of(uu), tt)
            jr = lambda tt: sol.current(x_of(u), tt, reduced=True)
            du_rho = (rho(u-2*hu, t) - 8*rho(u-hu, t) + 8*rho(u+hu, t)
                      - rho(u+2*hu, t)) / (12*hu)
            dt_j = (jr(t-2*ht) - 8*jr(t-ht) + 8*jr(t+ht) - jr(t+2*ht)) / (12*ht)
            assert abs(2*du_rho + dt_j) < 1e-8   # d_x = N d_U with N = 2


class TestOneBodyMarginals:
    def test_t_integral_equals_relative_weight(self):
        # int rho_1(x1, t) dt = int |f(V)|^2 dV = 1 (normalized profile)
        ts = np.linspace(-8, 8, 401)
        dt = ts[1] - ts[0]
        for x1 in (0.0, 0.6):
            rho_t = np.array([one_body_marginals(P, [x1], t)[0][0] for t in ts])
            assert np.sum(rho_t) * dt == pytest.approx(1.0, abs=1e-6)

    def test_nonnegative(self):
        xs = np.linspace(-2, 2, 9)
        rho, _ = one_body_marginals(P, xs, 0.3)
        assert np.all(rho >= 0.0)

    def test_peak_moves_monotonically_left_as_t_grows(self):
        # corrected drift t_c = -omega^2 U^3/(6 N^2 c^3): the marginal peak
        # slides to smaller x1 at later t
        xs = np.linspace(-4.0, 4.0, 161)
        peaks = []
        for t in (-1.0, -0.4, 0.2, 0.8, 1.4):
            rho, _ = one_body_marginals(P, xs, t)
            peaks.append(xs[np.argmax(rho)])
        assert all(b < a + 1e-12 for a, b in zip(peaks, peaks[1:]))
        assert peaks[-1] < peaks[0]

    def test_boundary_leak_raised_for_narrow_window(self):
        with pytest.raises(BoundaryLeak):
            one_body_marginals(P, [0.0], 0.0, window=0.5)


class TestGlobalPhaseFlag:
    def test_drop_global_phase_keeps_density(self):
        a = GaussianSolution(P, 2)
        b = GaussianSolution(P, 2, drop_global_phase=True)
        rng = np.random.default_rng(43)
        for _ in range(10):
            x = rng.uniform(-2, 2, 2)
            t = rng.uniform(-2, 2)
            assert abs(a.field(x, t)) == pytest.approx(abs(b.field(x, t)),
                                                       rel=1e-13)
        u = 1.4
        x = (u/2, u/2)
        assert a.field(x, 0.1) != b.field(x, 0.1)
