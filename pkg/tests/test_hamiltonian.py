import math

import numpy as np
import pytest

from pearceydet import hamiltonian as ham
from pearceydet.errors import ConvergenceError, DomainError
from pearceydet.fredholm import logdet_converged, resolvent_boundary_trace
from pearceydet.params import ModelParams

SQRT2 = math.sqrt(2.0)


def random_admissible_state(rng, s=3.0):
    """Random state on the constraint surface sum p_k q_k = 0."""
    vals = rng.uniform(-1, 1, 14)
    p1, p2, p3 = (complex(0, v) for v in vals[0:3])
    q1, q2 = (complex(0, v) for v in vals[3:5])
    q3 = -(p1 * q1 + p2 * q2) / p3
    p0, q0 = vals[5], vals[6]
    return ham.HamState(s, p0, p1, p2, p3, q0, q1, q2, q3)


class TestSystemStructure:
    def test_beta_zero_fixed_point(self):
        p = ModelParams(0.0, 1.0)
        st = ham.asymptotic_state(8.0, p)
        rhs = ham.system_rhs(st, p.rho)
        assert all(abs(getattr(rhs, k)) == 0.0
                   for k in ("p0", "p1", "p2", "p3", "q0", "q1", "q2", "q3"))
        assert ham.hamiltonian_value(st) == 0.0

    def test_hamilton_consistency(self):
        # rhs vs (dH/dp, -dH/dq) by central differences on the constraint surface
        rng = np.random.default_rng(2)
        for _ in range(5):
            st = random_admissible_state(rng)
            rhs = ham._rhs_array(st.s, st.to_array())
            h_step = 1e-6
            y = st.to_array()
            grad_p = np.zeros(4, dtype=complex)
            grad_q = np.zeros(4, dtype=complex)
            for k in range(4):
                for arr, idx in ((grad_p, k), (grad_q, 4 + k)):
                    yp, ym = y.copy(), y.copy()
                    yp[idx] += h_step
                    ym[idx] -= h_step
                    arr[idx % 4] = (
                        ham.hamiltonian_value(ham.HamState.from_array(st.s, yp))
                        - ham.hamiltonian_value(ham.HamState.from_array(st.s, ym))
                    ) / (2 * h_step)
            assert np.abs(rhs[4:] - grad_p).max() < 1e-7   # q' = dH/dp
            assert np.abs(rhs[:4] + grad_q).max() < 1e-7   # p' = -dH/dq

    def test_constraint_derivative_vanishes(self):
        rng = np.random.default_rng(4)
        st = random_admissible_state(rng)
        rhs = ham._rhs_array(st.s, st.to_array())
        y = st.to_array()
        ddt = (rhs[1] * y[5] + y[1] * rhs[5] + rhs[2] * y[6] + y[2] * rhs[6]
               + rhs[3] * y[7] + y[3] * rhs[7])
        assert abs(ddt) < 1e-10

    def test_pole_at_origin(self):
        with pytest.raises(DomainError):
            ham.system_rhs(ham.HamState(0.0, 0, 0, 0, 0, 0, 0, 0, 0))


class TestAsymptoticState:
    def test_gamma_zero_values(self):
        rho = 1.0
        st = ham.asymptotic_state(6.0, ModelParams(0.0, rho))
        assert st.p0 == pytest.approx((SQRT2 / 2) * (rho ** 3 / 54 + rho / 2))
        assert st.q0 == pytest.approx((SQRT2 / 2) * (-rho ** 3 / 54 + rho / 2))
        assert st.p1 == st.p2 == st.p3 == st.q1 == st.q2 == st.q3 == 0.0

    def test_first_integral_small(self):
        st = ham.asymptotic_state(10.0, ModelParams(0.5, 1.0))
        # leading-order data satisfies the first integral to O(s^{-2/3})
        assert abs(st.first_integral(1.0)) < 10.0 ** (-2.0 / 3.0)

    def test_hamiltonian_matches_tail_formula(self):
        from pearceydet.asymptotics import h_large_s
        p = ModelParams(0.5, 0.0)
        st = ham.asymptotic_state(10.0, p)
        assert abs(ham.hamiltonian_value(st) - h_large_s(10.0, p)) < 1e-2
        assert abs(ham.hamiltonian_value(st).imag) < 1e-8

    def test_system_residual_ratio_stable(self):
        # closed forms miss the O(s^{-2/3}) oscillatory corrections whose
        # derivative is O(1) relative to the right-hand side; the normalized
        # residual is bounded and stable between s = 8 and s = 16
        p = ModelParams(0.5, 0.0)

        def rel_residual(s):
            h = 1e-5
            d_num = (ham.asymptotic_state(s + h, p).to_array()
                     - ham.asymptotic_state(s - h, p).to_array()) / (2 * h)
            rhs = ham._rhs_array(s, ham.asymptotic_state(s, p).to_array())
            scale = np.maximum(np.abs(rhs), np.abs(d_num))
            scale[scale == 0] = 1.0
            return float((np.abs(d_num - rhs) / scale).max())

        r8, r16 = rel_residual(8.0), rel_residual(16.0)
        assert r8 < 1.0 and r16 < 1.0
        assert abs(r16 / r8 - 1.0) < 0.5

    def test_domain(self):
        with pytest.raises(DomainError):
            ham.asymptotic_state(2.0, ModelParams(0.5, 0.0))


class TestResolventAnchor:
    def test_consistent_with_asymptotics_and_decaying(self):
        # closed-form boundary data approaches the extracted truth like s^{-2/3}
        p = ModelParams(0.5, 0.0)
        rel_err = {}
        for s0 in (8.0, 12.0):
            sa = ham.asymptotic_state(s0, p)
            sr = ham.resolvent_anchor_state(s0, p)
            pv_a = np.array([sa.p1, sa.p2, sa.p3])
            pv_r = np.array([sr.p1, sr.p2, sr.p3])
            rel_err[s0] = np.linalg.norm(pv_a - pv_r) / np.linalg.norm(pv_r)
        assert rel_err[8.0] < 8.0 ** (-2.0 / 3.0)
        assert rel_err[12.0] < rel_err[8.0]

    def test_invariants_exact(self):
        st = ham.resolvent_anchor_state(10.0, ModelParams(0.5, 0.0))
        assert abs(st.constraint_sum()) < 1e-12
        assert abs(st.first_integral(0.0)) < 1e-12

    def test_hamiltonian_consistency(self):
        # H of the anchor equals (1/2) dF/ds by construction of (p0, q0);
        # the oscillator extraction is what this validates
        p = ModelParams(0.3, 1.0)
        st = ham.resolvent_anchor_state(8.0, p)
        hv = ham.hamiltonian_value(st).real
        hf = 0.5 * resolvent_boundary_trace(8.0, p, 256)
        assert hv == pytest.approx(hf, rel=1e-10)


class TestTrajectory:
    def test_backward_sweep_conserves(self):
        p = ModelParams(0.5, 0.0)
        traj = ham.asymptotic_trajectory(p, 10.0, 0.5, tol=1e-11)
        assert traj.constraint_drift().max() < 1e-6
        assert np.abs(traj.h.imag).max() < 1e-6
        assert traj.s[0] == 10.0 and traj.s[-1] == 0.5

    def test_h_matches_fredholm(self):
        p = ModelParams(0.5, 0.0)
        traj = ham.asymptotic_trajectory(p, 10.0, 2.0, tol=1e-10)
        for s in (2.0, 5.0, 8.0):
            ht = float(traj.h_at(np.array([s]))[0].real)
            hf = 0.5 * resolvent_boundary_trace(s, p, 192)
            assert ht == pytest.approx(hf, rel=0.02)

    def test_p0_limit_at_small_s(self):
        rho = 1.0
        p = ModelParams(0.5, rho)
        traj = ham.asymptotic_trajectory(p, 10.0, 0.5, tol=1e-10)
        limit = (SQRT2 / 2) * (rho ** 3 / 54 + rho / 2)
        assert abs(traj.states[-1, 0].real - limit) < 0.1

    def test_asymptotic_ic_short_sweep(self):
        # leading-order data supports only short backward sweeps
        p = ModelParams(0.5, 0.0)
        traj = ham.asymptotic_trajectory(p, 10.0, 8.0, tol=1e-10,
                                         ic_mode="asymptotic")
        assert traj.constraint_drift().max() < 1e-10  # projected exactly

    def test_blowup_detected(self):
        # ...and a full sweep from leading-order data diverges detectably
        p = ModelParams(0.5, 0.0)
        with pytest.raises(ConvergenceError):
            ham.asymptotic_trajectory(p, 10.0, 0.5, tol=1e-10,
                                      ic_mode="asymptotic")


@pytest.fixture(scope="module")
def traj():
    p = ModelParams(0.5, 0.0)
    return p, ham.asymptotic_trajectory(p, 10.0, 0.5, tol=1e-11)


class TestIdentityReport:

    def test_dh_dual_forms(self, traj):
        p, t = traj
        rep = ham.identity_report(t, p)
        assert np.nanmax(rep["dh_cross"]) < 1e-9
        assert np.nanmax(rep["dh_form1"]) < 1e-9

    def test_action_identity(self, traj):
        p, t = traj
        rep = ham.identity_report(t, p)
        assert np.nanmax(rep["action"]) < 1e-9

    def test_first_integrals_along_flow(self, traj):
        p, t = traj
        rep = ham.identity_report(t, p)
        assert np.nanmax(rep["const2"]) < 1e-9
        assert np.nanmax(rep["pq2"]) < 1e-9

    def test_zero_curvature(self, traj):
        p, t = traj
        rep = ham.identity_report(t, p)
        assert np.nanmax(rep["zero_curvature"]) < 1e-8

    def test_beta_zero_trajectory_trivial(self):
        p = ModelParams(0.0, 1.0)
        ic = ham.asymptotic_state(8.0, p)
        t = ham.integrate(8.0, 1.0, ic, p, 1e-10)
        rep = ham.identity_report(t, p)
        for key, vals in rep.items():
            assert np.nanmax(vals) < 1e-7, key

    def test_coupled_equations(self, traj):
        p, t = traj
        res = ham.coupled_p0q0_residual(t, p, s_values=np.array([2.0, 5.0, 8.0]))
        assert res["third_order"].max() < 1e-6
        assert res["second_order"].max() < 1e-7

    def test_coupled_beta_zero(self):
        p = ModelParams(0.0, 1.0)
        ic = ham.asymptotic_state(8.0, p)
        t = ham.integrate(8.0, 2.0, ic, p, 1e-10)
        res = ham.coupled_p0q0_residual(t, p, s_values=np.array([4.0]))
        assert res["third_order"][0] == 0.0
        assert res["second_order"][0] == 0.0


class TestIntegralRepresentation:
    def test_gamma_zero(self):
        out = ham.integral_representation_check(0.5, 4.0, ModelParams(0.0, 0.0))
        assert out["discrepancy"] == 0.0

    def test_within_budget(self):
        p = ModelParams(0.5, 0.0)
        out = ham.integral_representation_check(0.5, 4.0, p, s_anchor=10.0)
        assert out["discrepancy"] <= 0.03 * abs(out["delta_f"])

    def test_matches_fredholm_difference(self):
        p = ModelParams(0.5, 0.0)
        out = ham.integral_representation_check(1.0, 3.0, p, s_anchor=8.0)
        f3 = logdet_converged(3.0, p, 1e-9).f
        f1 = logdet_converged(1.0, p, 1e-9).f
        assert out["delta_f"] == pytest.approx(f3 - f1, abs=1e-8)


class TestComposedDerivatives:
    def test_against_finite_differences_along_flow(self):
        # exact compositions vs high-order differencing of a dense trajectory
        p = ModelParams(0.5, 0.0)
        traj = ham.asymptotic_trajectory(p, 10.0, 4.0, tol=1e-12)
        s = 6.0
        h = 1e-3
        ys = traj.dense(np.array([s - 2 * h, s - h, s, s + h, s + 2 * h]))
        p0_vals = ys[0]
        q0_vals = ys[4]
        st = ham.HamState.from_array(s, ys[:, 2])
        d = ham.p0_q0_derivatives(st)
        d1 = (p0_vals[0] - 8 * p0_vals[1] + 8 * p0_vals[3] - p0_vals[4]) / (12 * h)
        d2 = (-p0_vals[0] + 16 * p0_vals[1] - 30 * p0_vals[2]
              + 16 * p0_vals[3] - p0_vals[4]) / (12 * h * h)
        d2q = (-q0_vals[0] + 16 * q0_vals[1] - 30 * q0_vals[2]
               + 16 * q0_vals[3] - q0_vals[4]) / (12 * h * h)
        d3 = (-p0_vals[0] + 2 * p0_vals[1] - 2 * p0_vals[3] + p0_vals[4]) / (2 * h ** 3)
        assert abs(d["p0d"] - d1) < 1e-9
        assert abs(d["p0dd"] - d2) < 1e-7
        assert abs(d["q0dd"] - d2q) < 1e-7
        assert abs(d["p0ddd"] - d3) < 1e-4


class TestHighGammaCorner:
    def test_large_rho_sweep_from_moderate_anchor(self):
        # high-thinning, rho = 1: anchor at 8 keeps the full sweep accurate
        p = ModelParams(0.9, 1.0)
        ic = ham.resolvent_anchor_state(8.0, p)
        t = ham.integrate(8.0, 0.5, ic, p, 1e-10)
        assert t.constraint_drift().max() < 1e-6
        h2 = float(t.h_at(np.array([2.0]))[0].real)
        hf = 0.5 * resolvent_boundary_trace(2.0, p, 160)
        assert abs(h2 - hf) <= 2e-3 * abs(hf)
