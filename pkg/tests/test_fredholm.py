import math

import numpy as np
import pytest

from pearceydet import fredholm as fr
from pearceydet.errors import DomainError
from pearceydet.kernel import kernel_diagonal_band
from pearceydet.params import ModelParams


class TestGaussLegendre:
    def test_n1(self):
        rule = fr.gauss_legendre(1)
        assert rule.nodes[0] == 0.0
        assert rule.weights[0] == 2.0

    def test_n2(self):
        rule = fr.gauss_legendre(2)
        assert np.allclose(rule.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)],
                           atol=1e-15)
        assert np.allclose(rule.weights, [1.0, 1.0], atol=1e-15)

    def test_quartic_exactness_n3(self):
        rule = fr.gauss_legendre(3)
        assert (rule.weights * rule.nodes ** 4).sum() == pytest.approx(0.4, abs=1e-14)

    @pytest.mark.parametrize("n", [5, 16, 64, 257])
    def test_weight_sum_and_symmetry(self, n):
        rule = fr.gauss_legendre(n)
        assert rule.weights.sum() == pytest.approx(2.0, abs=1e-13)
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=1e-14)
        assert np.all(rule.weights > 0)

    def test_polynomial_exactness(self):
        # degree 2n-1 exactness on random polynomials
        rng = np.random.default_rng(5)
        n = 7
        rule = fr.gauss_legendre(n)
        for _ in range(5):
            coeffs = rng.uniform(-1, 1, 2 * n)
            poly = np.polynomial.Polynomial(coeffs)
            exact = (poly.integ()(1.0) - poly.integ()(-1.0))
            quad = (rule.weights * poly(rule.nodes)).sum()
            assert quad == pytest.approx(exact, abs=1e-13)


class TestLogdet:
    def test_gamma_zero_is_exact_zero(self):
        for s in (0.5, 3.0):
            assert fr.fredholm_logdet(s, ModelParams(0.0, 1.0), 32).f == 0.0

    def test_order_stability(self):
        p = ModelParams(0.5, 0.0)
        f32 = fr.fredholm_logdet(0.5, p, 32).f
        f64 = fr.fredholm_logdet(0.5, p, 64).f
        assert abs(f32 - f64) < 1e-10

    def test_monotone_in_s(self):
        p = ModelParams(0.5, 0.0)
        f2 = fr.fredholm_logdet(2.0, p, 128).f
        f4 = fr.fredholm_logdet(4.0, p, 128).f
        assert f4 < f2 < 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            fr.fredholm_logdet(13.0, ModelParams(0.5, 0.0), 64)
        with pytest.raises(DomainError):
            fr.fredholm_logdet(2.0, ModelParams(0.5, 0.0), 64, gamma=1.5)


class TestLogdetConverged:
    def test_converges_by_256(self):
        res = fr.logdet_converged(6.0, ModelParams(0.5, 0.0), 1e-10)
        assert res.order <= 256
        assert res.err_est < 1e-10

    def test_gamma_zero_immediate(self):
        res = fr.logdet_converged(2.0, ModelParams(0.0, 0.0), 1e-10)
        assert res.f == 0.0

    def test_err_history_decreasing(self):
        # doubling history examined below the machine plateau (n >= 32 is
        # already converged to ~1e-14 for this kernel)
        p = ModelParams(0.9, 1.0)
        vals = [fr.fredholm_logdet(4.0, p, n).f for n in (4, 8, 16, 32)]
        errs = [abs(b - a) for a, b in zip(vals, vals[1:])]
        assert errs[2] < errs[1] < errs[0]

    def test_spectral_rate(self):
        # err drops by >= 10x per doubling while above the roundoff floor
        p = ModelParams(0.7, 0.0)
        vals = [fr.fredholm_logdet(5.0, p, n).f for n in (8, 16, 32)]
        e1, e2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
        assert e2 <= 0.1 * e1 or e2 < 1e-13


class TestResolventTrace:
    def test_matches_finite_difference(self):
        h = 1e-3
        for s, g in ((3.0, 0.5), (2.0, 0.7)):
            p = ModelParams(g, 0.0)
            fd = (fr.fredholm_logdet(s + h, p, 128).f
                  - fr.fredholm_logdet(s - h, p, 128).f) / (2 * h)
            assert fr.resolvent_boundary_trace(s, p, 128) == pytest.approx(fd, abs=1e-6)

    def test_gamma_zero(self):
        assert fr.resolvent_boundary_trace(3.0, ModelParams(0.0, 0.0), 64) == 0.0

    def test_matches_h_asymptotics_at_10(self):
        from pearceydet.asymptotics import h_large_s
        p = ModelParams(0.5, 0.0)
        val = fr.resolvent_boundary_trace(10.0, p, 256)
        assert abs(val - 2 * h_large_s(10.0, p)) <= 2e-2 * abs(val)


class TestMoments:
    def test_mean_equals_density_integral(self):
        s, rho, n = 2.0, 0.0, 128
        mean, _ = fr.moments_trace(s, rho, n)
        rule = fr.gauss_legendre(200)
        xs = s * rule.nodes
        dens = np.array([kernel_diagonal_band(float(x), float(x), rho) for x in xs])
        direct = float((s * rule.weights * dens).sum())
        assert mean == pytest.approx(direct, abs=1e-8)

    def test_trace_vs_mgf(self):
        mt = fr.moments_trace(3.0, 0.0, 128)
        mm = fr.moments_mgf(3.0, 0.0, 128)
        assert mt[0] == pytest.approx(mm[0], abs=1e-6)
        assert mt[1] == pytest.approx(mm[1], abs=1e-5)

    def test_small_interval_limit(self):
        # E N(s) -> 2 s K(0,0;rho) as s -> 0+
        s, rho = 0.05, 0.0
        mean, _ = fr.moments_mgf(s, rho, 32)
        assert mean == pytest.approx(2 * s * kernel_diagonal_band(0.0, 0.0, rho),
                                     abs=1e-4)
