import cmath
import math

import numpy as np
import pytest

from pearceydet import chf
from pearceydet.errors import DomainError, NumericsError
from pearceydet.specfun import digamma, ln_gamma, EULER_GAMMA

BETAS = (0.05j, 0.11j, 0.3j)


class TestSectorGeometry:
    def test_sector_of(self):
        assert chf.sector_of(cmath.exp(0.2j)) == 1
        assert chf.sector_of(cmath.exp(1.2j)) == 2
        assert chf.sector_of(cmath.exp(2.8j)) == 3
        assert chf.sector_of(-1 - 0.5j) == 4
        assert chf.sector_of(cmath.exp(-1.8j)) == 5
        assert chf.sector_of(cmath.exp(-0.3j)) == 6

    def test_point_validation(self):
        with pytest.raises(DomainError):
            chf.SectorPoint(1.0 + 1.0j, 3)  # wrong sector
        with pytest.raises(DomainError):
            chf.SectorPoint(30.0 + 1.0j, 1)  # |z| too large


class TestPhiChf:
    def test_beta_zero_diagonal(self):
        z = 1.0 + 1.0j
        phi = chf.phi_chf(chf.SectorPoint(z, 1), 0.0)
        expected = np.diag([cmath.exp(-0.5j * z), cmath.exp(0.5j * z)])
        assert np.abs(phi - expected).max() == 0.0

    @pytest.mark.parametrize("beta", BETAS)
    def test_det_constant_in_sector(self, beta):
        d1 = np.linalg.det(chf.phi_chf(chf.SectorPoint(1 + 1j, 1), beta))
        d2 = np.linalg.det(chf.phi_chf(chf.SectorPoint(2 + 2j, 1), beta))
        assert abs(d1 - d2) < 1e-9
        assert d1 == pytest.approx(1.0, abs=1e-12)

    def test_infinity_normalization(self):
        # remainder is O(1/z); measured 6.0e-3 at |z| = 25 for beta = 0.11i
        beta = 0.11j
        z = 25j
        phi = chf.phi_chf(chf.SectorPoint(z, 2), beta)
        zb = cmath.exp(beta * cmath.log(z))
        undo = np.diag([cmath.exp(0.5j * z) * zb, cmath.exp(-0.5j * z) / zb])
        assert np.abs(phi @ undo - np.eye(2)).max() < 6.5e-3

    def test_rejects_bad_beta(self):
        with pytest.raises(DomainError):
            chf.phi_chf(chf.SectorPoint(1 + 1j, 1), 0.3 + 0.1j)


class TestJumps:
    @pytest.mark.parametrize("beta", BETAS)
    @pytest.mark.parametrize("ray", range(1, 7))
    def test_residuals(self, beta, ray):
        worst = max(chf.chf_jump_residual(ray, r, beta) for r in (0.5, 1.0, 2.0, 5.0))
        assert worst < 1e-9

    def test_beta_zero_unipotent_rays(self):
        for ray in (2, 3, 5, 6):
            assert chf.chf_jump_residual(ray, 1.0, 0.0) < 1e-12

    def test_radius_domain(self):
        with pytest.raises(DomainError):
            chf.chf_jump_residual(1, 20.0, 0.11j)


class TestOriginExpansion:
    @pytest.mark.parametrize("beta", BETAS)
    def test_upsilon0_closed_form(self, beta):
        exp = chf.chf_origin_expansion(beta)
        u0 = np.array([
            [cmath.exp(ln_gamma(1 - beta) - beta * math.pi * 1j),
             cmath.exp(-ln_gamma(beta)) * (digamma(1 - beta) + 2 * EULER_GAMMA)],
            [cmath.exp(ln_gamma(1 + beta)),
             -cmath.exp(beta * math.pi * 1j - ln_gamma(-beta))
             * (digamma(-beta) + 2 * EULER_GAMMA)]], dtype=complex)
        assert np.abs(exp.upsilon0 - u0).max() < 1e-12
        assert abs(np.linalg.det(exp.upsilon0)) > 1e-6

    @pytest.mark.parametrize("beta", BETAS)
    def test_upsilon1_21(self, beta):
        exp = chf.chf_origin_expansion(beta)
        closed = beta * math.pi * 1j * cmath.exp(-beta * math.pi * 1j) \
            / cmath.sin(beta * math.pi)
        assert abs(exp.upsilon1_21 - closed) < 1e-10

    def test_numerical_first_order_match(self):
        # raises internally if the sampled remainder exceeds the O(z^2) budget
        chf.chf_origin_expansion(0.11j, verify_radii=(1e-2, 5e-3),
                                 first_order_budget=1e-4)

    def test_tight_budget_fails(self):
        with pytest.raises(NumericsError):
            chf.chf_origin_expansion(0.11j, verify_radii=(1e-2,),
                                     first_order_budget=1e-12)

    def test_degenerate_beta(self):
        with pytest.raises(DomainError):
            chf.chf_origin_expansion(0.0)


class TestGammaBetaConsistency:
    @pytest.mark.parametrize("beta", BETAS)
    def test_unipotent_coefficient_identity(self, beta):
        # sin(beta pi)/pi conjugated by e^{beta pi i sigma3/2} equals
        # -gamma/(2 pi i) with gamma = 1 - e^{2 beta pi i}
        gamma_c = 1.0 - cmath.exp(2 * beta * math.pi * 1j)
        lhs = cmath.sin(beta * math.pi) / math.pi * cmath.exp(beta * math.pi * 1j)
        rhs = -gamma_c / (2j * math.pi)
        assert abs(lhs - rhs) < 1e-12
        assert abs(gamma_c - (-2j * cmath.exp(beta * math.pi * 1j)
                              * cmath.sin(beta * math.pi))) < 1e-12


class TestReport:
    def test_report_structure(self):
        rep = chf.verification_report(0.11j, radii=(1.0, 2.0))
        assert rep["max_ray_residual"] < 1e-9
        assert set(rep["ray_residuals"].keys()) == {str(k) for k in range(1, 7)}
        assert "upsilon1_21" in rep
