import dataclasses

import numpy as np
import pytest

from soslyap.pde import ParabolicPde2D, kiss_model
from soslyap.poly import Polynomial, parse_polynomial as P
from soslyap.sos import (Certificate, DegreeProfile, SosError, SosProgram,
                         assemble, load_certificate, parameterize,
                         save_certificate, solve_identities,
                         verify_certificate)


class TestDegreeProfile:
    def test_defaults_constant_coeffs(self):
        prof = DegreeProfile.defaults(kiss_model(2, 4), 4)
        assert prof.deg_s == 4
        assert prof.deg_p == 4          # deg_s + max coeff degree (0)
        assert prof.deg_n == 2          # deg_s - 2
        assert prof.deg_qm >= 4

    def test_defaults_polynomial_coeffs(self):
        model = ParabolicPde2D(a=P("1"), c=P("1"), f=P("x1^4"))
        prof = DegreeProfile.defaults(model, 8)
        assert prof.deg_p == 12         # deg_s + 4
        assert prof.deg_qm % 2 == 0

    def test_rejects_odd_deg_s(self):
        with pytest.raises(SosError):
            DegreeProfile.defaults(kiss_model(1, 0), 3)


class TestProgramLayout:
    def test_scalar_multiplier_gram_side(self):
        prof = DegreeProfile(deg_s=4, deg_p=4, deg_n=2, deg_qm=4)
        program = parameterize(prof)
        # n1 Gram over basis of degree 1: 3 monomials
        assert program.block_sides[0] == 3

    def test_matrix_multiplier_kron_side(self):
        prof = DegreeProfile(deg_s=4, deg_p=4, deg_n=2, deg_qm=2)
        program = parameterize(prof)
        # matrix Gram over basis(1) kron R^3: 9
        assert program.block_sides[2] == 9

    def test_decay_gamma_zero_matches_stability(self):
        prof = DegreeProfile(deg_s=4, deg_p=4, deg_n=2, deg_qm=4)
        model = kiss_model(2, 4)
        inst_stab = assemble(model, parameterize(prof))
        inst_decay = assemble(model, parameterize(prof, gamma=0.0))
        np.testing.assert_allclose(inst_stab.b, inst_decay.b)
        for a1, a2 in zip(inst_stab.A, inst_decay.A):
            assert (a1 != a2).nnz == 0

    def test_gamma_must_be_nonnegative(self):
        prof = DegreeProfile(deg_s=4, deg_p=4, deg_n=2, deg_qm=4)
        with pytest.raises(SosError):
            parameterize(prof, gamma=-1.0)


class TestSolveIdentities:
    def test_zero_pde_trivial_certificate(self):
        prof = DegreeProfile(deg_s=2, deg_p=2, deg_n=0, deg_qm=2)
        outcome = solve_identities(ParabolicPde2D(), prof, gamma=0.0)
        assert outcome.status == "certified"
        cert = outcome.certificate
        report = verify_certificate(ParabolicPde2D(), cert)
        assert report.passed

    def test_kiss_decay_certified(self):
        model = kiss_model(2, 4)
        prof = DegreeProfile.defaults(model, 4)
        outcome = solve_identities(model, prof, gamma=30.0)
        assert outcome.status == "certified"
        assert verify_certificate(model, outcome.certificate).passed

    def test_kiss_decay_beyond_spectrum_rejected(self):
        # true decay rate of KISS(2,4) is 4*pi^2 - 4; gamma = 100 exceeds
        # twice that and must not certify at any degree
        model = kiss_model(2, 4)
        prof = DegreeProfile.defaults(model, 4)
        outcome = solve_identities(model, prof, gamma=100.0)
        assert outcome.status != "certified"

    def test_unstable_kiss_never_certified(self):
        model = kiss_model(0.1, 4)
        for deg_s in (4, 6):
            prof = DegreeProfile.defaults(model, deg_s)
            outcome = solve_identities(model, prof)
            assert outcome.status != "certified"

    def test_monotone_in_gamma(self):
        model = kiss_model(2, 4)
        prof = DegreeProfile.defaults(model, 4)
        hi = solve_identities(model, prof, gamma=30.0)
        lo = solve_identities(model, prof, gamma=15.0)
        assert hi.status == "certified" and lo.status == "certified"


@pytest.fixture(scope="module")
def kiss_cert():
    model = kiss_model(2, 4)
    prof = DegreeProfile.defaults(model, 4)
    outcome = solve_identities(model, prof, gamma=30.0)
    assert outcome.status == "certified"
    return model, outcome.certificate


class TestVerification:
    def test_report_fields(self, kiss_cert):
        model, cert = kiss_cert
        report = verify_certificate(model, cert)
        assert report.passed
        assert report.identity_residual < 1e-6
        assert report.gram_min_eig >= -1e-7
        assert report.grid_min_eig >= -1e-6

    def test_scaling_invariance(self, kiss_cert):
        model, cert = kiss_cert
        assert verify_certificate(model, cert.scaled(2.0)).passed
        assert verify_certificate(model, cert.scaled(0.25)).passed

    def test_perturbation_detected(self, kiss_cert):
        model, cert = kiss_cert
        bumped = cert.s + Polynomial.monomial(1, 0, 1e-2)
        broken = dataclasses.replace(cert, s=bumped)
        report = verify_certificate(model, broken)
        assert not report.passed
        assert report.identity_residual > 1e-6

    def test_save_load_roundtrip(self, kiss_cert, tmp_path):
        model, cert = kiss_cert
        path = tmp_path / "cert.json"
        save_certificate(cert, str(path))
        back = load_certificate(str(path))
        assert back.gamma == cert.gamma
        assert back.s == cert.s
        assert verify_certificate(model, back).passed
