import numpy as np
import pytest

from soslyap import certificate as cb
from soslyap.certificate import (CertificateInputs, build_M, build_Q,
                                 build_S, build_spacing,
                                 quadratic_form_integral,
                                 quadrature_identity_check)
from soslyap.fd import apply_operator, interior_nodes
from soslyap.pde import ParabolicPde2D, kiss_model
from soslyap.poly import Polynomial, parse_polynomial as P

ZERO = Polynomial.zero()
ONE = Polynomial.constant(1.0)


def inputs(s=ONE, p1=ZERO, p2=ZERO, p3=ZERO, p4=ZERO, **kw):
    return CertificateInputs(s=s, p1=p1, p2=p2, p3=p3, p4=p4, **kw)


class TestBuildQ:
    def test_zero_model(self):
        assert build_Q(ParabolicPde2D(), P("1+x1")).is_zero()

    def test_zero_weight(self):
        assert build_Q(kiss_model(2, 4), ZERO).is_zero()

    def test_kiss_constant_weight(self):
        q = build_Q(kiss_model(2, 4), ONE)
        assert q.get(0, 0) == P("8")      # 2*s*f
        assert q.get(1, 1) == P("-4")     # -2*s*a
        assert q.get(2, 2) == P("-4")
        for key in ((0, 1), (0, 2), (1, 2)):
            assert q.get(*key).is_zero()

    def test_weight_derivative_terms(self):
        # s = x1 against pure diffusion a: (0,1) entry picks up -(s a)_x1
        q = build_Q(kiss_model(1, 0), P("x1"))
        assert q.get(0, 1) == P("-1")


class TestSpacing:
    def test_direct_formula(self):
        u1, u2, u3, u4 = build_spacing(P("x1*(1-x1)"), ZERO, ZERO, ZERO)
        assert u1.get(0, 0) == P("1-2*x1")
        assert u1.get(0, 1) == P("x1-x1^2")
        assert u1.get(1, 1).is_zero()
        assert u2.is_zero() and u3.is_zero() and u4.is_zero()

    def test_constants(self):
        k = Polynomial.constant(3.0)
        u1, u2, u3, u4 = build_spacing(k, k, k, k)
        assert u1.get(0, 0).is_zero()     # derivative of a constant
        assert u1.get(0, 1) == k
        assert u2.get(0, 2) == k
        assert u3.is_zero() and u4.is_zero()

    def test_antisymmetry_in_p3_p4(self):
        p = P("x1^2*x2")
        _, _, u3, u4 = build_spacing(ZERO, ZERO, p, p)
        assert (u3 + u4).is_zero()


class TestBuildM:
    def test_reduces_to_Q(self):
        model = kiss_model(2, 4)
        s = P("1 + x1*(1-x1)")
        m = build_M(model, inputs(s=s))
        q = build_Q(model, s)
        assert (m - q).is_zero()

    def test_pure_spacing(self):
        m = build_M(ParabolicPde2D(), inputs(p1=P("x1")))
        assert m.get(0, 0) == ONE
        assert m.get(0, 1) == P("x1")
        assert m.get(1, 1).is_zero() and m.get(2, 2).is_zero()


class TestBuildS:
    def test_constant(self):
        s = build_S(ONE)
        assert s.get(0, 0) == ONE
        assert s.get(1, 1).is_zero()

    def test_zero(self):
        assert build_S(ZERO).is_zero()

    def test_weight(self):
        assert build_S(P("1+x1*(1-x1)")).get(0, 0) == P("1+x1-x1^2")


class TestQuadratureIdentity:
    def _du(self, model, u):
        return apply_operator(model, u)

    def test_zero_state(self):
        model = kiss_model(1, 0)
        u = np.zeros((32, 32))
        res = quadrature_identity_check(model, inputs(), u, u)
        assert res == pytest.approx(0.0, abs=1e-12)

    def test_convergence_under_refinement(self):
        model = ParabolicPde2D(a=P("1+x1"), c=P("1+x2"), d=P("x2"),
                               e=P("-x1"), f=P("1-x1*x2"))
        ins = inputs(s=P("1+0.3*x1*x2"), p1=P("0.2*x1*(1-x1)"),
                     p2=P("0.1*x2"), p3=P("0.05*x1*x2"), p4=ZERO)
        residuals = []
        for n in (32, 64, 128):
            xs = interior_nodes(n)
            u = np.sin(np.pi * xs)[:, None] * np.sin(2 * np.pi * xs)[None, :]
            res = quadrature_identity_check(model, ins, u,
                                            self._du(model, u))
            residuals.append(res)
        assert residuals[2] < residuals[0]
        assert residuals[2] < 0.05


class TestSpacingIntegralsVanish:
    """The quadratic form of each spacing matrix integrates to ~0 against
    any admissible state, at second order in the grid spacing."""

    def test_second_order_vanishing(self):
        rng = np.random.default_rng(7)
        basis = [(i, j) for i in range(3) for j in range(3)]
        window = P("x1*(1-x1)*x2*(1-x2)")
        for draw in range(20):
            polys = []
            for _ in range(5):  # p1..p4 and the state factor q
                coeffs = rng.standard_normal(len(basis))
                polys.append(Polynomial({k: c for k, c
                                         in zip(basis, coeffs)}))
            p1, p2, p3, p4, qpoly = polys
            state = window * qpoly
            mats = build_spacing(p1, p2, p3, p4)
            scale = sum(p.coeff_l1() for p in polys) + 1.0
            for mat in mats:
                if mat.is_zero():
                    continue
                vals = []
                for n in (64, 256):
                    xs = interior_nodes(n)
                    u = state(xs[:, None], xs[None, :])
                    vals.append(abs(quadratic_form_integral(mat, u)) / scale)
                # second-order quadrature: refining 4x shrinks ~16x
                assert vals[1] < max(vals[0] / 8.0, 1e-12), \
                    "draw %d: %.3g -> %.3g" % (draw, vals[0], vals[1])
