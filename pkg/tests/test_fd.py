import math

import numpy as np
import pytest

from soslyap.fd import (FdError, SimConfig, apply_operator, build_operator,
                        estimate_decay_rate, interior_nodes, l2_norm,
                        read_checkpoint, simulate, write_checkpoint,
                        write_norms_csv)
from soslyap.pde import (InitialCondition, ParabolicPde2D, default_bump_u0,
                         kiss_model)
from soslyap.poly import parse_polynomial as P


class TestOperator:
    def test_laplacian_eigenfunction(self):
        # sin(pi x1) sin(pi x2) is an exact eigenfunction of the stencil
        n = 64
        h = 1.0 / (n + 1)
        xs = interior_nodes(n)
        u = np.sin(np.pi * xs)[:, None] * np.sin(np.pi * xs)[None, :]
        lu = apply_operator(kiss_model(1, 0), u)
        lam = -2.0 * (2.0 / h ** 2) * (1.0 - math.cos(math.pi * h))
        np.testing.assert_allclose(lu, lam * u, rtol=1e-10)

    def test_matches_symbolic_derivatives(self):
        model = ParabolicPde2D(a=P("1+x1"), b=P("x1*x2"), c=P("2-x2"),
                               d=P("x2"), e=P("-x1"), f=P("x1+x2"))
        u_poly = P("x1*(1-x1)*x2*(1-x2)*(1+x1+2*x2)")
        expected_poly = (model.a * u_poly.diff(1).diff(1)
                         + model.b * u_poly.diff(1).diff(2)
                         + model.c * u_poly.diff(2).diff(2)
                         + model.d * u_poly.diff(1)
                         + model.e * u_poly.diff(2)
                         + model.f * u_poly)
        errs = []
        for n in (32, 64):
            xs = interior_nodes(n)
            u = u_poly(xs[:, None], xs[None, :])
            lu = apply_operator(model, u)
            exact = expected_poly(xs[:, None], xs[None, :])
            errs.append(np.abs(lu - exact).max())
        assert errs[1] < errs[0] / 3.0  # second-order stencils

    def test_shapes(self):
        L = build_operator(kiss_model(1, 0), 10)
        assert L.shape == (100, 100)


class TestNorm:
    def test_constant_field(self):
        n = 50
        u = np.ones((n, n))
        assert l2_norm(u) == pytest.approx(n / (n + 1.0), rel=1e-12)


class TestSimulate:
    def test_zero_model_constant_norm(self):
        res = simulate(ParabolicPde2D(), default_bump_u0(),
                       SimConfig(n=32, dt=1e-3, t_final=0.05))
        norms = np.asarray(res.norms)
        assert np.abs(norms - norms[0]).max() < 1e-12 * norms[0]

    def test_schemes_agree(self):
        model = kiss_model(1, 0)
        cfgs = [SimConfig(n=32, dt=1e-4, t_final=0.05, scheme=s)
                for s in ("implicit-euler", "crank-nicolson")]
        res = [simulate(model, default_bump_u0(), c) for c in cfgs]
        assert res[0].norms[-1] == pytest.approx(res[1].norms[-1], rel=1e-2)

    def test_growth_flag_not_raised(self):
        res = simulate(kiss_model(0.01, 60), default_bump_u0(),
                       SimConfig(n=16, dt=1e-2, t_final=20.0))
        assert res.blew_up or res.norms[-1] > res.norms[0]

    def test_bad_config(self):
        with pytest.raises(FdError):
            SimConfig(n=4)
        with pytest.raises(FdError):
            SimConfig(scheme="explicit")


class TestDecayRate:
    def test_exact_exponential(self):
        ts = np.linspace(0, 2, 400)
        series = list(zip(ts, np.exp(-5.0 * ts)))
        assert estimate_decay_rate(series) == pytest.approx(5.0, abs=1e-9)

    def test_too_few_samples(self):
        with pytest.raises(FdError):
            estimate_decay_rate([(0.0, 1.0), (0.1, 0.5)])

    def test_nonpositive_norm(self):
        ts = np.linspace(0, 1, 50)
        series = [(t, 1.0 - t) for t in ts]  # hits zero/negative in tail
        with pytest.raises(FdError):
            estimate_decay_rate(series)


class TestIo:
    def test_norms_csv(self, tmp_path):
        res = simulate(kiss_model(1, 0), default_bump_u0(),
                       SimConfig(n=16, dt=1e-3, t_final=0.02))
        path = tmp_path / "norms.csv"
        write_norms_csv(res, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "t,norm"
        assert len(lines) == len(res.norms) + 1

    def test_checkpoint_roundtrip(self, tmp_path):
        u = np.random.default_rng(0).standard_normal((24, 24))
        path = tmp_path / "state.bin"
        write_checkpoint(str(path), u)
        back = read_checkpoint(str(path))
        np.testing.assert_array_equal(back, u)
        # format: 4-byte little-endian count + doubles, row-major
        assert path.stat().st_size == 4 + 24 * 24 * 8

    def test_checkpoint_as_initial_condition(self, tmp_path):
        model = kiss_model(1, 0)
        cfg = SimConfig(n=20, dt=1e-3, t_final=0.01)
        res1 = simulate(model, default_bump_u0(), cfg)
        path = tmp_path / "s.bin"
        write_checkpoint(str(path), res1.final_state)
        u0 = InitialCondition(grid=read_checkpoint(str(path)))
        res2 = simulate(model, u0, cfg)
        assert res2.norms[0] == pytest.approx(res1.norms[-1], rel=1e-12)
