import numpy as np
import pytest

from soslyap.pde import (InitialCondition, ModelError, ParabolicPde2D,
                         default_bump_u0, kiss_model, load_model, save_model)
from soslyap.poly import parse_polynomial as P


class TestModel:
    def test_empty_file_is_zero_pde(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        model, u0 = load_model(str(path))
        assert model.is_zero()
        assert u0 is None

    def test_load(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("a = 2\nc = 2\nf = 4\n"
                        "u0 = x1*x2*(1-x1)*(1-x2)\n# comment\n")
        model, u0 = load_model(str(path))
        assert model.a == P("2")
        assert model.f == P("4")
        assert model.b.is_zero()
        assert u0 is not None

    def test_load_errors(self, tmp_path):
        for body in ("nonsense\n", "g = 1\n", "a = 1\na = 2\n", "a = x3\n"):
            path = tmp_path / "bad.txt"
            path.write_text(body)
            with pytest.raises(ModelError):
                load_model(str(path))

    def test_save_roundtrip(self, tmp_path):
        model = ParabolicPde2D(a=P("5*x1^2-15*x1*x2+13*x2^2"),
                               d=P("10*x1-15*x2"), f=P("1"))
        path = tmp_path / "m.txt"
        save_model(model, str(path), u0=default_bump_u0())
        back, u0 = load_model(str(path))
        assert back == model
        assert u0 is not None

    def test_kiss(self):
        m = kiss_model(1.0, 0.0001)
        assert m.a == P("1") and m.c == P("1") and m.f == P("0.0001")
        assert m.b.is_zero() and m.d.is_zero() and m.e.is_zero()
        with pytest.raises(ModelError):
            kiss_model(0.0, 1.0)
        with pytest.raises(ModelError):
            kiss_model(1.0, -1.0)
        kiss_model(1.0, 0.0)  # zero reaction is legal

    def test_max_coeff_degree(self):
        assert kiss_model(1, 2).max_coeff_degree() == 0
        assert ParabolicPde2D(f=P("x1^4")).max_coeff_degree() == 4


class TestInitialCondition:
    def test_boundary_violation(self):
        with pytest.raises(ModelError):
            InitialCondition(poly=P("1"))

    def test_bump_ok(self):
        u0 = default_bump_u0()
        grid = u0.sample(8)
        assert grid.shape == (8, 8)
        assert grid.max() > 0

    def test_grid_ic(self):
        vals = np.ones((4, 4))
        u0 = InitialCondition(grid=vals)
        np.testing.assert_allclose(u0.sample(4), vals)
        with pytest.raises(ModelError):
            u0.sample(8)

    def test_exactly_one_source(self):
        with pytest.raises(ModelError):
            InitialCondition()
        with pytest.raises(ModelError):
            InitialCondition(poly=P("0"), grid=np.zeros((2, 2)))
