import numpy as np
import pytest

cvxpy = pytest.importorskip("cvxpy")

from soslyap.external import cross_check, solve_external
from soslyap.pde import kiss_model
from soslyap.sdp import solve
from soslyap.sos import DegreeProfile, assemble, parameterize


@pytest.fixture(scope="module")
def kiss_instance():
    model = kiss_model(2, 4)
    prof = DegreeProfile.defaults(model, 4)
    return assemble(model, parameterize(prof, gamma=30.0))


def test_external_matches_embedded(kiss_instance):
    embedded = solve(kiss_instance)
    external = solve_external(kiss_instance)
    assert embedded.status == "optimal"
    assert external.status == "optimal"
    assert embedded.primal_obj == pytest.approx(external.primal_obj,
                                                abs=1e-5)


def test_cross_check_roundtrip(kiss_instance, tmp_path):
    embedded = solve(kiss_instance)
    obj, X_own, u, y = cross_check(kiss_instance,
                                   str(tmp_path / "kiss"))
    assert obj == pytest.approx(embedded.primal_obj, abs=1e-5)
