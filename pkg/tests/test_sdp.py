import filecmp

import numpy as np
import pytest

from soslyap.sdp import (Block, InstanceBuilder, SdpError, SolveOptions,
                         export_sdpa, import_sdpa, import_solution, solve,
                         split_imported_solution, write_solution)


def scalar_box_instance():
    """maximize tr(X), X >= 0 scalar, X + slack = 1 -> optimum 1."""
    builder = InstanceBuilder([Block("psd", 1), Block("diag", 1)], 1)
    builder.add_entry(0, 0, 0, 0, 1.0)
    builder.add_entry(0, 1, 0, 0, 1.0)
    builder.b[0] = 1.0
    builder.C[0][0, 0] = 1.0
    return builder.build()


def correlation_instance():
    """maximize t with [[1,t],[t,1]] >= 0 -> t = 1."""
    builder = InstanceBuilder([Block("psd", 2)], 3, n_free=1)
    builder.add_entry(0, 0, 0, 0, 1.0)
    builder.b[0] = 1.0
    builder.add_entry(1, 0, 1, 1, 1.0)
    builder.b[1] = 1.0
    builder.add_entry(2, 0, 0, 1, 1.0)
    builder.add_free(2, 0, -2.0)  # 2*X01 - 2*t = 0 (symmetric pair)
    builder.c_free[0] = 1.0
    return builder.build()


def infeasible_instance():
    """X = -1 on a 1x1 PSD block."""
    builder = InstanceBuilder([Block("psd", 1)], 1)
    builder.add_entry(0, 0, 0, 0, 1.0)
    builder.b[0] = -1.0
    return builder.build()


class TestSolve:
    def test_scalar_box(self):
        report = solve(scalar_box_instance())
        assert report.status == "optimal"
        assert report.primal_obj == pytest.approx(1.0, abs=1e-7)
        assert report.gap <= 1e-8

    def test_correlation(self):
        report = solve(correlation_instance())
        assert report.status == "optimal"
        assert report.primal_obj == pytest.approx(1.0, abs=1e-7)
        assert report.gap <= 1e-8

    def test_infeasible(self):
        report = solve(infeasible_instance())
        assert report.status == "infeasible"
        assert report.dual_ray is not None

    def test_unbounded(self):
        builder = InstanceBuilder([Block("psd", 1)], 1, n_free=1)
        builder.add_entry(0, 0, 0, 0, 1.0)
        builder.add_free(0, 0, -1.0)  # X - t = 0, maximize t
        builder.c_free[0] = 1.0
        report = solve(builder.build())
        assert report.status == "unbounded"

    def test_options(self):
        report = solve(scalar_box_instance(),
                       SolveOptions(gap_tol=1e-10, max_iter=50))
        assert report.status == "optimal"
        assert report.iterations <= 50


class TestSdpaFormat:
    def test_trivial_file_shape(self, tmp_path):
        path = tmp_path / "t.dat-s"
        export_sdpa(scalar_box_instance(), str(path))
        lines = [ln for ln in path.read_text().splitlines()
                 if not ln.startswith('"')]
        # m / nblocks / sizes / b vector / entry lines
        assert int(lines[0].split()[0]) == 1
        assert len(lines) >= 5

    def test_export_import_export_identical(self, tmp_path):
        p1, p2 = tmp_path / "a.dat-s", tmp_path / "b.dat-s"
        export_sdpa(correlation_instance(), str(p1))
        export_sdpa(import_sdpa(str(p1)), str(p2))
        assert filecmp.cmp(str(p1), str(p2), shallow=False)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "t.dat-s"
        export_sdpa(scalar_box_instance(), str(path))
        text = path.read_text().splitlines()
        path.write_text("\n".join(text[:2]))
        with pytest.raises(SdpError):
            import_sdpa(str(path))

    def test_solution_roundtrip(self, tmp_path):
        inst = scalar_box_instance()
        path = tmp_path / "t.sol"
        # write in the exported (split free variables) layout
        export_path = tmp_path / "i.dat-s"
        export_sdpa(inst, str(export_path))
        file_inst = import_sdpa(str(export_path))
        file_report = solve(file_inst)
        write_solution(str(path), file_report.y, file_report.X)
        y, X_all = import_solution(str(path), file_inst)
        X_own, u = split_imported_solution(inst, X_all)
        assert X_own[0][0, 0] == pytest.approx(1.0, abs=1e-6)

    def test_solution_1x1_value(self, tmp_path):
        inst = scalar_box_instance()
        report = solve(inst)
        assert report.X[0][0, 0] == pytest.approx(1.0, abs=1e-6)
