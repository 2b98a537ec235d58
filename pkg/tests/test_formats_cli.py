import json

import numpy as np
import pytest

from decor_uniform import corpus, formats
from decor_uniform.cli import main
from decor_uniform.errors import FormatError
from decor_uniform.mesh import edge_key


@pytest.fixture
def problem_files(tmp_path):
    paths = {}
    for name, builder in (("tetra", corpus.tetrahedron_problem),
                          ("torus", corpus.torus_problem),
                          ("genus2", corpus.genus2_problem)):
        mesh, metric = builder()
        path = tmp_path / f"{name}.json"
        formats.save_json(path, formats.problem_payload(mesh, metric))
        paths[name] = str(path)
    target = tmp_path / "target_neg1.json"
    formats.save_json(target, {"values": [-1.0] * 15})
    paths["target_neg1"] = str(target)
    return paths


class TestProblemFiles:
    def test_round_trip(self, tmp_path):
        mesh, metric = corpus.genus2_problem()
        path = tmp_path / "p.json"
        formats.save_json(path, formats.problem_payload(mesh, metric, alpha=2.0, constant=True))
        problem = formats.load_problem(path)
        assert problem.mesh == mesh
        assert problem.alpha == 2.0
        assert problem.constant
        assert np.allclose(problem.metric.radii, metric.radii)
        for e in mesh.edges:
            assert problem.metric.lengths[e] == metric.lengths[e]

    def test_unknown_field_rejected(self, tmp_path):
        mesh, metric = corpus.tetrahedron_problem()
        payload = formats.problem_payload(mesh, metric)
        payload["extra"] = 1
        path = tmp_path / "p.json"
        formats.save_json(path, payload)
        with pytest.raises(FormatError):
            formats.load_problem(path)

    def test_missing_length_rejected(self, tmp_path):
        mesh, metric = corpus.tetrahedron_problem()
        payload = formats.problem_payload(mesh, metric)
        del payload["metric"]["lengths"]["0-1"]
        path = tmp_path / "p.json"
        formats.save_json(path, payload)
        with pytest.raises(FormatError):
            formats.load_problem(path)

    def test_bad_edge_key_rejected(self, tmp_path):
        mesh, metric = corpus.tetrahedron_problem()
        payload = formats.problem_payload(mesh, metric)
        payload["metric"]["lengths"]["1-0"] = 3.0
        path = tmp_path / "p.json"
        formats.save_json(path, payload)
        with pytest.raises(FormatError):
            formats.load_problem(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text("{not json")
        with pytest.raises(FormatError):
            formats.load_problem(path)

    def test_save_load_save_bit_stable(self, tmp_path):
        mesh, metric = corpus.genus2_problem()
        path1 = tmp_path / "a.json"
        path2 = tmp_path / "b.json"
        formats.save_json(path1, formats.problem_payload(mesh, metric, alpha=1.234567890123))
        formats.save_json(path2, json.loads(path1.read_text()))
        assert path1.read_bytes() == path2.read_bytes()


class TestCmdCheck:
    def test_valid_file(self, problem_files, capsys):
        assert main(["check", problem_files["tetra"]]) == 0
        out = capsys.readouterr().out
        assert "chi=2" in out
        assert "4 pi" in out

    def test_separation_violation_exit2(self, tmp_path, capsys):
        mesh, metric = corpus.tetrahedron_problem()
        metric.lengths[edge_key(0, 1)] = 2.0
        path = tmp_path / "bad.json"
        formats.save_json(path, formats.problem_payload(mesh, metric))
        assert main(["check", str(path)]) == 2
        assert "inversive distance" in capsys.readouterr().out

    def test_parse_error_exit1(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{]")
        assert main(["check", str(path)]) == 1


class TestCmdCurvature:
    def test_tetra_rows(self, problem_files, capsys):
        assert main(["curvature", problem_files["tetra"], "--alpha", "2"]) == 0
        out = capsys.readouterr().out
        assert out.count("3.14159265358979") >= 8  # K and R_2 columns both pi

    def test_flat_torus_zero(self, problem_files, capsys):
        assert main(["curvature", problem_files["torus"], "--alpha", "2"]) == 0
        out = capsys.readouterr().out
        assert "residual = " in out

    def test_genus2_total(self, problem_files, capsys):
        assert main(["curvature", problem_files["genus2"]]) == 0
        out = capsys.readouterr().out
        assert "-12.566370614359" in out  # -4 pi


class TestCmdUniformize:
    def test_torus_constant(self, problem_files, tmp_path, capsys):
        out = str(tmp_path / "r.json")
        rc = main(["uniformize", problem_files["torus"], "--alpha", "2", "--constant", "--out", out])
        assert rc == 0
        data = json.loads(open(out).read())
        assert data["residual"] < 1e-10
        assert data["verification"]["passed"]
        assert main(["verify", out]) == 0

    def test_genus2_target_then_verify(self, problem_files, tmp_path):
        out = str(tmp_path / "r.json")
        rc = main(["uniformize", problem_files["genus2"], "--alpha", "2",
                   "--target", problem_files["target_neg1"], "--out", out])
        assert rc == 0
        assert main(["verify", out]) == 0

    def test_unsupported_case_exit3(self, problem_files, capsys):
        rc = main(["uniformize", problem_files["tetra"], "--alpha", "2", "--constant"])
        assert rc == 3
        err = capsys.readouterr().err
        assert "supported sign cases" in err
        assert "chi<0" in err and "alpha=0" in err

    def test_missing_alpha_exit1(self, problem_files, capsys):
        assert main(["uniformize", problem_files["tetra"], "--constant"]) == 1

    def test_trace_output(self, problem_files, tmp_path, capsys):
        out = str(tmp_path / "r.json")
        rc = main(["uniformize", problem_files["tetra"], "--alpha", "-1", "--constant",
                   "--trace", "--out", out])
        assert rc == 0
        assert "iter " in capsys.readouterr().out


class TestCmdVerify:
    @pytest.fixture
    def result_file(self, problem_files, tmp_path):
        out = str(tmp_path / "r.json")
        assert main(["uniformize", problem_files["genus2"], "--alpha", "2",
                     "--target", problem_files["target_neg1"], "--out", out]) == 0
        return out

    def test_fresh_result(self, result_file):
        assert main(["verify", result_file]) == 0

    def test_tampered_u(self, result_file, tmp_path):
        data = json.loads(open(result_file).read())
        data["u"][0] += 1e-3
        tampered = tmp_path / "t.json"
        formats.save_json(tampered, data)
        assert main(["verify", str(tampered)]) == 4

    def test_tampered_curvature(self, result_file, tmp_path):
        data = json.loads(open(result_file).read())
        data["curvature"]["K"][3] += 1e-6
        tampered = tmp_path / "t.json"
        formats.save_json(tampered, data)
        assert main(["verify", str(tampered)]) == 4

    def test_reserialized_result(self, result_file, tmp_path):
        data = json.loads(open(result_file).read())
        again = tmp_path / "again.json"
        formats.save_json(again, data)
        assert main(["verify", str(again)]) == 0
        assert open(result_file, "rb").read() == again.read_bytes()

    def test_unknown_result_field(self, result_file, tmp_path):
        data = json.loads(open(result_file).read())
        data["bogus"] = True
        bad = tmp_path / "bad.json"
        formats.save_json(bad, data)
        assert main(["verify", str(bad)]) == 1
