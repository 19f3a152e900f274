import json
import math

import numpy as np
import pytest

import geomflow as gf
from geomflow.cli import main, parse_number, parse_shape
from geomflow.errors import ConfigError
from geomflow.geometry import load_snapshot_csv, save_snapshot_csv


class TestParsing:
    def test_rational_forms(self):
        assert parse_number("1/1280") == 1.0 / 1280.0
        assert parse_number("1e-3") == 1e-3
        assert parse_number("0.25") == 0.25
        assert parse_number(" 3/4 ") == 0.75
        with pytest.raises(ConfigError):
            parse_number("abc")
        with pytest.raises(ConfigError):
            parse_number("1/0")

    def test_shape_forms(self):
        assert parse_shape("circle") == gf.Circle(1.0)
        assert parse_shape("ellipse:2,1") == gf.Ellipse(2.0, 1.0)
        assert parse_shape("tube:4,0.5") == gf.Tube(4.0, 0.5)
        with pytest.raises(ConfigError):
            parse_shape("frobnicator")


class TestRunCommand:
    def test_csf_circle_final_area(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["run", "--flow", "csf", "--shape", "circle", "--n", "128",
                   "--tau", "1e-3", "--t-end", "0.25", "--out-dir", str(out)])
        assert rc == 0
        snaps = sorted(out.glob("snapshot_*.csv"))
        assert len(snaps) == 1
        curve, t = load_snapshot_csv(snaps[0])
        assert t == pytest.approx(0.25)
        # within 1e-3 relative of the exact area pi (1 - 2T): the N=128
        # polygon deficit plus radius drift land at 1.0e-3 relative
        assert gf.enclosed_area(curve) == pytest.approx(math.pi * 0.5, rel=1e-3)
        assert (out / "diagnostics.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        for path in manifest["outputs"]:
            assert (tmp_path / path).exists() or __import__("os").path.exists(path)

    def test_missing_flow_exits_2(self, tmp_path, capsys):
        rc = main(["run", "--shape", "circle", "--tau", "1e-3", "--t-end", "0.1",
                   "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "flow" in capsys.readouterr().err

    def test_non_integral_steps_exit_2(self, tmp_path):
        rc = main(["run", "--flow", "csf", "--shape", "circle", "--tau", "3e-3",
                   "--t-end", "0.05", "--out-dir", str(tmp_path)])
        assert rc == 2

    def test_solver_failure_exit_3_names_step(self, tmp_path, capsys, monkeypatch):
        from geomflow import schemes as schemes_mod
        from geomflow.errors import SingularSystem

        def explode(flow, state, tau):
            raise SingularSystem("synthetic")

        monkeypatch.setattr(schemes_mod, "bgn2_step", explode)
        rc = main(["run", "--flow", "csf", "--shape", "circle", "--tau", "1e-2",
                   "--t-end", "0.1", "--out-dir", str(tmp_path)])
        assert rc == 3
        assert "step 1" in capsys.readouterr().err

    def test_snapshot_times_and_manifest_round_trip(self, tmp_path):
        out1 = tmp_path / "a"
        rc = main(["run", "--flow", "sdf", "--shape", "ellipse:2,1", "--n", "64",
                   "--tau", "1/160", "--t-end", "0.1",
                   "--snapshot-times", "0.05,0.1", "--out-dir", str(out1)])
        assert rc == 0
        snaps1 = sorted(out1.glob("snapshot_*.csv"))
        assert len(snaps1) == 2
        # re-running from the manifest's echoed config is bit-identical
        manifest = json.loads((out1 / "manifest.json").read_text())
        cfg_file = tmp_path / "replay.json"
        cfg_file.write_text(json.dumps(manifest["config"]))
        out2 = tmp_path / "b"
        rc = main(["run", "--config", str(cfg_file), "--out-dir", str(out2)])
        assert rc == 0
        snaps2 = sorted(out2.glob("snapshot_*.csv"))
        assert [p.name for p in snaps1] == [p.name for p in snaps2]
        for p1, p2 in zip(snaps1, snaps2):
            assert p1.read_bytes() == p2.read_bytes()

    def test_bad_snapshot_time_exit_2(self, tmp_path):
        rc = main(["run", "--flow", "csf", "--shape", "circle", "--tau", "1e-2",
                   "--t-end", "0.1", "--snapshot-times", "0.033",
                   "--out-dir", str(tmp_path)])
        assert rc == 2

    def test_env_overrides_file_flags_override_env(self, tmp_path, monkeypatch):
        cfg_file = tmp_path / "c.json"
        cfg_file.write_text(json.dumps({
            "flow": "csf", "shape": "circle", "tau": "1e-2", "t_end": 0.05, "n": 16}))
        monkeypatch.setenv("GEOMFLOW_N", "24")
        out = tmp_path / "o1"
        rc = main(["run", "--config", str(cfg_file), "--out-dir", str(out)])
        assert rc == 0
        curve, _ = load_snapshot_csv(sorted(out.glob("snapshot_*.csv"))[0])
        assert curve.n == 24  # env beat the file
        out2 = tmp_path / "o2"
        rc = main(["run", "--config", str(cfg_file), "--n", "32", "--out-dir", str(out2)])
        assert rc == 0
        curve, _ = load_snapshot_csv(sorted(out2.glob("snapshot_*.csv"))[0])
        assert curve.n == 32  # flag beat the env


class TestMetricCommand:
    @pytest.fixture()
    def square_files(self, tmp_path):
        square = gf.PolygonalCurve(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]))
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        save_snapshot_csv(a, square, 0.0)
        save_snapshot_csv(b, square.translated([0.5, 0.0]), 0.0)
        return a, b

    def test_identical_files(self, square_files, capsys):
        a, _ = square_files
        rc = main(["metric", str(a), str(a), "--kind", "manifold"])
        assert rc == 0
        assert float(capsys.readouterr().out) == 0.0

    def test_shifted_squares_manifold_and_hausdorff(self, square_files, capsys):
        a, b = square_files
        assert main(["metric", str(a), str(b), "--kind", "manifold"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-12)
        assert main(["metric", str(a), str(b), "--kind", "hausdorff"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-9)

    def test_parse_failure_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("not a snapshot\n")
        rc = main(["metric", str(bad), str(bad), "--kind", "manifold"])
        assert rc == 2

    def test_size_mismatch_exit_4(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        save_snapshot_csv(a, gf.equidistributed_sample(gf.Circle(1), 16), 0.0)
        save_snapshot_csv(b, gf.equidistributed_sample(gf.Circle(1), 20), 0.0)
        rc = main(["metric", str(a), str(b), "--kind", "l2"])
        assert rc == 4


class TestOtherCommands:
    def test_shapes_lists_catalog(self, capsys):
        assert main(["shapes"]) == 0
        out = capsys.readouterr().out
        for name in ("circle", "ellipse", "tube", "flower", "nonconvex"):
            assert name in out

    def test_converge_small(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("GEOMFLOW_CACHE_DIR", str(tmp_path / "cache"))
        rc = main(["converge", "--flow", "csf", "--shape", "circle",
                   "--scheme", "bgn2", "--metric", "manifold", "--tau0", "1/20",
                   "--levels", "2", "--n", "200", "--t-end", "0.25",
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        csvs = list(tmp_path.glob("converge_*.csv"))
        jsons = list(tmp_path.glob("converge_*.json"))
        assert len(csvs) == 1 and len(jsons) == 1
        report = json.loads(jsons[0].read_text())
        assert 1.5 <= report["orders"][0] <= 3.0  # coarse tau: pre-asymptotic

    def test_cpu_compare_small(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GEOMFLOW_CACHE_DIR", str(tmp_path / "cache"))
        rc = main(["cpu-compare", "--flow", "csf", "--shape", "circle",
                   "--n-list", "40,80", "--t-end", "0.05", "--schemes", "bgn2",
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        lines = list(tmp_path.glob("cpu_*.csv"))[0].read_text().strip().splitlines()
        assert len(lines) == 3
