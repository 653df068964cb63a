import json
import subprocess
import sys

import pytest

from qclab.cli import EXIT_ABORT, EXIT_CONFIG, EXIT_FAILED, EXIT_OK, build_parser, main, run_one
from qclab.config import load_config


def report(out):
    return json.loads((out / "report.json").read_text())


class TestParser:
    def test_subcommands(self):
        args = build_parser().parse_args(["born", "--seed", "3", "--strict"])
        assert args.subcommand == "born" and args.seed == 3 and args.strict

    def test_rejects_unknown(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["teleport"])


class TestExitCodes:
    def test_decompose_passes(self, tmp_path):
        assert main(["decompose", "--out", str(tmp_path)]) == EXIT_OK
        rep = report(tmp_path)
        assert rep["passed"] and rep["status"] == "passed"
        assert all(c["passed"] for c in rep["checks"])
        assert (tmp_path / "decomposition.csv").exists()
        assert "wall_seconds" in json.loads((tmp_path / "meta.json").read_text())

    def test_born_fails_on_literal_gaussian_probe(self, tmp_path):
        assert main(["born", "--out", str(tmp_path)]) == EXIT_FAILED
        failed = [c["name"] for c in report(tmp_path)["checks"] if not c["passed"]]
        assert failed == ["sharp_ratio.gaussian"]

    def test_born_cell_probe_passes(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"sharp": {"probe": "cell"}}))
        assert main(["born", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK

    def test_invalid_config(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"grid": {"n": "many"}}))
        assert main(["decompose", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_invalid_grid_is_config_error(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"grid": {"n": 100}}))
        assert main(["decompose", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
        assert report(tmp_path)["status"] == "config-invalid"

    def test_numerical_abort(self, tmp_path):
        cfg = load_config("spread")
        cfg["dt"] = 0.25
        cfg["duration"] = 1.0
        summary = run_one("spread", cfg, tmp_path)
        assert summary["exit_code"] == EXIT_ABORT
        assert report(tmp_path)["status"] == "numerical-abort"

    def test_all_rejects_config(self, tmp_path):
        assert main(["all", "--config", "x.json", "--out", str(tmp_path)]) == EXIT_CONFIG


class TestDeterminism:
    def test_reports_are_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["decompose", "--out", str(a)]) == EXIT_OK
        assert main(["decompose", "--out", str(b)]) == EXIT_OK
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "decomposition.csv").read_bytes() == (b / "decomposition.csv").read_bytes()

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "qclab", "decompose", "--out", str(tmp_path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "decompose: passed" in proc.stdout
