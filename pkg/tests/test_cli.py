import math
import subprocess
import sys

import numpy as np
import pytest

from pathvol import io as pathio

BASE = [sys.executable, "-m", "pathvol.cli"]


def run(*args, cwd=None):
    return subprocess.run(BASE + [str(a) for a in args], capture_output=True,
                          text=True, cwd=cwd)


class TestSolve:
    def test_sine_preset_writes_files(self, tmp_path):
        out = tmp_path / "run"
        res = run("solve", "--omega", "sine", "--eps", "0.05", "--step", "0.003",
                  "--out", out, "--no-timestamp")
        assert res.returncode == 0, res.stderr
        for name in ("phi.csv", "phihat.csv", "bounds.txt", "composites.csv",
                     "omega.csv"):
            assert (out / name).exists()
        rep = pathio.read_report(out / "bounds.txt")
        assert rep["max_lower_violation"] <= 2 * 0.003
        assert rep["max_upper_violation"] <= 2 * 0.003

    def test_zero_noise_gives_identity(self, tmp_path):
        out = tmp_path / "run"
        res = run("solve", "--omega", "zero", "--eps", "0.1", "--out", out,
                  "--no-timestamp")
        assert res.returncode == 0, res.stderr
        phi, _ = pathio.read_continuous(out / "phi.csv")
        assert np.max(np.abs(phi.values - phi.grid)) == 0.0

    def test_eps_sweep_shrinking_gap(self, tmp_path):
        out = tmp_path / "run"
        res = run("solve", "--omega", "kl", "--eps-sweep", "0.1,0.05,0.01",
                  "--out", out, "--no-timestamp", "--seed", "3")
        assert res.returncode == 0, res.stderr
        gaps = [pathio.read_report(out / f"bounds_eps{e}.txt")["uniform_gap"]
                for e in ("0.1", "0.05", "0.01")]
        assert gaps[0] >= gaps[1] >= gaps[2]

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            res = run("solve", "--omega", "brownian", "--eps", "0.05",
                      "--step", "0.003", "--seed", "11", "--out", out,
                      "--no-timestamp")
            assert res.returncode == 0, res.stderr
        for name in ("phi.csv", "phihat.csv", "omega.csv", "composites.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_config_file_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("omega=zero\neps=0.2\nno-timestamp=true\n")
        out = tmp_path / "run"
        res = run("solve", "--config", cfg, "--eps", "0.1", "--out", out)
        assert res.returncode == 0, res.stderr
        _, meta = pathio.read_continuous(out / "phi.csv")
        assert meta["eps"] == 0.1  # flag wins over the file
        assert meta["omega"] == "zero"  # file wins over the default
        assert "# generated" not in (out / "phi.csv").read_text()

    def test_log_heston_column_with_second_noise(self, tmp_path):
        out = tmp_path / "run"
        res = run("solve", "--omega", "kl", "--omega-bar", "brownian",
                  "--eps", "0.05", "--step", "0.003", "--out", out,
                  "--no-timestamp", "--seed", "5")
        assert res.returncode == 0, res.stderr
        kind, meta, rows = pathio.read_csv(out / "composites.csv")
        assert kind == "table"
        assert meta["columns"].split(",") == [
            "t", "eps_phi_prime", "omega_circ_phi_plus_e", "log_heston"]


class TestLimit:
    def test_zero_noise_identity(self, tmp_path):
        out = tmp_path / "run"
        res = run("limit", "--omega", "zero", "--horizon", "1", "--out", out,
                  "--no-timestamp")
        assert res.returncode == 0, res.stderr
        limit, _ = pathio.read_cadlag(out / "phi0.csv")
        for t in (0.0, 0.3, 0.9):
            assert limit.eval(t) == pytest.approx(t, abs=1e-12)

    def test_identity_noise_all_infinite(self, tmp_path):
        out = tmp_path / "run"
        res = run("limit", "--omega", "identity", "--horizon", "1", "--out", out,
                  "--no-timestamp")
        assert res.returncode == 0, res.stderr
        limit, _ = pathio.read_cadlag(out / "phi0.csv")
        assert limit.infinite_from == 0.0
        assert limit.eval(0.7) == math.inf

    def test_sine_staircase(self, tmp_path):
        out = tmp_path / "run"
        res = run("limit", "--omega", "sine", "--horizon", "1", "--out", out,
                  "--no-timestamp")
        assert res.returncode == 0, res.stderr
        limit, _ = pathio.read_cadlag(out / "phi0.csv")
        levels, sizes = limit.jumps()
        assert levels.size >= 2
        assert np.all(sizes > 0.05)

    def test_capped_extension_marks_unresolved(self, tmp_path):
        # the drift reaches ~2 + O(1) on the capped extent, far below the
        # requested level horizon, so the tail levels stay undetermined
        out = tmp_path / "run"
        res = run("limit", "--omega", "brownian", "--horizon",
                  "8", "--max-extent", "2", "--out", out, "--no-timestamp")
        assert res.returncode == 0, res.stderr
        text = (out / "phi0.csv").read_text()
        assert ",NA,NA" in text


class TestVerify:
    def test_weak_suite_passes(self, tmp_path):
        out = tmp_path / "v"
        res = run("verify", "--suite", "weak", "--npaths", "2000", "--out", out)
        assert res.returncode == 0, res.stderr + res.stdout
        assert "weak_equivalence: PASS" in (out / "report.txt").read_text()

    def test_mismatched_law_fails(self, tmp_path):
        out = tmp_path / "v"
        res = run("verify", "--suite", "ig", "--npaths", "800", "--ig-gamma",
                  "3", "--out", out)
        assert res.returncode == 1
        assert "FAIL" in (out / "report.txt").read_text()
        assert (out / "ks_curve.csv").exists()

    def test_beta_zero_trend(self, tmp_path):
        out = tmp_path / "v"
        res = run("verify", "--beta", "0", "--npaths", "2000", "--out", out)
        assert res.returncode == 0, res.stderr + res.stdout
        report = (out / "report.txt").read_text()
        assert "variance_beta0_vbar_small: PASS" in report

    def test_thread_count_invariant_summary(self, tmp_path):
        outs = []
        for threads in (1, 4):
            out = tmp_path / f"v{threads}"
            res = run("verify", "--suite", "weak", "--npaths", "1500",
                      "--threads", threads, "--out", out)
            assert res.returncode == 0, res.stderr + res.stdout
            outs.append((out / "summary.txt").read_bytes())
        assert outs[0] == outs[1]

    def test_dump_paths(self, tmp_path):
        out = tmp_path / "v"
        res = run("verify", "--suite", "ou", "--dump-paths", "2", "--out", out)
        assert res.returncode == 0, res.stderr + res.stdout
        assert (out / "vpath_000.csv").exists()
        assert (out / "vbarpath_001.csv").exists()


class TestRoundtrip:
    def test_identity_recovers_zero_noise(self, tmp_path):
        out = tmp_path / "r"
        res = run("roundtrip", "--phi", "identity", "--eps", "0.1", "--out", out,
                  "--no-timestamp")
        assert res.returncode == 0, res.stderr
        omega, _ = pathio.read_continuous(out / "omega_recovered.csv")
        assert np.max(np.abs(omega.values)) <= 1e-8

    def test_parabola_recovers_identity_noise(self, tmp_path):
        out = tmp_path / "r"
        res = run("roundtrip", "--phi", "parabola", "--eps", "0.1",
                  "--phi-step", str(2.0 ** -14), "--out", out, "--no-timestamp")
        assert res.returncode == 0, res.stderr
        omega, _ = pathio.read_continuous(out / "omega_recovered.csv")
        assert np.max(np.abs(omega.values - omega.grid)) < 1e-6

    def test_quadratic_first_order_error(self, tmp_path):
        out = tmp_path / "r"
        res = run("roundtrip", "--phi", "quadratic", "--eps", "0.1",
                  "--step", str(2.0 ** -10), "--out", out, "--no-timestamp")
        assert res.returncode == 0, res.stderr
        rep = pathio.read_report(out / "roundtrip.txt")
        assert rep["uniform_error"] <= 0.45 * 2.0 ** -10


class TestExitCodes:
    def test_config_error(self, tmp_path):
        res = run("solve", "--omega", "bogus", "--out", tmp_path)
        assert res.returncode == 2

    def test_step_guard_is_config_error(self, tmp_path):
        res = run("solve", "--omega", "zero", "--eps", "0.01", "--step", "0.01",
                  "--out", tmp_path)
        assert res.returncode == 2

    def test_numerical_error(self, tmp_path):
        table = tmp_path / "short.csv"
        table.write_text("0,0\n0.1,0\n")
        res = run("solve", "--omega", f"table:{table}", "--eps", "0.1",
                  "--out", tmp_path / "out")
        assert res.returncode == 3

    def test_missing_table_is_config_error(self, tmp_path):
        res = run("solve", "--omega", "table:/nonexistent.csv",
                  "--out", tmp_path)
        assert res.returncode == 2
