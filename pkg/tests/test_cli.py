import csv
import json
import math

import numpy as np
import pytest

from noisytime.cli import main


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


class TestEvolve:
    def test_writes_trajectory(self, scenario_yaml, tmp_path):
        config = scenario_yaml("global_dephasing", **{"grid.n_steps": 10})
        out = tmp_path / "run"
        assert main(["evolve", "--config", str(config), "--out", str(out)]) == 0
        rows = read_csv(out / "analytic.csv")
        assert len(rows) == 11
        header = list(rows[0])
        assert header[:5] == ["t", "rho_re_0_0", "rho_im_0_0", "rho_re_0_1", "rho_im_0_1"]
        assert header[-4:] == ["purity", "coherence_l1", "energy", "trace"]

    def test_values_round_trip_doubles(self, scenario_yaml, tmp_path):
        # %.17g is enough digits to reconstruct the exact binary double
        config = scenario_yaml("global_dephasing", **{"grid.n_steps": 4})
        out = tmp_path / "run"
        main(["evolve", "--config", str(config), "--out", str(out)])
        rows = read_csv(out / "analytic.csv")
        t = float(rows[-1]["t"])
        coherence = float(rows[-1]["coherence_l1"])
        assert t == 5.0
        assert coherence == pytest.approx(math.exp(-0.5 * 0.5 * 5.0), rel=1e-12)

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["evolve", "--config", str(tmp_path / "ghost.yaml")]) == 2
        assert main(["evolve"]) == 2

    def test_no_leftover_tempfiles(self, scenario_yaml, tmp_path):
        config = scenario_yaml("global_dephasing", **{"grid.n_steps": 4})
        out = tmp_path / "run"
        main(["evolve", "--config", str(config), "--out", str(out)])
        assert not list(out.glob("*.tmp"))

    def test_formats_filter(self, scenario_yaml, tmp_path):
        config = scenario_yaml(
            "global_dephasing", **{"grid.n_steps": 4, "outputs.formats": ["json"]}
        )
        out = tmp_path / "run"
        assert main(["evolve", "--config", str(config), "--out", str(out)]) == 0
        assert not (out / "analytic.csv").exists()


class TestIntegrate:
    def test_phase_generator_matches_analytic(self, scenario_yaml, tmp_path):
        config = scenario_yaml("global_dephasing", **{"grid.n_steps": 20})
        out = tmp_path / "run"
        assert main(["evolve", "--config", str(config), "--out", str(out)]) == 0
        assert (
            main(["integrate", "--config", str(config), "--out", str(out), "--generator", "phase"])
            == 0
        )
        analytic = read_csv(out / "analytic.csv")
        ode = read_csv(out / "me.csv")
        for row_a, row_b in zip(analytic, ode):
            for key in row_a:
                assert float(row_a[key]) == pytest.approx(float(row_b[key]), abs=1e-8)
        report = json.loads((out / "cp_report.json").read_text())
        assert report["cp_ok"] is True
        assert report["generator"] == "phase"

    def test_correlated_generator(self, scenario_yaml, tmp_path):
        config = scenario_yaml("correlated_tau", **{"grid.n_steps": 15})
        out = tmp_path / "run"
        code = main(
            ["integrate", "--config", str(config), "--out", str(out), "--generator", "correlated"]
        )
        assert code == 0
        assert (out / "me.csv").exists()

    def test_correlated_needs_gaussian_kernel(self, scenario_yaml, tmp_path):
        config = scenario_yaml("global_dephasing")  # uniform correlation
        code = main(
            ["integrate", "--config", str(config), "--out", str(tmp_path), "--generator", "correlated"]
        )
        assert code == 2

    def test_general_generator_on_direct_table(self, scenario_yaml, tmp_path):
        config = scenario_yaml("dissipative_direct", **{"grid.n_steps": 20})
        out = tmp_path / "run"
        assert (
            main(["integrate", "--config", str(config), "--out", str(out), "--generator", "general"])
            == 0
        )
        rows = read_csv(out / "me.csv")
        # trace decays under the dissipative table
        assert float(rows[-1]["trace"]) < 0.5
        assert float(rows[0]["trace"]) == pytest.approx(1.0, abs=1e-12)

    def test_general_rejects_time_dependent_profile(self, scenario_yaml, tmp_path):
        config = scenario_yaml("nonmarkovian_piecewise")
        code = main(
            ["integrate", "--config", str(config), "--out", str(tmp_path), "--generator", "general"]
        )
        assert code == 2


class TestSample:
    def test_outputs_and_pass(self, scenario_yaml, tmp_path):
        config = scenario_yaml(
            "global_dephasing", **{"grid.n_steps": 5, "montecarlo.n_traj": 4000}
        )
        out = tmp_path / "run"
        assert main(["sample", "--config", str(config), "--out", str(out)]) == 0
        report = json.loads((out / "comparison.json").read_text())
        assert report["pass"] is True
        assert report["n_traj"] == 4000
        mean_rows = read_csv(out / "mc_mean.csv")
        stderr_rows = read_csv(out / "mc_stderr.csv")
        assert len(mean_rows) == len(stderr_rows) == 6
        assert "purity" in mean_rows[0]
        assert "purity" not in stderr_rows[0]

    def test_seed_override_changes_output(self, scenario_yaml, tmp_path):
        config = scenario_yaml(
            "global_dephasing", **{"grid.n_steps": 4, "montecarlo.n_traj": 200}
        )
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        main(["sample", "--config", str(config), "--out", str(a), "--seed", "1"])
        main(["sample", "--config", str(config), "--out", str(b), "--seed", "2"])
        main(["sample", "--config", str(config), "--out", str(c), "--seed", "1"])
        bytes_a = (a / "mc_mean.csv").read_bytes()
        assert bytes_a != (b / "mc_mean.csv").read_bytes()
        assert bytes_a == (c / "mc_mean.csv").read_bytes()

    def test_dissipative_rejected(self, scenario_yaml, tmp_path):
        config = scenario_yaml("dissipative_direct")
        assert main(["sample", "--config", str(config), "--out", str(tmp_path)]) == 2


class TestMoments:
    def test_writes_table(self, scenario_yaml, tmp_path):
        config = scenario_yaml("global_dephasing", **{"montecarlo.n_traj": 2000})
        out = tmp_path / "run"
        code = main(
            [
                "moments",
                "--config",
                str(config),
                "--out",
                str(out),
                "--theta",
                "0.0",
                "--theta-prime",
                "1.0",
            ]
        )
        assert code == 0
        rows = read_csv(out / "moments.csv")
        assert [r["order"] for r in rows] == ["2", "3", "4"]
        lam = 0.5 * 5.0  # gamma t (theta - theta')^2 under uniform correlation
        assert float(rows[0]["predicted"]) == pytest.approx(lam, rel=1e-12)
        assert float(rows[2]["predicted"]) == pytest.approx(3 * lam * lam, rel=1e-12)


class TestVerifyCommand:
    def test_list(self, capsys):
        assert main(["verify", "--list"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert "ensemble-matches-analytic" in lines
        assert len(lines) > 15

    def test_quick_suite_passes(self, capsys):
        assert main(["verify", "--quick"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.count("PASS") >= 20

    def test_fault_injection_fails(self, capsys):
        assert main(["verify", "--quick", "--inject-wrong-gamma", "2.0"]) == 1
        out = capsys.readouterr().out
        assert "FAIL  ensemble-matches-analytic" in out
