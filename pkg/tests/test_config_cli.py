import configparser
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from rmsim.cli import main
from rmsim.config import (
    DEFAULT_MASTER_SEED,
    SCENARIOS,
    defaults_ini,
    load_config,
    scenario_defaults,
)
from rmsim.errors import ConfigError


class TestLoadConfig:
    def test_defaults_without_file(self):
        cfg = load_config(None, "estimate")
        assert cfg.master_seed == DEFAULT_MASTER_SEED
        assert cfg.params == scenario_defaults("estimate")

    def test_unknown_key_named(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[born]\nn_rnus = 7\n")
        with pytest.raises(ConfigError, match="born.n_rnus"):
            load_config(str(path), "born")

    def test_unknown_section_named(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[bron]\nn_runs = 7\n")
        with pytest.raises(ConfigError, match=r"\[bron\]"):
            load_config(str(path), "born")

    def test_scenario_mismatch_named(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[run]\nscenario = survival\n")
        with pytest.raises(ConfigError, match="run.scenario"):
            load_config(str(path), "born")

    def test_bad_value_type_named(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[born]\nn_runs = many\n")
        with pytest.raises(ConfigError, match="born.n_runs"):
            load_config(str(path), "born")

    def test_seed_precedence(self, tmp_path, monkeypatch):
        path = tmp_path / "run.ini"
        path.write_text("[run]\nmaster_seed = 99\n")
        monkeypatch.setenv("RMSIM_SEED", "42")
        assert load_config(None, "estimate").master_seed == 42
        assert load_config(str(path), "estimate").master_seed == 99
        assert load_config(str(path), "estimate", seed_flag=7).master_seed == 7
        monkeypatch.delenv("RMSIM_SEED")
        assert load_config(None, "estimate").master_seed == DEFAULT_MASTER_SEED

    def test_environment_section_feeds_estimates(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[environment]\nbody_mass = 2e-6\n")
        cfg = load_config(str(path), "estimate")
        assert cfg.environment.body_mass == 2e-6

    def test_print_defaults_round_trips(self, tmp_path):
        for scenario in SCENARIOS:
            text = defaults_ini(scenario)
            parser = configparser.ConfigParser(interpolation=None)
            parser.read_string(text)
            path = tmp_path / f"{scenario}.ini"
            path.write_text(text)
            cfg = load_config(str(path), scenario)
            assert cfg.scenario == scenario

    def test_resolved_echo_is_complete(self):
        cfg = load_config(None, "survival", seed_flag=5, workers_flag=2)
        echo = cfg.resolved()
        assert echo["master_seed"] == 5
        assert echo["workers"] == 2
        assert echo["params"]["n_walks"] == 100000


class TestCliEndToEnd:
    def test_estimate_writes_manifest_with_hashes(self, tmp_path):
        out = tmp_path / "est"
        assert main(["estimate", "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["exit_code"] == 0
        for name, digest in manifest["files"].items():
            import hashlib

            data = (out / name).read_bytes()
            assert hashlib.sha256(data).hexdigest() == digest

    def test_print_defaults_stdout(self, capsys):
        assert main(["print-defaults", "born"]) == 0
        text = capsys.readouterr().out
        assert "[born]" in text and "n_steps_max" in text

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[survival]\nwalks = 10\n")
        assert main(["simulate", "survival", "--config", str(bad)]) == 2
        assert "survival.walks" in capsys.readouterr().err

    def test_survival_rerun_is_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("[survival]\nn_walks = 2000\nn_max = 16\n")
        for out in (out1, out2):
            assert (
                main(
                    [
                        "simulate",
                        "survival",
                        "--config",
                        str(cfg),
                        "--seed",
                        "12",
                        "--out",
                        str(out),
                    ]
                )
                == 0
            )
        for name in ("survival_report.json", "survival.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_born_exit_3_on_timeouts_and_worker_invariance(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        # fixed kick scale: no calibration; walk cannot reach the detectors
        cfg.write_text(
            "[born]\nn_runs = 4\nn_steps_max = 60\neps_step = 0\nkick_scale = 0.006\n"
        )
        outs = []
        for workers, name in ((1, "w1"), (2, "w2")):
            out = tmp_path / name
            code = main(
                [
                    "simulate",
                    "born",
                    "--config",
                    str(cfg),
                    "--seed",
                    "9",
                    "--workers",
                    str(workers),
                    "--out",
                    str(out),
                ]
            )
            assert code == 3
            outs.append(out)
        assert (outs[0] / "runs.ndjson").read_bytes() == (
            outs[1] / "runs.ndjson"
        ).read_bytes()
        report = json.loads((outs[0] / "born_report.json").read_text())
        assert report["n_timeouts"] == 4

    def test_format_flag_filters_artifacts(self, tmp_path):
        out = tmp_path / "json_only"
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("[survival]\nn_walks = 500\nn_max = 8\n")
        assert (
            main(
                [
                    "simulate",
                    "survival",
                    "--config",
                    str(cfg),
                    "--out",
                    str(out),
                    "--format",
                    "json",
                ]
            )
            == 0
        )
        assert (out / "survival_report.json").exists()
        assert not (out / "survival.csv").exists()

    def test_console_script_installed(self):
        result = subprocess.run(
            [sys.executable, "-m", "rmsim.cli", "print-defaults"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert "[run]" in result.stdout


class TestStateSerializationInterface:
    def test_trace_csv_schema(self, tmp_path):
        out = tmp_path / "traj"
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(
            "[trajectory]\nn_seeds = 3\nn_windows = 2\neps_step = 0\n"
            "kick_scale = 0.001\n"
        )
        assert (
            main(
                [
                    "simulate",
                    "trajectory",
                    "--config",
                    str(cfg),
                    "--seed",
                    "4",
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        header = (out / "trace_seed0.csv").read_text().splitlines()[0]
        assert header == "t,tau,s,norm,energy"
        mean_header = (out / "trajectory_mean.csv").read_text().splitlines()[0]
        assert mean_header == "t,tau_mean,tau_se,tau_newton"
