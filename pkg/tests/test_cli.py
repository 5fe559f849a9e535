"""Config parsing, the four commands, exit codes, and output stability."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from ruellekit import (
    OutOfRange,
    ParseError,
    ValidationError,
    builtin_config_path,
    main,
    parse_config,
)
from ruellekit.cli import _fmt, cmd_ldp, cmd_pressure, cmd_rates, cmd_scan

from .conftest import PHI

BUILTINS = [
    "full2_bernoulli",
    "golden_mean_zero",
    "golden_roof_nonlattice",
    "lattice_counterexample",
]

BASE = """
[system]
k = 2
transitions = [[1, 1], [1, 1]]
theta = 0.5

[potentials.f]
"0" = "-0.69314718055994531"
"1" = "-0.69314718055994531"

[potentials.tau]
"0" = "1.0"
"1" = "1.3"

[potentials.g]
"0" = "0.2"
"1" = "1.1"
"""


def write_config(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestParseConfig:
    @pytest.mark.parametrize("name", BUILTINS)
    def test_builtin_configs_parse(self, name):
        cfg = parse_config(builtin_config_path(name))
        assert cfg.spec.k == 2
        assert (cfg.tau.values > 0).all()
        assert len(cfg.sha256) == 64
        assert cfg.short_hash == cfg.sha256[:12]
        assert cfg.rates is not None and cfg.ldp is not None and cfg.scan is not None

    def test_unknown_builtin(self):
        with pytest.raises(FileNotFoundError) as err:
            builtin_config_path("nonexistent")
        assert "available" in str(err.value)

    def test_golden_roof_blocks(self):
        cfg = parse_config(builtin_config_path("golden_roof_nonlattice"))
        assert len(cfg.rates.a_grid) == 9
        assert cfg.ldp.quad_u_max == 800.0
        assert cfg.ldp.n_values == tuple(range(10, 23, 2))
        assert cfg.scan.B == 0.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            parse_config(tmp_path / "nope.toml")

    def test_malformed_toml(self, tmp_path):
        path = write_config(tmp_path, "[system\ntransitions = ")
        with pytest.raises(ParseError):
            parse_config(path)

    def test_decimal_strings_parse_exactly(self, tmp_path):
        path = write_config(tmp_path, BASE)
        cfg = parse_config(path)
        assert cfg.f.values[0] == -0.69314718055994531
        assert cfg.tau.values[1] == 1.3

    @pytest.mark.parametrize(
        "mangle,needle",
        [
            (lambda s: s.replace('[potentials.tau]\n"0" = "1.0"', '[potentials.tau]\n"0" = "-1.0"'), "roof positivity"),
            (lambda s: s.replace("[[1, 1], [1, 1]]", "[[1, 0], [0, 1]]"), "NotIrreducibleAperiodic"),
            (lambda s: s + '\n[rates]\na_grid = ["0.5", "0.4"]\n', "grids sorted"),
            (lambda s: s + '\n[scan]\nb_grid = [2.0, 1.5]\nkappa_grid = [0.0]\n', "grids sorted"),
            (lambda s: s.replace('"1" = "1.1"', '"1" = "1.1"\n"01" = "0.3"'), "table coverage"),
            (lambda s: s.replace('"0" = "0.2"', '"0" = "abc"'), "cannot parse"),
            (lambda s: s.replace("k = 2", "k = 3"), "does not match"),
            (lambda s: s + "\n[ldp]\na = 0.7\ndelta = 0.1\nn_min = 0\nn_max = 4\n", "n-range"),
            (lambda s: s + '\n[ldp]\na = 0.7\ndelta = 0.1\nn_min = 2\nn_max = 4\nchi = "boxcar"\n', "unknown cutoff"),
            (lambda s: s + "\n[scan]\nb_grid = [0.5]\nkappa_grid = [0.0]\n", "|b| >= 1"),
        ],
    )
    def test_validation_messages(self, tmp_path, mangle, needle):
        path = write_config(tmp_path, mangle(BASE))
        with pytest.raises(ValidationError) as err:
            parse_config(path)
        assert needle in str(err.value)

    def test_word_admissibility_on_golden(self, tmp_path):
        text = BASE.replace("[[1, 1], [1, 1]]", "[[1, 1], [1, 0]]").replace(
            '"1" = "1.1"', '"1" = "1.1"\n"11" = "9.9"'
        )
        path = write_config(tmp_path, text)
        with pytest.raises(ValidationError) as err:
            parse_config(path)
        assert "word admissibility" in str(err.value)

    def test_missing_blocks(self, tmp_path):
        with pytest.raises(ValidationError) as err:
            parse_config(write_config(tmp_path, "[potentials.f]\n\"0\" = \"0.0\"\n"))
        assert "system" in str(err.value)
        text = BASE.replace('[potentials.g]\n"0" = "0.2"\n"1" = "1.1"', "")
        with pytest.raises(ValidationError) as err:
            parse_config(write_config(tmp_path, text))
        assert "potentials.g" in str(err.value)

    def test_depth_override_cannot_shrink(self, tmp_path):
        text = BASE.replace("theta = 0.5", "theta = 0.5\ndepth = 2")
        cfg = parse_config(write_config(tmp_path, text))
        assert cfg.depth == 2
        deep_f = '[potentials.f]\n"00" = "0.0"\n"01" = "0.0"\n"10" = "0.0"\n"11" = "0.0"'
        text = BASE.replace('[potentials.f]\n"0" = "-0.69314718055994531"\n"1" = "-0.69314718055994531"', deep_f)
        text = text.replace("theta = 0.5", "theta = 0.5\ndepth = 1")
        with pytest.raises(ValidationError) as err:
            parse_config(write_config(tmp_path, text))
        assert "shallower" in str(err.value)


class TestFmt:
    def test_special_cases(self):
        assert _fmt(None) == ""
        assert _fmt(True) == "true"
        assert _fmt(np.bool_(False)) == "false"
        assert _fmt(7) == "7"
        assert _fmt(np.int64(-3)) == "-3"
        assert _fmt("abc") == "abc"

    def test_floats_round_trip(self):
        rng = np.random.default_rng(2)
        xs = [0.1, 1.0 / 3.0, math.pi, 1e-300, -1.7e17, math.exp(-0.3)]
        xs += list(rng.standard_normal(50))
        for x in xs:
            assert float(_fmt(float(x))) == float(x)


class TestCommands:
    def test_pressure_full2(self):
        cfg = parse_config(builtin_config_path("full2_bernoulli"))
        csv_text, manifest, code = cmd_pressure(cfg)
        assert code == 0
        assert abs(manifest.extra["pressure_f"]) <= 1e-10
        assert abs(manifest.extra["pressure_normalized"]) <= 1e-10
        a_min, a_max = manifest.extra["achievable_range"]
        assert a_min < manifest.extra["a_star"] < a_max
        header = csv_text.splitlines()[4]
        assert header.startswith("pressure_f,flow_pressure,a_star,")

    def test_pressure_golden_mean(self):
        cfg = parse_config(builtin_config_path("golden_mean_zero"))
        _, manifest, code = cmd_pressure(cfg)
        assert code == 0
        assert manifest.extra["pressure_f"] == pytest.approx(math.log(PHI), abs=1e-10)

    def test_rates_reports_identity_residuals(self):
        cfg = parse_config(builtin_config_path("full2_bernoulli"))
        csv_text, manifest, code = cmd_rates(cfg)
        assert code == 0
        assert manifest.extra["rows"] == 7
        assert manifest.extra["rows_in_range"] == 7
        assert manifest.extra["max_identity_residual"] <= 1e-10
        lines = [l for l in csv_text.splitlines() if not l.startswith("#")]
        assert lines[0].split(",")[:4] == ["a", "xi", "J", "gamma"]
        assert len(lines) == 8

    def test_rates_out_of_range_row(self, tmp_path):
        text = BASE + '\n[rates]\na_grid = ["0.65", "5.0"]\n'
        cfg = parse_config(write_config(tmp_path, text))
        csv_text, manifest, code = cmd_rates(cfg)
        assert code == 0
        assert manifest.extra["rows_in_range"] == 1
        assert any("OutOfRange" in w for w in manifest.warnings)
        bad_row = csv_text.splitlines()[-1].split(",")
        assert bad_row[0] == "5"
        assert bad_row[1] == "" and bad_row[2] == ""
        assert bad_row[-2] == "OutOfRange"

    def test_rates_requires_block(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, BASE))
        with pytest.raises(ValidationError):
            cmd_rates(cfg)

    def test_ldp_warnings_mirrored_into_csv(self):
        cfg = parse_config(builtin_config_path("lattice_counterexample"))
        csv_text, manifest, code = cmd_ldp(cfg)
        assert code == 0
        assert any(w.startswith("Lattice:") for w in manifest.warnings)
        comment_warnings = [
            line[len("# warning: "):]
            for line in csv_text.splitlines()
            if line.startswith("# warning: ")
        ]
        assert comment_warnings == list(manifest.warnings)

    def test_scan_flags_unit_roof_as_lattice_like(self):
        cfg = parse_config(builtin_config_path("golden_mean_zero"))
        csv_text, manifest, code = cmd_scan(cfg)
        assert code == 0
        env = manifest.extra["envelopes"]["kappa=0"]
        assert env["lattice_like"] is True
        header = [l for l in csv_text.splitlines() if not l.startswith("#")][0]
        assert header == "b,kappa,w,rho_hat,fit_residual,config_hash"


class TestMain:
    def test_pressure_writes_outputs_and_echoes_csv(self, tmp_path, capsys):
        out = tmp_path / "nested" / "run1"
        code = main([
            "pressure", "--config", str(builtin_config_path("full2_bernoulli")),
            "--out", str(out),
        ])
        assert code == 0
        csv_path = out / "pressure.csv"
        manifest_path = out / "pressure_manifest.json"
        assert csv_path.exists() and manifest_path.exists()
        text = csv_path.read_text(encoding="utf-8")
        assert capsys.readouterr().out == text
        lines = text.splitlines()
        assert lines[0].startswith("# ruellekit ")
        assert lines[1] == "# command: pressure"
        assert lines[2] == "# config: full2_bernoulli.toml"
        assert lines[3].startswith("# config_sha256: ")
        payload = json.loads(manifest_path.read_text(encoding="utf-8"))
        assert payload["command"] == "pressure"
        assert payload["config_sha256"] == lines[3].split(": ")[1]
        assert set(payload["stages_seconds"]) == {"pressure", "normalize", "range"}
        # every data cell carries the config hash
        assert lines[-1].split(",")[-1] == payload["config_sha256"][:12]

    def test_missing_config_is_exit_1(self, tmp_path, capsys):
        code = main(["pressure", "--config", str(tmp_path / "nope.toml")])
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_is_exit_1(self, tmp_path, capsys):
        path = write_config(tmp_path, BASE.replace("[[1, 1], [1, 1]]", "[[1, 0], [0, 1]]"))
        code = main(["pressure", "--config", str(path), "--out", str(tmp_path)])
        assert code == 1
        assert "NotIrreducibleAperiodic" in capsys.readouterr().err

    def test_missing_block_is_exit_1(self, tmp_path, capsys):
        path = write_config(tmp_path, BASE)
        code = main(["rates", "--config", str(path), "--out", str(tmp_path)])
        assert code == 1
        assert "no [rates] block" in capsys.readouterr().err

    def test_numerical_failure_is_exit_2(self, tmp_path, capsys):
        text = BASE + "\n[ldp]\na = \"5.0\"\ndelta = 0.1\nn_min = 4\nn_max = 4\n"
        path = write_config(tmp_path, text)
        code = main(["ldp", "--config", str(path), "--out", str(tmp_path)])
        assert code == 2
        assert "OutOfRange" in capsys.readouterr().err
        assert not (tmp_path / "ldp.csv").exists()

    def test_guard_trip_is_exit_3_with_partial_output(self, tmp_path, capsys):
        text = BASE + (
            "\n[ldp]\na = \"0.70\"\ndelta = 0.1\nn_min = 2\nn_max = 4\nn_step = 2\nguard = 10.0\n"
        )
        path = write_config(tmp_path, text)
        out = tmp_path / "run"
        code = main(["ldp", "--config", str(path), "--out", str(out)])
        assert code == 3
        text_out = (out / "ldp.csv").read_text(encoding="utf-8")
        assert any("guard trip" in line for line in text_out.splitlines())
        data = [l for l in text_out.splitlines() if not l.startswith("#")]
        assert len(data) == 3  # header + n=2 + n=4
        n4 = data[2].split(",")
        assert n4[0] == "4"
        assert n4[2] == ""  # rho_exact withheld
        assert n4[4] != ""  # spectral value still present
        payload = json.loads((out / "ldp_manifest.json").read_text(encoding="utf-8"))
        assert payload["guard_tripped"] is True

    def test_missing_command_exits_via_argparse(self):
        with pytest.raises(SystemExit):
            main([])

    def test_ldp_csv_bytes_stable_across_runs_and_threads(self, tmp_path, monkeypatch):
        config = str(builtin_config_path("lattice_counterexample"))
        d1, d2, d3 = (tmp_path / s for s in ("one", "two", "three"))
        assert main(["ldp", "--config", config, "--out", str(d1), "--threads", "1"]) == 0
        assert main(["ldp", "--config", config, "--out", str(d2), "--threads", "4"]) == 0
        monkeypatch.setenv("THREADS", "3")
        assert main(["ldp", "--config", config, "--out", str(d3)]) == 0
        b1 = (d1 / "ldp.csv").read_bytes()
        assert b1 == (d2 / "ldp.csv").read_bytes()
        assert b1 == (d3 / "ldp.csv").read_bytes()
