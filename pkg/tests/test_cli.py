import csv
import hashlib
import json
import subprocess
import sys

import pytest

from fracosgood.cli import COMMANDS, RunConfig, ConfigError, main

SIM = """
# small Picard run
params.alpha = 0.6
params.beta = 1.2
params.d = 1
params.k = 2
params.eps = 1.5
measure.kind = symmetric
grid.n = 256
grid.L = 20
time.T = 0.5
time.steps = 16
nonlinearity.kind = truncated
nonlinearity.phi0 = 4
nonlinearity.level = 2
u0.kind = gaussian
u0.sigma = 1
"""

BLOWUP = """
params.alpha = 0.8
params.beta = 1
params.d = 1
params.k = 4
params.q = 1
params.eps = 1.5
params.tau = 0.9
params.rho = 0.7
measure.kind = symmetric
grid.n = 1024
grid.L = 64
nonlinearity.phi0 = 4
study.levels = 4
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_parse_and_comments(self):
        cfg = RunConfig.parse("params.alpha = 0.5  # order\n\n# note\ngrid.n=64\n")
        assert cfg.get("params.alpha") == 0.5 and cfg.get("grid.n") == 64
        assert cfg.resolved == {"params.alpha": 0.5, "grid.n": 64}

    @pytest.mark.parametrize("text", ["params.alpha 0.5", "params.gamma = 1", "colour.red = 1",
                                      "grid.n = 4\ngrid.n = 8"])
    def test_rejected(self, text):
        with pytest.raises(ConfigError):
            RunConfig.parse(text)

    def test_bad_value(self):
        cfg = RunConfig.parse("grid.n = 12.5")
        with pytest.raises(ConfigError, match="grid.n"):
            cfg.get("grid.n")

    def test_defaults_recorded(self):
        cfg = RunConfig()
        assert cfg.get("solver.max_iter", 200) == 200
        assert cfg.resolved["solver.max_iter"] == 200

    def test_override(self):
        cfg = RunConfig.parse("params.alpha = 0.5")
        cfg.override(["params.alpha=0.7"])
        assert cfg.get("params.alpha") == 0.7
        with pytest.raises(ConfigError):
            cfg.override(["params.nope=1"])


class TestExitCodes:
    @pytest.mark.parametrize("command,field", [("simulate", "params.alpha"), ("osgood-table", "params.k"),
                                               ("annulus-check", "params.alpha"), ("global-study", "params.alpha")])
    def test_empty_config_names_first_missing_field(self, tmp_path, capsys, command, field):
        code = main([command, "-c", write(tmp_path, ""), "-o", str(tmp_path / "out")])
        assert code == 2
        assert f"'{field}'" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        code = main(["simulate", "-c", write(tmp_path, SIM + "solver.speed = 3\n"), "-o", str(tmp_path)])
        assert code == 2
        assert "solver.speed" in capsys.readouterr().err

    def test_domain_error(self, tmp_path):
        cfg = write(tmp_path, SIM.replace("params.alpha = 0.6", "params.alpha = 1.4"))
        assert main(["simulate", "-c", cfg, "-o", str(tmp_path / "o")]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["simulate", "-c", str(tmp_path / "absent.cfg")]) == 2

    def test_help_lists_subcommands(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for name in COMMANDS:
            assert name in out


class TestRegimeClassify:
    def test_window_row(self, tmp_path):
        cfg = write(tmp_path, "params.alpha = 0.9\nparams.beta = 0.5\nparams.d = 1\nparams.k = 2\nparams.q = 3\n")
        assert main(["regime-classify", "-c", cfg, "-o", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "verdicts.csv")
        assert len(rows) == 1
        assert (rows[0]["q_lo"], rows[0]["q_hi"]) == ("2.0", "3.6")
        assert rows[0]["global_ok"] == "true"

    def test_input_csv(self, tmp_path):
        src = tmp_path / "tuples.csv"
        src.write_text("alpha,beta,d,k,q\n0.8,1,1,4,1\n0.8,1,1,2,1\n0.5,0.5,1,2,3\n")
        assert main(["regime-classify", "-i", str(src), "-o", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "verdicts.csv")
        assert [r["blowup"] for r in rows] == ["true", "false", "false"]
        assert rows[2]["global_ok"] == "false"

    def test_input_csv_unknown_column(self, tmp_path):
        src = tmp_path / "tuples.csv"
        src.write_text("alpha,beta,d,k,colour\n0.8,1,1,4,red\n")
        assert main(["regime-classify", "-i", str(src), "-o", str(tmp_path / "o")]) == 2


class TestOutputs:
    def test_osgood_table(self, tmp_path):
        cfg = write(tmp_path, "params.k = 2\nnonlinearity.phi0 = 4\nstudy.s_max = 1000\n")
        assert main(["osgood-table", "-c", cfg, "-o", str(tmp_path / "o")]) == 0
        rows = {float(r["s"]): r for r in read_csv(tmp_path / "o" / "osgood_table.csv")}
        assert float(rows[2.0]["f"]) == 3.0
        assert float(rows[4.0]["f"]) == 12.0 and float(rows[4.0]["f_tilde"]) == 12.0
        assert float(rows[16.0]["f_tilde"]) == 240.0
        blocks = read_csv(tmp_path / "o" / "osgood_blocks.csv")
        assert len(blocks) == 30

    def test_simulate_is_deterministic(self, tmp_path):
        cfg = write(tmp_path, SIM)
        assert main(["simulate", "-c", cfg, "-o", str(tmp_path / "a")]) == 0
        assert main(["simulate", "-c", cfg, "-o", str(tmp_path / "b")]) == 0
        for name in ("trace.csv", "final_field.csv", "verdict.json", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        trace = read_csv(tmp_path / "a" / "trace.csv")
        assert list(trace[0].keys()) == ["t", "lq_norm", "weighted_norm", "local_mass", "residual", "iters"]
        assert len(trace) == 17

    def test_manifest_checksums(self, tmp_path):
        main(["simulate", "-c", write(tmp_path, SIM), "-o", str(tmp_path / "a")])
        man = json.loads((tmp_path / "a" / "manifest.json").read_text())
        assert man["subcommand"] == "simulate" and man["exit_code"] == 0
        assert {a["file"] for a in man["artifacts"]} == {"trace.csv", "final_field.csv", "verdict.json"}
        for a in man["artifacts"]:
            assert hashlib.sha256((tmp_path / "a" / a["file"]).read_bytes()).hexdigest() == a["sha256"]
        # resolved config includes defaults that were used
        assert man["config"]["solver.tolerance"] == 1e-10
        assert man["config"]["params.alpha"] == 0.6

    def test_verdict_shape(self, tmp_path):
        main(["simulate", "-c", write(tmp_path, SIM), "-o", str(tmp_path / "a")])
        doc = json.loads((tmp_path / "a" / "verdict.json").read_text())
        assert set(doc) == {"verdict", "evidence", "policy"}
        assert doc["verdict"] == "converged"

    def test_formats(self, tmp_path):
        main(["simulate", "-c", write(tmp_path, SIM + "output.formats = csv\n"), "-o", str(tmp_path / "a")])
        assert (tmp_path / "a" / "trace.csv").exists()
        assert not (tmp_path / "a" / "verdict.json").exists()

    def test_environment_override(self, tmp_path, monkeypatch):
        cfg = write(tmp_path, SIM + f"output.dir = {tmp_path / 'from_config'}\n")
        monkeypatch.setenv("FRACOSGOOD_OUTPUT", str(tmp_path / "from_env"))
        assert main(["simulate", "-c", cfg]) == 0
        assert (tmp_path / "from_env" / "manifest.json").exists()
        assert not (tmp_path / "from_config").exists()
        assert main(["simulate", "-c", cfg, "-o", str(tmp_path / "from_flag")]) == 0
        assert (tmp_path / "from_flag" / "manifest.json").exists()

    def test_set_flag(self, tmp_path):
        cfg = write(tmp_path, SIM)
        assert main(["simulate", "-c", cfg, "-s", "time.steps=8", "-o", str(tmp_path / "a")]) == 0
        assert len(read_csv(tmp_path / "a" / "trace.csv")) == 9

    def test_blow_up_run_exits_3(self, tmp_path):
        text = SIM.replace("nonlinearity.kind = truncated", "nonlinearity.kind = power\nnonlinearity.lam = 1")
        text = text.replace("params.k = 2", "params.k = 3").replace("u0.kind = gaussian\nu0.sigma = 1",
                                                                    "u0.kind = constant\nu0.c = 50")
        text = text.replace("time.T = 0.5", "time.T = 5")
        assert main(["simulate", "-c", write(tmp_path, text), "-o", str(tmp_path / "a")]) == 3
        doc = json.loads((tmp_path / "a" / "verdict.json").read_text())
        assert doc["verdict"] == "blow-up"


class TestStudies:
    def test_blowup_study(self, tmp_path):
        assert main(["blowup-study", "-c", write(tmp_path, BLOWUP), "-o", str(tmp_path / "o")]) == 0
        doc = json.loads((tmp_path / "o" / "verdict.json").read_text())
        assert doc["verdict"] == "divergence evidence"
        assert doc["evidence"][-1]["control"]["verdict"] == "no divergence"
        rows = read_csv(tmp_path / "o" / "blowup_levels.csv")
        assert all(float(r["ratio"]) >= 1.5 for r in rows[1:])

    def test_blowup_short_ladder_is_inconclusive(self, tmp_path):
        cfg = write(tmp_path, BLOWUP.replace("study.levels = 4", "study.levels = 2"))
        assert main(["blowup-study", "-c", cfg, "-o", str(tmp_path / "o")]) == 3

    def test_annulus_check(self, tmp_path):
        text = ("params.alpha = 0.8\nparams.beta = 1\nparams.d = 1\nparams.rho = 0.5\nmeasure.kind = symmetric\n"
                "grid.n = 131072\ngrid.L = 64\nu0.kind = singular\nu0.tau = 0.5\nu0.R = 2\n")
        assert main(["annulus-check", "-c", write(tmp_path, text), "-o", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "annulus_checks.csv")
        assert len(rows) == 3
        assert all(float(r["worst_margin"]) >= 0.95 for r in rows)

    def test_kernel_validate_config(self, tmp_path):
        text = "params.alpha = 0.5\nparams.beta = 1\nparams.d = 1\nmeasure.kind = symmetric\ngrid.n = 65536\ngrid.L = 4000\n"
        assert main(["kernel-validate", "-c", write(tmp_path, text), "-o", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "kernel_checks.csv")
        assert {r["check"] for r in rows} == {"mass", "scaling", "lp_slope"}
        assert all(r["passed"] == "true" for r in rows)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fracosgood.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "0.1.0" in out.stdout
