"""Command-line interface tests: exit codes, artifacts, config handling.

All invocations go through ``cli.run(argv)`` in-process, so exit codes and
stderr formatting are asserted exactly; one subprocess test covers the
``python -m genvendor`` entry point.
"""

import json
import subprocess
import sys

import pytest

from genvendor import __version__
from genvendor.cli import run
from genvendor.harness import read_report_csv

FIXTURE = "tests/fixtures/meal_demand.csv"

SIM_FAST = [
    "simulate", "--dgp", "a", "--reps", "1", "--n", "60", "--n-test", "5",
    "--methods", "saa", "--grid-j", "5", "--samples", "50", "--epochs", "2",
]
TRAIN_FAST = ["train", "--dgp", "a", "--n", "60", "--epochs", "2"]


def read_lines(path):
    return path.read_text().splitlines()


class TestParsing:
    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "simulate" in capsys.readouterr().out

    def test_subcommand_help(self, capsys):
        assert run(["simulate", "--help"]) == 0
        assert "--dgp" in capsys.readouterr().out

    def test_version(self, capsys):
        assert run(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_no_arguments_is_usage_error(self, capsys):
        assert run([]) == 64
        assert "error: usage:" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert run(["simulate", "--bogus"]) == 64

    def test_bad_dgp_names_kind(self, capsys):
        assert run(["simulate", "--dgp", "z", "--reps", "1"]) == 65
        err = capsys.readouterr().err
        assert "error: config:" in err and "'z'" in err


class TestSimulate:
    def test_inventory_smoke(self, tmp_path, capsys):
        assert run(SIM_FAST + ["--out", str(tmp_path)]) == 0
        out_path = tmp_path / "report-inventory-a-discrete.csv"
        assert str(out_path) in capsys.readouterr().out
        rows = read_report_csv(out_path)
        assert {r["method"] for r in rows} == {"saa"}
        assert rows[-1]["price"] == "avg"

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(SIM_FAST + ["--out", str(a)]) == 0
        assert run(SIM_FAST + ["--out", str(b)]) == 0
        assert (a / "report-inventory-a-discrete.csv").read_bytes() == (
            b / "report-inventory-a-discrete.csv"
        ).read_bytes()

    def test_format_both_writes_csv_and_json(self, tmp_path):
        assert run(SIM_FAST + ["--format", "both", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "report-inventory-a-discrete.csv").exists()
        payload = json.loads((tmp_path / "report-inventory-a-discrete.json").read_text())
        assert payload["config"]["kind"] == "a"

    def test_joint_experiment(self, tmp_path):
        argv = [
            "simulate", "--experiment", "joint", "--dgp", "a", "--reps", "1",
            "--n", "60", "--n-test", "5", "--methods", "saa_joint", "--grid-j", "5",
            "--samples", "50", "--epochs", "2", "--out", str(tmp_path),
        ]
        assert run(argv) == 0
        rows = read_report_csv(tmp_path / "report-joint-a-discrete.csv")
        assert all(r["metric"] == "avg_profit" for r in rows)

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GENVENDOR_OUT", str(tmp_path / "from-env"))
        assert run(SIM_FAST) == 0
        assert (tmp_path / "from-env" / "report-inventory-a-discrete.csv").exists()

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "sim.toml"
        cfg.write_text(
            'dgp = "a"\nreps = 1\nn = 60\nn_test = 5\nmethods = "saa"\n'
            "grid_J = 5\nM = 50\nseed = 7\n[train]\nepochs = 2\n"
        )
        assert run(["simulate", "--config", str(cfg), "--seed", "9", "--out", str(tmp_path)]) == 0
        header = [
            ln for ln in read_lines(tmp_path / "report-inventory-a-discrete.csv")
            if ln.startswith("# config.seed=")
        ]
        assert header == ["# config.seed=9"]  # flag wins over file

    def test_json_config(self, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps({"dgp": "a", "reps": 1, "n": 60, "n_test": 5,
                                   "methods": "saa", "grid_J": 5, "M": 50,
                                   "train": {"epochs": 2}}))
        assert run(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 0

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "sim.toml"
        cfg.write_text('dgp = "a"\nbogus = 1\n')
        assert run(["simulate", "--config", str(cfg)]) == 65
        assert "bogus" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert run(["simulate", "--config", "nope.toml"]) == 74
        assert "error: io:" in capsys.readouterr().err

    def test_config_bad_suffix(self, tmp_path, capsys):
        cfg = tmp_path / "sim.yaml"
        cfg.write_text("dgp: a\n")
        assert run(["simulate", "--config", str(cfg)]) == 65

    def test_config_json_must_be_object(self, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text("[1, 2]")
        assert run(["simulate", "--config", str(cfg)]) == 65


@pytest.fixture(scope="module")
def model_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    assert run(TRAIN_FAST + ["--out", str(out)]) == 0
    path = out / "generator-a.json"
    assert path.exists()
    return path


class TestTrainDecide:
    def test_decide_inventory(self, model_path, capsys):
        argv = ["decide", "--model", str(model_path), "--price", "3",
                "--x", "0,0,0,0,0", "--samples", "200"]
        assert run(argv) == 0
        out = capsys.readouterr().out
        assert out.startswith("q=")
        assert float(out.split("=")[1]) >= 0.0

    def test_decide_joint_grid(self, model_path, capsys):
        argv = ["decide", "--model", str(model_path), "--grid", "2:4:5",
                "--x", "0,0,0,0,0", "--samples", "200"]
        assert run(argv) == 0
        out = capsys.readouterr().out
        assert "p=" in out and "q=" in out and "estimated_profit=" in out

    def test_decide_explicit_price_list(self, model_path, capsys):
        argv = ["decide", "--model", str(model_path), "--grid", "2.5,3.5",
                "--x", "0,0,0,0,0", "--samples", "100"]
        assert run(argv) == 0
        assert capsys.readouterr().out.split()[0] in ("p=2.5", "p=3.5")

    def test_decide_needs_exactly_one_objective(self, model_path, capsys):
        base = ["decide", "--model", str(model_path), "--x", "0,0,0,0,0"]
        assert run(base) == 65
        assert run(base + ["--price", "3", "--grid", "2:4:3"]) == 65

    def test_decide_missing_model_is_io_error(self, capsys):
        assert run(["decide", "--model", "missing.json", "--price", "3"]) == 74
        assert "error: io:" in capsys.readouterr().err

    def test_decide_deterministic(self, model_path, capsys):
        argv = ["decide", "--model", str(model_path), "--price", "3",
                "--x", "1,0,0,0,0", "--seed", "5"]
        assert run(argv) == 0
        first = capsys.readouterr().out
        assert run(argv) == 0
        assert capsys.readouterr().out == first

    def test_train_from_dataset_csv(self, tmp_path, capsys):
        corpus = tmp_path / "corpus.csv"
        # build a corpus CSV through the library, then train from the file
        from genvendor.dgp import make_corpus, make_oracle
        from genvendor.numerics import RngStream

        data = make_corpus(make_oracle("a", 0), 60, [2.0, 3.0, 4.0], RngStream(0, ("cli-test",)))
        data.save_csv(corpus)
        assert run(["train", "--data", str(corpus), "--epochs", "2", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "generator-corpus.json").exists()

    def test_train_needs_source(self, capsys):
        assert run(["train", "--epochs", "2"]) == 65
        assert "--dgp or --data" in capsys.readouterr().err

    def test_train_missing_data_csv(self, capsys):
        assert run(["train", "--data", "nope.csv"]) == 74


class TestRealDataCommand:
    def test_smoke(self, tmp_path, capsys):
        argv = [
            "real-data", "--csv", FIXTURE, "--meals", "1885",
            "--methods", "saa,rbe", "--epochs", "2", "--out", str(tmp_path),
        ]
        assert run(argv) == 0
        rows = read_report_csv(tmp_path / "report-real-data.csv")
        assert len(rows) == 2 * 12
        assert {r["dgp"] for r in rows} == {"1885"}

    def test_multiple_meals(self, tmp_path):
        argv = [
            "real-data", "--csv", FIXTURE, "--meals", "1885,2290",
            "--methods", "saa", "--epochs", "2", "--out", str(tmp_path),
        ]
        assert run(argv) == 0
        rows = read_report_csv(tmp_path / "report-real-data.csv")
        assert {r["dgp"] for r in rows} == {"1885", "2290"}

    def test_missing_required_keys(self, capsys):
        assert run(["real-data", "--meals", "1885"]) == 65
        assert run(["real-data", "--csv", FIXTURE]) == 65

    def test_missing_csv_file(self, capsys):
        assert run(["real-data", "--csv", "nope.csv", "--meals", "1885"]) == 74


class TestConvergenceCommand:
    def test_smoke(self, tmp_path):
        argv = [
            "convergence", "--dgp", "a", "--n-list", "50,100", "--reps", "1",
            "--n-test", "5", "--samples", "50", "--epochs", "2", "--out", str(tmp_path),
        ]
        assert run(argv) == 0
        rows = read_report_csv(tmp_path / "report-convergence-a.csv")
        assert [r["metric"] for r in rows] == ["L_test_avg_n50", "L_test_avg_n100"]

    def test_needs_dgp(self, capsys):
        assert run(["convergence", "--n-list", "50"]) == 65


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "genvendor", "--version"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert __version__ in proc.stdout
