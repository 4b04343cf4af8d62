import csv
import hashlib
import json
import math

import numpy as np
import pytest

from jfrff.cli import main, _parse_grid
from jfrff.datasets import load_adjacency_csv, load_signal_csv


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    code = run(
        "synth", "--nodes", 10, "--time", 240, "--window", 6,
        "--bandwidth", 4, "--out-dir", out, "--seed", 1,
    )
    assert code == 0
    return out


class TestSynth:
    def test_outputs_and_shapes(self, dataset):
        signal = load_signal_csv(dataset / "signal.csv")
        graph = load_adjacency_csv(dataset / "adjacency.csv")
        assert signal.values.shape == (10, 240)
        assert graph.n_vertices == 10
        assert (dataset / "manifest.json").exists()

    def test_window_count_arithmetic(self, tmp_path, capsys):
        assert run(
            "synth", "--nodes", 8, "--time", 600, "--window", 6,
            "--out-dir", tmp_path, "--seed", 0,
        ) == 0
        assert "M=100" in capsys.readouterr().out

    def test_same_seed_identical_digests(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run("synth", "--nodes", 6, "--time", 60, "--out-dir", out, "--seed", 4)
        assert digest(a / "signal.csv") == digest(b / "signal.csv")
        assert digest(a / "adjacency.csv") == digest(b / "adjacency.csv")

    def test_missing_required_flag_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("synth", "--nodes", 6, "--out-dir", tmp_path)
        assert exc.value.code == 2

    def test_unknown_command_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run("frobnicate")
        assert exc.value.code == 2


class TestTrain:
    def test_metrics_shape_and_determinism(self, dataset, tmp_path):
        args = (
            "train", "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--window", 6, "--epochs", 12, "--patience", 12,
            "--snr-db", 5, "--seed", 2,
        )
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(*args, "--out-dir", a) == 0
        assert run(*args, "--out-dir", b) == 0
        for name in ("metrics.json", "history.csv", "checkpoint.json"):
            assert digest(a / name) == digest(b / name), name

        metrics = json.loads((a / "metrics.json").read_text())
        assert metrics["schema_version"] == 1
        assert metrics["model"] == "jfrffnet"
        assert metrics["samples"] == {"train": 28, "val": 6, "test": 6}
        assert len(metrics["per_layer_orders"]) == 3
        assert {"alpha", "beta"} <= set(metrics["per_layer_orders"][0])
        test_block = metrics["test"]
        assert set(test_block) == {
            "input_snr_db", "output_snr_db", "snr_gain_db",
            "input_snr_db_mean_per_sample", "output_snr_db_mean_per_sample",
        }
        assert test_block["snr_gain_db"] == pytest.approx(
            test_block["output_snr_db"] - test_block["input_snr_db"]
        )

        with open(a / "history.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 12
        assert set(rows[0]) == {
            "epoch", "train_loss", "val_snr_db",
            "alpha_1", "beta_1", "alpha_2", "beta_2", "alpha_3", "beta_3",
        }

    def test_zero_noise_sentinel_aware(self, dataset, tmp_path):
        # without noise the input SNR is the +inf sentinel: the metrics file
        # must carry it and report no finite gain
        assert run(
            "train", "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--window", 6, "--epochs", 3, "--patience", 3,
            "--noise-kind", "none", "--out-dir", tmp_path, "--seed", 0,
        ) == 0
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["test"]["input_snr_db"] == math.inf
        assert metrics["test"]["snr_gain_db"] is None
        assert metrics["target_snr_db"] is None

    def test_gfrffnet_parameter_counts(self, dataset, tmp_path):
        assert run(
            "train", "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--window", 6, "--epochs", 3, "--patience", 3, "--model", "gfrffnet",
            "--out-dir", tmp_path, "--seed", 0,
        ) == 0
        ckpt = json.loads((tmp_path / "checkpoint.json").read_text())
        assert ckpt["model"] == "gfrffnet"
        assert ckpt["parameter_counts"]["per_layer"] == [10 + 1] * 3

    def test_missing_signal_file_runtime_error(self, dataset, tmp_path, capsys):
        assert run(
            "train", "--signal", tmp_path / "nope.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--out-dir", tmp_path,
        ) == 1
        assert "error:" in capsys.readouterr().err


class TestWiener:
    def test_zero_noise_identity_cell_hits_sentinel(self, dataset, tmp_path):
        assert run(
            "wiener", "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--window", 6, "--noise-kind", "none",
            "--alphas", "0", "--betas", "0",
            "--out-dir", tmp_path, "--seed", 0,
        ) == 0
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["alpha"] == 0.0 and metrics["beta"] == 0.0
        assert metrics["test"]["output_snr_db"] == math.inf

    def test_verbose_recheck_and_filter_dump(self, dataset, tmp_path):
        assert run(
            "wiener", "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--window", 6, "--snr-db", 5,
            "--alphas", "0:1:0.5", "--betas", "0:1:0.5", "--verbose",
            "--out-dir", tmp_path, "--seed", 1,
        ) == 0
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["verified_minimal"] is True
        assert metrics["grid"] == {"alphas": 3, "betas": 3}
        filt = json.loads((tmp_path / "filter.json").read_text())
        assert len(filt["coefficients_real"]) == 10 * 6

    def test_grid_parser(self):
        assert _parse_grid("0:2:0.5") == [0.0, 0.5, 1.0, 1.5, 2.0]
        assert _parse_grid("0.3,1.1") == [0.3, 1.1]
        with pytest.raises(ValueError):
            _parse_grid("0:2")
        with pytest.raises(ValueError):
            _parse_grid("0:2:-0.5")


@pytest.fixture(scope="module")
def trained(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("trained")
    assert run(
        "train", "--signal", dataset / "signal.csv",
        "--adjacency", dataset / "adjacency.csv",
        "--window", 6, "--epochs", 8, "--patience", 8,
        "--snr-db", 5, "--out-dir", out, "--seed", 3,
    ) == 0
    return out


class TestEval:
    def test_reproduces_train_test_metrics(self, dataset, trained, tmp_path):
        assert run(
            "eval", "--checkpoint", trained / "checkpoint.json",
            "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--snr-db", 5, "--out-dir", tmp_path, "--seed", 3,
        ) == 0
        train_metrics = json.loads((trained / "metrics.json").read_text())
        eval_metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert eval_metrics["test"] == train_metrics["test"]

    def test_wrong_graph_fingerprint_refused(self, dataset, trained, tmp_path, capsys):
        other = tmp_path / "other"
        run("synth", "--nodes", 10, "--time", 240, "--out-dir", other, "--seed", 99)
        assert run(
            "eval", "--checkpoint", trained / "checkpoint.json",
            "--signal", dataset / "signal.csv",
            "--adjacency", other / "adjacency.csv",
            "--out-dir", tmp_path, "--seed", 3,
        ) == 1
        assert "different graph spectrum" in capsys.readouterr().err

    def test_corrupted_checkpoint_exit_one(self, dataset, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{ truncated")
        assert run(
            "eval", "--checkpoint", bad,
            "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--out-dir", tmp_path,
        ) == 1
        capsys.readouterr()


class TestManifest:
    def test_records_flags_and_digests(self, dataset):
        manifest = json.loads((dataset / "manifest.json").read_text())
        assert manifest["command"] == "synth"
        assert manifest["seed"] == 1
        assert manifest["flags"]["nodes"] == 10
        assert set(manifest["output_digests"]) == {"signal.csv", "adjacency.csv"}
        recorded = manifest["output_digests"]["signal.csv"]
        assert recorded == digest(dataset / "signal.csv")


class TestSweep:
    def test_structure_and_skip_records(self, dataset, tmp_path):
        assert run(
            "sweep-shifts", "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--window", 6, "--epochs", 2, "--patience", 2,
            "--snr-db", 5, "--out-dir", tmp_path, "--seed", 0,
        ) == 0
        with open(tmp_path / "sweep.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 10  # 5 kinds x 2 models
        assert [r["shift_kind"] for r in rows[::2]] == ["adj", "lap", "rna", "sna", "nlap"]
        for row in rows:
            assert row["model"] in ("jfrffnet", "gfrffnet")
            if row["status"] == "ok":
                float(row["output_snr_db"])  # parses
            else:
                assert row["status"].startswith("skipped:")
                assert row["output_snr_db"] == ""

    def test_single_model_selection(self, dataset, tmp_path):
        assert run(
            "sweep-shifts", "--signal", dataset / "signal.csv",
            "--adjacency", dataset / "adjacency.csv",
            "--window", 6, "--epochs", 2, "--patience", 2,
            "--models", "jfrffnet", "--out-dir", tmp_path, "--seed", 0,
        ) == 0
        with open(tmp_path / "sweep.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 5
        assert all(r["model"] == "jfrffnet" for r in rows)
