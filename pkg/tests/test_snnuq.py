import os
import xml.etree.ElementTree as ET

import pandas as pd
import pytest
from pytest import raises
import yaml

from snnuq.abstracts.enums import ExitCode
from snnuq.snnuq import main, setup_argparser

CONFIGS = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                       "configuration", "test_configs")


def _config(name):
    return os.path.join(CONFIGS, name)


def _error_lines(capsys):
    err = capsys.readouterr().err
    return [line for line in err.splitlines()
            if line.startswith("snnuq: error:")]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = str(root / "data")
    model = str(root / "model.snn")
    assert main(["-d", "3", "gen-data", "--spec",
                 _config("synthetic_small.cfg"), "--out-dir", data]) == 0
    assert main(["-d", "3", "train", "--data",
                 os.path.join(data, "train.csv"), "--target", "target",
                 "--config", _config("tiny_train.cfg"), "--out", model]) == 0
    return {"root": root, "data": data, "model": model}


def test_usage_errors():
    parser = setup_argparser()
    with raises(SystemExit) as info:
        parser.parse_args(["predict", "--data", "x.csv", "--out", "y.csv"])
    assert info.value.code == 2
    with raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["train", "--data", "x.csv"],
        ["predict", "--model", "m.snn", "--data", "x.csv", "--bogus"],
        ["demo-extrapolation", "--ground-truth", "quartic", "--out-dir", "o"],
    ],
)
def test_subcommand_usage_exit_code(argv, capsys):
    with raises(SystemExit) as info:
        main(argv)
    assert info.value.code == ExitCode.USAGE.value
    assert "error:" in capsys.readouterr().err


def test_version():
    with raises(SystemExit) as info:
        main(["-v"])
    assert info.value.code == 0


def test_gen_data_files(workspace):
    sizes = {}
    for split in ("train", "dev_in", "dev_out"):
        frame = pd.read_csv(os.path.join(workspace["data"],
                                         "{}.csv".format(split)))
        assert list(frame.columns) == ["x0", "x1", "x2", "target"]
        sizes[split] = len(frame)
    assert sizes == {"train": 120, "dev_in": 40, "dev_out": 40}


def test_gen_data_seed_override(tmp_path, workspace):
    out = str(tmp_path / "other")
    assert main(["gen-data", "--spec", _config("synthetic_small.cfg"),
                 "--seed", "5", "--out-dir", out]) == 0
    with open(os.path.join(out, "train.csv"), "rb") as a, \
            open(os.path.join(workspace["data"], "train.csv"), "rb") as b:
        assert a.read() != b.read()


def test_predict(tmp_path, workspace):
    out = str(tmp_path / "predictions.csv")
    assert main(["predict", "--model", workspace["model"], "--data",
                 os.path.join(workspace["data"], "dev_in.csv"),
                 "--out", out, "--decompose"]) == 0
    frame = pd.read_csv(out)
    assert len(frame) == 40
    assert list(frame.columns) == ["mu", "sigma", "uncertainty",
                                   "aleatoric", "epistemic"]
    assert (frame["sigma"] > 0).all()
    assert (frame["epistemic"] >= 0).all()


def test_evaluate(tmp_path, workspace):
    report = str(tmp_path / "eval" / "report.yaml")
    data = workspace["data"]
    assert main(["evaluate", "--model", workspace["model"],
                 "--in", os.path.join(data, "dev_in.csv"),
                 "--out-shifted", os.path.join(data, "dev_out.csv"),
                 "--report", report, "--layout", "legacy"]) == 0

    with open(report) as handle:
        loaded = yaml.safe_load(handle)
    assert loaded["members"] == 3
    assert list(loaded["splits"]) == ["dev_in", "dev_out", "pooled"]
    assert "shift" in loaded

    curve = pd.read_csv(str(tmp_path / "eval" / "report_retention.csv"))
    assert list(curve.columns) == ["retention", "mse"]
    assert len(curve) == 81
    ET.parse(str(tmp_path / "eval" / "report_retention.svg"))


def test_training_is_reproducible(tmp_path, workspace):
    model = str(tmp_path / "again.snn")
    assert main(["train", "--data",
                 os.path.join(workspace["data"], "train.csv"), "--target",
                 "target", "--config", _config("tiny_train.cfg"), "--out",
                 model]) == 0
    with open(model, "rb") as a, open(workspace["model"], "rb") as b:
        assert a.read() == b.read()

    outputs = []
    for name in ("first.csv", "second.csv"):
        out = str(tmp_path / name)
        main(["predict", "--model", model, "--data",
              os.path.join(workspace["data"], "dev_out.csv"), "--out", out])
        with open(out, "rb") as handle:
            outputs.append(handle.read())
    assert outputs[0] == outputs[1]


def test_missing_model_file(tmp_path, workspace, capsys):
    capsys.readouterr()
    code = main(["predict", "--model", str(tmp_path / "absent.snn"),
                 "--data", os.path.join(workspace["data"], "dev_in.csv"),
                 "--out", str(tmp_path / "p.csv")])
    assert code == 1
    lines = _error_lines(capsys)
    assert len(lines) == 1
    assert lines[0].startswith("snnuq: error: FileNotFoundError: ")


def test_corrupt_model_file(tmp_path, workspace, capsys):
    model = tmp_path / "corrupt.snn"
    model.write_bytes(b"definitely not a model")
    capsys.readouterr()
    code = main(["predict", "--model", str(model), "--data",
                 os.path.join(workspace["data"], "dev_in.csv"),
                 "--out", str(tmp_path / "p.csv")])
    assert code == 1
    lines = _error_lines(capsys)
    assert len(lines) == 1
    assert lines[0].startswith("snnuq: error: ContainerError[BAD_MAGIC]: ")


def test_invalid_configuration(tmp_path, workspace, capsys):
    capsys.readouterr()
    code = main(["train", "--data",
                 os.path.join(workspace["data"], "train.csv"), "--target",
                 "target", "--config", _config("unknown_key.cfg"), "--out",
                 str(tmp_path / "m.snn")])
    assert code == 1
    assert _error_lines(capsys) == [
        "snnuq: error: ValidationError: Unrecognized key 'momentum' found "
        "in train."]
    assert not os.path.exists(str(tmp_path / "m.snn"))


def test_missing_target_column(tmp_path, workspace, capsys):
    capsys.readouterr()
    code = main(["train", "--data",
                 os.path.join(workspace["data"], "train.csv"), "--target",
                 "label", "--out", str(tmp_path / "m.snn")])
    assert code == 1
    lines = _error_lines(capsys)
    assert len(lines) == 1
    assert lines[0].startswith("snnuq: error: DataFormatError: ")


def test_plot_retention(tmp_path, workspace):
    report = str(tmp_path / "report.yaml")
    data = workspace["data"]
    main(["evaluate", "--model", workspace["model"], "--in",
          os.path.join(data, "dev_in.csv"), "--report", report])
    curve = str(tmp_path / "report_retention.csv")

    out = str(tmp_path / "plots" / "both.svg")
    assert main(["plot-retention", curve, curve, "--labels", "a", "b",
                 "--out", out]) == 0
    ET.parse(out)


def test_plot_retention_label_mismatch(tmp_path, capsys):
    curve = tmp_path / "curve.csv"
    curve.write_text("retention,mse\n0,0\n1,1\n")
    capsys.readouterr()
    code = main(["plot-retention", str(curve), str(curve), "--labels", "a",
                 "--out", str(tmp_path / "out.svg")])
    assert code == 1
    assert _error_lines(capsys) == [
        "snnuq: error: SnnuqError: Got 1 labels for 2 curves."]


def test_demo_extrapolation(tmp_path, capsys):
    out = str(tmp_path / "demo")
    assert main(["demo-extrapolation", "--seed", "1", "--ground-truth",
                 "linear", "--out-dir", out]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert [line.split(":")[0] for line in printed] == ["linear", "snn"]
    with open(os.path.join(out, "extrapolation.yaml")) as handle:
        assert yaml.safe_load(handle)["ground_truth"] == "linear"
    ET.parse(os.path.join(out, "extrapolation.svg"))
