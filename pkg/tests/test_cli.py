import json

import pytest

from extruplan.cli import main

HOLLOW_PROFILE = {
    "profile_type": "hollow",
    "shape_class": 10,
    "wall_thickness": 2.3,
    "width": 50.0,
    "height": 14.7,
    "cross_section_area": 3.4,
    "perimeter": 30.37,
    "external_perimeter": 19.24,
    "tongue_ratio": 1.4,
}

HOLLOW_INPUT_COLUMNS = [3, 14, 28, 36, 49, 80, 130, 143, 160]


@pytest.fixture
def profile_file(tmp_path):
    path = tmp_path / "profile.json"
    path.write_text(json.dumps(HOLLOW_PROFILE))
    return str(path)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A small corpus and model shared by the slower CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus"
    model = root / "model.json"
    assert main(["gen-cases", "--n", "20", "--seed", "5", "--out", str(corpus)]) == 0
    assert (
        main(
            [
                "train",
                "--cases",
                str(corpus),
                "--epochs",
                "80",
                "--hidden",
                "6",
                "--model-out",
                str(model),
            ]
        )
        == 0
    )
    return {"corpus": str(corpus), "model": str(model), "root": root}


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestEncode:
    def test_reference_profile(self, capsys, profile_file):
        code, vec = run_json(capsys, ["encode", "--profile", profile_file])
        assert code == 0
        assert [i + 1 for i, b in enumerate(vec) if b] == HOLLOW_INPUT_COLUMNS

    def test_invalid_profile_exits_1(self, capsys, tmp_path):
        bad = dict(HOLLOW_PROFILE, width=-5.0)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        assert main(["encode", "--profile", str(path)]) == 1
        assert "width" in capsys.readouterr().err

    def test_unencodable_profile_exits_1(self, capsys, tmp_path):
        bad = dict(HOLLOW_PROFILE, wall_thickness=6.5)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        assert main(["encode", "--profile", str(path)]) == 1

    def test_missing_file_exits_2(self, capsys, tmp_path):
        assert main(["encode", "--profile", str(tmp_path / "nope.json")]) == 2

    def test_unparseable_file_exits_2(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{[")
        assert main(["encode", "--profile", str(path)]) == 2

    def test_broken_config_exits_2(self, capsys, profile_file, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"codec_version": "x"}')
        code = main(["encode", "--profile", profile_file, "--config", str(cfg)])
        assert code == 2
        assert "invalid encoding config" in capsys.readouterr().err

    def test_config_env_var(self, capsys, profile_file, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"codec_version": "x"}')
        monkeypatch.setenv("EXTRUPLAN_CONFIG", str(cfg))
        assert main(["encode", "--profile", profile_file]) == 2


class TestGenCases:
    def test_deterministic_output(self, tmp_path, capsys):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["gen-cases", "--n", "15", "--seed", "3", "--out", str(a)]) == 0
        assert main(["gen-cases", "--n", "15", "--seed", "3", "--out", str(b)]) == 0
        assert (a / "cases.json").read_bytes() == (b / "cases.json").read_bytes()


class TestTrain:
    def test_history_csv(self, workspace, tmp_path, capsys):
        hist = tmp_path / "hist.csv"
        model = tmp_path / "m.json"
        code = main(
            [
                "train",
                "--cases",
                workspace["corpus"],
                "--epochs",
                "10",
                "--hidden",
                "3",
                "--model-out",
                str(model),
                "--history-out",
                str(hist),
            ]
        )
        assert code == 0
        lines = hist.read_text().strip().splitlines()
        assert lines[0] == "epoch,mse"
        assert len(lines) == 11
        first = lines[1].split(",")
        assert first[0] == "0"
        assert float(first[1]) > 0

    def test_missing_corpus_exits_2(self, tmp_path, capsys):
        code = main(
            [
                "train",
                "--cases",
                str(tmp_path / "void"),
                "--model-out",
                str(tmp_path / "m.json"),
            ]
        )
        assert code == 2


class TestPredict:
    def test_raw_and_binary(self, capsys, workspace, profile_file):
        code, doc = run_json(
            capsys,
            ["predict", "--profile", profile_file, "--model", workspace["model"]],
        )
        assert code == 0
        assert len(doc["raw"]) == 93
        assert len(doc["binary"]) == 93
        assert all(0.0 < v < 1.0 for v in doc["raw"])
        assert set(doc["binary"]) <= {0, 1}

    def test_threshold_flag(self, capsys, workspace, profile_file):
        code, doc = run_json(
            capsys,
            [
                "predict",
                "--profile",
                profile_file,
                "--model",
                workspace["model"],
                "--threshold",
                "0.9",
            ],
        )
        assert code == 0
        assert sum(doc["binary"]) <= 93


class TestPlan:
    def test_full_chain(self, capsys, workspace, profile_file):
        code, doc = run_json(
            capsys,
            [
                "plan",
                "--profile",
                profile_file,
                "--model",
                workspace["model"],
                "--cases",
                workspace["corpus"],
            ],
        )
        assert code == 0
        assert doc["design"]["die_type"] == "hollow"
        assert doc["plan"]["total_time"] > 0
        assert doc["provenance"][-1] in ("NnPrediction", "KnnFallback", "KbDirect")

    def test_kb_only(self, capsys, profile_file):
        code, doc = run_json(capsys, ["plan", "--profile", profile_file])
        assert code == 0
        assert doc["provenance"][-1] == "KbDirect"

    def test_cases_only(self, capsys, workspace, profile_file):
        code, doc = run_json(
            capsys,
            ["plan", "--profile", profile_file, "--cases", workspace["corpus"]],
        )
        assert code == 0
        assert doc["provenance"] == ["no-model", "KnnFallback"]


class TestEstimate:
    def test_reprices_document(self, capsys, workspace, profile_file, tmp_path):
        code, doc = run_json(capsys, ["plan", "--profile", profile_file])
        assert code == 0
        path = tmp_path / "plan.json"
        path.write_text(json.dumps(doc))
        code, priced = run_json(capsys, ["estimate", "--plan", str(path)])
        assert code == 0
        assert priced["provenance"][-1] == "re-estimated"
        assert priced["plan"]["total_cost"] == pytest.approx(doc["plan"]["total_cost"])

    def test_cost_model_override_changes_totals(
        self, capsys, cfg, profile_file, tmp_path
    ):
        import copy

        code, doc = run_json(capsys, ["plan", "--profile", profile_file])
        plan_path = tmp_path / "plan.json"
        plan_path.write_text(json.dumps(doc))
        section = copy.deepcopy(cfg.estimator)
        for name in section["hourly_rates"]:
            section["hourly_rates"][name] = section["hourly_rates"][name] * 2.0
        override = tmp_path / "rates.json"
        override.write_text(json.dumps(section))
        code, priced = run_json(
            capsys,
            ["estimate", "--plan", str(plan_path), "--cost-model", str(override)],
        )
        assert code == 0
        assert priced["plan"]["total_cost"] == pytest.approx(
            2.0 * doc["plan"]["total_cost"]
        )

    def test_malformed_document_exits_2(self, capsys, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text('{"profile": {}}')
        assert main(["estimate", "--plan", str(path)]) == 2


class TestEval:
    def test_metrics_document(self, capsys, workspace):
        code, metrics = run_json(
            capsys,
            ["eval", "--model", workspace["model"], "--cases", workspace["corpus"]],
        )
        assert code == 0
        assert metrics["cases"] == 20
        assert 0.0 <= metrics["bit_accuracy"] <= 1.0
        assert 0.0 <= metrics["plan_agreement_rate"] <= 1.0
        assert isinstance(metrics["disagreements"], list)


class TestInspect:
    def test_model_summary(self, capsys, workspace):
        code, doc = run_json(capsys, ["inspect-model", workspace["model"]])
        assert code == 0
        assert doc["layer_sizes"] == [170, 6, 93]
        assert doc["metadata"]["epochs"] == 80
