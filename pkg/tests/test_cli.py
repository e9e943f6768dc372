import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from promptlens.cli import main
from promptlens.grammar import save_benchmark


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def bench_path(tmp_path_factory, small_benchmark):
    path = tmp_path_factory.mktemp("cli") / "bench.jsonl"
    save_benchmark(small_benchmark, path)
    return str(path)


def _ok(result):
    assert result.exit_code == 0, result.output
    return result.output


class TestGenerateValidate:
    def test_generate_named_config(self, runner, tmp_path):
        out = str(tmp_path / "b.jsonl")
        output = _ok(runner.invoke(main, ["generate", "--config", "small",
                                          "--seed", "1", "--out", out]))
        assert "wrote 33 records" in output
        assert Path(out).exists()
        assert Path(out + ".meta.json").exists() or Path(out).with_suffix(
            ".jsonl.meta.json"
        ).exists() or Path(str(out) + ".meta.json").exists()

    def test_generate_config_file(self, runner, tmp_path):
        config = tmp_path / "c.json"
        config.write_text(json.dumps({
            "pp": 1, "vp": 1, "conjunction": 1, "anaphora": 1, "ellipsis": 1,
            "fairness": 1, "complex": 0, "combination": 0, "misc": 0,
        }))
        out = str(tmp_path / "b.jsonl")
        output = _ok(runner.invoke(main, ["generate", "--config", str(config),
                                          "--out", out]))
        assert "wrote 6 records" in output

    def test_generate_unknown_config_fails(self, runner, tmp_path):
        result = runner.invoke(main, ["generate", "--config", "nope",
                                      "--out", str(tmp_path / "b.jsonl")])
        assert result.exit_code != 0
        assert "nope" in result.output

    def test_validate_clean_file(self, runner, bench_path):
        output = _ok(runner.invoke(main, ["validate", "--benchmark", bench_path]))
        assert output.startswith("ok:")

    def test_validate_flags_tampering(self, runner, tmp_path, bench_path):
        lines = Path(bench_path).read_text().splitlines()
        doc = json.loads(lines[0])
        doc["visual_setups"][0] = doc["visual_setups"][1]
        lines[0] = json.dumps(doc)
        bad = tmp_path / "bad.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        result = runner.invoke(main, ["validate", "--benchmark", str(bad)])
        assert result.exit_code != 0
        assert "PROBLEM" in result.output


class TestDetectClarify:
    def test_detect_prints_type(self, runner):
        output = _ok(runner.invoke(
            main, ["detect", "--sentence", "An elephant and a bird flying"]
        ))
        assert output.strip() == "Conjunction"

    def test_detect_json_details(self, runner):
        output = _ok(runner.invoke(
            main, ["detect", "--sentence", "A person eating", "--json"]
        ))
        doc = json.loads(output)
        assert doc["ambiguity_type"] == "Fairness"
        assert doc["bindings"]

    def test_detect_no_match_exits_nonzero(self, runner):
        result = runner.invoke(main, ["detect", "--sentence", "hello world"])
        assert result.exit_code == 1

    def test_clarify_oracle_setups(self, runner):
        output = _ok(runner.invoke(main, [
            "clarify", "--sentence", "An elephant and a bird flying",
            "--mode", "multi_setup",
        ]))
        assert output.splitlines() == [
            "the elephant is flying", "the elephant is not flying",
        ]

    def test_clarify_model_via_mock(self, runner):
        output = _ok(runner.invoke(main, [
            "clarify", "--sentence", "An elephant and a bird flying",
            "--mode", "one_question", "--clarifier", "model", "--mock",
        ]))
        assert output.strip() == "is the elephant flying?"


class TestSessionRun:
    def test_auto_oracle_scores_one(self, runner, bench_path, tmp_path):
        out_dir = tmp_path / "logs"
        output = _ok(runner.invoke(main, [
            "session", "run", "--benchmark", bench_path,
            "--mode", "multi_setup", "--answers", "auto",
            "--out-dir", str(out_dir),
        ]))
        assert "skipped: 0" in output
        assert "bleu: 1.0000  rouge: 1.0000" in output
        assert list(out_dir.glob("*.jsonl"))

    def test_limit_restricts_records(self, runner, bench_path):
        output = _ok(runner.invoke(main, [
            "session", "run", "--benchmark", bench_path, "--limit", "2",
        ]))
        assert output.startswith("sessions: 4 ")

    def test_scripted_and_interactive_logs_byte_identical(
        self, runner, bench_path, tmp_path
    ):
        # First pass: auto answers, capturing what the oracle policy did, so
        # the scripted and interactive runs can replay identical choices.
        probe_dir = tmp_path / "probe"
        _ok(runner.invoke(main, [
            "session", "run", "--benchmark", bench_path, "--limit", "3",
            "--mode", "one_question", "--answers", "auto",
            "--out-dir", str(probe_dir),
        ]))
        from promptlens import session as S

        script = {}
        prompts = []
        for log in sorted(probe_dir.glob("*.jsonl")):
            s = S.load(log)
            if s.resolution.kind == "answered":
                script[s.session_id] = {"action": "answer",
                                        "text": s.resolution.signal}
                prompts.append(s.resolution.signal)
            elif s.resolution.kind == "selected":
                script[s.session_id] = {"action": "select",
                                        "index": s.resolution.index}
                prompts.append(f"s{s.resolution.index}")
            else:
                prompts.append("skip")
        script_path = tmp_path / "answers.json"
        script_path.write_text(json.dumps(script))

        scripted_dir = tmp_path / "scripted"
        _ok(runner.invoke(main, [
            "session", "run", "--benchmark", bench_path, "--limit", "3",
            "--mode", "one_question", "--answers", str(script_path),
            "--out-dir", str(scripted_dir),
        ]))
        interactive_dir = tmp_path / "interactive"
        _ok(runner.invoke(main, [
            "session", "run", "--benchmark", bench_path, "--limit", "3",
            "--mode", "one_question", "--answers", "interactive",
            "--out-dir", str(interactive_dir),
        ], input="\n".join(prompts) + "\n"))

        scripted_logs = sorted(scripted_dir.glob("*.jsonl"))
        interactive_logs = sorted(interactive_dir.glob("*.jsonl"))
        assert [p.name for p in scripted_logs] == [p.name for p in interactive_logs]
        assert scripted_logs
        for a, b in zip(scripted_logs, interactive_logs):
            assert a.read_bytes() == b.read_bytes()


class TestAblate:
    def test_shots_table(self, runner, bench_path):
        output = _ok(runner.invoke(main, [
            "ablate", "shots", "--benchmark", bench_path, "--type", "PP",
            "--max-shots", "3", "--mock",
        ]))
        lines = output.strip().splitlines()
        assert lines[0] == "n_shots,bleu,rouge,n_items"
        assert len(lines) == 4
        for n, line in enumerate(lines[1:], start=1):
            cells = line.split(",")
            assert cells[0] == str(n)
            assert 0.0 <= float(cells[1]) <= 1.0
            assert 0.0 <= float(cells[2]) <= 1.0

    def test_shots_missing_type_fails(self, runner, tmp_path, lexicon):
        from promptlens.grammar import GenerationConfig, generate_benchmark

        bench = generate_benchmark(
            GenerationConfig(pp=2, vp=0, conjunction=0, anaphora=0, ellipsis=0,
                             fairness=0, complex=0, combination=0, misc=0),
            lexicon, 0,
        )
        path = tmp_path / "pp.jsonl"
        save_benchmark(bench, path)
        result = runner.invoke(main, [
            "ablate", "shots", "--benchmark", str(path), "--type", "Ellipsis",
            "--mock",
        ])
        assert result.exit_code != 0

    def test_complexity_table(self, runner, bench_path):
        output = _ok(runner.invoke(main, [
            "ablate", "complexity", "--benchmark", bench_path, "--mock",
        ]))
        lines = output.strip().splitlines()
        assert lines[0] == "structure,bleu,rouge,n_items"
        assert lines[1].startswith("simple,")
        assert lines[2].startswith("complex,")


class TestEvalReport:
    def test_eval_then_report(self, runner, bench_path, tmp_path):
        logs = tmp_path / "logs"
        _ok(runner.invoke(main, [
            "session", "run", "--benchmark", bench_path, "--limit", "4",
            "--mode", "multi_setup", "--out-dir", str(logs),
        ]))
        report_path = tmp_path / "report.json"
        output = _ok(runner.invoke(main, [
            "eval", "--sessions", str(logs), "--n-images", "2",
            "--store", str(tmp_path / "imgs"), "--out", str(report_path),
            "--mock",
        ]))
        assert "disambiguated: mean_per_prompt=1.0000" in output
        assert "ambiguous: mean_per_prompt=0.0000" in output

        out_dir = tmp_path / "rendered"
        rendered = _ok(runner.invoke(main, [
            "report", "--report", str(report_path), "--out-dir", str(out_dir),
        ]))
        names = {Path(line).name for line in rendered.strip().splitlines()}
        assert {"items.csv", "summary.csv", "report.json",
                "faithfulness_by_type.png", "faithfulness_overall.png"} <= names
        for line in rendered.strip().splitlines():
            assert Path(line).exists()

    def test_eval_empty_dir_fails(self, runner, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        result = runner.invoke(main, [
            "eval", "--sessions", str(empty), "--out", str(tmp_path / "r.json"),
            "--mock",
        ])
        assert result.exit_code != 0
