import io
import json
import sys

import pytest

from botprof.cli import main
from botprof.report import load_profile
from conftest import GOLDEN, data_text, example1_trace
from botprof.trace import write_trace

SIGMAS = "example1-sigmas.json"


@pytest.fixture
def files(tmp_path):
    sig = tmp_path / "sigmas.json"
    sig.write_text(data_text(SIGMAS))
    good = tmp_path / "ex1.trace"
    good.write_text(write_trace(example1_trace()))
    bad = tmp_path / "bad.trace"
    bad.write_text(write_trace(example1_trace()).replace(",15995,", ",-5,"))
    return tmp_path, sig, good, bad


def run(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_writes_trace(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code, stdout, _ = run(["simulate", "--policy", "greedy", "--ticks", "500", "--seed", "42", "--out", str(out)], capsys)
    assert code == 0
    rows = out.read_text().split("\n\n", 1)[1].strip().split("\n")[1:]
    assert 0 < len(rows) <= 500
    assert stdout.startswith(f"ticks={len(rows)} rewards_captured=")


def test_simulate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for p in (a, b):
        assert run(["simulate", "--seed", "9", "--ticks", "200", "--out", str(p)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_missing_out_is_usage_error(capsys):
    code, _, err = run(["simulate", "--seed", "1"], capsys)
    assert code == 2 and "usage:" in err and "--out" in err


def test_unknown_subcommand(capsys):
    assert run(["dance"], capsys)[0] == 2


def test_profile_from_sigma_fixture(files, capsys):
    _, sig, _, _ = files
    code, out, _ = run(["profile", "--sigma-fixture", str(sig), "--format", "text"], capsys)
    assert code == 0 and "brave" in out
    assert out == (GOLDEN / "example1-report.txt").read_text()


def test_profile_json_validates(files, capsys):
    _, sig, _, _ = files
    code, out, _ = run(["profile", "--sigma-fixture", str(sig), "--format", "json"], capsys)
    assert code == 0
    assert load_profile(out).sentences[0].endswith("many brave attitudes.")
    assert out == (GOLDEN / "example1-profile.json").read_text()


def test_profile_from_trace(files, capsys):
    _, _, good, _ = files
    code, out, _ = run(["profile", str(good)], capsys)
    data = json.loads(out)
    assert code == 0 and data["subject_id"] == "example-1"
    assert data["cps"]["Situation"]["labels"] == ["Dangerous"]
    assert data["stats"]["ticks"] == 1


def test_profile_markdown_and_subject(files, capsys):
    _, sig, _, _ = files
    code, out, _ = run(["profile", "--sigma-fixture", str(sig), "--format", "markdown", "--subject", "bot-x"], capsys)
    assert code == 0 and out.startswith("# Behavior profile: bot-x")


def test_profile_corrupted_trace(files, capsys):
    _, _, _, bad = files
    code, _, err = run(["profile", str(bad)], capsys)
    assert code == 1
    assert "time_ms negative at tick 0" in err


def test_profile_from_stdin(files, capsys, monkeypatch):
    _, _, good, _ = files
    code, out, _ = run(["profile", "-"], capsys, stdin=good.read_text(), monkeypatch=monkeypatch)
    assert code == 0 and json.loads(out)["subject_id"] == "example-1"


def test_grade_identity(tmp_path, capsys):
    ref = tmp_path / "ref.json"
    ref.write_text(data_text("human-expert.json"))
    code, out, _ = run(["grade", str(ref), "--reference", str(ref)], capsys)
    assert code == 0 and json.loads(out)["fg"] == 7.0


def test_grade_fixture_against_builtin_reference(files, capsys):
    _, sig, _, _ = files
    code, out, _ = run(["grade", str(sig)], capsys)
    d = json.loads(out)
    assert code == 0
    assert d["per_cp"]["Attitude"]["similarity"] == pytest.approx(0.902961, abs=1e-6)
    assert d == json.loads((GOLDEN / "example1-grade.json").read_text())


def test_grade_missing_reference(files, capsys):
    _, sig, _, _ = files
    code, _, err = run(["grade", str(sig), "--reference", "nowhere.json"], capsys)
    assert code == 1 and "cannot read nowhere.json" in err


def test_grade_label_mismatch(files, capsys):
    tmp, sig, _, _ = files
    data = json.loads(data_text("human-expert.json"))
    att = data["cps"]["Attitude"]["percentages"]
    att["Idle"] = att.pop("Passive")
    ref = tmp / "odd.json"
    ref.write_text(json.dumps(data))
    code, _, err = run(["grade", str(sig), "--reference", str(ref)], capsys)
    assert code == 1 and "label sets differ" in err


def test_grade_text_format(files, capsys):
    _, sig, _, _ = files
    code, out, _ = run(["grade", str(sig), "--format", "text"], capsys)
    assert code == 0 and out.startswith("Final grade: 5.3")


def test_grade_batch(files, capsys):
    tmp, sig, good, _ = files
    batch = tmp / "batch"
    batch.mkdir()
    for seed in (3, 1, 2):
        assert run(["simulate", "--seed", str(seed), "--ticks", "80", "--out", str(batch / f"s{seed}.trace")], capsys)[0] == 0
    (batch / "a-fixture.json").write_text(sig.read_text())
    out_dir = tmp / "grades"
    code, out, _ = run(["grade", "--batch", str(batch), "--out", str(out_dir)], capsys)
    assert code == 0
    names = [line.split()[0] for line in out.strip().split("\n")[1:]]
    assert names == ["a-fixture.json", "s1.trace", "s2.trace", "s3.trace"]
    assert sorted(p.name for p in out_dir.iterdir()) == [f"{n}.grade.json" for n in names]
    again = run(["grade", "--batch", str(batch)], capsys)[1]
    assert again == out


def test_grade_batch_reports_bad_file(files, capsys):
    tmp, _, _, bad = files
    batch = tmp / "b2"
    batch.mkdir()
    (batch / "bad.trace").write_text(bad.read_text())
    code, out, _ = run(["grade", "--batch", str(batch)], capsys)
    assert code == 1 and "bad.trace" in out and "error" in out


def test_compare(files, capsys, tmp_path):
    _, sig, _, _ = files
    ref = tmp_path / "ref.json"
    ref.write_text(data_text("human-expert.json"))
    code, out, _ = run(["compare", str(ref), str(sig)], capsys)
    assert code == 0
    assert json.loads(out)["Attitude"]["similarity"] == pytest.approx(0.902961, abs=1e-6)


def test_validate_trace_ok(files, capsys):
    _, _, good, _ = files
    assert run(["validate", "--trace", str(good)], capsys)[:2] == (0, "OK\n")


def test_validate_bad_trace(files, capsys):
    _, _, _, bad = files
    code, out, _ = run(["validate", "--trace", str(bad)], capsys)
    assert code == 1 and out == "trace: time_ms negative at tick 0\n"


def test_validate_bad_network(tmp_path, capsys):
    cfg = json.loads(data_text("default-network.json"))
    cfg["cps"][0]["rules"][0]["when"][1] = "Nearby"
    path = tmp_path / "net.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run(["validate", "--network", str(path)], capsys)
    assert code == 1 and "rule 0" in out and "unknown label 'Nearby'" in out


def test_validate_both(files, capsys, tmp_path):
    _, _, good, _ = files
    net = tmp_path / "net.json"
    net.write_text(data_text("default-network.json"))
    assert run(["validate", "--trace", str(good), "--network", str(net)], capsys)[:2] == (0, "OK\n")


def test_validate_needs_a_flag(capsys):
    code, _, err = run(["validate"], capsys)
    assert code == 2 and "usage:" in err


def test_network_env_override(files, capsys, monkeypatch, tmp_path):
    _, _, good, _ = files
    cfg = json.loads(data_text("default-network.json"))
    cfg["cps"] = [c for c in cfg["cps"] if c["name"] != "Resources"]
    path = tmp_path / "net.json"
    path.write_text(json.dumps(cfg))
    monkeypatch.setenv("BOTPROF_NETWORK", str(path))
    code, _, err = run(["profile", str(good)], capsys)
    assert code == 1 and "Resources" in err
    monkeypatch.setenv("BOTPROF_NETWORK", str(tmp_path / "missing.json"))
    assert run(["profile", str(good)], capsys)[0] == 1
