import json
import subprocess
import sys
from pathlib import Path
import pytest
from harmonizer.cli.main import run
from harmonizer.vlm import MockVLMServer

ROOT = Path(__file__).resolve().parents[1]

def read_json(path):
    with open(path, "r", encoding="utf-8") as data:
        return json.load(data)

@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("HARMONIZER_WORKERS", "HARMONIZER_VLM_ENDPOINT", "HARMONIZER_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)

def test_harmonize_with_rule_agent(fixture_dir, tmp_path):
    out = tmp_path / "out"
    assert run(["harmonize", "-i", str(fixture_dir / "corpus_a.json"), "-o", str(out)]) == 0
    harmonized = read_json(out / "harmonized.json")
    assert len(harmonized["images"]) == 3
    assert len(harmonized["annotations"]) == 15
    assert [c["id"] for c in harmonized["categories"]] == list(range(1, 18))
    summary = read_json(out / "job_report.json")["summary"]
    assert summary["status"] == {"harmonized": 3}
    manifest = read_json(out / "run_manifest.json")
    assert manifest["subcommand"] == "harmonize"
    assert manifest["outputs"] == ["harmonized.json", "job_report.json"]
    assert list(manifest["inputs"]) == [str(fixture_dir / "corpus_a.json")]
    assert len(manifest["config_hash"]) == 64

def test_reruns_are_byte_identical(fixture_dir, tmp_path):
    for name in ("one", "two"):
        assert run(["harmonize", "-i", str(fixture_dir / "corpus_a.json"), "-o", str(tmp_path / name),
                    "--workers", "2"]) == 0
    for name in ("harmonized.json", "job_report.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

def test_analyze_with_mapping(fixture_dir, tmp_path):
    out = tmp_path / "analysis"
    code = run(["analyze", "-i", str(fixture_dir / "corpus_b.json"), str(fixture_dir / "corpus_a.json"),
                "--map", "doclaynet", "-o", str(out)])
    assert code == 0
    report = read_json(out / "discrepancy_report.json")
    assert [o["avg_annotations"] for o in report["overview"]] == [5.0, 9.0]
    assert "3.40×" in (out / "discrepancy_report.txt").read_text(encoding="utf-8")

def test_evaluate_writes_metrics_and_per_page(fixture_dir, tmp_path):
    out = tmp_path / "eval"
    assert run(["evaluate", "-p", str(fixture_dir / "pred.jsonl"), "-r", str(fixture_dir / "ref.jsonl"),
                "-o", str(out)]) == 0
    metrics = read_json(out / "metrics.json")
    assert metrics["detection_recall"] == pytest.approx((0.75 + 1.0) / 2)
    header = (out / "per_page.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("page_id,adjusted_NED,NED")

def test_repgeom_then_scatter(fixture_dir, tmp_path):
    out = tmp_path / "geometry"
    assert run(["repgeom", "-e", str(fixture_dir / "embeddings.jsonl"), "-k", "5", "-o", str(out)]) == 0
    report = read_json(out / "geometry_report.json")
    assert report["purity"]["mean"] == 1.0
    assert (out / "scatter.csv").read_text(encoding="utf-8").startswith("id,label,x,y")

    svg = tmp_path / "plots" / "scatter.svg"
    assert run(["scatter", "-g", str(out / "geometry_report.json"), "-o", str(svg)]) == 0
    assert svg.read_bytes().lstrip().startswith(b"<?xml")
    assert read_json(tmp_path / "plots" / "run_manifest.json")["outputs"] == ["scatter.svg"]

def test_remap_then_merge(fixture_dir, tmp_path):
    remapped = tmp_path / "remapped"
    assert run(["remap", "-i", str(fixture_dir / "corpus_a.json"), "-o", str(remapped)]) == 0
    assert read_json(remapped / "remap_report.json")["total_mapped"] == 27

    merged = tmp_path / "merged"
    code = run(["merge", "-i", str(remapped / "remapped.json"), str(fixture_dir / "corpus_b.json"),
                "--name", "train", "-o", str(merged)])
    assert code == 0
    data = read_json(merged / "merged.json")
    assert [image["id"] for image in data["images"]] == [1, 2, 3, 4, 5, 6]
    assert len({a["id"] for a in data["annotations"]}) == 27 + 15

def test_usage_errors_exit_one(fixture_dir, tmp_path):
    assert run(["harmonize", "-o", str(tmp_path / "out")]) == 1
    assert read_json(tmp_path / "out" / "error.json")["error"] == "UsageError"
    assert run(["evaluate", "-p", str(fixture_dir / "pred.jsonl"), "-r", str(fixture_dir / "ref.jsonl"),
                "-o", str(tmp_path / "e"), "--iou-threshold", "2"]) == 1
    assert run(["nonsense"]) == 1

def test_unparseable_flags_write_error_json(tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["evaluate", "--bogus", "-o", str(out)]) == 1
    error = read_json(out / "error.json")
    assert (error["subcommand"], error["error"], error["exit_code"]) == ("evaluate", "UsageError", 1)
    assert "--bogus" in error["message"]
    assert "Error:" in capsys.readouterr().err

def test_unknown_subcommand_writes_error_json(tmp_path):
    out = tmp_path / "out"
    assert run(["nonsense", "-o", str(out)]) == 1
    error = read_json(out / "error.json")
    assert (error["subcommand"], error["error"]) == ("nonsense", "UsageError")

def test_malformed_input_exits_two(write_coco, tmp_path):
    bad = write_coco('{"images": [')
    out = tmp_path / "out"
    assert run(["remap", "-i", str(bad), "--mapping", "doclaynet", "-o", str(out)]) == 2
    error = read_json(out / "error.json")
    assert (error["error"], error["exit_code"]) == ("CocoParseError", 2)
    assert not (out / "run_manifest.json").exists()

def test_agent_failure_exits_three(fixture_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("HARMONIZER_VLM_BACKOFF_BASE", "0")
    out = tmp_path / "out"
    with MockVLMServer(default=(503, "busy")) as server:
        code = run(["harmonize", "-i", str(fixture_dir / "corpus_a.json"), "-o", str(out),
                    "--agent", "vlm", "--endpoint", server.url, "--max-retries", "1", "--policy", "fail_job"])
        assert server.request_count == 2
    assert code == 3
    assert read_json(out / "error.json")["error"] == "HarmonizationJobError"

def test_vlm_agent_end_to_end(fixture_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("HARMONIZER_VLM_BACKOFF_BASE", "0")
    out = tmp_path / "out"
    with MockVLMServer(default=(200, "not a plan")) as server:
        code = run(["harmonize", "-i", str(fixture_dir / "corpus_a.json"), "-o", str(out), "--agent", "vlm",
                    "--endpoint", server.url, "--max-retries", "0", "--policy", "identity_page"])
    assert code == 0
    assert read_json(out / "job_report.json")["summary"]["status"] == {"fallback": 3}
    assert len(read_json(out / "harmonized.json")["annotations"]) == 27
    transcripts = (out / "transcripts.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(transcripts) == 3
    assert "transcripts.jsonl" in read_json(out / "run_manifest.json")["outputs"]

def test_module_entry_point(fixture_dir, tmp_path):
    out = tmp_path / "out"
    result = subprocess.run(
        [sys.executable, "-m", "harmonizer", "remap", "-i", str(fixture_dir / "corpus_a.json"),
         "--mapping", "doclaynet", "-o", str(out)],
        capture_output=True, text=True, cwd=ROOT,
    )
    assert result.returncode == 0, result.stderr
    assert (out / "remapped.json").exists()

    result = subprocess.run([sys.executable, "-m", "harmonizer", "merge", "-o", str(out)],
                            capture_output=True, text=True, cwd=ROOT)
    assert result.returncode == 1
    assert "Error:" in result.stderr
