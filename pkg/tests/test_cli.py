import json
import os
import signal
import socket
import subprocess
import sys
import time

import pytest
from conftest import CASE3_REQUIREMENT

from reqspec.cli import main
from reqspec.seed import STARTER_REQUIREMENTS


@pytest.fixture()
def kb_file(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    scales = tmp_path / "scales.json"
    kb_path = tmp_path / "kb.json"
    assert main(["seed-corpus", "--output", str(corpus), "--scales-output", str(scales)]) == 0
    assert main([
        "kb-build", "--corpus", str(corpus), "--output", str(kb_path),
        "--scales", str(scales),
    ]) == 0
    return kb_path


def test_kb_build_from_seed_corpus(kb_file):
    doc = json.loads(kb_file.read_text())
    assert doc["version"] == 1
    assert len(doc["vocabulary"]) > 0


def test_kb_build_reports_malformed_line(tmp_path, capsys):
    corpus = tmp_path / "bad.jsonl"
    corpus.write_text('{"text": "ok", "spans": []}\nnot json\n')
    out = tmp_path / "kb.json"
    assert main(["kb-build", "--corpus", str(corpus), "--output", str(out)]) == 1
    assert "line" in capsys.readouterr().err


def test_convert_starters(tmp_path, kb_file):
    inp = tmp_path / "reqs.txt"
    outp = tmp_path / "out.jsonl"
    inp.write_text("\n".join(STARTER_REQUIREMENTS) + "\n")
    assert main([
        "convert", "--input", str(inp), "--kb", str(kb_file), "--output", str(outp)
    ]) == 0
    lines = [json.loads(l) for l in outp.read_text().splitlines()]
    assert len(lines) == 6
    assert all({"requirement", "frame", "formal", "friendly"} <= set(l) for l in lines)


def test_convert_incomplete_line_exits_two(tmp_path, kb_file, capsys):
    inp = tmp_path / "reqs.txt"
    outp = tmp_path / "out.jsonl"
    inp.write_text(CASE3_REQUIREMENT + "\n")
    assert main([
        "convert", "--input", str(inp), "--kb", str(kb_file), "--output", str(outp)
    ]) == 2
    (line,) = [json.loads(l) for l in outp.read_text().splitlines()]
    assert line["needs_clarification"] == ["time"]
    assert "clarification" in capsys.readouterr().err


def test_convert_empty_input(tmp_path, kb_file):
    inp = tmp_path / "empty.txt"
    outp = tmp_path / "out.jsonl"
    inp.write_text("")
    assert main([
        "convert", "--input", str(inp), "--kb", str(kb_file), "--output", str(outp)
    ]) == 0
    assert outp.read_text() == ""


def test_convert_missing_kb_exits_one(tmp_path):
    inp = tmp_path / "reqs.txt"
    inp.write_text("whatever\n")
    assert main([
        "convert", "--input", str(inp), "--kb", str(tmp_path / "nope.json"),
        "--output", str(tmp_path / "out.jsonl"),
    ]) == 1


def test_synth_deterministic_per_seed(tmp_path, kb_file):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["synth", "--kb", str(kb_file), "--count", "25", "--seed", "3"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_synth_rate_flag(tmp_path, kb_file):
    out = tmp_path / "s.jsonl"
    assert main([
        "synth", "--kb", str(kb_file), "--count", "40", "--seed", "1",
        "--missing", "time=1.0", "--missing", "location=0",
        "--output", str(out),
    ]) == 0
    for line in out.read_text().splitlines():
        rec = json.loads(line)
        assert all(s["kind"] != "time" for s in rec["spans"])


def test_synth_count_zero_exits_one(tmp_path, kb_file):
    assert main([
        "synth", "--kb", str(kb_file), "--count", "0",
        "--output", str(tmp_path / "x.jsonl"),
    ]) == 1


def test_synth_bad_missing_flag(tmp_path, kb_file):
    assert main([
        "synth", "--kb", str(kb_file), "--count", "1",
        "--missing", "bogus=0.5", "--output", str(tmp_path / "x.jsonl"),
    ]) == 1


def test_serve_missing_kb_exits_one(tmp_path):
    assert main(["serve", "--kb", str(tmp_path / "nope.json")]) == 1


def test_serve_bad_port_exits_one(kb_file):
    assert main(["serve", "--kb", str(kb_file), "--port", "99999999"]) == 1


def test_config_file_supplies_defaults(tmp_path, kb_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kb": str(kb_file), "count": 5, "seed": 8}))
    out = tmp_path / "out.jsonl"
    assert main(["--config", str(cfg), "synth", "--output", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 5


def test_cli_convert_matches_batch_endpoint(tmp_path, kb_file):
    """The CLI and the batch endpoint agree line by line."""
    from fastapi.testclient import TestClient

    from reqspec.kb import load_file
    from reqspec.service import create_app

    inp = tmp_path / "reqs.txt"
    outp = tmp_path / "out.jsonl"
    lines = STARTER_REQUIREMENTS + [CASE3_REQUIREMENT]
    inp.write_text("\n".join(lines) + "\n")
    main(["convert", "--input", str(inp), "--kb", str(kb_file), "--output", str(outp)])
    cli_lines = [json.loads(l) for l in outp.read_text().splitlines()]

    app = create_app(load_file(kb_file))
    with TestClient(app) as client:
        resp = client.post(
            "/api/batch", content="\n".join(lines), headers={"Content-Type": "text/plain"}
        )
    api_results = resp.json()["results"]

    assert len(cli_lines) == len(api_results)
    for cli_rec, api_rec in zip(cli_lines, api_results):
        if api_rec["status"] == "ok":
            assert cli_rec["formal"] == api_rec["formal"]
            assert cli_rec["friendly"] == api_rec["friendly"]
            assert cli_rec["frame"] == api_rec["frame"]
        elif api_rec["status"] == "needs_clarification":
            assert cli_rec["needs_clarification"] == api_rec["missing"]
        else:
            assert "error" in cli_rec


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_subprocess_health_check(kb_file):
    import httpx

    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "reqspec.cli", "serve", "--kb", str(kb_file),
         "--port", str(port), "--flush-period", "0"],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    try:
        deadline = time.time() + 30
        last_error = None
        while time.time() < deadline:
            if proc.poll() is not None:
                out = proc.stdout.read().decode(errors="replace")
                raise AssertionError(f"server exited early: {out}")
            try:
                resp = httpx.get(f"http://127.0.0.1:{port}/api/health", timeout=1.0)
                assert resp.status_code == 200
                assert resp.json()["status"] == "ok"
                return
            except (httpx.TransportError, OSError) as exc:
                last_error = exc
                time.sleep(0.2)
        raise AssertionError(f"server never became healthy: {last_error}")
    finally:
        if os.name == "posix":
            proc.send_signal(signal.SIGINT)
        proc.terminate()
        proc.wait(timeout=10)
