from __future__ import annotations

from agentgov import fixtures
from agentgov.cli import main


def test_run_completes_with_exit_zero(capsys):
    code = main(["run", fixtures.GOAL_EMAIL_SEQUENCE, "--revenue-cents", "500"])
    out = capsys.readouterr().out
    assert code == 0
    assert "COMPLETED" in out
    assert "task-1-research [passed]" in out


def test_run_failed_job_exits_one(capsys):
    code = main(["run", fixtures.GOAL_EMAIL_SEQUENCE, "--revenue-cents", "10"])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAILED" in out


def test_verify_trail_exit_codes(tmp_path, capsys):
    data_dir = tmp_path / "state"
    assert main(["run", fixtures.GOAL_EMAIL_SEQUENCE, "--data-dir", str(data_dir)]) == 0
    trail = data_dir / "audit_trail.jsonl"
    assert main(["verify-trail", str(trail)]) == 0

    corrupted = trail.read_text().replace('"passed": true', '"passed": false', 1)
    bad = tmp_path / "bad.jsonl"
    bad.write_text(corrupted)
    assert main(["verify-trail", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "failure" in out


def test_eval_fiscal_prints_table(capsys):
    assert main(["eval", "fiscal"]) == 0
    out = capsys.readouterr().out
    assert "30/30" in out


def test_eval_trust(capsys):
    assert main(["eval", "trust"]) == 0
    assert "200/200" in capsys.readouterr().out


def test_eval_audit_writes_reports(tmp_path, capsys):
    assert main(["eval", "audit", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "1200" in out
    assert (tmp_path / "eval_audit.json").exists()
    assert (tmp_path / "eval_audit.md").exists()


def test_run_with_charter_file(tmp_path, capsys):
    charter_path = tmp_path / "charter.yaml"
    charter_path.write_text(fixtures.DEFAULT_CHARTER_YAML, encoding="utf-8")
    code = main(["run", "research the market", "--charter", str(charter_path)])
    assert code == 0  # fallback single-task plan, no revenue gate
    assert "task-1-research" in capsys.readouterr().out


def test_charter_env_var_honored(tmp_path, capsys, monkeypatch):
    charter_path = tmp_path / "charter.yaml"
    # tighten the daily cap below a single 4c estimate so the env charter is provably active
    charter_text = fixtures.DEFAULT_CHARTER_YAML.replace(
        "daily_burn_max_usd: 10.0", "daily_burn_max_usd: 0.03"
    )
    charter_path.write_text(charter_text, encoding="utf-8")
    monkeypatch.setenv("AGENTGOV_CHARTER", str(charter_path))
    code = main(["run", fixtures.GOAL_EMAIL_SEQUENCE])
    out = capsys.readouterr().out
    assert code == 1
    assert "Daily burn cap exceeded" in out


def test_run_with_worker_registry_config(tmp_path, capsys):
    workers_path = tmp_path / "workers.yaml"
    workers_path.write_text(
        """\
- worker_id: custom-writer
  skills: [email_writing, research]
  bid: {cost_usd_cents: 2, time_seconds: 60, confidence: 0.8, model_id: sim}
  behavior: CONSISTENT_SUCCESS
  token_rate: 700
""",
        encoding="utf-8",
    )
    code = main(["run", fixtures.GOAL_EMAIL_SEQUENCE, "--workers", str(workers_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "custom-writer" in out  # the only registered worker won every auction
