import json
import sqlite3

from fsk.logger import RunLedger, file_sha256


def test_log_and_list_and_verify_flow(tmp_path):
    # Prepare isolated db under a temp directory
    db_path = tmp_path / ".fsk" / "runs.db"
    ledger = RunLedger(db_path=str(db_path))
    assert db_path.exists()

    artifact = tmp_path / "build.json"
    artifact.write_text('{"N": 9}\n')

    run_id = ledger.log_run("abcd1234efgh5678", "build", '{"dim": 3}', str(artifact), passed=True)
    assert run_id is not None

    runs = ledger.list_runs(limit=5)
    assert any(r["run_hash"] == "abcd1234efgh5678" for r in runs)
    assert runs[0]["passed"] is True

    assert ledger.verify_run("abcd1234efgh5678") is True
    assert ledger.verify_run("missing") is False


def test_verify_detects_artifact_changes(tmp_path):
    ledger = RunLedger(db_path=str(tmp_path / "runs.db"))
    artifact = tmp_path / "check.json"
    artifact.write_text('{"passed": true}\n')
    ledger.log_run("h1", "check", "{}", str(artifact))

    artifact.write_text('{"passed": false}\n')
    assert ledger.verify_run("h1") is False

    artifact.unlink()
    assert ledger.verify_run("h1") is False


def test_verify_detects_row_edits(tmp_path):
    db_path = tmp_path / "runs.db"
    ledger = RunLedger(db_path=str(db_path))
    ledger.log_run("h2", "spectrum", '{"dim": 3}')
    assert ledger.verify_run("h2") is True

    conn = sqlite3.connect(str(db_path))
    conn.execute("UPDATE runs SET config_json = ? WHERE run_hash = ?", ('{"dim": 4}', "h2"))
    conn.commit()
    conn.close()
    assert ledger.verify_run("h2") is False


def test_relogging_replaces_the_row(tmp_path):
    ledger = RunLedger(db_path=str(tmp_path / "runs.db"))
    ledger.log_run("h3", "check", "{}", passed=False)
    ledger.log_run("h3", "check", "{}", passed=True)
    stats = ledger.get_stats()
    assert stats == {"total_runs": 1, "passed_runs": 1}


def test_export_writes_checksum(tmp_path):
    ledger = RunLedger(db_path=str(tmp_path / "runs.db"))
    ledger.log_run("a1", "build", '{"dim": 3}')
    ledger.log_run("b2", "check", '{"dim": 4}', passed=False)

    out = ledger.export_runs(str(tmp_path / "export"))
    assert out is not None
    bundle = tmp_path / "export" / "runs.json"
    entries = json.loads(bundle.read_text())
    assert [e["run_hash"] for e in entries] == ["a1", "b2"]
    assert entries[1]["config"] == {"dim": 4}
    assert entries[1]["passed"] is False

    digest_line = (tmp_path / "export" / "runs.json.sha256").read_text()
    assert digest_line.split()[0] == file_sha256(str(bundle))


def test_file_sha256_of_missing_file(tmp_path):
    assert file_sha256(str(tmp_path / "nope")) is None
