"""
fsk Run Ledger
==============
SQLite record of build/check runs with signed artifact digests.
"""

import hashlib
import json
import sqlite3
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional


def file_sha256(path: str) -> Optional[str]:
    p = Path(path)
    if not p.is_file():
        return None
    return hashlib.sha256(p.read_bytes()).hexdigest()


def _say(message: str) -> None:
    print(message, file=sys.stderr)


class RunLedger:
    """
    Run ledger backed by SQLite.

    Every row carries a sha256 signature over its hash, config and artifact
    digest, so edits to the stored row or to the artifact file are detected
    by verify_run.
    """

    def __init__(self, db_path: str = "runs.db"):
        """
        Args:
            db_path: Path to the SQLite database (parent is created)
        """
        self.db_path = Path(db_path)
        self._init_database()

    def _init_database(self):
        try:
            self.db_path.parent.mkdir(parents=True, exist_ok=True)
            conn = sqlite3.connect(str(self.db_path))
            cursor = conn.cursor()
            cursor.execute('''
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_hash TEXT UNIQUE NOT NULL,
                    command TEXT NOT NULL,
                    config_json TEXT NOT NULL,
                    artifact_path TEXT,
                    artifact_sha256 TEXT,
                    signature TEXT NOT NULL,
                    passed INTEGER NOT NULL,
                    timestamp_utc TEXT NOT NULL
                )
            ''')
            conn.commit()
            conn.close()
        except Exception as e:
            _say(f"⚠️ Ledger initialization failed: {e}")

    @staticmethod
    def sign(run_hash: str, config_json: str, artifact_sha256: Optional[str]) -> str:
        return hashlib.sha256(f"{run_hash}{config_json}{artifact_sha256 or ''}".encode()).hexdigest()

    def log_run(self,
                run_hash: str,
                command: str,
                config_json: str,
                artifact_path: Optional[str] = None,
                passed: bool = True) -> Optional[int]:
        """
        Record a run, replacing any earlier row with the same hash.

        Returns:
            Row id if successful, None otherwise
        """
        try:
            digest = file_sha256(artifact_path) if artifact_path else None
            signature = self.sign(run_hash, config_json, digest)
            conn = sqlite3.connect(str(self.db_path))
            cursor = conn.cursor()
            cursor.execute('''
                INSERT OR REPLACE INTO runs
                (run_hash, command, config_json, artifact_path, artifact_sha256, signature, passed, timestamp_utc)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?)
            ''', (
                run_hash,
                command,
                config_json,
                artifact_path,
                digest,
                signature,
                int(bool(passed)),
                datetime.now(timezone.utc).isoformat(),
            ))
            run_id = cursor.lastrowid
            conn.commit()
            conn.close()
            return run_id
        except Exception as e:
            _say(f"❌ Run logging failed: {e}")
            return None

    def _fetch(self, run_hash: str) -> Optional[Dict[str, Any]]:
        conn = sqlite3.connect(str(self.db_path))
        conn.row_factory = sqlite3.Row
        cursor = conn.cursor()
        cursor.execute('SELECT * FROM runs WHERE run_hash = ?', (run_hash,))
        row = cursor.fetchone()
        conn.close()
        return dict(row) if row else None

    def verify_run(self, run_hash: str) -> bool:
        """
        Recompute the row signature and re-hash the artifact on disk.

        Returns:
            True if both match, False otherwise
        """
        try:
            row = self._fetch(run_hash)
            if not row:
                _say(f"❌ Run {run_hash} not found")
                return False
            expected = self.sign(row['run_hash'], row['config_json'], row['artifact_sha256'])
            if expected != row['signature']:
                _say(f"❌ Signature mismatch for run {run_hash}")
                return False
            if row['artifact_path']:
                current = file_sha256(row['artifact_path'])
                if current != row['artifact_sha256']:
                    _say(f"❌ Artifact changed or missing for run {run_hash}: {row['artifact_path']}")
                    return False
            _say(f"✅ Run {run_hash} verified ({row['command']})")
            return True
        except Exception as e:
            _say(f"❌ Verification failed: {e}")
            return False

    def list_runs(self, limit: int = 10) -> List[Dict[str, Any]]:
        try:
            conn = sqlite3.connect(str(self.db_path))
            conn.row_factory = sqlite3.Row
            cursor = conn.cursor()
            cursor.execute('''
                SELECT run_hash, command, artifact_path, passed, timestamp_utc
                FROM runs
                ORDER BY timestamp_utc DESC
                LIMIT ?
            ''', (limit,))
            rows = [dict(r) for r in cursor.fetchall()]
            conn.close()
            for r in rows:
                r['passed'] = bool(r['passed'])
            return rows
        except Exception as e:
            _say(f"❌ Failed to list runs: {e}")
            return []

    def export_runs(self, output_dir: str = ".") -> Optional[str]:
        """
        Write runs.json (all rows, oldest first) and runs.json.sha256.

        Returns:
            The output directory, or None on failure
        """
        try:
            outdir = Path(output_dir)
            outdir.mkdir(parents=True, exist_ok=True)
            conn = sqlite3.connect(str(self.db_path))
            conn.row_factory = sqlite3.Row
            cursor = conn.cursor()
            cursor.execute('SELECT * FROM runs ORDER BY id')
            entries = []
            for r in cursor.fetchall():
                entry = dict(r)
                entry['config'] = json.loads(entry.pop('config_json'))
                entry['passed'] = bool(entry['passed'])
                entries.append(entry)
            conn.close()

            bundle = outdir / 'runs.json'
            with open(bundle, 'w') as f:
                json.dump(entries, f, indent=2, sort_keys=True)
            with open(outdir / 'runs.json.sha256', 'w') as f:
                f.write(file_sha256(str(bundle)) + "  runs.json\n")
            _say(f"✅ Exported run ledger in {outdir}")
            return str(outdir)
        except Exception as e:
            _say(f"❌ Export failed: {e}")
            return None

    def get_stats(self) -> Dict[str, int]:
        try:
            conn = sqlite3.connect(str(self.db_path))
            cursor = conn.cursor()
            cursor.execute('SELECT COUNT(*), COALESCE(SUM(passed), 0) FROM runs')
            total, passed = cursor.fetchone()
            conn.close()
            return {'total_runs': int(total), 'passed_runs': int(passed)}
        except Exception as e:
            _say(f"❌ Failed to get stats: {e}")
            return {'total_runs': 0, 'passed_runs': 0}
