"""Flat-directory persistence: content-addressed blobs plus a job index.

Objects live at ``objects/<aa>/<hash>`` (sha256 of the bytes), so identical
artifacts — e.g. the same canonical spec produced twice — share storage.
Job records are small JSON files under ``jobs/``; all writes go through a
single lock per store instance.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

JOB_STATUSES = ("queued", "generating", "refining", "done", "failed")


@dataclass
class JobRecord:
    job_id: str
    case: dict
    config: dict
    status: str = "queued"
    stage: str = ""            # last completed (or failing) pipeline stage
    error: str = ""
    spec_key: str = ""
    raw_key: str = ""
    trace_key: str = ""
    profile: dict = field(default_factory=dict)
    render_keys: dict = field(default_factory=dict)  # tier -> object key
    created_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "JobRecord":
        return JobRecord(**data)


def job_id_for(case: dict, config: dict) -> str:
    payload = json.dumps({"case": case, "config": config}, sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class JobStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "objects").mkdir(parents=True, exist_ok=True)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    # -- blobs ---------------------------------------------------------------

    def put_bytes(self, data: bytes) -> str:
        key = hashlib.sha256(data).hexdigest()
        path = self.root / "objects" / key[:2] / key
        if not path.exists():
            with self._lock:
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(data)
                tmp.replace(path)
        return key

    def put_text(self, text: str) -> str:
        return self.put_bytes(text.encode())

    def get_bytes(self, key: str) -> bytes:
        path = self.root / "objects" / key[:2] / key
        if not path.exists():
            raise KeyError(key)
        return path.read_bytes()

    def get_text(self, key: str) -> str:
        return self.get_bytes(key).decode()

    def has(self, key: str) -> bool:
        return (self.root / "objects" / key[:2] / key).exists()

    # -- jobs ------------------------------------------------------------------

    def _job_path(self, job_id: str) -> Path:
        return self.root / "jobs" / f"{job_id}.json"

    def save_job(self, record: JobRecord) -> None:
        with self._lock:
            path = self._job_path(record.job_id)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(record.to_dict(), sort_keys=True, indent=1))
            tmp.replace(path)

    def load_job(self, job_id: str) -> JobRecord | None:
        path = self._job_path(job_id)
        if not path.exists():
            return None
        return JobRecord.from_dict(json.loads(path.read_text()))

    def list_jobs(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "jobs").glob("*.json"))
