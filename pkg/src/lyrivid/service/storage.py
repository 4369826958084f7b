"""On-disk project persistence: one JSON document per project.

Writes replace the document atomically (write temp + rename), and every
mutation goes through a per-project lock, so a crash after an acknowledged
response never loses an edit.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from lyrivid.pipeline import Project


class ProjectStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "projects").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, project_id: str) -> threading.RLock:
        with self._locks_guard:
            if project_id not in self._locks:
                self._locks[project_id] = threading.RLock()
            return self._locks[project_id]

    def project_dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def exists(self, project_id: str) -> bool:
        return (self.project_dir(project_id) / "project.json").exists()

    def save(self, project: Project) -> None:
        directory = self.project_dir(project.id)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "project.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(project.to_payload(), indent=2, sort_keys=True))
        tmp.replace(path)

    def load(self, project_id: str) -> Project:
        path = self.project_dir(project_id) / "project.json"
        if not path.exists():
            raise KeyError(project_id)
        return Project.from_payload(json.loads(path.read_text()))

    def list_ids(self) -> list[str]:
        return sorted(p.name for p in (self.root / "projects").iterdir() if p.is_dir())
