"""Asynchronous generation jobs.

A small persistent job queue: states move queued -> running -> done or
failed, progress is nondecreasing and reaches 1.0 exactly on completion.
One worker by default, mirroring a single-GPU deployment; jobs are
persisted as JSON so polling survives a service restart (interrupted jobs
surface as failed).
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

_STATE_RANK = {"queued": 0, "running": 1, "done": 2, "failed": 2}


@dataclass
class Job:
    id: str
    project_id: str
    state: str = "queued"
    stage: str | None = None
    error: str | None = None
    progress: float = 0.0
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)

    def advance(self, state: str | None = None, stage: str | None = None,
                progress: float | None = None, error: str | None = None) -> None:
        if state is not None:
            if _STATE_RANK[state] < _STATE_RANK[self.state]:
                raise ValueError(f"job state cannot move {self.state} -> {state}")
            self.state = state
        if stage is not None:
            self.stage = stage
        if progress is not None:
            self.progress = max(self.progress, min(progress, 1.0))
        if error is not None:
            self.error = error
        self.updated_at = time.time()

    def to_payload(self) -> dict:
        return asdict(self)


class JobQueue:
    def __init__(self, root: str | Path, runner, workers: int = 1):
        """runner(job, report_progress) executes one generation job."""
        self.root = Path(root) / "jobs"
        self.root.mkdir(parents=True, exist_ok=True)
        self._runner = runner
        self._queue: queue.Queue[str] = queue.Queue()
        self._jobs: dict[str, Job] = {}
        self._guard = threading.Lock()
        self._load_existing()
        self._threads = [
            threading.Thread(target=self._work, name=f"lyrivid-worker-{i}", daemon=True)
            for i in range(workers)
        ]
        for t in self._threads:
            t.start()

    def _load_existing(self) -> None:
        for path in sorted(self.root.glob("*.json")):
            payload = json.loads(path.read_text())
            job = Job(**payload)
            if job.state in ("queued", "running"):
                job.state = "failed"
                job.error = "interrupted by service restart"
                job.updated_at = time.time()
            self._jobs[job.id] = job
            self._persist(job)

    def _persist(self, job: Job) -> None:
        path = self.root / f"{job.id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(job.to_payload()))
        tmp.replace(path)

    def submit(self, project_id: str) -> Job:
        """Enqueue a generation; idempotent while a job is already active."""
        with self._guard:
            active = self.active_for(project_id)
            if active is not None:
                return active
            job = Job(id=uuid.uuid4().hex[:12], project_id=project_id)
            self._jobs[job.id] = job
            self._persist(job)
        self._queue.put(job.id)
        return job

    def get(self, job_id: str) -> Job | None:
        return self._jobs.get(job_id)

    def active_for(self, project_id: str) -> Job | None:
        for job in self._jobs.values():
            if job.project_id == project_id and job.state in ("queued", "running"):
                return job
        return None

    def _work(self) -> None:
        while True:
            job_id = self._queue.get()
            job = self._jobs.get(job_id)
            if job is None:
                continue
            job.advance(state="running", progress=0.0)
            self._persist(job)

            def report(fraction: float, stage: str, job=job) -> None:
                job.advance(stage=stage, progress=min(fraction, 0.999))
                self._persist(job)

            try:
                self._runner(job, report)
            except Exception as exc:  # noqa: BLE001 - failure is a job outcome
                job.advance(state="failed", error=f"{type(exc).__name__}: {exc}")
            else:
                job.advance(state="done", progress=1.0)
            self._persist(job)
            self._queue.task_done()

    def wait_idle(self, timeout: float = 120.0) -> None:
        """Block until all queued work has drained (used by tests)."""
        deadline = time.time() + timeout
        while time.time() < deadline:
            if self._queue.unfinished_tasks == 0:
                return
            time.sleep(0.02)
        raise TimeoutError("job queue did not drain in time")
