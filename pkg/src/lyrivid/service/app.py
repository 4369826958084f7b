"""HTTP API exposing the pipeline and editor operations.

Conventions: 404 for unknown ids, 409 for edits while a generation job is
active, 422 for validation failures with per-field detail. Every accepted
mutation is persisted before the response goes out.
"""

from __future__ import annotations

import wave
from pathlib import Path

from fastapi import FastAPI, File, Request, UploadFile
from fastapi.responses import FileResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from lyrivid.backend import make_backend
from lyrivid.errors import ValidationError
from lyrivid.pipeline import ModelHandle, Project, apply_edit, run_pipeline
from lyrivid.prompts import keyword_catalog, validate_keywords
from lyrivid.service.config import ServiceConfig
from lyrivid.service.jobs import JobQueue
from lyrivid.service.storage import ProjectStore


def _sniff_upload(name: str, head: bytes) -> str | None:
    suffix = Path(name or "").suffix.lower()
    if suffix not in (".wav", ".mp3"):
        return None
    if head[:4] == b"RIFF" and head[8:12] == b"WAVE":
        return "wav"
    if head[:3] == b"ID3" or (len(head) >= 2 and head[0] == 0xFF and (head[1] & 0xE0) == 0xE0):
        return "mp3"
    return None


def _wav_duration(path: Path) -> float | None:
    try:
        with wave.open(str(path), "rb") as wf:
            return wf.getnframes() / wf.getframerate()
    except Exception:
        return None


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="lyrivid", version="0.1.0")
    store = ProjectStore(config.root)
    backend = make_backend(config.backend)
    state = {"model": None}

    def model_handle() -> ModelHandle:
        if state["model"] is None:
            if not config.checkpoint:
                raise ValidationError("no model checkpoint configured for this service")
            state["model"] = ModelHandle.from_checkpoint(config.checkpoint)
        return state["model"]

    def run_job(job, report_progress) -> None:
        project_id = job.project_id
        with store.lock(project_id):
            project = store.load(project_id)
        report = run_pipeline(
            project,
            backend,
            model_handle(),
            store.project_dir(project_id),
            progress=lambda fraction, stage: report_progress(fraction, stage),
        )
        with store.lock(project_id):
            store.save(project)
        job.stage = "done"
        del report

    jobs = JobQueue(config.root, run_job, workers=config.workers)
    app.state.store = store
    app.state.jobs = jobs
    app.state.backend = backend
    app.state.config = config

    @app.exception_handler(ValidationError)
    async def _validation_handler(_request: Request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def _load_or_404(project_id: str) -> Project:
        if not store.exists(project_id):
            raise LookupError(project_id)
        return store.load(project_id)

    @app.exception_handler(LookupError)
    async def _lookup_handler(_request: Request, exc: LookupError):
        return JSONResponse(status_code=404, content={"detail": f"unknown id: {exc}"})

    def _reject_if_busy(project_id: str) -> None:
        active = jobs.active_for(project_id)
        if active is not None:
            raise _Busy(active.id)

    class _Busy(Exception):
        def __init__(self, job_id: str):
            self.job_id = job_id

    @app.exception_handler(_Busy)
    async def _busy_handler(_request: Request, exc: _Busy):
        return JSONResponse(
            status_code=409,
            content={"detail": "a generation job is active for this project", "job": exc.job_id},
        )

    # -- projects ------------------------------------------------------------

    @app.post("/projects", status_code=201)
    async def create_project(file: UploadFile = File(...)):
        data = await file.read()
        if len(data) > config.max_upload_bytes:
            raise ValidationError(
                f"file of {len(data)} bytes exceeds the {config.max_upload_bytes}-byte upload cap"
            )
        kind = _sniff_upload(file.filename, data[:12])
        if kind is None:
            raise ValidationError("field 'file': only WAV or MP3 uploads are accepted")
        project = Project.new(audio_path=f"audio.{kind}", fps=config.fps,
                              alternatives=config.alternatives)
        directory = store.project_dir(project.id)
        directory.mkdir(parents=True, exist_ok=True)
        audio_file = directory / project.audio_path
        audio_file.write_bytes(data)
        if kind == "wav":
            duration = _wav_duration(audio_file)
            if duration is not None and duration > config.max_audio_seconds:
                audio_file.unlink()
                directory.rmdir()
                raise ValidationError(
                    f"audio of {duration:.0f}s exceeds the {config.max_audio_seconds:.0f}s limit"
                )
        with store.lock(project.id):
            store.save(project)
        return {"id": project.id}

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        project = _load_or_404(project_id)
        active = jobs.active_for(project_id)
        payload = project.to_payload()
        payload["active_job"] = active.id if active else None
        return payload

    @app.get("/keywords")
    def get_keywords():
        return keyword_catalog().to_payload()

    @app.put("/projects/{project_id}/keywords")
    def put_keywords(project_id: str, body: dict):
        with store.lock(project_id):
            project = _load_or_404(project_id)
            _reject_if_busy(project_id)
            selection = [tuple(pair) for pair in body.get("keywords", [])]
            violations = validate_keywords(selection)
            if violations:
                raise ValidationError("; ".join(v.describe() for v in violations))
            project.keywords = [list(pair) for pair in selection]
            project.needs_render = True
            store.save(project)
            return {"ok": True, "keywords": project.keywords}

    # -- generation ------------------------------------------------------------

    @app.post("/projects/{project_id}/generate", status_code=202)
    def generate(project_id: str):
        _load_or_404(project_id)
        if not config.checkpoint:
            raise ValidationError("no model checkpoint configured for this service")
        job = jobs.submit(project_id)
        return {"job": job.id, "state": job.state}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise LookupError(job_id)
        return job.to_payload()

    # -- edits -----------------------------------------------------------------

    @app.put("/projects/{project_id}/order")
    def put_order(project_id: str, body: dict):
        with store.lock(project_id):
            project = _load_or_404(project_id)
            _reject_if_busy(project_id)
            apply_edit(project, {"kind": "reorder", "ordering": body.get("ordering", [])})
            store.save(project)
            return {"ok": True, "ordering": project.ordering}

    @app.put("/projects/{project_id}/segments/{segment_index}/choice")
    def put_choice(project_id: str, segment_index: int, body: dict):
        with store.lock(project_id):
            project = _load_or_404(project_id)
            _reject_if_busy(project_id)
            apply_edit(
                project,
                {
                    "kind": "substitute",
                    "segment": segment_index,
                    "candidate_id": body.get("candidate_id", ""),
                },
            )
            store.save(project)
            return {"ok": True}

    # -- outputs ---------------------------------------------------------------

    @app.get("/projects/{project_id}/video")
    def get_video(project_id: str, request: Request):
        project = _load_or_404(project_id)
        if not project.video_path:
            raise LookupError(f"{project_id} has no rendered video")
        path = store.project_dir(project_id) / project.video_path
        if not path.exists():
            raise LookupError(f"{project_id} video file missing")
        return _file_with_ranges(path, request, "video/mp4")

    @app.get("/projects/{project_id}/subtitles")
    def get_subtitles(project_id: str):
        project = _load_or_404(project_id)
        if not project.subtitles_path:
            raise LookupError(f"{project_id} has no subtitles")
        path = store.project_dir(project_id) / project.subtitles_path
        return FileResponse(path, media_type="text/vtt")

    @app.get("/projects/{project_id}/frames/{frame_id}.png")
    def get_frame(project_id: str, frame_id: str):
        _load_or_404(project_id)
        path = store.project_dir(project_id) / "frames" / f"{frame_id}.png"
        if not path.exists():
            raise LookupError(f"frame {frame_id}")
        return FileResponse(path, media_type="image/png")

    @app.get("/projects/{project_id}/manifest")
    def get_manifest(project_id: str):
        project = _load_or_404(project_id)
        if not project.manifest_path:
            raise LookupError(f"{project_id} has no manifest")
        path = store.project_dir(project_id) / project.manifest_path
        return Response(content=path.read_bytes(), media_type="application/json")

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def _file_with_ranges(path: Path, request: Request, media_type: str):
    data = path.read_bytes()
    range_header = request.headers.get("range")
    headers = {"Accept-Ranges": "bytes"}
    if range_header and range_header.startswith("bytes="):
        try:
            spec = range_header[len("bytes=") :].split(",")[0].strip()
            start_text, _, end_text = spec.partition("-")
            start = int(start_text) if start_text else 0
            end = int(end_text) if end_text else len(data) - 1
        except ValueError:
            return Response(status_code=416)
        if start >= len(data):
            return Response(status_code=416)
        end = min(end, len(data) - 1)
        chunk = data[start : end + 1]
        headers["Content-Range"] = f"bytes {start}-{end}/{len(data)}"
        return Response(content=chunk, status_code=206, media_type=media_type, headers=headers)
    return Response(content=data, media_type=media_type, headers=headers)
