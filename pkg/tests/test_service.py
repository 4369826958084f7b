"""HTTP service: full editor flow against the stub backend, no network."""

import io
import json

import numpy as np
import pytest
import torch
from fastapi.testclient import TestClient

from lyrivid.backend import BackendDescriptor
from lyrivid.lyrics import DecoderConfig, LyricVae, MusicEncoderConfig, TokenVocab, save_checkpoint
from lyrivid.service import ServiceConfig, create_app

from conftest import SR, fixture_signal


@pytest.fixture(scope="module")
def checkpoint_path(tmp_path_factory):
    torch.manual_seed(17)
    vocab = TokenVocab.build(
        ["city lights burn", "slow river home", "dust on the road"], min_count=1
    )
    model = LyricVae(
        MusicEncoderConfig(layers=1, heads=2, embed_dim=32, latent_dim=16, max_patches=600),
        DecoderConfig(layers=1, heads=2, embed_dim=32, max_sequence_length=64),
        vocab_size=len(vocab),
    )
    path = tmp_path_factory.mktemp("ckpt") / "service.pt"
    save_checkpoint(path, model, vocab)
    return path


def service_config(tmp_path, checkpoint_path) -> ServiceConfig:
    return ServiceConfig(
        root=str(tmp_path / "data"),
        checkpoint=str(checkpoint_path),
        backend=BackendDescriptor(kind="stub"),
        fps=6,
    )


def wav_bytes(seconds=6.0) -> bytes:
    buf = io.BytesIO()
    import wave

    samples = fixture_signal(seconds)
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(SR)
        wf.writeframes((np.clip(samples, -1, 1) * 32767).astype("<i2").tobytes())
    return buf.getvalue()


def upload(client, seconds=6.0, name="song.wav"):
    response = client.post(
        "/projects", files={"file": (name, wav_bytes(seconds), "audio/wav")}
    )
    assert response.status_code == 201, response.text
    return response.json()["id"]


def wait_done(client, app, job_id):
    app.state.jobs.wait_idle()
    payload = client.get(f"/jobs/{job_id}").json()
    return payload


@pytest.fixture()
def client_app(tmp_path, checkpoint_path):
    app = create_app(service_config(tmp_path, checkpoint_path))
    with TestClient(app) as client:
        yield client, app, tmp_path


def test_full_editor_flow(client_app):
    client, app, _ = client_app
    project_id = upload(client, seconds=11.0)

    # keywords
    taxonomy = client.get("/keywords").json()
    names = [c["name"] for c in taxonomy["categories"]]
    assert "Medium" in names
    medium = next(c for c in taxonomy["categories"] if c["name"] == "Medium")
    assert any(k["keyword"] == "Painting" for k in medium["keywords"])

    response = client.put(
        f"/projects/{project_id}/keywords",
        json={"keywords": [["Medium", "Painting"], ["Light", "Warm light"]]},
    )
    assert response.status_code == 200

    # generate and poll
    job_id = client.post(f"/projects/{project_id}/generate").json()["job"]
    payload = wait_done(client, app, job_id)
    assert payload["state"] == "done", payload
    assert payload["progress"] == 1.0

    # project state includes lyrics and candidates
    project = client.get(f"/projects/{project_id}").json()
    assert len(project["lyric_lines"]) == 3
    assert len(project["illustrations"]) == 3
    assert project["ordering"] == [0, 1]

    # video with range support
    video = client.get(f"/projects/{project_id}/video")
    assert video.status_code == 200
    assert video.headers["accept-ranges"] == "bytes"
    head = client.get(f"/projects/{project_id}/video", headers={"Range": "bytes=0-99"})
    assert head.status_code == 206
    assert len(head.content) == 100
    assert head.content[4:8] == b"ftyp"
    assert head.headers["content-range"].startswith("bytes 0-99/")

    subs = client.get(f"/projects/{project_id}/subtitles")
    assert subs.status_code == 200
    assert subs.text.startswith("WEBVTT")

    # reorder + substitute, then regenerate
    response = client.put(f"/projects/{project_id}/order", json={"ordering": [1, 0]})
    assert response.status_code == 200
    slot = project["illustrations"][0]
    response = client.put(
        f"/projects/{project_id}/segments/0/choice",
        json={"candidate_id": slot["candidate_ids"][1]},
    )
    assert response.status_code == 200

    job2 = client.post(f"/projects/{project_id}/generate").json()["job"]
    payload = wait_done(client, app, job2)
    assert payload["state"] == "done"
    after = client.get(f"/projects/{project_id}").json()
    assert after["ordering"] == [1, 0]
    assert after["illustrations"][0]["chosen_id"] == slot["candidate_ids"][1]

    # candidate thumbnails served as PNG
    frame = client.get(f"/projects/{project_id}/frames/{slot['candidate_ids'][1]}.png")
    assert frame.status_code == 200
    assert frame.content[:8] == b"\x89PNG\r\n\x1a\n"


def test_upload_rejects_other_formats(client_app):
    client, _, _ = client_app
    response = client.post("/projects", files={"file": ("x.ogg", b"OggS0000", "audio/ogg")})
    assert response.status_code == 422
    response = client.post("/projects", files={"file": ("x.wav", b"not audio at all", "audio/wav")})
    assert response.status_code == 422


def test_unknown_ids_are_404(client_app):
    client, _, _ = client_app
    assert client.get("/projects/nope").status_code == 404
    assert client.get("/jobs/nope").status_code == 404
    assert client.get("/projects/nope/video").status_code == 404


def test_keyword_validation_detail(client_app):
    client, _, _ = client_app
    project_id = upload(client)
    response = client.put(
        f"/projects/{project_id}/keywords", json={"keywords": [["Color", "Ultraviolet"]]}
    )
    assert response.status_code == 422
    assert "Ultraviolet" in response.json()["detail"]


def test_order_validation_lists_offenders(client_app):
    client, app, _ = client_app
    project_id = upload(client, seconds=11.0)
    job = client.post(f"/projects/{project_id}/generate").json()["job"]
    wait_done(client, app, job)
    response = client.put(f"/projects/{project_id}/order", json={"ordering": [0, 0]})
    assert response.status_code == 422
    assert "offending" in response.json()["detail"]


def test_generate_idempotent_while_active(client_app, monkeypatch):
    client, app, _ = client_app
    project_id = upload(client)
    import threading

    gate = threading.Event()
    original = app.state.jobs._runner

    def slow_runner(job, report):
        gate.wait(timeout=30)
        original(job, report)

    app.state.jobs._runner = slow_runner
    try:
        first = client.post(f"/projects/{project_id}/generate").json()["job"]
        second = client.post(f"/projects/{project_id}/generate").json()["job"]
        assert first == second
        # edits while the job is active are rejected with 409
        res = client.put(f"/projects/{project_id}/order", json={"ordering": []})
        assert res.status_code == 409
    finally:
        gate.set()
        app.state.jobs.wait_idle()


def test_mutations_survive_restart(tmp_path, checkpoint_path):
    config = service_config(tmp_path, checkpoint_path)
    app1 = create_app(config)
    with TestClient(app1) as client:
        project_id = upload(client)
        client.put(f"/projects/{project_id}/keywords",
                   json={"keywords": [["Medium", "Drawing"]]})
        job_id = client.post(f"/projects/{project_id}/generate").json()["job"]
        app1.state.jobs.wait_idle()
        client.put(f"/projects/{project_id}/order", json={"ordering": []})

    # simulated crash-restart: new app over the same storage root
    app2 = create_app(config)
    with TestClient(app2) as client:
        project = client.get(f"/projects/{project_id}").json()
        assert project["keywords"] == [["Medium", "Drawing"]]
        assert project["video_path"] == "video.mp4"
        job = client.get(f"/jobs/{job_id}").json()
        assert job["state"] == "done"
        video = client.get(f"/projects/{project_id}/video")
        assert video.status_code == 200


def test_progress_is_monotone(client_app):
    client, app, _ = client_app
    project_id = upload(client)
    samples = []
    job_id = client.post(f"/projects/{project_id}/generate").json()["job"]
    import time

    deadline = time.time() + 60
    while time.time() < deadline:
        payload = client.get(f"/jobs/{job_id}").json()
        samples.append(payload["progress"])
        if payload["state"] in ("done", "failed"):
            break
        time.sleep(0.02)
    assert payload["state"] == "done"
    assert samples == sorted(samples)
    assert samples[-1] == 1.0


def test_built_ui_served_statically(tmp_path, checkpoint_path):
    ui_dir = tmp_path / "dist"
    ui_dir.mkdir()
    (ui_dir / "index.html").write_text("<!doctype html><title>lyrivid editor</title>")
    config = service_config(tmp_path, checkpoint_path)
    config.ui_dir = str(ui_dir)
    with TestClient(create_app(config)) as client:
        page = client.get("/")
        assert page.status_code == 200
        assert "lyrivid editor" in page.text
        # API routes still win over the static mount
        assert client.get("/keywords").status_code == 200
