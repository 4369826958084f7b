"""Regenerate committed fixtures: toy checkpoint + golden end-to-end manifest.

Run from the repo root:

    python scripts/make_golden.py

Produces tests/fixtures/toy_checkpoint.pt (a small model trained on the
synthetic fixture corpus) and tests/golden/e2e_manifest.json (the
frame-digest manifest of the deterministic 15 s stub run). Both are
committed; the acceptance suite compares against them byte for byte, so
only regenerate when the pipeline's output is *intended* to change, and
eyeball the diff.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

import numpy as np
import torch

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from conftest import SR, fixture_signal, tone  # noqa: E402

from lyrivid.audio import AudioBuffer, mel_spectrogram, segment_clips, write_wav  # noqa: E402
from lyrivid.backend import StubBackend  # noqa: E402
from lyrivid.lyrics import (  # noqa: E402
    DecoderConfig,
    MusicEncoderConfig,
    TokenVocab,
    TrainConfig,
    save_checkpoint,
    train,
)
from lyrivid.pipeline import ModelHandle, Project, run_pipeline  # noqa: E402

FIXTURES = REPO / "tests" / "fixtures"
GOLDEN = REPO / "tests" / "golden"

GOLDEN_SEED = 11
GOLDEN_FPS = 12
GOLDEN_KEYWORDS = [["Medium", "Painting"], ["Light", "Warm light"]]

SONG_LINES = {
    "fixture": ["river of light", "gold under the bridge", "night carries the song"],
    "variant": ["echo in the hall", "stone steps falling", "morning finds the road"],
}


def variant_signal(seconds: float = 15.0) -> np.ndarray:
    pad = 0.3 * (tone(196, seconds) + tone(246.9, seconds) + tone(293.7, seconds))
    clicks = np.zeros(int(seconds * SR))
    clicks[:: int(0.4 * SR)] = 0.5
    mix = pad + clicks
    return (0.9 * mix / np.max(np.abs(mix))).astype(np.float64)


def build_corpus():
    corpus = []
    signals = {"fixture": fixture_signal(15.0), "variant": variant_signal(15.0)}
    for song, lines in SONG_LINES.items():
        audio = AudioBuffer(samples=signals[song], sample_rate=SR)
        clips = segment_clips(audio, 5.0)
        previous = "<START>"
        for clip, text in zip(clips, lines):
            corpus.append((mel_spectrogram(clip).matrix, previous, text))
            previous = text
    return corpus


def make_checkpoint() -> Path:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    corpus = build_corpus()
    vocab = TokenVocab.build([text for _, _, text in corpus], min_count=1)
    music = MusicEncoderConfig()  # toy defaults: 2 layers, 4 heads, 64 dim, 32 latent
    decoder = DecoderConfig()
    model, history = train(
        corpus,
        TrainConfig(epochs=60, batch_size=6, learning_rate=1e-3, seed=GOLDEN_SEED),
        vocab,
        music_config=music,
        decoder_config=decoder,
        progress_callback=lambda e, total, s: print(
            f"epoch {e:3d}/{total} recon={s.reconstruction:.4f} kl={s.kl:.4f}"
        ),
    )
    path = FIXTURES / "toy_checkpoint.pt"
    save_checkpoint(path, model, vocab)
    print(f"checkpoint -> {path} (final recon {history[-1].reconstruction:.4f})")
    return path


def make_golden_manifest(checkpoint: Path) -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        project_dir = Path(tmp)
        write_wav(project_dir / "audio.wav", AudioBuffer(samples=fixture_signal(15.0), sample_rate=SR))
        project = Project.new(
            audio_path="audio.wav",
            keywords=GOLDEN_KEYWORDS,
            seed=GOLDEN_SEED,
            fps=GOLDEN_FPS,
        )
        run_pipeline(project, StubBackend(), ModelHandle.from_checkpoint(checkpoint), project_dir)
        manifest = json.loads((project_dir / project.manifest_path).read_text())
        out = GOLDEN / "e2e_manifest.json"
        out.write_text(json.dumps(manifest, indent=2) + "\n")
        print(f"golden manifest -> {out} ({manifest['frame_count']} frames)")
        print("lyric lines:")
        for line in project.lyric_lines:
            print(f"  {line.start:5.1f}s  {line.text!r}")


if __name__ == "__main__":
    torch.manual_seed(GOLDEN_SEED)
    ckpt = make_checkpoint()
    make_golden_manifest(ckpt)
