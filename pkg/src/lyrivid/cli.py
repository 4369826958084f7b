"""Command-line entry points: generate, train, evaluate, keywords, dataset, serve.

Exit codes: 0 success, 1 validation problem, 2 runtime failure.
Diagnostics go to stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from lyrivid.errors import LyrividError, ValidationError


@click.group()
def cli():
    """Narrated music videos from raw audio."""


@cli.command()
@click.option("--music", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--keywords", "keyword_flag", default="", help='e.g. "Medium=Painting,Light=Warm light"')
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--backend", "backend_kind", type=click.Choice(["stub", "remote"]), default="stub", show_default=True)
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--fps", default=12, type=int, show_default=True)
@click.option("--workdir", type=click.Path(file_okay=False), default=None,
              help="project directory (defaults to a sibling of --out)")
@click.option("--burn-subtitles", is_flag=True, default=False)
def generate(music, keyword_flag, seed, backend_kind, checkpoint, out_path, fps, workdir, burn_subtitles):
    """Run the full pipeline on one music file and write an MP4."""
    import shutil

    from lyrivid.backend import BackendDescriptor, make_backend
    from lyrivid.pipeline import ModelHandle, Project, run_pipeline
    from lyrivid.prompts import parse_keyword_flag, validate_keywords

    selection = parse_keyword_flag(keyword_flag)
    violations = validate_keywords(selection)
    if violations:
        raise ValidationError("; ".join(v.describe() for v in violations))

    out = Path(out_path)
    project_dir = Path(workdir) if workdir else out.parent / (out.stem + ".work")
    project_dir.mkdir(parents=True, exist_ok=True)
    audio_name = "audio" + Path(music).suffix.lower()
    shutil.copyfile(music, project_dir / audio_name)

    project = Project.new(
        audio_path=audio_name,
        keywords=[list(pair) for pair in selection],
        seed=seed,
        fps=fps,
        subtitle_burn_in=burn_subtitles,
    )
    backend = make_backend(BackendDescriptor(kind=backend_kind))
    handle = ModelHandle.from_checkpoint(checkpoint)

    def progress(fraction: float, stage: str) -> None:
        click.echo(f"[{fraction:5.0%}] {stage}", err=True)

    run_pipeline(project, backend, handle, project_dir, progress=progress)
    shutil.copyfile(project_dir / project.video_path, out)
    for line in project.lyric_lines:
        click.echo(f"{line.start:6.1f}s  {line.text}")
    click.echo(str(out))


@cli.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None,
              help="JSONL loss log (defaults to <out>.log.jsonl)")
def train(manifest, config_path, out_path, log_path):
    """Train the lyric model on a pair manifest and save a checkpoint."""
    from lyrivid.audio import mel_spectrogram
    from lyrivid.dataset import read_manifest
    from lyrivid.lyrics import (
        DecoderConfig,
        MusicEncoderConfig,
        TokenVocab,
        TrainConfig,
        save_checkpoint,
        train as train_model,
    )

    overrides = json.loads(Path(config_path).read_text()) if config_path else {}
    train_config = TrainConfig(**overrides.get("train", {}))
    music_config = MusicEncoderConfig(**overrides.get("music", {}))
    decoder_config = DecoderConfig(**overrides.get("decoder", {}))

    pairs = read_manifest(manifest)
    if not pairs:
        raise ValidationError(f"manifest {manifest} contains no pairs")
    base_dir = Path(manifest).parent
    corpus = [p.target_line for p in pairs]
    vocab = TokenVocab.build(corpus, min_count=overrides.get("min_count", 1))
    dataset = []
    for pair in pairs:
        clip = pair.load_clip(base_dir)
        dataset.append((mel_spectrogram(clip).matrix, pair.previous_line, pair.target_line))

    log_file = log_path or (out_path + ".log.jsonl")
    model, history = train_model(
        dataset, train_config, vocab,
        music_config=music_config, decoder_config=decoder_config, log_path=log_file,
        progress_callback=lambda e, total, s: click.echo(
            f"epoch {e}/{total} recon={s.reconstruction:.4f} kl={s.kl:.4f} beta={s.beta:.2e}", err=True
        ),
    )
    save_checkpoint(out_path, model, vocab)
    click.echo(f"checkpoint: {out_path}")
    click.echo(f"final reconstruction: {history[-1].reconstruction:.4f}")


@cli.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--frequency-top", default=2000, type=int, show_default=True)
def evaluate(manifest, checkpoint, report_path, seed, frequency_top):
    """Generate lyrics for a test manifest and emit a metric report."""
    import numpy as np

    from lyrivid import metrics
    from lyrivid.audio import mel_spectrogram
    from lyrivid.backend import GenerationRequest, StubBackend
    from lyrivid.dataset import read_manifest
    from lyrivid.lyrics import SamplingConfig, decode_line, load_checkpoint
    from lyrivid.pipeline import derive_seed
    from lyrivid.prompts import Prompt

    model, vocab = load_checkpoint(checkpoint)
    pairs = read_manifest(manifest)
    if not pairs:
        raise ValidationError(f"manifest {manifest} contains no pairs")
    base_dir = Path(manifest).parent

    candidates, references = [], []
    per_song: dict[str, list[str]] = {}
    for i, pair in enumerate(pairs):
        mel = mel_spectrogram(pair.load_clip(base_dir)).matrix
        state = model.posterior(mel, seed=derive_seed(seed, "latent", i))
        context = vocab.encode(pair.previous_line) or [vocab.unk_id]
        line = decode_line(
            model, state.z, context, SamplingConfig(seed=derive_seed(seed, "lyric", i)), vocab
        )
        candidates.append(line.text)
        references.append(pair.target_line)
        per_song.setdefault(pair.song_id, []).append(line.text)

    stops = metrics.load_stopwords()
    freq2 = metrics.build_frequency_list(references, 2, stops, top=frequency_top)
    freq3 = metrics.build_frequency_list(references, 3, stops, top=frequency_top)

    backend = StubBackend()
    clip_scores = []
    for text in candidates:
        prompt = Prompt(text=text or "empty line")
        emb = backend.text_embed(prompt)
        frame = backend.generate(GenerationRequest(embedding=emb, noise=backend.draw_noise(0)))
        clip_scores.append(metrics.clip_score(backend.image_embed(frame), emb))

    report = metrics.MetricReport(
        bleu_2=metrics.bleu_n(candidates, references, 2),
        bleu_3=metrics.bleu_n(candidates, references, 3),
        distinct_2=metrics.distinct_n(candidates, 2),
        distinct_3=metrics.distinct_n(candidates, 3),
        novelty_2=metrics.novelty_n(candidates, freq2, stops),
        novelty_3=metrics.novelty_n(candidates, freq3, stops),
        coherence=metrics.coherence(list(per_song.values()), stops),
        clip_score=float(np.mean(clip_scores)),
        coherence_raw=metrics.coherence(list(per_song.values()), stops, normalized=False),
    )
    report.write(report_path)
    click.echo(report.to_json())


@cli.group()
def keywords():
    """Keyword taxonomy helpers."""


@keywords.command("list")
def keywords_list():
    """Dump the six-category style keyword catalog."""
    from lyrivid.prompts import keyword_catalog

    catalog = keyword_catalog()
    for name, entries in catalog.categories.items():
        click.echo(f"{name}:")
        for entry in entries:
            tag = "*" if entry.provenance == "selected" else " "
            click.echo(f"  {tag} {entry.keyword}")
    click.echo(f"({catalog.selected_count()} experiment-selected keywords marked *)")


@cli.group()
def dataset():
    """Dataset ingestion commands."""


@dataset.command("build")
@click.option("--dali", "annotations_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--train-fraction", default=0.8, type=float, show_default=True)
@click.option("--clip-seconds", default=5.0, type=float, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
def dataset_build(annotations_dir, out_path, train_fraction, clip_seconds, seed):
    """Ingest per-song annotations into a pair manifest and split file."""
    from lyrivid.dataset import ingest_directory, stratified_split, write_manifest, write_split_file

    pairs_by_song = ingest_directory(annotations_dir, clip_seconds=clip_seconds)
    train_pairs, test_pairs = stratified_split(pairs_by_song, train_fraction, seed=seed)
    write_manifest(train_pairs + test_pairs, out_path)
    write_manifest(train_pairs, out_path + ".train")
    write_manifest(test_pairs, out_path + ".test")
    write_split_file(train_pairs, test_pairs, out_path + ".split.json")
    click.echo(
        f"{len(pairs_by_song)} songs -> {len(train_pairs)} train / {len(test_pairs)} test pairs"
    )


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def serve(config_path):
    """Start the HTTP editing service."""
    import uvicorn

    from lyrivid.service import ServiceConfig, create_app

    config = ServiceConfig.load(config_path)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(2)
    except LyrividError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
