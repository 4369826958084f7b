"""Music-conditioned lyric generation: VAE model, sampling, training."""

from lyrivid.lyrics.model import (
    DecoderConfig,
    LatentHead,
    LatentState,
    LyricDecoder,
    LyricVae,
    MusicEncoder,
    MusicEncoderConfig,
    kl_divergence,
    patch_grid,
    sample_latent,
)
from lyrivid.lyrics.sampling import LyricLine, SamplingConfig, decode_line, filter_logits, greedy_config
from lyrivid.lyrics.training import (
    EpochStats,
    TrainConfig,
    batch_loss,
    beta_schedule,
    load_checkpoint,
    save_checkpoint,
    train,
)
from lyrivid.lyrics.vocab import END, PAD, SPECIALS, START, UNK, TokenVocab, word_tokens

__all__ = [
    "DecoderConfig",
    "END",
    "EpochStats",
    "LatentHead",
    "LatentState",
    "LyricDecoder",
    "LyricLine",
    "LyricVae",
    "MusicEncoder",
    "MusicEncoderConfig",
    "PAD",
    "SPECIALS",
    "START",
    "SamplingConfig",
    "TokenVocab",
    "TrainConfig",
    "UNK",
    "batch_loss",
    "beta_schedule",
    "decode_line",
    "filter_logits",
    "greedy_config",
    "kl_divergence",
    "load_checkpoint",
    "patch_grid",
    "sample_latent",
    "save_checkpoint",
    "train",
    "word_tokens",
]
