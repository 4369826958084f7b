"""Word-level vocabulary with the four sentinel tokens."""

from __future__ import annotations

import re
from dataclasses import dataclass

START = "<START>"
END = "<END>"
PAD = "<PAD>"
UNK = "<UNK>"
SPECIALS = (PAD, START, END, UNK)

_WORD_RE = re.compile(r"[\w']+|[^\w\s]")


def word_tokens(text: str) -> list[str]:
    """Lowercased whitespace/punctuation tokenization."""
    return _WORD_RE.findall(text.lower())


@dataclass
class TokenVocab:
    tokens: list[str]
    token_to_id: dict[str, int]

    @classmethod
    def build(cls, corpus: list[str], min_count: int = 1) -> "TokenVocab":
        """Tokens occurring at least min_count times, plus the specials."""
        if not corpus:
            raise ValueError("cannot build a vocabulary from an empty corpus")
        counts: dict[str, int] = {}
        for line in corpus:
            for tok in word_tokens(line):
                counts[tok] = counts.get(tok, 0) + 1
        kept = sorted(t for t, c in counts.items() if c >= min_count and t not in SPECIALS)
        tokens = list(SPECIALS) + kept
        return cls(tokens=tokens, token_to_id={t: i for i, t in enumerate(tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD]

    @property
    def start_id(self) -> int:
        return self.token_to_id[START]

    @property
    def end_id(self) -> int:
        return self.token_to_id[END]

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK]

    def encode(self, text: str) -> list[int]:
        """Token ids for a line; unseen tokens map to <UNK>.

        The literal sentinel "<START>" encodes to its special id so a
        song's first previous-line context round-trips.
        """
        if text == START:
            return [self.start_id]
        unk = self.unk_id
        return [self.token_to_id.get(t, unk) for t in word_tokens(text)]

    def decode(self, ids) -> str:
        specials = {self.pad_id, self.start_id, self.end_id}
        return " ".join(self.tokens[i] for i in ids if i not in specials)

    def to_payload(self) -> dict:
        return {"tokens": self.tokens}

    @classmethod
    def from_payload(cls, payload: dict) -> "TokenVocab":
        tokens = list(payload["tokens"])
        return cls(tokens=tokens, token_to_id={t: i for i, t in enumerate(tokens)})
