"""Byte-level byte-pair encoding with a fixed merges table.

The table ships as a package asset (one merge per line, two hex-encoded byte
strings). Working at the byte level makes detokenize(tokenize(s)) == s hold
for arbitrary UTF-8 input regardless of the training corpus.
"""

from __future__ import annotations

import collections
from importlib import resources
from pathlib import Path

ASSET_NAME = "bpe_merges.txt"


class BpeTokenizer:
    def __init__(self, merges: list[tuple[bytes, bytes]]):
        self.merges = list(merges)
        self.ranks: dict[tuple[bytes, bytes], int] = {
            pair: i for i, pair in enumerate(self.merges)
        }
        # ids 0..255 are raw bytes; merge i produces id 256 + i
        self.id_to_token: list[bytes] = [bytes([b]) for b in range(256)] + [
            a + b for a, b in self.merges
        ]
        self.token_to_id: dict[bytes, int] = {
            tok: i for i, tok in enumerate(self.id_to_token)
        }

    @property
    def vocab_size(self) -> int:
        return len(self.id_to_token)

    def encode(self, text: str) -> list[int]:
        data = text.encode("utf-8")
        if not data:
            return []
        parts: list[bytes] = [bytes([b]) for b in data]
        while len(parts) > 1:
            best_rank = None
            best_i = -1
            for i in range(len(parts) - 1):
                rank = self.ranks.get((parts[i], parts[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_i = rank, i
            if best_rank is None:
                break
            parts[best_i:best_i + 2] = [parts[best_i] + parts[best_i + 1]]
        return [self.token_to_id[p] for p in parts]

    def decode(self, ids: list[int]) -> str:
        return b"".join(self.id_to_token[i] for i in ids).decode("utf-8")

    def save(self, path: str | Path) -> None:
        lines = [f"{a.hex()} {b.hex()}" for a, b in self.merges]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))

    @classmethod
    def load(cls, path: str | Path) -> "BpeTokenizer":
        merges = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            a, b = line.split(" ")
            merges.append((bytes.fromhex(a), bytes.fromhex(b)))
        return cls(merges)

    @classmethod
    def from_asset(cls) -> "BpeTokenizer":
        ref = resources.files("echoph.assets").joinpath(ASSET_NAME)
        with resources.as_file(ref) as path:
            return cls.load(path)


def train_merges(corpus: list[str], n_merges: int) -> list[tuple[bytes, bytes]]:
    """Greedy BPE training: repeatedly merge the most frequent adjacent pair.
    Frequency ties break lexicographically so training is deterministic.
    Stops early once no pair occurs more than once."""
    sequences = [[bytes([b]) for b in text.encode("utf-8")] for text in corpus]
    merges: list[tuple[bytes, bytes]] = []
    for _ in range(n_merges):
        counts: collections.Counter = collections.Counter()
        for seq in sequences:
            for i in range(len(seq) - 1):
                counts[(seq[i], seq[i + 1])] += 1
        if not counts:
            break
        best_count = max(counts.values())
        if best_count < 2:
            break
        pair = min(p for p, c in counts.items() if c == best_count)
        merges.append(pair)
        merged = pair[0] + pair[1]
        for seq in sequences:
            i = 0
            while i < len(seq) - 1:
                if seq[i] == pair[0] and seq[i + 1] == pair[1]:
                    seq[i:i + 2] = [merged]
                else:
                    i += 1
    return merges
