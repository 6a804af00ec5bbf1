#!/usr/bin/env python3
"""Train the byte-pair merges table on a synthetic metadata corpus and write
it to the package asset directory. Run once; the table is committed."""

import argparse
from pathlib import Path

from echoph import rngs
from echoph.pipeline.bpe import train_merges, BpeTokenizer
from echoph.pipeline.text import serialize_metadata
from echoph.synth import sample_latent, synthesize_metadata


def build_corpus(n: int, seed: int) -> list[str]:
    corpus = []
    for i in range(n):
        latent = sample_latent(rngs.stream(seed, i, "latent"))
        meta = synthesize_metadata(latent, rngs.stream(seed, i, "meta"))
        corpus.append(serialize_metadata(meta))
    return corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus-size", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=7011)
    parser.add_argument("--max-merges", type=int, default=8000)
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parents[1] / "src" / "echoph" / "assets" / "bpe_merges.txt",
    )
    args = parser.parse_args()

    corpus = build_corpus(args.corpus_size, args.seed)
    merges = train_merges(corpus, args.max_merges)
    tok = BpeTokenizer(merges)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    tok.save(args.out)

    lengths = [len(tok.encode(text)) for text in corpus]
    mean_len = sum(lengths) / len(lengths)
    print(f"wrote {len(merges)} merges to {args.out}")
    print(f"vocab size {tok.vocab_size}, mean tokens/case {mean_len:.1f}")


if __name__ == "__main__":
    main()
