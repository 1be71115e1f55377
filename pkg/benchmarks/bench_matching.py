"""Benchmark the pure-Python kernel against the compiled one.

Builds a synthetic trigger table and corpus, then times the shared
longest-match scan through both kernels:

    python benchmarks/bench_matching.py [--sentences N] [--triggers N]
"""

from __future__ import annotations

import argparse
import random
import time
from array import array

from negfact.matching import pykernel

try:
    from negfact.matching import _speedups
except ImportError:
    _speedups = None

VOCAB_SIZE = 400


def build_table(rng: random.Random, n_triggers: int):
    flat: list[int] = []
    offsets = [0]
    unordered: list[int] = []
    windows: list[int] = []
    for _ in range(n_triggers):
        length = rng.randint(1, 4)
        flat.extend(rng.randrange(VOCAB_SIZE) for _ in range(length))
        offsets.append(len(flat))
        is_unordered = length >= 2 and rng.random() < 0.25
        unordered.append(1 if is_unordered else 0)
        windows.append(length + 1 if is_unordered else length)
    ranks = list(range(n_triggers))
    rng.shuffle(ranks)
    return (
        array("i", offsets),
        array("i", flat),
        array("i", unordered),
        array("i", windows),
        array("i", ranks),
    )


def build_corpus(rng: random.Random, n_sentences: int) -> list[array]:
    corpus = []
    for _ in range(n_sentences):
        length = rng.randint(4, 30)
        # 10% unknown tokens, like real text against a trigger vocabulary
        corpus.append(
            array(
                "i",
                (
                    -1 if rng.random() < 0.1 else rng.randrange(VOCAB_SIZE)
                    for _ in range(length)
                ),
            )
        )
    return corpus


def bench(kernel, corpus, table) -> tuple[float, int]:
    offsets, flat, unordered, windows, ranks = table
    start = time.perf_counter()
    n_matches = 0
    for ids in corpus:
        n_matches += len(kernel(ids, offsets, flat, unordered, windows, ranks))
    return time.perf_counter() - start, n_matches


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sentences", type=int, default=20000)
    parser.add_argument("--triggers", type=int, default=200)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    table = build_table(rng, args.triggers)
    corpus = build_corpus(rng, args.sentences)
    tokens = sum(len(ids) for ids in corpus)
    print(f"{args.sentences} sentences, {tokens} tokens, {args.triggers} triggers")

    pure_time, pure_matches = bench(pykernel.find_matches, corpus, table)
    print(f"pure      {pure_time:8.3f}s  {tokens / pure_time / 1e6:6.2f} Mtok/s  ({pure_matches} matches)")

    if _speedups is None:
        print("compiled  (not built; pip install -e . --no-build-isolation)")
        return
    ext_time, ext_matches = bench(_speedups.find_matches, corpus, table)
    print(f"compiled  {ext_time:8.3f}s  {tokens / ext_time / 1e6:6.2f} Mtok/s  ({ext_matches} matches)")
    assert pure_matches == ext_matches, "kernels disagree"
    print(f"speedup   {pure_time / ext_time:8.1f}x")


if __name__ == "__main__":
    main()
