"""Regenerate data/tinycorpus.txt, the bundled training fixture.

The fixture is synthetic English-like prose built from a fixed word list
with a seeded generator, so it carries no license baggage and is byte-
reproducible. Rare characters (digits, capitals, brackets, symbols) are
sprinkled in at low rates to widen the character vocabulary without
raising the text's real entropy much.

Usage: python tools/gen_corpus.py [out_path]
"""

import sys
from pathlib import Path

import numpy as np

WORDS = (
    "the of and to in is was for that with field stone river light under "
    "over machine kernel signal garden winter summer road house small large "
    "old new deep open closed quiet bright water mountain forest valley "
    "window morning evening thread metal glass paper letter number answer "
    "question distance weight vector matrix energy charge orbit particle "
    "wave current circuit engine wheel bridge harbor market village city "
    "north south east west green blue gray silver golden hollow narrow "
    "wide early late first second third last other same near far model "
    "pattern measure balance motion silence memory moment season harvest "
    "lantern compass anchor saddle ribbon copper iron cedar willow maple "
    "sparrow heron falcon salmon cricket thunder drizzle frost ember ash "
    "meadow prairie canyon plateau glacier lagoon island peninsula strait "
    "travel wander gather scatter listen whisper murmur echo linger drift "
    "carry build mend carve weave polish sharpen kindle quench temper"
).split()

CONNECTORS = ("and then", "while the", "because the", "beyond the",
              "beneath a", "toward the", "against a", "within the")

RARE = "0123456789#$%&*+=@[]{}<>|~^"


def make_corpus(seed: int = 20240601, target_bytes: int = 300_000) -> str:
    rng = np.random.default_rng(seed)
    chunks = []
    size = 0
    while size < target_bytes:
        n_words = int(rng.integers(6, 14))
        words = list(rng.choice(WORDS, size=n_words))
        if rng.uniform() < 0.35:
            pos = int(rng.integers(1, n_words))
            words.insert(pos, str(rng.choice(CONNECTORS)))
        if rng.uniform() < 0.08:
            words.append(str(rng.integers(0, 10_000)))
        if rng.uniform() < 0.04:
            words.append(str(rng.choice(list(RARE))))
        sentence = " ".join(words)
        sentence = sentence[0].upper() + sentence[1:]
        ending = rng.choice([".", ".", ".", "?", "!", ";", ","])
        sentence += str(ending) + (" " if rng.uniform() < 0.85 else "\n")
        chunks.append(sentence)
        size += len(sentence)
    return "".join(chunks)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/tinycorpus.txt")
    out.parent.mkdir(parents=True, exist_ok=True)
    text = make_corpus()
    out.write_text(text, encoding="utf-8")
    distinct = sorted(set(text))
    print(f"wrote {out} ({len(text)} bytes, {len(distinct)} distinct chars)")


if __name__ == "__main__":
    main()
