"""Synthetic concatenative language with known gold segmentations.

Words are a root, optionally followed by a suffix, or two roots joined by
a linking element and optionally suffixed.  A Zipf-weighted sample gives a
training corpus; gold annotations and a disjoint held-out set are drawn
from the sampled word types.
"""
from __future__ import annotations

import os
import random
from collections import Counter
from dataclasses import dataclass

from .corpus import AnnotatedWord, MorphCategory, serialize_annotations
from .exceptions import ValidationError

CONSONANTS = "bdfgklmnprstv"
VOWELS = "aeiouyæøå"


@dataclass
class ToyLanguage:
    roots: list[str]
    suffixes: list[str]
    links: list[str]
    tokens: list[str]
    annotations: list[AnnotatedWord]
    holdout: list[AnnotatedWord]

    @property
    def counts(self) -> Counter:
        return Counter(self.tokens)

    def corpus_text(self, words_per_line: int = 12) -> str:
        lines = [" ".join(self.tokens[i:i + words_per_line])
                 for i in range(0, len(self.tokens), words_per_line)]
        return "\n".join(lines) + "\n"


def _syllable(rng):
    return rng.choice(CONSONANTS) + rng.choice(VOWELS)


def _distinct(rng, n, make, taken):
    out = []
    while len(out) < n:
        s = make()
        if s not in taken:
            taken.add(s)
            out.append(s)
    return out


def _analyse(root1, link, root2, suffix):
    segs = [(root1, "Root")]
    if link:
        segs += [(link, "Link"), (root2, "Root")]
    if suffix:
        segs.append((suffix, "Suff"))
    if link:
        cat = MorphCategory.COMPOUND
    elif suffix:
        cat = MorphCategory.SUFFIX
    else:
        cat = MorphCategory.ROOT
    return AnnotatedWord("".join(s for s, _ in segs), tuple(segs), cat)


def make_toy_language(seed: int = 0, n_roots: int = 30, n_suffixes: int = 5, n_links: int = 3,
                      n_tokens: int = 5000, n_annotations: int = 400, n_holdout: int = 71,
                      compound_share: float = 0.4, zipf_s: float = 1.0) -> ToyLanguage:
    rng = random.Random(seed)
    taken: set[str] = set()
    roots = _distinct(rng, n_roots, lambda: "".join(_syllable(rng) for _ in range(rng.choice((2, 2, 3))))
                      + (rng.choice(CONSONANTS) if rng.random() < 0.5 else ""), taken)
    suffixes = _distinct(rng, n_suffixes, lambda: rng.choice(VOWELS) + rng.choice(CONSONANTS)
                         + (rng.choice(VOWELS) if rng.random() < 0.3 else ""), taken)
    links = _distinct(rng, n_links, lambda: rng.choice(VOWELS + "s"), taken)

    simple = [_analyse(r, "", "", s) for r in roots for s in [""] + suffixes]
    compounds = [_analyse(a, l, b, s) for a in roots for l in links for b in roots if a != b
                 for s in [""] + suffixes]
    rng.shuffle(simple)
    rng.shuffle(compounds)
    # fixed-size type inventory mixing simple words and compounds
    n_types = 2000
    n_comp = int(n_types * compound_share)
    types = simple + compounds[: n_comp]
    rng.shuffle(types)
    by_word = {}
    for t in types:
        by_word.setdefault(t.word, t)  # rare surface collisions keep the first analysis
    types = list(by_word.values())
    weights = [1.0 / (rank + 1) ** zipf_s for rank in range(len(types))]
    sampled = rng.choices(range(len(types)), weights=weights, k=n_tokens)
    tokens = [types[i].word for i in sampled]

    seen = sorted(set(sampled))
    if len(seen) < n_annotations + n_holdout:
        raise ValidationError("corpus too small for the requested annotation and holdout sets")
    rng.shuffle(seen)
    annotations = [types[i] for i in seen[:n_annotations]]
    holdout = [types[i] for i in seen[n_annotations:n_annotations + n_holdout]]
    return ToyLanguage(roots, suffixes, links, tokens, annotations, holdout)


def write_toy_language(lang: ToyLanguage, directory) -> dict[str, str]:
    """Write ``corpus.txt``, ``annotations.tsv`` and ``holdout.tsv``."""
    os.makedirs(directory, exist_ok=True)
    paths = {
        "corpus": os.path.join(directory, "corpus.txt"),
        "annotations": os.path.join(directory, "annotations.tsv"),
        "holdout": os.path.join(directory, "holdout.tsv"),
    }
    with open(paths["corpus"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(lang.corpus_text())
    with open(paths["annotations"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_annotations(lang.annotations))
    with open(paths["holdout"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_annotations(lang.holdout))
    return paths
