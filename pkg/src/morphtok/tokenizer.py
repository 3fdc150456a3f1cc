"""Cascade tokenizer: morphtable, then morph model, then a fallback.

Two variants share the first two stages.  ``mixed`` falls back to BPE on
the whole chunk; ``morph`` falls back to single code points (with byte
symbols for anything outside the vocabulary).  Either way the token
surfaces join back to the input exactly, so decoding is lossless.
"""
from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .bpe import (BYTE_SYMBOLS, MARKER, SPECIAL_TOKENS, BpeModel, byte_symbols, char_symbols,
                  decode_symbols, encode_bpe, load_merges, train_bpe)
from .corpus import Chunk, FrequencyTable, chunk_text, escape_field, unescape_field
from .exceptions import InvariantError, ModelFormatError, ValidationError
from .morfessor import MorfessorModel, load_model, save_model, viterbi_segment
from .morphtable import (MorphTable, _is_clean, build_morphtable, load_morphtable, morph_segments,
                         save_morphtable, seed_inventory)

VARIANTS = ("morph", "mixed")
DEFAULT_MORPH_RATIO = 0.6
BUNDLE_VERSION = 1
_CACHE_LIMIT = 200_000


@dataclass
class TokenSequence:
    ids: list[int]
    surfaces: list[str]

    def __len__(self):
        return len(self.ids)


@dataclass
class TokenizerBundle:
    variant: str
    table: MorphTable
    model: MorfessorModel
    bpe: BpeModel | None
    vocab: list[str]
    morph_budget: int
    bpe_budget: int
    morph_ratio: float = 1.0
    specials: tuple[str, ...] = SPECIAL_TOKENS
    stats: Counter = field(default_factory=Counter, repr=False, compare=False)
    _ids: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _viterbi: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _chunk_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if (self.bpe is None) != (self.variant == "morph"):
            raise ValidationError("a BPE model is required for the mixed variant only")
        self._ids = {s: i for i, s in enumerate(self.vocab)}
        if len(self._ids) != len(self.vocab):
            raise InvariantError("vocabulary has duplicate surfaces")
        if tuple(self.vocab[: len(self.specials)]) != tuple(self.specials):
            raise InvariantError("special tokens must take the first ids")
        missing = [s for s in self.table.inventory if s not in self._ids]
        if self.bpe is not None:
            missing += [s for s in self.bpe.symbols() if s not in self._ids]
        else:
            missing += [s for s in BYTE_SYMBOLS if s not in self._ids]
        if missing:
            raise InvariantError(f"{len(missing)} symbols have no id, e.g. {missing[0]!r}")

    def __len__(self):
        return len(self.vocab)

    def token_id(self, surface: str) -> int | None:
        return self._ids.get(surface)

    def surface(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.vocab):
            raise ValidationError(f"token id {token_id} out of range [0, {len(self.vocab)})")
        return self.vocab[token_id]

    def _segment_word(self, word):
        segs = self._viterbi.get(word)
        if segs is None:
            segs = viterbi_segment(self.model, word).segments
            if len(self._viterbi) < _CACHE_LIMIT:
                self._viterbi[word] = segs
        return segs


def split_budget(total_vocab: int, morph_ratio: float, n_specials: int = len(SPECIAL_TOKENS)):
    """Return ``(morph_budget, bpe_budget)``; the morph share rounds half-up."""
    if not 0 < morph_ratio <= 1:
        raise ValidationError("morph_ratio must be in (0, 1]")
    usable = total_vocab - n_specials
    if usable <= 0:
        raise ValidationError(f"total vocab {total_vocab} leaves no room after the specials")
    share = Decimal(repr(morph_ratio)) * usable
    morph = int(share.quantize(Decimal(1), rounding=ROUND_HALF_UP))
    return morph, usable - morph


def build_bundle(variant: str, counts: FrequencyTable, model: MorfessorModel, total_vocab: int,
                 morph_ratio: float = DEFAULT_MORPH_RATIO) -> TokenizerBundle:
    variant = variant.lower()
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    if variant == "morph":
        morph_ratio = 1.0
    morph_budget, bpe_budget = split_budget(total_vocab, morph_ratio)
    seed = seed_inventory(counts)
    if variant == "morph":
        # byte symbols live inside the morph budget
        target = morph_budget - len(BYTE_SYMBOLS)
    else:
        target = morph_budget
    if target < len(seed):
        raise ValidationError(
            f"infeasible budget: morph share {morph_budget} cannot hold the seed inventory "
            f"({len(seed)} symbols{' plus 256 byte symbols' if variant == 'morph' else ''})")
    if variant == "mixed" and bpe_budget < len(BYTE_SYMBOLS):
        raise ValidationError(
            f"infeasible budget: BPE share {bpe_budget} cannot hold the 256 byte symbols")
    table = build_morphtable(counts, model, target)
    vocab = list(SPECIAL_TOKENS) + list(table.inventory)
    bpe = None
    if variant == "mixed":
        bpe = train_bpe(counts, bpe_budget, shared=table.inventory)
        present = set(vocab)
        extra = [s for s in bpe.symbols() if s not in present]
        if len(extra) > bpe_budget:
            raise InvariantError("BPE allocated more symbols than its budget")
        vocab += extra
    else:
        present = set(vocab)
        vocab += [s for s in BYTE_SYMBOLS if s not in present]
    return TokenizerBundle(variant, table, model, bpe, vocab, morph_budget, bpe_budget, morph_ratio)


def _char_fallback(bundle: TokenizerBundle, text: str) -> list[str]:
    out = []
    for sym in char_symbols(text):
        if sym in bundle._ids:
            out.append(sym)
        else:
            out.extend(byte_symbols(sym))
    return out


def _decompose(bundle: TokenizerBundle, segments) -> list[str]:
    out = []
    ids = bundle._ids
    for seg in segments:
        if seg in ids:
            out.append(seg)
            continue
        if seg.startswith(MARKER) and len(seg) > 1:
            out.append(MARKER)
            seg = seg[1:]
            if seg in ids:
                out.append(seg)
                continue
        for ch in seg:
            if ch in ids:
                out.append(ch)
            else:
                out.extend(byte_symbols(ch))
    return out


def segment_chunk(bundle: TokenizerBundle, chunk: Chunk) -> list[str]:
    """Run the cascade on one chunk; the result always joins back to ``chunk.raw``."""
    segs = bundle.table.entries.get(chunk.raw)
    if segs is not None:
        bundle.stats["table"] += 1
        return list(segs)
    clean = _is_clean(chunk.raw)
    if clean:
        bundle.stats["model"] += 1
        segs = morph_segments(chunk, bundle._segment_word)
        if all(s in bundle._ids for s in segs):
            bundle.stats["model_accepted"] += 1
            return segs
    if bundle.variant == "mixed":
        bundle.stats["bpe"] += 1
        return encode_bpe(bundle.bpe, chunk)
    bundle.stats["chars"] += 1
    if not clean:
        return _char_fallback(bundle, chunk.raw)
    return _decompose(bundle, segs)


def _chunk_ids(bundle: TokenizerBundle, chunk: Chunk) -> tuple[tuple[int, ...], tuple[str, ...]]:
    raw = chunk.raw
    hit = bundle._chunk_cache.get(raw)
    if hit is None:
        surfaces = tuple(segment_chunk(bundle, chunk))
        hit = (tuple(bundle._ids[s] for s in surfaces), surfaces)
        if len(bundle._chunk_cache) < _CACHE_LIMIT:
            bundle._chunk_cache[raw] = hit
    return hit


def encode(bundle: TokenizerBundle, document: str, add_special: bool = False) -> TokenSequence:
    ids: list[int] = []
    surfaces: list[str] = []
    if add_special:
        ids.append(1)
        surfaces.append(bundle.vocab[1])
    for chunk in chunk_text(document):
        i, s = _chunk_ids(bundle, chunk)
        ids.extend(i)
        surfaces.extend(s)
    if add_special:
        ids.append(2)
        surfaces.append(bundle.vocab[2])
    return TokenSequence(ids, surfaces)


def decode(bundle: TokenizerBundle, ids) -> str:
    """Invert :func:`encode`; special tokens carry no text and are dropped."""
    n_special = len(bundle.specials)
    surfaces = []
    for i in ids:
        s = bundle.surface(i)
        if i >= n_special:
            surfaces.append(s)
    return decode_symbols(surfaces)


# --- bundle directory -------------------------------------------------------

def _sources(bundle: TokenizerBundle) -> dict[str, list[str]]:
    tags: dict[str, list[str]] = {}
    for s in bundle.specials:
        tags.setdefault(s, []).append("special")
    for s in bundle.table.inventory:
        tags.setdefault(s, []).append("morph")
    if bundle.bpe is not None:
        for s in bundle.bpe.base_symbols:
            tags.setdefault(s, []).append("bpe-base")
        base = set(bundle.bpe.base_symbols)
        for s in bundle.bpe.symbols():
            if s not in base:
                tags.setdefault(s, []).append("bpe")
    else:
        for s in BYTE_SYMBOLS:
            tags.setdefault(s, []).append("byte")
    return tags


def save_bundle(bundle: TokenizerBundle, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    tags = _sources(bundle)
    with open(os.path.join(directory, "vocab.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        for i, s in enumerate(bundle.vocab):
            fh.write(f"{i}\t{escape_field(s)}\t{','.join(tags.get(s, ()))}\n")
    with open(os.path.join(directory, "morphtable.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        save_morphtable(bundle.table, fh)
    with open(os.path.join(directory, "morfessor.model"), "w", encoding="utf-8", newline="\n") as fh:
        save_model(bundle.model, fh)
    merges_path = os.path.join(directory, "bpe.merges")
    if bundle.bpe is not None:
        with open(merges_path, "w", encoding="utf-8", newline="\n") as fh:
            bundle.bpe.save_merges(fh)
    elif os.path.exists(merges_path):
        os.remove(merges_path)
    config = {
        "version": BUNDLE_VERSION,
        "variant": bundle.variant,
        "morph_ratio": repr(bundle.morph_ratio),
        "morph_budget": bundle.morph_budget,
        "bpe_budget": bundle.bpe_budget,
        "vocab_size": len(bundle.vocab),
        "marker": MARKER,
        "specials": ",".join(bundle.specials),
    }
    with open(os.path.join(directory, "config"), "w", encoding="utf-8", newline="\n") as fh:
        for k, v in config.items():
            fh.write(f"{k}={v}\n")


def load_bundle(directory) -> TokenizerBundle:
    def path(name):
        return os.path.join(directory, name)

    config = {}
    with open(path("config"), encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                k, sep, v = line.partition("=")
                if not sep:
                    raise ModelFormatError(f"bad config line {line!r}")
                config[k.strip()] = v.strip()
    if config.get("version") != str(BUNDLE_VERSION):
        raise ModelFormatError(f"unsupported bundle version {config.get('version')}")
    if config.get("marker") != MARKER:
        raise ModelFormatError("bundle uses a different whitespace marker")
    if tuple(config.get("specials", "").split(",")) != SPECIAL_TOKENS:
        raise ModelFormatError("bundle declares different special tokens")
    vocab = []
    bpe_chars = []
    with open(path("vocab.tsv"), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3 or parts[0] != str(len(vocab)):
                raise ModelFormatError(f"vocab.tsv line {lineno}: expected id<TAB>surface<TAB>sources")
            surface = unescape_field(parts[1])
            vocab.append(surface)
            if "bpe-base" in parts[2].split(",") and len(surface) == 1 and surface != MARKER:
                bpe_chars.append(surface)
    if str(len(vocab)) != config.get("vocab_size"):
        raise ModelFormatError("vocab.tsv size does not match config")
    with open(path("morphtable.tsv"), encoding="utf-8") as fh:
        table = load_morphtable(fh)
    with open(path("morfessor.model"), encoding="utf-8") as fh:
        model = load_model(fh)
    bpe = None
    if config["variant"] == "mixed":
        base = list(BYTE_SYMBOLS) + [MARKER] + sorted(bpe_chars)
        with open(path("bpe.merges"), encoding="utf-8") as fh:
            bpe = load_merges(fh, base)
    return TokenizerBundle(config["variant"], table, model, bpe, vocab, int(config["morph_budget"]),
                           int(config["bpe_budget"]), float(config["morph_ratio"]))
