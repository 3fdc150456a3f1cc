"""Character-level byte-pair encoding with byte fallback.

Symbols are plain strings.  Training starts from the code points of each
chunk (a single leading space becomes the whitespace marker ``▁``) and
never merges across chunks.  Code points missing from the base inventory
are encoded as ``<0xNN>`` byte symbols, which keeps encoding total and
lossless.
"""
from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from typing import Iterable

from .corpus import Chunk, FrequencyTable, chunk_text, escape_field, unescape_field
from .exceptions import ModelFormatError, ValidationError

MARKER = "▁"
BYTE_SYMBOLS = tuple(f"<0x{b:02X}>" for b in range(256))
_BYTE_INDEX = {s: i for i, s in enumerate(BYTE_SYMBOLS)}
SPECIAL_TOKENS = ("<unk>", "<s>", "</s>", "<pad>")
RESERVED_CHARS = frozenset(MARKER)
# surfaces BPE must never build out of ordinary text
_FORBIDDEN_RE = re.compile(r"<0x[0-9A-F]{2}>|<unk>|<s>|</s>|<pad>")


def is_byte_symbol(symbol: str) -> bool:
    return symbol in _BYTE_INDEX


def byte_symbols(ch: str) -> list[str]:
    return [BYTE_SYMBOLS[b] for b in ch.encode("utf-8")]


def char_symbols(text: str) -> list[str]:
    """One symbol per code point: spaces become the marker, reserved
    characters go straight to their byte symbols."""
    out: list[str] = []
    for ch in text:
        if ch == " ":
            out.append(MARKER)
        elif ch in RESERVED_CHARS:
            out.extend(byte_symbols(ch))
        else:
            out.append(ch)
    return out


def chunk_symbols(chunk: Chunk) -> list[str]:
    """Initial symbol sequence of a chunk, before any merges."""
    return char_symbols(chunk.raw)


def decode_symbols(symbols: Iterable[str]) -> str:
    """Inverse of encoding: markers become spaces, byte runs are re-joined."""
    out: list[str] = []
    pending = bytearray()
    for sym in symbols:
        b = _BYTE_INDEX.get(sym)
        if b is not None:
            pending.append(b)
            continue
        if pending:
            out.append(pending.decode("utf-8", errors="replace"))
            pending.clear()
        out.append(sym.replace(MARKER, " "))
    if pending:
        out.append(pending.decode("utf-8", errors="replace"))
    return "".join(out)


@dataclass
class BpeModel:
    base_symbols: list[str]
    merges: list[tuple[str, str]]
    _ranks: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _base: frozenset = field(default=frozenset(), init=False, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._ranks = {pair: i for i, pair in enumerate(self.merges)}
        self._base = frozenset(self.base_symbols)
        known = set(self.base_symbols)
        for left, right in self.merges:
            if left not in known or right not in known:
                raise ValidationError(f"merge ({left!r}, {right!r}) uses an unknown symbol")
            known.add(left + right)

    @property
    def vocab_size(self) -> int:
        return len(self.base_symbols) + len(self.merges)

    def symbols(self) -> list[str]:
        """Every distinct symbol surface, base inventory first, then merge results."""
        seen = dict.fromkeys(self.base_symbols)
        for left, right in self.merges:
            seen.setdefault(left + right)
        return list(seen)

    def save_merges(self, fh) -> None:
        for left, right in self.merges:
            fh.write(f"{escape_field(left, space=True)} {escape_field(right, space=True)}\n")


def load_merges(fh, base_symbols: list[str]) -> BpeModel:
    merges = []
    for lineno, line in enumerate(fh, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split(" ")
        if len(parts) != 2:
            raise ModelFormatError(f"merges line {lineno}: expected 'left right'")
        merges.append((unescape_field(parts[0]), unescape_field(parts[1])))
    return BpeModel(list(base_symbols), merges)


def _base_inventory(chunks: Iterable[list[str]]) -> list[str]:
    seen = set()
    for syms in chunks:
        seen.update(syms)
    chars = sorted(ch for ch in seen if len(ch) == 1 and ch not in RESERVED_CHARS)
    return list(BYTE_SYMBOLS) + [MARKER] + chars


class BpeTrainer:
    """Incremental BPE trainer.

    ``pair_counts`` is kept up to date after every :meth:`step`, so it can
    be checked against a from-scratch recount at any point.
    """

    def __init__(self, counts: FrequencyTable, shared: Iterable[str] = ()):
        items = counts.items()
        if not items:
            raise ValidationError("cannot train BPE on an empty corpus")
        self.words = [chunk_symbols(_as_chunk(raw)) for raw, _ in items]
        self.freqs = [c for _, c in items]
        self.base = _base_inventory(self.words)
        self.merges: list[tuple[str, str]] = []
        self.shared = frozenset(shared)
        self._surfaces = set(self.base)
        self.pair_counts: dict[tuple[str, str], int] = {}
        self._where: dict[tuple[str, str], set[int]] = {}
        for idx, syms in enumerate(self.words):
            self._add_word(idx, syms)
        self._heap = [(-c, p) for p, c in self.pair_counts.items()]
        heapq.heapify(self._heap)

    @property
    def symbol_count(self) -> int:
        """Distinct symbol surfaces not already allocated elsewhere."""
        return len(self._surfaces - self.shared)

    def _add_word(self, idx, syms):
        f = self.freqs[idx]
        for pair in zip(syms, syms[1:]):
            self.pair_counts[pair] = self.pair_counts.get(pair, 0) + f
            self._where.setdefault(pair, set()).add(idx)

    def _remove_word(self, idx, syms):
        f = self.freqs[idx]
        for pair in zip(syms, syms[1:]):
            c = self.pair_counts[pair] - f
            if c:
                self.pair_counts[pair] = c
                self._where[pair].discard(idx)
            else:
                del self.pair_counts[pair]
                self._where.pop(pair, None)

    def _first_occurrence(self, pair):
        idx = min(self._where[pair])
        syms = self.words[idx]
        for pos in range(len(syms) - 1):
            if syms[pos] == pair[0] and syms[pos + 1] == pair[1]:
                return idx, pos
        raise AssertionError("pair index out of sync")

    def best_pair(self):
        """Most frequent pair; ties go to the earliest first occurrence."""
        heap = self._heap
        while heap:
            neg, pair = heap[0]
            if self.pair_counts.get(pair) != -neg or not _mergeable(pair):
                heapq.heappop(heap)
                continue
            tied = []
            while heap and heap[0][0] == neg:
                n2, p2 = heapq.heappop(heap)
                if self.pair_counts.get(p2) == -n2 and _mergeable(p2):
                    tied.append(p2)
            tied = sorted(set(tied), key=self._first_occurrence)
            for p in tied[1:]:
                heapq.heappush(heap, (neg, p))
            return tied[0], -neg
        return None, 0

    def step(self) -> tuple[str, str] | None:
        pair, count = self.best_pair()
        if pair is None:
            return None
        left, right = pair
        merged = left + right
        changed = set()
        for idx in sorted(self._where.get(pair, ())):
            syms = self.words[idx]
            changed.update(zip(syms, syms[1:]))
            self._remove_word(idx, syms)
            out = []
            i = 0
            n = len(syms)
            while i < n:
                if i < n - 1 and syms[i] == left and syms[i + 1] == right:
                    out.append(merged)
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            self.words[idx] = out
            self._add_word(idx, out)
            changed.update(zip(out, out[1:]))
        for p in changed:
            c = self.pair_counts.get(p)
            if c:
                heapq.heappush(self._heap, (-c, p))
        self.merges.append(pair)
        self._surfaces.add(merged)
        return pair

    def total_symbols(self) -> int:
        return sum(len(w) * f for w, f in zip(self.words, self.freqs))

    def model(self) -> BpeModel:
        return BpeModel(list(self.base), list(self.merges))


def _mergeable(pair) -> bool:
    left, right = pair
    if left in _BYTE_INDEX or right in _BYTE_INDEX:
        return False
    return not _FORBIDDEN_RE.fullmatch(left + right)


def recount_pairs(words: list[list[str]], freqs: list[int]) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    for syms, f in zip(words, freqs):
        for pair in zip(syms, syms[1:]):
            counts[pair] = counts.get(pair, 0) + f
    return counts


def _as_chunk(raw: str) -> Chunk:
    chunks = chunk_text(raw)
    if len(chunks) == 1:
        return chunks[0]
    # a frequency-list key that is not a single chunk: treat it as one body
    return Chunk("", raw)


def train_bpe(counts: FrequencyTable, vocab_size: int, shared: Iterable[str] = ()) -> BpeModel:
    """Learn merges until ``vocab_size`` distinct symbols exist.

    Symbols whose surface is in ``shared`` (already allocated by another
    vocabulary) do not count toward ``vocab_size``.  Training stops early
    when no adjacent pair is left.
    """
    trainer = BpeTrainer(counts, shared)
    if vocab_size < trainer.symbol_count:
        raise ValidationError(
            f"vocab_size {vocab_size} is smaller than the base inventory ({trainer.symbol_count})")
    while trainer.symbol_count < vocab_size:
        if trainer.step() is None:
            break
    return trainer.model()


def encode_symbols(model: BpeModel, symbols: list[str]) -> list[str]:
    """Apply merges in rank order to an initial symbol list."""
    base = model._base
    syms: list[str] = []
    for s in symbols:
        if s in base:
            syms.append(s)
        else:
            syms.extend(byte_symbols(s))
    ranks = model._ranks
    while len(syms) > 1:
        best = None
        best_rank = None
        for i in range(len(syms) - 1):
            r = ranks.get((syms[i], syms[i + 1]))
            if r is not None and (best_rank is None or r < best_rank):
                best, best_rank = i, r
        if best is None:
            break
        left, right = syms[best], syms[best + 1]
        merged = left + right
        out = []
        i = 0
        while i < len(syms):
            if i < len(syms) - 1 and syms[i] == left and syms[i + 1] == right:
                out.append(merged)
                i += 2
            else:
                out.append(syms[i])
                i += 1
        syms = out
    return syms


def encode_bpe(model: BpeModel, chunk: Chunk) -> list[str]:
    raw = chunk.raw
    cached = model._cache.get(raw)
    if cached is None:
        cached = encode_symbols(model, chunk_symbols(chunk))
        if len(model._cache) < 200_000:
            model._cache[raw] = cached
    return list(cached)

