"""Text ingestion: chunking, frequency counting and annotated-word parsing.

A *chunk* is the unit every other module works on: an optional run of
leading whitespace, a body with no whitespace in it, and (only for the
last chunk of a document) a run of trailing whitespace.  Punctuation and
symbols stay glued to the body, so ``"Hej med dig!"`` chunks as
``"Hej"``, ``" med"``, ``" dig!"``.
"""
from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .exceptions import AnnotationError, ValidationError

_CHUNK_RE = re.compile(r"\s*\S+")
_PIECE_RE = re.compile(r"[^\W_]+|.", re.S)
_ALNUM_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Chunk:
    leading: str
    body: str
    trailing: str = ""

    @property
    def raw(self) -> str:
        return self.leading + self.body + self.trailing

    @property
    def has_leading_space(self) -> bool:
        return bool(self.leading)


def chunk_text(document: str) -> list[Chunk]:
    """Partition ``document`` into chunks; ``"".join(c.raw ...)`` is lossless.

    Whitespace after the last word is kept as that chunk's ``trailing``.  A
    document made only of whitespace becomes a single chunk with an empty
    body, the one case where ``body`` may be empty.
    """
    chunks = []
    end = 0
    for m in _CHUNK_RE.finditer(document):
        text = m.group()
        body = text.lstrip()
        chunks.append(Chunk(text[: len(text) - len(body)], body))
        end = m.end()
    rest = document[end:]
    if rest:
        if chunks:
            last = chunks[-1]
            chunks[-1] = Chunk(last.leading, last.body, rest)
        else:
            chunks.append(Chunk(rest, ""))
    return chunks


def iter_chunks(lines: Iterable[str]) -> Iterator[Chunk]:
    for line in lines:
        yield from chunk_text(line)


def split_body(body: str) -> list[str]:
    """Split a chunk body into alphanumeric runs and single special characters."""
    return _PIECE_RE.findall(body)


def is_special(ch: str) -> bool:
    return not ch.isalnum() and not ch.isspace()


class FrequencyTable:
    """Exact chunk counts with a deterministic (count desc, text asc) order."""

    def __init__(self, entries=None):
        self._counts: Counter[str] = Counter()
        if entries:
            for key, count in dict(entries).items():
                if count < 0:
                    raise ValidationError(f"negative count for {key!r}")
                if count:
                    self._counts[key] += count

    @property
    def entries(self) -> dict[str, int]:
        return dict(self._counts)

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def __len__(self):
        return len(self._counts)

    def __contains__(self, key):
        return key in self._counts

    def __getitem__(self, key):
        return self._counts.get(key, 0)

    def __eq__(self, other):
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return self._counts == other._counts

    def __repr__(self):
        return f"FrequencyTable({len(self)} entries, total={self.total})"

    def add(self, key: str, count: int = 1) -> None:
        self._counts[key] += count

    def update(self, other: FrequencyTable) -> None:
        self._counts.update(other._counts)

    def items(self) -> list[tuple[str, int]]:
        """All entries in the deterministic order."""
        return sorted(self._counts.items(), key=_order_key)

    def __iter__(self):
        return iter(self.items())


def _order_key(item):
    return (-item[1], item[0])


def count_frequencies(chunks: Iterable[Chunk | str]) -> FrequencyTable:
    table = FrequencyTable()
    counts = table._counts
    for chunk in chunks:
        counts[chunk if isinstance(chunk, str) else chunk.raw] += 1
    return table


def top_k(table: FrequencyTable, k: int) -> list[tuple[str, int]]:
    if k < 0:
        raise ValidationError("k must be non-negative")
    return table.items()[:k]


def word_counts(table: FrequencyTable) -> Counter[str]:
    """Alphanumeric runs of every chunk body, weighted by chunk count.

    These are the words the segmentation model is trained on; special
    characters never reach it.
    """
    words: Counter[str] = Counter()
    for raw, count in table._counts.items():
        for run in _ALNUM_RE.findall(raw):
            words[run] += count
    return words


# --- TSV escaping shared by every on-disk format ---------------------------

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPE_RE = re.compile(r"\\(.)", re.S)
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r", "s": " "}


def escape_field(text: str, space: bool = False) -> str:
    out = "".join(_ESCAPES.get(ch, ch) for ch in text)
    if space:
        out = out.replace(" ", "\\s")
    return out


def unescape_field(text: str) -> str:
    def repl(m):
        try:
            return _UNESCAPES[m.group(1)]
        except KeyError:
            raise ValueError(f"bad escape sequence \\{m.group(1)}") from None

    return _UNESCAPE_RE.sub(repl, text)


def write_frequency_list(table: FrequencyTable, fh) -> None:
    for raw, count in table.items():
        fh.write(f"{count}\t{escape_field(raw)}\n")


def read_frequency_list(fh) -> FrequencyTable:
    table = FrequencyTable()
    for lineno, line in enumerate(fh, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        count, sep, raw = line.partition("\t")
        if not sep:
            raise ValidationError(f"line {lineno}: expected count<TAB>chunk")
        try:
            table.add(unescape_field(raw), int(count))
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return table


# --- annotated morphemes -----------------------------------------------------

class MorphCategory(enum.Enum):
    ROOT = "Root"
    COMPOUND = "Compound"
    LINKING = "Linking"
    PREFIX = "Prefix"
    SUFFIX = "Suffix"
    INFLECTION = "Inflection"

    @classmethod
    def parse(cls, name: str) -> MorphCategory:
        name = name.strip()
        name = _CATEGORY_SYNONYMS.get(name, name)
        try:
            return cls(name)
        except ValueError:
            raise ValidationError(f"unknown category {name!r}") from None

    def __str__(self):
        return self.value


_CATEGORY_SYNONYMS = {"Root Morpheme": "Root", "Linking Morpheme": "Linking"}

SEGMENT_TAGS = ("Root", "Link", "Pref", "Suff", "Infl")


@dataclass(frozen=True)
class AnnotatedWord:
    word: str
    segments: tuple[tuple[str, str], ...]
    category: MorphCategory

    def __post_init__(self):
        if not self.segments:
            raise ValidationError(f"{self.word!r}: no segments")
        for surface, tag in self.segments:
            if tag not in SEGMENT_TAGS:
                raise ValidationError(f"{self.word!r}: unknown tag {tag!r}")
            if not surface or any(ch.isspace() for ch in surface):
                raise ValidationError(f"{self.word!r}: bad segment {surface!r}")
        if "".join(self.surfaces).casefold() != self.word.casefold():
            raise ValidationError(
                f"concatenation mismatch: {'+'.join(self.surfaces)!r} != {self.word!r}")

    @property
    def surfaces(self) -> list[str]:
        return [s for s, _ in self.segments]


_SEGMENT_RE = re.compile(r"\s*([^\s\[\]]+)\s*\[([^\]]*)\]")


def _parse_segments(field: str) -> tuple[tuple[str, str], ...]:
    segments = []
    pos = 0
    field = field.rstrip()
    while pos < len(field):
        m = _SEGMENT_RE.match(field, pos)
        if not m:
            raise ValueError(f"malformed segment list near {field[pos:]!r}")
        segments.append((m.group(1), m.group(2).strip()))
        pos = m.end()
    return tuple(segments)


def parse_annotations(source: str | Iterable[str]) -> list[AnnotatedWord]:
    """Parse ``word<TAB>category<TAB>seg[Tag] seg[Tag] ...`` records.

    Blank lines and ``#`` comments are skipped.  Any bad line aborts the
    whole parse with an :class:`AnnotationError` carrying its line number.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    words = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise AnnotationError(lineno, f"expected 3 TAB-separated fields, got {len(fields)}")
        word, category, segs = fields
        try:
            words.append(AnnotatedWord(word.strip(), _parse_segments(segs),
                                       MorphCategory.parse(category)))
        except ValueError as exc:
            raise AnnotationError(lineno, str(exc)) from None
    return words


def serialize_annotations(words: Iterable[AnnotatedWord]) -> str:
    lines = []
    for w in words:
        segs = " ".join(f"{s}[{t}]" for s, t in w.segments)
        lines.append(f"{w.word}\t{w.category.value}\t{segs}\n")
    return "".join(lines)
