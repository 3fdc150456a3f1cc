"""Pre-segmented table of frequent chunks.

Chunks are walked in frequency order and segmented with the morph model
until adding the next chunk's new segments would push the segment
inventory past its target size.  A leading space is carried by the
whitespace marker on the first segment, so ``" venlig"`` and ``"venlig"``
are distinct keys.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .bpe import MARKER, RESERVED_CHARS
from .corpus import Chunk, FrequencyTable, chunk_text, escape_field, split_body, unescape_field
from .exceptions import ModelFormatError, ValidationError
from .morfessor import MorfessorModel, viterbi_segment

FORMAT_VERSION = 1


def whitespace_tokens(ws: str) -> list[str]:
    return [MARKER if ch == " " else ch for ch in ws]


def morph_segments(chunk: Chunk, segment_word) -> list[str]:
    """Segment a chunk: whitespace tokens, specials one per character,
    alphanumeric runs through ``segment_word``; a single leading space is
    folded into the first body segment as the marker."""
    lead = chunk.leading
    out: list[str] = []
    marker = ""
    if chunk.body and lead.endswith(" "):
        out.extend(whitespace_tokens(lead[:-1]))
        marker = MARKER
    else:
        out.extend(whitespace_tokens(lead))
    first = True
    for piece in split_body(chunk.body):
        segs = segment_word(piece) if piece[0].isalnum() else (piece,)
        for seg in segs:
            if first:
                out.append(marker + seg)
                first = False
            else:
                out.append(seg)
    out.extend(whitespace_tokens(chunk.trailing))
    return out


def join_segments(segments) -> str:
    return "".join(segments).replace(MARKER, " ")


def _is_clean(raw: str) -> bool:
    return not any(ch in RESERVED_CHARS for ch in raw)


@dataclass
class MorphTable:
    entries: dict[str, tuple[str, ...]] = field(default_factory=dict)
    inventory: dict[str, None] = field(default_factory=dict)
    seed_size: int = 0

    @property
    def segment_inventory(self) -> list[str]:
        return list(self.inventory)

    def __len__(self):
        return len(self.entries)


def seed_inventory(counts: FrequencyTable) -> list[str]:
    """The marker plus every code point of the corpus except space."""
    chars = set()
    for raw, _ in counts.items():
        chars.update(raw)
    chars.discard(" ")
    chars -= RESERVED_CHARS
    return [MARKER] + sorted(chars)


def build_morphtable(counts: FrequencyTable, model: MorfessorModel, target_inventory_size: int) -> MorphTable:
    if not len(counts):
        raise ValidationError("cannot build a morphtable from empty counts")
    seed = seed_inventory(counts)
    if target_inventory_size < len(seed):
        raise ValidationError(
            f"target inventory {target_inventory_size} is below the seed size {len(seed)}")
    inventory = dict.fromkeys(seed)
    entries: dict[str, tuple[str, ...]] = {}
    cache: dict[str, tuple[str, ...]] = {}

    def segment_word(word):
        segs = cache.get(word)
        if segs is None:
            segs = cache[word] = viterbi_segment(model, word).segments
        return segs

    for raw, _ in counts.items():
        if not _is_clean(raw):
            continue
        chunks = chunk_text(raw)
        if len(chunks) != 1:
            continue
        segs = tuple(morph_segments(chunks[0], segment_word))
        new = [s for s in dict.fromkeys(segs) if s not in inventory]
        if len(inventory) + len(new) > target_inventory_size:
            break
        inventory.update(dict.fromkeys(new))
        entries[raw] = segs
    return MorphTable(entries, inventory, len(seed))


def lookup(table: MorphTable, chunk: Chunk) -> tuple[str, ...] | None:
    return table.entries.get(chunk.raw)


def _join(segs) -> str:
    return " ".join(escape_field(s, space=True) for s in segs)


def _split(field_text: str) -> tuple[str, ...]:
    return tuple(unescape_field(s) for s in field_text.split(" ")) if field_text else ()


def save_morphtable(table: MorphTable, fh) -> None:
    inv = list(table.inventory)
    fh.write(f"#morphtable\tversion={FORMAT_VERSION}\tmarker={MARKER}\tinventory={len(inv)}\t"
             f"seed={table.seed_size}\n")
    fh.write(f"#inventory\t{_join(inv)}\n")
    for raw, segs in table.entries.items():
        fh.write(f"{escape_field(raw)}\t{_join(segs)}\n")


def load_morphtable(fh) -> MorphTable:
    header = fh.readline().rstrip("\n").split("\t")
    if not header or header[0] != "#morphtable":
        raise ModelFormatError("not a morphtable file")
    meta = dict(item.split("=", 1) for item in header[1:])
    if meta.get("version") != str(FORMAT_VERSION):
        raise ModelFormatError(f"unsupported morphtable version {meta.get('version')}")
    if meta.get("marker") != MARKER:
        raise ModelFormatError("morphtable uses a different whitespace marker")
    inv_line = fh.readline().rstrip("\n").split("\t", 1)
    if inv_line[0] != "#inventory" or len(inv_line) != 2:
        raise ModelFormatError("missing inventory line")
    inventory = dict.fromkeys(_split(inv_line[1]))
    if len(inventory) != int(meta["inventory"]):
        raise ModelFormatError("inventory size does not match header")
    entries = {}
    for lineno, line in enumerate(fh, 3):
        line = line.rstrip("\n")
        if not line:
            continue
        raw, sep, segs = line.partition("\t")
        if not sep:
            raise ModelFormatError(f"morphtable line {lineno}: missing TAB")
        key = unescape_field(raw)
        segs = _split(segs)
        if join_segments(segs) != key or not all(s in inventory for s in segs):
            raise ModelFormatError(f"morphtable line {lineno}: entry does not reconstruct its chunk")
        entries[key] = segs
    return MorphTable(entries, inventory, int(meta.get("seed", 0)))
