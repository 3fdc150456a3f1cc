import io

import pytest
from hypothesis import given, strategies as st

from morphtok.bpe import MARKER
from morphtok.corpus import Chunk, FrequencyTable, chunk_text, count_frequencies
from morphtok.exceptions import ModelFormatError, ValidationError
from morphtok.morfessor import MorfessorModel, uniform_letter_costs
from morphtok.morphtable import (build_morphtable, join_segments, load_morphtable, lookup,
                                 save_morphtable, seed_inventory)

ALPHABET = "abcdefghijklmnopqrstuvwxyzæøåABCDEFGHIJKLMNOPQRSTUVWXYZÆØÅ"


def model_with(lexicon):
    letters, end = uniform_letter_costs(ALPHABET)
    return MorfessorModel(lexicon=lexicon, letter_costs=letters, end_cost=end)


def test_most_frequent_chunk_is_segmented_first():
    counts = FrequencyTable({"skoletaske": 9, " hus": 1})
    table = build_morphtable(counts, model_with({"skole": 5, "taske": 5}), 100)
    first = next(iter(table.entries))
    assert first == "skoletaske"
    assert table.entries[first] == ("skole", "taske")


def test_target_equal_to_seed_gives_empty_table():
    counts = FrequencyTable({"skoletaske": 9})
    seed = seed_inventory(counts)
    table = build_morphtable(counts, model_with({"skole": 5, "taske": 5}), len(seed))
    assert table.entries == {}
    assert table.segment_inventory == seed


def test_target_below_seed_is_rejected():
    with pytest.raises(ValidationError):
        build_morphtable(FrequencyTable({"abc": 1}), model_with({"abc": 1}), 2)


def test_empty_counts_are_rejected():
    with pytest.raises(ValidationError):
        build_morphtable(FrequencyTable(), model_with({"a": 1}), 10)


def test_leading_space_entry_carries_the_marker():
    counts = count_frequencies(chunk_text("hun er venlig og venlig"))
    table = build_morphtable(counts, model_with({"ven": 4, "lig": 4}), 100)
    assert lookup(table, Chunk(" ", "venlig")) == ("▁ven", "lig")


def test_lookup_is_case_and_space_exact():
    counts = FrequencyTable({"landstræner": 3})
    table = build_morphtable(counts, model_with({"land": 2, "s": 2, "træn": 2, "er": 2}), 100)
    assert lookup(table, Chunk("", "landstræner")) == ("land", "s", "træn", "er")
    assert lookup(table, Chunk(" ", "Landstræner")) is None
    assert lookup(table, Chunk(" ", "landstræner")) is None


def test_specials_are_split_off():
    counts = FrequencyTable({" dig!": 2})
    table = build_morphtable(counts, model_with({"dig": 3}), 100)
    assert table.entries[" dig!"] == ("▁dig", "!")


def test_stops_at_first_overflow():
    counts = FrequencyTable({"ab": 5, "cd": 4, "a": 1})
    model = model_with({"ab": 5, "cd": 4})
    seed = seed_inventory(counts)
    table = build_morphtable(counts, model, len(seed) + 1)
    assert list(table.entries) == ["ab"]
    # "a" would fit but comes after the chunk that overflowed
    assert "a" not in table.entries


SOURCES = st.lists(st.sampled_from(["skole", " taske", " ven!", "lig", " skoletaske.", "  hus", "a\tb", "x\n"]),
                   min_size=1, max_size=30)


@given(SOURCES, st.integers(0, 30))
def test_invariants(items, extra):
    counts = count_frequencies(c for raw in items for c in chunk_text(raw))
    model = model_with({"skole": 3, "taske": 2, "ven": 2, "lig": 1, "hus": 1})
    target = len(seed_inventory(counts)) + extra
    table = build_morphtable(counts, model, target)
    assert len(table.inventory) <= target
    for raw, segs in table.entries.items():
        assert join_segments(segs) == raw
        assert all(s in table.inventory for s in segs)


@given(SOURCES, st.integers(0, 20), st.integers(0, 20))
def test_growing_target_keeps_entries(items, a, b):
    counts = count_frequencies(c for raw in items for c in chunk_text(raw))
    model = model_with({"skole": 3, "taske": 2, "ven": 2, "lig": 1, "hus": 1})
    seed = len(seed_inventory(counts))
    small = build_morphtable(counts, model, seed + min(a, b))
    large = build_morphtable(counts, model, seed + max(a, b))
    for raw, segs in small.entries.items():
        assert large.entries[raw] == segs


def test_identical_counts_give_identical_tables():
    a = FrequencyTable({"skole": 2, " taske": 2, "hus": 1})
    b = FrequencyTable({"hus": 1, " taske": 2, "skole": 2})
    model = model_with({"skole": 3, "taske": 2})
    assert build_morphtable(a, model, 40) == build_morphtable(b, model, 40)


def test_file_round_trip(danish_counts, danish_model):
    table = build_morphtable(danish_counts, danish_model, 120)
    buf = io.StringIO()
    save_morphtable(table, buf)
    text = buf.getvalue()
    assert text.startswith("#morphtable\tversion=1\tmarker=" + MARKER)
    assert load_morphtable(io.StringIO(text)) == table


def test_corrupt_entry_is_rejected(danish_counts, danish_model):
    table = build_morphtable(danish_counts, danish_model, 120)
    buf = io.StringIO()
    save_morphtable(table, buf)
    lines = buf.getvalue().split("\n")
    raw, segs = lines[2].split("\t")
    lines[2] = raw + "x\t" + segs
    with pytest.raises(ModelFormatError):
        load_morphtable(io.StringIO("\n".join(lines)))
