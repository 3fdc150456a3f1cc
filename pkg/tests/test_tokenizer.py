import os

import pytest
from hypothesis import given, strategies as st

from morphtok.bpe import MARKER, encode_bpe
from morphtok.corpus import Chunk, FrequencyTable, chunk_text, count_frequencies
from morphtok.exceptions import ValidationError
from morphtok.morfessor import MorfessorModel, uniform_letter_costs
from morphtok.tokenizer import (SPECIAL_TOKENS, _char_fallback, build_bundle, decode, encode,
                                load_bundle, save_bundle, segment_chunk, split_budget)

ALPHABET = "abcdefghijklmnopqrstuvwxyzæøå"
DOCS = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=80)
DANISHISH = st.text(alphabet=st.sampled_from(list("abdegiklmnorstuvæøå ,.!?\n") + ["😀", MARKER, "\t", "ß"]),
                    max_size=80)


def hand_model(lexicon):
    letters, end = uniform_letter_costs(ALPHABET)
    return MorfessorModel(lexicon=lexicon, letter_costs=letters, end_cost=end)


# --- budgets -----------------------------------------------------------------

def test_split_budget_table_analog():
    morph, bpe = split_budget(50_257, 0.6)
    assert abs(morph - 30_154) <= 5 and abs(bpe - 20_099) <= 5
    assert morph + bpe == 50_257 - len(SPECIAL_TOKENS)


def test_split_budget_rounds_half_up():
    assert split_budget(14, 0.5) == (5, 5)
    assert split_budget(9, 0.5) == (3, 2)


@pytest.mark.parametrize("ratio", [0, 1.5, -0.1])
def test_split_budget_rejects_bad_ratio(ratio):
    with pytest.raises(ValidationError):
        split_budget(1000, ratio)


def test_morph_variant_budget(danish_counts, danish_model):
    bundle = build_bundle("morph", danish_counts, danish_model, 1000)
    assert bundle.bpe is None
    assert bundle.morph_budget == 1000 - len(SPECIAL_TOKENS)
    assert bundle.bpe_budget == 0
    assert len(bundle.vocab) <= 1000


def test_mixed_partition_invariant(mixed_bundle):
    b = mixed_bundle
    assert b.morph_budget + b.bpe_budget + len(SPECIAL_TOKENS) == 800
    assert abs(b.morph_budget / (b.morph_budget + b.bpe_budget) - 0.6) <= 1 / (b.morph_budget + b.bpe_budget)
    assert len(b.vocab) <= 800


def test_infeasible_budgets(danish_counts, danish_model):
    with pytest.raises(ValidationError):
        build_bundle("morph", danish_counts, danish_model, 200)
    with pytest.raises(ValidationError):
        build_bundle("mixed", danish_counts, danish_model, 300, 0.6)
    with pytest.raises(ValidationError):
        build_bundle("other", danish_counts, danish_model, 3000)


def test_ids_are_deterministic(danish_counts, danish_model):
    a = build_bundle("mixed", danish_counts, danish_model, 800, 0.6)
    b = build_bundle("mixed", danish_counts, danish_model, 800, 0.6)
    assert a.vocab == b.vocab


def test_id_layout(mixed_bundle):
    b = mixed_bundle
    assert tuple(b.vocab[:4]) == SPECIAL_TOKENS
    inv = list(b.table.inventory)
    assert b.vocab[4:4 + len(inv)] == inv
    assert len(set(b.vocab)) == len(b.vocab)
    for s in b.bpe.symbols():
        assert b.token_id(s) is not None


# --- cascade -------------------------------------------------------------------

def test_table_entry_wins():
    counts = FrequencyTable({"landstræner": 5})
    model = hand_model({"land": 2, "s": 2, "træn": 2, "er": 2})
    bundle = build_bundle("morph", counts, model, 400)
    assert segment_chunk(bundle, Chunk("", "landstræner")) == ["land", "s", "træn", "er"]


def test_model_path_when_table_misses():
    counts = FrequencyTable({"ven": 5, "lig!": 5})
    bundle = build_bundle("morph", counts, hand_model({"ven": 3, "lig": 3}), 400)
    assert "venlig" not in bundle.table.entries
    assert segment_chunk(bundle, Chunk("", "venlig")) == ["ven", "lig"]
    assert bundle.stats["model_accepted"] == 1


def test_mixed_falls_back_to_bpe_for_missing_segment():
    counts = FrequencyTable({"ven": 5, "xyz": 1})
    bundle = build_bundle("mixed", counts, hand_model({"ven": 3, "lig": 3}), 400, 0.3)
    assert bundle.token_id("lig") is None
    chunk = Chunk(" ", "venlig")
    assert segment_chunk(bundle, chunk) == encode_bpe(bundle.bpe, chunk)
    assert bundle.stats["bpe"] == 1


def test_morph_fallback_decomposes_missing_segments():
    counts = FrequencyTable({"ven": 5, "li": 1})
    bundle = build_bundle("morph", counts, hand_model({"ven": 3, "lig": 3}), 400)
    # "▁ven" lacks an id but "ven" has one; "lig" goes to characters and "g" never occurs
    assert segment_chunk(bundle, Chunk(" ", "venlig")) == [MARKER, "ven", "l", "i", "<0x67>"]
    assert segment_chunk(bundle, Chunk(" ", "lig")) == [MARKER, "l", "i", "<0x67>"]


def test_table_hit_skips_model_and_bpe(danish_counts, danish_model, monkeypatch):
    bundle = build_bundle("mixed", danish_counts, danish_model, 800, 0.6)
    key = next(iter(bundle.table.entries))

    def boom(*a, **k):
        raise AssertionError("should not be consulted")

    monkeypatch.setattr(bundle, "_segment_word", boom)
    monkeypatch.setattr("morphtok.tokenizer.encode_bpe", boom)
    chunk = chunk_text(key)[0]
    assert segment_chunk(bundle, chunk) == list(bundle.table.entries[key])
    assert bundle.stats["table"] == 1
    assert bundle.stats["model"] == 0 and bundle.stats["bpe"] == 0


def test_reserved_marker_skips_model(mixed_bundle):
    before = mixed_bundle.stats["model"]
    out = segment_chunk(mixed_bundle, Chunk(" ", "a" + MARKER))
    assert mixed_bundle.stats["model"] == before
    assert decode(mixed_bundle, [mixed_bundle.token_id(s) for s in out]) == " a" + MARKER


@given(DANISHISH)
def test_mixed_never_longer_than_character_fallback(doc):
    for chunk in chunk_text(doc):
        assert len(encode_bpe(_MIXED.bpe, chunk)) <= len(_char_fallback(_MORPH, chunk.raw))


# --- encode / decode -------------------------------------------------------------

def test_empty_document(morph_bundle):
    seq = encode(morph_bundle, "")
    assert seq.ids == [] and seq.surfaces == []
    assert decode(morph_bundle, []) == ""


@pytest.mark.parametrize("doc", ["Hej med dig!", "Smørrebrød", "  dobbelt  mellemrum \n", "emoji 😀 og ▁ tegn\t"])
@pytest.mark.parametrize("variant", ["morph_bundle", "mixed_bundle"])
def test_round_trip_examples(doc, variant, request):
    bundle = request.getfixturevalue(variant)
    seq = encode(bundle, doc)
    assert decode(bundle, seq.ids) == doc
    assert [bundle.vocab[i] for i in seq.ids] == seq.surfaces


def test_encode_is_repeatable(mixed_bundle):
    doc = "Landstræneren lånte en skoletaske."
    assert encode(mixed_bundle, doc) == encode(mixed_bundle, doc)


def test_special_tokens_are_optional(mixed_bundle):
    seq = encode(mixed_bundle, "Hej", add_special=True)
    assert seq.surfaces[0] == "<s>" and seq.surfaces[-1] == "</s>"
    assert decode(mixed_bundle, seq.ids) == "Hej"


def test_out_of_range_ids(mixed_bundle):
    with pytest.raises(ValidationError):
        decode(mixed_bundle, [len(mixed_bundle.vocab)])
    with pytest.raises(ValidationError):
        decode(mixed_bundle, [-1])


@given(DOCS)
def test_lossless_morph(doc):
    seq = encode(_MORPH, doc)
    assert decode(_MORPH, seq.ids) == doc
    assert all(0 <= i < len(_MORPH.vocab) for i in seq.ids)


@given(DOCS)
def test_lossless_mixed(doc):
    seq = encode(_MIXED, doc)
    assert decode(_MIXED, seq.ids) == doc
    assert [_MIXED.vocab[i] for i in seq.ids] == seq.surfaces


# --- bundle directory ---------------------------------------------------------------

@pytest.mark.parametrize("variant", ["morph_bundle", "mixed_bundle"])
def test_bundle_round_trip(variant, request, tmp_path, danish_text):
    bundle = request.getfixturevalue(variant)
    save_bundle(bundle, tmp_path)
    names = set(os.listdir(tmp_path))
    assert {"vocab.tsv", "morphtable.tsv", "morfessor.model", "config"} <= names
    assert ("bpe.merges" in names) == (bundle.variant == "mixed")
    loaded = load_bundle(tmp_path)
    assert loaded.vocab == bundle.vocab
    assert loaded.table == bundle.table and loaded.model == bundle.model and loaded.bpe == bundle.bpe
    doc = danish_text + "ukendte ord 😀"
    assert encode(loaded, doc) == encode(bundle, doc)


def test_vocab_file_format(mixed_bundle, tmp_path):
    save_bundle(mixed_bundle, tmp_path)
    lines = (tmp_path / "vocab.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0].split("\t")[:2] == ["0", "<unk>"]
    assert len(lines) == len(mixed_bundle.vocab)


# module-level bundles for hypothesis tests (fixtures do not mix with @given)
from conftest import DANISH  # noqa: E402
from morphtok.morfessor import TrainParams, train_unsupervised  # noqa: E402

_COUNTS = count_frequencies(chunk_text(DANISH * 4))
_MODEL = train_unsupervised(_COUNTS, TrainParams(rng_seed=0))
_MORPH = build_bundle("morph", _COUNTS, _MODEL, 420)
_MIXED = build_bundle("mixed", _COUNTS, _MODEL, 800, 0.6)
