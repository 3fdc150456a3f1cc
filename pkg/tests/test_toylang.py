from morphtok.corpus import MorphCategory, parse_annotations
from morphtok.toylang import make_toy_language, write_toy_language


def test_shape():
    lang = make_toy_language(0)
    assert (len(lang.roots), len(lang.suffixes), len(lang.links)) == (30, 5, 3)
    assert len(lang.tokens) == 5000
    assert len(lang.annotations) == 400 and len(lang.holdout) == 71
    assert not {a.word for a in lang.annotations} & {h.word for h in lang.holdout}


def test_gold_is_concatenative():
    lang = make_toy_language(1)
    for a in lang.annotations + lang.holdout:
        assert "".join(a.surfaces) == a.word
        if a.category is MorphCategory.COMPOUND:
            assert a.surfaces[1] in lang.links


def test_deterministic():
    assert make_toy_language(2).tokens == make_toy_language(2).tokens


def test_written_files_parse(tmp_path):
    lang = make_toy_language(0)
    paths = write_toy_language(lang, tmp_path)
    with open(paths["annotations"], encoding="utf-8") as fh:
        assert parse_annotations(fh) == lang.annotations
    with open(paths["corpus"], encoding="utf-8") as fh:
        assert fh.read().split() == lang.tokens
