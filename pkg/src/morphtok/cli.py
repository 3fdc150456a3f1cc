"""Command-line front end.

Every subcommand accepts ``--config FILE`` with ``key=value`` lines; keys
are option names (``vocab-size`` or ``vocab_size``).  Options given on the
command line win over the config file.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 internal
invariant breach.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import logging
import os
import sys

from . import __version__
from .bpe import MARKER, decode_symbols, is_byte_symbol, train_bpe
from .corpus import Chunk, FrequencyTable, chunk_text, count_frequencies, escape_field, parse_annotations
from .eval import (format_sweep, measure_efficiency, run_annotation_sweep, score_segmentations,
                   segment_words, sequence_logprobs, train_lm)
from .exceptions import InvariantError, ModelFormatError, ValidationError
from .morfessor import (TrainParams, load_model, model_cost, save_model, train_semisupervised,
                        train_unsupervised)
from .tokenizer import (DEFAULT_MORPH_RATIO, build_bundle, decode, encode, load_bundle, save_bundle,
                        segment_chunk)

log = logging.getLogger("morphtok")

DEFAULT_RATIOS = "0,50,100,150,200,250,300,350,400"

# fallbacks applied after config and command line are merged
DEFAULTS = {
    "seed": 0,
    "corpus_weight": 1.0,
    "annotation_weight": None,
    "epsilon": None,
    "max_epochs": 10,
    "variant": "mixed",
    "morph_ratio": DEFAULT_MORPH_RATIO,
    "ratios": DEFAULT_RATIOS,
    "format": "table",
    "order": 2,
    "smoothing_k": 1.0,
}


def read_config(path) -> dict[str, str]:
    config = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            config[key.strip().replace("-", "_")] = value.strip()
    return config


def _merge_config(args, parser) -> None:
    config = read_config(args.config) if args.config else {}
    known = {a.dest: a for a in parser._actions}
    for key, value in config.items():
        action = known.get(key)
        if action is None or key in ("config", "help", "command"):
            raise ValidationError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            conv = action.type or str
            try:
                setattr(args, key, conv(value))
            except (TypeError, ValueError):
                raise ValidationError(f"bad value for {key}: {value!r}") from None
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ValidationError(f"--{name.replace('_', '-')} is required (flag or config key)")


def _existing(path, what):
    if not os.path.exists(path):
        raise ValidationError(f"{what} not found: {path}")
    return path


def _params(args) -> TrainParams:
    params = TrainParams(corpus_weight=args.corpus_weight, annotation_weight=args.annotation_weight,
                         convergence_epsilon=args.epsilon, max_epochs=args.max_epochs,
                         rng_seed=args.seed)
    params.validate()
    return params


def _read_counts(path) -> FrequencyTable:
    _existing(path, "corpus")
    with open(path, encoding="utf-8", newline="") as fh:
        return count_frequencies(c for line in fh for c in chunk_text(line))


def _read_annotations(path):
    _existing(path, "annotation file")
    with open(path, encoding="utf-8") as fh:
        return parse_annotations(fh)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# --- commands ----------------------------------------------------------------

def cmd_train_morfessor(args):
    _require(args, "corpus", "output")
    counts = _read_counts(args.corpus)
    params = _params(args)
    trace: list[float] = []
    if args.annotations:
        annotations = _read_annotations(args.annotations)
        log.info("semi-supervised training with %d annotated words", len(annotations))
        model = train_semisupervised(counts, annotations, params, trace=trace)
    else:
        annotations = []
        log.info("unsupervised training")
        model = train_unsupervised(counts, params, trace=trace)
    final = model_cost(model, counts, annotations)
    save_model(model, args.output)
    print(f"initial_cost_bits={trace[0]:.4f}")
    print(f"final_cost_bits={final:.4f}")
    print(f"lexicon_size={len(model.lexicon)}")


def cmd_train_bpe(args):
    _require(args, "corpus", "vocab_size", "output")
    counts = _read_counts(args.corpus)
    model = train_bpe(counts, args.vocab_size)
    os.makedirs(args.output, exist_ok=True)
    with open(os.path.join(args.output, "bpe.merges"), "w", encoding="utf-8", newline="\n") as fh:
        model.save_merges(fh)
    with open(os.path.join(args.output, "bpe.base"), "w", encoding="utf-8", newline="\n") as fh:
        for s in model.base_symbols:
            fh.write(escape_field(s, space=True) + "\n")
    print(f"vocab_size={model.vocab_size}")
    print(f"merges={len(model.merges)}")


def cmd_build_tokenizer(args):
    _require(args, "corpus", "model", "vocab_size", "output")
    counts = _read_counts(args.corpus)
    model = load_model(_existing(args.model, "model file"))
    bundle = build_bundle(args.variant, counts, model, args.vocab_size, args.morph_ratio)
    save_bundle(bundle, args.output)
    print(f"variant={bundle.variant}")
    print(f"morph_budget={bundle.morph_budget}")
    print(f"bpe_budget={bundle.bpe_budget}")
    print(f"vocab_size={len(bundle.vocab)}")
    print(f"morphtable_entries={len(bundle.table)}")


@contextlib.contextmanager
def _std_stream(stream, mode):
    buf = getattr(stream, "buffer", None)
    if buf is None:
        yield stream
        return
    if mode == "w":
        stream.flush()
    wrapper = io.TextIOWrapper(buf, encoding="utf-8", newline="" if mode == "r" else "\n")
    try:
        yield wrapper
    finally:
        if mode == "w":
            wrapper.flush()
        wrapper.detach()


def _open_in(path):
    if path in (None, "-"):
        return _std_stream(sys.stdin, "r")
    return open(_existing(path, "input"), encoding="utf-8", newline="")


def _open_out(path):
    if path in (None, "-"):
        return _std_stream(sys.stdout, "w")
    return open(path, "w", encoding="utf-8", newline="")


def _lines(src, block=1 << 20):
    """Yield lines split on "\n" only; a bare "\r" stays inside its line."""
    pending = ""
    while True:
        data = src.read(block)
        if not data:
            break
        parts = (pending + data).split("\n")
        pending = parts.pop()
        for part in parts:
            yield part + "\n"
    if pending:
        yield pending


def _load_bundle(path):
    return load_bundle(_existing(path, "bundle directory"))


def cmd_tokenize(args):
    _require(args, "bundle")
    bundle = _load_bundle(args.bundle)
    with _open_in(args.input) as src, _open_out(args.output) as dst:
        for line in _lines(src):
            text = line[:-1] if line.endswith("\n") else line
            ids = encode(bundle, text).ids
            dst.write(" ".join(map(str, ids)) + "\n")


def cmd_detokenize(args):
    _require(args, "bundle")
    bundle = _load_bundle(args.bundle)
    with _open_in(args.input) as src, _open_out(args.output) as dst:
        for lineno, line in enumerate(_lines(src), 1):
            fields = line.split()
            try:
                ids = [int(f) for f in fields]
                text = decode(bundle, ids)
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: {exc}") from None
            dst.write(text + "\n")


def _pieces(segments) -> list[str]:
    """Token surfaces as plain text pieces: markers dropped, byte runs joined."""
    out, pending = [], []
    for s in segments:
        if is_byte_symbol(s):
            pending.append(s)
            continue
        if pending:
            out.append(decode_symbols(pending))
            pending = []
        s = s.replace(MARKER, "")
        if s:
            out.append(s)
    if pending:
        out.append(decode_symbols(pending))
    return out


def cmd_eval_seg(args):
    _require(args, "annotations")
    gold = _read_annotations(args.annotations)
    words = [g.word for g in gold]
    if args.bundle:
        bundle = _load_bundle(args.bundle)
        # words are scored as they occur mid-sentence, after a space
        predicted = {w: _pieces(segment_chunk(bundle, Chunk(" ", w))) for w in words}
    elif args.model:
        predicted = segment_words(load_model(_existing(args.model, "model file")), words)
    else:
        raise ValidationError("give --bundle or --model")
    report = score_segmentations(gold, predicted)
    text = report.format_table() if args.format == "table" else report.format_keyvalue()
    _write_text(args.output, text)


def cmd_eval_eff(args):
    _require(args, "bundle", "text")
    bundle = _load_bundle(args.bundle)
    with open(_existing(args.text, "text file"), encoding="utf-8", newline="") as fh:
        held_out = fh.read()
    if args.train:
        with open(_existing(args.train, "training text"), encoding="utf-8", newline="") as fh:
            train_text = fh.read()
    else:
        train_text = held_out
    train_ids = encode(bundle, train_text).ids
    ids = encode(bundle, held_out).ids
    if not train_ids or not ids:
        raise ValidationError("texts must not be empty")
    lm = train_lm(train_ids, args.order, args.smoothing_k, vocab_size=len(bundle.vocab))
    eff = measure_efficiency(sequence_logprobs(lm, ids), len(held_out))
    _write_text(args.output, eff.format_keyvalue())


def cmd_sweep(args):
    _require(args, "corpus", "annotations", "holdout")
    counts = _read_counts(args.corpus)
    annotations = _read_annotations(args.annotations)
    holdout = _read_annotations(args.holdout)
    try:
        ratios = [int(r) for r in str(args.ratios).split(",") if r.strip()]
    except ValueError:
        raise ValidationError(f"bad ratio list {args.ratios!r}") from None
    rows = run_annotation_sweep(counts, annotations, holdout, ratios, _params(args))
    _write_text(args.output, format_sweep(rows))


def cmd_make_toy(args):
    from .toylang import make_toy_language, write_toy_language

    _require(args, "output")
    paths = write_toy_language(make_toy_language(args.seed), args.output)
    for k, v in paths.items():
        print(f"{k}={v}")


# --- parser ------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_train(p):
    p.add_argument("--corpus-weight", type=float)
    p.add_argument("--annotation-weight", type=float)
    p.add_argument("--epsilon", type=float, help="convergence threshold in bits")
    p.add_argument("--max-epochs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morphtok", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-morfessor", help="train the morph segmentation model")
    _add_common(p)
    _add_train(p)
    p.add_argument("--corpus")
    p.add_argument("--annotations")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_train_morfessor)

    p = sub.add_parser("train-bpe", help="train a standalone BPE model")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--vocab-size", type=int)
    p.add_argument("-o", "--output", help="output directory")
    p.set_defaults(func=cmd_train_bpe)

    p = sub.add_parser("build-tokenizer", help="build a tokenizer bundle directory")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--model")
    p.add_argument("--variant", choices=("morph", "mixed"))
    p.add_argument("--vocab-size", type=int)
    p.add_argument("--morph-ratio", type=float)
    p.add_argument("-o", "--output", help="bundle directory")
    p.set_defaults(func=cmd_build_tokenizer)

    for name, func, help_ in (("tokenize", cmd_tokenize, "text lines to id lines"),
                              ("detokenize", cmd_detokenize, "id lines to text lines")):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        p.add_argument("--bundle")
        p.add_argument("-i", "--input", help="default stdin")
        p.add_argument("-o", "--output", help="default stdout")
        p.set_defaults(func=func)

    p = sub.add_parser("eval-seg", help="segmentation scores against gold annotations")
    _add_common(p)
    p.add_argument("--bundle")
    p.add_argument("--model", help="score plain model segmentations instead of a bundle")
    p.add_argument("--annotations")
    p.add_argument("--format", choices=("table", "kv"))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval_seg)

    p = sub.add_parser("eval-eff", help="bits per character and per token")
    _add_common(p)
    p.add_argument("--bundle")
    p.add_argument("--text", help="held-out text")
    p.add_argument("--train", help="language-model training text (default: the held-out text)")
    p.add_argument("--order", type=int, choices=(1, 2))
    p.add_argument("--smoothing-k", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval_eff)

    p = sub.add_parser("sweep", help="segmentation F1 against the number of annotations")
    _add_common(p)
    _add_train(p)
    p.add_argument("--corpus")
    p.add_argument("--annotations")
    p.add_argument("--holdout")
    p.add_argument("--ratios", help=f"comma-separated counts (default {DEFAULT_RATIOS})")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("make-toy", help="write the synthetic toy-language fixture")
    _add_common(p)
    p.add_argument("-o", "--output", help="output directory")
    p.set_defaults(func=cmd_make_toy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        _merge_config(args, subparser)
        args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
