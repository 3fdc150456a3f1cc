"""Evaluation: segmentation scores, bits per character/token, and the
annotation-count sweep.

Segment matching compares surfaces as multisets, case-insensitively.
Precision and recall are micro-averaged over all segments.  ``accuracy``
is the mean per-word ``match / max(|pred|, |gold|)`` and
``exact_match_rate`` the share of words whose predicted split equals the
gold split as an ordered list.
"""
from __future__ import annotations

import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import AnnotatedWord, FrequencyTable, MorphCategory
from .exceptions import ValidationError
from .morfessor import TrainParams, train_semisupervised, train_unsupervised, viterbi_segment

log = logging.getLogger(__name__)

REPORT_HEADER = (
    "# precision/recall: micro-averaged case-insensitive segment multiset matches\n"
    "# accuracy: mean per-word match/max(|pred|,|gold|); exact_match: ordered split equality\n"
)


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class CategoryScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class SegmentationReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    exact_match_rate: float
    per_category: dict[MorphCategory, CategoryScore] = field(default_factory=dict)
    n_words: int = 0

    def as_dict(self) -> dict[str, float]:
        out = {
            "words": self.n_words,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "exact_match": self.exact_match_rate,
        }
        for cat, s in self.per_category.items():
            key = cat.value.lower()
            out[f"{key}.precision"] = s.precision
            out[f"{key}.recall"] = s.recall
            out[f"{key}.f1"] = s.f1
            out[f"{key}.support"] = s.support
        return out

    def format_keyvalue(self) -> str:
        lines = []
        for k, v in self.as_dict().items():
            lines.append(f"{k}={v}" if isinstance(v, int) else f"{k}={v:.4f}")
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        rows = [("all", self.precision, self.recall, self.f1, self.n_words)]
        rows += [(c.value, s.precision, s.recall, s.f1, s.support) for c, s in self.per_category.items()]
        out = [REPORT_HEADER.rstrip("\n"),
               f"{'category':<12}{'P':>8}{'R':>8}{'F1':>8}{'n':>7}"]
        for name, p, r, f, n in rows:
            out.append(f"{name:<12}{p:>8.4f}{r:>8.4f}{f:>8.4f}{n:>7}")
        out.append(f"accuracy    {self.accuracy:.4f}")
        out.append(f"exact_match {self.exact_match_rate:.4f}")
        return "\n".join(out) + "\n"


def _match(pred: Sequence[str], gold: Sequence[str], positional: bool) -> int:
    if positional:
        def spans(segs):
            out, pos = set(), 0
            for s in segs:
                out.add((pos, s.casefold()))
                pos += len(s)
            return out
        return len(spans(pred) & spans(gold))
    a = Counter(s.casefold() for s in pred)
    b = Counter(s.casefold() for s in gold)
    return sum((a & b).values())


def score_segmentations(gold: Iterable[AnnotatedWord], predicted: Mapping[str, Sequence[str]],
                        positional: bool = False) -> SegmentationReport:
    """Score predicted splits against gold annotations.

    With ``positional`` a predicted segment only counts when it also sits
    at the same character offset as the gold one.
    """
    totals = [0, 0, 0]  # match, |pred|, |gold|
    by_cat: dict[MorphCategory, list[int]] = {}
    acc_sum = 0.0
    exact = 0
    words = list(gold)
    if not words:
        raise ValidationError("no gold words to score")
    for g in words:
        if g.word not in predicted:
            raise ValidationError(f"no prediction for gold word {g.word!r}")
        pred = list(predicted[g.word])
        gsegs = g.surfaces
        m = _match(pred, gsegs, positional)
        totals[0] += m
        totals[1] += len(pred)
        totals[2] += len(gsegs)
        c = by_cat.setdefault(g.category, [0, 0, 0, 0])
        c[0] += m
        c[1] += len(pred)
        c[2] += len(gsegs)
        c[3] += 1
        acc_sum += m / max(len(pred), len(gsegs))
        if [s.casefold() for s in pred] == [s.casefold() for s in gsegs]:
            exact += 1
    p = totals[0] / totals[1] if totals[1] else 0.0
    r = totals[0] / totals[2]
    per_category = {}
    for cat in MorphCategory:
        if cat in by_cat:
            m, npred, ngold, support = by_cat[cat]
            cp = m / npred if npred else 0.0
            cr = m / ngold
            per_category[cat] = CategoryScore(cp, cr, _f1(cp, cr), support)
    n = len(words)
    return SegmentationReport(p, r, _f1(p, r), acc_sum / n, exact / n, per_category, n)


# --- encoding efficiency -----------------------------------------------------

@dataclass(frozen=True)
class EncodingEfficiency:
    total_bits: float
    n_tokens: int
    n_characters: int
    bpc: float
    bpt: float

    def format_keyvalue(self) -> str:
        return (f"total_bits={self.total_bits:.4f}\nn_tokens={self.n_tokens}\n"
                f"n_characters={self.n_characters}\nbpc={self.bpc:.4f}\nbpt={self.bpt:.4f}\n")


def measure_efficiency(logprobs: Sequence[float], n_characters: int) -> EncodingEfficiency:
    """Bits per character and per token from base-2 token log-probabilities."""
    if not logprobs:
        raise ValidationError("need at least one token log-probability")
    if n_characters <= 0:
        raise ValidationError("character count must be positive")
    for lp in logprobs:
        if lp > 0 or math.isnan(lp):
            raise ValidationError(f"invalid log-probability {lp}")
    total = -math.fsum(logprobs)
    total += 0.0  # turn -0.0 into 0.0
    n = len(logprobs)
    return EncodingEfficiency(total, n, n_characters, total / n_characters, total / n)


@dataclass
class NgramLm:
    order: int
    counts: dict
    smoothing_k: float
    vocab_size: int
    context_totals: dict = field(default_factory=dict)


def train_lm(stream: Sequence[int], order: int = 2, smoothing_k: float = 1.0,
             vocab_size: int | None = None) -> NgramLm:
    """Add-k smoothed unigram or bigram model over token ids.

    The first token of a bigram stream is conditioned on the empty context
    ``None``.
    """
    if order not in (1, 2):
        raise ValidationError(f"unsupported order {order}; use 1 or 2")
    if smoothing_k <= 0:
        raise ValidationError("smoothing_k must be positive")
    stream = list(stream)
    if not stream:
        raise ValidationError("cannot train on an empty token stream")
    if vocab_size is None:
        vocab_size = max(stream) + 1
    if min(stream) < 0 or max(stream) >= vocab_size:
        raise ValidationError("token id outside the vocabulary")
    counts: dict = {}
    prev = None
    for tok in stream:
        ctx = prev if order == 2 else None
        counts.setdefault(ctx, Counter())[tok] += 1
        prev = tok
    totals = {ctx: sum(c.values()) for ctx, c in counts.items()}
    return NgramLm(order, counts, float(smoothing_k), vocab_size, totals)


def lm_logprob(lm: NgramLm, context, token: int) -> float:
    """Base-2 log-probability of ``token`` after ``context`` (a sequence of
    earlier ids, or a single id)."""
    if not 0 <= token < lm.vocab_size:
        raise ValidationError(f"token {token} outside the vocabulary")
    ctx = None
    if lm.order == 2:
        if isinstance(context, int):
            ctx = context
        elif context:
            ctx = context[-1]
    seen = lm.counts.get(ctx)
    c = seen[token] if seen else 0
    total = lm.context_totals.get(ctx, 0)
    return math.log2((c + lm.smoothing_k) / (total + lm.smoothing_k * lm.vocab_size))


def sequence_logprobs(lm: NgramLm, ids: Sequence[int]) -> list[float]:
    out = []
    prev = None
    for tok in ids:
        out.append(lm_logprob(lm, () if prev is None else (prev,), tok))
        prev = tok
    return out


# --- annotation sweep --------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    n: int
    precision: float
    recall: float
    f1: float
    accuracy: float

    def format(self) -> str:
        return f"{self.n}\t{self.precision:.4f}\t{self.recall:.4f}\t{self.f1:.4f}\t{self.accuracy:.4f}"


def annotation_order(annotations: Sequence[AnnotatedWord], seed: int) -> list[AnnotatedWord]:
    """The fixed seeded order whose prefixes form every sweep subset."""
    ordered = list(annotations)
    random.Random(seed).shuffle(ordered)
    return ordered


def segment_words(model, words: Iterable[str]) -> dict[str, list[str]]:
    return {w: list(viterbi_segment(model, w).segments) for w in words}


def run_annotation_sweep(counts: FrequencyTable | Mapping[str, int], annotations: Sequence[AnnotatedWord],
                         holdout: Sequence[AnnotatedWord], ratios: Sequence[int],
                         params: TrainParams | None = None) -> list[SweepRow]:
    params = params or TrainParams()
    annotations = list(annotations)
    overlap = {a.word.casefold() for a in annotations} & {h.word.casefold() for h in holdout}
    if overlap:
        raise ValidationError(f"holdout overlaps the annotations, e.g. {sorted(overlap)[0]!r}")
    for n in ratios:
        if not 0 <= n <= len(annotations):
            raise ValidationError(f"ratio {n} outside [0, {len(annotations)}]")
    ordered = annotation_order(annotations, params.rng_seed)
    rows = []
    for n in sorted(ratios):
        if n == 0:
            model = train_unsupervised(counts, params)
        else:
            model = train_semisupervised(counts, ordered[:n], params)
        report = score_segmentations(holdout, segment_words(model, [h.word for h in holdout]))
        row = SweepRow(n, report.precision, report.recall, report.f1, report.accuracy)
        log.info("sweep %s", row.format())
        rows.append(row)
    return rows


def format_sweep(rows: Iterable[SweepRow]) -> str:
    out = ["n\tprecision\trecall\tf1\taccuracy"]
    out += [r.format() for r in rows]
    return "\n".join(out) + "\n"
