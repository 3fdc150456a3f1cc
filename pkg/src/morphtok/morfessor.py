"""MDL morph segmentation model in the style of Morfessor Baseline.

Total cost in bits::

    L = L_lexicon + corpus_weight * L_corpus + annotation_weight * L_annotations

``L_lexicon`` spells every morph type with fixed per-letter code lengths
(plus an end-of-morph symbol) and adds the non-informative frequency prior
``log2 C(N-1, M-1)``.  ``L_corpus`` and ``L_annotations`` are the negative
log-likelihoods of the corpus morph tokens and of the gold morph tokens
under the maximum-likelihood unigram ``count(m) / N``, where ``N`` counts
both kinds of tokens.

Because the whole objective depends only on per-morph counts, the change
caused by re-analysing one word can be computed exactly from the handful
of morphs it touches; training evaluates candidates that way.
"""
from __future__ import annotations

import io
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .corpus import AnnotatedWord, FrequencyTable, escape_field, unescape_field, word_counts
from .exceptions import InvariantError, ModelFormatError, ValidationError, VersionError

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_MAGIC = "morphtok-morfessor"
_LN2 = math.log(2.0)


def _log2_binom(n: int, k: int) -> float:
    if k <= 0 or k >= n:
        return 0.0
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / _LN2


def _xlog2(w: float, c: int) -> float:
    return w * math.log2(c) if c > 0 and w else 0.0


@dataclass(frozen=True)
class TrainParams:
    corpus_weight: float = 1.0
    annotation_weight: float | None = None
    convergence_epsilon: float | None = None
    max_epochs: int = 10
    rng_seed: int = 0

    def validate(self) -> None:
        if not self.corpus_weight > 0:
            raise ValidationError("corpus_weight must be > 0")
        if self.annotation_weight is not None and self.annotation_weight < 0:
            raise ValidationError("annotation_weight must be >= 0")
        if self.convergence_epsilon is not None and not self.convergence_epsilon > 0:
            raise ValidationError("convergence_epsilon must be > 0")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be >= 1")


@dataclass(frozen=True)
class SegmentationResult:
    segments: tuple[str, ...]
    cost_bits: float


@dataclass
class MorfessorModel:
    """A trained (or hand-built) segmentation model.

    ``analyses`` keeps the segmentation of every training word and
    ``annotation_counts`` the gold morph occurrences injected by
    semi-supervised training; together with the training counts they
    determine ``lexicon`` exactly.
    """

    lexicon: dict[str, int]
    letter_costs: dict[str, float]
    end_cost: float
    params: TrainParams = field(default_factory=TrainParams)
    analyses: dict[str, tuple[str, ...]] = field(default_factory=dict)
    annotation_counts: dict[str, int] = field(default_factory=dict)
    version: int = FORMAT_VERSION
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        for morph, count in self.lexicon.items():
            if not morph:
                raise InvariantError("empty morph in lexicon")
            if count < 1:
                raise InvariantError(f"non-positive count for {morph!r}")
            for ch in morph:
                if ch not in self.letter_costs:
                    raise InvariantError(f"no letter cost for {ch!r}")
        self.corpus_token_total = sum(self.lexicon.values())
        self._unseen_letter = max(self.letter_costs.values(), default=0.0) + 1.0
        self._log_total = math.log2(self.corpus_token_total) if self.corpus_token_total else 0.0
        self._novel_penalty = math.log2(self.corpus_token_total + 1)

    def letter_cost(self, morph: str) -> float:
        """Bits to spell ``morph`` including its end-of-morph symbol."""
        costs = self.letter_costs
        unseen = self._unseen_letter
        total = 0.0
        for ch in morph:
            total += costs.get(ch, unseen)
        return total + self.end_cost

    def morph_cost(self, morph: str) -> float:
        """Decoding cost of one morph: ``-log2 P(m)`` or the novel-morph price."""
        cost = self._cache.get(morph)
        if cost is None:
            count = self.lexicon.get(morph)
            if count:
                cost = self._log_total - math.log2(count)
            else:
                cost = self.letter_cost(morph) + self._novel_penalty
            if len(self._cache) < 1_000_000:
                self._cache[morph] = cost
        return cost

    @classmethod
    def from_analyses(cls, analyses: Mapping[str, Iterable[str]], training_counts,
                      annotations: Iterable[AnnotatedWord] = (), *,
                      letter_costs=None, end_cost=None, params=None) -> MorfessorModel:
        """Build a model whose lexicon is induced by explicit analyses."""
        words = _as_word_counts(training_counts)
        analyses = {w: tuple(s) for w, s in analyses.items()}
        ann = _annotation_counts(annotations)
        lexicon = _induced_lexicon(words, analyses, ann)
        if letter_costs is None:
            letter_costs, end_cost = estimate_letter_costs(words)
        letters = dict(letter_costs)
        for morph in lexicon:
            for ch in morph:
                letters.setdefault(ch, max(letters.values(), default=0.0) + 1.0)
        return cls(lexicon=dict(lexicon), letter_costs=letters, end_cost=end_cost,
                   params=params or TrainParams(), analyses=analyses,
                   annotation_counts=dict(ann))


# --- cost -------------------------------------------------------------------

def estimate_letter_costs(words: Mapping[str, int]) -> tuple[dict[str, float], float]:
    """Per-code-point code lengths from count-weighted letter frequencies.

    Word ends are counted as one extra symbol; its cost is the end-of-morph
    cost.
    """
    letters: Counter[str] = Counter()
    ends = 0
    for word, count in words.items():
        for ch in word:
            letters[ch] += count
        ends += count
    total = sum(letters.values()) + ends
    if not total:
        return {}, 0.0
    costs = {ch: math.log2(total) - math.log2(n) for ch, n in sorted(letters.items())}
    return costs, math.log2(total) - math.log2(ends)


def uniform_letter_costs(alphabet: Iterable[str]) -> tuple[dict[str, float], float]:
    """Equal code length for every letter and the end symbol."""
    letters = sorted(set(alphabet))
    bits = math.log2(len(letters) + 1)
    return {ch: bits for ch in letters}, bits


def _as_word_counts(counts) -> Counter[str]:
    if isinstance(counts, FrequencyTable):
        return word_counts(counts)
    return Counter(dict(counts))


def _annotation_counts(annotations: Iterable[AnnotatedWord]) -> Counter[str]:
    ann: Counter[str] = Counter()
    for a in annotations:
        ann.update(gold_split(a))
    return ann


def gold_split(annotation: AnnotatedWord) -> tuple[str, ...]:
    """Gold morphs realigned onto the characters of the annotated word.

    Segment surfaces are matched case-insensitively, so ``Lånte`` annotated
    as ``lån te`` yields ``("Lån", "te")``.
    """
    surfaces = annotation.surfaces
    word = annotation.word
    if sum(map(len, surfaces)) != len(word):
        return tuple(surfaces)
    out, pos = [], 0
    for s in surfaces:
        out.append(word[pos:pos + len(s)])
        pos += len(s)
    return tuple(out)


def _induced_lexicon(words, analyses, ann) -> Counter[str]:
    lexicon: Counter[str] = Counter()
    for word, count in words.items():
        segs = analyses.get(word)
        if segs is None:
            raise InvariantError(f"no analysis for training word {word!r}")
        if "".join(segs) != word:
            raise InvariantError(f"analysis of {word!r} does not concatenate to it")
        for m in segs:
            lexicon[m] += count
    lexicon.update(ann)
    return lexicon


def _cost_from_counts(counts, weights, spell) -> float:
    n = sum(counts.values())
    if not n:
        return 0.0
    lex = sum(spell(m) for m in counts)
    prior = _log2_binom(n - 1, len(counts) - 1)
    w_total = sum(weights.values())
    data = w_total * math.log2(n) - sum(_xlog2(weights[m], c) for m, c in counts.items())
    return lex + prior + data


def model_cost(model: MorfessorModel, training_counts, annotations: Iterable[AnnotatedWord] = ()) -> float:
    """Total MDL cost in bits of ``model`` on its training data.

    Raises :class:`InvariantError` when the lexicon is not exactly the one
    induced by the model's analyses, the training counts and the gold
    annotations.
    """
    words = _as_word_counts(training_counts)
    ann = _annotation_counts(annotations)
    expected = _induced_lexicon(words, model.analyses, ann)
    if expected != Counter(model.lexicon):
        raise InvariantError("lexicon is inconsistent with training counts and annotations")
    alpha = model.params.corpus_weight
    beta = model.params.annotation_weight or 0.0
    corpus_tokens: Counter[str] = Counter()
    for word, count in words.items():
        for m in model.analyses[word]:
            corpus_tokens[m] += count
    weights = {m: alpha * corpus_tokens.get(m, 0) + beta * ann.get(m, 0) for m in expected}
    return _cost_from_counts(expected, weights, model.letter_cost)


# --- training ---------------------------------------------------------------

class _Search:
    """Mutable training state with O(|move|) exact cost deltas."""

    def __init__(self, letter_costs, end_cost, alpha, beta):
        self.letter_costs = letter_costs
        self.end_cost = end_cost
        self.alpha = alpha
        self.beta = beta
        self.counts: dict[str, int] = {}
        self.weights: dict[str, float] = {}
        self.n = 0
        self.m = 0
        self.w_total = 0.0
        self.lex = 0.0
        self._spell: dict[str, float] = {}

    def spell(self, morph):
        bits = self._spell.get(morph)
        if bits is None:
            bits = self.end_cost
            for ch in morph:
                bits += self.letter_costs[ch]
            self._spell[morph] = bits
        return bits

    def load(self, counts: Counter, weights: dict) -> None:
        self.counts = dict(counts)
        self.weights = dict(weights)
        self.n = sum(counts.values())
        self.m = len(counts)
        self.w_total = sum(weights.values())
        self.lex = sum(self.spell(x) for x in counts)

    def cost(self) -> float:
        if not self.n:
            return 0.0
        s = sum(_xlog2(self.weights[x], c) for x, c in self.counts.items())
        return (self.lex + _log2_binom(self.n - 1, self.m - 1)
                + self.w_total * math.log2(self.n) - s)

    def delta(self, changes: dict[str, int]) -> float:
        """Exact cost change if each morph's count moved by ``changes[m]``.

        Changes are corpus-token changes, weighted by ``alpha``.
        """
        counts, weights, alpha = self.counts, self.weights, self.alpha
        dn = dm = 0
        dlex = ds = 0.0
        for morph, dc in changes.items():
            if not dc:
                continue
            c = counts.get(morph, 0)
            w = weights.get(morph, 0.0)
            c2 = c + dc
            w2 = w + alpha * dc
            dn += dc
            if c == 0:
                dm += 1
                dlex += self.spell(morph)
            elif c2 == 0:
                dm -= 1
                dlex -= self.spell(morph)
            ds += _xlog2(w2, c2) - _xlog2(w, c)
        n2 = self.n + dn
        w_total2 = self.w_total + alpha * dn
        old = _log2_binom(self.n - 1, self.m - 1) + (self.w_total * math.log2(self.n) if self.n else 0.0)
        new = _log2_binom(n2 - 1, self.m + dm - 1) + (w_total2 * math.log2(n2) if n2 else 0.0)
        return dlex + new - old - ds

    def apply(self, changes: dict[str, int]) -> None:
        counts, weights, alpha = self.counts, self.weights, self.alpha
        for morph, dc in changes.items():
            if not dc:
                continue
            c = counts.get(morph, 0)
            c2 = c + dc
            if c2 < 0:
                raise InvariantError(f"negative count for {morph!r}")
            self.n += dc
            self.w_total += alpha * dc
            if c == 0:
                self.m += 1
                self.lex += self.spell(morph)
            if c2 == 0:
                self.m -= 1
                self.lex -= self.spell(morph)
                del counts[morph]
                del weights[morph]
            else:
                counts[morph] = c2
                weights[morph] = weights.get(morph, 0.0) + alpha * dc


def _changes(old: tuple[str, ...], new: tuple[str, ...], count: int) -> dict[str, int]:
    ch: dict[str, int] = {}
    for m in old:
        ch[m] = ch.get(m, 0) - count
    for m in new:
        ch[m] = ch.get(m, 0) + count
    return ch


# words up to this length are optimised over every segmentation
EXHAUSTIVE_MAX_LEN = 7


def _all_splits(word: str):
    n = len(word)
    for mask in range(1 << (n - 1)):
        out, start = [], 0
        for i in range(1, n):
            if mask >> (i - 1) & 1:
                out.append(word[start:i])
                start = i
        out.append(word[start:])
        yield tuple(out)


def _optimize_word(state: _Search, word: str, count: int, current: tuple[str, ...]):
    """Best re-analysis of one word with the rest of the corpus held fixed.

    Short words are scored over every segmentation.  Longer words use
    recursive binary splitting: starting from the unsplit word, every split
    point of a part is tried, the best split (if it beats leaving the part
    whole) is applied and both halves are refined in turn.  Two dynamic
    programming proposals are then scored as well.  Returns
    ``(delta, analysis)`` relative to ``current``.
    """
    evaluated: dict[tuple[str, ...], float] = {}

    def score(seg):
        d = evaluated.get(seg)
        if d is None:
            d = evaluated[seg] = state.delta(_changes(current, seg, count))
        return d

    def refine(seg, idx):
        part = seg[idx]
        best, best_d = seg, score(seg)
        for j in range(1, len(part)):
            cand = seg[:idx] + (part[:j], part[j:]) + seg[idx + 1:]
            d = score(cand)
            if d < best_d:
                best, best_d = cand, d
        if best is seg:
            return seg
        best = refine(best, idx + 1)
        return refine(best, idx)

    if len(word) <= EXHAUSTIVE_MAX_LEN:
        best = (word,)
        for cand in _all_splits(word):
            if score(cand) < score(best):
                best = cand
        return score(best), best
    best = refine((word,), 0)
    # price proposals against the lexicon without this word's own tokens
    removal = {m: -c for m, c in Counter(current).items()}
    for m in removal:
        removal[m] *= count
    state.apply(removal)
    try:
        proposals = [_dp_proposal(state, word, count, amortise) for amortise in (False, True)]
    finally:
        state.apply({m: -c for m, c in removal.items()})
    for proposal in proposals:
        if score(proposal) < score(best):
            best = proposal
    return score(best), best


def _dp_proposal(state: _Search, word: str, count: int, amortise: bool = False) -> tuple[str, ...]:
    """Cheapest split when each morph is priced by the marginal cost of
    adding ``count`` tokens of it to the current state.  With ``amortise``
    a new morph's spelling is left out of its price, which favours splits
    that reuse one new morph several times.

    The prices ignore interactions between morphs, so the result is only a
    candidate; the caller scores it exactly.  It reaches splits whose
    intermediate binary steps would each raise the cost.
    """
    n = len(word)
    best = [0.0] + [math.inf] * n
    back = [0] * (n + 1)
    for j in range(1, n + 1):
        for i in range(j):
            m = word[i:j]
            c = best[i] + state.delta({m: count})
            if amortise and m not in state.counts:
                c -= state.spell(m)
            if c < best[j]:
                best[j], back[j] = c, i
    segs = []
    j = n
    while j > 0:
        segs.append(word[back[j]:j])
        j = back[j]
    return tuple(reversed(segs))


def _default_annotation_weight(words: Mapping[str, int], annotations) -> float:
    corpus_tokens = sum(words.values())
    ann_tokens = len(annotations)
    return 1000.0 * corpus_tokens / ann_tokens if ann_tokens else 0.0


def _train(words: Counter, annotations: list[AnnotatedWord], params: TrainParams,
           letter_costs=None, end_cost=None, trace=None) -> MorfessorModel:
    params.validate()
    if not words:
        raise ValidationError("cannot train on an empty corpus")
    if letter_costs is None:
        letter_costs, end_cost = estimate_letter_costs(words)
    else:
        letter_costs = dict(letter_costs)
    # only splits that reproduce the word exactly can pin its analysis
    gold = {a.word: gold_split(a) for a in annotations if "".join(gold_split(a)) == a.word}
    for m in _annotation_counts(annotations):
        for ch in m:
            letter_costs.setdefault(ch, max(letter_costs.values(), default=0.0) + 1.0)
    for w in words:
        for ch in w:
            if ch not in letter_costs:
                raise ValidationError(f"letter costs do not cover {ch!r}")

    beta = params.annotation_weight
    if beta is None:
        beta = _default_annotation_weight(words, annotations)
    alpha = params.corpus_weight
    state = _Search(letter_costs, end_cost, alpha, beta)

    analyses = {w: gold.get(w, (w,)) for w in sorted(words)}
    ann = _annotation_counts(annotations)
    counts: Counter[str] = Counter()
    for w, segs in analyses.items():
        for m in segs:
            counts[m] += words[w]
    weights = {m: alpha * c for m, c in counts.items()}
    for m, a in ann.items():
        counts[m] += a
        weights[m] = weights.get(m, 0.0) + beta * a
    state.load(counts, weights)

    cost = state.cost()
    epsilon = params.convergence_epsilon
    if epsilon is None:
        epsilon = max(0.005 * cost, 1e-9)
    resolved = replace(params, annotation_weight=float(beta), convergence_epsilon=float(epsilon))
    if trace is not None:
        trace.append(cost)
    log.info("initial cost %.3f bits over %d word types", cost, len(words))

    free = [w for w in sorted(words) if w not in gold]
    rng = random.Random(params.rng_seed)
    for epoch in range(params.max_epochs):
        rng.shuffle(free)
        epoch_start = cost
        for w in free:
            d, best = _optimize_word(state, w, words[w], analyses[w])
            if d < 0:
                state.apply(_changes(analyses[w], best, words[w]))
                analyses[w] = best
                cost += d
                if trace is not None:
                    trace.append(cost)
        log.info("epoch %d: cost %.3f bits", epoch + 1, cost)
        if epoch_start - cost < epsilon:
            break

    lexicon = {m: c for m, c in sorted(state.counts.items())}
    return MorfessorModel(lexicon=lexicon, letter_costs=dict(sorted(letter_costs.items())),
                          end_cost=end_cost, params=resolved, analyses=analyses,
                          annotation_counts=dict(sorted(ann.items())))


def train_unsupervised(counts, params: TrainParams | None = None, *,
                       letter_costs=None, end_cost=None, trace=None) -> MorfessorModel:
    """Train on unannotated counts only.

    ``counts`` is a :class:`FrequencyTable` of chunks (its alphanumeric runs
    become the training words) or a plain word -> count mapping.  When
    ``trace`` is a list, the total cost after every accepted move is
    appended to it.
    """
    params = params or TrainParams()
    params = replace(params, annotation_weight=0.0)
    return _train(_as_word_counts(counts), [], params, letter_costs, end_cost, trace)


def train_semisupervised(counts, annotations: list[AnnotatedWord], params: TrainParams | None = None, *,
                         letter_costs=None, end_cost=None, trace=None) -> MorfessorModel:
    """Train with gold segmentations steering the corpus analysis.

    Gold morphs are injected into the initial lexicon, annotated words keep
    their gold split throughout, and the annotation likelihood enters the
    objective with ``params.annotation_weight`` (``None`` picks
    ``1000 * corpus tokens / annotated words``).  A weight of exactly 0
    reduces to :func:`train_unsupervised`.
    """
    params = params or TrainParams()
    if params.annotation_weight == 0:
        return train_unsupervised(counts, params, letter_costs=letter_costs,
                                  end_cost=end_cost, trace=trace)
    annotations = list(annotations)
    if not annotations:
        raise ValidationError("no annotations given; use train_unsupervised")
    return _train(_as_word_counts(counts), annotations, params, letter_costs, end_cost, trace)


# --- decoding ---------------------------------------------------------------

def viterbi_segment(model: MorfessorModel, word: str) -> SegmentationResult:
    """Minimum-cost segmentation of ``word``.

    Ties go to fewer segments, then to the longest first segment (and so on
    left to right).
    """
    if not word:
        raise ValidationError("cannot segment an empty word")
    if any(ch.isspace() for ch in word):
        raise ValidationError(f"word contains whitespace: {word!r}")
    n = len(word)
    cost_of = model.morph_cost
    # best[j] = (cost, n_segments, negated segment lengths) for word[:j]
    best: list = [None] * (n + 1)
    back = [0] * (n + 1)
    best[0] = (0.0, 0, ())
    for j in range(1, n + 1):
        cand = None
        for i in range(j):
            c, k, lens = best[i]
            key = (c + cost_of(word[i:j]), k + 1, lens + (i - j,))
            if cand is None or key < cand:
                cand = key
                back[j] = i
        best[j] = cand
    segs = []
    j = n
    while j > 0:
        i = back[j]
        segs.append(word[i:j])
        j = i
    segs.reverse()
    return SegmentationResult(tuple(segs), best[n][0])


# --- persistence ------------------------------------------------------------

def save_model(model: MorfessorModel, sink) -> None:
    """Write ``model`` in the versioned line format (byte-deterministic)."""
    p = model.params
    lines = [f"{_MAGIC}\t{model.version}"]
    lines.append(f"param\tcorpus_weight\t{p.corpus_weight!r}")
    lines.append(f"param\tannotation_weight\t{p.annotation_weight!r}")
    lines.append(f"param\tconvergence_epsilon\t{p.convergence_epsilon!r}")
    lines.append(f"param\tmax_epochs\t{p.max_epochs}")
    lines.append(f"param\trng_seed\t{p.rng_seed}")
    lines.append(f"end_cost\t{model.end_cost!r}")
    for ch, bits in sorted(model.letter_costs.items()):
        lines.append(f"letter\t{escape_field(ch)}\t{bits!r}")
    for m, c in sorted(model.lexicon.items()):
        lines.append(f"morph\t{escape_field(m)}\t{c}")
    for m, c in sorted(model.annotation_counts.items()):
        lines.append(f"gold\t{escape_field(m)}\t{c}")
    for w, segs in sorted(model.analyses.items()):
        lines.append(f"analysis\t{escape_field(w)}\t" + "\t".join(escape_field(s) for s in segs))
    lines.append(f"end\t{len(lines) - 1}")
    text = "\n".join(lines) + "\n"
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


_PARAM_TYPES = {"corpus_weight": float, "annotation_weight": float,
                "convergence_epsilon": float, "max_epochs": int, "rng_seed": int}


def load_model(source) -> MorfessorModel:
    if isinstance(source, io.TextIOBase):
        text = source.read()
    else:
        with open(source, encoding="utf-8", newline="\n") as fh:
            text = fh.read()
    if not text.endswith("\n"):
        raise ModelFormatError("truncated model file")
    lines = text[:-1].split("\n")
    head = lines[0].split("\t")
    if len(head) != 2 or head[0] != _MAGIC:
        raise ModelFormatError("not a morphtok model file")
    try:
        version = int(head[1])
    except ValueError:
        raise ModelFormatError("bad version field") from None
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported model version {version}")
    tail = lines[-1].split("\t")
    if tail[0] != "end" or len(tail) != 2 or tail[1] != str(len(lines) - 2):
        raise ModelFormatError("truncated or corrupt model file")

    params, letters, lexicon, gold, analyses = {}, {}, {}, {}, {}
    end_cost = None
    try:
        for line in lines[1:-1]:
            kind, *rest = line.split("\t")
            if kind == "param":
                name, value = rest
                params[name] = None if value == "None" else _PARAM_TYPES[name](value)
            elif kind == "end_cost":
                end_cost = float(rest[0])
            elif kind == "letter":
                letters[unescape_field(rest[0])] = float(rest[1])
            elif kind == "morph":
                lexicon[unescape_field(rest[0])] = int(rest[1])
            elif kind == "gold":
                gold[unescape_field(rest[0])] = int(rest[1])
            elif kind == "analysis":
                analyses[unescape_field(rest[0])] = tuple(unescape_field(s) for s in rest[1:])
            else:
                raise ModelFormatError(f"unknown record {kind!r}")
    except (ValueError, KeyError, IndexError) as exc:
        raise ModelFormatError(f"corrupt model record: {exc}") from None
    if end_cost is None:
        raise ModelFormatError("missing end_cost")
    model = MorfessorModel(lexicon=lexicon, letter_costs=letters, end_cost=end_cost,
                           params=TrainParams(**params), analyses=analyses,
                           annotation_counts=gold, version=version)
    induced: Counter[str] = Counter(gold)
    for segs in analyses.values():
        if not segs:
            raise InvariantError("empty analysis")
    if analyses and not set(m for segs in analyses.values() for m in segs) <= set(lexicon):
        raise InvariantError("analysis uses a morph missing from the lexicon")
    if any(lexicon.get(m, 0) < c for m, c in induced.items()):
        raise InvariantError("gold counts exceed lexicon counts")
    return model
