"""Masked-letter prediction by reconciling two trigram heuristics.

For a word with one hidden letter, one heuristic predicts it from the two
letters before the gap and the other from the two letters after it. Each is a
coherent expert over the letters both can produce; the merged belief comes
from the aggregation methods.
"""
from __future__ import annotations

import re
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

import numpy as np

from .aggregation import AggregationMethod, ExpertReport, aggregate
from .credence import from_matrix
from .dissimilarity import F
from .errors import ValidationError
from .projection import _bisect
from .solver import DEFAULT_CONFIG

_WORD = re.compile(r"[a-z]+")
DEFAULT_CORPUS = "english_10k.txt"


@dataclass(frozen=True)
class Corpus:
    """Lowercase alphabetic words, deduplicated in first-seen order."""

    words: tuple
    dropped: int = 0

    @cached_property
    def trigram_counts(self):
        """``(after, before)``: letter counts following each bigram and preceding each bigram."""
        return _count(self.words)


def _count(words):
    after = defaultdict(Counter)
    before = defaultdict(Counter)
    for w in words:
        for i in range(len(w) - 2):
            after[w[i:i + 2]][w[i + 2]] += 1
            before[w[i + 1:i + 3]][w[i]] += 1
    return after, before


def load_corpus(path=None):
    """Read one word per line; drop lines that are not purely alphabetic.

    ``path=None`` loads the bundled 10,000-word English list.
    """
    if path is None:
        text = resources.files("coherence").joinpath("data", DEFAULT_CORPUS).read_text(encoding="utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read corpus {path!r}: {exc}") from exc
    words, dropped = [], 0
    for line in text.splitlines():
        w = line.strip().lower()
        if not w:
            continue
        if _WORD.fullmatch(w):
            words.append(w)
        else:
            dropped += 1
    words = tuple(dict.fromkeys(words))
    if not words:
        raise ValidationError("corpus contains no usable words")
    if dropped:
        warnings.warn(f"dropped {dropped} non-alphabetic line(s) from corpus", stacklevel=2)
    return Corpus(words, dropped)


@dataclass(frozen=True)
class NgramHeuristic:
    """Letter distribution predicted from a two-letter context."""

    direction: str
    context: str
    distribution: dict = field(hash=False)

    @property
    def support(self):
        return tuple(self.distribution)

    def vector(self):
        return np.array(list(self.distribution.values()))


def _heuristics_from_counts(after, before, prefix, suffix):
    if len(prefix) != 2 or len(suffix) != 2:
        raise ValidationError("prefix and suffix must have two letters each")
    a, b = after.get(prefix, Counter()), before.get(suffix, Counter())
    support = sorted(c for c in set(a) & set(b) if a[c] > 0 and b[c] > 0)
    if not support:
        raise ValidationError(f"no letter follows {prefix!r} and precedes {suffix!r}")
    q1 = np.array([a[c] for c in support], dtype=float)
    q2 = np.array([b[c] for c in support], dtype=float)
    h1 = NgramHeuristic("after-prefix", prefix, dict(zip(support, q1 / q1.sum())))
    h2 = NgramHeuristic("before-suffix", suffix, dict(zip(support, q2 / q2.sum())))
    return h1, h2, tuple(support)


def build_heuristics(corpus, prefix, suffix):
    """Forward and backward heuristics restricted to their common letters.

    Returns
    -------
    h1, h2 : NgramHeuristic
        Relative frequencies of letters after ``prefix`` and before ``suffix``,
        renormalized over the shared support.
    support : tuple of str
        Alphabetical.
    """
    after, before = corpus.trigram_counts
    return _heuristics_from_counts(after, before, prefix, suffix)


def _logit(x):
    return np.log(x / (1.0 - x))


def _basis_f(q1, q2):
    # stationarity: logit(pi) - mean logit(q) is the same for every letter
    if q1.size == 1:
        return np.ones(1)
    mid = 0.5 * (_logit(q1) + _logit(q2))

    def excess(c):
        return float(np.sum(1.0 / (1.0 + np.exp(-(mid + c))))) - 1.0

    c = _bisect(excess, -1.0, 1.0)
    return 1.0 / (1.0 + np.exp(-(mid + c)))


def _geometric(q1, q2):
    g = np.sqrt(q1 * q2)
    return g / g.sum()


def heuristic_expert(h):
    """The heuristic as a coherent expert over singleton letter events."""
    support = h.support
    base = from_matrix(np.eye(len(support)), h.vector(), labels=support, names=support)
    report = ExpertReport(base, h.direction)
    # a partition's positive basis is its parts, covered exactly once
    report._cache["B"] = np.eye(len(support))
    report._cache["O"] = [tuple(range(len(support)))]
    return report


def predict_masked(h1, h2, method=AggregationMethod("basis", F), config=DEFAULT_CONFIG, numeric=False):
    """Merged distribution over the shared letters.

    Closed forms are used where they exist: binary KL over the basis (a 1-D
    root for the log-odds shift), the half-KL asymmetric method (normalized
    geometric mean) and the transposed KL in either form (arithmetic mean).
    Other methods, or ``numeric=True``, run the general aggregation solver.
    """
    if h1.support != h2.support:
        raise ValidationError("heuristics must share their support")
    q1, q2 = h1.vector(), h2.vector()
    kind = method.spec.kind
    if not numeric:
        if method.summation == "basis" and kind == "f":
            p = _basis_f(q1, q2)
            return dict(zip(h1.support, p))
        if method.summation == "asym" and kind == "half-f":
            return dict(zip(h1.support, _geometric(q1, q2)))
        if (method.summation, kind) in (("basis", "fo"), ("asym", "half-fo")):
            return dict(zip(h1.support, 0.5 * (q1 + q2)))
    res = aggregate([heuristic_expert(h1), heuristic_expert(h2)], method, config)
    lab = res.atoms.labels
    return {c: float(res.pi_star[lab.index(c)]) for c in h1.support}


@dataclass(frozen=True)
class AccuracyReport:
    accuracy: float
    evaluated: int
    skipped: int

    def __iter__(self):
        return iter((self.accuracy, self.evaluated, self.skipped))


def _argmax_letter(dist):
    letters = sorted(dist)
    vals = np.array([dist[c] for c in letters])
    return letters[int(np.argmax(vals))]


def evaluate_accuracy(corpus, method=AggregationMethod("basis", F), config=DEFAULT_CONFIG,
                      mask_position=2, holdout=False, word_length=5):
    """Top-1 accuracy of masked-letter prediction.

    Every word of ``word_length`` letters has the letter at ``mask_position``
    (0-based) hidden and predicted from the two letters on either side. Ties
    go to the alphabetically first letter. With ``holdout`` the word's own
    trigrams are removed from the counts first.

    Returns
    -------
    AccuracyReport
        Unpacks as ``(accuracy, evaluated, skipped)``; words with no shared
        candidate letter are skipped.
    """
    if not (2 <= mask_position <= word_length - 3):
        raise ValidationError("the mask needs two letters of context on each side")
    after, before = corpus.trigram_counts
    hits = evaluated = skipped = 0
    for w in sorted(set(corpus.words)):
        if len(w) != word_length:
            continue
        prefix, suffix = w[mask_position - 2:mask_position], w[mask_position + 1:mask_position + 3]
        a, b = after, before
        if holdout:
            own_after, own_before = _count([w])
            a = {prefix: after[prefix] - own_after.get(prefix, Counter())}
            b = {suffix: before[suffix] - own_before.get(suffix, Counter())}
        try:
            h1, h2, _ = _heuristics_from_counts(a, b, prefix, suffix)
        except ValidationError:
            skipped += 1
            continue
        evaluated += 1
        hits += _argmax_letter(predict_masked(h1, h2, method, config)) == w[mask_position]
    acc = hits / evaluated if evaluated else float("nan")
    return AccuracyReport(acc, evaluated, skipped)


__all__ = [
    "Corpus",
    "NgramHeuristic",
    "AccuracyReport",
    "load_corpus",
    "build_heuristics",
    "heuristic_expert",
    "predict_masked",
    "evaluate_accuracy",
]
