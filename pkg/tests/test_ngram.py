import numpy as np
import pytest

from coherence import FO, HALF_F, HALF_FO, F
from coherence.aggregation import AggregationMethod
from coherence.errors import ValidationError
from coherence.ngram import (
    Corpus,
    build_heuristics,
    evaluate_accuracy,
    heuristic_expert,
    load_corpus,
    predict_masked,
)


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


def test_bundled_corpus(corpus):
    assert len(corpus.words) == 10000 and corpus.dropped == 0


def test_nonalphabetic_lines_dropped(tmp_path):
    path = tmp_path / "words.txt"
    path.write_text("email\nEmri1l\nemit\n")
    with pytest.warns(UserWarning, match="dropped 1"):
        c = load_corpus(path)
    assert c.words == ("email", "emit") and c.dropped == 1


def test_empty_corpus(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("")
    with pytest.raises(ValidationError):
        load_corpus(path)
    with pytest.raises(ValidationError):
        load_corpus(tmp_path / "missing.txt")


def test_email_heuristics(corpus):
    h1, h2, support = build_heuristics(corpus, "em", "il")
    assert support == tuple("abemops")
    assert np.allclose(h1.vector(), [0.16, 0.08, 0.39, 0.01, 0.15, 0.17, 0.04], atol=0.01)
    assert np.allclose(h2.vector(), [0.32, 0.27, 0.02, 0.22, 0.03, 0.07, 0.07], atol=0.01)
    assert h1.vector().sum() == pytest.approx(1.0, abs=1e-12)
    assert h1.direction == "after-prefix" and h2.direction == "before-suffix"


def test_unknown_context(corpus):
    with pytest.raises(ValidationError):
        build_heuristics(corpus, "qz", "il")
    with pytest.raises(ValidationError):
        build_heuristics(corpus, "e", "il")


def test_heuristic_expert_structure(corpus):
    h1, _, _ = build_heuristics(corpus, "em", "il")
    expert = heuristic_expert(h1)
    assert expert.basis.tolist() == np.eye(7).tolist()
    assert expert.covers == [tuple(range(7))]


@pytest.mark.parametrize("method", [AggregationMethod("basis", F), AggregationMethod("asym", HALF_F),
                                    AggregationMethod("basis", FO), AggregationMethod("asym", HALF_FO)])
def test_closed_forms_match_solver(corpus, method):
    h1, h2, _ = build_heuristics(corpus, "em", "il")
    fast = predict_masked(h1, h2, method)
    slow = predict_masked(h1, h2, method, numeric=True)
    assert max(abs(fast[c] - slow[c]) for c in fast) < 1e-8


def test_geometric_mean_prediction(corpus):
    h1, h2, _ = build_heuristics(corpus, "em", "il")
    p = predict_masked(h1, h2, AggregationMethod("asym", HALF_F))
    g = np.sqrt(h1.vector() * h2.vector())
    assert np.allclose(list(p.values()), g / g.sum())


def test_single_word_corpus_is_perfect():
    c = Corpus(("email",))
    acc, evaluated, skipped = evaluate_accuracy(c)
    assert (acc, evaluated, skipped) == (1.0, 1, 0)


def test_holdout_skips_unseen():
    acc, evaluated, skipped = evaluate_accuracy(Corpus(("email",)), holdout=True)
    assert evaluated == 0 and skipped == 1 and np.isnan(acc)


def test_mask_position_validated():
    with pytest.raises(ValidationError):
        evaluate_accuracy(Corpus(("email",)), mask_position=1)
