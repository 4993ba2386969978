import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherence import from_matrix
from coherence.dissimilarity import (
    BRIER,
    EXACT,
    FO,
    HALF_F,
    HALF_FO,
    LOG,
    SQUARED,
    DissimilaritySpec,
    F,
    ScoringRule,
    ell_from_scoring,
    evaluate,
    is_proper,
    score_forecast,
)
from coherence.errors import NotProperError, ValidationError

GRID = np.arange(1, 100) / 100.0
unit = st.floats(0.0, 1.0)


def test_values():
    assert evaluate(F, 0.5, 0.5) == 0.0
    assert evaluate(F, 1.0, 0.5) == pytest.approx(math.log(2))
    assert evaluate(SQUARED, 0.7, 0.2) == pytest.approx(0.5)
    assert evaluate(FO, 0.3, 0.6) == pytest.approx(evaluate(F, 0.6, 0.3))
    assert evaluate(F, 0.5, 0.0) == math.inf
    assert evaluate(F, 0.0, 0.0) == 0.0
    assert evaluate(EXACT, 0.3, 0.3) == 0.0 and evaluate(EXACT, 0.3, 0.4) == math.inf
    assert evaluate(HALF_F, 0.2, 0.4) == pytest.approx(0.2 * math.log(0.5))
    assert evaluate(HALF_FO, 0.2, 0.4) == pytest.approx(0.4 * math.log(2))


def test_log_and_brier_derive_f_and_squared_difference():
    log_spec, brier_spec = ell_from_scoring(LOG), ell_from_scoring(BRIER)
    generic_log = DissimilaritySpec("scoring", ScoringRule("log-copy", LOG.penalty))
    for p in GRID:
        for q in GRID:
            assert evaluate(log_spec, p, q) == pytest.approx(evaluate(F, p, q), abs=1e-12)
            assert evaluate(generic_log, p, q) == pytest.approx(evaluate(F, p, q), abs=1e-12)
            assert evaluate(brier_spec, p, q) == pytest.approx((p - q) ** 2, abs=1e-12)


@given(unit)
def test_zero_on_diagonal(p):
    for spec in (F, FO, SQUARED, ell_from_scoring(BRIER)):
        assert evaluate(spec, p, p) == 0.0


@given(unit, unit)
def test_nonnegative(p, q):
    for spec in (F, FO, SQUARED):
        assert evaluate(spec, p, q) >= 0.0


def test_properness():
    assert is_proper(LOG) and is_proper(BRIER)
    linear = ScoringRule("linear", lambda i, q: abs(i - q))
    assert not is_proper(linear)
    with pytest.raises(NotProperError):
        ell_from_scoring(linear)


def test_half_kinds_are_not_dissimilarities():
    assert not HALF_F.is_dissimilarity
    assert F.is_dissimilarity


@pytest.mark.parametrize("spec", [F, FO, SQUARED, ell_from_scoring(BRIER)])
def test_derivatives_match_differences(spec):
    h = 1e-6
    for p, q in [(0.2, 0.7), (0.5, 0.4), (0.9, 0.1)]:
        assert spec.dp(p, q) == pytest.approx((evaluate(spec, p + h, q) - evaluate(spec, p - h, q)) / (2 * h),
                                              rel=1e-5)
        assert spec.dq(p, q) == pytest.approx((evaluate(spec, p, q + h) - evaluate(spec, p, q - h)) / (2 * h),
                                              rel=1e-5)


def test_bad_inputs():
    with pytest.raises(ValidationError):
        DissimilaritySpec("nope")
    with pytest.raises(ValidationError):
        DissimilaritySpec("scoring")
    with pytest.raises(ValidationError):
        evaluate(F, 1.2, 0.5)


def test_score_forecast():
    perfect = from_matrix([[1, 0], [0, 1]], [1.0, 0.0])
    assert score_forecast(perfect, LOG, 0).total == 0.0
    half = from_matrix([[1, 0]], [0.5])
    assert score_forecast(half, LOG, 0).total == pytest.approx(math.log(2))
    assert score_forecast(half, LOG, 1).total == pytest.approx(math.log(2))
    with pytest.raises(ValidationError):
        score_forecast(half, LOG, 2)
