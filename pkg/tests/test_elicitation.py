import math

import numpy as np
import pytest

from coherence import BRIER, SQUARED, F, closed_form_complement_pair
from coherence.elicitation import (
    DecisivenessKind,
    ProbeCredences,
    decisiveness_term,
    incoherence_term,
    probe_loss,
)
from coherence.errors import ValidationError

PAIR = np.array([[1.0, 0.0], [0.0, 1.0]])


def test_squared_pair_incoherence():
    pc = ProbeCredences([[[0.7], [0.6]]], PAIR)
    assert incoherence_term(pc, SQUARED) == pytest.approx(0.3**2)


def test_equal_coherent_copies():
    pc = ProbeCredences([[[0.3, 0.3], [0.7, 0.7]], [[0.3, 0.3], [0.7, 0.7]]], PAIR)
    assert incoherence_term(pc, F) == pytest.approx(0.0, abs=1e-12)


def test_f_pair_matches_closed_form():
    pc = ProbeCredences([[[0.8], [0.8]]], PAIR)
    assert incoherence_term(pc, F) == pytest.approx(closed_form_complement_pair(0.8, 0.8, F)[1], abs=1e-10)


def test_max_entropy_values():
    kind = DecisivenessKind("max-entropy")
    assert decisiveness_term(np.array([0.5, 0.5]), PAIR, kind) == pytest.approx(math.log(2))
    point = decisiveness_term(np.array([1.0, 0.0]), PAIR, kind)
    assert point == 0.0 and math.copysign(1.0, point) == 1.0
    assert decisiveness_term(np.array([0.5]), np.array([[1.0, 1, 0, 0]]), kind) == pytest.approx(math.log(4))


def test_log_rule_entropy_equals_max_entropy():
    V = np.array([[1.0, 1, 0, 0], [1, 0, 1, 0]])
    p = np.array([0.6, 0.3])
    a = decisiveness_term(p, V, DecisivenessKind("max-entropy"))
    b = decisiveness_term(p, V, DecisivenessKind("scoring-rule-entropy"))
    assert a == pytest.approx(b, abs=1e-9)


def test_brier_entropy_uniform():
    # maximizer is uniform; expected self-penalty sum pi (1 - pi)**2 = 4 * 0.25 * 0.5625
    val = decisiveness_term(np.array([0.5]), np.array([[1.0, 1, 0, 0]]),
                            DecisivenessKind("scoring-rule-entropy", rule=BRIER))
    assert val == pytest.approx(0.5625, abs=1e-8)


def test_distance_kind_is_nonpositive():
    for direction in ("up", "pu"):
        val = decisiveness_term(np.array([0.9, 0.1]), PAIR, DecisivenessKind("distance", direction=direction))
        assert val < 0
        assert decisiveness_term(np.array([0.5, 0.5]), PAIR,
                                 DecisivenessKind("distance", direction=direction)) == pytest.approx(0, abs=1e-9)


def test_legacy_objective():
    pc = ProbeCredences([[[0.7], [0.6]]], PAIR)
    total = probe_loss(pc, SQUARED, DecisivenessKind("legacy"), 1.0)
    assert total == pytest.approx(0.3**2 + 0.6**2)
    decisive = ProbeCredences([[[1.0], [0.0]]], PAIR)
    assert probe_loss(decisive, SQUARED, DecisivenessKind("legacy")) == pytest.approx(0.0)


def test_none_kind_is_incoherence():
    rng = np.random.default_rng(3)
    pc = ProbeCredences(rng.uniform(0.05, 0.95, (2, 2, 3)), PAIR)
    assert probe_loss(pc, F) == incoherence_term(pc, F)


def test_mix_weight_scales():
    pc = ProbeCredences([[[0.7], [0.6]]], PAIR)
    kind = DecisivenessKind("max-entropy")
    base = probe_loss(pc, F, kind, 0.0)
    assert probe_loss(pc, F, kind, 2.0) - base == pytest.approx(2 * (probe_loss(pc, F, kind, 1.0) - base))
    with pytest.raises(ValidationError):
        probe_loss(pc, F, kind, -1.0)


def test_validation():
    with pytest.raises(ValidationError):
        ProbeCredences([[[1.2], [0.1]]], PAIR)
    with pytest.raises(ValidationError):
        ProbeCredences([[[0.2], [0.1], [0.3]]], PAIR)
    with pytest.raises(ValidationError):
        DecisivenessKind("loud")
    with pytest.raises(ValidationError):
        decisiveness_term(np.array([0.5, 0.5]), PAIR, DecisivenessKind("legacy"))
