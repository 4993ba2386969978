import numpy as np
import pytest

from coherence import FO, HALF_F, HALF_FO, F, from_matrix
from coherence.aggregation import (
    AggregationMethod,
    ExpertReport,
    aggregate,
    comparison_rows,
    disagreement,
    exact_covers,
    inferable_set,
    joint_space,
    positive_basis,
)
from coherence.dissimilarity import evaluate
from coherence.errors import IncoherentBaseError, SizeLimitError, ValidationError

LABELS = ["w1", "w2", "w3", "w4"]
FIRST = ExpertReport(from_matrix([[1, 1, 0, 0], [1, 1, 1, 0]], [0.5, 0.9], labels=LABELS), "first")
SECOND = ExpertReport(from_matrix([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]], [0.3, 0.2, 0.6], labels=LABELS),
                      "second")


def test_inferable_set_of_nested_expert():
    I = inferable_set(FIRST)
    # atoms {w1 w2}, {w3}, {w4}: every union of blocks
    assert I.shape == (8, 3)
    assert sorted(map(tuple, I.astype(int))) == sorted(
        (a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1))


def test_inferable_set_full():
    assert inferable_set(SECOND).shape == (16, 4)


def test_inferable_partition():
    expert = ExpertReport(from_matrix([[1, 1, 0], [0, 0, 1]], [0.4, 0.6]))
    assert inferable_set(expert).tolist() == [[1, 1], [1, 0], [0, 1], [0, 0]]


def test_positive_basis():
    assert FIRST.basis.tolist() == np.eye(3).tolist()
    assert SECOND.basis.tolist() == np.eye(4).tolist()
    B = positive_basis([[1, 1, 1], [1, 1, 0], [0, 0, 1], [0, 0, 0]])
    assert B.tolist() == [[1, 1, 0], [0, 0, 1]]


def test_exact_covers():
    assert exact_covers(np.eye(4)) == [(0, 1, 2, 3)]
    assert exact_covers([[1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]) == [(0, 1, 2)]
    assert exact_covers([[1, 0], [0, 1], [1, 1]]) == [(0, 1), (2,)]
    with pytest.raises(SizeLimitError):
        exact_covers(np.vstack([np.eye(6), np.ones((1, 6))]), node_budget=3)


def test_method_validation():
    with pytest.raises(ValidationError):
        AggregationMethod("asym", F)
    with pytest.raises(ValidationError):
        AggregationMethod("basis", HALF_F)
    with pytest.raises(ValidationError):
        AggregationMethod("everything", F)
    assert AggregationMethod("stated").normalize is False
    assert AggregationMethod("basis").normalize is True


def test_incoherent_expert_rejected():
    with pytest.raises(IncoherentBaseError):
        ExpertReport(from_matrix([[1, 0], [1, 0]], [0.1, 0.3]))


def test_agreement_costs_nothing():
    pi = np.array([0.2, 0.1, 0.1, 0.6])  # the only belief consistent with the second expert
    for method in (AggregationMethod("basis", F), AggregationMethod("asym", HALF_F),
                   AggregationMethod("full-i", FO), AggregationMethod("stated", F)):
        assert disagreement(SECOND, pi, method) == pytest.approx(0.0, abs=1e-12)


def test_uniform_basis_disagreement():
    Q = [0.2, 0.1, 0.1, 0.6]
    want = sum(evaluate(F, 0.25, q) for q in Q) / 4
    assert disagreement(SECOND, np.full(4, 0.25), AggregationMethod("basis", F)) == pytest.approx(want)


def test_comparison_rows_asym_weights():
    A, t, w = comparison_rows(FIRST, AggregationMethod("asym", HALF_FO))
    assert A.tolist() == np.eye(3).tolist()
    assert np.allclose(t, [0.5, 0.4, 0.1])
    assert np.allclose(w, 1 / 3)


def test_joint_space_refines():
    atoms, lifts, atom_of, outcomes = joint_space([FIRST, SECOND])
    assert len(atoms) == 4
    assert lifts[0].shape == (3, 4) and lifts[1].shape == (4, 4)
    assert np.allclose(lifts[0].sum(axis=0), 1)


def test_zero_atom_only_for_stated():
    stated = aggregate([FIRST, SECOND], AggregationMethod("stated", F))
    basis = aggregate([FIRST, SECOND], AggregationMethod("basis", F))
    w2 = stated.atoms.labels.index("w2")
    assert stated.pi_star[w2] <= 1e-6
    assert basis.pi_star[w2] >= 0.01
    assert stated.belief({"w1", "w2"}) == pytest.approx(0.43, abs=0.01)
    assert basis.total == pytest.approx(sum(basis.disagreements))


def test_mismatched_outcomes():
    other = ExpertReport(from_matrix([[1, 0]], [0.5], labels=["x", "y"]))
    with pytest.raises(ValidationError):
        aggregate([FIRST, other], AggregationMethod("basis", F))
    with pytest.raises(ValidationError):
        aggregate([], AggregationMethod("basis", F))


def test_single_expert_reproduces_its_beliefs():
    for method in (AggregationMethod("basis", F), AggregationMethod("full-i", FO),
                   AggregationMethod("asym", HALF_F)):
        res = aggregate([SECOND], method)
        assert np.allclose(res.pi_star, [0.2, 0.1, 0.1, 0.6], atol=1e-6)
