import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherence.credence import (
    AtomSpace,
    CredenceBase,
    build_base,
    coherence_check,
    from_matrix,
    implied_belief,
    implied_beliefs,
    inconsistent_dependency,
    independent_rows,
    reduce_full_rank,
)
from coherence.errors import IncoherentBaseError, NotInferableError, ValidationError
from coherence.linalg import in_row_span, null_vector, rank, rref

WEATHER = ["wr", "w", "r", "neither"]


def test_named_events_build_matrix():
    base = build_base([("warm", {"wr", "w"}), ("rainy", {"wr", "r"}), ("both", {"wr"})],
                      [0.5, 0.6, 0.3], outcomes=WEATHER)
    assert base.V.tolist() == [[1, 1, 0, 0], [1, 0, 1, 0], [1, 0, 0, 0]]
    assert base.names == ("warm", "rainy", "both")


def test_indistinguishable_outcomes_merge():
    base = build_base([("rock", {"rock"})], [0.3], outcomes=["rock", "paper", "scissors"])
    assert base.V.tolist() == [[1, 0]]
    assert base.atoms.labels == ("rock", "paper|scissors")
    assert base.outcome_vector({"paper", "scissors"}).tolist() == [0, 1]
    with pytest.raises(ValidationError):
        base.outcome_vector({"paper"})


def test_duplicate_rows_preserved():
    base = from_matrix([[1, 0], [1, 0]], [0.1, 0.3])
    assert base.n == 2 and base.N == 2


@pytest.mark.parametrize("kwargs", [
    dict(V=[[1, 2]], q=[0.5]),
    dict(V=[[1, 0]], q=[1.5]),
    dict(V=[[1, 0]], q=[0.5, 0.5]),
    dict(V=[[1, 0]], q=[np.nan]),
    dict(V=[[1, 0]], q=[0.5], weights=[0.0]),
])
def test_invalid_bases(kwargs):
    with pytest.raises(ValidationError):
        from_matrix(**kwargs)


def test_base_is_immutable():
    base = from_matrix([[1, 0]], [0.5])
    with pytest.raises(ValueError):
        base.q[0] = 0.1


def test_unknown_outcome_rejected():
    with pytest.raises(ValidationError):
        build_base([("x", {"z"})], [0.5], outcomes=["a", "b"])


def test_reduce_partition_consistent():
    reduced, status = reduce_full_rank(from_matrix(np.eye(3), [0.2, 0.3, 0.5]))
    assert status == "consistent"
    assert reduced.n == 2


def test_reduce_partition_inconsistent():
    base = from_matrix(np.eye(3), [0.2, 0.3, 0.6])
    _, status = reduce_full_rank(base)
    assert status == "inconsistent"
    a = inconsistent_dependency(base)
    assert np.allclose(base.Vbar.T @ a, 0)
    assert abs(a @ base.qbar) > 1e-9


def test_reduce_full_rank_unchanged():
    base = from_matrix([[1, 1, 0, 0], [1, 1, 1, 0]], [0.5, 0.9])
    reduced, status = reduce_full_rank(base)
    assert status == "consistent"
    assert np.array_equal(reduced.V, base.V)
    assert independent_rows(base) == [0, 1]


def test_coherence_examples():
    assert coherence_check(from_matrix([[1, 1, 0, 0], [1, 1, 1, 0]], [0.5, 0.9])).coherent
    verdict = coherence_check(from_matrix([[1, 0], [1, 0]], [0.1, 0.3]))
    assert not verdict.coherent
    # squared-loss incoherence of two estimates of one event: 2 * 2 * 0.1**2
    assert verdict.residual == pytest.approx(0.04, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_constructed_witness_is_coherent(n, N, seed):
    rng = np.random.default_rng(seed)
    V = (rng.random((n, N)) < 0.5).astype(float)
    pi = rng.dirichlet(np.ones(N))
    base = from_matrix(V, np.clip(V @ pi, 0, 1))
    verdict = coherence_check(base)
    assert verdict.coherent
    assert np.allclose(base.V @ verdict.witness, base.q, atol=1e-7)
    assert verdict.witness.sum() == pytest.approx(1.0)


def test_implied_beliefs():
    base = from_matrix([[1, 1, 0, 0], [1, 1, 1, 0]], [0.5, 0.9])
    # identical outcome columns share an atom: {w1, w2}, {w3}, {w4}
    assert base.N == 3
    ev = base.outcome_vector
    assert implied_belief(base, ev({"w3"})) == pytest.approx(0.4)
    assert implied_belief(base, ev({"w4"})) == pytest.approx(0.1)
    assert implied_belief(base, ev({"w1", "w2"})) == pytest.approx(0.5)
    assert np.allclose(implied_beliefs(base, [ev({"w3"}), np.ones(3)]), [0.4, 1.0])
    split = from_matrix([[1, 0, 1, 0], [0, 1, 1, 0]], [0.5, 0.5])
    with pytest.raises(NotInferableError):
        implied_belief(split, [1, 0, 0, 0])
    with pytest.raises(IncoherentBaseError):
        implied_belief(from_matrix([[1, 0], [1, 0]], [0.1, 0.3]), [1, 0])


def test_rref_examples():
    assert np.array_equal(rref(np.eye(3)), np.eye(3))
    _, piv = rref([[1, 1, 0, 0], [1, 1, 1, 0], [1, 1, 1, 1]], return_pivots=True)
    assert [p + 1 for p in piv] == [1, 3, 4]
    R = rref([[1, 0, 1], [1, 0, 1]])
    assert not R[1].any()
    assert rank([[1, 0, 1], [1, 0, 1]]) == 1


def test_row_span_and_null_vector():
    M = np.array([[1.0, 1, 0], [0, 1, 1]])
    ok, coef = in_row_span([1, 2, 1], M)
    assert ok and np.allclose(coef @ M, [1, 2, 1])
    assert not in_row_span([1, 0, 0], M)[0]
    v = null_vector(M)
    assert np.allclose(M @ v, 0) and np.linalg.norm(v) == pytest.approx(1)


def test_atom_space_labels_unique():
    with pytest.raises(ValidationError):
        AtomSpace(("a", "a"))
    with pytest.raises(ValidationError):
        CredenceBase(AtomSpace(("a", "b")), [[1, 0, 0]], [0.5])
