from itertools import combinations

import numpy as np
import pytest

from grouptest.construction import (
    ConstructionParams,
    adversarial_flip,
    is_disjunct,
    sample_contact_matrix,
    witness_flips,
)
from grouptest.errors import AdversaryBudgetError, GroupTestError, InstanceTooLargeError
from grouptest.model import ContactMatrix, SamplingMatrix, SupportSet, boolean_measure


def test_full_density_gives_all_ones():
    for seed in (0, 1, 99):
        m = sample_contact_matrix(ConstructionParams(rows=70, cols=4, density=1.0, seed=seed))
        assert m.ones() == 280


def test_ones_count_within_three_sigma():
    m = sample_contact_matrix(ConstructionParams(rows=100, cols=100, density=0.5, seed=7))
    assert 4850 <= m.ones() <= 5150


def test_sparse_density_ones_count():
    m = sample_contact_matrix(ConstructionParams(rows=3000, cols=2000, density=0.044, seed=3))
    mean = 3000 * 2000 * 0.044
    sigma = np.sqrt(mean * (1 - 0.044))
    assert abs(m.ones() - mean) < 4 * sigma


def test_same_seed_same_matrix():
    params = ConstructionParams(rows=130, cols=40, density=0.2, seed=11)
    assert sample_contact_matrix(params) == sample_contact_matrix(params)
    assert sample_contact_matrix(params) != sample_contact_matrix(ConstructionParams(130, 40, 0.2, seed=12))


def test_rows_are_roughly_uniform():
    m = sample_contact_matrix(ConstructionParams(rows=128, cols=4000, density=0.1, seed=5))
    per_row = m.to_dense().sum(axis=1)
    assert per_row.min() > 300
    assert per_row.max() < 500


@pytest.mark.parametrize("density", [0.0, 1.5, -0.1])
def test_density_out_of_range(density):
    with pytest.raises(GroupTestError):
        ConstructionParams(rows=3, cols=3, density=density)


def test_from_alpha():
    assert ConstructionParams.from_alpha(10, 20, alpha=0.44, k=10).density == pytest.approx(0.044)


def test_identity_is_disjunct():
    assert is_disjunct(ContactMatrix.identity(3), 2, 0).is_disjunct


def test_example1_is_not_one_disjunct(example1):
    report = is_disjunct(example1, 1, 0)
    assert not report.is_disjunct
    # the first violation in (column, size, lexicographic subset) order
    assert (report.witness.column, report.witness.subset) == (0, (2,))
    assert report.witness.residual == 0


def test_zero_column_is_never_disjunct():
    m = ContactMatrix.from_columns(4, [[0], [], [1, 2], [3]])
    for e in range(3):
        assert not is_disjunct(m, 1, e).is_disjunct
    report = is_disjunct(m, 1, 0)
    assert (report.witness.column, report.witness.subset) == (1, ())


def test_stacked_identity_tolerates_one_error():
    m = ContactMatrix.from_dense(np.vstack([np.eye(5), np.eye(5)]).astype(bool))
    assert is_disjunct(m, 2, 1).is_disjunct
    assert not is_disjunct(m, 2, 2).is_disjunct


def test_size_guard():
    m = ContactMatrix.identity(30)
    with pytest.raises(InstanceTooLargeError):
        is_disjunct(m, 1, 0)
    assert is_disjunct(m, 1, 0, force=True).is_disjunct
    assert is_disjunct(m, 1, 0, max_cols=40).is_disjunct


def test_k_must_be_below_n():
    with pytest.raises(GroupTestError):
        is_disjunct(ContactMatrix.identity(3), 3, 0)


def test_flip_reduces_weights_by_flip_sizes(rng):
    m = ContactMatrix.from_dense(rng.random((20, 6)) < 0.5)
    flips = {}
    for col in range(6):
        support = m.column_support(col)
        flips[col] = support[: min(2, len(support))]
    s = adversarial_flip(m, flips, 2)
    assert isinstance(s, SamplingMatrix)
    expected = m.column_weights() - np.array([len(flips[c]) for c in range(6)])
    assert s.column_weights().tolist() == expected.tolist()


def test_flip_budget_and_support_are_enforced(example1):
    with pytest.raises(AdversaryBudgetError):
        adversarial_flip(example1, {1: [1, 2]}, 1)
    with pytest.raises(AdversaryBudgetError):
        adversarial_flip(example1, {0: [1]}, 1)


def test_witness_flips_make_outcomes_collide(example1):
    report = is_disjunct(example1, 2, 1)
    assert not report.is_disjunct
    w = report.witness
    s = adversarial_flip(example1, witness_flips(example1, report), 1)
    base = SupportSet.of(w.subset, 6)
    grown = SupportSet.of(w.subset + (w.column,), 6)
    assert boolean_measure(s, base) == boolean_measure(s, grown)


def test_witness_flips_refused_for_disjunct_matrix():
    m = ContactMatrix.identity(3)
    with pytest.raises(GroupTestError):
        witness_flips(m, is_disjunct(m, 1, 0))


def _brute_force_disjunct(m: ContactMatrix, k: int, e: int) -> bool:
    d = m.to_dense()
    for i in range(m.cols):
        others = [j for j in range(m.cols) if j != i]
        for size in range(k + 1):
            for subset in combinations(others, size):
                covered = d[:, list(subset)].any(axis=1) if subset else np.zeros(m.rows, dtype=bool)
                if int((d[:, i] & ~covered).sum()) <= e:
                    return False
    return True


def test_agrees_with_dense_brute_force(rng):
    for _ in range(30):
        m = ContactMatrix.from_dense(rng.random((9, 7)) < 0.35)
        for k, e in [(1, 0), (2, 0), (1, 1), (2, 1)]:
            assert is_disjunct(m, k, e).is_disjunct == _brute_force_disjunct(m, k, e)
