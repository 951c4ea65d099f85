"""Core lattice model: measure validation, vector norms, module action."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bklab.errors import (
    IndexOutOfRangeError,
    InvalidPError,
    NonPositiveEntryError,
    ShapeMismatchError,
)
from bklab.lattice import (
    BaseSpace,
    BooleanAtoms,
    PartitionOfUnity,
    VectorMeasure,
    absolute,
    indicator_mul,
    join,
    leq,
    meet,
    module_mul,
    refinement_chain,
    validate_measure,
    vec_norm,
)
from conftest import random_model, uniform_model

ALL_PS = (1.0, 1.5, 2.0, 3.0, math.inf)


def test_validate_measure_accepts_positive():
    base, atoms = BaseSpace(np.ones(2)), BooleanAtoms(2)
    validate_measure(VectorMeasure(np.array([[1.0, 1.0], [1.0, 1.0]])), base, atoms)
    validate_measure(VectorMeasure(np.array([[0.5, 1.5], [2.0, 0.25]])), base, atoms)


def test_validate_measure_rejects_null_atom():
    base, atoms = BaseSpace(np.ones(2)), BooleanAtoms(2)
    with pytest.raises(NonPositiveEntryError) as exc:
        validate_measure(VectorMeasure(np.array([[1.0, 0.0], [1.0, 1.0]])), base, atoms)
    assert (exc.value.k, exc.value.j) == (0, 1)
    with pytest.raises(ShapeMismatchError):
        validate_measure(VectorMeasure(np.ones((3, 2))), base, atoms)
    with pytest.raises(NonPositiveEntryError):
        validate_measure(VectorMeasure(np.array([[1.0, math.inf]])), BaseSpace(np.ones(1)), atoms)


def test_measure_of_element_is_additive():
    m = VectorMeasure(np.array([[1.0, 2.0, 4.0], [0.5, 0.5, 0.5]]))
    np.testing.assert_array_equal(m.of({0, 2}), [5.0, 1.0])
    np.testing.assert_array_equal(m.of({0}) + m.of({2}), m.of({0, 2}))
    assert m.of(set(), k=0) == 0.0


def test_vec_norm_three_four_five():
    m = uniform_model(1, 2)
    np.testing.assert_allclose(vec_norm(np.array([[3.0, 4.0]]), 2.0, m.measure), [5.0])


def test_vec_norm_zero_section():
    m = uniform_model(2, 3)
    for p in ALL_PS:
        np.testing.assert_array_equal(vec_norm(np.zeros((2, 3)), p, m.measure), [0.0, 0.0])


def test_vec_norm_p1_row_measure_mass():
    meas = VectorMeasure(np.array([[1.0, 1.0], [2.0, 2.0]]))
    got = vec_norm(np.ones((2, 2)), 1.0, meas)
    np.testing.assert_allclose(got, [2.0, 4.0])


def test_vec_norm_sup_ignores_measure():
    meas = VectorMeasure(np.array([[0.1, 7.0]]))
    np.testing.assert_array_equal(vec_norm(np.array([[-3.0, 2.0]]), math.inf, meas), [3.0])


def test_vec_norm_rejects_bad_p_and_shape():
    m = uniform_model(1, 2)
    with pytest.raises(InvalidPError):
        vec_norm(np.ones((1, 2)), 0.5, m.measure)
    with pytest.raises(ShapeMismatchError):
        vec_norm(np.ones((2, 2)), 1.0, m.measure)


def test_module_mul_identity_and_idempotent():
    F = np.array([[1.0, -2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(module_mul(np.ones(2), F), F)
    zeroed = module_mul(np.array([0.0, 1.0]), F)
    np.testing.assert_array_equal(zeroed[0], [0.0, 0.0])
    np.testing.assert_array_equal(zeroed[1], F[1])


def test_module_mul_scales_norms():
    m = uniform_model(2, 2)
    F = np.eye(2)
    alpha = np.array([2.0, 3.0])
    np.testing.assert_allclose(vec_norm(F, 1.0, m.measure), [1.0, 1.0])
    np.testing.assert_allclose(vec_norm(module_mul(alpha, F), 1.0, m.measure), [2.0, 3.0])


def test_lattice_ops():
    np.testing.assert_array_equal(absolute(np.array([[-1.0, 2.0]])), [[1.0, 2.0]])
    F = np.array([[1.0, -5.0]])
    np.testing.assert_array_equal(join(F, F), F)
    np.testing.assert_array_equal(meet(F, absolute(F)), F)
    G = np.array([[1.0, 1.0]])
    H = np.array([[1.0, 0.0]])
    assert leq(H, G) and not leq(G, H)
    m = uniform_model(1, 2)
    assert np.all(vec_norm(H, 1.0, m.measure) <= vec_norm(G, 1.0, m.measure))


def test_indicator_mul():
    F = np.array([[5.0, 7.0]])
    np.testing.assert_array_equal(indicator_mul({0, 1}, F), F)
    np.testing.assert_array_equal(indicator_mul(set(), F), [[0.0, 0.0]])
    np.testing.assert_array_equal(indicator_mul({0}, F), [[5.0, 0.0]])
    with pytest.raises(IndexOutOfRangeError):
        indicator_mul({2}, F)


def test_partition_validation():
    PartitionOfUnity(((0, 1), (2,)), 3)
    with pytest.raises(ShapeMismatchError):
        PartitionOfUnity(((0, 1), (1, 2)), 3)  # overlap
    with pytest.raises(ShapeMismatchError):
        PartitionOfUnity(((0,), (2,)), 3)  # gap
    with pytest.raises(ShapeMismatchError):
        PartitionOfUnity(((0,), ()), 1)  # empty block


def test_partition_refinement_predicate():
    coarse = PartitionOfUnity(((0, 1, 2),), 3)
    fine = PartitionOfUnity(((0,), (1,), (2,)), 3)
    mixed = PartitionOfUnity(((0, 1), (2,)), 3)
    assert fine.refines(coarse) and mixed.refines(coarse) and fine.refines(mixed)
    assert not coarse.refines(fine)
    assert not mixed.refines(PartitionOfUnity(((0, 2), (1,)), 3))


@pytest.mark.parametrize("n,length", [(1, 1), (2, 2), (4, 4), (7, 7)])
def test_refinement_chain(n, length):
    chain = refinement_chain(BooleanAtoms(n))
    assert len(chain) == length
    assert len(chain[0]) == 1 and len(chain[-1]) == n
    for prev, cur in zip(chain, chain[1:]):
        assert cur.refines(prev)
        assert len(cur) == len(prev) + 1  # exactly one block split per step


def test_norm_nesting_under_unit_mass(rng):
    model = random_model(rng, 3, 5, normalize=True)
    F = rng.standard_normal((3, 5)) * 2.0
    values = [vec_norm(F, p, model.measure) for p in sorted(ALL_PS)]
    for lo, hi in zip(values, values[1:]):
        assert np.all(lo <= hi + 1e-12 * (1.0 + hi))


def test_order_continuity(rng):
    model = random_model(rng, 2, 4)
    F = np.abs(rng.standard_normal((2, 4))) + 0.5
    for p in ALL_PS:
        first = vec_norm(F, p, model.measure)
        prev = first
        for _ in range(80):
            F = F / 2.0
            cur = vec_norm(F, p, model.measure)
            assert np.all(cur <= prev)
            prev = cur
        assert np.all(prev <= 1e-15 * first)


@st.composite
def _sections(draw):
    k = draw(st.integers(1, 4))
    n = draw(st.integers(1, 5))
    elems = st.floats(-100.0, 100.0, allow_nan=False)
    F = draw(st.lists(st.lists(elems, min_size=n, max_size=n), min_size=k, max_size=k))
    return np.array(F)


@settings(max_examples=60, deadline=None)
@given(_sections(), st.sampled_from(ALL_PS), st.integers(0, 2 ** 31 - 1))
def test_norm_monotone_in_modulus(F, p, seed):
    rng = np.random.default_rng(seed)
    measure = VectorMeasure(rng.uniform(0.2, 2.0, F.shape))
    bump = rng.uniform(0.0, 1.0, F.shape)
    G = np.sign(rng.standard_normal(F.shape)) * (np.abs(F) + bump)
    assert leq(absolute(F), absolute(G))
    assert np.all(vec_norm(F, p, measure) <= vec_norm(G, p, measure))


@settings(max_examples=60, deadline=None)
@given(_sections(), st.sampled_from(ALL_PS), st.integers(0, 2 ** 31 - 1))
def test_norm_homogeneity(F, p, seed):
    rng = np.random.default_rng(seed)
    measure = VectorMeasure(rng.uniform(0.2, 2.0, F.shape))
    alpha = rng.standard_normal(F.shape[0]) * rng.choice([0.0, 1.0, 1.0], F.shape[0])
    lhs = vec_norm(module_mul(alpha, F), p, measure)
    rhs = np.abs(alpha) * vec_norm(F, p, measure)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(_sections(), st.integers(0, 2 ** 31 - 1))
def test_indicator_partition_reassembles(F, seed):
    rng = np.random.default_rng(seed)
    n = F.shape[1]
    perm = rng.permutation(n)
    cut = int(rng.integers(1, n + 1))
    blocks = [tuple(int(j) for j in perm[:cut])]
    if cut < n:
        blocks.append(tuple(int(j) for j in perm[cut:]))
    total = np.zeros_like(F)
    for b in blocks:
        total += indicator_mul(b, F)
    np.testing.assert_array_equal(total, F)


def test_norm_faithfulness(rng):
    model = random_model(rng, 4, 5)
    F = rng.standard_normal((4, 5))
    F[1] = 0.0
    for p in ALL_PS:
        v = vec_norm(F, p, model.measure)
        assert v[1] == 0.0
        assert np.all(v[[0, 2, 3]] > 0.0)


def test_base_space_and_atoms_validation():
    with pytest.raises(NonPositiveEntryError):
        BaseSpace(np.array([1.0, 0.0]))
    with pytest.raises(ShapeMismatchError):
        BaseSpace(np.ones((2, 2)))
    with pytest.raises(ShapeMismatchError):
        BooleanAtoms(0)
    assert BooleanAtoms(3).unit == frozenset({0, 1, 2})
