import numpy as np
import pytest

from bklab.lattice import BaseSpace, BooleanAtoms, Model, VectorMeasure


def uniform_model(k_count: int, n_atoms: int) -> Model:
    return Model(BaseSpace(np.ones(k_count)), BooleanAtoms(n_atoms),
                 VectorMeasure(np.ones((k_count, n_atoms))))


def random_model(rng, k_count: int, n_atoms: int, normalize: bool = False) -> Model:
    weights = rng.uniform(0.5, 1.5, k_count)
    measure = rng.uniform(0.2, 2.0, (k_count, n_atoms))
    if normalize:
        measure = measure / measure.sum(axis=1, keepdims=True)
    return Model(BaseSpace(weights), BooleanAtoms(n_atoms), VectorMeasure(measure))


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
