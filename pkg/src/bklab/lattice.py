"""Finite-atom model of a lattice-normed L_p space.

The base space Omega has K atoms with strictly positive weights, the
Boolean algebra has N atoms, and the vector measure is a strictly
positive K x N matrix ``M`` with ``M[k, j]`` the mass of atom j seen at
base point k.  Elements of the lattice are *sections*: K x N float
arrays whose row k is the fiber element over base atom k.  Scalars of
the function ring over Omega are plain length-K float vectors.  Both
are passed around as bare ``numpy`` arrays; shape agreement is checked
at every operation boundary.

With every measure entry strictly positive, "almost everywhere" means
"everywhere" and every fiber space is a genuine N-dimensional weighted
L_p space, so the vector norm of a section is just the row-wise
weighted p-norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    InvalidPError,
    NonPositiveEntryError,
    ShapeMismatchError,
)

__all__ = [
    "BaseSpace",
    "BooleanAtoms",
    "VectorMeasure",
    "Model",
    "PartitionOfUnity",
    "validate_measure",
    "vec_norm",
    "module_mul",
    "absolute",
    "join",
    "meet",
    "leq",
    "indicator_mul",
    "refinement_chain",
]


@dataclass(frozen=True)
class BaseSpace:
    """The K atoms of the base space; weights are metadata only.

    The weights never enter any norm or measure formula (only the
    null-set structure of the base matters, and with all weights
    positive there are no null sets); they are carried for model files.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ShapeMismatchError("weights must be a nonempty vector")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise NonPositiveEntryError(int(np.argmin(w)), -1, float(w.min()))
        object.__setattr__(self, "weights", w)

    @property
    def atom_count(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class BooleanAtoms:
    """The N atoms of the Boolean algebra; an element is a subset of range(N)."""

    atom_count: int

    def __post_init__(self):
        if self.atom_count < 1:
            raise ShapeMismatchError("atom_count must be >= 1")

    @property
    def unit(self) -> frozenset[int]:
        return frozenset(range(self.atom_count))


@dataclass(frozen=True)
class VectorMeasure:
    """K x N strictly positive matrix: matrix[k, j] = mass of atom j at base atom k.

    The measure of a Boolean element e (a set of atom indices) at base
    atom k is ``matrix[k, list(e)].sum()``, so additivity over disjoint
    elements holds by construction.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ShapeMismatchError("measure matrix must be 2-D")
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def of(self, e, k: int | None = None) -> np.ndarray | float:
        """Measure of Boolean element ``e``; vector over base atoms, or one entry."""
        cols = sorted(e)
        v = self.matrix[:, cols].sum(axis=1) if cols else np.zeros(self.matrix.shape[0])
        return v if k is None else float(v[k])


@dataclass(frozen=True)
class Model:
    """A base space, Boolean atoms, and a validated vector measure."""

    base: BaseSpace
    atoms: BooleanAtoms
    measure: VectorMeasure

    def __post_init__(self):
        validate_measure(self.measure, self.base, self.atoms)

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.atom_count, self.atoms.atom_count


def validate_measure(measure: VectorMeasure, base: BaseSpace, atoms: BooleanAtoms) -> None:
    """Check strict positivity and shape of a vector measure.

    Additivity and order continuity hold automatically in the
    finite-atom model and are not re-checked.  Raises
    ``ShapeMismatchError`` or ``NonPositiveEntryError`` (first offending
    entry in row-major order).
    """
    m = measure.matrix
    expected = (base.atom_count, atoms.atom_count)
    if m.shape != expected:
        raise ShapeMismatchError(f"measure has shape {m.shape}, model needs {expected}")
    bad = ~(np.isfinite(m) & (m > 0.0))
    if bad.any():
        k, j = np.argwhere(bad)[0]
        raise NonPositiveEntryError(int(k), int(j), float(m[k, j]))


def _check_section(F: np.ndarray, like: tuple[int, int] | None = None) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise ShapeMismatchError("a section must be a K x N matrix")
    if like is not None and F.shape != like:
        raise ShapeMismatchError(f"section shape {F.shape} != expected {like}")
    return F


def vec_norm(F: np.ndarray, p: float, measure: VectorMeasure) -> np.ndarray:
    """Vector-valued norm of a section: row k -> weighted p-norm of fiber k.

    For finite p the entry at base atom k is
    ``(sum_j |F[k,j]|**p * M[k,j]) ** (1/p)``; for p = inf it is
    ``max_j |F[k,j]|`` (every atom has positive mass, so the measure
    does not enter the sup norm).  Entries are >= 0 and vanish exactly
    when the fiber row is zero.
    """
    if not (p >= 1.0):
        raise InvalidPError(f"p must be >= 1 or inf, got {p}")
    F = _check_section(F, measure.shape)
    a = np.abs(F)
    if math.isinf(p):
        return a.max(axis=1)
    return (a ** p * measure.matrix).sum(axis=1) ** (1.0 / p)


def module_mul(alpha: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Module action of the base function ring: scale fiber k by alpha[k]."""
    F = _check_section(F)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (F.shape[0],):
        raise ShapeMismatchError(f"scalar has shape {alpha.shape}, sections have {F.shape[0]} fibers")
    return alpha[:, None] * F


def absolute(F: np.ndarray) -> np.ndarray:
    """Entrywise lattice modulus |F|."""
    return np.abs(_check_section(F))


def join(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    F = _check_section(F)
    return np.maximum(F, _check_section(G, F.shape))


def meet(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    F = _check_section(F)
    return np.minimum(F, _check_section(G, F.shape))


def leq(F: np.ndarray, G: np.ndarray) -> bool:
    """Entrywise order F <= G."""
    F = _check_section(F)
    return bool(np.all(F <= _check_section(G, F.shape)))


def indicator_mul(e, F: np.ndarray) -> np.ndarray:
    """Multiply by the indicator of Boolean element ``e``: keep columns in e, zero the rest."""
    F = _check_section(F)
    n = F.shape[1]
    cols = sorted(set(e))
    if cols and (cols[0] < 0 or cols[-1] >= n):
        raise IndexOutOfRangeError(f"atom indices {cols} outside range(0, {n})")
    out = np.zeros_like(F)
    if cols:
        out[:, cols] = F[:, cols]
    return out


@dataclass(frozen=True)
class PartitionOfUnity:
    """Disjoint nonempty blocks of atom indices covering range(N)."""

    blocks: tuple[tuple[int, ...], ...]
    atom_count: int = field(default=0)

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        if not blocks:
            raise ShapeMismatchError("a partition needs at least one block")
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ShapeMismatchError("partition blocks must be nonempty")
            if seen & set(b):
                raise ShapeMismatchError("partition blocks must be disjoint")
            seen |= set(b)
        n = self.atom_count or (max(seen) + 1)
        if seen != set(range(n)):
            raise ShapeMismatchError(f"blocks must cover range(0, {n})")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "atom_count", n)

    def refines(self, coarser: "PartitionOfUnity") -> bool:
        """True if every block of ``coarser`` is a union of blocks of self."""
        if self.atom_count != coarser.atom_count:
            return False
        owner = {}
        for i, b in enumerate(coarser.blocks):
            for j in b:
                owner[j] = i
        return all(len({owner[j] for j in b}) == 1 for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)


def refinement_chain(atoms: BooleanAtoms) -> list[PartitionOfUnity]:
    """Monotone chain from the trivial partition to the atomic one.

    Step i splits the single coarse block by peeling off atom i, so the
    chain has N entries and N-1 refinement steps; each entry refines the
    previous one.
    """
    n = atoms.atom_count
    chain = []
    for i in range(n):
        blocks = [(j,) for j in range(i)]
        blocks.append(tuple(range(i, n)))
        chain.append(PartitionOfUnity(tuple(blocks), n))
    return chain
