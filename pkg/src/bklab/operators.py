"""Operators on the finite-atom lattice, in bundle representation.

An operator is a family of K real N x N matrices, one per base atom;
fiber k acts on fiber k of a section and never mixes fibers, which is
exactly module-linearity over the base function ring.  ``apply`` loops
over fibers with one matrix-vector product each, so the "global" action
and the per-fiber action are the same arithmetic, bit for bit.

The operator modulus is built two ways on purpose:

* ``modulus_net`` walks a refinement chain of partitions of the Boolean
  atoms, summing ``|T(indicator * f)|`` over blocks.  The partial sums
  increase with refinement and stabilize at the atomic partition, where
  probing with the coordinate basis sections recovers the modulus
  column by column.
* ``modulus_direct`` takes entrywise absolute values of every fiber.

Their exact agreement is asserted by the test suite, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import norms
from .errors import (
    InfeasibleScalingError,
    InvariantViolationError,
    NegativeInputError,
    NotPositiveError,
    ShapeMismatchError,
    UsageError,
)
from .lattice import (
    BaseSpace,
    BooleanAtoms,
    PartitionOfUnity,
    VectorMeasure,
    indicator_mul,
    refinement_chain,
    validate_measure,
)

__all__ = [
    "FiberedOperator",
    "ModulusReport",
    "MajorantCounterexample",
    "apply",
    "power",
    "compose",
    "partition_step",
    "modulus_net",
    "modulus_direct",
    "majorant_check",
    "gen_contraction",
    "GEN_MODES",
    "CHECK_PS",
]

# every generated contraction is verified at these exponents
CHECK_PS = (1.0, 1.5, 2.0, 3.0, float("inf"))

GEN_MODES = ("positive-strict", "permutation", "signed", "custom")

_ROW_SLACK = 1e-12


@dataclass(frozen=True)
class FiberedOperator:
    """K stacked N x N fiber matrices; row k acts on section row k.

    Flags are advisory and re-derived from the matrices; passing a flag
    that contradicts the entries is rejected.  ``contraction_for_p``
    records exponents at which the generator verified the norm bound.
    """

    fibers: np.ndarray
    positive: bool | None = None
    sub_unital: bool | None = None
    contraction_for_p: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        A = np.asarray(self.fibers, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ShapeMismatchError(f"fibers must be a K x N x N stack, got {A.shape}")
        object.__setattr__(self, "fibers", A)
        pos, sub = self.derived_flags()
        if self.positive is not None and self.positive != pos:
            raise UsageError(f"positive flag {self.positive} contradicts entries (derived {pos})")
        if self.sub_unital is not None and self.sub_unital != sub:
            raise UsageError(f"sub_unital flag {self.sub_unital} contradicts entries (derived {sub})")

    @property
    def shape(self) -> tuple[int, int]:
        return self.fibers.shape[0], self.fibers.shape[1]

    def derived_flags(self) -> tuple[bool, bool]:
        pos = bool(np.all(self.fibers >= 0.0))
        rows = self.fibers.sum(axis=2)
        sub = bool(np.all(rows <= 1.0 + _ROW_SLACK))
        return pos, sub

    def with_derived_flags(self) -> "FiberedOperator":
        pos, sub = self.derived_flags()
        return FiberedOperator(self.fibers, pos, sub, self.contraction_for_p)

    @staticmethod
    def identity(k_count: int, n_atoms: int) -> "FiberedOperator":
        eye = np.broadcast_to(np.eye(n_atoms), (k_count, n_atoms, n_atoms)).copy()
        return FiberedOperator(eye, positive=True, sub_unital=True)


@dataclass(frozen=True)
class ModulusReport:
    """Modulus of an operator plus the partition net that produced it.

    ``net_values[i]`` is the partition sum at chain step i applied to
    the all-ones probe section; the values are entrywise nondecreasing
    and ``steps_to_stabilize`` is the first step from which they already
    equal the final (atomic) value.
    """

    modulus: FiberedOperator
    net_values: list
    steps_to_stabilize: int


@dataclass(frozen=True)
class MajorantCounterexample:
    section: np.ndarray
    fiber: int
    atom: int
    lhs: float
    rhs: float


def _check_op_section(T: FiberedOperator, F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape != T.shape:
        raise ShapeMismatchError(f"section {F.shape} does not match operator {T.shape}")
    return F


def apply(T: FiberedOperator, F: np.ndarray) -> np.ndarray:
    """Fiberwise action: row k of the result is fibers[k] @ F[k]."""
    F = _check_op_section(T, F)
    out = np.empty_like(F)
    for k in range(F.shape[0]):
        out[k] = T.fibers[k] @ F[k]
    return out


def power(T: FiberedOperator, n: int) -> FiberedOperator:
    """Fiberwise matrix power; n = 0 gives the identity."""
    if n < 0:
        raise UsageError("power exponent must be >= 0")
    K, N = T.shape
    out = np.empty_like(T.fibers)
    for k in range(K):
        out[k] = np.linalg.matrix_power(T.fibers[k], n)
    return FiberedOperator(out)


def compose(T: FiberedOperator, S: FiberedOperator) -> FiberedOperator:
    """T after S, fiber by fiber."""
    if T.shape != S.shape:
        raise ShapeMismatchError(f"cannot compose {T.shape} with {S.shape}")
    out = np.empty_like(T.fibers)
    for k in range(T.shape[0]):
        out[k] = T.fibers[k] @ S.fibers[k]
    return FiberedOperator(out)


def partition_step(T: FiberedOperator, pi: PartitionOfUnity, F: np.ndarray) -> np.ndarray:
    """Partition sum sum_B |T(indicator_B * F)| for a nonnegative section F.

    Refining the partition can only increase the value (triangle
    inequality), which is what the modulus net exploits.
    """
    F = _check_op_section(T, F)
    if np.any(F < 0.0):
        raise NegativeInputError("partition sums are defined for nonnegative sections")
    if pi.atom_count != T.shape[1]:
        raise ShapeMismatchError(f"partition over {pi.atom_count} atoms, operator has {T.shape[1]}")
    total = np.zeros_like(F)
    for block in pi.blocks:
        total += np.abs(apply(T, indicator_mul(block, F)))
    return total


def modulus_net(T: FiberedOperator) -> ModulusReport:
    """Operator modulus via the partition net.

    Walks the refinement chain recording the partition sum on the
    all-ones probe, then assembles the modulus column by column from the
    atomic partition applied to the N coordinate basis sections.  The
    result is positive and dominates T: |T F| <= |T| |F| for every
    section.
    """
    K, N = T.shape
    chain = refinement_chain(BooleanAtoms(N))
    ones = np.ones((K, N))
    net_values = [partition_step(T, pi, ones) for pi in chain]

    final = net_values[-1]
    scale = 1e-12 * (1.0 + float(np.max(final)))
    for prev, cur in zip(net_values, net_values[1:]):
        if np.any(cur < prev - scale):
            raise InvariantViolationError("partition net decreased under refinement")
    steps = len(chain) - 1
    while steps > 0 and np.max(np.abs(net_values[steps - 1] - final)) <= scale:
        steps -= 1

    atomic = chain[-1]
    fib = np.empty((K, N, N))
    for j in range(N):
        basis = np.zeros((K, N))
        basis[:, j] = 1.0
        fib[:, :, j] = partition_step(T, atomic, basis)
    modulus = FiberedOperator(fib, positive=True)
    return ModulusReport(modulus, net_values, steps)


def modulus_direct(T: FiberedOperator) -> FiberedOperator:
    """Entrywise absolute value of every fiber.

    Independent of the partition-net construction; the suite asserts the
    two agree exactly rather than assuming it.
    """
    return FiberedOperator(np.abs(T.fibers), positive=True)


def majorant_check(A: FiberedOperator, S: FiberedOperator, trials: int = 100,
                   seed: int = 0) -> MajorantCounterexample | None:
    """Verify |A F| <= S |F| on basis sections and seeded random sections.

    In the atomic model the basis check is equivalent to entrywise
    |fibers(A)| <= fibers(S); random trials re-confirm.  Returns the
    first violation found, or None.  Comparison carries 1e-12 relative
    slack so fp rounding of two mathematically equal paths never counts
    as a violation.
    """
    if A.shape != S.shape:
        raise ShapeMismatchError(f"operator shapes differ: {A.shape} vs {S.shape}")
    if not S.derived_flags()[0]:
        raise NotPositiveError("majorant must be a positive operator")
    K, N = A.shape

    def first_violation(F: np.ndarray) -> MajorantCounterexample | None:
        lhs = np.abs(apply(A, F))
        rhs = apply(S, np.abs(F))
        bad = lhs > rhs + 1e-12 * (1.0 + np.abs(rhs))
        if bad.any():
            k, j = np.argwhere(bad)[0]
            return MajorantCounterexample(F, int(k), int(j), float(lhs[k, j]), float(rhs[k, j]))
        return None

    for j in range(N):
        basis = np.zeros((K, N))
        basis[:, j] = 1.0
        hit = first_violation(basis)
        if hit is not None:
            return hit
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        hit = first_violation(rng.standard_normal((K, N)))
        if hit is not None:
            return hit
    return None


def _endpoint_conditions(fibers: np.ndarray, M: np.ndarray) -> bool:
    """Row sums <= 1 and measure-weighted column sums <= the measure row,
    checked on |fibers|; these are the p = inf and p = 1 endpoints, and
    interpolation carries them to every p in between."""
    a = np.abs(fibers)
    if np.any(a.sum(axis=2) > 1.0 + _ROW_SLACK):
        return False
    for k in range(a.shape[0]):
        if np.any(M[k] @ a[k] > M[k] * (1.0 + _ROW_SLACK)):
            return False
    return True


def _scaled_positive(rng, K: int, N: int, M: np.ndarray) -> np.ndarray:
    # the 0.95 headroom bounds every p-norm by 0.95, which in turn caps
    # the dichotomy trace at 2 * 0.95^n: decay horns are certain to fall
    # below 1e-8 within 500 steps whatever the draw looks like
    R = rng.uniform(0.05, 1.0, size=(K, N, N))
    out = np.empty_like(R)
    for k in range(K):
        c_rows = 1.0 / float(R[k].sum(axis=1).max())
        col_mass = M[k] @ R[k]
        c_cols = float(np.min(M[k] / col_mass))
        out[k] = 0.95 * min(c_rows, c_cols) * R[k]
    return out


def _random_cycle(rng, N: int) -> np.ndarray:
    order = rng.permutation(N)
    P = np.zeros((N, N))
    for i in range(N):
        P[order[(i + 1) % N], order[i]] = 1.0
    return P


def gen_contraction(base: BaseSpace, atoms: BooleanAtoms, measure: VectorMeasure,
                    mode: str, seed: int = 0,
                    fibers: np.ndarray | None = None) -> FiberedOperator:
    """Generate an all-p contraction with T(ones) <= ones.

    Every mode enforces the two endpoint conditions per fiber (row sums
    <= 1 for p = inf, measure-weighted column sums below the measure row
    for p = 1) on the positive envelope, then verifies the norm bound
    numerically at p in {1, 1.5, 2, 3, inf} instead of trusting the
    interpolation argument.

    positive-strict: strictly positive entries, scaled to both endpoints.
    permutation: one random cyclic permutation matrix on every fiber
    (feasible only when the measure is constant along the cycle).
    signed: a positive-strict draw with signs flipped at random; its
    positive envelope is the unflipped draw, so a majorant exists by
    construction.
    custom: caller-supplied fibers, validated, not rescaled.
    """
    validate_measure(measure, base, atoms)
    K, N = base.atom_count, atoms.atom_count
    M = measure.matrix
    rng = np.random.default_rng(seed)

    if mode == "positive-strict":
        F = _scaled_positive(rng, K, N, M)
    elif mode == "permutation":
        P = _random_cycle(rng, N)
        F = np.broadcast_to(P, (K, N, N)).copy()
        if not _endpoint_conditions(F, M):
            raise InfeasibleScalingError(
                "measure is not constant along the permutation cycle; "
                "a permutation can only contract an invariant measure")
    elif mode == "signed":
        F = _scaled_positive(rng, K, N, M) * rng.choice([-1.0, 1.0], size=(K, N, N))
    elif mode == "custom":
        if fibers is None:
            raise UsageError("custom mode needs explicit fibers")
        F = np.asarray(fibers, dtype=float)
        if F.shape != (K, N, N):
            raise ShapeMismatchError(f"custom fibers {F.shape} do not match model ({K}, {N}, {N})")
        if not _endpoint_conditions(F, M):
            raise InfeasibleScalingError("custom fibers violate an endpoint contraction condition")
    else:
        raise UsageError(f"unknown mode {mode!r}; expected one of {GEN_MODES}")

    T = FiberedOperator(F).with_derived_flags()
    envelope = FiberedOperator(np.abs(F))
    verified = set()
    for p in CHECK_PS:
        if not norms.is_contraction(envelope, measure, p, tol=1e-10):
            raise InfeasibleScalingError(f"generated operator fails the norm bound at p={p}")
        verified.add(p)
    return FiberedOperator(F, T.positive, T.sub_unital, frozenset(verified))
