"""Dichotomy experiment driver.

For a positive sub-unital contraction T the sequence
``d_n = || |T^(n+1) - T^n| ||`` (one value per base atom) is bounded by
2 and nonincreasing, and per fiber it either stays at 2 forever or
decays to 0.  The driver computes the trace, locates the first index
where every fiber drops strictly below 2, classifies each fiber, and
cross-checks the fiber/global norm equality for differences of
contractions.

Order convergence over a finite atomic base is pointwise convergence at
each atom, so verdicts are per fiber and a single run can contain both
horns at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import norms, operators
from .errors import (
    IndexOutOfRangeError,
    InvariantViolationError,
    NotContractionError,
    NotPositiveError,
    NotSubUnitalError,
)
from .lattice import VectorMeasure
from .operators import FiberedOperator

__all__ = [
    "DichotomyTrace",
    "FiberVerdict",
    "FiberGlobalReport",
    "CONVERGES_TO_ZERO",
    "STUCK_AT_TWO",
    "UNDECIDED",
    "require_dichotomy_preconditions",
    "run_dichotomy",
    "check_hypothesis",
    "classify",
    "compare_fiber_global",
]

CONVERGES_TO_ZERO = "converges-to-zero"
STUCK_AT_TWO = "stuck-at-two"
UNDECIDED = "undecided"

# nonincreasing within this slack, and never above 2 + this slack
_TRACE_SLACK = 1e-10


@dataclass(frozen=True)
class DichotomyTrace:
    """Per-step, per-fiber values of || |T^(n+1) - T^n| ||.

    ``d`` has one row per computed step (n_max + 1 rows unless an early
    stop threshold was hit).  ``hypothesis_m`` is the first step at
    which every fiber sits strictly below 2 (with the two_tol margin),
    if any.  ``flushed_steps`` records steps where subnormal power
    entries were flushed to zero; ``recheck_steps`` records steps whose
    modulus was re-verified against the partition-net construction.
    """

    p: float
    n_max: int
    d: np.ndarray
    hypothesis_m: int | None
    flushed_steps: tuple = ()
    recheck_steps: tuple = ()

    @property
    def steps_computed(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class FiberVerdict:
    fiber: int
    verdict: str
    first_below_2: int | None
    final_value: float


@dataclass(frozen=True)
class FiberGlobalReport:
    """Fiber norms of the net-assembled modulus of T - S versus norms of
    the directly-assembled fiber moduli."""

    path_global: np.ndarray
    path_fiber: np.ndarray
    max_rel_discrepancy: float


def require_dichotomy_preconditions(T: FiberedOperator, measure: VectorMeasure,
                                    p: float, tol: float = 1e-10) -> None:
    """Positive, sub-unital, and a verified contraction at p, or raise."""
    pos, sub = T.derived_flags()
    if not pos:
        raise NotPositiveError("dichotomy driver needs a positive operator")
    if not sub:
        raise NotSubUnitalError("dichotomy driver needs T(ones) <= ones")
    values = norms.l0_opnorm(T, measure, p)
    if np.any(values > 1.0 + tol):
        raise NotContractionError(p, float(values.max()))


def run_dichotomy(T: FiberedOperator, measure: VectorMeasure, p: float,
                  n_max: int, *, two_tol: float = 1e-9,
                  stop_below: float | None = None, recheck_every: int = 10,
                  flush_floor: float = 1e-300,
                  solver_tol: float = 1e-12) -> DichotomyTrace:
    """Trace d_n = || |T^(n+1) - T^n| || for n = 0..n_max.

    Powers are built incrementally (one fiberwise product per step); the
    step modulus uses entrywise absolute values, re-verified against the
    partition-net modulus every ``recheck_every`` steps.  Entries of the
    powers below ``flush_floor`` are flushed to zero to avoid subnormal
    slowdowns.  Boundedness (d <= 2) and monotonicity are asserted as
    the trace is produced; a violation raises, it is never smoothed
    over.  With ``stop_below`` set, tracing stops early once every fiber
    is below it (monotonicity makes the remaining tail redundant).
    """
    if n_max < 0:
        raise IndexOutOfRangeError("n_max must be >= 0")
    require_dichotomy_preconditions(T, measure, p)
    K, N = T.shape
    M = measure.matrix

    rows = []
    flushed = []
    rechecked = []
    hypothesis_m = None
    pow_n = np.broadcast_to(np.eye(N), (K, N, N)).copy()
    for n in range(n_max + 1):
        pow_next = np.empty_like(pow_n)
        for k in range(K):
            pow_next[k] = T.fibers[k] @ pow_n[k]
        delta = FiberedOperator(pow_next - pow_n)
        mod = operators.modulus_direct(delta).fibers
        if recheck_every and n % recheck_every == 0:
            net = operators.modulus_net(delta)
            if not np.array_equal(net.modulus.fibers, mod):
                raise InvariantViolationError(
                    f"net and direct modulus disagree at step {n}")
            rechecked.append(n)
        d_n = np.array([
            norms.opnorm(mod[k], M[k], p, tol=solver_tol).value for k in range(K)
        ])
        if np.any(d_n > 2.0 + _TRACE_SLACK):
            raise InvariantViolationError(f"d[{n}] exceeds 2: {d_n.max()}")
        if rows and np.any(d_n > rows[-1] + _TRACE_SLACK):
            raise InvariantViolationError(f"d increased at step {n}")
        rows.append(d_n)
        if hypothesis_m is None and np.all(d_n < 2.0 - two_tol):
            hypothesis_m = n
        small = (np.abs(pow_next) < flush_floor) & (pow_next != 0.0)
        if small.any():
            pow_next[small] = 0.0
            flushed.append(n)
        if stop_below is not None and np.all(d_n < stop_below):
            break
        pow_n = pow_next
    return DichotomyTrace(p, n_max, np.array(rows), hypothesis_m,
                          tuple(flushed), tuple(rechecked))


def check_hypothesis(trace: DichotomyTrace, m: int, two_tol: float = 1e-9) -> np.ndarray:
    """Per-fiber boolean vector: d[m][k] strictly below 2 (with margin)."""
    if m < 0 or m > trace.n_max or m >= trace.steps_computed:
        raise IndexOutOfRangeError(f"m={m} outside the computed trace")
    return trace.d[m] < 2.0 - two_tol


def classify(trace: DichotomyTrace, zero_tol: float = 1e-8,
             two_tol: float = 1e-9) -> list[FiberVerdict]:
    """Per-fiber verdicts; undecided is reported, never forced binary."""
    out = []
    for k in range(trace.d.shape[1]):
        col = trace.d[:, k]
        final = float(col[-1])
        below = np.nonzero(col < 2.0 - two_tol)[0]
        first_below = int(below[0]) if below.size else None
        if final < zero_tol:
            verdict = CONVERGES_TO_ZERO
        elif float(col.min()) >= 2.0 - two_tol:
            verdict = STUCK_AT_TWO
        else:
            verdict = UNDECIDED
        out.append(FiberVerdict(k, verdict, first_below, final))
    return out


def compare_fiber_global(T: FiberedOperator, S: FiberedOperator,
                         measure: VectorMeasure, p: float) -> FiberGlobalReport:
    """Norm of the net-assembled modulus of T - S, per fiber, against the
    norm of each fiber's directly-assembled modulus.

    The two must agree; the fiberwise value can never sit below the
    global one.  Both positivity/contraction preconditions of the
    dichotomy driver apply to T and S.
    """
    require_dichotomy_preconditions(T, measure, p)
    require_dichotomy_preconditions(S, measure, p)
    if T.shape != S.shape:
        raise InvariantViolationError("operators must share a model")
    K, _ = T.shape
    M = measure.matrix
    diff = FiberedOperator(T.fibers - S.fibers)

    assembled = operators.modulus_net(diff).modulus
    path_global = norms.l0_opnorm(assembled, measure, p)
    path_fiber = np.array([
        norms.opnorm(np.abs(T.fibers[k] - S.fibers[k]), M[k], p).value
        for k in range(K)
    ])
    denom = np.maximum(np.maximum(path_global, path_fiber), 1e-300)
    max_rel = float(np.max(np.abs(path_global - path_fiber) / denom))
    return FiberGlobalReport(path_global, path_fiber, max_rel)
