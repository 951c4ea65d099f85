"""Weighted operator (p -> p) norms of fiber matrices.

All solvers work on the weighted norm ``|x|_{p,w} = (sum w_j |x_j|^p)^(1/p)``
(``max_j |x_j|`` at p = inf).  The weighted problem reduces exactly to an
unweighted one by the diagonal similarity ``B = D^(1/p) A D^(-1/p)`` with
``D = diag(w)``, so one unweighted engine serves every fiber.

Three routes:

* closed forms at p in {1, 2, inf} (weighted column sums, largest
  singular value of the similarity transform, row sums);
* a duality-map power iteration for 1 < p < inf, after Boyd's method
  for matrix p-norms: the fixed point is the global norm whenever the
  matrix is entrywise nonnegative, which is all the dichotomy driver
  ever norms (moduli);
* a sampling + coordinate-ascent oracle usable at every p, returning a
  certified lower bound.

Every result carries a witness vector; the ratio ``|Ax|_{p,w} / |x|_{p,w}``
at the witness reproduces the reported value.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidPError,
    NoConvergenceError,
    NonPositiveWeightError,
    ShapeMismatchError,
)

__all__ = [
    "NormResult",
    "weighted_norm",
    "opnorm_exact",
    "opnorm_boyd",
    "opnorm_oracle",
    "opnorm",
    "l0_opnorm",
    "is_contraction",
    "worker_count",
]

EXACT_PS = (1.0, 2.0, math.inf)


@dataclass(frozen=True)
class NormResult:
    value: float
    method: str  # exact-p1 | exact-p2 | exact-pinf | boyd | oracle
    converged: bool
    iterations: int
    certificate: np.ndarray  # witness x, in the original (weighted) coordinates

    def witness_ratio(self, A: np.ndarray, w: np.ndarray, p: float) -> float:
        x = self.certificate
        den = weighted_norm(x, w, p)
        if den == 0.0:
            return 0.0
        return weighted_norm(A @ x, w, p) / den


def weighted_norm(x: np.ndarray, w: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(x))) if x.size else 0.0
    return float(np.sum(w * np.abs(x) ** p) ** (1.0 / p))


def _check_inputs(A: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatchError(f"operator matrix must be square, got {A.shape}")
    if w.shape != (A.shape[0],):
        raise ShapeMismatchError(f"weights {w.shape} do not match matrix {A.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise NonPositiveWeightError("weights must be strictly positive and finite")
    return A, w


def opnorm_exact(A: np.ndarray, w: np.ndarray, p: float) -> NormResult:
    """Closed-form weighted operator norm at p in {1, 2, inf}.

    p=1: max_j (sum_i w_i |A[i,j]|) / w_j, witness the arg-max basis
    vector.  p=inf: max absolute row sum, witness the sign pattern of
    the arg-max row.  p=2: largest singular value of
    ``D^(1/2) A D^(-1/2)``, witness the top right singular vector mapped
    back.  Ties break toward the smallest index.
    """
    A, w = _check_inputs(A, w)
    n = A.shape[0]
    if p == 1.0:
        ratios = (w @ np.abs(A)) / w
        j = int(np.argmax(ratios))
        x = np.zeros(n)
        x[j] = 1.0
        return NormResult(float(ratios[j]), "exact-p1", True, 0, x)
    if math.isinf(p):
        rows = np.abs(A).sum(axis=1)
        i = int(np.argmax(rows))
        s = np.sign(A[i])
        s[s == 0.0] = 1.0
        return NormResult(float(rows[i]), "exact-pinf", True, 0, s)
    if p == 2.0:
        d = np.sqrt(w)
        B = A * d[:, None] / d[None, :]
        U, S, Vt = np.linalg.svd(B)
        x = Vt[0] / d
        return NormResult(float(S[0]), "exact-p2", True, 0, x)
    raise InvalidPError(f"exact formulas exist only for p in {{1, 2, inf}}, got {p}")


def _dual_map(y: np.ndarray, r: float) -> np.ndarray:
    return np.sign(y) * np.abs(y) ** (r - 1.0)


def opnorm_boyd(A: np.ndarray, w: np.ndarray, p: float, tol: float = 1e-12,
                max_iter: int = 1000) -> NormResult:
    """Duality-map power iteration for the weighted p-norm, 1 < p < inf.

    Reduces to ``B = D^(1/p) A D^(-1/p)`` and iterates
    ``x <- normalize(psi_q(B^T psi_p(B x)))`` with ``psi_r(y) =
    sign(y) |y|^(r-1)`` and q the conjugate exponent, starting from the
    normalized all-ones vector (strictly positive, so it cannot be
    orthogonal to the principal direction of a nonnegative matrix).
    The estimate ``|B x|_p`` is nondecreasing and always a lower bound;
    for entrywise-nonnegative A the fixed point is the global norm.
    Stops when the relative change drops below ``tol``; if ``max_iter``
    is exhausted the best lower bound is returned with
    ``converged=False``.
    """
    if not (1.0 < p < math.inf):
        raise InvalidPError(f"power iteration needs 1 < p < inf, got {p}")
    if tol <= 0.0:
        raise InvalidPError("tol must be positive")
    A, w = _check_inputs(A, w)
    n = A.shape[0]
    d = w ** (1.0 / p)
    B = A * d[:, None] / d[None, :]
    q = p / (p - 1.0)

    x = np.ones(n)
    x /= float(np.sum(x ** p) ** (1.0 / p))
    s_prev = -math.inf
    s = 0.0
    for it in range(1, max_iter + 1):
        y = B @ x
        s = float(np.sum(np.abs(y) ** p) ** (1.0 / p))
        if s == 0.0:
            return NormResult(0.0, "boyd", True, it, x / d)
        if abs(s - s_prev) <= tol * s:
            return NormResult(s, "boyd", True, it, x / d)
        s_prev = s
        z = B.T @ _dual_map(y, p)
        xn = _dual_map(z, q)
        nz = float(np.sum(np.abs(xn) ** p) ** (1.0 / p))
        if nz == 0.0:
            return NormResult(s, "boyd", True, it, x / d)
        x = xn / nz
    return NormResult(s, "boyd", False, max_iter, x / d)


def opnorm_oracle(A: np.ndarray, w: np.ndarray, p: float, samples: int = 200,
                  seed: int = 0) -> NormResult:
    """Certified lower bound: best ratio over seeded random directions,
    all +-basis vectors, and the all-ones vector, then a compass-search
    polish from the best point.
    """
    if samples < 1:
        raise InvalidPError("samples must be >= 1")
    A, w = _check_inputs(A, w)
    n = A.shape[0]

    def ratio(x: np.ndarray) -> float:
        den = weighted_norm(x, w, p)
        if den == 0.0:
            return 0.0
        return weighted_norm(A @ x, w, p) / den

    rng = np.random.default_rng(seed)
    candidates = [np.ones(n)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        candidates.append(e.copy())
        candidates.append(-e)
    candidates.extend(rng.standard_normal((samples, n)))

    best_x = candidates[0]
    best = ratio(best_x)
    evals = 1
    for x in candidates[1:]:
        r = ratio(x)
        evals += 1
        if r > best:
            best, best_x = r, x

    # compass-search polish: coordinate steps with shrinking radius
    x = best_x / max(weighted_norm(best_x, w, p), 1e-300)
    step = 0.5
    while step > 1e-8:
        improved = False
        for j in range(n):
            for delta in (step, -step):
                trial = x.copy()
                trial[j] += delta
                r = ratio(trial)
                evals += 1
                if r > best * (1.0 + 1e-15):
                    best, x = r, trial
                    improved = True
        if not improved:
            step *= 0.5
    return NormResult(best, "oracle", True, evals, x)


def opnorm(A: np.ndarray, w: np.ndarray, p: float, method: str = "auto",
           tol: float = 1e-12, max_iter: int = 1000, samples: int = 200,
           seed: int = 0) -> NormResult:
    """Route one fiber to the right solver.

    ``auto`` picks the closed form at p in {1, 2, inf}, the power
    iteration for nonnegative matrices at other p, and the sampling
    oracle for signed matrices at other p (where only a lower bound is
    promised; exact signed general-p optimization is out of scope).
    """
    A = np.asarray(A, dtype=float)
    if method == "auto":
        if p in EXACT_PS:
            return opnorm_exact(A, w, p)
        if np.all(A >= 0.0):
            return opnorm_boyd(A, w, p, tol=tol, max_iter=max_iter)
        return opnorm_oracle(A, w, p, samples=samples, seed=seed)
    if method == "exact":
        return opnorm_exact(A, w, p)
    if method == "boyd":
        return opnorm_boyd(A, w, p, tol=tol, max_iter=max_iter)
    if method == "oracle":
        return opnorm_oracle(A, w, p, samples=samples, seed=seed)
    raise InvalidPError(f"unknown method {method!r}")


def worker_count() -> int:
    """Fiber-loop parallelism cap from BK_THREADS (0 or unset = auto).

    Auto resolves to serial: fibers at desk scale are tiny matrices and
    a pool only adds overhead.  Any positive value forces that many
    workers; results are identical either way because fiber results are
    combined in index order.
    """
    raw = os.environ.get("BK_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n <= 0:
        return 1
    return n


def l0_opnorm(T, measure, p: float, method: str = "auto", tol: float = 1e-12,
              max_iter: int = 1000, samples: int = 200, seed: int = 0) -> np.ndarray:
    """Vector-valued operator norm: entry k is the weighted p-norm of
    fiber k with weights = measure row k.

    The operator is a contraction exactly when every entry is <= 1.
    Raises ``NoConvergenceError`` if any fiber solver fails to converge
    (an unconverged lower bound cannot certify the norm).
    """
    fibers = T.fibers
    M = measure.matrix
    if M.shape[0] != fibers.shape[0] or M.shape[1] != fibers.shape[1]:
        raise ShapeMismatchError(f"operator {fibers.shape} does not match measure {M.shape}")

    def one(k: int) -> NormResult:
        return opnorm(fibers[k], M[k], p, method=method, tol=tol,
                      max_iter=max_iter, samples=samples, seed=seed)

    k_count = fibers.shape[0]
    workers = worker_count()
    if workers > 1 and k_count > 1:
        with ThreadPoolExecutor(max_workers=min(workers, k_count)) as pool:
            results = list(pool.map(one, range(k_count)))
    else:
        results = [one(k) for k in range(k_count)]
    for k, r in enumerate(results):
        if not r.converged:
            raise NoConvergenceError(f"fiber {k} norm did not converge at p={p}")
    return np.array([r.value for r in results])


def is_contraction(T, measure, p: float, tol: float = 1e-10) -> bool:
    """True when every fiber norm is <= 1 + tol."""
    return bool(np.all(l0_opnorm(T, measure, p) <= 1.0 + tol))
