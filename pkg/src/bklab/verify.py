"""Executable law suites behind the ``verify`` subcommand.

Each check is a deterministic function of the run seed; it returns None
on success or a Violation carrying a serializable counterexample.  The
runner prints one line per check and reports the first violation so CI
can distinguish "a law failed on valid inputs" (exit 1) from "bad
invocation" (exit 2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import lattice, norms, operators, storage, zerotwo
from .errors import BKLabError, NonPositiveEntryError, ShapeMismatchError
from .lattice import BaseSpace, BooleanAtoms, Model, VectorMeasure
from .operators import FiberedOperator

__all__ = ["Violation", "SUITES", "SUITE_NAMES", "run_suites"]

PS_ALL = (1.0, 1.5, 2.0, 3.0, math.inf)


@dataclass(frozen=True)
class Violation:
    check: str
    message: str
    payload: dict


CheckFn = Callable[[np.random.Generator], Optional[Violation]]
SUITES: dict[str, list[tuple[str, str, CheckFn]]] = {
    "core": [], "operators": [], "norms": [], "zerotwo": [],
}
SUITE_NAMES = ("core", "operators", "norms", "zerotwo")


def _check(suite: str, name: str, law: str):
    def deco(fn: CheckFn) -> CheckFn:
        SUITES[suite].append((name, law, fn))
        return fn
    return deco


def _viol(check: str, message: str, **payload) -> Violation:
    clean = {}
    for key, value in payload.items():
        if isinstance(value, np.ndarray):
            clean[key] = value.tolist()
        elif isinstance(value, (np.floating, np.integer)):
            clean[key] = value.item()
        else:
            clean[key] = value
    return Violation(check, message, clean)


def _random_model(rng, k_count: int, n_atoms: int, normalize: bool = False) -> Model:
    weights = rng.uniform(0.5, 1.5, k_count)
    measure = rng.uniform(0.2, 2.0, (k_count, n_atoms))
    if normalize:
        measure /= measure.sum(axis=1, keepdims=True)
    return Model(BaseSpace(weights), BooleanAtoms(n_atoms), VectorMeasure(measure))


def _uniform_model(k_count: int, n_atoms: int) -> Model:
    return Model(BaseSpace(np.ones(k_count)), BooleanAtoms(n_atoms),
                 VectorMeasure(np.ones((k_count, n_atoms))))


def _seed(rng) -> int:
    return int(rng.integers(2 ** 31))


def _random_partition(rng, n_atoms: int) -> lattice.PartitionOfUnity:
    perm = rng.permutation(n_atoms)
    n_blocks = int(rng.integers(1, n_atoms + 1))
    cuts = sorted(rng.choice(np.arange(1, n_atoms), size=min(n_blocks - 1, n_atoms - 1),
                             replace=False).tolist())
    blocks, start = [], 0
    for c in cuts + [n_atoms]:
        blocks.append(tuple(int(j) for j in perm[start:c]))
        start = c
    return lattice.PartitionOfUnity(tuple(blocks), n_atoms)


# ----------------------------------------------------------------- core

@_check("core", "measure-validation",
        "a vector measure is accepted iff every entry is strictly positive and finite")
def _c_measure_validation(rng) -> Violation | None:
    base2 = BaseSpace(np.ones(2))
    atoms2 = BooleanAtoms(2)
    try:
        lattice.validate_measure(VectorMeasure(np.array([[1.0, 1.0], [1.0, 1.0]])), base2, atoms2)
        lattice.validate_measure(VectorMeasure(np.array([[0.5, 1.5], [2.0, 0.25]])), base2, atoms2)
    except BKLabError as exc:
        return _viol("measure-validation", f"valid measure rejected: {exc}")
    try:
        lattice.validate_measure(VectorMeasure(np.array([[1.0, 0.0], [1.0, 1.0]])), base2, atoms2)
        return _viol("measure-validation", "null atom accepted")
    except NonPositiveEntryError as exc:
        if (exc.k, exc.j) != (0, 1):
            return _viol("measure-validation", f"wrong entry reported: {(exc.k, exc.j)}")
    try:
        lattice.validate_measure(VectorMeasure(np.ones((3, 2))), base2, atoms2)
        return _viol("measure-validation", "shape mismatch accepted")
    except ShapeMismatchError:
        pass
    return None


@_check("core", "norm-faithfulness",
        "|F|_p vanishes at a base atom iff the fiber row is zero")
def _c_faithfulness(rng) -> Violation | None:
    for _ in range(40):
        model = _random_model(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
        K, N = model.shape
        F = rng.standard_normal((K, N))
        zero_rows = rng.random(K) < 0.4
        F[zero_rows] = 0.0
        for p in PS_ALL:
            v = lattice.vec_norm(F, p, model.measure)
            if np.any((v == 0.0) != zero_rows):
                return _viol("norm-faithfulness", f"norm zero-set mismatch at p={p}",
                             F=F, measure=model.measure.matrix, p=p, norm=v)
    return None


@_check("core", "norm-monotonicity",
        "|F| <= |G| entrywise implies |F|_p <= |G|_p entrywise")
def _c_monotonicity(rng) -> Violation | None:
    for _ in range(60):
        model = _random_model(rng, int(rng.integers(1, 4)), int(rng.integers(1, 7)))
        K, N = model.shape
        F = rng.standard_normal((K, N))
        G = np.sign(rng.standard_normal((K, N))) * (np.abs(F) + rng.uniform(0.0, 1.0, (K, N)))
        for p in PS_ALL:
            vf = lattice.vec_norm(F, p, model.measure)
            vg = lattice.vec_norm(G, p, model.measure)
            if np.any(vf > vg):
                return _viol("norm-monotonicity", f"monotonicity failed at p={p}",
                             F=F, G=G, measure=model.measure.matrix, p=p)
    return None


@_check("core", "norm-order-continuity",
        "F_n decreasing to 0 entrywise forces |F_n|_p down to 0")
def _c_order_continuity(rng) -> Violation | None:
    for _ in range(20):
        model = _random_model(rng, 3, 4)
        F = np.abs(rng.standard_normal((3, 4))) + 0.1
        for p in PS_ALL:
            prev = lattice.vec_norm(F, p, model.measure)
            first = prev.copy()
            cur_F = F
            for _ in range(60):
                cur_F = cur_F / 2.0
                cur = lattice.vec_norm(cur_F, p, model.measure)
                if np.any(cur > prev):
                    return _viol("norm-order-continuity", f"norm increased along a decreasing chain at p={p}")
                prev = cur
            if np.any(prev > 1e-15 * first):
                return _viol("norm-order-continuity", f"norms did not vanish at p={p}", final=prev)
    return None


@_check("core", "norm-homogeneity",
        "|alpha * F|_p equals |alpha| * |F|_p for base-ring scalars alpha")
def _c_homogeneity(rng) -> Violation | None:
    for _ in range(60):
        model = _random_model(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
        K, N = model.shape
        F = rng.standard_normal((K, N))
        alpha = rng.standard_normal(K) * rng.choice([0.0, 1.0, 1.0], K)
        for p in PS_ALL:
            lhs = lattice.vec_norm(lattice.module_mul(alpha, F), p, model.measure)
            rhs = np.abs(alpha) * lattice.vec_norm(F, p, model.measure)
            if np.any(np.abs(lhs - rhs) > 1e-12 * (1.0 + rhs)):
                return _viol("norm-homogeneity", f"homogeneity failed at p={p}",
                             alpha=alpha, F=F, lhs=lhs, rhs=rhs)
    return None


@_check("core", "norm-nesting",
        "with unit-mass fibers, |F|_q <= |F|_p for 1 <= q <= p")
def _c_nesting(rng) -> Violation | None:
    ps = sorted(PS_ALL)
    for _ in range(40):
        model = _random_model(rng, int(rng.integers(1, 4)), int(rng.integers(1, 7)), normalize=True)
        K, N = model.shape
        F = rng.standard_normal((K, N)) * 3.0
        values = [lattice.vec_norm(F, p, model.measure) for p in ps]
        for lo, hi in zip(values, values[1:]):
            if np.any(lo > hi + 1e-12 * (1.0 + hi)):
                return _viol("norm-nesting", "power-mean nesting failed", F=F,
                             measure=model.measure.matrix)
    return None


@_check("core", "partition-decomposition",
        "indicator multipliers over any partition of unity sum to the identity")
def _c_decomposition(rng) -> Violation | None:
    for _ in range(60):
        n = int(rng.integers(1, 8))
        k = int(rng.integers(1, 4))
        F = rng.standard_normal((k, n))
        pi = _random_partition(rng, n)
        total = np.zeros_like(F)
        for block in pi.blocks:
            total += lattice.indicator_mul(block, F)
        if not np.array_equal(total, F):
            return _viol("partition-decomposition", "partition blocks did not reassemble the section",
                         F=F, blocks=[list(b) for b in pi.blocks])
        e = [int(j) for j in np.nonzero(rng.random(n) < 0.5)[0]]
        comp = [j for j in range(n) if j not in e]
        if not np.array_equal(lattice.indicator_mul(e, F) + lattice.indicator_mul(comp, F), F):
            return _viol("partition-decomposition", "complementary indicators did not reassemble")
    return None


# ------------------------------------------------------------ operators

def _random_signed_op(rng, k_count: int, n_atoms: int, scale: float = 1.0) -> FiberedOperator:
    return FiberedOperator(scale * rng.standard_normal((k_count, n_atoms, n_atoms)))


@_check("operators", "fiber-consistency",
        "the global action and the per-fiber action agree bit for bit")
def _o_fiber_consistency(rng) -> Violation | None:
    for _ in range(60):
        K, N = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        T = _random_signed_op(rng, K, N)
        F = rng.standard_normal((K, N))
        out = operators.apply(T, F)
        for k in range(K):
            if not np.array_equal(out[k], T.fibers[k] @ F[k]):
                return _viol("fiber-consistency", f"fiber {k} differs from the global action",
                             fiber=k, F=F, fibers=T.fibers)
    return None


@_check("operators", "module-linearity",
        "operators commute with multiplication by base-ring scalars")
def _o_module_linearity(rng) -> Violation | None:
    for _ in range(60):
        K, N = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        T = _random_signed_op(rng, K, N)
        F = rng.standard_normal((K, N))
        alpha = rng.standard_normal(K)
        lhs = operators.apply(T, lattice.module_mul(alpha, F))
        rhs = lattice.module_mul(alpha, operators.apply(T, F))
        if np.any(np.abs(lhs - rhs) > 1e-12 * (1.0 + np.abs(rhs))):
            return _viol("module-linearity", "module action does not commute with the operator",
                         alpha=alpha, F=F, fibers=T.fibers)
    return None


@_check("operators", "modulus-dominance",
        "|T F| <= |T| |F| entrywise for every section")
def _o_modulus_dominance(rng) -> Violation | None:
    for _ in range(500):
        K, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        T = _random_signed_op(rng, K, N)
        mod = operators.modulus_direct(T)
        F = rng.standard_normal((K, N))
        lhs = np.abs(operators.apply(T, F))
        rhs = operators.apply(mod, np.abs(F))
        bad = lhs > rhs + 1e-12 * (1.0 + np.abs(rhs))
        if bad.any():
            k, j = np.argwhere(bad)[0]
            return _viol("modulus-dominance", "modulus failed to dominate",
                         fibers=T.fibers, F=F, fiber=int(k), atom=int(j),
                         lhs=float(lhs[k, j]), rhs=float(rhs[k, j]))
    return None


@_check("operators", "modulus-supremum",
        "|T| F is the supremum of |T G| over |G| <= F (sign enumeration)")
def _o_modulus_supremum(rng) -> Violation | None:
    for _ in range(120):
        N = int(rng.integers(1, 4))
        T = _random_signed_op(rng, 1, N)
        F = np.abs(rng.standard_normal((1, N)))
        direct = operators.apply(operators.modulus_net(T).modulus, F)
        best = np.full((1, N), -np.inf)
        for bits in range(2 ** N):
            signs = np.array([1.0 if bits >> j & 1 else -1.0 for j in range(N)])
            best = np.maximum(best, np.abs(operators.apply(T, signs[None, :] * F)))
        if np.any(np.abs(direct - best) > 1e-12 * (1.0 + np.abs(best))):
            return _viol("modulus-supremum", "sign-enumeration supremum mismatch",
                         fibers=T.fibers, F=F, direct=direct, enumerated=best)
    return None


@_check("operators", "net-monotonicity",
        "partition sums increase with refinement and stabilize within N-1 splits")
def _o_net_monotonicity(rng) -> Violation | None:
    for _ in range(500):
        K, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        T = _random_signed_op(rng, K, N)
        report = operators.modulus_net(T)
        if report.steps_to_stabilize > N - 1:
            return _viol("net-monotonicity", "net failed to stabilize within the chain",
                         fibers=T.fibers, steps=report.steps_to_stabilize)
        scale = 1e-12 * (1.0 + float(np.max(report.net_values[-1])))
        for prev, cur in zip(report.net_values, report.net_values[1:]):
            if np.any(cur < prev - scale):
                return _viol("net-monotonicity", "net decreased under refinement",
                             fibers=T.fibers)
    return None


@_check("operators", "modulus-two-path",
        "the partition-net modulus equals the entrywise modulus exactly")
def _o_modulus_two_path(rng) -> Violation | None:
    for _ in range(500):
        K, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        T = _random_signed_op(rng, K, N)
        net = operators.modulus_net(T).modulus.fibers
        direct = operators.modulus_direct(T).fibers
        if not np.array_equal(net, direct):
            return _viol("modulus-two-path", "net and direct modulus disagree",
                         fibers=T.fibers, net=net, direct=direct)
    return None


@_check("operators", "fiber-modulus-norm-equality",
        "per fiber, the norm of the assembled modulus equals the norm of the fiber modulus")
def _o_fiber_modulus_norm(rng) -> Violation | None:
    for _ in range(25):
        K, N = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        model = _random_model(rng, K, N)
        A = operators.gen_contraction(model.base, model.atoms, model.measure,
                                      "signed", seed=_seed(rng))
        assembled = operators.modulus_net(A).modulus
        for p in PS_ALL:
            lhs = norms.l0_opnorm(assembled, model.measure, p)
            rhs = np.array([
                norms.opnorm(np.abs(A.fibers[k]), model.measure.matrix[k], p).value
                for k in range(K)
            ])
            if np.any(np.abs(lhs - rhs) > 1e-12 * (1.0 + rhs)):
                return _viol("fiber-modulus-norm-equality", f"norm mismatch at p={p}",
                             fibers=A.fibers, lhs=lhs, rhs=rhs, p=p)
    return None


@_check("operators", "majorant-norm-bound",
        "|| |A| || <= ||S|| for every majorizable pair (A, S)")
def _o_majorant_bound(rng) -> Violation | None:
    for _ in range(25):
        K, N = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        model = _random_model(rng, K, N)
        A = operators.gen_contraction(model.base, model.atoms, model.measure,
                                      "signed", seed=_seed(rng))
        S = operators.modulus_direct(A)
        damped = FiberedOperator(A.fibers * rng.uniform(0.5, 1.0, A.fibers.shape))
        for cand in (A, damped):
            if operators.majorant_check(cand, S, trials=20, seed=_seed(rng)) is not None:
                return _viol("majorant-norm-bound", "constructed majorant failed the check",
                             fibers=cand.fibers, majorant=S.fibers)
            mod = operators.modulus_direct(cand)
            for p in PS_ALL:
                lhs = norms.l0_opnorm(mod, model.measure, p)
                rhs = norms.l0_opnorm(S, model.measure, p)
                if np.any(lhs > rhs + 1e-10):
                    return _viol("majorant-norm-bound", f"norm bound failed at p={p}",
                                 fibers=cand.fibers, majorant=S.fibers, p=p,
                                 lhs=lhs, rhs=rhs)
    return None


@_check("operators", "generator-soundness",
        "every generated operator passes contraction checks at p in {1, 1.5, 2, 3, inf}")
def _o_generator_soundness(rng) -> Violation | None:
    for mode in ("positive-strict", "permutation", "signed"):
        for _ in range(12):
            K, N = int(rng.integers(1, 4)), int(rng.integers(2, 7))
            model = _uniform_model(K, N) if mode == "permutation" else _random_model(rng, K, N)
            T = operators.gen_contraction(model.base, model.atoms, model.measure,
                                          mode, seed=_seed(rng))
            envelope = operators.modulus_direct(T)
            for p in PS_ALL:
                values = norms.l0_opnorm(envelope, model.measure, p)
                if np.any(values > 1.0 + 1e-10):
                    return _viol("generator-soundness", f"{mode} operator exceeds norm 1 at p={p}",
                                 fibers=T.fibers, p=p, norms=values)
            if mode == "positive-strict" and not np.all(T.fibers > 0.0):
                return _viol("generator-soundness", "positive-strict draw has a zero entry",
                             fibers=T.fibers)
    return None


# ---------------------------------------------------------------- norms

@_check("norms", "oracle-soundness",
        "the sampling oracle never exceeds a closed form or a converged iteration")
def _n_oracle_soundness(rng) -> Violation | None:
    for _ in range(60):
        N = int(rng.integers(1, 7))
        w = rng.uniform(0.2, 2.0, N)
        A = rng.standard_normal((N, N))
        for p in (1.0, 2.0, math.inf):
            exact = norms.opnorm_exact(A, w, p).value
            oracle = norms.opnorm_oracle(A, w, p, samples=100, seed=_seed(rng)).value
            if oracle > exact + 1e-9:
                return _viol("oracle-soundness", f"oracle exceeds the closed form at p={p}",
                             A=A, w=w, p=p, oracle=oracle, exact=exact)
        B = np.abs(A)
        for p in (1.5, 3.0):
            boyd = norms.opnorm_boyd(B, w, p)
            oracle = norms.opnorm_oracle(B, w, p, samples=100, seed=_seed(rng)).value
            if boyd.converged and oracle > boyd.value + 1e-9:
                return _viol("oracle-soundness", f"oracle exceeds the converged iteration at p={p}",
                             A=B, w=w, p=p, oracle=oracle, boyd=boyd.value)
    return None


@_check("norms", "boyd-exact-p2-agreement",
        "the power iteration matches the singular-value form at p=2")
def _n_boyd_p2(rng) -> Violation | None:
    for _ in range(1000):
        N = int(rng.integers(1, 7))
        w = rng.uniform(0.2, 2.0, N)
        A = rng.uniform(0.0, 1.0, (N, N))
        exact = norms.opnorm_exact(A, w, 2.0).value
        boyd = norms.opnorm_boyd(A, w, 2.0, tol=1e-12)
        if abs(boyd.value - exact) > 1e-8 * max(exact, 1e-300):
            return _viol("boyd-exact-p2-agreement", "iteration disagrees with the exact value",
                         A=A, w=w, boyd=boyd.value, exact=exact)
    return None


@_check("norms", "submultiplicativity",
        "||T S|| <= ||T|| ||S|| entrywise for composed operators")
def _n_submult(rng) -> Violation | None:
    for _ in range(40):
        K, N = int(rng.integers(1, 4)), int(rng.integers(1, 6))
        model = _random_model(rng, K, N)
        T = FiberedOperator(np.abs(rng.standard_normal((K, N, N))))
        S = FiberedOperator(np.abs(rng.standard_normal((K, N, N))))
        TS = operators.compose(T, S)
        for p in PS_ALL:
            lhs = norms.l0_opnorm(TS, model.measure, p)
            rhs = norms.l0_opnorm(T, model.measure, p) * norms.l0_opnorm(S, model.measure, p)
            if np.any(lhs > rhs + 1e-10 * (1.0 + rhs)):
                return _viol("submultiplicativity", f"failed at p={p}", p=p,
                             T=T.fibers, S=S.fibers, lhs=lhs, rhs=rhs)
    return None


@_check("norms", "modulus-norm-equality-p1",
        "||T|| = || |T| || at p = 1")
def _n_mod_eq_p1(rng) -> Violation | None:
    return _mod_eq(rng, 1.0, "modulus-norm-equality-p1")


@_check("norms", "modulus-norm-equality-pinf",
        "||T|| = || |T| || at p = inf")
def _n_mod_eq_pinf(rng) -> Violation | None:
    return _mod_eq(rng, math.inf, "modulus-norm-equality-pinf")


def _mod_eq(rng, p: float, check: str) -> Violation | None:
    for _ in range(500):
        K, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        model = _random_model(rng, K, N)
        T = _random_signed_op(rng, K, N)
        lhs = norms.l0_opnorm(T, model.measure, p)
        rhs = norms.l0_opnorm(operators.modulus_direct(T), model.measure, p)
        if np.any(np.abs(lhs - rhs) > 1e-10 * (1.0 + rhs)):
            return _viol(check, f"norm of the modulus differs at p={p}",
                         fibers=T.fibers, lhs=lhs, rhs=rhs)
    return None


@_check("norms", "p2-modulus-gap",
        "at p = 2 the modulus can have strictly larger norm: a signed 2x2 witness")
def _n_p2_gap(rng) -> Violation | None:
    A = np.array([[0.7, 0.7], [0.7, -0.7]])
    w = np.ones(2)
    signed = norms.opnorm_exact(A, w, 2.0).value
    modulus = norms.opnorm_exact(np.abs(A), w, 2.0).value
    expected_signed = 0.7 * math.sqrt(2.0)
    if abs(signed - expected_signed) > 1e-10 or abs(modulus - 1.4) > 1e-10:
        return _viol("p2-modulus-gap", "witness values off",
                     signed=signed, modulus=modulus, expected_signed=expected_signed)
    if not modulus - signed > 0.4:
        return _viol("p2-modulus-gap", "strict gap missing", signed=signed, modulus=modulus)
    return None


@_check("norms", "weighted-reduction",
        "the weighted norm equals the unweighted norm of the diagonal similarity")
def _n_weighted_reduction(rng) -> Violation | None:
    for _ in range(40):
        N = int(rng.integers(1, 5))
        w = rng.uniform(0.2, 2.0, N)
        A = np.abs(rng.standard_normal((N, N)))
        for p in (1.0, 1.5, 2.0, 3.0):
            d = w ** (1.0 / p)
            B = A * d[:, None] / d[None, :]
            s = _seed(rng)
            direct = norms.opnorm_oracle(A, w, p, samples=300, seed=s).value
            reduced = norms.opnorm_oracle(B, np.ones(N), p, samples=300, seed=s).value
            if abs(direct - reduced) > 1e-8 * (1.0 + reduced):
                return _viol("weighted-reduction", f"reduction identity failed at p={p}",
                             A=A, w=w, p=p, direct=direct, reduced=reduced)
        direct = norms.opnorm_oracle(A, w, math.inf, samples=50, seed=0).value
        exact = norms.opnorm_exact(A, w, math.inf).value
        if direct > exact + 1e-9:
            return _viol("weighted-reduction", "sup-norm oracle above the row-sum form",
                         A=A, w=w, direct=direct, exact=exact)
    return None


@_check("norms", "witness-certificates",
        "every reported norm is reproduced by its stored witness vector")
def _n_witness(rng) -> Violation | None:
    for _ in range(60):
        N = int(rng.integers(1, 6))
        w = rng.uniform(0.2, 2.0, N)
        A = rng.standard_normal((N, N))
        results = [
            (A, norms.opnorm_exact(A, w, 1.0)),
            (A, norms.opnorm_exact(A, w, 2.0)),
            (A, norms.opnorm_exact(A, w, math.inf)),
            (np.abs(A), norms.opnorm_boyd(np.abs(A), w, 1.5)),
            (A, norms.opnorm_oracle(A, w, 3.0, samples=50, seed=_seed(rng))),
        ]
        ps = (1.0, 2.0, math.inf, 1.5, 3.0)
        for (mat, res), p in zip(results, ps):
            ratio = res.witness_ratio(mat, w, p)
            if abs(ratio - res.value) > 1e-10 * (1.0 + res.value):
                return _viol("witness-certificates", f"witness does not reproduce the {res.method} value",
                             A=mat, w=w, p=p, value=res.value, ratio=ratio)
    return None


# -------------------------------------------------------------- zerotwo

def _cycle_operator(period: int, k_count: int) -> FiberedOperator:
    P = np.zeros((period, period))
    for j in range(period):
        P[(j + 1) % period, j] = 1.0
    return FiberedOperator(np.broadcast_to(P, (k_count, period, period)).copy())


@_check("zerotwo", "trace-bounds",
        "d_n stays in [0, 2] and never increases")
def _z_trace_bounds(rng) -> Violation | None:
    for _ in range(10):
        K, N = int(rng.integers(1, 4)), int(rng.integers(2, 7))
        model = _random_model(rng, K, N)
        T = operators.gen_contraction(model.base, model.atoms, model.measure,
                                      "positive-strict", seed=_seed(rng))
        trace = zerotwo.run_dichotomy(T, model.measure, 1.0, 60)
        if np.any(trace.d < 0.0) or np.any(trace.d > 2.0 + 1e-10):
            return _viol("trace-bounds", "trace left [0, 2]", d=trace.d)
        if np.any(np.diff(trace.d, axis=0) > 1e-10):
            return _viol("trace-bounds", "trace increased", d=trace.d)
    return None


@_check("zerotwo", "decay-horn",
        "hypothesis d_m < 2 forces per-fiber decay to zero")
def _z_decay(rng) -> Violation | None:
    return decay_horn_check(rng, count=200)


def decay_horn_check(rng, count: int) -> Violation | None:
    ps = (1.0, 1.5, 2.0, 3.0)
    for i in range(count):
        K, N = int(rng.integers(1, 5)), int(rng.integers(1, 9))
        p = ps[i % len(ps)]
        model = _random_model(rng, K, N)
        T = operators.gen_contraction(model.base, model.atoms, model.measure,
                                      "positive-strict", seed=_seed(rng))
        trace = zerotwo.run_dichotomy(T, model.measure, p, 500, stop_below=1e-12)
        if trace.hypothesis_m is None:
            continue
        if np.any(np.diff(trace.d, axis=0) > 1e-10):
            return _viol("decay-horn", "trace increased", d=trace.d, fibers=T.fibers, p=p)
        if np.any(trace.d[-1] >= 1e-8):
            return _viol("decay-horn", f"no decay below 1e-8 by n={trace.steps_computed - 1}",
                         final=trace.d[-1], fibers=T.fibers, p=p)
    return None


@_check("zerotwo", "stuck-horn",
        "cyclic permutations hold d_n = 2 exactly, forever")
def _z_stuck(rng) -> Violation | None:
    for period in range(2, 7):
        T = _cycle_operator(period, 2)
        model = _uniform_model(2, period)
        trace = zerotwo.run_dichotomy(T, model.measure, 1.0, 50)
        if np.any(np.abs(trace.d - 2.0) > 1e-12):
            return _viol("stuck-horn", f"period-{period} cycle left the stuck value",
                         d=trace.d, period=period)
        if trace.hypothesis_m is not None:
            return _viol("stuck-horn", "hypothesis index found on a stuck trace", period=period)
        verdicts = zerotwo.classify(trace)
        if any(v.verdict != zerotwo.STUCK_AT_TWO for v in verdicts):
            return _viol("stuck-horn", "fiber not classified stuck", period=period)
    return None


@_check("zerotwo", "closed-form-trace",
        "the symmetric two-state fiber decays following its spectral closed form")
def _z_closed_form(rng) -> Violation | None:
    T = FiberedOperator(np.array([[[0.6, 0.4], [0.4, 0.6]]]))
    model = _uniform_model(1, 2)
    trace = zerotwo.run_dichotomy(T, model.measure, 1.0, 15)
    # second eigenvalue 0.2: T^n = ((1 + 0.2^n) J + (1 - 0.2^n) (J - I) ...)/2,
    # so |T^(n+1) - T^n| has all entries 0.4 * 0.2^n and column sums 0.8 * 0.2^n
    for n in range(16):
        expected = 0.8 * 0.2 ** n
        if abs(trace.d[n, 0] - expected) > 1e-10:
            return _viol("closed-form-trace", f"step {n} off the closed form",
                         got=float(trace.d[n, 0]), expected=expected)
    return None


@_check("zerotwo", "heterogeneous-verdicts",
        "one run can decay at one base atom and stay stuck at another")
def _z_heterogeneous(rng) -> Violation | None:
    fibers = np.array([
        [[0.3, 0.3], [0.3, 0.3]],
        [[0.0, 1.0], [1.0, 0.0]],
    ])
    T = FiberedOperator(fibers)
    model = _uniform_model(2, 2)
    trace = zerotwo.run_dichotomy(T, model.measure, 1.0, 80)
    verdicts = zerotwo.classify(trace)
    if verdicts[0].verdict != zerotwo.CONVERGES_TO_ZERO:
        return _viol("heterogeneous-verdicts", "positive fiber did not decay", d=trace.d)
    if verdicts[1].verdict != zerotwo.STUCK_AT_TWO:
        return _viol("heterogeneous-verdicts", "permutation fiber did not stay at 2", d=trace.d)
    hyp = zerotwo.check_hypothesis(trace, 0)
    if not (hyp[0] and not hyp[1]):
        return _viol("heterogeneous-verdicts", "hypothesis mask wrong", mask=hyp.tolist())
    if trace.hypothesis_m is not None:
        return _viol("heterogeneous-verdicts", "global hypothesis index should be absent")
    return None


@_check("zerotwo", "fiber-global-equality",
        "fiber norms of the assembled modulus of T - S equal the fiberwise modulus norms")
def _z_fiber_global(rng) -> Violation | None:
    return fiber_global_check(rng, count=200)


def fiber_global_check(rng, count: int) -> Violation | None:
    for i in range(count):
        K, N = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        p = PS_ALL[i % len(PS_ALL)]
        model = _random_model(rng, K, N)
        T = operators.gen_contraction(model.base, model.atoms, model.measure,
                                      "positive-strict", seed=_seed(rng))
        S = operators.gen_contraction(model.base, model.atoms, model.measure,
                                      "positive-strict", seed=_seed(rng))
        report = zerotwo.compare_fiber_global(T, S, model.measure, p)
        if report.max_rel_discrepancy > 1e-10:
            return _viol("fiber-global-equality", f"paths disagree at p={p}",
                         T=T.fibers, S=S.fibers, p=p,
                         path_global=report.path_global, path_fiber=report.path_fiber)
        if np.any(report.path_fiber < report.path_global - 1e-12):
            return _viol("fiber-global-equality", "fiberwise norm fell below the assembled norm",
                         T=T.fibers, S=S.fibers, p=p)
    return None


# --------------------------------------------------------------- runner

def run_suites(names, seed: int, printer=print,
               counterexample_path: str = "bk-counterexample.json") -> int:
    """Run the named suites; returns 0 when every check passes, 1 otherwise.

    The first violation is serialized to ``counterexample_path``.
    """
    failures: list[Violation] = []
    for sname in names:
        for idx, (name, law, fn) in enumerate(SUITES[sname]):
            rng = np.random.default_rng([seed, SUITE_NAMES.index(sname), idx])
            try:
                violation = fn(rng)
            except BKLabError as exc:
                violation = Violation(name, f"check aborted: {exc}", {})
            if violation is None:
                printer(f"PASS {sname}.{name} ({law})")
            else:
                printer(f"FAIL {sname}.{name}: {violation.message}")
                failures.append(violation)
    if failures:
        first = failures[0]
        storage.atomic_write_text(counterexample_path, json.dumps({
            "check": first.check, "message": first.message, "payload": first.payload,
        }, indent=2) + "\n")
        printer(f"counterexample written to {counterexample_path}")
        return 1
    return 0
