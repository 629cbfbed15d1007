"""Inner-loop update rules shared by the solvers.

Three flavors of the same primitive: single coordinate steps (``dv_step``,
``perceptron_step``) and the von Neumann loop that drives the aggregate vector
``y`` toward either a strict separator or a short vector. All of them work in
an arbitrary positive definite metric Q; passing ``None`` means euclidean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateColumnError
from .linalg import SymPosDef, as_matrix

__all__ = [
    "FOState",
    "FOOutcome",
    "SEPARATED",
    "SMALL_NORM",
    "BUDGET_EXHAUSTED",
    "dv_step",
    "perceptron_step",
    "von_neumann",
    "dv_inner",
    "perceptron_inner",
]

SEPARATED = "separated"
SMALL_NORM = "small_norm"
BUDGET_EXHAUSTED = "budget_exhausted"

# Incremental quantities are recomputed from scratch this often.
_DRIFT_INTERVAL = 10_000


@dataclass(frozen=True)
class FOState:
    """Coefficient vector x and aggregate y for one first-order run.

    In von Neumann mode x is a convex combination and
    ``y = sum_i x_i a_i / |a_i|_Q``; in coordinate-step mode x collects the
    accumulated step sizes and ``y = A x``.
    """

    mat: np.ndarray
    x: np.ndarray
    y: np.ndarray
    metric: SymPosDef | None = None


@dataclass(frozen=True)
class FOOutcome:
    status: str
    iterations: int


def _metric_inner(metric: SymPosDef | None, v: np.ndarray, w: np.ndarray) -> float:
    if metric is None:
        return float(v @ w)
    return metric.inner(v, w)


def _column(state: FOState, k: int) -> np.ndarray:
    n = state.mat.shape[1]
    if not 0 <= k < n:
        raise ContractViolationError(f"column index {k} out of range for n={n}")
    return state.mat[:, k]


def dv_step(state: FOState, k: int) -> FOState:
    """One coordinate-descent step on column k.

    Subtracts from y its component along a_k and pays for it in x_k, so the
    norm of y never grows: ``|y'| = |y| sqrt(1 - cos^2)`` where cos is the
    normalized inner product of a_k and y in the state metric.
    """
    a = _column(state, k)
    qq = _metric_inner(state.metric, a, a)
    if qq == 0.0:
        raise DegenerateColumnError(f"column {k} is zero")
    ay = _metric_inner(state.metric, a, state.y)
    x = state.x.copy()
    x[k] -= ay / qq
    y = state.y - (ay / qq) * a
    return FOState(mat=state.mat, x=x, y=y, metric=state.metric)


def perceptron_step(state: FOState, k: int) -> FOState:
    """Add the normalized column k to y and record the weight on x."""
    a = _column(state, k)
    qq = _metric_inner(state.metric, a, a)
    if qq == 0.0:
        raise DegenerateColumnError(f"column {k} is zero")
    nrm = math.sqrt(qq)
    x = state.x.copy()
    x[k] += 1.0 / nrm
    y = state.y + a / nrm
    return FOState(mat=state.mat, x=x, y=y, metric=state.metric)


def _gram(mat: np.ndarray, metric: SymPosDef | None) -> np.ndarray:
    if metric is None:
        return mat.T @ mat
    return mat.T @ metric.mat @ mat


def von_neumann(mat, metric: SymPosDef | None, eps: float, budget: int | None = None, gram: np.ndarray | None = None):
    """Drive a convex combination of Q-normalized columns toward 0 or a separator.

    Starts from the first column. Each iteration either certifies
    ``A^T Q y > 0`` strictly (status ``separated``), moves y to the nearest
    point of the segment toward the worst column, or stops with
    ``|y|_Q <= eps`` (status ``small_norm``). At most ``ceil(1/eps^2)``
    iterations are ever needed; a smaller ``budget`` may stop the loop early
    with status ``budget_exhausted``.

    Parameters
    ----------
    mat : array (m, n), nonzero columns
    metric : SymPosDef or None for the euclidean metric
    eps : target norm, > 0
    budget : optional iteration cap below the intrinsic bound
    gram : optional precomputed ``A^T Q A``

    Returns
    -------
    (FOState, FOOutcome)
    """
    mat = as_matrix(mat)
    if eps <= 0:
        raise ContractViolationError("eps must be positive")
    n = mat.shape[1]
    if gram is None:
        gram = _gram(mat, metric)
    diag = np.diag(gram).copy()
    if np.any(diag <= 0.0):
        raise DegenerateColumnError("all columns must be nonzero")
    qnorms = np.sqrt(diag)
    cap = math.ceil(1.0 / (eps * eps))
    if budget is not None:
        cap = min(cap, int(budget))

    # Normalized Gram: entries <a_i, a_j>_Q / (|a_i|_Q |a_j|_Q).
    ghat = gram / np.outer(qnorms, qnorms)

    x = np.zeros(n)
    x[0] = 1.0
    z = ghat[:, 0].copy()  # A-hat^T Q y, for y = a_1 / |a_1|_Q
    ynorm2 = 1.0
    iterations = 0

    def recompute():
        nonlocal z, ynorm2
        z = ghat @ x
        ynorm2 = float(x @ z)

    def exact_y():
        return mat @ (x / qnorms)

    status = None
    while True:
        if iterations % _DRIFT_INTERVAL == 0 and iterations > 0:
            recompute()
        if ynorm2 <= eps * eps:
            recompute()
            if ynorm2 <= eps * eps:
                status = SMALL_NORM
                break
        zmin = float(z.min())
        if zmin > 0.0:
            recompute()
            if float(z.min()) > 0.0:
                status = SEPARATED
                break
            continue
        if iterations >= cap:
            status = BUDGET_EXHAUSTED
            break
        k = int(np.argmin(z))
        # Step length minimizing |(1-l) y + l a_hat_k|_Q over l in [0, 1].
        zk = z[k]
        denom = ynorm2 - 2.0 * zk + 1.0
        lam = (ynorm2 - zk) / denom
        assert -1e-12 <= lam <= 1.0 + 1e-12
        lam = min(max(lam, 0.0), 1.0)
        x *= 1.0 - lam
        x[k] += lam
        ynorm2 = (1.0 - lam) ** 2 * ynorm2 + 2.0 * lam * (1.0 - lam) * zk + lam * lam
        z = (1.0 - lam) * z + lam * ghat[:, k]
        iterations += 1

    state = FOState(mat=mat, x=x, y=exact_y(), metric=metric)
    return state, FOOutcome(status=status, iterations=iterations)


def perceptron_inner(mat, metric, eps, budget=None, gram=None):
    """Perceptron analogue of ``von_neumann`` with the same output contract.

    Accumulates unit steps instead of taking convex combinations; the
    returned x and y are scaled down by the step count so x stays convex.
    """
    mat = as_matrix(mat)
    if eps <= 0:
        raise ContractViolationError("eps must be positive")
    n = mat.shape[1]
    if gram is None:
        gram = _gram(mat, metric)
    diag = np.diag(gram).copy()
    if np.any(diag <= 0.0):
        raise DegenerateColumnError("all columns must be nonzero")
    qnorms = np.sqrt(diag)
    ghat = gram / np.outer(qnorms, qnorms)
    cap = math.ceil(1.0 / (eps * eps))
    if budget is not None:
        cap = min(cap, int(budget))

    counts = np.zeros(n)
    counts[0] = 1.0
    z = ghat[:, 0].copy()
    ynorm2 = 1.0
    steps = 1
    status = None
    iterations = 0

    def recompute():
        nonlocal z, ynorm2
        z = ghat @ counts
        ynorm2 = float(counts @ z)

    while True:
        if iterations % _DRIFT_INTERVAL == 0 and iterations > 0:
            recompute()
        if float(z.min()) > 0.0:
            recompute()
            if float(z.min()) > 0.0:
                status = SEPARATED
                break
            continue
        if ynorm2 <= (eps * steps) ** 2:
            recompute()
            if ynorm2 <= (eps * steps) ** 2:
                status = SMALL_NORM
                break
        if iterations >= cap:
            status = BUDGET_EXHAUSTED
            break
        k = int(np.argmin(z))
        # |y + a_hat_k|^2 = |y|^2 + 2 z_k + 1 in the Q metric.
        ynorm2 = ynorm2 + 2.0 * float(z[k]) + 1.0
        counts[k] += 1.0
        z = z + ghat[:, k]
        steps += 1
        iterations += 1

    x = counts / steps
    y = mat @ (x / qnorms)
    return FOState(mat=mat, x=x, y=y, metric=metric), FOOutcome(status=status, iterations=iterations)


def dv_inner(mat, metric, eps, budget=None, gram=None):
    """Coordinate-descent analogue of ``von_neumann``; heuristic budget.

    Runs unguarded DV steps on the Q-normalized columns and stops when the
    aggregate is strictly separated or short relative to the accumulated
    coefficient mass. No iteration bound like the von Neumann one applies,
    so the default budget is a generous multiple of it.
    """
    mat = as_matrix(mat)
    if eps <= 0:
        raise ContractViolationError("eps must be positive")
    n = mat.shape[1]
    if gram is None:
        gram = _gram(mat, metric)
    diag = np.diag(gram).copy()
    if np.any(diag <= 0.0):
        raise DegenerateColumnError("all columns must be nonzero")
    qnorms = np.sqrt(diag)
    ghat = gram / np.outer(qnorms, qnorms)
    cap = 16 * math.ceil(1.0 / (eps * eps)) if budget is None else int(budget)

    x = np.zeros(n)
    x[0] = 1.0
    z = ghat[:, 0].copy()
    ynorm2 = 1.0
    status = None
    iterations = 0

    def recompute():
        nonlocal z, ynorm2
        z = ghat @ x
        ynorm2 = float(x @ z)

    while True:
        if iterations % _DRIFT_INTERVAL == 0 and iterations > 0:
            recompute()
        zmin = float(z.min())
        if zmin > 0.0:
            recompute()
            zmin = float(z.min())
            scale = math.sqrt(max(ynorm2, 0.0)) + 1e-300
            if zmin > 1e-12 * scale:
                status = SEPARATED
                break
            if zmin > 0.0:
                # A DV step pins z_k to exactly 0, so a strict separation this
                # thin is float noise; the method has stalled.
                status = BUDGET_EXHAUSTED
                break
            continue
        mass = float(x.sum())
        if ynorm2 <= (eps * mass) ** 2:
            recompute()
            if ynorm2 <= (eps * mass) ** 2:
                status = SMALL_NORM
                break
        if iterations >= cap:
            status = BUDGET_EXHAUSTED
            break
        k = int(np.argmin(z))
        c = z[k]
        if c == 0.0:
            # boundary stall: the worst margin is exactly zero, so the
            # correction is a no-op and no further progress is possible
            recompute()
            if float(z.min()) == 0.0:
                status = BUDGET_EXHAUSTED
                break
            continue
        x[k] -= c
        ynorm2 = max(ynorm2 - c * c, 0.0)
        z = z - c * ghat[:, k]
        iterations += 1

    mass = float(x.sum())
    x = x / mass
    y = mat @ (x / qnorms)
    return FOState(mat=mat, x=x, y=y, metric=metric), FOOutcome(status=status, iterations=iterations)
