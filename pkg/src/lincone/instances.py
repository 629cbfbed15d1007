"""Instance generation, exact desk-scale support oracles, and file formats.

Generators produce matrices with certified condition properties: kernel
feasible (0 interior to the column hull), image feasible (a known strict
separator), or degenerate (a prescribed split into kernel support and image
support). The certifications come from independent oracles, not from the
solvers under test.

The exact support oracle decides S* and T* in rational arithmetic via
Fourier-Motzkin elimination. It is deliberately slow and simple; its only
job is to be trustworthy at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .conditioning import goffin_oracle
from .errors import ContractViolationError, LinconeError, ParseError, UnsupportedInstanceError
from .linalg import as_matrix, column_norms, pivoted_rank

__all__ = [
    "ConicInstance",
    "LPFeasibilityProblem",
    "gen_kernel_feasible",
    "gen_image_feasible",
    "gen_degenerate",
    "exact_support_oracle",
    "reduce_lp_feasibility",
    "recover_lp_point",
    "parse_instance",
    "write_instance",
    "parse_certificate",
    "write_certificate",
]

_RESAMPLE_BUDGET = 300
_FM_ROW_CAP = 60_000


@dataclass(frozen=True)
class ConicInstance:
    """A conic feasibility instance plus whatever the generator certified.

    known_rho is a generator-certified value or bound on the Goffin measure
    (sign convention: negative means kernel feasible). known_supports, when
    present, is the exact (S*, T*) partition.
    """

    mat: np.ndarray
    is_integer: bool
    provenance: str
    known_rho: float | None = None
    known_supports: tuple | None = None

    @property
    def shape(self):
        return self.mat.shape


@dataclass(frozen=True)
class LPFeasibilityProblem:
    """Ax <= b with integral data, for homogenization into a kernel problem."""

    mat: np.ndarray
    rhs: np.ndarray


def _unit_columns(rng, m, count):
    cols = rng.standard_normal((m, count))
    norms = np.linalg.norm(cols, axis=0)
    while np.any(norms < 1e-12):
        cols[:, norms < 1e-12] = rng.standard_normal((m, int((norms < 1e-12).sum())))
        norms = np.linalg.norm(cols, axis=0)
    return cols / norms


def gen_kernel_feasible(m: int, n: int, rho_target: float, seed) -> ConicInstance:
    """Instance with 0 strictly inside the hull of the unit columns.

    Samples n-1 unit columns and appends the normalized negative of their
    sum, so the all-ones-style combination witnesses interiority. For m <= 3
    the Goffin oracle must confirm rho <= -rho_target or the draw is
    rejected; beyond that the witness alone certifies feasibility and
    known_rho stays unset.
    """
    if n < m + 1:
        raise ContractViolationError("need n >= m+1 for an interior instance")
    if not 0.0 < rho_target < 1.0:
        raise ContractViolationError("rho_target must be in (0, 1)")
    rng = np.random.default_rng(seed)
    for _ in range(_RESAMPLE_BUDGET):
        cols = _unit_columns(rng, m, n - 1)
        total = cols.sum(axis=1)
        scale = np.linalg.norm(total)
        if scale < 1e-9:
            continue
        mat = np.hstack([cols, (-total / scale)[:, None]])
        if pivoted_rank(mat) < m:
            continue
        if m <= 3:
            rho = goffin_oracle(mat, 1e-4)
            if rho <= -rho_target:
                return ConicInstance(mat, False, "generated", known_rho=rho)
            continue
        return ConicInstance(mat, False, "generated")
    raise UnsupportedInstanceError(
        f"no draw reached rho <= -{rho_target} within {_RESAMPLE_BUDGET} attempts"
    )


def gen_image_feasible(m: int, n: int, rho_target: float, seed) -> ConicInstance:
    """Instance with a known unit separator at margin rho_target.

    Every unit column satisfies a^T y* >= rho_target against a hidden unit
    y*, the first one with equality (for m >= 2), so rho_target is a
    certified lower bound on the Goffin measure.
    """
    if not 0.0 < rho_target < 1.0:
        raise ContractViolationError("rho_target must be in (0, 1)")
    rng = np.random.default_rng(seed)
    for _ in range(_RESAMPLE_BUDGET):
        ystar = rng.standard_normal(m)
        ystar /= np.linalg.norm(ystar)
        cols = np.empty((m, n))
        for j in range(n):
            if m == 1:
                # margins on the line are +-1; everything sits at 1
                cols[:, j] = ystar
                continue
            c = rho_target if j == 0 else float(rng.uniform(rho_target, 1.0))
            w = rng.standard_normal(m)
            w -= (w @ ystar) * ystar
            nw = np.linalg.norm(w)
            if nw < 1e-12:
                w = np.zeros(m)
                nw = 1.0
            cols[:, j] = c * ystar + math.sqrt(max(1.0 - c * c, 0.0)) * (w / nw)
        if n >= m and pivoted_rank(cols) < m:
            continue
        return ConicInstance(cols, False, "generated", known_rho=rho_target)
    raise UnsupportedInstanceError("image sampling budget exceeded")


def gen_degenerate(m: int, n: int, s: int, seed) -> ConicInstance:
    """Integer instance with prescribed supports: s kernel columns, n-s image.

    The kernel block lives in the span of the first min(m-1, s-1)
    coordinates and sums to zero columnwise, so the all-ones combination is
    a kernel witness. The image block has a strictly positive entry in the
    next coordinate, which kills any nonnegative kernel combination that
    touches it. At desk scale the exact oracle must confirm the split or
    the draw is rejected.
    """
    if not 1 <= s < n:
        raise ContractViolationError("need 1 <= s < n")
    rng = np.random.default_rng(seed)
    h = min(m - 1, s - 1)
    for _ in range(_RESAMPLE_BUDGET):
        block_s = np.zeros((m, s), dtype=int)
        if h > 0:
            base = rng.integers(-5, 6, size=(h, s - 1))
            block = np.hstack([base, -base.sum(axis=1)[:, None]])
            if pivoted_rank(block.astype(float)) < h:
                continue
            block_s[:h, :] = block
        block_t = np.empty((m, n - s), dtype=int)
        block_t[:h, :] = rng.integers(-3, 4, size=(h, n - s))
        block_t[h, :] = rng.integers(1, 5, size=n - s)
        if h + 1 < m:
            block_t[h + 1 :, :] = rng.integers(-3, 4, size=(m - h - 1, n - s))
        mat = np.hstack([block_s, block_t]).astype(float)
        if pivoted_rank(mat) < m:
            continue
        s_idx = np.arange(s)
        t_idx = np.arange(s, n)
        if n <= 12 and m <= 6:
            s_star, t_star = exact_support_oracle(mat)
            if not (np.array_equal(s_star, s_idx) and np.array_equal(t_star, t_idx)):
                continue
        return ConicInstance(
            mat, True, "generated", known_supports=(s_idx, t_idx)
        )
    raise UnsupportedInstanceError("degenerate sampling budget exceeded")


# ---------------------------------------------------------------------------
# exact rational feasibility via Fourier-Motzkin
#
# A row (c0, c1, ..., ck) encodes the inequality c0 + sum_j cj*v_j >= 0 with
# every coefficient a Fraction. Rows are canonicalized to coprime integer
# tuples (positive scaling only, the direction must survive).


def _canonical(row):
    nums = [f.numerator for f in row]
    dens = [f.denominator for f in row]
    scale = 1
    for d in dens:
        scale = scale * d // math.gcd(scale, d)
    ints = [n * (scale // d) for n, d in zip(nums, dens)]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def _sift(rows):
    """Dedup, drop tautologies, detect contradictions. Returns None if infeasible."""
    out = {}
    for row in rows:
        if not any(row[1:]):
            if row[0] < 0:
                return None
            continue
        out[row] = True
    return list(out.keys())


def _eliminate(rows, j):
    pos, neg, rest = [], [], []
    for row in rows:
        c = row[j + 1]
        if c > 0:
            pos.append(row)
        elif c < 0:
            neg.append(row)
        else:
            rest.append(row)
    for p in pos:
        pj = p[j + 1]
        for q in neg:
            qj = q[j + 1]
            combo = tuple(
                Fraction(a * (-qj) + b * pj) for a, b in zip(p, q)
            )
            rest.append(_canonical(combo))
    if len(rest) > _FM_ROW_CAP:
        raise UnsupportedInstanceError("elimination blew past the row cap")
    return _sift(rest)


def _fm_solve(rows, nvars):
    """Feasibility of a rational inequality system, with a witness.

    Returns a list of Fractions satisfying every row, or None when the
    system is infeasible.
    """
    rows = _sift([_canonical(r) for r in rows])
    if rows is None:
        return None
    order = []
    stack = []
    alive = set(range(nvars))
    while alive:
        # cheapest variable first: fewest cross products
        def cost(j):
            p = sum(1 for r in rows if r[j + 1] > 0)
            q = sum(1 for r in rows if r[j + 1] < 0)
            return p * q if p * q else p + q

        j = min(alive, key=cost)
        alive.remove(j)
        order.append(j)
        stack.append((j, rows))
        rows = _eliminate(rows, j)
        if rows is None:
            return None
    values = [Fraction(0)] * nvars
    for j, rows_at in reversed(stack):
        lo, hi = None, None
        for row in rows_at:
            cj = Fraction(row[j + 1])
            if cj == 0:
                continue
            rest = Fraction(row[0])
            for k in range(nvars):
                if k != j and row[k + 1]:
                    rest += row[k + 1] * values[k]
            bound = -rest / cj
            if cj > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
        if lo is not None and hi is not None:
            if lo > hi:
                raise LinconeError("back substitution lost feasibility")
            values[j] = (lo + hi) / 2
        elif lo is not None:
            values[j] = lo
        elif hi is not None:
            values[j] = hi
    return values


def _fraction_matrix(mat):
    mat = as_matrix(mat)
    if not np.all(np.isfinite(mat)) or np.any(mat != np.rint(mat)):
        raise UnsupportedInstanceError("exact oracle needs integral entries")
    return [[Fraction(int(v)) for v in row] for row in mat]


def exact_support_oracle(mat):
    """Exact (S*, T*) of an integer instance by rational elimination.

    For each index i, decides whether some x >= 0 with Ax = 0 has x_i >= 1;
    the yes-set is S*. The complement is cross-checked by producing a
    rational y with A^T y >= 0 whose strict rows are exactly T*. Desk scale
    only: n <= 12, m <= 6.
    """
    mat = as_matrix(mat)
    m, n = mat.shape
    if n > 12 or m > 6:
        raise UnsupportedInstanceError("exact oracle is desk scale: n <= 12, m <= 6")
    fmat = _fraction_matrix(mat)

    def kernel_rows(target):
        rows = []
        zero = Fraction(0)
        for i in range(m):
            row = [zero] + [fmat[i][j] for j in range(n)]
            rows.append(tuple(row))
            rows.append(tuple(-c for c in row))
        for j in range(n):
            row = [zero] * (n + 1)
            row[j + 1] = Fraction(1)
            if j == target:
                row[0] = Fraction(-1)
            rows.append(tuple(row))
        return rows

    s_star = []
    for i in range(n):
        witness = _fm_solve(kernel_rows(i), n)
        if witness is None:
            continue
        # exactness audit: Ax = 0, x >= 0, x_i >= 1, all in rationals
        for r in range(m):
            if sum(fmat[r][j] * witness[j] for j in range(n)) != 0:
                raise LinconeError("kernel witness fails the equality check")
        if any(v < 0 for v in witness) or witness[i] < 1:
            raise LinconeError("kernel witness fails the sign check")
        s_star.append(i)
    t_star = [i for i in range(n) if i not in s_star]

    # dual cross-check: a y with strict rows exactly T*
    rows = []
    zero = Fraction(0)
    for j in range(n):
        row = [zero] + [fmat[i][j] for i in range(m)]
        if j in t_star:
            row[0] = Fraction(-1)
        rows.append(tuple(row))
    ywit = _fm_solve(rows, m)
    if ywit is None:
        raise LinconeError("no dual witness: support partition is inconsistent")
    for j in range(n):
        margin = sum(fmat[i][j] * ywit[i] for i in range(m))
        if j in t_star and margin < 1:
            raise LinconeError("dual witness not strict on T*")
        if j in s_star and margin != 0:
            raise LinconeError("dual witness not tight on S*")
    return np.array(s_star, dtype=int), np.array(t_star, dtype=int)


def reduce_lp_feasibility(problem: LPFeasibilityProblem):
    """Homogenize Ax <= b into a kernel instance M = [A | -A | I | -b].

    Columns are the positive part, negative part, slacks, and the
    homogenizing column; Ax <= b is feasible exactly when the last column's
    index lands in S*_M.
    """
    a = as_matrix(problem.mat)
    b = np.asarray(problem.rhs, dtype=float).reshape(-1)
    m, d = a.shape
    if b.shape[0] != m:
        raise ContractViolationError("rhs length does not match row count")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ContractViolationError("LP data must be finite")
    big = np.hstack([a, -a, np.eye(m), -b[:, None]])
    return big, 2 * d + m


def recover_lp_point(problem: LPFeasibilityProblem, cert) -> np.ndarray:
    """Pull an LP point out of a max-support kernel certificate on M.

    The certificate's x applies to unit-normalized columns, so it is
    unscaled first; then x = (x+ - x-)/t.
    """
    a = as_matrix(problem.mat)
    m, d = a.shape
    big, t_index = reduce_lp_feasibility(problem)
    norms = column_norms(big)
    # a zero column is an unconstrained variable; any coefficient works
    raw = cert.x / np.where(norms > 0.0, norms, 1.0)
    t = raw[t_index]
    if t <= 0:
        raise ContractViolationError("certificate has t = 0: system is infeasible")
    return (raw[:d] - raw[d : 2 * d]) / t


# ---------------------------------------------------------------------------
# file formats


def parse_instance(text: str) -> ConicInstance:
    """Parse the dense text format: header "m n", then m rows of n numbers.

    Comment lines start with '#'; blank lines are skipped. Malformed input
    raises a parse error carrying the offending line number.
    """
    header = None
    rows = []
    data_done = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("header must be 'm n'", line=lineno)
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise ParseError("header must hold two integers", line=lineno)
            if header[0] < 1 or header[1] < 1:
                raise ParseError("dimensions must be positive", line=lineno)
            continue
        if data_done:
            raise ParseError("data after the final matrix row", line=lineno)
        parts = line.split()
        if len(parts) != header[1]:
            raise ParseError(
                f"expected {header[1]} entries, found {len(parts)}", line=lineno
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError("non-numeric entry", line=lineno)
        if len(rows) == header[0]:
            data_done = True
    if header is None:
        raise ParseError("empty input")
    if len(rows) < header[0]:
        raise ParseError(f"expected {header[0]} rows, found {len(rows)}")
    mat = np.array(rows)
    is_integer = bool(np.all(np.isfinite(mat)) and np.all(mat == np.rint(mat)))
    return ConicInstance(mat, is_integer, "parsed")


def write_instance(inst: ConicInstance) -> str:
    """Canonical text form; integer instances print as integers."""
    m, n = inst.mat.shape
    lines = [f"{m} {n}"]
    for row in inst.mat:
        if inst.is_integer:
            lines.append(" ".join(str(int(v)) for v in row))
        else:
            lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_certificate(kind: str, vector: np.ndarray, support) -> str:
    """Certificate text: kind, the vector, then 1-based support indices."""
    if kind not in ("kernel", "image"):
        raise ContractViolationError("kind must be 'kernel' or 'image'")
    vec_line = " ".join(repr(float(v)) for v in np.asarray(vector).reshape(-1))
    sup_line = " ".join(str(int(i) + 1) for i in support)
    return f"{kind}\n{vec_line}\n{sup_line}\n"


def parse_certificate(text: str):
    """Inverse of write_certificate: returns (kind, vector, 0-based support)."""
    lines = [l for l in text.splitlines() if l.strip() and not l.strip().startswith("#")]
    if len(lines) < 2:
        raise ParseError("certificate needs a kind line and a vector line")
    kind = lines[0].strip()
    if kind not in ("kernel", "image"):
        raise ParseError(f"unknown certificate kind {kind!r}", line=1)
    try:
        vector = np.array([float(t) for t in lines[1].split()])
    except ValueError:
        raise ParseError("non-numeric vector entry", line=2)
    support = np.array([], dtype=int)
    if len(lines) >= 3 and lines[2].strip():
        try:
            support = np.array([int(t) - 1 for t in lines[2].split()], dtype=int)
        except ValueError:
            raise ParseError("non-integer support index", line=3)
        if np.any(support < 0):
            raise ParseError("support indices are 1-based", line=3)
    return kind, vector, support
