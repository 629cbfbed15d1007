from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from lincone.conditioning import (
    ConditionReport,
    condition_report,
    encoding_length,
    goffin_oracle,
    hadamard_delta,
    hadamard_delta_sq_exact,
    omega_oracle,
    theta,
)
from lincone.errors import ContractViolationError, UnsupportedInstanceError

from helpers import brute_force_delta, margin_on_grid


def lp_kernel_feasible(mat):
    """LP oracle: is there x > 0 with (normalized) A x = 0?"""
    mat = np.asarray(mat, dtype=float)
    norms = np.linalg.norm(mat, axis=0)
    hat = mat[:, norms > 0] / norms[norms > 0]
    res = linprog(
        c=np.zeros(hat.shape[1]),
        A_eq=hat,
        b_eq=np.zeros(hat.shape[0]),
        bounds=[(1, None)] * hat.shape[1],
        method="highs",
    )
    return res.status == 0


def lp_image_feasible(mat):
    """LP oracle: is there y with A^T y > 0 (strict on every column)?"""
    mat = np.asarray(mat, dtype=float)
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms == 0):
        return False
    hat = mat / norms
    res = linprog(
        c=np.zeros(hat.shape[0]),
        A_ub=-hat.T,
        b_ub=-np.ones(hat.shape[1]),
        bounds=[(None, None)] * hat.shape[0],
        method="highs",
    )
    return res.status == 0


class TestHadamardDelta:
    def test_identity(self):
        assert hadamard_delta(np.eye(2)) == pytest.approx(1.0)

    def test_two_units_and_long_column(self):
        mat = np.array([[1.0, 0.0, 3.0], [0.0, 1.0, 4.0]])
        assert hadamard_delta(mat) == pytest.approx(5.0)

    def test_single_row(self):
        assert hadamard_delta(np.array([[2.0, 4.0]])) == pytest.approx(4.0)

    def test_matches_exhaustive(self):
        rng = np.random.default_rng(101)
        for _ in range(60):
            m = rng.integers(1, 4)
            n = rng.integers(1, 7)
            mat = rng.integers(-6, 7, size=(m, n)).astype(float)
            if not np.any(mat):
                continue
            assert hadamard_delta(mat) == pytest.approx(brute_force_delta(mat), rel=1e-9)

    def test_exact_square_agrees(self):
        rng = np.random.default_rng(102)
        for _ in range(30):
            mat = rng.integers(-9, 10, size=(3, 5)).astype(float)
            if not np.any(mat):
                continue
            sq = hadamard_delta_sq_exact(mat)
            assert float(sq) == pytest.approx(hadamard_delta(mat) ** 2, rel=1e-9)


class TestTheta:
    def test_identity(self):
        assert theta(np.eye(2)) == pytest.approx(0.25)

    def test_long_column(self):
        assert theta(np.array([[1.0, 0.0, 3.0], [0.0, 1.0, 4.0]])) == pytest.approx(0.01)

    def test_single_row(self):
        assert theta(np.array([[2.0, 4.0]])) == pytest.approx(1.0 / 16.0)


class TestEncodingLength:
    def test_zero(self):
        assert encoding_length(np.array([[0.0]])) == 1

    def test_identity(self):
        assert encoding_length(np.eye(2)) == 6

    def test_mixed(self):
        assert encoding_length(np.array([[2.0, 4.0]])) == 7

    def test_sign_independent(self):
        rng = np.random.default_rng(110)
        mat = rng.integers(-9, 10, size=(3, 4)).astype(float)
        assert encoding_length(mat) == encoding_length(-mat)

    def test_rejects_fractional(self):
        with pytest.raises(UnsupportedInstanceError):
            encoding_length(np.array([[0.5]]))

    def test_delta_below_power_of_encoding(self):
        # The bit-size formula must dominate the column-product bound.
        rng = np.random.default_rng(111)
        for _ in range(40):
            m = rng.integers(1, 4)
            n = rng.integers(1, 7)
            mat = rng.integers(-10, 11, size=(m, n)).astype(float)
            if not np.any(mat):
                continue
            bits = encoding_length(mat)
            assert bits >= m
            assert bits >= n
            assert hadamard_delta(mat) <= 2.0 ** bits * (1 + 1e-12)


class TestGoffinOracle:
    def test_opposite_pair(self):
        assert goffin_oracle(np.array([[1.0, -1.0]])) == pytest.approx(-1.0)

    def test_identity_two(self):
        rho = goffin_oracle(np.eye(2), tol=1e-6)
        assert rho == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-6)

    def test_boundary_case(self):
        mat = np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
        assert goffin_oracle(mat, tol=1e-7) == pytest.approx(0.0, abs=1e-6)

    def test_rank_one_embedded(self):
        # Two antipodal columns inside a 3-row matrix exercise the rank-1 path.
        mat = np.array([[2.0, -4.0], [2.0, -4.0], [1.0, -2.0]])
        assert goffin_oracle(mat) == pytest.approx(-1.0)

    def test_matches_sampled_margin(self):
        rng = np.random.default_rng(120)
        for _ in range(12):
            m = int(rng.integers(2, 4))
            n = int(rng.integers(m, 7))
            mat = rng.integers(-10, 11, size=(m, n)).astype(float)
            if np.any(np.linalg.norm(mat, axis=0) == 0):
                continue
            rho = goffin_oracle(mat, tol=1e-5)
            lo = margin_on_grid(mat, rng=rng)
            assert rho >= lo - 1e-5
            assert rho <= lo + 0.05  # sampling gets within a few hundredths

    def test_sign_matches_lp_feasibility(self):
        rng = np.random.default_rng(121)
        checked = 0
        for _ in range(60):
            m = int(rng.integers(1, 4))
            n = int(rng.integers(2, 7))
            mat = rng.integers(-10, 11, size=(m, n)).astype(float)
            if np.any(np.linalg.norm(mat, axis=0) == 0):
                continue
            rho = goffin_oracle(mat, tol=1e-5)
            if abs(rho) < 1e-3:
                continue
            checked += 1
            if rho < 0:
                assert lp_kernel_feasible(mat)
            else:
                assert lp_image_feasible(mat)
        assert checked >= 30

    def test_high_rank_rejected(self):
        with pytest.raises(UnsupportedInstanceError):
            goffin_oracle(np.eye(6))

    def test_zero_matrix_rejected(self):
        with pytest.raises(ContractViolationError):
            goffin_oracle(np.zeros((2, 2)))

    def test_rank_four_simplex(self):
        # Regular simplex columns in R^4: margin of the identity-like frame.
        rho = goffin_oracle(np.eye(4), tol=1e-4)
        assert rho == pytest.approx(0.5, abs=1e-4)


class TestOmegaOracle:
    def test_identity_full_marks(self):
        # Widths of the nonnegative quadrant cap along each axis are 1.
        assert omega_oracle(np.eye(2), [0, 1]) == pytest.approx(1.0, abs=1e-9)

    def test_single_ray(self):
        assert omega_oracle(np.array([[1.0]]), [0]) == pytest.approx(1.0)

    def test_thin_cone(self):
        # Cap {y1 >= 0, -y1 + 10 y2 >= 0} is thin along the first column.
        mat = np.array([[1.0, -1.0], [0.0, 10.0]])
        w = omega_oracle(mat, [0, 1])
        # Width along (1,0): the cap reaches x = 10/sqrt(101) at the boundary ray.
        assert w == pytest.approx(10.0 / np.sqrt(101.0), abs=1e-9)

    def test_dominates_goffin_when_all_marked(self):
        rng = np.random.default_rng(130)
        done = 0
        while done < 15:
            m = int(rng.integers(2, 4))
            n = int(rng.integers(m, 7))
            ystar = rng.standard_normal(m)
            ystar /= np.linalg.norm(ystar)
            cols = []
            for _ in range(n):
                c = rng.uniform(0.2, 0.9)
                w = rng.standard_normal(m)
                w -= (w @ ystar) * ystar
                wn = np.linalg.norm(w)
                if wn < 1e-12:
                    continue
                cols.append(c * ystar + np.sqrt(1 - c * c) * w / wn)
            if len(cols) < m:
                continue
            mat = np.stack(cols, axis=1)
            rho = goffin_oracle(mat, tol=1e-6)
            if rho <= 0:
                continue
            w = omega_oracle(mat, list(range(mat.shape[1])))
            assert w >= rho - 1e-5
            done += 1

    def test_matches_sampling(self):
        # The reported value is the least width over the marked columns, so
        # the min of the per-column sampled widths is a valid lower bound.
        rng = np.random.default_rng(131)
        for _ in range(10):
            mat = rng.standard_normal((3, 4))
            if np.any(np.linalg.norm(mat, axis=0) < 1e-9):
                continue
            t_star = [0, 1]
            w = omega_oracle(mat, t_star)
            z = rng.standard_normal((20000, 3))
            z /= np.maximum(np.linalg.norm(z, axis=1), 1.0)[:, None]
            feas = z[(z @ mat).min(axis=1) >= 0.0]
            if feas.shape[0] < 50:
                continue
            sampled = []
            for i in t_star:
                d = mat[:, i] / np.linalg.norm(mat[:, i])
                sampled.append(float((feas @ d).max()))
            assert min(sampled) <= w + 1e-9

    def test_empty_marks_rejected(self):
        with pytest.raises(ContractViolationError):
            omega_oracle(np.eye(2), [])


class TestLowerBoundChain:
    def test_margin_dominates_theta_on_integer_corpus(self):
        rng = np.random.default_rng(140)
        checked = 0
        for _ in range(80):
            m = int(rng.integers(1, 4))
            n = int(rng.integers(1, 7))
            mat = rng.integers(-10, 11, size=(m, n)).astype(float)
            if not np.any(mat) or np.any(np.linalg.norm(mat, axis=0) == 0):
                continue
            tol = 1e-5
            rho = goffin_oracle(mat, tol=tol)
            if abs(rho) <= 1e-3:
                continue
            checked += 1
            th = Fraction(1, m * m * hadamard_delta_sq_exact(mat))
            bits = encoding_length(mat)
            assert abs(rho) >= float(th) - tol
            assert th >= Fraction(1, 2 ** (4 * bits))
        assert checked >= 40

    def test_report_fields(self):
        rep = condition_report(np.array([[1.0, 0.0, 3.0], [0.0, 1.0, 4.0]]), tol=1e-5)
        assert isinstance(rep, ConditionReport)
        assert rep.delta == pytest.approx(5.0)
        assert rep.theta == pytest.approx(1.0 / (4 * 25.0))
        assert rep.encoding_length == encoding_length(np.array([[1, 0, 3], [0, 1, 4]]))
        assert rep.rho_accuracy == 1e-5
        assert rep.theta == pytest.approx(1.0 / (4 * rep.delta**2))

    def test_report_float_input_has_no_bits(self):
        rep = condition_report(np.array([[0.5, -0.25]]))
        assert rep.encoding_length is None
        assert rep.kernel_feasible_hint
