import numpy as np
import pytest

from lincone.conditioning import goffin_oracle
from lincone.errors import (
    ContractViolationError,
    ParseError,
    UnsupportedInstanceError,
)
from lincone.instances import (
    ConicInstance,
    LPFeasibilityProblem,
    exact_support_oracle,
    gen_degenerate,
    gen_image_feasible,
    gen_kernel_feasible,
    parse_certificate,
    parse_instance,
    recover_lp_point,
    reduce_lp_feasibility,
    write_certificate,
    write_instance,
)
from lincone.kernel import max_support_kernel


class TestGenKernelFeasible:
    def test_line_instance(self):
        inst = gen_kernel_feasible(1, 2, 0.5, seed=0)
        assert sorted(inst.mat.flatten()) == [-1.0, 1.0]
        assert inst.known_rho == pytest.approx(-1.0, abs=1e-3)

    def test_certified_rho(self):
        inst = gen_kernel_feasible(2, 4, 0.3, seed=7)
        assert inst.known_rho is not None and inst.known_rho <= -0.3
        assert goffin_oracle(inst.mat, 1e-4) <= -0.3 + 2e-4

    def test_unit_columns_and_witness(self):
        inst = gen_kernel_feasible(3, 6, 0.05, seed=11)
        norms = np.linalg.norm(inst.mat, axis=0)
        assert np.allclose(norms, 1.0)
        # the construction's positive combination: ones on the sampled
        # columns, the dropped sum's length on the last
        total = inst.mat[:, :-1].sum(axis=1)
        w = np.append(np.ones(inst.mat.shape[1] - 1), np.linalg.norm(total))
        assert np.abs(inst.mat @ w).max() <= 1e-10

    def test_beyond_oracle_scale_has_no_rho(self):
        inst = gen_kernel_feasible(5, 9, 0.1, seed=3)
        assert inst.known_rho is None
        w = np.append(
            np.ones(8), np.linalg.norm(inst.mat[:, :-1].sum(axis=1))
        )
        assert np.abs(inst.mat @ w).max() <= 1e-10

    def test_deterministic(self):
        a = gen_kernel_feasible(2, 5, 0.2, seed=42)
        b = gen_kernel_feasible(2, 5, 0.2, seed=42)
        assert np.array_equal(a.mat, b.mat)

    def test_preconditions(self):
        with pytest.raises(ContractViolationError):
            gen_kernel_feasible(3, 3, 0.1, seed=0)
        with pytest.raises(ContractViolationError):
            gen_kernel_feasible(2, 4, 1.5, seed=0)

    def test_unreachable_target_exhausts_budget(self):
        with pytest.raises(UnsupportedInstanceError):
            gen_kernel_feasible(2, 12, 0.99, seed=0)


class TestGenImageFeasible:
    def test_line_instance(self):
        inst = gen_image_feasible(1, 1, 0.5, seed=0)
        assert abs(abs(inst.mat[0, 0]) - 1.0) < 1e-12
        assert goffin_oracle(inst.mat, 1e-4) == pytest.approx(1.0, abs=1e-3)

    def test_margin_lower_bound(self):
        inst = gen_image_feasible(2, 5, 0.1, seed=5)
        assert inst.known_rho == 0.1
        assert goffin_oracle(inst.mat, 1e-4) >= 0.1 - 2e-4
        assert np.allclose(np.linalg.norm(inst.mat, axis=0), 1.0)

    def test_deterministic(self):
        a = gen_image_feasible(3, 7, 0.2, seed=9)
        b = gen_image_feasible(3, 7, 0.2, seed=9)
        assert np.array_equal(a.mat, b.mat)


class TestGenDegenerate:
    def test_prescribed_split(self):
        inst = gen_degenerate(2, 3, 2, seed=1)
        assert inst.is_integer
        s_idx, t_idx = inst.known_supports
        assert list(s_idx) == [0, 1]
        assert list(t_idx) == [2]
        s_star, t_star = exact_support_oracle(inst.mat)
        assert np.array_equal(s_star, s_idx)
        assert np.array_equal(t_star, t_idx)

    def test_single_kernel_column_is_zero(self):
        inst = gen_degenerate(2, 4, 1, seed=2)
        assert np.all(inst.mat[:, 0] == 0)
        s_idx, t_idx = inst.known_supports
        assert list(s_idx) == [0]

    def test_one_dimensional(self):
        inst = gen_degenerate(1, 3, 1, seed=3)
        assert np.all(inst.mat[:, 0] == 0)
        assert np.all(inst.mat[:, 1:] >= 1)

    def test_full_rank_always(self):
        for seed in range(6):
            inst = gen_degenerate(3, 6, 3, seed=seed)
            assert np.linalg.matrix_rank(inst.mat) == 3

    def test_solver_agrees(self):
        inst = gen_degenerate(3, 6, 3, seed=8)
        cert, support, report = max_support_kernel(inst.mat)
        assert np.array_equal(support, inst.known_supports[0])

    def test_preconditions(self):
        with pytest.raises(ContractViolationError):
            gen_degenerate(2, 3, 3, seed=0)
        with pytest.raises(ContractViolationError):
            gen_degenerate(2, 3, 0, seed=0)


class TestExactSupportOracle:
    def test_antipodal(self):
        s, t = exact_support_oracle(np.array([[1, -1]]))
        assert list(s) == [0, 1] and list(t) == []

    def test_identity(self):
        s, t = exact_support_oracle(np.eye(2, dtype=int))
        assert list(s) == [] and list(t) == [0, 1]

    def test_worked_example(self):
        s, t = exact_support_oracle(np.array([[1, -1, 1], [0, 0, 1]]))
        assert list(s) == [0, 1] and list(t) == [2]

    def test_zero_column_in_kernel_support(self):
        s, t = exact_support_oracle(np.array([[0, 1]]))
        assert list(s) == [0] and list(t) == [1]

    def test_one_sided(self):
        s, t = exact_support_oracle(np.array([[1, 2]]))
        assert list(s) == [] and list(t) == [0, 1]

    def test_medley(self):
        s, t = exact_support_oracle(np.array([[1, -1, 3, 0], [0, 0, 1, 1]]))
        assert list(s) == [0, 1] and list(t) == [2, 3]

    def test_fractional_rejected(self):
        with pytest.raises(UnsupportedInstanceError):
            exact_support_oracle(np.array([[0.5, 1.0]]))

    def test_desk_scale_enforced(self):
        with pytest.raises(UnsupportedInstanceError):
            exact_support_oracle(np.zeros((7, 3), dtype=int))
        with pytest.raises(UnsupportedInstanceError):
            exact_support_oracle(np.zeros((2, 13), dtype=int))

    def test_partition_and_sign_consistency(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            m = int(rng.integers(1, 4))
            n = int(rng.integers(2, 7))
            mat = rng.integers(-5, 6, size=(m, n))
            s, t = exact_support_oracle(mat)
            assert sorted(list(s) + list(t)) == list(range(n))
            if np.all(np.any(mat != 0, axis=0)):
                rho = goffin_oracle(mat, 1e-4)
                if rho < -1e-3:
                    assert list(s) == list(range(n))
                elif rho > 1e-3:
                    assert list(t) == list(range(n))


class TestReduceLpFeasibility:
    def test_shapes_and_index(self):
        prob = LPFeasibilityProblem(np.array([[1.0]]), np.array([1.0]))
        big, t_index = reduce_lp_feasibility(prob)
        assert np.array_equal(big, np.array([[1.0, -1.0, 1.0, -1.0]]))
        assert t_index == 3

    def test_feasible_system_routes_to_kernel_support(self):
        prob = LPFeasibilityProblem(np.array([[1.0]]), np.array([1.0]))
        big, t_index = reduce_lp_feasibility(prob)
        s, t = exact_support_oracle(big)
        assert t_index in s

    def test_infeasible_forcing_row(self):
        prob = LPFeasibilityProblem(np.array([[0.0]]), np.array([-1.0]))
        big, t_index = reduce_lp_feasibility(prob)
        assert np.array_equal(big, np.array([[0.0, 0.0, 1.0, 1.0]]))
        s, t = exact_support_oracle(big)
        assert t_index not in s

    def test_contradictory_bounds(self):
        prob = LPFeasibilityProblem(np.array([[1.0], [-1.0]]), np.array([-1.0, 0.0]))
        big, t_index = reduce_lp_feasibility(prob)
        s, t = exact_support_oracle(big)
        assert t_index not in s

    def test_recover_point(self):
        prob = LPFeasibilityProblem(
            np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]),
            np.array([2.0, 2.0, 1.0]),
        )
        big, t_index = reduce_lp_feasibility(prob)
        cert, support, report = max_support_kernel(big)
        assert t_index in support
        x = recover_lp_point(prob, cert)
        assert np.all(prob.mat @ x <= prob.rhs + 1e-8)

    def test_recover_rejects_zero_t(self):
        prob = LPFeasibilityProblem(np.array([[0.0]]), np.array([-1.0]))
        big, t_index = reduce_lp_feasibility(prob)
        cert, support, report = max_support_kernel(big)
        assert t_index not in support
        with pytest.raises(ContractViolationError):
            recover_lp_point(prob, cert)


class TestInstanceIO:
    def test_parse_identity(self):
        inst = parse_instance("2 2\n1 0\n0 1\n")
        assert np.array_equal(inst.mat, np.eye(2))
        assert inst.is_integer
        assert inst.provenance == "parsed"

    def test_parse_with_comments(self):
        inst = parse_instance("# header comment\n1 2\n1 -1\n# done\n")
        assert np.array_equal(inst.mat, np.array([[1.0, -1.0]]))

    def test_integer_detection_from_values(self):
        inst = parse_instance("1 2\n1.0 -3.0\n")
        assert inst.is_integer
        inst = parse_instance("1 2\n1.5 -3.0\n")
        assert not inst.is_integer

    def test_errors_carry_line_numbers(self):
        with pytest.raises(ParseError) as info:
            parse_instance("2 2\n1 0\n0\n")
        assert info.value.line == 3
        with pytest.raises(ParseError):
            parse_instance("2\n1 0\n0 1\n")
        with pytest.raises(ParseError) as info:
            parse_instance("1 2\n1 x\n")
        assert info.value.line == 2
        with pytest.raises(ParseError):
            parse_instance("1 2\n1 0\n5 5\n")
        with pytest.raises(ParseError):
            parse_instance("")
        with pytest.raises(ParseError):
            parse_instance("2 2\n1 0\n")

    def test_round_trip_floats(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(1, 7))
            inst = ConicInstance(rng.standard_normal((m, n)), False, "generated")
            again = parse_instance(write_instance(inst))
            assert np.array_equal(again.mat, inst.mat)

    def test_round_trip_integers_canonical(self):
        inst = parse_instance("2 2\n1.0 0\n0 1\n")
        assert write_instance(inst) == "2 2\n1 0\n0 1\n"


class TestCertificateIO:
    def test_kernel_round_trip(self):
        text = write_certificate("kernel", np.array([0.5, 0.5, 0.0]), [0, 1])
        kind, vec, sup = parse_certificate(text)
        assert kind == "kernel"
        assert np.array_equal(vec, [0.5, 0.5, 0.0])
        assert list(sup) == [0, 1]

    def test_support_is_one_based_in_text(self):
        text = write_certificate("image", np.array([1.0]), [0, 2])
        assert text.splitlines()[2] == "1 3"

    def test_empty_support(self):
        text = write_certificate("kernel", np.array([0.0]), [])
        kind, vec, sup = parse_certificate(text)
        assert sup.size == 0

    def test_parse_errors(self):
        with pytest.raises(ParseError):
            parse_certificate("wedge\n1 2\n1\n")
        with pytest.raises(ParseError):
            parse_certificate("kernel\n")
        with pytest.raises(ParseError):
            parse_certificate("kernel\n1 x\n1\n")
        with pytest.raises(ParseError):
            parse_certificate("kernel\n1 2\n0\n")
        with pytest.raises(ContractViolationError):
            write_certificate("wedge", np.array([1.0]), [])
