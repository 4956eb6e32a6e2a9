import numpy as np
import pytest

from strongchain import (
    AffineField,
    ChainParams,
    ConstantField,
    HypothesisViolation,
    PowerLaw,
    TabulatedLaw,
    check_theorem1,
    check_theorem2,
    continuum_study,
    distance,
    find_N0,
    gap_profile,
    interior_branch,
    reflect_field,
    shoot_solve,
    zero_force_solution,
)
from strongchain.analysis import lemma2_witness, predicted_b, theorem2_prediction


class TestGapProfile:
    def test_equispaced(self):
        prof = gap_profile(zero_force_solution(5, 1.0), 1.0)
        np.testing.assert_allclose(prof.deltas, 0.0, atol=1e-15)

    def test_arithmetic(self):
        prof = gap_profile([0.0, 0.6, 1.0], 1.0)
        np.testing.assert_allclose(prof.gaps, [0.6, 0.4])
        np.testing.assert_allclose(prof.deltas, [0.2, -0.2])
        assert prof.b == pytest.approx(0.2)

    def test_telescoping_zero_sum(self):
        rng = np.random.default_rng(1)
        x = np.concatenate([[0.0], np.sort(rng.uniform(0, 2.0, 20)), [2.0]])
        assert abs(np.sum(gap_profile(x, 2.0).deltas)) < 1e-12


class TestTheorem1:
    def test_zero_force(self, unit_chain):
        rep = check_theorem1(unit_chain(3), (10, 40, 160))
        assert all(r.D < 1e-12 for r in rep.records)
        assert rep.passed

    def test_constant_force_tracks_prediction(self, unit_chain):
        rep = check_theorem1(unit_chain(3, ConstantField(1.0)), (50, 200, 800))
        D = rep.column("D")
        assert np.all(np.diff(D) < 0)
        # D(N) ~ F L^a / (2a) N^(1-a) = 0.25 / N
        np.testing.assert_allclose(D * np.array([50, 200, 800]), 0.25, rtol=0.02)

    def test_zero_sum_of_deltas(self, unit_chain, linear_field):
        rep = check_theorem1(unit_chain(3, linear_field), (50, 200, 800))
        for r in rep.records:
            assert abs(r.zero_sum) < 1e-10 * r.N

    def test_requires_nonincreasing(self, unit_chain):
        with pytest.raises(HypothesisViolation):
            check_theorem1(unit_chain(3, AffineField(0.0, 1.0)), (10, 20))


class TestTheorem2:
    def test_prediction_value(self):
        assert theorem2_prediction(1.0, 1.0, 2.0, 400)[0] == pytest.approx(0.5 * 400**-2 * 199, rel=1e-15)
        assert theorem2_prediction(1.0, 1.0, 2.0, 400)[0] == pytest.approx(6.21875e-4, rel=1e-12)
        assert predicted_b(1.0, 1.0, 2.0, 400) == pytest.approx(0.25 / 400)

    def test_zero_force(self, unit_chain):
        rep = check_theorem2(unit_chain(3), (20, 40))
        assert all(r.E < 1e-12 and r.b_predicted == 0 for r in rep.records)

    def test_constant_force(self, unit_chain):
        rep = check_theorem2(unit_chain(3, ConstantField(1.0)), (100, 200, 400))
        assert rep.passed, rep.criteria
        assert rep.records[-1].E < 0.1

    def test_requires_constant_field(self, unit_chain, linear_field):
        with pytest.raises(HypothesisViolation):
            check_theorem2(unit_chain(3, linear_field), (10, 20))

    def test_requires_pure_power_law(self):
        r = np.linspace(0.001, 2, 50)
        p = ChainParams(3, law=TabulatedLaw(tuple(zip(r, r**-2))), field=ConstantField(1.0))
        with pytest.raises(HypothesisViolation):
            check_theorem2(p, (10, 20))

    @pytest.mark.parametrize("n", [400, 800])
    def test_sign_structure(self, unit_chain, n):
        res = shoot_solve(unit_chain(n, ConstantField(1.0)))
        d = gap_profile(res.configuration, 1.0).deltas
        k = np.arange(1, n)
        assert np.all(d[k <= n / 4] > 0)
        assert np.all(d[k >= 3 * n / 4] < 0)

    @pytest.mark.parametrize("a", [1.5, 2.0, 3.0])
    def test_scaling_corridor(self, unit_chain, a):
        rep = check_theorem1(unit_chain(3, ConstantField(1.0), a=a), (50, 100, 200, 400))
        const = 1.0 / (2 * a)
        scaled = rep.column("D") * np.array([50, 100, 200, 400]) ** (a - 1)
        assert np.all(scaled < 2 * const) and np.all(scaled > const / 2)


class TestLemma2:
    def test_zero_force_returns_start(self, unit_chain):
        assert find_N0(unit_chain(3), 7) == 7

    def test_constant_force_witness(self, unit_chain):
        n0, later = lemma2_witness(unit_chain(3, ConstantField(1.0)))
        assert n0 >= 3
        assert later[2 * n0] and later[4 * n0]

    def test_doubling_is_consistent(self, unit_chain):
        p = unit_chain(3, AffineField(500.0, -1000.0))
        n0 = find_N0(p, 3)
        assert n0 > 3
        assert not interior_branch(p.with_n(2 * n0)).feasible


class TestContinuum:
    def test_all_samples_are_fixed_points(self):
        rep = continuum_study(PowerLaw(2.0), 0.25, sample_count=33, table_points=4096)
        assert rep.n_fixed_points == 33
        assert rep.max_residual < 1e-6
        assert rep.x2[0] == 0.25 and rep.x2[-1] == 0.75

    def test_symmetric_point_included(self):
        rep = continuum_study(PowerLaw(2.0), 0.25, sample_count=33, table_points=4097)
        i = np.argmin(np.abs(rep.x2 - 0.5))
        assert rep.x2[i] == pytest.approx(0.5)
        assert rep.residuals[i] < 1e-12


def test_reflection_symmetry(unit_chain):
    p = unit_chain(40, AffineField(0.0, 1.0))
    x = shoot_solve(p).configuration
    y = shoot_solve(p.replace(field=reflect_field(p.field, 1.0))).configuration
    assert distance(x, 1.0 - y[::-1]) < 1e-9 * 40
