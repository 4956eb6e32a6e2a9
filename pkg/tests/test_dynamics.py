import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from strongchain import (
    ChainState,
    ConstantField,
    DomainError,
    StiffnessError,
    distance,
    net_force,
    shoot_solve,
    simulate,
    step,
    total_energy,
    zero_force_solution,
)
from strongchain.dynamics import default_dt, random_state


class TestNetForce:
    def test_equilibrium_is_force_free(self, unit_chain):
        p = unit_chain(6)
        state = ChainState(zero_force_solution(6, 1.0), np.zeros(6))
        force = net_force(p, state)
        np.testing.assert_allclose(force[1:-1], 0.0, atol=1e-12)
        # end particles report their unconstrained push into the walls
        assert force[0] == pytest.approx(-25.0) and force[-1] == pytest.approx(25.0)

    def test_single_pair(self, unit_chain):
        state = ChainState([0.0, 0.5], [0.0, 0.0])
        np.testing.assert_allclose(net_force(unit_chain(2), state), [-4.0, 4.0])

    def test_damping_is_linear(self, unit_chain):
        p = unit_chain(4, ConstantField(0.3), damping=0.7)
        x = np.array([0.1, 0.3, 0.6, 0.9])
        v = np.array([0.5, -1.0, 2.0, 0.25])
        diff = net_force(p, ChainState(x, v)) - net_force(p, ChainState(x, np.zeros(4)))
        np.testing.assert_allclose(diff, -0.7 * v, rtol=1e-12)

    def test_coincident_positions(self, unit_chain):
        with pytest.raises(DomainError):
            ChainState([0.0, 0.5, 0.5], [0.0, 0.0, 0.0])


class TestEnergy:
    def test_pair_only(self, unit_chain):
        assert total_energy(unit_chain(2), ChainState([0.0, 1.0], [0.0, 0.0])) == pytest.approx(1.0)

    def test_kinetic_and_pair(self, unit_chain):
        p = unit_chain(2, mass=2.0)
        assert total_energy(p, ChainState([0.0, 1.0], [0.5, -0.5])) == pytest.approx(1.5)

    def test_field_term(self, unit_chain):
        p = unit_chain(2, ConstantField(1.0))
        assert total_energy(p, ChainState([0.0, 1.0], [0.0, 0.0])) == pytest.approx(0.0, abs=1e-15)


class TestStep:
    def test_stuck_particle_stays(self, unit_chain):
        # F(0) - f(x2) = 1 - 4 < 0 keeps particle 1 on the wall
        p = unit_chain(3, ConstantField(1.0), damping=1.0)
        state = ChainState([0.0, 0.5, 0.9], [0.0, 0.0, 0.0], stuck_left=True)
        dt = default_dt(p)
        for _ in range(50):
            state = step(p, state, dt)
            assert state.positions[0] == 0.0 and state.velocities[0] == 0.0
            assert state.stuck_left

    def test_fixed_point_is_stationary(self, unit_chain):
        p = unit_chain(8, ConstantField(1.0), damping=1.0)
        state = ChainState.at_rest(p, shoot_solve(p).configuration)
        assert state.stuck_left and state.stuck_right
        new = step(p, state, default_dt(p))
        np.testing.assert_allclose(new.positions, state.positions, atol=1e-14)

    def test_inelastic_impact(self, unit_chain):
        p = unit_chain(3, damping=0.5)
        state = ChainState([1e-4, 0.5, 0.9], [-2.0, 0.0, 0.0])
        events = []
        new = step(p, state, 1e-3, events)
        assert new.positions[0] == 0.0 and new.velocities[0] == 0.0
        assert new.stuck_left
        assert len(events) == 1
        ev = events[0]
        assert ev.side == "left" and ev.v_pre < 0
        assert ev.kinetic_removed > 0
        assert ev.energy_after < ev.energy_before

    def test_release_from_wall(self, unit_chain):
        # a strong field pulls particle 1 off the wall: F(0) - f(x2) = 10 - 1/0.9^2 > 0
        p = unit_chain(2, ConstantField(10.0), damping=0.1)
        state = ChainState([0.0, 0.9], [0.0, 0.0], stuck_left=True)
        new = step(p, state, 1e-3)
        assert not new.stuck_left
        assert new.velocities[0] > 0

    def test_right_wall_mirrors_left(self, unit_chain):
        p = unit_chain(3, damping=0.5)
        events = []
        new = step(p, ChainState([0.1, 0.5, 1.0 - 1e-4], [0.0, 0.0, 2.0]), 1e-3, events)
        assert new.positions[-1] == 1.0 and new.stuck_right
        assert events[0].side == "right" and events[0].v_pre > 0

    def test_dt_underflow_raises(self, unit_chain):
        p = unit_chain(3, damping=1.0)
        state = ChainState([0.0, 0.5, 1.0], [0.0, 0.0, 0.0])
        with pytest.raises(StiffnessError) as info:
            step(p, state, 1e-3, gap_floor=0.9)
        assert info.value.state is not None

    def test_nonpositive_dt(self, unit_chain):
        with pytest.raises(DomainError):
            step(unit_chain(2), ChainState([0.0, 1.0], [0.0, 0.0]), 0.0)


class TestSimulate:
    def test_equilibrium_stays_put(self, unit_chain):
        p = unit_chain(8, ConstantField(1.0), damping=1.0)
        x_star = shoot_solve(p).configuration
        rec = simulate(p, ChainState.at_rest(p, x_star), 2.0, 0.5, target=x_star)
        assert np.max(rec.distances) < 1e-10
        assert rec.wall_events == []

    def test_conservation_without_damping(self, unit_chain):
        p = unit_chain(5)
        x = zero_force_solution(5, 1.0)
        x[1:-1] += np.array([0.01, -0.015, 0.005])
        rec = simulate(p, ChainState.at_rest(p, x), 10.0, 0.5)
        assert rec.wall_events == []
        assert np.max(np.abs(rec.energies - rec.energies[0])) < 1e-6 * rec.energies[0]

    def test_dissipation_order_and_impacts(self, unit_chain):
        p = unit_chain(6, ConstantField(1.0), damping=1.0)
        init = random_state(p, np.random.default_rng(3), max_speed=2.0)
        rec = simulate(p, init, 8.0, 0.05)
        H = rec.energies
        assert np.all(np.diff(H) <= 1e-9 * (1 + np.abs(H[:-1])))
        assert np.all(np.diff(rec.final_state.positions) > 0)
        for ev in rec.wall_events:
            assert ev.kinetic_removed > 0
            assert ev.energy_after <= ev.energy_before
        assert rec.events_so_far[-1] == len(rec.wall_events)

    def test_sample_grid(self, unit_chain):
        p = unit_chain(3, damping=1.0)
        rec = simulate(p, ChainState.at_rest(p, [0.0, 0.4, 1.0]), 1.0, 0.25)
        np.testing.assert_allclose(rec.times, [0, 0.25, 0.5, 0.75, 1.0])
        assert rec.distances is None


class TestDistance:
    def test_identical(self):
        assert distance([0, 0.5, 1], [0, 0.5, 1]) == 0.0

    def test_example(self):
        assert distance([0, 0.5, 1], [0, 0.6, 1]) == pytest.approx(0.1)

    def test_size_mismatch(self):
        with pytest.raises(DomainError):
            distance([0, 1], [0, 0.5, 1])

    @given(
        arrays(np.float64, 7, elements=st.floats(-10, 10)),
        arrays(np.float64, 7, elements=st.floats(-10, 10)),
    )
    def test_symmetric(self, a, b):
        assert distance(a, b) == distance(b, a)
