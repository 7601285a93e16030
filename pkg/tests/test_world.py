"""Unit tests for the kinematic world model."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from litelfuzz.world import (AgentState, FailureKind, InvalidState, MissionSpec,
                             Obstacle, WorldState, clamp_norm, detect_failure,
                             integrate_step, min_obstacle_distance)


def make_spec(**overrides):
    base = dict(goal=np.array([4.0, 0.0]), goal_tolerance=0.05,
                safe_distance=0.1, v_max=1.5, a_max=3.0,
                formation_min=0.1, formation_max=0.95, dt=0.05,
                nominal_steps=100, timeout_multiplier=2.0,
                collision_radius=0.05)
    base.update(overrides)
    return MissionSpec(**base)


def make_agent(pos, vel=None, agent_id=0, sensing=0.5, role="follower"):
    pos = np.asarray(pos, dtype=float)
    vel = np.zeros_like(pos) if vel is None else np.asarray(vel, dtype=float)
    return AgentState(agent_id, pos, vel, np.zeros_like(pos), sensing, role)


# -- obstacles ---------------------------------------------------------------

class TestObstacle:
    def test_circle_signed_distance(self):
        obs = Obstacle.circle([1.0, 1.0], 0.5)
        assert obs.surface_distance(np.array([2.5, 1.0])) == pytest.approx(1.0)
        assert obs.surface_distance(np.array([1.0, 1.0])) == pytest.approx(-0.5)
        assert obs.surface_distance(np.array([1.5, 1.0])) == pytest.approx(0.0)

    def test_box_outside_distance_is_euclidean_to_closest_corner(self):
        obs = Obstacle.box([0.0, 0.0], [1.0, 1.0])
        assert obs.surface_distance(np.array([2.0, 2.0])) == pytest.approx(math.sqrt(2.0))
        assert obs.surface_distance(np.array([0.5, 1.5])) == pytest.approx(0.5)

    def test_box_inside_is_negative_depth_to_nearest_face(self):
        obs = Obstacle.box([0.0, 0.0], [1.0, 2.0])
        assert obs.surface_distance(np.array([0.1, 1.0])) == pytest.approx(-0.1)
        assert obs.surface_distance(np.array([0.5, 0.2])) == pytest.approx(-0.2)

    def test_outward_direction_is_unit_and_points_away(self):
        obs = Obstacle.circle([0.0, 0.0], 1.0)
        d = obs.outward_direction(np.array([0.0, 2.0]))
        np.testing.assert_allclose(d, [0.0, 1.0])
        box = Obstacle.box([0.0, 0.0], [1.0, 1.0])
        d = box.outward_direction(np.array([0.5, -1.0]))
        np.testing.assert_allclose(d, [0.0, -1.0])
        inside = box.outward_direction(np.array([0.5, 0.9]))
        np.testing.assert_allclose(inside, [0.0, 1.0])
        assert np.linalg.norm(inside) == pytest.approx(1.0)

    def test_bounding_circle_encloses_box(self):
        obs = Obstacle.box([0.0, 0.0], [2.0, 1.0])
        center, radius = obs.bounding_circle()
        np.testing.assert_allclose(center, [1.0, 0.5])
        assert radius == pytest.approx(0.5 * math.sqrt(5.0))

    def test_invalid_constructors(self):
        with pytest.raises(ValueError):
            Obstacle.circle([0.0, 0.0], 0.0)
        with pytest.raises(ValueError):
            Obstacle.box([1.0, 0.0], [0.0, 1.0])


# -- integration -------------------------------------------------------------

class TestIntegrateStep:
    def test_clamp_norm(self):
        v = np.array([3.0, 4.0])
        np.testing.assert_allclose(clamp_norm(v, 10.0), v)
        np.testing.assert_allclose(clamp_norm(v, 2.5), [1.5, 2.0])

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=2),
           st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=2))
    def test_kinematic_caps(self, cmd, vel):
        # initial speed respects v_max, as maintained by the simulation itself
        spec = make_spec()
        agent = make_agent([0.0, 0.0], vel)
        nxt = integrate_step(agent, np.array(cmd), spec)
        assert np.linalg.norm(nxt.velocity) <= spec.v_max + 1e-9
        dv = nxt.velocity - agent.velocity
        assert np.linalg.norm(dv) <= spec.a_max * spec.dt + 1e-9
        # recorded acceleration is the realized delta-v over dt
        np.testing.assert_allclose(nxt.acceleration, dv / spec.dt)
        np.testing.assert_allclose(nxt.position,
                                   agent.position + nxt.velocity * spec.dt)

    def test_reaches_command_when_within_caps(self):
        spec = make_spec()
        agent = make_agent([0.0, 0.0], [1.0, 0.0])
        nxt = integrate_step(agent, np.array([1.1, 0.0]), spec)
        np.testing.assert_allclose(nxt.velocity, [1.1, 0.0])

    def test_non_finite_command_raises(self):
        spec = make_spec()
        agent = make_agent([0.0, 0.0])
        with pytest.raises(InvalidState):
            integrate_step(agent, np.array([np.nan, 0.0]), spec)


# -- world queries -----------------------------------------------------------

class TestWorldState:
    def test_agent_lookup_and_without(self):
        w = WorldState(0, [make_agent([0, 0], agent_id=1),
                           make_agent([1, 0], agent_id=2)], [])
        assert w.agent(1).id == 1
        with pytest.raises(KeyError):
            w.agent(9)
        assert [a.id for a in w.without(1).agents] == [2]

    def test_swarm_excludes_attackers(self):
        w = WorldState(0, [make_agent([0, 0], agent_id=1),
                           make_agent([1, 0], agent_id=7, role="attacker")], [])
        assert [a.id for a in w.swarm()] == [1]
        assert [a.id for a in w.attackers()] == [7]

    def test_min_obstacle_distance_clamped_to_sensing(self):
        a = make_agent([0.0, 0.0], sensing=0.5)
        far = WorldState(0, [a], [Obstacle.circle([10.0, 0.0], 1.0)])
        assert min_obstacle_distance(a, far) == pytest.approx(0.5)
        near = WorldState(0, [a], [Obstacle.circle([0.3, 0.0], 0.1)])
        assert min_obstacle_distance(a, near) == pytest.approx(0.2)
        inside = WorldState(0, [a], [Obstacle.circle([0.0, 0.0], 1.0)])
        assert min_obstacle_distance(a, inside) == 0.0  # clamped at zero

    def test_min_obstacle_distance_counts_other_agents(self):
        a = make_agent([0.0, 0.0], agent_id=0)
        b = make_agent([0.25, 0.0], agent_id=1)
        w = WorldState(0, [a, b], [])
        assert min_obstacle_distance(a, w) == pytest.approx(0.25)


# -- failure detection -------------------------------------------------------

class TestDetectFailure:
    def test_collision_strictly_below_radius(self):
        spec = make_spec(collision_radius=0.05)
        at = WorldState(0, [make_agent([0, 0], agent_id=0),
                            make_agent([0.05, 0.0], agent_id=1)], [])
        assert detect_failure(at, spec) is None
        below = WorldState(0, [make_agent([0, 0], agent_id=0),
                               make_agent([0.049, 0.0], agent_id=1)], [])
        assert detect_failure(below, spec) is FailureKind.DRONES_COLLIDE

    def test_collision_suppressed_without_formation_constraint(self):
        spec = make_spec(collision_radius=0.05, formation_enabled=False)
        w = WorldState(0, [make_agent([0, 0], agent_id=0),
                           make_agent([0.01, 0.0], agent_id=1)], [])
        assert detect_failure(w, spec) is None

    def test_attacker_contact_is_not_a_failure(self):
        spec = make_spec(collision_radius=0.05)
        w = WorldState(0, [make_agent([0, 0], agent_id=0),
                           make_agent([0.01, 0.0], agent_id=9, role="attacker")], [])
        assert detect_failure(w, spec) is None

    def test_obstacle_crash_at_surface(self):
        spec = make_spec()
        obs = Obstacle.circle([1.0, 0.0], 0.5)
        on_surface = WorldState(0, [make_agent([0.5, 0.0])], [obs])
        assert detect_failure(on_surface, spec) is FailureKind.OBSTACLE_CRASH
        clear = WorldState(0, [make_agent([0.4, 0.0])], [obs])
        assert detect_failure(clear, spec) is None

    def test_timeout_strictly_greater_than_budget(self):
        spec = make_spec(nominal_steps=150, timeout_multiplier=2.0)
        at_budget = WorldState(300, [make_agent([0, 0])], [])
        assert detect_failure(at_budget, spec) is None
        past = WorldState(301, [make_agent([0, 0])], [])
        assert detect_failure(past, spec) is FailureKind.TIMEOUT

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            make_spec(collision_radius=0.2)  # >= safe_distance
        with pytest.raises(ValueError):
            make_spec(timeout_multiplier=0.5)
        with pytest.raises(ValueError):
            make_spec(dt=0.0)
