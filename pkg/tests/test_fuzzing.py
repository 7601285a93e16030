"""Fuzzing engine tests: spawn geometry, schemes and determinism."""
import math

import numpy as np
import pytest

from litelfuzz.fuzzing import (FuzzParams, NoValidSpawn, SpawnGeometry,
                               _pursuit_command, lookahead_score,
                               random_target, run_fuzzing, spawn_candidates)
from litelfuzz.scenarios import a1_navigate
from litelfuzz.world import AgentState, Obstacle, WorldState


def make_agent(pos, agent_id=0, sensing=0.5, role="follower"):
    p = np.asarray(pos, dtype=float)
    return AgentState(agent_id, p, np.zeros_like(p), np.zeros_like(p),
                      sensing, role)


GEOM = SpawnGeometry(inner_radius=0.5, outer_radius=1.0, sectors=8)


class TestSpawnGeometry:
    def test_validation(self):
        with pytest.raises(ValueError):
            SpawnGeometry(inner_radius=0.0, outer_radius=1.0)
        with pytest.raises(ValueError):
            SpawnGeometry(inner_radius=1.0, outer_radius=0.5)
        with pytest.raises(ValueError):
            SpawnGeometry(inner_radius=0.5, outer_radius=1.0, sectors=1)

    def test_candidates_on_ring_mid_radius(self):
        target = make_agent([1.0, 2.0], agent_id=0)
        world = WorldState(0, [target], [])
        points = spawn_candidates(target, world, GEOM, safe_distance=0.1)
        assert len(points) == GEOM.sectors
        for p in points:
            d = np.linalg.norm(p - target.position)
            assert GEOM.inner_radius <= d <= GEOM.outer_radius
            assert d == pytest.approx(0.75)

    def test_sector_angles_cover_the_circle(self):
        target = make_agent([0.0, 0.0])
        world = WorldState(0, [target], [])
        points = spawn_candidates(target, world, GEOM, safe_distance=0.1)
        angles = sorted(math.atan2(p[1], p[0]) % (2 * math.pi) for p in points)
        gaps = np.diff(angles)
        assert np.allclose(gaps, 2 * math.pi / GEOM.sectors)

    def test_obstacle_interior_excluded(self):
        target = make_agent([0.0, 0.0])
        # obstacle swallowing the right half of the ring
        world = WorldState(0, [target], [Obstacle.circle([0.75, 0.0], 0.4)])
        points = spawn_candidates(target, world, GEOM, safe_distance=0.1)
        assert 0 < len(points) < GEOM.sectors
        for p in points:
            for obs in world.obstacles:
                assert obs.surface_distance(p) > 0.0

    def test_other_sensing_disks_excluded(self):
        target = make_agent([0.0, 0.0], agent_id=0)
        peer = make_agent([0.9, 0.0], agent_id=1, sensing=0.5)
        world = WorldState(0, [target, peer], [])
        points = spawn_candidates(target, world, GEOM, safe_distance=0.1)
        for p in points:
            assert np.linalg.norm(p - peer.position) >= peer.sensing_radius

    def test_safe_distance_filters_near_agents(self):
        target = make_agent([0.0, 0.0], agent_id=0)
        # tiny sensing disk so only the safety-gap filter can drop points
        peer = make_agent([0.75, 0.0], agent_id=1, sensing=0.01)
        world = WorldState(0, [target, peer], [])
        points = spawn_candidates(target, world, GEOM, safe_distance=0.3)
        assert 0 < len(points) < GEOM.sectors
        for p in points:
            assert np.linalg.norm(p - peer.position) >= 0.3
            assert np.linalg.norm(p - target.position) >= 0.3

    def test_safe_distance_beyond_ring_blocks_all(self):
        target = make_agent([0.0, 0.0], agent_id=0)
        world = WorldState(0, [target], [])
        with pytest.raises(NoValidSpawn):
            spawn_candidates(target, world, GEOM, safe_distance=0.76)

    def test_no_valid_spawn_raised(self):
        target = make_agent([0.0, 0.0], agent_id=0)
        jammer = make_agent([0.01, 0.0], agent_id=1, sensing=2.0)
        world = WorldState(0, [target, jammer], [])
        with pytest.raises(NoValidSpawn):
            spawn_candidates(target, world, GEOM, safe_distance=0.1)

    def test_3d_ring_is_horizontal(self):
        target = make_agent([0.0, 0.0, 1.0])
        world = WorldState(0, [target], [])
        points = spawn_candidates(target, world, GEOM, safe_distance=0.1)
        for p in points:
            assert p[2] == pytest.approx(1.0)


class TestPursuitCommand:
    def test_speed_capped(self):
        attacker = make_agent([1.0, 0.0], agent_id=9, role="attacker")
        target = make_agent([0.0, 0.0], agent_id=0)
        cmd = _pursuit_command(attacker, target, standoff=0.1, v_max=3.0,
                               dt=0.05, a_max=30.0)
        assert np.linalg.norm(cmd) <= 3.0 + 1e-9

    def test_predicted_gap_keeps_floor(self):
        target = make_agent([0.0, 0.0], agent_id=0)
        rng = np.random.default_rng(0)
        for _ in range(200):
            attacker = make_agent(rng.uniform(-0.5, 0.5, 2), agent_id=9,
                                  role="attacker")
            attacker.velocity = rng.uniform(-3, 3, 2)
            target.velocity = rng.uniform(-1.5, 1.5, 2)
            cmd = _pursuit_command(attacker, target, standoff=0.08, v_max=3.0,
                                   dt=0.05, a_max=30.0)
            predicted_gap = np.linalg.norm(
                attacker.position + cmd * 0.05
                - (target.position + target.velocity * 0.05))
            assert predicted_gap >= 0.75 * 0.08 - 1e-9

    def test_braking_ramp_limits_commanded_closing_speed(self):
        attacker = make_agent([0.2, 0.0], agent_id=9, role="attacker")
        target = make_agent([0.0, 0.0], agent_id=0)
        a_max = 10.0
        cmd = _pursuit_command(attacker, target, standoff=0.08, v_max=3.0,
                               dt=0.05, a_max=a_max)
        closing = float(np.dot(cmd - target.velocity, [-1.0, 0.0]))
        allowed = math.sqrt(2.0 * a_max * (0.2 - 0.06))
        assert closing <= allowed + 1e-9


class TestSchemes:
    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError, match="scheme"):
            run_fuzzing(a1_navigate(), "quantum", budget=1, seed=0)

    def test_same_seed_identical_result(self):
        scn = a1_navigate()
        r1 = run_fuzzing(scn, "sa", budget=3, seed=7)
        r2 = run_fuzzing(scn, "sa", budget=3, seed=7)
        assert r1.to_record() == r2.to_record()

    def test_outcome_invariant(self):
        scn = a1_navigate()
        for scheme in ("sa", "ma", "random", "target_only"):
            r = run_fuzzing(scn, scheme, budget=2, seed=1)
            assert (r.steps_to_failure is not None) \
                == (r.outcome == "SuccessfulAttack")
            assert r.invalid_count >= 0
            assert len(r.test_cases) <= 2 + r.invalid_count

    def test_target_only_never_retargets(self):
        r = run_fuzzing(a1_navigate(), "target_only", budget=5, seed=2)
        targets = {tc.target_id for tc in r.test_cases}
        assert len(targets) == 1

    def test_recorded_positions_respect_ring(self):
        scn = a1_navigate()
        geom = scn.spawn_geometry()
        for scheme in ("sa", "random"):
            r = run_fuzzing(scn, scheme, budget=3, seed=4)
            for tc in r.test_cases:
                d = np.linalg.norm(tc.attack_position - tc.target_position)
                assert geom.inner_radius - 1e-9 <= d <= geom.outer_radius + 1e-9

    def test_scores_are_robustness_or_failure_forecasts(self):
        r = run_fuzzing(a1_navigate(), "sa", budget=3, seed=0)
        for tc in r.test_cases:
            assert tc.score > -1.0e9  # failure forecasts add the step index
            assert tc.score < 1.0e9 or tc.score == math.inf

    def test_random_target_frequency(self):
        rng = np.random.default_rng(123)
        ids = [0, 1, 2, 3]
        n = 10_000
        counts = {k: 0 for k in ids}
        for _ in range(n):
            counts[random_target(rng, ids)] += 1
        p = 1.0 / len(ids)
        sigma = math.sqrt(p * (1 - p) / n)
        for k in ids:
            assert abs(counts[k] / n - p) <= 3 * sigma


class TestLookaheadScore:
    def test_failure_forecast_scores_below_any_robustness(self):
        scn = a1_navigate()
        sim = scn.build_simulation(seed=0, record_trace=False)
        for _ in range(scn.fuzz_params().warmup_steps):
            sim.step()
        geom = scn.spawn_geometry()
        params = scn.fuzz_params()
        target = sim.world.swarm()[1]
        points = spawn_candidates(target, sim.world, geom,
                                  sim.spec.safe_distance)
        scores = [lookahead_score(sim, p, target.id, params) for p in points]
        for s in scores:
            assert s <= -1e8 or abs(s) < 1e3
        # scoring must not advance the caller's simulation
        assert sim.step_index == params.warmup_steps
