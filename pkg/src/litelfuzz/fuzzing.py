"""Robustness-guided attack-drone fuzzing schemes.

A test case is a pair (target drone position, attack position). Targets
come from the influence graph's key node; attack positions from a ring of
spawn sectors around the target, scored by simulating a short lookahead on
a cloned world and keeping the candidate that degrades swarm robustness
the most.

Four schemes share one execution engine:

* ``sa``          -- single attacker flying planned paths, retargeting
                     within its locally reachable region
* ``ma``          -- attacker relocates instantaneously to globally optimal
                     positions (equivalent to multiple attackers, at most
                     one interfering at any instant)
* ``random``      -- uniform target and spawn sector (ablation baseline)
* ``target_only`` -- key-node target chosen once, never re-selected
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .influence import build_influence_graph, key_node_sequence
from .mission import ATTACKER_ID, AttackerAction, Simulation
from .planner import Infeasible, plan_path
from .world import ROLE_ATTACKER, AgentState, FailureKind, clamp_norm

SCHEMES = ("sa", "ma", "random", "target_only")

OUTCOME_SUCCESSFUL_ATTACK = "SuccessfulAttack"
OUTCOME_SWARM_SECURE = "SwarmSecure"

_FAILURE_SCORE_BASE = -1.0e9


class NoValidSpawn(RuntimeError):
    """Every spawn sector around the target is excluded."""


@dataclass
class SpawnGeometry:
    inner_radius: float          # target sensing radius
    outer_radius: float          # slightly larger ring bound
    sectors: int = 8

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("need 0 < inner_radius < outer_radius")
        if self.sectors < 2:
            raise ValueError("need at least 2 sectors")


@dataclass
class FuzzParams:
    lookahead: int = 10
    settle_steps: int = 5
    attacker_v_max: float = 1.0
    attacker_a_max: Optional[float] = None   # None: same limit as the swarm
    graph_radius: float = 1.0       # influence-graph edge eligibility radius
    alpha_factor: float = 0.85
    standoff: float = 0.1           # hover distance kept from the target drone
    warmup_steps: int = 10

    def reach_radius(self, dt: float) -> float:
        return self.attacker_v_max * self.lookahead * dt


@dataclass
class TestCase:
    target_id: int
    target_position: np.ndarray
    attack_position: np.ndarray
    score: float = math.inf     # lookahead score of the chosen candidate


@dataclass
class FuzzResult:
    scheme: str
    seed: int
    outcome: str
    failure_kind: Optional[FailureKind]
    steps_to_failure: Optional[int]
    total_steps: int
    invalid_count: int
    test_cases: list[TestCase] = field(default_factory=list)
    trace: object = None

    def to_record(self) -> dict:
        return {
            "scheme": self.scheme,
            "seed": int(self.seed),
            "outcome": self.outcome,
            "failure_kind": self.failure_kind.value if self.failure_kind else None,
            "steps_to_failure": self.steps_to_failure,
            "total_steps": int(self.total_steps),
            "invalid_count": int(self.invalid_count),
            "test_cases": [
                {"target_id": int(tc.target_id),
                 "target_position": [float(x) for x in tc.target_position],
                 "attack_position": [float(x) for x in tc.attack_position]}
                for tc in self.test_cases
            ],
        }


def spawn_candidates(target: AgentState, world, geom: SpawnGeometry,
                     safe_distance: float) -> list[np.ndarray]:
    """One representative point per ring sector, feasibility-filtered.

    Points sit at the ring mid-radius at angles (2k+1)*pi/n. A point is
    dropped if it violates any agent's safety distance, lies inside an
    obstacle, or falls inside another agent's sensing disk. In 3D the ring
    lies in the horizontal plane through the target.
    """
    mid = 0.5 * (geom.inner_radius + geom.outer_radius)
    dim = len(target.position)
    candidates = []
    for k in range(geom.sectors):
        angle = (2 * k + 1) * math.pi / geom.sectors
        offset = np.zeros(dim)
        offset[0] = mid * math.cos(angle)
        offset[1] = mid * math.sin(angle)
        point = target.position + offset
        ok = True
        for agent in world.agents:
            d = float(np.linalg.norm(agent.position - point))
            if d < safe_distance:
                ok = False
                break
            if agent.id != target.id and agent.role != ROLE_ATTACKER \
                    and d < agent.sensing_radius:
                ok = False
                break
        if ok:
            for obs in world.obstacles:
                if obs.surface_distance(point) <= 0.0:
                    ok = False
                    break
        if ok:
            candidates.append(point)
    if not candidates:
        raise NoValidSpawn(f"all spawn sectors around agent {target.id} excluded")
    return candidates


def _standoff_point(target_position: np.ndarray, approach_from: np.ndarray,
                    standoff: float) -> np.ndarray:
    away = approach_from - target_position
    n = float(np.linalg.norm(away))
    if n < 1e-12:
        away = np.zeros_like(target_position)
        away[0] = 1.0
        n = 1.0
    return target_position + away * (standoff / n)


def _pursuit_command(attacker: AgentState, target: AgentState,
                     standoff: float, v_max: float, dt: float,
                     a_max: float = math.inf) -> np.ndarray:
    """Track the standoff point with target-velocity feedforward.

    Pure proportional pursuit equilibrates short of the standoff point
    against a fleeing target, so the target's velocity is added to keep
    station during a chase. Two guards prevent discrete-time overshoot
    through the target: the radial closing speed is capped by the braking
    ramp the attacker's acceleration limit allows, and the predicted
    next-step separation is held at a fraction of the standoff distance.
    """
    desired = _standoff_point(target.position, attacker.position, standoff)
    cmd = clamp_norm(target.velocity + (desired - attacker.position) / dt, v_max)
    floor = 0.75 * standoff
    gap = attacker.position - target.position
    dist = float(np.linalg.norm(gap))
    if dist > 1e-12 and math.isfinite(a_max):
        inward = -gap / dist
        rel = cmd - target.velocity
        closing = float(np.dot(rel, inward))
        allowed = math.sqrt(2.0 * a_max * max(dist - floor, 0.0))
        if closing > allowed:
            rel = rel - inward * (closing - allowed)
            cmd = clamp_norm(target.velocity + rel, v_max)
    predicted_target = target.position + target.velocity * dt
    predicted_gap = attacker.position + cmd * dt - predicted_target
    gap_norm = float(np.linalg.norm(predicted_gap))
    if gap_norm < floor:
        direction = predicted_gap / gap_norm if gap_norm > 1e-12 else \
            _standoff_point(np.zeros_like(cmd), attacker.position - target.position, 1.0)
        held = predicted_target + direction * floor
        cmd = clamp_norm((held - attacker.position) / dt, v_max)
    return cmd


def lookahead_score(sim: Simulation, candidate: np.ndarray, target_id: int,
                    params: FuzzParams, from_current: bool = False) -> float:
    """Swarm robustness after a short simulated attack via ``candidate``.

    Runs on a clone, so the caller's simulation is untouched. With
    ``from_current`` the existing attacker flies from its present position
    through the candidate before pursuing (the realization of a
    continuation epoch); otherwise the attacker appears at the candidate
    (spawn or relocation). A lookahead that already triggers a physical
    failure scores far below any robustness value, earlier failures
    scoring lower.
    """
    probe = sim.clone()
    candidate = np.asarray(candidate, dtype=float)
    step_len = params.attacker_v_max * probe.spec.dt
    approaching = from_current and probe.attacker() is not None
    if not approaching:
        spawn = AgentState(ATTACKER_ID, candidate.copy(),
                           np.zeros_like(candidate), np.zeros_like(candidate),
                           sensing_radius=1.0, role=ROLE_ATTACKER)
        probe.step(AttackerAction(spawn=spawn))
    for k in range(params.lookahead - (0 if approaching else 1)):
        if probe.done:
            break
        attacker = probe.attacker()
        try:
            target = probe.world.agent(target_id)
        except KeyError:
            break
        if approaching and \
                float(np.linalg.norm(candidate - attacker.position)) > step_len:
            cmd = clamp_norm((candidate - attacker.position) / probe.spec.dt,
                             params.attacker_v_max)
        else:
            approaching = False
            cmd = _pursuit_command(attacker, target, params.standoff,
                                   params.attacker_v_max, probe.spec.dt,
                                   probe.attacker_a_max)
        probe.step(AttackerAction(command=cmd))
    if probe.failure_kind is not None:
        return _FAILURE_SCORE_BASE + probe.step_index
    return probe.last_record.swarm if probe.last_record is not None else math.inf


def _argmin_candidate(sim: Simulation, candidates: list[np.ndarray],
                      target_id: int, params: FuzzParams,
                      from_current: bool = False) -> tuple[np.ndarray, float]:
    best = None
    best_score = math.inf
    for point in candidates:  # ties resolved by candidate index
        score = lookahead_score(sim, point, target_id, params, from_current)
        if score < best_score:
            best, best_score = point, score
    return best, best_score


def _make_testcase(sim: Simulation, target_id: int, attack_position: np.ndarray,
                   score: float = math.inf) -> TestCase:
    return TestCase(target_id, sim.world.agent(target_id).position.copy(),
                    np.asarray(attack_position, dtype=float), score)


def init_test_case(sim: Simulation, geom: SpawnGeometry,
                   params: FuzzParams) -> TestCase:
    """Global key node target plus robustness-minimizing spawn point."""
    graph = build_influence_graph(sim.world, sim.controller, sim.spec,
                                  params.graph_radius)
    target_id = key_node_sequence(graph, params.alpha_factor).key_node
    candidates = spawn_candidates(sim.world.agent(target_id), sim.world, geom,
                                  sim.spec.safe_distance)
    point, score = _argmin_candidate(sim, candidates, target_id, params)
    return _make_testcase(sim, target_id, point, score)


def sa_next_testcase(sim: Simulation, geom: SpawnGeometry,
                     params: FuzzParams) -> TestCase:
    """Retarget within the attacker's reachable region.

    The influence graph is restricted to swarm agents inside the reachable
    disk (which is where it can intersect their sensing disks); with an
    empty intersection the nearest swarm agent becomes the target.
    """
    attacker = sim.attacker()
    if attacker is None:
        return init_test_case(sim, geom, params)
    reach = params.reach_radius(sim.spec.dt)
    swarm = sim.world.swarm()
    near = [a.id for a in swarm
            if float(np.linalg.norm(a.position - attacker.position)) <= reach]
    if near:
        graph = build_influence_graph(sim.world, sim.controller, sim.spec,
                                      params.graph_radius, node_ids=near)
        target_id = key_node_sequence(graph, params.alpha_factor).key_node
    else:
        target_id = min(swarm, key=lambda a: (
            float(np.linalg.norm(a.position - attacker.position)), a.id)).id
    candidates = spawn_candidates(sim.world.agent(target_id), sim.world, geom,
                                  sim.spec.safe_distance)
    reachable = [p for p in candidates
                 if float(np.linalg.norm(p - attacker.position)) <= reach]
    if reachable:
        candidates = reachable
    point, score = _argmin_candidate(sim, candidates, target_id, params,
                                     from_current=True)
    return _make_testcase(sim, target_id, point, score)


def ma_next_testcase(sim: Simulation, geom: SpawnGeometry,
                     params: FuzzParams) -> TestCase:
    """Global selection; the attacker may teleport arbitrarily far."""
    return init_test_case(sim, geom, params)


def random_target(rng: np.random.Generator, swarm_ids: list[int]) -> int:
    return swarm_ids[int(rng.integers(len(swarm_ids)))]


def _random_testcase(sim: Simulation, geom: SpawnGeometry, params: FuzzParams,
                     rng: np.random.Generator) -> TestCase:
    ids = sorted(a.id for a in sim.world.swarm())
    target_id = random_target(rng, ids)
    candidates = spawn_candidates(sim.world.agent(target_id), sim.world, geom,
                                  sim.spec.safe_distance)
    return _make_testcase(sim, target_id,
                          candidates[int(rng.integers(len(candidates)))])


def _target_only_testcase(sim: Simulation, geom: SpawnGeometry,
                          params: FuzzParams, target_id: int,
                          rng: np.random.Generator) -> TestCase:
    """Fixed key-node target, uniformly drawn attack position.

    This arm isolates the value of target selection: it keeps the
    centrality-chosen target but drops the robustness-guided scoring of
    attack positions.
    """
    candidates = spawn_candidates(sim.world.agent(target_id), sim.world, geom,
                                  sim.spec.safe_distance)
    return _make_testcase(sim, target_id,
                          candidates[int(rng.integers(len(candidates)))])


class _FuzzDriver:
    """State machine steering the attacker through one fuzzing execution."""

    def __init__(self, sim: Simulation, scheme: str, geom: SpawnGeometry,
                 params: FuzzParams, budget: Optional[int],
                 rng: np.random.Generator):
        self.sim = sim
        self.scheme = scheme
        self.geom = geom
        self.params = params
        self.budget = budget
        self.rng = rng
        self.phase = "warmup"
        self.counter = params.warmup_steps
        self.epochs = 0
        self.invalid = 0
        self.test_cases: list[TestCase] = []
        self.fixed_target: Optional[int] = None
        self.current: Optional[TestCase] = None
        self.path: list[np.ndarray] = []
        self.path_index = 0
        self.pending: Optional[AttackerAction] = None
        self.settle_budget = params.settle_steps

    def _next_testcase(self, force_init: bool) -> TestCase:
        first = force_init or self.current is None
        if self.scheme == "random":
            return _random_testcase(self.sim, self.geom, self.params, self.rng)
        if self.scheme == "target_only":
            if self.fixed_target is None:
                graph = build_influence_graph(self.sim.world,
                                              self.sim.controller,
                                              self.sim.spec,
                                              self.params.graph_radius)
                self.fixed_target = key_node_sequence(
                    graph, self.params.alpha_factor).key_node
            return _target_only_testcase(self.sim, self.geom, self.params,
                                         self.fixed_target, self.rng)
        if self.scheme == "ma":
            return ma_next_testcase(self.sim, self.geom, self.params)
        if first:
            return init_test_case(self.sim, self.geom, self.params)
        return sa_next_testcase(self.sim, self.geom, self.params)

    def _begin_epoch(self, force_init: bool = False) -> Optional[AttackerAction]:
        if self.budget is not None and self.epochs >= self.budget:
            self.phase = "idle"
            # budget exhausted: withdraw the attacker and let the mission run out
            return AttackerAction(despawn=True) if self.sim.attacker() else None
        try:
            tc = self._next_testcase(force_init)
        except NoValidSpawn:
            self.sim.event("spawn skipped: no valid sector")
            self.phase = "settle"
            self.counter = self.params.settle_steps
            return None
        self.epochs += 1
        self.test_cases.append(tc)
        self.current = tc
        # a candidate whose forecast already reaches a failure is pursued
        # for the whole lookahead horizon so the forecast can mature
        self.settle_budget = self.params.lookahead \
            if tc.score <= 0.5 * _FAILURE_SCORE_BASE else self.params.settle_steps
        attacker = self.sim.attacker()
        if attacker is None or self.scheme == "ma" or force_init:
            # the attacker materializes at the scored position and starts
            # pursuing immediately -- exactly the lookahead realization
            if attacker is None:
                dim = len(tc.attack_position)
                spawn = AgentState(ATTACKER_ID, tc.attack_position.copy(),
                                   np.zeros(dim), np.zeros(dim),
                                   sensing_radius=self.geom.inner_radius,
                                   role=ROLE_ATTACKER)
                action = AttackerAction(spawn=spawn)
            else:
                action = AttackerAction(teleport=tc.attack_position.copy())
            self.phase = "settle"
            self.counter = self.settle_budget
            return action
        # continuation epoch: fly a clearance-keeping path to the scored
        # attack position, then pursue
        try:
            self.path = plan_path(attacker.position, tc.attack_position,
                                  self.sim.world,
                                  clearance=self.sim.spec.safe_distance,
                                  ignore_ids=(tc.target_id,))
        except Infeasible:
            self.sim.event("path infeasible: epoch skipped")
            self.phase = "settle"
            self.counter = self.params.settle_steps
            return None
        self.path_index = 1
        self.phase = "fly"
        return None

    def _fly_action(self) -> AttackerAction:
        attacker = self.sim.attacker()
        step_len = self.params.attacker_v_max * self.sim.spec.dt
        while self.path_index < len(self.path) and \
                float(np.linalg.norm(self.path[self.path_index] - attacker.position)) <= step_len:
            self.path_index += 1
        if self.path_index >= len(self.path):
            self.phase = "settle"
            self.counter = self.settle_budget
            return self._settle_action()
        waypoint = self.path[self.path_index]
        cmd = clamp_norm((waypoint - attacker.position) / self.sim.spec.dt,
                         self.params.attacker_v_max)
        return AttackerAction(command=cmd)

    def _settle_action(self) -> AttackerAction:
        attacker = self.sim.attacker()
        try:
            target = self.sim.world.agent(self.current.target_id)
        except (KeyError, AttributeError):
            return AttackerAction()
        cmd = _pursuit_command(attacker, target, self.params.standoff,
                               self.params.attacker_v_max, self.sim.spec.dt,
                               self.sim.attacker_a_max)
        return AttackerAction(command=cmd)

    def act(self) -> Optional[AttackerAction]:
        if self.pending is not None:
            action, self.pending = self.pending, None
            return action
        if self.phase == "warmup":
            self.counter -= 1
            if self.counter <= 0:
                self.phase = "select"
            return None
        if self.phase == "select":
            return self._begin_epoch()
        if self.phase == "fly":
            return self._fly_action()
        if self.phase == "settle":
            self.counter -= 1
            if self.counter <= 0:
                self.phase = "select"
                return self._begin_epoch()
            return self._settle_action()
        return None

    def check_contact(self) -> None:
        attacker = self.sim.attacker()
        if attacker is None:
            return
        for agent in self.sim.world.swarm():
            if float(np.linalg.norm(agent.position - attacker.position)) \
                    < self.sim.spec.collision_radius:
                self.invalid += 1
                self.sim.event(f"invalid test case: attacker contact with "
                               f"agent {agent.id}")
                self.pending = self._begin_epoch(force_init=True)
                return


def _run_fuzzing(scenario, scheme: str, budget: Optional[int], seed: int,
                 record_trace: bool) -> FuzzResult:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    sim = scenario.build_simulation(seed=seed, record_trace=record_trace)
    geom = scenario.spawn_geometry()
    params = scenario.fuzz_params()
    rng = np.random.default_rng([seed, 0x51A9])
    driver = _FuzzDriver(sim, scheme, geom, params, budget, rng)
    while not sim.done:
        action = driver.act()
        sim.step(action)
        if not sim.done:
            driver.check_contact()
    failed = sim.failure_kind is not None
    result = FuzzResult(
        scheme=scheme,
        seed=seed,
        outcome=OUTCOME_SUCCESSFUL_ATTACK if failed else OUTCOME_SWARM_SECURE,
        failure_kind=sim.failure_kind,
        steps_to_failure=sim.step_index if failed else None,
        total_steps=sim.step_index,
        invalid_count=driver.invalid,
        test_cases=driver.test_cases,
        trace=sim.trace,
    )
    return result


def run_sa_fuzzing(scenario, budget: Optional[int] = None, seed: int = 0,
                   record_trace: bool = False) -> FuzzResult:
    return _run_fuzzing(scenario, "sa", budget, seed, record_trace)


def run_ma_fuzzing(scenario, budget: Optional[int] = None, seed: int = 0,
                   record_trace: bool = False) -> FuzzResult:
    return _run_fuzzing(scenario, "ma", budget, seed, record_trace)


def run_random_fuzzing(scenario, budget: Optional[int] = None, seed: int = 0,
                       record_trace: bool = False) -> FuzzResult:
    return _run_fuzzing(scenario, "random", budget, seed, record_trace)


def run_target_only_fuzzing(scenario, budget: Optional[int] = None, seed: int = 0,
                            record_trace: bool = False) -> FuzzResult:
    return _run_fuzzing(scenario, "target_only", budget, seed, record_trace)


def run_fuzzing(scenario, scheme: str, budget: Optional[int] = None,
                seed: int = 0, record_trace: bool = False) -> FuzzResult:
    return _run_fuzzing(scenario, scheme, budget, seed, record_trace)
