"""Mission execution: the deterministic world-stepping loop.

A :class:`Simulation` owns one world plus its controller and produces one
robustness record per step. It is cheap to clone, which the fuzzer uses
for lookahead scoring on throwaway copies.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .robustness import ConstraintParams, RobustnessRecord, \
    constraint_violations, swarm_robustness
from .world import (ROLE_ATTACKER, AgentState, FailureKind, MissionSpec,
                    WorldState, detect_failure, integrate_step)

OUTCOME_SUCCESS = "Success"
OUTCOME_FAILURE = "Failure"
OUTCOME_SWARM_SECURE = "SwarmSecure"

ATTACKER_ID = 1000


@dataclass
class AttackerAction:
    """Per-step attacker directive applied by the simulation."""
    spawn: Optional[AgentState] = None
    teleport: Optional[np.ndarray] = None
    command: Optional[np.ndarray] = None
    despawn: bool = False


@dataclass
class Trace:
    snapshots: list[WorldState] = field(default_factory=list)
    robustness: list[RobustnessRecord] = field(default_factory=list)
    events: list[tuple[int, str]] = field(default_factory=list)
    outcome: str = OUTCOME_SWARM_SECURE
    failure_kind: Optional[FailureKind] = None


class Simulation:
    """Deterministic discrete-time execution of one mission."""

    def __init__(self, world: WorldState, controller, spec: MissionSpec,
                 constraint_params: ConstraintParams, attacker_v_max: float | None = None,
                 attacker_a_max: float | None = None, record_trace: bool = True):
        self.world = world
        self.controller = controller
        self.spec = spec
        self.cparams = constraint_params
        self.attacker_v_max = attacker_v_max if attacker_v_max is not None else spec.v_max
        self.attacker_a_max = attacker_a_max if attacker_a_max is not None else spec.a_max
        self._attacker_spec = replace(spec, v_max=self.attacker_v_max,
                                      a_max=self.attacker_a_max)
        self.histories: dict[int, list[float]] = {}
        self.trace = Trace() if record_trace else None
        self.events: list[tuple[int, str]] = self.trace.events if self.trace else []
        self.outcome: str | None = None
        self.failure_kind: FailureKind | None = None
        self.last_record: RobustnessRecord | None = None
        self._seen_violations: set[tuple[int, int]] = set()
        if self.trace is not None:
            self.trace.snapshots.append(world.copy())

    def clone(self) -> "Simulation":
        sim = Simulation(self.world.copy(), self.controller.clone(), self.spec,
                         self.cparams, self.attacker_v_max, self.attacker_a_max,
                         record_trace=False)
        sim.histories = {k: list(v) for k, v in self.histories.items()}
        sim.outcome = self.outcome
        sim.failure_kind = self.failure_kind
        sim._seen_violations = set(self._seen_violations)
        return sim

    @property
    def done(self) -> bool:
        return self.outcome is not None

    @property
    def step_index(self) -> int:
        return self.world.step_index

    def attacker(self) -> AgentState | None:
        attackers = self.world.attackers()
        return attackers[0] if attackers else None

    def event(self, message: str) -> None:
        self.events.append((self.world.step_index, message))

    def step(self, attacker_action: AttackerAction | None = None) -> None:
        if self.done:
            return
        world = self.world
        self.controller.update(world, self.spec)
        commands = self.controller.commands(world, self.spec)
        new_agents = []
        for agent in world.agents:
            if agent.role == ROLE_ATTACKER:
                continue
            new_agents.append(integrate_step(agent, commands[agent.id], self.spec))
        new_agents.extend(self._advance_attacker(attacker_action))
        self.world = WorldState(world.step_index + 1, new_agents,
                                world.obstacles, world.leader_waypoints)
        self._record_step()
        self._check_outcome()

    def _advance_attacker(self, action: AttackerAction | None) -> list[AgentState]:
        attacker = self.attacker()
        if action is None:
            if attacker is None:
                return []
            return [integrate_step(attacker, np.zeros_like(attacker.position),
                                   self._attacker_spec)]
        if action.despawn:
            return []
        if action.spawn is not None:
            return [action.spawn.copy()]
        if attacker is None:
            return []
        if action.teleport is not None:
            moved = attacker.copy()
            moved.position = np.asarray(action.teleport, dtype=float)
            moved.velocity = np.zeros_like(moved.position)
            moved.acceleration = np.zeros_like(moved.position)
            return [moved]
        cmd = action.command if action.command is not None \
            else np.zeros_like(attacker.position)
        return [integrate_step(attacker, cmd, self._attacker_spec)]

    def _record_step(self) -> None:
        for agent in self.world.swarm():
            goal = self.controller.goal_for(self.world, agent.id, self.spec)
            history = self.histories.setdefault(agent.id, [])
            if goal is None:
                history.clear()
            else:
                history.append(float(np.linalg.norm(agent.position - goal)))
                if len(history) > self.cparams.window + 1:
                    del history[0]
        record = swarm_robustness(self.world, self.histories, self.cparams)
        self.last_record = record
        for violation in constraint_violations(record, self.cparams):
            if violation not in self._seen_violations:
                self._seen_violations.add(violation)
                self.event(f"violation agent={violation[0]} constraint={violation[1]}")
        if self.trace is not None:
            self.trace.snapshots.append(self.world.copy())
            self.trace.robustness.append(record)

    def _check_outcome(self) -> None:
        failure = detect_failure(self.world, self.spec)
        if failure is not None:
            self.outcome = OUTCOME_FAILURE
            self.failure_kind = failure
            self.event(f"failure {failure.value}")
        elif self.controller.mission_complete(self.world, self.spec):
            self.outcome = OUTCOME_SUCCESS
            self.event("mission complete")
        if self.trace is not None and self.outcome is not None:
            self.trace.outcome = self.outcome
            self.trace.failure_kind = self.failure_kind


def run_mission(scenario, controller=None, attacker_policy: Callable | None = None,
                seed: int = 0, record_trace: bool = True) -> Trace:
    """Run one mission to completion, failure or timeout.

    ``attacker_policy`` is called once per step with the simulation and may
    return an :class:`AttackerAction`. Identical inputs and seed produce
    identical traces.
    """
    sim = scenario.build_simulation(seed=seed, controller=controller,
                                    record_trace=record_trace)
    while not sim.done:
        action = attacker_policy(sim) if attacker_policy is not None else None
        sim.step(action)
    if sim.trace is not None:
        return sim.trace
    trace = Trace(outcome=sim.outcome, failure_kind=sim.failure_kind)
    trace.events = sim.events
    return trace
