"""Built-in swarm controllers.

Two controller families are provided: a leader-follower navigator that
corrects formation slots with artificial potential fields, and a dispersal
controller for area search. Controllers keep their mutable state out of
``commands`` so a command computation never changes the controller;
``update`` is called once per world step by the mission loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .world import (ROLE_ATTACKER, ROLE_LEADER, MissionSpec, WorldState,
                    clamp_norm)

_EPS = 1e-9


def _attraction(position: np.ndarray, target: np.ndarray, v_max: float,
                slow_radius: float) -> np.ndarray:
    """Full-speed pull toward ``target``, ramping down inside ``slow_radius``."""
    delta = target - position
    dist = float(np.linalg.norm(delta))
    if dist < _EPS:
        return np.zeros_like(position)
    speed = v_max * min(1.0, dist / slow_radius)
    return delta * (speed / dist)


def _repulsion(agent_id: int, position: np.ndarray, world: WorldState,
               influence_radius: float, gain: float) -> np.ndarray:
    """Potential-field push away from obstacles and agents within range."""
    total = np.zeros_like(position)
    for obs in world.obstacles:
        d = obs.surface_distance(position)
        if d < influence_radius:
            d = max(d, 1e-6)
            mag = gain * (1.0 / d - 1.0 / influence_radius) / (d * d)
            total = total + mag * obs.outward_direction(position)
    for other in world.agents:
        if other.id == agent_id:
            continue
        away = position - other.position
        d = float(np.linalg.norm(away))
        if d < influence_radius:
            d = max(d, 1e-6)
            mag = gain * (1.0 / d - 1.0 / influence_radius) / (d * d)
            total = total + mag * (away / d)
    return total


@dataclass
class ApfNavigationController:
    """Leader-follower waypoint navigation with potential-field avoidance.

    The leader tracks an explicit waypoint list; followers hold fixed
    world-frame offsets from the leader. Every agent is repelled by
    obstacles and by other agents (attackers included) inside
    ``influence_radius``.
    """

    formation_offsets: dict[int, np.ndarray]
    influence_radius: float = 0.15
    repulsion_gain: float = 0.05
    slow_radius: float = 0.3
    waypoint_switch_radius: float = 0.2
    formation_tolerance: float = 0.15
    formation_frame: str = "leader"   # "leader" or "centroid"
    waypoint_index: int = 0

    def clone(self) -> "ApfNavigationController":
        return ApfNavigationController(self.formation_offsets,
                                       self.influence_radius,
                                       self.repulsion_gain, self.slow_radius,
                                       self.waypoint_switch_radius,
                                       self.formation_tolerance,
                                       self.formation_frame,
                                       self.waypoint_index)

    def _leader(self, world: WorldState):
        for a in world.agents:
            if a.role == ROLE_LEADER:
                return a
        return None

    def _current_waypoint(self, world: WorldState) -> np.ndarray:
        wps = world.leader_waypoints
        return wps[min(self.waypoint_index, len(wps) - 1)]

    def _pack(self, world: WorldState):
        """Follower-pack centroid and mean formation offset, or None."""
        followers = [a for a in world.swarm() if a.role != ROLE_LEADER]
        if not followers:
            return None
        centroid = np.mean([a.position for a in followers], axis=0)
        mean_offset = np.mean(
            [self.formation_offsets.get(a.id, np.zeros_like(a.position))
             for a in followers], axis=0)
        return centroid, mean_offset

    def _slot(self, agent_id: int, world: WorldState) -> np.ndarray | None:
        """World-frame formation slot for a follower.

        In the leader frame slots hang off the leader's position. In the
        centroid frame slots are arranged around the follower-pack
        centroid, which couples every follower's slot to every other
        follower's position; the pack as a whole steers by the shared
        waypoint feedforward computed in :meth:`commands`.
        """
        offset = self.formation_offsets[agent_id]
        if self.formation_frame == "leader":
            leader = self._leader(world)
            if leader is None:
                return None
            return leader.position + offset
        pack = self._pack(world)
        if pack is None:
            return None
        centroid, mean_offset = pack
        return centroid + offset - mean_offset

    def update(self, world: WorldState, spec: MissionSpec) -> None:
        leader = self._leader(world)
        if leader is None:
            return
        wps = world.leader_waypoints
        if self.waypoint_index >= len(wps) - 1:
            return
        switch = self.waypoint_switch_radius
        if float(np.linalg.norm(leader.position - wps[self.waypoint_index])) <= switch:
            self.waypoint_index += 1

    def commands(self, world: WorldState, spec: MissionSpec) -> dict[int, np.ndarray]:
        feedforward = None
        if self.formation_frame == "centroid":
            pack = self._pack(world)
            if pack is not None:
                centroid, mean_offset = pack
                pack_target = self._current_waypoint(world) + mean_offset
                feedforward = _attraction(centroid, pack_target, spec.v_max,
                                          self.slow_radius)
        cmds: dict[int, np.ndarray] = {}
        for agent in world.agents:
            if agent.role == ROLE_ATTACKER:
                continue
            if agent.role == ROLE_LEADER:
                target = self._current_waypoint(world)
                att = _attraction(agent.position, target, spec.v_max,
                                  self.slow_radius)
                if float(np.linalg.norm(agent.position - spec.goal)) <= spec.goal_tolerance:
                    att = np.zeros_like(att)
            else:
                slot = self._slot(agent.id, world)
                if slot is None:
                    # counterfactual without any reference agent: hold
                    att = np.zeros_like(agent.position)
                else:
                    att = _attraction(agent.position, slot, spec.v_max,
                                      self.slow_radius)
                if feedforward is not None:
                    att = att + feedforward
            rep = _repulsion(agent.id, agent.position, world,
                             self.influence_radius, self.repulsion_gain)
            cmds[agent.id] = clamp_norm(att + rep, spec.v_max)
        return cmds

    def mission_complete(self, world: WorldState, spec: MissionSpec) -> bool:
        leader = self._leader(world)
        if leader is None:
            return False
        if self.waypoint_index < len(world.leader_waypoints) - 1:
            return False
        if float(np.linalg.norm(leader.position - spec.goal)) > spec.goal_tolerance:
            return False
        followers = [a for a in world.swarm() if a.role != ROLE_LEADER]
        if self.formation_frame == "centroid":
            # delivery completes once the leader and a majority of the pack
            # dock at their goal slots; a single straggler (e.g. one drone
            # held up by an intruder) does not stall the mission forever
            docked = sum(
                1 for a in followers
                if float(np.linalg.norm(
                    a.position - (spec.goal + self.formation_offsets[a.id])
                )) <= self.formation_tolerance)
            return docked * 2 > len(followers)
        for agent in followers:
            slot = self._slot(agent.id, world)
            if slot is None or \
                    float(np.linalg.norm(agent.position - slot)) > self.formation_tolerance:
                return False
        return True

    def goal_for(self, world: WorldState, agent_id: int, spec: MissionSpec):
        return spec.goal


@dataclass
class DispersalSearchController:
    """Dispersal-based area search without mutual collision avoidance.

    Searchers repel each other inside the neighbour detection radius,
    avoid obstacles inside the proximity-sensor range and drift toward
    the least-visited cell of a coarse visit grid. Targets within
    ``target_radius`` of a searcher are marked detected.
    """

    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    targets: list[np.ndarray]
    neighbor_radius: float = 2.0   # dispersal range between searchers
    sensor_range: float = 2.0      # obstacle proximity-sensor range
    target_radius: float = 1.0
    cell_size: float = 2.0
    explore_weight: float = 0.6
    obstacle_gain: float = 2.0     # scales obstacle/wall repulsion vs v_max
    visits: np.ndarray | None = None
    found: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if self.visits is None:
            shape = tuple(int(math.ceil((hi - lo) / self.cell_size))
                          for lo, hi in zip(self.bounds_lo, self.bounds_hi))
            self.visits = np.zeros(shape, dtype=np.int64)
        if not self.found:
            self.found = [False] * len(self.targets)

    def clone(self) -> "DispersalSearchController":
        return DispersalSearchController(self.bounds_lo, self.bounds_hi,
                                         self.targets, self.neighbor_radius,
                                         self.sensor_range, self.target_radius,
                                         self.cell_size, self.explore_weight,
                                         self.obstacle_gain,
                                         self.visits.copy(), list(self.found))

    def _cell_of(self, position: np.ndarray) -> tuple[int, ...]:
        idx = np.floor((position - self.bounds_lo) / self.cell_size).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.visits.shape) - 1)
        return tuple(int(i) for i in idx)

    def _cell_center(self, cell: tuple[int, ...]) -> np.ndarray:
        return self.bounds_lo + (np.asarray(cell, dtype=float) + 0.5) * self.cell_size

    def update(self, world: WorldState, spec: MissionSpec) -> None:
        for agent in world.swarm():
            self.visits[self._cell_of(agent.position)] += 1
            for k, target in enumerate(self.targets):
                if not self.found[k] and \
                        float(np.linalg.norm(agent.position - target)) <= self.target_radius:
                    self.found[k] = True

    def commands(self, world: WorldState, spec: MissionSpec) -> dict[int, np.ndarray]:
        swarm = sorted(world.swarm(), key=lambda a: a.id)
        # each searcher drifts to its own rank-th least-visited cell so the
        # swarm fans out instead of converging on a single frontier
        cell_order = np.argsort(self.visits.ravel(), kind="stable")
        cmds: dict[int, np.ndarray] = {}
        for rank, agent in enumerate(swarm):
            least = np.unravel_index(int(cell_order[rank % len(cell_order)]),
                                     self.visits.shape)
            drift_target = self._cell_center(least)
            cmd = np.zeros_like(agent.position)
            for other in world.agents:
                if other.id == agent.id:
                    continue
                away = agent.position - other.position
                d = float(np.linalg.norm(away))
                if d >= self.neighbor_radius:
                    continue
                if d < 1e-9:
                    # co-located: deterministic splay by agent rank
                    angle = 2.0 * math.pi * rank / max(len(swarm), 1)
                    away = np.zeros_like(agent.position)
                    away[0] = math.cos(angle)
                    away[1] = math.sin(angle)
                    d = 1.0
                cmd = cmd + (away / d) * spec.v_max * (1.0 - d / self.neighbor_radius)
            push = self.obstacle_gain * spec.v_max
            for obs in world.obstacles:
                d = obs.surface_distance(agent.position)
                if d < self.sensor_range:
                    d = max(d, 1e-6)
                    cmd = cmd + obs.outward_direction(agent.position) * \
                        push * (1.0 - d / self.sensor_range)
            # keep inside the map like an outward-facing wall sensor
            for axis in range(len(agent.position)):
                lo_gap = agent.position[axis] - self.bounds_lo[axis]
                hi_gap = self.bounds_hi[axis] - agent.position[axis]
                if lo_gap < self.sensor_range:
                    cmd[axis] += push * (1.0 - max(lo_gap, 0.0) / self.sensor_range)
                if hi_gap < self.sensor_range:
                    cmd[axis] -= push * (1.0 - max(hi_gap, 0.0) / self.sensor_range)
            drift = _attraction(agent.position, drift_target, spec.v_max,
                                self.cell_size)
            cmds[agent.id] = clamp_norm(cmd + self.explore_weight * drift,
                                        spec.v_max)
        return cmds

    def mission_complete(self, world: WorldState, spec: MissionSpec) -> bool:
        return bool(self.found) and all(self.found)

    def goal_for(self, world: WorldState, agent_id: int, spec: MissionSpec):
        agent = world.agent(agent_id)
        best = None
        best_d = math.inf
        for k, target in enumerate(self.targets):
            if self.found[k]:
                continue
            d = float(np.linalg.norm(agent.position - target))
            if d < best_d:
                best, best_d = target, d
        return best


def apf_swarm_controller(world: WorldState, spec: MissionSpec,
                         controller: ApfNavigationController) -> dict[int, np.ndarray]:
    """Functional wrapper over :class:`ApfNavigationController`."""
    return controller.commands(world, spec)


def dispersal_controller(world: WorldState, spec: MissionSpec,
                         controller: DispersalSearchController) -> dict[int, np.ndarray]:
    """Functional wrapper over :class:`DispersalSearchController`."""
    return controller.commands(world, spec)
