"""Quantitative constraint margins and swarm robustness.

Five margins are computed per swarm agent, all in margin form: positive
means the constraint is satisfied with slack, <= 0 means it is violated.

1. safe distance   -- clearance to the nearest obstacle or agent
2. speed bound     -- headroom below the maximum speed
3. acceleration    -- headroom below the maximum acceleration
4. formation       -- tightest pairwise-distance margin to visible peers
5. progress        -- best per-step advance toward the goal in a window

Each raw margin is normalized by its maximum attainable positive value
(piecewise for the safe-distance margin) so every normalized margin lies
in [-1, 1] and raw zero maps to normalized zero. Individual robustness is
the sum of an agent's applicable normalized margins; swarm robustness is
the sum over agents.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .world import WorldState, min_obstacle_distance

N_CONSTRAINTS = 5


@dataclass
class ConstraintParams:
    safe_distance: float
    sensing_radius: float
    v_max: float
    a_max: float
    formation_min: float
    formation_max: float
    dt: float
    window: int = 20
    formation_enabled: bool = True

    def __post_init__(self):
        if not 0 < self.safe_distance < self.sensing_radius:
            raise ValueError("need 0 < safe_distance < sensing_radius")
        if not 0 < self.formation_min < self.formation_max:
            raise ValueError("need 0 < formation_min < formation_max")
        if self.window < 1:
            raise ValueError("window must be >= 1")


@dataclass
class AgentRobustness:
    agent_id: int
    raw: tuple[float, ...]         # 5 raw margins, physical units
    normalized: tuple[float, ...]  # 5 normalized margins in [-1, 1]
    goal_distance: float | None
    individual: float              # sum of applicable normalized margins


@dataclass
class RobustnessRecord:
    per_agent: list[AgentRobustness]
    swarm: float
    min_margin: float


def _clamp_unit(x: float) -> float:
    return float(min(max(x, -1.0), 1.0))


def margin_safe_distance(d: float, params: ConstraintParams) -> tuple[float, float]:
    """Clearance margin; ``d`` is the clamped min distance in [0, sensing_radius]."""
    raw = d - params.safe_distance
    if raw >= 0.0:
        norm = raw / (params.sensing_radius - params.safe_distance)
    else:
        norm = raw / params.safe_distance
    return float(raw), _clamp_unit(norm)


def margin_kinematics(v: float, a_abs: float, params: ConstraintParams):
    """Speed and acceleration margins: ((raw_v, norm_v), (raw_a, norm_a))."""
    raw_v = params.v_max - v
    raw_a = params.a_max - a_abs
    return ((float(raw_v), _clamp_unit(raw_v / params.v_max)),
            (float(raw_a), _clamp_unit(raw_a / params.a_max)))


def margin_formation(pairwise_distances: Sequence[float],
                     params: ConstraintParams) -> tuple[float, float]:
    """Tightest pairwise margin; a singleton swarm gets the full margin."""
    half_span = 0.5 * (params.formation_max - params.formation_min)
    if not pairwise_distances:
        return float(half_span), 1.0
    d_lo = min(pairwise_distances)
    d_hi = max(pairwise_distances)
    raw = min(d_lo - params.formation_min, params.formation_max - d_hi)
    return float(raw), _clamp_unit(raw / half_span)


def margin_progress(goal_distance_history: Sequence[float],
                    params: ConstraintParams) -> tuple[float, float]:
    """Windowed-max per-step progress toward the goal (eventually-semantics)."""
    h = list(goal_distance_history)
    if len(h) < 2:
        raise ValueError("progress margin needs at least two history entries")
    steps = [h[i - 1] - h[i] for i in range(1, len(h))]
    raw = max(steps)
    return float(raw), _clamp_unit(raw / (params.v_max * params.dt))


def _visible_pairwise(agent_id: int, world: WorldState,
                      params: ConstraintParams) -> list[float]:
    agent = world.agent(agent_id)
    out = []
    for other in world.swarm():
        if other.id == agent_id:
            continue
        d = float(np.linalg.norm(other.position - agent.position))
        if d <= params.sensing_radius:
            out.append(d)
    return out


def individual_robustness(agent_id: int, world: WorldState,
                          goal_distance_history: Sequence[float] | None,
                          params: ConstraintParams) -> AgentRobustness:
    """All five margins for one swarm agent at the current step."""
    agent = world.agent(agent_id)
    d = min_obstacle_distance(agent, world)
    raw1, r1 = margin_safe_distance(d, params)
    speed = float(np.linalg.norm(agent.velocity))
    accel = float(np.linalg.norm(agent.acceleration))
    (raw2, r2), (raw3, r3) = margin_kinematics(speed, accel, params)
    raw4, r4 = margin_formation(_visible_pairwise(agent_id, world, params), params)
    if goal_distance_history is None or len(goal_distance_history) < 2:
        # no goal (e.g. all search targets found): full progress margin
        raw5, r5 = params.v_max * params.dt, 1.0
        goal_distance = None
    else:
        raw5, r5 = margin_progress(goal_distance_history, params)
        goal_distance = float(goal_distance_history[-1])
    individual = r1 + r2 + r3 + r5
    if params.formation_enabled:
        individual += r4
    return AgentRobustness(agent_id, (raw1, raw2, raw3, raw4, raw5),
                           (r1, r2, r3, r4, r5), goal_distance,
                           float(individual))


def swarm_robustness(world: WorldState,
                     goal_distance_histories: dict[int, Sequence[float]],
                     params: ConstraintParams) -> RobustnessRecord:
    """Aggregate per-agent robustness over every swarm member."""
    per_agent = []
    for agent in sorted(world.swarm(), key=lambda a: a.id):
        history = goal_distance_histories.get(agent.id)
        per_agent.append(individual_robustness(agent.id, world, history, params))
    if not per_agent:
        raise ValueError("swarm robustness needs at least one swarm agent")
    swarm = float(sum(e.individual for e in per_agent))
    mins = []
    for e in per_agent:
        for k, r in enumerate(e.normalized):
            if k == 3 and not params.formation_enabled:
                continue
            mins.append(r)
    return RobustnessRecord(per_agent, swarm, float(min(mins)))


def constraint_violations(record: RobustnessRecord,
                          params: ConstraintParams | None = None
                          ) -> list[tuple[int, int]]:
    """(agent_id, constraint_number) pairs with raw margin <= 0, boundary inclusive."""
    formation_enabled = params.formation_enabled if params is not None else True
    out = []
    for entry in record.per_agent:
        for k, raw in enumerate(entry.raw):
            if k == 3 and not formation_enabled:
                continue
            if raw <= 0.0:
                out.append((entry.agent_id, k + 1))
    return out
