"""Inter-agent influence graph and Katz-centrality key-node ranking.

The influence of agent i on agent j is measured counterfactually: j's
controller command is computed with and without i present, and the
normalized command difference becomes the weight of the directed edge
i -> j. Pairs farther apart than the eligibility radius are ignored.

Centrality uses the out-influence orientation x = alpha * A x + beta, so
the top-ranked node is the strongest influencer rather than the most
influenced one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .world import MissionSpec, WorldState


class NonConvergent(RuntimeError):
    """Katz iteration failed to converge; carries the last iterate."""

    def __init__(self, scores: dict[int, float]):
        super().__init__("katz centrality did not converge")
        self.scores = scores


@dataclass
class InfluenceGraph:
    nodes: list[int]
    edges: dict[tuple[int, int], float] = field(default_factory=dict)
    influence_radius: float = 0.0

    def weight(self, i: int, j: int) -> float:
        return self.edges.get((i, j), 0.0)

    def adjacency(self) -> tuple[np.ndarray, list[int]]:
        order = sorted(self.nodes)
        index = {n: k for k, n in enumerate(order)}
        a = np.zeros((len(order), len(order)))
        for (i, j), w in self.edges.items():
            a[index[i], index[j]] = w
        return a, order


@dataclass
class KeyNodeSequence:
    order: list[int]               # agent ids, descending score, ties by id
    scores: dict[int, float]

    @property
    def key_node(self) -> int:
        return self.order[0]


def cal_deviation(i: int, j: int, world: WorldState, controller,
                  spec: MissionSpec, influence_radius: float) -> float:
    """One-step counterfactual influence of agent i on agent j's command."""
    if i == j:
        raise ValueError("influence is defined between distinct agents")
    pi = world.agent(i).position
    pj = world.agent(j).position
    if float(np.linalg.norm(pi - pj)) > influence_radius:
        return 0.0
    with_i = controller.commands(world, spec)[j]
    without_i = controller.commands(world.without(i), spec)[j]
    return float(np.linalg.norm(with_i - without_i)) / spec.v_max


def build_influence_graph(world: WorldState, controller, spec: MissionSpec,
                          influence_radius: float,
                          node_ids: list[int] | None = None) -> InfluenceGraph:
    """Evaluate every ordered swarm pair; keep only positive-deviation edges."""
    ids = sorted(node_ids) if node_ids is not None \
        else sorted(a.id for a in world.swarm())
    graph = InfluenceGraph(nodes=list(ids), influence_radius=influence_radius)
    if len(ids) < 2:
        return graph
    positions = {a.id: a.position for a in world.agents}
    baseline = controller.commands(world, spec)
    removed_cache: dict[int, dict[int, np.ndarray]] = {}
    for i in ids:
        for j in ids:
            if i == j:
                continue
            if float(np.linalg.norm(positions[i] - positions[j])) > influence_radius:
                continue
            if i not in removed_cache:
                removed_cache[i] = controller.commands(world.without(i), spec)
            dev = float(np.linalg.norm(baseline[j] - removed_cache[i][j])) / spec.v_max
            if dev > 0.0:
                graph.edges[(i, j)] = dev
    return graph


def _spectral_radius_estimate(a: np.ndarray) -> float:
    """Spectral radius of a nonnegative matrix.

    Computed from the full eigenvalue set: power iteration is unreliable
    on periodic structures (e.g. pure cycles), where the ratio estimate
    oscillates and can undershoot badly enough to break Katz convergence.
    """
    if a.shape[0] == 0 or not np.any(a):
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def katz_centrality(graph: InfluenceGraph, alpha_factor: float = 0.85,
                    tol: float = 1e-8, max_iter: int = 1000) -> dict[int, float]:
    """Fixed-point solve of x = alpha * A x + 1 in the out-influence orientation."""
    if not 0.0 < alpha_factor < 1.0:
        raise ValueError("alpha_factor must lie in (0, 1)")
    a, order = graph.adjacency()
    n = len(order)
    if n == 0:
        return {}
    lam = _spectral_radius_estimate(a)
    alpha = alpha_factor / lam if lam > 1e-12 else alpha_factor
    x = np.ones(n)
    for _ in range(max_iter):
        x_next = alpha * (a @ x) + 1.0
        if float(np.max(np.abs(x_next - x))) < tol:
            return {node: float(s) for node, s in zip(order, x_next)}
        x = x_next
    raise NonConvergent({node: float(s) for node, s in zip(order, x)})


def key_node_sequence(graph: InfluenceGraph, alpha_factor: float = 0.85,
                      tol: float = 1e-8, max_iter: int = 1000) -> KeyNodeSequence:
    """Rank agents by descending centrality; ties broken by ascending id."""
    scores = katz_centrality(graph, alpha_factor, tol, max_iter)
    order = sorted(scores, key=lambda n: (-scores[n], n))
    return KeyNodeSequence(order=order, scores=scores)
