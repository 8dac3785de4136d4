"""Centralized checks run between quiescent points of a simulation.

They read the ground truth and the players' states but never touch the
network, so they cannot perturb round counts or random streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dynamic_mm import MiniBatch, Observer, Simulation
from ..model import Edge, check_matching, compute_frontier, free_degree
from ..errors import InvalidMatching


@dataclass
class Verdict:
    ok: bool
    reason: str = ""
    vertex: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_maximal(sim: Simulation) -> Verdict:
    try:
        out = sim.output_matching()
        check_matching(sim.graph, out)
    except InvalidMatching as exc:
        return Verdict(False, str(exc))
    if out != sim.matching:
        return Verdict(False, "player output differs from the tracked matching")
    for u, v in sim.graph.edges():
        if u not in out.mate and v not in out.mate:
            return Verdict(False, f"edge {(u, v)} has two free endpoints", u)
    return Verdict(True)


def verify_player_knowledge(sim: Simulation) -> Verdict:
    """Each player knows its hosted vertices' mates and their neighbours' status."""
    truth = sim.matching.mate
    g = sim.graph
    for p, st in sorted(sim.players.items()):
        for v in sorted(st.hosted):
            mine = st.mate.get(v)
            if mine != truth.get(v):
                return Verdict(False, f"player {p} believes mate({v}) = {mine}, truth {truth.get(v)}", v)
            if st.local_adj[v] != g.adj(v):
                return Verdict(False, f"player {p} has a stale adjacency list for {v}", v)
            for u in sorted(g.adj(v)):
                flag = st.neighbor_matched.get(u)
                if flag is None or flag != (u in truth):
                    return Verdict(False, f"player {p} has wrong matched flag for {u}, neighbour of {v}", u)
    return Verdict(True)


def verify_bandwidth(sim: Simulation) -> Verdict:
    load, beta = sim.metrics.max_link_load, sim.net.beta
    if load > beta:
        return Verdict(False, f"a link carried {load} tokens in one round, budget {beta}")
    return Verdict(True)


def check_frontier(sim: Simulation, d: list[Edge]) -> list[str]:
    """Size, independence and free-degree bounds on the frontier of ``d``."""
    gamma = sim.gamma
    fr = compute_frontier(sim.graph, sim.matching, d, gamma)
    after = sim.matching.copy()
    for u, v in d:
        after.remove(u, v)
    problems = []
    if len(fr.v_f) > 2 * gamma:
        problems.append(f"|V_f| = {len(fr.v_f)} exceeds 2*gamma = {2 * gamma}")
    # deleted edges never join two V' vertices, so the current graph suffices
    for u in sorted(fr.v_prime):
        if any(w in fr.v_prime for w in sim.graph.adj(u)):
            problems.append(f"V' vertex {u} has a V' neighbour")
        fd = free_degree(sim.graph, after, u)
        if fd > 2 * gamma:
            problems.append(f"V' vertex {u} has free degree {fd} > {2 * gamma}")
    return problems


@dataclass
class FrontierObserver(Observer):
    """Counts frontier and phase-one violations on every deletion mini-batch."""

    strict: bool = False
    minibatches: int = 0
    frontier_violations: list[str] = field(default_factory=list)
    phase1_violations: list[str] = field(default_factory=list)
    deficit_minibatches: int = 0
    high_degree_checked: int = 0
    _high: set = field(default_factory=set)

    def on_minibatch_start(self, sim, d):
        self.minibatches += 1
        probs = check_frontier(sim, d)
        self.frontier_violations += probs
        if probs and self.strict:
            raise AssertionError(probs[0])

    def on_phase1_start(self, sim, mb: MiniBatch):
        need = 4 * mb.gamma + 1
        self._high = {u for u in mb.vf_free if free_degree(sim.graph, sim.matching, u) >= need}
        self.high_degree_checked += len(self._high)

    def on_phase1_end(self, sim, mb: MiniBatch):
        if mb.deficits:
            self.deficit_minibatches += 1
        for u in sorted(self._high):
            if u not in sim.matching.mate and u not in mb.deficits:
                msg = f"high-degree V_f vertex {u} still free after phase 1"
                self.phase1_violations.append(msg)
                if self.strict:
                    raise AssertionError(msg)
        self._high = set()


def state_dump(sim: Simulation) -> dict:
    return {
        "n": sim.graph.n,
        "edges": sorted(sim.graph.edges()),
        "matching": sim.matching.edges(),
        "players": {
            p: {
                "mate": dict(sorted(st.mate.items())),
                "neighbor_matched": dict(sorted(st.neighbor_matched.items())),
            }
            for p, st in sorted(sim.players.items())
        },
    }


def all_verdicts(sim: Simulation) -> dict[str, Verdict]:
    return {
        "maximality": verify_maximal(sim),
        "player_knowledge": verify_player_knowledge(sim),
        "bandwidth": verify_bandwidth(sim),
    }
