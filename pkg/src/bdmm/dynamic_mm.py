"""Batch-dynamic maximal matching over the simulated clique.

A :class:`Simulation` owns the ground-truth topology, the vertex partition,
every player's local state and the network.  Players act only on their own
state plus delivered tokens; the ground truth is kept for the adversary and
the oracles.

Within one batch, deletions are handled first and insertions second.
Deleted matched edges are split into mini-batches of ``gamma`` edges.  Until
its mini-batch comes up, a deleted matched edge stays "pending": both
endpoints keep counting as matched, exactly as if the adversary had issued
the mini-batches one after another.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import InvalidMatching, IterationCapExceeded, PreconditionFailed, SampleDeficit
from .model import (
    Edge,
    Graph,
    Matching,
    Partition,
    PlayerState,
    UpdateBatch,
    canon,
    free_degree,
    validate_batch,
)
from .net import Network, NetworkConfig, Tag, Token
from .static_mm import DEFAULT_CAP_MULTIPLIER, run_static_matching

log = logging.getLogger(__name__)

OBLIVIOUS = "oblivious"
ADAPTIVE = "adaptive"


@dataclass
class UpdateConfig:
    adversary_mode: str = OBLIVIOUS
    gamma: int = 0  # 0 selects the mode default
    c1: int = 2
    c2: int = 1
    fastpath_enabled: bool = False
    iteration_cap_multiplier: int = DEFAULT_CAP_MULTIPLIER
    adaptive_gamma_rule: str = "sqrt_beta_k"  # or "beta_sqrt_k"

    def __post_init__(self):
        if self.adversary_mode not in (OBLIVIOUS, ADAPTIVE):
            raise ValueError(f"unknown adversary mode {self.adversary_mode!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be positive")

    def resolve_gamma(self, beta: int, k: int) -> int:
        if self.gamma:
            return self.gamma
        if self.adversary_mode == OBLIVIOUS:
            return beta * k
        if self.adaptive_gamma_rule == "beta_sqrt_k":
            return max(1, math.floor(beta * math.sqrt(k)))
        return max(1, math.isqrt(beta * k))


@dataclass
class PhaseOneState:
    t_set: dict[int, set[int]]
    iteration: int = 0

    def size(self) -> int:
        return sum(len(s) for s in self.t_set.values())


@dataclass
class MiniBatch:
    d: list[Edge]
    gamma: int
    vf: set[int]
    vf_hosted: dict[int, list[int]]
    # common knowledge: which V_f vertices are still free
    vf_free: set[int]
    phase1: PhaseOneState | None = None
    fastpath: bool = False
    deficits: list[int] = field(default_factory=list)


@dataclass
class BatchReport:
    rounds: int = 0
    tokens: int = 0
    matched_deletions: int = 0
    minibatches: int = 0
    sample_deficits: int = 0
    fastpath_runs: int = 0
    phase1_iterations: list[int] = field(default_factory=list)
    inserted_matches: int = 0


class Observer:
    """Hooks called at quiescent points; the harness attaches its oracles here."""

    def on_minibatch_start(self, sim: "Simulation", d: list[Edge]) -> None:
        pass

    def on_phase1_start(self, sim: "Simulation", mb: MiniBatch) -> None:
        pass

    def on_phase1_end(self, sim: "Simulation", mb: MiniBatch) -> None:
        pass

    def on_minibatch_end(self, sim: "Simulation", mb: MiniBatch) -> None:
        pass


def deterministic_local_matching_g(edges: Iterable[tuple[int, int]]) -> list[Edge]:
    """Greedy maximal matching over edges in lexicographic (min, max) order."""
    taken: set[int] = set()
    out = []
    for u, v in sorted({canon(*e) for e in edges}):
        if u not in taken and v not in taken:
            out.append((u, v))
            taken.add(u)
            taken.add(v)
    return out


def match_in_order(samples: dict[int, list[int]]) -> tuple[list[Edge], list[int]]:
    """Match each key (ascending) to its least sampled neighbour not yet taken."""
    taken: set[int] = set()
    pairs, deficits = [], []
    for u in sorted(samples):
        w = next((w for w in sorted(samples[u]) if w not in taken), None)
        if w is None:
            deficits.append(u)
            continue
        taken.add(w)
        pairs.append(canon(u, w))
    return pairs, deficits


def high_free_degree_holds(graph: Graph, matching: Matching, vf: Iterable[int], k: int, gamma: int) -> bool:
    """Centralized check of the constant-round fast path's free-degree precondition."""
    need = 2 * (k * gamma + gamma) + 1
    return all(free_degree(graph, matching, u) >= need for u in vf)


class Simulation:
    def __init__(self, graph: Graph, partition: Partition, net_config: NetworkConfig,
                 update_config: UpdateConfig | None = None, exact: bool = False,
                 observer: Observer | None = None,
                 fastpath_oracle: Callable[["Simulation", set[int]], bool] | None = None):
        if partition.n != graph.n:
            raise ValueError("partition and graph disagree on n")
        if partition.k != net_config.k:
            raise ValueError("partition and network disagree on k")
        self.graph = graph.copy()
        self.partition = partition
        self.owner = partition.owner
        self.net = Network(net_config, exact=exact)
        self.cfg = update_config or UpdateConfig()
        self.gamma = self.cfg.resolve_gamma(net_config.beta, net_config.k)
        self.observer = observer or Observer()
        self.fastpath_oracle = fastpath_oracle or (
            lambda sim, vf: high_free_degree_holds(sim.graph, sim.matching, vf, sim.net.k, sim.gamma))
        self.players = {p: PlayerState.build(p, graph, partition, net_config.master_seed)
                        for p in self.net.players}
        self.matching = Matching()
        self.log_n = math.ceil(math.log2(max(graph.n, 2)))

    # -- bookkeeping ---------------------------------------------------
    @property
    def metrics(self):
        return self.net.metrics

    def output_matching(self) -> Matching:
        """The matching as output by the players (union of their mate maps)."""
        m = Matching()
        for st in self.players.values():
            for v, u in st.mate.items():
                if self.players[self.owner[u]].mate.get(u) != v:
                    raise InvalidMatching(f"players disagree on the mate of {v}")
                if v < u:
                    m.add(v, u)
        return m

    def _apply_global_matches(self, edges: Iterable[Edge], mb: MiniBatch | None = None) -> None:
        """Every player learned ``edges`` (broadcast or common computation)."""
        edges = list(edges)
        if not edges:
            return
        for u, v in edges:
            self.players[self.owner[u]].mate[u] = v
            self.players[self.owner[v]].mate[v] = u
            self.matching.add(u, v)
            if mb is not None:
                mb.vf_free.discard(u)
                mb.vf_free.discard(v)
        for st in self.players.values():
            for u, v in edges:
                st.set_matched(u)
                st.set_matched(v)

    # -- initialization --------------------------------------------------
    def initialize(self):
        active = {p: {v: set(st.local_adj[v]) for v in st.hosted if st.local_adj[v]}
                  for p, st in self.players.items()}
        res = run_static_matching(self.net, self.players, active, label="init",
                                  cap_multiplier=self.cfg.iteration_cap_multiplier)
        for u, v in res.matches:
            self.matching.add(u, v)
        return res

    # -- batches ---------------------------------------------------------
    def process_batch(self, batch: UpdateBatch) -> BatchReport:
        validate_batch(self.graph, batch)
        report = BatchReport()
        r0, t0 = self.net.metrics.snapshot()
        self.handle_deletions(batch.deletions, report)
        report.inserted_matches = len(self.handle_insertions(batch.insertions))
        r1, t1 = self.net.metrics.snapshot()
        report.rounds, report.tokens = r1 - r0, t1 - t0
        return report

    def handle_deletions(self, deletions: list[Edge], report: BatchReport | None = None) -> None:
        report = report if report is not None else BatchReport()
        # zero-cost topology update at the endpoints' owners
        for u, v in deletions:
            self.graph.remove_edge(u, v)
            for x, y in ((u, v), (v, u)):
                st = self.players[self.owner[x]]
                if st.mate.get(x) == y:
                    st.pending[x] = y
                st.unlink(x, y)
        out = {p: [Token(Tag.EDGE, u, st.pending[u]) for u in sorted(st.pending) if u < st.pending[u]]
               for p, st in self.players.items()}
        with self.net.phase("del:split"):
            d_all = sorted((tok.a, tok.b) for tok in self.net.spreading(out))
        report.matched_deletions = len(d_all)
        g = self.gamma
        for i in range(0, len(d_all), g):
            mb = self.handle_deletion_minibatch(d_all[i:i + g])
            report.minibatches += 1
            report.sample_deficits += len(mb.deficits)
            if mb.phase1 is not None:
                report.phase1_iterations.append(mb.phase1.iteration)
            report.fastpath_runs += mb.fastpath

    def begin_minibatch(self, d: list[Edge]) -> MiniBatch:
        """Retire the pending edges of ``d``; everyone already knows ``d``."""
        self.observer.on_minibatch_start(self, d)
        vf = {x for e in d for x in e}
        for u, v in d:
            self.matching.remove(u, v)
        vf_hosted: dict[int, list[int]] = defaultdict(list)
        for x in sorted(vf):
            st = self.players[self.owner[x]]
            del st.pending[x]
            del st.mate[x]
            vf_hosted[st.me].append(x)
        for st in self.players.values():
            for x in vf:
                st.set_matched(x, False)
        return MiniBatch(list(d), self.gamma, vf, dict(vf_hosted), set(vf))

    def handle_deletion_minibatch(self, d: list[Edge]) -> MiniBatch:
        if len(d) > self.gamma:
            raise ValueError("mini-batch larger than gamma")
        mb = self.begin_minibatch(d)
        if not d:
            return mb
        if self.cfg.fastpath_enabled and self.fastpath_oracle(self, set(mb.vf)):
            with self.net.phase("del:fastpath"):
                self.high_free_degree_fastpath(mb, flag=True)
            mb.fastpath = True
            self.net.metrics.events["fastpath"] += 1
        # after a successful fast path nothing in V_f is left free
        if mb.vf_free:
            self.observer.on_phase1_start(self, mb)
            t_rem = self.phase1_run(mb)
            self.phase1_finish(mb, t_rem)
            self.observer.on_phase1_end(self, mb)
            if self.cfg.adversary_mode == OBLIVIOUS:
                self.phase2_oblivious(mb)
            else:
                self.phase2_adaptive(mb)
        self.observer.on_minibatch_end(self, mb)
        return mb

    # -- high free degree fast path ------------------------------------
    def high_free_degree_fastpath(self, mb: MiniBatch, flag: bool = False) -> list[Edge]:
        if not flag:
            raise PreconditionFailed("fast path needs the high-free-degree flag")
        k, gamma = self.net.k, mb.gamma
        order = sorted(mb.vf)
        local: dict[int, list[Token]] = defaultdict(list)
        outbox: dict[tuple[int, int], list[Token]] = defaultdict(list)
        for p, st in self.players.items():
            taken: set[int] = set()
            for i, v in enumerate(order, start=1):
                cands = [w for w in st.hosted_nbrs.get(v, ()) if w not in st.mate and w not in mb.vf
                         and w not in taken]
                if not cands:
                    continue
                w = min(cands)
                taken.add(w)
                j = ((i if i <= gamma else i - gamma) % k) + 1
                tok = Token(Tag.EDGE, v, w)
                if j == p:
                    local[j].append(tok)
                else:
                    outbox[(p, j)].append(tok)
        inbox = self.net.send_direct(outbox)
        matched: dict[int, list[Token]] = {}
        for j in self.net.players:
            got = sorted(local.get(j, []) + [tok for _, tok in inbox.get(j, [])])
            keep: dict[int, int] = {}
            for tok in got:
                keep.setdefault(tok.a, tok.b)
            matched[j] = [Token(Tag.MATCHED, v, w) for v, w in sorted(keep.items())]
        outbox = {(j, q): toks for j, toks in matched.items() for q in self.net.players if q != j and toks}
        self.net.send_direct(outbox)
        edges = [canon(t.a, t.b) for toks in matched.values() for t in toks]
        self._apply_global_matches(edges, mb)
        return edges

    # -- phase 1 ---------------------------------------------------------
    def _free_vprime_nbrs(self, st: PlayerState, u: int, vf: set[int]) -> list[int]:
        nm = st.neighbor_matched
        return [w for w in st.local_adj[u] if not nm[w] and w not in vf]

    def phase1_initial_t(self, mb: MiniBatch) -> PhaseOneState:
        need = 2 * mb.gamma + 1
        t = {p: set() for p in self.players}
        for p, hosted in mb.vf_hosted.items():
            st = self.players[p]
            for u in hosted:
                if u in mb.vf_free and len(self._free_vprime_nbrs(st, u, mb.vf)) >= need:
                    t[p].add(u)
        return PhaseOneState(t)

    def phase1_iteration(self, mb: MiniBatch, state: PhaseOneState) -> list[Edge]:
        """One round of match-up! requests; returns the edges it matched."""
        out = {}
        for p, st in self.players.items():
            toks = []
            for u in sorted(state.t_set[p]):
                per_player = Counter(self.owner[w] for w in self._free_vprime_nbrs(st, u, mb.vf))
                targets = sorted(per_player)
                i = st.rng.choices(targets, weights=[per_player[q] for q in targets])[0]
                toks.append(Token(Tag.MATCH_UP, u, i))
            out[p] = toks
        requests: dict[int, list[int]] = defaultdict(list)
        for tok in self.net.spreading(out):
            requests[tok.b].append(tok.a)
        replies = {}
        for i in sorted(requests):
            st = self.players[i]
            hits: dict[int, list[int]] = defaultdict(list)
            for u in requests[i]:
                cands = sorted(w for w in st.hosted_nbrs.get(u, ()) if w not in st.mate and w not in mb.vf)
                hits[st.rng.choice(cands)].append(u)
            # a vertex hit by two or more requests accepts none of them
            replies[i] = [Token(Tag.MATCHED, us[0], v) for v, us in sorted(hits.items()) if len(us) == 1]
        edges = [canon(t.a, t.b) for t in self.net.spreading(replies)]
        self._apply_global_matches(edges, mb)
        state.iteration += 1
        need = 2 * mb.gamma + 1
        for p, ts in state.t_set.items():
            st = self.players[p]
            for u in list(ts):
                if u not in mb.vf_free or len(self._free_vprime_nbrs(st, u, mb.vf)) < need:
                    ts.discard(u)
        return edges

    def phase1_run(self, mb: MiniBatch) -> PhaseOneState:
        threshold = self.cfg.c1 * self.log_n
        cap = self.cfg.iteration_cap_multiplier * math.ceil(math.log2(max(self.net.beta * self.net.k, 4)))
        state = self.phase1_initial_t(mb)
        mb.phase1 = state
        with self.net.phase("del:phase1"):
            size = self.net.aggregate_sum({p: len(s) for p, s in state.t_set.items()})
            while size >= threshold:
                if state.iteration >= cap:
                    raise IterationCapExceeded(f"phase 1 still has |T|={size} after {cap} iterations")
                self.phase1_iteration(mb, state)
                size = self.net.aggregate_sum({p: len(s) for p, s in state.t_set.items()})
        return state

    def phase1_finish(self, mb: MiniBatch, state: PhaseOneState) -> list[Edge]:
        """Sample a few free edges per remaining T-vertex and match them locally."""
        log_n = self.log_n
        s_cap = max(self.cfg.c2 * log_n * log_n, self.cfg.c1 * log_n + 1)
        out = {}
        for p, ts in state.t_set.items():
            st = self.players[p]
            toks = []
            for u in sorted(ts):
                nbrs = sorted(self._free_vprime_nbrs(st, u, mb.vf))
                for w in sorted(st.rng.sample(nbrs, min(len(nbrs), s_cap))):
                    toks.append(Token(Tag.EDGE, u, w))
            out[p] = toks
        with self.net.phase("del:phase1-finish"):
            delivered = self.net.spreading(out)
        samples: dict[int, list[int]] = defaultdict(list)
        for tok in delivered:
            samples[tok.a].append(tok.b)
        pairs, deficits = match_in_order(samples)
        for u in deficits:
            log.warning("%s; vertex falls back to phase 2", SampleDeficit(u))
            self.net.metrics.events["sample_deficit"] += 1
        mb.deficits.extend(deficits)
        self._apply_global_matches(pairs, mb)
        for ts in state.t_set.values():
            ts.clear()
        return pairs

    # -- phase 2 ---------------------------------------------------------
    def phase2_oblivious(self, mb: MiniBatch) -> list[Edge]:
        low = set(mb.vf_free)
        if not low:
            return []
        active: dict[int, dict[int, set[int]]] = {}
        for p, st in self.players.items():
            view: dict[int, set[int]] = {}
            for x in mb.vf_hosted.get(p, ()):
                if x in low:
                    nbrs = set(st.free_neighbors(x))
                    if nbrs:
                        view[x] = nbrs
            for x in low:
                for w in st.hosted_nbrs.get(x, ()):
                    if w not in low and w not in st.mate:
                        view.setdefault(w, set()).add(x)
            active[p] = view
        with self.net.phase("del:phase2"):
            res = run_static_matching(self.net, self.players, active, label="phase2-oblivious",
                                      cap_multiplier=self.cfg.iteration_cap_multiplier)
        for u, v in res.matches:
            self.matching.add(u, v)
            mb.vf_free.discard(u)
            mb.vf_free.discard(v)
        return res.matches

    def phase2_adaptive(self, mb: MiniBatch) -> list[Edge]:
        low = set(mb.vf_free)
        if not low:
            return []
        out = {}
        for p, st in self.players.items():
            toks = []
            for x in mb.vf_hosted.get(p, ()):
                if x in low:
                    for w in sorted(st.free_neighbors(x)):
                        # an edge inside L is reported by its smaller endpoint only
                        if w in low and w < x:
                            continue
                        toks.append(Token(Tag.EDGE, x, w))
            out[p] = toks
        with self.net.phase("del:phase2"):
            edges = self.net.gather_at(1, out)
            result = deterministic_local_matching_g((t.a, t.b) for t in edges)
            self.net.spreading({1: [Token(Tag.MATCHED, u, v) for u, v in result]})
        self._apply_global_matches(result, mb)
        return result

    # -- insertions ------------------------------------------------------
    def handle_insertions(self, insertions: list[Edge]) -> list[Edge]:
        if not insertions:
            return []
        for u, v in insertions:
            self.graph.add_edge(u, v)
            su, sv = self.players[self.owner[u]], self.players[self.owner[v]]
            u_matched, v_matched = u in su.mate, v in sv.mate
            su.link(u, v, v_matched)
            sv.link(v, u, u_matched)
        out: dict[int, list[Token]] = defaultdict(list)
        for u, v in sorted(insertions):
            st = self.players[self.owner[u]]
            if u not in st.mate and not st.neighbor_matched[v]:
                out[st.me].append(Token(Tag.EDGE, u, v))
        with self.net.phase("ins"):
            delivered = self.net.spreading(out)
        result = deterministic_local_matching_g((t.a, t.b) for t in delivered)
        self._apply_global_matches(result)
        return result
