"""Israeli-Itai randomized maximal matching on the simulated clique.

Each iteration runs four steps, every one of them moving its messages with
Spreading: edge sampling, in-degree reduction, match-up and pruning.  A
one-bit-per-player COUNT aggregation decides whether another iteration is
needed.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .errors import IterationCapExceeded
from .model import Edge, PlayerState
from .net import Network, Tag, Token, group_by_owner

DEFAULT_CAP_MULTIPLIER = 32

# per player: hosted active vertex -> residual active neighbours
ActiveView = dict[int, dict[int, set[int]]]


@dataclass
class IterationScratch:
    marked_out: dict[int, int] = field(default_factory=dict)
    marked_in: dict[int, list[int]] = field(default_factory=lambda: defaultdict(list))
    selected_in: dict[int, int] = field(default_factory=dict)
    bar_adj: dict[int, set[int]] = field(default_factory=lambda: defaultdict(set))
    request: dict[int, int] = field(default_factory=dict)
    requests_seen: dict[int, set[int]] = field(default_factory=lambda: defaultdict(set))
    new_matches: list[Edge] = field(default_factory=list)


@dataclass
class StaticResult:
    matches: list[Edge]
    iterations: int
    residual_history: list[int]


def iteration_cap(n_active: int, multiplier: int = DEFAULT_CAP_MULTIPLIER) -> int:
    return multiplier * math.ceil(math.log2(max(n_active, 4)))


def edge_sampling_step(net: Network, players: Mapping[int, PlayerState], active: ActiveView,
                       scratch: Mapping[int, IterationScratch]) -> None:
    out = {}
    for p, st in players.items():
        sc, toks = scratch[p], []
        for u in sorted(active[p]):
            v = st.rng.choice(sorted(active[p][u]))
            sc.marked_out[u] = v
            toks.append(Token(Tag.MARKED, u, v))
        out[p] = toks
    owner = next(iter(players.values())).owner_of
    for p, toks in group_by_owner(net.spreading(out), owner).items():
        for tok in toks:
            scratch[p].marked_in[tok.b].append(tok.a)


def reduce_indegree_step(net: Network, players: Mapping[int, PlayerState],
                         scratch: Mapping[int, IterationScratch]) -> None:
    out = {}
    for p, st in players.items():
        sc, toks = scratch[p], []
        for u in sorted(sc.marked_in):
            v = st.rng.choice(sc.marked_in[u])
            sc.selected_in[u] = v
            sc.bar_adj[u].add(v)
            toks.append(Token(Tag.SELECTED, v, u))
        out[p] = toks
    owner = next(iter(players.values())).owner_of
    # SELECTED(v, u): the marked edge v->u was picked by u
    for p, toks in group_by_owner(net.spreading(out), owner, "a").items():
        for tok in toks:
            scratch[p].bar_adj[tok.a].add(tok.b)


def matchup_step(net: Network, players: Mapping[int, PlayerState],
                 scratch: Mapping[int, IterationScratch]) -> list[Edge]:
    out = {}
    for p, st in players.items():
        sc, toks = scratch[p], []
        for x in sorted(sc.bar_adj):
            y = st.rng.choice(sorted(sc.bar_adj[x]))
            sc.request[x] = y
            toks.append(Token(Tag.REQUEST, x, y))
        out[p] = toks
    owner = next(iter(players.values())).owner_of
    new = []
    for p, toks in group_by_owner(net.spreading(out), owner).items():
        sc, st = scratch[p], players[p]
        for tok in toks:
            x, y = tok.a, tok.b
            sc.requests_seen[y].add(x)
            if sc.request.get(y) == x:
                st.mate[y] = x
                if y < x:
                    sc.new_matches.append((y, x))
    for sc in scratch.values():
        new.extend(sc.new_matches)
    return sorted(set(new))


def pruning_step(net: Network, players: Mapping[int, PlayerState], active: ActiveView,
                 scratch: Mapping[int, IterationScratch]) -> list[Edge]:
    """Broadcast this iteration's matches and drop residual edges touching them."""
    out = {}
    for p, st in players.items():
        # responsible player: the one hosting the smaller endpoint
        out[p] = [Token(Tag.MATCHED, u, st.mate[u]) for u in sorted(active[p])
                  if u in st.mate and u < st.mate[u]]
    delivered = net.spreading(out)
    matched = set()
    for tok in delivered:
        matched.add(tok.a)
        matched.add(tok.b)
    for p, st in players.items():
        for x in matched:
            st.set_matched(x)
        view = active[p]
        for u in list(view):
            if u in matched:
                del view[u]
                continue
            nbrs = view[u]
            nbrs.difference_update([w for w in nbrs if w in matched])
            if not nbrs:
                del view[u]
    return sorted((tok.a, tok.b) for tok in delivered)


def run_static_matching(net: Network, players: Mapping[int, PlayerState], active: ActiveView,
                        label: str = "init", cap_multiplier: int = DEFAULT_CAP_MULTIPLIER,
                        on_iteration=None) -> StaticResult:
    """Maximal matching of the active subgraph; updates every player's state.

    ``active[p]`` lists, for each hosted vertex of player ``p`` that has active
    edges, its active neighbours.  The view is consumed.
    """
    for p in players:
        active.setdefault(p, {})
        for u in [u for u, nb in active[p].items() if not nb]:
            del active[p][u]
    n_active = len({u for view in active.values() for u in view} |
                   {w for view in active.values() for nb in view.values() for w in nb})
    cap = iteration_cap(n_active, cap_multiplier)
    matches: list[Edge] = []
    history = [_residual_edges(active)]
    iterations = 0
    with net.phase(label):
        while net.aggregate_sum({p: int(bool(active[p])) for p in players}):
            if iterations >= cap:
                raise IterationCapExceeded(f"{label}: no maximal matching after {cap} iterations")
            iterations += 1
            scratch = {p: IterationScratch() for p in players}
            edge_sampling_step(net, players, active, scratch)
            reduce_indegree_step(net, players, scratch)
            matchup_step(net, players, scratch)
            new = pruning_step(net, players, active, scratch)
            matches.extend(new)
            history.append(_residual_edges(active))
            if on_iteration is not None:
                on_iteration(iterations, new)
    return StaticResult(matches, iterations, history)


def _residual_edges(active: ActiveView) -> int:
    # every residual edge is seen from both of its endpoints
    return sum(len(nb) for view in active.values() for nb in view.values()) // 2
