import math

import pytest

from bdmm.adversary import gen_line_segment_graph, gen_random_graph, gen_random_partition
from bdmm.errors import IterationCapExceeded
from bdmm.model import Graph, Partition, PlayerState, is_maximal, Matching
from bdmm.net import Network, NetworkConfig
from bdmm.static_mm import (
    IterationScratch,
    edge_sampling_step,
    iteration_cap,
    matchup_step,
    pruning_step,
    reduce_indegree_step,
    run_static_matching,
)


def setup(g, k=2, owners=None, seed=0):
    owners = owners or [0] + [(v % k) + 1 for v in range(1, g.n + 1)]
    part = Partition(k, owners)
    net = Network(NetworkConfig(k, 1, g.n, seed))
    players = {p: PlayerState.build(p, g, part, seed) for p in net.players}
    active = {p: {v: set(st.local_adj[v]) for v in st.hosted if st.local_adj[v]} for p, st in players.items()}
    return net, players, active


def test_star_sampling_and_indegree():
    # centre 1, leaves 2..6
    g = Graph(6, [(1, j) for j in range(2, 7)])
    net, players, active = setup(g, k=3)
    scratch = {p: IterationScratch() for p in players}
    edge_sampling_step(net, players, active, scratch)
    owner1 = players[1].owner_of[1]
    assert sorted(scratch[owner1].marked_in[1]) == [2, 3, 4, 5, 6]
    marked_by_centre = scratch[owner1].marked_out[1]
    assert marked_by_centre in range(2, 7)
    reduce_indegree_step(net, players, scratch)
    assert scratch[owner1].selected_in[1] in range(2, 7)
    # every vertex of the reduced graph has degree at most two
    degrees = {}
    for sc in scratch.values():
        for u, nb in sc.bar_adj.items():
            degrees[u] = len(nb)
    assert max(degrees.values()) <= 2
    assert degrees[1] <= 2


def test_matchup_mutual_requests_only():
    # reduced graph u-v-w with u=1, v=2, w=3; requests v->u, u->v, w->v
    g = Graph(3, [(1, 2), (2, 3)])
    net, players, _ = setup(g, k=3, owners=[0, 1, 2, 3])
    scratch = {p: IterationScratch() for p in players}
    scratch[1].bar_adj[1] = {2}
    scratch[2].bar_adj[2] = {1}
    scratch[3].bar_adj[3] = {2}
    # force v's request to u: its only reduced neighbour is u
    new = matchup_step(net, players, scratch)
    assert new == [(1, 2)]
    assert players[1].mate == {1: 2} and players[2].mate == {2: 1}
    assert 3 not in players[3].mate


def test_pruning_broadcast_by_smaller_endpoint():
    g = Graph(8, [(3, 7), (7, 8)])
    owners = [0, 1, 1, 2, 1, 1, 1, 3, 3]
    net, players, active = setup(g, k=3, owners=owners)
    players[2].mate[3] = 7
    players[3].mate[7] = 3
    scratch = {p: IterationScratch() for p in players}
    delivered = pruning_step(net, players, active, scratch)
    assert delivered == [(3, 7)]
    # only the player hosting vertex 3 injected a token
    assert net.metrics.tokens_injected == 1
    assert all(st.neighbor_matched.get(7, True) for st in players.values())
    assert 8 not in active[3]


def test_line_segments_two():
    g = gen_line_segment_graph(2).graph
    net, players, active = setup(g, k=2)
    res = run_static_matching(net, players, active)
    m = Matching(res.matches)
    assert len(m) == 2
    assert is_maximal(g, m)
    for seg in ((1, 2, 3), (4, 5, 6)):
        assert sum(v not in m.mate for v in seg) == 1


@pytest.mark.parametrize("seed", range(10))
def test_erdos_renyi_fifty(seed):
    g = gen_random_graph(50, 5, seed)
    part = gen_random_partition(50, 4, seed)
    net = Network(NetworkConfig(4, 1, 50, seed))
    players = {p: PlayerState.build(p, g, part, seed) for p in net.players}
    active = {p: {v: set(st.local_adj[v]) for v in st.hosted if st.local_adj[v]} for p, st in players.items()}
    res = run_static_matching(net, players, active)
    assert is_maximal(g, Matching(res.matches))
    assert res.iterations <= 32 * math.log2(50)
    assert res.residual_history[-1] == 0
    # each player's local knowledge agrees with the global result
    m = Matching(res.matches)
    for st in players.values():
        for v in st.hosted:
            assert st.mate.get(v) == m.mate.get(v)
        for u, flag in st.neighbor_matched.items():
            assert flag == (u in m.mate)


def test_iteration_cap():
    assert iteration_cap(3) == 32 * 2
    assert iteration_cap(1024, 1) == 10
    g = Graph(2, [(1, 2)])
    net, players, active = setup(g, k=2)
    with pytest.raises(IterationCapExceeded):
        run_static_matching(net, players, active, cap_multiplier=0)


def test_empty_active_costs_one_check():
    g = Graph(4)
    net, players, active = setup(g, k=2)
    res = run_static_matching(net, players, active)
    assert res.iterations == 0 and net.metrics.rounds == 2
