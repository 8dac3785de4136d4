import random

import pytest

from bdmm.adversary import gen_line_segment_graph, gen_random_graph, gen_random_partition, seg_vertex
from bdmm.errors import InvalidBatch, InvalidMatching, NotMatchedEdge, UnknownVertex
from bdmm.model import (
    Graph,
    Matching,
    Partition,
    UpdateBatch,
    apply_batch,
    canon,
    compute_frontier,
    free_degree,
    is_maximal,
    validate_batch,
    validate_partition,
)

from conftest import brute_adjacency, random_matching


def test_graph_basics():
    g = Graph(3, [(1, 2), (2, 3)])
    assert g.num_edges() == 2
    assert g.adj(2) == {1, 3}
    assert sorted(g.edges()) == [(1, 2), (2, 3)]
    with pytest.raises(UnknownVertex):
        g.adj(4)
    with pytest.raises(ValueError):
        g.add_edge(1, 1)
    with pytest.raises(ValueError):
        g.add_edge(2, 1)


def test_apply_batch_path_deletion():
    g = Graph(3, [(1, 2), (2, 3)])
    out = apply_batch(g, UpdateBatch(deletions=[(2, 1)]))
    assert sorted(out.edges()) == [(2, 3)]
    assert out.degree(1) == 0
    # the input is untouched
    assert g.has_edge(1, 2)


def test_apply_empty_batch_is_identity():
    g = gen_random_graph(20, 3, 1)
    assert apply_batch(g, UpdateBatch()) == g


def test_apply_batch_matches_rebuilt_adjacency():
    rng = random.Random(7)
    for trial in range(30):
        g = gen_random_graph(20, 4, trial)
        edges = set(g.edges())
        dels = rng.sample(sorted(edges), 3)
        non = [(u, v) for u in range(1, 21) for v in range(u + 1, 21) if (u, v) not in edges]
        ins = rng.sample(non, 2)
        out = apply_batch(g, UpdateBatch(deletions=dels, insertions=ins))
        want = brute_adjacency(20, (edges - set(dels)) | set(ins))
        assert all(out.adj(v) == want[v] for v in range(1, 21))


@pytest.mark.parametrize("batch", [
    UpdateBatch(deletions=[(1, 3)]),
    UpdateBatch(insertions=[(1, 2)]),
    UpdateBatch(deletions=[(1, 2)], insertions=[(2, 1)]),
    UpdateBatch(deletions=[(1, 2), (1, 2)]),
    UpdateBatch(insertions=[(1, 9)]),
])
def test_invalid_batches(batch):
    g = Graph(3, [(1, 2), (2, 3)])
    with pytest.raises(InvalidBatch):
        validate_batch(g, batch)


def test_free_degree_examples():
    tri = Graph(3, [(1, 2), (2, 3), (1, 3)])
    assert free_degree(tri, Matching(), 1) == 2
    path = Graph(3, [(1, 2), (2, 3)])
    assert free_degree(path, Matching([(1, 2)]), 3) == 0
    with pytest.raises(UnknownVertex):
        free_degree(path, Matching(), 5)


def test_free_degree_matches_enumeration():
    rng = random.Random(3)
    for trial in range(20):
        g = gen_random_graph(30, 5, trial)
        m = random_matching(g, rng)
        for u in g.vertices():
            want = len([w for w in brute_adjacency(30, g.edges())[u] if w not in m.mate])
            assert free_degree(g, m, u) == want


def test_frontier_path():
    # a-b-c-d as 1-2-3-4, matching {2,3}, delete it
    g_after = Graph(4, [(1, 2), (3, 4)])
    fr = compute_frontier(g_after, Matching([(2, 3)]), [(2, 3)], gamma=1)
    assert fr.v_f == {2, 3}
    assert fr.v_prime == {1, 4}


def test_frontier_empty_and_errors():
    g = Graph(4, [(1, 2)])
    fr = compute_frontier(g, Matching([(1, 2)]), [], gamma=1)
    assert fr.v_f == set() and fr.v_prime == set()
    with pytest.raises(NotMatchedEdge):
        compute_frontier(g, Matching(), [(1, 2)], gamma=1)


def test_frontier_line_segments_against_definitions():
    ls = gen_line_segment_graph(4)
    m = Matching([(seg_vertex(i, 1), seg_vertex(i, 2)) for i in range(1, 5)])
    d = [(seg_vertex(1, 1), seg_vertex(1, 2)), (seg_vertex(3, 1), seg_vertex(3, 2))]
    g_after = apply_batch(ls.graph, UpdateBatch(deletions=d))
    fr = compute_frontier(g_after, m, d, gamma=2)
    # brute force: unmatched under m minus d, outside V_f, adjacent to V_f
    m_after = m.copy()
    for e in d:
        m_after.remove(*e)
    vf = {x for e in d for x in e}
    want = {u for u in g_after.vertices() if u not in m_after.mate and u not in vf
            and any(w in vf for w in g_after.adj(u))}
    assert fr.v_f == vf and len(fr.v_f) == 4 <= 2 * 2
    assert fr.v_prime == want == {seg_vertex(1, 3), seg_vertex(3, 3)}


def test_is_maximal_examples():
    path = Graph(3, [(1, 2), (2, 3)])
    assert is_maximal(path, Matching([(1, 2)]))
    assert not is_maximal(Graph(2, [(1, 2)]), Matching())
    with pytest.raises(InvalidMatching):
        is_maximal(path, Matching([(1, 3)]))


def test_is_maximal_matches_edge_scan():
    from conftest import make_sim

    for seed in range(10):
        sim = make_sim(n=25, k=4, seed=seed)
        sim.initialize()
        scan = all(u in sim.matching.mate or v in sim.matching.mate for u, v in sim.graph.edges())
        assert scan and is_maximal(sim.graph, sim.matching)
        # dropping any matched edge breaks maximality exactly when the scan says so
        for e in sim.matching.edges()[:3]:
            m = sim.matching.copy()
            m.remove(*e)
            assert is_maximal(sim.graph, m) == all(u in m.mate or v in m.mate for u, v in sim.graph.edges())


def test_matching_rejects_overlap():
    m = Matching([(1, 2)])
    with pytest.raises(InvalidMatching):
        m.add(2, 3)
    with pytest.raises(NotMatchedEdge):
        m.remove(1, 3)
    assert m.edges() == [canon(2, 1)]


def test_validate_partition_examples():
    assert validate_partition(Partition(3, [0] + [1] * 4 + [2] * 4 + [3] * 4), 12)
    assert not validate_partition(Partition(3, [0] + [1] * 12), 12)
    assert validate_partition(Partition(3, [0] + [1] * 12), 12, mode="any")


def test_random_partition_balanced_frequency():
    ok = sum(validate_partition(gen_random_partition(4096, 16, s), 4096) for s in range(100))
    assert ok / 100 >= 0.99


def test_random_partition_mean_load():
    loads = [gen_random_partition(4096, 16, s).loads() for s in range(100)]
    for p in range(16):
        mean = sum(x[p] for x in loads) / 100
        assert abs(mean - 256) <= 0.05 * 256
