"""Input generators: partitions, stress batches and the lower-bound instances.

Line-segment vertex ``x_{i,j}`` (segment ``i`` in ``1..q``, position ``j`` in
``1..3``) gets the ID ``3*(i-1) + j``.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import Exhausted, IndivisibleConfig
from .model import Edge, Graph, Matching, Partition, UpdateBatch, canon

log = logging.getLogger(__name__)


def _rng(seed, *salt) -> random.Random:
    return random.Random("/".join(map(str, ("bdmm-adv", seed) + salt)))


def gen_random_partition(n: int, k: int, seed: int) -> Partition:
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = _rng(seed, "partition", n, k)
    return Partition(k, [0] + [rng.randint(1, k) for _ in range(n)])


def gen_block_partition(n: int, k: int) -> Partition:
    """Contiguous ID blocks of near-equal size; a balanced adversarial choice."""
    return Partition(k, [0] + [(v - 1) * k // n + 1 for v in range(1, n + 1)])


def gen_random_graph(n: int, avg_degree: float, seed: int, hubs: int = 0, hub_degree: int = 0) -> Graph:
    """Sparse G(n, p) with optional high-degree hubs (stars on random leaves)."""
    rng = _rng(seed, "graph", n)
    g = Graph(n)
    if n < 2:
        return g
    m = int(round(avg_degree * n / 2))
    m = min(m, n * (n - 1) // 2)
    placed = 0
    while placed < m:
        u, v = rng.randint(1, n), rng.randint(1, n)
        if u != v and not g.has_edge(u, v):
            g.add_edge(u, v)
            placed += 1
    for _ in range(hubs):
        c = rng.randint(1, n)
        for leaf in rng.sample(range(1, n + 1), min(hub_degree, n - 1) + 1):
            if leaf != c and not g.has_edge(c, leaf):
                g.add_edge(c, leaf)
    return g


# -- lower-bound constructions ---------------------------------------------

def seg_vertex(i: int, j: int) -> int:
    return 3 * (i - 1) + j


def segment_of(v: int) -> int:
    return (v - 1) // 3 + 1


@dataclass
class LineSegmentGraph:
    q: int
    graph: Graph

    @property
    def n(self) -> int:
        return 3 * self.q

    def segment(self, i: int) -> tuple[int, int, int]:
        return seg_vertex(i, 1), seg_vertex(i, 2), seg_vertex(i, 3)

    def segment_edges(self, i: int) -> tuple[Edge, Edge]:
        a, b, c = self.segment(i)
        return (a, b), (b, c)


def gen_line_segment_graph(q: int) -> LineSegmentGraph:
    if q < 1:
        raise ValueError("q must be at least 1")
    edges = []
    for i in range(1, q + 1):
        edges += [(seg_vertex(i, 1), seg_vertex(i, 2)), (seg_vertex(i, 2), seg_vertex(i, 3))]
    return LineSegmentGraph(q, Graph(3 * q, edges))


def gen_domino_partition(q: int, k: int) -> Partition:
    """Tile the q x 3 board column by column with strips of n/k cells.

    When 3 divides k every strip is a vertical domino inside one column.
    Otherwise a strip may wrap from the bottom of one column to the top of
    the next; since n/k <= q it still never holds two cells of one row, so
    every player hosts at most one vertex per segment.
    """
    n = 3 * q
    if k < 3 or n % k:
        raise IndivisibleConfig(f"cannot tile a {q}x3 board with {k} strips of equal length")
    size = n // k
    owner = [0] * (n + 1)
    for pos in range(n):
        col, row = divmod(pos, q)
        owner[seg_vertex(row + 1, col + 1)] = pos // size + 1
    return Partition(k, owner)


def oblivious_lb_batch(q: int, ell: int, seed: int, matching: Matching | None = None,
                       available: Callable[[int], Sequence[Edge]] | None = None) -> UpdateBatch:
    """Sample segments with probability ell/n each, delete one edge of each.

    The choice never reads ``matching``; when given it only labels how many
    deletions hit matched edges.  ``available(i)`` restricts the edges still
    deletable in segment ``i`` (for multi-batch scripts).
    """
    n = 3 * q
    rng = _rng(seed, "oblivious-lb", q, ell)
    if ell <= 0:
        return UpdateBatch(tags={"sampled": 0})
    p = min(1.0, ell / n)
    while True:
        picked = [i for i in range(1, q + 1) if rng.random() < p]
        if len(picked) <= ell:
            break
    dels = []
    for i in picked:
        choices = list(available(i)) if available else [(seg_vertex(i, 1), seg_vertex(i, 2)),
                                                        (seg_vertex(i, 2), seg_vertex(i, 3))]
        if choices:
            dels.append(rng.choice(choices))
    batch = UpdateBatch(deletions=dels, tags={"sampled": len(picked)})
    if matching is not None:
        batch.tags["matched_hits"] = sum(matching.has_edge(u, v) for u, v in batch.deletions)
    return batch


def oblivious_lb_script(q: int, ell: int, batches: int, seed: int) -> list[UpdateBatch]:
    """Pre-committed sequence; tracks only its own deletions, never the matching."""
    alive = {i: [(seg_vertex(i, 1), seg_vertex(i, 2)), (seg_vertex(i, 2), seg_vertex(i, 3))]
             for i in range(1, q + 1)}
    out = []
    for b in range(batches):
        batch = oblivious_lb_batch(q, ell, (seed, b), available=lambda i: alive[i])
        for e in batch.deletions:
            alive[segment_of(e[0])].remove(e)
        out.append(batch)
    return out


def heaviest_free_player(graph_n: int, partition: Partition, matching: Matching) -> int:
    counts = [0] * (partition.k + 1)
    for v in range(1, graph_n + 1):
        if v not in matching.mate:
            counts[partition.owner[v]] += 1
    best = max(counts[1:])
    return counts.index(best, 1)


def adaptive_lb_batch(graph: Graph, partition: Partition, matching: Matching, ell: int, seed) -> UpdateBatch:
    """Delete matched edges in segments whose free vertex sits at the busiest player.

    ``P`` hosts the most unmatched vertices (ties to the smallest ID).  Segments
    whose edges are all gone have no matched edge and are skipped.  With a
    domino partition ``P`` hosts no endpoint of the deleted edges.
    """
    if ell <= 0:
        return UpdateBatch()
    rng = _rng(seed, "adaptive-lb", ell)
    p = heaviest_free_player(graph.n, partition, matching)
    segs = []
    for v in range(1, graph.n + 1):
        if partition.owner[v] == p and v not in matching.mate:
            a, b, c = (seg_vertex(segment_of(v), j) for j in (1, 2, 3))
            for x, y in ((a, b), (b, c)):
                if matching.has_edge(x, y) and graph.has_edge(x, y):
                    segs.append((x, y))
    segs = sorted(set(segs))
    chosen = rng.sample(segs, min(ell, len(segs)))
    return UpdateBatch(deletions=sorted(chosen), tags={"target_player": p, "candidates": len(segs)})


# -- generic stress batches ----------------------------------------------

def gen_random_batch(g: Graph, m: Matching | None, ell: int, mix: float, seed,
                     matched_weight: float = 4.0) -> UpdateBatch:
    """floor(mix*ell) deletions (matched edges weighted up) and the rest insertions."""
    if not 0.0 <= mix <= 1.0:
        raise ValueError("mix must lie in [0, 1]")
    rng = _rng(seed, "random-batch", ell, mix)
    n_del = math.floor(mix * ell)
    n_ins = ell - n_del
    edges = sorted(g.edges())
    if n_del > len(edges):
        raise Exhausted(f"need {n_del} deletions, graph has {len(edges)} edges")
    dels: list[Edge] = []
    if n_del:
        if m is None or matched_weight == 1.0:
            dels = rng.sample(edges, n_del)
        else:
            weights = [matched_weight if m.has_edge(u, v) else 1.0 for u, v in edges]
            # Efraimidis-Spirakis weighted sampling without replacement
            keyed = sorted(((rng.random() ** (1.0 / w), e) for w, e in zip(weights, edges)), reverse=True)
            dels = [e for _, e in keyed[:n_del]]
    n = g.n
    non_edges = n * (n - 1) // 2 - len(edges)
    if n_ins > non_edges:
        raise Exhausted(f"need {n_ins} insertions, graph has {non_edges} non-edges")
    ins: set[Edge] = set()
    if n_ins > non_edges // 2:
        pool = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if not g.has_edge(u, v)]
        ins = set(rng.sample(pool, n_ins))
    else:
        while len(ins) < n_ins:
            u, v = rng.randint(1, n), rng.randint(1, n)
            if u != v and not g.has_edge(u, v):
                ins.add(canon(u, v))
    return UpdateBatch(deletions=sorted(dels), insertions=sorted(ins))


def random_script(g: Graph, ell: int, mix: float, batches: int, seed) -> list[UpdateBatch]:
    """Oblivious pre-committed random batches; follows its own topology only."""
    from .model import apply_batch

    cur = g.copy()
    out = []
    for b in range(batches):
        batch = gen_random_batch(cur, None, ell, mix, (seed, b))
        cur = apply_batch(cur, batch)
        out.append(batch)
    return out
