"""Graphs, partitions, matchings, update batches and per-player knowledge.

Vertices are the integers ``1..n`` and players are ``1..k``.  Edges are
stored canonically as ``(min, max)`` tuples.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import InvalidBatch, InvalidMatching, NotMatchedEdge, UnknownVertex

Edge = tuple[int, int]

DEFAULT_C_BAL = 4.0


def canon(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Undirected simple graph on vertices ``1..n``."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        self._adj: list[set[int]] = [set() for _ in range(n + 1)]
        for u, v in edges:
            self.add_edge(u, v)

    def _check(self, u: int) -> None:
        if not 1 <= u <= self.n:
            raise UnknownVertex(u)

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def adj(self, u: int) -> set[int]:
        self._check(u)
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self.adj(u))

    def has_edge(self, u: int, v: int) -> bool:
        if not (1 <= u <= self.n and 1 <= v <= self.n):
            return False
        return v in self._adj[u]

    def add_edge(self, u: int, v: int) -> None:
        self._check(u)
        self._check(v)
        if u == v:
            raise ValueError(f"self-loop at {u}")
        if v in self._adj[u]:
            raise ValueError(f"parallel edge {canon(u, v)}")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        if not self.has_edge(u, v):
            raise KeyError(canon(u, v))
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def edges(self) -> Iterator[Edge]:
        for u in range(1, self.n + 1):
            for v in self._adj[u]:
                if u < v:
                    yield (u, v)

    def num_edges(self) -> int:
        return sum(len(a) for a in self._adj) // 2

    def copy(self) -> "Graph":
        g = Graph(self.n)
        g._adj = [set(a) for a in self._adj]
        return g

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges()})"


@dataclass
class Partition:
    """Total map vertex -> player, stored as a list indexed by vertex."""

    k: int
    owner: list[int]  # owner[0] is unused

    @property
    def n(self) -> int:
        return len(self.owner) - 1

    def __call__(self, v: int) -> int:
        return self.owner[v]

    def hosted(self, p: int) -> list[int]:
        return [v for v in range(1, self.n + 1) if self.owner[v] == p]

    def loads(self) -> list[int]:
        loads = [0] * (self.k + 1)
        for v in range(1, self.n + 1):
            loads[self.owner[v]] += 1
        return loads[1:]

    @classmethod
    def from_mapping(cls, k: int, mapping: dict[int, int]) -> "Partition":
        n = len(mapping)
        owner = [0] * (n + 1)
        for v, p in mapping.items():
            owner[v] = p
        return cls(k, owner)


class Matching:
    """Partial involution ``mate`` over vertices."""

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        self.mate: dict[int, int] = {}
        for u, v in pairs:
            self.add(u, v)

    def add(self, u: int, v: int) -> None:
        if u == v or u in self.mate or v in self.mate:
            raise InvalidMatching(f"cannot add {canon(u, v)}")
        self.mate[u] = v
        self.mate[v] = u

    def remove(self, u: int, v: int) -> None:
        if self.mate.get(u) != v:
            raise NotMatchedEdge(canon(u, v))
        del self.mate[u]
        del self.mate[v]

    def is_matched(self, u: int) -> bool:
        return u in self.mate

    def has_edge(self, u: int, v: int) -> bool:
        return self.mate.get(u) == v

    def edges(self) -> list[Edge]:
        return sorted({canon(u, v) for u, v in self.mate.items()})

    def __len__(self) -> int:
        return len(self.mate) // 2

    def copy(self) -> "Matching":
        m = Matching()
        m.mate = dict(self.mate)
        return m

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matching) and self.mate == other.mate

    def __repr__(self) -> str:
        return f"Matching({self.edges()})"


@dataclass
class UpdateBatch:
    deletions: list[Edge] = field(default_factory=list)
    insertions: list[Edge] = field(default_factory=list)
    tags: dict = field(default_factory=dict)

    def __post_init__(self):
        self.deletions = [canon(*e) for e in self.deletions]
        self.insertions = [canon(*e) for e in self.insertions]

    def __len__(self) -> int:
        return len(self.deletions) + len(self.insertions)

    def inverse(self) -> "UpdateBatch":
        return UpdateBatch(deletions=list(self.insertions), insertions=list(self.deletions))


@dataclass
class PlayerState:
    """One player's local view of the world.

    ``neighbor_matched`` and ``hosted_nbrs`` are keyed by every vertex that is
    adjacent to at least one hosted vertex.  ``pending`` holds hosted vertices
    whose matched edge was deleted but whose mini-batch has not been processed
    yet; they still count as matched.
    """

    me: int
    hosted: set[int]
    local_adj: dict[int, set[int]]
    owner_of: Sequence[int]
    rng: random.Random
    mate: dict[int, int] = field(default_factory=dict)
    neighbor_matched: dict[int, bool] = field(default_factory=dict)
    hosted_nbrs: dict[int, set[int]] = field(default_factory=dict)
    pending: dict[int, int] = field(default_factory=dict)

    @classmethod
    def build(cls, me: int, graph: Graph, partition: Partition, master_seed: int) -> "PlayerState":
        hosted = set(partition.hosted(me))
        st = cls(
            me=me,
            hosted=hosted,
            local_adj={v: set(graph.adj(v)) for v in hosted},
            owner_of=partition.owner,
            rng=random.Random(f"bdmm/{master_seed}/player/{me}"),
        )
        for v in hosted:
            for u in st.local_adj[v]:
                st.hosted_nbrs.setdefault(u, set()).add(v)
                st.neighbor_matched[u] = False
        return st

    def is_free(self, v: int) -> bool:
        return v not in self.mate

    def link(self, v: int, u: int, u_matched: bool) -> None:
        self.local_adj[v].add(u)
        self.hosted_nbrs.setdefault(u, set()).add(v)
        self.neighbor_matched[u] = u_matched

    def unlink(self, v: int, u: int) -> None:
        self.local_adj[v].discard(u)
        peers = self.hosted_nbrs.get(u)
        if peers is not None:
            peers.discard(v)
            if not peers:
                del self.hosted_nbrs[u]
                del self.neighbor_matched[u]

    def set_matched(self, u: int, flag: bool = True) -> None:
        if u in self.neighbor_matched:
            self.neighbor_matched[u] = flag

    def free_neighbors(self, v: int) -> list[int]:
        nm = self.neighbor_matched
        return [u for u in self.local_adj[v] if not nm[u]]


@dataclass
class Frontier:
    v_f: set[int]
    v_prime: set[int]
    gamma: int


def validate_batch(g: Graph, b: UpdateBatch) -> None:
    seen: set[Edge] = set()
    for u, v in b.deletions:
        if (u, v) in seen:
            raise InvalidBatch(f"edge {(u, v)} appears twice")
        seen.add((u, v))
        if not g.has_edge(u, v):
            raise InvalidBatch(f"deletion of missing edge {(u, v)}")
    for u, v in b.insertions:
        if (u, v) in seen:
            raise InvalidBatch(f"edge {(u, v)} appears twice")
        seen.add((u, v))
        if u == v or not (1 <= u <= g.n and 1 <= v <= g.n):
            raise InvalidBatch(f"bad insertion {(u, v)}")
        if g.has_edge(u, v):
            raise InvalidBatch(f"insertion of existing edge {(u, v)}")


def apply_batch(g: Graph, b: UpdateBatch) -> Graph:
    """Return a copy of ``g`` with the batch applied."""
    validate_batch(g, b)
    out = g.copy()
    for u, v in b.deletions:
        out.remove_edge(u, v)
    for u, v in b.insertions:
        out.add_edge(u, v)
    return out


def free_degree(g: Graph, m: Matching, u: int) -> int:
    return sum(1 for w in g.adj(u) if w not in m.mate)


def check_matching(g: Graph, m: Matching) -> None:
    for u, v in m.mate.items():
        if m.mate.get(v) != u:
            raise InvalidMatching(f"mate map not symmetric at {u}")
        if not g.has_edge(u, v):
            raise InvalidMatching(f"matched pair {canon(u, v)} is not an edge")


def is_maximal(g: Graph, m: Matching) -> bool:
    check_matching(g, m)
    mate = m.mate
    return not any(u not in mate and v not in mate for u, v in g.edges())


def compute_frontier(g_after: Graph, m_before: Matching, d: Sequence[Edge], gamma: int) -> Frontier:
    """Free endpoints of deleted matched edges and their free neighbours."""
    for u, v in d:
        if not m_before.has_edge(u, v):
            raise NotMatchedEdge(canon(u, v))
    v_f = {x for e in d for x in e}
    mate = m_before.mate
    v_prime = set()
    for x in v_f:
        for w in g_after.adj(x):
            if w not in v_f and w not in mate:
                v_prime.add(w)
    return Frontier(v_f, v_prime, gamma)


def validate_partition(p: Partition, n: int, mode: str = "balanced", c_bal: float = DEFAULT_C_BAL) -> bool:
    if mode == "any":
        return True
    if mode != "balanced":
        raise ValueError(f"unknown mode {mode!r}")
    lo = n / (2 * p.k)
    hi = c_bal * (n / p.k) * math.log(max(n, 3))
    return all(lo <= x <= hi for x in p.loads())
