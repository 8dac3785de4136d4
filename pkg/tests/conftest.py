import random

import pytest
from hypothesis import settings

from bdmm.adversary import gen_random_graph, gen_random_partition
from bdmm.dynamic_mm import Simulation, UpdateConfig
from bdmm.model import Graph, Matching
from bdmm.net import NetworkConfig

settings.register_profile("repeatable", derandomize=True)
settings.load_profile("repeatable")


def brute_adjacency(n, edges):
    adj = {v: set() for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def random_matching(g: Graph, rng: random.Random) -> Matching:
    m = Matching()
    edges = sorted(g.edges())
    rng.shuffle(edges)
    for u, v in edges:
        if u not in m.mate and v not in m.mate and rng.random() < 0.5:
            m.add(u, v)
    return m


def make_sim(n=60, k=4, beta=1, seed=0, mode="oblivious", graph=None, partition=None, degree=4.0, **cfg):
    g = graph if graph is not None else gen_random_graph(n, degree, seed)
    p = partition if partition is not None else gen_random_partition(g.n, k, seed)
    return Simulation(g, p, NetworkConfig(k, beta, g.n, seed), UpdateConfig(adversary_mode=mode, **cfg))


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "") == "call":
                lines += [v for name, v in rep.user_properties if name == "criterion"]
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
