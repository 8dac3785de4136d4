"""Experiment configuration, end-to-end runs and the recompute baseline."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator

from .. import adversary
from ..dynamic_mm import ADAPTIVE, OBLIVIOUS, BatchReport, Simulation, UpdateConfig
from ..errors import IndivisibleConfig, OracleFailure
from ..formats import loads_batches, loads_graph, loads_partition, read_text
from ..model import Graph, Matching, Partition, UpdateBatch, validate_batch
from ..net import NetworkConfig, Tag, Token
from ..static_mm import run_static_matching
from .oracles import FrontierObserver, all_verdicts, state_dump

GENERATORS = ("line_segment", "random", "file")


@dataclass
class ExperimentConfig:
    n: int = 300
    k: int = 8
    beta: int = 1
    ell: int = 8
    batches: int = 5
    adversary_mode: str = OBLIVIOUS
    generator: str = "random"
    seed: int = 0
    gamma_override: int | None = None
    output_path: str | None = None
    avg_degree: float = 4.0
    mix: float = 0.5
    exact: bool = False
    fastpath: bool = False
    graph_path: str | None = None
    partition_path: str | None = None
    batch_path: str | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        for name in ("n", "beta"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.ell < 0 or self.batches < 0:
            raise ValueError("ell and batches must be non-negative")
        if self.adversary_mode not in (OBLIVIOUS, ADAPTIVE):
            raise ValueError(f"unknown adversary mode {self.adversary_mode!r}")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")

    def update_config(self) -> UpdateConfig:
        return UpdateConfig(adversary_mode=self.adversary_mode, gamma=self.gamma_override or 0,
                            fastpath_enabled=self.fastpath)


@dataclass
class RunRecord:
    config: dict
    rounds_init: int = 0
    rounds_per_batch: list[int] = field(default_factory=list)
    tokens_per_batch: list[int] = field(default_factory=list)
    matched_deletions: list[int] = field(default_factory=list)
    tokens_total: int = 0
    max_link_load: int = 0
    per_phase: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    sample_deficit_count: int = 0
    frontier_violations: int = 0
    phase1_violations: int = 0
    minibatches: int = 0
    warnings: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def mean_update_rounds(self) -> float:
        r = self.rounds_per_batch
        return sum(r) / len(r) if r else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def regime_warnings(n: int, k: int, beta: int, ell: int, generator: str = "random") -> list[str]:
    """Flag parameters outside the range where the asymptotic bounds are claimed."""
    out = []
    log_n = math.log2(max(n, 2))
    if k < log_n ** 4:
        out.append("k<log^4(n)")
    if k > math.sqrt(n) / log_n:
        out.append("k>sqrt(n)/log(n)")
    if ell > n / (2 * k):
        out.append("ell>n/(2k)")
    if generator == "line_segment" and ell < k * log_n:
        out.append("ell<k*log(n)")
    return out


# -- inputs -----------------------------------------------------------------

def build_inputs(cfg: ExperimentConfig) -> tuple[Graph, Partition]:
    if cfg.generator == "file":
        if not (cfg.graph_path and cfg.partition_path):
            raise ValueError("the file generator needs graph and partition paths")
        g = loads_graph(read_text(cfg.graph_path))
        p = loads_partition(read_text(cfg.partition_path), cfg.k)
        return g, p
    if cfg.generator == "line_segment":
        q = max(1, cfg.n // 3)
        g = adversary.gen_line_segment_graph(q).graph
        if cfg.adversary_mode == ADAPTIVE:
            try:
                return g, adversary.gen_domino_partition(q, cfg.k)
            except IndivisibleConfig:
                return g, adversary.gen_block_partition(g.n, cfg.k)
        return g, adversary.gen_random_partition(g.n, cfg.k, cfg.seed)
    g = adversary.gen_random_graph(cfg.n, cfg.avg_degree, cfg.seed)
    return g, adversary.gen_random_partition(cfg.n, cfg.k, cfg.seed)


def batch_source(cfg: ExperimentConfig, g: Graph) -> Callable[[Simulation, int], UpdateBatch]:
    """Oblivious sources commit to every batch up front; adaptive ones look at the state."""
    if cfg.generator == "file":
        script = loads_batches(read_text(cfg.batch_path)) if cfg.batch_path else []
        return lambda sim, i: script[i] if i < len(script) else UpdateBatch()
    if cfg.generator == "line_segment":
        q = g.n // 3
        if cfg.adversary_mode == OBLIVIOUS:
            script = adversary.oblivious_lb_script(q, cfg.ell, cfg.batches, cfg.seed)
            return lambda sim, i: script[i]
        return lambda sim, i: adversary.adaptive_lb_batch(sim.graph, sim.partition, sim.matching,
                                                          cfg.ell, (cfg.seed, i))
    if cfg.adversary_mode == OBLIVIOUS:
        script = adversary.random_script(g, cfg.ell, cfg.mix, cfg.batches, cfg.seed)
        return lambda sim, i: script[i]
    return lambda sim, i: adversary.gen_random_batch(sim.graph, sim.matching, cfg.ell, cfg.mix, (cfg.seed, i))


def num_batches(cfg: ExperimentConfig) -> int:
    if cfg.generator == "file" and cfg.batch_path:
        return len(loads_batches(read_text(cfg.batch_path)))
    return cfg.batches


# -- runs -------------------------------------------------------------------

def _check(sim: Simulation, record: RunRecord, where: str) -> None:
    verdicts = all_verdicts(sim)
    for name, v in verdicts.items():
        record.verdicts[name] = record.verdicts.get(name, True) and v.ok
        if not v:
            raise OracleFailure(f"{name} oracle failed {where}: {v.reason}", state_dump(sim))


def make_simulation(cfg: ExperimentConfig, g: Graph, p: Partition, observer=None, cls=Simulation) -> Simulation:
    net_cfg = NetworkConfig(cfg.k, cfg.beta, g.n, cfg.seed)
    return cls(g, p, net_cfg, cfg.update_config(), exact=cfg.exact, observer=observer)


def iter_run(cfg: ExperimentConfig, baseline: bool = False) -> Iterator[tuple[Simulation, RunRecord]]:
    """Run the pipeline, yielding after initialization and after every batch."""
    start = time.perf_counter()
    g, p = build_inputs(cfg)
    record = RunRecord(config=asdict(cfg), warnings=regime_warnings(g.n, cfg.k, cfg.beta, cfg.ell, cfg.generator))
    observer = FrontierObserver()
    sim = make_simulation(cfg, g, p, observer, RecomputeSimulation if baseline else Simulation)
    sim.initialize()
    record.rounds_init = sim.metrics.rounds
    _check(sim, record, "after initialization")
    _finish(sim, record, observer, start)
    yield sim, record
    source = batch_source(cfg, g)
    for i in range(num_batches(cfg)):
        batch = source(sim, i)
        rep = sim.process_batch(batch)
        record.rounds_per_batch.append(rep.rounds)
        record.tokens_per_batch.append(rep.tokens)
        record.matched_deletions.append(rep.matched_deletions)
        _check(sim, record, f"after batch {i}")
        _finish(sim, record, observer, start)
        yield sim, record


def _finish(sim, record, observer, start):
    m = sim.metrics
    record.tokens_total = m.tokens_sent
    record.max_link_load = m.max_link_load
    record.per_phase = m.to_dict()["per_phase"]
    record.sample_deficit_count = m.events["sample_deficit"]
    record.frontier_violations = len(observer.frontier_violations)
    record.phase1_violations = len(observer.phase1_violations)
    record.minibatches = observer.minibatches
    record.wall_time = time.perf_counter() - start


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    record = None
    for _sim, record in iter_run(cfg):
        pass
    return record


def baseline_recompute(cfg: ExperimentConfig) -> RunRecord:
    record = None
    for _sim, record in iter_run(cfg, baseline=True):
        pass
    return record


class RecomputeSimulation(Simulation):
    """Naive comparator: spread every changed edge, then rematch from scratch."""

    def process_batch(self, batch):
        validate_batch(self.graph, batch)
        report = BatchReport()
        if not len(batch):
            return report
        r0, t0 = self.net.metrics.snapshot()
        changed = [(e, False) for e in batch.deletions] + [(e, True) for e in batch.insertions]
        for (u, v), ins in changed:
            if ins:
                self.graph.add_edge(u, v)
            else:
                self.graph.remove_edge(u, v)
        out = {p: [] for p in self.players}
        for (u, v), ins in changed:
            out[self.owner[u]].append(Token(Tag.EDGE, u, v, int(ins)))
        with self.net.phase("baseline"):
            self.net.spreading(out)
            # everyone now knows the change set and drops the old matching
            for st in self.players.values():
                for (u, v), _ins in changed:
                    for x, y in ((u, v), (v, u)):
                        if x in st.hosted:
                            st.unlink(x, y)
                st.mate.clear()
                for x in st.neighbor_matched:
                    st.neighbor_matched[x] = False
            for (u, v), ins in changed:
                if ins:
                    self.players[self.owner[u]].link(u, v, False)
                    self.players[self.owner[v]].link(v, u, False)
            self.matching = Matching()
            active = {p: {v: set(st.local_adj[v]) for v in st.hosted if st.local_adj[v]}
                      for p, st in self.players.items()}
            res = run_static_matching(self.net, self.players, active, label="baseline-rematch",
                                      cap_multiplier=self.cfg.iteration_cap_multiplier)
        for u, v in res.matches:
            self.matching.add(u, v)
        report.matched_deletions = len(batch.deletions)
        r1, t1 = self.net.metrics.snapshot()
        report.rounds, report.tokens = r1 - r0, t1 - t0
        return report


def record_fingerprint(record: RunRecord) -> dict:
    """The record minus its wall-clock time; identical across replays."""
    d = record.to_dict()
    d.pop("wall_time")
    return d

