"""Round-synchronous clique network with per-link token budgets.

One :class:`Token` stands for one O(log n)-bit message; every ordered link
carries at most ``beta`` tokens per round.  Local computation is free.

Spreading runs in one of two modes.  In exact mode every round is pushed
through :meth:`Network.run_round`, so tokens physically travel link by link.
The default analytic mode evaluates the same schedule arithmetically (rounds,
tokens, peak link load) and hands back the union directly; the two modes are
checked against each other in the test-suite.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import BandwidthViolation

log = logging.getLogger(__name__)


class Tag(IntEnum):
    MARKED = 1
    SELECTED = 2
    REQUEST = 3
    MATCHED = 4
    MATCH_UP = 5
    VF_ID = 6
    EDGE = 7
    COUNT = 8
    RANKED = 9


class Token(NamedTuple):
    tag: Tag
    a: int | None = None
    b: int | None = None
    c: int | None = None


@dataclass(frozen=True)
class NetworkConfig:
    k: int
    beta: int
    n: int
    master_seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.beta < 1:
            raise ValueError("beta must be at least 1")

    @property
    def link_budget(self) -> int:
        return self.beta

    @property
    def field_bits(self) -> int:
        # counts exchanged by Spreading can reach beta*k even when n is tiny
        return max(self.n, self.k, self.beta * self.k).bit_length()


@dataclass
class Metrics:
    rounds: int = 0
    tokens_sent: int = 0
    max_link_load: int = 0
    tokens_injected: int = 0
    per_phase: dict[str, list[int]] = field(default_factory=dict)
    events: Counter = field(default_factory=Counter)

    def snapshot(self) -> tuple[int, int]:
        return self.rounds, self.tokens_sent

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "tokens_sent": self.tokens_sent,
            "max_link_load": self.max_link_load,
            "tokens_injected": self.tokens_injected,
            "per_phase": {k: {"rounds": v[0], "tokens": v[1]} for k, v in sorted(self.per_phase.items())},
            "events": dict(sorted(self.events.items())),
        }


@dataclass
class SpreadPlan:
    """Arithmetic of the two-stage Spreading schedule for given holdings."""

    k: int
    beta: int
    counts: list[int]  # counts[i-1] tokens at player i
    full_batches: list[int]
    residual: list[int]
    owned: list[int]  # tokens each player disseminates
    rank_moves: dict[tuple[int, int], int]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def stages(self) -> list[tuple[str, int, int, int]]:
        """(stage, rounds, tokens, peak link load) for each non-empty stage."""
        if self.total == 0:
            return []
        k, beta = self.k, self.beta
        out = []
        b_max = max(self.full_batches)
        if b_max:
            out.append(("redistribute", b_max, sum(self.full_batches) * beta * (k - 1), beta))
        out.append(("count-exchange", 1, k * (k - 1), 1))
        if self.rank_moves:
            out.append(("rank", 1, sum(self.rank_moves.values()), max(self.rank_moves.values())))
        t_max = max(self.owned)
        out.append(("disseminate", -(-t_max // beta), sum(self.owned) * (k - 1), min(beta, t_max)))
        return out

    @property
    def rounds(self) -> int:
        return sum(s[1] for s in self.stages())


def redistribution_ranks(residual: Sequence[int]) -> list[list[int]]:
    """Rank of the j-th leftover token of player a: sum of earlier residuals + j."""
    ranks, prefix = [], 0
    for x in residual:
        ranks.append([prefix + j for j in range(1, x + 1)])
        prefix += x
    return ranks


def rank_destination(r: int, k: int) -> int:
    return (r % k) + 1


def plan_spreading(counts: Sequence[int], k: int, beta: int) -> SpreadPlan:
    batch = beta * (k - 1)
    full = [c // batch for c in counts]
    residual = [c - f * batch for c, f in zip(counts, full)]
    total_full = sum(full)
    # every full batch hands exactly beta tokens to each other player
    owned = [(total_full - full[i]) * beta for i in range(k)]
    moves: dict[tuple[int, int], int] = {}
    for a, ranks in enumerate(redistribution_ranks(residual), start=1):
        for r in ranks:
            dest = rank_destination(r, k)
            owned[dest - 1] += 1
            if dest != a:
                moves[(a, dest)] = moves.get((a, dest), 0) + 1
    return SpreadPlan(k, beta, list(counts), full, residual, owned, moves)


class Network:
    def __init__(self, config: NetworkConfig, exact: bool = False):
        self.config = config
        self.exact = exact
        self.metrics = Metrics()
        self._phases: list[str] = []

    @property
    def k(self) -> int:
        return self.config.k

    @property
    def beta(self) -> int:
        return self.config.beta

    @property
    def players(self) -> range:
        return range(1, self.config.k + 1)

    @contextmanager
    def phase(self, label: str):
        """Attribute rounds/tokens charged inside the block to ``label`` (inclusive)."""
        self._phases.append(label)
        self.metrics.per_phase.setdefault(label, [0, 0])
        try:
            yield
        finally:
            self._phases.pop()

    def _charge(self, rounds: int, tokens: int, load: int) -> None:
        m = self.metrics
        m.rounds += rounds
        m.tokens_sent += tokens
        if load > m.max_link_load:
            m.max_link_load = load
        for label in set(self._phases):
            acc = m.per_phase[label]
            acc[0] += rounds
            acc[1] += tokens

    def _check_token(self, tok: Token) -> None:
        limit = 1 << self.config.field_bits
        for x in (tok.a, tok.b, tok.c):
            if x is not None and not 0 <= x < limit:
                raise ValueError(f"token field {x} exceeds {self.config.field_bits} bits")

    def run_round(self, outbox: Mapping[tuple[int, int], Sequence[Token]]) -> dict[int, list[tuple[int, Token]]]:
        """Deliver one round of traffic; each ordered link carries at most beta tokens."""
        budget = self.config.link_budget
        inbox: dict[int, list[tuple[int, Token]]] = defaultdict(list)
        total = load = 0
        for (src, dst), toks in sorted(outbox.items()):
            if src == dst:
                raise ValueError("players do not send to themselves")
            if len(toks) > budget:
                raise BandwidthViolation(src, dst, len(toks))
            for tok in toks:
                self._check_token(tok)
                inbox[dst].append((src, tok))
            total += len(toks)
            load = max(load, len(toks))
        self._charge(1, total, load)
        return inbox

    def send_direct(self, outbox: Mapping[tuple[int, int], Sequence[Token]]) -> dict[int, list[tuple[int, Token]]]:
        """Point-to-point sends, split into as many rounds as the busiest link needs."""
        queues = {key: list(v) for key, v in outbox.items() if v}
        inbox: dict[int, list[tuple[int, Token]]] = defaultdict(list)
        beta = self.config.link_budget
        step = 0
        while any(len(q) > step * beta for q in queues.values()):
            part = {key: q[step * beta:(step + 1) * beta] for key, q in queues.items() if len(q) > step * beta}
            for dst, items in self.run_round(part).items():
                inbox[dst].extend(items)
            step += 1
        return inbox

    def aggregate_sum(self, values: Mapping[int, int]) -> int:
        """Every player sends one COUNT to player 1, who broadcasts the sum (2 rounds)."""
        self.metrics.tokens_injected += self.k
        up = {(p, 1): [Token(Tag.COUNT, int(values.get(p, 0)))] for p in self.players if p != 1}
        got = self.run_round(up)
        total = int(values.get(1, 0)) + sum(tok.a for _, tok in got.get(1, []))
        down = {(1, p): [Token(Tag.COUNT, total)] for p in self.players if p != 1}
        back = self.run_round(down)
        for p in self.players:
            if p != 1:
                assert back[p][0][1].a == total
        return total

    def spreading(self, tokens: Mapping[int, Sequence[Token]]) -> tuple[Token, ...]:
        """Deliver every token to every player.

        Returns the delivered multiset in canonical order (player order, then
        each player's input order); every player holds exactly this.
        """
        k = self.k
        lists = [list(tokens.get(p, ())) for p in self.players]
        flat = tuple(t for lst in lists for t in lst)
        self.metrics.tokens_injected += len(flat)
        if not flat:
            return flat
        for tok in flat:
            self._check_token(tok)
        plan = plan_spreading([len(x) for x in lists], k, self.config.beta)
        if self.exact:
            held = self._spread_exact(lists, plan)
            want = Counter(flat)
            for p, got in held.items():
                if Counter(got) != want:
                    raise AssertionError(f"spreading lost tokens at player {p}")
        else:
            for _stage, rounds, toks, load in plan.stages():
                self._charge(rounds, toks, load)
        return flat

    broadcast_all = spreading

    def gather_at(self, dest: int, tokens: Mapping[int, Sequence[Token]]) -> tuple[Token, ...]:
        """Spreading followed by non-destination players discarding what they got."""
        if dest not in self.players:
            raise ValueError(f"unknown player {dest}")
        return self.spreading(tokens)

    def _spread_exact(self, lists: list[list[Token]], plan: SpreadPlan) -> dict[int, list[Token]]:
        k, beta = self.k, self.config.beta
        batch = beta * (k - 1)
        players = list(self.players)
        others = {p: [q for q in players if q != p] for p in players}
        owned: dict[int, list[Token]] = {p: [] for p in players}
        # redistribution of full batches, round-robin over the k-1 links
        for t in range(max(plan.full_batches)):
            outbox: dict[tuple[int, int], list[Token]] = defaultdict(list)
            for p in players:
                if plan.full_batches[p - 1] > t:
                    chunk = lists[p - 1][t * batch:(t + 1) * batch]
                    for j, tok in enumerate(chunk):
                        outbox[(p, others[p][j % (k - 1)])].append(tok)
            for dst, items in self.run_round(outbox).items():
                owned[dst].extend(tok for _, tok in items)
        leftovers = {p: lists[p - 1][plan.full_batches[p - 1] * batch:] for p in players}
        # residual counts are exchanged so that every player can rank locally
        outbox = {(p, q): [Token(Tag.COUNT, len(leftovers[p]))] for p in players for q in others[p]}
        heard = self.run_round(outbox)
        outbox = defaultdict(list)
        for a in players:
            counts = {src: tok.a for src, tok in heard[a]}
            counts[a] = len(leftovers[a])
            prefix = sum(counts[i] for i in players if i < a)
            for j, tok in enumerate(leftovers[a], start=1):
                dest = rank_destination(prefix + j, k)
                if dest == a:
                    owned[a].append(tok)
                else:
                    outbox[(a, dest)].append(tok)
        if outbox:
            for dst, items in self.run_round(outbox).items():
                owned[dst].extend(tok for _, tok in items)
        held = {p: list(owned[p]) for p in players}
        t_max = max(len(v) for v in owned.values())
        for t in range(-(-t_max // beta)):
            outbox = defaultdict(list)
            for p in players:
                chunk = owned[p][t * beta:(t + 1) * beta]
                if chunk:
                    for q in others[p]:
                        outbox[(p, q)].extend(chunk)
            for dst, items in self.run_round(outbox).items():
                held[dst].extend(tok for _, tok in items)
        return held


def group_by_owner(tokens: Iterable[Token], owner: Sequence[int], field_name: str = "b") -> dict[int, list[Token]]:
    """Split a delivered set into the slices each player acts on.

    Every player holds all tokens after Spreading; this only spares each of
    them a scan over tokens addressed to other players' vertices.
    """
    out: dict[int, list[Token]] = defaultdict(list)
    for tok in tokens:
        out[owner[getattr(tok, field_name)]].append(tok)
    return out
