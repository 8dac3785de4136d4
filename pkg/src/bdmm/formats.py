"""Plain-text input files and metrics output.

Graph file: first line ``n m``, then ``m`` lines ``u v``.
Partition file: one ``v p`` line per vertex.
Batch file: batches separated by a ``---`` line; each update line is
``- u v`` (delete) or ``+ u v`` (insert).  Blank lines and ``#`` comments are
ignored everywhere.
Matching file: one ``u v`` line per matched edge.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, TextIO

from .model import Graph, Matching, Partition, UpdateBatch


class FormatError(ValueError):
    pass


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _ints(line: str, count: int, no: int) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise FormatError(f"line {no}: expected {count} integers, got {line!r}")
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise FormatError(f"line {no}: not an integer in {line!r}") from None


def dumps_graph(g: Graph) -> str:
    edges = sorted(g.edges())
    return "".join([f"{g.n} {len(edges)}\n"] + [f"{u} {v}\n" for u, v in edges])


def loads_graph(text: str) -> Graph:
    it = _lines(text)
    try:
        no, head = next(it)
    except StopIteration:
        raise FormatError("empty graph file") from None
    n, m = _ints(head, 2, no)
    g = Graph(n)
    for no, line in it:
        u, v = _ints(line, 2, no)
        try:
            g.add_edge(u, v)
        except Exception as exc:
            raise FormatError(f"line {no}: {exc}") from None
    if g.num_edges() != m:
        raise FormatError(f"header announces {m} edges, file has {g.num_edges()}")
    return g


def dumps_partition(p: Partition) -> str:
    return "".join(f"{v} {p.owner[v]}\n" for v in range(1, p.n + 1))


def loads_partition(text: str, k: int | None = None) -> Partition:
    mapping = {}
    for no, line in _lines(text):
        v, p = _ints(line, 2, no)
        mapping[v] = p
    n = len(mapping)
    if sorted(mapping) != list(range(1, n + 1)):
        raise FormatError("partition must list every vertex 1..n exactly once")
    kk = max(mapping.values(), default=1) if k is None else k
    if any(not 1 <= p <= kk for p in mapping.values()):
        raise FormatError(f"player IDs must lie in 1..{kk}")
    return Partition.from_mapping(kk, mapping)


def dumps_batches(batches: Iterable[UpdateBatch]) -> str:
    chunks = []
    for b in batches:
        lines = [f"- {u} {v}\n" for u, v in b.deletions] + [f"+ {u} {v}\n" for u, v in b.insertions]
        chunks.append("".join(lines))
    return "---\n".join(chunks)


def loads_batches(text: str) -> list[UpdateBatch]:
    out = [UpdateBatch()]
    for no, line in _lines(text):
        if line == "---":
            out.append(UpdateBatch())
            continue
        sign, rest = line[0], line[1:]
        if sign not in "+-":
            raise FormatError(f"line {no}: update must start with '+' or '-'")
        u, v = _ints(rest, 2, no)
        e = (min(u, v), max(u, v))
        (out[-1].deletions if sign == "-" else out[-1].insertions).append(e)
    if len(out) == 1 and not len(out[0]):
        return []
    return out


def dumps_matching(m: Matching) -> str:
    return "".join(f"{u} {v}\n" for u, v in m.edges())


def loads_matching(text: str) -> Matching:
    return Matching(_ints(line, 2, no) for no, line in _lines(text))


def read_text(path) -> str:
    return Path(path).read_text()


def write_text(path, text: str) -> None:
    Path(path).write_text(text)


# -- metrics ---------------------------------------------------------------

METRIC_KEYS = ("rounds_init", "rounds_per_batch", "tokens_total", "max_link_load", "per_phase")


def dump_json(obj, fh: TextIO | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if fh is not None:
        fh.write(text)
    return text


def metrics_rows(metrics: dict) -> list[dict]:
    """Flatten a metrics dict into (key, value) rows for CSV export."""
    rows = []
    for key in METRIC_KEYS:
        val = metrics.get(key)
        if key == "rounds_per_batch":
            rows += [{"key": f"rounds_batch_{i}", "value": r} for i, r in enumerate(val or [])]
        elif key == "per_phase":
            for label, acc in sorted((val or {}).items()):
                rows.append({"key": f"phase_{label}_rounds", "value": acc["rounds"]})
                rows.append({"key": f"phase_{label}_tokens", "value": acc["tokens"]})
        else:
            rows.append({"key": key, "value": val})
    return rows


def metrics_csv(metrics: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["key", "value"], lineterminator="\n")
    w.writeheader()
    w.writerows(metrics_rows(metrics))
    return buf.getvalue()
