"""Command line entry point: ``bdmm generate|run|verify|bench``.

Exit status: 0 ok, 1 an oracle failed, 2 usage error.  ``BDMM_SEED`` sets
the default seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .. import adversary
from ..errors import BdmmError, OracleFailure
from ..formats import (
    FormatError,
    dump_json,
    dumps_batches,
    dumps_graph,
    dumps_matching,
    dumps_partition,
    loads_graph,
    loads_matching,
    loads_partition,
    metrics_csv,
    read_text,
    write_text,
)
from ..model import check_matching, is_maximal, validate_partition
from .bench import Sweep, run_sweep
from .experiment import ExperimentConfig, iter_run

EXIT_OK, EXIT_ORACLE, EXIT_USAGE = 0, 1, 2


def _default_seed() -> int:
    raw = os.environ.get("BDMM_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(text: str, path: str | None) -> None:
    if path:
        write_text(path, text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bdmm", description="Batch-dynamic maximal matching simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write graph, partition or batch files")
    gsub = gen.add_subparsers(dest="what", required=True)
    g = gsub.add_parser("line-segment")
    g.add_argument("--q", type=int, required=True)
    g.add_argument("-o", "--output")
    g = gsub.add_parser("domino")
    g.add_argument("--q", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("-o", "--output")
    g = gsub.add_parser("random-graph")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--avg-degree", type=float, default=4.0)
    g.add_argument("--seed", type=int, default=_default_seed())
    g.add_argument("-o", "--output")
    g = gsub.add_parser("partition")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=_default_seed())
    g.add_argument("-o", "--output")
    g = gsub.add_parser("batches")
    g.add_argument("--graph", required=True)
    g.add_argument("--ell", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--mix", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=_default_seed())
    g.add_argument("-o", "--output")
    g = gsub.add_parser("oblivious-lb")
    g.add_argument("--q", type=int, required=True)
    g.add_argument("--ell", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=_default_seed())
    g.add_argument("-o", "--output")

    for name in ("run", "baseline"):
        r = sub.add_parser(name, help="run the incremental pipeline" if name == "run"
                           else "run the recompute-from-scratch comparator")
        r.add_argument("--n", type=int, default=300)
        r.add_argument("--k", type=int, default=8)
        r.add_argument("--beta", type=int, default=1)
        r.add_argument("--ell", type=int, default=8)
        r.add_argument("--batches", type=int, default=5)
        r.add_argument("--adversary-mode", choices=["oblivious", "adaptive"], default="oblivious")
        r.add_argument("--generator", choices=["line_segment", "random", "file"], default="random")
        r.add_argument("--seed", type=int, default=_default_seed())
        r.add_argument("--gamma-override", type=int)
        r.add_argument("--avg-degree", type=float, default=4.0)
        r.add_argument("--mix", type=float, default=0.5)
        r.add_argument("--exact", action="store_true", help="push every round through the network")
        r.add_argument("--fastpath", action="store_true")
        r.add_argument("--graph", dest="graph_path")
        r.add_argument("--partition", dest="partition_path")
        r.add_argument("--batch-file", dest="batch_path")
        r.add_argument("--metrics-csv", help="also write flattened metrics here")
        r.add_argument("--matching-out", help="write the final matching here")
        r.add_argument("-o", "--output", dest="output_path")

    v = sub.add_parser("verify", help="check a matching file against a graph file")
    v.add_argument("--graph", required=True)
    v.add_argument("--matching", required=True)
    v.add_argument("--partition", help="also check the partition is balanced")
    v.add_argument("--k", type=int)

    b = sub.add_parser("bench", help="sweep parameters and write a CSV")
    b.add_argument("--n", type=_int_list, default=[300])
    b.add_argument("--k", type=_int_list, default=[8])
    b.add_argument("--beta", type=_int_list, default=[1])
    b.add_argument("--ell", type=_int_list, default=[8])
    b.add_argument("--mode", default="oblivious", help="comma-separated adversary modes")
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--batches", type=int, default=3)
    b.add_argument("--generator", choices=["line_segment", "random"], default="random")
    b.add_argument("--seed", type=int, default=_default_seed())
    b.add_argument("-o", "--output")
    return ap


def cmd_generate(args) -> int:
    if args.what == "line-segment":
        _emit(dumps_graph(adversary.gen_line_segment_graph(args.q).graph), args.output)
    elif args.what == "domino":
        _emit(dumps_partition(adversary.gen_domino_partition(args.q, args.k)), args.output)
    elif args.what == "random-graph":
        _emit(dumps_graph(adversary.gen_random_graph(args.n, args.avg_degree, args.seed)), args.output)
    elif args.what == "partition":
        _emit(dumps_partition(adversary.gen_random_partition(args.n, args.k, args.seed)), args.output)
    elif args.what == "batches":
        g = loads_graph(read_text(args.graph))
        _emit(dumps_batches(adversary.random_script(g, args.ell, args.mix, args.count, args.seed)), args.output)
    elif args.what == "oblivious-lb":
        _emit(dumps_batches(adversary.oblivious_lb_script(args.q, args.ell, args.count, args.seed)), args.output)
    return EXIT_OK


def cmd_run(args) -> int:
    fields = {f: getattr(args, f) for f in ExperimentConfig.__dataclass_fields__ if hasattr(args, f)}
    cfg = ExperimentConfig(**fields)
    try:
        for sim, record in iter_run(cfg, baseline=args.command == "baseline"):
            pass
    except OracleFailure as exc:
        sys.stderr.write(f"oracle failure: {exc}\n")
        dump_json({"error": str(exc), "dump": exc.dump}, sys.stderr)
        return EXIT_ORACLE
    _emit(dump_json(record.to_dict()), cfg.output_path)
    if args.metrics_csv:
        write_text(args.metrics_csv, metrics_csv(record.to_dict()))
    if args.matching_out:
        write_text(args.matching_out, dumps_matching(sim.output_matching()))
    return EXIT_OK if record.ok else EXIT_ORACLE


def cmd_verify(args) -> int:
    g = loads_graph(read_text(args.graph))
    m = loads_matching(read_text(args.matching))
    verdict = {"valid": True, "maximal": False}
    try:
        check_matching(g, m)
        verdict["maximal"] = is_maximal(g, m)
    except BdmmError as exc:
        verdict.update(valid=False, reason=str(exc))
    if args.partition:
        p = loads_partition(read_text(args.partition), args.k)
        verdict["balanced"] = validate_partition(p, g.n)
    sys.stdout.write(json.dumps(verdict, sort_keys=True) + "\n")
    return EXIT_OK if verdict["valid"] and verdict["maximal"] and verdict.get("balanced", True) else EXIT_ORACLE


def cmd_bench(args) -> int:
    sweep = Sweep(n=args.n, k=args.k, beta=args.beta, ell=args.ell, mode=args.mode.split(","),
                  trials=args.trials, batches=args.batches, generator=args.generator, seed=args.seed)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            run_sweep(sweep, fh)
    else:
        run_sweep(sweep, sys.stdout)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "baseline": cmd_run, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, FormatError, BdmmError, OSError) as exc:
        if isinstance(exc, OracleFailure):
            sys.stderr.write(f"oracle failure: {exc}\n")
            return EXIT_ORACLE
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"bdmm: error: {exc}\n")
        return EXIT_USAGE
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
