"""Parameter sweeps written as CSV, one row per grid point."""

from __future__ import annotations

import csv
import itertools
import math
import statistics
from dataclasses import dataclass, field, replace
from typing import TextIO

from .experiment import ExperimentConfig, regime_warnings, run_experiment

FIELDS = ["n", "k", "beta", "ell", "mode", "mean_rounds", "p95_rounds", "rounds_init",
          "init_constant", "update_constant", "trials", "warnings"]


@dataclass
class Sweep:
    n: list[int] = field(default_factory=lambda: [300])
    k: list[int] = field(default_factory=lambda: [8])
    beta: list[int] = field(default_factory=lambda: [1])
    ell: list[int] = field(default_factory=lambda: [8])
    mode: list[str] = field(default_factory=lambda: ["oblivious"])
    trials: int = 1
    batches: int = 3
    generator: str = "random"
    seed: int = 0

    def points(self):
        return itertools.product(self.n, self.k, self.beta, self.ell, self.mode)


def p95(values: list[float]) -> float:
    if len(values) == 1:
        return float(values[0])
    return statistics.quantiles(values, n=20, method="inclusive")[-1]


def init_constant(rounds_init: float, n: int, k: int, beta: int) -> float:
    return rounds_init / (math.ceil(n / (beta * k)) * math.log2(max(n, 2)))


def update_constant(mean_rounds: float, ell: int, k: int, beta: int, mode: str) -> float:
    """Mean rounds divided by the claimed growth term of the given adversary mode."""
    width = beta * k if mode == "oblivious" else math.sqrt(beta * k)
    scale = max(1, math.ceil(ell / width)) * math.log2(max(beta * k, 2))
    return mean_rounds / scale


def run_point(sweep: Sweep, n: int, k: int, beta: int, ell: int, mode: str) -> dict:
    updates, inits = [], []
    base = ExperimentConfig(n=n, k=k, beta=beta, ell=ell, batches=sweep.batches, adversary_mode=mode,
                            generator=sweep.generator)
    for t in range(sweep.trials):
        rec = run_experiment(replace(base, seed=sweep.seed + t))
        updates.extend(rec.rounds_per_batch)
        inits.append(rec.rounds_init)
    mean = statistics.fmean(updates) if updates else 0.0
    init = statistics.fmean(inits)
    return {
        "n": n, "k": k, "beta": beta, "ell": ell, "mode": mode,
        "mean_rounds": round(mean, 3),
        "p95_rounds": round(p95(updates), 3) if updates else 0.0,
        "rounds_init": round(init, 3),
        "init_constant": round(init_constant(init, n, k, beta), 4),
        "update_constant": round(update_constant(mean, ell, k, beta, mode), 4),
        "trials": sweep.trials,
        "warnings": ";".join(regime_warnings(n, k, beta, ell, sweep.generator)),
    }


def run_sweep(sweep: Sweep, out: TextIO) -> list[dict]:
    """Write rows as they complete; an interrupt leaves every finished row on disk."""
    w = csv.DictWriter(out, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    out.flush()
    rows = []
    try:
        for point in sweep.points():
            row = run_point(sweep, *point)
            w.writerow(row)
            out.flush()
            rows.append(row)
    finally:
        out.flush()
    return rows
