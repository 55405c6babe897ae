"""Parameter sweeps that measure trusted and untrusted ratios.

A sweep runs every cell of a parameter grid over input families and seeded
trials.  Each trial emits one record with the correct advice and one per
advice value an adversary may pick.  Per cell, the trusted ratio is the worst
trusted record and the untrusted ratio the worst record overall, after
subtracting the problem's additive constant where its bounds are asymptotic.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from . import bidding, bin_packing, list_update, ski_rental
from .core import (
    AdviceMode,
    CompetitivePair,
    ExperimentRecord,
    ParameterError,
    as_fraction,
    derive_seed,
    pareto_frontier,
    to_jsonable,
)

__all__ = [
    "CellSummary",
    "PROBLEMS",
    "SweepResult",
    "SweepSpec",
    "adversarial_advice_grid",
    "additive_constant",
    "dumps_jsonl",
    "run_sweep",
    "summaries_csv",
    "write_csv",
    "write_jsonl",
]

# Advice spaces larger than this are subsampled evenly.
MAX_GRID = 2**12


@dataclass
class SweepSpec:
    problem: str
    grid: dict
    fixed: dict = field(default_factory=dict)
    families: Optional[list] = None
    trials: int = 1
    seed: int = 0
    additive: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ParameterError(f"unknown problem {self.problem!r}; expected one of {sorted(PROBLEMS)}")
        if not self.grid or any(not list(v) for v in self.grid.values()):
            raise ParameterError("parameter grid must be nonempty")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.families is None:
            self.families = list(PROBLEMS[self.problem].families[:1])
        if not self.families:
            raise ParameterError("at least one input family is required")
        known = PROBLEMS[self.problem].families
        for fam in self.families:
            if fam not in known:
                raise ParameterError(f"no generator for family {fam!r} in problem {self.problem!r}; known: {known}")

    @classmethod
    def from_json(cls, obj: dict) -> "SweepSpec":
        allowed = {"problem", "grid", "fixed", "families", "trials", "seed", "additive", "workers"}
        extra = set(obj) - allowed
        if extra:
            raise ParameterError(f"unknown sweep spec keys {sorted(extra)}")
        if "problem" not in obj or "grid" not in obj:
            raise ParameterError("sweep spec needs 'problem' and 'grid'")
        return cls(**obj)

    @classmethod
    def load(cls, path: str) -> "SweepSpec":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def cells(self) -> list[dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]


def additive_constant(problem: str, params: dict) -> Fraction:
    """Additive slack allowed by the problem's asymptotic bounds."""
    if problem == "binpack":
        return Fraction(4)
    if problem == "listupdate":
        return Fraction(4 * int(params["m"]) ** 3)
    return Fraction(0)


def adversarial_advice_grid(problem: str, instance: Optional[dict] = None) -> list:
    """Every advice value an adversary may choose, for one problem instance."""
    instance = instance or {}
    if problem == "skirental":
        return [0, 1]
    if problem == "bidding":
        return list(range(2 ** int(instance.get("k", 0))))
    if problem == "binpack":
        k = int(instance.get("k", 3))
        size = 2**k
        if size <= MAX_GRID:
            return [Fraction(j, size) for j in range(size)]
        step = size // MAX_GRID
        return [Fraction(j, size) for j in range(0, size, step)]
    if problem == "listupdate":
        return list(list_update.ADVICE)
    raise ParameterError(f"unknown problem {problem!r}")


def _rec(problem, algorithm, params, family, seed, alg, opt, mode, ratio=None) -> ExperimentRecord:
    return ExperimentRecord(problem, algorithm, params, family, seed, alg, opt, ratio, mode)


def _ski_trial(cell: dict, fixed: dict, family: str, seed: int) -> list[ExperimentRecord]:
    B = int(fixed["B"])
    k = int(cell["k"])
    policy = ski_rental.ak_policy(k, B)
    cap = int(fixed.get("cap", 3 * B))
    params = {"B": B, "k": k}
    out = []
    for D in range(1, cap + 1):
        opt = min(D, B)
        truth = ski_rental.correct_bit(B, D)
        for bit in adversarial_advice_grid("skirental"):
            cost = ski_rental.policy_cost(policy, B, D, bit)
            mode = AdviceMode.trusted() if bit == truth else AdviceMode.fixed(bit)
            out.append(_rec("skirental", "A_k", dict(params, D=D), family, seed, cost, opt, mode))
    return out


def _bidding_strategy(cell: dict, fixed: dict):
    alg = fixed.get("algorithm", cell.get("algorithm", "kbit"))
    w = float(cell.get("w", fixed.get("w", 4)))
    if alg == "kbit":
        return bidding.KBitBidding(int(cell.get("k", fixed.get("k", 1))), w)
    if alg == "pareto":
        return bidding.ParetoBidding(w)
    if alg == "doubling":
        return bidding.DoublingStrategy()
    raise ParameterError(f"unknown bidding algorithm {alg!r}")


def _bidding_trial(cell: dict, fixed: dict, family: str, seed: int) -> list[ExperimentRecord]:
    strategy = _bidding_strategy(cell, fixed)
    u_max = float(fixed.get("u_max", 2**20))
    grid = bidding.log_grid(u_max, int(fixed.get("points_per_octave", 4)))
    params = dict(fixed, **cell)
    advices = list(strategy.advice_space(grid))
    pts = set(grid)
    for adv in advices:
        pts.update(bidding._adversarial_points(strategy.sequence(adv), u_max, bidding.ADVERSARIAL_DELTA))
    us = sorted(pts)
    out = []
    for u in us:
        seq = strategy.sequence(strategy.advice_for(u))
        out.append(_rec("bidding", strategy.name, dict(params, u=u), family, seed,
                        bidding.simulate(seq, u), u, AdviceMode.trusted()))
    for adv in advices:
        seq = strategy.sequence(adv)
        worst = max(us, key=lambda u: bidding.simulate(seq, u) / u)
        out.append(_rec("bidding", strategy.name, dict(params, u=worst), family, seed,
                        bidding.simulate(seq, worst), worst, AdviceMode.fixed(adv)))
    return out


def _binpack_trial(cell: dict, fixed: dict, family: str, seed: int) -> list[ExperimentRecord]:
    alpha = as_fraction(cell.get("alpha", fixed.get("alpha", 1)))
    k = int(cell.get("k", fixed.get("k", 3)))
    n = int(cell.get("n", fixed.get("n", 12)))
    items = bin_packing.adversarial_sequences(family, n, seed)
    if not items:
        raise ParameterError("bin packing trials need n >= 1 (OPT would be 0)")
    if n > bin_packing.OPT_LIMIT:
        raise ParameterError(f"bin packing sweeps compare with exact OPT and need n <= {bin_packing.OPT_LIMIT}")
    opt = bin_packing.opt_bins(items)
    params = {"alpha": alpha, "k": k, "n": n, "additive_constant": additive_constant("binpack", {}),
              "trusted_bound": bin_packing.trusted_ratio_bound(alpha, k),
              "untrusted_bound": bin_packing.untrusted_ratio_bound(alpha)}
    trusted = bin_packing.encode_gamma(items, k)
    out = []
    for gamma in [None] + adversarial_advice_grid("binpack", {"k": k}):
        g = trusted if gamma is None else gamma
        pk = bin_packing.rrc_pack(items, bin_packing.RrcConfig(alpha, g, k))
        mode = AdviceMode.trusted() if gamma is None else AdviceMode.fixed(gamma)
        out.append(_rec("binpack", "rrc", dict(params, gamma=g), family, seed, pk.num_bins, opt, mode))
    return out


def _listupdate_trial(cell: dict, fixed: dict, family: str, seed: int) -> list[ExperimentRecord]:
    beta = as_fraction(cell.get("beta", fixed.get("beta", 0)))
    m = int(cell.get("m", fixed.get("m", 4)))
    n = int(cell.get("n", fixed.get("n", 1000)))
    seq = list_update.generate_sequence(family, m, n, seed)
    if not seq:
        raise ParameterError("list update trials need n >= 1 (OPT would be 0)")
    opt = list_update.opt_dp(seq, m=m)
    params = {"beta": beta, "m": m, "n": n, "additive_constant": additive_constant("listupdate", {"m": m})}
    trusted = list_update.trusted_advice(seq, m)
    out = []
    for adv in [None] + adversarial_advice_grid("listupdate"):
        a = trusted if adv is None else adv
        ledger, _ = list_update.toggle_serve(seq, list_update.ToggleConfig(beta, a, m))
        mode = AdviceMode.trusted() if adv is None else AdviceMode.fixed(adv)
        out.append(_rec("listupdate", "toggle", dict(params, advice=a), family, seed, ledger.total, opt, mode))
    return out


@dataclass(frozen=True)
class _Problem:
    trial: Callable
    families: tuple
    seeded: bool


PROBLEMS = {
    "skirental": _Problem(_ski_trial, ("exhaustive",), False),
    "bidding": _Problem(_bidding_trial, ("log-grid",), False),
    "binpack": _Problem(_binpack_trial, bin_packing.FAMILIES, True),
    "listupdate": _Problem(_listupdate_trial, list_update.FAMILIES, True),
}


@dataclass
class CellSummary:
    index: int
    params: dict
    pair: CompetitivePair
    r_hat_raw: Any
    w_hat_raw: Any
    additive_constant: Any
    r_witness: Optional[int]
    w_witness: Optional[int]
    n_records: int

    def row(self) -> dict:
        return {
            "cell": self.index,
            "params": json.dumps(to_jsonable(self.params), sort_keys=True),
            "r_hat": float(self.pair.r),
            "w_hat": float(self.pair.w),
            "r_hat_raw": float(self.r_hat_raw),
            "w_hat_raw": float(self.w_hat_raw),
            "additive_constant": float(self.additive_constant),
            "r_witness": self.r_witness,
            "w_witness": self.w_witness,
            "n_records": self.n_records,
        }


@dataclass
class SweepResult:
    records: list
    cells: list
    frontier: list  # (cell index, pair)


def _run_job(job):
    problem, cell, fixed, family, seed = job
    return PROBLEMS[problem].trial(cell, fixed, family, seed)


def _summarize(index: int, cell: dict, records: list, offset: int, additive) -> CellSummary:
    def adjusted(rec):
        if additive:
            return max(Fraction(0), (as_fraction(rec.alg_cost) - additive) / as_fraction(rec.opt_cost))
        return rec.ratio

    trusted = [(adjusted(r), offset + i) for i, r in enumerate(records) if r.advice_mode.mode == "trusted"]
    every = [(adjusted(r), offset + i) for i, r in enumerate(records)]
    r_hat, r_at = max(trusted, key=lambda t: t[0])
    w_hat, w_at = max(every, key=lambda t: t[0])
    r_raw = max(r.ratio for r in records if r.advice_mode.mode == "trusted")
    w_raw = max(r.ratio for r in records)
    return CellSummary(index, cell, CompetitivePair(r_hat, w_hat), r_raw, w_raw, additive, r_at, w_at, len(records))


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run every (cell, family, trial) and summarize per cell.

    Seeds come from the base seed and the cell, family and trial indices,
    so results are identical with or without worker processes.
    """
    prob = PROBLEMS[spec.problem]
    cells = spec.cells()
    jobs, owners = [], []
    for ci, cell in enumerate(cells):
        for fi, fam in enumerate(spec.families):
            for t in range(spec.trials):
                seed = derive_seed(spec.seed, ci, fi, t) if prob.seeded else int(spec.seed)
                jobs.append((spec.problem, cell, dict(spec.fixed), fam, seed))
                owners.append(ci)
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    records: list = []
    per_cell: dict = {ci: [] for ci in range(len(cells))}
    for ci, recs in zip(owners, results):
        per_cell[ci].append((len(records), recs))
        records.extend(recs)
    summaries = []
    for ci, cell in enumerate(cells):
        chunk = [r for _, recs in per_cell[ci] for r in recs]
        offset = per_cell[ci][0][0]
        params = dict(spec.fixed, **cell)
        add = as_fraction(spec.additive) if spec.additive is not None else additive_constant(spec.problem, params)
        summaries.append(_summarize(ci, cell, chunk, offset, add))
    frontier = pareto_frontier([(s.index, s.pair) for s in summaries])
    return SweepResult(records, summaries, frontier)


def dumps_jsonl(records) -> str:
    return "".join(r.to_jsonl() + "\n" for r in records)


def write_jsonl(records, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_jsonl(records))


def summaries_csv(summaries) -> str:
    buf = io.StringIO()
    cols = ["cell", "params", "r_hat", "w_hat", "r_hat_raw", "w_hat_raw", "additive_constant",
            "r_witness", "w_witness", "n_records"]
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for s in summaries:
        writer.writerow(s.row())
    return buf.getvalue()


def write_csv(summaries, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(summaries_csv(summaries))
