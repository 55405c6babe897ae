"""Command-line entry point: ``untrusted-advice <problem> <command> [flags]``.

Exit codes: 0 on success, 2 on usage or parameter errors, 1 when an
invariant check fails (its name is printed on standard error).

Data goes to ``--out`` in ``--format``.  Without ``--out``, an explicit
``--format`` sends the data to standard output instead of the prose
summary, so that every stdout line is a data row.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Optional

from . import __version__, bidding, bin_packing, harness, list_update, ski_rental
from .core import (
    AdviceMode,
    ExperimentRecord,
    InvariantViolation,
    ParameterError,
    as_fraction,
    to_jsonable,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _decimal(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--out", help="write data rows to this file")
    p.add_argument("--format", choices=("jsonl", "csv"), help="data format (default jsonl)")
    p.add_argument("--quiet", action="store_true", help="no prose on standard output")
    return p


class _Output:
    def __init__(self, args):
        self.args = args
        self.fmt = args.format or "jsonl"
        self.data_to_stdout = args.out is None and args.format is not None

    def say(self, *lines) -> None:
        if self.args.quiet or self.data_to_stdout:
            return
        for line in lines:
            print(line)

    def emit(self, records: list, rows: Optional[list] = None) -> None:
        """Write records as JSONL, or ``rows`` (default: flattened records) as CSV."""
        if self.fmt == "jsonl":
            text = harness.dumps_jsonl(records)
        else:
            text = _csv_text(rows if rows is not None else [_flat(r) for r in records])
        if self.args.out:
            with open(self.args.out, "w", newline="") as fh:
                fh.write(text)
        elif self.data_to_stdout:
            sys.stdout.write(text)


def _flat(rec: ExperimentRecord) -> dict:
    d = rec.to_json()
    d["params"] = json.dumps(d["params"], sort_keys=True)
    d["advice_mode"] = json.dumps(d["advice_mode"], sort_keys=True)
    return d


def _csv_text(rows: list) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    x = float(x)
    return f"{x:.4f}".rstrip("0").rstrip(".") if math.isfinite(x) else str(x)


def _exact_or_float(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


# ski rental


def _ski_witness_records(policy, B: int, params: dict, seed: int) -> list:
    """Trusted and untrusted worst cases of ``policy`` over ``D <= 3B``."""
    best = {}
    for D in range(1, 3 * B + 1):
        truth = ski_rental.correct_bit(B, D)
        for bit in (0, 1):
            cost = ski_rental.policy_cost(policy, B, D, bit)
            ratio = Fraction(cost, min(D, B))
            keys = ["untrusted"] + (["trusted"] if bit == truth else [])
            for key in keys:
                if key not in best or ratio > best[key][0]:
                    best[key] = (ratio, D, bit, cost)
    out = []
    for key in ("trusted", "untrusted"):
        _, D, bit, cost = best[key]
        mode = AdviceMode.trusted() if key == "trusted" else AdviceMode.fixed(bit)
        out.append(ExperimentRecord("skirental", policy.label(), dict(params, D=D), "exhaustive",
                                    seed, cost, min(D, B), None, mode))
    return out


def cmd_skirental_pair(args, out: _Output) -> int:
    pair = ski_rental.measure_pair(ski_rental.ak_policy(args.k, args.B), args.B)
    expect = ski_rental.ak_pair(args.k, args.B)
    if pair != expect:
        raise InvariantViolation("ski.ak_pair", f"measured {pair} but expected {expect}")
    out.say(f"({_fmt(pair.r)}, {_fmt(pair.w)})")
    recs = _ski_witness_records(ski_rental.ak_policy(args.k, args.B), args.B, {"B": args.B, "k": args.k}, args.seed)
    out.emit(recs)
    return 0


def cmd_skirental_frontier(args, out: _Output) -> int:
    front = ski_rental.enumerate_policies_frontier(args.B)
    recs = []
    for pol, pair in front:
        params = {"B": args.B, "buy_day_if_advice0": pol.buy_day_if_advice0,
                  "buy_day_if_advice1": pol.buy_day_if_advice1, "r": pair.r, "w": pair.w}
        recs.extend(_ski_witness_records(pol, args.B, params, args.seed))
    out.say(f"{len(front)} frontier policies for B={args.B}",
            *(f"  {pol.label()}: ({_fmt(p.r)}, {_fmt(p.w)})" for pol, p in front))
    out.emit(recs)
    return 0


# bidding


def cmd_bidding_pareto(args, out: _Output) -> int:
    u, w = float(args.u), float(args.w)
    res = bidding.pareto_strategy(u, w)
    bids = res.bids.prefix(res.m)
    cost = bidding.simulate(res.bids, u)
    shown = [int(b) if float(b).is_integer() else b for b in (round(b, 9) for b in bids)]
    out.say(f"m*={res.m} bids {shown} r={cost / u:.4f}")
    rec = ExperimentRecord("bidding", "pareto", {"w": args.w, "u": args.u, "m": res.m, "bids": bids},
                           "single", args.seed, cost, u, None, AdviceMode.trusted())
    out.emit([rec])
    return 0


def cmd_bidding_kbit(args, out: _Output) -> int:
    w = float(args.w)
    fixed = {"algorithm": "kbit", "w": w, "u_max": float(args.grid_max),
             "points_per_octave": args.points_per_octave}
    spec = harness.SweepSpec("bidding", {"k": [args.k]}, fixed, seed=args.seed)
    result = harness.run_sweep(spec)
    cell = result.cells[0]
    bound = bidding.kbit_bounds(args.k, w)
    out.say(f"k={args.k} w={_fmt(w)}: measured ({_fmt(cell.pair.r)}, {_fmt(cell.pair.w)}), "
            f"guaranteed ({_fmt(bound.r)}, {_fmt(bound.w)})")
    out.emit(result.records, [_param_row("k", args.k, cell.pair)])
    return 0


def _param_row(name, value, pair) -> dict:
    return {"parameter": name, "value": to_jsonable(value), "r_hat": float(pair.r), "w_hat": float(pair.w)}


def cmd_bidding_randomized(args, out: _Output) -> int:
    w = float(args.w)
    grid = bidding.log_grid(float(args.grid_max), args.points_per_octave)
    pair, wit = bidding.randomized_mixture_pair(w, grid, with_witness=True)
    bound = bidding.randomized_bounds(w)
    out.say(f"w={_fmt(w)}: expected ({_fmt(pair.r)}, {_fmt(pair.w)}), "
            f"guaranteed ({_fmt(bound.r)}, {_fmt(bound.w)})")
    r1 = bidding.roots(w).rho1
    recs = []
    for mode, v, u in ((AdviceMode.trusted(), wit["trusted_u"], wit["trusted_u"]),
                       (None, *wit["untrusted_advice_u"])):
        X = bidding.pareto_strategy(v, w).bids
        cost = (bidding.simulate(X, u) + bidding.simulate(X.scaled(r1), u)) / 2
        recs.append(ExperimentRecord("bidding", "randomized", {"w": args.w, "u": u}, "log-grid", args.seed,
                                     cost, u, None, mode or AdviceMode.fixed(v)))
    out.emit(recs, [_param_row("w", args.w, pair)])
    return 0


# bin packing


def _load_items(path: str) -> list:
    with open(path) as fh:
        data = json.load(fh, parse_float=Fraction, parse_int=Fraction)
    if not isinstance(data, list):
        raise ParameterError(f"{path}: expected a JSON array of item sizes")
    return data


def _pack(alg: str, items: list, alpha, k: int, gamma=None, c=None):
    if alg == "ff":
        return bin_packing.first_fit(items), None
    if alg == "rc":
        if c is None:
            c = sum(1 for s in items if bin_packing.classify(s) is bin_packing.ItemClass.CRITICAL)
        return bin_packing.reserve_critical(items, c), Fraction(1)
    if gamma is None:
        gamma = bin_packing.encode_gamma(items, k)
    cfg = bin_packing.RrcConfig(alpha, gamma, k)
    return bin_packing.rrc_pack(items, cfg), cfg.beta


def _opt_for(items: list) -> tuple[int, str]:
    if len(items) <= bin_packing.OPT_LIMIT:
        return bin_packing.opt_bins(items), "exact"
    return max(1, math.ceil(sum(as_fraction(s) for s in items))), "size_lower_bound"


def cmd_binpack_run(args, out: _Output) -> int:
    items = _load_items(args.items) if args.items else bin_packing.adversarial_sequences(args.family, args.n, args.seed)
    if not items:
        raise ParameterError("the item sequence is empty")
    pk, beta = _pack(args.alg, items, args.alpha, args.k)
    opt, kind = _opt_for(items)
    counts = {lab.value: n for lab, n in pk.counts().items() if n}
    params = {"alpha": args.alpha, "k": args.k, "n": len(items), "opt_kind": kind,
              "additive_constant": harness.additive_constant("binpack", {})}
    rec = ExperimentRecord("binpack", args.alg, params, "file" if args.items else args.family, args.seed,
                           pk.num_bins, opt, None, AdviceMode.trusted())
    out.say(f"{args.alg}: {pk.num_bins} bins ({counts}); OPT {'=' if kind == 'exact' else '>='} {opt}")
    if args.alg == "rrc":
        out.say(f"guarantees: trusted {_fmt(bin_packing.trusted_ratio_bound(args.alpha, args.k))}, "
                f"untrusted {_fmt(bin_packing.untrusted_ratio_bound(args.alpha))} (both +4 bins)")
    if beta is not None and args.alg == "rrc":
        report = bin_packing.audit_packing(pk, beta, items)
        out.say(f"audit: {'pass' if report.passed else 'FAIL ' + ', '.join(report.failures())}")
        if not report.passed:
            out.emit([rec])
            raise InvariantViolation(f"binpack.{report.failures()[0]}", json.dumps(report.to_json()))
    out.emit([rec])
    return 0


def _audit_inputs(path: str, args):
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line, parse_float=Fraction, parse_int=Fraction)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"{path}:{lineno}: {exc}")
            if isinstance(obj, list):
                obj = {"items": obj}
            if not isinstance(obj, dict) or "items" not in obj:
                raise ParameterError(f"{path}:{lineno}: expected an item array or an object with 'items'")
            yield lineno, obj


def cmd_binpack_audit(args, out: _Output) -> int:
    failed = []
    rows, recs = [], []
    for lineno, obj in _audit_inputs(args.in_path, args):
        items = obj["items"]
        alpha = as_fraction(obj.get("alpha", args.alpha))
        k = int(obj.get("k", args.k))
        pk, beta = _pack("rrc", items, alpha, k, obj.get("gamma"))
        report = bin_packing.audit_packing(pk, beta, items)
        rows.append(dict(line=lineno, **report.to_json()))
        opt, kind = _opt_for(items)
        recs.append(ExperimentRecord("binpack", "rrc", {"alpha": alpha, "k": k, "n": len(items), "opt_kind": kind,
                                                        "additive_constant": 4, "audit_passed": report.passed},
                                     "file", args.seed, pk.num_bins, opt, None, AdviceMode.trusted()))
        if not report.passed:
            failed.append((lineno, report.failures()))
    out.say(f"audited {len(rows)} sequences, {len(failed)} failed",
            *(f"  line {ln}: {', '.join(f)}" for ln, f in failed))
    out.emit(recs, [{"line": r["line"], "passed": r["passed"],
                     "failures": ";".join(k for k, v in r["checks"].items() if not v["passed"])} for r in rows])
    if failed:
        ln, names = failed[0]
        raise InvariantViolation(f"binpack.{names[0]}", f"line {ln}")
    return 0


# list update


def cmd_listupdate_run(args, out: _Output) -> int:
    m = args.m
    seq = list_update.generate_sequence(args.family, m, args.n, args.seed)
    if not seq:
        raise ParameterError("n must be >= 1")
    if m <= list_update.OPT_DP_LIMIT:
        opt, kind = list_update.opt_dp(seq, m=m), "exact"
    else:
        opt, kind = len(seq), "access_lower_bound"
    params = {"m": m, "n": args.n, "opt_kind": kind,
              "additive_constant": harness.additive_constant("listupdate", {"m": m})}
    ledger = None
    if args.alg == "toggle":
        advice = args.advice or list_update.trusted_advice(seq, m)
        cfg = list_update.ToggleConfig(args.beta, advice, m)
        ledger, _ = list_update.toggle_serve(seq, cfg)
        cost = ledger.total
        params.update(beta=args.beta, advice=advice)
        correct = list_update.trusted_advice(seq, m)
        mode = AdviceMode.trusted() if advice == correct else AdviceMode.fixed(advice)
    else:
        cost = list_update.run_algorithm(args.alg, seq, m)
        mode = AdviceMode.trusted()
    rec = ExperimentRecord("listupdate", args.alg, params, args.family, args.seed, cost, opt, None, mode)
    extra = f", {len(ledger.phases)} phases" if ledger else ""
    out.say(f"{args.alg}: cost {cost}; OPT {'=' if kind == 'exact' else '>='} {opt}; "
            f"ratio {_fmt(Fraction(cost, opt))}{extra}")
    out.emit([rec])
    if args.ledger:
        if ledger is None:
            raise ParameterError("--ledger needs --alg toggle")
        with open(args.ledger, "w", newline="\n") as fh:
            for ph in ledger.phases:
                fh.write(json.dumps(to_jsonable(ph.to_json()), separators=(",", ":")) + "\n")
    return 0


# sweeps and record audits


def cmd_sweep(args, out: _Output) -> int:
    try:
        spec = harness.SweepSpec.load(args.spec)
    except FileNotFoundError:
        raise UsageError(f"sweep spec not found: {args.spec}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"sweep spec {args.spec} is not valid JSON: {exc}")
    except TypeError as exc:
        raise UsageError(f"bad sweep spec {args.spec}: {exc}")
    if args.workers is not None:
        spec.workers = args.workers
    if args.seed:
        spec.seed = args.seed
    result = harness.run_sweep(spec)
    front = {i for i, _ in result.frontier}
    out.say(f"{spec.problem}: {len(result.cells)} cells, {len(result.records)} records",
            *(f"  cell {c.index} {json.dumps(to_jsonable(c.params), sort_keys=True)}: "
              f"({_fmt(c.pair.r)}, {_fmt(c.pair.w)}){' *' if c.index in front else ''}" for c in result.cells))
    out.emit(result.records, [c.row() for c in result.cells])
    if args.summary:
        harness.write_csv(result.cells, args.summary)
    return 0


def _record_problems(obj) -> list[str]:
    try:
        rec = ExperimentRecord.from_json(obj)
    except (ParameterError, InvariantViolation, KeyError, TypeError, ValueError) as exc:
        return [f"schema: {exc}"]
    problems = []
    recomputed = as_fraction(rec.alg_cost) / as_fraction(rec.opt_cost)
    if abs(float(recomputed) - float(rec.ratio)) > 1e-9 * max(1.0, float(recomputed)):
        problems.append(f"ratio {rec.ratio} != alg/opt {float(recomputed)}")
    return problems


def cmd_audit(args, out: _Output) -> int:
    bad = []
    n = 0
    with open(args.in_path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            n += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                bad.append((lineno, [f"json: {exc}"]))
                continue
            if not isinstance(obj, dict):
                bad.append((lineno, ["schema: not an object"]))
                continue
            problems = _record_problems(obj)
            if problems:
                bad.append((lineno, problems))
    out.say(f"checked {n} records, {len(bad)} invalid", *(f"  line {ln}: {'; '.join(p)}" for ln, p in bad))
    if bad:
        raise InvariantViolation("record.schema", f"line {bad[0][0]}: {bad[0][1][0]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="untrusted-advice", description="Online algorithms with untrusted advice.")
    top.add_argument("--version", action="version", version=f"untrusted-advice {__version__} (git unknown)")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(group, name, func, help_):
        p = group.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    ski = sub.add_parser("skirental", help="ski rental with one advice bit").add_subparsers(dest="sub", required=True)
    p = leaf(ski, "pair", cmd_skirental_pair, "measured (r, w) of A_k")
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p = leaf(ski, "frontier", cmd_skirental_frontier, "Pareto frontier of all one-bit policies")
    p.add_argument("--B", type=int, required=True)

    bid = sub.add_parser("bidding", help="online bidding").add_subparsers(dest="sub", required=True)
    p = leaf(bid, "pareto", cmd_bidding_pareto, "optimal sequence for a known hidden value")
    p.add_argument("--w", type=_decimal, required=True)
    p.add_argument("--u", type=_decimal, required=True)
    p = leaf(bid, "kbit", cmd_bidding_kbit, "k-bit geometric strategy over a log grid")
    p.add_argument("--w", type=_decimal, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--grid-max", type=_decimal, required=True)
    p.add_argument("--points-per-octave", type=int, default=4)
    p = leaf(bid, "randomized", cmd_bidding_randomized, "fair mixture of X*_u and its scaled copy")
    p.add_argument("--w", type=_decimal, required=True)
    p.add_argument("--grid-max", type=_decimal, default=Fraction(2**16))
    p.add_argument("--points-per-octave", type=int, default=4)

    bp = sub.add_parser("binpack", help="bin packing with critical-ratio advice").add_subparsers(dest="sub", required=True)
    p = leaf(bp, "run", cmd_binpack_run, "pack one sequence")
    p.add_argument("--alg", choices=("ff", "rc", "rrc"), required=True)
    p.add_argument("--alpha", type=_decimal, default=Fraction(1))
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--family", choices=bin_packing.FAMILIES, default=bin_packing.FAMILIES[0])
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--items", help="JSON array of item sizes (overrides --family)")
    p = leaf(bp, "audit", cmd_binpack_audit, "audit RRC packings of sequences in a JSONL file")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--alpha", type=_decimal, default=Fraction(1))
    p.add_argument("--k", type=int, default=3)

    lu = sub.add_parser("listupdate", help="list update with two advice bits").add_subparsers(dest="sub", required=True)
    p = leaf(lu, "run", cmd_listupdate_run, "serve one request sequence")
    p.add_argument("--alg", choices=("mtf", "ts", "mtfe", "mtfo", "toggle"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--beta", type=_decimal, default=Fraction(0))
    p.add_argument("--advice", choices=list_update.ADVICE, help="default: the best advice for the sequence")
    p.add_argument("--family", choices=list_update.FAMILIES, default=list_update.FAMILIES[0])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ledger", help="write Toggle's per-phase rows here as JSONL")

    p = leaf(sub, "sweep", cmd_sweep, "run a parameter sweep from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--summary", help="also write the per-cell CSV summary here")

    p = leaf(sub, "audit", cmd_audit, "check experiment records in a JSONL file")
    p.add_argument("--in", dest="in_path", required=True)
    return top


def _validate(args) -> None:
    for name in ("B", "k", "m", "n"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "k" else 1):
            raise UsageError(f"--{name} must be {'>= 0' if name == 'k' else '>= 1'}, got {v}")


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
        return args.func(args, _Output(args))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        name = getattr(exc, "name", "invariant")
        print(f"invariant violated: {name}: {getattr(exc, 'detail', exc)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
