"""Command-line harness: single runs, invariant sweeps, and grid sweeps.

Reports are deterministic (sorted keys, no timestamps) so repeated runs of
the same spec are byte-identical.
"""

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from . import adversaries, engine, offline
from .components import ComponentRepartitioner
from .core import Configuration, Params, TooLarge, contiguous_configuration
from .greedy import DEFAULT_LAM, GreedyMatcher

ALGORITHMS = ("greedy", "components", "null", "naive")
SOURCES = ("ring", "pair_chase", "group_phases", "paging", "random",
           "planted", "trace")


@dataclass
class RunSpec:
    alg: str
    source: str
    n: int
    k: int
    l: int
    alpha: int = 1
    delta: int = 1
    lam: int = DEFAULT_LAM
    seed: int = 0
    steps: int = 200
    oracle: str = "dp"
    trace: Optional[str] = None
    out: Optional[str] = None
    p_in: float = 0.9
    p_out: float = 0.1

    def validate(self):
        if self.alg not in ALGORITHMS:
            raise ValueError("unknown algorithm %r" % self.alg)
        if self.source not in SOURCES:
            raise ValueError("unknown source %r" % self.source)
        if self.oracle not in ("dp", "static", "none"):
            raise ValueError("oracle must be dp, static, or none")
        if self.alg == "greedy" and self.k != 2:
            raise ValueError("greedy needs clusters of size 2")
        if self.alg == "components" and self.delta < 4:
            raise ValueError("components needs delta >= 4")
        if self.source == "group_phases" and self.l != 2:
            raise ValueError("group_phases needs exactly two clusters")
        if self.source in ("paging", "trace") and not self.trace:
            raise ValueError("source %r needs --trace" % self.source)
        Params(self.n, self.k, self.l, self.alpha, self.delta)

    def params(self) -> Params:
        return Params(self.n, self.k, self.l, self.alpha, self.delta)


def initial_for(spec: RunSpec) -> Configuration:
    params = spec.params()
    if spec.source == "group_phases":
        return adversaries.group_phases_initial(params)
    if spec.source == "paging":
        return adversaries.paging_initial(params)
    return contiguous_configuration(params)


def make_source(spec: RunSpec):
    params = spec.params()
    if spec.source == "ring":
        return adversaries.RingAdversary(params)
    if spec.source == "pair_chase":
        return adversaries.PairChase(params, phases=spec.lam)
    if spec.source == "group_phases":
        return adversaries.GroupPhases(params)
    if spec.source == "paging":
        with open(spec.trace) as fh:
            items = [int(tok) for tok in fh.read().split()]
        return adversaries.PagingStream(params, items)
    if spec.source == "random":
        return adversaries.RandomPairs(spec.seed, spec.n, spec.steps)
    if spec.source == "planted":
        return adversaries.PlantedPartition(
            spec.seed, params, spec.p_in, spec.p_out, steps=spec.steps)
    return adversaries.parse_trace(spec.trace, spec.n)


def make_algorithm(spec: RunSpec, initial: Configuration):
    params = spec.params()
    if spec.alg == "greedy":
        return GreedyMatcher(params, lam=spec.lam)
    if spec.alg == "components":
        return ComponentRepartitioner(params, initial)
    if spec.alg == "null":
        return engine.NullAlgorithm()
    return engine.NaiveCollocator(params)


def execute(spec: RunSpec, observer=None):
    """Run the spec; returns (transcript, algorithm, source)."""
    initial = initial_for(spec)
    alg = make_algorithm(spec, initial)
    start = alg.start if spec.alg == "components" else initial
    src = make_source(spec)
    transcript = engine.run(alg, src, spec.params(), start, spec.steps,
                            observer=observer)
    return transcript, alg, src


def _offline_cost(spec: RunSpec, transcript: engine.Transcript) -> Optional[int]:
    requests = transcript.requests()
    initial = initial_for(spec)
    if spec.oracle == "dp":
        total, _ = offline.optimal_cost(requests, spec.params(), initial)
        return total
    if spec.oracle == "static":
        total, _ = offline.static_optimal(requests, spec.params(), initial)
        return total
    return None


def cmd_run(spec: RunSpec) -> dict:
    transcript, alg, src = execute(spec)
    ledger = transcript.ledger
    report = {
        "alg": spec.alg, "source": spec.source,
        "n": spec.n, "k": spec.k, "l": spec.l,
        "alpha": spec.alpha, "delta": spec.delta, "lambda": spec.lam,
        "seed": spec.seed, "steps_requested": spec.steps,
        "steps_served": len(transcript.steps),
        "on_comm": ledger.comm_total, "on_mig": ledger.mig_total,
        "on_total": ledger.total,
        "oracle": spec.oracle,
        "off_total": None, "ratio": None, "ratio_decimal": None,
        "steps_path": None,
    }
    if spec.oracle != "none":
        try:
            off = _offline_cost(spec, transcript)
        except TooLarge:
            off = None
        if off is not None:
            report["off_total"] = off
            r = engine.ratio(ledger.total, off)
            report["ratio"] = engine.format_ratio(r)
            if isinstance(r, Fraction):
                report["ratio_decimal"] = float(r)
            elif r is engine.INFINITE:
                report["ratio_decimal"] = float("inf")
    if hasattr(src, "profile"):
        report["profile"] = list(src.profile)
        if spec.source == "pair_chase" and src.profile:
            never, first, each = offline.reference_strategies_k2(
                src.profile, spec.alpha)
            report["reference_costs"] = {
                "never_move": never, "move_first": first,
                "move_each_phase": each}
    if isinstance(alg, ComponentRepartitioner):
        errs = alg.check_invariants()
        report["invariants"] = {"status": "pass" if not errs else "fail",
                                "violations": errs}
    if spec.out:
        steps_path = spec.out + ".steps"
        with open(steps_path, "w") as fh:
            for line in transcript.step_lines():
                fh.write(line + "\n")
        report["steps_path"] = steps_path
        with open(spec.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


class _VerifyAbort(Exception):
    """Stops the engine loop once a per-step check has failed."""


def cmd_verify(spec: RunSpec, tamper: Optional[Callable] = None) -> Tuple[int, str]:
    """Per-step invariant run; returns (exit_code, text report).

    `tamper` is a test seam: called as tamper(t, alg) before each step's
    checks, letting tests corrupt state at a chosen step.
    """
    if spec.alg not in ("greedy", "components"):
        raise ValueError("verify covers greedy and components runs")
    failure: List[str] = []

    initial = initial_for(spec)
    alg = make_algorithm(spec, initial)
    start = alg.start if spec.alg == "components" else initial
    src = make_source(spec)

    def observer(t, config, req, comm, mig):
        if tamper is not None:
            tamper(t, alg)
        if isinstance(alg, ComponentRepartitioner):
            errs = alg.check_invariants(config)
            if not errs and len(alg.residual_merge_set()) > 1:
                errs = ["qualifying merge set survived the step"]
            if errs:
                failure.append("step %d\n%s\n%s"
                               % (t, "\n".join(errs), alg.dump_state()))
        else:
            cap = alg.lam * spec.alpha
            hot = [c for c, w in alg.out_counts.items() if w > cap]
            if hot:
                failure.append(
                    "step %d\ncluster counters over %d: %s"
                    % (t, cap, sorted(hot)))
        if failure:
            # stepping a corrupted algorithm any further can only crash
            raise _VerifyAbort

    try:
        transcript = engine.run(alg, src, spec.params(), start, spec.steps,
                                observer=observer)
    except _VerifyAbort:
        return 1, "FAIL %s\n%s" % (spec.alg, failure[0])
    return 0, "PASS %s: %d steps, all per-step checks hold" % (
        spec.alg, len(transcript.steps))


SWEEP_FIELDS = ("alg", "source", "n", "k", "l", "alpha", "seed",
                "on_cost", "off_cost", "ratio", "error")


def cmd_sweep(base: RunSpec, ks: List[int], ls: List[int],
              alphas: List[int], seeds: List[int]) -> str:
    """One run per (k, l, alpha, seed) cell; returns CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SWEEP_FIELDS)
    cells = sorted((k, l, a, s) for k in ks for l in ls
                   for a in alphas for s in seeds)
    for k, l, a, seed in cells:
        row = {"alg": base.alg, "source": base.source, "n": k * l, "k": k,
               "l": l, "alpha": a, "seed": seed, "on_cost": "",
               "off_cost": "", "ratio": "", "error": ""}
        spec = RunSpec(alg=base.alg, source=base.source, n=k * l, k=k, l=l,
                       alpha=a, delta=base.delta, lam=base.lam, seed=seed,
                       steps=base.steps, oracle=base.oracle, trace=base.trace,
                       p_in=base.p_in, p_out=base.p_out)
        try:
            spec.validate()
            transcript, _, _ = execute(spec)
            row["on_cost"] = transcript.ledger.total
            try:
                off = _offline_cost(spec, transcript)
            except TooLarge:
                off = None
            if off is not None:
                row["off_cost"] = off
                row["ratio"] = engine.format_ratio(
                    engine.ratio(transcript.ledger.total, off))
        except Exception as exc:
            row["error"] = "%s: %s" % (type(exc).__name__, exc)
        writer.writerow([row[f] for f in SWEEP_FIELDS])
    return buf.getvalue()


def cmd_compare(spec: RunSpec, algs: List[str]) -> dict:
    """Run several algorithms against fresh copies of the same source."""
    runs = {}
    for alg in algs:
        cell = RunSpec(alg=alg, source=spec.source, n=spec.n, k=spec.k,
                       l=spec.l, alpha=spec.alpha,
                       delta=4 if alg == "components" else spec.delta,
                       lam=spec.lam, seed=spec.seed, steps=spec.steps,
                       oracle=spec.oracle, trace=spec.trace,
                       p_in=spec.p_in, p_out=spec.p_out)
        cell.validate()
        report = cmd_run(cell)
        runs[alg] = {key: report[key] for key in
                     ("on_total", "on_comm", "on_mig", "off_total", "ratio")}
    return {"source": spec.source, "n": spec.n, "k": spec.k, "l": spec.l,
            "alpha": spec.alpha, "seed": spec.seed, "steps": spec.steps,
            "runs": runs}


# ---------------------------------------------------------------------------
# argument plumbing


def _read_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("config line %r is not key=value" % line)
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


_INT_KEYS = ("n", "k", "l", "alpha", "delta", "seed", "steps")
_FLOAT_KEYS = ("p_in", "p_out")


def build_spec(args: argparse.Namespace) -> RunSpec:
    merged = {}
    if args.config:
        merged.update(_read_config(args.config))
    for key in ("alg", "source", "n", "k", "l", "alpha", "delta", "seed",
                "steps", "oracle", "trace", "out", "p_in", "p_out"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if getattr(args, "lam", None) is not None:
        merged["lam"] = args.lam
    elif "lambda" in merged:
        merged["lam"] = merged.pop("lambda")
    for key in _INT_KEYS + ("lam",):
        if key in merged:
            merged[key] = int(merged[key])
    for key in _FLOAT_KEYS:
        if key in merged:
            merged[key] = float(merged[key])
    for key in ("alg", "source", "n", "k", "l"):
        if key not in merged:
            raise ValueError("missing required setting %r" % key)
    if "delta" not in merged:
        merged["delta"] = 4 if merged["alg"] == "components" else 1
    spec = RunSpec(**merged)
    spec.validate()
    return spec


def _int_list(text: str) -> List[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--alg", help="one of %s; compare takes a comma list"
                   % ", ".join(ALGORITHMS))
    p.add_argument("--source", choices=SOURCES)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--alpha", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--lambda", dest="lam", type=int,
                   help="greedy trigger multiplier; phase count for pair_chase")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--oracle", choices=("dp", "static", "none"))
    p.add_argument("--trace", help="trace file (requests, or paging items)")
    p.add_argument("--out", help="output path (report JSON / CSV)")
    p.add_argument("--config", help="key=value file; flags override it")


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="repart",
        description="online repartitioning testbench: run, verify, sweep, compare")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "verify", "compare"):
        _add_common(sub.add_parser(name))
    sweep = sub.add_parser("sweep")
    _add_common(sweep)
    sweep.add_argument("--ks", type=_int_list, help="comma list of k values")
    sweep.add_argument("--ls", type=_int_list, help="comma list of l values")
    sweep.add_argument("--alphas", type=_int_list)
    sweep.add_argument("--seeds", type=_int_list)
    args = parser.parse_args(argv)

    try:
        if args.command == "sweep":
            if args.k is None and args.ks:
                args.k = args.ks[0]
            if args.l is None and args.ls:
                args.l = args.ls[0]
            if args.alpha is None and args.alphas:
                args.alpha = args.alphas[0]
            if args.seed is None and args.seeds:
                args.seed = args.seeds[0]
            if args.n is None and args.k and args.l:
                args.n = args.k * args.l
            base = build_spec(args)
            text = cmd_sweep(base, args.ks or [base.k], args.ls or [base.l],
                             args.alphas or [base.alpha],
                             args.seeds or [base.seed])
            if base.out:
                with open(base.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return 0
        if args.command == "verify":
            spec = build_spec(args)
            code, text = cmd_verify(spec)
            print(text)
            return code
        if args.command == "compare":
            algs = (args.alg or "greedy").split(",")
            args.alg = algs[0]
            spec = build_spec(args)
            report = cmd_compare(spec, algs)
            print(json.dumps(report, indent=2, sort_keys=True))
            return 0
        spec = build_spec(args)
        report = cmd_run(spec)
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0
    except (ValueError, engine.AdversaryStuck) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
