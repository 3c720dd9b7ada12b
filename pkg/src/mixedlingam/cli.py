"""Command-line entry point: ``mixedlingam {estimate,simulate,check-gaussian}``."""

from __future__ import annotations

import argparse
import sys
import time
from typing import Optional, Sequence

from .dists import InvalidArgument, RngStream
from .marginal import CellFailure
from .model import ErrorFamily, PriorFamily
from .report import (JsonLines, PairReport, all_pairs, format_pair_table, format_trials, gaussianity_to_dict,
                     ordering_to_dict, read_table, summary_to_dict, trial_to_dict)
from .search import GridSpec, aggregate_ordering, estimate_direction, gaussianity_check
from .synth import GenConfig, run_experiment

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixedlingam",
                                description="Causal direction between two variables under latent confounding.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo draws per grid cell (default 1000)")
    common.add_argument("--prior", choices=["t", "gaussian"], default="t", help="individual-effect prior")
    common.add_argument("--errors", choices=["laplace", "gaussian"], default="laplace", help="error model")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="worker threads for grid cells")
    common.add_argument("--fast", action="store_true", help="reduced grid and samples (non-canonical)")
    common.add_argument("--crn", action="store_true", help="share random numbers between the two models")
    common.add_argument("--format", choices=["table", "jsonl"], default="table")
    common.add_argument("--timing", action="store_true", help="include wall-clock seconds in JSON output")

    pairs = argparse.ArgumentParser(add_help=False)
    pairs.add_argument("--input", required=True, help="CSV file with a header row")
    sel = pairs.add_mutually_exclusive_group(required=True)
    sel.add_argument("--pair", help="two column names, comma separated")
    sel.add_argument("--all-pairs", action="store_true")

    sub.add_parser("estimate", parents=[common, pairs], help="estimate causal direction for CSV columns")
    sub.add_parser("check-gaussian", parents=[common, pairs], help="compare Laplace and Gaussian error models")
    sim = sub.add_parser("simulate", parents=[common], help="recovery rate on synthetic pairs")
    sim.add_argument("--trials", type=int, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--q", type=int, required=True, help="number of latent confounders")
    return p


def grid_from_args(args) -> GridSpec:
    kw = dict(prior_family=PriorFamily(args.prior), error_family=ErrorFamily(args.errors),
              crn=args.crn, threads=args.threads)
    if args.samples is not None:
        kw["samples"] = args.samples
    return GridSpec.fast(**kw) if args.fast else GridSpec(**kw)


def _load(args):
    """Read the input and list the pairs to analyse."""
    if args.all_pairs:
        table = read_table(args.input)
        return table, all_pairs(table.names)
    parts = [s.strip() for s in args.pair.split(",")]
    if len(parts) != 2 or not all(parts) or parts[0] == parts[1]:
        raise InvalidArgument("--pair needs two distinct column names, e.g. --pair x1,x2")
    return read_table(args.input, parts), [(parts[0], parts[1])]


def _pair_seed(seed: int, index: int) -> int:
    return RngStream(seed, (index,)).derive_seed()


def _profile(spec: GridSpec) -> dict:
    return {"canonical": spec.is_canonical(), "samples": spec.samples, "tau_fracs": list(spec.tau_fracs),
            "sigma12": list(spec.sigma12_values), "prior": spec.prior_family.value,
            "errors": spec.error_family.value, "crn": spec.crn}


def cmd_estimate(args, spec: GridSpec) -> str:
    table, pairs = _load(args)
    reports, timings, results = [], [], []
    for k, (a, b) in enumerate(pairs):
        data = table.pair(a, b)
        t0 = time.perf_counter()
        est = estimate_direction(data, spec, _pair_seed(args.seed, k))
        timings.append(time.perf_counter() - t0)
        reports.append(PairReport.from_estimate(data, est))
        results.append(((a, b), est))
    ordering = aggregate_ordering(results) if args.all_pairs else None

    if args.format == "jsonl":
        out = JsonLines("estimate", args.seed)
        out.add("profile", _profile(spec))
        for r, sec in zip(reports, timings):
            payload = r.to_dict()
            if args.timing:
                payload["seconds"] = sec
            out.add("pair", payload)
        if ordering is not None:
            out.add("ordering", ordering_to_dict(ordering))
        return out.dump()
    text = _banner(spec) + format_pair_table(reports, timings)
    if ordering is not None:
        text += (f"\nordering (pairwise win count, heuristic): {' > '.join(ordering.labels)}"
                 f"{'  [ties broken alphabetically]' if ordering.tied else ''}"
                 f"{'  [cyclic pairwise results]' if ordering.cyclic else ''}\n")
    return text


def cmd_check_gaussian(args, spec: GridSpec) -> str:
    table, pairs = _load(args)
    out = JsonLines("check-gaussian", args.seed)
    out.add("profile", _profile(spec))
    lines = [_banner(spec)]
    for k, (a, b) in enumerate(pairs):
        data = table.pair(a, b)
        chk = gaussianity_check(data, spec, _pair_seed(args.seed, k))
        rec = gaussianity_to_dict((a, b), chk)
        out.add("gaussianity", rec)
        flag = "GAUSSIAN ERRORS PREFERRED: direction unreliable" if chk.gaussian_preferred else "non-Gaussian errors preferred"
        lines.append(f"({a}, {b})  laplace {chk.laplace_best_log_ml:.2f}  gaussian {chk.gaussian_best_log_ml:.2f}  {flag}\n")
    return out.dump() if args.format == "jsonl" else "".join(lines)


def cmd_simulate(args, spec: GridSpec) -> str:
    cfg = GenConfig(n=args.n, q=args.q)
    rep = run_experiment(args.trials, cfg, spec, args.seed)
    if args.format == "jsonl":
        out = JsonLines("simulate", args.seed)
        out.add("profile", _profile(spec))
        for r in rep.records:
            out.add("trial", trial_to_dict(r, args.timing))
        out.add("summary", summary_to_dict(rep))
        return out.dump()
    return _banner(spec) + format_trials(rep)


def _banner(spec: GridSpec) -> str:
    if spec.is_canonical():
        return ""
    return (f"# non-canonical profile: samples={spec.samples}, tau fractions={list(spec.tau_fracs)}, "
            f"sigma12={list(spec.sigma12_values)}\n")


COMMANDS = {"estimate": cmd_estimate, "check-gaussian": cmd_check_gaussian, "simulate": cmd_simulate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed < 0:
            raise InvalidArgument("--seed must be non-negative")
        spec = grid_from_args(args)
        text = COMMANDS[args.command](args, spec)
    except (InvalidArgument, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CellFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if isinstance(exc.__cause__, InvalidArgument) else EXIT_NUMERIC
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
