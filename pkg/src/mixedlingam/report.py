"""CSV ingestion and per-pair / experiment reports (human table and JSON lines)."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .dists import InvalidArgument
from .model import Direction, PairDataset
from .search import DirectionEstimate, GaussianityCheck, Ordering
from .synth import SuccessReport, TrialRecord

SCHEMA_VERSION = 1
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none", "."})


@dataclass
class Table:
    """Numeric columns read from a CSV file; missing cells are NaN."""

    columns: dict[str, np.ndarray]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def pair(self, a: str, b: str) -> PairDataset:
        """Listwise-deleted pair; ``rejected_rows`` counts dropped rows."""
        for name in (a, b):
            if name not in self.columns:
                raise InvalidArgument(f"column {name!r} not found")
        x = np.column_stack([self.columns[a], self.columns[b]])
        keep = np.all(np.isfinite(x), axis=1)
        if not keep.any():
            raise InvalidArgument(f"no complete rows for pair ({a}, {b})")
        return PairDataset(x[keep], (a, b), int((~keep).sum()))


def _parse_cell(cell: str, column: str, row: int) -> float:
    s = cell.strip()
    if s.lower() in MISSING_TOKENS:
        return math.nan
    try:
        return float(s)
    except ValueError:
        raise InvalidArgument(f"column {column!r} is not numeric (row {row}: {cell!r})") from None


def read_table(path, columns: Optional[Sequence[str]] = None) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidArgument(f"{path}: empty file") from None
        wanted = list(header) if columns is None else list(columns)
        for name in wanted:
            if name not in header:
                raise InvalidArgument(f"column {name!r} not found in {path}")
        idx = {name: header.index(name) for name in wanted}
        data: dict[str, list[float]] = {name: [] for name in wanted}
        for r, row in enumerate(reader, start=2):
            if not row:
                continue
            for name, j in idx.items():
                data[name].append(_parse_cell(row[j] if j < len(row) else "", name, r))
    return Table({k: np.asarray(v, dtype=float) for k, v in data.items()})


def ingest_csv(path, columns: Sequence[str]):
    """Read the named columns; two names give a :class:`PairDataset`."""
    table = read_table(path, columns)
    if len(columns) == 2:
        return table.pair(*columns)
    return table


def all_pairs(names: Sequence[str]) -> list[tuple[str, str]]:
    return list(itertools.combinations(names, 2))


@dataclass(frozen=True)
class PairReport:
    """One analysed pair, in the layout of an estimated-hyperparameter table."""

    labels: tuple[str, str]
    direction: str  # "M1", "M2" or "undecided"
    decided: bool
    log_ml_m1: float
    log_ml_m2: float
    tau1_frac: float
    tau2_frac: float
    tau1: float
    tau2: float
    sigma12: float
    mc_se: float
    n: int
    rejected_rows: int = 0

    @classmethod
    def from_estimate(cls, data: PairDataset, est: DirectionEstimate) -> "PairReport":
        h = est.best_hyper
        fr = h.fracs or (math.nan, math.nan)
        return cls(data.labels, est.winner.value if est.decided else "undecided", est.decided,
                   est.best_for(Direction.M1).log_ml, est.best_for(Direction.M2).log_ml,
                   fr[0], fr[1], h.tau_indvdl1, h.tau_indvdl2, h.sigma12, est.winning_cell.mc_se,
                   data.n, data.rejected_rows)

    @property
    def arrow(self) -> str:
        a, b = self.labels
        if self.direction == "M1":
            return f"{a} -> {b}"
        if self.direction == "M2":
            return f"{a} <- {b}"
        return f"{a} ?? {b}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["labels"] = list(self.labels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PairReport":
        kw = {f.name: d[f.name] for f in fields(cls)}
        kw["labels"] = tuple(kw["labels"])
        return cls(**kw)


def tau_label(frac: float, var_name: str) -> str:
    if frac == 0:
        return "0"
    return f"{frac:.1f}^2*var({var_name})"


def trial_to_dict(r: TrialRecord, timing: bool = False) -> dict:
    d = {
        "index": r.index,
        "true_direction": r.true_direction.value,
        "estimated": r.estimated.value if r.estimated is not None else None,
        "success": r.success,
        "decided": r.decided,
        "tau_fracs": list(r.tau_fracs),
        "sigma12": r.sigma12,
        "best_log_ml": r.best_log_ml,
        "runner_up_log_ml": r.runner_up_log_ml,
        "err_sources": list(r.err_sources),
        "conf_sources": list(r.conf_sources),
    }
    if timing:
        d["seconds"] = r.seconds
    return d


def summary_to_dict(rep: SuccessReport) -> dict:
    return {"trials": rep.trials, "successes": rep.successes, "n": rep.n, "q": rep.q,
            "percent": rep.percent, "se_percent": round(rep.se_percent, 2)}


def gaussianity_to_dict(labels, chk: GaussianityCheck) -> dict:
    w = chk.laplace.winner
    return {"labels": list(labels), "laplace_best_log_ml": chk.laplace_best_log_ml,
            "gaussian_best_log_ml": chk.gaussian_best_log_ml,
            "gaussian_preferred": chk.gaussian_preferred,
            "laplace_direction": w.value if chk.laplace.decided else "undecided"}


def ordering_to_dict(o: Ordering) -> dict:
    return {"order": o.labels, "wins": o.wins, "tied": o.tied, "cyclic": o.cyclic,
            "method": "pairwise win count (heuristic)"}


class JsonLines:
    """Accumulates schema-versioned JSON records; nothing is written until :meth:`dump`."""

    def __init__(self, command: str, seed: int):
        self.command = command
        self.seed = seed
        self.lines: list[str] = []

    def add(self, kind: str, payload: dict) -> None:
        rec = {"schema_version": SCHEMA_VERSION, "command": self.command, "seed": self.seed,
               "kind": kind, "payload": payload}
        self.lines.append(json.dumps(rec, sort_keys=True))

    def dump(self) -> str:
        return "".join(line + "\n" for line in self.lines)


def parse_jsonl(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def format_pair_table(reports: Sequence[PairReport], timings: Optional[Sequence[float]] = None) -> str:
    head = ["pair", "estimated", "tau1", "tau2", "sigma12", "logML(M1)", "logML(M2)", "mc_se", "n"]
    if timings is not None:
        head.append("seconds")
    rows = []
    for i, r in enumerate(reports):
        a, b = r.labels
        row = [f"({a}, {b})", r.arrow, tau_label(r.tau1_frac, a), tau_label(r.tau2_frac, b),
               f"{r.sigma12:+.1f}", f"{r.log_ml_m1:.2f}", f"{r.log_ml_m2:.2f}", f"{r.mc_se:.3f}",
               f"{r.n}" + (f" (-{r.rejected_rows})" if r.rejected_rows else "")]
        if timings is not None:
            row.append(f"{timings[i]:.1f}")
        rows.append(row)
    return _render(head, rows)


def format_trials(rep: SuccessReport) -> str:
    head = ["trial", "truth", "estimated", "ok", "tau fracs", "sigma12", "margin", "seconds"]
    rows = [[str(r.index), r.true_direction.value, r.estimated.value if r.estimated else "undecided",
             "yes" if r.success else "no", f"{r.tau_fracs[0]:.1f},{r.tau_fracs[1]:.1f}", f"{r.sigma12:+.1f}",
             f"{r.best_log_ml - r.runner_up_log_ml:.2f}", f"{r.seconds:.1f}"] for r in rep.records]
    out = _render(head, rows)
    return out + (f"\nsuccesses: {rep.successes}/{rep.trials} = {rep.percent:.1f}% "
                  f"(se {rep.se_percent:.2f}) at n={rep.n}, Q={rep.q}\n")


def _render(head: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(head)]
    fmt = "  ".join("{:<%d}" % w for w in widths)
    lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*r) for r in rows]
    return "\n".join(lines) + "\n"
