"""Experiment runner and ``bench`` command line.

One experiment row compares, on a single random instance, the exact dense
optimum with the optimum on the sparsified (and optionally repaired) graph.
Rows are appended to a CSV file one complete line at a time, so an interrupted
run can be resumed: rows already present, keyed by ``(n, k, trial)``, are
skipped.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import statistics
import sys
import time
from collections import defaultdict
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .graph import DenseBipartiteGraph, EdgeListError, generate_uniform, read_edge_list
from .matching import InvariantViolation, max_weight_matching
from .sparsify import Normalization, SparsifyParams, repair_feasibility, sparsify

log = logging.getLogger(__name__)

RATIO_SLACK = 1e-9


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple[int, ...] = (500, 1000)
    ks: tuple[int, ...] = (1, 5, 10, 20, 50)
    trials: int = 5
    base_seed: int = 0
    normalization: Normalization = Normalization.EXACT
    repair: bool = True
    output_path: str = "results.csv"
    batch_growth: int | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.sizes:
            raise ConfigError("sizes must be nonempty")
        if not self.ks:
            raise ConfigError("ks must be nonempty")
        if min(self.sizes) < 2:
            raise ConfigError(f"every n must be >= 2, got {min(self.sizes)}")
        if min(self.ks) < 1:
            raise ConfigError(f"every k must be >= 1, got {min(self.ks)}")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.base_seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        try:
            object.__setattr__(self, "normalization", Normalization(self.normalization))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class ExperimentRow:
    n: int
    k: int
    trial: int
    seed: int
    optimal_weight: float
    heuristic_weight: float
    ratio: float
    retained_edges: int
    expected_edges: float
    clamped_edges: int
    repair_invoked: bool
    cardinality: int
    dense_solve_ms: float
    sparse_pipeline_ms: float
    speedup: float

    @property
    def key(self) -> tuple[int, int, int]:
        return self.n, self.k, self.trial


CSV_FIELDS = [f.name for f in fields(ExperimentRow)]
TIMING_FIELDS = ("dense_solve_ms", "sparse_pipeline_ms", "speedup")


def trial_seed(base_seed: int, n: int, trial: int) -> int:
    """Instance seed for ``(n, trial)``; independent of k, so every k sees the same graph.

    Uses numpy's SeedSequence hash of the entropy tuple ``(base_seed, n, trial)``.
    """
    state = np.random.SeedSequence([base_seed, n, trial]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def sparsify_seed(instance_seed: int, k: int) -> int:
    state = np.random.SeedSequence([instance_seed, k]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_row(record: dict[str, str]) -> ExperimentRow:
    values = []
    for f in fields(ExperimentRow):
        raw = record[f.name]
        if f.type == "bool":
            if raw not in ("true", "false"):
                raise ValueError(f"bad boolean {raw!r}")
            values.append(raw == "true")
        elif f.type == "int":
            values.append(int(raw))
        else:
            values.append(float(raw))
    return ExperimentRow(*values)


def row_to_csv(row: ExperimentRow) -> str:
    return ",".join(_format(v) for v in astuple(row)) + "\n"


def read_rows(path: str | os.PathLike) -> list[ExperimentRow]:
    """Rows of a results file; a trailing partial line is ignored."""
    text = Path(path).read_text()
    if not text:
        return []
    if not text.endswith("\n"):
        text = text[: text.rfind("\n") + 1]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_FIELDS:
        raise ValueError(f"{path}: unexpected CSV header {reader.fieldnames}")
    return [_parse_row(rec) for rec in reader]


def _prepare_output(path: Path) -> list[ExperimentRow]:
    """Create or validate the results file; drop any torn final line."""
    if not path.exists() or path.stat().st_size == 0:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(",".join(CSV_FIELDS) + "\n")
        return []
    text = path.read_text()
    if not text.endswith("\n"):
        with path.open("r+") as fh:
            fh.truncate(len(text[: text.rfind("\n") + 1].encode()))
    return read_rows(path)


def _check_row(row: ExperimentRow) -> None:
    if not 0.0 <= row.ratio <= 1.0 + RATIO_SLACK:
        raise InvariantViolation(f"ratio {row.ratio!r} outside [0, 1 + {RATIO_SLACK}] at {row.key}")
    if row.cardinality > row.n:
        raise InvariantViolation(f"cardinality {row.cardinality} exceeds n at {row.key}")


def run_trial(cfg: ExperimentConfig, n: int, trial: int, ks: Sequence[int]) -> list[ExperimentRow]:
    """All rows for one instance: a single dense solve shared by every k."""
    seed = trial_seed(cfg.base_seed, n, trial)
    g = generate_uniform(n, seed)
    optimum, dense_stats = max_weight_matching(g)
    dense_ms = dense_stats.wall_time * 1e3

    rows = []
    for k in ks:
        params = SparsifyParams(k=k, normalization=cfg.normalization, seed=sparsify_seed(seed, k))
        start = time.perf_counter()
        sparse, report = sparsify(g, params)
        repaired = repair_feasibility(g, sparse, cfg.batch_growth) if cfg.repair else sparse
        heuristic, _ = max_weight_matching(repaired)
        sparse_ms = (time.perf_counter() - start) * 1e3

        opt = optimum.total_weight
        row = ExperimentRow(
            n=n, k=k, trial=trial, seed=seed,
            optimal_weight=opt,
            heuristic_weight=heuristic.total_weight,
            ratio=heuristic.total_weight / opt if opt > 0 else 1.0,
            retained_edges=report.retained_count,
            expected_edges=report.expected_count,
            clamped_edges=report.clamped_edges,
            repair_invoked=repaired is not sparse,
            cardinality=heuristic.cardinality,
            dense_solve_ms=dense_ms,
            sparse_pipeline_ms=sparse_ms,
            speedup=dense_ms / sparse_ms if sparse_ms > 0 else math.inf,
        )
        _check_row(row)
        rows.append(row)
    return rows


def _warm_up() -> None:
    # triggers (or loads the cached) JIT compilation outside any timed region
    max_weight_matching(DenseBipartiteGraph(np.eye(2)))


def _run_task(args):
    cfg, n, trial, ks = args
    _warm_up()
    return run_trial(cfg, n, trial, ks)


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    """Run the grid ``sizes x ks x trials``, appending rows to ``cfg.output_path``.

    Returns the rows of the grid in (n, trial, k) order, including rows found
    in the file from an earlier run.
    """
    path = Path(cfg.output_path)
    try:
        existing = _prepare_output(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot use output {path}: {exc}") from exc
    done = {row.key: row for row in existing}

    tasks = []
    for n in cfg.sizes:
        for trial in range(cfg.trials):
            ks = [k for k in cfg.ks if (n, k, trial) not in done]
            if ks:
                tasks.append((cfg, n, trial, ks))
    log.info("%d instances to run, %d rows already present", len(tasks), len(existing))

    try:
        out = path.open("a")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    with out:
        def emit(rows):
            for row in rows:
                # single writer, one write per row: the file never holds interleaved rows
                out.write(row_to_csv(row))
                out.flush()
                done[row.key] = row
                log.info("n=%d k=%d trial=%d ratio=%.4f speedup=%.1f",
                         row.n, row.k, row.trial, row.ratio, row.speedup)

        if cfg.workers == 1:
            _warm_up()
            for task in tasks:
                emit(run_trial(*task))
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for rows in pool.map(_run_task, tasks):
                    emit(rows)

    return [done[(n, k, t)] for n in cfg.sizes for t in range(cfg.trials) for k in cfg.ks]


def weight_profile_dump(g: DenseBipartiteGraph, k: int = 1) -> str:
    """Rank (1-based) and ``w**k`` of every edge, sorted ascending, one per line."""
    values = np.sort(np.power(g.weights.ravel(), k))
    ranks = np.arange(1, values.size + 1)
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack((ranks, values)), fmt=["%d", "%.17g"])
    return buf.getvalue()


def summary_cells(rows: Iterable[ExperimentRow]) -> dict[tuple[int, int], dict[str, float]]:
    """Per ``(n, k)`` means of ratio, speedup and optimum, and the repair rate."""
    groups: dict[tuple[int, int], list[ExperimentRow]] = defaultdict(list)
    for row in rows:
        groups[row.n, row.k].append(row)
    return {
        key: {
            "ratio": statistics.fmean(r.ratio for r in grp),
            "speedup": statistics.fmean(r.speedup for r in grp),
            "optimal": statistics.fmean(r.optimal_weight for r in grp),
            "repair_rate": sum(r.repair_invoked for r in grp) / len(grp),
            "trials": len(grp),
        }
        for key, grp in groups.items()
    }


def summarize(rows: Sequence[ExperimentRow]) -> str:
    """Tables with one row per n and one column per k: mean ratio, mean speedup, repair rate."""
    if not rows:
        raise ValueError("no rows to summarize")
    cells = summary_cells(rows)
    sizes = sorted({n for n, _ in cells})
    ks = sorted({k for _, k in cells})

    def table(title, metric, fmt, with_optimal=False):
        head = f"{'n':>6}" + (f" {'optimal':>10}" if with_optimal else "")
        head += "".join(f" {'k=' + str(k):>9}" for k in ks)
        lines = [title, head]
        for n in sizes:
            line = f"{n:>6}"
            if with_optimal:
                opt = statistics.fmean(c["optimal"] for (m, _), c in cells.items() if m == n)
                line += f" {opt:>10.3f}"
            for k in ks:
                cell = cells.get((n, k))
                line += f" {fmt(cell[metric]) if cell else '-':>9}"
            lines.append(line)
        return "\n".join(lines)

    return "\n\n".join([
        table("mean ratio (heuristic / optimal)", "ratio", lambda v: f"{v:.4f}", with_optimal=True),
        table("mean speedup (dense solve / sparse pipeline)", "speedup", lambda v: f"{v:.1f}x"),
        table("repair invocation rate", "repair_rate", lambda v: f"{v:.2f}"),
    ]) + "\n"


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")
    parser = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run the sparsification experiment grid")
    run.add_argument("--sizes", type=_int_list, default=[500, 1000])
    run.add_argument("--ks", type=_int_list, default=[1, 5, 10, 20, 50])
    run.add_argument("--trials", type=int, default=5)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--norm", choices=[m.value for m in Normalization], default="exact")
    run.add_argument("--repair", action=argparse.BooleanOptionalAction, default=True)
    run.add_argument("--batch-growth", type=int, default=None)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default="results.csv")

    summ = sub.add_parser("summarize", parents=[common], help="print per-(n, k) summary tables")
    summ.add_argument("csv")

    prof = sub.add_parser("profile", parents=[common], help="dump sorted w**k values of a random graph")
    prof.add_argument("--n", type=int, required=True)
    prof.add_argument("--k", type=int, default=1)
    prof.add_argument("--seed", type=int, default=0)
    prof.add_argument("--out", default="-")

    solve = sub.add_parser("solve", parents=[common], help="exact maximum-weight matching of an edge-list file")
    solve.add_argument("path")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg = ExperimentConfig(
                sizes=args.sizes, ks=args.ks, trials=args.trials, base_seed=args.seed,
                normalization=args.norm, repair=args.repair, output_path=args.out,
                batch_growth=args.batch_growth, workers=args.workers,
            )
            rows = run_experiment(cfg)
            print(summarize(rows), end="")
        elif args.command == "summarize":
            rows = read_rows(args.csv)
            if not rows:
                raise ConfigError(f"{args.csv}: no rows")
            print(summarize(rows), end="")
        elif args.command == "profile":
            text = weight_profile_dump(generate_uniform(args.n, args.seed), args.k)
            if args.out == "-":
                sys.stdout.write(text)
            else:
                Path(args.out).write_text(text)
        elif args.command == "solve":
            with open(args.path) as fh:
                g = read_edge_list(fh)
            matching, stats = max_weight_matching(g)
            print(f"weight {matching.total_weight!r}")
            print(f"cardinality {matching.cardinality} of {g.n}")
            for i, j in matching.pairs:
                print(i, j)
    except InvariantViolation as exc:
        print(f"bench: invariant violated: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, EdgeListError, OSError, ValueError) as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
