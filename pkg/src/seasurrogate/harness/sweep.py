"""Grid sweep over architectures and data budgets.

Every grid point trains one surrogate on a re-split copy of the dataset and
scores it on the test split.  Finished rows are appended to a JSON-lines
journal as they complete, so an interrupted sweep picks up where it stopped.
"""

import itertools
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .. import io
from ..errors import ConfigError, SeaSurrogateError
from .dataset import normalize
from .training import TrainConfig, evaluate, train_surrogate

log = logging.getLogger(__name__)

GRID_KEYS = ("cell_kinds", "layers", "neurons", "train_steps", "num_sequences", "train_fractions")
COLUMNS = ("cell_kind", "layers", "neurons", "train_steps", "num_sequences", "train_fraction",
           "status", "overall_rse", "overall_rse_sum", "per_dof", "cases", "error")


def expand_grid(grid, dataset):
    """All combinations as row dicts, in a fixed order."""
    unknown = set(grid) - set(GRID_KEYS)
    if unknown:
        raise ConfigError(f"sweep: unknown grid keys {sorted(unknown)}")
    axes = {
        "cell_kinds": list(grid.get("cell_kinds", ["lstm"])),
        "layers": list(grid.get("layers", [1])),
        "neurons": list(grid.get("neurons", [20])),
        "train_steps": list(grid.get("train_steps", [1000])),
        "num_sequences": list(grid.get("num_sequences", [len(dataset.train_indices)])),
        "train_fractions": list(grid.get("train_fractions", [dataset.train_fraction])),
    }
    if any(len(v) == 0 for v in axes.values()):
        raise ConfigError("sweep: every grid axis needs at least one value")
    rows = []
    for kind, layers, neurons, steps, nseq, frac in itertools.product(*axes.values()):
        rows.append({"cell_kind": kind, "layers": int(layers), "neurons": int(neurons),
                     "train_steps": int(steps), "num_sequences": int(nseq), "train_fraction": float(frac)})
    return rows


def row_key(row):
    return (row["cell_kind"], row["layers"], row["neurons"], row["train_steps"], row["num_sequences"],
            round(row["train_fraction"], 12))


def run_row(dataset, row, base_config):
    """Train and evaluate one grid point; never raises for model-level failures."""
    started = time.perf_counter()
    out = dict(row)
    try:
        ds = normalize(dataset.resplit(train_fraction=row["train_fraction"], num_train=row["num_sequences"]))
        cfg = replace(base_config, cell_kind=row["cell_kind"], layers=row["layers"], neurons=row["neurons"],
                      train_steps=row["train_steps"])
        result = evaluate(train_surrogate(ds, cfg), ds, "test")
        out.update(status="ok", overall_rse=result.overall, overall_rse_sum=result.overall_sum,
                   per_dof=result.per_dof, cases=result.cases, error="")
    except (SeaSurrogateError, ValueError, ArithmeticError) as exc:
        out.update(status="failed", overall_rse=None, overall_rse_sum=None, per_dof={}, cases=[],
                   error=f"{type(exc).__name__}: {exc}")
    out["wall_time"] = time.perf_counter() - started
    return out


@dataclass
class SweepReport:
    rows: list

    def sorted_rows(self):
        ok = sorted((r for r in self.rows if r["status"] == "ok"), key=lambda r: (r["overall_rse"], row_key(r)))
        bad = sorted((r for r in self.rows if r["status"] != "ok"), key=row_key)
        return ok + bad

    def find(self, **match):
        return [r for r in self.rows if all(r[k] == v for k, v in match.items())]

    def to_csv(self, path):
        """Scores only; wall times stay in the journal so the CSV is reproducible."""
        rows = []
        for r in self.sorted_rows():
            rows.append([r["cell_kind"], r["layers"], r["neurons"], r["train_steps"], r["num_sequences"],
                         r["train_fraction"], r["status"], r["overall_rse"], r["overall_rse_sum"],
                         json.dumps(r["per_dof"], sort_keys=True), json.dumps(r["cases"], sort_keys=True),
                         r["error"]])
        io.write_rows(path, list(COLUMNS), rows)

    def table(self):
        head = f"{'cell':<8}{'layers':>7}{'neurons':>8}{'steps':>7}{'seqs':>5}{'frac':>7}  {'overall':>9}  per-DOF"
        lines = [head, "-" * len(head)]
        for r in self.sorted_rows():
            if r["status"] == "ok":
                dofs = " ".join(f"{d}={v:.4f}" for d, v in r["per_dof"].items())
                score = f"{r['overall_rse']:9.4f}"
            else:
                dofs, score = r["error"], f"{'failed':>9}"
            lines.append(f"{r['cell_kind']:<8}{r['layers']:>7}{r['neurons']:>8}{r['train_steps']:>7}"
                         f"{r['num_sequences']:>5}{r['train_fraction']:>7.3f}  {score}  {dofs}")
        return "\n".join(lines)


def _read_journal(path):
    done = {}
    if path is None or not Path(path).exists():
        return done
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                try:
                    row = json.loads(line)
                except json.JSONDecodeError:  # torn final line from an interrupted run
                    continue
                done[row_key(row)] = row
    return done


def architecture_sweep(dataset, grid, base_config=None, workers=1, journal=None, resume=False):
    """Train and score every grid combination.

    Parameters
    ----------
    dataset : Dataset
        Raw (un-normalized) dataset; statistics are refitted per row.
    grid : dict
        Lists under any of ``cell_kinds, layers, neurons, train_steps,
        num_sequences, train_fractions``.
    base_config : TrainConfig, optional
        Everything not varied by the grid, including the seed.
    workers : int
        Rows trained concurrently.
    journal : path, optional
        JSON-lines file receiving each finished row.
    resume : bool
        Skip rows already present in ``journal``.
    """
    base_config = base_config or TrainConfig()
    rows = expand_grid(grid, dataset)
    done = _read_journal(journal) if resume else {}
    if journal is not None and not resume:
        Path(journal).parent.mkdir(parents=True, exist_ok=True)
        Path(journal).write_text("")
    pending = [r for r in rows if row_key(r) not in done]
    log.info("sweep: %d rows, %d already done", len(rows), len(rows) - len(pending))
    lock = threading.Lock()

    def work(row):
        result = run_row(dataset, row, base_config)
        if journal is not None:
            with lock, open(journal, "a") as fh:
                fh.write(json.dumps(result, sort_keys=True) + "\n")
        return result

    if workers > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, pending))
    else:
        results = [work(r) for r in pending]
    for r in results:
        done[row_key(r)] = r
    return SweepReport([done[row_key(r)] for r in rows])
