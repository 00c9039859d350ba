"""Command-line pipeline: spectrum, waves, oracle, dataset, train, eval, predict, sweep.

Each command reads a resolved run configuration, writes its artifacts under
``--out-dir`` together with ``resolved_config.json``, and exits with

* 0 on success
* 2 on invalid configuration
* 3 on I/O failure
* 4 when an upstream artifact is missing
* 5 on numerical failure (divergence, non-finite loss)
"""

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, config, io
from .errors import ArtifactIOError, ConfigError, SeaSurrogateError
from .functional import FunctionalConfig, train_functional
from .harness.dataset import Dataset, build_dataset, normalize
from .harness.sweep import architecture_sweep
from .harness.training import TrainConfig, evaluate, load_checkpoint, train_surrogate
from .kinematics import WaveField, probe_series
from .oracle import integrate, load_preset
from .spectra import (
    SeaStateParams,
    SpectralDiscretization,
    cumulative_energy_fraction,
    discretize_spectrum,
    energy_band,
    pm_spectral_density,
)

DISCRETIZATION_FILE = "discretization.bin"
CHECKPOINT_FILE = "checkpoint.bin"


class Context:
    """Resolved configuration plus derived paths shared by the commands."""

    def __init__(self, doc):
        self.doc = doc
        self.out = Path(doc["io"]["out_dir"])
        self.vessel = load_preset(doc["vessel_preset"])
        block = doc["sea_state"] if doc["sea_state"] is not None else self.vessel.sea_state
        self.sea = SeaStateParams.from_dict(block)

    @property
    def seed(self):
        return self.doc["seed"]

    @property
    def dataset_dir(self):
        return Path(self.doc["io"]["dataset_dir"] or self.out / "dataset")

    @property
    def checkpoint(self):
        return Path(self.doc["io"]["checkpoint"] or self.out / CHECKPOINT_FILE)

    def path(self, name):
        return self.out / name

    def discretization(self):
        """The run's discretization: reuse ``waves`` output when present."""
        saved = self.path(DISCRETIZATION_FILE)
        if saved.exists():
            return SpectralDiscretization.load(saved)
        d = self.doc["discretization"]
        return discretize_spectrum(self.sea, d["n_components"], d["omega_min"], d["omega_max"],
                                   seed=self.seed, energy_fraction=d["energy_fraction"])

    def probes(self):
        return self.doc["dataset"]["probes"] or self.vessel.input_probes


def _write_elevations(path, series):
    io.write_csv(path, ["time", *[f"probe{j}" for j in range(len(series))]],
                 [series[0].times, *[s.values for s in series]])


def cmd_spectrum(ctx, args):
    """Tabulate S(omega) and cumulative energy (m^2) across the energy band."""
    lo, hi = energy_band(ctx.sea, ctx.doc["discretization"]["energy_fraction"])
    omega = np.linspace(lo, hi, args.points)
    m0 = ctx.sea.hs**2 / 16.0
    out = Path(args.out) if args.out else ctx.path("spectrum.csv")
    io.write_csv(out, ["omega", "S", "cumulative_energy"],
                 [omega, pm_spectral_density(omega, ctx.sea), m0 * cumulative_energy_fraction(omega, ctx.sea)])
    return out


def cmd_waves(ctx, args):
    """Discretize the spectrum and record elevation at the input probes."""
    disc = ctx.discretization()
    disc.save(ctx.path(DISCRETIZATION_FILE))
    disc.to_csv(ctx.path("components.csv"))
    field = WaveField.from_sea_state(disc, ctx.sea)
    steps = args.steps or ctx.doc["dataset"]["steps"]
    series = probe_series(field, ctx.probes(), 0.0, ctx.vessel.dt, steps)
    _write_elevations(ctx.path("elevation.csv"), series)
    return ctx.path("elevation.csv")


def cmd_oracle(ctx, args):
    """Integrate the vessel model under the run's wave field."""
    field = WaveField.from_sea_state(ctx.discretization(), ctx.sea)
    steps = args.steps or ctx.doc["dataset"]["steps"]
    record = integrate(field, ctx.vessel, 0.0, ctx.vessel.dt, steps)
    record.to_csv(ctx.path("motion.csv"))
    return ctx.path("motion.csv")


def cmd_dataset(ctx, args):
    d, disc = ctx.doc["dataset"], ctx.doc["discretization"]
    seeds = d["seeds"]
    if seeds is None:
        seeds = [ctx.seed * 1000 + i for i in range(d["num_sequences"])]
    ds = build_dataset(ctx.sea, ctx.vessel, d["num_sequences"], d["steps"], seeds=seeds, probes=d["probes"],
                       n_components=disc["n_components"], num_test=d["num_test"],
                       train_fraction=d["train_fraction"], energy_fraction=disc["energy_fraction"])
    ds.save(ctx.dataset_dir)
    return ctx.dataset_dir / "manifest.json"


def _load_dataset(ctx):
    return Dataset.load(ctx.dataset_dir)


def cmd_train(ctx, args):
    ds = _load_dataset(ctx)
    t = dict(ctx.doc["training"])
    model = t.pop("model")
    if model == "functional":
        f = dict(ctx.doc["functional"], seed=ctx.seed)
        surrogate = train_functional(ds, FunctionalConfig(**f))
    else:
        surrogate = train_surrogate(normalize(ds), TrainConfig(seed=ctx.seed, **t))
    surrogate.save(ctx.checkpoint)
    curve = np.array(surrogate.loss_curve, dtype=float).reshape(-1, 2)
    io.write_csv(ctx.path("loss.csv"), ["step", "loss"], [curve[:, 0], curve[:, 1]])
    return ctx.checkpoint


def _write_eval(ctx, result, split):
    rows = [list(r) for r in result.rows()]
    io.write_rows(ctx.path(f"eval_{split}.csv"), ["case", "dof", "rse"], rows)
    for i, (p, r) in enumerate(zip(result.predictions, result.references)):
        cols, header = [], []
        for j, d in enumerate(result.dofs):
            header += [f"{d}_predicted", f"{d}_reference"]
            cols += [p[:, j], r[:, j]]
        io.write_csv(ctx.path(f"eval_{split}_case{i}.csv"), header, cols)


def cmd_eval(ctx, args):
    surrogate = load_checkpoint(ctx.checkpoint)
    ds = _load_dataset(ctx)
    result = evaluate(surrogate, ds, args.split)
    _write_eval(ctx, result, args.split)
    for dof, v in result.per_dof.items():
        print(f"{dof:>6} RSE {v:.6f}")
    print(f"overall RSE {result.overall:.6f} (sum {result.overall_sum:.6f})")
    return ctx.path(f"eval_{args.split}.csv")


def cmd_predict(ctx, args):
    surrogate = load_checkpoint(ctx.checkpoint)
    table = io.read_csv(args.input)
    if "time" not in table:
        raise ConfigError(f"{args.input}: needs a 'time' column")
    names = sorted((k for k in table if k.startswith("probe")), key=lambda k: int(k[5:]))
    if not names:
        raise ConfigError(f"{args.input}: no probe columns")
    times = table["time"]
    if len(times) > 1 and not math.isclose(times[1] - times[0], surrogate.dt, rel_tol=1e-6):
        raise ConfigError(f"input dt {times[1] - times[0]} differs from training dt {surrogate.dt}")
    pred = surrogate.predict_raw(np.stack([table[n] for n in names], axis=1))
    out = Path(args.out) if args.out else ctx.path("prediction.csv")
    io.write_csv(out, ["time", *surrogate.dofs], [times, *pred.T])
    return out


def cmd_sweep(ctx, args):
    ds = _load_dataset(ctx)
    grid = dict(ctx.doc["sweep"])
    workers = grid.pop("workers")
    t = dict(ctx.doc["training"])
    t.pop("model")
    report = architecture_sweep(ds, grid, TrainConfig(seed=ctx.seed, **t), workers=workers,
                                journal=ctx.path("sweep.jsonl"), resume=args.resume)
    report.to_csv(ctx.path("sweep.csv"))
    table = report.table()
    with io.atomic_write(ctx.path("sweep.txt")) as fh:
        fh.write(table + "\n")
    print(table)
    return ctx.path("sweep.csv")


COMMANDS = {
    "spectrum": (cmd_spectrum, "tabulate the wave spectrum and cumulative energy"),
    "waves": (cmd_waves, "discretize the spectrum and record probe elevations"),
    "oracle": (cmd_oracle, "run the vessel motion oracle"),
    "dataset": (cmd_dataset, "build a paired wave/motion dataset"),
    "train": (cmd_train, "train a surrogate on a dataset"),
    "eval": (cmd_eval, "score a checkpoint with the RSE metric"),
    "predict": (cmd_predict, "predict motions from an elevation CSV"),
    "sweep": (cmd_sweep, "grid sweep over architectures and data budgets"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (may be partial)")
    common.add_argument("--seed", type=int, help="global seed")
    common.add_argument("--out-dir", help="directory for outputs")
    common.add_argument("--threads", type=int, help="worker threads for sweeps")
    common.add_argument("--preset", help="vessel preset name or JSON path")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="seasurrogate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {name: sub.add_parser(name, parents=[common], help=text, description=text)
               for name, (_, text) in COMMANDS.items()}
    parsers["spectrum"].add_argument("--out", help="output CSV path")
    parsers["spectrum"].add_argument("--points", type=int, default=512, help="grid points")
    for name in ("waves", "oracle"):
        parsers[name].add_argument("--steps", type=int, help="samples to record")
    for name in ("dataset", "train", "eval", "sweep"):
        parsers[name].add_argument("--dataset-dir", help="dataset directory")
    for name in ("train", "eval", "predict"):
        parsers[name].add_argument("--checkpoint", help="checkpoint path")
    parsers["train"].add_argument("--train-steps", type=int, help="optimizer steps")
    parsers["eval"].add_argument("--split", choices=("train", "test"), default="test")
    parsers["predict"].add_argument("--input", required=True, help="CSV with time and probeN columns")
    parsers["predict"].add_argument("--out", help="output CSV path")
    parsers["sweep"].add_argument("--resume", action="store_true", help="skip rows already in sweep.jsonl")
    return parser


def _overrides(args):
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.preset is not None:
        out["vessel_preset"] = args.preset
    if args.threads is not None:
        out.setdefault("sweep", {})["workers"] = args.threads
    io_block = {}
    if args.out_dir is not None:
        io_block["out_dir"] = args.out_dir
    if getattr(args, "dataset_dir", None):
        io_block["dataset_dir"] = args.dataset_dir
    if getattr(args, "checkpoint", None):
        io_block["checkpoint"] = args.checkpoint
    if io_block:
        out["io"] = io_block
    if getattr(args, "train_steps", None) is not None:
        out["training"] = {"train_steps": args.train_steps}
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        doc = config.load(args.config, _overrides(args))
        ctx = Context(doc)
        try:
            ctx.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ArtifactIOError(f"cannot create {ctx.out}: {exc}") from exc
        config.write_resolved(doc, ctx.out)
        result = COMMANDS[args.command][0](ctx, args)
    except SeaSurrogateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ArtifactIOError.exit_code
    print(f"wrote {result}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
