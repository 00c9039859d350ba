"""Paired wave-input / vessel-motion datasets.

A dataset is a list of realisations.  Each holds the elevation recorded at
the input probes and the oracle motion driven by the same wave field, on one
shared time grid.  Splits are described rather than materialised:

* the first ``train_fraction`` of every training sequence is training data
  (a contiguous prefix);
* sequences listed in ``test_indices`` are held out entirely;
* with no held-out sequences, the "test" split is the remainder of each
  training sequence after its prefix.

On disk a dataset is a directory with ``manifest.json`` and two CSV files per
sequence (``seqNNN_inputs.csv``, ``seqNNN_motion.csv``).
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import io, rng
from ..errors import ConfigError, MissingArtifactError
from ..kinematics import ProbeSeries, StokesWave, WaveField, probe_series
from ..oracle import DOFS, MotionRecord, integrate, load_preset
from ..spectra import SeaStateParams, discretize_spectrum

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class SequencePair:
    probes: list  # ProbeSeries, one per input probe
    motion: MotionRecord
    seed: int

    def __post_init__(self):
        n = len(self.motion)
        for p in self.probes:
            if len(p.values) != n or not math.isclose(p.dt, self.motion.dt):
                raise ConfigError("input and target grids are not aligned")

    def __len__(self):
        return len(self.motion)

    @property
    def inputs(self):
        return np.stack([p.values for p in self.probes], axis=1)

    def targets(self, dofs):
        return self.motion.as_array(dofs)


@dataclass(frozen=True)
class Normalizer:
    """Per-channel affine maps ``(x - mean) / scale`` fitted on training data."""

    in_mean: np.ndarray
    in_scale: np.ndarray
    out_mean: np.ndarray
    out_scale: np.ndarray

    @classmethod
    def fit(cls, inputs, targets, input_names, output_names):
        def stats(arr, names):
            mean = arr.mean(axis=0)
            scale = arr.std(axis=0)
            for name, s in zip(names, scale):
                if not s > 0:
                    raise ConfigError(f"channel {name!r} has zero variance in the training data")
            return mean, scale

        im, isc = stats(inputs, input_names)
        om, osc = stats(targets, output_names)
        return cls(im, isc, om, osc)

    def inputs(self, x):
        return (x - self.in_mean) / self.in_scale

    def outputs(self, y):
        return (y - self.out_mean) / self.out_scale

    def denormalize_outputs(self, y):
        return y * self.out_scale + self.out_mean

    def denormalize_inputs(self, x):
        return x * self.in_scale + self.in_mean

    def tensors(self):
        return {"norm.in_mean": self.in_mean, "norm.in_scale": self.in_scale,
                "norm.out_mean": self.out_mean, "norm.out_scale": self.out_scale}

    @classmethod
    def from_tensors(cls, t):
        return cls(t["norm.in_mean"], t["norm.in_scale"], t["norm.out_mean"], t["norm.out_scale"])


@dataclass(frozen=True)
class Dataset:
    sequences: list
    dt: float
    dofs: tuple
    input_locations: tuple
    train_fraction: float = 1.0
    test_indices: tuple = ()
    stats: Normalizer = None
    lineage: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.sequences:
            raise ConfigError("dataset has no sequences")
        if not 0 < self.train_fraction <= 1:
            raise ConfigError("train_fraction must lie in (0, 1]")
        if any(i < 0 or i >= len(self.sequences) for i in self.test_indices):
            raise ConfigError("test index out of range")
        if not self.train_indices:
            raise ConfigError("dataset has no training sequences")

    @property
    def input_dim(self):
        return len(self.input_locations)

    @property
    def output_dim(self):
        return len(self.dofs)

    @property
    def train_indices(self):
        return tuple(i for i in range(len(self.sequences)) if i not in self.test_indices)

    def train_length(self, i):
        return max(2, int(math.floor(self.train_fraction * len(self.sequences[i]))))

    def train_arrays(self, normalized=True):
        """``[(inputs, targets)]`` prefixes of the training sequences."""
        out = []
        for i in self.train_indices:
            n = self.train_length(i)
            x = self.sequences[i].inputs[:n]
            y = self.sequences[i].targets(self.dofs)[:n]
            if normalized:
                x, y = self._norm(x, y)
            out.append((x, y))
        return out

    def split_cases(self, split):
        """``[(full_inputs, full_targets, scored_slice)]`` for a split (raw units).

        Predictions always start from rest at the beginning of the sequence;
        only the slice is scored.
        """
        cases = []
        if split == "train":
            for i in self.train_indices:
                s = self.sequences[i]
                cases.append((s.inputs, s.targets(self.dofs), slice(0, self.train_length(i))))
        elif split == "test":
            if self.test_indices:
                for i in self.test_indices:
                    s = self.sequences[i]
                    cases.append((s.inputs, s.targets(self.dofs), slice(0, len(s))))
            else:
                for i in self.train_indices:
                    s = self.sequences[i]
                    if self.train_length(i) < len(s) - 1:
                        cases.append((s.inputs, s.targets(self.dofs), slice(self.train_length(i), len(s))))
                if not cases:
                    raise ConfigError("no test data: no held-out sequences and train_fraction = 1")
        else:
            raise ConfigError(f"unknown split {split!r}")
        return cases

    def _norm(self, x, y):
        if self.stats is None:
            raise ConfigError("dataset is not normalized")
        return self.stats.inputs(x), self.stats.outputs(y)

    def resplit(self, train_fraction=None, num_train=None):
        """Same data with a different prefix fraction and/or fewer training sequences."""
        ds = self
        if num_train is not None:
            train = list(self.train_indices)
            if not 1 <= num_train <= len(train):
                raise ConfigError(f"num_train must lie in [1, {len(train)}]")
            keep = sorted(train[:num_train] + list(self.test_indices))
            remap = {old: new for new, old in enumerate(keep)}
            ds = replace(ds, sequences=[self.sequences[i] for i in keep],
                         test_indices=tuple(remap[i] for i in self.test_indices))
        if train_fraction is not None:
            ds = replace(ds, train_fraction=float(train_fraction))
        return replace(ds, stats=None)

    def save(self, directory):
        directory = Path(directory)
        entries = []
        for i, s in enumerate(self.sequences):
            inp, mot = f"seq{i:03d}_inputs.csv", f"seq{i:03d}_motion.csv"
            io.write_csv(directory / inp, ["time", *[f"probe{j}" for j in range(len(s.probes))]],
                         [s.motion.times, *[p.values for p in s.probes]])
            io.write_csv(directory / mot,
                         ["time", *DOFS, *[f"{d}_rate" for d in DOFS]],
                         [s.motion.times, s.motion.heave, s.motion.pitch, s.motion.roll,
                          s.motion.heave_rate, s.motion.pitch_rate, s.motion.roll_rate])
            entries.append({"inputs": inp, "motion": mot, "seed": s.seed, "length": len(s)})
        manifest = {
            "version": MANIFEST_VERSION,
            "dt": self.dt,
            "dofs": list(self.dofs),
            "input_locations": [list(p) for p in self.input_locations],
            "train_fraction": self.train_fraction,
            "test_indices": list(self.test_indices),
            "sequences": entries,
            "lineage": self.lineage,
        }
        if self.stats is not None:
            manifest["stats"] = {k: v.tolist() for k, v in self.stats.tensors().items()}
        io.write_json(directory / "manifest.json", manifest)

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        if not (directory / "manifest.json").exists():
            raise MissingArtifactError(directory / "manifest.json")
        m = io.read_json(directory / "manifest.json")
        if m.get("version") != MANIFEST_VERSION:
            raise ConfigError(f"{directory}: unsupported manifest version")
        seqs = []
        locs = [tuple(p) for p in m["input_locations"]]
        for e in m["sequences"]:
            inp = io.read_csv(directory / e["inputs"])
            mot = io.read_csv(directory / e["motion"])
            t0 = float(inp["time"][0])
            probes = [ProbeSeries(loc, m["dt"], inp[f"probe{j}"], t0) for j, loc in enumerate(locs)]
            rec = MotionRecord(m["dt"], mot["heave"], mot["pitch"], mot["roll"], mot["heave_rate"],
                               mot["pitch_rate"], mot["roll_rate"], t0)
            seqs.append(SequencePair(probes, rec, e["seed"]))
        stats = None
        if "stats" in m:
            stats = Normalizer.from_tensors({k: np.array(v) for k, v in m["stats"].items()})
        return cls(seqs, m["dt"], tuple(m["dofs"]), tuple(locs), m["train_fraction"],
                   tuple(m["test_indices"]), stats, m.get("lineage", {}))


def normalize(dataset):
    """Fit per-channel statistics on the training prefixes only.

    Raises
    ------
    ConfigError
        If a channel is constant over the training data; the message names it.
    """
    pairs = dataset.train_arrays(normalized=False)
    x = np.concatenate([p[0] for p in pairs])
    y = np.concatenate([p[1] for p in pairs])
    names_in = [f"probe{j}" for j in range(dataset.input_dim)]
    stats = Normalizer.fit(x, y, names_in, list(dataset.dofs))
    return replace(dataset, stats=stats)


def _realisation(field, preset, probes, steps, dt, seed):
    series = probe_series(field, probes, 0.0, dt, steps)
    motion = integrate(field, preset, 0.0, dt, steps)
    return SequencePair(series, motion, int(seed))


def build_dataset(sea, preset, num_sequences, steps_per_sequence, seeds=None, probes=None,
                  n_components=200, num_test=1, train_fraction=1.0, energy_fraction=0.999,
                  dt=None):
    """Synthesize wave realisations and run the oracle on each.

    Parameters
    ----------
    sea : SeaStateParams or None
        ``None`` takes the preset's bundled sea state.
    preset : str or VesselParams
    num_sequences : int
        Total realisations; the last ``num_test`` are held out.
    seeds : list of int, optional
        One per sequence; derived from 0 when omitted.  Must be distinct.
    probes : list of (x, y), optional
        Input probe locations in the hull frame; defaults to the preset's.
    """
    vessel = load_preset(preset) if isinstance(preset, str) else preset
    if sea is None:
        sea = SeaStateParams.from_dict(vessel.sea_state)
    dt = vessel.dt if dt is None else dt
    if seeds is None:
        seeds = rng.derive_seeds(0, num_sequences)
    seeds = [int(s) for s in seeds]
    if len(seeds) != num_sequences:
        raise ConfigError("need exactly one seed per sequence")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("duplicate wave seeds would produce identical sequences")
    if not 0 <= num_test < num_sequences:
        raise ConfigError("num_test must leave at least one training sequence")
    probes = tuple(tuple(map(float, p)) for p in (probes or vessel.input_probes))
    seqs = []
    for seed in seeds:
        disc = discretize_spectrum(sea, n_components, seed=seed, energy_fraction=energy_fraction)
        field = WaveField.from_sea_state(disc, sea)
        seqs.append(_realisation(field, vessel, probes, steps_per_sequence, dt, seed))
    lineage = {
        "preset": vessel.name,
        "sea_state": {"hs": sea.hs, "tp": sea.tp, "t1": sea.t1,
                      "depth": None if math.isinf(sea.depth) else sea.depth,
                      "gravity": sea.gravity, "heading_deg": math.degrees(sea.heading)},
        "n_components": n_components,
        "energy_fraction": energy_fraction,
        "seeds": seeds,
    }
    test = tuple(range(num_sequences - num_test, num_sequences))
    return Dataset(seqs, float(dt), tuple(vessel.dofs), probes, float(train_fraction), test,
                   None, lineage)


def build_regular_dataset(preset, amplitudes, period=2.0, steps=2000, probes=None, num_test=1, order=3):
    """Regular-wave benchmark: one Stokes wave per amplitude; the last ``num_test`` held out."""
    vessel = load_preset(preset) if isinstance(preset, str) else preset
    sea = SeaStateParams.from_dict(vessel.sea_state)
    probes = tuple(tuple(map(float, p)) for p in (probes or vessel.input_probes))
    seqs = []
    for j, a in enumerate(amplitudes):
        wave = StokesWave(float(a), period, sea.gravity, sea.heading, order=order)
        seqs.append(_realisation(wave, vessel, probes, steps, vessel.dt, j))
    n = len(seqs)
    lineage = {"preset": vessel.name, "regular_wave": {"amplitudes": list(map(float, amplitudes)),
                                                       "period": period, "stokes_order": order}}
    return Dataset(seqs, float(vessel.dt), tuple(vessel.dofs), probes, 1.0,
                   tuple(range(n - num_test, n)), None, lineage)
