"""Ground-truth vessel motions from a nonlinear forced-oscillator model.

This is a deliberately simple stand-in for a viscous CFD solver.  It makes no
claim of hydrodynamic fidelity; it only has to be a deterministic, causal,
nonlinear map from wave elevation to heave/pitch/roll that a surrogate can
learn.  Each degree of freedom obeys::

    m x'' + b x' + b2 x'|x'| + k x (1 + mu x^2) + coupling = F(t)

with a symmetric heave-pitch stiffness coupling ``kappa * pitch`` (in heave)
and ``kappa * heave`` (in pitch).  The generalised force of a DOF is a
weighted sum over hull probe points of ``c_zeta*zeta + c_v*v + c_a*dv/dt``
evaluated at the mean free surface.  Integration is classical fixed-step RK4.
"""

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import io, kernels
from .errors import ConfigError, DivergenceError
from .kinematics import surface_kinematics

DOFS = ("heave", "pitch", "roll")


@dataclass(frozen=True)
class Excitation:
    """Forcing recipe for one DOF: ``(c_zeta, c_v, c_a)`` and ``(x, y, weight)`` probes."""

    coefficients: tuple
    probes: tuple

    def __post_init__(self):
        if len(self.coefficients) != 3:
            raise ConfigError("excitation needs three coefficients (c_zeta, c_v, c_a)")
        if not self.probes:
            raise ConfigError("each DOF needs at least one excitation probe")


@dataclass(frozen=True)
class VesselParams:
    name: str
    dofs: tuple
    mass: tuple
    damping: tuple
    stiffness: tuple
    cubic: tuple = (0.0, 0.0, 0.0)
    quadratic_damping: tuple = (0.0, 0.0, 0.0)
    coupling: float = 0.0
    excitation: dict = field(default_factory=dict)
    input_probes: tuple = ((0.0, 0.0),)
    dt: float = None
    sea_state: dict = None
    description: str = ""

    def __post_init__(self):
        if not self.dofs or any(d not in DOFS for d in self.dofs):
            raise ConfigError(f"dofs must be a non-empty subset of {DOFS}")
        for name in ("mass", "damping", "stiffness", "cubic", "quadratic_damping"):
            if len(getattr(self, name)) != 3:
                raise ConfigError(f"{name} needs one entry per DOF {DOFS}")
        if min(self.mass) <= 0 or min(self.stiffness) <= 0:
            raise ConfigError("masses and stiffnesses must be positive")
        if min(self.damping) < 0 or min(self.quadratic_damping) < 0:
            raise ConfigError("damping must be non-negative")
        for d in self.dofs:
            if d not in self.excitation:
                raise ConfigError(f"no excitation probes for active DOF {d!r}")

    @property
    def active(self):
        return np.array([d in self.dofs for d in DOFS], dtype=float)

    @property
    def natural_periods(self):
        return {d: 2 * math.pi * math.sqrt(m / k)
                for d, m, k in zip(DOFS, self.mass, self.stiffness) if d in self.dofs}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        exc = {
            dof: Excitation(tuple(float(c) for c in spec["coefficients"]),
                            tuple(tuple(float(v) for v in p) for p in spec["probes"]))
            for dof, spec in d.pop("excitation").items()
        }
        per_dof = {}
        for key in ("mass", "damping", "stiffness", "cubic", "quadratic_damping"):
            val = d.pop(key, {})
            if isinstance(val, dict):
                default = 1.0 if key in ("mass", "stiffness") else 0.0
                per_dof[key] = tuple(float(val.get(n, default)) for n in DOFS)
            else:
                per_dof[key] = tuple(float(v) for v in val)
        probes = tuple(tuple(float(v) for v in p) for p in d.pop("input_probes", [(0.0, 0.0)]))
        return cls(excitation=exc, input_probes=probes, dofs=tuple(d.pop("dofs")),
                   **per_dof, **d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(io.read_json(path))


def preset_names():
    return sorted(p.name[:-5] for p in resources.files("seasurrogate.presets").iterdir()
                  if p.name.endswith(".json"))


def load_preset(name_or_path):
    """Load a bundled preset by name or a preset JSON file by path."""
    if name_or_path in preset_names():
        text = resources.files("seasurrogate.presets").joinpath(f"{name_or_path}.json").read_text()
        return VesselParams.from_dict(json.loads(text))
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        return VesselParams.load(path)
    raise ConfigError(f"unknown vessel preset {name_or_path!r}; known: {preset_names()}")


@dataclass(frozen=True)
class MotionRecord:
    """Vessel DOF histories on a uniform grid (heave m, pitch rad, roll rad)."""

    dt: float
    heave: np.ndarray
    pitch: np.ndarray
    roll: np.ndarray
    heave_rate: np.ndarray
    pitch_rate: np.ndarray
    roll_rate: np.ndarray
    start_time: float = 0.0

    def __len__(self):
        return len(self.heave)

    @property
    def times(self):
        return self.start_time + self.dt * np.arange(len(self))

    def as_array(self, dofs=DOFS):
        return np.stack([getattr(self, d) for d in dofs], axis=1)

    def to_csv(self, path):
        io.write_csv(path, ["time", *DOFS], [self.times, self.heave, self.pitch, self.roll])


def _probe_forcing(field, params, times):
    """Generalised forces at ``times``, shape ``(len(times), 3)``."""
    times = np.asarray(times, float)
    forces = np.zeros((times.size, 3))
    cache = {}
    for j, dof in enumerate(DOFS):
        if dof not in params.dofs:
            continue
        exc = params.excitation[dof]
        cz, cv, ca = exc.coefficients
        for x, y, w in exc.probes:
            x1 = float(field.project(x, y))
            if x1 not in cache:
                cache[x1] = surface_kinematics(field, x1, times)
            zeta, v, dv = cache[x1]
            forces[:, j] += w * (cz * zeta + cv * v + ca * dv)
    return forces


def excitation(field, params, t):
    """Generalised forces ``(F_heave, M_pitch, M_roll)`` at time(s) ``t``."""
    t = np.asarray(t, float)
    f = _probe_forcing(field, params, t.ravel())
    out = tuple(f[:, j].reshape(t.shape) for j in range(3))
    return tuple(o if o.ndim else float(o) for o in out)


def check_time_step(params, dt):
    t_min = min(params.natural_periods.values())
    if not 0 < dt <= t_min / 20.0:
        raise ConfigError(
            f"dt={dt} does not resolve the shortest natural period {t_min:.4g} s "
            f"(need dt <= {t_min / 20.0:.4g})"
        )


def integrate(field, params, t0, dt, steps, initial=None, forcing=None):
    """Integrate the vessel model and sample it every ``dt``.

    Parameters
    ----------
    field : WaveField
    params : VesselParams
    t0, dt : float
        Start time and step; the record's first sample is the initial state.
    steps : int
        Number of samples in the returned record.
    initial : array_like, optional
        ``(heave, pitch, roll, heave_rate, pitch_rate, roll_rate)``; zeros by
        default.  Locked DOFs are forced to zero.
    forcing : array_like, optional
        Precomputed forces on the half-step grid ``t0 + j*dt/2``,
        ``j = 0 .. 2*steps-2``; overrides the wave field.

    Raises
    ------
    ConfigError
        If ``dt`` is coarser than a twentieth of the shortest natural period.
    DivergenceError
        If the state becomes non-finite; carries the step index.
    """
    steps = int(steps)
    if steps < 1:
        raise ConfigError("steps must be positive")
    check_time_step(params, dt)
    nodes = 2 * steps - 1
    if forcing is None:
        forcing = _probe_forcing(field, params, t0 + 0.5 * dt * np.arange(nodes))
    forcing = np.ascontiguousarray(forcing, dtype=np.float64)
    if forcing.shape != (nodes, 3):
        raise ConfigError(f"forcing must have shape ({nodes}, 3)")
    state0 = np.zeros(6) if initial is None else np.array(initial, dtype=np.float64)
    state0[:3] *= params.active
    state0[3:] *= params.active
    states, fail = kernels.backend().rk4_oscillator(
        forcing, float(dt),
        np.array(params.mass, float), np.array(params.damping, float),
        np.array(params.quadratic_damping, float), np.array(params.stiffness, float),
        np.array(params.cubic, float), float(params.coupling), params.active, state0,
    )
    if fail >= 0:
        raise DivergenceError("vessel state became non-finite", step=fail)
    return MotionRecord(dt=float(dt), heave=states[:, 0], pitch=states[:, 1], roll=states[:, 2],
                        heave_rate=states[:, 3], pitch_rate=states[:, 4], roll_rate=states[:, 5],
                        start_time=float(t0))
