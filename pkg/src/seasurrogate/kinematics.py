"""Linear long-crested irregular-sea kinematics.

Field quantities are sums over the components of a
:class:`~seasurrogate.spectra.SpectralDiscretization` with phase
``theta_n = k_n x1 - omega_n t + eps_n``.  ``x1`` runs along the wave
advance direction and ``x2`` is vertical, zero at the mean free surface and
negative downwards.

Vertical profiles use the overflow-free forms::

    cosh(k(x2+h)) / sinh(kh) = e^{k x2} (1 + e^{-2k(x2+h)}) / (1 - e^{-2kh})
    sinh(k(x2+h)) / sinh(kh) = e^{k x2} (1 - e^{-2k(x2+h)}) / (1 - e^{-2kh})

which stay finite for deep-water components and for ``h = inf``.

Accelerations are the exact time derivatives of the velocity sums
(amplitude ``a omega^2``).  The dynamic pressure keeps the tabulated
``sinh(kh)`` denominator by default; ``consistent=True`` selects the
``cosh(kh)`` denominator of standard linear theory, whose surface value
equals ``rho g zeta``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import io
from .errors import ConfigError, DomainError

_CHUNK = 1 << 20  # elements per (points x components) block


@dataclass(frozen=True)
class WaveField:
    discretization: object
    depth: float = math.inf
    density: float = 1025.0
    gravity: float = 9.81
    heading: float = 0.0

    def __post_init__(self):
        if not (self.depth > 0 and self.density > 0 and self.gravity > 0):
            raise DomainError("depth, density and gravity must be positive")

    @classmethod
    def from_sea_state(cls, discretization, params, density=1025.0):
        return cls(discretization, depth=params.effective_depth, density=density,
                   gravity=params.gravity, heading=params.heading)

    def project(self, x, y):
        """Coordinate along the advance axis of a point (x, y) in the hull frame."""
        return np.asarray(x, float) * math.cos(self.heading) + np.asarray(y, float) * math.sin(self.heading)


@dataclass(frozen=True)
class ProbeSeries:
    """Elevation recorded at a fixed point on a uniform time grid."""

    location: tuple
    dt: float
    values: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")

    @property
    def times(self):
        return self.start_time + self.dt * np.arange(len(self.values))

    def to_csv(self, path):
        io.write_csv(path, ["time", "elevation"], [self.times, self.values])


def _profiles(field, x2):
    """Return (cosh-profile, sinh-profile) arrays of shape (P, n)."""
    k = field.discretization.wavenumbers
    h = field.depth
    x2 = np.asarray(x2, float)[:, None]
    up = np.exp(k * x2)
    down = np.exp(-2.0 * k * (x2 + h))
    denom = -np.expm1(-2.0 * k * h)
    ch = up * (1.0 + down) / denom
    sh = up * -np.expm1(-2.0 * k * (x2 + h)) / denom
    return ch, sh


def _evaluate(field, kernel, *coords):
    """Broadcast coordinates, evaluate ``kernel`` on point blocks and sum components."""
    arrays = np.broadcast_arrays(*[np.asarray(c, float) for c in coords])
    shape = arrays[0].shape
    flat = [a.ravel() for a in arrays]
    n = max(field.discretization.n, 1)
    block = max(1, _CHUNK // n)
    outs = None
    for start in range(0, flat[0].size, block):
        part = [a[start:start + block] for a in flat]
        res = kernel(*part)
        if outs is None:
            outs = [np.empty(flat[0].size) for _ in res]
        for o, r in zip(outs, res):
            o[start:start + block] = r
    if outs is None:
        return tuple(np.empty(shape) for _ in range(2))
    outs = [o.reshape(shape) for o in outs]
    return tuple(o if o.ndim else float(o) for o in outs)


def _phase(field, x1, t):
    d = field.discretization
    return d.wavenumbers * x1[:, None] - d.omegas * t[:, None] + d.phases


def _check_depth(field, x2):
    if np.any(np.asarray(x2) < -field.depth):
        raise DomainError("x2 lies below the sea bed")


def elevation(field, x1, t):
    """Free-surface elevation zeta(x1, t) in metres."""
    a = field.discretization.amplitudes

    def kernel(x1, t):
        return (np.cos(_phase(field, x1, t)) @ a,)

    return _evaluate(field, kernel, x1, t)[0]


def velocity(field, x1, x2, t):
    """Particle velocity ``(u, v)``: horizontal along the advance axis, vertical."""
    _check_depth(field, x2)
    d = field.discretization
    aw = d.amplitudes * d.omegas

    def kernel(x1, x2, t):
        th = _phase(field, x1, t)
        ch, sh = _profiles(field, x2)
        return (np.sum(aw * ch * np.cos(th), axis=1), np.sum(aw * sh * np.sin(th), axis=1))

    return _evaluate(field, kernel, x1, x2, t)


def acceleration(field, x1, x2, t):
    """Time derivatives ``(du/dt, dv/dt)`` of :func:`velocity`."""
    _check_depth(field, x2)
    d = field.discretization
    aw2 = d.amplitudes * d.omegas**2

    def kernel(x1, x2, t):
        th = _phase(field, x1, t)
        ch, sh = _profiles(field, x2)
        return (np.sum(aw2 * ch * np.sin(th), axis=1), -np.sum(aw2 * sh * np.cos(th), axis=1))

    return _evaluate(field, kernel, x1, x2, t)


def dynamic_pressure(field, x1, x2, t, consistent=False):
    """Dynamic pressure in Pa.

    With ``consistent=False`` the depth denominator is ``sinh(k h)``, as
    tabulated; ``consistent=True`` uses ``cosh(k h)``.
    """
    _check_depth(field, x2)
    d = field.discretization
    arg = d.amplitudes * field.density * field.gravity
    k, h = d.wavenumbers, field.depth

    def kernel(x1, x2, t):
        th = _phase(field, x1, t)
        ch, _ = _profiles(field, x2)
        if consistent:
            # sinh(kh)/cosh(kh), finite for h = inf
            ch = ch * -np.expm1(-2.0 * k * h) / (1.0 + np.exp(-2.0 * k * h))
        return (np.sum(arg * ch * np.cos(th), axis=1),)

    return _evaluate(field, kernel, x1, x2, t)[0]


@dataclass(frozen=True)
class StokesWave:
    """Deep-water regular Stokes wave, third order in steepness ``ka``.

    ``amplitude`` is the first-harmonic amplitude ``a``.  The elevation
    carries the bound harmonics::

        zeta = a [cos(theta) + ka/2 cos(2 theta) + 3(ka)^2/8 cos(3 theta)]

    with ``omega^2 = g k (1 + (ka)^2)``.  To this order the deep-water
    potential has only its first harmonic, so the surface vertical velocity
    is ``a omega sin(theta)``.  ``order=1`` gives the linear wave.
    """

    amplitude: float
    period: float
    gravity: float = 9.81
    heading: float = 0.0
    phase: float = 0.0
    order: int = 3

    def __post_init__(self):
        if not (self.amplitude >= 0 and self.period > 0 and self.gravity > 0):
            raise DomainError("amplitude must be non-negative, period and gravity positive")
        if self.order not in (1, 3):
            raise ConfigError("Stokes order must be 1 or 3")
        if self.order == 3 and self.steepness > 0.3:
            raise DomainError(f"steepness ka = {self.steepness:.3f} is outside the Stokes range")

    @property
    def omega(self):
        return 2.0 * math.pi / self.period

    @property
    def wavenumber(self):
        k0 = self.omega**2 / self.gravity
        if self.order == 1 or self.amplitude == 0:
            return k0
        # k (1 + k^2 a^2) = k0 has a single positive root
        return float(brentq(lambda k: k * (1.0 + (k * self.amplitude) ** 2) - k0, 0.0, k0))

    @property
    def steepness(self):
        return self.wavenumber * self.amplitude

    def project(self, x, y):
        return np.asarray(x, float) * math.cos(self.heading) + np.asarray(y, float) * math.sin(self.heading)

    def surface(self, x1, times):
        """``(zeta, v, dv/dt)`` at the mean surface."""
        a, w, k = self.amplitude, self.omega, self.wavenumber
        th = k * float(x1) - w * np.asarray(times, float) + self.phase
        zeta = a * np.cos(th)
        if self.order == 3:
            eps = k * a
            zeta = zeta + a * (0.5 * eps * np.cos(2 * th) + 0.375 * eps**2 * np.cos(3 * th))
        return zeta, a * w * np.sin(th), -a * w**2 * np.cos(th)


def surface_kinematics(field, x1, times):
    """Elevation, vertical velocity and vertical acceleration at ``x2 = 0``.

    Evaluated at one horizontal position over many times, using
    ``cos(theta) = cos(phi) cos(wt) + sin(phi) sin(wt)`` with
    ``phi = k x1 + eps`` so the work reduces to matrix products.
    """
    if isinstance(field, StokesWave):
        return field.surface(x1, times)
    d = field.discretization
    times = np.asarray(times, float)
    phi = d.wavenumbers * float(x1) + d.phases
    a, w = d.amplitudes, d.omegas
    coeff = np.stack([
        a * np.cos(phi), a * np.sin(phi),            # zeta
        a * w * np.sin(phi), -a * w * np.cos(phi),   # v
        -a * w**2 * np.cos(phi), -a * w**2 * np.sin(phi),  # dv/dt
    ], axis=1)
    out = np.empty((times.size, 3))
    block = max(1, _CHUNK // max(d.n, 1))
    for start in range(0, times.size, block):
        wt = w * times[start:start + block, None]
        c, s = np.cos(wt), np.sin(wt)
        out[start:start + block, 0] = c @ coeff[:, 0] + s @ coeff[:, 1]
        out[start:start + block, 1] = c @ coeff[:, 2] + s @ coeff[:, 3]
        out[start:start + block, 2] = c @ coeff[:, 4] + s @ coeff[:, 5]
    return out[:, 0], out[:, 1], out[:, 2]


def probe_series(field, probes, t0, dt, steps):
    """Sample the elevation at hull-frame points ``(x, y)`` on a uniform grid."""
    probes = list(probes)
    if not probes:
        raise ConfigError("at least one probe is required")
    if not dt > 0:
        raise DomainError("dt must be positive")
    if int(steps) != steps or steps < 1:
        raise ConfigError("steps must be a positive integer")
    times = t0 + dt * np.arange(int(steps))
    out = []
    for x, y in probes:
        x1 = float(field.project(x, y))
        zeta, _, _ = surface_kinematics(field, x1, times)
        out.append(ProbeSeries(location=(float(x), float(y)), dt=float(dt), values=zeta,
                               start_time=float(t0)))
    return out
