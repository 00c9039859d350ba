"""Modified Pierson-Moskowitz spectrum and its discretisation into wave components.

The spectral density is parameterised by significant wave height ``hs`` and
mean period ``t1``.  Sea states are usually quoted by peak period ``tp``; the
two are related by the fixed ratio :data:`PEAK_TO_MEAN_RATIO`: the peak
period of the spectrum over its energy-weighted mean period ``2 pi m0 / m1``,
both computed for the same spectrum (see :func:`peak_to_mean_ratio`).  With
the rounded 0.11 / 0.44 constants the formula's ``t1`` parameter is not
exactly its own moment mean period (``2 pi m0 / m1 = 1.00197 t1``), so a
spectrum built from ``tp`` peaks about 0.2% above ``tp``.

Components are placed one per equal-width frequency bin at a uniformly
jittered position, which keeps the frequencies incommensurate so the
synthesised elevation does not repeat over a simulation horizon.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import io, rng
from .errors import ConfigError, DomainError, NumericalError

#: ``tp / t1`` for the modified PM spectrum: peak period over ``2 pi m0 / m1``.
PEAK_TO_MEAN_RATIO = 1.2957204069267747

DEEP = math.inf
_TWO_PI = 2.0 * math.pi
_PM_A = 0.11
_PM_B = 0.44


@dataclass(frozen=True)
class SeaStateParams:
    """Parameters of a long-crested irregular sea.

    Exactly one of ``t1`` (mean period) or ``tp`` (peak period) must be
    given; the other is derived.  ``depth`` may be :data:`DEEP`.  ``heading``
    is the wave advance direction relative to the vessel's longitudinal
    axis, in radians.  ``gamma`` is the optional peak-enhancement base; the
    default of 1 leaves the plain PM form.
    """

    hs: float
    t1: float = None
    tp: float = None
    depth: float = DEEP
    gravity: float = 9.81
    heading: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if (self.t1 is None) == (self.tp is None):
            raise ConfigError("exactly one of t1 / tp must be given")
        if self.t1 is None:
            if not self.tp > 0:
                raise DomainError("tp must be positive")
            object.__setattr__(self, "t1", mean_period_from_peak(self.tp))
        else:
            if not self.t1 > 0:
                raise DomainError("t1 must be positive")
            object.__setattr__(self, "tp", self.t1 * PEAK_TO_MEAN_RATIO)
        if not self.hs > 0:
            raise DomainError("hs must be positive")
        if not self.depth > 0:
            raise DomainError("depth must be positive")
        if not self.gravity > 0:
            raise DomainError("gravity must be positive")
        if not 0.0 <= self.heading < _TWO_PI:
            raise DomainError("heading must lie in [0, 2*pi)")
        if not self.gamma >= 1.0:
            raise DomainError("gamma must be >= 1")

    @property
    def effective_depth(self):
        """Depth used for kinematics; :data:`DEEP` beyond ~4 deep-water wavelengths."""
        if self.depth >= 25.0 * self.gravity * self.tp**2 / (4.0 * math.pi**2):
            return DEEP
        return self.depth

    @classmethod
    def from_dict(cls, block):
        """Build from a JSON block ``{hs, tp|t1, depth, gravity, heading_deg, gamma}``."""
        known = {"hs", "tp", "t1", "depth", "gravity", "heading_deg", "gamma"}
        unknown = set(block) - known
        if unknown:
            raise ConfigError(f"sea_state: unknown keys {sorted(unknown)}")
        if "hs" not in block:
            raise ConfigError("sea_state: missing field 'hs'")
        if ("tp" in block) == ("t1" in block):
            raise ConfigError("sea_state: give exactly one of 'tp' or 't1'")
        depth = block.get("depth", "deep")
        if depth in ("deep", None):
            depth = DEEP
        heading = math.radians(block.get("heading_deg", 0.0)) % _TWO_PI
        return cls(
            hs=float(block["hs"]),
            t1=block.get("t1"),
            tp=block.get("tp"),
            depth=float(depth),
            gravity=float(block.get("gravity", 9.81)),
            heading=heading,
            gamma=float(block.get("gamma", 1.0)),
        )


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise DomainError("omega must be positive")
    return omega


def pm_spectral_density(omega, params):
    """Modified Pierson-Moskowitz spectral density S(omega) in m^2 s.

    Accepts a scalar or array of angular frequencies (rad/s).  When
    ``params.gamma != 1`` the density is multiplied by ``gamma**Y`` with
    ``Y`` from :func:`peak_enhancement_exponent`.
    """
    omega = _check_omega(omega)
    u = omega * params.t1 / _TWO_PI
    s = params.hs**2 * params.t1 * (_PM_A / _TWO_PI) * u**-5 * np.exp(-_PM_B * u**-4)
    if params.gamma != 1.0:
        s = s * params.gamma ** peak_enhancement_exponent(omega, params)
    return s if s.ndim else float(s)


def peak_enhancement_exponent(omega, params):
    """Peak-shape exponent Y(omega), in (0, 1].

    sigma is 0.07 for ``omega <= 5.24 / t1`` and 0.09 above.
    """
    omega = _check_omega(omega)
    sigma = np.where(omega <= 5.24 / params.t1, 0.07, 0.09)
    y = np.exp(-(((0.191 * omega * params.t1 - 1.0) / (math.sqrt(2.0) * sigma)) ** 2))
    return y if y.ndim else float(y)


def mean_period_from_peak(tp):
    """Mean period T1 for a peak period ``tp`` (T1 = tp / PEAK_TO_MEAN_RATIO)."""
    if not tp > 0:
        raise DomainError("tp must be positive")
    return tp / PEAK_TO_MEAN_RATIO


def _unit_density(w):
    u = w / _TWO_PI
    return (_PM_A / _TWO_PI) * u**-5 * math.exp(-_PM_B * u**-4)


def unit_peak_period():
    """Peak period of the spectrum with ``t1 = 1``.

    The peak frequency ``w*`` is the root of
    ``d log S / d w = (-5 + 4 * 0.44 * u**-4) / w``, so the result is
    ``2 pi / w* = (5 / (4 * 0.44)) ** 0.25``.
    """
    slope = lambda w: -5.0 + 4.0 * _PM_B * (w / _TWO_PI) ** -4
    return _TWO_PI / optimize.brentq(slope, 1.0, 20.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def peak_to_mean_ratio():
    """Recompute :data:`PEAK_TO_MEAN_RATIO` as ``tp m1 / (2 pi m0)`` for ``t1 = 1``."""
    return unit_peak_period() / moment_mean_period(SeaStateParams(hs=1.0, t1=1.0))


def moment_mean_period(params):
    """Energy-weighted mean period ``2 pi m0 / m1`` of the plain PM form, by quadrature."""
    # S(w; t1) = t1 * S(w t1; 1), so the mean period scales linearly with t1
    m0 = integrate.quad(_unit_density, 0.5, np.inf, limit=500, epsabs=0, epsrel=1e-13)[0]
    m1 = integrate.quad(lambda w: w * _unit_density(w), 0.5, np.inf, limit=500, epsabs=0, epsrel=1e-13)[0]
    return _TWO_PI * m0 / m1 * params.t1


def cumulative_energy_fraction(omega, params):
    """Fraction of m0 below ``omega`` for the plain PM form (closed form)."""
    omega = _check_omega(omega)
    u = omega * params.t1 / _TWO_PI
    return np.exp(-_PM_B * u**-4)


def energy_band(params, fraction=0.999):
    """Frequency band holding ``fraction`` of m0, with equal tails either side."""
    if not 0 < fraction < 1:
        raise DomainError("fraction must lie in (0, 1)")
    tail = 0.5 * (1.0 - fraction)
    quantiles = np.array([tail, 1.0 - tail])
    u = (_PM_B / -np.log(quantiles)) ** 0.25
    lo, hi = _TWO_PI * u / params.t1
    return float(lo), float(hi)


def solve_dispersion(omega, h, g=9.81, *, max_iter=100):
    """Wavenumber k solving omega^2 = g k tanh(k h).

    Newton iteration safeguarded by the bracket ``[K, 2K]`` with
    ``K = max(omega^2/g, omega/sqrt(g h))``, which always contains the root.
    Works elementwise on arrays; ``h`` may be ``inf``.
    """
    omega = _check_omega(omega)
    if not h > 0:
        raise DomainError("depth must be positive")
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega).astype(float)
    k_deep = w**2 / g
    if math.isinf(h):
        return float(k_deep[0]) if scalar else k_deep
    k = k_deep.copy()
    todo = k_deep * h < 20.0  # tanh(20) == 1 in float64
    if np.any(todo):
        wt = w[todo]
        lo = np.maximum(k_deep[todo], wt / np.sqrt(g * h))
        hi = 2.0 * lo
        kk = lo / np.sqrt(np.tanh(lo * h))  # Eckart-like start
        kk = np.clip(kk, lo, hi)
        target = wt**2
        for _ in range(max_iter):
            th = np.tanh(kk * h)
            f = g * kk * th - target
            if np.all(np.abs(f) <= 1e-14 * target):
                break
            lo = np.where(f < 0, kk, lo)
            hi = np.where(f > 0, kk, hi)
            df = g * (th + kk * h * (1.0 - th**2))
            step = kk - f / df
            outside = (step <= lo) | (step >= hi)
            kk = np.where(outside, 0.5 * (lo + hi), step)
        else:
            raise NumericalError("dispersion solver did not converge", step=max_iter)
        k[todo] = kk
    return float(k[0]) if scalar else k


@dataclass(frozen=True)
class SpectralDiscretization:
    """Finite set of sinusoidal wave components sampled from a spectrum."""

    omegas: np.ndarray
    delta_omegas: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    wavenumbers: np.ndarray
    celerities: np.ndarray
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return len(self.omegas)

    @property
    def energy(self):
        """Variance of the elevation, sum of a_i^2 / 2."""
        return float(0.5 * np.sum(self.amplitudes**2))

    def to_csv(self, path):
        io.write_csv(
            path,
            ["omega", "domega", "amplitude", "phase", "wavenumber", "celerity"],
            [self.omegas, self.delta_omegas, self.amplitudes, self.phases,
             self.wavenumbers, self.celerities],
        )

    def save(self, path):
        io.write_container(
            path,
            "spectral_discretization",
            {
                "omegas": self.omegas,
                "delta_omegas": self.delta_omegas,
                "amplitudes": self.amplitudes,
                "phases": self.phases,
                "wavenumbers": self.wavenumbers,
                "celerities": self.celerities,
            },
            meta={"seed": self.seed, **self.meta},
        )

    @classmethod
    def load(cls, path):
        _, meta, t = io.read_container(path, "spectral_discretization")
        seed = meta.pop("seed", 0)
        return cls(seed=seed, meta=meta, **t)


def discretize_spectrum(params, n=200, omega_min=None, omega_max=None, seed=0,
                        energy_fraction=0.999):
    """Sample the spectrum into ``n`` components with random phases.

    Parameters
    ----------
    params : SeaStateParams
    n : int
        Number of components, one per equal-width bin.
    omega_min, omega_max : float, optional
        Band edges in rad/s.  Default to the band holding ``energy_fraction``
        of the total energy.
    seed : int
        Root seed; phases and in-bin jitter use separate sub-streams.

    Returns
    -------
    SpectralDiscretization
        Amplitudes ``a_i = sqrt(2 S(omega_i) d_omega)``, phases uniform on
        ``[-pi, pi)``, wavenumbers from the dispersion relation at the
        effective depth.
    """
    if int(n) != n or n < 1:
        raise ConfigError("n must be a positive integer")
    n = int(n)
    lo, hi = energy_band(params, energy_fraction)
    omega_min = lo if omega_min is None else float(omega_min)
    omega_max = hi if omega_max is None else float(omega_max)
    if not 0 < omega_min < omega_max:
        raise ConfigError("require 0 < omega_min < omega_max")
    covered = float(np.diff(cumulative_energy_fraction([omega_min, omega_max], params))[0])
    if covered < 0.99:
        warnings.warn(
            f"band [{omega_min:.4g}, {omega_max:.4g}] rad/s holds only "
            f"{100 * covered:.2f}% of the spectral energy",
            stacklevel=2,
        )
    width = (omega_max - omega_min) / n
    jitter = rng.generator(seed, "jitter").uniform(0.0, 1.0, n)
    phases = rng.generator(seed, "phases").uniform(-math.pi, math.pi, n)
    phases[phases >= math.pi] = -math.pi  # uniform() may round onto the open end
    omegas = omega_min + (np.arange(n) + jitter) * width
    domegas = np.full(n, width)
    amplitudes = np.sqrt(2.0 * pm_spectral_density(omegas, params) * domegas)
    depth = params.effective_depth
    k = solve_dispersion(omegas, depth, params.gravity)
    return SpectralDiscretization(
        omegas=omegas,
        delta_omegas=domegas,
        amplitudes=np.atleast_1d(amplitudes),
        phases=phases,
        wavenumbers=np.atleast_1d(k),
        celerities=omegas / k,
        seed=int(seed),
        meta={"depth": None if math.isinf(depth) else depth, "gravity": params.gravity, "heading": params.heading},
    )
