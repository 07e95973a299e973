"""Stochastic coherent-amplitude beam generators (rotating frame).

All traces are complex amplitudes alpha(t) sampled on a uniform grid, in a
frame rotating at the carrier frequency; spectra are detunings from the
carrier.  |alpha|^2 has units of photon flux (photons per second) and its
stationary mean is nu * Gamma / 4 for every CW model.

Families
--------
thermal          complex Ornstein-Uhlenbeck process (exact discretization)
laser            constant modulus, Wiener phase diffusion at rate Gamma
jittered_laser   phase diffusion plus a slowly wandering OU detuning
kspace_product   independent fixed-modulus, random-phase frequency modes
periodic_thermal independent complex-Gaussian frequency modes (exactly periodic)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi

FAMILIES = ("thermal", "laser", "jittered_laser", "kspace_product", "periodic_thermal")

# RNG channel ids; the jitter detuning uses its own channel so that a
# jittered trace with zero band reproduces the plain laser trace bit for bit.
_CHANNEL_FIELD = 0
_CHANNEL_JITTER = 1
_CHANNEL_COUNTS = 2


def trace_rng(master_seed: int, trace_index: int, channel: int = _CHANNEL_FIELD) -> np.random.Generator:
    """Per-trace RNG stream: PCG64 seeded by SeedSequence(master_seed,
    spawn_key=(trace_index, channel)).  Pure function of its arguments."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trace_index, channel))
    return np.random.Generator(np.random.PCG64(ss))


def lorentzian(omega, fwhm: float, center: float = 0.0):
    """Unit-peak Lorentzian (fwhm/2)^2 / ((fwhm/2)^2 + (omega-center)^2)."""
    half = fwhm / 2.0
    return half**2 / (half**2 + (np.asarray(omega, dtype=float) - center) ** 2)


@dataclass(frozen=True)
class BeamModelSpec:
    """Beam model family and its physical parameters."""

    family: str
    nu: float                                   # photons per coherence time
    gamma: float                                # linewidth, 1/s
    jitter_band: float = 0.0                    # Delta omega, rad/s (jittered only)
    jitter_corr_time: Optional[float] = None    # s (jittered only)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise DomainError(f"nu must be finite and >= 0, got {self.nu!r}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError(f"gamma must be finite and > 0, got {self.gamma!r}")
        if self.family == "jittered_laser":
            if self.jitter_band < 0 or not math.isfinite(self.jitter_band):
                raise DomainError("jitter_band must be finite and >= 0")
            if self.jitter_band > 0:
                if self.jitter_band <= self.gamma:
                    raise DomainError(
                        "jittered_laser requires jitter_band > gamma (or exactly 0 for the degenerate case)"
                    )
                if self.jitter_corr_time is None or self.jitter_corr_time <= 1.0 / self.gamma:
                    raise DomainError("jittered_laser requires jitter_corr_time > 1/gamma")

    @property
    def mean_flux(self) -> float:
        """Stationary mean photon flux nu * Gamma / 4."""
        return self.nu * self.gamma / 4.0


def nu_from_cavity(kappa: float, mu: float, gamma: float) -> float:
    """Photons per coherence time from cavity output rate kappa and mean
    intracavity photon number mu: nu = kappa * mu * 4 / gamma."""
    if kappa < 0 or mu < 0 or gamma <= 0:
        raise DomainError("kappa, mu must be >= 0 and gamma > 0")
    return kappa * mu * 4.0 / gamma


@dataclass(frozen=True)
class FieldTrace:
    """One realization of a beam's coherent amplitude on a uniform time grid."""

    samples: np.ndarray          # complex128, units sqrt(photons/s)
    dt: float
    model: BeamModelSpec
    master_seed: int
    trace_index: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        if self.dt <= 0 or not math.isfinite(self.dt):
            raise DomainError(f"dt must be finite and > 0, got {self.dt!r}")
        if samples.ndim != 1 or samples.size < 2:
            raise DomainError("trace must hold at least 2 samples")
        if not np.all(np.isfinite(samples.view(np.float64))):
            raise DomainError("trace contains non-finite samples")

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n_samples * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    def intensity(self) -> np.ndarray:
        """Instantaneous photon flux |alpha|^2."""
        return self.samples.real**2 + self.samples.imag**2


def _check_dt(model: BeamModelSpec, dt: float) -> None:
    bound = 0.01 / model.gamma
    if dt > bound * (1.0 + 1e-12):
        raise ConfigurationError(
            f"dt={dt:g} too coarse for gamma={model.gamma:g}; require dt <= 0.01/gamma = {bound:g}"
        )
    if model.family == "jittered_laser" and model.jitter_band * dt > 0.1:
        warnings.warn(
            f"dt*jitter_band = {model.jitter_band * dt:.3g} > 0.1; jitter phase steps are coarse",
            stacklevel=3,
        )


def _check_duration(model: BeamModelSpec, dt: float, n: int) -> None:
    if n * dt <= 10.0 / model.gamma:
        raise ConfigurationError(
            f"duration {n * dt:g} too short; require duration > 10/gamma = {10.0 / model.gamma:g}"
        )


def _ou_step_coefficients(nu: float, gamma: float, dt: float) -> tuple[float, float]:
    """Exact one-step update for the complex OU field: decay factor a and total
    complex noise variance sigma^2 per step (stationary E|alpha|^2 = nu gamma / 4)."""
    a = math.exp(-gamma * dt / 2.0)
    sigma2 = (nu * gamma / 4.0) * (1.0 - a * a)
    return a, sigma2


def gen_thermal_trace(model: BeamModelSpec, dt: float, n: int, master_seed: int,
                      trace_index: int = 0) -> FieldTrace:
    """Exact-discretization complex OU process with kernel exp(-Gamma tau / 2)."""
    if model.family != "thermal":
        raise DomainError(f"expected family 'thermal', got {model.family!r}")
    _check_dt(model, dt)
    rng = trace_rng(master_seed, trace_index)
    a, sigma2 = _ou_step_coefficients(model.nu, model.gamma, dt)
    re = rng.standard_normal(n)
    im = rng.standard_normal(n)
    w = (re + 1j * im) / math.sqrt(2.0)       # unit-variance complex normals
    x = w * math.sqrt(sigma2)
    x[0] = w[0] * math.sqrt(model.mean_flux)  # stationary initial sample
    samples = lfilter([1.0], [1.0, -a], x)
    return FieldTrace(samples=samples, dt=dt, model=model,
                      master_seed=master_seed, trace_index=trace_index)


def _diffusion_phase(model: BeamModelSpec, dt: float, n: int, rng: np.random.Generator,
                     extra_increments: Optional[np.ndarray] = None) -> np.ndarray:
    """phi_0 uniform on [0, 2pi), then phi_{j+1} = phi_j + sqrt(Gamma dt) g_j (+ extra)."""
    phi0 = rng.uniform(0.0, TWO_PI)
    g = rng.standard_normal(n - 1)
    inc = math.sqrt(model.gamma * dt) * g
    if extra_increments is not None:
        inc = inc + extra_increments
    phi = np.empty(n)
    phi[0] = phi0
    np.cumsum(inc, out=phi[1:])
    phi[1:] += phi0
    return phi


def gen_laser_trace(model: BeamModelSpec, dt: float, n: int, master_seed: int,
                    trace_index: int = 0) -> FieldTrace:
    """Constant-modulus phase-diffusing laser field."""
    if model.family != "laser":
        raise DomainError(f"expected family 'laser', got {model.family!r}")
    _check_dt(model, dt)
    rng = trace_rng(master_seed, trace_index)
    phi = _diffusion_phase(model, dt, n, rng)
    samples = math.sqrt(model.mean_flux) * np.exp(1j * phi)
    return FieldTrace(samples=samples, dt=dt, model=model,
                      master_seed=master_seed, trace_index=trace_index)


def gen_jittered_laser_trace(model: BeamModelSpec, dt: float, n: int, master_seed: int,
                             trace_index: int = 0) -> FieldTrace:
    """Phase-diffusing laser whose center frequency wanders in a band.

    The instantaneous detuning is a real OU process with stationary standard
    deviation jitter_band/2 and the given correlation time; it adds
    detuning * dt to each phase increment.  With jitter_band == 0 the trace
    is bit-identical to gen_laser_trace at the same seed.
    """
    if model.family != "jittered_laser":
        raise DomainError(f"expected family 'jittered_laser', got {model.family!r}")
    _check_dt(model, dt)
    rng = trace_rng(master_seed, trace_index)
    extra = None
    if model.jitter_band > 0:
        jrng = trace_rng(master_seed, trace_index, _CHANNEL_JITTER)
        s = model.jitter_band / 2.0
        aj = math.exp(-dt / model.jitter_corr_time)
        h = jrng.standard_normal(n - 1) * (s * math.sqrt(1.0 - aj * aj))
        h[0] = jrng.standard_normal() * s  # stationary start (consumes one extra draw)
        detuning = lfilter([1.0], [1.0, -aj], h)
        extra = detuning * dt
    phi = _diffusion_phase(model, dt, n, rng, extra_increments=extra)
    samples = math.sqrt(model.mean_flux) * np.exp(1j * phi)
    return FieldTrace(samples=samples, dt=dt, model=model,
                      master_seed=master_seed, trace_index=trace_index)


def _mode_grid(dt: float, n: int) -> np.ndarray:
    """DFT detuning grid, spacing 2 pi / duration (numpy fft ordering)."""
    return TWO_PI * np.fft.fftfreq(n, d=dt)


def _mode_mean_photons(model: BeamModelSpec, dt: float, n: int) -> np.ndarray:
    """Per-mode mean |A_l|^2 = nu f(omega_l) / duration, so that the trace
    alpha_j = sum_l A_l exp(-i omega_l t_j) has mean flux ~ nu Gamma / 4."""
    omega = _mode_grid(dt, n)
    return model.nu * lorentzian(omega, model.gamma) / (n * dt)


def gen_kspace_product_field(nu: float, gamma: float, dt: float, n: int, master_seed: int,
                             trace_index: int = 0) -> FieldTrace:
    """Sample of the per-frequency-mode product of laser states: each discrete
    mode gets a deterministic modulus sqrt(nu f(omega_l) / duration) and an
    independent uniform phase."""
    model = BeamModelSpec(family="kspace_product", nu=nu, gamma=gamma)
    _check_duration(model, dt, n)
    rng = trace_rng(master_seed, trace_index)
    theta = rng.uniform(0.0, TWO_PI, n)
    modes = np.sqrt(_mode_mean_photons(model, dt, n)) * np.exp(1j * theta)
    samples = np.fft.fft(modes)  # sum_l A_l exp(-i omega_l t_j)
    return FieldTrace(samples=samples, dt=dt, model=model,
                      master_seed=master_seed, trace_index=trace_index)


def gen_periodic_thermal_field(nu: float, gamma: float, dt: float, n: int, master_seed: int,
                               trace_index: int = 0) -> FieldTrace:
    """Exactly periodic thermal realization: independent complex-Gaussian modes
    with E|A_l|^2 = nu f(omega_l) / duration."""
    model = BeamModelSpec(family="periodic_thermal", nu=nu, gamma=gamma)
    _check_duration(model, dt, n)
    rng = trace_rng(master_seed, trace_index)
    re = rng.standard_normal(n)
    im = rng.standard_normal(n)
    w = (re + 1j * im) / math.sqrt(2.0)
    modes = np.sqrt(_mode_mean_photons(model, dt, n)) * w
    samples = np.fft.fft(modes)
    return FieldTrace(samples=samples, dt=dt, model=model,
                      master_seed=master_seed, trace_index=trace_index)


_GENERATORS = {
    "thermal": gen_thermal_trace,
    "laser": gen_laser_trace,
    "jittered_laser": gen_jittered_laser_trace,
}


def generate_trace(model: BeamModelSpec, dt: float, n: int, master_seed: int,
                   trace_index: int = 0) -> FieldTrace:
    """Dispatch to the family's generator."""
    if model.family in _GENERATORS:
        return _GENERATORS[model.family](model, dt, n, master_seed, trace_index)
    if model.family == "kspace_product":
        return gen_kspace_product_field(model.nu, model.gamma, dt, n, master_seed, trace_index)
    if model.family == "periodic_thermal":
        return gen_periodic_thermal_field(model.nu, model.gamma, dt, n, master_seed, trace_index)
    raise DomainError(f"no generator for family {model.family!r}")


def generate_ensemble(model: BeamModelSpec, dt: float, n: int, master_seed: int,
                      n_traces: int, start_index: int = 0) -> Iterator[FieldTrace]:
    """Lazily generate n_traces independent traces with consecutive trace indices."""
    if n_traces < 1:
        raise DomainError("n_traces must be >= 1")
    for i in range(start_index, start_index + n_traces):
        yield generate_trace(model, dt, n, master_seed, i)
